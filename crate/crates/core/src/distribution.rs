//! Exact law of a later letter of a uniform reduced word given its first letter.
//!
//! With `q = 1/(2m-1)` and `s_n = sum_{k<n} (-q)^k`, the letter at offset `n`
//! equals the "special" letter (`x0` for even `n`, `x0^-1` for odd `n`) with
//! probability `q s_{n-1}` and each of the other `2m-1` letters with
//! probability `q s_n`. Everything here is exact rational arithmetic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Letter, MAX_GENERATORS};

/// How a letter at offset `n` relates to the first letter `x0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    SameAsX0,
    InverseOfX0,
    Other,
}

impl Relation {
    pub fn of(x0: Letter, y: Letter) -> Relation {
        if y == x0 {
            Relation::SameAsX0
        } else if y == x0.inverse() {
            Relation::InverseOfX0
        } else {
            Relation::Other
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Relation::SameAsX0 => "same",
            Relation::InverseOfX0 => "inverse",
            Relation::Other => "other",
        }
    }
}

fn check_m(m: u32) -> Result<()> {
    if !(2..=MAX_GENERATORS).contains(&m) {
        return Err(Error::InvalidParams(format!("m = {m} must lie in 2..=26")));
    }
    Ok(())
}

/// `1/(2m-1)`.
pub fn frak_m(m: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2 * m - 1))
}

/// `s_n`, the n-th partial sum of `1 - q + q^2 - ...`; `s_0 = 0`.
pub fn partial_sum(m: u32, n: u32) -> BigRational {
    let q = frak_m(m);
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for _ in 0..n {
        sum += &term;
        term = -(term * &q);
    }
    sum
}

/// Closed-form probability that `x_n` stands in `relation` to `x0`
/// (per letter: for `Other` this is the probability of one specific letter).
pub fn letter_law(m: u32, n: u32, relation: Relation) -> Result<BigRational> {
    check_m(m)?;
    if n == 0 {
        return Err(Error::Precondition("letter law needs an offset n >= 1".into()));
    }
    let special = if n.is_multiple_of(2) { Relation::SameAsX0 } else { Relation::InverseOfX0 };
    let q = frak_m(m);
    Ok(if relation == special { q * partial_sum(m, n - 1) } else { q * partial_sum(m, n) })
}

/// Full distribution of `x_n` given `x0 = a`, indexed by letter code.
#[derive(Clone, Debug, PartialEq)]
pub struct LetterDistribution {
    pub m: u32,
    pub n: u32,
    pub probs: Vec<BigRational>,
}

impl LetterDistribution {
    pub fn x0() -> Letter {
        Letter::from_code(0)
    }

    pub fn prob(&self, y: Letter) -> &BigRational {
        &self.probs[y.code()]
    }

    /// Collapses to one value per relation. Fails if the letters of one class
    /// do not all carry the same probability.
    pub fn by_relation(&self) -> Result<BTreeMap<Relation, BigRational>> {
        let x0 = Self::x0();
        let mut out: BTreeMap<Relation, BigRational> = BTreeMap::new();
        for (code, p) in self.probs.iter().enumerate() {
            let rel = Relation::of(x0, Letter::from_code(code));
            match out.get(&rel) {
                Some(prev) if prev != p => {
                    return Err(Error::Precondition(format!(
                        "letters related by {} to x0 differ: {prev} vs {p}",
                        rel.name()
                    )))
                }
                Some(_) => {}
                None => {
                    out.insert(rel, p.clone());
                }
            }
        }
        Ok(out)
    }
}

/// Exact distribution of `x_n` by pushing the point mass at `x0 = a` through
/// `n` steps of the reduced-word chain (each step uniform over the `2m-1`
/// letters that do not cancel the current one).
pub fn letter_law_oracle(m: u32, n: u32) -> Result<LetterDistribution> {
    check_m(m)?;
    if n == 0 {
        return Err(Error::Precondition("letter law needs an offset n >= 1".into()));
    }
    let size = 2 * m as usize;
    let step = frak_m(m);
    let mut dist = vec![BigRational::zero(); size];
    dist[0] = BigRational::one();
    for _ in 0..n {
        let mut next = vec![BigRational::zero(); size];
        for (from, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let share = p * &step;
            let forbidden = Letter::from_code(from).inverse().code();
            for (to, slot) in next.iter_mut().enumerate() {
                if to != forbidden {
                    *slot += &share;
                }
            }
        }
        dist = next;
    }
    Ok(LetterDistribution { m, n, probs: dist })
}

/// `(q s_{n-1}, q s_n)` ordered so that `lower <= upper`.
pub fn decay_bounds(m: u32, n: u32) -> Result<(BigRational, BigRational)> {
    check_m(m)?;
    if n == 0 {
        return Err(Error::Precondition("decay bounds need n >= 1".into()));
    }
    let q = frak_m(m);
    let a = &q * partial_sum(m, n - 1);
    let b = q * partial_sum(m, n);
    Ok(if a <= b { (a, b) } else { (b, a) })
}

/// One row of the empirical check: a letter at offset `n` after `x0 = a`.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalRow {
    pub n: u32,
    pub letter: Letter,
    pub relation: Relation,
    pub exact: String,
    pub oracle: String,
    pub exact_value: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// `(empirical - exact) / stderr`; zero when both the deviation and the
    /// standard error vanish.
    pub z: f64,
}

/// Samples `samples` reduced words `x0 x1 .. x_nmax` with `x0 = a` and
/// compares the frequency of every letter at every offset `1..=n_max` with
/// the closed form and the oracle. Chunked by [`crate::words::SAMPLE_CHUNK`]
/// over split streams, so the table does not depend on the thread count.
pub fn empirical_table(m: u32, n_max: u32, samples: u64, seed: u64) -> Result<Vec<EmpiricalRow>> {
    use crate::rng::{map_indices, split_rng};
    use crate::words::{sample_word_from, SAMPLE_CHUNK};
    use num_traits::ToPrimitive;

    check_m(m)?;
    if n_max == 0 || samples == 0 {
        return Err(Error::Precondition("need n >= 1 and at least one sample".into()));
    }
    let size = 2 * m as usize;
    let len = n_max as usize + 1;
    let chunk = SAMPLE_CHUNK as u64;
    let chunks = samples.div_ceil(chunk) as usize;
    let partial = map_indices(chunks, |c| {
        let mut rng = split_rng(seed, c as u64);
        let count = chunk.min(samples - c as u64 * chunk);
        let mut counts = vec![0u64; len * size];
        for _ in 0..count {
            let w = sample_word_from(LetterDistribution::x0(), m, len, &mut rng);
            for (pos, l) in w.letters().iter().enumerate().skip(1) {
                counts[pos * size + l.code()] += 1;
            }
        }
        counts
    });
    let mut counts = vec![0u64; len * size];
    for part in partial {
        for (a, b) in counts.iter_mut().zip(part) {
            *a += b;
        }
    }

    let mut rows = Vec::new();
    let x0 = LetterDistribution::x0();
    for n in 1..=n_max {
        let oracle = letter_law_oracle(m, n)?;
        for y in Letter::alphabet(m) {
            let relation = Relation::of(x0, y);
            let exact = letter_law(m, n, relation)?;
            let p = exact.to_f64().unwrap_or(f64::NAN);
            let freq = counts[n as usize * size + y.code()] as f64 / samples as f64;
            let stderr = (p * (1.0 - p) / samples as f64).sqrt();
            let dev = freq - p;
            let z = if stderr > 0.0 { dev / stderr } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
            rows.push(EmpiricalRow {
                n,
                letter: y,
                relation,
                exact: exact.to_string(),
                oracle: oracle.prob(y).to_string(),
                exact_value: p,
                empirical: freq,
                stderr,
                z,
            });
        }
    }
    Ok(rows)
}
