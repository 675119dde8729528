//! The coloured pigeonhole experiment.
//!
//! `q` colour groups of `z` balls each are thrown independently into `n`
//! boxes under a measure `mu`. The event of interest is that some box holds at
//! least one ball of every colour. When `z >= 2 n^(1-1/q)` its probability is
//! at least `1 - exp(-c z / n^(1-1/q))` for any `c <= -ln(1 - 2^-q) / 4`,
//! in particular `c = 2^(-q-2)`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{weighted::WeightedIndex, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{map_indices, split_rng};

/// Default cap on the number of outcomes the exact enumerator may visit.
pub const DEFAULT_EXACT_BUDGET: u128 = 1 << 22;

/// Trials per random stream in [`coincidence_simulate`].
pub const TRIAL_CHUNK: u64 = 1 << 14;

/// Box measure. Exact weights are integers; `mu_i = w_i / sum(w)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Uniform,
    /// `mu_i` proportional to `2^-i`.
    Geometric,
    /// `mu_i` proportional to `i`.
    Linear,
    Weights(Vec<u64>),
}

impl Measure {
    pub fn parse(s: &str) -> Result<Measure> {
        match s {
            "uniform" => Ok(Measure::Uniform),
            "geometric" => Ok(Measure::Geometric),
            "linear" => Ok(Measure::Linear),
            _ => Err(Error::InvalidParams(format!("unknown measure {s:?} (uniform|geometric|linear)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Uniform => "uniform",
            Measure::Geometric => "geometric",
            Measure::Linear => "linear",
            Measure::Weights(_) => "weights",
        }
    }

    pub fn exact_weights(&self, n: usize) -> Result<Vec<BigUint>> {
        let w: Vec<BigUint> = match self {
            Measure::Uniform => vec![BigUint::one(); n],
            Measure::Geometric => (1..=n).map(|i| BigUint::one() << (n - i)).collect(),
            Measure::Linear => (1..=n).map(BigUint::from).collect(),
            Measure::Weights(v) => {
                if v.len() != n {
                    return Err(Error::InvalidParams(format!("{} weights for {n} boxes", v.len())));
                }
                v.iter().map(|&x| BigUint::from(x)).collect()
            }
        };
        if w.iter().all(Zero::is_zero) {
            return Err(Error::InvalidParams("measure has no mass".into()));
        }
        Ok(w)
    }

    pub fn float_weights(&self, n: usize) -> Result<Vec<f64>> {
        Ok(match self {
            Measure::Uniform => vec![1.0; n],
            Measure::Geometric => (1..=n).map(|i| 0.5f64.powi(i as i32)).collect(),
            Measure::Linear => (1..=n).map(|i| i as f64).collect(),
            Measure::Weights(v) => {
                if v.len() != n {
                    return Err(Error::InvalidParams(format!("{} weights for {n} boxes", v.len())));
                }
                v.iter().map(|&x| x as f64).collect()
            }
        })
    }
}

/// The constant `c` in the lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundConstant {
    /// `2^(-q-2)`.
    Headline,
    /// `-ln(1 - 2^-q) / 4`, the largest admissible value.
    Sharp,
    Custom(f64),
}

impl BoundConstant {
    pub fn value(self, q: usize) -> f64 {
        match self {
            BoundConstant::Headline => 0.5f64.powi(q as i32 + 2),
            BoundConstant::Sharp => sharp_constant(q),
            BoundConstant::Custom(c) => c,
        }
    }
}

pub fn sharp_constant(q: usize) -> f64 {
    -0.25 * (-(0.5f64.powi(q as i32))).ln_1p()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PigeonholeConfig {
    pub n: usize,
    pub q: usize,
    pub z: usize,
    pub mu: Measure,
    pub c: BoundConstant,
    /// `z >= 2 n^(1-1/q)`, decided in exact integer arithmetic.
    pub hypothesis_met: bool,
}

impl PigeonholeConfig {
    pub fn new(n: usize, q: usize, z: usize, mu: Measure) -> Result<PigeonholeConfig> {
        if n < 1 || q < 2 || z < 1 {
            return Err(Error::InvalidParams(format!("need n >= 1, q >= 2, z >= 1 (got n={n}, q={q}, z={z})")));
        }
        if q > 31 {
            return Err(Error::InvalidParams("at most 31 colours".into()));
        }
        mu.exact_weights(n)?;
        Ok(PigeonholeConfig { n, q, z, mu, c: BoundConstant::Headline, hypothesis_met: hypothesis_holds(n, q, z) })
    }

    pub fn with_constant(mut self, c: BoundConstant) -> PigeonholeConfig {
        self.c = c;
        self
    }

    /// `n^(1-1/q)`.
    pub fn scale(&self) -> f64 {
        (self.n as f64).powf(1.0 - 1.0 / self.q as f64)
    }

    /// Smallest `z` meeting the hypothesis for this `n`, `q`.
    pub fn min_balls(n: usize, q: usize) -> usize {
        let mut z = (2.0 * (n as f64).powf(1.0 - 1.0 / q as f64)).floor().max(1.0) as usize;
        while z > 1 && hypothesis_holds(n, q, z - 1) {
            z -= 1;
        }
        while !hypothesis_holds(n, q, z) {
            z += 1;
        }
        z
    }
}

/// `z >= 2 n^(1-1/q)`  <=>  `z^q >= 2^q n^(q-1)`.
pub fn hypothesis_holds(n: usize, q: usize, z: usize) -> bool {
    let lhs = BigUint::from(z).pow(q as u32);
    let rhs = (BigUint::one() << q) * BigUint::from(n).pow(q as u32 - 1);
    lhs >= rhs
}

/// `1 - exp(-c z / n^(1-1/q))`.
pub fn coincidence_bound(cfg: &PigeonholeConfig) -> Result<f64> {
    if !cfg.hypothesis_met {
        return Err(Error::Precondition(format!(
            "z >= 2 n^(1-1/q) fails: z = {} < 2 * {}^(1-1/{}) = {:.4}",
            cfg.z,
            cfg.n,
            cfg.q,
            2.0 * cfg.scale()
        )));
    }
    let c = cfg.c.value(cfg.q);
    let c_max = sharp_constant(cfg.q);
    if !(c > 0.0) || c > c_max * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("constant c = {c} must lie in (0, {c_max}]")));
    }
    Ok(-(-c * cfg.z as f64 / cfg.scale()).exp_m1())
}

/// Exact coincidence probability by enumerating every placement of the `qz`
/// balls (branches are cut once a box already holds all colours; the cut
/// subtree contributes its full mass).
pub fn coincidence_exact(cfg: &PigeonholeConfig) -> Result<BigRational> {
    coincidence_exact_with_budget(cfg, DEFAULT_EXACT_BUDGET)
}

pub fn coincidence_exact_with_budget(cfg: &PigeonholeConfig, budget: u128) -> Result<BigRational> {
    let balls = cfg.q * cfg.z;
    let outcomes = (cfg.n as f64).powi(balls as i32);
    if outcomes > budget as f64 {
        return Err(Error::ResourceLimit {
            what: "pigeonhole enumeration",
            needed: if outcomes >= u128::MAX as f64 { u128::MAX } else { outcomes as u128 },
            budget,
        });
    }
    let weights = cfg.mu.exact_weights(cfg.n)?;
    let total: BigUint = weights.iter().sum();
    // total^k for k = 0..=balls
    let mut powers = vec![BigUint::one()];
    for k in 0..balls {
        let next = &powers[k] * &total;
        powers.push(next);
    }
    let mut search = Enumeration {
        n: cfg.n,
        z: cfg.z,
        balls,
        full: (1u32 << cfg.q) - 1,
        weights: &weights,
        powers: &powers,
        masks: vec![0u32; cfg.n],
        hits: BigUint::zero(),
    };
    search.run(0, &BigUint::one());
    Ok(BigRational::new(search.hits.into(), powers[balls].clone().into()))
}

struct Enumeration<'a> {
    n: usize,
    z: usize,
    balls: usize,
    full: u32,
    weights: &'a [BigUint],
    powers: &'a [BigUint],
    masks: Vec<u32>,
    hits: BigUint,
}

impl Enumeration<'_> {
    fn run(&mut self, ball: usize, mass: &BigUint) {
        if ball == self.balls {
            return;
        }
        let colour = 1u32 << (ball / self.z);
        for b in 0..self.n {
            if self.weights[b].is_zero() {
                continue;
            }
            let next = mass * &self.weights[b];
            let before = self.masks[b];
            let after = before | colour;
            if after == self.full {
                self.hits += next * &self.powers[self.balls - ball - 1];
                continue;
            }
            self.masks[b] = after;
            self.run(ball + 1, &next);
            self.masks[b] = before;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Monte Carlo estimate of the coincidence probability. Trials run in chunks
/// of [`TRIAL_CHUNK`] on split streams of `seed`, so the estimate is fixed by
/// `(seed, trials)` whatever the thread count.
pub fn coincidence_simulate(cfg: &PigeonholeConfig, trials: u64, seed: u64) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let weights = cfg.mu.float_weights(cfg.n)?;
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidParams(format!("measure: {e}")))?;
    let chunks = trials.div_ceil(TRIAL_CHUNK) as usize;
    let counts = map_indices(chunks, |c| {
        let mut rng = split_rng(seed, c as u64);
        let count = TRIAL_CHUNK.min(trials - c as u64 * TRIAL_CHUNK);
        let mut masks = vec![0u32; cfg.n];
        let mut touched = Vec::with_capacity(cfg.q * cfg.z);
        (0..count).filter(|_| one_trial(cfg, &dist, &mut rng, &mut masks, &mut touched)).count() as u64
    });
    let successes: u64 = counts.iter().sum();
    let p = successes as f64 / trials as f64;
    Ok(SimulationResult { trials, successes, estimate: p, stderr: (p * (1.0 - p) / trials as f64).sqrt() })
}

fn one_trial<R: Rng>(
    cfg: &PigeonholeConfig,
    dist: &WeightedIndex<f64>,
    rng: &mut R,
    masks: &mut [u32],
    touched: &mut Vec<usize>,
) -> bool {
    let full = (1u32 << cfg.q) - 1;
    let mut hit = false;
    'colours: for colour in 0..cfg.q {
        let bit = 1u32 << colour;
        for _ in 0..cfg.z {
            let b = dist.sample(rng);
            if masks[b] == 0 {
                touched.push(b);
            }
            masks[b] |= bit;
            if masks[b] == full {
                hit = true;
                break 'colours;
            }
        }
    }
    for b in touched.drain(..) {
        masks[b] = 0;
    }
    hit
}

/// Exact probability as `f64`, for reporting.
pub fn to_f64(p: &BigRational) -> f64 {
    p.to_f64().unwrap_or(f64::NAN)
}
