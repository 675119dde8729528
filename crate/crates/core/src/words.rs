//! Free-group words over `m` generators and the uniform samplers that
//! produce random presentations.
//!
//! Positions are one-based and inclusive (`subword(u, 1, |u|) == u`).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::{map_indices, split_rng};

/// Largest supported generator count (generators print as `a..z`).
pub const MAX_GENERATORS: u32 = 26;

/// Default cap on the total number of letters a sampled presentation may hold.
pub const DEFAULT_LETTER_BUDGET: u128 = 1 << 31;

/// Relators per independent random stream when sampling from a seed.
pub const SAMPLE_CHUNK: usize = 1 << 12;

/// A generator or its inverse. Generator `i` (one-based) is stored as
/// `2(i-1)`, its inverse as `2(i-1)+1`, so inversion flips the low bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: u32, inverted: bool) -> Letter {
        assert!(
            (1..=MAX_GENERATORS).contains(&generator),
            "generator index {generator} out of range"
        );
        Letter(((generator - 1) * 2) as u8 | inverted as u8)
    }

    /// Letter with dense index `code` in `0..2m`.
    pub fn from_code(code: usize) -> Letter {
        assert!(code < 2 * MAX_GENERATORS as usize);
        Letter(code as u8)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn generator(self) -> u32 {
        (self.0 >> 1) as u32 + 1
    }

    pub fn is_inverted(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + (self.0 >> 1)) as char;
        if self.is_inverted() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii_lowercase() {
            Some(Letter::new(c as u32 - 'a' as u32 + 1, false))
        } else if c.is_ascii_uppercase() {
            Some(Letter::new(c as u32 - 'A' as u32 + 1, true))
        } else {
            None
        }
    }

    /// All `2m` letters in code order: a, A, b, B, ...
    pub fn alphabet(m: u32) -> impl Iterator<Item = Letter> {
        (0..2 * m as usize).map(Letter::from_code)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_char(self.to_char())
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = char::deserialize(d)?;
        Letter::from_char(c).ok_or_else(|| serde::de::Error::custom(format!("not a letter: {c:?}")))
    }
}

/// A freely reduced word. The empty word is the identity and prints as `1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    /// Wraps letters that are already known to be freely reduced.
    ///
    /// Panics in debug builds if they are not.
    pub fn from_reduced(letters: Vec<Letter>) -> Word {
        debug_assert!(is_freely_reduced(&letters), "word is not freely reduced");
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One-based letter access, `r[i]`.
    pub fn at(&self, i: usize) -> Option<Letter> {
        if i == 0 {
            None
        } else {
            self.0.get(i - 1).copied()
        }
    }

    /// Largest generator index used, or 0 for the empty word.
    pub fn max_generator(&self) -> u32 {
        self.0.iter().map(|l| l.generator()).max().unwrap_or(0)
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    /// Exponent sum of each generator `1..=m`.
    pub fn exponent_sums(&self, m: u32) -> Vec<i64> {
        let mut sums = vec![0i64; m as usize];
        for l in &self.0 {
            let g = l.generator() as usize - 1;
            if g < sums.len() {
                sums[g] += if l.is_inverted() { -1 } else { 1 };
            }
        }
        sums
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses letters `a-z`/`A-Z` (or `1` for the identity) and freely reduces.
    fn from_str(s: &str) -> Result<Word> {
        if s == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::with_capacity(s.len());
        for (col, c) in s.chars().enumerate() {
            let l = Letter::from_char(c).ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("invalid character {c:?} at column {}", col + 1),
            })?;
            letters.push(l);
        }
        Ok(free_reduce(&letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let raw: Vec<Letter> = if s == "1" {
            Vec::new()
        } else {
            s.chars()
                .map(|c| Letter::from_char(c).ok_or_else(|| serde::de::Error::custom(format!("bad letter {c:?}"))))
                .collect::<std::result::Result<_, _>>()?
        };
        if !is_freely_reduced(&raw) {
            return Err(serde::de::Error::custom(format!("word {s} is not freely reduced")));
        }
        Ok(Word(raw))
    }
}

pub fn is_freely_reduced(letters: &[Letter]) -> bool {
    letters.windows(2).all(|p| p[0] != p[1].inverse())
}

/// Unique freely reduced form of an arbitrary letter sequence.
pub fn free_reduce(raw: &[Letter]) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
    for &l in raw {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

/// Freely reduced form of the product `uv`.
pub fn concat_reduce(u: &Word, v: &Word) -> Word {
    let (a, b) = (u.letters(), v.letters());
    let mut cancel = 0;
    while cancel < a.len() && cancel < b.len() && a[a.len() - 1 - cancel] == b[cancel].inverse() {
        cancel += 1;
    }
    let mut out = Vec::with_capacity(a.len() + b.len() - 2 * cancel);
    out.extend_from_slice(&a[..a.len() - cancel]);
    out.extend_from_slice(&b[cancel..]);
    Word(out)
}

pub fn invert(u: &Word) -> Word {
    Word(u.letters().iter().rev().map(|l| l.inverse()).collect())
}

/// Letters `i..=j` of `u`, one-based inclusive.
pub fn subword(u: &Word, i: usize, j: usize) -> Result<Word> {
    if i < 1 || i > j || j > u.len() {
        return Err(Error::IndexOutOfRange { i, j, len: u.len() });
    }
    Ok(Word(u.letters()[i - 1..j].to_vec()))
}

/// Uniform freely reduced word of length `ell` over `m` generators.
///
/// The first letter is uniform over all `2m` letters; every later letter is
/// uniform over the `2m-1` letters that do not cancel its predecessor.
pub fn sample_word<R: Rng + ?Sized>(m: u32, ell: usize, rng: &mut R) -> Word {
    assert!((2..=MAX_GENERATORS).contains(&m), "m must lie in 2..=26");
    if ell == 0 {
        return Word::empty();
    }
    let first = Letter::from_code(rng.random_range(0..2 * m as usize));
    sample_word_from(first, m, ell, rng)
}

/// Uniform reduced word of length `ell` conditioned on its first letter.
pub fn sample_word_from<R: Rng + ?Sized>(first: Letter, m: u32, ell: usize, rng: &mut R) -> Word {
    let mut letters = Vec::with_capacity(ell);
    if ell == 0 {
        return Word(letters);
    }
    letters.push(first);
    let alphabet = 2 * m as usize;
    for _ in 1..ell {
        let forbidden = letters[letters.len() - 1].inverse().code();
        let mut c = rng.random_range(0..alphabet - 1);
        if c >= forbidden {
            c += 1;
        }
        letters.push(Letter::from_code(c));
    }
    Word(letters)
}

/// One sampling regime of the density model: `num` independent uniform
/// reduced relators of length `ell` over `m` generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: u32,
    pub ell: usize,
    pub num: u64,
    /// Density the caller asked for, when `num` was materialized from one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub requested_density: Option<f64>,
}

impl ModelParams {
    pub fn new(m: u32, ell: usize, num: u64) -> Result<ModelParams> {
        check_m_ell(m, ell)?;
        if num == 0 {
            return Err(Error::InvalidParams("num must be positive".into()));
        }
        Ok(ModelParams { m, ell, num, requested_density: None })
    }

    /// `num = round((2m-1)^(density * ell))`.
    pub fn from_density(m: u32, ell: usize, density: f64) -> Result<ModelParams> {
        check_m_ell(m, ell)?;
        if !density.is_finite() {
            return Err(Error::InvalidParams(format!("density {density} is not finite")));
        }
        let exact = (density * ell as f64 * ((2 * m - 1) as f64).ln()).exp();
        let num = exact.round();
        if num < 1.0 {
            return Err(Error::InvalidParams(format!(
                "density {density} gives (2m-1)^(D*ell) = {exact:.3e}, which rounds to no relators"
            )));
        }
        if num > u64::MAX as f64 {
            return Err(Error::ResourceLimit {
                what: "relator count",
                needed: u128::MAX,
                budget: u64::MAX as u128,
            });
        }
        Ok(ModelParams { m, ell, num: num as u64, requested_density: Some(density) })
    }

    /// Density `1/2 - f` for a fixed value `f = f(ell)`.
    pub fn from_rate_value(m: u32, ell: usize, f: f64) -> Result<ModelParams> {
        ModelParams::from_density(m, ell, 0.5 - f)
    }

    /// Generalized density `log_{2m-1}(num) / ell` of the materialized count.
    pub fn density(&self) -> f64 {
        (self.num as f64).ln() / ((2 * self.m - 1) as f64).ln() / self.ell as f64
    }

    /// `1/2 - density`.
    pub fn rate(&self) -> f64 {
        0.5 - self.density()
    }
}

fn check_m_ell(m: u32, ell: usize) -> Result<()> {
    if !(2..=MAX_GENERATORS).contains(&m) {
        return Err(Error::InvalidParams(format!("m = {m} must lie in 2..=26")));
    }
    if ell < 1 {
        return Err(Error::InvalidParams("ell must be at least 1".into()));
    }
    Ok(())
}

/// Generator count plus relator multiset (order kept, duplicates allowed).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub m: u32,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(m: u32, relators: Vec<Word>) -> Result<Presentation> {
        if !(1..=MAX_GENERATORS).contains(&m) {
            return Err(Error::InvalidParams(format!("m = {m} must lie in 1..=26")));
        }
        if let Some(r) = relators.iter().find(|r| r.max_generator() > m) {
            return Err(Error::InvalidParams(format!("relator {r} uses a generator beyond m = {m}")));
        }
        Ok(Presentation { m, relators })
    }

    /// Parses relators written as strings, freely reducing each.
    pub fn parse_relators(m: u32, relators: &[&str]) -> Result<Presentation> {
        let words = relators.iter().map(|s| s.parse()).collect::<Result<Vec<Word>>>()?;
        Presentation::new(m, words)
    }

    pub fn len(&self) -> usize {
        self.relators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relators.is_empty()
    }

    /// Text form: `m=<m>`, then optional `# ` comment lines, then one relator
    /// per line. LF endings, no trailing whitespace.
    pub fn to_text(&self, comments: &[String]) -> String {
        let mut out = format!("m={}\n", self.m);
        for c in comments {
            for line in c.lines() {
                if line.is_empty() {
                    out.push_str("#\n");
                } else {
                    out.push_str("# ");
                    out.push_str(line.trim_end());
                    out.push('\n');
                }
            }
        }
        for r in &self.relators {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Presentation> {
        let mut lines = text.split('\n').enumerate();
        let m = match lines.next() {
            Some((_, first)) => first
                .strip_prefix("m=")
                .and_then(|v| v.trim_end_matches('\r').parse::<u32>().ok())
                .ok_or_else(|| Error::Parse { line: 1, msg: "expected `m=<int>`".into() })?,
            None => return Err(Error::Parse { line: 1, msg: "empty input".into() }),
        };
        let mut relators = Vec::new();
        for (idx, raw) in lines {
            let line = raw.trim_end_matches('\r').trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let w: Word = line.parse().map_err(|e| match e {
                Error::Parse { msg, .. } => Error::Parse { line: idx + 1, msg },
                other => other,
            })?;
            if w.max_generator() > m {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("relator {line} uses a generator beyond m = {m}"),
                });
            }
            relators.push(w);
        }
        Presentation::new(m, relators)
    }
}

/// `params.num` independent draws of [`sample_word`] from one stream.
pub fn sample_presentation<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<Presentation> {
    sample_presentation_with_budget(params, rng, DEFAULT_LETTER_BUDGET)
}

pub fn sample_presentation_with_budget<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
    letter_budget: u128,
) -> Result<Presentation> {
    check_budget(params, letter_budget)?;
    let relators = (0..params.num).map(|_| sample_word(params.m, params.ell, rng)).collect();
    Ok(Presentation { m: params.m, relators })
}

/// Seeded sampling split into chunks of [`SAMPLE_CHUNK`] relators, chunk `c`
/// drawing from stream `c`. The result is the same for any thread count.
pub fn sample_presentation_seeded(params: &ModelParams, seed: u64) -> Result<Presentation> {
    check_budget(params, DEFAULT_LETTER_BUDGET)?;
    let num = params.num as usize;
    let chunks = num.div_ceil(SAMPLE_CHUNK);
    let parts = map_indices(chunks, |c| {
        let mut rng = split_rng(seed, c as u64);
        let count = SAMPLE_CHUNK.min(num - c * SAMPLE_CHUNK);
        (0..count).map(|_| sample_word(params.m, params.ell, &mut rng)).collect::<Vec<_>>()
    });
    Ok(Presentation { m: params.m, relators: parts.into_iter().flatten().collect() })
}

fn check_budget(params: &ModelParams, letter_budget: u128) -> Result<()> {
    let needed = params.num as u128 * params.ell as u128;
    if needed > letter_budget {
        return Err(Error::ResourceLimit { what: "sampled letters", needed, budget: letter_budget });
    }
    Ok(())
}
