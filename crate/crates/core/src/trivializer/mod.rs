//! Triviality pipeline: find a short trivial word `w` from a tail collision,
//! shorten every relator by deleting conjugates of `w`, then match certified
//! words that agree after their first letter. Each such match proves
//! `x =_G y` for their first letters; once all `2m` symbols are connected the
//! group is 1 or Z/2.
//!
//! The pipeline is one-sided: it returns `Trivial` with certificates or
//! `Unknown`, never a nontriviality claim.

mod abelian;
mod certificate;
mod collisions;
mod reduction;

pub use abelian::{abelianization_guard, exponent_rank, GuardVerdict};
pub use certificate::{check_certificate, Certificate, Step};
pub use collisions::{find_tail_collisions, tail_hash, TailCollision};
pub use reduction::{
    block_windows, planted_block_rate, reduce_relator, w_reduce_once, BlockRate, WReductionEvent, PLANTED_CHUNK,
    RESERVED_PREFIX,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::map_indices;
use crate::words::{Letter, Presentation, Word};

use collisions::{collision_word, suffix_groups};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivializerConfig {
    pub k: usize,
    pub block_size: usize,
    pub max_rounds: usize,
}

impl TrivializerConfig {
    /// `block_size = (2k+2)(2m-1)^(2k)`, saturating at `usize::MAX`.
    pub fn new(m: u32, ell: usize, k: usize) -> Result<TrivializerConfig> {
        if k == 0 || k > ell {
            return Err(Error::InvalidParams(format!("k = {k} must lie in 1..={ell}")));
        }
        Ok(TrivializerConfig { k, block_size: default_block_size(m, k), max_rounds: 1 })
    }

    /// Config with `k` from [`choose_k`].
    pub fn for_params(m: u32, ell: usize) -> Result<TrivializerConfig> {
        TrivializerConfig::new(m, ell, choose_k(m, ell)?)
    }

    pub fn with_block_size(mut self, block_size: usize) -> Result<TrivializerConfig> {
        if block_size == 0 {
            return Err(Error::InvalidParams("block size must be positive".into()));
        }
        self.block_size = block_size;
        Ok(self)
    }

    pub fn with_max_rounds(mut self, rounds: usize) -> Result<TrivializerConfig> {
        if rounds == 0 {
            return Err(Error::InvalidParams("max_rounds must be at least 1".into()));
        }
        self.max_rounds = rounds;
        Ok(self)
    }

    /// Number of full blocks in a word of length `len`.
    pub fn blocks(&self, len: usize) -> usize {
        len.saturating_sub(RESERVED_PREFIX) / self.block_size
    }
}

fn default_block_size(m: u32, k: usize) -> usize {
    let base = (2 * m - 1) as usize;
    let exp = u32::try_from(2 * k).unwrap_or(u32::MAX);
    base.checked_pow(exp).and_then(|p| p.checked_mul(2 * k + 2)).unwrap_or(usize::MAX)
}

/// `max(1, round(log ell / 2 - log log ell))`, logs in base `2m-1`, capped
/// at `ell`.
pub fn choose_k(m: u32, ell: usize) -> Result<usize> {
    if ell < 2 {
        return Err(Error::InvalidParams(format!("choose_k needs ell >= 2, got {ell}")));
    }
    if m < 2 {
        return Err(Error::InvalidParams(format!("m = {m} must be at least 2")));
    }
    let base = f64::from(2 * m - 1).ln();
    let log = (ell as f64).ln() / base;
    let value = 0.5 * log - log.ln() / base;
    let k = if value.is_finite() && value >= 1.0 { value.round() as usize } else { 1 };
    Ok(k.clamp(1, ell))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// All generators and their inverses are equal: the group is 1 or Z/2.
    Trivial,
    Unknown,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub relators: usize,
    pub k: usize,
    pub block_size: usize,
    /// Full blocks in a relator of maximal length.
    pub blocks: usize,
    /// `ell - b k / 2`, the guaranteed length after reduction.
    pub ell_prime: f64,
    pub rounds: usize,
    /// Trivial words of length `2k` used for reductions, one per round.
    pub w_words: Vec<Word>,
    /// Tail-collision groups seen while searching for `w`.
    pub collision_groups: usize,
    pub reductions_applied: usize,
    pub relators_reduced: usize,
    /// Matches `x = y` found while linking symbols.
    pub equalities_found: usize,
    /// Classes of the 2m symbols after linking.
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// A spanning set of equalities: together with `x = y => x^-1 = y^-1`
    /// they connect every symbol that ended up linked.
    pub certificates: Vec<Certificate>,
    pub stats: Statistics,
    pub guard: GuardVerdict,
    /// The symbols were all linked although the exponent-sum rank says the
    /// group is infinite. Only possible through a bug; the outcome is then
    /// forced to `Unknown`.
    pub guard_conflict: bool,
}

/// Certified-word store. Ids below `relators.len()` are the relators; later
/// ids are derived steps whose references point to smaller ids.
struct Arena<'a> {
    relators: &'a [Word],
    derived: Vec<Step>,
}

impl<'a> Arena<'a> {
    fn len(&self) -> usize {
        self.relators.len() + self.derived.len()
    }

    fn word(&self, id: usize) -> &Word {
        match id.checked_sub(self.relators.len()) {
            None => &self.relators[id],
            Some(d) => self.derived[d].word().expect("derived steps carry words"),
        }
    }

    fn push(&mut self, step: Step) -> usize {
        self.derived.push(step);
        self.len() - 1
    }

    fn deps(&self, id: usize) -> Vec<usize> {
        match id.checked_sub(self.relators.len()) {
            None => Vec::new(),
            Some(d) => match &self.derived[d] {
                Step::TailCollision { first, second, .. } => vec![*first, *second],
                Step::WReduction { host, reducer, .. } => vec![*host, *reducer],
                _ => Vec::new(),
            },
        }
    }

    /// Self-contained certificate for `word(a)[1] = word(b)[1]`.
    fn certificate(&self, a: usize, b: usize) -> Certificate {
        let mut needed = vec![false; self.len()];
        let mut stack = vec![a, b];
        while let Some(id) = stack.pop() {
            if !needed[id] {
                needed[id] = true;
                stack.extend(self.deps(id));
            }
        }
        let mut remap = vec![usize::MAX; self.len()];
        let mut steps = Vec::new();
        for id in (0..self.len()).filter(|&i| needed[i]) {
            remap[id] = steps.len();
            steps.push(match id.checked_sub(self.relators.len()) {
                None => Step::RelatorIsTrivial { relator: id, word: self.relators[id].clone() },
                Some(d) => match self.derived[d].clone() {
                    Step::TailCollision { first, second, k, word } => {
                        Step::TailCollision { first: remap[first], second: remap[second], k, word }
                    }
                    Step::WReduction { host, reducer, start, end, conjugator, s_letter, t_letter, word } => {
                        Step::WReduction {
                            host: remap[host],
                            reducer: remap[reducer],
                            start,
                            end,
                            conjugator,
                            s_letter,
                            t_letter,
                            word,
                        }
                    }
                    other => other,
                },
            });
        }
        steps.push(Step::TailMatchConclusion { first: remap[a], second: remap[b] });
        let (x, y) = (self.word(a).letters()[0], self.word(b).letters()[0]);
        Certificate { x, y, steps }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.0[hi] = lo;
        true
    }

    fn components(&mut self) -> usize {
        (0..self.0.len()).filter(|&i| self.find(i) == i).count()
    }
}

/// Smallest `(i, j)` among certified words with equal tails from `k+1`,
/// different first letters and different letters at `k`, whose `w` is new.
fn first_collision(arena: &Arena, k: usize, used: &[Word], groups_seen: &mut usize) -> Option<(usize, usize, Word)> {
    let words: Vec<&Word> = (0..arena.len()).map(|i| arena.word(i)).collect();
    let groups = suffix_groups(&words, k, |_, _| true);
    *groups_seen += groups.len();
    let mut best: Option<(usize, usize, Word)> = None;
    for g in groups {
        if best.as_ref().is_some_and(|b| b.0 < g[0]) {
            break;
        }
        'group: for (pos, &i) in g.iter().enumerate() {
            for &j in &g[pos + 1..] {
                if let Some(w) = collision_word(words[i], words[j], k) {
                    if used.contains(&w) {
                        continue;
                    }
                    if best.as_ref().is_none_or(|b| (i, j) < (b.0, b.1)) {
                        best = Some((i, j, w));
                    }
                    break 'group;
                }
            }
        }
    }
    best
}

/// Applies the block reductions of `host` one event at a time, right to left
/// so earlier spans keep their positions. Returns the id of the final word.
fn record_reductions(arena: &mut Arena, host: usize, reducer: usize, events: Vec<WReductionEvent>) -> usize {
    let mut current = host;
    for e in events.into_iter().rev() {
        let word = reduction::apply(arena.word(current), std::slice::from_ref(&e));
        current = arena.push(Step::WReduction {
            host: current,
            reducer,
            start: e.start,
            end: e.end,
            conjugator: e.conjugator,
            s_letter: e.s_letter,
            t_letter: e.t_letter,
            word,
        });
    }
    current
}

/// Links first letters of certified words that agree after position 1.
fn link_symbols(arena: &Arena, uf: &mut UnionFind, certs: &mut Vec<Certificate>, stats: &mut Statistics) {
    let words: Vec<&Word> = (0..arena.len()).map(|i| arena.word(i)).collect();
    for g in suffix_groups(&words, 1, |_, _| true) {
        let head = g[0];
        let x = words[head].letters()[0];
        let mut seen: Vec<Letter> = vec![x];
        for &j in &g[1..] {
            let y = words[j].letters()[0];
            if seen.contains(&y) {
                continue;
            }
            seen.push(y);
            stats.equalities_found += 1;
            let merged = uf.union(x.code(), y.code());
            uf.union(x.inverse().code(), y.inverse().code());
            if merged {
                certs.push(arena.certificate(head, j));
            }
        }
    }
}

/// Runs the pipeline. The result does not depend on the thread count.
pub fn trivialize(pres: &Presentation, cfg: &TrivializerConfig) -> Verdict {
    let symbols = 2 * pres.m as usize;
    let max_len = pres.relators.iter().map(Word::len).max().unwrap_or(0);
    let blocks = cfg.blocks(max_len);
    let mut stats = Statistics {
        relators: pres.len(),
        k: cfg.k,
        block_size: cfg.block_size,
        blocks,
        ell_prime: max_len as f64 - (blocks * cfg.k) as f64 / 2.0,
        ..Statistics::default()
    };
    let guard = abelianization_guard(pres);
    let mut arena = Arena { relators: &pres.relators, derived: Vec::new() };
    let mut uf = UnionFind((0..symbols).collect());
    let mut certificates = Vec::new();
    let mut current: Vec<usize> = (0..pres.len()).collect();

    for _ in 0..cfg.max_rounds {
        stats.rounds += 1;
        if let Some((i, j, w)) = first_collision(&arena, cfg.k, &stats.w_words, &mut stats.collision_groups) {
            let reducer = arena.push(Step::TailCollision { first: i, second: j, k: cfg.k, word: w.clone() });
            stats.w_words.push(w.clone());
            let hosts: Vec<&Word> = current.iter().map(|&id| arena.word(id)).collect();
            let results = map_indices(hosts.len(), |r| reduce_relator(hosts[r], &w, cfg).1);
            for (r, events) in results.into_iter().enumerate() {
                if events.is_empty() {
                    continue;
                }
                stats.reductions_applied += events.len();
                stats.relators_reduced += 1;
                current[r] = record_reductions(&mut arena, current[r], reducer, events);
            }
        }
        link_symbols(&arena, &mut uf, &mut certificates, &mut stats);
        if uf.components() == 1 {
            break;
        }
    }

    stats.components = uf.components();
    let linked = symbols > 0 && stats.components == 1;
    let guard_conflict = linked && guard == GuardVerdict::CertainlyNontrivial;
    let outcome = if linked && !guard_conflict { Outcome::Trivial } else { Outcome::Unknown };
    Verdict { outcome, certificates, stats, guard, guard_conflict }
}
