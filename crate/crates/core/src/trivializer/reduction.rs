//! w-reductions: deleting a segment `d w d^-1` that sits between letters
//! `s`, `t` with `s != t^-1`. If `w` is trivial the word keeps its value in
//! the group and stays freely reduced.

use serde::{Deserialize, Serialize};

use crate::words::{Letter, Word};

use super::TrivializerConfig;

/// Letters set aside at the front of every relator before blocking.
pub const RESERVED_PREFIX: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WReductionEvent {
    /// One-based inclusive span of the deleted `d w d^-1` in the host word.
    pub start: usize,
    pub end: usize,
    pub conjugator: Word,
    pub s_letter: Letter,
    pub t_letter: Letter,
}

impl WReductionEvent {
    pub fn removed(&self) -> usize {
        self.end + 1 - self.start
    }
}

/// Leftmost w-reduction whose whole pattern `s d w d^-1 t` lies inside the
/// one-based inclusive window `[lo, hi]` of `letters`. `d` is grown outward
/// from the occurrence of `w` for as long as it keeps cancelling; the
/// occurrence is usable only if that stops at a mismatch still inside the
/// window (a shorter `d` would leave `s = t^-1`).
pub(crate) fn find_in_window(letters: &[Letter], w: &[Letter], lo: usize, hi: usize) -> Option<WReductionEvent> {
    let len = w.len();
    if len == 0 || lo < 1 || hi > letters.len() || hi < lo || hi + 1 - lo < len + 2 {
        return None;
    }
    // p = one-based start of the occurrence of w; needs room for s and t
    for p in lo + 1..=hi - len {
        if &letters[p - 1..p - 1 + len] != w {
            continue;
        }
        let mut left = p - 1; // candidate s
        let mut right = p + len; // candidate t
        while left >= lo && right <= hi && letters[left - 1] == letters[right - 1].inverse() {
            left -= 1;
            right += 1;
        }
        if left < lo || right > hi {
            continue;
        }
        return Some(WReductionEvent {
            start: left + 1,
            end: right - 1,
            conjugator: Word::from_reduced(letters[left..p - 1].to_vec()),
            s_letter: letters[left - 1],
            t_letter: letters[right - 1],
        });
    }
    None
}

/// Deletes the span of `event` from `r`.
pub(crate) fn apply(r: &Word, events: &[WReductionEvent]) -> Word {
    let mut out = Vec::with_capacity(r.len());
    let mut next = 1;
    for e in events {
        out.extend_from_slice(&r.letters()[next - 1..e.start - 1]);
        next = e.end + 1;
    }
    out.extend_from_slice(&r.letters()[next - 1..]);
    Word::from_reduced(out)
}

/// First w-reduction of `r` at or after position `search_from`.
pub fn w_reduce_once(r: &Word, w: &Word, search_from: usize) -> Option<(Word, WReductionEvent)> {
    let event = find_in_window(r.letters(), w.letters(), search_from.max(1), r.len())?;
    let reduced = apply(r, std::slice::from_ref(&event));
    Some((reduced, event))
}

/// One-based inclusive windows of the full blocks of a word of length `len`.
/// The first [`RESERVED_PREFIX`] letters are skipped and a trailing remainder
/// shorter than a block is not used.
pub fn block_windows(len: usize, block_size: usize) -> Vec<(usize, usize)> {
    if block_size == 0 || len < RESERVED_PREFIX {
        return Vec::new();
    }
    let b = (len - RESERVED_PREFIX) / block_size;
    (0..b)
        .map(|i| {
            let lo = RESERVED_PREFIX + 1 + i * block_size;
            (lo, lo + block_size - 1)
        })
        .collect()
}

/// Applies the first available w-reduction inside each full block.
pub fn reduce_relator(r: &Word, w: &Word, cfg: &TrivializerConfig) -> (Word, Vec<WReductionEvent>) {
    let events: Vec<WReductionEvent> = block_windows(r.len(), cfg.block_size)
        .into_iter()
        .filter_map(|(lo, hi)| find_in_window(r.letters(), w.letters(), lo, hi))
        .collect();
    if events.is_empty() {
        return (r.clone(), events);
    }
    (apply(r, &events), events)
}

/// Blocks per random stream in [`planted_block_rate`].
pub const PLANTED_CHUNK: u64 = 1 << 10;

/// Outcome of the planted-`w` block experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockRate {
    pub blocks: u64,
    pub reduced: u64,
    pub rate: f64,
    pub stderr: f64,
}

/// Fraction of random blocks of the default length for `(m, k)` that admit a
/// w-reduction, where each block gets a fresh uniform reduced `w` of length
/// `2k` and sits behind the reserved prefix of a uniform reduced word.
pub fn planted_block_rate(m: u32, k: usize, blocks: u64, seed: u64) -> crate::Result<BlockRate> {
    use crate::rng::{map_indices, split_rng};
    use crate::words::sample_word;

    if blocks == 0 {
        return Err(crate::Error::InvalidParams("need at least one block".into()));
    }
    let probe = TrivializerConfig::new(m, 2 * k, k)?;
    let len = RESERVED_PREFIX + probe.block_size;
    let cfg = TrivializerConfig::new(m, len, k)?;
    let chunks = blocks.div_ceil(PLANTED_CHUNK);
    let counts = map_indices(chunks as usize, |c| {
        let mut rng = split_rng(seed, c as u64);
        let count = PLANTED_CHUNK.min(blocks - c as u64 * PLANTED_CHUNK);
        let mut hits = 0u64;
        for _ in 0..count {
            let w = sample_word(m, 2 * k, &mut rng);
            let r = sample_word(m, len, &mut rng);
            let (_, events) = reduce_relator(&r, &w, &cfg);
            hits += events.len() as u64;
        }
        hits
    });
    let reduced: u64 = counts.iter().sum();
    let rate = reduced as f64 / blocks as f64;
    Ok(BlockRate { blocks, reduced, rate, stderr: (rate * (1.0 - rate) / blocks as f64).sqrt() })
}
