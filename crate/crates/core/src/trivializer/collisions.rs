//! Tail-collision search: pairs of trivial words that agree from position
//! `k+1` on. Tails are bucketed by a 128-bit SipHash and every bucket is split
//! by exact comparison, so a hash collision can never produce a false match.

use std::collections::HashMap;
use std::hash::Hasher;

use serde::{Deserialize, Serialize};
use siphasher::sip128::{Hasher128, SipHasher13};

use crate::error::{Error, Result};
use crate::words::{concat_reduce, invert, Letter, Presentation, Word};

/// Two words `r1`, `r2` with equal tails `r[k+1:]` that differ at position
/// `k`; `w = r1[1:k]^-1 r2[1:k]` is then trivial, reduced, of length `2k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailCollision {
    pub r1: usize,
    pub r2: usize,
    pub k: usize,
    pub w: Word,
}

pub fn tail_hash(letters: &[Letter]) -> u128 {
    let mut h = SipHasher13::new_with_keys(0x7261_6e64_6772_6f75, 0x7020_7461_696c_7321);
    h.write_usize(letters.len());
    for l in letters {
        h.write_u8(l.code() as u8);
    }
    h.finish128().as_u128()
}

/// Groups of indices whose words share the suffix starting at offset `skip`
/// (zero-based). Only words with `len > skip` that pass `include` take part;
/// groups of one are dropped. Groups come back ordered by their first member,
/// members ascending.
pub(crate) fn suffix_groups<F>(words: &[&Word], skip: usize, include: F) -> Vec<Vec<usize>>
where
    F: Fn(usize, &Word) -> bool,
{
    let mut buckets: HashMap<u128, Vec<usize>> = HashMap::new();
    for (i, w) in words.iter().enumerate() {
        if w.len() > skip && include(i, w) {
            buckets.entry(tail_hash(&w.letters()[skip..])).or_default().push(i);
        }
    }
    let mut groups = Vec::new();
    for (_, members) in buckets {
        if members.len() < 2 {
            continue;
        }
        // split the bucket into exact-equality classes
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in members {
            let tail = &words[i].letters()[skip..];
            match classes.iter_mut().find(|c| &words[c[0]].letters()[skip..] == tail) {
                Some(c) => c.push(i),
                None => classes.push(vec![i]),
            }
        }
        groups.extend(classes.into_iter().filter(|c| c.len() > 1));
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

/// `w` for a verified pair, or `None` if the pair does not qualify.
pub(crate) fn collision_word(u: &Word, v: &Word, k: usize) -> Option<Word> {
    if k == 0 || u.len() <= k || u.len() != v.len() {
        return None;
    }
    let (a, b) = (u.letters(), v.letters());
    if a[k..] != b[k..] || a[k - 1] == b[k - 1] || a[0] == b[0] {
        return None;
    }
    let w = concat_reduce(&invert(&Word::from_reduced(a[..k].to_vec())), &Word::from_reduced(b[..k].to_vec()));
    debug_assert_eq!(w.len(), 2 * k);
    Some(w)
}

/// All pairs `r1` in the prefix class `first`, `r2` in the class `second`
/// whose tails from position `k+1` agree and with `r1[k] != r2[k]`, ordered
/// by `(r1, r2)`.
pub fn find_tail_collisions(
    pres: &Presentation,
    k: usize,
    first: [Letter; 2],
    second: [Letter; 2],
) -> Result<Vec<TailCollision>> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    for p in [first, second] {
        if p[0] == p[1].inverse() {
            return Err(Error::Precondition(format!("prefix {}{} is not reduced", p[0], p[1])));
        }
    }
    if first[0] == second[0] {
        return Err(Error::Precondition(format!(
            "prefix classes must start with distinct letters (both start with {})",
            first[0]
        )));
    }
    let words: Vec<&Word> = pres.relators.iter().collect();
    let in_class = |w: &Word, p: [Letter; 2]| w.len() >= 2 && w.letters()[..2] == p;
    let groups = suffix_groups(&words, k, |_, w| in_class(w, first) || in_class(w, second));
    let mut out = Vec::new();
    for g in groups {
        for &i in g.iter().filter(|&&i| in_class(words[i], first)) {
            for &j in g.iter().filter(|&&j| in_class(words[j], second)) {
                if let Some(w) = collision_word(words[i], words[j], k) {
                    out.push(TailCollision { r1: i, r2: j, k, w });
                }
            }
        }
    }
    out.sort_by_key(|c| (c.r1, c.r2));
    Ok(out)
}
