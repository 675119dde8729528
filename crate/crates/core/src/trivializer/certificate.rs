//! Replayable derivations of `x =_G y`.
//!
//! Every step except the last produces a word certified trivial in `G`:
//! a relator, a tail collision between two earlier words, or an earlier word
//! with one w-reduction applied. The final step matches two certified words
//! that agree after their first letter, which forces those first letters to
//! be equal in `G`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{concat_reduce, invert, is_freely_reduced, Letter, Presentation, Word};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    /// `word` is relator number `relator` (zero-based) of the presentation.
    RelatorIsTrivial { relator: usize, word: Word },
    /// Steps `first` and `second` agree from position `k+1`; `word` is
    /// `first[1:k]^-1 second[1:k]`.
    TailCollision { first: usize, second: usize, k: usize, word: Word },
    /// Step `host` with the segment `start..=end`, equal to
    /// `conjugator * reducer * conjugator^-1`, deleted.
    WReduction {
        host: usize,
        reducer: usize,
        start: usize,
        end: usize,
        conjugator: Word,
        s_letter: Letter,
        t_letter: Letter,
        word: Word,
    },
    /// Steps `first` and `second` agree after their first letters.
    TailMatchConclusion { first: usize, second: usize },
}

impl Step {
    pub fn word(&self) -> Option<&Word> {
        match self {
            Step::RelatorIsTrivial { word, .. }
            | Step::TailCollision { word, .. }
            | Step::WReduction { word, .. } => Some(word),
            Step::TailMatchConclusion { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub x: Letter,
    pub y: Letter,
    pub steps: Vec<Step>,
}

impl Certificate {
    /// Human-readable derivation log.
    pub fn render(&self) -> String {
        let mut out = format!("claim: {} = {}\n", self.x, self.y);
        for (i, step) in self.steps.iter().enumerate() {
            let _ = match step {
                Step::RelatorIsTrivial { relator, word } => {
                    writeln!(out, "  [{i}] {word} = 1        relator #{relator}")
                }
                Step::TailCollision { first, second, k, word } => writeln!(
                    out,
                    "  [{i}] {word} = 1        tails of [{first}] and [{second}] agree from position {}",
                    k + 1
                ),
                Step::WReduction { host, reducer, start, end, conjugator, word, .. } => writeln!(
                    out,
                    "  [{i}] {word} = 1        [{host}] with {start}..{end} = ({conjugator})[{reducer}]({}) removed",
                    invert(conjugator)
                ),
                Step::TailMatchConclusion { first, second } => writeln!(
                    out,
                    "  [{i}] {} = {}          [{first}] and [{second}] agree after the first letter",
                    self.x, self.y
                ),
            };
        }
        out
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedCertificate(msg.into())
}

/// Replays `cert` against `pres` using only word operations.
///
/// `Ok(false)` means some claimed word or match does not replay;
/// `Err(MalformedCertificate)` means the certificate is structurally broken
/// (dangling or forward references, a cited relator that is not in `pres`,
/// no final conclusion).
pub fn check_certificate(pres: &Presentation, cert: &Certificate) -> Result<bool> {
    let Some((last, body)) = cert.steps.split_last() else {
        return Err(malformed("no steps"));
    };
    let mut words: Vec<&Word> = Vec::with_capacity(body.len());
    let earlier = |words: &Vec<&Word>, i: usize, at: usize| -> Result<usize> {
        if i >= words.len() {
            return Err(malformed(format!("step {at} refers to step {i}, which is not an earlier word")));
        }
        Ok(i)
    };
    let mut ok = true;
    for (at, step) in body.iter().enumerate() {
        match step {
            Step::RelatorIsTrivial { relator, word } => {
                if pres.relators.get(*relator) != Some(word) {
                    return Err(malformed(format!("step {at} cites relator #{relator} = {word}, not in the presentation")));
                }
            }
            Step::TailCollision { first, second, k, word } => {
                let u = words[earlier(&words, *first, at)?];
                let v = words[earlier(&words, *second, at)?];
                ok &= replay_collision(u, v, *k).as_ref() == Some(word);
            }
            Step::WReduction { host, reducer, start, end, conjugator, s_letter, t_letter, word } => {
                let h = words[earlier(&words, *host, at)?];
                let w = words[earlier(&words, *reducer, at)?];
                ok &= replay_reduction(h, w, *start, *end, conjugator, *s_letter, *t_letter).as_ref() == Some(word);
            }
            Step::TailMatchConclusion { .. } => {
                return Err(malformed(format!("conclusion at step {at} is not the final step")));
            }
        }
        words.push(step.word().expect("non-conclusion step carries a word"));
    }
    let Step::TailMatchConclusion { first, second } = last else {
        return Err(malformed("final step is not a conclusion"));
    };
    let at = body.len();
    let u = words[earlier(&words, *first, at)?];
    let v = words[earlier(&words, *second, at)?];
    ok &= cert.x != cert.y
        && u.at(1) == Some(cert.x)
        && v.at(1) == Some(cert.y)
        && u.letters()[1..] == v.letters()[1..];
    Ok(ok)
}

fn replay_collision(u: &Word, v: &Word, k: usize) -> Option<Word> {
    if k == 0 || u.len() != v.len() || u.len() <= k {
        return None;
    }
    let (a, b) = (u.letters(), v.letters());
    if a[k..] != b[k..] || a[k - 1] == b[k - 1] {
        return None;
    }
    let w = concat_reduce(&invert(&Word::from_reduced(a[..k].to_vec())), &Word::from_reduced(b[..k].to_vec()));
    (w.len() == 2 * k).then_some(w)
}

fn replay_reduction(
    h: &Word,
    w: &Word,
    start: usize,
    end: usize,
    d: &Word,
    s: Letter,
    t: Letter,
) -> Option<Word> {
    let letters = h.letters();
    if start < 2 || end < start || end + 1 > letters.len() {
        return None;
    }
    let mut segment: Vec<Letter> = d.letters().to_vec();
    segment.extend_from_slice(w.letters());
    segment.extend(invert(d).letters());
    if letters[start - 1..end] != segment[..] {
        return None;
    }
    if letters[start - 2] != s || letters[end] != t || s == t.inverse() {
        return None;
    }
    let mut out = letters[..start - 1].to_vec();
    out.extend_from_slice(&letters[end..]);
    is_freely_reduced(&out).then(|| Word::from_reduced(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn l(c: char) -> Letter {
        Letter::from_char(c).unwrap()
    }

    #[test]
    fn direct_match() {
        let p = Presentation::parse_relators(2, &["abab", "Abab"]).unwrap();
        let cert = Certificate {
            x: l('a'),
            y: l('A'),
            steps: vec![
                Step::RelatorIsTrivial { relator: 0, word: w("abab") },
                Step::RelatorIsTrivial { relator: 1, word: w("Abab") },
                Step::TailMatchConclusion { first: 0, second: 1 },
            ],
        };
        assert_eq!(check_certificate(&p, &cert), Ok(true));
        let mut swapped = cert.clone();
        swapped.x = l('b');
        assert_eq!(check_certificate(&p, &swapped), Ok(false));
        assert!(cert.render().contains("claim: a = A"));
    }

    fn chained() -> (Presentation, Certificate) {
        let p = Presentation::parse_relators(2, &["abab", "baab", "aaBAbaa", "baa"]).unwrap();
        let cert = Certificate {
            x: l('a'),
            y: l('b'),
            steps: vec![
                Step::RelatorIsTrivial { relator: 0, word: w("abab") },
                Step::RelatorIsTrivial { relator: 1, word: w("baab") },
                Step::TailCollision { first: 0, second: 1, k: 2, word: w("BAba") },
                Step::RelatorIsTrivial { relator: 2, word: w("aaBAbaa") },
                Step::WReduction {
                    host: 3,
                    reducer: 2,
                    start: 3,
                    end: 6,
                    conjugator: Word::empty(),
                    s_letter: l('a'),
                    t_letter: l('a'),
                    word: w("aaa"),
                },
                Step::RelatorIsTrivial { relator: 3, word: w("baa") },
                Step::TailMatchConclusion { first: 4, second: 5 },
            ],
        };
        (p, cert)
    }

    #[test]
    fn collision_and_reduction_replay() {
        let (p, cert) = chained();
        assert_eq!(check_certificate(&p, &cert), Ok(true));
        assert!(cert.render().contains("removed"));

        let mut corrupt = cert.clone();
        corrupt.steps[2] = Step::TailCollision { first: 0, second: 1, k: 2, word: w("BAbb") };
        assert_eq!(check_certificate(&p, &corrupt), Ok(false));

        let mut wrong_span = cert.clone();
        if let Step::WReduction { start, .. } = &mut wrong_span.steps[4] {
            *start = 2;
        }
        assert_eq!(check_certificate(&p, &wrong_span), Ok(false));

        let json = serde_json::to_string(&cert).unwrap();
        assert_eq!(serde_json::from_str::<Certificate>(&json).unwrap(), cert);
    }

    #[test]
    fn structural_errors() {
        let p = Presentation::parse_relators(2, &["abab"]).unwrap();
        let cite = Certificate {
            x: l('a'),
            y: l('b'),
            steps: vec![
                Step::RelatorIsTrivial { relator: 0, word: w("abba") },
                Step::TailMatchConclusion { first: 0, second: 0 },
            ],
        };
        assert!(matches!(check_certificate(&p, &cite), Err(Error::MalformedCertificate(_))));
        let forward = Certificate {
            x: l('a'),
            y: l('b'),
            steps: vec![
                Step::RelatorIsTrivial { relator: 0, word: w("abab") },
                Step::TailMatchConclusion { first: 0, second: 3 },
            ],
        };
        assert!(matches!(check_certificate(&p, &forward), Err(Error::MalformedCertificate(_))));
        let empty = Certificate { x: l('a'), y: l('b'), steps: vec![] };
        assert!(check_certificate(&p, &empty).is_err());
        let no_conclusion = Certificate {
            x: l('a'),
            y: l('b'),
            steps: vec![Step::RelatorIsTrivial { relator: 0, word: w("abab") }],
        };
        assert!(check_certificate(&p, &no_conclusion).is_err());
    }

    #[test]
    fn reduction_replay_checks_flanks() {
        let h = w("baabAb");
        let d = w("a");
        assert_eq!(replay_reduction(&h, &w("ab"), 2, 5, &d, l('b'), l('b')), Some(w("bb")));
        assert_eq!(replay_reduction(&h, &w("ab"), 2, 5, &d, l('b'), l('a')), None);
        assert_eq!(replay_reduction(&h, &w("ab"), 1, 5, &d, l('b'), l('b')), None);
        assert_eq!(replay_reduction(&h, &w("aa"), 2, 5, &d, l('b'), l('b')), None);
    }
}
