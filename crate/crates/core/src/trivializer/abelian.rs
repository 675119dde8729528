//! Rank of the exponent-sum matrix over the rationals.
//!
//! If the rank is below `m` the abelianization surjects onto `Z`, so the
//! group is infinite and cannot be trivial.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::words::Presentation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardVerdict {
    PossiblyTrivial,
    CertainlyNontrivial,
}

pub fn abelianization_guard(pres: &Presentation) -> GuardVerdict {
    if exponent_rank(pres) < pres.m as usize {
        GuardVerdict::CertainlyNontrivial
    } else {
        GuardVerdict::PossiblyTrivial
    }
}

/// Rank over Q of the `|R| x m` matrix of exponent sums, by fraction-free
/// elimination against an echelon basis. Stops early at full rank.
pub fn exponent_rank(pres: &Presentation) -> usize {
    let m = pres.m as usize;
    // basis[c] = row whose leading nonzero column is c
    let mut basis: Vec<Option<Vec<BigInt>>> = vec![None; m];
    let mut rank = 0;
    for r in &pres.relators {
        if rank == m {
            break;
        }
        let mut row: Vec<BigInt> = r.exponent_sums(pres.m).into_iter().map(BigInt::from).collect();
        for c in 0..m {
            if row[c].is_zero() {
                continue;
            }
            match &basis[c] {
                Some(b) => {
                    let (pivot, lead) = (b[c].clone(), row[c].clone());
                    for (x, y) in row.iter_mut().zip(b) {
                        *x = &*x * &pivot - &lead * y;
                    }
                    normalize(&mut row);
                }
                None => {
                    normalize(&mut row);
                    basis[c] = Some(row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn normalize(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        for x in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pres(m: u32, rels: &[&str]) -> Presentation {
        Presentation::parse_relators(m, rels).unwrap()
    }

    #[test]
    fn guard_examples() {
        assert_eq!(abelianization_guard(&pres(2, &["ab", "aB"])), GuardVerdict::PossiblyTrivial);
        assert_eq!(abelianization_guard(&pres(2, &["abab"])), GuardVerdict::CertainlyNontrivial);
        assert_eq!(abelianization_guard(&pres(2, &[])), GuardVerdict::CertainlyNontrivial);
        // a^2 = b^2 = ab... rank 2 over Q though torsion remains
        assert_eq!(abelianization_guard(&pres(2, &["aa", "bb"])), GuardVerdict::PossiblyTrivial);
        assert_eq!(exponent_rank(&pres(3, &["abc", "aabbcc", "abAB"])), 1);
        assert_eq!(exponent_rank(&pres(3, &["ab", "bc", "ac"])), 3);
        assert_eq!(exponent_rank(&pres(3, &["ab", "bc", "aC"])), 2);
    }
}
