//! Exact coincidence probabilities against an independent enumeration.

use num_traits::ToPrimitive;
use randgroup::pigeonhole::{coincidence_bound, coincidence_exact, Measure, PigeonholeConfig};

/// Probability that some box holds a ball of every colour, by walking all
/// `n^(qz)` placements with float weights.
fn brute_force(n: usize, q: usize, z: usize, weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let balls = q * z;
    let mut placement = vec![0usize; balls];
    let mut prob = 0.0;
    loop {
        let covered = (0..n).any(|b| (0..q).all(|c| (0..z).any(|i| placement[c * z + i] == b)));
        if covered {
            prob += placement.iter().map(|&b| weights[b] / total).product::<f64>();
        }
        let mut i = 0;
        while i < balls {
            placement[i] += 1;
            if placement[i] < n {
                break;
            }
            placement[i] = 0;
            i += 1;
        }
        if i == balls {
            return prob;
        }
    }
}

#[test]
fn exact_matches_enumeration() {
    for (n, q, z) in [(1, 2, 1), (2, 2, 1), (2, 2, 2), (3, 2, 2), (2, 3, 2), (3, 3, 1), (4, 2, 3)] {
        for mu in [Measure::Uniform, Measure::Geometric, Measure::Linear] {
            let weights = mu.float_weights(n).unwrap();
            let cfg = PigeonholeConfig::new(n, q, z, mu).unwrap();
            let exact = coincidence_exact(&cfg).unwrap().to_f64().unwrap();
            let oracle = brute_force(n, q, z, &weights);
            assert!((exact - oracle).abs() < 1e-12, "n={n} q={q} z={z}: {exact} vs {oracle}");
        }
    }
}

#[test]
fn exact_dominates_bound_and_grows_with_z() {
    for (n, q) in [(4usize, 2usize), (3, 2), (2, 3)] {
        let mut last = 0.0;
        for z in 1..=4 {
            let cfg = PigeonholeConfig::new(n, q, z, Measure::Uniform).unwrap();
            let Ok(exact) = coincidence_exact(&cfg) else { break };
            let exact = exact.to_f64().unwrap();
            assert!(exact >= last - 1e-15);
            last = exact;
            if let Ok(bound) = coincidence_bound(&cfg) {
                assert!(exact >= bound, "n={n} q={q} z={z}");
            }
        }
    }
}
