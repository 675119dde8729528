//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use randgroup::diagrams::{self, DiagramStats, WindowParams};
use randgroup::distribution::{decay_bounds, empirical_table, letter_law, letter_law_oracle, LetterDistribution, Relation};
use randgroup::pigeonhole::{self, Measure, PigeonholeConfig};
use randgroup::thresholds::{self, Expr, Limit, Phase};
use randgroup::trivializer::{
    abelianization_guard, check_certificate, planted_block_rate, trivialize, GuardVerdict, Outcome, TrivializerConfig,
};
use randgroup::words::sample_presentation_seeded;
use randgroup::{Letter, ModelParams};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// 1. Letter law: closed form = transfer-matrix oracle, sums, decay bounds.

fn letter_law_exact() -> Check {
    let mut cells = 0;
    for m in 2..=5u32 {
        for n in 1..=24u32 {
            let oracle = letter_law_oracle(m, n).map_err(err)?;
            let (lo, hi) = decay_bounds(m, n).map_err(err)?;
            let mut total = BigRational::zero();
            for y in Letter::alphabet(m) {
                let rel = Relation::of(LetterDistribution::x0(), y);
                let exact = letter_law(m, n, rel).map_err(err)?;
                ensure(&exact == oracle.prob(y), || format!("m={m} n={n} {y}: {exact} != {}", oracle.prob(y)))?;
                ensure(lo <= exact && exact <= hi, || format!("m={m} n={n} {y}: {exact} outside [{lo}, {hi}]"))?;
                total += exact;
                cells += 1;
            }
            ensure(total.is_one(), || format!("m={m} n={n}: total {total}"))?;
        }
    }
    Ok(format!("{cells} letter probabilities equal, sum to 1, bracketed"))
}

// ---------------------------------------------------------------------------
// 2. Letter frequencies from 10^6 sampled words.

/// Exact law by enumerating all reduced words `a x1 .. xn`.
fn enumerated_law(m: u32, n: u32) -> Vec<f64> {
    let size = 2 * m as usize;
    let mut dist = vec![0.0; size];
    dist[0] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0; size];
        for (c, &p) in dist.iter().enumerate() {
            for d in 0..size {
                if d != (c ^ 1) {
                    next[d] += p / (size - 1) as f64;
                }
            }
        }
        dist = next;
    }
    dist
}

fn letter_statistics() -> Check {
    let samples = 1_000_000;
    let rows = empirical_table(2, 6, samples, 20_240_601).map_err(err)?;
    let mut worst: f64 = 0.0;
    for row in rows.iter().filter(|r| r.n >= 2) {
        let oracle = enumerated_law(2, row.n)[row.letter.code()];
        ensure((oracle - row.exact_value).abs() < 1e-12, || format!("n={} {}: oracle {oracle}", row.n, row.letter))?;
        ensure(row.z.abs() <= 4.0, || format!("n={} {}: z = {:.3}", row.n, row.letter, row.z))?;
        worst = worst.max(row.z.abs());
    }
    Ok(format!("{samples} words, offsets 2..6, max |z| = {worst:.3} <= 4"))
}

// ---------------------------------------------------------------------------
// 3. Coloured pigeonhole.

fn pigeonhole_checks() -> Check {
    let cfg = PigeonholeConfig::new(2, 2, 2, Measure::Uniform).map_err(err)?;
    let exact = pigeonhole::coincidence_exact(&cfg).map_err(err)?;
    let seven_eighths = BigRational::new(BigInt::from(7), BigInt::from(8));
    ensure(exact == seven_eighths, || format!("exact = {exact}"))?;
    let sim = pigeonhole::coincidence_simulate(&cfg, 100_000, 3).map_err(err)?;
    ensure((sim.estimate - 0.875).abs() <= 3.0 * sim.stderr, || {
        format!("estimate {} vs 7/8, stderr {}", sim.estimate, sim.stderr)
    })?;

    let mut cells = 0;
    let mut tightest = f64::INFINITY;
    for q in [2usize, 3] {
        for n in [16usize, 64, 256] {
            let z0 = (2.0 * (n as f64).powf(1.0 - 1.0 / q as f64)).ceil() as usize;
            for z in [z0, 2 * z0, 4 * z0] {
                for mu in [Measure::Uniform, Measure::Geometric, Measure::Linear] {
                    let cfg = PigeonholeConfig::new(n, q, z, mu.clone()).map_err(err)?;
                    ensure(cfg.hypothesis_met, || format!("n={n} q={q} z={z}: hypothesis not met"))?;
                    let bound = pigeonhole::coincidence_bound(&cfg).map_err(err)?;
                    let sim = pigeonhole::coincidence_simulate(&cfg, 20_000, (n * 100 + q * 10 + z) as u64).map_err(err)?;
                    let margin = sim.estimate - 3.0 * sim.stderr - bound;
                    ensure(margin >= 0.0, || {
                        format!("n={n} q={q} z={z} {}: {} - 3*{} < {bound}", mu.name(), sim.estimate, sim.stderr)
                    })?;
                    tightest = tightest.min(margin);
                    cells += 1;
                }
            }
        }
    }
    Ok(format!("exact 7/8, simulation {:.4} +- {:.4}; domination on {cells} cells, min margin {tightest:.4}", sim.estimate, sim.stderr))
}

// ---------------------------------------------------------------------------
// 4. Soundness over 1000 sampled presentations.

/// Relator count cap; larger cells are sampled at this count.
const SOUNDNESS_CAP: u64 = 1 << 17;

fn soundness() -> Check {
    let mut cells = Vec::new();
    for m in [2u32, 3] {
        for ell in 8..=24usize {
            for density in [0.45, 0.5, 0.55] {
                cells.push((m, ell, density));
            }
        }
    }
    let (mut certs, mut trivial, mut capped) = (0usize, 0usize, 0usize);
    for i in 0..1000usize {
        let (m, ell, density) = cells[i % cells.len()];
        let seed = 40_000 + i as u64;
        let mut params = ModelParams::from_density(m, ell, density).map_err(err)?;
        if params.num > SOUNDNESS_CAP {
            params = ModelParams::new(m, ell, SOUNDNESS_CAP).map_err(err)?;
            capped += 1;
        }
        let pres = sample_presentation_seeded(&params, seed).map_err(err)?;
        let cfg = TrivializerConfig::for_params(m, ell).map_err(err)?;
        let verdict = trivialize(&pres, &cfg);
        for c in &verdict.certificates {
            let ok = check_certificate(&pres, c).map_err(|e| format!("m={m} ell={ell} seed={seed}: {e}"))?;
            ensure(ok, || format!("m={m} ell={ell} D={density} seed={seed}: certificate {} = {} fails", c.x, c.y))?;
        }
        certs += verdict.certificates.len();
        if verdict.outcome == Outcome::Trivial {
            ensure(abelianization_guard(&pres) != GuardVerdict::CertainlyNontrivial, || {
                format!("m={m} ell={ell} seed={seed}: trivial with infinite abelianization")
            })?;
            trivial += 1;
        }
    }
    Ok(format!(
        "1000 runs over {} cells ({capped} capped at {SOUNDNESS_CAP} relators), {certs} certificates replayed, {trivial} trivial, 0 failures",
        cells.len()
    ))
}

// ---------------------------------------------------------------------------
// 5. Success rate trend against the recorded pilot.

fn efficacy() -> Check {
    let pilot: serde_json::Value =
        serde_json::from_str(include_str!("data/efficacy_pilot.json")).map_err(err)?;
    let (lo, hi) = (pilot["acceptance_seeds"][0].as_u64().unwrap_or(0), pilot["acceptance_seeds"][1].as_u64().unwrap_or(0));
    let mut rates = Vec::new();
    for ell in [12usize, 16, 20] {
        let params = ModelParams::from_density(2, ell, 0.55).map_err(err)?;
        let cfg = TrivializerConfig::for_params(2, ell).map_err(err)?;
        let mut wins = 0;
        for seed in lo..=hi {
            let pres = sample_presentation_seeded(&params, seed).map_err(err)?;
            if trivialize(&pres, &cfg).outcome == Outcome::Trivial {
                wins += 1;
            }
        }
        let rate = wins as f64 / (hi - lo + 1) as f64;
        let floor = pilot["floors"][ell.to_string()].as_f64().ok_or("pilot floor missing")?;
        ensure(rate > floor, || format!("ell={ell}: rate {rate} not above floor {floor}"))?;
        rates.push((ell, rate, floor));
    }
    ensure(rates.windows(2).all(|w| w[0].1 <= w[1].1), || format!("rates not nondecreasing: {rates:?}"))?;
    let text: Vec<String> = rates.iter().map(|(l, r, f)| format!("ell={l}: {r:.2} > {f:.2}")).collect();
    Ok(format!("seeds {lo}..{hi}: {}", text.join(", ")))
}

// ---------------------------------------------------------------------------
// 6. Planted w-reduction rate per block.

fn block_rate() -> Check {
    let mut parts = Vec::new();
    for k in [2usize, 3] {
        let r = planted_block_rate(2, k, 100_000, 600 + k as u64).map_err(err)?;
        ensure(r.rate > 0.25 - 3.0 * r.stderr, || format!("k={k}: rate {} stderr {}", r.rate, r.stderr))?;
        parts.push(format!("k={k}: {:.4} +- {:.4}", r.rate, r.stderr));
    }
    Ok(format!("10^5 blocks each, {} (> 1/4)", parts.join(", ")))
}

// ---------------------------------------------------------------------------
// 7. Rooted maps: closed form against the census.

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

fn tutte_oracle() -> Check {
    for (n, want) in [(1u64, 2u64), (2, 9), (3, 54)] {
        let formula = diagrams::tutte_count(n).map_err(err)?;
        let census = diagrams::enumerate_rooted_maps(n as usize).map_err(err)?;
        ensure(formula == BigUint::from(want) && census == want, || format!("n={n}: formula {formula}, census {census}"))?;
    }
    for n in 1..=50u64 {
        let num = BigUint::from(2u32) * factorial(2 * n) * BigUint::from(3u32).pow(n as u32);
        let den = factorial(n) * factorial(n + 2);
        ensure((&num % &den).is_zero(), || format!("n={n}: not integral"))?;
        let got = diagrams::tutte_count(n).map_err(err)?;
        ensure(got == &num / &den, || format!("n={n}: {got}"))?;
    }
    Ok("census 2, 9, 54 matches; integral and exact for n <= 50".into())
}

// ---------------------------------------------------------------------------
// 8. Fulfillability exponents and window predicates.

fn bound_arithmetic() -> Check {
    // (faces, boundary, ell, density, exponent by hand)
    let fixtures: [(u64, u64, u64, f64, f64); 10] = [
        (1, 0, 10, 0.4, -1.0),
        (3, 12, 10, 0.5, 2.0),
        (1, 0, 5, 0.5, 0.0),
        (2, 6, 8, 0.25, -0.5),
        (4, 4, 12, 0.0, -5.5),
        (10, 50, 20, 0.375, 0.0),
        (5, 0, 16, 0.125, -6.0),
        (1, 24, 24, 0.5, 12.0),
        (8, 20, 6, 0.4, 0.65),
        (100, 100, 1000, 0.45, -49.5),
    ];
    for (f, b, l, d, want) in fixtures {
        let got = diagrams::fulfillability_bound(&DiagramStats::new(f, b, l).map_err(err)?, d);
        ensure((got - want).abs() < 1e-9, || format!("({f},{b},{l},{d}): {got} != {want}"))?;
    }

    let small = WindowParams::new(100, true).map_err(err)?;
    ensure(!small.conforming && WindowParams::new(100, false).is_err(), || "small K accepted as conforming".into())?;
    ensure(WindowParams::new(10_000_000_000, false).map_err(err)?.conforming, || "K = 10^10 not conforming".into())?;
    // (faces, boundary, ell) -> (in window, J, conclusion present, conclusion holds)
    let table: [((u64, u64, u64), (bool, bool, Option<bool>)); 9] = [
        ((2_500, 0, 1), (true, false, None)),
        ((2_499, 0, 1), (false, false, None)),
        ((4_800_000, 0, 1), (true, false, Some(false))),
        ((4_800_001, 0, 1), (false, false, Some(false))),
        ((80_000, 120_000, 3), (true, true, Some(true))),
        ((80_000, 119_999, 3), (true, false, Some(true))),
        ((20_000, 20_000, 1), (true, true, Some(true))),
        ((10_000, 1, 100), (true, false, Some(true))),
        ((9_999, 1, 100), (true, false, None)),
    ];
    for ((f, b, l), (win, j, concl)) in table {
        let lg = diagrams::local_global(&DiagramStats::new(f, b, l).map_err(err)?, &small);
        let got = (lg.in_window, lg.satisfies_j, lg.conclusion.as_ref().map(|c| c.holds));
        ensure(got == (win, j, concl), || format!("({f},{b},{l}): {got:?}"))?;
    }
    let lg = diagrams::local_global(&DiagramStats::new(10_000, 0, 100).map_err(err)?, &small);
    ensure(lg.conclusion.map(|c| c.holds) == Some(false), || "boundary 0 at |D| = K^2 should fail".into())?;
    Ok("10 fulfillability fixtures exact; 10 window cases exact at K = 100".into())
}

// ---------------------------------------------------------------------------
// 9. Threshold conditions and the phase diagram.

fn expected_phase(a: Rational64, b: Rational64) -> Option<Phase> {
    let third = Rational64::new(1, 3);
    let one = Rational64::from(1);
    if a == Rational64::from(0) && b >= Rational64::from(0) {
        return None;
    }
    Some(if a < third || (a == third && b > third) {
        Phase::Hyperbolic
    } else if a > one || (a == one && b < one) {
        Phase::Trivial
    } else {
        Phase::Unknown
    })
}

fn threshold_reproduction() -> Check {
    let grid = thresholds::default_grid();
    let star = thresholds::star_condition(&thresholds::corollary_k(), &thresholds::trivial_threshold(), &grid, 2)
        .map_err(err)?;
    ensure(star.symbolic == Expr::monomial(1.0, 0, 0, 1), || format!("k - 2 ell f = {}", star.symbolic))?;
    ensure(star.holds == Some(true), || "star does not hold".into())?;

    let big_k = thresholds::k_hyperbolicity(1.0);
    let f = thresholds::param_family(Rational64::new(1, 3), Rational64::new(1, 3), 1e5);
    let acc = thresholds::asterisk_condition(&big_k, &f, &grid, 2).map_err(err)?;
    ensure(acc.limit == Limit::NegInfinity && acc.holds == Some(true), || format!("asterisk: {}", acc.limit))?;
    let rej = thresholds::asterisk_condition(&big_k, &Expr::zero(), &grid, 2).map_err(err)?;
    ensure(rej.holds == Some(false), || format!("asterisk with f = 0: {}", rej.limit))?;

    let hyp = thresholds::classify_phase(Rational64::new(1, 3), Rational64::new(1, 3), 1e5).map_err(err)?;
    ensure(hyp.outcome == Phase::Hyperbolic, || hyp.clause.clone())?;
    let triv = thresholds::classify_rate(&thresholds::trivial_threshold()).map_err(err)?;
    ensure(triv.outcome == Phase::Trivial, || triv.clause.clone())?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let draw = |rng: &mut ChaCha8Rng| Rational64::new(rng.random_range(0..=24), 12);
    let mut checked = 0;
    for _ in 0..10_000 {
        let (a, b) = (draw(&mut rng), draw(&mut rng) - Rational64::from(1));
        let (a2, b2) = if rng.random_bool(0.5) {
            (a + Rational64::new(rng.random_range(1..=12), 12), draw(&mut rng) - Rational64::from(1))
        } else {
            (a, b - Rational64::new(rng.random_range(1..=12), 12))
        };
        let c = [0.5, 1.0, 1e5][rng.random_range(0..3)];
        let (Ok(v), Ok(v2)) = (thresholds::classify_phase(a, b, c), thresholds::classify_phase(a2, b2, c)) else {
            continue;
        };
        if v.outcome == Phase::Trivial {
            ensure(v2.outcome == Phase::Trivial, || format!("({a},{b}) trivial but ({a2},{b2}) is {:?}", v2.outcome))?;
        }
        if v2.outcome == Phase::Hyperbolic {
            ensure(v.outcome == Phase::Hyperbolic, || format!("({a2},{b2}) hyperbolic but ({a},{b}) is {:?}", v.outcome))?;
        }
        checked += 1;
    }

    let alphas = thresholds::parse_range("0:1.5:1/60").map_err(err)?;
    let betas = thresholds::parse_range("-1:2:1/20").map_err(err)?;
    let cells = thresholds::phase_map(&alphas, &betas, 1.0);
    let mut counts = [0usize; 3];
    for cell in &cells {
        let got = cell.verdict.as_ref().map(|v| v.outcome);
        let want = expected_phase(cell.alpha, cell.beta);
        ensure(got == want, || format!("cell ({}, {}): {got:?} != {want:?}", cell.alpha, cell.beta))?;
        if let Some(p) = got {
            counts[p as usize] += 1;
        }
    }
    ensure(counts.iter().all(|&c| c > 0), || format!("region sizes {counts:?}"))?;
    Ok(format!(
        "k - 2 ell f = loglog; asterisk accepts (1, 10^5) and rejects f = 0; {checked} monotone pairs; map regions trivial/hyperbolic/unknown = {}/{}/{}",
        counts[Phase::Trivial as usize],
        counts[Phase::Hyperbolic as usize],
        counts[Phase::Unknown as usize]
    ))
}

// ---------------------------------------------------------------------------
// 10. Hyperbolicity constant.

fn delta_scaling() -> Check {
    let d = thresholds::delta_constant(1.0, 2).map_err(err)?;
    ensure(d == 960.0, || format!("delta(1, 2) = {d}"))?;
    ensure(thresholds::delta_constant(1.0, 1).is_err(), || "kappa = 1/N accepted".into())?;
    let ratios: Vec<f64> = (3..=9)
        .map(|e| {
            let ell = 10u64.pow(e);
            thresholds::delta_for_ell(ell, 1.0).map(|v| v / (ell as f64).powf(5.0 / 3.0))
        })
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let spread = ratios.iter().map(|r| ((r - ratios[0]) / ratios[0]).abs()).fold(0.0, f64::max);
    ensure(spread <= 1e-12, || format!("relative spread {spread:e}"))?;
    Ok(format!("delta(1, 2) = 960; delta / ell^(5/3) = {} with spread {spread:.1e}", ratios[0]))
}

// ---------------------------------------------------------------------------
// 11. Replays and thread independence through the binary.

fn run_bin(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_randgroup")).args(args).output().map_err(err)?;
    ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn reproducibility() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let p = |name: &str| dir.path().join(name).display().to_string();
    let commands: [&[&str]; 4] = [
        &["sample", "--m", "2", "--ell", "10", "--density", "0.5", "--seed", "11"],
        &["trivialize", "--m", "2", "--ell", "16", "--density", "0.55", "--seed", "7"],
        &["verify-dist", "--m", "3", "--n", "4", "--samples", "50000", "--seed", "3"],
        &["pigeonhole", "--n", "8", "--q", "2", "--z", "6", "--trials", "50000", "--seed", "5"],
    ];
    for (i, cmd) in commands.iter().enumerate() {
        let (first, replayed, threaded) = (p(&format!("{i}.a")), p(&format!("{i}.b")), p(&format!("{i}.c")));
        let mut args = vec!["--threads", "1", "--out", &first];
        args.extend_from_slice(cmd);
        run_bin(&args)?;
        let manifest = format!("{first}.manifest.json");
        run_bin(&["--threads", "1", "--out", &replayed, "replay", &manifest])?;
        let mut args = vec!["--threads", "4", "--out", &threaded];
        args.extend_from_slice(cmd);
        run_bin(&args)?;
        let read = |f: &str| fs::read(Path::new(f)).map_err(err);
        let a = read(&first)?;
        ensure(a == read(&replayed)?, || format!("{}: replay differs", cmd[0]))?;
        ensure(a == read(&threaded)?, || format!("{}: --threads 4 differs", cmd[0]))?;
    }
    Ok("sample, trivialize, verify-dist, pigeonhole: replay and --threads 4 byte-identical".into())
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 11] = [
        ("letter law exact", 5, letter_law_exact),
        ("letter statistics", 60, letter_statistics),
        ("pigeonhole oracle and domination", 120, pigeonhole_checks),
        ("trivializer soundness", 600, soundness),
        ("trivializer efficacy trend", 600, efficacy),
        ("w-reduction block rate", 60, block_rate),
        ("rooted map counts", 30, tutte_oracle),
        ("bound arithmetic", 1, bound_arithmetic),
        ("threshold reproduction", 30, threshold_reproduction),
        ("hyperbolicity constant", 1, delta_scaling),
        ("reproducibility", 300, reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed <= Duration::from_secs(*limit) {
                Ok(msg)
            } else {
                Err(format!("{msg}; but took {:.1}s over the {limit}s budget", elapsed.as_secs_f64()))
            }
        });
        match result {
            Ok(msg) => println!("PASS criterion {:>2} {name} ({:.2}s): {msg}", i + 1, elapsed.as_secs_f64()),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {:>2} {name} ({:.2}s): {msg}", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
