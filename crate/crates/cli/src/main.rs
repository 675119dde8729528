//! `randgroup` command-line driver.
//!
//! Exit codes: 0 success, 1 domain or I/O error, 2 usage error.

mod manifest;

use std::error::Error as StdError;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use num_rational::Rational64;
use serde::Serialize;
use serde_json::{json, Value};

use randgroup::diagrams::{self, DiagramStats, WindowParams};
use randgroup::distribution::empirical_table;
use randgroup::pigeonhole::{self, BoundConstant, Measure, PigeonholeConfig};
use randgroup::rng::with_threads;
use randgroup::thresholds::{self, Expr};
use randgroup::trivializer::{check_certificate, choose_k, trivialize, TrivializerConfig};
use randgroup::words::sample_presentation_seeded;
use randgroup::ModelParams;

use manifest::{computation_args, RunManifest, FORMAT_VERSION};

type CliResult<T> = Result<T, Box<dyn StdError>>;

#[derive(Parser, Debug)]
#[command(name = "randgroup", version, about = "Random groups at density one half")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Where to write the run manifest (default `<out>.manifest.json` when
    /// `--out` is given).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("count").required(true).args(["density", "f_expr", "num"])))]
struct Regime {
    /// Number of generators.
    #[arg(long)]
    m: u32,
    /// Relator length.
    #[arg(long)]
    ell: usize,
    /// Density D; num = round((2m-1)^(D ell)).
    #[arg(long, allow_negative_numbers = true)]
    density: Option<f64>,
    /// Rate f, evaluated at ell; density = 1/2 - f(ell).
    #[arg(long)]
    f_expr: Option<String>,
    /// Relator count.
    #[arg(long)]
    num: Option<u64>,
    /// Random seed (required; recorded in the manifest).
    #[arg(long)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a presentation in the text format.
    Sample(Regime),
    /// Run the triviality pipeline and emit a verdict with certificates.
    Trivialize {
        #[command(flatten)]
        regime: Regime,
        /// Head length k (default from ell).
        #[arg(long)]
        k_override: Option<usize>,
        #[arg(long, default_value_t = 1)]
        max_rounds: usize,
        /// Block length override for exploring small ell.
        #[arg(long)]
        block_size: Option<usize>,
        /// Human-readable derivation log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Compare sampled letter frequencies with the exact law (CSV).
    VerifyDist {
        #[arg(long)]
        m: u32,
        /// Largest offset.
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Coloured pigeonhole coincidence: estimate, bound, exact value (JSON).
    Pigeonhole {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        z: usize,
        #[arg(long, default_value = "uniform")]
        mu: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// headline, sharp, or a number.
        #[arg(long, default_value = "headline")]
        constant: String,
    },
    /// Diagram counts and bounds.
    #[command(subcommand)]
    Diagrams(DiagramsCommand),
    /// Evaluate a threshold condition symbolically and on a grid (CSV).
    Conditions {
        #[arg(long, value_parser = ["star", "spade", "asterisk"])]
        which: String,
        /// k for star and spade, K for asterisk.
        #[arg(long)]
        k_expr: Option<String>,
        #[arg(long, default_value = "trivial-threshold")]
        f_expr: String,
        /// `pow2:A:B` for ell = 2^A..2^B, or a comma list.
        #[arg(long, default_value = "pow2:10:40")]
        ell_grid: String,
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
    /// Phase of f = c0 log^beta / ell^alpha over a grid (CSV).
    PhaseMap {
        #[arg(long, default_value = "0:1.5:0.05", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value = "-1:2:0.05", allow_hyphen_values = true)]
        beta: String,
        #[arg(long, default_value_t = 1.0)]
        coeff: f64,
    },
    /// Re-run the computation recorded in a manifest.
    Replay {
        manifest_file: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum DiagramsCommand {
    /// Rooted planar maps with n edges.
    Tutte {
        #[arg(long)]
        n: u64,
    },
    /// Bound on the number of diagrams with at most F faces.
    Bound {
        #[arg(long)]
        faces: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
    /// Fulfillability exponent.
    Fulfill {
        #[arg(long)]
        faces: u64,
        #[arg(long)]
        boundary: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        density: f64,
    },
    /// Window predicates of the local-global principle.
    LocalGlobal {
        #[arg(long)]
        faces: u64,
        #[arg(long)]
        boundary: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long = "K")]
        big_k: u64,
        /// Allow K below 10^10 (flagged non-conforming).
        #[arg(long)]
        explore: bool,
    },
    /// Brute-force census of rooted maps against the formula (CSV).
    Census {
        #[arg(long, default_value_t = 4)]
        max_n: usize,
    },
}

struct Ctx {
    threads: usize,
    out: Option<PathBuf>,
    manifest: Option<PathBuf>,
    args: Vec<String>,
}

impl Ctx {
    fn manifest(&self, subcommand: &str, params: Value, seed: Option<u64>) -> RunManifest {
        RunManifest::new(subcommand, self.args.clone(), params, seed, self.threads)
    }

    /// Writes `content` and the manifest.
    fn finish(&self, mut man: RunManifest, content: &str) -> CliResult<()> {
        match &self.out {
            Some(p) => {
                fs::write(p, content).map_err(|e| format!("writing {}: {e}", p.display()))?;
                man.outputs.push(p.display().to_string());
            }
            None => print!("{content}"),
        }
        let path = self.manifest.clone().or_else(|| self.out.as_ref().map(|p| sidecar(p)));
        if let Some(path) = path {
            let text = serde_json::to_string_pretty(&man)? + "\n";
            fs::write(&path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
        }
        Ok(())
    }
}

fn sidecar(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn json_doc(man: &RunManifest, body: Value) -> CliResult<String> {
    let mut doc = json!({ "format_version": FORMAT_VERSION, "manifest_digest": man.digest });
    if let (Some(d), Value::Object(b)) = (doc.as_object_mut(), body) {
        d.extend(b);
    }
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn csv_doc<T: Serialize>(man: &RunManifest, comments: &[String], rows: &[T]) -> CliResult<String> {
    let mut out = format!("# format_version={FORMAT_VERSION}\n# manifest_digest={}\n", man.digest);
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    out.push_str(std::str::from_utf8(&w.into_inner().map_err(|e| e.to_string())?)?);
    Ok(out)
}

fn materialize(r: &Regime) -> CliResult<(ModelParams, Value)> {
    let (params, source) = match (&r.density, &r.f_expr, &r.num) {
        (Some(d), _, _) => (ModelParams::from_density(r.m, r.ell, *d)?, json!({ "density": d })),
        (_, Some(expr), _) => {
            let f: Expr = expr.parse()?;
            let v = f.eval(r.ell as f64, r.m);
            if !v.is_finite() {
                return Err(format!("f-expr {expr} is not finite at ell = {}", r.ell).into());
            }
            (ModelParams::from_rate_value(r.m, r.ell, v)?, json!({ "f_expr": f.to_string(), "f_value": v }))
        }
        (_, _, Some(n)) => (ModelParams::new(r.m, r.ell, *n)?, json!({ "num": n })),
        _ => unreachable!("clap enforces the group"),
    };
    let value = json!({
        "m": params.m,
        "ell": params.ell,
        "num": params.num,
        "density": params.density(),
        "requested": source,
        "seed": r.seed,
    });
    Ok((params, value))
}

fn run_command(cmd: Command, ctx: &Ctx) -> CliResult<()> {
    match cmd {
        Command::Sample(r) => {
            let (params, pv) = materialize(&r)?;
            let man = ctx.manifest("sample", json!({ "model": pv }), Some(r.seed));
            let pres = with_threads(ctx.threads, || sample_presentation_seeded(&params, r.seed))?;
            let comments = vec![
                format!("format_version={FORMAT_VERSION}"),
                format!("manifest_digest={}", man.digest),
                format!("ell={} num={} seed={}", params.ell, params.num, r.seed),
            ];
            ctx.finish(man, &pres.to_text(&comments))
        }
        Command::Trivialize { regime, k_override, max_rounds, block_size, log } => {
            let (params, pv) = materialize(&regime)?;
            let k = match k_override {
                Some(k) => k,
                None => choose_k(params.m, params.ell.max(2))?.min(params.ell),
            };
            let mut cfg = TrivializerConfig::new(params.m, params.ell, k)?.with_max_rounds(max_rounds)?;
            if let Some(s) = block_size {
                cfg = cfg.with_block_size(s)?;
            }
            let config = json!({
                "model": pv,
                "k": cfg.k,
                "k_source": if k_override.is_some() { "override" } else { "default" },
                "block_size": cfg.block_size,
                "block_size_source": if block_size.is_some() { "override" } else { "default" },
                "max_rounds": cfg.max_rounds,
            });
            let man = ctx.manifest("trivialize", config.clone(), Some(regime.seed));
            let pres = with_threads(ctx.threads, || sample_presentation_seeded(&params, regime.seed))?;
            let verdict = with_threads(ctx.threads, || trivialize(&pres, &cfg));
            let mut all_ok = true;
            for c in &verdict.certificates {
                all_ok &= check_certificate(&pres, c)?;
            }
            if let Some(path) = log {
                let mut text = String::new();
                for (i, c) in verdict.certificates.iter().enumerate() {
                    text.push_str(&format!("certificate {i}\n{}\n", c.render()));
                }
                fs::write(&path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
            }
            let body = json!({
                "parameters": config,
                "outcome": verdict.outcome,
                "guard": verdict.guard,
                "guard_conflict": verdict.guard_conflict,
                "certificates_checked": all_ok,
                "statistics": verdict.stats,
                "certificates": verdict.certificates,
            });
            let doc = json_doc(&man, body)?;
            ctx.finish(man, &doc)?;
            if !all_ok {
                return Err("a certificate failed to replay".into());
            }
            Ok(())
        }
        Command::VerifyDist { m, n, samples, seed } => {
            let man = ctx.manifest("verify-dist", json!({ "m": m, "n": n, "samples": samples }), Some(seed));
            let rows = with_threads(ctx.threads, || empirical_table(m, n, samples, seed))?;
            let max_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
            let doc = csv_doc(&man, &[format!("m={m} samples={samples} seed={seed} max_abs_z={max_z:.4}")], &rows)?;
            ctx.finish(man, &doc)
        }
        Command::Pigeonhole { n, q, z, mu, trials, seed, constant } => {
            let c = match constant.as_str() {
                "headline" => BoundConstant::Headline,
                "sharp" => BoundConstant::Sharp,
                other => BoundConstant::Custom(other.parse().map_err(|_| format!("bad constant {other:?}"))?),
            };
            let cfg = PigeonholeConfig::new(n, q, z, Measure::parse(&mu)?)?.with_constant(c);
            let man = ctx.manifest(
                "pigeonhole",
                json!({ "n": n, "q": q, "z": z, "mu": mu, "trials": trials, "c": cfg.c.value(q) }),
                Some(seed),
            );
            let sim = with_threads(ctx.threads, || pigeonhole::coincidence_simulate(&cfg, trials, seed))?;
            let (bound, bound_error) = match pigeonhole::coincidence_bound(&cfg) {
                Ok(b) => (Some(b), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let exact = pigeonhole::coincidence_exact(&cfg).ok();
            let body = json!({
                "n": n, "q": q, "z": z, "mu": mu,
                "c": cfg.c.value(q),
                "hypothesis_met": cfg.hypothesis_met,
                "estimate": sim.estimate,
                "stderr": sim.stderr,
                "trials": sim.trials,
                "successes": sim.successes,
                "bound": bound,
                "bound_error": bound_error,
                "exact": exact.as_ref().map(|e| e.to_string()),
                "exact_value": exact.as_ref().map(pigeonhole::to_f64),
            });
            let doc = json_doc(&man, body)?;
            ctx.finish(man, &doc)
        }
        Command::Diagrams(d) => run_diagrams(d, ctx),
        Command::Conditions { which, k_expr, f_expr, ell_grid, m } => {
            let grid = parse_grid(&ell_grid)?;
            let f: Expr = f_expr.parse()?;
            let default_k = if which == "asterisk" { "ell^(1/3)*log^(-1/3)" } else { "corollary-k" };
            let k: Expr = k_expr.as_deref().unwrap_or(default_k).parse()?;
            let rep = match which.as_str() {
                "star" => thresholds::star_condition(&k, &f, &grid, m)?,
                "spade" => thresholds::spade_condition(&k, m, &grid)?,
                _ => thresholds::asterisk_condition(&k, &f, &grid, m)?,
            };
            let man = ctx.manifest(
                "conditions",
                json!({ "which": which, "k": k.to_string(), "f": f.to_string(), "grid": ell_grid, "m": m }),
                None,
            );
            let mut comments = vec![
                format!("condition={which} k={k} f={f} m={m}"),
                format!("symbolic={}", rep.symbolic),
                format!("limit={} holds={}", rep.limit, rep.holds.map_or("unknown".into(), |h| h.to_string())),
            ];
            for (name, e) in &rep.terms {
                comments.push(format!("term {name} = {e}"));
            }
            let doc = csv_doc(&man, &comments, &rep.trace)?;
            ctx.finish(man, &doc)
        }
        Command::PhaseMap { alpha, beta, coeff } => {
            let alphas = thresholds::parse_range(&alpha)?;
            let betas = thresholds::parse_range(&beta)?;
            let man = ctx.manifest("phase-map", json!({ "alpha": alpha, "beta": beta, "coeff": coeff }), None);
            let cells = with_threads(ctx.threads, || thresholds::phase_map(&alphas, &betas, coeff));
            #[derive(Serialize)]
            struct Row {
                alpha: String,
                beta: String,
                verdict: &'static str,
                clause: String,
            }
            let fmt = |r: &Rational64| format!("{:.6}", *r.numer() as f64 / *r.denom() as f64);
            let rows: Vec<Row> = cells
                .iter()
                .map(|c| Row {
                    alpha: fmt(&c.alpha),
                    beta: fmt(&c.beta),
                    verdict: c.verdict.as_ref().map_or("excluded", |v| v.outcome.name()),
                    clause: c.verdict.as_ref().map_or("f does not tend to 0".into(), |v| v.clause.clone()),
                })
                .collect();
            let doc = csv_doc(&man, &[format!("f = {coeff} * log^beta / ell^alpha")], &rows)?;
            ctx.finish(man, &doc)
        }
        Command::Replay { .. } => unreachable!("handled before dispatch"),
    }
}

fn run_diagrams(cmd: DiagramsCommand, ctx: &Ctx) -> CliResult<()> {
    match cmd {
        DiagramsCommand::Tutte { n } => {
            let man = ctx.manifest("diagrams tutte", json!({ "n": n }), None);
            let count = diagrams::tutte_count(n)?;
            let census = diagrams::enumerate_rooted_maps(n as usize).ok();
            let body = json!({
                "n": n,
                "count": count.to_string(),
                "census": census,
                "log3_count": diagrams::biguint_log(&count, 2)?,
            });
            let doc = json_doc(&man, body)?;
            ctx.finish(man, &doc)
        }
        DiagramsCommand::Bound { faces, ell, m } => {
            let man = ctx.manifest("diagrams bound", json!({ "faces": faces, "ell": ell, "m": m }), None);
            let b = diagrams::log_diagram_bound(faces, ell, m)?;
            let doc = json_doc(&man, json!({ "faces": faces, "ell": ell, "m": m, "log_bound": b.log_bound, "headline": b.headline }))?;
            ctx.finish(man, &doc)
        }
        DiagramsCommand::Fulfill { faces, boundary, ell, density } => {
            let stats = DiagramStats::new(faces, boundary, ell)?;
            let man = ctx.manifest("diagrams fulfill", json!({ "stats": stats, "density": density }), None);
            let e = diagrams::fulfillability_bound(&stats, density);
            let doc = json_doc(&man, json!({ "stats": stats, "density": density, "exponent": e }))?;
            ctx.finish(man, &doc)
        }
        DiagramsCommand::LocalGlobal { faces, boundary, ell, big_k, explore } => {
            let stats = DiagramStats::new(faces, boundary, ell)?;
            let win = WindowParams::new(big_k, explore)?;
            let man = ctx.manifest("diagrams local-global", json!({ "stats": stats, "K": big_k }), None);
            let lg = diagrams::local_global(&stats, &win);
            let doc = json_doc(&man, json!({ "stats": stats, "K": big_k, "result": lg }))?;
            ctx.finish(man, &doc)
        }
        DiagramsCommand::Census { max_n } => {
            let man = ctx.manifest("diagrams census", json!({ "max_n": max_n }), None);
            let rows = diagrams::census_table(max_n)?;
            let doc = csv_doc(&man, &[], &rows)?;
            ctx.finish(man, &doc)
        }
    }
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    if let Some(rest) = spec.strip_prefix("pow2:") {
        let (a, b) = rest.split_once(':').ok_or("pow2 grid needs pow2:A:B")?;
        let (a, b): (i32, i32) = (a.parse()?, b.parse()?);
        if a > b || !(4..=1000).contains(&a) || b > 1000 {
            return Err("pow2 grid needs 4 <= A <= B <= 1000".into());
        }
        return Ok((a..=b).map(|j| 2f64.powi(j)).collect());
    }
    spec.split(',').map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad grid point {s:?}: {e}").into())).collect()
}

fn replay(path: &Path, cli_threads: usize, out: Option<PathBuf>, manifest: Option<PathBuf>) -> CliResult<()> {
    let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let man: RunManifest = serde_json::from_str(&text)?;
    if man.expected_digest() != man.digest {
        return Err(format!("manifest digest mismatch in {}", path.display()).into());
    }
    if man.tool_version != manifest::TOOL_VERSION {
        return Err(format!("manifest from version {}, this is {}", man.tool_version, manifest::TOOL_VERSION).into());
    }
    let mut argv = vec![manifest::TOOL.to_string()];
    argv.extend(man.args.iter().cloned());
    let cli = Cli::try_parse_from(&argv)?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err("a replay manifest cannot be replayed".into());
    }
    let ctx = Ctx { threads: cli_threads, out, manifest, args: man.args.clone() };
    run_command(cli.command, &ctx)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Replay { manifest_file } => replay(&manifest_file, cli.threads, cli.out, cli.manifest),
        command => {
            let ctx = Ctx { threads: cli.threads, out: cli.out, manifest: cli.manifest, args: computation_args(&argv[1..]) };
            run_command(command, &ctx)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
