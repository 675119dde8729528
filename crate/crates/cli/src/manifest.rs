//! Run manifests: everything needed to reproduce a run, plus a digest that
//! every output file carries.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL: &str = "randgroup";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub subcommand: String,
    /// Arguments after the binary name, without output paths and threads.
    pub args: Vec<String>,
    /// Fully materialized parameters (num, k, K, ...).
    pub params: Value,
    pub seed: Option<u64>,
    pub generator: String,
    pub digest: String,
    /// Not part of the digest.
    pub threads: usize,
    pub wall_clock_unix: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, args: Vec<String>, params: Value, seed: Option<u64>, threads: usize) -> RunManifest {
        let digest = digest(subcommand, &args, &params, seed);
        let wall_clock_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        RunManifest {
            format_version: FORMAT_VERSION,
            tool: TOOL.into(),
            tool_version: TOOL_VERSION.into(),
            subcommand: subcommand.into(),
            args,
            params,
            seed,
            generator: randgroup::rng::GENERATOR.into(),
            digest,
            threads,
            wall_clock_unix,
            outputs: Vec::new(),
        }
    }

    /// Recomputes the digest from the reproducible fields.
    pub fn expected_digest(&self) -> String {
        digest(&self.subcommand, &self.args, &self.params, self.seed)
    }
}

fn digest(subcommand: &str, args: &[String], params: &Value, seed: Option<u64>) -> String {
    let canonical = json!({
        "format_version": FORMAT_VERSION,
        "tool_version": TOOL_VERSION,
        "subcommand": subcommand,
        "args": args,
        "params": params,
        "seed": seed,
    });
    let bytes = serde_json::to_vec(&canonical).expect("json values serialize");
    format!("{:x}", Sha256::digest(bytes))
}

/// Drops `--out`, `--manifest`, `--log`, `--threads` (and their values) so
/// the remaining arguments describe only the computation.
pub fn computation_args(argv: &[String]) -> Vec<String> {
    const WITH_VALUE: [&str; 4] = ["--out", "--manifest", "--log", "--threads"];
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
            continue;
        }
        if WITH_VALUE.contains(&a.as_str()) {
            skip = true;
            continue;
        }
        if WITH_VALUE.iter().any(|f| a.starts_with(&format!("{f}="))) {
            continue;
        }
        out.push(a.clone());
    }
    out
}
