//! Run manifests: every check of a configuration, in declaration order.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::checks::{run_check, Outcome, Overrides};
use crate::config::{ConfigError, Experiment};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status: all checks pass.
pub const EXIT_PASS: i32 = 0;
/// Exit status: some check found a violation.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit status: configuration or input error.
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_name: String,
    pub config_hash: String,
    pub toolkit_version: String,
    pub checks: Vec<Outcome>,
    pub exit_status: i32,
    /// The only field allowed to differ between reruns.
    pub wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn run_config(exp: &Experiment, overrides: &Overrides) -> Result<RunManifest, ConfigError> {
    let start = Instant::now();
    let checks = exp.checks.iter().map(|c| run_check(exp, c, overrides)).collect::<Result<Vec<_>, _>>()?;
    let exit_status = if checks.iter().all(|c| c.pass) { EXIT_PASS } else { EXIT_VIOLATION };
    Ok(RunManifest {
        config_name: exp.name.clone(),
        config_hash: exp.hash.clone(),
        toolkit_version: TOOLKIT_VERSION.to_string(),
        checks,
        exit_status,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("manifest serializes");
    s.push('\n');
    s
}

/// The manifest JSON without its wall-clock field.
pub fn strip_wall_clock(json: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json).expect("manifest JSON");
    if let Some(o) = v.as_object_mut() {
        o.remove("wall_clock_seconds");
    }
    to_json(&v)
}

/// Writes `manifest.json` and one `<check>.csv` per check with rows.
pub fn write_manifest(m: &RunManifest, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("manifest.json"), to_json(m))?;
    for c in &m.checks {
        if let Some(csv) = &c.csv {
            std::fs::write(dir.join(format!("{}.csv", c.name)), csv)?;
        }
    }
    Ok(())
}
