use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{serialize_config, Check, RunConfig};
use crate::bridge::{apply_gamma_fit, run_comparison_with, ErrorReport, ReportStatus};
use crate::error::{Error, Result};

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "METASTAB_THREADS";

/// Largest relative energy drift accepted by [`Check::EnergyDrift`].
pub const DRIFT_TOL: f64 = 1e-8;
/// Largest log-scale residual accepted by [`Check::Localization`].
pub const FIT_RESIDUAL_TOL: f64 = 0.10;
/// Largest high-mode energy fraction accepted by [`Check::NoEquipartition`].
pub const HIGH_FRACTION_TOL: f64 = 0.05;
/// Slack of [`Check::Gamma`] below the target exponent.
pub const GAMMA_SLACK: f64 = 0.15;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Exit code for an error raised before or during a run.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Validation(_) | Error::Config(_) | Error::InvalidParameter(_) => EXIT_VALIDATION,
        Error::RegimeMismatch(_) | Error::IndexOutOfRange(_) => EXIT_VALIDATION,
        Error::Budget { .. } => EXIT_BUDGET,
        _ => EXIT_NUMERICAL,
    }
}

/// Worker count from `METASTAB_THREADS`, else the available parallelism.
pub fn worker_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Validation(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: Check,
    /// `None` for scan-wide checks.
    pub n1: Option<usize>,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct RunFailure {
    pub n1: usize,
    pub error: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub reports: Vec<ErrorReport>,
    pub runtimes: Vec<f64>,
    pub failures: Vec<RunFailure>,
    pub checks: Vec<CheckResult>,
    pub manifest: String,
    pub exit_code: i32,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Evaluates the enforced acceptance inequalities on a finished scan.
pub fn evaluate_checks(cfg: &RunConfig, reports: &[ErrorReport]) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for r in reports {
        let n1 = Some(r.big_n1);
        for &check in &cfg.checks {
            let (passed, detail) = match check {
                Check::EnergyDrift => {
                    let d = r.max_energy_drift();
                    (d <= DRIFT_TOL, format!("max drift {d:.3e} (tol {DRIFT_TOL:e})"))
                }
                Check::Localization => match (r.rho_fit, r.fit_residual) {
                    (Some(rho), Some(res)) => (
                        rho > 0.0 && res < FIT_RESIDUAL_TOL,
                        format!("rho' = {rho:.4}, residual {res:.4} (tol {FIT_RESIDUAL_TOL})"),
                    ),
                    _ => (false, "no exponential fit".into()),
                },
                Check::NoEquipartition => {
                    if r.high_mode_fraction.is_empty() {
                        (false, "no rho' to set the cut".into())
                    } else {
                        let f = r.high_mode_fraction.iter().cloned().fold(0.0, f64::max);
                        (f < HIGH_FRACTION_TOL, format!("max high-mode fraction {f:.4} (tol {HIGH_FRACTION_TOL})"))
                    }
                }
                Check::Gamma => continue,
            };
            out.push(CheckResult { check, n1, passed, detail });
        }
    }
    if cfg.checks.contains(&Check::Gamma) && reports.len() >= 2 {
        let g = reports[0].gamma_fit;
        let want = cfg.gamma - GAMMA_SLACK;
        let (passed, detail) = match g {
            Some(g) => (g >= want, format!("gamma_fit = {g:.4} (need >= {want:.4})")),
            None => (false, "gamma fit failed".into()),
        };
        out.push(CheckResult { check: Check::Gamma, n1: None, passed, detail });
    }
    out
}

/// Text of the MANIFEST: code version, config hash, seed and the hashes of
/// the per-run reports. Runtimes are left out so reruns hash identically.
pub fn manifest_text(cfg: &RunConfig, report_files: &[(String, Vec<u8>)]) -> Result<String> {
    let canon = serialize_config(cfg)?;
    let mut m = String::new();
    let _ = writeln!(m, "metastab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "config_sha256 {}", sha256_hex(canon.as_bytes()));
    let _ = writeln!(m, "seed {}", cfg.seed);
    for (name, bytes) in report_files {
        let _ = writeln!(m, "report {name} {}", sha256_hex(bytes));
    }
    Ok(m)
}

/// `report_N1_<n>.json`
pub fn report_file_name(n1: usize) -> String {
    format!("report_N1_{n1}.json")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_else(|| "NaN".into())
}

/// Runs the scan on `workers` threads and writes per-run JSON reports,
/// `aggregate.csv`, `checks.json`, per-run error files and `MANIFEST` into
/// the output directory.
pub fn run_experiment(cfg: &RunConfig, workers: usize) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let lattices = cfg.lattices()?;
    let opts = cfg.options();
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir)
        .map_err(|e| Error::Validation(format!("output_dir {} is not writable: {e}", dir.display())))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<(Result<ErrorReport>, f64)> = pool.install(|| {
        use rayon::prelude::*;
        lattices
            .par_iter()
            .map(|p| {
                let clock = Instant::now();
                let r = run_comparison_with(&spec, p, &opts);
                (r, clock.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut reports = Vec::new();
    let mut runtimes = Vec::new();
    let mut failures = Vec::new();
    for ((r, secs), p) in results.into_iter().zip(&lattices) {
        match r {
            Ok(rep) => {
                reports.push(rep);
                runtimes.push(secs);
            }
            Err(e) => {
                let msg = e.to_string();
                fs::write(dir.join(format!("error_N1_{}.txt", p.big_n1)), format!("{msg}\n"))?;
                failures.push(RunFailure { n1: p.big_n1, error: msg, exit_code: exit_code_for(&e) });
            }
        }
    }
    apply_gamma_fit(&mut reports);

    let mut files = Vec::new();
    for r in &reports {
        let name = report_file_name(r.big_n1);
        let bytes = serde_json::to_vec_pretty(r)?;
        fs::write(dir.join(&name), &bytes)?;
        files.push((name, bytes));
    }

    let mut csv = String::from("mu,sigma,gamma_fit,rho_fit,max_sup_error,runtime_s\n");
    for (r, secs) in reports.iter().zip(&runtimes) {
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{},{},{:.16e},{:.16e}",
            r.mu,
            r.sigma,
            fmt_opt(r.gamma_fit),
            fmt_opt(r.rho_fit),
            r.max_sup_error(),
            secs
        );
    }
    fs::write(dir.join("aggregate.csv"), csv)?;

    let checks = evaluate_checks(cfg, &reports);
    fs::write(dir.join("checks.json"), serde_json::to_vec_pretty(&checks)?)?;
    let manifest = manifest_text(cfg, &files)?;
    fs::write(dir.join("MANIFEST"), &manifest)?;

    let exit_code = if let Some(f) = failures.iter().map(|f| f.exit_code).max() {
        f
    } else if reports.iter().any(|r| r.status == ReportStatus::BudgetAbort) {
        EXIT_BUDGET
    } else if checks.iter().any(|c| !c.passed) {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    };
    Ok(ExperimentOutcome { reports, runtimes, failures, checks, manifest, exit_code })
}

/// Reads a run configuration from disk.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    super::config::parse_config(&text)
}
