use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metastab::bridge::ErrorReport;
use metastab::experiment::{
    emit_spectrum_table, exit_code_for, load_config, report_file_name, run_experiment, worker_count, EXIT_OK,
    EXIT_VALIDATION,
};
use metastab::Error;

#[derive(Parser)]
#[command(name = "metastab", version, about = "Lattice metastability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scan described by a config file.
    Run { config: PathBuf },
    /// Parse and validate a config file without computing.
    Validate { config: PathBuf },
    /// Print the spectrum table of a report at a snapshot time.
    Table {
        report: PathBuf,
        #[arg(long = "time", allow_negative_numbers = true)]
        time: f64,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    code(exit_code_for(e))
}

fn run(config: PathBuf) -> ExitCode {
    let cfg = match load_config(&config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let workers = match worker_count() {
        Ok(w) => w,
        Err(e) => return fail(&e),
    };
    let out = match run_experiment(&cfg, workers) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    for (r, secs) in out.reports.iter().zip(&out.runtimes) {
        println!(
            "N1={} N2={} mu={:.6} sigma={:.4} max_sup_error={:.4e} rho'={} status={:?} ({secs:.1}s) -> {}",
            r.big_n1,
            r.big_n2,
            r.mu,
            r.sigma,
            r.max_sup_error(),
            r.rho_fit.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into()),
            r.status,
            report_file_name(r.big_n1),
        );
    }
    if let Some(g) = out.reports.first().and_then(|r| r.gamma_fit) {
        println!("gamma_fit={g:.4}");
    }
    for f in &out.failures {
        eprintln!("N1={} failed: {}", f.n1, f.error);
    }
    for c in &out.checks {
        let who = c.n1.map(|n| format!("N1={n}")).unwrap_or_else(|| "scan".into());
        println!("{} {:?} [{who}] {}", if c.passed { "PASS" } else { "FAIL" }, c.check, c.detail);
    }
    print!("{}", out.manifest);
    code(out.exit_code)
}

fn validate(config: PathBuf) -> ExitCode {
    match load_config(&config) {
        Ok(cfg) => {
            println!("{}: valid ({} run(s), regime {})", config.display(), cfg.n1_list.len(), cfg.regime);
            code(EXIT_OK)
        }
        Err(e) => fail(&e),
    }
}

fn table(report: PathBuf, time: f64) -> ExitCode {
    let text = match std::fs::read_to_string(&report) {
        Ok(t) => t,
        Err(e) => return fail(&Error::Validation(format!("{}: {e}", report.display()))),
    };
    let rep: ErrorReport = match serde_json::from_str(&text) {
        Ok(r) => r,
        Err(e) => return fail(&Error::Validation(format!("{}: {e}", report.display()))),
    };
    match emit_spectrum_table(&rep, time) {
        Ok(csv) => {
            print!("{csv}");
            code(EXIT_OK)
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { code(EXIT_VALIDATION) } else { code(EXIT_OK) };
        }
    };
    match cli.command {
        Command::Run { config } => run(config),
        Command::Validate { config } => validate(config),
        Command::Table { report, time } => table(report, time),
    }
}
