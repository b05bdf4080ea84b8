use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grpauth::baselines::{cost_rows, write_cost_csv};
use grpauth::simnet::{demo::attack_demo, Scenario, SimConfig, SimError, Simulation, SuiteChoice};

/// Threshold group authentication toolkit.
///
/// Exit codes: 0 success, 1 a scripted expectation did not hold,
/// 2 usage, parse or I/O error.
#[derive(Debug, Parser)]
#[command(name = "grpauth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file through the simulator and write its transcript.
    Run {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        /// Override the scenario's seed.
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
        /// Override the scenario's suite: mock, mock61, mock:<q>, curve43, curve-large.
        #[arg(long, value_parser = parse_suite)]
        suite: Option<SuiteChoice>,
        /// Transcript destination (NDJSON); stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also log secure-channel plaintext, marked as such.
        #[arg(long)]
        include_secure_plaintext: bool,
    },
    /// Emit the per-member cost comparison as CSV (scheme,m,cost).
    Costs {
        #[arg(long, default_value_t = 1)]
        m_min: u64,
        #[arg(long, default_value_t = 300)]
        m_max: u64,
        /// CSV destination; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Eavesdrop on recorded rounds and try to recover the group secret.
    DemoAttack {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Report destination; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn parse_suite(s: &str) -> Result<SuiteChoice, String> {
    s.parse().map_err(|e: SimError| e.to_string())
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes),
        None => io::stdout().lock().write_all(bytes),
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn cmd_run(
    path: &Path,
    seed: Option<u64>,
    suite: Option<SuiteChoice>,
    out: Option<&Path>,
    include_secure_plaintext: bool,
) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    let mut scenario = match Scenario::from_toml(&text) {
        Ok(s) => s,
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let config = SimConfig { include_secure_plaintext, suite_override: suite, ..SimConfig::default() };
    let sim = match Simulation::run_to_end(&scenario, config) {
        Ok(sim) => sim,
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    let transcript = sim.transcript();
    if let Err(e) = write_out(out, transcript.to_ndjson().as_bytes()) {
        return fail(e);
    }
    let mismatches = transcript.mismatches();
    for m in &mismatches {
        eprintln!("mismatch: {}", describe_mismatch(m));
    }
    if mismatches.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn describe_mismatch(e: &grpauth::simnet::Event) -> String {
    match e {
        grpauth::simnet::Event::Expectation { step, expected, actual, .. } => {
            format!("step {step} expected {expected}, got {actual}")
        }
        other => format!("{other:?}"),
    }
}

fn cmd_costs(m_min: u64, m_max: u64, out: Option<&Path>) -> ExitCode {
    let rows = match cost_rows(m_min, m_max) {
        Ok(rows) => rows,
        Err(e) => return fail(e),
    };
    let mut csv = Vec::new();
    write_cost_csv(&mut csv, &rows).expect("writing to memory");
    match write_out(out, &csv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn cmd_demo_attack(seed: u64, out: Option<&Path>) -> ExitCode {
    let report = match attack_demo(seed) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    match write_out(out, report.to_string().as_bytes()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, seed, suite, out, include_secure_plaintext } => {
            cmd_run(&scenario, seed, suite, out.as_deref(), include_secure_plaintext)
        }
        Command::Costs { m_min, m_max, out } => cmd_costs(m_min, m_max, out.as_deref()),
        Command::DemoAttack { seed, out } => cmd_demo_attack(seed, out.as_deref()),
    }
}
