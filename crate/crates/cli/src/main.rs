//! `kvqe`: configuration-driven VQE experiments on periodic Hamiltonians.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kvqe::diagnostics::{write_csv, ScanRow};
use kvqe::experiment::{run_on_integrals, scan, ScanSpec};
use kvqe::fci::fci_integrals;
use kvqe::hamiltonian::{load_pfcidump, write_pfcidump};
use kvqe::k2g::{load_supercell_dump, realify, rotate_integrals};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "kvqe", version, about = "VQE, ADAPT-VQE and QSE on periodic Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the single experiment described by a config file.
    Run { config: PathBuf },
    /// Check a config file and its inputs without running anything.
    Validate { config: PathBuf },
    /// Run every method of the `[scan]` section at every scan point.
    Scan { config: PathBuf },
    /// Realify k-point integrals with a supercell dump and write them at Γ.
    K2g {
        input: PathBuf,
        supercell: PathBuf,
        output: PathBuf,
    },
    /// Exact ground and low-lying energies of a PFCIDUMP file.
    Fci {
        input: PathBuf,
        /// Number of eigenvalues to print.
        #[arg(long, default_value_t = 1)]
        states: usize,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

/// Errors reading inputs are the user's to fix; the rest are numerical.
fn classify(e: kvqe::Error) -> CliError {
    match e {
        kvqe::Error::Parse { .. } | kvqe::Error::Io(_) | kvqe::Error::InvalidInput(_) => {
            CliError::Config(e.to_string())
        }
        _ => CliError::Numerical(e.to_string()),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    config::load(path).map_err(|f| CliError::Config(f.join("\n")))
}

/// Thread count from the config, else `KVQE_THREADS`, else rayon's default.
fn init_threads(configured: Option<usize>) -> Result<(), CliError> {
    let from_env = match std::env::var("KVQE_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Config(format!("KVQE_THREADS = '{v}' is not a positive integer")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = configured.or(from_env) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn emit(cfg: &ExperimentConfig, rows: &[ScanRow], report: &str) -> Result<(), CliError> {
    let flagged = rows.iter().any(|r| r.status != "ok");
    let csv = write_csv(rows, flagged);
    match &cfg.csv {
        Some(p) => write_file(p, &csv)?,
        None => print!("{csv}"),
    }
    match &cfg.report {
        Some(p) => write_file(p, report)?,
        None => eprint!("{report}"),
    }
    Ok(())
}

fn run(path: &Path) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    init_threads(cfg.threads)?;
    let source = cfg.source();
    let ints = source.integrals().map_err(classify)?;
    let orbitals = if cfg.method == kvqe::experiment::Method::K2gAdapt {
        Some(source.orbitals().map_err(classify)?.ok_or_else(|| {
            CliError::Config("k2g-adapt needs a band model or a supercell dump".into())
        })?)
    } else {
        None
    };
    if let Some(o) = &orbitals {
        if o.n_orbitals() != ints.norb {
            return Err(CliError::Config(format!(
                "supercell dump has {} orbitals, integrals have {}",
                o.n_orbitals(),
                ints.norb
            )));
        }
    }
    let outcome = run_on_integrals(ints, orbitals.as_ref(), cfg.method, &cfg.params)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut row = ScanRow::new(cfg.r, cfg.method.name(), outcome.energy(), outcome.fci_energies[0]);
    if !outcome.converged {
        row.status = "not-converged".into();
    }
    emit(&cfg, &[row], &report::run_report(&cfg, &outcome))
}

fn run_scan(path: &Path) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    let settings = cfg
        .scan
        .clone()
        .ok_or_else(|| CliError::Config(format!("{}: no [scan] section", path.display())))?;
    init_threads(cfg.threads)?;
    let spec = ScanSpec {
        points: cfg.scan_points(),
        methods: settings.methods.clone(),
        params: cfg.params.clone(),
    };
    let rows = scan(&spec);
    emit(&cfg, &rows, &report::scan_report(&cfg, &settings.methods, &rows))
}

fn k2g(input: &Path, supercell: &Path, output: &Path) -> Result<(), CliError> {
    let ints = load_pfcidump(input).map_err(classify)?;
    let orbitals = load_supercell_dump(supercell).map_err(classify)?;
    if ints.ms2 != 0 || !ints.nelec.is_multiple_of(2) {
        return Err(CliError::Config("K2G needs a closed-shell system (even nelec, MS2 = 0)".into()));
    }
    let real = realify(&orbitals, ints.nelec / 2).map_err(|e| CliError::Numerical(e.to_string()))?;
    let rotated = rotate_integrals(&ints, &real.rotation).map_err(|e| CliError::Numerical(e.to_string()))?;
    write_pfcidump(&rotated.integrals, output).map_err(classify)?;
    println!("wrote {}", output.display());
    println!("max imaginary residue before truncation: {:.3e}", rotated.max_imag_residue);
    println!("fock imaginary residue: {:.3e}", real.fock_imag_residue);
    Ok(())
}

fn fci(input: &Path, states: usize) -> Result<(), CliError> {
    let ints = load_pfcidump(input).map_err(classify)?;
    let res = fci_integrals(&ints, states.max(1)).map_err(|e| CliError::Numerical(e.to_string()))?;
    println!("sector: nelec = {}, ms2 = {}", res.sector.0, res.sector.1);
    for (i, e) in res.energies.iter().enumerate() {
        println!("E[{i}] = {e:.10}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config),
        Command::Scan { config } => run_scan(config),
        Command::Validate { config } => {
            let findings = config::validate(config);
            for f in &findings {
                println!("{f}");
            }
            if findings.is_empty() {
                eprintln!("{}: no findings", config.display());
            }
            Ok(())
        }
        Command::K2g {
            input,
            supercell,
            output,
        } => k2g(input, supercell, output),
        Command::Fci { input, states } => fci(input, *states),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kvqe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
