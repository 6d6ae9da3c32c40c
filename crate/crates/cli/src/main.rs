//! `xdsp`: assemble, simulate and benchmark programs for the DSP-extended
//! RV32IM core model.
//!
//! Exit codes: 0 ok, 1 I/O or usage error, 2 assembly parse error, 3 trap,
//! 4 deadlock or cycle budget exhausted, 5 acceptance band failure.

mod bench;
mod error;
mod gen;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser)]
#[command(
    name = "xdsp",
    version,
    about = "Simulator and assembler for an RV32IM core with DSP extensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a file and print the canonical listing.
    Asm {
        file: PathBuf,
        /// Prefix each line with its address and size.
        #[arg(long)]
        listing: bool,
    },
    /// Assemble and simulate a program (the same program on every core).
    Run(run::RunArgs),
    /// Generate a benchmark kernel's per-core programs and data image.
    Gen(gen::GenArgs),
    /// Run a kernel suite in all variants and check the calibration bands.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Model configuration shared by `run` and `bench`.
#[derive(Args, Clone, Debug)]
pub struct ModelArgs {
    /// Timing configuration (TOML).
    #[arg(long)]
    timing: Option<PathBuf>,
    /// Energy table (TOML).
    #[arg(long)]
    energy: Option<PathBuf>,
    /// TCDM size in bytes.
    #[arg(long, default_value_t = xdsp::exec::DEFAULT_TCDM_BYTES)]
    tcdm: u32,
    /// Number of TCDM banks (power of two).
    #[arg(long, default_value_t = xdsp::exec::DEFAULT_BANKS)]
    banks: u32,
    /// Cycle budget; exceeding it exits with code 4.
    #[arg(long, default_value_t = 200_000_000)]
    max_cycles: u64,
}

impl ModelArgs {
    fn timing(&self) -> Result<xdsp::TimingConfig, CliError> {
        match &self.timing {
            Some(p) => xdsp::TimingConfig::load(p)
                .map_err(|e| CliError::io(format!("{}: {e}", p.display()))),
            None => Ok(xdsp::TimingConfig::default()),
        }
    }

    fn energy(&self) -> Result<xdsp::EnergyTable, CliError> {
        match &self.energy {
            Some(p) => xdsp::EnergyTable::load(p)
                .map_err(|e| CliError::io(format!("{}: {e}", p.display()))),
            None => Ok(xdsp::EnergyTable::default()),
        }
    }
}

fn asm(file: &std::path::Path, listing: bool) -> Result<(), CliError> {
    let program = run::assemble(file)?;
    if listing {
        let text = xdsp::print(&program);
        // print emits one line per label or instruction; annotate the latter
        let mut index = 0;
        for line in text.lines() {
            if line.trim_end().ends_with(':') && !line.starts_with(' ') {
                println!("{line}");
            } else if index < program.len() {
                let size = program.instrs[index].size.bytes();
                println!(
                    "{:08x} {size} {}",
                    program.address_of(index),
                    line.trim_start()
                );
                index += 1;
            } else {
                println!("{line}");
            }
        }
    } else {
        print!("{}", xdsp::print(&program));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Asm { file, listing } => asm(file, *listing),
        Command::Run(a) => run::run(a),
        Command::Gen(a) => gen::gen(a),
        Command::Bench(a) => bench::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("xdsp: {e}");
            ExitCode::from(e.code())
        }
    }
}
