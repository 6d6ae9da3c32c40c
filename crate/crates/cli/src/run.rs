use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use xdsp::{run_cluster, ClusterConfig, MemorySystem, Program, RunReport};

use crate::error::{write_atomic, CliError};
use crate::{Format, ModelArgs};

#[derive(Args)]
pub struct RunArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 1)]
    cores: usize,
    /// Data image in hex-dump format (`@ADDR` lines followed by bytes).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Flat binary data image, loaded at `--base`.
    #[arg(long, conflicts_with = "data")]
    binary: Option<PathBuf>,
    #[arg(long, default_value = "0", value_parser = parse_u32)]
    base: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, conflicts_with_all = ["format", "csv"])]
    json: bool,
    /// Shorthand for `--format csv`.
    #[arg(long, conflicts_with = "format")]
    csv: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

fn parse_u32(s: &str) -> Result<u32, String> {
    let r = match s.strip_prefix("0x") {
        Some(h) => u32::from_str_radix(h, 16),
        None => s.parse(),
    };
    r.map_err(|e| e.to_string())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn assemble(path: &Path) -> Result<Program, CliError> {
    xdsp::parse(&read(path)?)
        .map_err(|e| CliError::Parse(format!("{}:{}: {}", path.display(), e.line, e.message)))
}

#[derive(Serialize)]
struct CsvRow {
    cores: usize,
    cycles: u64,
    retired: u64,
    ipc: f64,
    compressed_ratio: f64,
    stall_load_use: u64,
    stall_branch: u64,
    stall_fetch: u64,
    stall_mem_unaligned: u64,
    stall_div: u64,
    stall_contention: u64,
    stall_barrier: u64,
    contended_accesses: u64,
    total_accesses: u64,
    energy_pj: f64,
}

pub fn run(a: &RunArgs) -> Result<(), CliError> {
    let program = assemble(&a.file)?;
    let mut mem =
        MemorySystem::new(a.model.tcdm, a.model.banks).map_err(|e| CliError::io(e.to_string()))?;
    mem.load_image(&program.data)
        .map_err(|e| CliError::io(format!("program data: {e}")))?;
    if let Some(p) = &a.data {
        let image = xdsp::image::parse_hex(&read(p)?)
            .map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
        for (addr, bytes) in &image {
            mem.write_bytes(*addr, bytes)
                .map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
        }
    }
    if let Some(p) = &a.binary {
        let bytes = std::fs::read(p).map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
        mem.write_bytes(a.base, &bytes)
            .map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
    }
    let timing = a.model.timing()?;
    let table = a.model.energy()?;
    let programs = vec![&program; a.cores];
    let config = ClusterConfig {
        cores: a.cores,
        max_cycles: a.model.max_cycles,
    };
    let result = run_cluster(&programs, mem, &config, &timing)?;
    let report =
        RunReport::from_cluster(&result, &table).map_err(|e| CliError::io(e.to_string()))?;

    let format = if a.json {
        Format::Json
    } else if a.csv {
        Format::Csv
    } else {
        a.format
    };
    let text = render(&report, format)?;
    match &a.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(r: &RunReport, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(r).expect("report serializes") + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let s = &r.stalls;
            w.serialize(CsvRow {
                cores: r.cores,
                cycles: r.cycles,
                retired: r.retired,
                ipc: r.ipc,
                compressed_ratio: r.compressed_ratio,
                stall_load_use: s.load_use,
                stall_branch: s.branch,
                stall_fetch: s.fetch,
                stall_mem_unaligned: s.mem_unaligned,
                stall_div: s.div,
                stall_contention: s.contention,
                stall_barrier: s.barrier,
                contended_accesses: r.contention.contended_accesses,
                total_accesses: r.contention.total_accesses,
                energy_pj: r.energy.total_pj(),
            })
            .map_err(|e| CliError::io(e.to_string()))?;
            String::from_utf8(w.into_inner().map_err(|e| CliError::io(e.to_string()))?)
                .expect("utf-8")
        }
        Format::Text => {
            let mut t = format!(
                "cycles            {}\nretired           {}\nipc               {:.3}\ncompressed ratio  {:.3}\nenergy            {:.1} pJ\n",
                r.cycles,
                r.retired,
                r.ipc,
                r.compressed_ratio,
                r.energy.total_pj()
            );
            let s = &r.stalls;
            t += &format!(
                "stalls            load-use {} branch {} fetch {} unaligned {} div {} contention {} barrier {}\n",
                s.load_use, s.branch, s.fetch, s.mem_unaligned, s.div, s.contention, s.barrier
            );
            t += &format!(
                "contention        {}/{} accesses ({:.2}%)\n",
                r.contention.contended_accesses,
                r.contention.total_accesses,
                r.contention.percentage()
            );
            if r.per_core.len() > 1 {
                for c in &r.per_core {
                    t += &format!(
                        "core {:<3}          cycles {} retired {} ipc {:.3} energy {:.1} pJ\n",
                        c.core,
                        c.cycles,
                        c.retired,
                        c.ipc,
                        c.energy.total_pj()
                    );
                }
            }
            t
        }
    })
}
