use std::path::PathBuf;
use std::thread;

use clap::Args;
use xdsp::kernels::{
    check_bands, compare, suite_specs, BandCheck, CompareRow, KernelSpec, RunSettings,
};
use xdsp::{Kernel, Variant};

use crate::error::{write_atomic, CliError};
use crate::ModelArgs;

#[derive(Args)]
pub struct BenchArgs {
    /// all, conv, matmul, fir, vector, or a kernel name.
    suite: String,
    /// Core counts to run, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,4")]
    cores: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the CSV/JSON tables and summary.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

fn select(suite: &str) -> Result<Vec<Kernel>, CliError> {
    let k: Vec<Kernel> = match suite {
        "all" => Kernel::ALL.to_vec(),
        "conv" => vec![Kernel::Conv3x3, Kernel::Conv5x5, Kernel::Conv7x7],
        "matmul" => vec![Kernel::Matmul],
        "fir" => vec![Kernel::Fir],
        "vector" => vec![Kernel::VecaddClip, Kernel::MulqNorm],
        other => vec![other.parse::<Kernel>().map_err(|e| {
            CliError::io(format!(
                "{e}; expected all, conv, matmul, fir, vector or a kernel name"
            ))
        })?],
    };
    Ok(k)
}

fn csv_of<T: serde::Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::io(e.to_string()))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| CliError::io(e.to_string()))?).expect("utf-8"))
}

fn summary(rows: &[CompareRow], bands: &[BandCheck]) -> String {
    let mut s = format!(
        "{:<12} {:<4} {:>5} {:<9} {:>10} {:>9} {:>8} {:>7} {:>9} {:>6} {:>7}\n",
        "kernel",
        "elem",
        "cores",
        "variant",
        "cycles",
        "cyc/out",
        "speedup",
        "energy",
        "ld/st",
        "rvc",
        "cont%"
    );
    for r in rows {
        s += &format!(
            "{:<12} {:<4} {:>5} {:<9} {:>10} {:>9.2} {:>8.2} {:>7.3} {:>9} {:>6.3} {:>7.2}{}\n",
            r.kernel.name(),
            r.elem.name(),
            r.cores,
            r.variant.name(),
            r.cycles,
            r.cycles_per_output,
            r.speedup,
            r.energy_ratio,
            r.loads_stores,
            r.compressed_ratio,
            r.contention_pct,
            if r.passed { "" } else { "  GOLDEN MISMATCH" }
        );
    }
    s += "\n";
    for b in bands {
        s += &format!(
            "{} {:<50} {:>8.3} in [{:.2}, {:.2}]\n",
            if b.pass { "PASS" } else { "FAIL" },
            b.name,
            b.value,
            b.lo,
            b.hi
        );
    }
    s
}

pub fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let kernels = select(&a.suite)?;
    if a.cores.is_empty() || a.cores.contains(&0) {
        return Err(CliError::io("--cores needs positive core counts"));
    }
    let settings = RunSettings {
        timing: a.model.timing()?,
        energy: a.model.energy()?,
        tcdm_bytes: a.model.tcdm,
        banks: a.model.banks,
        max_cycles: a.model.max_cycles,
        seed: a.seed,
    };
    let specs: Vec<KernelSpec> = a
        .cores
        .iter()
        .flat_map(|&c| suite_specs(c))
        .filter(|s| kernels.contains(&s.kernel))
        .collect();
    let results: Vec<_> = thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| {
                let settings = &settings;
                scope.spawn(move || compare(spec, settings))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let bands = check_bands(&rows);
    let text = summary(&rows, &bands);
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
            write_atomic(&dir.join("rows.csv"), csv_of(&rows)?.as_bytes())?;
            let json = serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n";
            write_atomic(&dir.join("rows.json"), json.as_bytes())?;
            // one table per figure analog
            let speedup: Vec<_> = rows
                .iter()
                .filter(|r| r.variant != Variant::Baseline)
                .collect();
            write_atomic(
                &dir.join("speedup_energy.csv"),
                csv_of(&speedup)?.as_bytes(),
            )?;
            let conv: Vec<_> = rows
                .iter()
                .filter(|r| r.kernel.conv_size().is_some())
                .collect();
            if !conv.is_empty() {
                write_atomic(&dir.join("conv.csv"), csv_of(&conv)?.as_bytes())?;
            }
            let bands_json = serde_json::to_string_pretty(&bands).expect("bands serialize") + "\n";
            write_atomic(&dir.join("bands.json"), bands_json.as_bytes())?;
            write_atomic(&dir.join("summary.txt"), text.as_bytes())?;
            print!("{text}");
        }
        None => print!("{text}"),
    }
    let failed: Vec<_> = bands
        .iter()
        .filter(|b| !b.pass)
        .map(|b| b.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(format!(
            "{} band(s) failed: {}",
            failed.len(),
            failed.join(", ")
        )))
    }
}
