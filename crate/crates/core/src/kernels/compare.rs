//! Side-by-side comparison of the three variants of a kernel.

use serde::Serialize;

use super::run::{run_kernel, KernelRun, RunError, RunSettings};
use super::{Elem, Kernel, KernelSpec, Variant};

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub kernel: Kernel,
    pub elem: Elem,
    pub cores: usize,
    pub variant: Variant,
    pub cycles: u64,
    pub retired: u64,
    pub cycles_per_output: f64,
    /// Baseline cycles over this variant's cycles.
    pub speedup: f64,
    pub energy_pj: f64,
    /// This variant's energy over the baseline's.
    pub energy_ratio: f64,
    pub loads_stores: u64,
    pub compressed_retired: u64,
    pub compressed_ratio: f64,
    pub contended_accesses: u64,
    pub contention_pct: f64,
    pub passed: bool,
}

/// Runs all variants of `spec` (its `variant` is ignored).
pub fn compare(spec: &KernelSpec, settings: &RunSettings) -> Result<Vec<CompareRow>, RunError> {
    let runs = Variant::ALL
        .into_iter()
        .map(|v| run_kernel(&spec.with_variant(v), settings))
        .collect::<Result<Vec<KernelRun>, _>>()?;
    let base = &runs[0];
    Ok(runs
        .iter()
        .map(|r| CompareRow {
            kernel: r.spec.kernel,
            elem: r.spec.elem,
            cores: r.spec.cores,
            variant: r.spec.variant,
            cycles: r.cycles,
            retired: r.retired,
            cycles_per_output: r.cycles_per_output(),
            speedup: base.cycles as f64 / r.cycles as f64,
            energy_pj: r.energy_pj(),
            energy_ratio: r.energy.total_fj as f64 / base.energy.total_fj as f64,
            loads_stores: r.loads_stores(),
            compressed_retired: r.compressed_retired,
            compressed_ratio: r.compressed_ratio(),
            contended_accesses: r.contention.contended_accesses,
            contention_pct: r.contention.percentage(),
            passed: r.passed(),
        })
        .collect())
}

/// Every (kernel, element type) pair of the suite at default sizes.
pub fn suite_specs(cores: usize) -> Vec<KernelSpec> {
    Kernel::ALL
        .into_iter()
        .flat_map(|k| {
            k.elems()
                .iter()
                .map(move |&e| KernelSpec::new(k, e, Variant::Baseline, cores))
        })
        .collect()
}

pub fn geomean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v.ln(), n + 1));
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).exp()
    }
}
