//! Running a kernel on the cluster model and checking it against the
//! golden reference.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cluster::{run_cluster, ClusterConfig, ClusterError, ContentionStats};
use crate::energy::{EnergyError, EnergyReport, EnergyTable};
use crate::exec::{MemError, MemorySystem, DEFAULT_BANKS, DEFAULT_TCDM_BYTES};
use crate::isa::Class;
use crate::pipeline::{StallBreakdown, TimingConfig};

use super::{generate, golden, Generated, KernelData, KernelError, KernelSpec};

#[derive(Clone, Debug)]
pub struct RunSettings {
    pub timing: TimingConfig,
    pub energy: EnergyTable,
    pub tcdm_bytes: u32,
    pub banks: u32,
    pub max_cycles: u64,
    pub seed: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            timing: TimingConfig::default(),
            energy: EnergyTable::default(),
            tcdm_bytes: DEFAULT_TCDM_BYTES,
            banks: DEFAULT_BANKS,
            max_cycles: ClusterConfig::default().max_cycles,
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("memory: {0}")]
    Memory(#[from] MemError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub index: usize,
    pub expected: i32,
    pub actual: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelRun {
    pub spec: KernelSpec,
    pub cycles: u64,
    pub retired: u64,
    pub compressed_retired: u64,
    pub outputs: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<Mismatch>,
    pub per_core_cycles: Vec<u64>,
    pub stalls: StallBreakdown,
    pub contention: ContentionStats,
    pub energy: EnergyReport,
    pub class_counts: BTreeMap<Class, u64>,
    pub mnemonic_counts: BTreeMap<String, u64>,
}

impl KernelRun {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }

    pub fn cycles_per_output(&self) -> f64 {
        self.cycles as f64 / self.outputs as f64
    }

    /// Dynamic count of `mnemonic` per output element.
    pub fn per_output(&self, mnemonic: &str) -> f64 {
        *self.mnemonic_counts.get(mnemonic).unwrap_or(&0) as f64 / self.outputs as f64
    }

    pub fn class_count(&self, class: Class) -> u64 {
        *self.class_counts.get(&class).unwrap_or(&0)
    }

    pub fn loads_stores(&self) -> u64 {
        self.class_count(Class::Load) + self.class_count(Class::Store)
    }

    pub fn compressed_ratio(&self) -> f64 {
        if self.retired == 0 {
            0.0
        } else {
            self.compressed_retired as f64 / self.retired as f64
        }
    }

    pub fn energy_pj(&self) -> f64 {
        self.energy.total_pj()
    }
}

/// Memory initialized with the kernel's data image.
pub fn prepare_memory(g: &Generated, settings: &RunSettings) -> Result<MemorySystem, RunError> {
    let mut mem = MemorySystem::new(settings.tcdm_bytes, settings.banks)?;
    if g.footprint > mem.size() {
        return Err(KernelError::Unsupported(format!(
            "kernel needs {} bytes of TCDM, {} available",
            g.footprint,
            mem.size()
        ))
        .into());
    }
    for (addr, bytes) in &g.image {
        mem.write_bytes(*addr, bytes)?;
    }
    Ok(mem)
}

/// Reads the output region back as signed integers.
pub fn read_outputs(g: &Generated, mem: &MemorySystem) -> Result<Vec<i32>, MemError> {
    let o = g.output;
    let bits = 8 * o.elem_bytes as u32;
    (0..o.count)
        .map(|i| {
            let v = mem.read(o.addr + (i * o.elem_bytes) as u32, o.elem_bytes as u32)?;
            Ok(((v << (32 - bits)) as i32) >> (32 - bits))
        })
        .collect()
}

/// Runs `spec` on seeded random data (see [`KernelData::random`]).
pub fn run_kernel(spec: &KernelSpec, settings: &RunSettings) -> Result<KernelRun, RunError> {
    let data = KernelData::random(spec, settings.seed);
    run_kernel_with(spec, &data, settings)
}

pub fn run_kernel_with(
    spec: &KernelSpec,
    data: &KernelData,
    settings: &RunSettings,
) -> Result<KernelRun, RunError> {
    let g = generate(spec, data)?;
    let mem = prepare_memory(&g, settings)?;
    let programs: Vec<_> = g.programs.iter().collect();
    let config = ClusterConfig {
        cores: spec.cores,
        max_cycles: settings.max_cycles,
    };
    let run = run_cluster(&programs, mem, &config, &settings.timing)?;

    let expected = golden(spec, data);
    let actual = read_outputs(&g, &run.memory)?;
    let bad: Vec<usize> = (0..expected.len())
        .filter(|&i| expected[i] != actual[i])
        .collect();

    let mut energy = EnergyReport::default();
    let mut stalls = StallBreakdown::default();
    let mut class_counts = BTreeMap::new();
    let mut mnemonic_counts = BTreeMap::new();
    for (core, program) in run.cores.iter().zip(&g.programs) {
        let mut e = crate::energy::account(&core.trace, &settings.energy)?;
        e.add_idle(core.stalls.barrier, &settings.energy);
        energy = energy + e;
        stalls = stalls + core.stalls;
        if let Some(state) = &core.state {
            for (instr, &n) in program.instrs.iter().zip(&state.exec_counts) {
                if n > 0 {
                    *class_counts.entry(instr.op.class()).or_insert(0) += n;
                    *mnemonic_counts.entry(instr.op.mnemonic()).or_insert(0) += n;
                }
            }
        }
    }
    Ok(KernelRun {
        spec: *spec,
        cycles: run.cycles,
        retired: run.retired(),
        compressed_retired: run.cores.iter().map(|c| c.compressed_retired).sum(),
        outputs: expected.len(),
        mismatches: bad.len(),
        first_mismatch: bad.first().map(|&i| Mismatch {
            index: i,
            expected: expected[i],
            actual: actual[i],
        }),
        per_core_cycles: run.cores.iter().map(|c| c.cycles).collect(),
        stalls,
        contention: run.contention,
        energy,
        class_counts,
        mnemonic_counts,
    })
}
