//! Machine-readable run report. `docs/report.schema.json` describes the
//! JSON form.

use serde::Serialize;

use crate::cluster::{ClusterRun, ContentionStats};
use crate::energy::{account, EnergyError, EnergyReport, EnergyTable};
use crate::pipeline::StallBreakdown;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldenStatus {
    NotChecked,
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoreSection {
    pub core: usize,
    pub cycles: u64,
    pub retired: u64,
    pub ipc: f64,
    pub compressed_ratio: f64,
    pub stalls: StallBreakdown,
    pub contention: ContentionStats,
    pub energy: EnergyReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub cores: usize,
    pub cycles: u64,
    pub retired: u64,
    /// `retired / cycles` over the whole cluster.
    pub ipc: f64,
    pub compressed_ratio: f64,
    pub stalls: StallBreakdown,
    pub contention: ContentionStats,
    pub energy: EnergyReport,
    pub per_core: Vec<CoreSection>,
    pub golden: GoldenStatus,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl RunReport {
    pub fn from_cluster(run: &ClusterRun, table: &EnergyTable) -> Result<RunReport, EnergyError> {
        let mut per_core = Vec::with_capacity(run.cores.len());
        let mut energy = EnergyReport::default();
        let mut stalls = StallBreakdown::default();
        let mut compressed = 0;
        for (i, c) in run.cores.iter().enumerate() {
            let mut e = account(&c.trace, table)?;
            e.add_idle(c.stalls.barrier, table);
            energy = energy + e.clone();
            stalls = stalls + c.stalls;
            compressed += c.compressed_retired;
            per_core.push(CoreSection {
                core: i,
                cycles: c.cycles,
                retired: c.retired,
                ipc: ratio(c.retired, c.cycles),
                compressed_ratio: ratio(c.compressed_retired, c.retired),
                stalls: c.stalls,
                contention: c.contention,
                energy: e,
            });
        }
        let retired = run.retired();
        Ok(RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            cores: run.cores.len(),
            cycles: run.cycles,
            retired,
            ipc: ratio(retired, run.cycles),
            compressed_ratio: ratio(compressed, retired),
            stalls,
            contention: run.contention,
            energy,
            per_core,
            golden: GoldenStatus::NotChecked,
        })
    }
}
