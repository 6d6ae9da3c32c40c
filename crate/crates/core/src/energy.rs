//! Per-event energy accounting.
//!
//! Energies are kept in integer femtojoules so that sums are exact and
//! accounting is additive over trace concatenation.

use std::collections::BTreeMap;
use std::ops::Add;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isa::Class;
use crate::pipeline::{read_config_file, ConfigError, CycleRecord};

pub type Femtojoules = u64;

fn pj_to_fj(pj: f64) -> Femtojoules {
    (pj * 1000.0).round() as Femtojoules
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnergyError {
    #[error("energy table has no entry for class `{0}`")]
    MissingClass(Class),
}

/// Energy per retired instruction by class, plus memory and idle adders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyTable {
    pub per_class: BTreeMap<Class, Femtojoules>,
    pub sram_access: Femtojoules,
    pub scm_access: Femtojoules,
    /// Added once per unaligned access, on top of its two bank accesses.
    pub unaligned_access: Femtojoules,
    pub idle_per_cycle: Femtojoules,
}

impl Default for EnergyTable {
    fn default() -> Self {
        let pj = [
            (Class::Nop, 20.0),
            (Class::Alu, 30.0),
            (Class::Shuffle, 50.0),
            (Class::Mul, 38.0),
            (Class::Mac, 42.0),
            (Class::Dotp, 45.0),
            (Class::Load, 40.0),
            (Class::Store, 40.0),
            (Class::Branch, 32.0),
            (Class::Jump, 32.0),
            (Class::Div, 35.0),
            (Class::HwloopSetup, 30.0),
            (Class::Csr, 30.0),
        ];
        let sram = 25.0;
        EnergyTable {
            per_class: pj.into_iter().map(|(c, e)| (c, pj_to_fj(e))).collect(),
            sram_access: pj_to_fj(sram),
            scm_access: pj_to_fj(0.54 * sram),
            unaligned_access: pj_to_fj(10.0),
            idle_per_cycle: pj_to_fj(15.0),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    class: BTreeMap<String, f64>,
    memory: MemoryFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MemoryFile {
    sram_access: f64,
    scm_access: f64,
    unaligned_access: f64,
    idle_per_cycle: f64,
}

impl EnergyTable {
    /// Parses a table with values in pJ:
    ///
    /// ```toml
    /// [class]
    /// alu = 30.0
    /// # ...
    /// [memory]
    /// sram_access = 25.0
    /// scm_access = 13.5
    /// unaligned_access = 10.0
    /// idle_per_cycle = 15.0
    /// ```
    ///
    /// Classes may be omitted here; [`account`] then fails for traces that
    /// use them.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let f: TableFile = toml::from_str(text)?;
        let check = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(pj_to_fj(v))
            } else {
                Err(ConfigError::Invalid(format!(
                    "`{name}` must be a non-negative number"
                )))
            }
        };
        let mut per_class = BTreeMap::new();
        for (name, v) in &f.class {
            let class: Class = name.parse().map_err(ConfigError::Invalid)?;
            per_class.insert(class, check(name, *v)?);
        }
        Ok(EnergyTable {
            per_class,
            sram_access: check("sram_access", f.memory.sram_access)?,
            scm_access: check("scm_access", f.memory.scm_access)?,
            unaligned_access: check("unaligned_access", f.memory.unaligned_access)?,
            idle_per_cycle: check("idle_per_cycle", f.memory.idle_per_cycle)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&read_config_file(path)?)
    }

    pub fn class_energy(&self, class: Class) -> Result<Femtojoules, EnergyError> {
        self.per_class
            .get(&class)
            .copied()
            .ok_or(EnergyError::MissingClass(class))
    }
}

/// Energy of a trace, broken down by source.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EnergyReport {
    pub total_fj: Femtojoules,
    pub by_class_fj: BTreeMap<Class, Femtojoules>,
    pub memory_fj: Femtojoules,
    pub idle_fj: Femtojoules,
}

impl EnergyReport {
    pub fn total_pj(&self) -> f64 {
        self.total_fj as f64 / 1000.0
    }

    /// Adds `cycles` idle cycles (e.g. waiting at a barrier).
    pub fn add_idle(&mut self, cycles: u64, table: &EnergyTable) {
        let e = cycles * table.idle_per_cycle;
        self.idle_fj += e;
        self.total_fj += e;
    }

    /// Accounts one retired instruction.
    pub fn add_record(&mut self, r: &CycleRecord, table: &EnergyTable) -> Result<(), EnergyError> {
        let base = table.class_energy(r.class)?;
        *self.by_class_fj.entry(r.class).or_default() += base;
        let mut memory =
            r.sram_accesses as u64 * table.sram_access + r.scm_accesses as u64 * table.scm_access;
        if r.unaligned {
            memory += table.unaligned_access;
        }
        let idle = r.idle_cycles() as u64 * table.idle_per_cycle;
        self.memory_fj += memory;
        self.idle_fj += idle;
        self.total_fj += base + memory + idle;
        Ok(())
    }
}

impl Add for EnergyReport {
    type Output = EnergyReport;

    fn add(mut self, o: EnergyReport) -> EnergyReport {
        for (c, e) in o.by_class_fj {
            *self.by_class_fj.entry(c).or_default() += e;
        }
        self.total_fj += o.total_fj;
        self.memory_fj += o.memory_fj;
        self.idle_fj += o.idle_fj;
        self
    }
}

/// Total = per-class energy + bank access adders + idle energy of stall
/// cycles.
pub fn account(trace: &[CycleRecord], table: &EnergyTable) -> Result<EnergyReport, EnergyError> {
    let mut r = EnergyReport::default();
    for rec in trace {
        r.add_record(rec, table)?;
    }
    Ok(r)
}
