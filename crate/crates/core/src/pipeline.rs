//! Cycle-approximate timing of a single core.
//!
//! Every instruction costs one cycle plus penalties derived from its
//! [`StepEvent`]: load-use dependence on the previous instruction, taken
//! branches, unaligned data accesses, divider latency, hardware-loop back
//! jumps and prefetch-line refills after a redirect. Sequential fetch is free
//! even across line boundaries, and the instruction cache always hits.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asm::Program;
use crate::exec::{step, CoreState, MemorySystem, StepEvent, Trap};
use crate::isa::{Class, Reg, Size};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

pub(crate) fn read_config_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Pipeline penalties in cycles. Loadable from TOML; missing keys keep
/// their defaults.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    pub taken_branch_penalty: u32,
    pub load_use_penalty: u32,
    pub unaligned_mem_extra: u32,
    pub hwloop_backjump_penalty: u32,
    pub line_bits: u32,
    pub line_refill_penalty: u32,
    /// Divider latency is `div_base + bitlen(|quotient|)` clamped to
    /// `[div_min, div_max]`.
    pub div_base: u32,
    pub div_min: u32,
    pub div_max: u32,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            taken_branch_penalty: 2,
            load_use_penalty: 1,
            unaligned_mem_extra: 1,
            hwloop_backjump_penalty: 0,
            line_bits: 128,
            line_refill_penalty: 1,
            div_base: 2,
            div_min: 2,
            div_max: 32,
        }
    }
}

impl TimingConfig {
    /// All penalties zero: every instruction takes exactly one cycle.
    pub fn zero() -> Self {
        TimingConfig {
            taken_branch_penalty: 0,
            load_use_penalty: 0,
            unaligned_mem_extra: 0,
            hwloop_backjump_penalty: 0,
            line_refill_penalty: 0,
            div_base: 1,
            div_min: 1,
            div_max: 1,
            ..TimingConfig::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: TimingConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&read_config_file(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.line_bits < 32 || !self.line_bits.is_power_of_two() {
            return Err(ConfigError::Invalid(format!(
                "line_bits must be a power of two >= 32, got {}",
                self.line_bits
            )));
        }
        if self.div_min == 0 || self.div_min > self.div_max {
            return Err(ConfigError::Invalid(format!(
                "divider bounds {}..{} are empty or start at 0",
                self.div_min, self.div_max
            )));
        }
        Ok(())
    }

    pub fn div_latency(&self, quotient_magnitude: u32) -> u32 {
        let bits = 32 - quotient_magnitude.leading_zeros();
        (self.div_base + bits).clamp(self.div_min, self.div_max)
    }

    fn line_of(&self, addr: u32) -> u32 {
        addr / (self.line_bits / 8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StallReason {
    None,
    LoadUse,
    Branch,
    Fetch,
    MemUnaligned,
    Div,
    Contention,
}

/// Extra cycles of one instruction by cause.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCost {
    pub load_use: u32,
    pub fetch: u32,
    pub unaligned: u32,
    pub branch: u32,
    pub div: u32,
    pub hwloop: u32,
}

impl StepCost {
    pub fn stalls(&self) -> u32 {
        self.load_use + self.fetch + self.unaligned + self.branch + self.div + self.hwloop
    }

    pub fn total(&self) -> u32 {
        1 + self.stalls()
    }

    /// The cause contributing the most cycles (first listed wins ties).
    pub fn reason(&self) -> StallReason {
        [
            (self.load_use, StallReason::LoadUse),
            (self.branch + self.hwloop, StallReason::Branch),
            (self.fetch, StallReason::Fetch),
            (self.unaligned, StallReason::MemUnaligned),
            (self.div, StallReason::Div),
        ]
        .into_iter()
        .filter(|(c, _)| *c > 0)
        .fold((0, StallReason::None), |best, cur| {
            if cur.0 > best.0 {
                cur
            } else {
                best
            }
        })
        .1
    }
}

/// Per-core pipeline bookkeeping between instructions.
#[derive(Clone, Debug, Default)]
pub struct PipelineState {
    prev_load_dst: Option<Reg>,
}

/// Penalties of `ev` given the preceding instruction.
pub fn time_step(ev: &StepEvent, cfg: &TimingConfig, state: &mut PipelineState) -> StepCost {
    let mut cost = StepCost::default();
    if let Some(r) = state.prev_load_dst {
        if ev.reads & (1 << r.index()) != 0 {
            cost.load_use = cfg.load_use_penalty;
        }
    }
    state.prev_load_dst = ev.load_dst;
    if ev.unaligned {
        cost.unaligned = cfg.unaligned_mem_extra;
    }
    if ev.redirect {
        cost.branch = cfg.taken_branch_penalty;
    }
    if ev.hwloop_backjump {
        cost.hwloop = cfg.hwloop_backjump_penalty;
    }
    if let Some(q) = ev.div_quotient {
        cost.div = cfg.div_latency(q) - 1;
    }
    if ev.redirect || ev.hwloop_backjump {
        let last_byte = ev.pc + ev.size.bytes() - 1;
        if cfg.line_of(ev.next_pc) != cfg.line_of(last_byte) {
            cost.fetch = cfg.line_refill_penalty;
        }
    }
    cost
}

/// Timing record of one retired instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleRecord {
    pub index: usize,
    pub issue_cycle: u64,
    pub cycles: u32,
    pub stall_reason: StallReason,
    pub class: Class,
    pub compressed: bool,
    pub sram_accesses: u8,
    pub scm_accesses: u8,
    pub unaligned: bool,
    /// Cycles lost to lost bank arbitration (cluster runs only).
    pub contention: u32,
    /// Extra cycles spent on the second half of an unaligned access.
    pub unaligned_cycles: u32,
}

impl CycleRecord {
    pub fn new(ev: &StepEvent, issue_cycle: u64, cost: &StepCost) -> Self {
        let scm = ev.accesses.iter().filter(|a| a.scm).count() as u8;
        CycleRecord {
            index: ev.index,
            issue_cycle,
            cycles: cost.total(),
            stall_reason: cost.reason(),
            class: ev.class,
            compressed: ev.size == Size::Compressed,
            sram_accesses: ev.accesses.len() as u8 - scm,
            scm_accesses: scm,
            unaligned: ev.unaligned,
            contention: 0,
            unaligned_cycles: cost.unaligned,
        }
    }

    /// Stall cycles during which the core idles (the second half of an
    /// unaligned access does useful work and is not counted).
    pub fn idle_cycles(&self) -> u32 {
        self.cycles - 1 - self.unaligned_cycles
    }
}

/// Stall cycles by cause.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StallBreakdown {
    pub load_use: u64,
    pub branch: u64,
    pub fetch: u64,
    pub mem_unaligned: u64,
    pub div: u64,
    pub contention: u64,
    pub barrier: u64,
}

impl StallBreakdown {
    pub fn add_cost(&mut self, c: &StepCost) {
        self.load_use += c.load_use as u64;
        self.branch += (c.branch + c.hwloop) as u64;
        self.fetch += c.fetch as u64;
        self.mem_unaligned += c.unaligned as u64;
        self.div += c.div as u64;
    }

    pub fn total(&self) -> u64 {
        self.load_use
            + self.branch
            + self.fetch
            + self.mem_unaligned
            + self.div
            + self.contention
            + self.barrier
    }
}

impl std::ops::Add for StallBreakdown {
    type Output = StallBreakdown;

    fn add(self, o: StallBreakdown) -> StallBreakdown {
        StallBreakdown {
            load_use: self.load_use + o.load_use,
            branch: self.branch + o.branch,
            fetch: self.fetch + o.fetch,
            mem_unaligned: self.mem_unaligned + o.mem_unaligned,
            div: self.div + o.div,
            contention: self.contention + o.contention,
            barrier: self.barrier + o.barrier,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    Halted,
    Trapped(Trap),
    BudgetExceeded,
}

/// Result of a timed single-core run.
#[derive(Clone, Debug)]
pub struct TimedRun {
    pub trace: Vec<CycleRecord>,
    pub cycles: u64,
    pub retired: u64,
    pub compressed_retired: u64,
    pub stalls: StallBreakdown,
    pub termination: Termination,
}

impl TimedRun {
    pub fn ipc(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.retired as f64 / self.cycles as f64
        }
    }

    pub fn compressed_ratio(&self) -> f64 {
        if self.retired == 0 {
            0.0
        } else {
            self.compressed_retired as f64 / self.retired as f64
        }
    }
}

/// Runs `core` to halt, trap, or `budget` retired instructions.
pub fn run_timed(
    program: &Program,
    core: &mut CoreState,
    mem: &mut MemorySystem,
    cfg: &TimingConfig,
    budget: u64,
) -> TimedRun {
    let mut pipe = PipelineState::default();
    let mut run = TimedRun {
        trace: Vec::new(),
        cycles: 0,
        retired: 0,
        compressed_retired: 0,
        stalls: StallBreakdown::default(),
        termination: Termination::Halted,
    };
    while !core.halted {
        if run.retired >= budget {
            run.termination = Termination::BudgetExceeded;
            break;
        }
        let ev = match step(core, program, mem) {
            Ok(ev) => ev,
            Err(t) => {
                run.termination = Termination::Trapped(t);
                break;
            }
        };
        let cost = time_step(&ev, cfg, &mut pipe);
        let rec = CycleRecord::new(&ev, run.cycles, &cost);
        run.cycles += rec.cycles as u64;
        run.retired += 1;
        run.compressed_retired += rec.compressed as u64;
        run.stalls.add_cost(&cost);
        run.trace.push(rec);
    }
    run
}
