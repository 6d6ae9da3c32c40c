//! Lockstep multi-core simulation over a shared banked TCDM.
//!
//! Each core executes one instruction at a time. An instruction's cycles
//! are laid out as: pre-issue stalls (load-use, fetch refill), the issue
//! cycle carrying the first bank request, one cycle per further request,
//! then the remaining latency (branch, divider, loop). A bank grants one
//! request per cycle, round-robin among the requesting cores; a loser
//! retries on the next cycle.

use serde::Serialize;
use thiserror::Error;

use crate::asm::Program;
use crate::exec::{step, Access, CoreState, MemorySystem, StepEvent, Trap};
use crate::pipeline::{
    time_step, CycleRecord, PipelineState, StallBreakdown, StallReason, StepCost, TimingConfig,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterConfig {
    pub cores: usize,
    /// Cycle budget; exceeding it is reported as a deadlock.
    pub max_cycles: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            cores: 4,
            max_cycles: 200_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("core {core}: {trap}")]
    Trap { core: usize, trap: Trap },
    #[error("deadlock at cycle {cycle}: {reason}")]
    Deadlock { cycle: u64, reason: String },
    #[error("cluster needs at least one core and one program per core")]
    NoCores,
}

/// Bank-conflict counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ContentionStats {
    /// Granted bank requests.
    pub total_accesses: u64,
    /// Requests that lost arbitration at least once.
    pub contended_accesses: u64,
    /// Cycles spent retrying.
    pub stall_cycles: u64,
}

impl ContentionStats {
    pub fn percentage(&self) -> f64 {
        if self.total_accesses == 0 {
            0.0
        } else {
            100.0 * self.contended_accesses as f64 / self.total_accesses as f64
        }
    }

    pub fn merge(&mut self, o: &ContentionStats) {
        self.total_accesses += o.total_accesses;
        self.contended_accesses += o.contended_accesses;
        self.stall_cycles += o.stall_cycles;
    }
}

/// Round-robin arbiter: one pointer per bank.
#[derive(Clone, Debug)]
pub struct Arbiter {
    pointers: Vec<usize>,
    cores: usize,
}

impl Arbiter {
    pub fn new(banks: usize, cores: usize) -> Self {
        Arbiter {
            pointers: vec![0; banks],
            cores,
        }
    }

    /// `requests[c]` is the bank core `c` wants this cycle. Returns which
    /// cores were granted; at most one per bank.
    pub fn arbitrate(&mut self, requests: &[Option<u32>]) -> Vec<bool> {
        let mut granted = vec![false; requests.len()];
        for (bank, ptr) in self.pointers.iter_mut().enumerate() {
            let winner = (0..self.cores)
                .map(|k| (*ptr + k) % self.cores)
                .find(|&c| requests.get(c).copied().flatten() == Some(bank as u32));
            if let Some(w) = winner {
                granted[w] = true;
                *ptr = (w + 1) % self.cores;
            }
        }
        granted
    }
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    /// Ready to start the next instruction.
    Idle,
    Busy {
        pre: u32,
        /// Next bank request to issue (index into the event's accesses).
        next_access: usize,
        post: u32,
        contended: bool,
    },
    /// Waiting for the other cores at the barrier.
    Barrier,
    Done,
}

struct CoreSim<'p> {
    program: &'p Program,
    core: CoreState,
    pipe: PipelineState,
    phase: Phase,
    ev: Option<StepEvent>,
    cost: StepCost,
    record: Option<CycleRecord>,
    finished_at: u64,
    stats: CoreReport,
}

/// Per-core outcome of a cluster run.
#[derive(Clone, Debug, Default)]
pub struct CoreReport {
    pub cycles: u64,
    pub retired: u64,
    pub compressed_retired: u64,
    pub stalls: StallBreakdown,
    pub contention: ContentionStats,
    pub trace: Vec<CycleRecord>,
    pub state: Option<CoreState>,
}

impl CoreReport {
    pub fn ipc(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.retired as f64 / self.cycles as f64
        }
    }
}

/// Result of a cluster run.
#[derive(Clone, Debug)]
pub struct ClusterRun {
    pub cycles: u64,
    pub cores: Vec<CoreReport>,
    pub contention: ContentionStats,
    pub memory: MemorySystem,
}

impl ClusterRun {
    pub fn retired(&self) -> u64 {
        self.cores.iter().map(|c| c.retired).sum()
    }
}

/// Runs one program per core in lockstep on a shared memory. Core `c`
/// starts with `a0 = c` and `a1 = cores`.
pub fn run_cluster(
    programs: &[&Program],
    mem: MemorySystem,
    config: &ClusterConfig,
    timing: &TimingConfig,
) -> Result<ClusterRun, ClusterError> {
    let n = config.cores;
    if n == 0 || programs.len() != n {
        return Err(ClusterError::NoCores);
    }
    let mut mem = mem;
    let mut sims: Vec<CoreSim> = programs
        .iter()
        .enumerate()
        .map(|(c, p)| {
            let mut core = CoreState::new(p);
            core.set_reg(crate::isa::Reg::new(10).unwrap(), c as u32);
            core.set_reg(crate::isa::Reg::new(11).unwrap(), n as u32);
            let halted = core.halted;
            CoreSim {
                program: p,
                core,
                pipe: PipelineState::default(),
                phase: if halted { Phase::Done } else { Phase::Idle },
                ev: None,
                cost: StepCost::default(),
                record: None,
                finished_at: 0,
                stats: CoreReport::default(),
            }
        })
        .collect();
    let mut arbiter = Arbiter::new(mem.banks() as usize, n);
    let mut cycle: u64 = 0;
    let mut requests: Vec<Option<u32>> = vec![None; n];

    loop {
        if sims.iter().all(|s| matches!(s.phase, Phase::Done)) {
            break;
        }
        let waiting = sims
            .iter()
            .filter(|s| matches!(s.phase, Phase::Barrier))
            .count();
        if waiting > 0 {
            let done = sims
                .iter()
                .filter(|s| matches!(s.phase, Phase::Done))
                .count();
            if waiting + done == n {
                if done > 0 {
                    return Err(ClusterError::Deadlock {
                        cycle,
                        reason: format!("{waiting} core(s) wait at a barrier that {done} halted core(s) never reach"),
                    });
                }
                for s in sims.iter_mut() {
                    s.phase = if s.core.halted {
                        s.finished_at = cycle;
                        Phase::Done
                    } else {
                        Phase::Idle
                    };
                }
                continue;
            }
        }
        if cycle >= config.max_cycles {
            return Err(ClusterError::Deadlock {
                cycle,
                reason: format!("cycle budget of {} exhausted", config.max_cycles),
            });
        }

        // Start new instructions.
        for (c, s) in sims.iter_mut().enumerate() {
            if let Phase::Idle = s.phase {
                let ev = step(&mut s.core, s.program, &mut mem)
                    .map_err(|trap| ClusterError::Trap { core: c, trap })?;
                let cost = time_step(&ev, timing, &mut s.pipe);
                s.stats.stalls.add_cost(&cost);
                let mut rec = CycleRecord::new(&ev, cycle, &cost);
                // the second half of an unaligned access always takes a cycle
                let extra_reqs = ev.accesses.len().saturating_sub(1) as u32;
                let unaligned_extra = cost.unaligned.max(extra_reqs);
                rec.unaligned_cycles = unaligned_extra;
                rec.cycles = cost.total() - cost.unaligned + unaligned_extra;
                s.phase = Phase::Busy {
                    pre: cost.load_use + cost.fetch,
                    next_access: 0,
                    post: cost.branch + cost.div + cost.hwloop + unaligned_extra - extra_reqs,
                    contended: false,
                };
                s.ev = Some(ev);
                s.cost = cost;
                s.record = Some(rec);
            }
        }

        // Collect bank requests of cores in their memory phase.
        for (c, s) in sims.iter().enumerate() {
            requests[c] = match (s.phase, &s.ev) {
                (
                    Phase::Busy {
                        pre: 0,
                        next_access,
                        ..
                    },
                    Some(ev),
                ) => ev.accesses.get(next_access).map(|a: &Access| a.bank),
                _ => None,
            };
        }
        let granted = arbiter.arbitrate(&requests);

        // Advance every core by one cycle.
        for (c, s) in sims.iter_mut().enumerate() {
            let Phase::Busy {
                mut pre,
                mut next_access,
                mut post,
                mut contended,
            } = s.phase
            else {
                if let Phase::Barrier = s.phase {
                    s.stats.stalls.barrier += 1;
                }
                continue;
            };
            let ev = s.ev.expect("busy core has an event");
            let n_acc = ev.accesses.len();
            if pre > 0 {
                pre -= 1;
            } else if next_access < n_acc.max(1) {
                if requests[c].is_none() || granted[c] {
                    if requests[c].is_some() {
                        s.stats.contention.total_accesses += 1;
                        if contended {
                            s.stats.contention.contended_accesses += 1;
                        }
                    }
                    contended = false;
                    next_access += 1;
                } else {
                    contended = true;
                    s.stats.contention.stall_cycles += 1;
                    s.stats.stalls.contention += 1;
                    if let Some(r) = s.record.as_mut() {
                        r.cycles += 1;
                        r.contention += 1;
                        if r.stall_reason == StallReason::None {
                            r.stall_reason = StallReason::Contention;
                        }
                    }
                }
            } else {
                post -= 1;
            }
            if pre == 0 && next_access >= n_acc.max(1) && post == 0 {
                let rec = s.record.take().expect("record");
                s.stats.retired += 1;
                s.stats.compressed_retired += rec.compressed as u64;
                s.stats.trace.push(rec);
                s.phase = if ev.barrier {
                    Phase::Barrier
                } else if s.core.halted {
                    s.finished_at = cycle + 1;
                    Phase::Done
                } else {
                    Phase::Idle
                };
            } else {
                s.phase = Phase::Busy {
                    pre,
                    next_access,
                    post,
                    contended,
                };
            }
        }
        cycle += 1;
    }

    let mut contention = ContentionStats::default();
    let cores = sims
        .into_iter()
        .map(|s| {
            let mut r = s.stats;
            r.cycles = s.finished_at;
            r.state = Some(s.core);
            contention.merge(&r.contention);
            r
        })
        .collect::<Vec<_>>();
    let cycles = cores.iter().map(|c| c.cycles).max().unwrap_or(0);
    Ok(ClusterRun {
        cycles,
        cores,
        contention,
        memory: mem,
    })
}
