//! Instruction-set simulator and assembler for an RV32IM core with DSP
//! extensions (hardware loops, post-increment memory access, packed SIMD,
//! dot products, fixed-point and bit manipulation), a banked multi-core
//! cluster model, per-class energy accounting and a kernel suite.

pub mod asm;
pub mod cluster;
pub mod energy;
pub mod exec;
pub mod image;
pub mod isa;
pub mod kernels;
pub mod pipeline;
pub mod report;

pub use asm::{parse, print, Program, SourceError, SourceErrorKind};
pub use cluster::{run_cluster, ClusterConfig, ClusterError, ClusterRun, ContentionStats};
pub use energy::{account, EnergyReport, EnergyTable};
pub use exec::{CoreState, MemorySystem, StepEvent, Trap};
pub use isa::{Class, Instr, Op, Reg};
pub use kernels::{Elem, Kernel, KernelSpec, Variant};
pub use pipeline::{run_timed, CycleRecord, StallReason, TimedRun, TimingConfig};
pub use report::{GoldenStatus, RunReport};
