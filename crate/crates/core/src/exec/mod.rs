//! Functional semantics: one [`step`] applies one instruction's
//! architectural effect to a [`CoreState`] and [`MemorySystem`]. No timing.

mod bits;
mod fixpoint;
mod lanes;
mod mem;
mod state;
mod step;

pub use bits::{exec_bitmanip, exec_div, quotient_magnitude, DivOp};
pub use fixpoint::{clip_bounds, exec_fixpoint, round_term};
pub use lanes::{
    exec_dotp, exec_shuffle, exec_subword, exec_vector_alu, replicate, shuffle_mask,
    shuffle_selector, LaneVector,
};
pub use mem::{
    crosses_word, Access, Accesses, MemError, MemorySystem, BARRIER_ADDR, DEFAULT_BANKS,
    DEFAULT_TCDM_BYTES,
};
pub use state::{CoreState, HwLoop};
pub use step::{run_functional, step, RunOutcome, StepEvent, Trap, TrapKind};
