use crate::asm::Program;
use crate::isa::{LoopSet, Reg};

/// One hardware-loop register set. The end address is inclusive: it is
/// the address of the last instruction of the body.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HwLoop {
    pub start: u32,
    pub end: u32,
    pub count: u32,
}

impl HwLoop {
    pub fn is_active(&self) -> bool {
        self.count > 0
    }
}

/// Architectural state of one core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreState {
    regs: [u32; 32],
    pub pc: u32,
    pub hwloops: [HwLoop; 2],
    pub halted: bool,
    pub retired: u64,
    /// Execution count per instruction index.
    pub exec_counts: Vec<u64>,
}

impl CoreState {
    pub fn new(program: &Program) -> CoreState {
        CoreState {
            regs: [0; 32],
            pc: program.entry_address(),
            hwloops: [HwLoop::default(); 2],
            halted: program.entry >= program.len(),
            retired: 0,
            exec_counts: vec![0; program.len()],
        }
    }

    pub fn reg(&self, r: Reg) -> u32 {
        self.regs[r.index()]
    }

    /// Writes to `x0` are discarded.
    pub fn set_reg(&mut self, r: Reg, value: u32) {
        if r.index() != 0 {
            self.regs[r.index()] = value;
        }
    }

    pub fn regs(&self) -> &[u32; 32] {
        &self.regs
    }

    pub fn hwloop(&self, set: LoopSet) -> &HwLoop {
        &self.hwloops[set.index()]
    }
}
