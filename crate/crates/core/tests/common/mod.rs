#![allow(dead_code)]

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xdsp::exec::{step, MemorySystem};
use xdsp::{parse, CoreState, Program, Reg};

pub const CASES: usize = 100_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn r(i: u8) -> Reg {
    Reg::new(i).unwrap()
}

/// Executes single-instruction programs through the assembler and `step`,
/// caching each distinct source line.
pub struct OneShot {
    programs: HashMap<String, Program>,
    mem: MemorySystem,
}

impl OneShot {
    pub fn new() -> Self {
        OneShot {
            programs: HashMap::new(),
            mem: MemorySystem::new(4096, 8).unwrap(),
        }
    }

    /// Runs `src` with the given initial registers and returns the final state.
    pub fn run(&mut self, src: &str, regs: &[(u8, u32)]) -> CoreState {
        let p = self
            .programs
            .entry(src.to_string())
            .or_insert_with(|| parse(src).unwrap_or_else(|e| panic!("{src}: {e}")));
        let mut core = CoreState::new(p);
        for &(i, v) in regs {
            core.set_reg(r(i), v);
        }
        step(&mut core, p, &mut self.mem).unwrap_or_else(|t| panic!("{src}: {t}"));
        core
    }

    /// Value of x5 after running `src` with x5..x8 preset.
    pub fn rd(&mut self, src: &str, rd_old: u32, a: u32, b: u32, c: u32) -> u32 {
        self.run(src, &[(5, rd_old), (6, a), (7, b), (8, c)])
            .reg(r(5))
    }
}

/// Runs a whole program functionally; panics on trap or runaway.
pub fn run_program(p: &Program, mem: &mut MemorySystem, regs: &[(u8, u32)]) -> CoreState {
    let mut core = CoreState::new(p);
    for &(i, v) in regs {
        core.set_reg(r(i), v);
    }
    match xdsp::exec::run_functional(&mut core, p, mem, 10_000_000) {
        xdsp::exec::RunOutcome::Halted => core,
        other => panic!("program did not halt: {other:?}"),
    }
}
