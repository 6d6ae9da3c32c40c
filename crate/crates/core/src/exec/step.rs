use std::fmt;

use thiserror::Error;

use super::bits::{exec_bitmanip, exec_div, quotient_magnitude, DivOp};
use super::fixpoint::exec_fixpoint;
use super::lanes::{exec_dotp, exec_subword, exec_vector_alu, replicate};
use super::mem::{crosses_word, Accesses, MemError, MemorySystem, BARRIER_ADDR};
use super::state::CoreState;
use crate::asm::Program;
use crate::isa::{AddrMode, BitField, Class, Instr, LoopSet, Op, Reg, Size, VecMode, Width};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrapKind {
    /// Data access outside the TCDM.
    Memory(MemError),
    /// The pc does not name an instruction of the program.
    InvalidPc,
    /// Step called on a halted core.
    Halted,
    /// Hardware loop set up with a zero iteration count.
    HwLoopZeroCount(LoopSet),
    /// Hardware loop set up while the same set is still active.
    HwLoopOverlap(LoopSet),
}

impl fmt::Display for TrapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrapKind::Memory(e) => write!(f, "{e}"),
            TrapKind::InvalidPc => f.write_str("pc does not address an instruction"),
            TrapKind::Halted => f.write_str("core is halted"),
            TrapKind::HwLoopZeroCount(l) => write!(f, "hardware loop {l} set up with count 0"),
            TrapKind::HwLoopOverlap(l) => write!(f, "hardware loop {l} is already active"),
        }
    }
}

/// A fault that halts the core.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("trap at pc {pc:#x}: {kind}")]
pub struct Trap {
    pub pc: u32,
    pub kind: TrapKind,
}

/// Architectural side effects of one retired instruction, consumed by the
/// timing, cluster and energy models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepEvent {
    pub index: usize,
    pub pc: u32,
    pub next_pc: u32,
    pub class: Class,
    pub size: Size,
    /// Bitmask of source registers (x0 excluded).
    pub reads: u32,
    /// Register written with load data, if any.
    pub load_dst: Option<Reg>,
    /// Effective byte address of a load/store.
    pub ea: Option<u32>,
    pub accesses: Accesses,
    /// The access spans two words.
    pub unaligned: bool,
    /// Taken branch or jump.
    pub redirect: bool,
    pub hwloop_backjump: bool,
    /// Quotient magnitude of a div/rem, for the divider latency.
    pub div_quotient: Option<u32>,
    /// Store to the barrier cell.
    pub barrier: bool,
}

fn sext(v: u32, bits: u32) -> u32 {
    let s = 32 - bits;
    (((v << s) as i32) >> s) as u32
}

/// Executes the instruction at `core.pc`.
///
/// Running past the last instruction halts the core. On a trap the core
/// is halted and its state reflects every instruction before the faulting
/// one.
pub fn step(
    core: &mut CoreState,
    program: &Program,
    mem: &mut MemorySystem,
) -> Result<StepEvent, Trap> {
    let pc = core.pc;
    let trap = |kind| Trap { pc, kind };
    if core.halted {
        return Err(trap(TrapKind::Halted));
    }
    let Some(index) = program.index_of(pc) else {
        core.halted = true;
        return Err(trap(TrapKind::InvalidPc));
    };
    let instr = &program.instrs[index];
    let fallthrough = pc.wrapping_add(instr.size.bytes());
    let mut ev = StepEvent {
        index,
        pc,
        next_pc: fallthrough,
        class: instr.class(),
        size: instr.size,
        reads: instr.reads(),
        load_dst: None,
        ea: None,
        accesses: Accesses::default(),
        unaligned: false,
        redirect: false,
        hwloop_backjump: false,
        div_quotient: None,
        barrier: false,
    };
    if let Err(kind) = execute(core, program, mem, instr, &mut ev) {
        core.halted = true;
        return Err(trap(kind));
    }
    if !ev.redirect {
        ev.next_pc = hwloop_next(core, pc, fallthrough, &mut ev.hwloop_backjump);
    }
    core.pc = ev.next_pc;
    core.retired += 1;
    core.exec_counts[index] += 1;
    if ev.next_pc == program.end_address() {
        core.halted = true;
    }
    Ok(ev)
}

/// Hardware-loop redirection after a non-branching instruction at `pc`.
/// L0 is checked before L1; a set whose count runs out falls through to
/// the next set.
fn hwloop_next(core: &mut CoreState, pc: u32, fallthrough: u32, backjump: &mut bool) -> u32 {
    for l in core.hwloops.iter_mut() {
        if l.count > 0 && l.end == pc {
            if l.count > 1 {
                l.count -= 1;
                *backjump = true;
                return l.start;
            }
            l.count = 0;
        }
    }
    fallthrough
}

fn execute(
    core: &mut CoreState,
    program: &Program,
    mem: &mut MemorySystem,
    instr: &Instr,
    ev: &mut StepEvent,
) -> Result<(), TrapKind> {
    let rd = instr.dst();
    let a = core.reg(instr.src1());
    let b = core.reg(instr.src2());
    let c = core.reg(instr.src3());
    let old = core.reg(rd);
    let imm = instr.imm() as u32;
    let shamt = imm & 31;
    let shift = instr.shift.unwrap_or(0);
    let target_addr = || program.address_of(instr.target.expect("resolved target"));
    let branch = |cond: bool, ev: &mut StepEvent| {
        if cond {
            ev.redirect = true;
            ev.next_pc = target_addr();
        }
    };

    let value: Option<u32> = match instr.op {
        Op::Nop => None,
        Op::Mv => Some(a),
        Op::Add => Some(a.wrapping_add(b)),
        Op::Addi => Some(a.wrapping_add(imm)),
        Op::Sub => Some(a.wrapping_sub(b)),
        Op::And => Some(a & b),
        Op::Andi => Some(a & imm),
        Op::Or => Some(a | b),
        Op::Ori => Some(a | imm),
        Op::Xor => Some(a ^ b),
        Op::Xori => Some(a ^ imm),
        Op::Sll => Some(a << (b & 31)),
        Op::Slli => Some(a << shamt),
        Op::Srl => Some(a >> (b & 31)),
        Op::Srli => Some(a >> shamt),
        Op::Sra => Some(((a as i32) >> (b & 31)) as u32),
        Op::Srai => Some(((a as i32) >> shamt) as u32),
        Op::Slt => Some(((a as i32) < (b as i32)) as u32),
        Op::Slti => Some(((a as i32) < (imm as i32)) as u32),
        Op::Sltu => Some((a < b) as u32),
        Op::Lui => Some(imm << 12),
        Op::Auipc => Some(ev.pc.wrapping_add(imm << 12)),
        Op::Mul => Some(a.wrapping_mul(b)),
        Op::Mulh => Some(((a as i32 as i64 * b as i32 as i64) >> 32) as u32),
        Op::Mulhu => Some(((a as u64 * b as u64) >> 32) as u32),
        Op::Div | Op::Divu | Op::Rem | Op::Remu => {
            let d = match instr.op {
                Op::Div => DivOp::Div,
                Op::Divu => DivOp::Divu,
                Op::Rem => DivOp::Rem,
                _ => DivOp::Remu,
            };
            ev.div_quotient = Some(quotient_magnitude(d, a, b));
            Some(exec_div(d, a, b))
        }
        Op::Beq => {
            branch(a == b, ev);
            None
        }
        Op::Bne => {
            branch(a != b, ev);
            None
        }
        Op::Blt => {
            branch((a as i32) < (b as i32), ev);
            None
        }
        Op::Bge => {
            branch((a as i32) >= (b as i32), ev);
            None
        }
        Op::Bltu => {
            branch(a < b, ev);
            None
        }
        Op::Bgeu => {
            branch(a >= b, ev);
            None
        }
        Op::Jal => {
            branch(true, ev);
            Some(ev.pc.wrapping_add(instr.size.bytes()))
        }
        Op::Jalr => {
            ev.redirect = true;
            ev.next_pc = a.wrapping_add(imm) & !1;
            Some(ev.pc.wrapping_add(instr.size.bytes()))
        }
        Op::Load {
            width,
            unsigned,
            mode,
        } => {
            let (ea, new_base) = address(mode, a, imm, b);
            let data = access(mem, ev, ea, width, None)?;
            let data = match (width, unsigned) {
                (Width::Word, _) | (_, true) => data,
                (Width::Half, false) => sext(data, 16),
                (Width::Byte, false) => sext(data, 8),
            };
            if let Some(nb) = new_base {
                core.set_reg(instr.src1(), nb);
            }
            ev.load_dst = (rd.index() != 0).then_some(rd);
            Some(data)
        }
        Op::Store { width, mode } => {
            let (ea, new_base) = address(mode, a, imm, c);
            access(mem, ev, ea, width, Some(b))?;
            if let Some(nb) = new_base {
                core.set_reg(instr.src1(), nb);
            }
            None
        }
        Op::LpSetup | Op::LpSetupi => {
            let set = instr.loop_set.unwrap_or(LoopSet::L0);
            let count = if instr.op == Op::LpSetup { a } else { imm };
            if count == 0 {
                return Err(TrapKind::HwLoopZeroCount(set));
            }
            let l = &mut core.hwloops[set.index()];
            if l.is_active() {
                return Err(TrapKind::HwLoopOverlap(set));
            }
            l.start = ev.pc.wrapping_add(instr.size.bytes());
            l.end = target_addr();
            l.count = count;
            None
        }
        Op::LpStart => {
            core.hwloops[instr.loop_set.unwrap_or(LoopSet::L0).index()].start = target_addr();
            None
        }
        Op::LpEnd => {
            core.hwloops[instr.loop_set.unwrap_or(LoopSet::L0).index()].end = target_addr();
            None
        }
        Op::LpCount | Op::LpCounti => {
            let count = if instr.op == Op::LpCount { a } else { imm };
            core.hwloops[instr.loop_set.unwrap_or(LoopSet::L0).index()].count = count;
            None
        }
        Op::Fix(f) => Some(exec_fixpoint(f, a, b, old, shift)),
        Op::Bit(bop) => {
            let field = instr.field.unwrap_or(BitField { len: 1, off: 0 });
            Some(exec_bitmanip(bop, a, old, field))
        }
        Op::Vec { op, mode, lanes } => {
            let rhs = match mode {
                VecMode::Vector => b,
                VecMode::Scalar => replicate(b, lanes),
                VecMode::ScalarImm => replicate(imm, lanes),
            };
            Some(exec_vector_alu(op, lanes, a, rhs))
        }
        Op::Dotp {
            lanes,
            unsigned,
            accumulate,
            scalar,
        } => {
            let rhs = if scalar { replicate(b, lanes) } else { b };
            let acc = if accumulate { old } else { 0 };
            Some(exec_dotp(lanes, unsigned, a, rhs, acc))
        }
        Op::Subword { op, lanes } => Some(exec_subword(op, lanes, a, b, c, old, imm as usize)),
    };
    if let Some(v) = value {
        core.set_reg(rd, v);
    }
    Ok(())
}

/// Effective address and, for post-increment modes, the updated base.
fn address(mode: AddrMode, base: u32, imm: u32, offset_reg: u32) -> (u32, Option<u32>) {
    match mode {
        AddrMode::Offset => (base.wrapping_add(imm), None),
        AddrMode::PostInc => (base, Some(base.wrapping_add(imm))),
        AddrMode::RegOffset => (base.wrapping_add(offset_reg), None),
        AddrMode::RegPostInc => (base, Some(base.wrapping_add(offset_reg))),
    }
}

/// Performs a load (`store == None`) or store and records bank requests.
fn access(
    mem: &mut MemorySystem,
    ev: &mut StepEvent,
    ea: u32,
    width: Width,
    store: Option<u32>,
) -> Result<u32, TrapKind> {
    ev.ea = Some(ea);
    let w = width.bytes();
    if ea == BARRIER_ADDR {
        ev.barrier = store.is_some();
        return Ok(0);
    }
    let result = match store {
        Some(v) => mem.write(ea, w, v).map(|_| 0),
        None => mem.read(ea, w),
    };
    let value = result.map_err(TrapKind::Memory)?;
    ev.unaligned = crosses_word(ea, w);
    ev.accesses = mem.accesses_for(ea, w, store.is_some());
    Ok(value)
}

/// Result of running a core without timing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Halted,
    Trapped(Trap),
    BudgetExceeded,
}

/// Runs `core` to halt (or `budget` instructions) with no timing model.
pub fn run_functional(
    core: &mut CoreState,
    program: &Program,
    mem: &mut MemorySystem,
    budget: u64,
) -> RunOutcome {
    while !core.halted {
        if core.retired >= budget {
            return RunOutcome::BudgetExceeded;
        }
        if let Err(t) = step(core, program, mem) {
            return RunOutcome::Trapped(t);
        }
    }
    RunOutcome::Halted
}
