use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use super::{Program, SourceError, SourceErrorKind as Kind};
use crate::isa::{
    is_compressible, AddrMode, BitField, Form, Instr, LoopSet, Op, Reg, Size, VecMode,
};

const IMM12: RangeInclusive<i64> = -2048..=2047;
const UIMM12: RangeInclusive<i64> = 0..=4095;
const SHAMT: RangeInclusive<i64> = 0..=31;
const UPPER: RangeInclusive<i64> = -(1 << 19)..=(1 << 20) - 1;
const SIMM6: RangeInclusive<i64> = -32..=31;

/// Parses assembly text with instruction addresses starting at 0 (or at a
/// `.text` directive).
pub fn parse(text: &str) -> Result<Program, SourceError> {
    parse_with_base(text, 0)
}

pub fn parse_with_base(text: &str, base: u32) -> Result<Program, SourceError> {
    let mut asm = Assembler {
        base,
        ..Assembler::default()
    };
    for (n, raw) in text.lines().enumerate() {
        asm.line(n + 1, raw)?;
    }
    asm.finish()
}

/// An instruction awaiting label resolution.
struct Pending {
    instr: Instr,
    line: usize,
    label: Option<String>,
    compress: bool,
}

#[derive(Default)]
struct Assembler {
    base: u32,
    pending: Vec<Pending>,
    labels: BTreeMap<String, usize>,
    data: BTreeMap<u32, u8>,
    cursor: Option<u32>,
    nocompress: bool,
    entry: Option<(String, usize)>,
}

impl Assembler {
    fn line(&mut self, line: usize, raw: &str) -> Result<(), SourceError> {
        let mut rest = strip_comment(raw).trim();
        // leading `label:` prefixes
        while let Some(colon) = rest.find(':') {
            let name = rest[..colon].trim();
            if !is_identifier(name) {
                break;
            }
            if self
                .labels
                .insert(name.to_string(), self.pending.len())
                .is_some()
            {
                return Err(SourceError::new(
                    line,
                    Kind::DuplicateLabel,
                    format!("duplicate label `{name}`"),
                ));
            }
            rest = rest[colon + 1..].trim();
        }
        if rest.is_empty() {
            return Ok(());
        }
        let (head, operands) = match rest.find(char::is_whitespace) {
            Some(split) => (&rest[..split], rest[split..].trim()),
            None => (rest, ""),
        };
        let args: Vec<&str> = if operands.is_empty() {
            Vec::new()
        } else {
            operands.split(',').map(str::trim).collect()
        };
        if head.starts_with('.') {
            return self.directive(line, head, operands, &args);
        }
        self.instruction(line, head, &args)
    }

    fn directive(
        &mut self,
        line: usize,
        name: &str,
        operands: &str,
        args: &[&str],
    ) -> Result<(), SourceError> {
        match name {
            ".nocompress" => self.nocompress = true,
            ".compress" => self.nocompress = false,
            ".text" => {
                if !self.pending.is_empty() {
                    return Err(SourceError::new(
                        line,
                        Kind::Syntax,
                        ".text must precede all instructions",
                    ));
                }
                let addr = number(line, operands)?;
                self.base = in_range(line, addr, 0..=u32::MAX as i64 - 1, "text address")? as u32;
                if !self.base.is_multiple_of(2) {
                    return Err(SourceError::new(
                        line,
                        Kind::Syntax,
                        ".text address must be even",
                    ));
                }
            }
            ".entry" => {
                if !is_identifier(operands) {
                    return Err(SourceError::new(
                        line,
                        Kind::Syntax,
                        "`.entry` expects a label",
                    ));
                }
                self.entry = Some((operands.to_string(), line));
            }
            ".data" => {
                // `.data addr [byte ...]`
                let mut words = operands.split_whitespace();
                let addr = words.next().ok_or_else(|| {
                    SourceError::new(line, Kind::Arity, "`.data` expects an address")
                })?;
                let addr = in_range(
                    line,
                    number(line, addr)?,
                    0..=u32::MAX as i64,
                    "data address",
                )?;
                self.cursor = Some(addr as u32);
                for b in words {
                    let b = b.trim_end_matches(',');
                    self.emit(line, number(line, b)?, 1)?;
                }
            }
            ".byte" | ".half" | ".word" => {
                let bytes = match name {
                    ".byte" => 1,
                    ".half" => 2,
                    _ => 4,
                };
                if args.is_empty() {
                    return Err(SourceError::new(
                        line,
                        Kind::Arity,
                        format!("`{name}` expects values"),
                    ));
                }
                for a in args {
                    self.emit(line, number(line, a)?, bytes)?;
                }
            }
            _ => {
                return Err(SourceError::new(
                    line,
                    Kind::Syntax,
                    format!("unknown directive `{name}`"),
                ))
            }
        }
        Ok(())
    }

    fn emit(&mut self, line: usize, value: i64, bytes: u32) -> Result<(), SourceError> {
        let bits = bytes * 8;
        let lo = -(1i64 << (bits - 1));
        let hi = (1i64 << bits) - 1;
        let value = in_range(line, value, lo..=hi, "data value")?;
        let Some(mut addr) = self.cursor else {
            return Err(SourceError::new(
                line,
                Kind::Syntax,
                "data directive before `.data`",
            ));
        };
        for k in 0..bytes {
            self.data.insert(addr, (value >> (8 * k)) as u8);
            addr = addr.checked_add(1).ok_or_else(|| {
                SourceError::new(
                    line,
                    Kind::ImmediateRange,
                    "data runs past the address space",
                )
            })?;
        }
        self.cursor = Some(addr);
        Ok(())
    }

    fn push(&mut self, line: usize, instr: Instr, label: Option<String>) {
        self.pending.push(Pending {
            instr,
            line,
            label,
            compress: !self.nocompress,
        });
    }

    fn instruction(&mut self, line: usize, head: &str, args: &[&str]) -> Result<(), SourceError> {
        // pseudo-instructions
        match head {
            "li" => {
                expect_args(line, head, args, 2)?;
                let rd = reg(line, args[0])?;
                let value = number(line, args[1])?;
                let value = in_range(line, value, i32::MIN as i64..=u32::MAX as i64, "immediate")?
                    as u32 as i32;
                let lo = (value << 20) >> 20;
                let hi = value.wrapping_sub(lo) >> 12;
                if hi != 0 {
                    let mut lui = Instr::new(Op::Lui);
                    lui.rd = Some(rd);
                    lui.imm = Some(hi & 0xFFFFF);
                    self.push(line, lui, None);
                }
                if hi == 0 || lo != 0 {
                    let mut addi = Instr::new(Op::Addi);
                    addi.rd = Some(rd);
                    addi.rs1 = Some(if hi != 0 { rd } else { Reg::ZERO });
                    addi.imm = Some(lo);
                    self.push(line, addi, None);
                }
                return Ok(());
            }
            "j" => {
                expect_args(line, head, args, 1)?;
                let mut jal = Instr::new(Op::Jal);
                jal.rd = Some(Reg::ZERO);
                let label = label_ref(line, args[0])?;
                self.push(line, jal, Some(label));
                return Ok(());
            }
            "beqz" | "bnez" => {
                expect_args(line, head, args, 2)?;
                let mut b = Instr::new(if head == "beqz" { Op::Beq } else { Op::Bne });
                b.rs1 = Some(reg(line, args[0])?);
                b.rs2 = Some(Reg::ZERO);
                let label = label_ref(line, args[1])?;
                self.push(line, b, Some(label));
                return Ok(());
            }
            _ => {}
        }

        let op = Op::from_mnemonic(head).ok_or_else(|| {
            SourceError::new(
                line,
                Kind::UnknownMnemonic,
                format!("unknown mnemonic `{head}`"),
            )
        })?;
        let mut instr = Instr::new(op);
        let mut label = None;
        let form = op.form();
        match form {
            Form::Empty => expect_args(line, head, args, 0)?,
            Form::R2 => {
                expect_args(line, head, args, 2)?;
                instr.rd = Some(reg(line, args[0])?);
                instr.rs1 = Some(reg(line, args[1])?);
            }
            Form::R3 => {
                expect_args(line, head, args, 3)?;
                instr.rd = Some(reg(line, args[0])?);
                instr.rs1 = Some(reg(line, args[1])?);
                instr.rs2 = Some(reg(line, args[2])?);
            }
            Form::R4 => {
                expect_args(line, head, args, 4)?;
                instr.rd = Some(reg(line, args[0])?);
                instr.rs1 = Some(reg(line, args[1])?);
                instr.rs2 = Some(reg(line, args[2])?);
                instr.rs3 = Some(reg(line, args[3])?);
            }
            Form::RegImm => {
                expect_args(line, head, args, 3)?;
                instr.rd = Some(reg(line, args[0])?);
                instr.rs1 = Some(reg(line, args[1])?);
                let range = match op {
                    Op::Slli | Op::Srli | Op::Srai => SHAMT,
                    Op::Vec {
                        mode: VecMode::ScalarImm,
                        ..
                    } => SIMM6,
                    _ => IMM12,
                };
                instr.imm =
                    Some(in_range(line, number(line, args[2])?, range, "immediate")? as i32);
            }
            Form::Upper => {
                expect_args(line, head, args, 2)?;
                instr.rd = Some(reg(line, args[0])?);
                let v = in_range(line, number(line, args[1])?, UPPER, "upper immediate")?;
                instr.imm = Some((v & 0xFFFFF) as i32);
            }
            Form::Branch => {
                expect_args(line, head, args, 3)?;
                instr.rs1 = Some(reg(line, args[0])?);
                instr.rs2 = Some(reg(line, args[1])?);
                label = Some(label_ref(line, args[2])?);
            }
            Form::Jump => {
                expect_args(line, head, args, 2)?;
                instr.rd = Some(reg(line, args[0])?);
                label = Some(label_ref(line, args[1])?);
            }
            Form::JumpReg => {
                expect_args(line, head, args, 2)?;
                instr.rd = Some(reg(line, args[0])?);
                let mem = memory(line, args[1])?;
                if mem.post_inc || matches!(mem.offset, Offset::Reg(_)) {
                    return Err(SourceError::new(
                        line,
                        Kind::Syntax,
                        "jalr expects `imm(rs1)`",
                    ));
                }
                instr.rs1 = Some(mem.base);
                if let Offset::Imm(v) = mem.offset {
                    instr.imm = Some(in_range(line, v, IMM12, "offset")? as i32);
                }
            }
            Form::Load | Form::Store => {
                expect_args(line, head, args, 2)?;
                // destination-first is canonical; the memory operand may
                // also come first, as in `p.lh 0(r10!), r4`.
                let (data, addr) = if args[0].contains('(') {
                    (args[1], args[0])
                } else {
                    (args[0], args[1])
                };
                let data = reg(line, data)?;
                let mem = memory(line, addr)?;
                let mode = match (&mem.offset, mem.post_inc) {
                    (Offset::Imm(_), false) => AddrMode::Offset,
                    (Offset::Imm(_), true) => AddrMode::PostInc,
                    (Offset::Reg(_), false) => AddrMode::RegOffset,
                    (Offset::Reg(_), true) => AddrMode::RegPostInc,
                };
                instr.op = match op {
                    Op::Load {
                        width, unsigned, ..
                    } => Op::Load {
                        width,
                        unsigned,
                        mode,
                    },
                    Op::Store { width, .. } => Op::Store { width, mode },
                    _ => unreachable!(),
                };
                instr.rs1 = Some(mem.base);
                let is_load = form == Form::Load;
                if is_load {
                    instr.rd = Some(data);
                } else {
                    instr.rs2 = Some(data);
                }
                match mem.offset {
                    Offset::Imm(v) => instr.imm = Some(in_range(line, v, IMM12, "offset")? as i32),
                    Offset::Reg(r) if is_load => instr.rs2 = Some(r),
                    Offset::Reg(r) => instr.rs3 = Some(r),
                }
            }
            Form::LoopReg | Form::LoopImm => {
                expect_args(line, head, args, 3)?;
                instr.loop_set = Some(loop_set(line, args[0])?);
                if form == Form::LoopReg {
                    instr.rs1 = Some(reg(line, args[1])?);
                } else {
                    instr.imm =
                        Some(in_range(line, number(line, args[1])?, UIMM12, "loop count")? as i32);
                }
                label = Some(label_ref(line, args[2])?);
            }
            Form::LoopLabel => {
                expect_args(line, head, args, 2)?;
                instr.loop_set = Some(loop_set(line, args[0])?);
                label = Some(label_ref(line, args[1])?);
            }
            Form::LoopCountReg => {
                expect_args(line, head, args, 2)?;
                instr.loop_set = Some(loop_set(line, args[0])?);
                instr.rs1 = Some(reg(line, args[1])?);
            }
            Form::LoopCountImm => {
                expect_args(line, head, args, 2)?;
                instr.loop_set = Some(loop_set(line, args[0])?);
                instr.imm =
                    Some(in_range(line, number(line, args[1])?, UIMM12, "loop count")? as i32);
            }
            Form::R3Shift => {
                expect_args(line, head, args, 4)?;
                instr.rd = Some(reg(line, args[0])?);
                instr.rs1 = Some(reg(line, args[1])?);
                instr.rs2 = Some(reg(line, args[2])?);
                instr.shift = Some(in_range(line, number(line, args[3])?, SHAMT, "shift")? as u8);
            }
            Form::R2Shift => {
                expect_args(line, head, args, 3)?;
                instr.rd = Some(reg(line, args[0])?);
                instr.rs1 = Some(reg(line, args[1])?);
                instr.shift =
                    Some(in_range(line, number(line, args[2])?, 1..=31, "clip width")? as u8);
            }
            Form::Field => {
                expect_args(line, head, args, 4)?;
                instr.rd = Some(reg(line, args[0])?);
                instr.rs1 = Some(reg(line, args[1])?);
                let len = in_range(line, number(line, args[2])?, 1..=32, "field length")?;
                let off = in_range(line, number(line, args[3])?, 0..=31, "field offset")?;
                if len + off > 32 {
                    return Err(SourceError::new(
                        line,
                        Kind::ImmediateRange,
                        format!("field {len}@{off} exceeds 32 bits"),
                    ));
                }
                instr.field = Some(BitField {
                    len: len as u8,
                    off: off as u8,
                });
            }
            Form::Lane => {
                expect_args(line, head, args, 3)?;
                instr.rd = Some(reg(line, args[0])?);
                instr.rs1 = Some(reg(line, args[1])?);
                let lanes = match op {
                    Op::Subword { lanes, .. } => lanes.count() as i64,
                    _ => unreachable!(),
                };
                instr.imm =
                    Some(in_range(line, number(line, args[2])?, 0..=lanes - 1, "lane")? as i32);
            }
        }
        self.push(line, instr, label);
        Ok(())
    }

    fn finish(self) -> Result<Program, SourceError> {
        let count = self.pending.len();
        let mut instrs = Vec::with_capacity(count);
        for (index, p) in self.pending.into_iter().enumerate() {
            let mut instr = p.instr;
            if let Some(name) = &p.label {
                let target = *self.labels.get(name).ok_or_else(|| {
                    SourceError::new(
                        p.line,
                        Kind::UnresolvedLabel,
                        format!("unresolved label `{name}`"),
                    )
                })?;
                if matches!(instr.op, Op::LpSetup | Op::LpSetupi | Op::LpEnd)
                    && (target < index || target >= count)
                {
                    return Err(SourceError::new(
                        p.line,
                        Kind::LoopRange,
                        format!(
                            "hardware loop end `{name}` must name an instruction after the setup"
                        ),
                    ));
                }
                if instr.op == Op::LpStart && target >= count {
                    return Err(SourceError::new(
                        p.line,
                        Kind::LoopRange,
                        format!("hardware loop start `{name}` must name an instruction"),
                    ));
                }
                instr.target = Some(target);
            }
            instr.size = if p.compress && is_compressible(&instr) {
                Size::Compressed
            } else {
                Size::Full
            };
            instrs.push(instr);
        }
        let entry = match self.entry {
            None => 0,
            Some((name, line)) => *self.labels.get(&name).ok_or_else(|| {
                SourceError::new(
                    line,
                    Kind::UnresolvedLabel,
                    format!("unresolved label `{name}`"),
                )
            })?,
        };
        Ok(Program::new(
            instrs,
            self.labels,
            self.data,
            entry,
            self.base,
        ))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '.')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn expect_args(line: usize, head: &str, args: &[&str], n: usize) -> Result<(), SourceError> {
    if args.len() != n {
        return Err(SourceError::new(
            line,
            Kind::Arity,
            format!("`{head}` expects {n} operand(s), found {}", args.len()),
        ));
    }
    if args.iter().any(|a| a.is_empty()) {
        return Err(SourceError::new(line, Kind::Syntax, "empty operand"));
    }
    Ok(())
}

fn label_ref(line: usize, s: &str) -> Result<String, SourceError> {
    if is_identifier(s) {
        Ok(s.to_string())
    } else {
        Err(SourceError::new(
            line,
            Kind::Syntax,
            format!("expected a label, found `{s}`"),
        ))
    }
}

fn in_range(
    line: usize,
    v: i64,
    range: RangeInclusive<i64>,
    what: &str,
) -> Result<i64, SourceError> {
    if range.contains(&v) {
        Ok(v)
    } else {
        Err(SourceError::new(
            line,
            Kind::ImmediateRange,
            format!(
                "{what} {v} out of range {}..={}",
                range.start(),
                range.end()
            ),
        ))
    }
}

pub(crate) fn parse_number(s: &str) -> Option<i64> {
    let s = s.trim();
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let magnitude = if let Some(hex) = digits
        .strip_prefix("0x")
        .or_else(|| digits.strip_prefix("0X"))
    {
        i64::from_str_radix(&hex.replace('_', ""), 16).ok()?
    } else if let Some(bin) = digits
        .strip_prefix("0b")
        .or_else(|| digits.strip_prefix("0B"))
    {
        i64::from_str_radix(&bin.replace('_', ""), 2).ok()?
    } else {
        if !digits.starts_with(|c: char| c.is_ascii_digit()) {
            return None;
        }
        digits.replace('_', "").parse::<i64>().ok()?
    };
    Some(if neg { -magnitude } else { magnitude })
}

fn number(line: usize, s: &str) -> Result<i64, SourceError> {
    parse_number(s).ok_or_else(|| {
        SourceError::new(
            line,
            Kind::Syntax,
            format!("expected a number, found `{s}`"),
        )
    })
}

const ABI_NAMES: [&str; 32] = [
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1", "a0", "a1", "a2", "a3", "a4",
    "a5", "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "t3", "t4",
    "t5", "t6",
];

pub(crate) fn parse_reg(s: &str) -> Option<Reg> {
    let s = s.trim();
    if let Some(n) = s.strip_prefix('x').or_else(|| s.strip_prefix('r')) {
        if !n.is_empty()
            && n.chars().all(|c| c.is_ascii_digit())
            && !(n.len() > 1 && n.starts_with('0'))
        {
            return n.parse::<u8>().ok().and_then(Reg::new);
        }
    }
    if s == "fp" {
        return Reg::new(8);
    }
    ABI_NAMES
        .iter()
        .position(|&name| name == s)
        .and_then(|i| Reg::new(i as u8))
}

fn reg(line: usize, s: &str) -> Result<Reg, SourceError> {
    parse_reg(s).ok_or_else(|| {
        SourceError::new(
            line,
            Kind::BadRegister,
            format!("expected a register, found `{s}`"),
        )
    })
}

fn loop_set(line: usize, s: &str) -> Result<LoopSet, SourceError> {
    match s {
        "L0" | "l0" => Ok(LoopSet::L0),
        "L1" | "l1" => Ok(LoopSet::L1),
        _ => Err(SourceError::new(
            line,
            Kind::Syntax,
            format!("expected loop set `L0` or `L1`, found `{s}`"),
        )),
    }
}

enum Offset {
    Imm(i64),
    Reg(Reg),
}

struct MemOperand {
    offset: Offset,
    base: Reg,
    post_inc: bool,
}

/// `off(base)`, `off(base!)`; `off` is a number, a register, or empty.
fn memory(line: usize, s: &str) -> Result<MemOperand, SourceError> {
    let bad = || {
        SourceError::new(
            line,
            Kind::Syntax,
            format!("malformed memory operand `{s}`"),
        )
    };
    let open = s.find('(').ok_or_else(bad)?;
    let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?.trim();
    let (base, post_inc) = match inner.strip_suffix('!') {
        Some(b) => (b.trim(), true),
        None => (inner, false),
    };
    let base = reg(line, base)?;
    let off = s[..open].trim();
    let offset = if off.is_empty() {
        Offset::Imm(0)
    } else if let Some(r) = parse_reg(off) {
        Offset::Reg(r)
    } else {
        Offset::Imm(number(line, off)?)
    };
    Ok(MemOperand {
        offset,
        base,
        post_inc,
    })
}
