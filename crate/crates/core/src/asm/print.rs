use std::collections::BTreeMap;
use std::fmt::Write;

use super::Program;
use crate::isa::{is_compressible, AddrMode, Form, Instr, Op, Size};

/// Canonical text for `program`; `parse(&print(p))` reproduces `p`.
///
/// Targets without a label get a synthesized `.L<index>` label.
pub fn print(program: &Program) -> String {
    let mut names: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (name, &index) in &program.labels {
        names.entry(index).or_default().push(name);
    }
    let synthesized: BTreeMap<usize, String> = program
        .instrs
        .iter()
        .filter_map(|i| i.target)
        .filter(|t| !names.contains_key(t))
        .map(|t| (t, format!(".L{t}")))
        .collect();
    let target_name = |index: usize| -> String {
        names
            .get(&index)
            .map(|v| v[0].to_string())
            .unwrap_or_else(|| synthesized[&index].clone())
    };

    let mut out = String::new();
    if program.base != 0 {
        let _ = writeln!(out, ".text {:#x}", program.base);
    }
    if program.entry != 0 {
        let _ = writeln!(out, ".entry {}", target_name(program.entry));
    }
    let mut compressing = true;
    for index in 0..=program.instrs.len() {
        for name in names.get(&index).into_iter().flatten() {
            let _ = writeln!(out, "{name}:");
        }
        if let Some(name) = synthesized.get(&index) {
            if !names.contains_key(&index) {
                let _ = writeln!(out, "{name}:");
            }
        }
        let Some(instr) = program.instrs.get(index) else {
            break;
        };
        let wants_full = instr.size == Size::Full && is_compressible(instr);
        if wants_full && compressing {
            out.push_str(".nocompress\n");
            compressing = false;
        } else if !compressing && instr.size == Size::Compressed {
            out.push_str(".compress\n");
            compressing = true;
        }
        out.push_str(&format_instr(instr, &target_name));
        out.push('\n');
    }
    print_data(&mut out, program);
    out
}

fn print_data(out: &mut String, program: &Program) {
    let mut runs: Vec<(u32, Vec<u8>)> = Vec::new();
    for (&addr, &byte) in &program.data {
        match runs.last_mut() {
            Some((start, bytes)) if start.checked_add(bytes.len() as u32) == Some(addr) => {
                bytes.push(byte)
            }
            _ => runs.push((addr, vec![byte])),
        }
    }
    for (start, bytes) in runs {
        let _ = writeln!(out, ".data {start:#x}");
        for chunk in bytes.chunks(16) {
            let list: Vec<String> = chunk.iter().map(|b| format!("{b:#04x}")).collect();
            let _ = writeln!(out, ".byte {}", list.join(", "));
        }
    }
}

/// One instruction in canonical syntax; `target_name` maps an instruction
/// index to its label.
pub(crate) fn format_instr(instr: &Instr, target_name: &dyn Fn(usize) -> String) -> String {
    let m = instr.op.mnemonic();
    let rd = instr.dst();
    let rs1 = instr.src1();
    let rs2 = instr.src2();
    let rs3 = instr.src3();
    let imm = instr.imm();
    let shift = instr.shift.unwrap_or(0);
    let lp = instr
        .loop_set
        .map(|l| l.to_string())
        .unwrap_or_else(|| "L0".into());
    let label = || instr.target.map(target_name).unwrap_or_default();
    let addr = |offset: String, base| match instr.op {
        Op::Load { mode, .. } | Op::Store { mode, .. } if mode.is_post_increment() => {
            format!("{offset}({base}!)")
        }
        _ => format!("{offset}({base})"),
    };
    match instr.op.form() {
        Form::Empty => m,
        Form::R2 => format!("{m} {rd}, {rs1}"),
        Form::R3 => format!("{m} {rd}, {rs1}, {rs2}"),
        Form::R4 => format!("{m} {rd}, {rs1}, {rs2}, {rs3}"),
        Form::RegImm | Form::Lane => format!("{m} {rd}, {rs1}, {imm}"),
        Form::Upper => format!("{m} {rd}, {imm:#x}"),
        Form::Branch => format!("{m} {rs1}, {rs2}, {}", label()),
        Form::Jump => format!("{m} {rd}, {}", label()),
        Form::JumpReg => format!("{m} {rd}, {imm}({rs1})"),
        Form::Load => {
            let mode = match instr.op {
                Op::Load { mode, .. } => mode,
                _ => unreachable!(),
            };
            let off = if mode.uses_offset_reg() {
                rs2.to_string()
            } else {
                imm.to_string()
            };
            format!("{m} {rd}, {}", addr(off, rs1))
        }
        Form::Store => {
            let mode = match instr.op {
                Op::Store { mode, .. } => mode,
                _ => unreachable!(),
            };
            let off = match mode {
                AddrMode::RegOffset | AddrMode::RegPostInc => rs3.to_string(),
                _ => imm.to_string(),
            };
            format!("{m} {rs2}, {}", addr(off, rs1))
        }
        Form::LoopReg => format!("{m} {lp}, {rs1}, {}", label()),
        Form::LoopImm => format!("{m} {lp}, {imm}, {}", label()),
        Form::LoopLabel => format!("{m} {lp}, {}", label()),
        Form::LoopCountReg => format!("{m} {lp}, {rs1}"),
        Form::LoopCountImm => format!("{m} {lp}, {imm}"),
        Form::R3Shift => format!("{m} {rd}, {rs1}, {rs2}, {shift}"),
        Form::R2Shift => format!("{m} {rd}, {rs1}, {shift}"),
        Form::Field => {
            let f = instr
                .field
                .unwrap_or(crate::isa::BitField { len: 1, off: 0 });
            format!("{m} {rd}, {rs1}, {}, {}", f.len, f.off)
        }
    }
}
