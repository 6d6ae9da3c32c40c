//! Tiny assembly text builder used by the kernel generators.

use std::fmt::Write as _;

use crate::asm::{parse, Program};
use crate::exec::BARRIER_ADDR;

use super::KernelError;

#[derive(Default)]
pub(super) struct Asm {
    text: String,
}

impl Asm {
    pub fn new() -> Asm {
        Asm::default()
    }

    /// Appends one instruction line.
    pub fn op(&mut self, line: impl AsRef<str>) -> &mut Self {
        let _ = writeln!(self.text, "    {}", line.as_ref());
        self
    }

    pub fn label(&mut self, name: &str) -> &mut Self {
        let _ = writeln!(self.text, "{name}:");
        self
    }

    pub fn comment(&mut self, c: &str) -> &mut Self {
        let _ = writeln!(self.text, "# {c}");
        self
    }

    /// `li` that also accepts addresses above the imm12 range.
    pub fn li(&mut self, rd: &str, value: i64) -> &mut Self {
        self.op(format!("li {rd}, {value}"))
    }

    /// Adds a constant, going through `tmp` when it does not fit imm12.
    pub fn addi(&mut self, rd: &str, rs: &str, value: i64, tmp: &str) -> &mut Self {
        if (-2048..=2047).contains(&value) {
            self.op(format!("addi {rd}, {rs}, {value}"))
        } else {
            self.li(tmp, value);
            self.op(format!("add {rd}, {rs}, {tmp}"))
        }
    }

    /// Ends the program; multi-core programs synchronize first.
    pub fn finish(mut self, cores: usize) -> Result<Program, KernelError> {
        self.label("kernel_exit");
        if cores > 1 {
            self.li("x5", BARRIER_ADDR as i64);
            self.op("sw x0, 0(x5)");
        } else {
            self.op("nop");
        }
        Ok(parse(&self.text)?)
    }
}

/// Immediate offset check for generated memory operands.
pub(super) fn imm12(v: usize) -> Result<i64, KernelError> {
    if v <= 2047 {
        Ok(v as i64)
    } else {
        Err(KernelError::Unsupported(format!(
            "offset {v} exceeds the immediate range"
        )))
    }
}
