//! Textual assembly: parsing into a [`Program`] and canonical printing.
//!
//! The grammar is documented in `docs/assembly.md`. Operands are written
//! destination first; memory operands use `imm(rs1)`, `imm(rs1!)`,
//! `rs2(rs1)` and `rs2(rs1!)`.

mod parse;
mod print;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::isa::Instr;

pub use parse::{parse, parse_with_base};
pub use print::print;

/// An assembled program: instructions with sequential addresses, a label
/// map, and an initialized data image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub instrs: Vec<Instr>,
    /// label name -> instruction index (may equal `instrs.len()` for a label
    /// placed after the last instruction)
    pub labels: BTreeMap<String, usize>,
    /// byte address -> byte
    pub data: BTreeMap<u32, u8>,
    pub entry: usize,
    pub base: u32,
    addrs: Vec<u32>,
}

impl Program {
    pub fn new(
        instrs: Vec<Instr>,
        labels: BTreeMap<String, usize>,
        data: BTreeMap<u32, u8>,
        entry: usize,
        base: u32,
    ) -> Program {
        let mut addrs = Vec::with_capacity(instrs.len() + 1);
        let mut pc = base;
        for i in &instrs {
            addrs.push(pc);
            pc += i.size.bytes();
        }
        addrs.push(pc);
        Program {
            instrs,
            labels,
            data,
            entry,
            base,
            addrs,
        }
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Byte address of instruction `index`; `index == len()` yields the
    /// address one past the last instruction.
    pub fn address_of(&self, index: usize) -> u32 {
        self.addrs[index]
    }

    pub fn entry_address(&self) -> u32 {
        self.addrs[self.entry]
    }

    pub fn end_address(&self) -> u32 {
        self.addrs[self.instrs.len()]
    }

    pub fn index_of(&self, addr: u32) -> Option<usize> {
        self.addrs[..self.instrs.len()].binary_search(&addr).ok()
    }

    /// Name of some label bound to `index`, if any.
    pub fn label_at(&self, index: usize) -> Option<&str> {
        self.labels
            .iter()
            .find(|(_, &i)| i == index)
            .map(|(name, _)| name.as_str())
    }

    /// Number of instructions assigned the 16-bit form.
    pub fn compressed_count(&self) -> usize {
        self.instrs
            .iter()
            .filter(|i| i.size == crate::isa::Size::Compressed)
            .count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceErrorKind {
    Syntax,
    UnknownMnemonic,
    Arity,
    UnresolvedLabel,
    ImmediateRange,
    DuplicateLabel,
    BadRegister,
    LoopRange,
}

/// Assembly error with a 1-based line number.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SourceError {
    pub line: usize,
    pub kind: SourceErrorKind,
    pub message: String,
}

impl SourceError {
    pub(crate) fn new(line: usize, kind: SourceErrorKind, message: impl Into<String>) -> Self {
        SourceError {
            line,
            kind,
            message: message.into(),
        }
    }
}
