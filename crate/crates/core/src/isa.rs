//! Instruction vocabulary shared by the assembler, executor, timing and
//! energy models.
//!
//! Instructions only exist in decoded form. The 16/32-bit `size` is a static
//! attribute used for fetch modeling and compressed-instruction statistics;
//! no binary encoding is defined.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

/// General purpose register index `x0..x31`. `x0` reads as zero and
/// discards writes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reg(u8);

impl Reg {
    pub const ZERO: Reg = Reg(0);
    pub const RA: Reg = Reg(1);

    pub fn new(index: u8) -> Option<Reg> {
        (index < 32).then_some(Reg(index))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Registers addressable by the 3-bit fields of the compressed forms.
    pub fn is_compact(self) -> bool {
        (8..=15).contains(&self.0)
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// One of the two hardware-loop register sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LoopSet {
    L0,
    L1,
}

impl LoopSet {
    pub const ALL: [LoopSet; 2] = [LoopSet::L0, LoopSet::L1];

    pub fn index(self) -> usize {
        match self {
            LoopSet::L0 => 0,
            LoopSet::L1 => 1,
        }
    }
}

impl fmt::Display for LoopSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.index())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Size {
    Compressed,
    Full,
}

impl Size {
    pub fn bytes(self) -> u32 {
        match self {
            Size::Compressed => 2,
            Size::Full => 4,
        }
    }

    pub fn bits(self) -> u32 {
        self.bytes() * 8
    }
}

/// Timing/energy class of an instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Alu,
    Mul,
    Mac,
    Dotp,
    Shuffle,
    Load,
    Store,
    Branch,
    Jump,
    Div,
    HwloopSetup,
    Csr,
    Nop,
}

impl Class {
    pub const ALL: [Class; 13] = [
        Class::Alu,
        Class::Mul,
        Class::Mac,
        Class::Dotp,
        Class::Shuffle,
        Class::Load,
        Class::Store,
        Class::Branch,
        Class::Jump,
        Class::Div,
        Class::HwloopSetup,
        Class::Csr,
        Class::Nop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Class::Alu => "alu",
            Class::Mul => "mul",
            Class::Mac => "mac",
            Class::Dotp => "dotp",
            Class::Shuffle => "shuffle",
            Class::Load => "load",
            Class::Store => "store",
            Class::Branch => "branch",
            Class::Jump => "jump",
            Class::Div => "div",
            Class::HwloopSetup => "hwloop_setup",
            Class::Csr => "csr",
            Class::Nop => "nop",
        }
    }

    pub fn is_memory(self) -> bool {
        matches!(self, Class::Load | Class::Store)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Class::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown instruction class `{s}`"))
    }
}

/// Memory access width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Width {
    Byte,
    Half,
    Word,
}

impl Width {
    pub fn bytes(self) -> u32 {
        match self {
            Width::Byte => 1,
            Width::Half => 2,
            Width::Word => 4,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Width::Byte => "b",
            Width::Half => "h",
            Width::Word => "w",
        }
    }
}

/// Load/store addressing modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AddrMode {
    /// `imm(rs1)`: EA = base + imm.
    Offset,
    /// `imm(rs1!)`: EA = base, then base += imm.
    PostInc,
    /// `rs2(rs1)`: EA = base + offset register.
    RegOffset,
    /// `rs2(rs1!)`: EA = base, then base += offset register.
    RegPostInc,
}

impl AddrMode {
    pub const ALL: [AddrMode; 4] = [
        AddrMode::Offset,
        AddrMode::PostInc,
        AddrMode::RegOffset,
        AddrMode::RegPostInc,
    ];

    pub fn is_post_increment(self) -> bool {
        matches!(self, AddrMode::PostInc | AddrMode::RegPostInc)
    }

    pub fn uses_offset_reg(self) -> bool {
        matches!(self, AddrMode::RegOffset | AddrMode::RegPostInc)
    }
}

/// Lane geometry of a packed-SIMD operand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lanes {
    /// Four 8-bit lanes.
    Byte,
    /// Two 16-bit lanes.
    Half,
}

impl Lanes {
    pub fn count(self) -> usize {
        match self {
            Lanes::Byte => 4,
            Lanes::Half => 2,
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Lanes::Byte => 8,
            Lanes::Half => 16,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Lanes::Byte => "b",
            Lanes::Half => "h",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VecOp {
    Add,
    Sub,
    Avg,
    Min,
    Max,
    Srl,
    Sra,
    Sll,
    And,
    Or,
    Xor,
    Cmpeq,
    Cmpgt,
}

impl VecOp {
    pub const ALL: [VecOp; 13] = [
        VecOp::Add,
        VecOp::Sub,
        VecOp::Avg,
        VecOp::Min,
        VecOp::Max,
        VecOp::Srl,
        VecOp::Sra,
        VecOp::Sll,
        VecOp::And,
        VecOp::Or,
        VecOp::Xor,
        VecOp::Cmpeq,
        VecOp::Cmpgt,
    ];

    fn name(self) -> &'static str {
        match self {
            VecOp::Add => "add",
            VecOp::Sub => "sub",
            VecOp::Avg => "avg",
            VecOp::Min => "min",
            VecOp::Max => "max",
            VecOp::Srl => "srl",
            VecOp::Sra => "sra",
            VecOp::Sll => "sll",
            VecOp::And => "and",
            VecOp::Or => "or",
            VecOp::Xor => "xor",
            VecOp::Cmpeq => "cmpeq",
            VecOp::Cmpgt => "cmpgt",
        }
    }
}

/// Second-operand form of a vector ALU instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VecMode {
    /// Lane-wise vector/vector.
    Vector,
    /// `.sc`: lane 0 of rs2 replicated into every lane.
    Scalar,
    /// `.sci`: 6-bit signed immediate replicated into every lane.
    ScalarImm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FixOp {
    AddRN,
    AddRNu,
    SubRN,
    Clip,
    Clipu,
    MulsRN,
    MuluRN,
    Mac,
    Msu,
}

impl FixOp {
    pub const ALL: [FixOp; 9] = [
        FixOp::AddRN,
        FixOp::AddRNu,
        FixOp::SubRN,
        FixOp::Clip,
        FixOp::Clipu,
        FixOp::MulsRN,
        FixOp::MuluRN,
        FixOp::Mac,
        FixOp::Msu,
    ];

    fn name(self) -> &'static str {
        match self {
            FixOp::AddRN => "p.addRN",
            FixOp::AddRNu => "p.addRNu",
            FixOp::SubRN => "p.subRN",
            FixOp::Clip => "p.clip",
            FixOp::Clipu => "p.clipu",
            FixOp::MulsRN => "p.mulsRN",
            FixOp::MuluRN => "p.muluRN",
            FixOp::Mac => "p.mac",
            FixOp::Msu => "p.msu",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BitOp {
    Extract,
    Extractu,
    Insert,
    Bclr,
    Bset,
    Cnt,
    Ff1,
    Fl1,
    Clb,
}

impl BitOp {
    pub const ALL: [BitOp; 9] = [
        BitOp::Extract,
        BitOp::Extractu,
        BitOp::Insert,
        BitOp::Bclr,
        BitOp::Bset,
        BitOp::Cnt,
        BitOp::Ff1,
        BitOp::Fl1,
        BitOp::Clb,
    ];

    fn name(self) -> &'static str {
        match self {
            BitOp::Extract => "p.extract",
            BitOp::Extractu => "p.extractu",
            BitOp::Insert => "p.insert",
            BitOp::Bclr => "p.bclr",
            BitOp::Bset => "p.bset",
            BitOp::Cnt => "p.cnt",
            BitOp::Ff1 => "p.ff1",
            BitOp::Fl1 => "p.fl1",
            BitOp::Clb => "p.clb",
        }
    }

    /// True for the forms that take a `len, off` bit field.
    pub fn has_field(self) -> bool {
        matches!(
            self,
            BitOp::Extract | BitOp::Extractu | BitOp::Insert | BitOp::Bclr | BitOp::Bset
        )
    }
}

/// Sub-word move operations, all served by the shuffle unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubwordOp {
    Shuffle,
    Shuffle2,
    Insert,
    Extract,
    Extractu,
    Pack,
}

impl SubwordOp {
    pub const ALL: [SubwordOp; 6] = [
        SubwordOp::Shuffle,
        SubwordOp::Shuffle2,
        SubwordOp::Insert,
        SubwordOp::Extract,
        SubwordOp::Extractu,
        SubwordOp::Pack,
    ];

    fn name(self) -> &'static str {
        match self {
            SubwordOp::Shuffle => "shuffle",
            SubwordOp::Shuffle2 => "shuffle2",
            SubwordOp::Insert => "insert",
            SubwordOp::Extract => "extract",
            SubwordOp::Extractu => "extractu",
            SubwordOp::Pack => "pack",
        }
    }
}

/// Every operation in the vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Addi,
    Sub,
    And,
    Andi,
    Or,
    Ori,
    Xor,
    Xori,
    Sll,
    Slli,
    Srl,
    Srli,
    Sra,
    Srai,
    Slt,
    Slti,
    Sltu,
    Lui,
    Auipc,
    Mv,
    Nop,
    Mul,
    Mulh,
    Mulhu,
    Div,
    Divu,
    Rem,
    Remu,
    Beq,
    Bne,
    Blt,
    Bge,
    Bltu,
    Bgeu,
    Jal,
    Jalr,
    Load {
        width: Width,
        unsigned: bool,
        mode: AddrMode,
    },
    Store {
        width: Width,
        mode: AddrMode,
    },
    LpSetup,
    LpSetupi,
    LpStart,
    LpEnd,
    LpCount,
    LpCounti,
    Fix(FixOp),
    Bit(BitOp),
    Vec {
        op: VecOp,
        mode: VecMode,
        lanes: Lanes,
    },
    /// `pv.dotp.*` (`accumulate = false`) and `pv.sdotp.*`.
    Dotp {
        lanes: Lanes,
        unsigned: bool,
        accumulate: bool,
        scalar: bool,
    },
    Subword {
        op: SubwordOp,
        lanes: Lanes,
    },
}

/// Operand shape of an instruction; drives parsing, printing and arity checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// no operands
    Empty,
    /// `rd, rs1`
    R2,
    /// `rd, rs1, rs2`
    R3,
    /// `rd, rs1, rs2, rs3`
    R4,
    /// `rd, rs1, imm`
    RegImm,
    /// `rd, imm`
    Upper,
    /// `rs1, rs2, label`
    Branch,
    /// `rd, label`
    Jump,
    /// `rd, imm(rs1)`
    JumpReg,
    /// `rd, <address>`
    Load,
    /// `rs2, <address>`
    Store,
    /// `Lx, rs1, label`
    LoopReg,
    /// `Lx, imm, label`
    LoopImm,
    /// `Lx, label`
    LoopLabel,
    /// `Lx, rs1`
    LoopCountReg,
    /// `Lx, imm`
    LoopCountImm,
    /// `rd, rs1, rs2, I`
    R3Shift,
    /// `rd, rs1, I`
    R2Shift,
    /// `rd, rs1, len, off`
    Field,
    /// `rd, rs1, lane`
    Lane,
}

static VOCABULARY: LazyLock<Vec<Op>> = LazyLock::new(build_vocabulary);

static BY_MNEMONIC: LazyLock<HashMap<String, Op>> = LazyLock::new(|| {
    let mut map = HashMap::new();
    for &op in VOCABULARY.iter() {
        // Addressing modes beyond `Offset` share the `p.` mnemonic and are
        // distinguished by operand syntax.
        if let Op::Load { mode, .. } | Op::Store { mode, .. } = op {
            if mode != AddrMode::Offset {
                continue;
            }
            map.insert(op.mnemonic_with_mode(AddrMode::PostInc), op);
        }
        map.insert(op.mnemonic(), op);
    }
    map
});

fn build_vocabulary() -> Vec<Op> {
    use Op::*;
    let mut ops = vec![
        Add, Addi, Sub, And, Andi, Or, Ori, Xor, Xori, Sll, Slli, Srl, Srli, Sra, Srai, Slt, Slti,
        Sltu, Lui, Auipc, Mv, Nop, Mul, Mulh, Mulhu, Div, Divu, Rem, Remu, Beq, Bne, Blt, Bge,
        Bltu, Bgeu, Jal, Jalr, LpSetup, LpSetupi, LpStart, LpEnd, LpCount, LpCounti,
    ];
    for mode in AddrMode::ALL {
        for (width, unsigned) in [
            (Width::Word, false),
            (Width::Half, false),
            (Width::Half, true),
            (Width::Byte, false),
            (Width::Byte, true),
        ] {
            ops.push(Load {
                width,
                unsigned,
                mode,
            });
        }
        for width in [Width::Word, Width::Half, Width::Byte] {
            ops.push(Store { width, mode });
        }
    }
    ops.extend(FixOp::ALL.map(Fix));
    ops.extend(BitOp::ALL.map(Bit));
    for lanes in [Lanes::Byte, Lanes::Half] {
        for op in VecOp::ALL {
            for mode in [VecMode::Vector, VecMode::Scalar, VecMode::ScalarImm] {
                ops.push(Vec { op, mode, lanes });
            }
        }
        for unsigned in [false, true] {
            for accumulate in [false, true] {
                for scalar in [false, true] {
                    ops.push(Dotp {
                        lanes,
                        unsigned,
                        accumulate,
                        scalar,
                    });
                }
            }
        }
        for op in SubwordOp::ALL {
            ops.push(Subword { op, lanes });
        }
    }
    ops
}

impl Op {
    /// The complete vocabulary, one entry per distinct operation.
    pub fn all() -> &'static [Op] {
        &VOCABULARY
    }

    /// Looks up a mnemonic as written in assembly. Post-increment and
    /// register-offset memory forms resolve to the `Offset` op; the parser
    /// picks the final mode from the operand syntax.
    pub fn from_mnemonic(name: &str) -> Option<Op> {
        BY_MNEMONIC.get(name).copied()
    }

    pub fn mnemonic(&self) -> String {
        match *self {
            Op::Load { mode, .. } | Op::Store { mode, .. } => self.mnemonic_with_mode(mode),
            _ => self.base_mnemonic(),
        }
    }

    fn mnemonic_with_mode(&self, mode: AddrMode) -> String {
        let prefix = if mode == AddrMode::Offset { "" } else { "p." };
        match *self {
            Op::Load {
                width, unsigned, ..
            } => {
                let u = if unsigned { "u" } else { "" };
                format!("{prefix}l{}{u}", width.suffix())
            }
            Op::Store { width, .. } => format!("{prefix}s{}", width.suffix()),
            _ => self.base_mnemonic(),
        }
    }

    fn base_mnemonic(&self) -> String {
        let s = match *self {
            Op::Add => "add",
            Op::Addi => "addi",
            Op::Sub => "sub",
            Op::And => "and",
            Op::Andi => "andi",
            Op::Or => "or",
            Op::Ori => "ori",
            Op::Xor => "xor",
            Op::Xori => "xori",
            Op::Sll => "sll",
            Op::Slli => "slli",
            Op::Srl => "srl",
            Op::Srli => "srli",
            Op::Sra => "sra",
            Op::Srai => "srai",
            Op::Slt => "slt",
            Op::Slti => "slti",
            Op::Sltu => "sltu",
            Op::Lui => "lui",
            Op::Auipc => "auipc",
            Op::Mv => "mv",
            Op::Nop => "nop",
            Op::Mul => "mul",
            Op::Mulh => "mulh",
            Op::Mulhu => "mulhu",
            Op::Div => "div",
            Op::Divu => "divu",
            Op::Rem => "rem",
            Op::Remu => "remu",
            Op::Beq => "beq",
            Op::Bne => "bne",
            Op::Blt => "blt",
            Op::Bge => "bge",
            Op::Bltu => "bltu",
            Op::Bgeu => "bgeu",
            Op::Jal => "jal",
            Op::Jalr => "jalr",
            Op::LpSetup => "lp.setup",
            Op::LpSetupi => "lp.setupi",
            Op::LpStart => "lp.start",
            Op::LpEnd => "lp.end",
            Op::LpCount => "lp.count",
            Op::LpCounti => "lp.counti",
            Op::Fix(f) => f.name(),
            Op::Bit(b) => b.name(),
            Op::Vec { op, mode, lanes } => {
                let m = match mode {
                    VecMode::Vector => "",
                    VecMode::Scalar => ".sc",
                    VecMode::ScalarImm => ".sci",
                };
                return format!("pv.{}{m}.{}", op.name(), lanes.suffix());
            }
            Op::Dotp {
                lanes,
                unsigned,
                accumulate,
                scalar,
            } => {
                let base = if accumulate { "sdotp" } else { "dotp" };
                let sc = if scalar { ".sc" } else { "" };
                let sign = if unsigned { "u" } else { "s" };
                return format!("pv.{base}{sc}.{sign}{}", lanes.suffix());
            }
            Op::Subword { op, lanes } => return format!("pv.{}.{}", op.name(), lanes.suffix()),
            Op::Load { .. } | Op::Store { .. } => unreachable!(),
        };
        s.to_string()
    }

    pub fn class(&self) -> Class {
        class_of(self)
    }

    pub fn form(&self) -> Form {
        match *self {
            Op::Nop => Form::Empty,
            Op::Mv => Form::R2,
            Op::Add
            | Op::Sub
            | Op::And
            | Op::Or
            | Op::Xor
            | Op::Sll
            | Op::Srl
            | Op::Sra
            | Op::Slt
            | Op::Sltu
            | Op::Mul
            | Op::Mulh
            | Op::Mulhu
            | Op::Div
            | Op::Divu
            | Op::Rem
            | Op::Remu => Form::R3,
            Op::Addi
            | Op::Andi
            | Op::Ori
            | Op::Xori
            | Op::Slli
            | Op::Srli
            | Op::Srai
            | Op::Slti => Form::RegImm,
            Op::Lui | Op::Auipc => Form::Upper,
            Op::Beq | Op::Bne | Op::Blt | Op::Bge | Op::Bltu | Op::Bgeu => Form::Branch,
            Op::Jal => Form::Jump,
            Op::Jalr => Form::JumpReg,
            Op::Load { .. } => Form::Load,
            Op::Store { .. } => Form::Store,
            Op::LpSetup => Form::LoopReg,
            Op::LpSetupi => Form::LoopImm,
            Op::LpStart | Op::LpEnd => Form::LoopLabel,
            Op::LpCount => Form::LoopCountReg,
            Op::LpCounti => Form::LoopCountImm,
            Op::Fix(FixOp::Clip | FixOp::Clipu) => Form::R2Shift,
            Op::Fix(FixOp::Mac | FixOp::Msu) => Form::R3,
            Op::Fix(_) => Form::R3Shift,
            Op::Bit(b) if b.has_field() => Form::Field,
            Op::Bit(_) => Form::R2,
            Op::Vec { mode, .. } => match mode {
                VecMode::ScalarImm => Form::RegImm,
                _ => Form::R3,
            },
            Op::Dotp { .. } => Form::R3,
            Op::Subword { op, .. } => match op {
                SubwordOp::Shuffle | SubwordOp::Pack => Form::R3,
                SubwordOp::Shuffle2 => Form::R4,
                SubwordOp::Insert | SubwordOp::Extract | SubwordOp::Extractu => Form::Lane,
            },
        }
    }

    /// Operations whose destination register is also a source operand.
    pub fn reads_destination(&self) -> bool {
        matches!(
            self,
            Op::Fix(FixOp::Mac | FixOp::Msu)
                | Op::Bit(BitOp::Insert)
                | Op::Dotp {
                    accumulate: true,
                    ..
                }
                | Op::Subword {
                    op: SubwordOp::Insert,
                    ..
                }
                | Op::Subword {
                    op: SubwordOp::Pack,
                    lanes: Lanes::Byte,
                }
        )
    }

    /// True for everything outside plain RV32IM.
    pub fn is_extension(&self) -> bool {
        match self {
            Op::Load { mode, .. } | Op::Store { mode, .. } => *mode != AddrMode::Offset,
            Op::LpSetup
            | Op::LpSetupi
            | Op::LpStart
            | Op::LpEnd
            | Op::LpCount
            | Op::LpCounti
            | Op::Fix(_)
            | Op::Bit(_)
            | Op::Vec { .. }
            | Op::Dotp { .. }
            | Op::Subword { .. } => true,
            _ => false,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.mnemonic())
    }
}

/// Total mapping from operation to timing/energy class.
pub fn class_of(op: &Op) -> Class {
    match *op {
        Op::Nop => Class::Nop,
        Op::Mul | Op::Mulh | Op::Mulhu | Op::Fix(FixOp::MulsRN | FixOp::MuluRN) => Class::Mul,
        Op::Fix(FixOp::Mac | FixOp::Msu) => Class::Mac,
        Op::Dotp { .. } => Class::Dotp,
        Op::Subword { .. } => Class::Shuffle,
        Op::Load { .. } => Class::Load,
        Op::Store { .. } => Class::Store,
        Op::Beq | Op::Bne | Op::Blt | Op::Bge | Op::Bltu | Op::Bgeu => Class::Branch,
        Op::Jal | Op::Jalr => Class::Jump,
        Op::Div | Op::Divu | Op::Rem | Op::Remu => Class::Div,
        Op::LpSetup | Op::LpSetupi => Class::HwloopSetup,
        Op::LpStart | Op::LpEnd | Op::LpCount | Op::LpCounti => Class::Csr,
        Op::Add
        | Op::Addi
        | Op::Sub
        | Op::And
        | Op::Andi
        | Op::Or
        | Op::Ori
        | Op::Xor
        | Op::Xori
        | Op::Sll
        | Op::Slli
        | Op::Srl
        | Op::Srli
        | Op::Sra
        | Op::Srai
        | Op::Slt
        | Op::Slti
        | Op::Sltu
        | Op::Lui
        | Op::Auipc
        | Op::Mv
        | Op::Fix(_)
        | Op::Bit(_)
        | Op::Vec { .. } => Class::Alu,
    }
}

/// A `len, off` bit field for the bit-manipulation forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitField {
    pub len: u8,
    pub off: u8,
}

/// A decoded instruction. Operand presence follows [`Op::form`]; the
/// assembler guarantees it, so unused operands are `None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instr {
    pub op: Op,
    pub rd: Option<Reg>,
    pub rs1: Option<Reg>,
    pub rs2: Option<Reg>,
    pub rs3: Option<Reg>,
    pub imm: Option<i32>,
    /// Round/normalize or clip amount `I`.
    pub shift: Option<u8>,
    pub field: Option<BitField>,
    pub loop_set: Option<LoopSet>,
    /// Resolved label: index of the target instruction.
    pub target: Option<usize>,
    pub size: Size,
}

impl Instr {
    pub fn new(op: Op) -> Instr {
        Instr {
            op,
            rd: None,
            rs1: None,
            rs2: None,
            rs3: None,
            imm: None,
            shift: None,
            field: None,
            loop_set: None,
            target: None,
            size: Size::Full,
        }
    }

    pub fn class(&self) -> Class {
        class_of(&self.op)
    }

    pub fn dst(&self) -> Reg {
        self.rd.unwrap_or(Reg::ZERO)
    }

    pub fn src1(&self) -> Reg {
        self.rs1.unwrap_or(Reg::ZERO)
    }

    pub fn src2(&self) -> Reg {
        self.rs2.unwrap_or(Reg::ZERO)
    }

    pub fn src3(&self) -> Reg {
        self.rs3.unwrap_or(Reg::ZERO)
    }

    pub fn imm(&self) -> i32 {
        self.imm.unwrap_or(0)
    }

    /// Bit mask of registers read by this instruction (bit i = xi).
    pub fn reads(&self) -> u32 {
        let mut mask = 0u32;
        for r in [self.rs1, self.rs2, self.rs3].into_iter().flatten() {
            mask |= 1 << r.index();
        }
        if self.op.reads_destination() {
            if let Some(rd) = self.rd {
                mask |= 1 << rd.index();
            }
        }
        mask & !1
    }
}

const C_IMM6: std::ops::RangeInclusive<i32> = -32..=31;

/// Whether the instruction has a 16-bit compressed form.
///
/// | mnemonic               | constraint                                           |
/// |------------------------|------------------------------------------------------|
/// | nop                    | always                                               |
/// | mv                     | rd, rs1 != x0 (full register range)                  |
/// | add                    | rd == rs1, rd != x0, rs2 != x0 (full register range) |
/// | addi                   | rd in x8..x15, rs1 == rd or x0, imm in -32..=31      |
/// | lui                    | rd in x8..x15, imm in -32..=31, imm != 0             |
/// | and/or/xor/sub/sll/srl/sra/slt | rd == rs1, rd and rs2 in x8..x15             |
/// | andi                   | rd == rs1 in x8..x15, imm in -32..=31                |
/// | slli/srli/srai         | rd == rs1 in x8..x15, shamt in 1..=31                |
/// | lw/sw (`imm(rs1)` only)| data reg and rs1 in x8..x15, imm in 0..=124, imm % 4 == 0 |
/// | beq/bne                | rs1 in x8..x15, rs2 == x0                            |
/// | jal                    | rd == x0 or x1                                       |
///
/// Branch and jump offsets are not range-checked; kernels are far smaller
/// than the compressed reach. Every extension mnemonic is uncompressible.
pub fn is_compressible(instr: &Instr) -> bool {
    let rd = instr.dst();
    let rs1 = instr.src1();
    let rs2 = instr.src2();
    let imm = instr.imm();
    match instr.op {
        Op::Nop => true,
        Op::Mv => rd != Reg::ZERO && rs1 != Reg::ZERO,
        Op::Add => rd == rs1 && rd != Reg::ZERO && rs2 != Reg::ZERO,
        Op::Addi => rd.is_compact() && (rs1 == rd || rs1 == Reg::ZERO) && C_IMM6.contains(&imm),
        Op::Lui => rd.is_compact() && imm != 0 && C_IMM6.contains(&imm),
        Op::And | Op::Or | Op::Xor | Op::Sub | Op::Sll | Op::Srl | Op::Sra | Op::Slt => {
            rd == rs1 && rd.is_compact() && rs2.is_compact()
        }
        Op::Andi => rd == rs1 && rd.is_compact() && C_IMM6.contains(&imm),
        Op::Slli | Op::Srli | Op::Srai => rd == rs1 && rd.is_compact() && (1..=31).contains(&imm),
        Op::Load {
            width: Width::Word,
            unsigned: false,
            mode: AddrMode::Offset,
        } => rd.is_compact() && rs1.is_compact() && (0..=124).contains(&imm) && imm % 4 == 0,
        Op::Store {
            width: Width::Word,
            mode: AddrMode::Offset,
        } => rs2.is_compact() && rs1.is_compact() && (0..=124).contains(&imm) && imm % 4 == 0,
        Op::Beq | Op::Bne => rs1.is_compact() && rs2 == Reg::ZERO,
        Op::Jal => rd == Reg::ZERO || rd == Reg::RA,
        _ => false,
    }
}
