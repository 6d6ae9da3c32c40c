//! Bit manipulation and the iterative divider.

use crate::isa::{BitField, BitOp};

fn field_mask(f: BitField) -> u32 {
    let ones = if f.len >= 32 {
        u32::MAX
    } else {
        (1u32 << f.len) - 1
    };
    ones << f.off
}

/// `a` is the source operand, `old` the destination's previous value
/// (only `p.insert` reads it). Field-less ops ignore `field`.
pub fn exec_bitmanip(op: BitOp, a: u32, old: u32, field: BitField) -> u32 {
    match op {
        BitOp::Extract | BitOp::Extractu => {
            let raw = (a & field_mask(field)) >> field.off;
            if op == BitOp::Extractu || field.len >= 32 {
                raw
            } else {
                let shift = 32 - field.len as u32;
                (((raw << shift) as i32) >> shift) as u32
            }
        }
        BitOp::Insert => {
            let mask = field_mask(field);
            (old & !mask) | ((a << field.off) & mask)
        }
        BitOp::Bclr => a & !field_mask(field),
        BitOp::Bset => a | field_mask(field),
        BitOp::Cnt => a.count_ones(),
        BitOp::Ff1 => {
            if a == 0 {
                32
            } else {
                a.trailing_zeros()
            }
        }
        BitOp::Fl1 => {
            if a == 0 {
                32
            } else {
                31 - a.leading_zeros()
            }
        }
        BitOp::Clb => {
            if a == 0 {
                0
            } else if (a as i32) < 0 {
                (!a).leading_zeros() - 1
            } else {
                a.leading_zeros() - 1
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivOp {
    Div,
    Divu,
    Rem,
    Remu,
}

/// RV32M division; never traps. Division by zero yields all ones (quotient)
/// or the dividend (remainder); `MIN / -1` yields `MIN` and remainder 0.
pub fn exec_div(op: DivOp, a: u32, b: u32) -> u32 {
    let (sa, sb) = (a as i32, b as i32);
    match op {
        DivOp::Div => {
            if b == 0 {
                u32::MAX
            } else {
                sa.wrapping_div(sb) as u32
            }
        }
        DivOp::Divu => a.checked_div(b).unwrap_or(u32::MAX),
        DivOp::Rem => {
            if b == 0 {
                a
            } else {
                sa.wrapping_rem(sb) as u32
            }
        }
        DivOp::Remu => a.checked_rem(b).unwrap_or(a),
    }
}

/// Magnitude of the quotient, used for the divider's latency estimate.
pub fn quotient_magnitude(op: DivOp, a: u32, b: u32) -> u32 {
    match op {
        DivOp::Div | DivOp::Rem => (exec_div(DivOp::Div, a, b) as i32).unsigned_abs(),
        DivOp::Divu | DivOp::Remu => exec_div(DivOp::Divu, a, b),
    }
}
