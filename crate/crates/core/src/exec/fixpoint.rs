//! Fixed-point arithmetic: add/sub with round-and-normalize, clipping, and
//! the fractional multiplier.
//!
//! Sums and products are formed in 32-bit wrapping arithmetic, exactly like
//! the instruction sequences they replace (`add; addi 2^(I-1); srai I`).

use crate::isa::FixOp;

/// Rounding term `2^(I-1)`; zero when `I = 0`.
pub fn round_term(shift: u8) -> u32 {
    if shift == 0 {
        0
    } else {
        1u32 << (shift - 1)
    }
}

fn sext16(v: u32) -> i32 {
    v as u16 as i16 as i32
}

/// Saturation bounds for a signed `width`-bit clip: `[-2^(I-1), 2^(I-1)-1]`.
pub fn clip_bounds(width: u8) -> (i32, i32) {
    let half = 1i64 << (width - 1);
    (-half as i32, (half - 1) as i32)
}

/// Evaluates a fixed-point operation. `acc` is the old destination value
/// (used by `p.mac`/`p.msu`); `shift` is `I`.
pub fn exec_fixpoint(op: FixOp, a: u32, b: u32, acc: u32, shift: u8) -> u32 {
    let rnd = round_term(shift);
    let sh = shift as u32;
    match op {
        FixOp::AddRN => ((a.wrapping_add(b).wrapping_add(rnd) as i32) >> sh) as u32,
        FixOp::AddRNu => a.wrapping_add(b).wrapping_add(rnd) >> sh,
        FixOp::SubRN => ((a.wrapping_sub(b).wrapping_add(rnd) as i32) >> sh) as u32,
        FixOp::Clip => {
            let (lo, hi) = clip_bounds(shift);
            (a as i32).clamp(lo, hi) as u32
        }
        FixOp::Clipu => {
            let (_, hi) = clip_bounds(shift);
            (a as i32).clamp(0, hi) as u32
        }
        FixOp::MulsRN => {
            let p = sext16(a).wrapping_mul(sext16(b)) as u32;
            ((p.wrapping_add(rnd) as i32) >> sh) as u32
        }
        FixOp::MuluRN => {
            let p = (a & 0xFFFF).wrapping_mul(b & 0xFFFF);
            p.wrapping_add(rnd) >> sh
        }
        FixOp::Mac => acc.wrapping_add(sext16(a).wrapping_mul(sext16(b)) as u32),
        FixOp::Msu => acc.wrapping_sub(sext16(a).wrapping_mul(sext16(b)) as u32),
    }
}
