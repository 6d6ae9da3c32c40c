//! Packed-SIMD semantics: vector ALU, dot products and the shuffle unit.
//!
//! Lane `i` occupies bits `[8i+7:8i]` in byte mode and `[16i+15:16i]` in
//! halfword mode. Lanes never carry into each other.

use crate::isa::{Lanes, SubwordOp, VecOp};

/// A 32-bit word viewed as four 8-bit or two 16-bit lanes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LaneVector {
    pub word: u32,
    pub lanes: Lanes,
}

impl LaneVector {
    pub fn new(word: u32, lanes: Lanes) -> Self {
        LaneVector { word, lanes }
    }

    /// Packs `values` (lane 0 first), truncating each to the lane width.
    pub fn from_lanes(values: &[i32], lanes: Lanes) -> Self {
        assert_eq!(values.len(), lanes.count(), "lane count mismatch");
        let word = values.iter().enumerate().fold(0u32, |w, (i, &v)| {
            w | ((v as u32 & lane_mask(lanes)) << (i as u32 * lanes.bits()))
        });
        LaneVector { word, lanes }
    }

    pub fn count(&self) -> usize {
        self.lanes.count()
    }

    /// Raw (zero-extended) lane value.
    pub fn lane(&self, i: usize) -> u32 {
        (self.word >> (i as u32 * self.lanes.bits())) & lane_mask(self.lanes)
    }

    pub fn lane_signed(&self, i: usize) -> i32 {
        let shift = 32 - self.lanes.bits();
        ((self.lane(i) << shift) as i32) >> shift
    }

    /// Lane value extended per `signed`.
    pub fn get(&self, i: usize, signed: bool) -> i32 {
        if signed {
            self.lane_signed(i)
        } else {
            self.lane(i) as i32
        }
    }

    pub fn signed_lanes(&self) -> Vec<i32> {
        (0..self.count()).map(|i| self.lane_signed(i)).collect()
    }
}

fn lane_mask(lanes: Lanes) -> u32 {
    match lanes {
        Lanes::Byte => 0xFF,
        Lanes::Half => 0xFFFF,
    }
}

/// Replicates the low lane of `value` into every lane.
pub fn replicate(value: u32, lanes: Lanes) -> u32 {
    match lanes {
        Lanes::Byte => (value & 0xFF) * 0x0101_0101,
        Lanes::Half => (value & 0xFFFF) * 0x0001_0001,
    }
}

fn map_lanes(lanes: Lanes, a: u32, b: u32, f: impl Fn(i32, i32, u32, u32) -> u32) -> u32 {
    let va = LaneVector::new(a, lanes);
    let vb = LaneVector::new(b, lanes);
    let mask = lane_mask(lanes);
    (0..lanes.count()).fold(0u32, |acc, i| {
        let r = f(va.lane_signed(i), vb.lane_signed(i), va.lane(i), vb.lane(i)) & mask;
        acc | (r << (i as u32 * lanes.bits()))
    })
}

/// Lane-wise ALU operation. For `.sc`/`.sci` forms `b` must already hold
/// the replicated scalar.
pub fn exec_vector_alu(op: VecOp, lanes: Lanes, a: u32, b: u32) -> u32 {
    let shamt_mask = lanes.bits() - 1;
    let ones = lane_mask(lanes);
    map_lanes(lanes, a, b, |sa, sb, ua, ub| match op {
        VecOp::Add => ua.wrapping_add(ub),
        VecOp::Sub => ua.wrapping_sub(ub),
        VecOp::Avg => ((sa + sb) >> 1) as u32,
        VecOp::Min => sa.min(sb) as u32,
        VecOp::Max => sa.max(sb) as u32,
        VecOp::Srl => ua >> (ub & shamt_mask),
        VecOp::Sra => (sa >> (ub & shamt_mask)) as u32,
        VecOp::Sll => ua << (ub & shamt_mask),
        VecOp::And => ua & ub,
        VecOp::Or => ua | ub,
        VecOp::Xor => ua ^ ub,
        VecOp::Cmpeq => {
            if ua == ub {
                ones
            } else {
                0
            }
        }
        VecOp::Cmpgt => {
            if sa > sb {
                ones
            } else {
                0
            }
        }
    })
}

/// `acc + sum(ext(a[i]) * ext(b[i]))`, wrapped to 32 bits. Both operands
/// use the same extension; `acc` is 0 for the non-accumulating form.
pub fn exec_dotp(lanes: Lanes, unsigned: bool, a: u32, b: u32, acc: u32) -> u32 {
    let va = LaneVector::new(a, lanes);
    let vb = LaneVector::new(b, lanes);
    (0..lanes.count()).fold(acc, |sum, i| {
        let p = if unsigned {
            va.lane(i).wrapping_mul(vb.lane(i))
        } else {
            va.lane_signed(i).wrapping_mul(vb.lane_signed(i)) as u32
        };
        sum.wrapping_add(p)
    })
}

/// Shuffle-unit primitive. For each output lane `j`, mask lane `j` holds a
/// source index in its low bits (2 bits for bytes, 1 for halfwords) and a
/// select bit just above them: 1 picks `a`, 0 picks `b`.
pub fn exec_shuffle(a: u32, b: u32, mask: u32, lanes: Lanes) -> u32 {
    let index_bits = match lanes {
        Lanes::Byte => 2,
        Lanes::Half => 1,
    };
    let index_mask = (1 << index_bits) - 1;
    let va = LaneVector::new(a, lanes);
    let vb = LaneVector::new(b, lanes);
    let vm = LaneVector::new(mask, lanes);
    (0..lanes.count()).fold(0u32, |out, j| {
        let sel = vm.lane(j);
        let idx = (sel & index_mask) as usize;
        let v = if sel >> index_bits & 1 == 1 {
            va.lane(idx)
        } else {
            vb.lane(idx)
        };
        out | (v << (j as u32 * lanes.bits()))
    })
}

/// Mask entry selecting lane `index` of the first (`from_a`) or second source.
pub fn shuffle_selector(from_a: bool, index: usize, lanes: Lanes) -> u32 {
    let select_bit = match lanes {
        Lanes::Byte => 4,
        Lanes::Half => 2,
    };
    (if from_a { select_bit } else { 0 }) | index as u32
}

/// Builds a mask word from per-output-lane selectors (lane 0 first).
pub fn shuffle_mask(selectors: &[(bool, usize)], lanes: Lanes) -> u32 {
    let values: Vec<i32> = selectors
        .iter()
        .map(|&(a, i)| shuffle_selector(a, i, lanes) as i32)
        .collect();
    LaneVector::from_lanes(&values, lanes).word
}

/// Sub-word move instructions expressed as fixed-mask shuffles.
///
/// * `shuffle`: `rs1` permuted by mask `rs2` (source forced to `rs1`)
/// * `shuffle2`: `rs1`/`rs2` selected by mask `rs3`
/// * `insert`: lane `imm` of `rd` replaced by lane 0 of `rs1`
/// * `extract`/`extractu`: lane `imm` of `rs1`, sign/zero extended
/// * `pack.h`: `rs1` low half on top of `rs2` low half
/// * `pack.b`: low bytes of `rs1` and `rs2` into lanes 1 and 0 of `rd`
pub fn exec_subword(
    op: SubwordOp,
    lanes: Lanes,
    rs1: u32,
    rs2: u32,
    rs3: u32,
    rd_old: u32,
    lane: usize,
) -> u32 {
    let n = lanes.count();
    match op {
        SubwordOp::Shuffle => {
            // clear every select bit so that all lanes come from `a`
            let forced = (0..n)
                .map(|j| (true, (LaneVector::new(rs2, lanes).lane(j) as usize) % n))
                .collect::<Vec<_>>();
            exec_shuffle(rs1, rs1, shuffle_mask(&forced, lanes), lanes)
        }
        SubwordOp::Shuffle2 => exec_shuffle(rs1, rs2, rs3, lanes),
        SubwordOp::Insert => {
            let sel: Vec<_> = (0..n)
                .map(|j| if j == lane { (true, 0) } else { (false, j) })
                .collect();
            exec_shuffle(rs1, rd_old, shuffle_mask(&sel, lanes), lanes)
        }
        SubwordOp::Extract | SubwordOp::Extractu => {
            let sel: Vec<_> = (0..n).map(|_| (true, lane)).collect();
            let moved = LaneVector::new(
                exec_shuffle(rs1, rs1, shuffle_mask(&sel, lanes), lanes),
                lanes,
            );
            if op == SubwordOp::Extract {
                moved.lane_signed(0) as u32
            } else {
                moved.lane(0)
            }
        }
        SubwordOp::Pack => match lanes {
            Lanes::Half => exec_shuffle(
                rs1,
                rs2,
                shuffle_mask(&[(false, 0), (true, 0)], lanes),
                lanes,
            ),
            Lanes::Byte => {
                let sel = [(false, 0), (true, 0), (false, 2), (false, 3)];
                let low = exec_shuffle(rs1, rs2, shuffle_mask(&sel, lanes), lanes);
                (low & 0xFFFF) | (rd_old & 0xFFFF_0000)
            }
        },
    }
}
