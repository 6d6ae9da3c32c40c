//! Differential tests: every instruction family executed through the
//! assembler and `step` must agree with a separately written reference that
//! works lane by lane in exact 64/128-bit integers.

use crate::common::{OneShot, CASES};
use rand::seq::SliceRandom;
use rand::Rng;

const MOD32: i128 = 1 << 32;

fn wrap(v: i128) -> u32 {
    v.rem_euclid(MOD32) as u32
}

/// Interesting operand values mixed into the uniform stream.
fn operand(rng: &mut impl Rng) -> u32 {
    const EDGES: [u32; 12] = [
        0,
        1,
        2,
        0x7F,
        0x80,
        0xFF,
        0x7FFF,
        0x8000,
        0xFFFF,
        0x7FFF_FFFF,
        0x8000_0000,
        0xFFFF_FFFF,
    ];
    match rng.gen_range(0..8) {
        0 => *EDGES.choose(rng).unwrap(),
        1 => rng.gen_range(0..64),
        2 => (rng.gen_range(-64i32..64)) as u32,
        // lane-structured values: each lane drawn from the edges
        3 => (0..4).fold(0, |w, i| {
            w | ((*EDGES.choose(rng).unwrap() & 0xFF) << (8 * i))
        }),
        _ => rng.gen(),
    }
}

// ---- lane reference --------------------------------------------------------

#[derive(Clone, Copy, Debug)]
struct Geo {
    bits: u32,
}

const BYTE: Geo = Geo { bits: 8 };
const HALF: Geo = Geo { bits: 16 };

impl Geo {
    fn n(self) -> u32 {
        32 / self.bits
    }
    fn suffix(self) -> &'static str {
        if self.bits == 8 {
            "b"
        } else {
            "h"
        }
    }
    fn u(self, w: u32, i: u32) -> i128 {
        ((w as u64 >> (i * self.bits)) & ((1u64 << self.bits) - 1)) as i128
    }
    fn s(self, w: u32, i: u32) -> i128 {
        let v = self.u(w, i);
        if v >= 1 << (self.bits - 1) {
            v - (1 << self.bits)
        } else {
            v
        }
    }
    fn join(self, lanes: &[i128]) -> u32 {
        let m = (1i128 << self.bits) - 1;
        lanes.iter().enumerate().fold(0u32, |w, (i, &v)| {
            w | (((v & m) as u32) << (i as u32 * self.bits))
        })
    }
}

const VEC_OPS: [&str; 13] = [
    "add", "sub", "avg", "min", "max", "srl", "sra", "sll", "and", "or", "xor", "cmpeq", "cmpgt",
];

fn vec_lane(op: &str, g: Geo, ua: i128, ub: i128, sa: i128, sb: i128) -> i128 {
    let sh = (ub % g.bits as i128) as u32;
    let all = (1i128 << g.bits) - 1;
    match op {
        "add" => ua + ub,
        "sub" => ua - ub,
        "avg" => (sa + sb).div_euclid(2),
        "min" => sa.min(sb),
        "max" => sa.max(sb),
        "srl" => ua >> sh,
        "sra" => sa >> sh,
        "sll" => ua << sh,
        "and" => ua & ub,
        "or" => ua | ub,
        "xor" => ua ^ ub,
        "cmpeq" => {
            if ua == ub {
                all
            } else {
                0
            }
        }
        "cmpgt" => {
            if sa > sb {
                all
            } else {
                0
            }
        }
        _ => unreachable!(),
    }
}

fn vec_ref(op: &str, g: Geo, a: u32, b: u32) -> u32 {
    let lanes: Vec<i128> = (0..g.n())
        .map(|i| vec_lane(op, g, g.u(a, i), g.u(b, i), g.s(a, i), g.s(b, i)))
        .collect();
    g.join(&lanes)
}

fn splat(g: Geo, v: i128) -> u32 {
    g.join(&vec![v; g.n() as usize])
}

pub fn vector_alu_matches_lane_reference() {
    let mut rng = crate::common::rng(1);
    let mut sim = OneShot::new();
    for _ in 0..CASES {
        let op = *VEC_OPS.choose(&mut rng).unwrap();
        let g = if rng.gen() { BYTE } else { HALF };
        let a = operand(&mut rng);
        let b = operand(&mut rng);
        let (src, expect) = match rng.gen_range(0..3) {
            0 => (
                format!("pv.{op}.{} x5, x6, x7", g.suffix()),
                vec_ref(op, g, a, b),
            ),
            1 => (
                format!("pv.{op}.sc.{} x5, x6, x7", g.suffix()),
                vec_ref(op, g, a, splat(g, g.u(b, 0))),
            ),
            _ => {
                let imm = rng.gen_range(-32i128..32);
                (
                    format!("pv.{op}.sci.{} x5, x6, {imm}", g.suffix()),
                    vec_ref(op, g, a, splat(g, imm)),
                )
            }
        };
        assert_eq!(sim.rd(&src, 0, a, b, 0), expect, "{src} a={a:#x} b={b:#x}");
    }
}

pub fn dot_products_match_exact_sum() {
    let mut rng = crate::common::rng(2);
    let mut sim = OneShot::new();
    for _ in 0..CASES {
        let g = if rng.gen() { BYTE } else { HALF };
        let unsigned = rng.gen::<bool>();
        let acc_form = rng.gen::<bool>();
        let scalar = rng.gen::<bool>();
        let (a, b, acc) = (operand(&mut rng), operand(&mut rng), operand(&mut rng));
        let ext = |w, i| if unsigned { g.u(w, i) } else { g.s(w, i) };
        let bv = if scalar { splat(g, g.u(b, 0)) } else { b };
        let sum: i128 = (0..g.n()).map(|i| ext(a, i) * ext(bv, i)).sum();
        let expect = wrap(sum + if acc_form { acc as i128 } else { 0 });
        let src = format!(
            "pv.{}{}.{}{} x5, x6, x7",
            if acc_form { "sdotp" } else { "dotp" },
            if scalar { ".sc" } else { "" },
            if unsigned { "u" } else { "s" },
            g.suffix()
        );
        assert_eq!(
            sim.rd(&src, acc, a, b, 0),
            expect,
            "{src} a={a:#x} b={b:#x} acc={acc:#x}"
        );
    }
}

// ---- fixed point -----------------------------------------------------------

fn s16(v: u32) -> i128 {
    v as u16 as i16 as i128
}

fn rnd(i: u32) -> i128 {
    if i == 0 {
        0
    } else {
        1i128 << (i - 1)
    }
}

/// The value is reduced to 32 bits before normalization, exactly as the
/// `add; addi; srai` sequence the instruction replaces.
fn sra32(v: i128, i: u32) -> u32 {
    ((wrap(v) as i32 as i128) >> i) as u32
}

fn srl32(v: i128, i: u32) -> u32 {
    wrap(v) >> i
}

pub fn fixed_point_matches_reference() {
    let mut rng = crate::common::rng(3);
    let mut sim = OneShot::new();
    let ops = [
        "p.addRN", "p.addRNu", "p.subRN", "p.clip", "p.clipu", "p.mulsRN", "p.muluRN", "p.mac",
        "p.msu",
    ];
    for _ in 0..CASES {
        let op = *ops.choose(&mut rng).unwrap();
        let (a, b, acc) = (operand(&mut rng), operand(&mut rng), operand(&mut rng));
        let (sa, ua) = (a as i32 as i128, a as i128);
        let (sb, ub) = (b as i32 as i128, b as i128);
        let (src, expect) = match op {
            "p.clip" | "p.clipu" => {
                let i = rng.gen_range(1..=31u32);
                let hi = (1i128 << (i - 1)) - 1;
                let lo = if op == "p.clip" {
                    -(1i128 << (i - 1))
                } else {
                    0
                };
                (format!("{op} x5, x6, {i}"), wrap(sa.clamp(lo, hi)))
            }
            "p.mac" => (
                "p.mac x5, x6, x7".into(),
                wrap(acc as i128 + s16(a) * s16(b)),
            ),
            "p.msu" => (
                "p.msu x5, x6, x7".into(),
                wrap(acc as i128 - s16(a) * s16(b)),
            ),
            _ => {
                let i = rng.gen_range(0..=31u32);
                let v = match op {
                    "p.addRN" => sra32(sa + sb + rnd(i), i),
                    "p.addRNu" => srl32(ua + ub + rnd(i), i),
                    "p.subRN" => sra32(sa - sb + rnd(i), i),
                    "p.mulsRN" => sra32(s16(a) * s16(b) + rnd(i), i),
                    "p.muluRN" => srl32((ua & 0xFFFF) * (ub & 0xFFFF) + rnd(i), i),
                    _ => unreachable!(),
                };
                (format!("{op} x5, x6, x7, {i}"), v)
            }
        };
        assert_eq!(
            sim.rd(&src, acc, a, b, 0),
            expect,
            "{src} a={a:#x} b={b:#x} acc={acc:#x}"
        );
    }
}

// ---- bit manipulation ------------------------------------------------------

fn bit(w: u32, k: u32) -> u32 {
    (w >> k) & 1
}

fn bit_ref(op: &str, a: u32, old: u32, len: u32, off: u32) -> u32 {
    let in_field = |k: u32| k >= off && k < off + len;
    match op {
        "p.extract" | "p.extractu" => {
            let mut v = 0u32;
            for k in 0..32 {
                let src = if k < len {
                    bit(a, off + k)
                } else if op == "p.extract" {
                    bit(a, off + len - 1)
                } else {
                    0
                };
                v |= src << k;
            }
            v
        }
        "p.insert" => (0..32).fold(0, |v, k| {
            let b = if in_field(k) {
                bit(a, k - off)
            } else {
                bit(old, k)
            };
            v | (b << k)
        }),
        "p.bclr" => (0..32).fold(0, |v, k| v | (if in_field(k) { 0 } else { bit(a, k) } << k)),
        "p.bset" => (0..32).fold(0, |v, k| v | (if in_field(k) { 1 } else { bit(a, k) } << k)),
        "p.cnt" => (0..32).map(|k| bit(a, k)).sum(),
        "p.ff1" => (0..32).find(|&k| bit(a, k) == 1).unwrap_or(32),
        "p.fl1" => (0..32).rev().find(|&k| bit(a, k) == 1).unwrap_or(32),
        "p.clb" => {
            if a == 0 {
                0
            } else {
                let sign = bit(a, 31);
                (0..31).rev().take_while(|&k| bit(a, k) == sign).count() as u32
            }
        }
        _ => unreachable!(),
    }
}

pub fn bit_manipulation_matches_bitwise_reference() {
    let mut rng = crate::common::rng(4);
    let mut sim = OneShot::new();
    let fields = ["p.extract", "p.extractu", "p.insert", "p.bclr", "p.bset"];
    let plain = ["p.cnt", "p.ff1", "p.fl1", "p.clb"];
    for _ in 0..CASES {
        let (a, old) = (operand(&mut rng), operand(&mut rng));
        let (src, expect) = if rng.gen() {
            let op = *fields.choose(&mut rng).unwrap();
            let len = rng.gen_range(1..=32u32);
            let off = rng.gen_range(0..=32 - len).min(31);
            (
                format!("{op} x5, x6, {len}, {off}"),
                bit_ref(op, a, old, len, off),
            )
        } else {
            let op = *plain.choose(&mut rng).unwrap();
            (format!("{op} x5, x6"), bit_ref(op, a, old, 0, 0))
        };
        assert_eq!(
            sim.rd(&src, old, a, 0, 0),
            expect,
            "{src} a={a:#x} old={old:#x}"
        );
    }
}

// ---- multiply / divide -----------------------------------------------------

fn muldiv_ref(op: &str, a: u32, b: u32) -> u32 {
    let (sa, sb, ua, ub) = (a as i32 as i128, b as i32 as i128, a as i128, b as i128);
    match op {
        "mul" => wrap(sa * sb),
        "mulh" => wrap((sa * sb) >> 32),
        "mulhu" => wrap((ua * ub) >> 32),
        "div" if sb == 0 => u32::MAX,
        "div" => {
            let q = sa / sb; // truncating, exact in i128
            wrap(if q == 1 << 31 { -(1i128 << 31) } else { q })
        }
        "divu" if ub == 0 => u32::MAX,
        "divu" => wrap(ua / ub),
        "rem" if sb == 0 => a,
        "rem" => wrap(sa % sb),
        "remu" if ub == 0 => a,
        "remu" => wrap(ua % ub),
        _ => unreachable!(),
    }
}

pub fn multiply_divide_matches_reference() {
    let mut rng = crate::common::rng(5);
    let mut sim = OneShot::new();
    let ops = ["mul", "mulh", "mulhu", "div", "divu", "rem", "remu"];
    for _ in 0..CASES {
        let op = *ops.choose(&mut rng).unwrap();
        let (a, b) = (operand(&mut rng), operand(&mut rng));
        let src = format!("{op} x5, x6, x7");
        assert_eq!(
            sim.rd(&src, 0, a, b, 0),
            muldiv_ref(op, a, b),
            "{src} a={a:#x} b={b:#x}"
        );
    }
}

// ---- base integer ALU ------------------------------------------------------

pub fn base_alu_matches_reference() {
    let mut rng = crate::common::rng(6);
    let mut sim = OneShot::new();
    let reg_ops = [
        "add", "sub", "and", "or", "xor", "sll", "srl", "sra", "slt", "sltu",
    ];
    let imm_ops = [
        "addi", "andi", "ori", "xori", "slli", "srli", "srai", "slti",
    ];
    for _ in 0..CASES {
        let (a, b) = (operand(&mut rng), operand(&mut rng));
        let (src, op, rhs) = if rng.gen() {
            let op = *reg_ops.choose(&mut rng).unwrap();
            (format!("{op} x5, x6, x7"), op, b)
        } else {
            let op = *imm_ops.choose(&mut rng).unwrap();
            let imm: i32 = if op.starts_with('s') && op != "slti" {
                rng.gen_range(0..32)
            } else {
                rng.gen_range(-2048..2048)
            };
            (
                format!("{op} x5, x6, {imm}"),
                op.trim_end_matches('i'),
                imm as u32,
            )
        };
        let (sa, sb) = (a as i32 as i128, rhs as i32 as i128);
        let sh = rhs % 32;
        let expect = match op {
            "add" => wrap(sa + sb),
            "sub" => wrap(sa - sb),
            "and" => a & rhs,
            "or" => a | rhs,
            "xor" => a ^ rhs,
            "sll" => wrap((a as i128) << sh),
            "srl" => a >> sh,
            "sra" => wrap(sa >> sh),
            "slt" => (sa < sb) as u32,
            "sltu" => (a < rhs) as u32,
            _ => unreachable!("{op}"),
        };
        assert_eq!(sim.rd(&src, 0, a, b, 0), expect, "{src} a={a:#x} b={b:#x}");
    }
}

// ---- sub-word moves --------------------------------------------------------

pub fn subword_moves_match_lane_reference() {
    let mut rng = crate::common::rng(7);
    let mut sim = OneShot::new();
    for _ in 0..CASES {
        let g = if rng.gen() { BYTE } else { HALF };
        let n = g.n();
        let idx_bits = if g.bits == 8 { 2 } else { 1 };
        let (a, b, m, old) = (rng.gen(), rng.gen(), operand(&mut rng), rng.gen());
        let sfx = g.suffix();
        let (src, expect) = match rng.gen_range(0..6) {
            0 => {
                let lanes: Vec<i128> = (0..n)
                    .map(|j| {
                        let sel = g.u(m, j) as u32;
                        let idx = sel & ((1 << idx_bits) - 1);
                        let from_a = (sel >> idx_bits) & 1 == 1;
                        g.u(if from_a { a } else { b }, idx)
                    })
                    .collect();
                (format!("pv.shuffle2.{sfx} x5, x6, x7, x8"), g.join(&lanes))
            }
            1 => {
                let lanes: Vec<i128> = (0..n).map(|j| g.u(a, (g.u(m, j) as u32) % n)).collect();
                (format!("pv.shuffle.{sfx} x5, x6, x8"), g.join(&lanes))
            }
            2 => {
                let k = rng.gen_range(0..n);
                let lanes: Vec<i128> = (0..n)
                    .map(|j| if j == k { g.u(a, 0) } else { g.u(old, j) })
                    .collect();
                (format!("pv.insert.{sfx} x5, x6, {k}"), g.join(&lanes))
            }
            3 => {
                let k = rng.gen_range(0..n);
                (format!("pv.extract.{sfx} x5, x6, {k}"), wrap(g.s(a, k)))
            }
            4 => {
                let k = rng.gen_range(0..n);
                (format!("pv.extractu.{sfx} x5, x6, {k}"), g.u(a, k) as u32)
            }
            _ => {
                let expect = if g.bits == 16 {
                    HALF.join(&[HALF.u(b, 0), HALF.u(a, 0)])
                } else {
                    BYTE.join(&[BYTE.u(b, 0), BYTE.u(a, 0), BYTE.u(old, 2), BYTE.u(old, 3)])
                };
                (format!("pv.pack.{sfx} x5, x6, x7"), expect)
            }
        };
        assert_eq!(
            sim.rd(&src, old, a, b, m),
            expect,
            "{src} a={a:#x} b={b:#x} mask={m:#x} old={old:#x}"
        );
    }
}

// ---- structural properties -------------------------------------------------

pub fn vector_lanes_are_isolated() {
    let mut rng = crate::common::rng(8);
    let mut sim = OneShot::new();
    for _ in 0..CASES {
        let op = *VEC_OPS.choose(&mut rng).unwrap();
        let g = if rng.gen() { BYTE } else { HALF };
        let src = format!("pv.{op}.{} x5, x6, x7", g.suffix());
        let (a, b) = (operand(&mut rng), operand(&mut rng));
        let lane = rng.gen_range(0..g.n());
        let noise = rng.gen_range(1..(1u32 << g.bits)) << (lane * g.bits);
        let (a2, b2) = if rng.gen() {
            (a ^ noise, b)
        } else {
            (a, b ^ noise)
        };
        let before = sim.rd(&src, 0, a, b, 0);
        let after = sim.rd(&src, 0, a2, b2, 0);
        let keep = !(((1u64 << g.bits) - 1) << (lane * g.bits)) as u32;
        assert_eq!(before & keep, after & keep, "{src} lane {lane} leaked");
    }
}

pub fn clip_is_idempotent_and_bounded() {
    let mut rng = crate::common::rng(9);
    let mut sim = OneShot::new();
    for _ in 0..CASES {
        let i = rng.gen_range(1..=31u32);
        let x = operand(&mut rng);
        let src = format!("p.clip x5, x6, {i}");
        let once = sim.rd(&src, 0, x, 0, 0);
        let twice = sim.rd(&src, 0, once, 0, 0);
        assert_eq!(once, twice);
        let v = once as i32 as i64;
        assert!(
            (-(1i64 << (i - 1))..(1i64 << (i - 1))).contains(&v),
            "clip({x:#x},{i}) = {v}"
        );
        if (-(1i64 << (i - 1))..(1i64 << (i - 1))).contains(&(x as i32 as i64)) {
            assert_eq!(once, x, "in-range values pass through");
        }
    }
}

pub fn division_identity_holds() {
    let mut rng = crate::common::rng(10);
    let mut sim = OneShot::new();
    for _ in 0..CASES {
        let (a, b) = (operand(&mut rng), operand(&mut rng));
        if b == 0 {
            continue;
        }
        let q = sim.rd("div x5, x6, x7", 0, a, b, 0);
        let rem = sim.rd("rem x5, x6, x7", 0, a, b, 0);
        assert_eq!(
            q.wrapping_mul(b).wrapping_add(rem),
            a,
            "signed {a:#x}/{b:#x}"
        );
        let (ri, bi) = (rem as i32 as i64, b as i32 as i64);
        assert!(ri.abs() < bi.abs());
        assert!(
            ri == 0 || (ri < 0) == ((a as i32) < 0),
            "remainder takes the dividend's sign"
        );
        let qu = sim.rd("divu x5, x6, x7", 0, a, b, 0);
        let ru = sim.rd("remu x5, x6, x7", 0, a, b, 0);
        assert_eq!(
            qu.wrapping_mul(b).wrapping_add(ru),
            a,
            "unsigned {a:#x}/{b:#x}"
        );
        assert!(ru < b);
    }
}

pub fn shuffle_outputs_come_from_inputs() {
    let mut rng = crate::common::rng(11);
    let mut sim = OneShot::new();
    for _ in 0..CASES {
        let g = if rng.gen() { BYTE } else { HALF };
        let (a, b, m): (u32, u32, u32) = (rng.gen(), rng.gen(), rng.gen());
        let out = sim.rd(
            &format!("pv.shuffle2.{} x5, x6, x7, x8", g.suffix()),
            0,
            a,
            b,
            m,
        );
        for j in 0..g.n() {
            let v = g.u(out, j);
            assert!(
                (0..g.n()).any(|i| g.u(a, i) == v || g.u(b, i) == v),
                "lane {j} of {out:#x} not from {a:#x}/{b:#x}"
            );
        }
    }
}

pub fn writes_to_x0_leave_registers_unchanged() {
    let mut rng = crate::common::rng(12);
    let mut sim = OneShot::new();
    let forms = [
        "add x0, x6, x7",
        "addi x0, x6, 5",
        "mul x0, x6, x7",
        "div x0, x6, x7",
        "pv.sdotp.sb x0, x6, x7",
        "p.mac x0, x6, x7",
        "p.clip x0, x6, 8",
        "pv.shuffle2.b x0, x6, x7, x8",
        "p.cnt x0, x6",
        "lui x0, 5",
        "pv.add.h x0, x6, x7",
    ];
    for _ in 0..CASES / 10 {
        let src = *forms.choose(&mut rng).unwrap();
        let regs: Vec<(u8, u32)> = (1..32).map(|i| (i, rng.gen())).collect();
        let core = sim.run(src, &regs);
        assert_eq!(core.regs()[0], 0);
        for &(i, v) in &regs {
            assert_eq!(core.regs()[i as usize], v, "{src} touched x{i}");
        }
    }
}
