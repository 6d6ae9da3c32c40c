//! One-dimensional kernels on 16-bit data: FIR filter, clipped vector add
//! and normalized fixed-point multiply.

use super::asm::{imm12, Asm};
use super::data::{pack, word, Q11_MAX, Q11_MIN};
use super::{Generated, Kernel, KernelData, KernelError, KernelSpec, OutputRegion, Variant};
use crate::exec::round_term;

fn align(v: usize) -> usize {
    (v + 8 + 3) & !3
}

/// Hardware loop over `n` iterations ending at `end`.
fn hwloop(a: &mut Asm, set: &str, n: usize, end: &str, count_reg: &str) {
    if n <= 4095 {
        a.op(format!("lp.setupi {set}, {n}, {end}"));
    } else {
        a.li(count_reg, n as i64);
        a.op(format!("lp.setup {set}, {count_reg}, {end}"));
    }
}

pub(super) fn generate(spec: &KernelSpec, data: &KernelData) -> Result<Generated, KernelError> {
    match spec.kernel {
        Kernel::Fir => fir(spec, data),
        _ => elementwise(spec, data),
    }
}

fn fir(spec: &KernelSpec, data: &KernelData) -> Result<Generated, KernelError> {
    let (n, taps) = (spec.dims.cols, spec.dims.depth);
    let x_addr = 0usize;
    let h_addr = align(x_addr + (n + taps - 1) * 2);
    let words = taps / 2;
    let odd = taps % 2 == 1;
    let h_image = match spec.variant {
        Variant::Builtin => {
            let mut w: Vec<i32> = (0..words)
                .map(|f| word(&data.b[2 * f..2 * f + 2], 2))
                .collect();
            if odd {
                w.push(data.b[taps - 1]);
            }
            pack(&w, 4)
        }
        _ => pack(&data.b, 2),
    };
    let y_addr = align(h_addr + h_image.len());
    let rnd = round_term(data.shift) as i64;

    let mut programs = Vec::with_capacity(spec.cores);
    for core in 0..spec.cores {
        let outs = spec.strip(n, core);
        let mut a = Asm::new();
        a.comment(&format!(
            "{} core {core}: outputs {}..{}",
            spec.label(),
            outs.start,
            outs.end
        ));
        if !outs.is_empty() {
            a.li("x9", (x_addr + outs.start * 2) as i64)
                .li("x10", (y_addr + outs.start * 2) as i64)
                .li("x11", h_addr as i64);
            match spec.variant {
                Variant::Baseline | Variant::Ext => {
                    let mac = spec.variant == Variant::Ext;
                    a.li("x18", -32768).li("x19", 32767).li("x20", rnd);
                    if mac {
                        hwloop(&mut a, "L0", outs.len(), "out_end", "x6");
                    } else {
                        a.li("x16", (x_addr + outs.end * 2) as i64).label("out");
                    }
                    a.op("mv x8, x20");
                    let (p, q) = (["x12", "x13"], ["x14", "x15"]);
                    let load = |a: &mut Asm, t: usize| -> Result<(), KernelError> {
                        a.op(format!("lh {}, {}(x9)", p[t % 2], imm12(2 * t)?));
                        a.op(format!("lh {}, {}(x11)", q[t % 2], imm12(2 * t)?));
                        Ok(())
                    };
                    load(&mut a, 0)?;
                    for t in 0..taps {
                        if t + 1 < taps {
                            load(&mut a, t + 1)?;
                        }
                        if mac {
                            a.op(format!("p.mac x8, {}, {}", p[t % 2], q[t % 2]));
                        } else {
                            a.op(format!("mul x7, {}, {}", p[t % 2], q[t % 2]));
                            a.op("add x8, x8, x7");
                        }
                    }
                    a.op(format!("srai x8, x8, {}", data.shift))
                        .op("blt x8, x18, clip_lo")
                        .op("blt x19, x8, clip_hi")
                        .label("clip_back");
                    if mac {
                        a.op("addi x9, x9, 2")
                            .label("out_end")
                            .op("p.sh x8, 2(x10!)");
                    } else {
                        a.op("sh x8, 0(x10)")
                            .op("addi x10, x10, 2")
                            .op("addi x9, x9, 2")
                            .op("bne x9, x16, out");
                    }
                    a.op("j kernel_exit")
                        .label("clip_lo")
                        .op("mv x8, x18")
                        .op("j clip_back")
                        .label("clip_hi")
                        .op("mv x8, x19")
                        .op("j clip_back");
                }
                Variant::Builtin => {
                    let steps = words + usize::from(odd);
                    let resident = steps <= 16;
                    let coef_reg = |s: usize| format!("x{}", 16 + s);
                    if resident {
                        for s in 0..steps {
                            a.op(format!("lw {}, {}(x11)", coef_reg(s), 4 * s));
                        }
                    }
                    a.li("x7", rnd);
                    hwloop(&mut a, "L0", outs.len(), "out_end", "x6");
                    a.op("mv x8, x7");
                    // the sample window and (if not resident) the taps are
                    // streamed with post-increment and rewound per output
                    let (p, q) = (["x12", "x13"], ["x14", "x15"]);
                    let load = |a: &mut Asm, s: usize| {
                        if s < words {
                            a.op(format!("p.lw {}, 4(x9!)", p[s % 2]));
                        } else {
                            a.op(format!("lh {}, 0(x9)", p[s % 2]));
                        }
                        if !resident {
                            a.op(format!("p.lw {}, 4(x11!)", q[s % 2]));
                        }
                    };
                    load(&mut a, 0);
                    for s in 0..steps {
                        if s + 1 < steps {
                            load(&mut a, s + 1);
                        }
                        let c = if resident {
                            coef_reg(s)
                        } else {
                            q[s % 2].to_string()
                        };
                        let op = if s < words { "pv.sdotp.sh" } else { "p.mac" };
                        a.op(format!("{op} x8, {}, {c}", p[s % 2]));
                    }
                    if !resident {
                        a.op(format!("addi x11, x11, -{}", 4 * steps));
                    }
                    a.op(format!("srai x8, x8, {}", data.shift))
                        .op("p.clip x8, x8, 16")
                        .op(format!("addi x9, x9, {}", 2 - 4 * words as i64))
                        .label("out_end")
                        .op("p.sh x8, 2(x10!)");
                }
            }
        }
        programs.push(a.finish(spec.cores)?);
    }
    Ok(Generated {
        spec: *spec,
        programs,
        image: vec![(x_addr as u32, pack(&data.a, 2)), (h_addr as u32, h_image)],
        output: OutputRegion {
            addr: y_addr as u32,
            count: n,
            elem_bytes: 2,
        },
        footprint: (y_addr + n * 2) as u32,
    })
}

fn elementwise(spec: &KernelSpec, data: &KernelData) -> Result<Generated, KernelError> {
    let n = spec.dims.cols;
    let a_addr = 0usize;
    let b_addr = align(a_addr + n * 2);
    let y_addr = align(b_addr + n * 2);
    let add = spec.kernel == Kernel::VecaddClip;
    let shift = data.shift;
    let rnd = round_term(shift) as i64;

    let mut programs = Vec::with_capacity(spec.cores);
    for core in 0..spec.cores {
        // strips are split in element pairs to keep word alignment
        let pairs = spec.strip(n.div_ceil(2), core);
        let (lo, hi) = (2 * pairs.start, (2 * pairs.end).min(n));
        let len = hi.saturating_sub(lo);
        let mut a = Asm::new();
        a.comment(&format!(
            "{} core {core}: elements {lo}..{hi}",
            spec.label()
        ));
        if len > 0 {
            a.li("x9", (a_addr + lo * 2) as i64)
                .li("x10", (b_addr + lo * 2) as i64)
                .li("x11", (y_addr + lo * 2) as i64);
            match (spec.variant, add) {
                (Variant::Baseline, _) => {
                    a.li("x16", (a_addr + hi * 2) as i64);
                    if add {
                        a.li("x18", Q11_MIN as i64).li("x19", Q11_MAX as i64);
                    } else {
                        a.li("x20", rnd);
                    }
                    a.label("elem")
                        .op("lh x12, 0(x9)")
                        .op("lh x13, 0(x10)")
                        .op("addi x9, x9, 2")
                        .op("addi x10, x10, 2");
                    if add {
                        a.op("add x12, x12, x13")
                            .op("blt x12, x18, clip_lo")
                            .op("blt x19, x12, clip_hi")
                            .label("clip_back");
                    } else {
                        a.op("mul x12, x12, x13")
                            .op("add x12, x12, x20")
                            .op(format!("srai x12, x12, {shift}"));
                    }
                    a.op("sh x12, 0(x11)")
                        .op("addi x11, x11, 2")
                        .op("bne x9, x16, elem");
                }
                (Variant::Ext, _) => {
                    if add {
                        a.li("x18", Q11_MIN as i64).li("x19", Q11_MAX as i64);
                    } else {
                        a.li("x20", rnd);
                    }
                    hwloop(&mut a, "L0", len, "elem_end", "x6");
                    a.op("p.lh x12, 2(x9!)").op("p.lh x13, 2(x10!)");
                    if add {
                        a.op("add x12, x12, x13")
                            .op("blt x12, x18, clip_lo")
                            .op("blt x19, x12, clip_hi")
                            .label("clip_back");
                    } else {
                        a.op("mul x12, x12, x13")
                            .op("add x12, x12, x20")
                            .op(format!("srai x12, x12, {shift}"));
                    }
                    a.label("elem_end").op("p.sh x12, 2(x11!)");
                }
                (Variant::Builtin, true) => {
                    a.li("x18", word(&[Q11_MIN, Q11_MIN], 2) as i64)
                        .li("x19", word(&[Q11_MAX, Q11_MAX], 2) as i64);
                    if len / 2 > 0 {
                        hwloop(&mut a, "L0", len / 2, "pair_end", "x6");
                        a.op("p.lw x12, 4(x9!)")
                            .op("p.lw x13, 4(x10!)")
                            .op("pv.add.h x12, x12, x13")
                            .op("pv.max.h x12, x12, x18")
                            .op("pv.min.h x12, x12, x19")
                            .label("pair_end")
                            .op("p.sw x12, 4(x11!)");
                    }
                    if len % 2 == 1 {
                        a.op("p.lh x12, 2(x9!)")
                            .op("p.lh x13, 2(x10!)")
                            .op("add x12, x12, x13")
                            .op("p.clip x12, x12, 12")
                            .op("p.sh x12, 2(x11!)");
                    }
                }
                (Variant::Builtin, false) => {
                    hwloop(&mut a, "L0", len, "elem_end", "x6");
                    a.op("p.lh x12, 2(x9!)")
                        .op("p.lh x13, 2(x10!)")
                        .op(format!("p.mulsRN x12, x12, x13, {shift}"))
                        .label("elem_end")
                        .op("p.sh x12, 2(x11!)");
                }
            }
            if add && spec.variant != Variant::Builtin {
                a.op("j kernel_exit")
                    .label("clip_lo")
                    .op("mv x12, x18")
                    .op("j clip_back")
                    .label("clip_hi")
                    .op("mv x12, x19")
                    .op("j clip_back");
            }
        }
        programs.push(a.finish(spec.cores)?);
    }
    Ok(Generated {
        spec: *spec,
        programs,
        image: vec![
            (a_addr as u32, pack(&data.a, 2)),
            (b_addr as u32, pack(&data.b, 2)),
        ],
        output: OutputRegion {
            addr: y_addr as u32,
            count: n,
            elem_bytes: 2,
        },
        footprint: (y_addr + n * 2) as u32,
    })
}
