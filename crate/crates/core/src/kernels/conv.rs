//! 2-D convolution over the image interior, normalized and clipped to the
//! element range.

use crate::exec::{round_term, shuffle_mask};
use crate::isa::Lanes;

use super::asm::{imm12, Asm};
use super::data::{pack, word};
use super::{Elem, Generated, KernelData, KernelError, KernelSpec, OutputRegion, Variant};

const COEF_BYTES: u32 = 256;

/// Image rows are padded by one word so that vertically adjacent pixels
/// (and the strips of different cores) fall into different banks.
pub(super) fn row_pitch(spec: &KernelSpec) -> usize {
    ((spec.dims.cols * spec.elem.bytes() + 3) & !3) + 4
}

fn image_rows(spec: &KernelSpec, a: &[i32]) -> Vec<u8> {
    let (cols, pitch) = (spec.dims.cols, row_pitch(spec));
    let mut out = Vec::with_capacity(spec.dims.rows * pitch);
    for row in a.chunks(cols) {
        out.extend(pack(row, spec.elem.bytes()));
        out.resize(out.len().next_multiple_of(pitch), 0);
    }
    out
}

struct Layout {
    input: u32,
    coef: u32,
    output: u32,
    end: u32,
}

fn layout(spec: &KernelSpec, k: usize) -> Layout {
    let eb = spec.elem.bytes() as u32;
    let d = spec.dims;
    let input = 0;
    // pad: word loads may read a few bytes past the last row
    let coef = (input + (d.rows * row_pitch(spec)) as u32 + 8 + 3) & !3;
    let output = coef + COEF_BYTES;
    let outs = ((d.rows + 1 - k) * (d.cols + 1 - k)) as u32 * eb;
    Layout {
        input,
        coef,
        output,
        end: output + outs,
    }
}

/// Coefficient image in the format each variant's code expects.
fn coef_image(spec: &KernelSpec, k: usize, c: &[i32]) -> Vec<u8> {
    let eb = spec.elem.bytes();
    let at = |i: usize, j: usize| if j < k { c[i * k + j] } else { 0 };
    match (spec.variant, spec.elem, k) {
        (Variant::Baseline | Variant::Ext, _, _) => pack(c, eb),
        (Variant::Builtin, Elem::I8, 3) => {
            let words: Vec<i32> = (0..3)
                .map(|i| word(&[at(i, 0), at(i, 1), at(i, 2), 0], 1))
                .collect();
            pack(&words, 4)
        }
        (Variant::Builtin, Elem::I8, 5) => {
            let mut words: Vec<i32> = (0..5)
                .map(|i| word(&[at(i, 0), at(i, 1), at(i, 2), at(i, 3)], 1))
                .collect();
            words.push(word(&[at(0, 4), at(1, 4), at(2, 4), at(3, 4)], 1));
            words.push(word(&[0, 0, 0, at(4, 4)], 1));
            pack(&words, 4)
        }
        (Variant::Builtin, Elem::I8, _) => {
            let words: Vec<i32> = (0..k)
                .flat_map(|i| (0..k.div_ceil(4)).map(move |f| (i, f)))
                .map(|(i, f)| {
                    word(
                        &[
                            at(i, 4 * f),
                            at(i, 4 * f + 1),
                            at(i, 4 * f + 2),
                            at(i, 4 * f + 3),
                        ],
                        1,
                    )
                })
                .collect();
            pack(&words, 4)
        }
        (Variant::Builtin, Elem::I16, _) => {
            let mut words = Vec::new();
            for i in 0..k {
                for f in 0..k / 2 {
                    words.push(word(&[at(i, 2 * f), at(i, 2 * f + 1)], 2));
                }
                if k % 2 == 1 {
                    words.push(at(i, k - 1));
                }
            }
            pack(&words, 4)
        }
    }
}

pub(super) fn generate(spec: &KernelSpec, data: &KernelData) -> Result<Generated, KernelError> {
    let k = spec.kernel.conv_size().expect("conv kernel");
    let l = layout(spec, k);
    let d = spec.dims;
    let (oh, ow) = (d.rows + 1 - k, d.cols + 1 - k);
    let mut programs = Vec::with_capacity(spec.cores);
    for core in 0..spec.cores {
        let rows = spec.strip(oh, core);
        let mut a = Asm::new();
        a.comment(&format!(
            "{} core {core}: output rows {}..{}",
            spec.label(),
            rows.start,
            rows.end
        ));
        if !rows.is_empty() {
            let ctx = Ctx {
                spec,
                k,
                pitch: row_pitch(spec),
                ow,
                nrows: rows.len(),
                pin: l.input as usize + rows.start * row_pitch(spec),
                pout: l.output as usize + rows.start * ow * spec.elem.bytes(),
                coef: l.coef as usize,
                shift: data.shift,
            };
            match (spec.variant, spec.elem, k) {
                (Variant::Baseline, ..) => scalar(&mut a, &ctx, false)?,
                (Variant::Ext, ..) => scalar(&mut a, &ctx, true)?,
                (Variant::Builtin, Elem::I8, 3) => columns3(&mut a, &ctx)?,
                (Variant::Builtin, Elem::I8, 5) => pairs5(&mut a, &ctx)?,
                (Variant::Builtin, ..) => packed_rows(&mut a, &ctx)?,
            }
        }
        programs.push(a.finish(spec.cores)?);
    }
    let image = vec![
        (l.input, image_rows(spec, &data.a)),
        (l.coef, coef_image(spec, k, &data.b)),
    ];
    Ok(Generated {
        spec: *spec,
        programs,
        image,
        output: OutputRegion {
            addr: l.output,
            count: oh * ow,
            elem_bytes: spec.elem.bytes(),
        },
        footprint: l.end,
    })
}

struct Ctx<'a> {
    spec: &'a KernelSpec,
    k: usize,
    /// Bytes from one image row to the next.
    pitch: usize,
    ow: usize,
    nrows: usize,
    pin: usize,
    pout: usize,
    coef: usize,
    shift: u8,
}

impl Ctx<'_> {
    fn eb(&self) -> usize {
        self.spec.elem.bytes()
    }

    /// Pointer adjustment from the end of one output row's window to the
    /// start of the next row.
    fn row_skip(&self) -> usize {
        self.pitch - self.ow * self.eb()
    }

    fn rnd(&self) -> i64 {
        round_term(self.shift) as i64
    }

    fn sfx(&self) -> &'static str {
        self.spec.elem.suffix()
    }

    fn loop_count(&self, n: usize) -> Result<usize, KernelError> {
        if n > 4095 {
            return Err(KernelError::Unsupported(format!(
                "loop count {n} exceeds 4095"
            )));
        }
        Ok(n)
    }
}

/// Baseline (`mac == false`) and ext: one multiply-accumulate per tap with
/// a branch-based clip.
fn scalar(a: &mut Asm, c: &Ctx, mac: bool) -> Result<(), KernelError> {
    let (eb, k, s) = (c.eb(), c.k, c.sfx());
    a.li("x9", c.pin as i64)
        .li("x10", c.pout as i64)
        .li("x11", c.coef as i64)
        .li("x18", c.spec.elem.min() as i64)
        .li("x19", c.spec.elem.max() as i64)
        .li("x20", c.rnd())
        .li("x17", c.nrows as i64);
    if mac {
        a.op("lp.setup L1, x17, row_end");
        a.op(format!("lp.setupi L0, {}, pix_end", c.loop_count(c.ow)?));
    } else {
        a.label("row");
        a.addi("x16", "x9", (c.ow * eb) as i64, "x5");
        a.label("pix");
    }
    a.op("mv x8, x20");
    let taps: Vec<(usize, usize)> = (0..k * k)
        .map(|t| ((t / k) * c.pitch + (t % k) * eb, t * eb))
        .collect();
    let (p, q) = (["x12", "x13"], ["x14", "x15"]);
    let load = |a: &mut Asm, t: usize| -> Result<(), KernelError> {
        a.op(format!("l{s} {}, {}(x9)", p[t % 2], imm12(taps[t].0)?));
        a.op(format!("l{s} {}, {}(x11)", q[t % 2], imm12(taps[t].1)?));
        Ok(())
    };
    load(a, 0)?;
    for t in 0..taps.len() {
        if t + 1 < taps.len() {
            load(a, t + 1)?;
        }
        if mac {
            a.op(format!("p.mac x8, {}, {}", p[t % 2], q[t % 2]));
        } else {
            a.op(format!("mul x7, {}, {}", p[t % 2], q[t % 2]));
            a.op("add x8, x8, x7");
        }
    }
    a.op(format!("srai x8, x8, {}", c.shift))
        .op("blt x8, x18, clip_lo")
        .op("blt x19, x8, clip_hi")
        .label("clip_back");
    if mac {
        a.op(format!("addi x9, x9, {eb}"))
            .label("pix_end")
            .op(format!("p.s{s} x8, {eb}(x10!)"))
            .label("row_end")
            .op(format!("addi x9, x9, {}", c.row_skip()));
    } else {
        a.op(format!("s{s} x8, 0(x10)"))
            .op(format!("addi x10, x10, {eb}"))
            .op(format!("addi x9, x9, {eb}"))
            .op("bne x9, x16, pix")
            .op(format!("addi x9, x9, {}", c.row_skip()))
            .op("addi x17, x17, -1")
            .op("bne x17, x0, row");
    }
    a.op("j kernel_exit")
        .label("clip_lo")
        .op("mv x8, x18")
        .op("j clip_back")
        .label("clip_hi")
        .op("mv x8, x19")
        .op("j clip_back");
    Ok(())
}

/// 3x3 bytes, column-major: three filter rows stay in registers, each
/// pixel needs a single new word load and three dot products. The row
/// window rotates through three registers, so the loop is unrolled 3x.
fn columns3(a: &mut Asm, c: &Ctx) -> Result<(), KernelError> {
    const R: [&str; 3] = ["x12", "x13", "x14"];
    let w = imm12(c.pitch)?;
    let ow = imm12(c.ow)?;
    let pixel = |a: &mut Asm, j: usize, end: Option<&str>| {
        a.op(format!("p.lw {}, {w}(x9!)", R[(j + 2) % 3]))
            .op(format!("addi x8, x0, {}", c.rnd()));
        for (t, coef) in ["x16", "x17", "x18"].iter().enumerate() {
            a.op(format!("pv.sdotp.sb x8, {}, {coef}", R[(j + t) % 3]));
        }
        a.op(format!("srai x8, x8, {}", c.shift))
            .op("p.clip x8, x8, 8");
        if let Some(l) = end {
            a.label(l);
        }
        a.op(format!("p.sb x8, {ow}(x10!)"));
    };
    a.li("x11", c.coef as i64)
        .op("lw x16, 0(x11)")
        .op("lw x17, 4(x11)")
        .op("lw x18, 8(x11)")
        .li("x21", c.pin as i64)
        .li("x22", c.pout as i64)
        .op(format!("lp.setupi L1, {}, col_end", c.loop_count(c.ow)?))
        .op("mv x9, x21")
        .op("mv x10, x22")
        .op(format!("p.lw x12, {w}(x9!)"))
        .op(format!("p.lw x13, {w}(x9!)"));
    if c.nrows / 3 > 0 {
        a.op(format!(
            "lp.setupi L0, {}, pix_end",
            c.loop_count(c.nrows / 3)?
        ));
        pixel(a, 0, None);
        pixel(a, 1, None);
        pixel(a, 2, Some("pix_end"));
    }
    for j in 0..c.nrows % 3 {
        pixel(a, j, None);
    }
    a.op("addi x21, x21, 1")
        .label("col_end")
        .op("addi x22, x22, 1");
    Ok(())
}

/// 5x5 bytes, two pixels per iteration. Columns 0..3 of each filter row
/// are one dot product; column 4 is gathered from the neighbouring
/// window's words with shuffles (lane 3 of each row word).
fn pairs5(a: &mut Asm, c: &Ctx) -> Result<(), KernelError> {
    const A: [&str; 5] = ["x16", "x17", "x18", "x19", "x20"];
    const B: [&str; 5] = ["x21", "x22", "x23", "x24", "x25"];
    const C: [&str; 5] = ["x26", "x27", "x28", "x29", "x30"];
    let sel = |s: &[(bool, usize)]| shuffle_mask(s, Lanes::Byte) as i32 as i64;
    let m1 = sel(&[(true, 3), (false, 3), (true, 3), (false, 3)]);
    let m2 = sel(&[(true, 0), (true, 1), (false, 2), (false, 3)]);
    let w = c.pitch;
    a.li("x14", c.coef as i64);
    for (i, r) in C.iter().enumerate() {
        a.op(format!("lw {r}, {}(x14)", 4 * i));
    }
    a.op("lw x31, 20(x14)")
        .op("lw x7, 24(x14)")
        .li("x12", m1)
        .li("x13", m2)
        .li("x9", c.pin as i64)
        .li("x10", c.pout as i64)
        .li("x6", c.nrows as i64)
        .op("lp.setup L1, x6, row_end");
    let loads = |a: &mut Asm, regs: &[&str; 5], dx: usize| -> Result<(), KernelError> {
        for (r, reg) in regs.iter().enumerate() {
            a.op(format!("lw {reg}, {}(x9)", imm12(r * w + dx)?));
        }
        Ok(())
    };
    // one pixel from row words `rows` and column source `col`
    let pixel = |a: &mut Asm, rows: &[&str; 5], col: &[&str; 5]| {
        a.op(format!("addi x8, x0, {}", c.rnd()));
        for (r, cr) in rows.iter().zip(C) {
            a.op(format!("pv.sdotp.sb x8, {r}, {cr}"));
        }
        a.op(format!("pv.shuffle2.b x11, {}, {}, x12", col[0], col[1]))
            .op(format!("pv.shuffle2.b x15, {}, {}, x12", col[2], col[3]))
            .op("pv.shuffle2.b x11, x11, x15, x13")
            .op("pv.sdotp.sb x8, x11, x31")
            .op(format!("pv.sdotp.sb x8, {}, x7", col[4]))
            .op(format!("srai x8, x8, {}", c.shift))
            .op("p.clip x8, x8, 8");
    };
    loads(a, &A, 0)?;
    let pairs = c.ow / 2;
    if pairs > 0 {
        a.op(format!("lp.setupi L0, {}, pair_end", c.loop_count(pairs)?));
        loads(a, &B, 1)?;
        pixel(a, &A, &B);
        a.op("p.sb x8, 1(x10!)");
        loads(a, &A, 2)?;
        pixel(a, &B, &A);
        a.op("addi x9, x9, 2")
            .label("pair_end")
            .op("p.sb x8, 1(x10!)");
    }
    if c.ow % 2 == 1 {
        loads(a, &B, 1)?;
        pixel(a, &A, &B);
        a.op("p.sb x8, 1(x10!)").op("addi x9, x9, 1");
    }
    a.label("row_end")
        .op(format!("addi x9, x9, {}", c.row_skip()));
    Ok(())
}

/// Generic packed rows: each filter row is covered by word dot products
/// (the last byte word zero-padded) plus, for odd 16-bit widths, one
/// scalar multiply-accumulate.
fn packed_rows(a: &mut Asm, c: &Ctx) -> Result<(), KernelError> {
    let (eb, k, s) = (c.eb(), c.k, c.sfx());
    let byte = c.spec.elem == Elem::I8;
    let lanes = 4 / eb;
    let words = if byte { k.div_ceil(4) } else { k / 2 };
    let tail = !byte && k % 2 == 1;
    let dot = if byte { "pv.sdotp.sb" } else { "pv.sdotp.sh" };

    struct Step {
        load: String,
        pix_off: usize,
        compute: &'static str,
    }
    let mut steps = Vec::new();
    for i in 0..k {
        for f in 0..words {
            steps.push(Step {
                load: "lw".into(),
                pix_off: i * c.pitch + f * lanes * eb,
                compute: dot,
            });
        }
        if tail {
            steps.push(Step {
                load: format!("l{s}"),
                pix_off: i * c.pitch + (k - 1) * eb,
                compute: "p.mac",
            });
        }
    }

    // as many coefficient words as fit stay in x16..x31; the rest stream
    let resident = steps.len().min(16);
    let streamed = steps.len() - resident;
    a.li("x11", c.coef as i64);
    let coef_reg = |n: usize| format!("x{}", 16 + n);
    for n in 0..resident {
        a.op(format!("lw {}, {}(x11)", coef_reg(n), 4 * n));
    }
    if streamed > 0 {
        a.op(format!("addi x11, x11, {}", 4 * resident));
    }
    a.li("x9", c.pin as i64)
        .li("x10", c.pout as i64)
        .li("x5", c.nrows as i64)
        .op("lp.setup L1, x5, row_end")
        .op(format!("lp.setupi L0, {}, pix_end", c.loop_count(c.ow)?))
        .op(format!("addi x8, x0, {}", c.rnd()));
    let (p, q) = (["x12", "x13"], ["x14", "x15"]);
    let load = |a: &mut Asm, t: usize| -> Result<(), KernelError> {
        let st = &steps[t];
        a.op(format!(
            "{} {}, {}(x9)",
            st.load,
            p[t % 2],
            imm12(st.pix_off)?
        ));
        if t >= resident {
            a.op(format!("p.lw {}, 4(x11!)", q[t % 2]));
        }
        Ok(())
    };
    load(a, 0)?;
    for t in 0..steps.len() {
        if t + 1 < steps.len() {
            load(a, t + 1)?;
        }
        let coef = if t < resident {
            coef_reg(t)
        } else {
            q[t % 2].to_string()
        };
        a.op(format!("{} x8, {}, {coef}", steps[t].compute, p[t % 2]));
    }
    if streamed > 0 {
        a.op(format!("addi x11, x11, -{}", 4 * streamed));
    }
    a.op(format!("srai x8, x8, {}", c.shift))
        .op(format!("p.clip x8, x8, {}", c.spec.elem.bits()))
        .op(format!("addi x9, x9, {eb}"))
        .label("pix_end")
        .op(format!("p.s{s} x8, {eb}(x10!)"))
        .label("row_end")
        .op(format!("addi x9, x9, {}", c.row_skip()));
    Ok(())
}
