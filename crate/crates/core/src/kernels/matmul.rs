//! Integer matrix multiply `C = A * B` with 32-bit results. `B` is stored
//! transposed so both operands stream with unit stride.

use super::asm::Asm;
use super::data::pack;
use super::{Elem, Generated, KernelData, KernelError, KernelSpec, OutputRegion, Variant};

pub(super) fn generate(spec: &KernelSpec, data: &KernelData) -> Result<Generated, KernelError> {
    let d = spec.dims;
    let (m, n, kk) = (d.rows, d.cols, d.depth);
    let eb = spec.elem.bytes();
    let a_addr = 0usize;
    let bt_addr = (a_addr + m * kk * eb + 8 + 3) & !3;
    let c_addr = (bt_addr + n * kk * eb + 8 + 3) & !3;
    let end = c_addr + m * n * 4;

    let mut bt = vec![0; n * kk];
    for t in 0..kk {
        for j in 0..n {
            bt[j * kk + t] = data.b[t * n + j];
        }
    }

    let mut programs = Vec::with_capacity(spec.cores);
    for core in 0..spec.cores {
        let rows = spec.strip(m, core);
        let mut a = Asm::new();
        a.comment(&format!(
            "{} core {core}: rows {}..{}",
            spec.label(),
            rows.start,
            rows.end
        ));
        if !rows.is_empty() {
            a.li("x16", (a_addr + rows.start * kk * eb) as i64)
                .li("x11", (c_addr + rows.start * n * 4) as i64)
                .li("x18", rows.len() as i64)
                .label("row")
                .li("x10", bt_addr as i64);
            let s = spec.elem.suffix();
            let row_bytes = (kk * eb) as i64;
            match spec.variant {
                Variant::Baseline => {
                    a.li("x17", n as i64)
                        .label("col")
                        .op("mv x9, x16")
                        .addi("x15", "x16", row_bytes, "x5")
                        .op("addi x8, x0, 0")
                        .label("dot")
                        .op(format!("l{s} x12, 0(x9)"))
                        .op(format!("l{s} x13, 0(x10)"))
                        .op(format!("addi x9, x9, {eb}"))
                        .op(format!("addi x10, x10, {eb}"))
                        .op("mul x14, x12, x13")
                        .op("add x8, x8, x14")
                        .op("bne x9, x15, dot")
                        .op("sw x8, 0(x11)")
                        .op("addi x11, x11, 4")
                        .op("addi x17, x17, -1")
                        .op("bne x17, x0, col");
                }
                Variant::Ext => {
                    a.op(format!("lp.setupi L1, {n}, col_end"))
                        .op("mv x9, x16")
                        .op("addi x8, x0, 0")
                        .op(format!("lp.setupi L0, {kk}, dot_end"))
                        .op(format!("p.l{s} x12, {eb}(x9!)"))
                        .op(format!("p.l{s} x13, {eb}(x10!)"))
                        .label("dot_end")
                        .op("p.mac x8, x12, x13")
                        .label("col_end")
                        .op("p.sw x8, 4(x11!)");
                }
                Variant::Builtin => {
                    let lanes = 4 / eb;
                    let words = kk / lanes;
                    let rest = kk % lanes;
                    let dot = if spec.elem == Elem::I8 {
                        "pv.sdotp.sb"
                    } else {
                        "pv.sdotp.sh"
                    };
                    a.op(format!("lp.setupi L1, {n}, col_end"))
                        .op("mv x9, x16")
                        .op("addi x8, x0, 0");
                    if words >= 2 {
                        a.op(format!("lp.setupi L0, {}, dot_end", words / 2))
                            .op("p.lw x12, 4(x9!)")
                            .op("p.lw x13, 4(x10!)")
                            .op("p.lw x19, 4(x9!)")
                            .op("p.lw x20, 4(x10!)")
                            .op(format!("{dot} x8, x12, x13"))
                            .label("dot_end")
                            .op(format!("{dot} x8, x19, x20"));
                    }
                    if words % 2 == 1 {
                        a.op("p.lw x12, 4(x9!)")
                            .op("p.lw x13, 4(x10!)")
                            .op(format!("{dot} x8, x12, x13"));
                    }
                    for _ in 0..rest {
                        a.op(format!("p.l{s} x12, {eb}(x9!)"))
                            .op(format!("p.l{s} x13, {eb}(x10!)"))
                            .op("p.mac x8, x12, x13");
                    }
                    a.label("col_end").op("p.sw x8, 4(x11!)");
                }
            }
            a.addi("x16", "x16", row_bytes, "x5")
                .op("addi x18, x18, -1")
                .op("bne x18, x0, row");
        }
        programs.push(a.finish(spec.cores)?);
    }
    Ok(Generated {
        spec: *spec,
        programs,
        image: vec![
            (a_addr as u32, pack(&data.a, eb)),
            (bt_addr as u32, pack(&bt, eb)),
        ],
        output: OutputRegion {
            addr: c_addr as u32,
            count: m * n,
            elem_bytes: 4,
        },
        footprint: end as u32,
    })
}
