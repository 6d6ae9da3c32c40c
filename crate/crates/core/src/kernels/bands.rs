//! Pinned calibration bands for suite results. Each check applies only
//! when the rows it needs are present.

use serde::Serialize;

use super::{geomean, CompareRow, Elem, Kernel, Variant};

#[derive(Clone, Debug, Serialize)]
pub struct BandCheck {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

impl BandCheck {
    fn new(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> BandCheck {
        BandCheck {
            name: name.into(),
            value,
            lo,
            hi,
            pass: value >= lo && value <= hi,
        }
    }
}

fn find(rows: &[CompareRow], k: Kernel, e: Elem, v: Variant, cores: usize) -> Option<&CompareRow> {
    rows.iter()
        .find(|r| r.kernel == k && r.elem == e && r.variant == v && r.cores == cores)
}

const CONVS: [Kernel; 3] = [Kernel::Conv3x3, Kernel::Conv5x5, Kernel::Conv7x7];

pub fn check_bands(rows: &[CompareRow]) -> Vec<BandCheck> {
    let mut out = Vec::new();
    let failed = rows.iter().filter(|r| !r.passed).count();
    out.push(BandCheck::new("golden mismatches", failed as f64, 0.0, 0.0));

    for k in [Kernel::Conv3x3, Kernel::Conv5x5] {
        if let (Some(e), Some(b)) = (
            find(rows, k, Elem::I8, Variant::Ext, 1),
            find(rows, k, Elem::I8, Variant::Builtin, 1),
        ) {
            let r = e.loads_stores as f64 / b.loads_stores as f64;
            out.push(BandCheck::new(
                format!("{k} i8 ld/st ext/builtin"),
                r,
                8.3 * 0.8,
                8.3 * 1.2,
            ));
        }
    }
    for k in CONVS {
        if let (Some(one), Some(four)) = (
            find(rows, k, Elem::I8, Variant::Builtin, 1),
            find(rows, k, Elem::I8, Variant::Builtin, 4),
        ) {
            let s = one.cycles as f64 / four.cycles as f64;
            out.push(BandCheck::new(
                format!("{k} i8 builtin 4-core scaling"),
                s,
                3.5,
                4.0,
            ));
        }
    }

    let ones: Vec<&CompareRow> = rows.iter().filter(|r| r.cores == 1).collect();
    let pairs: Vec<(Kernel, Elem)> = Kernel::ALL
        .into_iter()
        .flat_map(|k| k.elems().iter().map(move |&e| (k, e)))
        .collect();
    let ext: Vec<f64> = pairs
        .iter()
        .filter_map(|&(k, e)| find(rows, k, e, Variant::Ext, 1).map(|r| r.speedup))
        .collect();
    if ext.len() == pairs.len() {
        out.push(BandCheck::new(
            "suite geomean ext speedup",
            geomean(ext),
            1.20,
            1.60,
        ));
    }
    if let Some(m) = find(rows, Kernel::Matmul, Elem::I8, Variant::Builtin, 1) {
        out.push(BandCheck::new(
            "matmul i8 builtin speedup",
            m.speedup,
            8.0,
            13.0,
        ));
    }
    let conv_builtin: Vec<f64> = ones
        .iter()
        .filter(|r| CONVS.contains(&r.kernel) && r.variant == Variant::Builtin)
        .map(|r| r.speedup)
        .collect();
    if !conv_builtin.is_empty() {
        out.push(BandCheck::new(
            "conv geomean builtin speedup",
            geomean(conv_builtin),
            2.0,
            8.0,
        ));
    }

    // contention: i8 convolutions on 4 cores
    let (mut ext_n, mut bi_n, mut ordered, mut seen) = (0u64, 0u64, true, 0);
    for k in CONVS {
        if let (Some(e), Some(b)) = (
            find(rows, k, Elem::I8, Variant::Ext, 4),
            find(rows, k, Elem::I8, Variant::Builtin, 4),
        ) {
            seen += 1;
            ext_n += e.contended_accesses;
            bi_n += b.contended_accesses;
            ordered &= b.contention_pct < e.contention_pct;
        }
    }
    if seen > 0 {
        out.push(BandCheck::new(
            "4-core i8 conv contention builtin < ext",
            f64::from(u8::from(ordered)),
            1.0,
            1.0,
        ));
        let red = ext_n as f64 / bi_n.max(1) as f64;
        out.push(BandCheck::new(
            "4-core i8 conv contended-access reduction",
            red,
            10.0,
            f64::INFINITY,
        ));
    }

    let base: Vec<&&CompareRow> = ones
        .iter()
        .filter(|r| r.variant == Variant::Baseline)
        .collect();
    if base.len() == pairs.len() {
        let c: u64 = base.iter().map(|r| r.compressed_retired).sum();
        let n: u64 = base.iter().map(|r| r.retired).sum();
        out.push(BandCheck::new(
            "baseline suite compressed ratio",
            c as f64 / n as f64,
            0.20,
            0.50,
        ));
    }
    let dotp = |k: Kernel| CONVS.contains(&k) || matches!(k, Kernel::Matmul | Kernel::Fir);
    let mut lower = true;
    let mut any = false;
    for &(k, e) in pairs.iter().filter(|(k, _)| dotp(*k)) {
        if let (Some(b), Some(x)) = (
            find(rows, k, e, Variant::Baseline, 1),
            find(rows, k, e, Variant::Builtin, 1),
        ) {
            any = true;
            lower &= x.compressed_ratio < b.compressed_ratio;
        }
    }
    if any {
        out.push(BandCheck::new(
            "builtin compressed ratio < baseline (dotp kernels)",
            f64::from(u8::from(lower)),
            1.0,
            1.0,
        ));
    }

    let mut ordered = true;
    let mut any = false;
    for r in rows
        .iter()
        .filter(|r| CONVS.contains(&r.kernel) && r.variant == Variant::Baseline)
    {
        if let (Some(e), Some(b)) = (
            find(rows, r.kernel, r.elem, Variant::Ext, r.cores),
            find(rows, r.kernel, r.elem, Variant::Builtin, r.cores),
        ) {
            any = true;
            ordered &= b.energy_pj < e.energy_pj && e.energy_pj < r.energy_pj;
        }
    }
    if any {
        out.push(BandCheck::new(
            "conv energy builtin < ext < baseline",
            f64::from(u8::from(ordered)),
            1.0,
            1.0,
        ));
    }
    out
}
