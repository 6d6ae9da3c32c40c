//! Benchmark kernels in three ISA variants, host-side golden references
//! and variant comparison.
//!
//! * `baseline`: RV32IM only.
//! * `ext`: adds hardware loops, post-increment / register-offset memory
//!   access and the scalar `p.mac`.
//! * `builtin`: adds everything else (packed SIMD, dot products, shuffles,
//!   round/normalize and clip).
//!
//! Kernels are hand-written assembly templates specialized per core: each
//! core gets its own strip of the output with the bounds baked in, and
//! multi-core programs end with a barrier.

mod asm;
mod bands;
mod compare;
mod conv;
pub mod data;
mod matmul;
mod run;
mod stream;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::asm::{Program, SourceError};

pub use bands::{check_bands, BandCheck};
pub use compare::{compare, geomean, suite_specs, CompareRow};
pub use data::{golden, KernelData};
pub use run::{
    prepare_memory, read_outputs, run_kernel, run_kernel_with, KernelRun, Mismatch, RunError,
    RunSettings,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Conv3x3,
    Conv5x5,
    Conv7x7,
    Matmul,
    Fir,
    VecaddClip,
    MulqNorm,
}

impl Kernel {
    pub const ALL: [Kernel; 7] = [
        Kernel::Conv3x3,
        Kernel::Conv5x5,
        Kernel::Conv7x7,
        Kernel::Matmul,
        Kernel::Fir,
        Kernel::VecaddClip,
        Kernel::MulqNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Conv3x3 => "conv3x3",
            Kernel::Conv5x5 => "conv5x5",
            Kernel::Conv7x7 => "conv7x7",
            Kernel::Matmul => "matmul",
            Kernel::Fir => "fir",
            Kernel::VecaddClip => "vecadd_clip",
            Kernel::MulqNorm => "mulq_norm",
        }
    }

    /// Filter size of a convolution kernel.
    pub fn conv_size(self) -> Option<usize> {
        match self {
            Kernel::Conv3x3 => Some(3),
            Kernel::Conv5x5 => Some(5),
            Kernel::Conv7x7 => Some(7),
            _ => None,
        }
    }

    /// Element types the kernel is defined for.
    pub fn elems(self) -> &'static [Elem] {
        match self {
            Kernel::Conv3x3 | Kernel::Conv5x5 | Kernel::Conv7x7 | Kernel::Matmul => {
                &[Elem::I8, Elem::I16]
            }
            Kernel::Fir | Kernel::VecaddClip | Kernel::MulqNorm => &[Elem::I16],
        }
    }

    pub fn default_dims(self) -> Dims {
        match self {
            Kernel::Conv3x3 | Kernel::Conv5x5 | Kernel::Conv7x7 => Dims::new(64, 64, 0),
            Kernel::Matmul => Dims::new(32, 32, 32),
            Kernel::Fir => Dims::new(1, 256, 16),
            Kernel::VecaddClip | Kernel::MulqNorm => Dims::new(1, 512, 0),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kernel::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown kernel `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Elem {
    I8,
    I16,
}

impl Elem {
    pub fn bytes(self) -> usize {
        match self {
            Elem::I8 => 1,
            Elem::I16 => 2,
        }
    }

    pub fn bits(self) -> u32 {
        8 * self.bytes() as u32
    }

    pub fn min(self) -> i32 {
        -(1 << (self.bits() - 1))
    }

    pub fn max(self) -> i32 {
        (1 << (self.bits() - 1)) - 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Elem::I8 => "i8",
            Elem::I16 => "i16",
        }
    }

    /// Signed load / store mnemonic suffix.
    fn suffix(self) -> &'static str {
        match self {
            Elem::I8 => "b",
            Elem::I16 => "h",
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Elem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "i8" => Ok(Elem::I8),
            "i16" => Ok(Elem::I16),
            _ => Err(format!("unknown element type `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Baseline,
    Ext,
    Builtin,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Baseline, Variant::Ext, Variant::Builtin];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Ext => "ext",
            Variant::Builtin => "builtin",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

/// Problem dimensions. Convolution: `rows x cols` image. Matmul:
/// `rows x depth` times `depth x cols`. FIR: `cols` outputs of a
/// `depth`-tap filter. Element-wise kernels: `cols` elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
    pub depth: usize,
}

impl Dims {
    pub fn new(rows: usize, cols: usize, depth: usize) -> Dims {
        Dims { rows, cols, depth }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KernelSpec {
    pub kernel: Kernel,
    pub elem: Elem,
    pub variant: Variant,
    pub cores: usize,
    pub dims: Dims,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("unsupported kernel configuration: {0}")]
    Unsupported(String),
    #[error("generated assembly failed to parse: {0}")]
    Assembly(#[from] SourceError),
}

impl KernelSpec {
    pub fn new(kernel: Kernel, elem: Elem, variant: Variant, cores: usize) -> KernelSpec {
        KernelSpec {
            kernel,
            elem,
            variant,
            cores,
            dims: kernel.default_dims(),
        }
    }

    pub fn with_dims(mut self, dims: Dims) -> KernelSpec {
        self.dims = dims;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> KernelSpec {
        self.variant = variant;
        self
    }

    pub fn with_cores(mut self, cores: usize) -> KernelSpec {
        self.cores = cores;
        self
    }

    /// Short label like `conv5x5/i8/builtin/4c`.
    pub fn label(&self) -> String {
        format!(
            "{}/{}/{}/{}c",
            self.kernel, self.elem, self.variant, self.cores
        )
    }

    /// Number of output elements.
    pub fn outputs(&self) -> usize {
        let d = self.dims;
        match self.kernel.conv_size() {
            Some(k) => (d.rows + 1 - k) * (d.cols + 1 - k),
            None => match self.kernel {
                Kernel::Matmul => d.rows * d.cols,
                _ => d.cols,
            },
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let bad = |m: String| Err(KernelError::Unsupported(m));
        if !self.kernel.elems().contains(&self.elem) {
            return bad(format!("{} is not defined for {}", self.kernel, self.elem));
        }
        if self.cores == 0 || self.cores > 16 {
            return bad(format!("{} cores", self.cores));
        }
        let d = self.dims;
        match self.kernel.conv_size() {
            Some(k) => {
                if d.rows < k || d.cols < k {
                    return bad(format!(
                        "{}x{} image is smaller than the {k}x{k} filter",
                        d.rows, d.cols
                    ));
                }
                // immediate offsets reach (k-1) rows down
                if (k - 1) * conv::row_pitch(self) + (k + 4) * self.elem.bytes() > 2047 {
                    return bad(format!(
                        "image width {} is too large for immediate offsets",
                        d.cols
                    ));
                }
            }
            None => match self.kernel {
                Kernel::Matmul => {
                    if d.rows == 0 || d.cols == 0 || d.depth == 0 {
                        return bad("matmul dimensions must be positive".into());
                    }
                    if d.cols > 4095 || d.depth > 4095 {
                        return bad("matmul dimensions exceed the loop counter range".into());
                    }
                }
                Kernel::Fir => {
                    if d.cols == 0 || d.depth == 0 || d.depth > 64 {
                        return bad("fir needs 1..=64 taps and at least one output".into());
                    }
                }
                _ => {
                    if d.cols == 0 {
                        return bad("vector length must be positive".into());
                    }
                }
            },
        }
        Ok(())
    }

    /// Half-open output range of core `core` when outputs are split into
    /// `units` equal parts (rows or elements).
    pub(crate) fn strip(&self, units: usize, core: usize) -> std::ops::Range<usize> {
        let base = units / self.cores;
        let extra = units % self.cores;
        let start = core * base + core.min(extra);
        let len = base + usize::from(core < extra);
        start..start + len
    }
}

/// Where a kernel's result lives in memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OutputRegion {
    pub addr: u32,
    pub count: usize,
    pub elem_bytes: usize,
}

/// Programs (one per core) plus the shared initial data image.
#[derive(Clone, Debug)]
pub struct Generated {
    pub spec: KernelSpec,
    pub programs: Vec<Program>,
    pub image: Vec<(u32, Vec<u8>)>,
    pub output: OutputRegion,
    /// Bytes of TCDM the layout needs.
    pub footprint: u32,
}

/// Assembles the per-core programs and data image for `spec`.
pub fn generate(spec: &KernelSpec, data: &KernelData) -> Result<Generated, KernelError> {
    spec.validate()?;
    if spec.kernel.conv_size().is_some() {
        conv::generate(spec, data)
    } else if spec.kernel == Kernel::Matmul {
        matmul::generate(spec, data)
    } else {
        stream::generate(spec, data)
    }
}

/// Assembly text of every core's program.
pub fn generate_sources(spec: &KernelSpec, data: &KernelData) -> Result<Vec<String>, KernelError> {
    let g = generate(spec, data)?;
    Ok(g.programs.iter().map(crate::asm::print).collect())
}

/// Pair (data, shift) of a convolution's default Gaussian filter.
pub fn gaussian(k: usize) -> (Vec<i32>, u8) {
    let row: &[i32] = match k {
        3 => &[1, 2, 1],
        5 => &[1, 4, 6, 4, 1],
        7 => &[1, 6, 15, 20, 15, 6, 1],
        _ => panic!("no gaussian for size {k}"),
    };
    let shift = if k == 3 { 4 } else { 8 };
    let scale: i32 = row.iter().sum::<i32>().pow(2);
    let target = 1 << shift;
    let coeffs = row
        .iter()
        .flat_map(|a| row.iter().map(move |b| a * b))
        .map(|c| ((c * target) as f64 / scale as f64).round() as i32)
        .collect();
    (coeffs, shift)
}

/// Normalization shift of each convolution size.
pub fn conv_shift(k: usize) -> u8 {
    gaussian(k).1
}
