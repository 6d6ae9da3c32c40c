//! Seeded input data and host-side golden references.

use crate::exec::round_term;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{gaussian, Kernel, KernelSpec};

/// Q1.11 operand range of the element-wise kernels.
pub(crate) const Q11_MIN: i32 = -2048;
pub(crate) const Q11_MAX: i32 = 2047;

/// Kernel inputs as plain integers.
///
/// * convolution: `a` is the image (row-major), `b` the `k*k` filter
/// * matmul: `a` is `rows x depth`, `b` is `depth x cols` (row-major)
/// * fir: `a` holds `cols + depth - 1` samples, `b` the taps
/// * element-wise kernels: operands `a` and `b`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelData {
    pub a: Vec<i32>,
    pub b: Vec<i32>,
    /// Normalization shift (convolution and fir).
    pub shift: u8,
}

impl KernelData {
    /// Random inputs; convolutions use the Gaussian filter of their size.
    pub fn random(spec: &KernelSpec, seed: u64) -> KernelData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = spec.dims;
        let (lo, hi) = (spec.elem.min(), spec.elem.max());
        let mut fill = |n: usize, lo: i32, hi: i32| -> Vec<i32> {
            (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
        };
        match spec.kernel {
            Kernel::Conv3x3 | Kernel::Conv5x5 | Kernel::Conv7x7 => {
                let k = spec.kernel.conv_size().unwrap();
                let (b, shift) = gaussian(k);
                KernelData {
                    a: fill(d.rows * d.cols, lo, hi),
                    b,
                    shift,
                }
            }
            Kernel::Matmul => KernelData {
                a: fill(d.rows * d.depth, lo, hi),
                b: fill(d.depth * d.cols, lo, hi),
                shift: 0,
            },
            Kernel::Fir => KernelData {
                a: fill(d.cols + d.depth - 1, lo, hi),
                b: fill(d.depth, Q11_MIN, Q11_MAX),
                shift: 15,
            },
            Kernel::VecaddClip | Kernel::MulqNorm => KernelData {
                a: fill(d.cols, Q11_MIN, Q11_MAX),
                b: fill(d.cols, Q11_MIN, Q11_MAX),
                shift: 12,
            },
        }
    }

    /// Replaces a convolution filter with random coefficients over the
    /// full element range.
    pub fn with_random_filter(mut self, spec: &KernelSpec, seed: u64) -> KernelData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let (lo, hi) = (spec.elem.min(), spec.elem.max());
        for c in &mut self.b {
            *c = rng.gen_range(lo..=hi);
        }
        self
    }
}

/// Expected output of `spec` on `data`, in 32-bit wrapping arithmetic.
pub fn golden(spec: &KernelSpec, data: &KernelData) -> Vec<i32> {
    let d = spec.dims;
    let clamp = |v: i32, lo: i32, hi: i32| v.clamp(lo, hi);
    match spec.kernel.conv_size() {
        Some(k) => {
            let (oh, ow) = (d.rows + 1 - k, d.cols + 1 - k);
            let rnd = round_term(data.shift) as i32;
            let mut out = Vec::with_capacity(oh * ow);
            for y in 0..oh {
                for x in 0..ow {
                    let mut acc = rnd;
                    for i in 0..k {
                        for j in 0..k {
                            let p = data.a[(y + i) * d.cols + x + j];
                            acc = acc.wrapping_add(p.wrapping_mul(data.b[i * k + j]));
                        }
                    }
                    out.push(clamp(acc >> data.shift, spec.elem.min(), spec.elem.max()));
                }
            }
            out
        }
        None => match spec.kernel {
            Kernel::Matmul => {
                let mut out = Vec::with_capacity(d.rows * d.cols);
                for i in 0..d.rows {
                    for j in 0..d.cols {
                        let mut acc = 0i32;
                        for t in 0..d.depth {
                            acc = acc.wrapping_add(
                                data.a[i * d.depth + t].wrapping_mul(data.b[t * d.cols + j]),
                            );
                        }
                        out.push(acc);
                    }
                }
                out
            }
            Kernel::Fir => (0..d.cols)
                .map(|n| {
                    let mut acc = round_term(data.shift) as i32;
                    for t in 0..d.depth {
                        acc = acc.wrapping_add(data.a[n + t].wrapping_mul(data.b[t]));
                    }
                    clamp(acc >> data.shift, -32768, 32767)
                })
                .collect(),
            Kernel::VecaddClip => data
                .a
                .iter()
                .zip(&data.b)
                .map(|(x, y)| clamp(x + y, Q11_MIN, Q11_MAX))
                .collect(),
            Kernel::MulqNorm => data
                .a
                .iter()
                .zip(&data.b)
                .map(|(x, y)| (x * y + round_term(data.shift) as i32) >> data.shift)
                .collect(),
            _ => unreachable!(),
        },
    }
}

/// Little-endian bytes of `values` at `bytes` per element.
pub(crate) fn pack(values: &[i32], bytes: usize) -> Vec<u8> {
    values
        .iter()
        .flat_map(|v| v.to_le_bytes().into_iter().take(bytes))
        .collect()
}

/// Output values as stored in memory (`bytes` per element).
pub fn pack_output(values: &[i32], bytes: usize) -> Vec<u8> {
    pack(values, bytes)
}

/// Packs lanes into a word, low lane first.
pub(crate) fn word(lanes: &[i32], bytes: usize) -> i32 {
    let mut w = 0u32;
    for (i, &l) in lanes.iter().enumerate() {
        let mask = if bytes == 4 {
            u32::MAX
        } else {
            (1u32 << (8 * bytes)) - 1
        };
        w |= (l as u32 & mask) << (8 * bytes * i);
    }
    w as i32
}
