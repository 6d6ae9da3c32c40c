//! Fixtures for the simulator benchmarks.

use xdsp::kernels::{generate, prepare_memory, Dims, Generated, KernelData, RunSettings};
use xdsp::{Elem, Kernel, KernelSpec, MemorySystem, Variant};

/// A generated kernel together with its loaded memory image.
pub struct Fixture {
    pub generated: Generated,
    pub memory: MemorySystem,
}

impl Fixture {
    pub fn new(
        kernel: Kernel,
        elem: Elem,
        variant: Variant,
        cores: usize,
        dims: Option<Dims>,
    ) -> Fixture {
        let mut spec = KernelSpec::new(kernel, elem, variant, cores);
        if let Some(d) = dims {
            spec = spec.with_dims(d);
        }
        let data = KernelData::random(&spec, 0);
        let generated = generate(&spec, &data).expect("benchmark spec is valid");
        let memory = prepare_memory(&generated, &RunSettings::default()).expect("image fits");
        Fixture { generated, memory }
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.generated.spec
    }
}

/// Assembly source for an `n`-iteration counting loop with a short body.
pub fn counting_loop(n: u32) -> String {
    format!(
        "    li   x5, {n}\n    li   x6, 0\nloop:\n    add  x6, x6, x5\n    xor  x7, x6, x5\n    addi x5, x5, -1\n    bnez x5, loop\n"
    )
}

/// A long straight-line source mixing base and extension instructions.
pub fn mixed_source(lines: usize) -> String {
    const BODY: [&str; 8] = [
        "add x5, x6, x7",
        "pv.add.h x8, x9, x10",
        "pv.sdotp.sb x11, x12, x13",
        "p.lw x14, 4(x15!)",
        "p.clip x16, x17, 8",
        "mul x18, x19, x20",
        "pv.shuffle2.b x21, x22, x23, x27",
        "p.mac x24, x25, x26",
    ];
    (0..lines)
        .map(|i| format!("    {}\n", BODY[i % BODY.len()]))
        .collect()
}
