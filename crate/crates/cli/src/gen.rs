use std::path::PathBuf;

use clap::Args;
use xdsp::kernels::{data::pack_output, generate, golden, Dims, KernelData, KernelSpec};
use xdsp::{Elem, Kernel, Variant};

use crate::error::{write_atomic, CliError};

#[derive(Args)]
pub struct GenArgs {
    kernel: Kernel,
    #[arg(long, default_value = "i8")]
    elem: Elem,
    #[arg(long, default_value = "builtin")]
    variant: Variant,
    #[arg(long, default_value_t = 1)]
    cores: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the default dimensions.
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Output directory: `core<N>.s`, `data.hex`, `expected.hex`.
    #[arg(long)]
    out: PathBuf,
}

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    let elem = if a.kernel.elems().contains(&a.elem) {
        a.elem
    } else {
        a.kernel.elems()[0]
    };
    let d = a.kernel.default_dims();
    let dims = Dims::new(
        a.rows.unwrap_or(d.rows),
        a.cols.unwrap_or(d.cols),
        a.depth.unwrap_or(d.depth),
    );
    let spec = KernelSpec::new(a.kernel, elem, a.variant, a.cores).with_dims(dims);
    let data = KernelData::random(&spec, a.seed);
    let g = generate(&spec, &data).map_err(|e| CliError::io(e.to_string()))?;
    std::fs::create_dir_all(&a.out)
        .map_err(|e| CliError::io(format!("{}: {e}", a.out.display())))?;
    for (i, p) in g.programs.iter().enumerate() {
        write_atomic(&a.out.join(format!("core{i}.s")), xdsp::print(p).as_bytes())?;
    }
    write_atomic(
        &a.out.join("data.hex"),
        xdsp::image::write_hex(&g.image).as_bytes(),
    )?;
    let expected = pack_output(&golden(&spec, &data), g.output.elem_bytes);
    write_atomic(
        &a.out.join("expected.hex"),
        xdsp::image::write_hex(&[(g.output.addr, expected)]).as_bytes(),
    )?;
    println!(
        "{}: {} program(s), output {} x {} bytes at {:#x}",
        spec.label(),
        g.programs.len(),
        g.output.count,
        g.output.elem_bytes,
        g.output.addr
    );
    Ok(())
}
