//! Hex-dump data images.
//!
//! ```text
//! # comment
//! @0000 01 02 03
//! 04 05        # continues at 0x0003
//! @1000 ff
//! ```
//!
//! `@ADDR` (hex) sets the load address; the bytes that follow, on the same
//! or later lines, are placed consecutively.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ImageError {
    pub line: usize,
    pub message: String,
}

/// Contiguous byte runs with their start addresses.
pub type Image = Vec<(u32, Vec<u8>)>;

pub fn parse_hex(text: &str) -> Result<Image, ImageError> {
    let mut out: Image = Vec::new();
    let mut addr: Option<u32> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |message: String| ImageError { line, message };
        let content = raw.split('#').next().unwrap_or("");
        for tok in content.split_whitespace() {
            if let Some(a) = tok.strip_prefix('@') {
                let a = u32::from_str_radix(a.trim_start_matches("0x"), 16)
                    .map_err(|_| err(format!("bad address `{tok}`")))?;
                addr = Some(a);
                out.push((a, Vec::new()));
            } else {
                let b =
                    u8::from_str_radix(tok, 16).map_err(|_| err(format!("bad byte `{tok}`")))?;
                let a = addr.ok_or_else(|| err("data before the first `@ADDR`".into()))?;
                out.last_mut().expect("run exists").1.push(b);
                addr = Some(
                    a.checked_add(1)
                        .ok_or_else(|| err("address overflow".into()))?,
                );
            }
        }
    }
    out.retain(|(_, b)| !b.is_empty());
    Ok(out)
}

/// Writes runs 16 bytes per line.
pub fn write_hex(image: &[(u32, Vec<u8>)]) -> String {
    let mut s = String::new();
    for (addr, bytes) in image {
        for (i, chunk) in bytes.chunks(16).enumerate() {
            let _ = write!(s, "@{:08x}", *addr as usize + 16 * i);
            for b in chunk {
                let _ = write!(s, " {b:02x}");
            }
            s.push('\n');
        }
    }
    s
}
