use std::ops::Range;

use thiserror::Error;

/// Address of the synchronization cell. A store there signals arrival at a
/// barrier; it never reaches a TCDM bank.
pub const BARRIER_ADDR: u32 = 0x1000_0000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MemError {
    #[error("memory size {size} is not a multiple of 4 x {banks} banks")]
    BadGeometry { size: u32, banks: u32 },
    #[error("bank count must be a non-zero power of two, got {0}")]
    BadBanks(u32),
    #[error("scm range {start:#x}..{end:#x} lies outside the tcdm")]
    BadScm { start: u32, end: u32 },
    #[error("address {addr:#x} (+{len}) is outside the tcdm")]
    OutOfRange { addr: u32, len: u32 },
}

/// One word-wide request to a TCDM bank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Access {
    pub word_addr: u32,
    pub bank: u32,
    pub store: bool,
    pub scm: bool,
}

/// Up to two bank requests issued by one instruction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Accesses {
    items: [Option<Access>; 2],
}

impl Accesses {
    pub fn push(&mut self, a: Access) {
        let slot = self
            .items
            .iter_mut()
            .find(|s| s.is_none())
            .expect("at most two accesses");
        *slot = Some(a);
    }

    pub fn len(&self) -> usize {
        self.items.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.items[0].is_none()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Access> {
        self.items.iter().flatten()
    }

    pub fn get(&self, i: usize) -> Option<&Access> {
        self.items.get(i).and_then(Option::as_ref)
    }
}

/// Word-interleaved banked scratchpad with an optional SCM region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorySystem {
    bytes: Vec<u8>,
    banks: u32,
    scm: Option<Range<u32>>,
}

pub const DEFAULT_TCDM_BYTES: u32 = 72 * 1024;
pub const DEFAULT_BANKS: u32 = 8;

impl Default for MemorySystem {
    fn default() -> Self {
        MemorySystem::new(DEFAULT_TCDM_BYTES, DEFAULT_BANKS).expect("default geometry")
    }
}

impl MemorySystem {
    pub fn new(size: u32, banks: u32) -> Result<Self, MemError> {
        if banks == 0 || !banks.is_power_of_two() {
            return Err(MemError::BadBanks(banks));
        }
        if size == 0 || !size.is_multiple_of(4 * banks) {
            return Err(MemError::BadGeometry { size, banks });
        }
        Ok(MemorySystem {
            bytes: vec![0; size as usize],
            banks,
            scm: None,
        })
    }

    pub fn with_scm(mut self, range: Range<u32>) -> Result<Self, MemError> {
        if range.start > range.end || range.end > self.size() {
            return Err(MemError::BadScm {
                start: range.start,
                end: range.end,
            });
        }
        self.scm = Some(range);
        Ok(self)
    }

    pub fn size(&self) -> u32 {
        self.bytes.len() as u32
    }

    pub fn banks(&self) -> u32 {
        self.banks
    }

    pub fn bank_of(&self, addr: u32) -> u32 {
        (addr / 4) % self.banks
    }

    pub fn is_scm(&self, addr: u32) -> bool {
        self.scm.as_ref().is_some_and(|r| r.contains(&addr))
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    fn check(&self, addr: u32, len: u32) -> Result<usize, MemError> {
        match addr.checked_add(len) {
            Some(end) if end <= self.size() => Ok(addr as usize),
            _ => Err(MemError::OutOfRange { addr, len }),
        }
    }

    /// Copies a sparse byte image (e.g. a program's `.data`) into memory.
    pub fn load_image<'a>(
        &mut self,
        image: impl IntoIterator<Item = (&'a u32, &'a u8)>,
    ) -> Result<(), MemError> {
        for (&addr, &b) in image {
            let i = self.check(addr, 1)?;
            self.bytes[i] = b;
        }
        Ok(())
    }

    pub fn write_bytes(&mut self, addr: u32, data: &[u8]) -> Result<(), MemError> {
        let i = self.check(addr, data.len() as u32)?;
        self.bytes[i..i + data.len()].copy_from_slice(data);
        Ok(())
    }

    pub fn read_bytes(&self, addr: u32, len: u32) -> Result<&[u8], MemError> {
        let i = self.check(addr, len)?;
        Ok(&self.bytes[i..i + len as usize])
    }

    /// Little-endian read of `width` bytes (1, 2 or 4), zero extended.
    pub fn read(&self, addr: u32, width: u32) -> Result<u32, MemError> {
        let b = self.read_bytes(addr, width)?;
        Ok(b.iter().rev().fold(0u32, |acc, &x| (acc << 8) | x as u32))
    }

    pub fn write(&mut self, addr: u32, width: u32, value: u32) -> Result<(), MemError> {
        let i = self.check(addr, width)?;
        for k in 0..width as usize {
            self.bytes[i + k] = (value >> (8 * k)) as u8;
        }
        Ok(())
    }

    pub fn read_word(&self, addr: u32) -> Result<u32, MemError> {
        self.read(addr, 4)
    }

    /// Bank requests for an access of `width` bytes at `addr`: one word, or
    /// two when the access crosses a word boundary (high word first).
    pub fn accesses_for(&self, addr: u32, width: u32, store: bool) -> Accesses {
        let low = addr & !3;
        let mut out = Accesses::default();
        let mk = |w: u32| Access {
            word_addr: w,
            bank: self.bank_of(w),
            store,
            scm: self.is_scm(w),
        };
        if crosses_word(addr, width) {
            out.push(mk(low.wrapping_add(4)));
        }
        out.push(mk(low));
        out
    }
}

/// True when `width` bytes at `addr` span two words.
pub fn crosses_word(addr: u32, width: u32) -> bool {
    (addr % 4) + width > 4
}
