//! Run-length encoded raster files.
//!
//! Layout (little endian): a 16-byte header `PMRS`, dimension `u32`,
//! resolution `u32`, run count `u32`; then the runs as `u32`, alternating
//! absent/present cells and starting with an absent run (possibly 0).

use std::path::Path;

use super::{Domain, RasterSet};
use crate::error::{Error, Result};

pub const RLE_MAGIC: &[u8; 4] = b"PMRS";

impl RasterSet {
    pub fn to_rle(&self) -> Vec<u8> {
        let mut runs = Vec::new();
        let mut state = false;
        let mut len = 0u32;
        for c in 0..self.cell_count() {
            if self.contains(c) == state {
                len += 1;
            } else {
                runs.push(len);
                state = !state;
                len = 1;
            }
        }
        runs.push(len);
        let mut out = Vec::with_capacity(16 + 4 * runs.len());
        out.extend_from_slice(RLE_MAGIC);
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        out.extend_from_slice(&self.resolution().to_le_bytes());
        out.extend_from_slice(&(runs.len() as u32).to_le_bytes());
        for r in runs {
            out.extend_from_slice(&r.to_le_bytes());
        }
        out
    }

    pub fn from_rle(bytes: &[u8], domain: Domain) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("raster file: {m}"));
        if bytes.len() < 16 || &bytes[..4] != RLE_MAGIC {
            return Err(bad("missing header"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let (dim, res, count) = (word(4) as usize, word(8), word(12) as usize);
        if bytes.len() != 16 + 4 * count {
            return Err(bad("length does not match the run count"));
        }
        let mut s = RasterSet::empty(domain, dim, res)?;
        let mut pos = 0usize;
        for i in 0..count {
            let r = word(16 + 4 * i) as usize;
            if pos + r > s.cell_count() {
                return Err(bad("runs exceed the cell count"));
            }
            if i % 2 == 1 {
                (pos..pos + r).for_each(|c| s.insert(c));
            }
            pos += r;
        }
        if pos != s.cell_count() {
            return Err(bad("runs do not cover the grid"));
        }
        Ok(s)
    }
}

pub fn write_rle(path: &Path, s: &RasterSet) -> Result<()> {
    std::fs::write(path, s.to_rle())?;
    Ok(())
}

pub fn read_rle(path: &Path, domain: Domain) -> Result<RasterSet> {
    RasterSet::from_rle(&std::fs::read(path)?, domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let mut s = RasterSet::empty(Domain::Torus, 1, 8).unwrap();
        s.insert(0);
        s.insert(1);
        s.insert(5);
        let b = s.to_rle();
        assert_eq!(&b[..4], b"PMRS");
        let runs: Vec<u32> = b[16..].chunks(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
        assert_eq!(runs, vec![0, 2, 3, 1, 2]);
        assert!(RasterSet::from_rle(&b[..20], Domain::Torus).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.pmrs");
        let s = RasterSet::from_box(Domain::Torus, 32, &[0.1, 0.2], &[0.4, 0.9]).unwrap();
        write_rle(&p, &s).unwrap();
        assert_eq!(read_rle(&p, Domain::Torus).unwrap(), s);
    }

    proptest! {
        #[test]
        fn round_trip(bits in proptest::collection::vec(any::<bool>(), 64)) {
            let mut s = RasterSet::empty(Domain::Torus, 2, 8).unwrap();
            for (i, &b) in bits.iter().enumerate() {
                if b { s.insert(i); }
            }
            prop_assert_eq!(RasterSet::from_rle(&s.to_rle(), Domain::Torus).unwrap(), s);
        }
    }
}
