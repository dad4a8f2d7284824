//! Binary dumps of masks and average fields, for debugging.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      4 bytes  "CRYF"
//! version    u16      1
//! kind       u8       0 = mask, 1 = average field
//! n          u8       number of axes
//! axes       n x (i64 resolution, i64 extent)
//! denom_exp  u32      field only: values are word / 2^denom_exp
//! words      u64      number of payload words
//! payload    words x u64
//! ```
//!
//! A mask payload is its bitset, bit `i` of word `i / 64` being cell `i`
//! (row-major, last axis fastest). A field payload holds one numerator per cell.

use std::io::{Read, Write};

use super::{AverageField, GridSpec, Mask};
use crate::dyadic::Bits;
use crate::error::{Error, Result};

pub const DUMP_MAGIC: [u8; 4] = *b"CRYF";
pub const DUMP_VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dump {
    Mask(Mask),
    Field(AverageField),
}

pub fn write_dump(out: &mut impl Write, dump: &Dump) -> Result<()> {
    let (kind, grid) = match dump {
        Dump::Mask(m) => (0u8, m.grid()),
        Dump::Field(f) => (1u8, f.grid()),
    };
    out.write_all(&DUMP_MAGIC)?;
    out.write_all(&DUMP_VERSION.to_le_bytes())?;
    out.write_all(&[kind, grid.dim() as u8])?;
    for (r, l) in grid.resolutions().iter().zip(grid.extents()) {
        out.write_all(&r.to_le_bytes())?;
        out.write_all(&l.to_le_bytes())?;
    }
    let words: &[u64] = match dump {
        Dump::Mask(m) => m.bits().words(),
        Dump::Field(f) => {
            out.write_all(&f.denominator_exp().to_le_bytes())?;
            f.numerators()
        }
    };
    out.write_all(&(words.len() as u64).to_le_bytes())?;
    for w in words {
        out.write_all(&w.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dump(input: &mut impl Read) -> Result<Dump> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if magic != DUMP_MAGIC {
        return Err(Error::Parse("not a crystal dump (bad magic)".into()));
    }
    let version = u16::from_le_bytes(read_array(input)?);
    if version != DUMP_VERSION {
        return Err(Error::Parse(format!("unsupported dump version {version}")));
    }
    let [kind, n] = read_array::<2>(input)?;
    let mut res = Vec::with_capacity(n as usize);
    let mut ext = Vec::with_capacity(n as usize);
    for _ in 0..n {
        res.push(i64::from_le_bytes(read_array(input)?));
        ext.push(i64::from_le_bytes(read_array(input)?));
    }
    let grid = GridSpec::new(res, ext)?;
    let denom = match kind {
        0 => None,
        1 => Some(u32::from_le_bytes(read_array(input)?)),
        k => return Err(Error::Parse(format!("unknown dump kind {k}"))),
    };
    let count = u64::from_le_bytes(read_array(input)?) as usize;
    let cells = grid.total_cells();
    let expected = match denom {
        None => cells.div_ceil(64),
        Some(_) => cells,
    };
    if count as u128 != expected {
        return Err(Error::Parse(format!(
            "payload has {count} words, grid needs {expected}"
        )));
    }
    let mut words = Vec::with_capacity(count);
    for _ in 0..count {
        words.push(u64::from_le_bytes(read_array(input)?));
    }
    match denom {
        None => {
            let bits = Bits::from_words(cells as usize, words)
                .ok_or_else(|| Error::Parse("bad mask payload".into()))?;
            Ok(Dump::Mask(Mask::from_bits(grid, bits)?))
        }
        Some(d) => Ok(Dump::Field(AverageField::new(grid, words, d)?)),
    }
}

fn read_array<const N: usize>(input: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::Shape;
    use crate::evaluator::{maximal_field, Budget};

    #[test]
    fn mask_and_field_round_trip() {
        let grid = GridSpec::new(vec![0, -1], vec![3, 2]).unwrap();
        let mask = Mask::from_fn(grid, Budget::default(), |c| (c[0] ^ c[1]) & 1 == 0).unwrap();
        let field = maximal_field(&mask, &[Shape(vec![1, 0]), Shape(vec![0, 1])]).unwrap();
        for dump in [Dump::Mask(mask), Dump::Field(field)] {
            let mut buf = Vec::new();
            write_dump(&mut buf, &dump).unwrap();
            assert_eq!(&buf[..4], b"CRYF");
            assert_eq!(read_dump(&mut buf.as_slice()).unwrap(), dump);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_dump(&mut &b"NOPE\x01\x00"[..]).is_err());
        let mut truncated = Vec::new();
        let grid = GridSpec::new(vec![0], vec![2]).unwrap();
        write_dump(
            &mut truncated,
            &Dump::Mask(Mask::empty(grid, Budget::default()).unwrap()),
        )
        .unwrap();
        truncated.pop();
        assert!(read_dump(&mut truncated.as_slice()).is_err());
    }
}
