//! Binary field dumps.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic   4 bytes   b"MLF1"
//! dims    u32       number of axes d
//! shape   d × u64   points per axis
//! spacing d × f64   step per axis
//! values  ∏shape × f64   row-major, last axis fastest
//! ```
//!
//! The format exists so a realization can be re-examined (or re-swept with
//! different thresholds) without re-running the synthesis; it makes no
//! attempt at portability beyond "same tool, any platform".

use std::io::{Read as _, Write as _};
use std::path::Path;

use anyhow::{bail, Context, Result};

use minkowski_lab::field::FieldGrid;

const MAGIC: [u8; 4] = *b"MLF1";

/// Writes a field grid to `path`.
///
/// # Errors
///
/// I/O errors, annotated with the path.
pub fn write_field(path: &Path, field: &FieldGrid) -> Result<()> {
    let mut buf: Vec<u8> =
        Vec::with_capacity(4 + 4 + field.shape.len() * 16 + field.values.len() * 8);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&(field.shape.len() as u32).to_le_bytes());
    for &s in &field.shape {
        buf.extend_from_slice(&(s as u64).to_le_bytes());
    }
    for &d in &field.spacing {
        buf.extend_from_slice(&d.to_le_bytes());
    }
    for &v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(&buf)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Reads a field grid written by [`write_field`].
///
/// # Errors
///
/// I/O errors, a bad magic number, truncation, or geometry the field type
/// itself rejects.
pub fn read_field(path: &Path) -> Result<FieldGrid> {
    let mut f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_field(&buf).with_context(|| format!("parsing {}", path.display()))
}

fn take<'a>(buf: &'a [u8], at: &mut usize, n: usize) -> Result<&'a [u8]> {
    let Some(slice) = at.checked_add(n).and_then(|end| buf.get(*at..end)) else {
        bail!("truncated at byte {at}");
    };
    *at += n;
    Ok(slice)
}

fn parse_field(buf: &[u8]) -> Result<FieldGrid> {
    let mut at = 0usize;
    let magic = take(buf, &mut at, 4)?;
    if magic != MAGIC {
        bail!("bad magic {magic:02x?}, expected {MAGIC:02x?} (\"MLF1\")");
    }
    let dims = u32::from_le_bytes(take(buf, &mut at, 4)?.try_into().unwrap()) as usize;
    if dims == 0 || dims > 8 {
        bail!("implausible axis count {dims}");
    }
    let mut shape = Vec::with_capacity(dims);
    for _ in 0..dims {
        let s = u64::from_le_bytes(take(buf, &mut at, 8)?.try_into().unwrap());
        shape.push(usize::try_from(s).context("axis length overflows usize")?);
    }
    let mut spacing = Vec::with_capacity(dims);
    for _ in 0..dims {
        spacing.push(f64::from_le_bytes(
            take(buf, &mut at, 8)?.try_into().unwrap(),
        ));
    }
    let sites: usize = shape.iter().try_fold(1usize, |acc, &s| {
        acc.checked_mul(s).context("site count overflows usize")
    })?;
    let mut values = Vec::with_capacity(sites);
    for _ in 0..sites {
        values.push(f64::from_le_bytes(
            take(buf, &mut at, 8)?.try_into().unwrap(),
        ));
    }
    if at != buf.len() {
        bail!("{} trailing bytes", buf.len() - at);
    }
    Ok(FieldGrid::new(shape, spacing, values)?)
}
