//! Little-endian raw array files.
//!
//! Layout: 4-byte magic (`PTYC` complex, `PTYR` real), `u32` version (1),
//! `u32` rows, `u32` cols, then `rows·cols` entries in row-major order.
//! Complex entries are `(f64 re, f64 im)` pairs, real entries a single `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{ComplexField, RealField};
use crate::error::{Error, Result};

pub const COMPLEX_MAGIC: &[u8; 4] = b"PTYC";
pub const REAL_MAGIC: &[u8; 4] = b"PTYR";
pub const VERSION: u32 = 1;

fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], rows: usize, cols: usize) -> Result<()> {
    let dim = |v: usize| {
        u32::try_from(v).map_err(|_| Error::InvalidArgument(format!("dimension {v} exceeds u32")))
    };
    w.write_all(magic)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&dim(rows)?.to_le_bytes())?;
    w.write_all(&dim(cols)?.to_le_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<(usize, usize)> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&m),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    Ok((read_u32(r)? as usize, read_u32(r)? as usize))
}

pub fn write_complex<W: Write>(w: &mut W, field: &ComplexField) -> Result<()> {
    write_header(w, COMPLEX_MAGIC, field.rows(), field.cols())?;
    for z in field.data() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_complex<R: Read>(r: &mut R) -> Result<ComplexField> {
    let (rows, cols) = read_header(r, COMPLEX_MAGIC)?;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re = read_f64(r)?;
        data.push(Complex64::new(re, read_f64(r)?));
    }
    ComplexField::from_vec(rows, cols, data)
}

pub fn write_real<W: Write>(w: &mut W, field: &RealField) -> Result<()> {
    write_header(w, REAL_MAGIC, field.rows(), field.cols())?;
    for x in field.data() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_real<R: Read>(r: &mut R) -> Result<RealField> {
    let (rows, cols) = read_header(r, REAL_MAGIC)?;
    let data = (0..rows * cols).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    RealField::from_vec(rows, cols, data)
}

pub fn save_complex(path: impl AsRef<Path>, field: &ComplexField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_complex(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load_complex(path: impl AsRef<Path>) -> Result<ComplexField> {
    read_complex(&mut BufReader::new(File::open(path)?))
}

pub fn save_real(path: impl AsRef<Path>, field: &RealField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_real(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load_real(path: impl AsRef<Path>) -> Result<RealField> {
    read_real(&mut BufReader::new(File::open(path)?))
}
