//! Binary cache of [`ReferenceTensors`].
//!
//! Layout (little endian): magic `NSRT`, `u32` version, `u32 p`,
//! `u32 p_gamma`, `u32` matrix count, then per matrix `u32 rows`,
//! `u32 cols` and `rows * cols` column-major `f64` values.

use std::io::{Read, Write};
use std::path::Path;

use super::ReferenceTensors;
use crate::basis::DiscretizationOrder;
use crate::real::Real;

const MAGIC: &[u8; 4] = b"NSRT";
const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a reference tensor dump")]
    BadMagic,
    #[error("unsupported dump version {0}")]
    Version(u32),
    #[error("dump holds order ({0}, {1}), requested ({2}, {3})")]
    OrderMismatch(u32, u32, usize, usize),
    #[error("dump layout does not match this build")]
    Layout,
}

pub fn write_tensors<T: Real, W: Write>(
    tensors: &ReferenceTensors<T>,
    mut w: W,
) -> Result<(), DumpError> {
    let mut copy = tensors.clone();
    let mats = copy.matrices_mut();
    w.write_all(MAGIC)?;
    for x in [
        VERSION,
        tensors.order.p as u32,
        tensors.order.p_gamma as u32,
        mats.len() as u32,
    ] {
        w.write_all(&x.to_le_bytes())?;
    }
    for m in mats {
        w.write_all(&(m.nrows() as u32).to_le_bytes())?;
        w.write_all(&(m.ncols() as u32).to_le_bytes())?;
        for v in m.iter() {
            w.write_all(&v.to_f64_lossy().to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, DumpError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Read a dump for `order`. The combinatorial parts (node lists, temporal
/// traces) are rebuilt; only the integrals come from the file.
pub fn read_tensors<T: Real, R: Read>(
    order: DiscretizationOrder,
    mut r: R,
) -> Result<ReferenceTensors<T>, DumpError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DumpError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(DumpError::Version(version));
    }
    let (p, pg) = (read_u32(&mut r)?, read_u32(&mut r)?);
    if p as usize != order.p || pg as usize != order.p_gamma {
        return Err(DumpError::OrderMismatch(p, pg, order.p, order.p_gamma));
    }
    let count = read_u32(&mut r)? as usize;
    let mut tensors = skeleton::<T>(order);
    let mats = tensors.matrices_mut();
    if mats.len() != count {
        return Err(DumpError::Layout);
    }
    for m in mats {
        let (rows, cols) = (read_u32(&mut r)? as usize, read_u32(&mut r)? as usize);
        if (rows, cols) != m.shape() {
            return Err(DumpError::Layout);
        }
        for v in m.iter_mut() {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *v = T::lit(f64::from_le_bytes(b));
        }
    }
    Ok(tensors)
}

/// Correctly shaped tensors with zeroed integrals.
fn skeleton<T: Real>(order: DiscretizationOrder) -> ReferenceTensors<T> {
    // p = 1 integrals are cheap; reuse the constructor for shapes and node
    // lists, then clear every integral.
    let mut t = ReferenceTensors::<T>::precompute(order);
    for m in t.matrices_mut() {
        m.fill(T::zero());
    }
    t
}

pub fn save_tensors<T: Real>(
    tensors: &ReferenceTensors<T>,
    path: impl AsRef<Path>,
) -> Result<(), DumpError> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_tensors(tensors, file)
}

pub fn load_tensors<T: Real>(
    order: DiscretizationOrder,
    path: impl AsRef<Path>,
) -> Result<ReferenceTensors<T>, DumpError> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_tensors(order, file)
}
