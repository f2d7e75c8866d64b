//! Parameter checkpoints.
//!
//! Layout (all integers little-endian `u32`, all values little-endian IEEE-754
//! `f64`):
//!
//! ```text
//! magic    8 bytes  "DEGNNCKP"
//! version  u32      1
//! count    u32      number of tensors
//! repeated count times:
//!   name_len u32, name (UTF-8, name_len bytes)
//!   rows u32, cols u32
//!   rows * cols f64 values, row-major
//! ```

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::params::Params;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DEGNNCKP";
pub const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(params: &Params, mut out: W) -> Result<()> {
    let io = |e| Error::io("writing checkpoint", e);
    out.write_all(MAGIC).map_err(io)?;
    out.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    out.write_all(&(params.len() as u32).to_le_bytes()).map_err(io)?;
    for p in params.tensors() {
        let name = p.name.as_bytes();
        out.write_all(&(name.len() as u32).to_le_bytes()).map_err(io)?;
        out.write_all(name).map_err(io)?;
        let (rows, cols) = p.value.dim();
        out.write_all(&(rows as u32).to_le_bytes()).map_err(io)?;
        out.write_all(&(cols as u32).to_le_bytes()).map_err(io)?;
        for x in p.value.iter() {
            out.write_all(&x.to_le_bytes()).map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Vec<(String, Array2<f64>)>> {
    let mut magic = [0u8; 8];
    read_exact(&mut input, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count = read_u32(&mut input)? as usize;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let len = read_u32(&mut input)? as usize;
        let mut name = vec![0u8; len];
        read_exact(&mut input, &mut name)?;
        let name = String::from_utf8(name).map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?;
        let rows = read_u32(&mut input)? as usize;
        let cols = read_u32(&mut input)? as usize;
        let mut data = Vec::with_capacity(rows * cols);
        let mut buf = [0u8; 8];
        for _ in 0..rows * cols {
            read_exact(&mut input, &mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        let value = Array2::from_shape_vec((rows, cols), data).expect("length matches shape");
        tensors.push((name, value));
    }
    Ok(tensors)
}

pub fn save_params(params: &Params, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut out = std::io::BufWriter::new(file);
    write_checkpoint(params, &mut out)?;
    out.flush().map_err(|e| Error::io("flushing checkpoint", e))
}

/// Loads values saved by [`save_params`] into an already-shaped `params`.
pub fn load_params(params: &mut Params, path: &Path) -> Result<()> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let tensors = read_checkpoint(std::io::BufReader::new(file))?;
    params.load_values(&tensors)
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<()> {
    input
        .read_exact(buf)
        .map_err(|e| Error::Checkpoint(format!("truncated checkpoint: {e}")))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(input, &mut buf)?;
    Ok(u32::from_le_bytes(buf))
}
