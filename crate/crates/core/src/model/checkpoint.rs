//! Versioned binary checkpoints.
//!
//! Layout, all integers little-endian:
//! magic `GGNTCKPT`, `u32` version, `u64` length plus UTF-8 JSON of the
//! [`ModelConfig`], `u64` tensor count, then per tensor `u64` rows, `u64`
//! cols and `rows·cols` `f64` values row-major.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::config::ModelConfig;
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"GGNTCKPT";
const VERSION: u32 = 1;

pub fn write_checkpoint<T: Scalar, W: Write>(mut w: W, cfg: &ModelConfig, params: &ModelParams<T>) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    let json = serde_json::to_vec(cfg)?;
    w.write_u64::<LittleEndian>(json.len() as u64)?;
    w.write_all(&json)?;
    let mut tensors = Vec::new();
    params.for_each_tensor(|_, r, c, v| tensors.push((r, c, v)));
    w.write_u64::<LittleEndian>(tensors.len() as u64)?;
    for (r, c, v) in tensors {
        w.write_u64::<LittleEndian>(r as u64)?;
        w.write_u64::<LittleEndian>(c as u64)?;
        for &x in v {
            w.write_f64::<LittleEndian>(x.as_f64())?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<T: Scalar, R: Read>(mut r: R) -> Result<(ModelConfig, ModelParams<T>)> {
    let bad = |message: String| Error::Format {
        what: "checkpoint",
        message,
    };
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|e| bad(format!("truncated header: {e}")))?;
    if &magic != MAGIC {
        return Err(bad("bad magic bytes".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let len = r.read_u64::<LittleEndian>()? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let cfg: ModelConfig = serde_json::from_slice(&json)?;
    cfg.validate()?;
    let mut params = ModelParams::<T>::init(&cfg);
    let count = r.read_u64::<LittleEndian>()? as usize;
    let mut expected = 0;
    params.for_each_tensor(|_, _, _, _| expected += 1);
    if count != expected {
        return Err(bad(format!("expected {expected} tensors, found {count}")));
    }
    let mut failure = None;
    params.for_each_tensor_mut(|name, rows, cols, values| {
        if failure.is_some() {
            return;
        }
        let read = (|| -> Result<()> {
            let (r_rows, r_cols) = (r.read_u64::<LittleEndian>()? as usize, r.read_u64::<LittleEndian>()? as usize);
            if (r_rows, r_cols) != (rows, cols) {
                return Err(bad(format!("tensor {name} has shape {r_rows}x{r_cols}, expected {rows}x{cols}")));
            }
            for v in values.iter_mut() {
                *v = T::of(r.read_f64::<LittleEndian>()?);
            }
            Ok(())
        })();
        if let Err(e) = read {
            failure = Some(e);
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok((cfg, params)),
    }
}

pub fn save_checkpoint<T: Scalar>(path: &Path, cfg: &ModelConfig, params: &ModelParams<T>) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, cfg, params)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<(ModelConfig, ModelParams<T>)> {
    read_checkpoint(std::io::BufReader::new(fs::File::open(path)?))
}
