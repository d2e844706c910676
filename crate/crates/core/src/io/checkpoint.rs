//! Model checkpoints: small binary containers whose matrix records reuse the
//! `.dmat` layout.
//!
//! * Anchor model — magic `ANCM`, version, alpha (f64 LE), p (u64 LE), two
//!   activation ids, then the encoder and decoder matrices.
//! * Anchor set — magic `ANCS`, version, class and attribute counts
//!   (u64 LE), then the anchor matrix.
//! * Alignment model — magic `ALNM`, version, lambda1/lambda2 (f64 LE), a
//!   flag byte (bit 0 relation-reg enabled, bit 1 tied weights, bit 2
//!   per-sample normalization), then W_cons, W_recons, and the metric.

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::align::AlignModel;
use crate::anchors::{Activation, AnchorModel, AnchorSet};
use crate::error::{Error, Result};
use crate::io::matfile::{read_binary, write_binary};

const ANCHOR_MODEL_MAGIC: &[u8; 4] = b"ANCM";
const ANCHOR_SET_MAGIC: &[u8; 4] = b"ANCS";
const ALIGN_MODEL_MAGIC: &[u8; 4] = b"ALNM";
const VERSION: u8 = 1;

fn write_file(path: &Path, bytes: Vec<u8>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(format!("reading {}", path.display()), e)
        }
    })
}

fn check_header(cursor: &mut &[u8], path: &Path, magic: &[u8; 4]) -> Result<()> {
    let mut buf = [0u8; 5];
    read_chunk(cursor, &mut buf, path)?;
    if &buf[..4] != magic {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: format!("bad magic, expected {:?}", std::str::from_utf8(magic).unwrap()),
        });
    }
    if buf[4] != VERSION {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: format!("unsupported version {}", buf[4]),
        });
    }
    Ok(())
}

fn read_chunk(cursor: &mut &[u8], buf: &mut [u8], path: &Path) -> Result<()> {
    cursor.read_exact(buf).map_err(|_| Error::Truncated {
        path: path.to_path_buf(),
        detail: "checkpoint ended early".to_string(),
    })
}

fn read_u64(cursor: &mut &[u8], path: &Path) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_chunk(cursor, &mut buf, path)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(cursor: &mut &[u8], path: &Path) -> Result<f64> {
    let mut buf = [0u8; 8];
    read_chunk(cursor, &mut buf, path)?;
    Ok(f64::from_le_bytes(buf))
}

fn ensure_consumed(cursor: &[u8], path: &Path) -> Result<()> {
    if cursor.is_empty() {
        Ok(())
    } else {
        Err(Error::Truncated {
            path: path.to_path_buf(),
            detail: format!("{} trailing bytes", cursor.len()),
        })
    }
}

pub fn save_anchor_model(path: &Path, model: &AnchorModel) -> Result<()> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(ANCHOR_MODEL_MAGIC);
    bytes.push(VERSION);
    bytes.extend_from_slice(&model.alpha.to_le_bytes());
    bytes.extend_from_slice(&(model.p as u64).to_le_bytes());
    bytes.push(model.act_hidden.id());
    bytes.push(model.act_output.id());
    write_binary(&mut bytes, &model.w_encode).expect("vec write cannot fail");
    write_binary(&mut bytes, &model.w_decode).expect("vec write cannot fail");
    write_file(path, bytes)
}

pub fn load_anchor_model(path: &Path) -> Result<AnchorModel> {
    let bytes = read_file(path)?;
    let mut cursor = bytes.as_slice();
    check_header(&mut cursor, path, ANCHOR_MODEL_MAGIC)?;
    let alpha = read_f64(&mut cursor, path)?;
    let p = read_u64(&mut cursor, path)? as usize;
    let mut acts = [0u8; 2];
    read_chunk(&mut cursor, &mut acts, path)?;
    let w_encode = read_binary(&mut cursor, path)?;
    let w_decode = read_binary(&mut cursor, path)?;
    ensure_consumed(cursor, path)?;
    Ok(AnchorModel {
        w_encode,
        w_decode,
        alpha,
        p,
        act_hidden: Activation::from_id(acts[0])?,
        act_output: Activation::from_id(acts[1])?,
    })
}

pub fn save_anchor_set(path: &Path, anchors: &AnchorSet) -> Result<()> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(ANCHOR_SET_MAGIC);
    bytes.push(VERSION);
    bytes.extend_from_slice(&(anchors.num_classes() as u64).to_le_bytes());
    bytes.extend_from_slice(&(anchors.num_attrs() as u64).to_le_bytes());
    write_binary(&mut bytes, anchors.matrix()).expect("vec write cannot fail");
    write_file(path, bytes)
}

pub fn load_anchor_set(path: &Path) -> Result<AnchorSet> {
    let bytes = read_file(path)?;
    let mut cursor = bytes.as_slice();
    check_header(&mut cursor, path, ANCHOR_SET_MAGIC)?;
    let num_classes = read_u64(&mut cursor, path)? as usize;
    let num_attrs = read_u64(&mut cursor, path)? as usize;
    let u = read_binary(&mut cursor, path)?;
    ensure_consumed(cursor, path)?;
    AnchorSet::new(u, num_classes, num_attrs)
}

pub fn save_align_model(path: &Path, model: &AlignModel) -> Result<()> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(ALIGN_MODEL_MAGIC);
    bytes.push(VERSION);
    bytes.extend_from_slice(&model.lambda1.to_le_bytes());
    bytes.extend_from_slice(&model.lambda2.to_le_bytes());
    let flags = (model.reg_enabled as u8) | ((model.tied_weights as u8) << 1) | ((model.per_sample as u8) << 2);
    bytes.push(flags);
    write_binary(&mut bytes, &model.w_cons).expect("vec write cannot fail");
    write_binary(&mut bytes, &model.w_recons).expect("vec write cannot fail");
    write_binary(&mut bytes, &model.metric).expect("vec write cannot fail");
    write_file(path, bytes)
}

pub fn load_align_model(path: &Path) -> Result<AlignModel> {
    let bytes = read_file(path)?;
    let mut cursor = bytes.as_slice();
    check_header(&mut cursor, path, ALIGN_MODEL_MAGIC)?;
    let lambda1 = read_f64(&mut cursor, path)?;
    let lambda2 = read_f64(&mut cursor, path)?;
    let mut flags = [0u8; 1];
    read_chunk(&mut cursor, &mut flags, path)?;
    let w_cons = read_binary(&mut cursor, path)?;
    let w_recons = read_binary(&mut cursor, path)?;
    let metric = read_binary(&mut cursor, path)?;
    ensure_consumed(cursor, path)?;
    let model = AlignModel {
        w_cons,
        w_recons,
        metric,
        lambda1,
        lambda2,
        reg_enabled: flags[0] & 1 != 0,
        tied_weights: flags[0] & 2 != 0,
        per_sample: flags[0] & 4 != 0,
    };
    model.validate()?;
    Ok(model)
}
