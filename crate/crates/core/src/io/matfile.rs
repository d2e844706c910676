//! Matrix file formats.
//!
//! Two formats, chosen by extension:
//!
//! * `.dmat` — binary: magic `DMAT`, version byte `1`, rows and cols as
//!   64-bit little-endian unsigned integers, then row-major 64-bit
//!   little-endian IEEE 754 floats. Byte-identical across platforms and
//!   round-trips bitwise.
//! * `.txt` — text: first line `rows cols`, then one line per row of
//!   whitespace-separated decimals printed with 17 significant digits, which
//!   round-trips doubles exactly.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Mat;

pub(crate) const BINARY_MAGIC: &[u8; 4] = b"DMAT";
pub(crate) const BINARY_VERSION: u8 = 1;

/// Serialize in the binary layout into any writer (used standalone and as a
/// record inside checkpoint containers).
pub fn write_binary<W: Write>(w: &mut W, m: &Mat) -> std::io::Result<()> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&[BINARY_VERSION])?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for &v in m.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Inverse of [`write_binary`]. `path` is only used in error messages.
pub fn read_binary<R: Read>(r: &mut R, path: &Path) -> Result<Mat> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic, path, "magic bytes")?;
    if &magic != BINARY_MAGIC {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: format!("bad magic {magic:?}, expected \"DMAT\""),
        });
    }
    let mut version = [0u8; 1];
    read_exact(r, &mut version, path, "version byte")?;
    if version[0] != BINARY_VERSION {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: format!("unsupported version {}", version[0]),
        });
    }
    let mut dim = [0u8; 8];
    read_exact(r, &mut dim, path, "row count")?;
    let rows = u64::from_le_bytes(dim);
    read_exact(r, &mut dim, path, "column count")?;
    let cols = u64::from_le_bytes(dim);

    let count = rows
        .checked_mul(cols)
        .filter(|&c| c <= (usize::MAX as u64) / 8)
        .ok_or(Error::DimOverflow {
            path: path.to_path_buf(),
            rows,
            cols,
        })?;
    let mut data = Vec::with_capacity(count as usize);
    let mut buf = [0u8; 8];
    for i in 0..count {
        read_exact(r, &mut buf, path, &format!("value {i} of {count}"))?;
        data.push(f64::from_le_bytes(buf));
    }
    Mat::from_vec(rows as usize, cols as usize, data)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], path: &Path, what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Truncated {
                path: path.to_path_buf(),
                detail: format!("ended while reading {what}"),
            }
        } else {
            Error::io(format!("reading {}", path.display()), e)
        }
    })
}

fn write_text<W: Write>(w: &mut W, m: &Mat) -> std::io::Result<()> {
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

fn read_text(content: &str, path: &Path) -> Result<Mat> {
    let mut lines = content.lines();
    let header = lines.next().ok_or_else(|| Error::MalformedHeader {
        path: path.to_path_buf(),
        detail: "empty file".to_string(),
    })?;
    let mut parts = header.split_whitespace();
    let rows: u64 = parse_dim(parts.next(), path, "rows")?;
    let cols: u64 = parse_dim(parts.next(), path, "cols")?;
    if parts.next().is_some() {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: "header has more than two fields".to_string(),
        });
    }
    let count = rows
        .checked_mul(cols)
        .filter(|&c| c <= (usize::MAX as u64) / 8)
        .ok_or(Error::DimOverflow {
            path: path.to_path_buf(),
            rows,
            cols,
        })?;

    let mut data = Vec::with_capacity(count as usize);
    for token in lines.flat_map(str::split_whitespace) {
        if data.len() == count as usize {
            return Err(Error::Truncated {
                path: path.to_path_buf(),
                detail: format!("more than {count} values present"),
            });
        }
        let v: f64 = token.parse().map_err(|_| Error::Truncated {
            path: path.to_path_buf(),
            detail: format!("unparseable value {token:?} at position {}", data.len()),
        })?;
        data.push(v);
    }
    if data.len() != count as usize {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            detail: format!("{} values present, expected {count}", data.len()),
        });
    }
    Mat::from_vec(rows as usize, cols as usize, data)
}

fn parse_dim(token: Option<&str>, path: &Path, what: &str) -> Result<u64> {
    token
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: format!("missing or invalid {what}"),
        })
}

/// Write `m` to `path`; `.dmat` selects the binary format, `.txt` the text
/// format.
pub fn save_matrix(path: &Path, m: &Mat) -> Result<()> {
    let mut bytes = Vec::new();
    match extension(path)? {
        Format::Binary => write_binary(&mut bytes, m).expect("vec write cannot fail"),
        Format::Text => write_text(&mut bytes, m).expect("vec write cannot fail"),
    }
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Inverse of [`save_matrix`].
pub fn load_matrix(path: &Path) -> Result<Mat> {
    let format = extension(path)?;
    let bytes = fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(format!("reading {}", path.display()), e)
        }
    })?;
    match format {
        Format::Binary => {
            let mut cursor = bytes.as_slice();
            let m = read_binary(&mut cursor, path)?;
            if !cursor.is_empty() {
                return Err(Error::Truncated {
                    path: path.to_path_buf(),
                    detail: format!("{} trailing bytes after payload", cursor.len()),
                });
            }
            Ok(m)
        }
        Format::Text => {
            let content = String::from_utf8(bytes).map_err(|_| Error::MalformedHeader {
                path: path.to_path_buf(),
                detail: "file is not valid UTF-8".to_string(),
            })?;
            read_text(&content, path)
        }
    }
}

enum Format {
    Binary,
    Text,
}

fn extension(path: &Path) -> Result<Format> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("dmat") => Ok(Format::Binary),
        Some("txt") => Ok(Format::Text),
        other => Err(Error::InvalidArgument(format!(
            "matrix files use .dmat (binary) or .txt (text), got extension {other:?} for {}",
            path.display()
        ))),
    }
}
