//! Binary embedding file and its JSON-lines sidecar.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                      |
//! |--------|------|----------------------------|
//! | 0      | 4    | magic `EMB1`               |
//! | 4      | 4    | version `u32` = 1          |
//! | 8      | 8    | rows `M` as `u64`          |
//! | 16     | 4    | dims `d` as `u32`          |
//! | 20     | 1    | dtype `u8` = 1 (f32)       |
//! | 21     | 7    | reserved, all zero         |
//! | 28     | 4·M·d | row-major `f32` payload   |
//!
//! The sidecar `<path>.meta.jsonl` has one object per row
//! (`{"token": .., "word": .., "sent": .., "freq"?: ..}`), optionally preceded
//! by a single `{"provenance": {..}}` line carrying `language`, `model_id` and
//! any other provenance keys.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde_json::{Map, Value};

use super::{validate_data, EmbeddingMatrix, TokenMeta};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EMB1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;
const DTYPE_F32: u8 = 1;

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.jsonl");
    PathBuf::from(s)
}

struct Header {
    rows: u64,
    dims: u32,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic, expected \"EMB1\"".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let dims = u32::from_le_bytes(bytes[16..20].try_into().unwrap());
    let dtype = bytes[20];
    if dtype != DTYPE_F32 {
        return Err(Error::Format(format!("unsupported dtype {dtype}")));
    }
    if bytes[21..28].iter().any(|&b| b != 0) {
        return Err(Error::Format("reserved header bytes are not zero".into()));
    }
    if rows == 0 || dims == 0 {
        return Err(Error::Format(format!("empty shape {rows}x{dims}")));
    }
    Ok(Header { rows, dims })
}

/// Loads an embedding file and its sidecar, validating every invariant.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let header = parse_header(&bytes)?;
    let payload = &bytes[HEADER_LEN..];
    let expected = (header.rows as u128) * (header.dims as u128) * 4;
    if payload.len() as u128 != expected {
        return Err(Error::Consistency(format!(
            "header declares {}x{} ({expected} payload bytes) but file holds {} payload bytes",
            header.rows,
            header.dims,
            payload.len()
        )));
    }
    let (rows, dims) = (header.rows as usize, header.dims as usize);
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let data = Array2::from_shape_vec((rows, dims), values)
        .map_err(|e| Error::Consistency(e.to_string()))?;
    validate_data(data.view())?;

    let (meta, provenance) = read_sidecar(&sidecar_path(path))?;
    if meta.len() != rows {
        return Err(Error::Consistency(format!(
            "sidecar has {} rows, matrix has {rows}",
            meta.len()
        )));
    }
    let mut m = EmbeddingMatrix::new(data, meta)?;
    let mut provenance = provenance;
    if let Some(Value::String(s)) = provenance.remove("language") {
        m.language = s;
    }
    if let Some(Value::String(s)) = provenance.remove("model_id") {
        m.model_id = s;
    }
    m.provenance = provenance;
    Ok(m)
}

fn read_sidecar(path: &Path) -> Result<(Vec<TokenMeta>, Map<String, Value>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut meta = Vec::new();
    let mut provenance = Map::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        if lineno == 0 {
            if let Some(Value::Object(p)) = value.get("provenance") {
                provenance = p.clone();
                continue;
            }
        }
        let m: TokenMeta = serde_json::from_value(value)
            .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        meta.push(m);
    }
    Ok((meta, provenance))
}

/// Writes `m` as an `f32` embedding file plus sidecar.
///
/// Values are narrowed to `f32`; a matrix whose values are already
/// `f32`-representable round-trips bit-exactly. Nothing is written if a value
/// is non-finite or overflows `f32`.
pub fn save_matrix(m: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut payload = Vec::with_capacity(HEADER_LEN + 4 * m.rows() * m.dims());
    payload.extend_from_slice(MAGIC);
    payload.extend_from_slice(&VERSION.to_le_bytes());
    payload.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    let dims = u32::try_from(m.dims())
        .map_err(|_| Error::Argument(format!("{} dimensions do not fit in u32", m.dims())))?;
    payload.extend_from_slice(&dims.to_le_bytes());
    payload.push(DTYPE_F32);
    payload.extend_from_slice(&[0u8; 7]);
    for (i, row) in m.data().rows().into_iter().enumerate() {
        for &v in row {
            let x = v as f32;
            if !x.is_finite() {
                return Err(Error::Data(format!(
                    "row {i} holds {v}, which is not a finite f32"
                )));
            }
            payload.extend_from_slice(&x.to_le_bytes());
        }
    }

    let mut sidecar = Vec::new();
    let mut prov = m.provenance.clone();
    prov.insert("language".into(), Value::String(m.language.clone()));
    prov.insert("model_id".into(), Value::String(m.model_id.clone()));
    let mut head = Map::new();
    head.insert("provenance".into(), Value::Object(prov));
    serde_json::to_writer(&mut sidecar, &Value::Object(head))
        .map_err(|e| Error::Format(e.to_string()))?;
    sidecar.push(b'\n');
    for meta in m.meta() {
        serde_json::to_writer(&mut sidecar, meta).map_err(|e| Error::Format(e.to_string()))?;
        sidecar.push(b'\n');
    }

    write_all(path, &payload)?;
    write_all(&sidecar_path(path), &sidecar)
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
