//! Transform file format.
//!
//! A single JSON document:
//!
//! ```json
//! {
//!   "format": "cwr-isotropy-transform",
//!   "version": 1,
//!   "k": 7, "d": 768, "d_remove": 12,
//!   "encoding": "base64-f64le",
//!   "provenance": { "source_language": "en", ... },
//!   "clusters": [
//!     { "size": 1234, "centroid": "<base64>", "components": "<base64>" },
//!     ...
//!   ]
//! }
//! ```
//!
//! `centroid` decodes to `d` little-endian `f64`s; `components` decodes to
//! `d_remove · d` little-endian `f64`s, row-major.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{check_orthonormal, FitProvenance, IsotropyTransform, TransformCluster, ORTHONORMAL_TOL};
use crate::error::{Error, Result};

pub const TRANSFORM_FORMAT: &str = "cwr-isotropy-transform";
pub const TRANSFORM_VERSION: u32 = 1;
const ENCODING: &str = "base64-f64le";

#[derive(Serialize, Deserialize)]
struct ClusterRecord {
    size: usize,
    centroid: String,
    components: String,
}

#[derive(Serialize, Deserialize)]
struct TransformFile {
    format: String,
    version: u32,
    k: usize,
    d: usize,
    d_remove: usize,
    encoding: String,
    provenance: FitProvenance,
    clusters: Vec<ClusterRecord>,
}

fn encode(values: impl IntoIterator<Item = f64>) -> String {
    let bytes: Vec<u8> = values.into_iter().flat_map(f64::to_le_bytes).collect();
    STANDARD.encode(bytes)
}

fn decode(s: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let bytes = STANDARD
        .decode(s)
        .map_err(|e| Error::Format(format!("{what}: invalid base64: {e}")))?;
    if bytes.len() != expected * 8 {
        return Err(Error::Format(format!(
            "{what}: expected {expected} values, found {} bytes",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format(format!("{what}: non-finite value")));
    }
    Ok(values)
}

pub fn to_json(t: &IsotropyTransform) -> Result<String> {
    let file = TransformFile {
        format: TRANSFORM_FORMAT.into(),
        version: TRANSFORM_VERSION,
        k: t.k,
        d: t.d,
        d_remove: t.d_remove,
        encoding: ENCODING.into(),
        provenance: t.provenance.clone(),
        clusters: t
            .clusters
            .iter()
            .map(|c| ClusterRecord {
                size: c.size,
                centroid: encode(c.centroid.iter().copied()),
                components: encode(c.components.iter().copied()),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json(text: &str) -> Result<IsotropyTransform> {
    let file: TransformFile =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("transform file: {e}")))?;
    if file.format != TRANSFORM_FORMAT {
        return Err(Error::Format(format!("unexpected format tag {:?}", file.format)));
    }
    if file.version != TRANSFORM_VERSION {
        return Err(Error::Format(format!("unsupported transform version {}", file.version)));
    }
    if file.encoding != ENCODING {
        return Err(Error::Format(format!("unsupported encoding {:?}", file.encoding)));
    }
    if file.k == 0 || file.d == 0 || file.d_remove > file.d {
        return Err(Error::Format(format!(
            "invalid shape k={} d={} d_remove={}",
            file.k, file.d, file.d_remove
        )));
    }
    if file.clusters.len() != file.k {
        return Err(Error::Format(format!(
            "header says k={} but {} clusters are stored",
            file.k,
            file.clusters.len()
        )));
    }
    let mut clusters = Vec::with_capacity(file.k);
    for (c, rec) in file.clusters.iter().enumerate() {
        let centroid = Array1::from(decode(&rec.centroid, file.d, &format!("cluster {c} centroid"))?);
        let comps = decode(
            &rec.components,
            file.d_remove * file.d,
            &format!("cluster {c} components"),
        )?;
        let components = Array2::from_shape_vec((file.d_remove, file.d), comps)
            .map_err(|e| Error::Format(e.to_string()))?;
        check_orthonormal(components.view(), ORTHONORMAL_TOL)
            .map_err(|msg| Error::Format(format!("cluster {c}: {msg}")))?;
        clusters.push(TransformCluster {
            centroid,
            components,
            size: rec.size,
        });
    }
    Ok(IsotropyTransform {
        k: file.k,
        d: file.d,
        d_remove: file.d_remove,
        clusters,
        provenance: file.provenance,
    })
}

pub fn save_transform(t: &IsotropyTransform, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = to_json(t)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_transform(path: impl AsRef<Path>) -> Result<IsotropyTransform> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
