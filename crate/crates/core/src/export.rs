//! Binary complex arrays with JSON headers, and CSV dumps of Q.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::models::ModelSpec;
use crate::qmatrix::{ConservedLaw, QMatrix};
use crate::spectral::SpectralDecomposition;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

pub const DTYPE: &str = "complex128-le";
pub const LAYOUT: &str = "row-major";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayHeader {
    pub rows: usize,
    pub cols: usize,
    pub dtype: String,
    pub layout: String,
    #[serde(flatten)]
    pub meta: Map<String, Value>,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Writes `<stem>.bin` (re, im pairs as little-endian f64, row-major) and `<stem>.json`.
pub fn write_complex_array(stem: &Path, m: &CMatrix, meta: Map<String, Value>) -> Result<ArrayHeader> {
    let (bin, json) = paths(stem);
    let mut bytes = Vec::with_capacity(16 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let header = ArrayHeader {
        rows: m.nrows(),
        cols: m.ncols(),
        dtype: DTYPE.into(),
        layout: LAYOUT.into(),
        meta,
    };
    fs::write(bin, bytes)?;
    fs::write(json, serde_json::to_string_pretty(&header)? + "\n")?;
    Ok(header)
}

pub fn read_complex_array(stem: &Path) -> Result<(CMatrix, ArrayHeader)> {
    let (bin, json) = paths(stem);
    let header: ArrayHeader = serde_json::from_str(&fs::read_to_string(json)?)?;
    if header.dtype != DTYPE || header.layout != LAYOUT {
        return Err(Error::DimensionMismatch(format!(
            "unsupported array format {} / {}",
            header.dtype, header.layout
        )));
    }
    let bytes = fs::read(bin)?;
    if bytes.len() != 16 * header.rows * header.cols {
        return Err(Error::DimensionMismatch(format!(
            "{} bytes for a {}x{} complex array",
            bytes.len(),
            header.rows,
            header.cols
        )));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    let m = CMatrix::from_row_iterator(
        header.rows,
        header.cols,
        bytes.chunks_exact(16).map(|c| Complex64::new(f(&c[..8]), f(&c[8..]))),
    );
    Ok((m, header))
}

pub fn export_hamiltonian(stem: &Path, spec: &ModelSpec, h: &CMatrix) -> Result<ArrayHeader> {
    let mut meta = Map::new();
    meta.insert("family".into(), spec.name().into());
    meta.insert("l".into(), spec.l.into());
    meta.insert("local_dim".into(), spec.spin().dim().into());
    let couplings: Map<String, Value> = spec.couplings().into_iter().map(|(k, v)| (k.to_string(), v.into())).collect();
    meta.insert("couplings".into(), couplings.into());
    write_complex_array(stem, h, meta)
}

/// Eigenvectors as columns; energies, blocks and presplit labels go in the header.
pub fn export_decomposition(stem: &Path, dec: &SpectralDecomposition) -> Result<ArrayHeader> {
    let mut meta = Map::new();
    meta.insert("energies".into(), serde_json::to_value(&dec.energies)?);
    let blocks: Vec<[usize; 2]> = dec.blocks.iter().map(|r| [r.start, r.end]).collect();
    meta.insert("blocks".into(), serde_json::to_value(blocks)?);
    meta.insert("normalized".into(), dec.normalized.into());
    meta.insert("labels".into(), serde_json::to_value(&dec.labels)?);
    write_complex_array(stem, &dec.vectors, meta)
}

pub fn read_decomposition(stem: &Path) -> Result<SpectralDecomposition> {
    let (vectors, header) = read_complex_array(stem)?;
    let get = |key: &str| {
        header
            .meta
            .get(key)
            .cloned()
            .ok_or_else(|| Error::DimensionMismatch(format!("header lacks `{key}`")))
    };
    let energies: Vec<f64> = serde_json::from_value(get("energies")?)?;
    let blocks: Vec<[usize; 2]> = serde_json::from_value(get("blocks")?)?;
    Ok(SpectralDecomposition {
        energies,
        vectors,
        blocks: blocks.into_iter().map(|[a, b]| Range { start: a, end: b }).collect(),
        normalized: serde_json::from_value(get("normalized")?)?,
        labels: serde_json::from_value(get("labels")?)?,
    })
}

/// `index,lambda` rows in ascending order.
pub fn q_eigenvalue_csv(q: &QMatrix) -> String {
    let mut out = String::from("index,lambda\n");
    for (i, l) in q.eigenvalues().iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChargeRecord {
    /// Tr[T_α O] indexed like `GeneratorSet::easy()`.
    pub easy_coefficients: Vec<f64>,
    /// c_n in the energy eigenbasis.
    pub diagonal: Vec<f64>,
    pub commutator_residual: f64,
}

pub fn charge_records(laws: &[ConservedLaw]) -> Vec<ChargeRecord> {
    laws.iter()
        .map(|l| ChargeRecord {
            easy_coefficients: l.easy_expansion.iter().map(|(_, c)| *c).collect(),
            diagonal: l.coefficients.iter().copied().collect(),
            commutator_residual: l.commutator_residual,
        })
        .collect()
}
