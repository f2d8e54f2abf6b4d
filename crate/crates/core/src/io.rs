//! The `.lrt` container: a single-line JSON header followed by raw
//! little-endian 64-bit floats.
//!
//! Header: `{"magic":"LRT1","kind":"field"|"sinogram","n":…,"dims":[…],
//! "extents":[…],"dtype":"f64le","meta":{…}}` terminated by `\n`.
//!
//! * field: `dims = [nt, nx, …, nx]`, `extents = [T, R]`; body offset of the
//!   sample at `(i_t, i_x1, …)` is `i_t + nt·(i_x1 + nx·(i_x2 + nx·i_x3))`
//!   (time fastest).
//! * sinogram: `dims = [n_dirs, nz, …, nz]`, `extents = [z_extent]`; body is
//!   direction-major, `i_dir·nz^n + (i_z1 + nz·(i_z2 + nz·i_z3))`.  The
//!   direction set is reconstructed from `meta.chart`.
//!
//! Field order in the header is fixed by the serializer, so
//! write → read → write is byte-identical.

use crate::error::Error;
use crate::geometry::chart::{RayChart, Sinogram};
use crate::geometry::grid::{ScalarField, SpacetimeGrid};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &str = "LRT1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LrtHeader {
    pub magic: String,
    pub kind: String,
    pub n: usize,
    pub dims: Vec<usize>,
    pub extents: Vec<f64>,
    pub dtype: String,
    #[serde(default)]
    pub meta: Meta,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartMeta>,
    /// Provenance: command line, seed, crate version.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
}

/// Enough information to rebuild the direction set bit-exactly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartMeta {
    Circle { n_angles: usize },
    Sphere { n_polar: usize, n_azimuth: usize },
}

#[derive(Debug, thiserror::Error)]
pub enum LrtError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing newline-terminated header within the first {0} bytes")]
    HeaderTooLong(usize),
    #[error("malformed header at byte {offset}: {source}")]
    BadHeader {
        offset: usize,
        source: serde_json::Error,
    },
    #[error("magic mismatch: expected \"{MAGIC}\", found \"{found}\"")]
    BadMagic { found: String },
    #[error("dims/extents mismatch: {0}")]
    BadShape(String),
    #[error("short body: expected {expected} bytes, found {found} (file offset {offset})")]
    ShortBody {
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("{0}")]
    Invalid(String),
}

impl From<Error> for LrtError {
    fn from(e: Error) -> Self {
        LrtError::Invalid(e.to_string())
    }
}

const MAX_HEADER: usize = 1 << 16;

fn write_lrt(path: &Path, header: &LrtHeader, body: &[f64]) -> std::result::Result<(), LrtError> {
    let expected: usize = header.dims.iter().product();
    if expected != body.len() {
        return Err(LrtError::BadShape(format!(
            "header dims product {} vs body length {}",
            expected,
            body.len()
        )));
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut file, header).map_err(|e| LrtError::BadHeader {
        offset: 0,
        source: e,
    })?;
    file.write_all(b"\n")?;
    for v in body {
        file.write_all(&v.to_le_bytes())?;
    }
    file.flush()?;
    Ok(())
}

fn read_lrt(path: &Path) -> std::result::Result<(LrtHeader, Vec<f64>), LrtError> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut header_bytes = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if header_bytes.len() >= MAX_HEADER {
            return Err(LrtError::HeaderTooLong(MAX_HEADER));
        }
        let got = file.read(&mut byte)?;
        if got == 0 {
            return Err(LrtError::BadHeader {
                offset: header_bytes.len(),
                source: serde_json::Error::io(std::io::Error::new(
                    std::io::ErrorKind::UnexpectedEof,
                    "no newline before end of file",
                )),
            });
        }
        if byte[0] == b'\n' {
            break;
        }
        header_bytes.push(byte[0]);
    }
    let header: LrtHeader =
        serde_json::from_slice(&header_bytes).map_err(|e| LrtError::BadHeader {
            offset: e.column().saturating_sub(1),
            source: e,
        })?;
    if header.magic != MAGIC {
        return Err(LrtError::BadMagic {
            found: header.magic.clone(),
        });
    }
    if header.dtype != "f64le" {
        return Err(LrtError::Invalid(format!(
            "unsupported dtype {}",
            header.dtype
        )));
    }
    let expected: usize = header.dims.iter().product();
    let mut raw = Vec::new();
    file.read_to_end(&mut raw)?;
    if raw.len() != expected * 8 {
        return Err(LrtError::ShortBody {
            expected: expected * 8,
            found: raw.len(),
            offset: header_bytes.len() + 1 + raw.len(),
        });
    }
    let body: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, body))
}

pub fn write_field(
    path: impl AsRef<Path>,
    field: &ScalarField,
    mut meta: Meta,
) -> std::result::Result<(), LrtError> {
    let g = &field.grid;
    let mut dims = vec![g.nt()];
    dims.extend(std::iter::repeat_n(g.nx(), g.n()));
    if meta.label.is_none() {
        meta.label = Some(field.label.clone());
    }
    let header = LrtHeader {
        magic: MAGIC.into(),
        kind: "field".into(),
        n: g.n(),
        dims,
        extents: vec![g.t_extent(), g.x_extent()],
        dtype: "f64le".into(),
        meta,
    };
    write_lrt(path.as_ref(), &header, &field.values)
}

pub fn read_field(path: impl AsRef<Path>) -> std::result::Result<ScalarField, LrtError> {
    let (header, body) = read_lrt(path.as_ref())?;
    if header.kind != "field" {
        return Err(LrtError::Invalid(format!(
            "expected kind \"field\", found \"{}\"",
            header.kind
        )));
    }
    if header.dims.len() != header.n + 1 || header.extents.len() != 2 {
        return Err(LrtError::BadShape(format!(
            "field needs 1+n dims and 2 extents, got {:?} / {:?}",
            header.dims, header.extents
        )));
    }
    let nx = header.dims[1];
    if header.dims[1..].iter().any(|&d| d != nx) {
        return Err(LrtError::BadShape("anisotropic spatial dims".into()));
    }
    let grid = SpacetimeGrid::new(
        header.n,
        header.extents[0],
        header.extents[1],
        header.dims[0],
        nx,
    )?;
    let label = header.meta.label.clone().unwrap_or_default();
    Ok(ScalarField::new(grid, body, label)?)
}

pub fn write_sinogram(
    path: impl AsRef<Path>,
    sino: &Sinogram,
    chart_meta: ChartMeta,
    mut meta: Meta,
) -> std::result::Result<(), LrtError> {
    let c = &sino.chart;
    let mut dims = vec![c.directions().len()];
    dims.extend(std::iter::repeat_n(c.nz(), c.n()));
    meta.chart = Some(chart_meta);
    let header = LrtHeader {
        magic: MAGIC.into(),
        kind: "sinogram".into(),
        n: c.n(),
        dims,
        extents: vec![c.z_extent()],
        dtype: "f64le".into(),
        meta,
    };
    write_lrt(path.as_ref(), &header, &sino.values)
}

pub fn read_sinogram(path: impl AsRef<Path>) -> std::result::Result<Sinogram, LrtError> {
    let (header, body) = read_lrt(path.as_ref())?;
    if header.kind != "sinogram" {
        return Err(LrtError::Invalid(format!(
            "expected kind \"sinogram\", found \"{}\"",
            header.kind
        )));
    }
    if header.dims.len() != header.n + 1 || header.extents.len() != 1 {
        return Err(LrtError::BadShape(format!(
            "sinogram needs 1+n dims and 1 extent, got {:?} / {:?}",
            header.dims, header.extents
        )));
    }
    let nz = header.dims[1];
    let chart = match header.meta.chart {
        Some(ChartMeta::Circle { n_angles }) => {
            if header.n != 2 {
                return Err(LrtError::BadShape("circle chart needs n = 2".into()));
            }
            RayChart::circle(header.extents[0], nz, n_angles)?
        }
        Some(ChartMeta::Sphere { n_polar, n_azimuth }) => {
            if header.n != 3 {
                return Err(LrtError::BadShape("sphere chart needs n = 3".into()));
            }
            RayChart::sphere(header.extents[0], nz, n_polar, n_azimuth)?
        }
        None => {
            return Err(LrtError::Invalid(
                "sinogram header lacks meta.chart".into(),
            ))
        }
    };
    if chart.directions().len() != header.dims[0] {
        return Err(LrtError::BadShape(format!(
            "chart meta yields {} directions but dims[0] = {}",
            chart.directions().len(),
            header.dims[0]
        )));
    }
    if chart.len() != body.len() {
        return Err(LrtError::BadShape(format!(
            "chart size {} vs body length {}",
            chart.len(),
            body.len()
        )));
    }
    Ok(Sinogram {
        chart,
        values: body,
    })
}
