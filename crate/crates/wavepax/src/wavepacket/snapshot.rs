//! Field snapshots: a binary container (JSON header + little-endian complex
//! payload) and CSV export of 1D fields.
//!
//! Binary layout: the 8-byte magic `WPXSNAP1`, a little-endian `u64` header
//! length, the UTF-8 JSON header, then `ncomp × nodes` complex values in
//! components-major order, each stored as (re, im) little-endian floats.

use super::field::{Frame, ModalField};
use super::grid::Grid;
use crate::error::{invalid, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"WPXSNAP1";

/// Floating-point width of the payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Complex64,
    Complex128,
}

/// Snapshot header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub grid: Grid,
    pub ncomp: usize,
    pub frame: Frame,
    pub precision: Precision,
    /// Time of the sample, when part of a trajectory.
    #[serde(default)]
    pub tau: Option<f64>,
}

/// Writes `field` to `w`.
pub fn write_snapshot<W: Write>(
    mut w: W,
    field: &ModalField,
    tau: Option<f64>,
    precision: Precision,
) -> Result<()> {
    let header = SnapshotHeader {
        grid: field.grid.clone(),
        ncomp: field.ncomp,
        frame: field.frame,
        precision,
        tau,
    };
    let json = serde_json::to_vec(&header)?;
    let mut buf = Vec::with_capacity(16 + json.len() + field.data.len() * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&json);
    for z in &field.data {
        match precision {
            Precision::Complex128 => {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
            Precision::Complex64 => {
                buf.extend_from_slice(&(z.re as f32).to_le_bytes());
                buf.extend_from_slice(&(z.im as f32).to_le_bytes());
            }
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a snapshot from `r`.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<(SnapshotHeader, ModalField)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return invalid("not a wavepax snapshot");
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    if bytes.len() < 16 + hlen {
        return invalid("truncated snapshot header");
    }
    let header: SnapshotHeader = serde_json::from_slice(&bytes[16..16 + hlen])?;
    let count = header.ncomp * header.grid.len();
    let payload = &bytes[16 + hlen..];
    let width = match header.precision {
        Precision::Complex64 => 4,
        Precision::Complex128 => 8,
    };
    if payload.len() != count * 2 * width {
        return invalid(format!(
            "snapshot payload has {} bytes, expected {}",
            payload.len(),
            count * 2 * width
        ));
    }
    let read = |i: usize| -> f64 {
        let b = &payload[i * width..(i + 1) * width];
        if width == 8 {
            f64::from_le_bytes(b.try_into().expect("8 bytes"))
        } else {
            f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64
        }
    };
    let data = (0..count)
        .map(|i| Complex64::new(read(2 * i), read(2 * i + 1)))
        .collect();
    let field = ModalField::from_data(&header.grid, header.ncomp, header.frame, data)?;
    Ok((header, field))
}

/// Writes `field` to the file at `path`.
pub fn save_snapshot(
    path: &Path,
    field: &ModalField,
    tau: Option<f64>,
    precision: Precision,
) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_snapshot(f, field, tau, precision)
}

/// Reads a snapshot file.
pub fn load_snapshot(path: &Path) -> Result<(SnapshotHeader, ModalField)> {
    read_snapshot(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Writes a 1D field as CSV with columns `k, re_0, im_0, re_1, im_1, …`.
pub fn write_csv_1d<W: Write>(w: W, field: &ModalField) -> Result<()> {
    if field.grid.d != 1 {
        return invalid("CSV export is limited to 1D fields");
    }
    let mut out = csv::Writer::from_writer(w);
    let mut head = vec!["k".to_string()];
    for c in 0..field.ncomp {
        head.push(format!("re_{c}"));
        head.push(format!("im_{c}"));
    }
    out.write_record(&head)?;
    let len = field.nodes();
    for idx in 0..len {
        let mut row = vec![format!("{:e}", field.grid.k_axis(idx))];
        for c in 0..field.ncomp {
            let z = field.data[c * len + idx];
            row.push(format!("{:e}", z.re));
            row.push(format!("{:e}", z.im));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
