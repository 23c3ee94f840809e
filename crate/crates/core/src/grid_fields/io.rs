//! CSV and flat-binary persistence for sampled fields.
//!
//! CSV layout: a grid record (`dim,cells_x,cells_y,origin_x,origin_y,cells_per_unit`),
//! a component header, then one row per cell in row-major order (`x` fastest).
//!
//! Binary layout (little endian): a 32-byte header
//!
//! ```text
//! 0..4   magic "HGLF"
//! 4      dim (u8)
//! 5      components per cell (u8)
//! 6..8   reserved (0)
//! 8..12  cells_x (u32)
//! 12..16 cells_y (u32, 1 when dim = 1)
//! 16..20 cells_per_unit (u32)
//! 20..24 origin_x in half-cells (i32)
//! 24..28 origin_y in half-cells (i32)
//! 28..32 reserved (0)
//! ```
//!
//! followed by `cells · components` 64-bit floats.

use std::io::{Read, Write};

use super::{Grid, MatrixField, ScalarField, SymMat, VectorField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HGLF";
pub const HEADER_LEN: usize = 32;

/// Field types that can be flattened to a fixed number of floats per cell.
pub trait CellData: Sized {
    fn grid(&self) -> &Grid;
    fn components(&self) -> usize;
    fn column_names(dim: usize) -> Vec<&'static str>;
    fn push_cell(&self, idx: usize, out: &mut Vec<f64>);
    fn from_flat(grid: Grid, data: Vec<f64>) -> Result<Self>;
}

impl CellData for ScalarField {
    fn grid(&self) -> &Grid {
        ScalarField::grid(self)
    }
    fn components(&self) -> usize {
        1
    }
    fn column_names(_: usize) -> Vec<&'static str> {
        vec!["value"]
    }
    fn push_cell(&self, idx: usize, out: &mut Vec<f64>) {
        out.push(self.values()[idx]);
    }
    fn from_flat(grid: Grid, data: Vec<f64>) -> Result<Self> {
        ScalarField::new(grid, data)
    }
}

impl CellData for MatrixField {
    fn grid(&self) -> &Grid {
        MatrixField::grid(self)
    }
    fn components(&self) -> usize {
        if self.grid().dim() == 1 {
            1
        } else {
            3
        }
    }
    fn column_names(dim: usize) -> Vec<&'static str> {
        if dim == 1 {
            vec!["a11"]
        } else {
            vec!["a11", "a12", "a22"]
        }
    }
    fn push_cell(&self, idx: usize, out: &mut Vec<f64>) {
        let m = self.at(idx);
        if self.grid().dim() == 1 {
            out.push(m.xx);
        } else {
            out.extend([m.xx, m.xy, m.yy]);
        }
    }
    fn from_flat(grid: Grid, data: Vec<f64>) -> Result<Self> {
        let values = if grid.dim() == 1 {
            data.into_iter().map(SymMat::scalar).collect()
        } else {
            data.chunks_exact(3)
                .map(|c| SymMat::new(c[0], c[1], c[2]))
                .collect()
        };
        MatrixField::new(grid, values)
    }
}

impl CellData for VectorField {
    fn grid(&self) -> &Grid {
        VectorField::grid(self)
    }
    fn components(&self) -> usize {
        self.grid().dim()
    }
    fn column_names(dim: usize) -> Vec<&'static str> {
        ["v1", "v2"][..dim].to_vec()
    }
    fn push_cell(&self, idx: usize, out: &mut Vec<f64>) {
        for c in self.components_slice() {
            out.push(c[idx]);
        }
    }
    fn from_flat(grid: Grid, data: Vec<f64>) -> Result<Self> {
        let d = grid.dim();
        let comps = (0..d)
            .map(|a| data.iter().skip(a).step_by(d).copied().collect())
            .collect();
        VectorField::new(grid, comps)
    }
}

impl VectorField {
    fn components_slice(&self) -> &[Vec<f64>] {
        self.components()
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<T: CellData, W: Write>(field: &T, writer: W) -> Result<()> {
    let g = field.grid();
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.write_record(["dim", "cells_x", "cells_y", "origin_x", "origin_y", "cells_per_unit"])?;
    let cells_y = g.cells().get(1).copied().unwrap_or(1);
    let origin_y = g.origin().get(1).copied().unwrap_or(0.0);
    w.write_record([
        g.dim().to_string(),
        g.cells()[0].to_string(),
        cells_y.to_string(),
        fmt_f64(g.origin()[0]),
        fmt_f64(origin_y),
        g.cells_per_unit().to_string(),
    ])?;
    w.write_record(T::column_names(g.dim()))?;
    let mut row = Vec::with_capacity(field.components());
    for idx in g.indices() {
        row.clear();
        field.push_cell(idx, &mut row);
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: CellData, R: Read>(reader: R) -> Result<T> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = r.records();
    let mut next = || -> Result<csv::StringRecord> {
        records
            .next()
            .ok_or_else(|| Error::Format("truncated CSV field".into()))?
            .map_err(Error::from)
    };
    let _ = next()?;
    let meta = next()?;
    if meta.len() != 6 {
        return Err(Error::Format("grid record needs six entries".into()));
    }
    let num = |i: usize| -> Result<f64> {
        meta[i]
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Format(format!("grid record entry {i}: {e}")))
    };
    let dim = num(0)? as usize;
    let cells = [num(1)? as usize, num(2)? as usize];
    let origin = [num(3)?, num(4)?];
    let grid = Grid::new(dim, &origin[..dim], num(5)? as usize, &cells[..dim])?;
    let header = next()?;
    let names = T::column_names(dim);
    if header.len() != names.len() {
        return Err(Error::Format(format!(
            "expected {} columns, header has {}",
            names.len(),
            header.len()
        )));
    }
    let mut data = Vec::with_capacity(grid.len() * names.len());
    for rec in records {
        let rec = rec?;
        if rec.len() != names.len() {
            return Err(Error::Format("ragged data row".into()));
        }
        for v in rec.iter() {
            data.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad value {v:?}: {e}")))?,
            );
        }
    }
    if data.len() != grid.len() * names.len() {
        return Err(Error::Format(format!(
            "expected {} rows, found {}",
            grid.len(),
            data.len() / names.len()
        )));
    }
    T::from_flat(grid, data)
}

fn half_cells(origin: f64, n: usize) -> Result<i32> {
    let s = origin * 2.0 * n as f64;
    let r = s.round();
    if (s - r).abs() > 1e-9 || r.abs() > i32::MAX as f64 {
        return Err(Error::Format(format!(
            "origin {origin} is not a multiple of h/2 and cannot be stored in the binary header"
        )));
    }
    Ok(r as i32)
}

pub fn write_binary<T: CellData, W: Write>(field: &T, mut w: W) -> Result<()> {
    let g = field.grid();
    let n = g.cells_per_unit();
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(MAGIC);
    header[4] = g.dim() as u8;
    header[5] = field.components() as u8;
    let cells_y = g.cells().get(1).copied().unwrap_or(1);
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit the binary header")))
    };
    header[8..12].copy_from_slice(&to_u32(g.cells()[0])?.to_le_bytes());
    header[12..16].copy_from_slice(&to_u32(cells_y)?.to_le_bytes());
    header[16..20].copy_from_slice(&to_u32(n)?.to_le_bytes());
    header[20..24].copy_from_slice(&half_cells(g.origin()[0], n)?.to_le_bytes());
    let oy = g.origin().get(1).copied().unwrap_or(0.0);
    header[24..28].copy_from_slice(&half_cells(oy, n)?.to_le_bytes());
    w.write_all(&header)?;
    let mut row = Vec::with_capacity(field.components());
    for idx in g.indices() {
        row.clear();
        field.push_cell(idx, &mut row);
        for v in &row {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<T: CellData, R: Read>(mut r: R) -> Result<T> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::Format("bad magic, expected HGLF".into()));
    }
    let dim = header[4] as usize;
    let comps = header[5] as usize;
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
    let i32_at = |o: usize| i32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as f64;
    let cells = [u32_at(8), u32_at(12)];
    let n = u32_at(16);
    let half_h = 0.5 / n.max(1) as f64;
    let origin = [i32_at(20) * half_h, i32_at(24) * half_h];
    if dim == 0 || dim > 2 {
        return Err(Error::Format(format!("bad dimension {dim}")));
    }
    let grid = Grid::new(dim, &origin[..dim], n, &cells[..dim])?;
    if comps != T::column_names(dim).len() {
        return Err(Error::Format(format!(
            "file holds {comps} components per cell, expected {}",
            T::column_names(dim).len()
        )));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * comps * 8 {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            grid.len() * comps * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    T::from_flat(grid, data)
}
