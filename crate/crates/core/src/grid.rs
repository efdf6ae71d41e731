//! Rectangularly sampled scalar fields over the pitch and their file exports.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Geometry of a rectangular cell grid: origin is the lower-left corner of
/// cell (0, 0); values are sampled at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec2,
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: Vec2, cell_size: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || cell_size <= 0.0 {
            return Err(Error::EmptyWindow);
        }
        Ok(GridSpec {
            origin,
            cell_size,
            nx,
            ny,
        })
    }

    /// Grid covering the axis-aligned window [x_min, x_max] x [y_min, y_max].
    pub fn covering(x_min: f64, x_max: f64, y_min: f64, y_max: f64, cell_size: f64) -> Result<Self> {
        if !(x_max > x_min && y_max > y_min && cell_size > 0.0) {
            return Err(Error::EmptyWindow);
        }
        let nx = ((x_max - x_min) / cell_size).ceil() as usize;
        let ny = ((y_max - y_min) / cell_size).ceil() as usize;
        GridSpec::new(Vec2::new(x_min, y_min), cell_size, nx, ny)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (i as f64 + 0.5) * self.cell_size,
            self.origin.y + (j as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How grid cells are evaluated. Parallel evaluation partitions cells across
/// workers; per-cell arithmetic is identical, so results are bitwise equal to
/// serial evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    Serial,
    #[default]
    Parallel,
}

/// A scalar field sampled over a [`GridSpec`]; `mask[idx]` is false for cells
/// excluded from export and summaries (e.g. outside the pitch boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub spec: GridSpec,
    /// Row-major, index = j * nx + i.
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl FieldGrid {
    pub fn filled(spec: GridSpec, value: f64) -> Self {
        let n = spec.len();
        FieldGrid {
            spec,
            values: vec![value; n],
            mask: vec![true; n],
        }
    }

    /// Evaluate `f` at every cell center. `masked(center)` decides cell
    /// inclusion; excluded cells hold 0.0.
    pub fn from_fn<F, M>(spec: GridSpec, mode: EvalMode, masked: M, f: F) -> Self
    where
        F: Fn(Vec2) -> f64 + Sync,
        M: Fn(Vec2) -> bool + Sync,
    {
        let eval = |idx: usize| {
            let (i, j) = (idx % spec.nx, idx / spec.nx);
            let center = spec.cell_center(i, j);
            if masked(center) {
                (f(center), true)
            } else {
                (0.0, false)
            }
        };
        let cells: Vec<(f64, bool)> = match mode {
            EvalMode::Serial => (0..spec.len()).map(eval).collect(),
            EvalMode::Parallel => (0..spec.len()).into_par_iter().map(eval).collect(),
        };
        let (values, mask) = cells.into_iter().unzip();
        FieldGrid { spec, values, mask }
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.spec.nx + i
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    /// Cellwise sum; masks intersect.
    pub fn add_assign(&mut self, other: &FieldGrid) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridSpecMismatch);
        }
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += o;
        }
        for (m, o) in self.mask.iter_mut().zip(&other.mask) {
            *m = *m && *o;
        }
        Ok(())
    }

    /// Minimum and maximum over masked-in cells.
    pub fn masked_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for (v, m) in self.values.iter().zip(&self.mask) {
            if *m {
                range = Some(match range {
                    None => (*v, *v),
                    Some((lo, hi)) => (lo.min(*v), hi.max(*v)),
                });
            }
        }
        range
    }

    /// Bilinear interpolation of the field at a point, treating stored values
    /// as samples at cell centers and clamping to the grid edge.
    pub fn bilinear(&self, p: Vec2) -> f64 {
        let fx = ((p.x - self.spec.origin.x) / self.spec.cell_size - 0.5)
            .clamp(0.0, (self.spec.nx - 1) as f64);
        let fy = ((p.y - self.spec.origin.y) / self.spec.cell_size - 0.5)
            .clamp(0.0, (self.spec.ny - 1) as f64);
        let i0 = fx.floor() as usize;
        let j0 = fy.floor() as usize;
        let i1 = (i0 + 1).min(self.spec.nx - 1);
        let j1 = (j0 + 1).min(self.spec.ny - 1);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let v00 = self.value(i0, j0);
        let v10 = self.value(i1, j0);
        let v01 = self.value(i0, j1);
        let v11 = self.value(i1, j1);
        (v00 * (1.0 - tx) + v10 * tx) * (1.0 - ty) + (v01 * (1.0 - tx) + v11 * tx) * ty
    }

    /// Write masked-in cells as `x,y,value` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,value")?;
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                if self.mask[self.idx(i, j)] {
                    let c = self.spec.cell_center(i, j);
                    writeln!(out, "{},{},{}", c.x, c.y, self.value(i, j))?;
                }
            }
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut f)
    }

    /// Plain (P3) grayscale PPM, mapping [lo, hi] linearly onto 0..=255 with
    /// clamping. Masked-out cells render black. Top image row is the
    /// highest-y grid row.
    pub fn write_ppm<W: Write>(&self, mut out: W, lo: f64, hi: f64) -> Result<()> {
        writeln!(out, "P3")?;
        writeln!(out, "{} {}", self.spec.nx, self.spec.ny)?;
        writeln!(out, "255")?;
        let span = hi - lo;
        for j in (0..self.spec.ny).rev() {
            let mut row = String::with_capacity(self.spec.nx * 12);
            for i in 0..self.spec.nx {
                let idx = self.idx(i, j);
                let level = if self.mask[idx] && span > 0.0 {
                    (((self.values[idx] - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8
                } else {
                    0
                };
                if i > 0 {
                    row.push(' ');
                }
                row.push_str(&format!("{level} {level} {level}"));
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }

    pub fn write_ppm_path(&self, path: &Path, lo: f64, hi: f64) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_ppm(&mut f, lo, hi)
    }
}
