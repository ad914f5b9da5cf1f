//! Periodic strip domains `Ω = {(s, y) : g₋(s) < y < g₊(s)}` and their
//! masked cell-centered discretization on a truncation `s ∈ [−T, T]`.
//!
//! Cells are ordered column-major: all active cells of column 0 (smallest
//! `s`) by increasing `y`, then column 1, and so on. Each cell records its
//! east/west/north/south active neighbours; a missing neighbour means a
//! zero-flux (Neumann) face.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::potential::Wells;

/// Sentinel for "no active neighbour".
pub const NONE: u32 = u32::MAX;

pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

/// Lower and upper boundary curves of one period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Flat cylinder `lower < y < upper`.
    Flat { lower: f64, upper: f64 },
    /// `lower < y < upper + amplitude · sin(2πs/L + phase)`.
    Sinusoidal {
        lower: f64,
        upper: f64,
        amplitude: f64,
        phase: f64,
    },
    /// Piecewise-linear periodic table sampled on `s ∈ [0, L)`.
    Table {
        s: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripSpec {
    /// Period `L`.
    pub period: f64,
    /// Bound `R` on `|y|`.
    pub half_width: f64,
    pub boundary: Boundary,
}

impl StripSpec {
    pub fn flat(period: f64, lower: f64, upper: f64) -> Self {
        Self {
            period,
            half_width: lower.abs().max(upper.abs()),
            boundary: Boundary::Flat { lower, upper },
        }
    }

    pub fn sinusoidal(period: f64, amplitude: f64, phase: f64) -> Self {
        Self {
            period,
            half_width: 1.0 + amplitude.abs(),
            boundary: Boundary::Sinusoidal {
                lower: 0.0,
                upper: 1.0,
                amplitude,
                phase,
            },
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.boundary, Boundary::Flat { .. })
    }

    pub fn lower(&self, s: f64) -> f64 {
        match &self.boundary {
            Boundary::Flat { lower, .. } | Boundary::Sinusoidal { lower, .. } => *lower,
            Boundary::Table { s: ts, lower, .. } => periodic_interp(ts, lower, self.period, s),
        }
    }

    pub fn upper(&self, s: f64) -> f64 {
        match &self.boundary {
            Boundary::Flat { upper, .. } => *upper,
            Boundary::Sinusoidal {
                upper,
                amplitude,
                phase,
                ..
            } => upper + amplitude * (2.0 * PI * s / self.period + phase).sin(),
            Boundary::Table { s: ts, upper, .. } => periodic_interp(ts, upper, self.period, s),
        }
    }

    /// Sampled checks: positive period, `g₋ < g₊`, `|g±| ≤ R`.
    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) || !(self.half_width > 0.0) {
            return Err(Error::Geometry("period and half-width must be positive".into()));
        }
        if let Boundary::Table { s, lower, upper } = &self.boundary {
            if s.is_empty() || s.len() != lower.len() || s.len() != upper.len() {
                return Err(Error::Geometry("boundary table columns differ in length".into()));
            }
            if s.windows(2).any(|w| w[1] <= w[0]) || s[0] < 0.0 || *s.last().unwrap() >= self.period {
                return Err(Error::Geometry("table s must increase within [0, L)".into()));
            }
        }
        let n = 1024;
        for k in 0..n {
            let s = self.period * k as f64 / n as f64;
            let (lo, hi) = (self.lower(s), self.upper(s));
            if hi <= lo {
                return Err(Error::EmptySection(format!("g+ <= g- at s = {s}")));
            }
            if lo.abs() > self.half_width + 1e-12 || hi.abs() > self.half_width + 1e-12 {
                return Err(Error::Geometry(format!(
                    "boundary exceeds R = {} at s = {s}",
                    self.half_width
                )));
            }
        }
        Ok(())
    }
}

fn periodic_interp(ts: &[f64], vs: &[f64], period: f64, s: f64) -> f64 {
    let n = ts.len();
    if n == 1 {
        return vs[0];
    }
    let x = s.rem_euclid(period);
    let k = match ts.iter().rposition(|&t| t <= x) {
        Some(k) => k,
        None => {
            // Between the last node (shifted down one period) and the first.
            let t0 = ts[n - 1] - period;
            let w = (x - t0) / (ts[0] - t0);
            return vs[n - 1] + w * (vs[0] - vs[n - 1]);
        }
    };
    let (t0, v0) = (ts[k], vs[k]);
    let (t1, v1) = if k + 1 < n {
        (ts[k + 1], vs[k + 1])
    } else {
        (ts[0] + period, vs[0])
    };
    v0 + (x - t0) / (t1 - t0) * (v1 - v0)
}

#[derive(Clone, Debug)]
pub struct DiscreteDomain {
    pub h: f64,
    /// Half-length `T`: columns cover `[−T, T]`.
    pub half_length: f64,
    pub period: f64,
    pub nx: usize,
    pub ny: usize,
    /// `y` of the lower edge of row 0.
    pub y0: f64,
    /// `L / h`.
    pub period_cells: usize,
    mask: Vec<bool>,
    grid_to_cell: Vec<u32>,
    cells: Vec<(u32, u32)>,
    col_start: Vec<usize>,
    nbr: Vec<[u32; 4]>,
    spec: Option<StripSpec>,
    /// Non-fatal adjustments (e.g. snapped `h`).
    pub notes: Vec<String>,
}

impl DiscreteDomain {
    /// Discretizes `spec` on `[−T, T]` with cell size close to `h`.
    ///
    /// `h` is snapped to `L / round(L/h)` (recorded in `notes`); `T` must be
    /// an integer multiple of `L`.
    pub fn build(spec: &StripSpec, h: f64, half_length: f64) -> Result<Self> {
        spec.validate()?;
        if !(h > 0.0) || !(half_length > 0.0) {
            return Err(Error::InvalidArgument("h and T must be positive".into()));
        }
        let l = spec.period;
        let mut notes = Vec::new();
        let p = (l / h).round().max(1.0) as usize;
        let h_snapped = l / p as f64;
        if ((l / h) - p as f64).abs() > 1e-9 {
            notes.push(format!("h snapped from {h} to {h_snapped} so that L/h = {p}"));
        }
        let periods = half_length / l;
        if (periods - periods.round()).abs() > 1e-9 || periods.round() < 1.0 {
            return Err(Error::Geometry(format!(
                "T = {half_length} is not an integer multiple of L = {l}"
            )));
        }
        let periods = periods.round() as usize;
        let h = h_snapped;
        let nx = 2 * periods * p;
        let half_length = periods as f64 * l;
        let ny = ((2.0 * spec.half_width / h) - 1e-9).ceil().max(1.0) as usize;
        let y0 = -spec.half_width;

        // One period of columns, replicated, so the mask is exactly periodic.
        let phase_cols: Vec<Vec<bool>> = (0..p)
            .map(|ip| {
                let s = -half_length + (ip as f64 + 0.5) * h;
                let (lo, hi) = (spec.lower(s), spec.upper(s));
                (0..ny)
                    .map(|j| {
                        let y = y0 + (j as f64 + 0.5) * h;
                        lo < y && y < hi
                    })
                    .collect()
            })
            .collect();
        let mut mask = vec![false; nx * ny];
        for i in 0..nx {
            mask[i * ny..(i + 1) * ny].copy_from_slice(&phase_cols[i % p]);
        }
        for (ip, col) in phase_cols.iter().enumerate() {
            if !col.iter().any(|&b| b) {
                return Err(Error::EmptySection(format!(
                    "column {ip} of the period has no active cells"
                )));
            }
        }
        let mut d = Self::assemble(h, half_length, l, nx, ny, y0, p, mask, Some(spec.clone()))?;
        d.notes = notes;
        Ok(d)
    }

    /// Builds a domain from an explicit `nx × ny` mask (index `i * ny + j`).
    pub fn from_mask(h: f64, half_length: f64, period: f64, ny: usize, y0: f64, mask: Vec<bool>) -> Result<Self> {
        let nx = (2.0 * half_length / h).round() as usize;
        if mask.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "mask has {} entries, expected {}",
                mask.len(),
                nx * ny
            )));
        }
        let p = (period / h).round().max(1.0) as usize;
        Self::assemble(h, half_length, period, nx, ny, y0, p, mask, None)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        h: f64,
        half_length: f64,
        period: f64,
        nx: usize,
        ny: usize,
        y0: f64,
        period_cells: usize,
        mask: Vec<bool>,
        spec: Option<StripSpec>,
    ) -> Result<Self> {
        let mut grid_to_cell = vec![NONE; nx * ny];
        let mut cells = Vec::new();
        let mut col_start = Vec::with_capacity(nx + 1);
        for i in 0..nx {
            col_start.push(cells.len());
            for j in 0..ny {
                if mask[i * ny + j] {
                    grid_to_cell[i * ny + j] = cells.len() as u32;
                    cells.push((i as u32, j as u32));
                }
            }
        }
        col_start.push(cells.len());
        if cells.is_empty() {
            return Err(Error::EmptyMask);
        }
        let at = |i: isize, j: isize| -> u32 {
            if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                NONE
            } else {
                grid_to_cell[i as usize * ny + j as usize]
            }
        };
        let nbr: Vec<[u32; 4]> = cells
            .iter()
            .map(|&(i, j)| {
                let (i, j) = (i as isize, j as isize);
                [at(i + 1, j), at(i - 1, j), at(i, j + 1), at(i, j - 1)]
            })
            .collect();
        if let Some(c) = nbr.iter().position(|n| n.iter().all(|&x| x == NONE)) {
            return Err(Error::Geometry(format!("cell {:?} has no active neighbour", cells[c])));
        }
        Ok(Self {
            h,
            half_length,
            period,
            nx,
            ny,
            y0,
            period_cells,
            mask,
            grid_to_cell,
            cells,
            col_start,
            nbr,
            spec,
            notes: Vec::new(),
        })
    }

    pub fn spec(&self) -> Option<&StripSpec> {
        self.spec.as_ref()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_ij(&self, c: usize) -> (usize, usize) {
        let (i, j) = self.cells[c];
        (i as usize, j as usize)
    }

    pub fn s_of_col(&self, i: usize) -> f64 {
        -self.half_length + (i as f64 + 0.5) * self.h
    }

    pub fn y_of_row(&self, j: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.h
    }

    pub fn center(&self, c: usize) -> (f64, f64) {
        let (i, j) = self.cell_ij(c);
        (self.s_of_col(i), self.y_of_row(j))
    }

    pub fn is_active(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.ny + j]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.nx || j >= self.ny {
            return None;
        }
        let c = self.grid_to_cell[i * self.ny + j];
        (c != NONE).then_some(c as usize)
    }

    /// Neighbour in direction [`EAST`], [`WEST`], [`NORTH`] or [`SOUTH`].
    #[inline]
    pub fn neighbor(&self, c: usize, dir: usize) -> Option<usize> {
        let n = self.nbr[c][dir];
        (n != NONE).then_some(n as usize)
    }

    #[inline]
    pub fn neighbors_raw(&self, c: usize) -> &[u32; 4] {
        &self.nbr[c]
    }

    /// Cell range of column `i`.
    pub fn column(&self, i: usize) -> std::ops::Range<usize> {
        self.col_start[i]..self.col_start[i + 1]
    }

    /// Column whose cell interval `[s_i − h/2, s_i + h/2)` contains `s`.
    pub fn column_at(&self, s: f64) -> usize {
        let i = ((s + self.half_length) / self.h).floor();
        (i.max(0.0) as usize).min(self.nx - 1)
    }

    /// Columns with center in the half-open window `[lo, hi)`.
    pub fn columns_in(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = ((lo + self.half_length) / self.h - 0.5).ceil().max(0.0) as usize;
        let b = ((hi + self.half_length) / self.h - 0.5).ceil().max(0.0) as usize;
        a.min(self.nx)..b.min(self.nx)
    }

    /// Columns with center in the open interval `(lo, hi)`.
    pub fn columns_open(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let r = self.columns_in(lo, hi);
        let start = if r.start < self.nx && self.s_of_col(r.start) <= lo {
            r.start + 1
        } else {
            r.start
        };
        start..r.end.max(start)
    }

    /// All faces `(a, b)` between active cells, each listed once (east and
    /// north faces of `a`).
    pub fn faces(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.num_cells() {
            for dir in [EAST, NORTH] {
                if let Some(n) = self.neighbor(c, dir) {
                    out.push((c, n));
                }
            }
        }
        out
    }

    /// Edge connectivity of the active cells of column `i` (flood fill).
    pub fn check_connectedness(&self, i: usize) -> bool {
        let cells: Vec<usize> = self.column(i).collect();
        if cells.is_empty() {
            return false;
        }
        let mut seen = vec![false; cells.len()];
        let base = cells[0];
        let mut stack = vec![base];
        seen[0] = true;
        let mut count = 1;
        while let Some(c) = stack.pop() {
            for dir in [NORTH, SOUTH] {
                if let Some(n) = self.neighbor(c, dir) {
                    let k = n - base;
                    if !seen[k] {
                        seen[k] = true;
                        count += 1;
                        stack.push(n);
                    }
                }
            }
        }
        count == cells.len()
    }

    /// Cross-section connectedness at `s = 0`.
    pub fn central_section_connected(&self) -> bool {
        self.check_connectedness(self.column_at(0.0))
    }

    /// Shifts `u` by one period: `direction = +1` moves the profile towards
    /// `+s` (`ũ(s) = u(s − L)`), `−1` towards `−s`. Cells whose source lies
    /// outside the truncation take the minimum on their side.
    pub fn translate_field_by_period(&self, u: &Field, direction: i32, wells: &Wells) -> Field {
        let m = u.dim();
        let p = self.period_cells as isize;
        let shift = if direction >= 0 { p } else { -p };
        let mut out = Field::zeros(m, self.num_cells());
        for c in 0..self.num_cells() {
            let (i, j) = self.cell_ij(c);
            let src_i = i as isize - shift;
            let src = if src_i >= 0 && (src_i as usize) < self.nx {
                self.index(src_i as usize, j)
            } else {
                None
            };
            let v = out.cell_mut(c);
            match src {
                Some(sc) => v.copy_from_slice(u.cell(sc)),
                None => {
                    let a = if self.s_of_col(i) > 0.0 {
                        &wells.a_plus
                    } else {
                        &wells.a_minus
                    };
                    v.copy_from_slice(a);
                }
            }
        }
        out
    }

    /// Whether the grid cell `(i, j)` with `i` possibly beyond the truncation
    /// lies inside the strip, using periodicity of the mask.
    pub fn is_inside_extended(&self, i: isize, j: usize) -> bool {
        if j >= self.ny {
            return false;
        }
        let p = self.period_cells as isize;
        let ii = if i >= 0 && (i as usize) < self.nx {
            i
        } else {
            i.rem_euclid(p)
        };
        self.mask[ii as usize * self.ny + j]
    }

    /// Mask as CSV rows `i,j,s,y,active`.
    pub fn mask_csv(&self) -> String {
        let mut out = String::from("i,j,s,y,active\n");
        for i in 0..self.nx {
            for j in 0..self.ny {
                out.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{}\n",
                    i,
                    j,
                    self.s_of_col(i),
                    self.y_of_row(j),
                    u8::from(self.mask[i * self.ny + j])
                ));
            }
        }
        out
    }
}
