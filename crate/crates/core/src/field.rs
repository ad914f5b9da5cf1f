//! Discrete fields, the finite-volume energy
//! `J(u) = ½ Σ_faces |u_A − u_B|² + h² Σ_cells W(u)` and its
//! Euler–Lagrange residual.
//!
//! The residual is exactly `−h⁻²` times the energy gradient, so a critical
//! point of the discrete energy solves the discrete equation with zero-flux
//! boundary faces.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exec::{ksum, Exec, KahanSum};
use crate::geometry::{DiscreteDomain, EAST, NONE, NORTH};
use crate::potential::Potential;

/// One `m`-vector per active cell, stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    m: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(m: usize, cells: usize) -> Self {
        Self {
            m,
            data: vec![0.0; m * cells],
        }
    }

    pub fn from_vec(m: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len() % m, 0, "data length not a multiple of m");
        Self { m, data }
    }

    pub fn constant(d: &DiscreteDomain, value: &[f64]) -> Self {
        let mut data = Vec::with_capacity(value.len() * d.num_cells());
        for _ in 0..d.num_cells() {
            data.extend_from_slice(value);
        }
        Self { m: value.len(), data }
    }

    /// Samples `f(s, y, out)` at every cell center.
    pub fn from_fn<F>(d: &DiscreteDomain, m: usize, mut f: F) -> Self
    where
        F: FnMut(f64, f64, &mut [f64]),
    {
        let mut out = Self::zeros(m, d.num_cells());
        for c in 0..d.num_cells() {
            let (s, y) = d.center(c);
            f(s, y, out.cell_mut(c));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn num_cells(&self) -> usize {
        self.data.len() / self.m
    }

    #[inline]
    pub fn cell(&self, c: usize) -> &[f64] {
        &self.data[c * self.m..(c + 1) * self.m]
    }

    #[inline]
    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.m..(c + 1) * self.m]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `max_cells |u|`.
    pub fn sup_norm(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| crate::linalg::norm(self.cell(c)))
            .fold(0.0, f64::max)
    }

    /// `max_cells,components |u − v|`.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub potential: f64,
    pub total: f64,
}

/// Per-column (dirichlet, potential) contributions, faces owned by their
/// west/south cell.
fn column_terms<P: Potential + ?Sized>(d: &DiscreteDomain, u: &[f64], m: usize, p: &P, i: usize) -> (f64, f64) {
    let mut dir = KahanSum::new();
    let mut pot = KahanSum::new();
    for c in d.column(i) {
        let uc = &u[c * m..(c + 1) * m];
        let nb = d.neighbors_raw(c);
        for dirn in [EAST, NORTH] {
            let n = nb[dirn];
            if n != NONE {
                let un = &u[n as usize * m..(n as usize + 1) * m];
                let sq: f64 = uc.iter().zip(un).map(|(a, b)| (a - b) * (a - b)).sum();
                dir.add(0.5 * sq);
            }
        }
        pot.add(p.value(uc));
    }
    (dir.value(), pot.value())
}

/// Finite-volume energy over all cells, or over the columns whose centers
/// lie in the half-open window `[lo, hi)`. A face between columns `i` and
/// `i + 1` belongs to column `i`.
pub fn energy<P: Potential + ?Sized>(
    d: &DiscreteDomain,
    u: &Field,
    p: &P,
    window: Option<(f64, f64)>,
) -> EnergyBreakdown {
    energy_with(Exec::default(), d, u, p, window)
}

pub fn energy_with<P: Potential + ?Sized>(
    exec: Exec,
    d: &DiscreteDomain,
    u: &Field,
    p: &P,
    window: Option<(f64, f64)>,
) -> EnergyBreakdown {
    let cols = match window {
        Some((lo, hi)) => d.columns_in(lo, hi),
        None => 0..d.nx,
    };
    energy_columns(exec, d, u.as_slice(), u.dim(), p, cols)
}

pub(crate) fn energy_columns<P: Potential + ?Sized>(
    exec: Exec,
    d: &DiscreteDomain,
    u: &[f64],
    m: usize,
    p: &P,
    cols: std::ops::Range<usize>,
) -> EnergyBreakdown {
    let start = cols.start;
    let parts = exec.map(cols.len(), |k| column_terms(d, u, m, p, start + k));
    let dirichlet = ksum(&parts.iter().map(|x| x.0).collect::<Vec<_>>());
    let potential = d.h * d.h * ksum(&parts.iter().map(|x| x.1).collect::<Vec<_>>());
    EnergyBreakdown {
        dirichlet,
        potential,
        total: dirichlet + potential,
    }
}

/// Energy of the columns with center in the open slab `(s̄ − δ, s̄ + δ)`.
pub fn slab_energy<P: Potential + ?Sized>(d: &DiscreteDomain, u: &Field, p: &P, center: f64, delta: f64) -> f64 {
    energy_columns(
        Exec::default(),
        d,
        u.as_slice(),
        u.dim(),
        p,
        d.columns_open(center - delta, center + delta),
    )
    .total
}

/// `Σ_nbrs (u_n − u_c)/h² − W_u(u_c)` per cell; missing neighbours carry no
/// flux.
pub fn residual<P: Potential + ?Sized>(d: &DiscreteDomain, u: &Field, p: &P) -> Field {
    residual_with(Exec::default(), d, u, p)
}

pub fn residual_with<P: Potential + ?Sized>(exec: Exec, d: &DiscreteDomain, u: &Field, p: &P) -> Field {
    let m = u.dim();
    let mut out = Field::zeros(m, d.num_cells());
    residual_into(exec, d, u.as_slice(), m, p, out.as_mut_slice());
    out
}

pub(crate) fn residual_into<P: Potential + ?Sized>(
    exec: Exec,
    d: &DiscreteDomain,
    data: &[f64],
    m: usize,
    p: &P,
    out: &mut [f64],
) {
    let inv_h2 = 1.0 / (d.h * d.h);
    exec.for_each_chunk(out, m, |c, r| {
        let uc = &data[c * m..(c + 1) * m];
        p.gradient(uc, r);
        for v in r.iter_mut() {
            *v = -*v;
        }
        for &n in d.neighbors_raw(c) {
            if n != NONE {
                let un = &data[n as usize * m..(n as usize + 1) * m];
                for k in 0..m {
                    r[k] += (un[k] - uc[k]) * inv_h2;
                }
            }
        }
    });
}

/// `J(v) − J(u)` accumulated from local differences, accurate to rounding
/// of the individual terms rather than of the totals.
pub fn energy_delta<P: Potential + ?Sized>(
    exec: Exec,
    d: &DiscreteDomain,
    u: &[f64],
    v: &[f64],
    m: usize,
    p: &P,
) -> f64 {
    let parts = exec.map(d.nx, |i| {
        let mut acc = KahanSum::new();
        let mut pot = KahanSum::new();
        for c in d.column(i) {
            let uc = &u[c * m..(c + 1) * m];
            let vc = &v[c * m..(c + 1) * m];
            if uc == vc {
                // Faces to changed neighbours still need evaluation.
                let nb = d.neighbors_raw(c);
                for dirn in [EAST, NORTH] {
                    let n = nb[dirn];
                    if n != NONE {
                        let n = n as usize;
                        let un = &u[n * m..(n + 1) * m];
                        let vn = &v[n * m..(n + 1) * m];
                        if un != vn {
                            acc.add(face_delta(uc, un, vc, vn));
                        }
                    }
                }
                continue;
            }
            pot.add(p.value_diff(uc, vc));
            let nb = d.neighbors_raw(c);
            for dirn in [EAST, NORTH] {
                let n = nb[dirn];
                if n != NONE {
                    let n = n as usize;
                    acc.add(face_delta(uc, &u[n * m..(n + 1) * m], vc, &v[n * m..(n + 1) * m]));
                }
            }
        }
        acc.value() + d.h * d.h * pot.value()
    });
    ksum(&parts)
}

#[inline]
pub(crate) fn face_delta(uc: &[f64], un: &[f64], vc: &[f64], vn: &[f64]) -> f64 {
    // ½(|b|² − |a|²) = ½ (b − a)·(b + a) with a = u_c − u_n, b = v_c − v_n;
    // b − a is formed from the cell increments to avoid cancellation.
    let mut s = 0.0;
    for k in 0..uc.len() {
        let db = (vc[k] - uc[k]) - (vn[k] - un[k]);
        s += db * ((vc[k] - vn[k]) + (uc[k] - un[k]));
    }
    0.5 * s
}

/// Radial truncation `u ↦ min(|u|, M) u/|u|` (zero stays zero).
pub fn truncate_sup(u: &Field, big_m: f64) -> Field {
    let mut out = u.clone();
    truncate_sup_in_place(out.as_mut_slice(), u.dim(), big_m);
    out
}

pub fn truncate_sup_in_place(data: &mut [f64], m: usize, big_m: f64) {
    for v in data.chunks_mut(m) {
        let n = crate::linalg::norm(v);
        if n > big_m {
            let s = big_m / n;
            v.iter_mut().for_each(|x| *x *= s);
            // Guard the rounding of the rescaled norm.
            while crate::linalg::norm(v) > big_m {
                v.iter_mut().for_each(|x| *x *= 1.0 - f64::EPSILON);
            }
        }
    }
}

/// CSV with header `i,j,s,y,u_1..u_m`, 17 significant digits.
pub fn field_csv(d: &DiscreteDomain, u: &Field) -> String {
    let m = u.dim();
    let mut out = String::from("i,j,s,y");
    for k in 1..=m {
        let _ = write!(out, ",u_{k}");
    }
    out.push('\n');
    for c in 0..d.num_cells() {
        let (i, j) = d.cell_ij(c);
        let (s, y) = d.center(c);
        let _ = write!(out, "{i},{j},{s:.16e},{y:.16e}");
        for v in u.cell(c) {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// A parsed field CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRow {
    pub i: usize,
    pub j: usize,
    pub s: f64,
    pub y: f64,
    pub u: Vec<f64>,
}

pub fn parse_field_csv(text: &str) -> Result<Vec<FieldRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty field CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 5 || cols[..4] != ["i", "j", "s", "y"] {
        return Err(Error::Parse(format!("unexpected header `{header}`")));
    }
    let m = cols.len() - 4;
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != m + 4 {
            return Err(Error::Parse(format!("line {}: expected {} fields", ln + 2, m + 4)));
        }
        let bad = |e: String| Error::Parse(format!("line {}: {e}", ln + 2));
        let i = parts[0].parse().map_err(|e| bad(format!("{e}")))?;
        let j = parts[1].parse().map_err(|e| bad(format!("{e}")))?;
        let s = parts[2].parse().map_err(|e| bad(format!("{e}")))?;
        let y = parts[3].parse().map_err(|e| bad(format!("{e}")))?;
        let u = parts[4..]
            .iter()
            .map(|p| p.parse::<f64>().map_err(|e| bad(format!("{e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FieldRow { i, j, s, y, u });
    }
    Ok(rows)
}
