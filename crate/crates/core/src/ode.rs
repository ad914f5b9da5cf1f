//! Independent 1D heteroclinic solver for `u'' = W_u(u)` on `[−T, T]`.
//!
//! The discrete energy `Σ ½|u_{i+1} − u_i|²/h + h Σ W(u_i)` is minimized by
//! the same projected descent as the strip solver, with the balls
//! `|u − a±| ≤ r0/2` imposed for `±s ≥ T/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::KahanSum;
use crate::field::{face_delta, Field};
use crate::geometry::DiscreteDomain;
use crate::minimizer::{projected_bb, DescentOptions, Objective};
use crate::potential::{Potential, Wells};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OdeOptions {
    pub h: f64,
    pub half_length: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            h: 1.0 / 128.0,
            half_length: 8.0,
            tol: 1e-9,
            max_iter: 200_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OdeSolution {
    pub m: usize,
    pub h: f64,
    pub s: Vec<f64>,
    /// Flat, `m` values per node.
    pub u: Vec<f64>,
    pub energy: f64,
    /// `max |½|Δu/h|² − W(ū)|` over faces with `|s| ≤ T/2`, `ū` the face mean.
    pub equipartition_defect: f64,
    pub residual_sup: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Chain<'a, P: Potential + ?Sized> {
    p: &'a P,
    m: usize,
    h: f64,
    s: &'a [f64],
    constraint_at: f64,
}

impl<P: Potential + ?Sized> Chain<'_, P> {
    fn energy(&self, x: &[f64]) -> f64 {
        let m = self.m;
        let n = self.s.len();
        let mut acc = KahanSum::new();
        for i in 0..n {
            let xi = &x[i * m..(i + 1) * m];
            acc.add(self.h * self.p.value(xi));
            if i + 1 < n {
                let xj = &x[(i + 1) * m..(i + 2) * m];
                let sq: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                acc.add(0.5 * sq / self.h);
            }
        }
        acc.value()
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let m = self.m;
        let n = self.s.len();
        let inv_h2 = 1.0 / (self.h * self.h);
        for i in 0..n {
            let xi = &x[i * m..(i + 1) * m];
            let r = &mut out[i * m..(i + 1) * m];
            self.p.gradient(xi, r);
            for v in r.iter_mut() {
                *v = -*v;
            }
            for j in [i.wrapping_sub(1), i + 1] {
                if j < n {
                    for k in 0..m {
                        r[k] += (x[j * m + k] - xi[k]) * inv_h2;
                    }
                }
            }
        }
    }
}

impl<P: Potential + ?Sized> Objective for Chain<'_, P> {
    fn value(&self, x: &[f64]) -> f64 {
        self.energy(x) / self.h
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        self.residual(x, g);
        g.iter_mut().for_each(|v| *v = -*v);
    }

    fn delta(&self, x: &[f64], y: &[f64]) -> f64 {
        let m = self.m;
        let n = self.s.len();
        let mut acc = KahanSum::new();
        for i in 0..n {
            let (xi, yi) = (&x[i * m..(i + 1) * m], &y[i * m..(i + 1) * m]);
            if xi != yi {
                acc.add(self.p.value_diff(xi, yi));
            }
            if i + 1 < n {
                let (xj, yj) = (&x[(i + 1) * m..(i + 2) * m], &y[(i + 1) * m..(i + 2) * m]);
                if xi != yi || xj != yj {
                    acc.add(face_delta(xi, xj, yi, yj) / (self.h * self.h));
                }
            }
        }
        acc.value()
    }

    fn project(&self, x: &mut [f64]) {
        let w = self.p.wells();
        let m = self.m;
        for (i, &s) in self.s.iter().enumerate() {
            let a = if s >= self.constraint_at {
                &w.a_plus
            } else if s <= -self.constraint_at {
                &w.a_minus
            } else {
                continue;
            };
            crate::minimizer::project_ball(&mut x[i * m..(i + 1) * m], a, 0.5 * w.r0);
        }
    }

    fn step_hint(&self) -> f64 {
        let big_m = self.p.wells().sup_radius;
        1.0 / (4.0 / (self.h * self.h) + 12.0 * big_m * big_m + 4.0)
    }
}

/// Minimizes the 1D energy from the affine profile `ū` with `L = 1`.
pub fn solve_heteroclinic_1d<P: Potential + ?Sized>(p: &P, opts: &OdeOptions) -> Result<OdeSolution> {
    let half = opts.half_length;
    let n = (2.0 * half / opts.h).round() as usize;
    if n < 4 {
        return Err(Error::InvalidArgument("1D grid needs at least 4 nodes".into()));
    }
    let h = 2.0 * half / n as f64;
    let m = p.dim();
    let w = p.wells();
    let s: Vec<f64> = (0..n).map(|i| -half + (i as f64 + 0.5) * h).collect();
    let mut x = vec![0.0; n * m];
    for (i, &si) in s.iter().enumerate() {
        let t = si.clamp(-1.0, 1.0);
        for k in 0..m {
            x[i * m + k] = 0.5 * (1.0 - t) * w.a_minus[k] + 0.5 * (1.0 + t) * w.a_plus[k];
        }
    }
    let chain = Chain {
        p,
        m,
        h,
        s: &s,
        constraint_at: 0.5 * half,
    };
    let dopts = DescentOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        ..DescentOptions::default()
    };
    let out = projected_bb(&chain, &mut x, &dopts);
    let energy = chain.energy(&x);
    let mut r = vec![0.0; n * m];
    chain.residual(&x, &mut r);
    let residual_sup = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut defect: f64 = 0.0;
    let mut mid = vec![0.0; m];
    for i in 0..n - 1 {
        let sf = 0.5 * (s[i] + s[i + 1]);
        if sf.abs() > 0.5 * half {
            continue;
        }
        let mut kin = 0.0;
        for k in 0..m {
            let du = (x[(i + 1) * m + k] - x[i * m + k]) / h;
            kin += 0.5 * du * du;
            mid[k] = 0.5 * (x[(i + 1) * m + k] + x[i * m + k]);
        }
        defect = defect.max((kin - p.value(&mid)).abs());
    }
    Ok(OdeSolution {
        m,
        h,
        s,
        u: x,
        energy,
        equipartition_defect: defect,
        residual_sup,
        iterations: out.iterations,
        converged: out.converged,
    })
}

impl OdeSolution {
    pub fn node(&self, i: usize) -> &[f64] {
        &self.u[i * self.m..(i + 1) * self.m]
    }

    /// Piecewise-linear interpolation, `None` outside the node range.
    pub fn value_at(&self, s: f64) -> Option<Vec<f64>> {
        let (first, last) = (self.s[0], *self.s.last().unwrap());
        if s < first || s > last {
            return None;
        }
        let x = (s - first) / self.h;
        let i = (x.floor() as usize).min(self.s.len() - 2);
        let w = x - i as f64;
        let (a, b) = (self.node(i), self.node(i + 1));
        Some(a.iter().zip(b).map(|(p, q)| p + w * (q - p)).collect())
    }

    /// Crossing of the midpoint along the well axis.
    pub fn center(&self, wells: &Wells) -> Result<f64> {
        let xi: Vec<f64> = (0..self.s.len()).map(|i| axis_coord(self.node(i), wells)).collect();
        crossing(&self.s, &xi)
    }

    pub fn profile_csv(&self) -> String {
        let mut out = String::from("s");
        for k in 1..=self.m {
            out.push_str(&format!(",u_{k}"));
        }
        out.push('\n');
        for (i, s) in self.s.iter().enumerate() {
            out.push_str(&format!("{s:.16e}"));
            for v in self.node(i) {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `⟨u − (a₋ + a₊)/2, e⟩`, `e` the unit axis from `a₋` to `a₊`.
pub fn axis_coord(u: &[f64], wells: &Wells) -> f64 {
    let e = wells.axis();
    let mid = wells.midpoint();
    u.iter().zip(&mid).zip(&e).map(|((x, c), e)| (x - c) * e).sum()
}

/// First upward zero crossing of `xi(s)`, linearly interpolated.
pub fn crossing(s: &[f64], xi: &[f64]) -> Result<f64> {
    for i in 0..s.len().saturating_sub(1) {
        let (a, b) = (xi[i], xi[i + 1]);
        if a <= 0.0 && b > 0.0 {
            return Ok(s[i] + (s[i + 1] - s[i]) * (-a) / (b - a));
        }
    }
    Err(Error::Centering("profile never crosses the midpoint".into()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileComparison {
    pub center_2d: f64,
    pub center_ode: f64,
    /// `max_i max_{c ∈ column i} ‖u_c − u_ode(s_i − center_2d + center_ode)‖∞`.
    pub deviation: f64,
    /// `max_i max_{c,c' ∈ column i} ‖u_c − u_c'‖∞`.
    pub y_variation: f64,
    pub columns_compared: usize,
}

/// Centres both profiles at the midpoint crossing and compares columnwise.
pub fn compare_to_2d(ode: &OdeSolution, d: &DiscreteDomain, u: &Field, wells: &Wells) -> Result<ProfileComparison> {
    let s2: Vec<f64> = (0..d.nx).map(|i| d.s_of_col(i)).collect();
    let xi2: Vec<f64> = (0..d.nx)
        .map(|i| {
            let col = d.column(i);
            let n = col.len() as f64;
            col.map(|c| axis_coord(u.cell(c), wells)).sum::<f64>() / n
        })
        .collect();
    let center_2d = crossing(&s2, &xi2)?;
    let center_ode = ode.center(wells)?;
    let mut deviation: f64 = 0.0;
    let mut y_variation: f64 = 0.0;
    let mut compared = 0;
    for i in 0..d.nx {
        let col = d.column(i);
        let first = u.cell(col.start).to_vec();
        for c in col.clone() {
            for k in 0..u.dim() {
                y_variation = y_variation.max((u.cell(c)[k] - first[k]).abs());
            }
        }
        let Some(v) = ode.value_at(s2[i] - center_2d + center_ode) else {
            continue;
        };
        compared += 1;
        for c in col {
            for k in 0..u.dim() {
                deviation = deviation.max((u.cell(c)[k] - v[k]).abs());
            }
        }
    }
    Ok(ProfileComparison {
        center_2d,
        center_ode,
        deviation,
        y_variation,
        columns_compared: compared,
    })
}
