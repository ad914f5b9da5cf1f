//! The slab comparison problem `Δφ = f(φ)` with `φ = t` on the two end
//! sections and zero flux on the lateral boundary, the contraction
//! sequence `t_j`, the cellwise comparison `ρ² ≤ φ`, and decay-rate fits.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::DiscreteDomain;
use crate::linalg::{conjugate_gradient, dist};
use crate::minimizer::{ConstraintSpec, Side};
use crate::potential::{min_eig_hess, Potential, RadialBoundFn};

/// Cells of `ω = ∪_{s∈(c−L, c+L)} Ω^s`: whole columns with centres in the
/// open window, stored as a contiguous cell range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slab {
    pub center: f64,
    pub half_width: f64,
    pub cols: Range<usize>,
    pub cells: Range<usize>,
}

impl Slab {
    pub fn new(d: &DiscreteDomain, center: f64, half_width: f64) -> Result<Self> {
        let cols = d.columns_open(center - half_width, center + half_width);
        if cols.is_empty()
            || center - half_width < -d.half_length - 1e-12
            || center + half_width > d.half_length + 1e-12
        {
            return Err(Error::InvalidArgument(format!(
                "slab ({}, {}) does not fit in [-T, T] = [{}, {}]",
                center - half_width,
                center + half_width,
                -d.half_length,
                d.half_length
            )));
        }
        let cells = d.column(cols.start).start..d.column(cols.end - 1).end;
        Ok(Self {
            center,
            half_width,
            cols,
            cells,
        })
    }

    /// The slab `ω_k` on the given side: centre `±(N + k)L`, half-width `L`.
    pub fn omega_k(d: &DiscreteDomain, c: &ConstraintSpec, k: usize, side: Side) -> Result<Self> {
        let center = side.sign() * (c.n + k) as f64 * c.period;
        Self::new(d, center, c.period)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Number of Dirichlet end faces of every slab cell (0, 1 or 2).
fn end_faces(d: &DiscreteDomain, slab: &Slab) -> Vec<u8> {
    let (first, last) = (slab.cols.start, slab.cols.end - 1);
    slab.cells
        .clone()
        .map(|c| {
            let (i, j) = d.cell_ij(c);
            let mut n = 0;
            if i == first && d.is_inside_extended(i as isize - 1, j) {
                n += 1;
            }
            if i == last && d.is_inside_extended(i as isize + 1, j) {
                n += 1;
            }
            n
        })
        .collect()
}

/// `(A₀ x)_c = Σ_{slab nbrs}(x_c − x_n)/h² + 2 n_end x_c/h² + shift_c x_c`.
struct SlabOperator<'a> {
    d: &'a DiscreteDomain,
    slab: &'a Slab,
    ends: Vec<u8>,
    inv_h2: f64,
}

impl SlabOperator<'_> {
    fn apply(&self, shift: &[f64], x: &[f64], out: &mut [f64]) {
        let base = self.slab.cells.start;
        let n = self.slab.len();
        for (k, o) in out.iter_mut().enumerate() {
            let c = base + k;
            let mut acc = 2.0 * self.ends[k] as f64 * x[k];
            for &nb in self.d.neighbors_raw(c) {
                let nb = nb as usize;
                if nb >= base && nb < base + n {
                    acc += x[k] - x[nb - base];
                }
            }
            *o = acc * self.inv_h2 + shift[k] * x[k];
        }
    }

    fn rhs(&self, t: f64) -> Vec<f64> {
        self.ends.iter().map(|&e| 2.0 * e as f64 * t * self.inv_h2).collect()
    }

    /// `G(φ) = A₀φ + f(φ) − b`.
    fn system_residual(&self, f: &RadialBoundFn, phi: &[f64], b: &[f64], out: &mut [f64]) {
        let zero = vec![0.0; phi.len()];
        self.apply(&zero, phi, out);
        for k in 0..phi.len() {
            out[k] += f.f_at(phi[k]) - b[k];
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMethod {
    Linear,
    Newton,
    Picard,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiSolution {
    pub slab: Slab,
    pub t: f64,
    /// One value per slab cell, in cell order.
    pub phi: Vec<f64>,
    pub method: PhiMethod,
    pub iterations: usize,
    /// `‖Δ_h φ − f(φ)‖∞` including the end-face fluxes.
    pub residual: f64,
    pub min: f64,
    pub max: f64,
}

impl PhiSolution {
    pub fn value(&self, cell: usize) -> f64 {
        self.phi[cell - self.slab.cells.start]
    }

    /// `0 ≤ φ ≤ t` up to `tol`.
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.min >= -tol && self.max <= self.t + tol
    }
}

/// Solves `Δ_h φ = f(φ)` on `slab` with ghost Dirichlet value `t` on the end
/// faces. Linear `f` takes one conjugate-gradient solve; otherwise damped
/// Newton from `φ ≡ t`, falling back to monotone Picard iteration.
///
/// `tol` is relative to the size of the Dirichlet load `2t/h²`.
pub fn solve_phi(d: &DiscreteDomain, slab: &Slab, f: &RadialBoundFn, t: f64, tol: f64) -> Result<PhiSolution> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
    }
    let op = SlabOperator {
        d,
        slab,
        ends: end_faces(d, slab),
        inv_h2: 1.0 / (d.h * d.h),
    };
    if op.ends.iter().all(|&e| e == 0) {
        return Err(Error::InvalidArgument("slab has no Dirichlet end faces".into()));
    }
    let n = slab.len();
    let b = op.rhs(t);
    let scale = 2.0 * t * op.inv_h2;
    let abs_tol = tol * scale.max(f64::MIN_POSITIVE);
    let mut g = vec![0.0; n];
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));

    let finish = |phi: Vec<f64>, method, iterations, residual| {
        let min = phi.iter().copied().fold(f64::INFINITY, f64::min);
        let max = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        PhiSolution {
            slab: slab.clone(),
            t,
            phi,
            method,
            iterations,
            residual,
            min,
            max,
        }
    };

    if let Some(c2) = f.linear_c2 {
        let shift = vec![c2; n];
        let mut phi = vec![0.0; n];
        let stats = conjugate_gradient(|x, o| op.apply(&shift, x, o), &b, &mut phi, 1e-14, 20 * n + 100);
        op.system_residual(f, &phi, &b, &mut g);
        return Ok(finish(phi, PhiMethod::Linear, stats.iterations, sup(&g)));
    }

    let mut phi = vec![t; n];
    op.system_residual(f, &phi, &b, &mut g);
    let mut res = sup(&g);
    let mut it = 0;
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    while res > abs_tol && it < 50 {
        it += 1;
        let shift: Vec<f64> = phi.iter().map(|&x| f.f_prime(x)).collect();
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut delta = vec![0.0; n];
        conjugate_gradient(|x, o| op.apply(&shift, x, o), &rhs, &mut delta, 1e-12, 20 * n + 100);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            for k in 0..n {
                trial[k] = phi[k] + lambda * delta[k];
            }
            op.system_residual(f, &trial, &b, &mut g_trial);
            let r = sup(&g_trial);
            if r < res {
                phi.copy_from_slice(&trial);
                g.copy_from_slice(&g_trial);
                res = r;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= abs_tol {
        return Ok(finish(phi, PhiMethod::Newton, it, res));
    }

    // Monotone Picard: (A₀ + λ)φ⁺ = b + λφ − f(φ), λ = Lip(f), from φ ≡ t.
    let lambda = f.f_lipschitz();
    let shift = vec![lambda; n];
    phi.iter_mut().for_each(|x| *x = t);
    let mut rhs = vec![0.0; n];
    let mut last = f64::INFINITY;
    for k in 1..=20_000 {
        for i in 0..n {
            rhs[i] = b[i] + lambda * phi[i] - f.f_at(phi[i]);
        }
        let mut next = phi.clone();
        conjugate_gradient(|x, o| op.apply(&shift, x, o), &rhs, &mut next, 1e-12, 20 * n + 100);
        phi = next;
        op.system_residual(f, &phi, &b, &mut g);
        let r = sup(&g);
        if r <= abs_tol {
            return Ok(finish(phi, PhiMethod::Picard, k, r));
        }
        if k % 100 == 0 {
            if r >= 0.999 * last {
                break;
            }
            last = r;
        }
    }
    Err(Error::NonConvergence(format!(
        "slab problem at t = {t}: Newton and Picard both stalled"
    )))
}

/// Maximum of `φ` over the central section of the slab, interpolating the
/// two columns adjacent to the centre.
pub fn t_hat(d: &DiscreteDomain, sol: &PhiSolution) -> f64 {
    let right = d.column_at(sol.slab.center + 0.5 * d.h);
    let left = right.saturating_sub(1);
    let mut best = f64::NEG_INFINITY;
    for j in 0..d.ny {
        let l = d.index(left, j).map(|c| sol.value(c));
        let r = d.index(right, j).map(|c| sol.value(c));
        let v = match (l, r) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => continue,
        };
        best = best.max(v);
    }
    best
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TjSequence {
    pub t: Vec<f64>,
    /// `t₁/t₀` for linear `f`.
    pub theta: Option<f64>,
    /// `max_j |t_j − θʲ t₀|` for linear `f`.
    pub linear_deviation: Option<f64>,
    pub strictly_decreasing: bool,
    /// First `j` with `t_{j+1} ≥ t_j`.
    pub stall: Option<usize>,
}

/// `t₀ = t0`, `t_{j+1} = t̂(t_j)` for `j < j_max`.
pub fn iterate_tj(
    d: &DiscreteDomain,
    slab: &Slab,
    f: &RadialBoundFn,
    t0: f64,
    j_max: usize,
    tol: f64,
) -> Result<TjSequence> {
    let mut t = vec![t0];
    let mut stall = None;
    for j in 0..j_max {
        let cur = t[j];
        let next = if cur > 0.0 {
            t_hat(d, &solve_phi(d, slab, f, cur, tol)?)
        } else {
            0.0
        };
        if stall.is_none() && !(next < cur) {
            stall = Some(j);
        }
        t.push(next);
    }
    let (theta, linear_deviation) = match f.linear_c2 {
        Some(_) if t0 > 0.0 && j_max > 0 => {
            let th = t[1] / t0;
            let dev = t
                .iter()
                .enumerate()
                .map(|(j, &tj)| (tj - th.powi(j as i32) * t0).abs())
                .fold(0.0, f64::max);
            (Some(th), Some(dev))
        }
        _ => (None, None),
    };
    Ok(TjSequence {
        strictly_decreasing: stall.is_none(),
        t,
        theta,
        linear_deviation,
        stall,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlabCheck {
    pub side: Side,
    pub k: usize,
    pub t: f64,
    pub t_hat: f64,
    /// `max(ρ² − φ − ε)` over the slab; `≤ 0` passes.
    pub worst_violation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailCheck {
    pub side: Side,
    pub j: usize,
    pub bound: f64,
    pub max_rho2: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub eps: f64,
    pub slabs: Vec<SlabCheck>,
    /// `t_j` from `t₀ = r0²/4`.
    pub tj: TjSequence,
    /// `ρ² ≤ t_j + ε` on sections with `±s > (N + j)L`.
    pub tails: Vec<TailCheck>,
    pub pass: bool,
}

fn rho2(u: &Field, c: usize, a: &[f64]) -> f64 {
    let r = dist(u.cell(c), a);
    r * r
}

/// Checks `ρ² ≤ φ_k + ε` on the slabs `ω_k`, `k ∈ ks`, on both sides, with
/// `t` the largest `ρ²` on the end columns and the columns just outside.
#[allow(clippy::too_many_arguments)]
pub fn verify_comparison<P: Potential + ?Sized>(
    d: &DiscreteDomain,
    u: &Field,
    p: &P,
    f: &RadialBoundFn,
    c: &ConstraintSpec,
    ks: std::ops::RangeInclusive<usize>,
    eps: f64,
    tol: f64,
) -> Result<ComparisonReport> {
    let w = p.wells();
    let mut slabs = Vec::new();
    for side in [Side::Minus, Side::Plus] {
        let a = side.well(w);
        for k in ks.clone() {
            let slab = Slab::omega_k(d, c, k, side)?;
            let (first, last) = (slab.cols.start, slab.cols.end - 1);
            let mut end_cols = vec![first, last];
            if first > 0 {
                end_cols.push(first - 1);
            }
            if last + 1 < d.nx {
                end_cols.push(last + 1);
            }
            let t = end_cols
                .iter()
                .flat_map(|&i| d.column(i))
                .map(|cell| rho2(u, cell, a))
                .fold(0.0, f64::max);
            let (worst, th) = if t > 0.0 {
                let sol = solve_phi(d, &slab, f, t, tol)?;
                let worst = slab
                    .cells
                    .clone()
                    .map(|cell| rho2(u, cell, a) - sol.value(cell) - eps)
                    .fold(f64::NEG_INFINITY, f64::max);
                (worst, t_hat(d, &sol))
            } else {
                let worst = slab
                    .cells
                    .clone()
                    .map(|cell| rho2(u, cell, a) - eps)
                    .fold(f64::NEG_INFINITY, f64::max);
                (worst, 0.0)
            };
            slabs.push(SlabCheck {
                side,
                k,
                t,
                t_hat: th,
                worst_violation: worst,
                pass: worst <= 0.0,
            });
        }
    }
    let j_max = ks.clone().max().unwrap_or(1).max(1);
    let t0 = 0.25 * c.r0 * c.r0;
    let slab = Slab::omega_k(d, c, 1, Side::Plus)?;
    let tj = iterate_tj(d, &slab, f, t0, j_max, tol)?;
    let mut tails = Vec::new();
    for side in [Side::Minus, Side::Plus] {
        let a = side.well(w);
        for j in 1..=j_max {
            let edge = (c.n + j) as f64 * c.period;
            let max_rho2 = (0..d.nx)
                .filter(|&i| side.sign() * d.s_of_col(i) > edge)
                .flat_map(|i| d.column(i))
                .map(|cell| rho2(u, cell, a))
                .fold(0.0, f64::max);
            let bound = tj.t[j];
            tails.push(TailCheck {
                side,
                j,
                bound,
                max_rho2,
                pass: max_rho2 <= bound + eps,
            });
        }
    }
    let pass = slabs.iter().all(|s| s.pass) && tails.iter().all(|t| t.pass) && tj.strictly_decreasing;
    Ok(ComparisonReport {
        eps,
        slabs,
        tj,
        tails,
        pass,
    })
}

/// Least-squares fit of `log max_y |u − a| ≈ log K₀ − k₀ |s|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub side: Side,
    pub k0: f64,
    #[serde(rename = "K0")]
    pub big_k0: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    pub points: usize,
    /// Root-mean-square residual of the fit in `log` units.
    pub fit_residual: f64,
    /// `√μ`, `μ` the smallest Hessian eigenvalue at the well.
    pub expected_k0: Option<f64>,
    pub relative_error: Option<f64>,
}

/// `max_y |u(s_i, ·) − a|` per column, for columns on the given side.
pub fn section_distance_profile(d: &DiscreteDomain, u: &Field, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut s = Vec::with_capacity(d.nx);
    let mut dd = Vec::with_capacity(d.nx);
    for i in 0..d.nx {
        s.push(d.s_of_col(i));
        dd.push(d.column(i).map(|c| dist(u.cell(c), a)).fold(0.0, f64::max));
    }
    (s, dd)
}

/// Fits a decay rate to a sampled profile `dist(s)` over the window where
/// `dist ∈ [10h², r0/2]` and `±s > 0`.
pub fn decay_fit_profile(
    s: &[f64],
    dist_profile: &[f64],
    h: f64,
    r0: f64,
    side: Side,
    expected_k0: Option<f64>,
) -> Result<DecayFit> {
    let (lo, hi) = (10.0 * h * h, 0.5 * r0);
    let pts: Vec<(f64, f64)> = s
        .iter()
        .zip(dist_profile)
        .filter(|(&si, &di)| side.sign() * si > 0.0 && di >= lo && di <= hi)
        .map(|(&si, &di)| (side.sign() * si, di.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::EmptyFitWindow(format!(
            "{} points with distance in [{lo:e}, {hi}] on the {side:?} side; try a larger T",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::EmptyFitWindow("fit window has zero width".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let k0 = -slope;
    let s_lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let s_hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        side,
        k0,
        big_k0: intercept.exp(),
        s_lo,
        s_hi,
        points: pts.len(),
        fit_residual: rms,
        expected_k0,
        relative_error: expected_k0.map(|e| (k0 - e).abs() / e),
    })
}

/// Decay fit of `max_y |u − a±|` on the `±` side.
pub fn decay_fit<P: Potential + ?Sized>(d: &DiscreteDomain, u: &Field, p: &P, side: Side) -> Result<DecayFit> {
    let a = side.well(p.wells());
    let (s, dd) = section_distance_profile(d, u, a);
    let hc = min_eig_hess(p, a);
    let expected = (!hc.degenerate).then(|| hc.min_eig.sqrt());
    decay_fit_profile(&s, &dd, d.h, p.wells().r0, side, expected)
}

/// Cross-check of the slab contraction against a direct decay fit. `t_j`
/// bounds `ρ²`, which decays at `2k₀`, so the bound may not decay faster.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContractionConsistency {
    /// Mean of `−log(t_{j+1}/t_j)/L` over the positive terms.
    pub tj_rate: f64,
    /// `2k₀` from the fit.
    pub fit_rate: f64,
    pub band: f64,
    pub pass: bool,
}

pub fn contraction_consistency(
    tj: &TjSequence,
    period: f64,
    fit: &DecayFit,
    band: f64,
) -> Option<ContractionConsistency> {
    let rates: Vec<f64> =
        tj.t.windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > 0.0)
            .map(|w| -(w[1] / w[0]).ln() / period)
            .collect();
    if rates.is_empty() {
        return None;
    }
    let tj_rate = rates.iter().sum::<f64>() / rates.len() as f64;
    let fit_rate = 2.0 * fit.k0;
    Some(ContractionConsistency {
        tj_rate,
        fit_rate,
        band,
        pass: fit_rate >= (1.0 - band) * tj_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StripSpec;
    use crate::potential::{build_f, compute_g, DoubleWell, FMode};

    fn flat(h: f64, t: f64) -> DiscreteDomain {
        DiscreteDomain::build(&StripSpec::flat(1.0, 0.0, 1.0), h, t).unwrap()
    }

    #[test]
    fn zero_f_gives_constant() {
        let d = flat(1.0 / 16.0, 2.0);
        let slab = Slab::new(&d, 0.0, 1.0).unwrap();
        let sol = solve_phi(&d, &slab, &RadialBoundFn::linear(0.0), 0.3, 1e-12).unwrap();
        assert!(sol.phi.iter().all(|&x| (x - 0.3).abs() < 1e-10));
        assert!((t_hat(&d, &sol) - 0.3).abs() < 1e-10);
    }

    #[test]
    fn linear_cosh_profile() {
        let d = flat(1.0 / 32.0, 2.0);
        let slab = Slab::new(&d, 0.0, 1.0).unwrap();
        let sol = solve_phi(&d, &slab, &RadialBoundFn::linear(1.0), 1.0, 1e-12).unwrap();
        for c in slab.cells.clone() {
            let (s, _) = d.center(c);
            assert!((sol.value(c) - s.cosh() / 1f64.cosh()).abs() < 2e-4);
        }
        assert!((t_hat(&d, &sol) - 1.0 / 1f64.cosh()).abs() < 1e-3);
        assert!(sol.max < 1.0);
    }

    #[test]
    fn linear_scaling_exact() {
        let d = flat(1.0 / 16.0, 2.0);
        let slab = Slab::new(&d, 0.0, 1.0).unwrap();
        let f = RadialBoundFn::linear(2.5);
        let one = solve_phi(&d, &slab, &f, 1.0, 1e-12).unwrap();
        let t = 0.037;
        let sc = solve_phi(&d, &slab, &f, t, 1e-12).unwrap();
        for k in 0..one.phi.len() {
            assert!((sc.phi[k] - t * one.phi[k]).abs() <= 1e-12 * t);
        }
    }

    #[test]
    fn envelope_phi_bounds_and_monotone_in_t() {
        let d = flat(1.0 / 16.0, 4.0);
        let p = DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]);
        let f = build_f(&compute_g(&p, 512, 720).unwrap(), FMode::Envelope).unwrap();
        let slab = Slab::new(&d, 2.0, 1.0).unwrap();
        let t = 0.0625;
        let a = solve_phi(&d, &slab, &f, t, 1e-10).unwrap();
        let b = solve_phi(&d, &slab, &f, 0.5 * t, 1e-10).unwrap();
        assert!(a.within_bounds(1e-12));
        assert!(a.max < t);
        assert!(a.phi.iter().zip(&b.phi).all(|(x, y)| y <= x));
        let th = t_hat(&d, &a);
        assert!(th < t && th > 0.0);
    }

    #[test]
    fn tj_linear_matches_powers() {
        let d = flat(1.0 / 32.0, 2.0);
        let slab = Slab::new(&d, 0.0, 1.0).unwrap();
        let seq = iterate_tj(&d, &slab, &RadialBoundFn::linear(1.0), 1.0, 4, 1e-12).unwrap();
        let theta = 1.0 / 1f64.cosh();
        for (j, &tj) in seq.t.iter().enumerate() {
            assert!((tj - theta.powi(j as i32)).abs() < 1e-3);
        }
        assert!(seq.strictly_decreasing);
        assert!(seq.linear_deviation.unwrap() < 1e-12);
    }

    #[test]
    fn tj_zero_start() {
        let d = flat(1.0 / 16.0, 2.0);
        let slab = Slab::new(&d, 0.0, 1.0).unwrap();
        let seq = iterate_tj(&d, &slab, &RadialBoundFn::linear(1.0), 0.0, 3, 1e-12).unwrap();
        assert!(seq.t.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn planted_exponential_fit() {
        let d = flat(1.0 / 32.0, 8.0);
        let p = DoubleWell::scalar_quartic();
        let u = Field::from_fn(&d, 1, |s, _, v| {
            v[0] = if s > 0.0 { 1.0 - (-2.0 * s).exp() } else { -1.0 }
        });
        let fit = decay_fit(&d, &u, &p, Side::Plus).unwrap();
        assert!((fit.k0 - 2.0).abs() < 1e-3, "{fit:?}");
        assert!((fit.big_k0 - 1.0).abs() < 1e-3);
        let err = decay_fit(&d, &Field::constant(&d, &[1.0]), &p, Side::Plus);
        assert!(matches!(err, Err(Error::EmptyFitWindow(_))));
    }

    #[test]
    fn contraction_rate_against_fit() {
        let theta = 1.0 / 1f64.cosh();
        let tj = TjSequence {
            t: (0..5).map(|j| theta.powi(j)).collect(),
            theta: Some(theta),
            linear_deviation: Some(0.0),
            strictly_decreasing: true,
            stall: None,
        };
        let fit = |k0| DecayFit {
            side: Side::Plus,
            k0,
            big_k0: 1.0,
            s_lo: 0.0,
            s_hi: 1.0,
            points: 2,
            fit_residual: 0.0,
            expected_k0: None,
            relative_error: None,
        };
        let rate = 1f64.cosh().ln();
        let ok = contraction_consistency(&tj, 1.0, &fit(0.5 * rate), 0.2).unwrap();
        assert!((ok.tj_rate - rate).abs() < 1e-12);
        assert!(ok.pass);
        assert!(contraction_consistency(&tj, 1.0, &fit(0.35 * rate), 0.2).is_some_and(|c| !c.pass));
        let flat = TjSequence { t: vec![0.0; 3], ..tj };
        assert!(contraction_consistency(&flat, 1.0, &fit(1.0), 0.2).is_none());
    }
}
