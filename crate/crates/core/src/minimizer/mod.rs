//! Constrained minimization of the discrete energy.
//!
//! The admissible class fixes a ball of radius `r0/2` about `a₊` on cells
//! with `s ≥ NL` and about `a₋` on cells with `s ≤ −NL`. Iterates are
//! truncated to `|u| ≤ M` and then projected onto these balls.

mod descent;
mod driver;

pub use descent::{projected_bb, DescentOptions, DescentOutcome, Objective};
pub use driver::{
    section_diagnostics, section_distance, solve_standing_wave, ComparisonSummary, DecaySummary, InvariantFlag,
    SectionDiagnostics, SolveConfig, SolveReport, TranslationRecord,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{
    energy_columns, energy_delta, energy_with, residual_into, residual_with, truncate_sup_in_place, EnergyBreakdown,
    Field,
};
use crate::geometry::DiscreteDomain;
use crate::linalg::dist;
use crate::polar::CellSet;
use crate::potential::{Potential, Wells};

/// The class `X_N`: `|u − a±| ≤ r0/2` for `±s ≥ NL`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub n: usize,
    pub period: f64,
    pub r0: f64,
}

impl ConstraintSpec {
    pub fn new(n: usize, period: f64, r0: f64) -> Self {
        Self { n, period, r0 }
    }

    pub fn threshold(&self) -> f64 {
        self.n as f64 * self.period
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.r0
    }

    /// `NL + 4L ≤ T`.
    pub fn validate(&self, half_length: f64) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("constraint N must be at least 1".into()));
        }
        let need = self.threshold() + 4.0 * self.period;
        if need > half_length * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "rule NL+4L ≤ T violated: NL+4L = {need}, T = {half_length}"
            )));
        }
        Ok(())
    }

    /// Which well constrains a cell centred at `s`, if any.
    pub fn side(&self, s: f64) -> Option<Side> {
        let nl = self.threshold();
        if s >= nl {
            Some(Side::Plus)
        } else if s <= -nl {
            Some(Side::Minus)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn well(self, w: &Wells) -> &[f64] {
        match self {
            Side::Minus => &w.a_minus,
            Side::Plus => &w.a_plus,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

/// Closed-form projection of `v` onto the ball `B(a, radius)`.
pub(crate) fn project_ball(v: &mut [f64], a: &[f64], radius: f64) {
    let d = dist(v, a);
    if d <= radius {
        return;
    }
    let mut scale = radius / d;
    loop {
        for k in 0..a.len() {
            v[k] = a[k] + scale * (v[k] - a[k]);
        }
        if dist(v, a) <= radius {
            return;
        }
        scale = 1.0 - 2.0 * f64::EPSILON;
    }
}

fn project_slice(d: &DiscreteDomain, data: &mut [f64], m: usize, c: &ConstraintSpec, wells: &Wells) {
    let radius = c.radius();
    for cell in 0..d.num_cells() {
        let (s, _) = d.center(cell);
        if let Some(side) = c.side(s) {
            project_ball(&mut data[cell * m..(cell + 1) * m], side.well(wells), radius);
        }
    }
}

/// Radial projection onto the constraint balls; other cells unchanged.
pub fn project_constraints(d: &DiscreteDomain, u: &Field, c: &ConstraintSpec, wells: &Wells) -> Field {
    let mut out = u.clone();
    project_slice(d, out.as_mut_slice(), u.dim(), c, wells);
    out
}

/// `ū`: `a₋` for `s ≤ −L`, `a₊` for `s ≥ L`, affine in between.
pub fn build_affine_initial<P: Potential + ?Sized>(d: &DiscreteDomain, p: &P) -> Field {
    let w = p.wells();
    let l = d.period;
    Field::from_fn(d, p.dim(), |s, _, v| {
        let t = (s / l).clamp(-1.0, 1.0);
        for k in 0..v.len() {
            v[k] = 0.5 * (1.0 - t) * w.a_minus[k] + 0.5 * (1.0 + t) * w.a_plus[k];
        }
    })
}

/// Constraint activity with margin `1e−3·r0`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub margin: f64,
    /// Cells of the first constrained column on each side that sit within
    /// the margin of the ball boundary.
    pub plus_at_nl: usize,
    pub minus_at_nl: usize,
    pub plus_tail: usize,
    pub minus_tail: usize,
    pub max_dist_plus_at_nl: f64,
    pub max_dist_minus_at_nl: f64,
}

impl Activity {
    pub fn total(&self) -> usize {
        self.plus_tail + self.minus_tail
    }

    pub fn inactive_at_nl(&self) -> bool {
        self.plus_at_nl == 0 && self.minus_at_nl == 0
    }
}

pub fn constraint_activity(d: &DiscreteDomain, u: &Field, c: &ConstraintSpec, wells: &Wells) -> Activity {
    let margin = 1e-3 * c.r0;
    let limit = c.radius() - margin;
    let nl = c.threshold();
    let plus_col = (0..d.nx).find(|&i| d.s_of_col(i) >= nl);
    let minus_col = (0..d.nx).rev().find(|&i| d.s_of_col(i) <= -nl);
    let mut a = Activity {
        margin,
        ..Activity::default()
    };
    for i in 0..d.nx {
        let s = d.s_of_col(i);
        let Some(side) = c.side(s) else { continue };
        for cell in d.column(i) {
            let dd = dist(u.cell(cell), side.well(wells));
            let active = dd >= limit;
            match side {
                Side::Plus => {
                    a.plus_tail += active as usize;
                    if Some(i) == plus_col {
                        a.plus_at_nl += active as usize;
                        a.max_dist_plus_at_nl = a.max_dist_plus_at_nl.max(dd);
                    }
                }
                Side::Minus => {
                    a.minus_tail += active as usize;
                    if Some(i) == minus_col {
                        a.minus_at_nl += active as usize;
                        a.max_dist_minus_at_nl = a.max_dist_minus_at_nl.max(dd);
                    }
                }
            }
        }
    }
    a
}

/// `F(u) = J(u)/h²`, so that `∇F = −residual` on free cells.
struct FieldObjective<'a, P: Potential + ?Sized> {
    d: &'a DiscreteDomain,
    p: &'a P,
    m: usize,
    exec: Exec,
    constraint: Option<&'a ConstraintSpec>,
    /// Truncation radius `M`; `None` disables it.
    sup_radius: Option<f64>,
    /// Cells allowed to move; `None` means all.
    free: Option<&'a CellSet>,
}

impl<P: Potential + ?Sized> Objective for FieldObjective<'_, P> {
    fn value(&self, x: &[f64]) -> f64 {
        energy_columns(self.exec, self.d, x, self.m, self.p, 0..self.d.nx).total / (self.d.h * self.d.h)
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        residual_into(self.exec, self.d, x, self.m, self.p, g);
        for v in g.iter_mut() {
            *v = -*v;
        }
        if let Some(free) = self.free {
            for c in 0..self.d.num_cells() {
                if !free.contains(c) {
                    g[c * self.m..(c + 1) * self.m].iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
    }

    fn delta(&self, x: &[f64], y: &[f64]) -> f64 {
        energy_delta(self.exec, self.d, x, y, self.m, self.p) / (self.d.h * self.d.h)
    }

    fn project(&self, x: &mut [f64]) {
        if let Some(big_m) = self.sup_radius {
            truncate_sup_in_place(x, self.m, big_m);
        }
        if let Some(c) = self.constraint {
            project_slice(self.d, x, self.m, c, self.p.wells());
        }
    }

    fn step_hint(&self) -> f64 {
        let big_m = self.p.wells().sup_radius;
        let h2 = self.d.h * self.d.h;
        1.0 / (8.0 / h2 + 12.0 * big_m * big_m + 4.0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizeOutcome {
    pub descent: DescentOutcome,
    pub energy: EnergyBreakdown,
    /// `‖Δ_h u − W_u(u)‖∞` over all cells.
    pub residual_sup: f64,
    pub activity: Option<Activity>,
}

impl MinimizeOutcome {
    pub fn converged(&self) -> bool {
        self.descent.converged
    }
}

/// Projected Barzilai–Borwein minimization of `J` from `u0`, every iterate
/// truncated at `M` and projected onto `X_N` when a constraint is given.
pub fn minimize<P: Potential + ?Sized>(
    d: &DiscreteDomain,
    u0: &Field,
    p: &P,
    constraint: Option<&ConstraintSpec>,
    opts: &DescentOptions,
    exec: Exec,
) -> Result<(Field, MinimizeOutcome)> {
    if u0.num_cells() != d.num_cells() || u0.dim() != p.dim() {
        return Err(Error::InvalidArgument("field does not match domain/potential".into()));
    }
    let obj = FieldObjective {
        d,
        p,
        m: p.dim(),
        exec,
        constraint,
        sup_radius: Some(p.wells().sup_radius),
        free: None,
    };
    let mut x = u0.as_slice().to_vec();
    let descent = projected_bb(&obj, &mut x, opts);
    let u = Field::from_vec(p.dim(), x);
    let energy = energy_with(exec, d, &u, p, None);
    let residual_sup = residual_with(exec, d, &u, p).sup_norm();
    let activity = constraint.map(|c| constraint_activity(d, &u, c, p.wells()));
    Ok((
        u,
        MinimizeOutcome {
            descent,
            energy,
            residual_sup,
            activity,
        },
    ))
}

/// Minimizes over the cells of `A` with all other cells held at their
/// values in `u`, which act as Dirichlet data through faces crossing `∂A`.
pub fn dirichlet_minimize_subdomain<P: Potential + ?Sized>(
    d: &DiscreteDomain,
    u: &Field,
    set: &CellSet,
    p: &P,
    opts: &DescentOptions,
) -> Result<(Field, DescentOutcome)> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("empty subdomain".into()));
    }
    let obj = FieldObjective {
        d,
        p,
        m: p.dim(),
        exec: Exec::Sequential,
        constraint: None,
        sup_radius: None,
        free: Some(set),
    };
    let mut x = u.as_slice().to_vec();
    let out = projected_bb(&obj, &mut x, opts);
    Ok((Field::from_vec(p.dim(), x), out))
}
