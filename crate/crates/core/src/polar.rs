//! Polar decomposition `u = a + ρν` about a minimum `a`, the discrete form
//! of `∫|∇u|² = ∫|∇ρ|² + ∫ρ²|∇ν|²`, radial truncations and the cut-off
//! replacement operator.
//!
//! Both truncation maps `x ↦ a + φ(|x − a|) (x − a)/|x − a|` used here have
//! `|φ'| ≤ 1` and `0 ≤ φ(ρ) ≤ ρ`, hence are 1-Lipschitz in `ℝᵐ`. Applied
//! cellwise they never increase any face difference, so the discrete
//! Dirichlet energy is non-increasing face by face.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{Exec, KahanSum};
use crate::field::{energy, Field};
use crate::geometry::{DiscreteDomain, StripSpec, EAST, NORTH};
use crate::linalg::dist;
use crate::minimizer::{dirichlet_minimize_subdomain, DescentOptions};
use crate::potential::Potential;

/// Membership mask over the active cells of a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSet {
    members: Vec<bool>,
}

impl CellSet {
    pub fn from_mask(members: Vec<bool>) -> Self {
        Self { members }
    }

    pub fn from_fn<F: Fn(f64, f64) -> bool>(d: &DiscreteDomain, f: F) -> Self {
        Self {
            members: (0..d.num_cells())
                .map(|c| {
                    let (s, y) = d.center(c);
                    f(s, y)
                })
                .collect(),
        }
    }

    pub fn all(d: &DiscreteDomain) -> Self {
        Self {
            members: vec![true; d.num_cells()],
        }
    }

    #[inline]
    pub fn contains(&self, c: usize) -> bool {
        self.members[c]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter_map(|(c, &b)| b.then_some(c))
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    /// Cells of the set with an active neighbour outside the set: the
    /// one-cell-thick inner boundary layer.
    pub fn boundary_layer(&self, d: &DiscreteDomain) -> Vec<usize> {
        self.iter()
            .filter(|&c| (0..4).any(|dir| matches!(d.neighbor(c, dir), Some(n) if !self.members[n])))
            .collect()
    }

    /// Edge connectivity of the set.
    pub fn is_connected(&self, d: &DiscreteDomain) -> bool {
        let Some(start) = self.iter().next() else {
            return false;
        };
        let mut seen = vec![false; self.members.len()];
        seen[start] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(c) = stack.pop() {
            for dir in 0..4 {
                if let Some(n) = d.neighbor(c, dir) {
                    if self.members[n] && !seen[n] {
                        seen[n] = true;
                        count += 1;
                        stack.push(n);
                    }
                }
            }
        }
        count == self.len()
    }
}

/// `ρ = |u − a|` per cell and `ν = (u − a)/ρ` where `ρ > 0`.
#[derive(Clone, Debug)]
pub struct PolarField {
    pub base: Vec<f64>,
    pub rho: Vec<f64>,
    /// Flat `m`-vectors; entries on cells with `ρ = 0` are NaN.
    pub nu: Vec<f64>,
}

impl PolarField {
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn nu(&self, c: usize) -> Option<&[f64]> {
        let m = self.dim();
        (self.rho[c] > 0.0).then(|| &self.nu[c * m..(c + 1) * m])
    }

    /// `a + ρν` on `{ρ > 0}`, `a` elsewhere.
    pub fn recompose(&self) -> Field {
        let m = self.dim();
        let n = self.rho.len();
        let mut out = Field::zeros(m, n);
        for c in 0..n {
            let v = out.cell_mut(c);
            match self.nu(c) {
                Some(nu) => {
                    for k in 0..m {
                        v[k] = self.base[k] + self.rho[c] * nu[k];
                    }
                }
                None => v.copy_from_slice(&self.base),
            }
        }
        out
    }
}

pub fn polar_decompose(u: &Field, a: &[f64]) -> PolarField {
    let m = u.dim();
    let n = u.num_cells();
    let mut rho = vec![0.0; n];
    let mut nu = vec![f64::NAN; n * m];
    for c in 0..n {
        let uc = u.cell(c);
        let r = dist(uc, a);
        rho[c] = r;
        if r > 0.0 {
            for k in 0..m {
                nu[c * m + k] = (uc[k] - a[k]) / r;
            }
        }
    }
    PolarField {
        base: a.to_vec(),
        rho,
        nu,
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PolarIdentity {
    /// `Σ_faces |u_A − u_B|²`.
    pub lhs: f64,
    /// `Σ_faces (ρ_A − ρ_B)²`.
    pub radial: f64,
    /// `Σ_faces ρ̄² |ν_A − ν_B|²`, `ρ̄` the face mean, zero across `{ρ = 0}`.
    pub angular: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Discrete polar energy identity; `gap = lhs − rhs` vanishes when `ρ` is
/// locally constant and is `O(h²)` for smooth fields away from `a`.
pub fn polar_energy_identity_check(d: &DiscreteDomain, u: &Field, a: &[f64]) -> PolarIdentity {
    let pf = polar_decompose(u, a);
    let mut lhs = KahanSum::new();
    let mut radial = KahanSum::new();
    let mut angular = KahanSum::new();
    for c in 0..d.num_cells() {
        for dir in [EAST, NORTH] {
            let Some(n) = d.neighbor(c, dir) else { continue };
            let sq: f64 = u.cell(c).iter().zip(u.cell(n)).map(|(x, y)| (x - y) * (x - y)).sum();
            lhs.add(sq);
            let dr = pf.rho[c] - pf.rho[n];
            radial.add(dr * dr);
            if let (Some(nc), Some(nn)) = (pf.nu(c), pf.nu(n)) {
                let mean = 0.5 * (pf.rho[c] + pf.rho[n]);
                let dn: f64 = nc.iter().zip(nn).map(|(x, y)| (x - y) * (x - y)).sum();
                angular.add(mean * mean * dn);
            }
        }
    }
    let (lhs, radial, angular) = (lhs.value(), radial.value(), angular.value());
    let rhs = radial + angular;
    PolarIdentity {
        lhs,
        radial,
        angular,
        rhs,
        gap: lhs - rhs,
    }
}

/// Writes `a + (new_rho/rho)(u − a)` into `out`, shrinking the scale by
/// ulps until the computed distance to `a` is at most `new_rho`.
fn set_radius(out: &mut [f64], u: &[f64], a: &[f64], rho: f64, new_rho: f64) {
    if new_rho <= 0.0 {
        out.copy_from_slice(a);
        return;
    }
    let mut scale = new_rho / rho;
    loop {
        for k in 0..a.len() {
            out[k] = a[k] + scale * (u[k] - a[k]);
        }
        if dist(out, a) <= new_rho {
            return;
        }
        scale *= 1.0 - 2.0 * f64::EPSILON;
    }
}

/// `α(τ)`: 1 on `[0, r]`, `(2r − τ)/r` on `[r, 2r]`, 0 beyond.
pub fn alpha(tau: f64, r: f64) -> f64 {
    if tau <= r {
        1.0
    } else if tau <= 2.0 * r {
        (2.0 * r - tau) / r
    } else {
        0.0
    }
}

fn map_cells<F: Fn(f64) -> f64>(u: &Field, a: &[f64], set: Option<&CellSet>, radius: F) -> Field {
    let mut out = u.clone();
    for c in 0..u.num_cells() {
        if set.is_some_and(|s| !s.contains(c)) {
            continue;
        }
        let uc = u.cell(c);
        let rho = dist(uc, a);
        let new_rho = radius(rho);
        if new_rho >= rho {
            continue;
        }
        set_radius(out.cell_mut(c), uc, a, rho, new_rho);
    }
    out
}

/// `ũ = a + min(ρ, r) ν` (and `a` where `ρ = 0`). Cells with `ρ ≤ r` are
/// returned bit-identical.
pub fn radial_truncate(u: &Field, a: &[f64], r: f64) -> Field {
    map_cells(u, a, None, |rho| rho.min(r))
}

/// `ũ = a + min(ρ, r) α(ρ) ν`; cells with `ρ ≥ 2r` map to `a`.
pub fn cutoff_alpha(u: &Field, a: &[f64], r: f64) -> Field {
    map_cells(u, a, None, |rho| rho.min(r) * alpha(rho, r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffStep {
    /// `max_A ρ ≤ 2r`: radial truncation at `r`.
    Radial,
    /// `max_A ρ > 2r`: the `α` cut-off.
    Alpha,
}

#[derive(Clone, Debug)]
pub struct CutoffOutcome {
    pub field: Field,
    pub step: CutoffStep,
    pub max_rho: f64,
    /// False when every cell of `A` already lies in the `r`-ball.
    pub changed: bool,
}

/// Cut-off replacement on the cell set `A`.
///
/// Requires `2r ≤ r0`, `A` edge-connected and `|u − a| ≤ r` on the inner
/// boundary layer of `A`. Outside `A` the field is returned unchanged.
pub fn cutoff_replace<P: Potential + ?Sized>(
    d: &DiscreteDomain,
    u: &Field,
    set: &CellSet,
    a: &[f64],
    r: f64,
    p: &P,
) -> Result<CutoffOutcome> {
    let r0 = p.wells().r0;
    if !(r > 0.0) || 2.0 * r > r0 {
        return Err(Error::CutoffPrecondition(format!(
            "need 0 < 2r <= r0, got r = {r}, r0 = {r0}"
        )));
    }
    if !set.is_connected(d) {
        return Err(Error::CutoffPrecondition("set A is not edge-connected".into()));
    }
    let violations: Vec<usize> = set
        .boundary_layer(d)
        .into_iter()
        .filter(|&c| dist(u.cell(c), a) > r)
        .collect();
    if !violations.is_empty() {
        let worst = violations.iter().map(|&c| dist(u.cell(c), a)).fold(0.0, f64::max);
        return Err(Error::CutoffPrecondition(format!(
            "{} boundary-layer cells outside the r-ball (max |u - a| = {worst})",
            violations.len()
        )));
    }
    let max_rho = set.iter().map(|c| dist(u.cell(c), a)).fold(0.0, f64::max);
    let step = if max_rho <= 2.0 * r {
        CutoffStep::Radial
    } else {
        CutoffStep::Alpha
    };
    if max_rho <= r {
        return Ok(CutoffOutcome {
            field: u.clone(),
            step,
            max_rho,
            changed: false,
        });
    }
    let field = match step {
        CutoffStep::Radial => map_cells(u, a, Some(set), |rho| rho.min(r)),
        CutoffStep::Alpha => map_cells(u, a, Some(set), |rho| rho.min(r) * alpha(rho, r)),
    };
    Ok(CutoffOutcome {
        field,
        step,
        max_rho,
        changed: true,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub sup_dist: f64,
    pub r: f64,
    pub tol: f64,
    pub initial_sup_dist: f64,
    pub converged: bool,
    pub iterations: usize,
    pub pass: bool,
}

/// Minimizes the energy on `A` with the values of `boundary` outside `A`
/// held fixed, starting from a random field inside `A` with excursions up to
/// `3r`, and checks `sup_A |u − a| ≤ r + tol`.
#[allow(clippy::too_many_arguments)]
pub fn max_principle_test<P: Potential + ?Sized>(
    d: &DiscreteDomain,
    p: &P,
    set: &CellSet,
    boundary: &Field,
    a: &[f64],
    r: f64,
    tol: f64,
    opts: &DescentOptions,
    seed: u64,
) -> Result<MaxPrincipleReport> {
    let r0 = p.wells().r0;
    if 2.0 * r > r0 {
        return Err(Error::CutoffPrecondition(format!("2r = {} exceeds r0 = {r0}", 2.0 * r)));
    }
    for c in 0..d.num_cells() {
        if !set.contains(c) && dist(boundary.cell(c), a) > r {
            return Err(Error::CutoffPrecondition(format!(
                "boundary data at cell {c} outside the r-ball"
            )));
        }
    }
    let m = p.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = boundary.clone();
    for c in set.iter() {
        let dir = random_unit(&mut rng, m);
        let rad = 3.0 * r * rng.gen::<f64>();
        let v = start.cell_mut(c);
        for k in 0..m {
            v[k] = a[k] + rad * dir[k];
        }
    }
    let initial_sup_dist = set.iter().map(|c| dist(start.cell(c), a)).fold(0.0, f64::max);
    let (out, outcome) = dirichlet_minimize_subdomain(d, &start, set, p, opts)?;
    let sup_dist = set.iter().map(|c| dist(out.cell(c), a)).fold(0.0, f64::max);
    Ok(MaxPrincipleReport {
        sup_dist,
        r,
        tol,
        initial_sup_dist,
        converged: outcome.converged,
        iterations: outcome.iterations,
        pass: sup_dist <= r + tol,
    })
}

fn random_unit(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..m).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let n = crate::linalg::norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Which branch a randomized cut-off trial is built to exercise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialKind {
    /// Peak in `(r, 2r]`.
    Step1,
    /// Peak in `(2r, 6r]`.
    Step2,
    /// Everything inside the `r`-ball: hypothesis (iii) fails.
    Identity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialSummary {
    pub kind: TrialKind,
    pub trials: usize,
    pub passed: usize,
    /// Smallest `J(u) − J(ũ)` among trials expected to decrease strictly.
    pub min_energy_drop: Option<f64>,
    /// Largest `|ũ − a| − r` on `A` (must be `≤ 0`).
    pub max_ball_excess: f64,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutoffSuiteReport {
    pub h: f64,
    pub r: f64,
    pub seed: u64,
    pub summaries: Vec<TrialSummary>,
}

impl CutoffSuiteReport {
    pub fn all_pass(&self) -> bool {
        self.summaries.iter().all(|s| s.passed == s.trials)
    }
}

/// Test geometry for the cut-off harness: the rectangle `[−1, 1] × [0, 1]`
/// and the connected block `A = (−0.7, 0.7) × (0.2, 0.8)`.
pub fn cutoff_test_domain(h: f64) -> Result<(DiscreteDomain, CellSet)> {
    let d = DiscreteDomain::build(&StripSpec::flat(1.0, 0.0, 1.0), h, 1.0)?;
    let set = CellSet::from_fn(&d, |s, y| s.abs() < 0.7 && y > 0.2 && y < 0.8);
    Ok((d, set))
}

struct Trial {
    u: Field,
    expect_step: CutoffStep,
}

fn make_trial<P: Potential + ?Sized>(
    d: &DiscreteDomain,
    set: &CellSet,
    p: &P,
    r: f64,
    kind: TrialKind,
    rng: &mut ChaCha8Rng,
) -> Trial {
    let m = p.dim();
    let a = &p.wells().a_plus;
    let layer: Vec<bool> = {
        let mut v = vec![false; d.num_cells()];
        for c in set.boundary_layer(d) {
            v[c] = true;
        }
        v
    };
    // Bump center on a cell at least three cells inside A.
    let interior: Vec<usize> = set
        .iter()
        .filter(|&c| {
            let (s, y) = d.center(c);
            s.abs() < 0.7 - 3.0 * d.h && y > 0.2 + 3.0 * d.h && y < 0.8 - 3.0 * d.h
        })
        .collect();
    let center = interior[rng.gen_range(0..interior.len())];
    let (cs, cy) = d.center(center);
    let peak = match kind {
        TrialKind::Step1 => r * (1.0 + rng.gen_range(0.05..1.0)),
        TrialKind::Step2 => r * rng.gen_range(2.05..6.0),
        TrialKind::Identity => r * rng.gen_range(0.3..0.99),
    };
    let width = rng.gen_range(0.05..0.25);
    let base_amp = r * rng.gen_range(0.1..0.9);
    let (k1, k2, ph) = (
        rng.gen_range(1.0..6.0),
        rng.gen_range(1.0..6.0),
        rng.gen_range(0.0..6.3),
    );
    let dir_coef: Vec<[f64; 4]> = (0..m)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.0..6.3),
            ]
        })
        .collect();
    let mut u = Field::zeros(m, d.num_cells());
    let mut nu = vec![0.0; m];
    for c in 0..d.num_cells() {
        let (s, y) = d.center(c);
        let base = base_amp * (0.5 + 0.5 * (k1 * s + k2 * y + ph).sin());
        let g = peak * (-((s - cs).powi(2) + (y - cy).powi(2)) / (width * width)).exp();
        let mut rho = if c == center { peak } else { base.max(g) };
        if set.contains(c) {
            match kind {
                TrialKind::Step1 => rho = rho.min(2.0 * r),
                TrialKind::Identity => rho = rho.min(0.99 * r),
                TrialKind::Step2 => {}
            }
            if layer[c] {
                rho = rho.min(0.999 * r);
            }
        }
        for k in 0..m {
            let [c0, cx, cy2, phk] = dir_coef[k];
            nu[k] = c0 + (cx * s + cy2 * y + phk).sin();
        }
        let nn = crate::linalg::norm(&nu);
        let v = u.cell_mut(c);
        if nn < 1e-9 {
            v.copy_from_slice(a);
            v[0] += rho;
        } else {
            for k in 0..m {
                v[k] = a[k] + rho * nu[k] / nn;
            }
        }
    }
    let expect_step = if kind == TrialKind::Step2 {
        CutoffStep::Alpha
    } else {
        CutoffStep::Radial
    };
    Trial { u, expect_step }
}

/// Runs randomized cut-off trials for each branch and checks ball trapping,
/// strict energy decrease, locality and the branch flag.
pub fn run_cutoff_suite<P: Potential + ?Sized>(
    p: &P,
    h: f64,
    r: f64,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<CutoffSuiteReport> {
    let (d, set) = cutoff_test_domain(h)?;
    let a = p.wells().a_plus.clone();
    let mut summaries = Vec::new();
    for (kid, kind) in [TrialKind::Step1, TrialKind::Step2, TrialKind::Identity]
        .into_iter()
        .enumerate()
    {
        let results = exec.map(trials, |t| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ ((kid as u64) << 40) ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let trial = make_trial(&d, &set, p, r, kind, &mut rng);
            check_trial(&d, &set, p, &a, r, kind, &trial)
        });
        let mut passed = 0;
        let mut min_drop: Option<f64> = None;
        let mut max_excess = f64::NEG_INFINITY;
        let mut failures = Vec::new();
        for (t, res) in results.into_iter().enumerate() {
            match res {
                Ok((drop, excess)) => {
                    passed += 1;
                    if let Some(dr) = drop {
                        min_drop = Some(min_drop.map_or(dr, |x: f64| x.min(dr)));
                    }
                    max_excess = max_excess.max(excess);
                }
                Err(e) => {
                    if failures.len() < 10 {
                        failures.push(format!("trial {t}: {e}"));
                    }
                }
            }
        }
        summaries.push(TrialSummary {
            kind,
            trials,
            passed,
            min_energy_drop: min_drop,
            max_ball_excess: max_excess,
            failures,
        });
    }
    Ok(CutoffSuiteReport {
        h: d.h,
        r,
        seed,
        summaries,
    })
}

fn check_trial<P: Potential + ?Sized>(
    d: &DiscreteDomain,
    set: &CellSet,
    p: &P,
    a: &[f64],
    r: f64,
    kind: TrialKind,
    trial: &Trial,
) -> std::result::Result<(Option<f64>, f64), String> {
    let out = cutoff_replace(d, &trial.u, set, a, r, p).map_err(|e| e.to_string())?;
    if out.step != trial.expect_step {
        return Err(format!("branch {:?}, expected {:?}", out.step, trial.expect_step));
    }
    let excess = set
        .iter()
        .map(|c| dist(out.field.cell(c), a) - r)
        .fold(f64::NEG_INFINITY, f64::max);
    for c in 0..d.num_cells() {
        if !set.contains(c) && out.field.cell(c) != trial.u.cell(c) {
            return Err(format!("cell {c} outside A modified"));
        }
    }
    let j0 = energy(d, &trial.u, p, None).total;
    let j1 = energy(d, &out.field, p, None).total;
    match kind {
        TrialKind::Identity => {
            if out.changed || out.field != trial.u {
                return Err("identity trial modified the field".into());
            }
            if excess > 0.0 {
                return Err(format!("ball excess {excess:e}"));
            }
            Ok((None, excess))
        }
        _ => {
            if excess > 0.0 {
                return Err(format!("ball excess {excess:e}"));
            }
            if !(j1 < j0) {
                return Err(format!("energy did not decrease: {j0} -> {j1}"));
            }
            Ok((Some(j0 - j1), excess))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaxPrincipleSuiteReport {
    pub h: f64,
    pub r: f64,
    pub trials: usize,
    pub failures: usize,
    pub non_converged: usize,
    pub worst_sup_dist: f64,
    pub tol: f64,
}

/// Randomized maximum-principle trials on the rectangle `[−1, 1] × [0, 1]`:
/// `A` is everything but the outer ring of cells, which carries random data
/// in the `r`-ball about `a₊`.
pub fn run_max_principle_suite<P: Potential + ?Sized>(
    p: &P,
    h: f64,
    r: f64,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<MaxPrincipleSuiteReport> {
    let d = DiscreteDomain::build(&StripSpec::flat(1.0, 0.0, 1.0), h, 1.0)?;
    let (nx, hh) = (d.nx, d.h);
    let ny_active = d.column(0).len();
    let set = CellSet::from_mask(
        (0..d.num_cells())
            .map(|c| {
                let (i, _) = d.cell_ij(c);
                let k = c - d.column(i).start;
                i > 0 && i + 1 < nx && k > 0 && k + 1 < ny_active
            })
            .collect(),
    );
    let a = p.wells().a_plus.clone();
    let m = p.dim();
    let tol = 2.0 * hh;
    let opts = DescentOptions {
        tol: 1e-8,
        max_iter: 50_000,
        ..DescentOptions::default()
    };
    let reports = exec.map(trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x1000 * t as u64 + 7));
        let mut bd = Field::constant(&d, &a);
        for c in 0..d.num_cells() {
            if set.contains(c) {
                continue;
            }
            let dir = random_unit(&mut rng, m);
            let rad = r * rng.gen::<f64>();
            let v = bd.cell_mut(c);
            for k in 0..m {
                v[k] = a[k] + rad * dir[k];
            }
        }
        max_principle_test(&d, p, &set, &bd, &a, r, tol, &opts, rng.gen())
    });
    let mut failures = 0;
    let mut non_converged = 0;
    let mut worst: f64 = 0.0;
    for rep in reports {
        let rep = rep?;
        worst = worst.max(rep.sup_dist);
        if !rep.pass {
            failures += 1;
        }
        if !rep.converged {
            non_converged += 1;
        }
    }
    Ok(MaxPrincipleSuiteReport {
        h: hh,
        r,
        trials,
        failures,
        non_converged,
        worst_sup_dist: worst,
        tol,
    })
}
