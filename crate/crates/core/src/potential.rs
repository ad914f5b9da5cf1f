//! Double-well potentials `W: ℝᵐ → ℝ`, sampling checks of the standing
//! hypotheses, and the radial lower-bound functions `g` and `f`.
//!
//! `g(r)` is the smallest radial derivative `⟨W_u(a + r'ν), ν⟩` over
//! `r' ∈ [r, r0]`, unit directions `ν` and both minima `a`. `f` is a
//! nondecreasing function with `f(0) = 0` and `f(r²) ≤ 2 r g(r)`; it drives
//! the scalar comparison problem in [`crate::comparison`].

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm};

/// The two global minima together with the radii `r0` (radial monotonicity)
/// and `M` (growth) attached to a potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wells {
    pub a_minus: Vec<f64>,
    pub a_plus: Vec<f64>,
    pub r0: f64,
    pub sup_radius: f64,
}

impl Wells {
    pub fn dim(&self) -> usize {
        self.a_plus.len()
    }

    /// Unit vector from `a_minus` to `a_plus`.
    pub fn axis(&self) -> Vec<f64> {
        let d: Vec<f64> = self.a_plus.iter().zip(&self.a_minus).map(|(p, m)| p - m).collect();
        let n = norm(&d);
        d.into_iter().map(|x| x / n).collect()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.a_plus
            .iter()
            .zip(&self.a_minus)
            .map(|(p, m)| 0.5 * (p + m))
            .collect()
    }

    /// Distance to the nearer of the two minima.
    pub fn min_dist(&self, u: &[f64]) -> f64 {
        dist(u, &self.a_minus).min(dist(u, &self.a_plus))
    }
}

/// A potential with two global minima. Implementations must be cheap to call
/// and thread-safe; all solver loops evaluate them per cell.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, u: &[f64]) -> f64;
    fn gradient(&self, u: &[f64], out: &mut [f64]);
    /// Row-major `m × m` Hessian.
    fn hessian(&self, u: &[f64], out: &mut [f64]);
    fn wells(&self) -> &Wells;
    /// `W(v) − W(u)`. Implementations should avoid cancellation when `v` is
    /// close to `u`.
    fn value_diff(&self, u: &[f64], v: &[f64]) -> f64 {
        self.value(v) - self.value(u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `¼(1 − u²)²` on ℝ.
    ScalarQuartic,
    /// `|u − a₋|² |u − a₊|²`.
    ProductWell,
    /// `|u − a₋|² |u − a₊|⁴`, quartic contact at `a₊`.
    DegenerateWell,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ScalarQuartic => "scalar_quartic",
            Family::ProductWell => "product_well",
            Family::DegenerateWell => "degenerate_well",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "scalar_quartic" => Some(Family::ScalarQuartic),
            "product_well" => Some(Family::ProductWell),
            "degenerate_well" => Some(Family::DegenerateWell),
            _ => None,
        }
    }
}

/// Built-in potential families. `offset` is added to `W` everywhere; it is
/// zero for admissible potentials and exists to exercise the positivity checker.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleWell {
    family: Family,
    wells: Wells,
    offset: f64,
}

impl DoubleWell {
    pub fn scalar_quartic() -> Self {
        Self {
            family: Family::ScalarQuartic,
            wells: Wells {
                a_minus: vec![-1.0],
                a_plus: vec![1.0],
                r0: 0.5,
                sup_radius: 2.0,
            },
            offset: 0.0,
        }
    }

    pub fn product_well(a_minus: Vec<f64>, a_plus: Vec<f64>) -> Self {
        assert_eq!(a_minus.len(), a_plus.len(), "minima dimension mismatch");
        Self {
            family: Family::ProductWell,
            wells: Wells {
                a_minus,
                a_plus,
                r0: 0.5,
                sup_radius: 2.0,
            },
            offset: 0.0,
        }
    }

    pub fn degenerate_well(a_minus: Vec<f64>, a_plus: Vec<f64>) -> Self {
        assert_eq!(a_minus.len(), a_plus.len(), "minima dimension mismatch");
        Self {
            family: Family::DegenerateWell,
            wells: Wells {
                a_minus,
                a_plus,
                r0: 0.5,
                sup_radius: 2.0,
            },
            offset: 0.0,
        }
    }

    /// Builds a family from its name with the standard planar minima
    /// `(±1, 0, …)` in dimension `m` (ignored for the scalar quartic).
    pub fn from_family(family: Family, m: usize) -> Self {
        let mut am = vec![0.0; m.max(1)];
        let mut ap = vec![0.0; m.max(1)];
        am[0] = -1.0;
        ap[0] = 1.0;
        match family {
            Family::ScalarQuartic => Self::scalar_quartic(),
            Family::ProductWell => Self::product_well(am, ap),
            Family::DegenerateWell => Self::degenerate_well(am, ap),
        }
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.wells.r0 = r0;
        self
    }

    pub fn with_sup_radius(mut self, m: f64) -> Self {
        self.wells.sup_radius = m;
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }
}

impl Potential for DoubleWell {
    fn dim(&self) -> usize {
        self.wells.dim()
    }

    fn value(&self, u: &[f64]) -> f64 {
        let w = match self.family {
            Family::ScalarQuartic => {
                let q = 1.0 - u[0] * u[0];
                0.25 * q * q
            }
            Family::ProductWell => sq_dist(u, &self.wells.a_minus) * sq_dist(u, &self.wells.a_plus),
            Family::DegenerateWell => {
                let q = sq_dist(u, &self.wells.a_plus);
                sq_dist(u, &self.wells.a_minus) * q * q
            }
        };
        w + self.offset
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        match self.family {
            Family::ScalarQuartic => out[0] = u[0] * u[0] * u[0] - u[0],
            Family::ProductWell => {
                let (am, ap) = (&self.wells.a_minus, &self.wells.a_plus);
                let p = sq_dist(u, am);
                let q = sq_dist(u, ap);
                for k in 0..u.len() {
                    out[k] = 2.0 * q * (u[k] - am[k]) + 2.0 * p * (u[k] - ap[k]);
                }
            }
            Family::DegenerateWell => {
                let (am, ap) = (&self.wells.a_minus, &self.wells.a_plus);
                let p = sq_dist(u, am);
                let q = sq_dist(u, ap);
                for k in 0..u.len() {
                    out[k] = 2.0 * q * q * (u[k] - am[k]) + 4.0 * p * q * (u[k] - ap[k]);
                }
            }
        }
    }

    fn hessian(&self, u: &[f64], out: &mut [f64]) {
        let m = u.len();
        match self.family {
            Family::ScalarQuartic => out[0] = 3.0 * u[0] * u[0] - 1.0,
            Family::ProductWell => {
                let (am, ap) = (&self.wells.a_minus, &self.wells.a_plus);
                let p = sq_dist(u, am);
                let q = sq_dist(u, ap);
                for i in 0..m {
                    for j in 0..m {
                        let dm_i = u[i] - am[i];
                        let dp_i = u[i] - ap[i];
                        let dm_j = u[j] - am[j];
                        let dp_j = u[j] - ap[j];
                        let mut v = 4.0 * (dm_i * dp_j + dp_i * dm_j);
                        if i == j {
                            v += 2.0 * (p + q);
                        }
                        out[i * m + j] = v;
                    }
                }
            }
            Family::DegenerateWell => {
                let (am, ap) = (&self.wells.a_minus, &self.wells.a_plus);
                let p = sq_dist(u, am);
                let q = sq_dist(u, ap);
                for i in 0..m {
                    for j in 0..m {
                        let dm_i = u[i] - am[i];
                        let dp_i = u[i] - ap[i];
                        let dm_j = u[j] - am[j];
                        let dp_j = u[j] - ap[j];
                        let mut v = 8.0 * q * (dm_i * dp_j + dp_i * dm_j) + 8.0 * p * dp_i * dp_j;
                        if i == j {
                            v += 2.0 * q * q + 4.0 * p * q;
                        }
                        out[i * m + j] = v;
                    }
                }
            }
        }
    }

    fn wells(&self) -> &Wells {
        &self.wells
    }

    fn value_diff(&self, u: &[f64], v: &[f64]) -> f64 {
        let (am, ap) = (&self.wells.a_minus, &self.wells.a_plus);
        match self.family {
            Family::ScalarQuartic => {
                let (qu, qv) = (1.0 - u[0] * u[0], 1.0 - v[0] * v[0]);
                let dq = (u[0] - v[0]) * (u[0] + v[0]);
                0.25 * dq * (qu + qv)
            }
            Family::ProductWell => {
                let (pu, qv) = (sq_dist(u, am), sq_dist(v, ap));
                sq_dist_diff(u, v, am) * qv + pu * sq_dist_diff(u, v, ap)
            }
            Family::DegenerateWell => {
                let (pu, qu, qv) = (sq_dist(u, am), sq_dist(u, ap), sq_dist(v, ap));
                sq_dist_diff(u, v, am) * qv * qv + pu * sq_dist_diff(u, v, ap) * (qu + qv)
            }
        }
    }
}

/// `|v − c|² − |u − c|² = Σ (v − u)(v + u − 2c)`.
#[inline]
fn sq_dist_diff(u: &[f64], v: &[f64], c: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .zip(c)
        .map(|((x, y), c)| (y - x) * ((y - c) + (x - c)))
        .sum()
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Smallest Hessian eigenvalue at a minimum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HessianCheck {
    pub min_eig: f64,
    /// `√μ`, the linearized decay rate, when `μ > 0`.
    pub k0_candidate: Option<f64>,
    pub degenerate: bool,
}

pub const DEGENERACY_TOL: f64 = 1e-9;

pub fn min_eig_hess<P: Potential + ?Sized>(p: &P, a: &[f64]) -> HessianCheck {
    let m = p.dim();
    let mut h = vec![0.0; m * m];
    p.hessian(a, &mut h);
    let mat = DMatrix::from_row_slice(m, m, &h);
    let sym = (&mat + mat.transpose()) * 0.5;
    let mu = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let degenerate = mu <= DEGENERACY_TOL;
    HessianCheck {
        min_eig: mu,
        k0_candidate: (!degenerate).then(|| mu.sqrt()),
        degenerate,
    }
}

/// Deterministic direction samples on the unit sphere `𝕊^{m−1}`.
///
/// `m = 1`: `{−1, +1}`; `m = 2`: `n` equal angles; `m = 3`: Fibonacci
/// sphere with `n` points; larger `m`: normalized Gaussian draws from a fixed
/// seed.
pub fn sphere_samples(m: usize, n: usize) -> Vec<Vec<f64>> {
    match m {
        1 => vec![vec![-1.0], vec![1.0]],
        2 => (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let rad = (1.0 - z * z).max(0.0).sqrt();
                    let th = golden * k as f64;
                    vec![rad * th.cos(), rad * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            (0..n)
                .map(|_| {
                    let v: Vec<f64> = (0..m)
                        .map(|_| {
                            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
                            (-2.0 * (1.0 - a).ln()).sqrt() * (2.0 * std::f64::consts::PI * b).cos()
                        })
                        .collect();
                    let nv = norm(&v);
                    v.into_iter().map(|x| x / nv).collect()
                })
                .collect()
        }
    }
}

/// Default sphere resolution per state dimension.
pub fn default_sphere_count(m: usize) -> usize {
    match m {
        1 => 2,
        2 => 720,
        _ => 2048,
    }
}

/// Tabulated `g` on a uniform radial grid, optionally with `f` on the
/// matching grid `t_i = r_i²`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialBoundFn {
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    /// `f(r_i²)`; empty until [`build_f`] runs.
    pub f: Vec<f64>,
    pub linear_c2: Option<f64>,
    /// Largest downward adjustment applied to force strict increase of `f`.
    pub strict_adjustment: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FMode {
    Envelope,
    Linear,
}

impl RadialBoundFn {
    /// A `g` table given directly; used for hand-built bounds.
    pub fn from_g_table(r: Vec<f64>, g: Vec<f64>) -> Self {
        assert_eq!(r.len(), g.len());
        Self {
            r,
            g,
            f: Vec::new(),
            linear_c2: None,
            strict_adjustment: 0.0,
        }
    }

    /// Pure linear bound `f(t) = c² t`, without a `g` table.
    pub fn linear(c2: f64) -> Self {
        Self {
            r: Vec::new(),
            g: Vec::new(),
            f: Vec::new(),
            linear_c2: Some(c2),
            strict_adjustment: 0.0,
        }
    }

    pub fn r_max(&self) -> f64 {
        self.r.last().copied().unwrap_or(0.0)
    }

    /// `g(r)` evaluated at the tabulation node at or below `r`; a lower bound
    /// for the exact running minimum since `g` is nondecreasing.
    pub fn g_at(&self, r: f64) -> f64 {
        if self.r.is_empty() || r <= 0.0 {
            return 0.0;
        }
        let dr = self.r[1] - self.r[0];
        let k = ((r / dr).floor() as usize).min(self.r.len() - 1);
        self.g[k]
    }

    fn t_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.r.iter().map(|r| r * r)
    }

    /// `f(t)`, extended by zero for `t < 0` and linearly past the table.
    pub fn f_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if let Some(c2) = self.linear_c2 {
            return c2 * t;
        }
        let (k, w) = self.locate(t);
        self.f[k] + w * (self.f[k + 1] - self.f[k])
    }

    /// Right derivative of the piecewise-linear `f`.
    pub fn f_prime(&self, t: f64) -> f64 {
        if let Some(c2) = self.linear_c2 {
            return if t < 0.0 { 0.0 } else { c2 };
        }
        if t < 0.0 {
            return 0.0;
        }
        let (k, _) = self.locate(t);
        let t0 = self.r[k] * self.r[k];
        let t1 = self.r[k + 1] * self.r[k + 1];
        (self.f[k + 1] - self.f[k]) / (t1 - t0)
    }

    /// Largest slope of `f`, a Lipschitz bound on the table.
    pub fn f_lipschitz(&self) -> f64 {
        if let Some(c2) = self.linear_c2 {
            return c2;
        }
        let t: Vec<f64> = self.t_nodes().collect();
        (0..t.len() - 1)
            .map(|k| (self.f[k + 1] - self.f[k]) / (t[k + 1] - t[k]))
            .fold(0.0, f64::max)
    }

    // Segment index and weight for t > 0; past the table the last segment
    // is extrapolated.
    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.r.len();
        let r = t.sqrt();
        let dr = self.r[1] - self.r[0];
        let mut k = ((r / dr).floor() as usize).min(n - 2);
        while k > 0 && self.r[k] * self.r[k] > t {
            k -= 1;
        }
        while k + 2 < n && self.r[k + 1] * self.r[k + 1] <= t {
            k += 1;
        }
        let t0 = self.r[k] * self.r[k];
        let t1 = self.r[k + 1] * self.r[k + 1];
        (k, (t - t0) / (t1 - t0))
    }

    /// Nodewise check of `0 ≤ f(r²) ≤ 2 r g(r)` (or `c² t ≤ 2√t g(√t)`).
    /// Returns the smallest slack `2 r g(r) − f(r²)`.
    pub fn admissibility_margin(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for (i, &r) in self.r.iter().enumerate() {
            let bound = 2.0 * r * self.g[i];
            let fv = match self.linear_c2 {
                Some(c2) => c2 * r * r,
                None => self.f[i],
            };
            if fv < 0.0 {
                return fv;
            }
            worst = worst.min(bound - fv);
        }
        worst
    }
}

/// Tabulates `g(r) = min_{r'∈[r,r0]} min_{ν,a} ⟨W_u(a + r'ν), ν⟩` on `n_r`
/// uniform nodes of `[0, r0]` using a suffix minimum.
pub fn compute_g<P: Potential + ?Sized>(p: &P, n_r: usize, n_sphere: usize) -> Result<RadialBoundFn> {
    if n_r < 2 {
        return Err(Error::InvalidArgument("n_r must be at least 2".into()));
    }
    let wells = p.wells();
    let m = p.dim();
    let r0 = wells.r0;
    let dirs = sphere_samples(m, n_sphere);
    let r: Vec<f64> = (0..n_r).map(|i| r0 * i as f64 / (n_r - 1) as f64).collect();
    let mut point = vec![0.0; m];
    let mut grad = vec![0.0; m];
    let mut inner: Vec<f64> = r
        .iter()
        .map(|&ri| {
            let mut best = f64::INFINITY;
            for a in [&wells.a_minus, &wells.a_plus] {
                for nu in &dirs {
                    for k in 0..m {
                        point[k] = a[k] + ri * nu[k];
                    }
                    p.gradient(&point, &mut grad);
                    best = best.min(dot(&grad, nu));
                }
            }
            best
        })
        .collect();
    inner[0] = 0.0;
    let mut g = inner;
    for i in (0..n_r - 1).rev() {
        g[i] = g[i].min(g[i + 1]);
    }
    for i in 1..n_r {
        if g[i] <= 0.0 {
            return Err(Error::RadialMonotonicity { r: r[i], value: g[i] });
        }
    }
    Ok(RadialBoundFn::from_g_table(r, g))
}

/// Relative threshold below which `inf 2g(r)/r` is treated as zero.
const LINEAR_DEGENERACY_REL: f64 = 1e-3;

/// Builds `f` from a tabulated `g`.
///
/// Envelope mode takes the nondecreasing lower envelope of `2√t g(√t)` and
/// repairs any ties by a multiplicative shrink that keeps `f ≤ 2 r g`.
/// Linear mode sets `c² = min_{r>0} 2g(r)/r`.
pub fn build_f(rb: &RadialBoundFn, mode: FMode) -> Result<RadialBoundFn> {
    let n = rb.r.len();
    if n < 2 {
        return Err(Error::InvalidArgument("g table has fewer than two nodes".into()));
    }
    let mut out = rb.clone();
    match mode {
        FMode::Envelope => {
            let mut f: Vec<f64> = (0..n).map(|i| 2.0 * rb.r[i] * rb.g[i]).collect();
            f[0] = 0.0;
            for i in (0..n - 1).rev() {
                f[i] = f[i].min(f[i + 1]);
            }
            let t_max = rb.r[n - 1] * rb.r[n - 1];
            let mut adjust: f64 = 0.0;
            for i in 1..n {
                if f[i] <= f[i - 1] {
                    // Shrink factor decreasing in t makes ties strict.
                    let eps = 1e-12;
                    for k in 1..n {
                        let t = rb.r[k] * rb.r[k];
                        let nf = f[k] * (1.0 - eps * (1.0 - t / t_max));
                        adjust = adjust.max(f[k] - nf);
                        f[k] = nf;
                    }
                    break;
                }
            }
            out.f = f;
            out.linear_c2 = None;
            out.strict_adjustment = adjust;
        }
        FMode::Linear => {
            let ratios: Vec<f64> = (1..n).map(|i| 2.0 * rb.g[i] / rb.r[i]).collect();
            let c2 = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let scale = ratios.iter().copied().fold(0.0, f64::max);
            if !(c2 > LINEAR_DEGENERACY_REL * scale) {
                return Err(Error::DegenerateMinimum(c2));
            }
            let mut c2 = c2;
            while (1..n).any(|i| c2 * rb.r[i] * rb.r[i] > 2.0 * rb.r[i] * rb.g[i]) {
                c2 *= 1.0 - 1e-14;
            }
            out.f = rb.r.iter().map(|r| c2 * r * r).collect();
            out.linear_c2 = Some(c2);
            out.strict_adjustment = 0.0;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub pass: bool,
    /// Smallest observed margin; negative values indicate violations.
    pub worst_margin: f64,
    pub samples: usize,
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `W > 0` off the minima and `W(a±) = 0`.
    pub positivity: HypothesisResult,
    /// `r ↦ W(a + rν)` increasing on `(0, r0]`.
    pub radial_monotonicity: HypothesisResult,
    /// `W(su) ≥ W(u)` for `|u| = M`, `s ≥ 1`.
    pub dilation: HypothesisResult,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.positivity.pass && self.radial_monotonicity.pass && self.dilation.pass
    }
}

/// Upper end of the sampled dilation range.
pub const DILATION_S_MAX: f64 = 4.0;

/// Samples positivity off the minima, radial monotonicity on `(0, r0]` and
/// the dilation bound `W(su) ≥ W(u)` for `|u| = M`, `s ∈ [1, 4]`.
pub fn check_hypotheses<P: Potential + ?Sized>(p: &P, samples: usize) -> HypothesisReport {
    let wells = p.wells();
    let m = p.dim();
    let samples = samples.max(8);
    let mut rng = ChaCha8Rng::seed_from_u64(0x4879_7031);

    // Positivity
    let w_min = p.value(&wells.a_minus);
    let w_plus = p.value(&wells.a_plus);
    let zero_err = w_min.abs().max(w_plus.abs());
    let center = wells.midpoint();
    let half = 0.5 * dist(&wells.a_plus, &wells.a_minus) + wells.sup_radius;
    let mut h1_worst = f64::INFINITY;
    let mut u = vec![0.0; m];
    for _ in 0..samples {
        for k in 0..m {
            u[k] = center[k] + half * (2.0 * rng.gen::<f64>() - 1.0);
        }
        if wells.min_dist(&u) < 1e-9 {
            continue;
        }
        h1_worst = h1_worst.min(p.value(&u));
    }
    let h1_pass = zero_err <= 1e-14 && h1_worst > 0.0;
    let h1 = HypothesisResult {
        pass: h1_pass,
        worst_margin: if zero_err > 1e-14 { -zero_err } else { h1_worst },
        samples,
        note: format!("W(a-)={w_min:e}, W(a+)={w_plus:e}, min sampled W={h1_worst:e}"),
    };

    // Radial monotonicity
    let dirs = sphere_samples(m, default_sphere_count(m).min(samples.max(2)));
    let nr = samples.max(16);
    let dr = wells.r0 / nr as f64;
    let mut h2_worst = f64::INFINITY;
    let mut pt = vec![0.0; m];
    for a in [&wells.a_minus, &wells.a_plus] {
        for nu in &dirs {
            let mut prev = p.value(a);
            for k in 1..=nr {
                let r = k as f64 * dr;
                for c in 0..m {
                    pt[c] = a[c] + r * nu[c];
                }
                let w = p.value(&pt);
                h2_worst = h2_worst.min((w - prev) / dr);
                prev = w;
            }
        }
    }
    let h2 = HypothesisResult {
        pass: h2_worst > 0.0,
        worst_margin: h2_worst,
        samples: 2 * dirs.len() * nr,
        note: format!("r0={}, {} radial nodes", wells.r0, nr),
    };

    // Dilation
    let big_m = wells.sup_radius;
    let ns = 64;
    let mut h3_worst = f64::INFINITY;
    for nu in &dirs {
        let base: Vec<f64> = nu.iter().map(|x| big_m * x).collect();
        let w0 = p.value(&base);
        for k in 0..=ns {
            let s = 1.0 + (DILATION_S_MAX - 1.0) * k as f64 / ns as f64;
            let su: Vec<f64> = base.iter().map(|x| s * x).collect();
            h3_worst = h3_worst.min(p.value(&su) - w0);
        }
    }
    let h3 = HypothesisResult {
        pass: h3_worst >= 0.0,
        worst_margin: h3_worst,
        samples: dirs.len() * (ns + 1),
        note: format!("M={}, s in [1, {}]", big_m, DILATION_S_MAX),
    };

    HypothesisReport {
        positivity: h1,
        radial_monotonicity: h2,
        dilation: h3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_grad<P: Potential>(p: &P, u: &[f64]) -> Vec<f64> {
        let eps = 1e-6;
        (0..u.len())
            .map(|k| {
                let mut a = u.to_vec();
                let mut b = u.to_vec();
                a[k] += eps;
                b[k] -= eps;
                (p.value(&a) - p.value(&b)) / (2.0 * eps)
            })
            .collect()
    }

    #[test]
    fn evaluations_at_known_points() {
        let pw = DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]);
        assert_eq!(pw.value(&[1.0, 0.0]), 0.0);
        assert_eq!(pw.value(&[0.0, 0.0]), 1.0);
        let sq = DoubleWell::scalar_quartic();
        assert_eq!(sq.value(&[0.0]), 0.25);
        let mut g = [0.0];
        sq.gradient(&[0.5], &mut g);
        assert_relative_eq!(g[0], -0.375, epsilon = 1e-15);
        for p in [
            DoubleWell::scalar_quartic(),
            pw.clone(),
            DoubleWell::degenerate_well(vec![-1.0, 0.0], vec![1.0, 0.0]),
        ] {
            let mut g = vec![1.0; p.dim()];
            p.gradient(&p.wells().a_plus.clone(), &mut g);
            assert!(g.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn value_diff_matches_direct_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [
            DoubleWell::scalar_quartic(),
            DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]),
            DoubleWell::degenerate_well(vec![-1.0, 0.0], vec![1.0, 0.0]),
        ] {
            for _ in 0..200 {
                let u: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let v: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let direct = p.value(&v) - p.value(&u);
                assert_relative_eq!(p.value_diff(&u, &v), direct, epsilon = 1e-11, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pots = [
            DoubleWell::scalar_quartic(),
            DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]),
            DoubleWell::degenerate_well(vec![-1.0, 0.0, 0.5], vec![1.0, 0.2, 0.0]),
        ];
        for p in &pots {
            let m = p.dim();
            for _ in 0..100 {
                let u: Vec<f64> = (0..m).map(|_| 3.0 * rng.gen::<f64>() - 1.5).collect();
                let mut g = vec![0.0; m];
                p.gradient(&u, &mut g);
                let fd = fd_grad(p, &u);
                let gn = crate::linalg::sup_norm(&g);
                for k in 0..m {
                    assert!((g[k] - fd[k]).abs() <= 1e-5 * (1.0 + gn), "{g:?} vs {fd:?}");
                }
                let mut h = vec![0.0; m * m];
                p.hessian(&u, &mut h);
                let hn = crate::linalg::sup_norm(&h);
                let eps = 1e-6;
                for j in 0..m {
                    let mut a = u.clone();
                    let mut b = u.clone();
                    a[j] += eps;
                    b[j] -= eps;
                    let mut ga = vec![0.0; m];
                    let mut gb = vec![0.0; m];
                    p.gradient(&a, &mut ga);
                    p.gradient(&b, &mut gb);
                    for i in 0..m {
                        let fdh = (ga[i] - gb[i]) / (2.0 * eps);
                        assert!((h[i * m + j] - fdh).abs() <= 1e-5 * (1.0 + hn));
                    }
                }
            }
        }
    }

    #[test]
    fn hessian_eigenvalues_at_minima() {
        let pw = DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]);
        let hc = min_eig_hess(&pw, &[1.0, 0.0]);
        assert_relative_eq!(hc.min_eig, 8.0, epsilon = 1e-12);
        assert_relative_eq!(hc.k0_candidate.unwrap(), 8f64.sqrt(), epsilon = 1e-12);
        let sq = DoubleWell::scalar_quartic();
        assert_relative_eq!(min_eig_hess(&sq, &[1.0]).min_eig, 2.0, epsilon = 1e-15);
        let dw = DoubleWell::degenerate_well(vec![-1.0, 0.0], vec![1.0, 0.0]);
        let hc = min_eig_hess(&dw, &[1.0, 0.0]);
        assert!(hc.degenerate);
        assert!(hc.min_eig.abs() < 1e-12);
        assert!(hc.k0_candidate.is_none());
        // a_minus of the degenerate well is nondegenerate: 2·|a₊−a₋|⁴ = 32.
        assert_relative_eq!(min_eig_hess(&dw, &[-1.0, 0.0]).min_eig, 32.0, epsilon = 1e-12);
    }

    #[test]
    fn g_table_properties() {
        let pw = DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]);
        let rb = compute_g(&pw, 512, 720).unwrap();
        assert_eq!(rb.g[0], 0.0);
        assert!(rb.g.windows(2).all(|w| w[1] >= w[0]));
        assert!(rb.g[1..].iter().all(|&x| x > 0.0));
        // Strict increase on the part of [0, r0] where the radial derivative
        // itself increases.
        assert!(rb.g[..300].windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn g_at_point_against_dense_grid() {
        let pw = DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]);
        let rb = compute_g(&pw, 512, 720).unwrap();
        let g01 = rb.g_at(0.1);
        // Oracle: dense (r', ν) grid at 10x resolution for r' ∈ [0.1, r0].
        let dirs = sphere_samples(2, 7200);
        let mut at_r = f64::INFINITY;
        let mut running = f64::INFINITY;
        let n = 5120;
        for i in 0..=n {
            let r = 0.1 + (0.5 - 0.1) * i as f64 / n as f64;
            for a in [[-1.0, 0.0], [1.0, 0.0]] {
                for nu in &dirs {
                    let pt = [a[0] + r * nu[0], a[1] + r * nu[1]];
                    let mut g = [0.0; 2];
                    pw.gradient(&pt, &mut g);
                    let v = g[0] * nu[0] + g[1] * nu[1];
                    running = running.min(v);
                    if i == 0 {
                        at_r = at_r.min(v);
                    }
                }
            }
        }
        assert!(g01 > 0.0);
        assert!(g01 <= at_r + 1e-12, "g(0.1)={g01} vs radial derivative {at_r}");
        assert!(g01 <= running + 1e-3 * running);
    }

    #[test]
    fn linear_f_from_exact_linear_g() {
        let r: Vec<f64> = (0..101).map(|i| i as f64 * 0.005).collect();
        let g: Vec<f64> = r.iter().map(|x| 4.0 * x).collect();
        let rb = build_f(&RadialBoundFn::from_g_table(r, g), FMode::Linear).unwrap();
        assert_relative_eq!(rb.linear_c2.unwrap(), 8.0, epsilon = 1e-12);
        assert_relative_eq!(rb.f_at(0.1), 0.8, epsilon = 1e-12);
        assert!(rb.admissibility_margin() >= 0.0);
    }

    #[test]
    fn degenerate_linear_mode_is_rejected() {
        let dw = DoubleWell::degenerate_well(vec![-1.0, 0.0], vec![1.0, 0.0]);
        let rb = compute_g(&dw, 512, 720).unwrap();
        assert!(matches!(build_f(&rb, FMode::Linear), Err(Error::DegenerateMinimum(_))));
        let env = build_f(&rb, FMode::Envelope).unwrap();
        assert!(env.admissibility_margin() >= 0.0);
        assert!(env.f.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn envelope_f_is_admissible() {
        let pw = DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]);
        let rb = build_f(&compute_g(&pw, 512, 720).unwrap(), FMode::Envelope).unwrap();
        assert_eq!(rb.f[0], 0.0);
        assert!(rb.f.windows(2).all(|w| w[1] > w[0]));
        for (i, &r) in rb.r.iter().enumerate() {
            assert!(rb.f[i] <= 2.0 * r * rb.g[i]);
        }
        let lin = build_f(&compute_g(&pw, 512, 720).unwrap(), FMode::Linear).unwrap();
        let c2 = lin.linear_c2.unwrap();
        assert!(c2 > 0.0);
        for (i, &r) in lin.r.iter().enumerate() {
            assert!(c2 * r * r <= 2.0 * r * lin.g[i]);
        }
        // Interpolated f agrees with the nodes.
        assert_eq!(rb.f_at(rb.r[100] * rb.r[100]), rb.f[100]);
    }

    #[test]
    fn hypothesis_checks() {
        let pw = DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]);
        assert!(check_hypotheses(&pw, 2000).all_pass());
        let shifted = pw.clone().with_offset(-0.1);
        let rep = check_hypotheses(&shifted, 2000);
        assert!(!rep.positivity.pass);
        let sq = DoubleWell::scalar_quartic().with_sup_radius(2.0);
        let rep = check_hypotheses(&sq, 2000);
        assert!(rep.dilation.pass && rep.positivity.pass && rep.radial_monotonicity.pass);
        // r0 past the local maximum at 0: W(1 − r) decreases for r > 1.
        let bad = DoubleWell::scalar_quartic().with_r0(1.2);
        assert!(!check_hypotheses(&bad, 2000).radial_monotonicity.pass);
    }
}
