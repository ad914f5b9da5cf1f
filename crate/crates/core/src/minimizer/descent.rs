//! Projected Barzilai–Borwein descent with a monotone backtracking safeguard.

use serde::{Deserialize, Serialize};

/// A smooth objective over a closed convex set with a closed-form projection.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], g: &mut [f64]);
    /// `value(y) − value(x)`. Implementations may evaluate it from local
    /// differences so that tiny decreases are resolved near convergence.
    fn delta(&self, x: &[f64], y: &[f64]) -> f64 {
        self.value(y) - self.value(x)
    }
    fn project(&self, x: &mut [f64]);
    /// Safe step length, roughly the inverse Lipschitz constant of the
    /// gradient. Also used as the reference step of the stopping test.
    fn step_hint(&self) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescentOptions {
    /// Stop when `‖P(x − τg) − x‖∞ / τ ≤ tol` at the reference step `τ`.
    pub tol: f64,
    pub max_iter: usize,
    /// Halvings allowed per iteration before giving up.
    pub max_backtracks: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 20_000,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescentOutcome {
    pub iterations: usize,
    pub converged: bool,
    /// Stationarity measure at exit.
    pub projected_gradient: f64,
    /// Objective values, one per accepted iterate starting with `x₀`,
    /// accumulated from the accepted decreases.
    pub trace: Vec<f64>,
    /// Largest accepted decrease `F(x_{k+1}) − F(x_k)`; negative whenever
    /// at least one step was taken.
    pub max_delta: f64,
    pub backtracks: usize,
    /// True if backtracking failed to find a decrease.
    pub stalled: bool,
}

impl DescentOutcome {
    /// Every accepted step decreased the objective and the recorded trace
    /// never increases.
    pub fn monotone(&self) -> bool {
        (self.iterations == 0 || self.max_delta < 0.0) && self.trace.windows(2).all(|w| w[1] <= w[0])
    }
}

fn stationarity<O: Objective + ?Sized>(obj: &O, x: &[f64], g: &[f64], tau: f64, buf: &mut [f64]) -> f64 {
    for i in 0..x.len() {
        buf[i] = x[i] - tau * g[i];
    }
    obj.project(buf);
    buf.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / tau
}

/// Minimizes `obj` from `x` (projected first), overwriting `x` with the
/// final iterate. Every accepted step strictly decreases the objective.
pub fn projected_bb<O: Objective + ?Sized>(obj: &O, x: &mut [f64], opts: &DescentOptions) -> DescentOutcome {
    let n = x.len();
    obj.project(x);
    let tau = obj.step_hint();
    let (alpha_min, alpha_max) = (tau * 1e-6, tau * 1e6);
    let mut g = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut buf = vec![0.0; n];
    obj.gradient(x, &mut g);
    let mut f = obj.value(x);
    let mut trace = vec![f];
    let mut alpha = tau;
    let mut backtracks = 0;
    let mut iterations = 0;
    let mut stalled = false;
    let mut max_delta = f64::NEG_INFINITY;
    let mut pg = stationarity(obj, x, &g, tau, &mut buf);
    while pg > opts.tol && iterations < opts.max_iter {
        let mut tries = 0;
        let delta = loop {
            for i in 0..n {
                y[i] = x[i] - alpha * g[i];
            }
            obj.project(&mut y);
            let delta = obj.delta(x, &y);
            if delta < 0.0 {
                break Some(delta);
            }
            tries += 1;
            if tries > opts.max_backtracks {
                break None;
            }
            alpha *= 0.5;
        };
        backtracks += tries;
        let Some(delta) = delta else {
            stalled = true;
            break;
        };
        obj.gradient(&y, &mut g_new);
        let mut ss = 0.0;
        let mut sy = 0.0;
        let mut yy = 0.0;
        for i in 0..n {
            let s = y[i] - x[i];
            let d = g_new[i] - g[i];
            ss += s * s;
            sy += s * d;
            yy += d * d;
        }
        x.copy_from_slice(&y);
        std::mem::swap(&mut g, &mut g_new);
        max_delta = max_delta.max(delta);
        f += delta;
        trace.push(f);
        iterations += 1;
        // Alternate the two Barzilai–Borwein step lengths.
        alpha = if sy > 0.0 {
            if iterations % 2 == 0 {
                ss / sy
            } else {
                sy / yy
            }
        } else {
            alpha_max
        }
        .clamp(alpha_min, alpha_max);
        pg = stationarity(obj, x, &g, tau, &mut buf);
    }
    DescentOutcome {
        iterations,
        converged: pg <= opts.tol,
        projected_gradient: pg,
        trace,
        max_delta,
        backtracks,
        stalled,
    }
}
