//! One function per subcommand. Each writes its artifacts before reporting
//! a non-convergence or invariant failure.

use std::fs;
use std::path::Path;

use hetero_core::comparison::{decay_fit, iterate_tj, solve_phi, t_hat, DecayFit, PhiMethod, Slab, TjSequence};
use hetero_core::field::{field_csv, parse_field_csv};
use hetero_core::minimizer::{solve_standing_wave, DescentOptions, Side, SolveConfig};
use hetero_core::ode::{solve_heteroclinic_1d, OdeOptions};
use hetero_core::polar::{run_cutoff_suite, run_max_principle_suite, CutoffSuiteReport, MaxPrincipleSuiteReport};
use hetero_core::potential::{
    build_f, check_hypotheses, compute_g, default_sphere_count, min_eig_hess, HessianCheck, HypothesisReport,
};
use hetero_core::{DiscreteDomain, DoubleWell, Exec, Field, Potential, RadialBoundFn};
use serde::Serialize;

use crate::artifacts::{self, emit_artifacts, Artifact, Envelope};
use crate::config::{PhiSource, RunConfig};
use crate::error::CliError;

pub struct Run<'a> {
    pub config: &'a RunConfig,
    pub warnings: &'a [String],
    pub exec: Exec,
}

impl Run<'_> {
    fn envelope<'b, T: Serialize>(&'b self, body: &'b T) -> Envelope<'b, T> {
        Envelope {
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.config.subcommand.map_or("", |v| v.name()),
            seed: self.config.optimizer.seed,
            warnings: self.warnings,
            body,
        }
    }

    fn emit(&self, mut files: Vec<Artifact>) -> Result<(), CliError> {
        files.push(Artifact::text(artifacts::CONFIG_ECHO, self.config.echo() + "\n"));
        for path in emit_artifacts(&self.config.output_dir, &files)? {
            println!("{}", path.display());
        }
        Ok(())
    }

    fn domain(&self) -> Result<DiscreteDomain, CliError> {
        let c = self.config;
        Ok(DiscreteDomain::build(&c.strip_spec(), c.grid.h, c.grid.half_length)?)
    }

    fn solve_config(&self) -> SolveConfig {
        let c = self.config;
        let mut sc = SolveConfig::new(
            c.potential(),
            c.strip_spec(),
            c.grid.h,
            c.grid.half_length,
            c.constraint.n,
        );
        sc.opts = DescentOptions {
            tol: c.optimizer.tol,
            max_iter: c.optimizer.max_iter,
            max_backtracks: c.optimizer.max_backtracks,
        };
        sc.eps_disc = c.comparison.eps_disc;
        sc.comparison_slabs = c.comparison.slabs;
        sc.phi_tol = c.comparison.phi_tol;
        sc.f_mode = c.comparison.f_mode;
        sc.ode_reference = c.comparison.ode_reference;
        sc.exec = self.exec;
        sc
    }
}

pub fn solve(run: &Run) -> Result<(), CliError> {
    let d = run.domain()?;
    let (u, rep) = solve_standing_wave(&run.solve_config())?;
    run.emit(vec![
        Artifact::text(artifacts::SOLUTION, field_csv(&d, &u)),
        Artifact::json(artifacts::REPORT, &run.envelope(&rep)),
        Artifact::text(artifacts::ENERGY_TRACE, artifacts::energy_trace_csv(&rep.energy_trace)),
    ])?;
    eprintln!(
        "energy {:.10} residual {:.3e} iterations {} activity {}",
        rep.energy.total,
        rep.residual_sup,
        rep.iterations,
        rep.activity.total()
    );
    if !rep.converged {
        return Err(CliError::NonConvergence(format!(
            "projected residual {:.3e} after {} iterations",
            rep.projected_residual, rep.iterations
        )));
    }
    let failed: Vec<&str> = rep
        .invariants
        .iter()
        .filter(|f| !f.pass)
        .map(|f| f.name.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Invariant(failed.join(", ")));
    }
    Ok(())
}

#[derive(Serialize)]
struct OdeReport {
    m: usize,
    h: f64,
    half_length: f64,
    nodes: usize,
    energy: f64,
    equipartition_defect: f64,
    residual_sup: f64,
    iterations: usize,
    converged: bool,
    center: Option<f64>,
}

pub fn ode(run: &Run) -> Result<(), CliError> {
    let c = run.config;
    let p = c.potential();
    let opts = OdeOptions {
        h: c.ode.h,
        half_length: c.ode.half_length.unwrap_or(c.grid.half_length),
        tol: c.ode.tol,
        max_iter: c.ode.max_iter,
    };
    let sol = solve_heteroclinic_1d(&p, &opts)?;
    let report = OdeReport {
        m: sol.m,
        h: sol.h,
        half_length: opts.half_length,
        nodes: sol.s.len(),
        energy: sol.energy,
        equipartition_defect: sol.equipartition_defect,
        residual_sup: sol.residual_sup,
        iterations: sol.iterations,
        converged: sol.converged,
        center: sol.center(p.wells()).ok(),
    };
    run.emit(vec![
        Artifact::text(artifacts::ODE_PROFILE, sol.profile_csv()),
        Artifact::json(artifacts::ODE_REPORT, &run.envelope(&report)),
    ])?;
    eprintln!("energy {:.10} iterations {}", sol.energy, sol.iterations);
    if !sol.converged {
        return Err(CliError::NonConvergence(format!(
            "residual {:.3e} after {} iterations",
            sol.residual_sup, sol.iterations
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct PhiReport {
    center: f64,
    half_width: f64,
    cells: usize,
    t: f64,
    t_hat: f64,
    ratio: f64,
    /// `1/cosh(c·half_width)` for linear `f`, exact on flat slabs as `h → 0`.
    linear_reference_ratio: Option<f64>,
    method: PhiMethod,
    iterations: usize,
    residual: f64,
    min: f64,
    max: f64,
    within_bounds: bool,
    tj: TjSequence,
}

fn radial_bound(p: &DoubleWell, source: &PhiSource) -> Result<RadialBoundFn, CliError> {
    Ok(match *source {
        PhiSource::Linear { c } => RadialBoundFn::linear(c * c),
        PhiSource::Potential { mode } => build_f(&compute_g(p, 512, default_sphere_count(p.dim()))?, mode)?,
    })
}

pub fn phi(run: &Run) -> Result<(), CliError> {
    let c = run.config;
    let d = run.domain()?;
    let hw = c.phi.half_width.unwrap_or(c.strip.period);
    let slab = Slab::new(&d, c.phi.center, hw)?;
    let f = radial_bound(&c.potential(), &c.phi.f)?;
    let sol = solve_phi(&d, &slab, &f, c.phi.t, c.phi.tol)?;
    let th = t_hat(&d, &sol);
    let tj = iterate_tj(&d, &slab, &f, c.phi.t, c.phi.j_max, c.phi.tol)?;
    let report = PhiReport {
        center: slab.center,
        half_width: slab.half_width,
        cells: slab.len(),
        t: sol.t,
        t_hat: th,
        ratio: th / sol.t,
        linear_reference_ratio: match c.phi.f {
            PhiSource::Linear { c } => Some(1.0 / (c * hw).cosh()),
            PhiSource::Potential { .. } => None,
        },
        method: sol.method,
        iterations: sol.iterations,
        residual: sol.residual,
        min: sol.min,
        max: sol.max,
        within_bounds: sol.within_bounds(1e-9 * sol.t),
        tj,
    };
    let rows = slab.cells.clone().map(|cell| {
        let (i, j) = d.cell_ij(cell);
        let (s, y) = d.center(cell);
        (i, j, s, y, sol.value(cell))
    });
    run.emit(vec![
        Artifact::text(artifacts::PHI_FIELD, artifacts::scalar_csv(rows, "phi")),
        Artifact::json(artifacts::PHI_REPORT, &run.envelope(&report)),
    ])?;
    eprintln!("t_hat/t {:.6}", report.ratio);
    Ok(())
}

#[derive(Serialize)]
struct SideFit {
    fit: Option<DecayFit>,
    error: Option<String>,
}

#[derive(Serialize)]
struct DecayReport {
    source: String,
    minus: SideFit,
    plus: SideFit,
}

fn read_field(path: &Path, d: &DiscreteDomain, m: usize) -> Result<Field, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let rows = parse_field_csv(&text)?;
    let bad = |msg: String| CliError::Config(format!("at `--field` ({}): {msg}", path.display()));
    if rows.len() != d.num_cells() {
        return Err(bad(format!("{} rows, domain has {} cells", rows.len(), d.num_cells())));
    }
    let mut data = Vec::with_capacity(m * rows.len());
    for (cell, row) in rows.iter().enumerate() {
        if (row.i, row.j) != d.cell_ij(cell) || row.u.len() != m {
            return Err(bad(format!(
                "row {} does not match cell {cell} of the configured grid",
                cell + 1
            )));
        }
        data.extend_from_slice(&row.u);
    }
    Ok(Field::from_vec(m, data))
}

pub fn decay(run: &Run, field: Option<&Path>) -> Result<(), CliError> {
    let p = run.config.potential();
    let d = run.domain()?;
    let (u, source) = match field {
        Some(path) => (read_field(path, &d, p.dim())?, path.display().to_string()),
        None => (solve_standing_wave(&run.solve_config())?.0, "solve".to_string()),
    };
    let side = |s| match decay_fit(&d, &u, &p, s) {
        Ok(fit) => SideFit {
            fit: Some(fit),
            error: None,
        },
        Err(e) => SideFit {
            fit: None,
            error: Some(e.to_string()),
        },
    };
    let report = DecayReport {
        source,
        minus: side(Side::Minus),
        plus: side(Side::Plus),
    };
    run.emit(vec![Artifact::json(artifacts::DECAY, &run.envelope(&report))])?;
    for (name, s) in [("-", &report.minus), ("+", &report.plus)] {
        if let Some(f) = &s.fit {
            eprintln!("k0{name} {:.6} K0{name} {:.6}", f.k0, f.big_k0);
        }
    }
    let errors: Vec<String> = [&report.minus, &report.plus]
        .iter()
        .filter_map(|s| s.error.clone())
        .collect();
    if !errors.is_empty() {
        return Err(CliError::Invariant(errors.join("; ")));
    }
    Ok(())
}

#[derive(Serialize)]
struct CutoffReport {
    cutoff: CutoffSuiteReport,
    max_principle: Vec<MaxPrincipleSuiteReport>,
    pass: bool,
}

pub fn cutoff(run: &Run) -> Result<(), CliError> {
    let c = run.config;
    let p = c.potential();
    let seed = c.optimizer.seed;
    let cutoff = run_cutoff_suite(&p, c.cutoff.h, c.cutoff.r, c.cutoff.trials, seed, run.exec)?;
    let max_principle = c
        .cutoff
        .max_principle_h
        .iter()
        .enumerate()
        .filter(|_| c.cutoff.max_principle_trials > 0)
        .map(|(k, &h)| {
            run_max_principle_suite(
                &p,
                h,
                c.cutoff.r,
                c.cutoff.max_principle_trials,
                seed.wrapping_add(k as u64 + 1),
                run.exec,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pass = cutoff.all_pass() && max_principle.iter().all(|m| m.failures == 0);
    let report = CutoffReport {
        cutoff,
        max_principle,
        pass,
    };
    run.emit(vec![Artifact::json(artifacts::CUTOFF_REPORT, &run.envelope(&report))])?;
    if !pass {
        return Err(CliError::Invariant("cut-off or maximum-principle trials failed".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckReport {
    hypotheses: HypothesisReport,
    hessian_minus: HessianCheck,
    hessian_plus: HessianCheck,
    pass: bool,
}

pub fn check(run: &Run) -> Result<(), CliError> {
    let p = run.config.potential();
    let hypotheses = check_hypotheses(&p, run.config.check.samples);
    let w = p.wells();
    let report = CheckReport {
        pass: hypotheses.all_pass(),
        hessian_minus: min_eig_hess(&p, &w.a_minus),
        hessian_plus: min_eig_hess(&p, &w.a_plus),
        hypotheses,
    };
    run.emit(vec![Artifact::json(artifacts::HYPOTHESES, &run.envelope(&report))])?;
    if !report.pass {
        return Err(CliError::Invariant("hypothesis check failed".into()));
    }
    Ok(())
}
