//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use hetero_core::comparison::{iterate_tj, solve_phi, t_hat, Slab};
use hetero_core::field::{energy, residual};
use hetero_core::minimizer::{solve_standing_wave, SolveConfig, SolveReport};
use hetero_core::ode::{solve_heteroclinic_1d, OdeOptions};
use hetero_core::polar::{run_cutoff_suite, run_max_principle_suite, TrialKind};
use hetero_core::potential::RadialBoundFn;
use hetero_core::{DiscreteDomain, DoubleWell, Exec, Field, StripSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

struct Suite {
    outcomes: Vec<Outcome>,
}

impl Suite {
    fn record(&mut self, id: usize, name: &'static str, pass: bool, detail: String) {
        println!("{} [{id:>2}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.outcomes.push(Outcome { id, name, pass, detail });
    }
}

fn product_well() -> DoubleWell {
    DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0])
}

fn flat() -> StripSpec {
    StripSpec::flat(1.0, 0.0, 1.0)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn run_solve(potential: DoubleWell, strip: StripSpec, h: f64) -> (Field, SolveReport, Duration) {
    let cfg = SolveConfig::new(potential, strip, h, 8.0, 2);
    let (res, dt) = timed(|| solve_standing_wave(&cfg));
    let (u, rep) = res.expect("standing-wave solve failed");
    (u, rep, dt)
}

fn wave_summary(rep: &SolveReport) -> String {
    format!(
        "iters={} residual={:.3e} activity={} energy={:.6}",
        rep.iterations,
        rep.residual_sup,
        rep.activity.total(),
        rep.energy.total
    )
}

fn heteroclinic_oracles(suite: &mut Suite) {
    let cases = [
        ("scalar_quartic", DoubleWell::scalar_quartic(), 2.0 * 2f64.sqrt() / 3.0),
        ("product_well", product_well(), 4.0 * 2f64.sqrt() / 3.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p, exact) in cases {
        let (sol, dt) = timed(|| solve_heteroclinic_1d(&p, &OdeOptions::default()));
        let sol = sol.expect("1D solve failed");
        let rel = (sol.energy - exact).abs() / exact;
        pass &= sol.converged && rel <= 5e-3 && dt < Duration::from_secs(5);
        parts.push(format!(
            "{name} E={:.6} rel={rel:.2e} t={:.2}s",
            sol.energy,
            dt.as_secs_f64()
        ));
    }
    suite.record(1, "heteroclinic oracle energies", pass, parts.join("; "));
}

fn flat_wave(suite: &mut Suite, rep: &SolveReport, dt: Duration) {
    let margin_ok = rep.constraint_inactive && rep.activity.total() == 0;
    let dev = rep.ode_comparison.as_ref().map(|c| c.deviation);
    let pass = rep.converged
        && margin_ok
        && rep.residual_sup <= 1e-5
        && dev.is_some_and(|x| x <= 2e-2)
        && dt < Duration::from_secs(120);
    suite.record(
        2,
        "flat-cylinder standing wave",
        pass,
        format!(
            "{} ode_dev={} t={:.1}s",
            wave_summary(rep),
            dev.map_or("n/a".into(), |x| format!("{x:.3e}")),
            dt.as_secs_f64()
        ),
    );
}

fn sinusoidal_wave(suite: &mut Suite, rep: &SolveReport, dt: Duration) {
    let pass = rep.converged
        && rep.constraint_inactive
        && rep.activity.total() == 0
        && rep.residual_sup <= 1e-5
        && dt < Duration::from_secs(300);
    suite.record(
        3,
        "sinusoidal strip standing wave",
        pass,
        format!(
            "{} y_variation={:.3e} t={:.1}s",
            wave_summary(rep),
            rep.y_variation,
            dt.as_secs_f64()
        ),
    );
}

fn decay(suite: &mut Suite, scalar: &SolveReport, product: &SolveReport) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, rep, expected, tol) in [
        ("scalar_quartic", scalar, 2f64.sqrt(), 0.10),
        ("product_well", product, 2.0 * 2f64.sqrt(), 0.15),
    ] {
        for (side, summary) in [("-", &rep.decay_minus), ("+", &rep.decay_plus)] {
            match &summary.fit {
                Some(fit) => {
                    let rel = (fit.k0 - expected).abs() / expected;
                    pass &= rel <= tol;
                    parts.push(format!("{name}{side} k0={:.4} rel={rel:.3}", fit.k0));
                }
                None => {
                    pass = false;
                    parts.push(format!("{name}{side} error={:?}", summary.error));
                }
            }
        }
    }
    suite.record(4, "exponential decay rate", pass, parts.join("; "));
}

fn cutoff(suite: &mut Suite) {
    let (rep, dt) = timed(|| run_cutoff_suite(&product_well(), 1.0 / 16.0, 0.2, 200, 0xC07, Exec::default()));
    let rep = rep.expect("cut-off suite failed");
    let branches: Vec<_> = rep
        .summaries
        .iter()
        .filter(|s| matches!(s.kind, TrialKind::Step1 | TrialKind::Step2))
        .collect();
    let pass = rep.all_pass()
        && branches.len() == 2
        && branches.iter().all(|s| s.trials == 200)
        && rep.summaries.iter().all(|s| s.max_ball_excess <= 0.0)
        && dt < Duration::from_secs(60);
    let parts: Vec<String> = rep
        .summaries
        .iter()
        .map(|s| {
            format!(
                "{:?} {}/{} min_drop={}",
                s.kind,
                s.passed,
                s.trials,
                s.min_energy_drop.map_or("n/a".into(), |x| format!("{x:.2e}"))
            )
        })
        .collect();
    suite.record(
        5,
        "cut-off replacement properties",
        pass,
        format!("{} t={:.1}s", parts.join("; "), dt.as_secs_f64()),
    );
}

fn max_principle(suite: &mut Suite) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, h) in [1.0 / 16.0, 1.0 / 32.0].into_iter().enumerate() {
        let rep = run_max_principle_suite(&product_well(), h, 0.2, 50, 0x3A7 + k as u64, Exec::default())
            .expect("maximum-principle suite failed");
        pass &= rep.trials == 50 && rep.failures == 0;
        parts.push(format!(
            "h=1/{} failures={} worst={:.4} bound={:.4}",
            (1.0 / h).round(),
            rep.failures,
            rep.worst_sup_dist,
            0.2 + rep.tol
        ));
    }
    suite.record(6, "maximum principle", pass, parts.join("; "));
}

fn contraction(suite: &mut Suite) {
    let d = DiscreteDomain::build(&flat(), 1.0 / 32.0, 2.0).expect("domain");
    let slab = Slab::new(&d, 0.0, 1.0).expect("slab");
    let f = RadialBoundFn::linear(1.0);
    let theta = 1.0 / 1f64.cosh();
    let sol = solve_phi(&d, &slab, &f, 1.0, 1e-12).expect("phi");
    let ratio = t_hat(&d, &sol);
    let seq = iterate_tj(&d, &slab, &f, 1.0, 4, 1e-12).expect("t_j");
    let seq_dev = seq
        .t
        .iter()
        .enumerate()
        .map(|(j, &t)| (t - theta.powi(j as i32)).abs())
        .fold(0.0, f64::max);
    let pass = (ratio - theta).abs() <= 1e-3 && seq.t.len() == 5 && seq_dev <= 1e-3;
    suite.record(
        7,
        "comparison contraction",
        pass,
        format!(
            "t_hat/t={ratio:.5} target={theta:.5} t_j=[{}] max_dev={seq_dev:.2e}",
            seq.t.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
        ),
    );
}

fn slab_comparison(suite: &mut Suite, waves: &[(&str, &SolveReport)]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, rep) in waves {
        match &rep.comparison.report {
            Some(c) => {
                let ks_ok = (1..=3).all(|k| c.slabs.iter().filter(|s| s.k == k && s.pass).count() == 2);
                let worst = c
                    .slabs
                    .iter()
                    .map(|s| s.worst_violation)
                    .fold(f64::NEG_INFINITY, f64::max);
                pass &= rep.converged && ks_ok && c.tj.strictly_decreasing;
                let rates: Vec<String> = rep
                    .contraction
                    .iter()
                    .map(|r| format!("{:.3}/{:.3}", r.fit_rate, r.tj_rate))
                    .collect();
                parts.push(format!(
                    "{name} slabs_ok={ks_ok} worst={worst:.2e} t_j_decreasing={} 2k0/t_j_rate=[{}]",
                    c.tj.strictly_decreasing,
                    rates.join(" ")
                ));
            }
            None => {
                pass = false;
                parts.push(format!("{name} error={:?}", rep.comparison.error));
            }
        }
    }
    suite.record(8, "slab comparison", pass, parts.join("; "));
}

fn transition_count(suite: &mut Suite, waves: &[(&str, &SolveReport)]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, rep) in waves.iter().filter(|(_, r)| r.converged) {
        let s = &rep.sections;
        let ok = s.w0_estimate.is_some_and(|w| w > 0.0) && s.z_within_bound && s.z <= 2;
        pass &= ok;
        parts.push(format!(
            "{name} Z={} bound={}",
            s.z,
            s.bound.map_or("n/a".into(), |b| format!("{b:.2}"))
        ));
    }
    pass &= !parts.is_empty();
    suite.record(9, "transition count", pass, parts.join("; "));
}

fn gradient_agreement() -> (bool, f64) {
    let d = DiscreteDomain::build(&StripSpec::sinusoidal(1.0, 0.2, 0.0), 1.0 / 16.0, 2.0).expect("domain");
    let p = product_well();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0);
    let u = Field::from_fn(&d, 2, |s, y, out| {
        out[0] = (1.3 * s).tanh() + 0.1 * rng.gen_range(-1.0..1.0);
        out[1] = 0.3 * (3.0 * y).sin() * (-s * s).exp() + 0.1 * rng.gen_range(-1.0..1.0);
    });
    let h2 = d.h * d.h;
    let grad: Vec<f64> = residual(&d, &u, &p).as_slice().iter().map(|r| -h2 * r).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let dir: Vec<f64> = (0..grad.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let eps = 1e-5;
        let shifted = |sign: f64| {
            let data = u.as_slice().iter().zip(&dir).map(|(x, v)| x + sign * eps * v).collect();
            energy(&d, &Field::from_vec(2, data), &p, None).total
        };
        let fd = (shifted(1.0) - shifted(-1.0)) / (2.0 * eps);
        let exact: f64 = grad.iter().zip(&dir).map(|(g, v)| g * v).sum();
        worst = worst.max((fd - exact).abs() / exact.abs().max(1e-12));
    }
    (worst <= 1e-6, worst)
}

fn hygiene(suite: &mut Suite, waves: &[(&str, &SolveReport)]) {
    let (grad_ok, grad_err) = gradient_agreement();
    let monotone = waves.iter().all(|(_, r)| r.trace_monotone);

    let cfg = SolveConfig::new(DoubleWell::scalar_quartic(), flat(), 1.0 / 16.0, 8.0, 2);
    let (u1, r1) = solve_standing_wave(&cfg).expect("solve");
    let (u2, r2) = solve_standing_wave(&cfg).expect("solve");
    let seq_cfg = SolveConfig {
        exec: Exec::Sequential,
        ..cfg.clone()
    };
    let (u3, _) = solve_standing_wave(&seq_cfg).expect("solve");
    let same_solve = u1.as_slice() == u2.as_slice()
        && u1.as_slice() == u3.as_slice()
        && serde_json::to_string(&r1).ok() == serde_json::to_string(&r2).ok();
    let cut = |seed| {
        serde_json::to_string(
            &run_cutoff_suite(&product_well(), 1.0 / 16.0, 0.2, 10, seed, Exec::default()).expect("suite"),
        )
        .expect("json")
    };
    let same_suite = cut(9) == cut(9);
    let small_monotone = r1.trace_monotone && r2.trace_monotone;

    let pass = grad_ok && monotone && small_monotone && same_solve && same_suite;
    suite.record(
        10,
        "numerical hygiene",
        pass,
        format!(
            "grad_rel_err={grad_err:.2e} traces_monotone={} repeat_identical={} seeded_suite_identical={same_suite}",
            monotone && small_monotone,
            same_solve
        ),
    );
}

fn main() {
    let mut suite = Suite { outcomes: Vec::new() };
    let total = Instant::now();

    heteroclinic_oracles(&mut suite);

    let (_, scalar, dt_scalar) = run_solve(DoubleWell::scalar_quartic(), flat(), 1.0 / 32.0);
    flat_wave(&mut suite, &scalar, dt_scalar);

    let (_, sinus, dt_sinus) = run_solve(
        DoubleWell::scalar_quartic(),
        StripSpec::sinusoidal(1.0, 0.2, 0.0),
        1.0 / 32.0,
    );
    sinusoidal_wave(&mut suite, &sinus, dt_sinus);

    let (_, product, _) = run_solve(product_well(), flat(), 1.0 / 32.0);
    decay(&mut suite, &scalar, &product);

    cutoff(&mut suite);
    max_principle(&mut suite);
    contraction(&mut suite);

    let flat_waves = [("scalar_quartic", &scalar), ("product_well", &product)];
    slab_comparison(&mut suite, &flat_waves);

    let all_waves = [
        ("scalar_quartic", &scalar),
        ("sinusoidal", &sinus),
        ("product_well", &product),
    ];
    transition_count(&mut suite, &all_waves);
    hygiene(&mut suite, &all_waves);

    let failed: Vec<_> = suite.outcomes.iter().filter(|o| !o.pass).collect();
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        suite.outcomes.len() - failed.len(),
        suite.outcomes.len(),
        total.elapsed().as_secs_f64()
    );
    for o in &failed {
        eprintln!("failed [{}] {}: {}", o.id, o.name, o.detail);
    }
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
