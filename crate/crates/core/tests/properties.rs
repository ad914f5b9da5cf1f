//! Property-based invariants of the discretization and the cut-off tools.

use hetero_core::field::{energy, energy_delta, energy_with, field_csv, parse_field_csv, residual_with};
use hetero_core::linalg::dist;
use hetero_core::minimizer::{constraint_activity, project_constraints, ConstraintSpec};
use hetero_core::polar::{polar_decompose, radial_truncate};
use hetero_core::{DiscreteDomain, DoubleWell, Exec, Field, Potential, StripSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn product_well() -> DoubleWell {
    DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0])
}

fn domain(amplitude: f64) -> DiscreteDomain {
    let spec = if amplitude == 0.0 {
        StripSpec::flat(1.0, 0.0, 1.0)
    } else {
        StripSpec::sinusoidal(1.0, amplitude, 0.3)
    };
    DiscreteDomain::build(&spec, 1.0 / 8.0, 4.0).unwrap()
}

fn random_field(d: &DiscreteDomain, seed: u64, scale: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::from_fn(d, 2, |s, _, out| {
        out[0] = s.tanh() + scale * rng.gen_range(-1.0..1.0);
        out[1] = scale * rng.gen_range(-1.0..1.0);
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_is_nonnegative_and_split(seed in any::<u64>(), amp in 0.0f64..0.3) {
        let d = domain(amp);
        let u = random_field(&d, seed, 0.5);
        let e = energy(&d, &u, &product_well(), None);
        prop_assert!(e.dirichlet >= 0.0 && e.potential >= 0.0);
        prop_assert!((e.total - e.dirichlet - e.potential).abs() <= 1e-12 * e.total.max(1.0));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise(seed in any::<u64>(), amp in 0.0f64..0.3) {
        let d = domain(amp);
        let u = random_field(&d, seed, 0.5);
        let p = product_well();
        let a = energy_with(Exec::Sequential, &d, &u, &p, None);
        let b = energy_with(Exec::default(), &d, &u, &p, None);
        prop_assert_eq!(a.total.to_bits(), b.total.to_bits());
        let ra = residual_with(Exec::Sequential, &d, &u, &p);
        let rb = residual_with(Exec::default(), &d, &u, &p);
        prop_assert_eq!(ra.as_slice(), rb.as_slice());
    }

    #[test]
    fn window_energy_is_translation_invariant(seed in any::<u64>(), amp in 0.0f64..0.3, lo in -3i32..1) {
        let d = domain(amp);
        let p = product_well();
        let u = random_field(&d, seed, 0.3);
        let shifted = d.translate_field_by_period(&u, 1, p.wells());
        let (a, b) = (lo as f64, lo as f64 + 1.0);
        let before = energy(&d, &u, &p, Some((a, b))).total;
        let after = energy(&d, &shifted, &p, Some((a + 1.0, b + 1.0))).total;
        prop_assert_eq!(before.to_bits(), after.to_bits());
    }

    #[test]
    fn local_delta_matches_energy_difference(seed in any::<u64>(), amp in 0.0f64..0.3) {
        let d = domain(amp);
        let p = product_well();
        let u = random_field(&d, seed, 0.4);
        let v = random_field(&d, seed.wrapping_add(1), 0.4);
        let direct = energy(&d, &v, &p, None).total - energy(&d, &u, &p, None).total;
        let local = energy_delta(Exec::Sequential, &d, u.as_slice(), v.as_slice(), 2, &p);
        prop_assert!((direct - local).abs() <= 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn projection_lands_in_constraint_class(seed in any::<u64>()) {
        let d = domain(0.0);
        let p = product_well();
        let c = ConstraintSpec::new(1, 1.0, p.wells().r0);
        let u = random_field(&d, seed, 1.0);
        let v = project_constraints(&d, &u, &c, p.wells());
        for cell in 0..d.num_cells() {
            let (s, _) = d.center(cell);
            if let Some(side) = c.side(s) {
                prop_assert!(dist(v.cell(cell), side.well(p.wells())) <= c.radius());
            } else {
                prop_assert_eq!(v.cell(cell), u.cell(cell));
            }
        }
        let again = project_constraints(&d, &v, &c, p.wells());
        prop_assert_eq!(again.as_slice(), v.as_slice());
        let act = constraint_activity(&d, &v, &c, p.wells());
        prop_assert!(act.total() <= d.num_cells());
    }

    #[test]
    fn radial_truncation_traps_and_lowers_dirichlet(seed in any::<u64>(), r in 0.05f64..0.6) {
        let d = domain(0.2);
        let p = product_well();
        let a = p.wells().a_plus.clone();
        let u = random_field(&d, seed, 0.8);
        let t = radial_truncate(&u, &a, r);
        for cell in 0..d.num_cells() {
            prop_assert!(dist(t.cell(cell), &a) <= r);
        }
        let du = energy(&d, &u, &p, None).dirichlet;
        let dt = energy(&d, &t, &p, None).dirichlet;
        prop_assert!(dt <= du + 1e-12);
    }

    #[test]
    fn polar_decomposition_recomposes(seed in any::<u64>()) {
        let d = domain(0.1);
        let u = random_field(&d, seed, 0.7);
        let a = [1.0, 0.0];
        let pf = polar_decompose(&u, &a);
        let back = pf.recompose();
        prop_assert!(back.max_abs_diff(&u) <= 1e-14);
        for cell in 0..d.num_cells() {
            prop_assert!(pf.rho[cell] >= 0.0);
            if let Some(nu) = pf.nu(cell) {
                let n: f64 = nu.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!((n - 1.0).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn field_csv_round_trips(seed in any::<u64>()) {
        let d = domain(0.2);
        let u = random_field(&d, seed, 1.0);
        let rows = parse_field_csv(&field_csv(&d, &u)).unwrap();
        prop_assert_eq!(rows.len(), d.num_cells());
        for (cell, row) in rows.iter().enumerate() {
            prop_assert_eq!((row.i, row.j), d.cell_ij(cell));
            prop_assert_eq!(row.u.as_slice(), u.cell(cell));
        }
    }
}
