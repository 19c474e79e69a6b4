//! Property tests of the invariants the engine relies on, through the
//! public API only.

use gcs_core::app::config::RunConfig;
use gcs_core::classical::{classical_energy, integrate_trajectory, v_class};
use gcs_core::diagnostics::hellinger_distance;
use gcs_core::gcs::displace_analytic;
use gcs_core::madelung::coherent_state_residuals;
use gcs_core::propagator::{lattice_norm, step, Scheme};
use gcs_core::{ClassicalPoint, ComplexField, Grid, PotentialModel, RealField, Tolerances};
use num_complex::Complex64;
use proptest::prelude::*;

fn morse() -> PotentialModel {
    PotentialModel::morse(1.0, 1.0, 1.0, 1.0).unwrap()
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::CrankNicolson), Just(Scheme::SplitStep)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn one_step_preserves_the_lattice_norm(
        scheme in scheme(),
        dt in 1e-4f64..0.05,
        v in prop::collection::vec(-5.0f64..5.0, 8),
        k in -3.0f64..3.0,
    ) {
        let grid = Grid::new(-10.0, 10.0, 256).unwrap();
        // smooth random potential from a few Fourier modes
        let pot = RealField::from_fn(grid, |x| {
            v.iter().enumerate().map(|(j, c)| c * ((j as f64 + 1.0) * 0.3 * x).sin()).sum()
        })
        .unwrap();
        let psi = ComplexField::new(
            grid,
            grid.points()
                .map(|x| Complex64::from_polar((-(x - 1.0) * (x - 1.0)).exp(), k * x))
                .collect(),
        )
        .unwrap();
        let before = lattice_norm(psi.values(), grid.dx());
        let out = step(&psi, &pot, 1.0, 1.0, dt, scheme).unwrap();
        let after = lattice_norm(out.values(), grid.dx());
        prop_assert!((after / before - 1.0).abs() < 1e-12, "{before} -> {after}");
    }

    #[test]
    fn hellinger_and_overlap_are_consistent(a in -3.0f64..3.0, b in -3.0f64..3.0, w in 0.5f64..2.0) {
        let grid = Grid::new(-20.0, 20.0, 1024).unwrap();
        let gauss = |c: f64, s: f64| RealField::from_fn(grid, move |x| {
            (-(x - c).powi(2) / (2.0 * s * s)).exp() / (2.0 * std::f64::consts::PI * s * s).sqrt()
        }).unwrap();
        let (p, q) = (gauss(a, 1.0), gauss(b, w));
        let h = hellinger_distance(&p, &q).unwrap();
        let h_rev = hellinger_distance(&q, &p).unwrap();
        prop_assert!((h - h_rev).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&h));
        // Bhattacharyya coefficient of two Gaussians in closed form
        let bc = (2.0 * w / (1.0 + w * w)).sqrt() * (-(a - b).powi(2) / (4.0 * (1.0 + w * w))).exp();
        prop_assert!((h * h - (1.0 - bc)).abs() < 1e-10, "{} vs {}", h * h, 1.0 - bc);
    }

    #[test]
    fn displaced_width_is_constant(q in -2.5f64..2.5, p in -3.0f64..3.0) {
        let model = morse();
        let tol = Tolerances::default();
        let grid = model.default_grid(2048, 3.0).unwrap();
        let s = displace_analytic(&model, &grid, ClassicalPoint::new(q, p, 0.0), &tol).unwrap();
        let rho = s.psi.density();
        let dx = grid.dx();
        let m1: f64 = grid.points().zip(rho.values()).map(|(x, r)| x * r).sum::<f64>() * dx;
        let m2: f64 = grid.points().zip(rho.values()).map(|(x, r)| x * x * r).sum::<f64>() * dx;
        let gamma = 0.577_215_664_901_532_9_f64;
        prop_assert!((m1 - (q + gamma + 2f64.ln())).abs() < 1e-9);
        let dq2 = std::f64::consts::PI.powi(2) / 6.0;
        prop_assert!(((m2 - m1 * m1) / dq2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_states_solve_the_madelung_equations(q in -3.0f64..3.0, p in -3.0f64..3.0) {
        let model = morse();
        let tol = Tolerances::default();
        let grid = model.default_grid(2048, 3.0).unwrap();
        let r = coherent_state_residuals(&model, &grid, ClassicalPoint::new(q, p, 0.0), &tol).unwrap();
        prop_assert!(r.hjm < 1e-5, "{r:?}");
        prop_assert!(r.continuity < 1e-6, "{r:?}");
    }

    #[test]
    fn morse_classical_potential_is_the_mirror_image(q in -5.0f64..5.0) {
        let model = morse();
        prop_assert_eq!(v_class(&model, q), model.potential(-q));
    }

    #[test]
    fn orbits_conserve_classical_energy(q0 in -0.5f64..0.3, p0 in -0.4f64..0.4) {
        let model = morse();
        let e0 = classical_energy(&model, q0, p0);
        prop_assume!(e0 < 0.4 * model.energy_scale());
        let orbit = integrate_trajectory(&model, q0, p0, 1e-3, 20_000).unwrap();
        let drift = orbit
            .energies(&model)
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max);
        prop_assert!(drift < 1e-9 * model.energy_scale(), "{drift:e}");
    }

    #[test]
    fn config_echo_round_trips(
        n in 16usize..4096,
        lo in -50.0f64..-1.0,
        hi in 1.0f64..50.0,
        q0 in -1.0f64..1.0,
        dt in 1e-5f64..1e-1,
        stride in 1usize..500,
    ) {
        let text = format!(
            "[model]\nkind = \"morse\"\na = 1.0\n\n[grid]\nx_min = {lo:?}\nx_max = {hi:?}\nn = {n}\n\n\
             [initial]\nQ0 = {q0:?}\nP0 = 0.0\n\n[propagation]\ndt = {dt:?}\nT = 1.0\nsnapshot_stride = {stride}\n"
        );
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        let echoed = cfg.to_toml().unwrap();
        let again = RunConfig::from_toml_str(&echoed).unwrap();
        prop_assert_eq!(again.to_toml().unwrap(), echoed);
        prop_assert_eq!(again.grid.n, n);
        prop_assert_eq!(again.propagation.dt, dt);
        prop_assert_eq!(again.initial.q0, q0);
    }
}
