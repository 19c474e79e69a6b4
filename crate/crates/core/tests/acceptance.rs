//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails other than those listed in `KNOWN_RED`.
//!
//! Run alone with `cargo test --release --test acceptance`.

use gcs_core::classical::{
    classical_period, linear_coefficient, linear_coefficient_numeric, point_at_energy, v_class,
    v_class_profile,
};
use gcs_core::diagnostics::{hellinger_distance, DiagnosticsRecord};
use gcs_core::gcs::displace_analytic;
use gcs_core::madelung::{coherent_state_residuals, numeric_curvature_term};
use gcs_core::propagator::{evolve_feedback, evolve_static, Evolution, Frame, Mode, PropagatorConfig, Scheme};
use gcs_core::{ClassicalPoint, Grid, PotentialModel, RealField, Result, Tolerances};
use rand::{rngs::StdRng, Rng, SeedableRng};
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

/// Criteria expected to fail as literally stated. Each still prints FAIL.
/// 6: `∂ₓV` evaluated at `x = <q>` carries the well slope at the ground-state
/// mean, `2aU₀(e^{-a<q>₀} - e^{-2a<q>₀}) ≈ 0.404 U₀a`, for any asymmetric
/// well; the expectation form `<∂ₓV>` holds.
const KNOWN_RED: &[&str] = &["6"];

const ENERGY_FRACTION: f64 = 0.2;
const STEPS_PER_PERIOD: f64 = 1e4;
const N_FEEDBACK: usize = 2048;
const Q_EXTENT: f64 = 0.6;

/// Accepted window for an error ratio under `dt -> dt/2` in a second-order
/// scheme.
const RATIO_WINDOW: (f64, f64) = (3.0, 5.0);

struct Outcome {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Suite {
    outcomes: Vec<Outcome>,
}

impl Suite {
    fn check(&mut self, id: &'static str, name: &'static str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} {id:<3} {name}: {detail}");
        self.outcomes.push(Outcome { id, name, pass, detail });
    }

    fn error(&mut self, id: &'static str, name: &'static str, e: impl std::fmt::Display) {
        self.check(id, name, false, format!("error: {e}"));
    }
}

fn unit_morse() -> PotentialModel {
    PotentialModel::morse(1.0, 1.0, 1.0, 1.0).unwrap()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn bhattacharyya(a: &RealField, b: &RealField) -> f64 {
    let dx = a.grid().dx();
    a.values().iter().zip(b.values()).map(|(x, y)| (x * y).sqrt()).sum::<f64>() * dx
}

/// Morse density of the displaced ground state, written out independently
/// of the library: `ρ₀(ξ) = 2 exp(-2e^{-ξ} - ξ)` for `a = λ = 1`.
fn morse_density(xi: f64) -> f64 {
    2.0 * (-2.0 * (-xi).exp() - xi).exp()
}

fn gaussian_density(x: f64, centre: f64, var: f64) -> f64 {
    (-(x - centre).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

// ---------------------------------------------------------------- 1

fn criterion_1(s: &mut Suite) -> Result<()> {
    let model = unit_morse();
    let tol = Tolerances::default();
    let dq = model.ground_width();
    let grid = model.default_grid(4096, 5.0 * dq)?;
    let mut rng = StdRng::seed_from_u64(0x6c5);
    let mut worst_hjm: f64 = 0.0;
    let mut worst_cont: f64 = 0.0;
    for _ in 0..20 {
        let q = rng.gen_range(-5.0..=5.0) * dq;
        let p = rng.gen_range(-5.0..=5.0) * model.hbar() / dq;
        let r = coherent_state_residuals(&model, &grid, ClassicalPoint::new(q, p, 0.0), &tol)?;
        worst_hjm = worst_hjm.max(r.hjm);
        worst_cont = worst_cont.max(r.continuity);
    }
    s.check(
        "1a",
        "Hamilton-Jacobi-Madelung residual, 20 points",
        worst_hjm < 1e-5,
        format!("max {worst_hjm:.3e} (limit 1e-5)"),
    );
    s.check(
        "1b",
        "continuity residual, 20 points",
        worst_cont < 1e-6,
        format!("max {worst_cont:.3e} (limit 1e-6)"),
    );
    Ok(())
}

// ---------------------------------------------------------------- 2

fn curvature_deviation(model: &PotentialModel, grid: &Grid, exact: impl Fn(f64) -> f64) -> Result<f64> {
    let tol = Tolerances::default();
    let c = numeric_curvature_term(model, grid, 0.0, &tol)?;
    let psi = model.ground_state(grid, &tol)?;
    let peak = max_of(psi.values().iter().map(|v| v * v));
    let mut worst: f64 = 0.0;
    for (i, x) in grid.points().enumerate() {
        if psi.values()[i].powi(2) > 1e-8 * peak {
            worst = worst.max((c.values.values()[i] - exact(x)).abs());
        }
    }
    Ok(worst)
}

fn criterion_2(s: &mut Suite) -> Result<()> {
    let morse = unit_morse();
    let u0 = 0.5;
    let e_unit = 0.5;
    let grid = morse.default_grid(N_FEEDBACK, 0.0)?;
    let dev = curvature_deviation(&morse, &grid, |x| u0 * (1.0 - (-x).exp()).powi(2) - 0.75 * e_unit)? / u0;
    s.check(
        "2a",
        "Morse curvature identity",
        dev < 1e-5,
        format!("max {dev:.3e} U0 (limit 1e-5)"),
    );

    let harmonic = PotentialModel::harmonic(1.0, 1.0, 1.0)?;
    let grid = harmonic.default_grid(1024, 0.0)?;
    let dev = curvature_deviation(&harmonic, &grid, |x| 0.5 * x * x - 0.5)?;
    s.check(
        "2b",
        "harmonic curvature identity",
        dev < 1e-6,
        format!("max {dev:.3e} hbar*omega (limit 1e-6)"),
    );
    Ok(())
}

// ---------------------------------------------------------------- 3

fn criterion_3(s: &mut Suite) -> Result<()> {
    let model = unit_morse();
    let dq = model.ground_width();
    let grid = model.default_grid(N_FEEDBACK, 3.0 * dq)?;

    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let q = -3.0 * dq + 6.0 * dq * k as f64 / 9.0;
        // centre accelerations spread over a range of the natural force unit
        let dpdt = 0.1 * k as f64 * 0.5;
        let point = ClassicalPoint::new(q, 0.3, 0.0);
        let analytic = -dpdt + 2.0 * 0.5 * ((q).exp() - (2.0 * q).exp());
        let numeric = linear_coefficient_numeric(&model, &grid, point, dpdt)?;
        assert!((linear_coefficient(&model, q, dpdt) - analytic).abs() <= 1e-12 * analytic.abs().max(1.0));
        worst = worst.max((numeric - analytic).abs() / analytic.abs());
    }
    s.check(
        "3a",
        "linear coefficient, analytic vs fit, 10 Q",
        worst < 1e-6,
        format!("max relative {worst:.3e} (limit 1e-6)"),
    );

    let profile = v_class_profile(&model, &grid, 3.0 * dq, 60)?;
    let worst = max_of(profile.iter().filter(|(q, _)| *q != 0.0).map(|&(q, v)| {
        let exact = 0.5 * (1.0 - q.exp()).powi(2);
        (v - exact).abs() / exact
    }));
    s.check(
        "3b",
        "V_class reconstruction over |Q| <= 3dq",
        worst < 1e-5,
        format!("max relative {worst:.3e} over {} points (limit 1e-5)", profile.len() - 1),
    );

    let worst = max_of((-300..=300).map(|k| {
        let q = k as f64 * 0.01;
        (v_class(&model, q) - model.potential(-q)).abs()
    }));
    s.check(
        "3c",
        "mirror identity V_class(Q) = V(-Q)",
        worst == 0.0,
        format!("max |difference| {worst:.3e} over 601 points (limit: formula round-off)"),
    );
    Ok(())
}

// ---------------------------------------------------------------- 4, 5, 6, 9

struct MorseRun {
    evolution: Evolution,
    /// Hellinger distance to the exact coherent state at `Q(t)`, per step.
    hellinger: Vec<f64>,
    /// Bhattacharyya overlap with the exact coherent state at `Q(t)`.
    exact_overlap: Vec<f64>,
}

struct MorseSetup {
    model: PotentialModel,
    grid: Grid,
    start: ClassicalPoint,
    period: f64,
}

fn morse_setup(model: PotentialModel) -> Result<MorseSetup> {
    let energy = ENERGY_FRACTION * model.energy_scale();
    let period = classical_period(&model, energy)?;
    let start = point_at_energy(&model, energy)?;
    let grid = model.default_grid(N_FEEDBACK, Q_EXTENT)?;
    Ok(MorseSetup { model, grid, start, period })
}

fn feedback_run(setup: &MorseSetup, dt: f64) -> Result<MorseRun> {
    let tol = Tolerances::default();
    let cfg = PropagatorConfig::new(dt, Scheme::CrankNicolson, Mode::Feedback, 1)?;
    let a = match setup.model.kind() {
        gcs_core::model::ModelKind::Morse { a, .. } => a,
        _ => unreachable!(),
    };
    let mut hellinger = Vec::new();
    let mut exact_overlap = Vec::new();
    let mut sink = |f: Frame| {
        let q = f.point.expect("feedback frames carry the label").q;
        // the ground density scales as a·ρ₀(aξ) for general a
        let exact = RealField::from_fn(setup.grid, |x| a * morse_density(a * (x - q)))?;
        let rho = f.psi.density();
        hellinger.push(hellinger_distance(&rho, &exact)?);
        exact_overlap.push(bhattacharyya(&rho, &exact));
        Ok(())
    };
    let evolution = evolve_feedback(&setup.model, &setup.grid, setup.start, &cfg, setup.period, &tol, &mut sink)?;
    Ok(MorseRun {
        evolution,
        hellinger,
        exact_overlap,
    })
}

fn dq2_drift(records: &[DiagnosticsRecord]) -> f64 {
    let exact = PI * PI / 6.0;
    max_of(records.iter().map(|r| (r.dq2 / exact - 1.0).abs()))
}

fn criterion_4(s: &mut Suite, setup: &MorseSetup, coarse: &MorseRun) -> Result<()> {
    let dt = setup.period / STEPS_PER_PERIOD;
    let fine = feedback_run(setup, 0.5 * dt)?;

    let min_overlap = coarse.evolution.records.iter().map(|r| r.overlap).fold(f64::INFINITY, f64::min);
    let min_exact = coarse.exact_overlap.iter().cloned().fold(f64::INFINITY, f64::min);
    s.check(
        "4a",
        "non-spreading: Bhattacharyya overlap at every step",
        min_overlap >= 1.0 - 1e-4 && min_exact >= 1.0 - 1e-4,
        format!(
            "min vs ground shape at <q>: 1 - {:.3e}; min vs exact state at Q(t): 1 - {:.3e} (limit 1 - 1e-4)",
            1.0 - min_overlap,
            1.0 - min_exact
        ),
    );

    let drift = dq2_drift(&coarse.evolution.records);
    s.check(
        "4b",
        "non-spreading: dq2 relative drift",
        drift < 1e-4,
        format!("max {drift:.3e} (limit 1e-4)"),
    );

    // 1 - overlap sits at round-off, so the shape error is measured by the
    // Hellinger distance to the exact state, which is linear in the error
    let h_coarse = max_of(coarse.hellinger.iter().cloned());
    let h_fine = max_of(fine.hellinger.iter().cloned());
    let d_fine = dq2_drift(&fine.evolution.records);
    let r_h = h_coarse / h_fine;
    let r_d = drift / d_fine;
    let within = |r: f64| (RATIO_WINDOW.0..=RATIO_WINDOW.1).contains(&r);
    s.check(
        "4c",
        "second-order convergence when dt halves",
        within(r_h) && within(r_d),
        format!(
            "Hellinger {h_coarse:.3e} -> {h_fine:.3e} (ratio {r_h:.2}), dq2 drift {drift:.3e} -> {d_fine:.3e} (ratio {r_d:.2}); window [{}, {}]",
            RATIO_WINDOW.0, RATIO_WINDOW.1
        ),
    );
    Ok(())
}

fn criterion_5(s: &mut Suite, setup: &MorseSetup, feedback: &MorseRun) -> Result<()> {
    // the unbound part of the free packet runs off to the right: widen the
    // grid at the same spacing and accept more edge mass
    let tol = Tolerances {
        boundary_mass: 1e-6,
        ..Tolerances::default()
    };
    let dx = setup.grid.dx();
    let grid = Grid::new(setup.grid.x_min(), setup.grid.x_min() + 4095.0 * dx, 4096)?;
    let dt = setup.period / STEPS_PER_PERIOD;
    let cfg = PropagatorConfig::new(dt, Scheme::CrankNicolson, Mode::Static, usize::MAX)?;
    let state0 = displace_analytic(&setup.model, &grid, setup.start, &tol)?;
    let fixed = evolve_static(&state0, &cfg, 3.0 * setup.period, &tol, &mut |_| Ok(()))?;

    let fb_worst = max_of(feedback.evolution.records.iter().map(|r| 1.0 - r.overlap));
    let st_worst = max_of(fixed.records.iter().map(|r| 1.0 - r.overlap));
    let crossing = fixed
        .records
        .iter()
        .find(|r| 1.0 - r.overlap > 10.0 * fb_worst)
        .map(|r| r.t / setup.period);
    s.check(
        "5",
        "static twin degrades more than 10x the feedback run",
        st_worst > 10.0 * fb_worst,
        format!(
            "static max 1 - B = {st_worst:.3e}, feedback max 1 - B = {fb_worst:.3e} (ratio {:.2e}); threshold first crossed at {} periods",
            st_worst / fb_worst.max(f64::MIN_POSITIVE),
            crossing.map_or("never".to_string(), |c| format!("{c:.4}"))
        ),
    );
    Ok(())
}

fn criterion_6(s: &mut Suite, setup: &MorseSetup, feedback: &MorseRun) {
    let unit = setup.model.force_scale();
    let literal = max_of(feedback.evolution.records.iter().map(|r| r.center_gradient_residual / unit));
    s.check(
        "6",
        "dP/dt + dV/dx at x = <q>",
        literal < 1e-5,
        format!("max {literal:.4e} U0*a (limit 1e-5)"),
    );
    // supplementary, not a substitute for 6
    let expectation = max_of(feedback.evolution.records.iter().map(|r| r.ehrenfest_residual / unit));
    s.check(
        "6x",
        "supplementary: dP/dt + <dV/dx>",
        expectation < 1e-5,
        format!("max {expectation:.3e} U0*a (limit 1e-5)"),
    );
}

fn dimensionless(setup: &MorseSetup, run: &MorseRun) -> Result<Vec<f64>> {
    let tol = Tolerances::default();
    let m = &setup.model;
    let fs = m.force_scale();
    let records = &run.evolution.records;
    let d0 = m.ground_width().powi(2);
    let mut out = vec![
        max_of(records.iter().map(|r| 1.0 - r.overlap)),
        max_of(run.exact_overlap.iter().map(|b| 1.0 - b)),
        max_of(run.hellinger.iter().cloned()),
        max_of(records.iter().map(|r| (r.dq2 / d0 - 1.0).abs())),
        max_of(records.iter().map(|r| r.ehrenfest_residual / fs)),
        max_of(records.iter().map(|r| r.center_gradient_residual / fs)),
        max_of(records.iter().map(|r| r.hjm_residual)),
    ];
    let dq = m.ground_width();
    for (sq, sp) in [(0.5, 0.0), (-1.0, 1.0), (2.0, -1.5)] {
        let point = ClassicalPoint::new(sq * dq, sp * m.hbar() / dq, 0.0);
        let r = coherent_state_residuals(m, &setup.grid, point, &tol)?;
        out.push(r.hjm);
        out.push(r.continuity);
    }
    Ok(out)
}

fn criterion_9(s: &mut Suite, base: &MorseSetup, base_run: &MorseRun) -> Result<()> {
    let doubled = morse_setup(PotentialModel::morse(2.0, 1.0, 1.0, 2.0)?)?;
    let run = feedback_run(&doubled, doubled.period / STEPS_PER_PERIOD)?;
    let a = dimensionless(base, base_run)?;
    let b = dimensionless(&doubled, &run)?;
    let worst = max_of(a.iter().zip(&b).map(|(x, y)| (x - y).abs()));
    s.check(
        "9",
        "doubling hbar and m leaves dimensionless diagnostics unchanged",
        worst < 1e-8,
        format!("max |difference| {worst:.3e} over {} diagnostics (limit 1e-8)", a.len()),
    );
    Ok(())
}

// ---------------------------------------------------------------- 7

fn criterion_7(s: &mut Suite) -> Result<()> {
    let model = unit_morse();
    let tol = Tolerances::default();
    let grid = model.default_grid(N_FEEDBACK, Q_EXTENT)?;
    let period = 2.0 * PI / model.natural_frequency();
    let cfg = PropagatorConfig::new(period / STEPS_PER_PERIOD, Scheme::CrankNicolson, Mode::Feedback, 10)?;
    let rho0 = RealField::from_fn(grid, morse_density)?;
    let peak = max_of(rho0.values().iter().cloned());
    let mut worst_overlap: f64 = 0.0;
    let mut worst_profile: f64 = 0.0;
    let mut sink = |f: Frame| {
        worst_overlap = worst_overlap.max(1.0 - bhattacharyya(&f.psi.density(), &rho0));
        let diff: Vec<f64> = grid
            .points()
            .enumerate()
            .filter(|&(i, _)| rho0.values()[i] > 1e-8 * peak)
            .map(|(i, x)| f.potential.values()[i] - 0.5 * (1.0 - (-x).exp()).powi(2))
            .collect();
        let (lo, hi) = diff.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &d| (l.min(d), h.max(d)));
        worst_profile = worst_profile.max(0.5 * (hi - lo) / 0.5);
        Ok(())
    };
    evolve_feedback(&model, &grid, ClassicalPoint::origin(), &cfg, period, &tol, &mut sink)?;
    s.check(
        "7a",
        "rest state: density frozen",
        worst_overlap < 1e-8,
        format!("max 1 - B(rho(t), rho(0)) = {worst_overlap:.3e} (limit 1e-8)"),
    );
    s.check(
        "7b",
        "rest state: potential is the Morse well plus a constant",
        worst_profile < 1e-8,
        format!("max half-spread of V - V_morse where rho > 1e-8 peak: {worst_profile:.3e} U0 (limit 1e-8)"),
    );
    Ok(())
}

// ---------------------------------------------------------------- 8

fn criterion_8(s: &mut Suite) -> Result<()> {
    let model = PotentialModel::harmonic(1.0, 1.0, 1.0)?;
    let tol = Tolerances::default();
    let q0 = 1.0;
    let grid = model.default_grid(1024, q0)?;
    let period = 2.0 * PI;
    let cfg = PropagatorConfig::new(period / STEPS_PER_PERIOD, Scheme::CrankNicolson, Mode::Feedback, 10)?;
    let start = ClassicalPoint::new(q0, 0.0, 0.0);

    let mut glauber: f64 = 0.0;
    let mut fb_frames = Vec::new();
    let mut sink = |f: Frame| {
        let t = f.record.t;
        let exact = RealField::from_fn(grid, |x| gaussian_density(x, q0 * t.cos(), 0.5))?;
        let rho = f.psi.density();
        glauber = glauber.max(1.0 - bhattacharyya(&rho, &exact));
        fb_frames.push(rho);
        Ok(())
    };
    evolve_feedback(&model, &grid, start, &cfg, period, &tol, &mut sink)?;
    s.check(
        "8a",
        "harmonic feedback run reproduces the Glauber state",
        glauber < 1e-6,
        format!("max 1 - B = {glauber:.3e} over {} snapshots (limit 1e-6)", fb_frames.len()),
    );

    let static_cfg = PropagatorConfig {
        mode: Mode::Static,
        ..cfg.clone()
    };
    let state0 = displace_analytic(&model, &grid, start, &tol)?;
    let mut worst: f64 = 0.0;
    let mut k = 0;
    let mut sink = |f: Frame| {
        let rho = f.psi.density();
        worst = worst.max(max_of(rho.values().iter().zip(fb_frames[k].values()).map(|(a, b)| (a - b).abs())));
        k += 1;
        Ok(())
    };
    evolve_static(&state0, &static_cfg, period, &tol, &mut sink)?;
    s.check(
        "8b",
        "harmonic feedback and static densities agree",
        worst < 1e-6,
        format!("max |rho_feedback - rho_static| = {worst:.3e} (limit 1e-6)"),
    );

    let formula = max_of((-300..=300).map(|k| {
        let q = k as f64 * 0.01;
        (v_class(&model, q) - 0.5 * q * q).abs()
    }));
    let numeric = max_of(
        v_class_profile(&model, &grid, 3.0 * model.ground_width(), 60)?
            .iter()
            .map(|&(q, v)| (v - 0.5 * q * q).abs()),
    );
    s.check(
        "8c",
        "harmonic V_class = V",
        formula == 0.0 && numeric < 1e-8,
        format!("formula difference {formula:.1e}; numeric reconstruction {numeric:.3e} hbar*omega (limit 1e-8)"),
    );
    Ok(())
}

// ----------------------------------------------------------------

fn main() -> ExitCode {
    let start = Instant::now();
    let mut s = Suite::default();
    println!("acceptance suite");

    if let Err(e) = criterion_1(&mut s) {
        s.error("1", "Madelung identity", e);
    }
    if let Err(e) = criterion_2(&mut s) {
        s.error("2", "curvature identity", e);
    }
    if let Err(e) = criterion_3(&mut s) {
        s.error("3", "linear coefficient and V_class", e);
    }

    match morse_setup(unit_morse()).and_then(|setup| {
        let run = feedback_run(&setup, setup.period / STEPS_PER_PERIOD)?;
        Ok((setup, run))
    }) {
        Ok((setup, run)) => {
            if let Err(e) = criterion_4(&mut s, &setup, &run) {
                s.error("4", "non-spreading", e);
            }
            if let Err(e) = criterion_5(&mut s, &setup, &run) {
                s.error("5", "spreading baseline", e);
            }
            criterion_6(&mut s, &setup, &run);
            if let Err(e) = criterion_9(&mut s, &setup, &run) {
                s.error("9", "unit sanity", e);
            }
        }
        Err(e) => {
            for (id, name) in [("4", "non-spreading"), ("5", "spreading baseline"), ("6", "Ehrenfest"), ("9", "unit sanity")] {
                s.error(id, name, &e);
            }
        }
    }

    if let Err(e) = criterion_7(&mut s) {
        s.error("7", "static limit", e);
    }
    if let Err(e) = criterion_8(&mut s) {
        s.error("8", "harmonic cross-checks", e);
    }

    let failed: Vec<&Outcome> = s.outcomes.iter().filter(|o| !o.pass).collect();
    let unexpected: Vec<&&Outcome> = failed.iter().filter(|o| !KNOWN_RED.contains(&o.id)).collect();
    println!(
        "{} criteria, {} passed, {} failed ({} known red) in {:.1} s",
        s.outcomes.len(),
        s.outcomes.len() - failed.len(),
        failed.len(),
        failed.len() - unexpected.len(),
        start.elapsed().as_secs_f64()
    );
    for o in s.outcomes.iter().filter(|o| o.pass && KNOWN_RED.contains(&o.id)) {
        println!("note: criterion {} ({}) listed as known red but passed: {}", o.id, o.name, o.detail);
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for o in unexpected {
            println!("unexpected failure: {} {}: {}", o.id, o.name, o.detail);
        }
        ExitCode::FAILURE
    }
}
