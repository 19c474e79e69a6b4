//! The classical potential that drives the wave-packet centre, read off as
//! the linear-in-`x` part of `V(x,t)`, and the symplectic integration of the
//! centre's trajectory.

use nalgebra::{DMatrix, DVector};

use crate::error::{GcsError, Result};
use crate::gcs::ClassicalPoint;
use crate::grid::Grid;
use crate::madelung::potential_field;
use crate::model::{ModelKind, PotentialModel};

/// Degree of the least-squares polynomial used by [`linear_coefficient_numeric`].
pub const FIT_DEGREE: usize = 8;

/// `dP/dt` on the classical orbit: `-dV_class/dQ`.
pub fn classical_force(model: &PotentialModel, q: f64) -> f64 {
    let m = model.mass();
    match model.kind() {
        ModelKind::Harmonic { omega } => -m * omega * omega * q,
        ModelKind::Morse { a, .. } => {
            let e = (a * q).exp();
            2.0 * a * model.energy_scale() * (e - e * e)
        }
    }
}

/// Potential governing the centre: the mirrored well `U₀(1 - e^{aQ})²` for
/// Morse, the original well for the oscillator.
pub fn v_class(model: &PotentialModel, q: f64) -> f64 {
    match model.kind() {
        ModelKind::Harmonic { .. } => model.potential(q),
        ModelKind::Morse { a, .. } => model.energy_scale() * (1.0 - (a * q).exp()).powi(2),
    }
}

pub fn classical_energy(model: &PotentialModel, q: f64, p: f64) -> f64 {
    p * p / (2.0 * model.mass()) + v_class(model, q)
}

/// Coefficient `a(t)` of the term linear in `x` in the Taylor expansion of
/// `V(x,t)` about `x = 0`.
pub fn linear_coefficient(model: &PotentialModel, q: f64, dpdt: f64) -> f64 {
    -dpdt + classical_force(model, q)
}

/// Numerical counterpart of [`linear_coefficient`]: a least-squares
/// polynomial fit of the assembled `V(x,t)` over `|x| <= Δq/4`, reading off
/// the slope at the origin.
pub fn linear_coefficient_numeric(
    model: &PotentialModel,
    grid: &Grid,
    point: ClassicalPoint,
    dpdt: f64,
) -> Result<f64> {
    let half_width = 0.25 * model.ground_width();
    if grid.x_min() > -half_width || grid.x_max() < half_width {
        return Err(GcsError::Extraction(format!(
            "grid [{}, {}] does not contain the expansion window |x| <= {half_width:.4}",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let v = potential_field(model, grid, point, dpdt)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .points()
        .zip(v.values())
        .filter(|(x, _)| x.abs() <= half_width)
        .map(|(x, y)| (x / half_width, *y))
        .unzip();
    let cols = FIT_DEGREE + 1;
    if xs.len() < cols + 4 {
        return Err(GcsError::Extraction(format!(
            "only {} samples in the fit window, need {}",
            xs.len(),
            cols + 4
        )));
    }
    let a = DMatrix::from_fn(xs.len(), cols, |i, k| xs[i].powi(k as i32));
    let b = DVector::from_vec(ys);
    let svd = a.svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::MAX), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if smin <= 1e-12 * smax {
        return Err(GcsError::Extraction(format!(
            "ill-conditioned fit (singular values {smin:.3e} / {smax:.3e})"
        )));
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|e| GcsError::Extraction(e.to_string()))?;
    Ok(coef[1] / half_width)
}

/// `V_class(Q)` rebuilt by integrating the numerically extracted force,
/// `-∫₀^Q a(Q')|_{Ṗ=0} dQ'`, with composite Simpson on `intervals` panels.
pub fn v_class_numeric(model: &PotentialModel, grid: &Grid, q: f64, intervals: usize) -> Result<f64> {
    let n = intervals.max(2) + intervals % 2;
    let h = q / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let qi = i as f64 * h;
        let f = linear_coefficient_numeric(model, grid, ClassicalPoint::new(qi, 0.0, 0.0), 0.0)?;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * f;
    }
    Ok(-acc * h / 3.0)
}

/// `V_class` on the lattice `Q = 2k h`, `|Q| <= q_max`, from one pass of
/// numerically extracted forces on the finer lattice `k h` integrated
/// outward from `Q = 0` with Simpson panels. `h = q_max / (2 panels)`.
pub fn v_class_profile(model: &PotentialModel, grid: &Grid, q_max: f64, panels: usize) -> Result<Vec<(f64, f64)>> {
    if !(q_max.is_finite() && q_max > 0.0) || panels == 0 {
        return Err(GcsError::Extraction(format!(
            "need q_max > 0 and at least one panel, got {q_max} and {panels}"
        )));
    }
    let h = q_max / (2 * panels) as f64;
    let force = |k: i64| linear_coefficient_numeric(model, grid, ClassicalPoint::new(k as f64 * h, 0.0, 0.0), 0.0);
    let half = |sign: i64| -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(panels);
        let mut acc = 0.0;
        let mut prev = force(0)?;
        for j in 1..=panels as i64 {
            let mid = force(sign * (2 * j - 1))?;
            let end = force(sign * 2 * j)?;
            acc += (sign as f64) * h / 3.0 * (prev + 4.0 * mid + end);
            prev = end;
            out.push(((sign * 2 * j) as f64 * h, -acc));
        }
        Ok(out)
    };
    let left = half(-1)?;
    let right = half(1)?;
    let mut profile: Vec<(f64, f64)> = left.into_iter().rev().collect();
    profile.push((0.0, 0.0));
    profile.extend(right);
    Ok(profile)
}

/// Sequence of centre states at uniform spacing `dt`, with the force at
/// each one.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<ClassicalPoint>,
    pub forces: Vec<f64>,
    pub dt: f64,
}

impl Trajectory {
    pub fn energies(&self, model: &PotentialModel) -> Vec<f64> {
        self.points.iter().map(|pt| classical_energy(model, pt.q, pt.p)).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn q_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.q), hi.max(p.q)))
    }
}

const CBRT2: f64 = 1.259_921_049_894_873_2;
const YOSHIDA_OUTER: f64 = 1.0 / (2.0 - CBRT2);
const YOSHIDA_INNER: f64 = -CBRT2 / (2.0 - CBRT2);

fn verlet(model: &PotentialModel, q: &mut f64, p: &mut f64, dt: f64) {
    let m = model.mass();
    *p += 0.5 * dt * classical_force(model, *q);
    *q += dt * *p / m;
    *p += 0.5 * dt * classical_force(model, *q);
}

/// One step of the fourth-order symplectic triple-jump composition of
/// velocity Verlet.
pub fn symplectic_step(model: &PotentialModel, q: f64, p: f64, dt: f64) -> (f64, f64) {
    let (mut q, mut p) = (q, p);
    verlet(model, &mut q, &mut p, YOSHIDA_OUTER * dt);
    verlet(model, &mut q, &mut p, YOSHIDA_INNER * dt);
    verlet(model, &mut q, &mut p, YOSHIDA_OUTER * dt);
    (q, p)
}

pub fn integrate_trajectory(model: &PotentialModel, q0: f64, p0: f64, dt: f64, steps: usize) -> Result<Trajectory> {
    integrate_trajectory_within(model, q0, p0, dt, steps, (f64::NEG_INFINITY, f64::INFINITY))
}

/// Like [`integrate_trajectory`], failing with an escape error as soon as
/// `Q` leaves `bounds`.
pub fn integrate_trajectory_within(
    model: &PotentialModel,
    q0: f64,
    p0: f64,
    dt: f64,
    steps: usize,
    bounds: (f64, f64),
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(GcsError::InvalidField(format!("time step must be finite and nonzero, got {dt}")));
    }
    if let ModelKind::Morse { .. } = model.kind() {
        let e = classical_energy(model, q0, p0);
        if e >= model.energy_scale() {
            return Err(GcsError::Escape { step: 0, q: q0 });
        }
    }
    let inside = |q: f64| q.is_finite() && q >= bounds.0 && q <= bounds.1;
    if !inside(q0) {
        return Err(GcsError::Escape { step: 0, q: q0 });
    }
    let mut points = Vec::with_capacity(steps + 1);
    let mut forces = Vec::with_capacity(steps + 1);
    let (mut q, mut p) = (q0, p0);
    points.push(ClassicalPoint::new(q, p, 0.0));
    forces.push(classical_force(model, q));
    for step in 1..=steps {
        (q, p) = symplectic_step(model, q, p, dt);
        if !inside(q) {
            return Err(GcsError::Escape { step, q });
        }
        points.push(ClassicalPoint::new(q, p, step as f64 * dt));
        forces.push(classical_force(model, q));
    }
    Ok(Trajectory { points, forces, dt })
}

/// Turning points of the bounded orbit at classical energy `energy`.
pub fn turning_points(model: &PotentialModel, energy: f64) -> Result<(f64, f64)> {
    if energy < 0.0 {
        return Err(GcsError::InvalidModel(format!("negative classical energy {energy}")));
    }
    match model.kind() {
        ModelKind::Harmonic { omega } => {
            let amp = (2.0 * energy / model.mass()).sqrt() / omega;
            Ok((-amp, amp))
        }
        ModelKind::Morse { a, .. } => {
            let r = (energy / model.energy_scale()).sqrt();
            if r >= 1.0 {
                return Err(GcsError::Escape { step: 0, q: f64::NEG_INFINITY });
            }
            Ok(((1.0 - r).ln() / a, (1.0 + r).ln() / a))
        }
    }
}

/// Period of the bounded orbit at classical energy `energy`.
pub fn classical_period(model: &PotentialModel, energy: f64) -> Result<f64> {
    let w = model.natural_frequency();
    match model.kind() {
        ModelKind::Harmonic { .. } => Ok(2.0 * std::f64::consts::PI / w),
        ModelKind::Morse { .. } => {
            let r = energy / model.energy_scale();
            if !(0.0..1.0).contains(&r) {
                return Err(GcsError::Escape { step: 0, q: f64::NEG_INFINITY });
            }
            Ok(2.0 * std::f64::consts::PI / (w * (1.0 - r).sqrt()))
        }
    }
}

/// Centre at rest on the right turning point of the orbit with energy
/// `energy`.
pub fn point_at_energy(model: &PotentialModel, energy: f64) -> Result<ClassicalPoint> {
    let (_, right) = turning_points(model, energy)?;
    Ok(ClassicalPoint::new(right, 0.0, 0.0))
}

/// Checks the Taylor coefficient extraction on a set of sample positions and
/// returns the largest relative disagreement between the two evaluators.
pub fn max_linear_coefficient_disagreement(model: &PotentialModel, grid: &Grid, qs: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &q in qs {
        let dpdt = 0.0;
        let analytic = linear_coefficient(model, q, dpdt);
        let numeric = linear_coefficient_numeric(model, grid, ClassicalPoint::new(q, 0.0, 0.0), dpdt)?;
        let scale = analytic.abs().max(model.energy_scale() / model.ground_width() * 1e-6);
        worst = worst.max((numeric - analytic).abs() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn morse() -> PotentialModel {
        PotentialModel::morse(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn v_class_profile_matches_closed_form() {
        let m = morse();
        let g = m.default_grid(2048, 4.0).unwrap();
        let q_max = 3.0 * m.ground_width();
        let prof = v_class_profile(&m, &g, q_max, 60).unwrap();
        assert_eq!(prof.len(), 121);
        assert_eq!(prof[60], (0.0, 0.0));
        assert_abs_diff_eq!(prof[120].0, q_max, epsilon = 1e-12);
        for &(q, v) in &prof {
            let exact = v_class(&m, q);
            if q != 0.0 {
                assert!(((v - exact) / exact).abs() < 1e-5, "Q = {q}: {v} vs {exact}");
            }
        }
        let h = PotentialModel::harmonic(1.0, 1.0, 1.0).unwrap();
        let gh = h.default_grid(1024, 0.0).unwrap();
        for (q, v) in v_class_profile(&h, &gh, 2.0, 10).unwrap() {
            assert_abs_diff_eq!(v, 0.5 * q * q, epsilon = 1e-8 * (1.0 + q * q));
        }
    }

    #[test]
    fn force_values() {
        let m = morse();
        assert_eq!(classical_force(&m, 0.0), 0.0);
        for q in [-0.5, -0.1, -1e-3] {
            assert!(classical_force(&m, q) > 0.0);
        }
        let h = PotentialModel::harmonic(1.0, 1.0, 1.0).unwrap();
        assert_eq!(classical_force(&h, 1.0), -1.0);
    }

    #[test]
    fn v_class_mirror_and_identity() {
        let m = morse();
        for q in [-3.0, -0.7, 0.0, 0.2, 1.9] {
            assert_eq!(v_class(&m, q), m.potential(-q));
        }
        assert_eq!(v_class(&m, 0.0), 0.0);
        let h = PotentialModel::harmonic(1.2, 0.8, 1.0).unwrap();
        for q in [-2.0, 0.3, 1.5] {
            assert_eq!(v_class(&h, q), h.potential(q));
        }
    }

    #[test]
    fn force_is_minus_gradient_of_v_class() {
        let h = 1e-5;
        for model in [morse(), PotentialModel::harmonic(1.0, 1.3, 1.0).unwrap()] {
            for q in [-1.1, -0.2, 0.0, 0.35, 0.8] {
                let fd = -(v_class(&model, q + h) - v_class(&model, q - h)) / (2.0 * h);
                assert_abs_diff_eq!(classical_force(&model, q), fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn linear_coefficient_cases() {
        let m = morse();
        assert_eq!(linear_coefficient(&m, 0.0, 0.0), 0.0);
        let g = m.default_grid(2048, 4.0).unwrap();
        let q = 0.5 * m.ground_width();
        let a = linear_coefficient(&m, q, 0.0);
        let u0 = m.energy_scale();
        assert_relative_eq!(a, 2.0 * u0 * (q.exp() - (2.0 * q).exp()), max_relative = 1e-15);
        assert!(a < 0.0);
        let numeric = linear_coefficient_numeric(&m, &g, ClassicalPoint::new(q, 0.0, 0.0), 0.0).unwrap();
        assert_relative_eq!(numeric, a, max_relative = 1e-6);
        for q in [-1.5, 0.3, 2.0] {
            assert_abs_diff_eq!(linear_coefficient(&m, q, classical_force(&m, q)), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn numeric_extraction_needs_the_origin() {
        let m = morse();
        let g = Grid::new(2.0, 30.0, 1024).unwrap();
        assert!(matches!(
            linear_coefficient_numeric(&m, &g, ClassicalPoint::origin(), 0.0),
            Err(GcsError::Extraction(_))
        ));
    }

    #[test]
    fn harmonic_orbit_matches_closed_form() {
        let h = PotentialModel::harmonic(1.0, 1.0, 1.0).unwrap();
        let dt = 1e-3;
        let steps = (2.0 * std::f64::consts::PI / dt).round() as usize;
        let traj = integrate_trajectory(&h, 1.0, 0.0, dt, steps).unwrap();
        for pt in &traj.points {
            assert!((pt.q - pt.t.cos()).abs() < 1e-6);
            assert!((pt.p + pt.t.sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn morse_rest_point_is_fixed() {
        let traj = integrate_trajectory(&morse(), 0.0, 0.0, 1e-2, 1000).unwrap();
        assert!(traj.points.iter().all(|p| p.q == 0.0 && p.p == 0.0));
    }

    #[test]
    fn morse_orbit_conserves_energy_between_turning_points() {
        let m = morse();
        let e = 0.3 * m.energy_scale();
        let start = point_at_energy(&m, e).unwrap();
        let (lo, hi) = turning_points(&m, e).unwrap();
        let period = classical_period(&m, e).unwrap();
        let dt = 1e-3;
        let traj = integrate_trajectory(&m, start.q, start.p, dt, (2.0 * period / dt) as usize).unwrap();
        for (pt, en) in traj.points.iter().zip(traj.energies(&m)) {
            assert!((en - e).abs() < 1e-8 * e);
            assert!(pt.q >= lo - 1e-9 && pt.q <= hi + 1e-9);
        }
        // back at the right turning point after one period
        let idx = (period / dt).round() as usize;
        assert_abs_diff_eq!(traj.points[idx].q, hi, epsilon = 1e-5);
    }

    #[test]
    fn long_run_energy_drift() {
        for m in [morse(), PotentialModel::harmonic(1.0, 1.0, 1.0).unwrap()] {
            let e = 0.2 * m.energy_scale();
            let start = point_at_energy(&m, e).unwrap();
            let period = classical_period(&m, e).unwrap();
            let dt = period / 1000.0;
            let traj = integrate_trajectory(&m, start.q, start.p, dt, 100_000).unwrap();
            let drift = traj.energies(&m).iter().map(|x| (x - e).abs() / e).fold(0.0, f64::max);
            assert!(drift < 1e-6, "{drift:e}");
        }
    }

    #[test]
    fn unbounded_orbit_is_an_escape() {
        let m = morse();
        assert!(matches!(
            integrate_trajectory(&m, 0.0, 1.1, 1e-3, 10),
            Err(GcsError::Escape { step: 0, .. })
        ));
        let err = integrate_trajectory_within(&m, 0.3, 0.0, 1e-2, 10_000, (-0.2, 1.0)).unwrap_err();
        assert!(matches!(err, GcsError::Escape { step, .. } if step > 0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn mirror_trajectory(q0 in -0.4f64..0.3, p0 in -0.3f64..0.3) {
            // trajectory in V_class equals the sign-flipped one in V
            let m = morse();
            prop_assume!(classical_energy(&m, q0, p0) < 0.9 * m.energy_scale());
            let dt = 1e-2;
            let traj = integrate_trajectory(&m, q0, p0, dt, 2000).unwrap();
            let (mut q, mut p) = (-q0, -p0);
            for pt in traj.points.iter().skip(1) {
                let mass = m.mass();
                let f = |x: f64| -m.potential_gradient(x);
                // same composition, original well
                for w in [YOSHIDA_OUTER, YOSHIDA_INNER, YOSHIDA_OUTER] {
                    let h = w * dt;
                    p += 0.5 * h * f(q);
                    q += h * p / mass;
                    p += 0.5 * h * f(q);
                }
                prop_assert!((pt.q + q).abs() < 1e-10);
                prop_assert!((pt.p + p).abs() < 1e-10);
            }
        }
    }
}
