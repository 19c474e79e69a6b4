//! In the oscillator the feedback potential is the well itself up to a
//! constant, and the evolved packet is Glauber's coherent state: a
//! Gaussian of fixed width whose centre follows `Q₀ cos ωt`.

use gcs_core::diagnostics::hellinger_distance;
use gcs_core::propagator::{evolve_feedback, Frame, Mode, PropagatorConfig, Scheme};
use gcs_core::{ClassicalPoint, PotentialModel, RealField, Result, Tolerances};
use std::f64::consts::PI;

fn main() -> Result<()> {
    let tol = Tolerances::default();
    let model = PotentialModel::harmonic(1.0, 1.0, 1.0)?;
    let q0 = 1.5;
    let grid = model.default_grid(1024, q0)?;
    let period = 2.0 * PI;
    let cfg = PropagatorConfig::new(period / 16_000.0, Scheme::SplitStep, Mode::Feedback, 2000)?;

    let width2 = model.ground_width().powi(2);
    let mut report = |f: Frame| {
        let t = f.record.t;
        let qc = q0 * t.cos();
        let exact = RealField::from_fn(grid, |x| (-(x - qc).powi(2) / (2.0 * width2)).exp() / (2.0 * PI * width2).sqrt())?;
        let h = hellinger_distance(&f.psi.density(), &exact)?;
        println!("t = {t:.4}: <q> = {:+.8} (Q0 cos t = {qc:+.8}), Hellinger distance to the closed form {h:.2e}", f.record.q_mean);
        Ok(())
    };
    evolve_feedback(&model, &grid, ClassicalPoint::new(q0, 0.0, 0.0), &cfg, period, &tol, &mut report)?;
    Ok(())
}
