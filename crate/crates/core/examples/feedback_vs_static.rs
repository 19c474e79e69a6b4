//! The same Morse coherent state propagated twice: in the feedback
//! potential that follows the classical centre, and in the fixed well. The
//! first keeps its shape, the second spreads.

use gcs_core::classical::{classical_period, point_at_energy};
use gcs_core::gcs::displace_analytic;
use gcs_core::propagator::{evolve_feedback, evolve_static, Frame, Mode, PropagatorConfig, Scheme};
use gcs_core::{PotentialModel, Result, Tolerances};

fn main() -> Result<()> {
    let tol = Tolerances::default();
    let model = PotentialModel::morse(1.0, 1.0, 1.0, 1.0)?;
    let energy = 0.2 * model.energy_scale();
    let period = classical_period(&model, energy)?;
    let start = point_at_energy(&model, energy)?;
    let grid = model.default_grid(2048, start.q.abs().max(0.6))?;
    let dt = period / 1e4;
    let mut ignore = |_: Frame| Ok(());

    let cfg = PropagatorConfig::new(dt, Scheme::CrankNicolson, Mode::Feedback, usize::MAX)?;
    let feedback = evolve_feedback(&model, &grid, start, &cfg, period, &tol, &mut ignore)?;

    // the unbound part of the freely evolving packet reaches the edge after
    // roughly one period, so stop short of it
    let cfg = PropagatorConfig::new(dt, Scheme::CrankNicolson, Mode::Static, usize::MAX)?;
    let state0 = displace_analytic(&model, &grid, start, &tol)?;
    let fixed = evolve_static(&state0, &cfg, 0.8 * period, &tol, &mut ignore)?;

    for (name, ev) in [("feedback", &feedback), ("static", &fixed)] {
        let d0 = ev.records[0].dq2;
        let deficit = ev.records.iter().map(|r| 1.0 - r.overlap).fold(0.0, f64::max);
        let spread = ev.records.iter().map(|r| r.dq2 / d0 - 1.0).fold(0.0, f64::max);
        println!("{name:>8}: {} steps, max overlap deficit {deficit:.3e}, max dq2 growth {spread:.3e}", ev.records.len() - 1);
    }
    Ok(())
}
