//! The potential steering the packet centre. For the Morse well it is the
//! mirror image `U₀(1 - e^{aQ})²` of the well itself; the numeric profile is
//! rebuilt by integrating the extracted force.

use gcs_core::classical::{classical_period, integrate_trajectory, point_at_energy, v_class, v_class_profile};
use gcs_core::{PotentialModel, Result};

fn main() -> Result<()> {
    let model = PotentialModel::morse(1.0, 1.0, 1.0, 1.0)?;
    let dq = model.ground_width();
    let grid = model.default_grid(2048, 3.0 * dq)?;

    let profile = v_class_profile(&model, &grid, 3.0 * dq, 60)?;
    println!("{:>8} {:>12} {:>12} {:>12}", "Q", "numeric", "analytic", "V(-Q)");
    for &(q, numeric) in profile.iter().step_by(20) {
        println!("{q:>8.4} {numeric:>12.8} {:>12.8} {:>12.8}", v_class(&model, q), model.potential(-q));
    }

    let energy = 0.2 * model.energy_scale();
    let period = classical_period(&model, energy)?;
    let start = point_at_energy(&model, energy)?;
    let steps = 10_000;
    let orbit = integrate_trajectory(&model, start.q, start.p, period / steps as f64, steps)?;
    let (lo, hi) = orbit.q_range();
    let end = orbit.points.last().unwrap();
    let drift = orbit
        .energies(&model)
        .iter()
        .map(|e| (e / energy - 1.0).abs())
        .fold(0.0, f64::max);
    println!("orbit at E = 0.2 U0: period {period:.6}, Q in [{lo:.6}, {hi:.6}], return error {:.2e}, energy drift {drift:.2e}", (end.q - start.q).abs());
    Ok(())
}
