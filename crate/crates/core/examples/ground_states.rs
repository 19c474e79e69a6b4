//! Ground states of both wells on a lattice: norm, moments and the
//! curvature identity `(ħ²/2m)(√ρ)''/√ρ = V - E₀`.

use gcs_core::madelung::numeric_curvature_term;
use gcs_core::{PotentialModel, Result, Tolerances};

fn main() -> Result<()> {
    let tol = Tolerances::default();
    let wells = [
        ("harmonic", PotentialModel::harmonic(1.0, 1.0, 1.0)?),
        ("morse", PotentialModel::morse(1.0, 1.0, 1.0, 1.0)?),
    ];
    for (name, model) in wells {
        let grid = model.default_grid(2048, 0.0)?;
        let info = model.ground_moments(&grid, &tol)?;
        println!(
            "{name}: E0 = {:.6}, <q> = {:.12}, dq2 = {:.12} (width^2 = {:.12})",
            info.e0,
            info.q0,
            info.dq2,
            model.ground_width().powi(2)
        );

        let c = numeric_curvature_term(&model, &grid, 0.0, &tol)?;
        let worst = c
            .valid
            .clone()
            .map(|i| (c.values.values()[i] - model.curvature_term(grid.x(i))).abs())
            .fold(0.0, f64::max);
        println!("  curvature identity: max deviation {:.3e} energy units", worst / model.energy_scale());
    }
    Ok(())
}
