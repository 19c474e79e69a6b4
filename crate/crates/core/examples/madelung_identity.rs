//! The coherent state solves both Madelung equations in the potential
//! assembled from its own trajectory, at any point of phase space.

use gcs_core::madelung::coherent_state_residuals;
use gcs_core::{ClassicalPoint, PotentialModel, Result, Tolerances};

fn main() -> Result<()> {
    let tol = Tolerances::default();
    let model = PotentialModel::morse(1.0, 1.0, 1.0, 1.0)?;
    let dq = model.ground_width();
    let grid = model.default_grid(4096, 5.0 * dq)?;

    println!("{:>8} {:>8} {:>12} {:>12}", "Q/dq", "P*dq", "continuity", "HJM");
    for (sq, sp) in [(0.0, 0.0), (1.0, 0.0), (-2.0, 1.5), (3.0, -3.0), (-5.0, 5.0), (5.0, 2.0)] {
        let point = ClassicalPoint::new(sq * dq, sp / dq, 0.0);
        let r = coherent_state_residuals(&model, &grid, point, &tol)?;
        println!("{sq:>8.1} {sp:>8.1} {:>12.3e} {:>12.3e}", r.continuity, r.hjm);
    }
    Ok(())
}
