use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module. Overridable per run through
/// the `[tolerances]` section of a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Accepted |norm - 1| for a state handed to an expectation value.
    pub norm: f64,
    /// Accepted |norm - 1| for an analytic ground state sampled on a grid.
    pub ground_norm: f64,
    /// Largest probability allowed within `boundary_points` of either edge.
    pub boundary_mass: f64,
    pub boundary_points: usize,
    /// Relative density below which the phase is extrapolated.
    pub phase_floor: f64,
    /// Relative density below which the quantum curvature is clamped.
    pub curvature_floor: f64,
    /// Largest accepted |phase increment| between neighbouring valid samples.
    pub phase_jump: f64,
    /// Largest accepted norm drift over a propagation.
    pub unitarity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm: 1e-6,
            ground_norm: 1e-8,
            boundary_mass: 1e-10,
            boundary_points: 5,
            phase_floor: 1e-12,
            curvature_floor: 1e-10,
            phase_jump: 0.9 * std::f64::consts::PI,
            unitarity: 1e-8,
        }
    }
}
