//! Observables and coherence checks evaluated along a propagation.

use crate::error::{GcsError, Result};
use crate::gcs::polar_decomposition_main_lobe;
use crate::grid::{
    boundary_mass, expectation_unchecked, integrate_samples, ComplexField, DerivativeMethod, Grid,
    Observable, RealField,
};
use crate::madelung::hjm_residual;
use crate::model::PotentialModel;
use crate::tolerance::Tolerances;

/// Observables of one time step.
///
/// `ehrenfest_residual` is `|d<p>/dt + <∂ₓV>|`; `center_gradient_residual`
/// is `|Ṗ + ∂ₓV(<q>)|` with `Ṗ` the classical force in feedback runs and the
/// measured `d<p>/dt` otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub norm: f64,
    pub q_mean: f64,
    pub p_mean: f64,
    pub dq2: f64,
    pub overlap: f64,
    pub ehrenfest_residual: f64,
    pub hjm_residual: f64,
    pub boundary_mass: f64,
    pub l2_distance: f64,
    pub center_gradient_residual: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,norm,q_mean,p_mean,dq2,overlap,ehrenfest_residual,hjm_residual,boundary_mass,l2_distance,center_gradient_residual";

    pub fn csv_row(&self) -> String {
        [
            self.t,
            self.norm,
            self.q_mean,
            self.p_mean,
            self.dq2,
            self.overlap,
            self.ehrenfest_residual,
            self.hjm_residual,
            self.boundary_mass,
            self.l2_distance,
            self.center_gradient_residual,
        ]
        .iter()
        .map(|v| format_float(*v))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Bhattacharyya overlap `∫√(ρ(x) ρ₀(x - Q)) dx` against the translated
/// ground density.
pub fn coherence_overlap(rho: &RealField, model: &PotentialModel, q: f64, tol: &Tolerances) -> Result<f64> {
    let grid = *rho.grid();
    let norm = integrate_samples(rho.values(), grid.dx());
    if (norm - 1.0).abs() > tol.norm {
        return Err(GcsError::NotNormalized { norm });
    }
    let reference = reference_density(model, &grid, q, tol)?;
    Ok(bhattacharyya(rho.values(), &reference, grid.dx()))
}

fn reference_density(model: &PotentialModel, grid: &Grid, q: f64, tol: &Tolerances) -> Result<Vec<f64>> {
    let reference: Vec<f64> = grid
        .points()
        .map(|x| model.ground_amplitude(x - q).powi(2))
        .collect();
    let edge = boundary_mass(&reference, grid.dx(), tol.boundary_points);
    if edge > tol.boundary_mass {
        return Err(GcsError::Coverage(format!(
            "reference density at Q = {q:.6e} has boundary mass {edge:.3e}"
        )));
    }
    Ok(reference)
}

fn bhattacharyya(a: &[f64], b: &[f64], dx: f64) -> f64 {
    let s: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x.max(0.0) * y.max(0.0)).sqrt()).collect();
    integrate_samples(&s, dx)
}

/// Hellinger distance `sqrt(½∫(√ρ₁ - √ρ₂)²)`, evaluated without the
/// cancellation in `1 - overlap`. For normalized densities its square equals
/// `1 - overlap`, but it is linear in small amplitude errors.
pub fn hellinger_distance(a: &RealField, b: &RealField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(GcsError::Diagnostics("densities live on different grids".into()));
    }
    let d: Vec<f64> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x.max(0.0).sqrt() - y.max(0.0).sqrt()).powi(2))
        .collect();
    Ok((0.5 * integrate_samples(&d, a.grid().dx())).sqrt())
}

/// Three consecutive states and the index of the one being recorded.
/// Time derivatives use second-order central, forward or backward
/// differences depending on `target`.
pub struct TimeStencil<'a> {
    pub states: [&'a ComplexField; 3],
    pub p_means: [f64; 3],
    pub target: usize,
    pub dt: f64,
}

impl TimeStencil<'_> {
    fn weights(&self) -> [f64; 3] {
        let s = 1.0 / (2.0 * self.dt);
        match self.target {
            0 => [-3.0 * s, 4.0 * s, -s],
            1 => [-s, 0.0, s],
            _ => [s, -4.0 * s, 3.0 * s],
        }
    }
}

/// What a record is compared against.
pub struct RecordInput<'a> {
    pub t: f64,
    pub stencil: TimeStencil<'a>,
    /// `V(x,t)` at the recorded time.
    pub potential: &'a RealField,
    /// Displacement of the reference density; `None` uses the packet's own
    /// centre `<q> - <q>₀`.
    pub q_ref: Option<f64>,
    /// Classical `dP/dt`; `None` uses the measured `d<p>/dt`.
    pub force: Option<f64>,
}

/// Computes [`DiagnosticsRecord`]s for one model on one grid.
pub struct Recorder {
    model: PotentialModel,
    grid: Grid,
    q0: f64,
    tol: Tolerances,
}

impl Recorder {
    pub fn new(model: &PotentialModel, grid: &Grid, tol: &Tolerances) -> Result<Self> {
        let info = model.ground_moments(grid, tol)?;
        Ok(Recorder {
            model: *model,
            grid: *grid,
            q0: info.q0,
            tol: tol.clone(),
        })
    }

    pub fn ground_mean(&self) -> f64 {
        self.q0
    }

    pub fn record(&self, input: &RecordInput<'_>) -> Result<DiagnosticsRecord> {
        let st = &input.stencil;
        if st.target > 2 || !(st.dt.is_finite() && st.dt > 0.0) {
            return Err(GcsError::Diagnostics(format!(
                "bad time stencil (target {}, dt {})",
                st.target, st.dt
            )));
        }
        if st.states.iter().any(|s| *s.grid() != self.grid) || *input.potential.grid() != self.grid {
            return Err(GcsError::Diagnostics("fields live on a different grid".into()));
        }
        let grid = self.grid;
        let dx = grid.dx();
        let hbar = self.model.hbar();
        let mass = self.model.mass();
        let psi = st.states[st.target];
        let rho = psi.density();
        let norm = integrate_samples(rho.values(), dx);
        let q_mean = expectation_unchecked(psi, Observable::X, hbar) / norm;
        let x2 = expectation_unchecked(psi, Observable::X2, hbar) / norm;
        let dq2 = x2 - q_mean * q_mean;
        let p_mean = st.p_means[st.target];
        let w = st.weights();

        let q_ref = input.q_ref.unwrap_or(q_mean - self.q0);
        let reference = reference_density(&self.model, &grid, q_ref, &self.tol)?;
        let overlap = bhattacharyya(rho.values(), &reference, dx) / norm.sqrt();
        let diff: Vec<f64> = rho
            .values()
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).powi(2))
            .collect();
        let l2_distance = integrate_samples(&diff, dx).sqrt();

        let dpdt_measured: f64 = w.iter().zip(&st.p_means).map(|(a, b)| a * b).sum();
        let grad = input.potential.first_derivative(DerivativeMethod::FivePoint);
        let mean_grad = integrate_samples(
            &rho.values().iter().zip(grad.values()).map(|(r, g)| r * g).collect::<Vec<_>>(),
            dx,
        ) / norm;
        let ehrenfest_residual = (dpdt_measured + mean_grad).abs();
        let force = input.force.unwrap_or(dpdt_measured);
        let center_gradient_residual = (force + grad.interpolate(q_mean)).abs();

        // ∂ₜS from phase differences relative to the target state
        let mut s_t = vec![0.0; grid.len()];
        for (k, state) in st.states.iter().enumerate() {
            if k == st.target {
                continue;
            }
            for (i, (a, b)) in state.values().iter().zip(psi.values()).enumerate() {
                s_t[i] += w[k] * hbar * (a * b.conj()).arg();
            }
        }
        let normalized = psi.map(|c| c / norm.sqrt())?;
        let polar = polar_decomposition_main_lobe(&normalized, hbar, &self.tol)?;
        let hjm = hjm_residual(
            &RealField::new(grid, s_t)?,
            &polar.phase,
            &polar.rho,
            input.potential,
            mass,
            hbar,
            &self.tol,
        )?;

        Ok(DiagnosticsRecord {
            t: input.t,
            norm,
            q_mean,
            p_mean,
            dq2,
            overlap,
            ehrenfest_residual,
            hjm_residual: hjm,
            boundary_mass: boundary_mass(rho.values(), dx, self.tol.boundary_points),
            l2_distance,
            center_gradient_residual,
        })
    }
}

/// `<p>` of a state without the normalization precondition.
pub fn momentum_mean(psi: &ComplexField, hbar: f64) -> f64 {
    expectation_unchecked(psi, Observable::P, hbar)
}
