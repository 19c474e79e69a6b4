//! Analytic potential families with exact ground states.
//!
//! Two families are built in:
//!
//! - **Harmonic**: `V(x) = ½ m ω² x²`, Gaussian ground state of width
//!   `ħ/(2mω)` and energy `ħω/2`.
//! - **Morse**: `V(x) = U₀ (1 - e^{-ax})²` with `U₀ = λ² ℰ₀`,
//!   `ℰ₀ = (ħa)²/2m`. Only the well-depth index `λ = 1` has its ground state
//!   wired in; it reads
//!   `Ψ₀(x) = (2π²/(3Δq²))^{1/4} exp(-γx/Δq - exp(-2γx/Δq))`
//!   with `γ = π/(2√6)`, `Δq = 2γ/a`, and has energy `¾ℰ₀`.
//!
//! Other families plug in as new [`ModelKind`] variants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GcsError, Result};
use crate::grid::{boundary_mass, integrate, Grid, RealField};
use crate::tolerance::Tolerances;

/// `γ = π/(2√6)`.
pub const MORSE_GAMMA: f64 = PI / (2.0 * 2.449_489_742_783_178);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    Harmonic { omega: f64 },
    Morse { a: f64, lambda: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialModel {
    kind: ModelKind,
    mass: f64,
    hbar: f64,
}

/// Ground-state moments `<q>₀`, `Δq²` and the ground energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundStateInfo {
    pub q0: f64,
    pub dq2: f64,
    pub e0: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(GcsError::InvalidModel(format!("{name} must be positive and finite, got {v}")))
    }
}

impl PotentialModel {
    pub fn harmonic(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        positive("mass", mass)?;
        positive("omega", omega)?;
        positive("hbar", hbar)?;
        Ok(PotentialModel {
            kind: ModelKind::Harmonic { omega },
            mass,
            hbar,
        })
    }

    pub fn morse(mass: f64, a: f64, lambda: f64, hbar: f64) -> Result<Self> {
        positive("mass", mass)?;
        positive("a", a)?;
        positive("hbar", hbar)?;
        if !(lambda > 0.5) {
            return Err(GcsError::InvalidModel(format!(
                "Morse well index lambda must exceed 1/2 for a bound state, got {lambda}"
            )));
        }
        if lambda != 1.0 {
            return Err(GcsError::NotImplemented(format!(
                "analytic Morse ground state is only available for lambda = 1 (got {lambda})"
            )));
        }
        Ok(PotentialModel {
            kind: ModelKind::Morse { a, lambda },
            mass,
            hbar,
        })
    }

    pub fn from_kind(kind: ModelKind, mass: f64, hbar: f64) -> Result<Self> {
        match kind {
            ModelKind::Harmonic { omega } => Self::harmonic(mass, omega, hbar),
            ModelKind::Morse { a, lambda } => Self::morse(mass, a, lambda, hbar),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, ModelKind::Harmonic { .. })
    }

    /// Morse energy unit `ℰ₀ = (ħa)²/2m`; `ħω` for the oscillator.
    pub fn energy_unit(&self) -> f64 {
        match self.kind {
            ModelKind::Harmonic { omega } => self.hbar * omega,
            ModelKind::Morse { a, .. } => (self.hbar * a).powi(2) / (2.0 * self.mass),
        }
    }

    /// Morse depth `U₀ = λ²ℰ₀`; `ħω` for the oscillator. Used to express
    /// tolerances on potentials.
    pub fn energy_scale(&self) -> f64 {
        match self.kind {
            ModelKind::Harmonic { .. } => self.energy_unit(),
            ModelKind::Morse { lambda, .. } => lambda * lambda * self.energy_unit(),
        }
    }

    /// `U₀a` for Morse, `ħω/Δq` for the oscillator. Unit for force residuals.
    pub fn force_scale(&self) -> f64 {
        match self.kind {
            ModelKind::Harmonic { .. } => self.energy_scale() / self.ground_width(),
            ModelKind::Morse { a, .. } => self.energy_scale() * a,
        }
    }

    /// Small-oscillation angular frequency at the bottom of the well.
    pub fn natural_frequency(&self) -> f64 {
        match self.kind {
            ModelKind::Harmonic { omega } => omega,
            ModelKind::Morse { a, .. } => a * (2.0 * self.energy_scale() / self.mass).sqrt(),
        }
    }

    /// Analytic ground-state width `Δq`.
    pub fn ground_width(&self) -> f64 {
        match self.kind {
            ModelKind::Harmonic { omega } => (self.hbar / (2.0 * self.mass * omega)).sqrt(),
            ModelKind::Morse { a, .. } => 2.0 * MORSE_GAMMA / a,
        }
    }

    pub fn potential(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Harmonic { omega } => 0.5 * self.mass * omega * omega * x * x,
            ModelKind::Morse { a, .. } => self.energy_scale() * (1.0 - (-a * x).exp()).powi(2),
        }
    }

    pub fn potential_gradient(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Harmonic { omega } => self.mass * omega * omega * x,
            ModelKind::Morse { a, .. } => {
                let e = (-a * x).exp();
                2.0 * a * self.energy_scale() * (1.0 - e) * e
            }
        }
    }

    pub fn ground_energy(&self) -> f64 {
        match self.kind {
            ModelKind::Harmonic { omega } => 0.5 * self.hbar * omega,
            ModelKind::Morse { .. } => 0.75 * self.energy_unit(),
        }
    }

    /// `(ħ²/2m) F(ξ)` for the ground density, which equals `V(ξ) - E₀`.
    pub fn curvature_term(&self, xi: f64) -> f64 {
        self.potential(xi) - self.ground_energy()
    }

    /// Closed-form ground-state amplitude `Ψ₀(x)`.
    pub fn ground_amplitude(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Harmonic { omega } => {
                let mw = self.mass * omega / self.hbar;
                (mw / PI).powf(0.25) * (-0.5 * mw * x * x).exp()
            }
            ModelKind::Morse { .. } => {
                let dq = self.ground_width();
                let dq2 = dq * dq;
                let s = MORSE_GAMMA * x / dq;
                (2.0 * PI * PI / (3.0 * dq2)).powf(0.25) * (-s - (-2.0 * s).exp()).exp()
            }
        }
    }

    /// Samples `Ψ₀` on `grid` and checks it is fully represented there.
    pub fn ground_state(&self, grid: &Grid, tol: &Tolerances) -> Result<RealField> {
        let psi = RealField::from_fn(*grid, |x| self.ground_amplitude(x))?;
        let rho: Vec<f64> = psi.values().iter().map(|v| v * v).collect();
        let edge = boundary_mass(&rho, grid.dx(), tol.boundary_points);
        if edge > tol.boundary_mass {
            return Err(GcsError::Coverage(format!(
                "ground state has boundary mass {edge:.3e} on [{}, {}] (limit {:.1e})",
                grid.x_min(),
                grid.x_max(),
                tol.boundary_mass
            )));
        }
        let norm = integrate(&RealField::new(*grid, rho)?);
        if (norm - 1.0).abs() > tol.ground_norm {
            return Err(GcsError::Coverage(format!(
                "ground state normalizes to {norm:.12} on [{}, {}]",
                grid.x_min(),
                grid.x_max()
            )));
        }
        Ok(psi)
    }

    /// `<q>₀` and `Δq²` by quadrature of the sampled ground density.
    pub fn ground_moments(&self, grid: &Grid, tol: &Tolerances) -> Result<GroundStateInfo> {
        let psi = self.ground_state(grid, tol)?;
        let rho = |i: usize| psi.values()[i].powi(2);
        let m1 = RealField::new(*grid, (0..grid.len()).map(|i| grid.x(i) * rho(i)).collect())?;
        let m2 = RealField::new(
            *grid,
            (0..grid.len()).map(|i| grid.x(i).powi(2) * rho(i)).collect(),
        )?;
        let q0 = integrate(&m1);
        let dq2 = integrate(&m2) - q0 * q0;
        Ok(GroundStateInfo {
            q0,
            dq2,
            e0: self.ground_energy(),
        })
    }

    /// A grid holding the ground state displaced anywhere within
    /// `|Q| <= q_extent`. The Morse tail decays like `e^{-ax}` on the right,
    /// so the right margin is much wider than the left one.
    pub fn default_grid(&self, n: usize, q_extent: f64) -> Result<Grid> {
        let dq = self.ground_width();
        let q = q_extent.abs();
        match self.kind {
            ModelKind::Harmonic { .. } => Grid::new(-(12.0 * dq + q), 12.0 * dq + q, n),
            ModelKind::Morse { .. } => Grid::new(-(8.0 * dq + q), 31.0 * dq + q, n),
        }
    }
}
