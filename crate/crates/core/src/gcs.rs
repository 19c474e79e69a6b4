//! Displacement of a ground state in the coordinate representation and the
//! polar (density, phase) decomposition of the result.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{GcsError, Result};
use crate::grid::{boundary_mass, ComplexField, Grid, RealField, Sample, Spectral};
use crate::model::PotentialModel;
use crate::tolerance::Tolerances;

/// Wave-packet centre `(Q, P)` at time `t`, with `Q = <q>_α - <q>₀` and
/// `P = <p>_α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalPoint {
    pub q: f64,
    pub p: f64,
    pub t: f64,
}

impl ClassicalPoint {
    pub fn new(q: f64, p: f64, t: f64) -> Self {
        ClassicalPoint { q, p, t }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.p.is_finite() && self.t.is_finite()
    }
}

/// How a field was translated by `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftMethod {
    Spectral,
    Quintic,
    /// Sampled from the closed-form ground amplitude.
    Analytic,
}

/// A generalized coherent state `Ψ_α = D(α)Ψ₀` together with its label.
#[derive(Clone, Debug)]
pub struct GcsState {
    pub psi: ComplexField,
    pub point: ClassicalPoint,
    pub model: PotentialModel,
    pub shift: ShiftMethod,
}

/// Bookkeeping label `α = √(2ħ)(Q + iP)`. Not used by any numerics.
pub fn alpha_label(point: &ClassicalPoint, hbar: f64) -> Complex64 {
    (2.0 * hbar).sqrt() * Complex64::new(point.q, point.p)
}

fn relative_boundary_mass<T: Sample>(values: &[T], grid: &Grid, points: usize) -> f64 {
    let rho: Vec<f64> = values.iter().map(Sample::norm_sqr).collect();
    boundary_mass(&rho, grid.dx(), points)
}

/// `f(x - shift)`. Spectral when `f` has decayed at both edges, quintic
/// interpolation with zero fill otherwise. Fails if the shifted field leaves
/// the grid.
pub fn translate<T: Sample>(
    field: &crate::grid::Field<T>,
    shift: f64,
    tol: &Tolerances,
) -> Result<(crate::grid::Field<T>, ShiftMethod)> {
    let grid = *field.grid();
    if !shift.is_finite() {
        return Err(GcsError::InvalidField(format!("non-finite shift {shift}")));
    }
    let decayed = relative_boundary_mass(field.values(), &grid, tol.boundary_points) <= tol.boundary_mass;
    let (values, method) = if decayed {
        (Spectral::new(&grid).translate(field.values(), shift), ShiftMethod::Spectral)
    } else {
        let values = grid
            .points()
            .map(|x| field.interpolate(x - shift))
            .collect::<Vec<_>>();
        (values, ShiftMethod::Quintic)
    };
    let edge = relative_boundary_mass(&values, &grid, tol.boundary_points);
    if edge > tol.boundary_mass {
        return Err(GcsError::Coverage(format!(
            "field shifted by {shift:.6e} has boundary mass {edge:.3e} (limit {:.1e})",
            tol.boundary_mass
        )));
    }
    Ok((crate::grid::Field::new(grid, values)?, method))
}

/// `Ψ_α(x) = exp(-iPQ/2ħ) exp(iPx/ħ) Ψ₀(x - Q)`.
pub fn displace(
    model: &PotentialModel,
    psi0: &RealField,
    point: ClassicalPoint,
    tol: &Tolerances,
) -> Result<GcsState> {
    if !point.is_finite() {
        return Err(GcsError::InvalidField(format!("non-finite classical point {point:?}")));
    }
    let norm = psi0.norm_sqr();
    if (norm - 1.0).abs() > tol.norm {
        return Err(GcsError::NotNormalized { norm });
    }
    let hbar = model.hbar();
    let (shifted, shift) = if point.q == 0.0 {
        (psi0.clone(), ShiftMethod::Spectral)
    } else {
        translate(psi0, point.q, tol)?
    };
    let global = -point.p * point.q / (2.0 * hbar);
    let grid = *psi0.grid();
    let values = grid
        .points()
        .zip(shifted.values())
        .map(|(x, &amp)| Complex64::from_polar(amp, global + point.p * x / hbar))
        .collect();
    Ok(GcsState {
        psi: ComplexField::new(grid, values)?,
        point,
        model: *model,
        shift,
    })
}

/// The coherent state labelled `point` sampled directly from the analytic
/// ground amplitude. No translation error; fails if it leaves the grid.
pub fn displace_analytic(
    model: &PotentialModel,
    grid: &Grid,
    point: ClassicalPoint,
    tol: &Tolerances,
) -> Result<GcsState> {
    if !point.is_finite() {
        return Err(GcsError::InvalidField(format!("non-finite classical point {point:?}")));
    }
    let hbar = model.hbar();
    let global = -point.p * point.q / (2.0 * hbar);
    let values: Vec<Complex64> = grid
        .points()
        .map(|x| Complex64::from_polar(model.ground_amplitude(x - point.q), global + point.p * x / hbar))
        .collect();
    let edge = relative_boundary_mass(&values, grid, tol.boundary_points);
    if edge > tol.boundary_mass {
        return Err(GcsError::Coverage(format!(
            "coherent state at Q = {:.6e} has boundary mass {edge:.3e} (limit {:.1e})",
            point.q, tol.boundary_mass
        )));
    }
    Ok(GcsState {
        psi: ComplexField::new(*grid, values)?,
        point,
        model: *model,
        shift: ShiftMethod::Analytic,
    })
}

/// Density and phase of a state. `phase` holds `S = ħ arg Ψ`, unwrapped
/// from the density peak outward over `valid`; outside `valid` it is
/// continued linearly.
#[derive(Clone, Debug)]
pub struct DensityPhase {
    pub rho: RealField,
    pub phase: RealField,
    pub valid: Range<usize>,
}

impl DensityPhase {
    pub fn extrapolated(&self) -> bool {
        self.valid.start > 0 || self.valid.end < self.rho.grid().len()
    }
}

pub fn density_phase(state: &GcsState, tol: &Tolerances) -> Result<DensityPhase> {
    polar_decomposition(&state.psi, state.model.hbar(), tol)
}

/// Polar decomposition `Ψ = √ρ e^{iS/ħ}` of any field.
pub fn polar_decomposition(psi: &ComplexField, hbar: f64, tol: &Tolerances) -> Result<DensityPhase> {
    polar_with(psi, hbar, tol, true)
}

/// Like [`polar_decomposition`], but an ambiguous phase increment ends the
/// valid region instead of failing. Interference nodes far out in the tail
/// of a propagated state then only shrink `valid`.
pub fn polar_decomposition_main_lobe(psi: &ComplexField, hbar: f64, tol: &Tolerances) -> Result<DensityPhase> {
    polar_with(psi, hbar, tol, false)
}

fn polar_with(psi: &ComplexField, hbar: f64, tol: &Tolerances, strict: bool) -> Result<DensityPhase> {
    let grid = *psi.grid();
    let v = psi.values();
    let rho: Vec<f64> = v.iter().map(|c| c.norm_sqr()).collect();
    let (peak, peak_rho) = rho
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    if peak_rho <= 0.0 {
        return Err(GcsError::InvalidField("zero wavefunction has no phase".into()));
    }
    let floor = tol.phase_floor * peak_rho;
    let mut lo = peak;
    while lo > 0 && rho[lo - 1] > floor {
        lo -= 1;
    }
    let mut hi = peak + 1;
    while hi < rho.len() && rho[hi] > floor {
        hi += 1;
    }

    let mut theta = vec![0.0; rho.len()];
    theta[peak] = v[peak].arg();
    // Ok(false) marks an ambiguous increment in lenient mode
    let step = |from: usize, to: usize, theta: &mut [f64]| -> Result<bool> {
        let jump = (v[to] * v[from].conj()).arg();
        if jump.abs() > tol.phase_jump {
            if !strict {
                return Ok(false);
            }
            return Err(GcsError::PhaseUnwrap {
                index: to,
                x: grid.x(to),
                jump,
            });
        }
        theta[to] = theta[from] + jump;
        Ok(true)
    };
    for i in peak + 1..hi {
        if !step(i - 1, i, &mut theta)? {
            hi = i;
            break;
        }
    }
    for i in (lo..peak).rev() {
        if !step(i + 1, i, &mut theta)? {
            lo = i + 1;
            break;
        }
    }
    // linear continuation below the density floor
    let slope = |a: usize, b: usize, theta: &[f64]| {
        if a == b {
            0.0
        } else {
            (theta[b] - theta[a]) / (b as f64 - a as f64)
        }
    };
    let right = slope(hi.saturating_sub(2).max(lo), hi - 1, &theta);
    for i in hi..rho.len() {
        theta[i] = theta[hi - 1] + right * (i - (hi - 1)) as f64;
    }
    let left = slope(lo, (lo + 1).min(hi - 1), &theta);
    for i in 0..lo {
        theta[i] = theta[lo] - left * (lo - i) as f64;
    }
    Ok(DensityPhase {
        rho: RealField::new(grid, rho)?,
        phase: RealField::new(grid, theta.into_iter().map(|t| hbar * t).collect())?,
        valid: lo..hi,
    })
}
