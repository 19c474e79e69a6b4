//! Hydrodynamic (Madelung) view of a state: quantum curvature of the
//! density, the state-dependent potential a displaced ground state obeys,
//! and residuals of the continuity and Hamilton-Jacobi-Madelung equations.
//!
//! With `ρ(x,t) = ρ₀(x - Q)` and `S = Px - PQ/2` the two real equations are
//! solved exactly by
//!
//! ```text
//! V(x,t) = (ħ²/2m) F(ξ) - Ṗ x - P²/2m + ½(Q̇P + ṖQ),   ξ = x - Q,
//! F(ξ)   = (√ρ₀)''/√ρ₀,
//! ```
//!
//! provided `Q̇ = P/m`, which the continuity equation forces.

use std::ops::Range;

use crate::error::{GcsError, Result};
use crate::gcs::{translate, ClassicalPoint};
use crate::grid::{boundary_mass, integrate_samples, DerivativeMethod, Grid, RealField};
use crate::model::PotentialModel;
use crate::tolerance::Tolerances;

/// `F = (√ρ)''/√ρ` with the clamp region reported through `valid`.
#[derive(Clone, Debug)]
pub struct Curvature {
    pub values: RealField,
    /// Indices where `ρ` exceeds the floor. Outside, `values` repeats the
    /// nearest valid sample.
    pub valid: Range<usize>,
}

/// `V(x,t)` at one instant together with the classical data it was built from.
#[derive(Clone, Debug)]
pub struct PotentialSnapshot {
    pub v: RealField,
    pub point: ClassicalPoint,
    pub dpdt: f64,
    pub dqdt: f64,
}

fn check_grids(grids: &[&Grid]) -> Result<()> {
    if grids.windows(2).all(|w| w[0] == w[1]) {
        Ok(())
    } else {
        Err(GcsError::InvalidField("fields live on different grids".into()))
    }
}

pub fn quantum_curvature(rho: &RealField, tol: &Tolerances) -> Result<Curvature> {
    curvature_with(rho, tol, true)
}

/// Like [`quantum_curvature`] restricted to the lobe around the density
/// peak. Isolated specks above the floor further out are ignored instead of
/// being reported as nodes.
pub fn quantum_curvature_main_lobe(rho: &RealField, tol: &Tolerances) -> Result<Curvature> {
    curvature_with(rho, tol, false)
}

fn curvature_with(rho: &RealField, tol: &Tolerances, strict: bool) -> Result<Curvature> {
    let grid = *rho.grid();
    let r = rho.values();
    if let Some(i) = r.iter().position(|&v| v < 0.0) {
        return Err(GcsError::InvalidField(format!("negative density at x = {:.6e}", grid.x(i))));
    }
    let norm = integrate_samples(r, grid.dx());
    if (norm - 1.0).abs() > tol.norm {
        return Err(GcsError::NotNormalized { norm });
    }
    let (peak, peak_rho) = r
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    let floor = tol.curvature_floor * peak_rho;
    let mut lo = peak;
    while lo > 0 && r[lo - 1] > floor {
        lo -= 1;
    }
    let mut hi = peak + 1;
    while hi < r.len() && r[hi] > floor {
        hi += 1;
    }
    if let Some(i) = (0..lo).chain(hi..r.len()).find(|&i| strict && r[i] > floor) {
        let gap = if i < lo { lo - 1 } else { hi };
        return Err(GcsError::Node { x: grid.x(gap) });
    }
    let amp = RealField::new(grid, r.iter().map(|v| v.sqrt()).collect())?;
    let d2 = amp.second_derivative(DerivativeMethod::Spectral);
    let mut f = vec![0.0; r.len()];
    for i in lo..hi {
        f[i] = d2.values()[i] / amp.values()[i];
    }
    for i in 0..lo {
        f[i] = f[lo];
    }
    for i in hi..r.len() {
        f[i] = f[hi - 1];
    }
    Ok(Curvature {
        values: RealField::new(grid, f)?,
        valid: lo..hi,
    })
}

/// `(ħ²/2m) F(ξ)` from the numerically translated ground density. Cross-check
/// for the analytic term used by [`assemble_potential`].
pub fn numeric_curvature_term(
    model: &PotentialModel,
    grid: &Grid,
    q: f64,
    tol: &Tolerances,
) -> Result<Curvature> {
    let psi0 = model.ground_state(grid, tol)?;
    let (shifted, _) = translate(&psi0, q, tol)?;
    let rho = shifted.map(|v| v * v)?;
    let c = quantum_curvature(&rho, tol)?;
    let scale = model.hbar().powi(2) / (2.0 * model.mass());
    Ok(Curvature {
        values: c.values.map(|v| scale * v)?,
        valid: c.valid,
    })
}

/// Builds `V(x,t)` for the coherent state labelled `point` when the centre
/// accelerates at `dpdt`. The curvature term is the analytic `V(ξ) - E₀`.
pub fn assemble_potential(
    model: &PotentialModel,
    grid: &Grid,
    point: ClassicalPoint,
    dpdt: f64,
    tol: &Tolerances,
) -> Result<PotentialSnapshot> {
    let rho: Vec<f64> = grid
        .points()
        .map(|x| model.ground_amplitude(x - point.q).powi(2))
        .collect();
    let edge = boundary_mass(&rho, grid.dx(), tol.boundary_points);
    if edge > tol.boundary_mass {
        return Err(GcsError::Coverage(format!(
            "density displaced by Q = {:.6e} has boundary mass {edge:.3e}",
            point.q
        )));
    }
    Ok(PotentialSnapshot {
        v: potential_field(model, grid, point, dpdt)?,
        point,
        dpdt,
        dqdt: point.p / model.mass(),
    })
}

/// Same as [`assemble_potential`] without the coverage check.
pub(crate) fn potential_field(
    model: &PotentialModel,
    grid: &Grid,
    point: ClassicalPoint,
    dpdt: f64,
) -> Result<RealField> {
    let m = model.mass();
    let (q, p) = (point.q, point.p);
    let dqdt = p / m;
    let scalar = -p * p / (2.0 * m) + 0.5 * (dqdt * p + dpdt * q);
    RealField::from_fn(*grid, |x| model.curvature_term(x - q) - dpdt * x + scalar)
}

fn l2(values: &[f64], dx: f64) -> f64 {
    integrate_samples(&values.iter().map(|v| v * v).collect::<Vec<_>>(), dx).sqrt()
}

/// Relative L² residual of `∂ₜρ + (1/m)∂ₓ(ρ∂ₓS) = 0`, normalized by `‖∂ₜρ‖`
/// (absolute when `∂ₜρ ≡ 0`).
pub fn continuity_residual(rho_t: &RealField, rho: &RealField, s: &RealField, mass: f64) -> Result<f64> {
    check_grids(&[rho_t.grid(), rho.grid(), s.grid()])?;
    let grid = *rho.grid();
    let ds = s.first_derivative(DerivativeMethod::FivePoint);
    let flux = RealField::new(
        grid,
        rho.values().iter().zip(ds.values()).map(|(r, g)| r * g).collect(),
    )?;
    let div = flux.first_derivative(DerivativeMethod::Spectral);
    let res: Vec<f64> = rho_t
        .values()
        .iter()
        .zip(div.values())
        .map(|(rt, d)| rt + d / mass)
        .collect();
    let num = l2(&res, grid.dx());
    let den = l2(rho_t.values(), grid.dx());
    Ok(if den > 0.0 { num / den } else { num })
}

/// Density-weighted relative residual of
/// `∂ₜS + (∂ₓS)²/2m - (ħ²/2m)(√ρ)''/√ρ + V = 0`, normalized by the
/// density-weighted norm of `V`. Only the lobe around the density peak
/// contributes, down to the curvature floor.
pub fn hjm_residual(
    s_t: &RealField,
    s: &RealField,
    rho: &RealField,
    v: &RealField,
    mass: f64,
    hbar: f64,
    tol: &Tolerances,
) -> Result<f64> {
    check_grids(&[s_t.grid(), s.grid(), rho.grid(), v.grid()])?;
    let grid = *rho.grid();
    let curvature = quantum_curvature_main_lobe(rho, tol)?;
    let ds = s.first_derivative(DerivativeMethod::FivePoint);
    let c = hbar * hbar / (2.0 * mass);
    let mut num = vec![0.0; grid.len()];
    let mut den = vec![0.0; grid.len()];
    for i in curvature.valid.clone() {
        let r = s_t.values()[i] + ds.values()[i].powi(2) / (2.0 * mass) - c * curvature.values.values()[i]
            + v.values()[i];
        let w = rho.values()[i];
        num[i] = w * r * r;
        den[i] = w * v.values()[i].powi(2);
    }
    let num = integrate_samples(&num, grid.dx()).sqrt();
    let den = integrate_samples(&den, grid.dx()).sqrt();
    Ok(if den > 0.0 { num / den } else { num })
}

/// Residuals of both Madelung equations for one coherent state.
#[derive(Clone, Copy, Debug)]
pub struct MadelungResiduals {
    pub continuity: f64,
    pub hjm: f64,
}

/// Samples the coherent state through `point` (accelerating at the
/// classical force) at `t - h`, `t` and `t + h` and evaluates the continuity
/// and Hamilton-Jacobi-Madelung residuals against the assembled `V(x,t)`.
/// The phase is the analytic `S = Px - PQ/2`. `h` is the time the centre
/// needs to move `1e-6 Δq`, so the difference error stays negligible even
/// where the classical force is steep.
pub fn coherent_state_residuals(
    model: &PotentialModel,
    grid: &Grid,
    point: ClassicalPoint,
    tol: &Tolerances,
) -> Result<MadelungResiduals> {
    let m = model.mass();
    let f = crate::classical::classical_force(model, point.q);
    let dq = model.ground_width();
    let speed = (point.p.abs() / m)
        .max((f.abs() * dq / m).sqrt())
        .max(model.hbar() / (m * dq));
    let h = 1e-6 * dq / speed;
    // second-order Taylor step of the classical flow
    let at = |s: f64| ClassicalPoint::new(point.q + point.p / m * s + 0.5 * f / m * s * s, point.p + f * s, point.t + s);
    let density = |c: ClassicalPoint| -> Result<RealField> {
        let st = crate::gcs::displace_analytic(model, grid, c, tol)?;
        Ok(st.psi.density())
    };
    let phase = |c: ClassicalPoint| RealField::from_fn(*grid, |x| c.p * x - 0.5 * c.p * c.q);
    let (before, after) = (at(-h), at(h));
    let (rho_b, rho_a) = (density(before)?, density(after)?);
    let rho = density(point)?;
    let s = phase(point)?;
    let (s_b, s_a) = (phase(before)?, phase(after)?);
    let diff = |a: &RealField, b: &RealField| {
        RealField::new(
            *grid,
            a.values().iter().zip(b.values()).map(|(x, y)| (x - y) / (2.0 * h)).collect(),
        )
    };
    let rho_t = diff(&rho_a, &rho_b)?;
    let s_t = diff(&s_a, &s_b)?;
    let v = assemble_potential(model, grid, point, f, tol)?.v;
    Ok(MadelungResiduals {
        continuity: continuity_residual(&rho_t, &rho, &s, m)?,
        hjm: hjm_residual(&s_t, &s, &rho, &v, m, model.hbar(), tol)?,
    })
}
