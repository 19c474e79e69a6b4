//! Time stepping of `iħ∂ₜψ = -(ħ²/2m)∂ₓ²ψ + Vψ` and the two evolution
//! modes built on it.
//!
//! Crank-Nicolson uses the compact fourth-order (Numerov) second difference,
//! which keeps the solve tridiagonal and the step exactly unitary in the
//! discrete `ℓ²` norm. It is applied to `H - <H>` and the removed constant
//! is restored as an exact phase, so adding a constant to `V` changes only
//! the global phase, as it does in the continuum. Split-step is Strang
//! splitting with the kinetic factor applied in Fourier space.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{classical_force, integrate_trajectory_within, Trajectory};
use crate::diagnostics::{momentum_mean, DiagnosticsRecord, RecordInput, Recorder, TimeStencil};
use crate::error::{GcsError, Result};
use crate::gcs::{displace_analytic, ClassicalPoint, GcsState};
use crate::grid::{ComplexField, Grid, RealField, Spectral};
use crate::madelung::potential_field;
use crate::model::PotentialModel;
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    CrankNicolson,
    SplitStep,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Potential rebuilt every step from the classical trajectory.
    #[default]
    Feedback,
    /// Fixed model potential; the spreading baseline.
    Static,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    pub dt: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

fn default_stride() -> usize {
    1
}

impl PropagatorConfig {
    pub fn new(dt: f64, scheme: Scheme, mode: Mode, snapshot_stride: usize) -> Result<Self> {
        let c = PropagatorConfig {
            dt,
            scheme,
            mode,
            snapshot_stride,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(GcsError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.snapshot_stride == 0 {
            return Err(GcsError::Config("snapshot_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps reaching `t_final`, rounded to the nearest integer.
    /// The run ends at `steps * dt`.
    pub fn steps(&self, t_final: f64) -> Result<usize> {
        self.validate()?;
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(GcsError::Config(format!("final time must be positive, got {t_final}")));
        }
        let n = (t_final / self.dt).round();
        if n < 2.0 {
            return Err(GcsError::Config(format!(
                "T = {t_final} and dt = {} give fewer than two steps",
                self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Reusable single-step propagator for one grid, mass, `ħ` and `dt`.
pub struct Stepper {
    grid: Grid,
    mass: f64,
    hbar: f64,
    dt: f64,
    scheme: Scheme,
    spectral: Option<Spectral>,
    kinetic: Vec<Complex64>,
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: &Grid, mass: f64, hbar: f64, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(GcsError::Propagation(format!("dt must be positive, got {dt}")));
        }
        if !(mass > 0.0 && hbar > 0.0) {
            return Err(GcsError::Propagation(format!("mass {mass} and hbar {hbar} must be positive")));
        }
        let n = grid.len();
        let (spectral, kinetic) = match scheme {
            Scheme::SplitStep => {
                let s = Spectral::new(grid);
                let k = s
                    .wavenumbers()
                    .iter()
                    .map(|k| Complex64::from_polar(1.0, -hbar * k * k * dt / (2.0 * mass)))
                    .collect();
                (Some(s), k)
            }
            Scheme::CrankNicolson => (None, Vec::new()),
        };
        let zero = Complex64::new(0.0, 0.0);
        Ok(Stepper {
            grid: *grid,
            mass,
            hbar,
            dt,
            scheme,
            spectral,
            kinetic,
            lower: vec![zero; n],
            diag: vec![zero; n],
            upper: vec![zero; n],
            rhs: vec![zero; n],
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `psi` by one step in the potential `v`, in place.
    pub fn step(&mut self, psi: &mut [Complex64], v: &[f64]) -> Result<()> {
        let n = self.grid.len();
        if psi.len() != n || v.len() != n {
            return Err(GcsError::Propagation(format!(
                "expected {n} samples, got psi {} and V {}",
                psi.len(),
                v.len()
            )));
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(GcsError::Propagation(format!(
                "non-finite potential at x = {:.6e}",
                self.grid.x(i)
            )));
        }
        match self.scheme {
            Scheme::CrankNicolson => self.crank_nicolson(psi, v),
            Scheme::SplitStep => {
                self.split_step(psi, v);
                Ok(())
            }
        }
    }

    fn split_step(&self, psi: &mut [Complex64], v: &[f64]) {
        let half = -0.5 * self.dt / self.hbar;
        let kick = |psi: &mut [Complex64]| {
            for (c, &vi) in psi.iter_mut().zip(v) {
                *c *= Complex64::from_polar(1.0, half * vi);
            }
        };
        let spectral = self.spectral.as_ref().expect("split-step plans");
        kick(psi);
        spectral.forward(psi);
        for (c, k) in psi.iter_mut().zip(&self.kinetic) {
            *c *= k;
        }
        spectral.inverse(psi);
        kick(psi);
    }

    // (M + iτH')ψ⁺ = (M - iτH')ψ with M = tridiag(1, 10, 1)/12,
    // H' = -(ħ²/2m)Δ/h² + M diag(V), τ = dt/2ħ and ψ = 0 beyond the edges.
    fn crank_nicolson(&mut self, psi: &mut [Complex64], v: &[f64]) -> Result<()> {
        let n = psi.len();
        let h = self.grid.dx();
        let kappa = self.hbar * self.hbar / (2.0 * self.mass * h * h);
        // reference energy <H>: centring the spectrum on the packet's mean
        // energy removes the leading shape-changing part of the Cayley phase error
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let lap = if i > 0 { psi[i - 1] } else { Complex64::new(0.0, 0.0) }
                + if i + 1 < n { psi[i + 1] } else { Complex64::new(0.0, 0.0) }
                - 2.0 * psi[i];
            let w = psi[i].norm_sqr();
            num += w * v[i] - kappa * (psi[i].conj() * lap).re;
            den += w;
        }
        let v_ref = if den > 0.0 { num / den } else { 0.0 };
        let tau = self.dt / (2.0 * self.hbar);
        let (m_off, m_mid) = (1.0 / 12.0, 10.0 / 12.0);
        let off = |vj: f64| Complex64::new(0.0, tau * (-kappa + m_off * (vj - v_ref)));
        let mid = |vi: f64| Complex64::new(0.0, tau * (2.0 * kappa + m_mid * (vi - v_ref)));

        for i in 0..n {
            let mut d = (m_mid - mid(v[i])) * psi[i];
            if i > 0 {
                self.lower[i] = m_off + off(v[i - 1]);
                d += (m_off - off(v[i - 1])) * psi[i - 1];
            }
            if i + 1 < n {
                self.upper[i] = m_off + off(v[i + 1]);
                d += (m_off - off(v[i + 1])) * psi[i + 1];
            }
            self.diag[i] = m_mid + mid(v[i]);
            self.rhs[i] = d;
        }

        // Thomas forward sweep, reusing `upper` for c' and `rhs` for d'
        for i in 0..n {
            let pivot = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.lower[i] * self.upper[i - 1]
            };
            if !(pivot.norm() > 0.0 && pivot.is_finite()) {
                return Err(GcsError::Propagation(format!(
                    "tridiagonal solve broke down at x = {:.6e}",
                    self.grid.x(i)
                )));
            }
            if i > 0 {
                let prev = self.rhs[i - 1];
                self.rhs[i] -= self.lower[i] * prev;
            }
            self.upper[i] /= pivot;
            self.rhs[i] /= pivot;
        }
        psi[n - 1] = self.rhs[n - 1];
        for i in (0..n - 1).rev() {
            psi[i] = self.rhs[i] - self.upper[i] * psi[i + 1];
        }
        let gauge = Complex64::from_polar(1.0, -v_ref * self.dt / self.hbar);
        psi.iter_mut().for_each(|c| *c *= gauge);
        if psi.iter().any(|c| !c.is_finite()) {
            return Err(GcsError::Propagation("non-finite wavefunction after solve".into()));
        }
        Ok(())
    }
}

/// One step of `psi` in the potential `v`.
pub fn step(
    psi: &ComplexField,
    v: &RealField,
    mass: f64,
    hbar: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<ComplexField> {
    if psi.grid() != v.grid() {
        return Err(GcsError::Propagation("wavefunction and potential live on different grids".into()));
    }
    let mut stepper = Stepper::new(psi.grid(), mass, hbar, dt, scheme)?;
    let mut values = psi.values().to_vec();
    stepper.step(&mut values, v.values())?;
    ComplexField::new(*psi.grid(), values)
}

/// `Σ|ψ|² dx`, the quantity both schemes conserve to round-off.
pub fn lattice_norm(psi: &[Complex64], dx: f64) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx
}

/// An emitted snapshot. Immutable once handed to the sink.
#[derive(Clone, Debug)]
pub struct Frame {
    pub step: usize,
    pub psi: ComplexField,
    /// Classical label and `dP/dt`; `None` in static mode.
    pub point: Option<ClassicalPoint>,
    pub dpdt: Option<f64>,
    /// `V(x,t)` at the snapshot time.
    pub potential: RealField,
    pub record: DiagnosticsRecord,
}

/// Everything a finished evolution leaves behind. `records` has one entry
/// per step, including `t = 0`.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub records: Vec<DiagnosticsRecord>,
    pub trajectory: Option<Trajectory>,
    pub final_psi: ComplexField,
}

struct Node {
    step: usize,
    t: f64,
    psi: ComplexField,
    p_mean: f64,
    potential: RealField,
    point: Option<ClassicalPoint>,
    dpdt: Option<f64>,
}

/// Propagates the feedback loop from the coherent state labelled `point0`
/// up to `t_final`. The classical orbit is integrated and checked against
/// the grid before any quantum step is taken. Frames are passed to `sink`
/// every `snapshot_stride` steps and at the final step.
pub fn evolve_feedback(
    model: &PotentialModel,
    grid: &Grid,
    point0: ClassicalPoint,
    config: &PropagatorConfig,
    t_final: f64,
    tol: &Tolerances,
    sink: &mut dyn FnMut(Frame) -> Result<()>,
) -> Result<Evolution> {
    let steps = config.steps(t_final)?;
    let dt = config.dt;
    let trajectory = integrate_trajectory_within(
        model,
        point0.q,
        point0.p,
        dt,
        steps,
        (grid.x_min(), grid.x_max()),
    )?;
    let (q_lo, q_hi) = trajectory.q_range();
    for q in [q_lo, q_hi] {
        displace_analytic(model, grid, ClassicalPoint::new(q, 0.0, 0.0), tol)?;
    }
    let state0 = displace_analytic(model, grid, ClassicalPoint::new(point0.q, point0.p, 0.0), tol)?;

    let points = &trajectory.points;
    let node_potential = |j: usize| {
        let f = classical_force(model, points[j].q);
        potential_field(model, grid, points[j], f).map(|v| (v, f))
    };
    let step_potential = |j: usize| {
        let (a, b) = (points[j], points[j + 1]);
        let mid = ClassicalPoint::new(0.5 * (a.q + b.q), 0.5 * (a.p + b.p), a.t + 0.5 * dt);
        potential_field(model, grid, mid, classical_force(model, mid.q))
    };
    let make_node = |j: usize, psi: ComplexField| -> Result<Node> {
        let (potential, f) = node_potential(j)?;
        Ok(Node {
            step: j,
            t: points[j].t,
            p_mean: momentum_mean(&psi, model.hbar()),
            psi,
            potential,
            point: Some(points[j]),
            dpdt: Some(f),
        })
    };
    let records = run_loop(
        model,
        grid,
        config,
        steps,
        tol,
        state0.psi,
        &step_potential,
        &make_node,
        sink,
    )?;
    let final_psi = records.1;
    Ok(Evolution {
        records: records.0,
        trajectory: Some(trajectory),
        final_psi,
    })
}

/// Propagates `state0` in the fixed model potential. Records use the
/// packet's own centre as the reference displacement.
pub fn evolve_static(
    state0: &GcsState,
    config: &PropagatorConfig,
    t_final: f64,
    tol: &Tolerances,
    sink: &mut dyn FnMut(Frame) -> Result<()>,
) -> Result<Evolution> {
    let steps = config.steps(t_final)?;
    let model = state0.model;
    let grid = *state0.psi.grid();
    let v = RealField::from_fn(grid, |x| model.potential(x))?;
    let step_potential = |_: usize| Ok(v.clone());
    let make_node = |j: usize, psi: ComplexField| -> Result<Node> {
        Ok(Node {
            step: j,
            t: j as f64 * config.dt,
            p_mean: momentum_mean(&psi, model.hbar()),
            psi,
            potential: v.clone(),
            point: None,
            dpdt: None,
        })
    };
    let (records, final_psi) = run_loop(
        &model,
        &grid,
        config,
        steps,
        tol,
        state0.psi.clone(),
        &step_potential,
        &make_node,
        sink,
    )?;
    Ok(Evolution {
        records,
        trajectory: None,
        final_psi,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_loop(
    model: &PotentialModel,
    grid: &Grid,
    config: &PropagatorConfig,
    steps: usize,
    tol: &Tolerances,
    psi0: ComplexField,
    step_potential: &dyn Fn(usize) -> Result<RealField>,
    make_node: &dyn Fn(usize, ComplexField) -> Result<Node>,
    sink: &mut dyn FnMut(Frame) -> Result<()>,
) -> Result<(Vec<DiagnosticsRecord>, ComplexField)> {
    let recorder = Recorder::new(model, grid, tol)?;
    let mut stepper = Stepper::new(grid, model.mass(), model.hbar(), config.dt, config.scheme)?;
    let dx = grid.dx();
    let norm0 = lattice_norm(psi0.values(), dx);
    let mut buf = psi0.values().to_vec();
    let mut window: VecDeque<Node> = VecDeque::with_capacity(3);
    window.push_back(make_node(0, psi0)?);
    let mut records = Vec::with_capacity(steps + 1);

    let mut emit = |window: &VecDeque<Node>, target: usize, records: &mut Vec<DiagnosticsRecord>| -> Result<()> {
        let node = &window[target];
        let record = recorder.record(&RecordInput {
            t: node.t,
            stencil: TimeStencil {
                states: [&window[0].psi, &window[1].psi, &window[2].psi],
                p_means: [window[0].p_mean, window[1].p_mean, window[2].p_mean],
                target,
                dt: config.dt,
            },
            potential: &node.potential,
            q_ref: node.point.map(|p| p.q),
            force: node.dpdt,
        })?;
        if record.boundary_mass > tol.boundary_mass {
            return Err(GcsError::Coverage(format!(
                "boundary mass {:.3e} at t = {:.6e} (limit {:.1e})",
                record.boundary_mass, node.t, tol.boundary_mass
            )));
        }
        if node.step.is_multiple_of(config.snapshot_stride) || node.step == steps {
            sink(Frame {
                step: node.step,
                psi: node.psi.clone(),
                point: node.point,
                dpdt: node.dpdt,
                potential: node.potential.clone(),
                record: record,
            })?;
        }
        records.push(record);
        Ok(())
    };

    for k in 1..=steps {
        let v = step_potential(k - 1)?;
        stepper.step(&mut buf, v.values())?;
        let drift = (lattice_norm(&buf, dx) - norm0).abs();
        if drift > tol.unitarity {
            return Err(GcsError::Unitarity {
                t: k as f64 * config.dt,
                drift,
                limit: tol.unitarity,
            });
        }
        if window.len() == 3 {
            window.pop_front();
        }
        window.push_back(make_node(k, ComplexField::new(*grid, buf.clone())?)?);
        if k == 2 {
            emit(&window, 0, &mut records)?;
        }
        if k >= 2 {
            emit(&window, 1, &mut records)?;
        }
        if k == steps {
            emit(&window, 2, &mut records)?;
        }
    }
    let final_psi = window.pop_back().expect("at least two steps").psi;
    Ok((records, final_psi))
}
