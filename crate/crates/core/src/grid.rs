//! Uniform 1-D lattice, sampled fields and the discrete calculus built on
//! them: spectral and five-point derivatives, quadrature, expectation values.

use std::cell::RefCell;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{GcsError, Result};

/// Smallest accepted number of grid points.
pub const MIN_POINTS: usize = 16;

/// Uniform grid on `[x_min, x_max]` with `n` points, both endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(GcsError::InvalidGrid("non-finite endpoints".into()));
        }
        if x_max <= x_min {
            return Err(GcsError::InvalidGrid(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n < MIN_POINTS {
            return Err(GcsError::InvalidGrid(format!(
                "n = {n} is below the minimum of {MIN_POINTS}"
            )));
        }
        Ok(Grid { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    /// Length of the periodic cell used by spectral operations (`n * dx`).
    pub fn period(&self) -> f64 {
        self.dx() * self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

/// Scalar types a [`Field`] can hold.
pub trait Sample:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn is_finite(&self) -> bool;
    fn to_complex(self) -> Complex64;
    fn from_complex(c: Complex64) -> Self;
    fn norm_sqr(&self) -> f64;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
    fn norm_sqr(&self) -> f64 {
        self * self
    }
}

impl Sample for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn is_finite(&self) -> bool {
        Complex64::is_finite(*self)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(c: Complex64) -> Self {
        c
    }
    fn norm_sqr(&self) -> f64 {
        Complex64::norm_sqr(self)
    }
}

/// Function samples on a [`Grid`]. All entries are finite by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

/// Choice of discrete second/first derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMethod {
    /// FFT on the periodic embedding; requires fields decayed at both edges.
    Spectral,
    /// Fourth-order finite differences with one-sided stencils at the edges.
    FivePoint,
}

impl<T: Sample> Field<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GcsError::InvalidField(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GcsError::InvalidField(format!(
                "non-finite sample at index {i} (x = {:.6e})",
                grid.x(i)
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> T) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Result<Field<U>> {
        Field::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `∫ |f|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        integrate_samples(
            &self.values.iter().map(Sample::norm_sqr).collect::<Vec<_>>(),
            self.grid.dx(),
        )
    }

    pub fn second_derivative(&self, method: DerivativeMethod) -> Field<T> {
        let values = match method {
            DerivativeMethod::Spectral => Spectral::new(&self.grid).derivative(&self.values, 2),
            DerivativeMethod::FivePoint => five_point_second(&self.values, self.grid.dx()),
        };
        Field {
            grid: self.grid,
            values,
        }
    }

    pub fn first_derivative(&self, method: DerivativeMethod) -> Field<T> {
        let values = match method {
            DerivativeMethod::Spectral => Spectral::new(&self.grid).derivative(&self.values, 1),
            DerivativeMethod::FivePoint => five_point_first(&self.values, self.grid.dx()),
        };
        Field {
            grid: self.grid,
            values,
        }
    }

    /// Quintic (six-point Lagrange) interpolation at `x`; zero outside the grid.
    pub fn interpolate(&self, x: f64) -> T {
        interpolate_quintic(&self.values, &self.grid, x)
    }
}

impl ComplexField {
    pub fn density(&self) -> RealField {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|c| c.norm_sqr()).collect(),
        }
    }
}

impl RealField {
    pub fn to_complex(&self) -> ComplexField {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

pub fn second_derivative<T: Sample>(f: &Field<T>, method: DerivativeMethod) -> Field<T> {
    f.second_derivative(method)
}

/// Composite Simpson for an odd number of points, trapezoid otherwise.
pub fn integrate(f: &RealField) -> f64 {
    integrate_samples(&f.values, f.grid.dx())
}

pub(crate) fn integrate_samples(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n % 2 == 1 {
        let interior: f64 = values[1..n - 1]
            .iter()
            .enumerate()
            .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
            .sum();
        dx / 3.0 * (values[0] + values[n - 1] + interior)
    } else {
        let interior: f64 = values[1..n - 1].iter().sum();
        dx * (0.5 * (values[0] + values[n - 1]) + interior)
    }
}

/// Observable whose expectation value [`expectation`] computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    X,
    X2,
    P,
    P2,
}

/// Expectation of `x`, `x²`, `p` or `p²` in a normalized state.
///
/// Momentum moments use the spectral first derivative:
/// `<p> = ħ Im ∫ψ*ψ' dx`, `<p²> = ħ² ∫|ψ'|² dx`.
pub fn expectation(
    psi: &ComplexField,
    observable: Observable,
    hbar: f64,
    norm_tolerance: f64,
) -> Result<f64> {
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > norm_tolerance {
        return Err(GcsError::NotNormalized { norm });
    }
    Ok(expectation_unchecked(psi, observable, hbar))
}

pub(crate) fn expectation_unchecked(psi: &ComplexField, observable: Observable, hbar: f64) -> f64 {
    let grid = psi.grid;
    let dx = grid.dx();
    let samples: Vec<f64> = match observable {
        Observable::X => psi
            .values
            .iter()
            .enumerate()
            .map(|(i, c)| grid.x(i) * c.norm_sqr())
            .collect(),
        Observable::X2 => psi
            .values
            .iter()
            .enumerate()
            .map(|(i, c)| grid.x(i).powi(2) * c.norm_sqr())
            .collect(),
        Observable::P => {
            let d = psi.first_derivative(DerivativeMethod::Spectral);
            psi.values
                .iter()
                .zip(&d.values)
                .map(|(c, dc)| hbar * (c.conj() * dc).im)
                .collect()
        }
        Observable::P2 => {
            let d = psi.first_derivative(DerivativeMethod::Spectral);
            d.values.iter().map(|dc| hbar * hbar * dc.norm_sqr()).collect()
        }
    };
    integrate_samples(&samples, dx)
}

/// Probability within `points` samples of each edge, summed over both edges.
pub fn boundary_mass(rho: &[f64], dx: f64, points: usize) -> f64 {
    let k = points.min(rho.len() / 2);
    let left: f64 = rho[..k].iter().sum();
    let right: f64 = rho[rho.len() - k..].iter().sum();
    (left + right) * dx
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// FFT plans and wavenumbers for one grid. Plans are cached per thread, so
/// constructing this repeatedly is cheap.
#[derive(Clone)]
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
    nyquist: Option<usize>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.len();
        let (forward, inverse) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        });
        let base = 2.0 * std::f64::consts::PI / grid.period();
        let wavenumbers = (0..n)
            .map(|j| {
                let j = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                j * base
            })
            .collect();
        Spectral {
            forward,
            inverse,
            wavenumbers,
            nyquist: n.is_multiple_of(2).then_some(n / 2),
        }
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse transform including the `1/n` normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    /// Applies the Fourier multiplier `m(k)` to `values`.
    pub fn apply<T: Sample>(&self, values: &[T], m: impl Fn(usize, f64) -> Complex64) -> Vec<T> {
        let mut buf: Vec<Complex64> = values.iter().map(|v| v.to_complex()).collect();
        self.forward(&mut buf);
        for (j, (c, &k)) in buf.iter_mut().zip(&self.wavenumbers).enumerate() {
            *c *= m(j, k);
        }
        self.inverse(&mut buf);
        buf.into_iter().map(T::from_complex).collect()
    }

    /// `d^order f / dx^order` on the periodic embedding.
    pub fn derivative<T: Sample>(&self, values: &[T], order: u32) -> Vec<T> {
        let odd = order % 2 == 1;
        self.apply(values, |j, k| {
            if odd && Some(j) == self.nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k).powu(order)
            }
        })
    }

    /// `f(x - shift)` by a Fourier phase ramp. The Nyquist mode gets the real
    /// factor `cos(k shift)` so real fields stay real.
    pub fn translate<T: Sample>(&self, values: &[T], shift: f64) -> Vec<T> {
        self.apply(values, |j, k| {
            if Some(j) == self.nyquist {
                Complex64::new((k * shift).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -k * shift)
            }
        })
    }
}

fn five_point_second<T: Sample>(f: &[T], dx: f64) -> Vec<T> {
    let n = f.len();
    let s = 1.0 / (12.0 * dx * dx);
    let mut out = vec![T::zero(); n];
    for i in 2..n - 2 {
        out[i] = (f[i - 1] * 16.0 + f[i + 1] * 16.0 - f[i - 2] - f[i + 2] - f[i] * 30.0) * s;
    }
    let edge0 = |g: &dyn Fn(usize) -> T| {
        (g(0) * 45.0 - g(1) * 154.0 + g(2) * 214.0 - g(3) * 156.0 + g(4) * 61.0 - g(5) * 10.0) * s
    };
    let edge1 = |g: &dyn Fn(usize) -> T| {
        (g(0) * 10.0 - g(1) * 15.0 - g(2) * 4.0 + g(3) * 14.0 - g(4) * 6.0 + g(5)) * s
    };
    out[0] = edge0(&|j| f[j]);
    out[1] = edge1(&|j| f[j]);
    out[n - 1] = edge0(&|j| f[n - 1 - j]);
    out[n - 2] = edge1(&|j| f[n - 1 - j]);
    out
}

fn five_point_first<T: Sample>(f: &[T], dx: f64) -> Vec<T> {
    let n = f.len();
    let s = 1.0 / (12.0 * dx);
    let mut out = vec![T::zero(); n];
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * s;
    }
    let edge0 =
        |g: &dyn Fn(usize) -> T| (g(1) * 48.0 - g(0) * 25.0 - g(2) * 36.0 + g(3) * 16.0 - g(4) * 3.0) * s;
    let edge1 =
        |g: &dyn Fn(usize) -> T| (g(2) * 18.0 - g(0) * 3.0 - g(1) * 10.0 - g(3) * 6.0 + g(4)) * s;
    out[0] = edge0(&|j| f[j]);
    out[1] = edge1(&|j| f[j]);
    // mirrored stencils pick up a sign for odd derivatives
    out[n - 1] = edge0(&|j| f[n - 1 - j]) * -1.0;
    out[n - 2] = edge1(&|j| f[n - 1 - j]) * -1.0;
    out
}

pub(crate) fn interpolate_quintic<T: Sample>(values: &[T], grid: &Grid, x: f64) -> T {
    let n = values.len();
    if !grid.contains(x) {
        return T::zero();
    }
    let u = (x - grid.x_min()) / grid.dx();
    let base = (u.floor() as isize - 2).clamp(0, n as isize - 6) as usize;
    let mut acc = T::zero();
    for j in 0..6 {
        let mut w = 1.0;
        let xj = (base + j) as f64;
        for m in 0..6 {
            if m != j {
                let xm = (base + m) as f64;
                w *= (u - xm) / (xj - xm);
            }
        }
        acc = acc + values[base + j] * w;
    }
    acc
}
