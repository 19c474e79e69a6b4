//! Generalized coherent states of the displacement operator in one
//! dimension.
//!
//! A coherent state is built by displacing the exact ground state of a
//! potential in phase space. Its density keeps the ground-state shape and
//! rides on a classical trajectory; the Schrödinger potential it obeys is
//! rebuilt from the Madelung equations and depends on that trajectory. This
//! crate assembles that state-dependent potential, extracts the classical
//! potential steering the packet centre, and propagates the coupled
//! feedback loop to check that the packet does not spread.
//!
//! Modules, bottom-up:
//!
//! - [`grid`]: uniform lattice, fields, derivatives, quadrature, expectations
//! - [`model`]: harmonic and Morse wells with analytic ground states
//! - [`gcs`]: displacement operator and polar decomposition
//! - [`madelung`]: quantum curvature, time-dependent potential, residuals
//! - [`classical`]: linear-coefficient extraction, `V_class`, trajectories
//! - [`propagator`]: Crank-Nicolson and split-step propagation, feedback and
//!   static modes
//! - [`diagnostics`]: per-step observables and coherence measures
//! - [`app`]: run configuration, CSV/SVG output, the `run`,
//!   `extract-vclass` and `verify` commands

pub mod app;
pub mod classical;
pub mod diagnostics;
pub mod error;
pub mod gcs;
pub mod grid;
pub mod madelung;
pub mod model;
pub mod propagator;
pub mod tolerance;

pub use error::{GcsError, Result};
pub use gcs::{ClassicalPoint, GcsState};
pub use grid::{ComplexField, Grid, RealField};
pub use model::{GroundStateInfo, PotentialModel};
pub use tolerance::Tolerances;
