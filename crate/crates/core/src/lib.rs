//! Solver and verification toolkit for the one-dimensional two-layer
//! Green–Naghdi internal-wave model under a rigid lid, with medium-amplitude
//! bottom topography.
//!
//! The unknowns are the interface deformation `zeta` and the shear velocity
//! `v = u2 - gamma * u1`. The crate is organised bottom-up:
//!
//! * [`regime`] – dimensionless parameters, regime membership and the closed-form
//!   model coefficients.
//! * [`grid`] – periodic grid, finite differences, quadrature and Sobolev-scale
//!   Fourier multipliers.
//! * [`fields`] – state, bathymetry and the pointwise nonlinear coefficient fields.
//! * [`elliptic`] – the symmetric elliptic operator and the Green–Naghdi operators.
//! * [`dynamics`] – tendencies (primitive and quasilinear forms), RK4 and simulation.
//! * [`diagnostics`] – condition monitors, symmetrizer energies and growth bounds.
//! * [`orders`] – log-log order studies (expansion residuals and convergence).
//! * [`scenario`], [`config`], [`cli`] – scenario description, configuration
//!   files and the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod fields;
pub mod grid;
pub mod orders;
pub mod regime;
pub mod scenario;

pub use error::{Error, Result};
pub use grid::{Field, PeriodicGrid};
pub use regime::{ModelCoefficients, RegimeParams};
