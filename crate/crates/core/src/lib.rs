//! Fast-forward driving of adiabatic quantum confinement.
//!
//! The crate covers two dynamical-confinement models, a harmonic trap with a
//! time-dependent frequency and a box with a moving wall. For each it builds
//! the regularization phase, the fast-forward state and the driving
//! potential. An independent Crank-Nicolson propagator checks that the
//! driven state really solves the time-dependent Schrödinger equation. The
//! energy cost of the acceleration is computed from truncated thermal traces
//! and from low-temperature expansions, and compared with the
//! inverse-engineering (Ermakov) protocol.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cost;
pub mod csv;
pub mod error;
pub mod fastforward;
pub mod field;
pub mod grid;
pub mod ie;
pub mod par;
pub mod propagator;
pub mod quadrature;
pub mod spectra;
pub mod trajectory;
pub mod tridiag;
pub mod units;

pub use error::{Error, Result};
pub use field::{inner_product, normalize, ComplexField, RealField};
pub use grid::Grid;
pub use spectra::{BoxModel, HarmonicModel, SpectralModel};
pub use trajectory::{ControlTrajectory, RampKind};
pub use units::UnitSystem;
