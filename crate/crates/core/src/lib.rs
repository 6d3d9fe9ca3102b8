//! Matter-wave multi-plane diffraction: closed-form Gaussian path integrals,
//! history probabilities, Leggett–Garg and quantum path interference checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coeffs;
pub mod coherence;
pub mod constants;
pub mod csv;
pub mod error;
pub mod histories;
pub mod kernel;
pub mod lgi;
pub mod qpi;
pub mod quadrature;
pub mod setup;

pub use constants::Constants;
pub use error::{MpdError, Result};
pub use setup::{LgiGeometry, PathIndex, PhysicalSetup, PlaneSpec, QpiGeometry};
