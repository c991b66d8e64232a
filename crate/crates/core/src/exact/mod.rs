//! Exact finite-N machinery and the oracles used to check it.
//!
//! * [`single_particle_pmf`] — compound-Poisson law of one particle;
//! * [`master_equation_pmf`] — forward equation of the generator on a
//!   truncated lattice, integrated with an adaptive Dormand–Prince stepper;
//! * [`window_height_pmf`] — exact law of `N_x(t)` from the occupation chain
//!   on `[0, x]` (used as an oracle for the moment and q-Laplace formulas);
//! * [`eigenfunction_residual`] — Bethe eigenfunctions against the generator;
//! * [`transition_pmf_contour`], [`mth_particle_pmf`] — contour-integral
//!   transition probabilities.

mod bethe;
mod contour;
mod master;
pub mod ode;
mod single_particle;
mod window;

pub use bethe::{bethe_phi, eigenfunction_residual, eigenvalue, BetheVector, Residual};
pub use contour::{mth_particle_pmf, transition_pmf_contour, ContourTransition};
pub use master::{master_equation_pmf, master_equation_pmf_tol, JointPmf, TruncatedGenerator};
pub use single_particle::single_particle_pmf;
pub use window::window_height_pmf;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("parameter {name} = {value} outside its domain")]
    Domain { name: &'static str, value: f64 },
    #[error("positions must be non-negative and strictly increasing")]
    InvalidPositions,
    #[error("supported particle numbers are 1..={max}, got {n}")]
    TooManyParticles { n: usize, max: usize },
    #[error("leaked mass {leaked:.3e} exceeds tolerance; try lattice bound {suggested}")]
    EnlargeBound { leaked: f64, suggested: usize },
    #[error("spectral variables violate the Bethe hypotheses: {0}")]
    Inadmissible(String),
    #[error("truncation bound {bound:.3e} exceeds tolerance {tol:.3e}")]
    Truncation { bound: f64, tol: f64 },
    #[error("contour representations disagree: small circle {small:.12e}, large circle {large:.12e} (radii {r_small}, {r_large})")]
    ContourMismatch { small: f64, large: f64, r_small: f64, r_large: f64 },
    #[error("quadrature did not converge: last two values {prev:.12e}, {last:.12e}")]
    NoConvergence { prev: f64, last: f64 },
    #[error("ODE integration failed: {0}")]
    Ode(String),
}

pub(crate) fn check_b(b: f64) -> Result<(), ExactError> {
    if b > 0.0 && b < 1.0 {
        Ok(())
    } else {
        Err(ExactError::Domain { name: "b", value: b })
    }
}

pub(crate) fn check_positions(x: &[u64]) -> Result<(), ExactError> {
    if x.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(ExactError::InvalidPositions)
    }
}

pub(crate) fn check_n(x: &[u64], max: usize) -> Result<(), ExactError> {
    if x.is_empty() || x.len() > max {
        Err(ExactError::TooManyParticles { n: x.len(), max })
    } else {
        Ok(())
    }
}
