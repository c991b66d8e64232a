//! Hall–Littlewood PushTASEP on the non-negative integers.
//!
//! The crate is split into five layers:
//!
//! * [`particle_system`] — exact event-driven dynamics, the left reservoir and
//!   the stochastic six-vertex companion chain;
//! * [`observables`] — scaling constants of the fluctuation theorem, KPZ
//!   scaling-theory quantities and empirical statistics;
//! * [`exact`] — finite-N oracles: compound-Poisson single particle law, the
//!   truncated master equation, Bethe eigenfunctions and contour formulas;
//! * [`fredholm`] — Nyström Fredholm determinants, the Tracy–Widom and
//!   Gaussian limit laws, the finite-time q-Laplace transform and q-moments;
//! * [`she`] — the Gärtner transform under weak noise scaling and the discrete
//!   heat kernel.
//!
//! [`validation`] bundles the end-to-end acceptance checks shared by the
//! integration tests and the command-line runner.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exact;
pub mod fredholm;
pub mod observables;
pub mod particle_system;
pub mod rng;
pub mod she;
pub mod validation;

pub use num_complex::Complex64 as C64;

/// Renders a float with 17 significant digits, enough to round-trip any f64.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}
