//! Fredholm determinants on complex contours and the q-special functions
//! they are built from.
//!
//! Determinants use the Nyström rule `det(I + M)`,
//! `M_ij = w_j K(z_i, z_j) / (2πi)` with complex contour weights `w_j`, and
//! are accepted once a node doubling changes the value by less than 10⁻⁹.

mod contour;
mod det;
mod limits;
mod moments;
mod qlaplace;
mod qspecial;

pub use contour::{gauss_legendre, ray_truncation, Contour, Segment};
pub use det::{fredholm_det, fredholm_det_converged, Converged, DetValue, FnKernel, InnerContourKernel, KernelParams, KernelSpec, CAUCHY_TOL};
pub use limits::{
    distribution_moments, evaluate, f_goe, f_goe_sq, f_gue, f_gue_with_anchor, gaussian_via_fredholm, normal_cdf, tabulate,
    write_table_csv, CdfTable, DistValue, Distribution, Moments, TableRow, DEFAULT_DELTA,
};
pub use moments::{moment_ql, MomentValue};
pub use qlaplace::{q_laplace_finite_t, q_laplace_with, QLaplaceContours, QLaplaceValue};
pub use qspecial::{q_binomial, q_binomial_checked, q_pochhammer, q_pochhammer_inf, q_pochhammer_inf_real};

use thiserror::Error;

use crate::C64;

#[derive(Debug, Error, PartialEq)]
pub enum FredholmError {
    #[error("parameter {name} = {value} outside its domain")]
    Domain { name: &'static str, value: f64 },
    #[error("node doubling did not converge: last two values {prev}, {last}")]
    NoConvergence { prev: C64, last: C64 },
    #[error("Hadamard bound violated: |det| = {det:.6e} > {bound:.6e}")]
    Hadamard { det: f64, bound: f64 },
    #[error("kernel matrix has non-finite entries")]
    NonFinite,
    #[error("contour shift delta = {delta} puts the w contour too close to the pole at 0")]
    NearSingular { delta: f64 },
    #[error("grid must be sorted")]
    UnsortedGrid,
    #[error("table contains uncertified rows")]
    Uncertified,
    #[error("no contour parameters passed certification: {0}")]
    Certification(String),
    #[error("nested contours infeasible: {0}")]
    Nesting(String),
}
