//! Nyström discretisation of Fredholm determinants.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::C64;

use super::contour::Contour;
use super::FredholmError;

/// Parameters a kernel was built from, for reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub s: Option<f64>,
    pub delta: Option<f64>,
    pub b: Option<f64>,
    pub rho: Option<f64>,
    pub x: Option<i64>,
    pub t: Option<f64>,
    pub zeta: Option<C64>,
}

/// A complex kernel `K(w, w′)` on an outer contour.
pub trait KernelSpec: Sync {
    fn name(&self) -> &str;

    fn params(&self) -> KernelParams {
        KernelParams::default()
    }

    fn eval(&self, w: C64, wp: C64) -> C64;

    /// Kernel matrix `K(z_i, z_j)`; kernels with an inner integral override
    /// this with a faster assembly.
    fn assemble(&self, nodes: &[C64]) -> DMatrix<C64> {
        DMatrix::from_fn(nodes.len(), nodes.len(), |i, j| self.eval(nodes[i], nodes[j]))
    }
}

/// Kernel given by a closure.
pub struct FnKernel<F> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(C64, C64) -> C64 + Sync> KernelSpec for FnKernel<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, w: C64, wp: C64) -> C64 {
        (self.f)(w, wp)
    }
}

/// `K(w, w′) = (1/2πi) ∫_V f(w, v) / (v − w′) dv` with `V` a quadrature
/// contour; assembled as a product of two dense matrices.
pub struct InnerContourKernel<F> {
    pub name: String,
    pub params: KernelParams,
    pub inner: Contour,
    pub f: F,
}

impl<F: Fn(C64, C64) -> C64 + Sync> KernelSpec for InnerContourKernel<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn params(&self) -> KernelParams {
        self.params.clone()
    }

    fn eval(&self, w: C64, wp: C64) -> C64 {
        let c = C64::new(0.0, TAU).inv();
        self.inner
            .nodes
            .iter()
            .zip(&self.inner.weights)
            .map(|(v, dv)| c * dv * (self.f)(w, *v) / (v - wp))
            .sum()
    }

    fn assemble(&self, nodes: &[C64]) -> DMatrix<C64> {
        let c = C64::new(0.0, TAU).inv();
        let (v, dv) = (&self.inner.nodes, &self.inner.weights);
        let h = DMatrix::from_fn(nodes.len(), v.len(), |i, k| c * dv[k] * (self.f)(nodes[i], v[k]));
        let cauchy = DMatrix::from_fn(v.len(), nodes.len(), |k, j| (v[k] - nodes[j]).inv());
        h * cauchy
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetValue {
    pub value: C64,
    /// `Π_i ‖row_i(I + M)‖₂`.
    pub hadamard_bound: f64,
    pub nodes: usize,
}

/// `det(I + M)` with `M_ij = w_j K(z_i, z_j) / (2πi)`.
///
/// Every evaluation is checked against Hadamard's inequality
/// `|det(I+M)| ≤ Π_i ‖row_i‖₂`.
pub fn fredholm_det(kernel: &dyn KernelSpec, contour: &Contour) -> Result<DetValue, FredholmError> {
    let k = kernel.assemble(&contour.nodes);
    nystrom_det(k, &contour.weights)
}

pub(crate) fn nystrom_det(mut m: DMatrix<C64>, weights: &[C64]) -> Result<DetValue, FredholmError> {
    let n = weights.len();
    let c = C64::new(0.0, TAU).inv();
    for j in 0..n {
        let wj = c * weights[j];
        for i in 0..n {
            m[(i, j)] *= wj;
        }
    }
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(FredholmError::NonFinite);
    }
    let log_bound: f64 = (0..n).map(|i| m.row(i).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().ln()).sum();
    let value = m.lu().determinant();
    let hadamard_bound = log_bound.exp();
    if value.norm().ln() > log_bound + 1e-9 {
        return Err(FredholmError::Hadamard { det: value.norm(), bound: hadamard_bound });
    }
    Ok(DetValue { value, hadamard_bound, nodes: n })
}

/// Result of a node-doubling sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Converged {
    pub value: C64,
    pub previous: C64,
    /// `|det_{2n} − det_n|` at acceptance.
    pub cauchy_gap: f64,
    pub nodes: usize,
    pub hadamard_bound: f64,
    pub doublings: usize,
}

/// Default Cauchy tolerance for node doubling.
pub const CAUCHY_TOL: f64 = 1e-9;

/// Evaluates `level ↦ det` for `level = 0, 1, …` (each level doubling the
/// nodes) until two successive values differ by less than `tol`.
pub fn fredholm_det_converged<F>(eval: F, tol: f64, max_doublings: usize) -> Result<Converged, FredholmError>
where
    F: Fn(usize) -> Result<DetValue, FredholmError>,
{
    let mut prev = eval(0)?;
    for level in 1..=max_doublings {
        let cur = eval(level)?;
        let gap = (cur.value - prev.value).norm();
        if gap < tol {
            return Ok(Converged {
                value: cur.value,
                previous: prev.value,
                cauchy_gap: gap,
                nodes: cur.nodes,
                hadamard_bound: cur.hadamard_bound,
                doublings: level,
            });
        }
        prev = cur;
        if level == max_doublings {
            return Err(FredholmError::NoConvergence { prev: prev.value, last: cur.value });
        }
    }
    Err(FredholmError::NoConvergence { prev: prev.value, last: prev.value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernel() {
        let c = Contour::circle(C64::new(0.0, 0.0), 1.0, 16);
        let k = FnKernel { name: "zero".into(), f: |_, _| C64::new(0.0, 0.0) };
        assert_eq!(fredholm_det(&k, &c).unwrap().value, C64::new(1.0, 0.0));
    }

    #[test]
    fn rank_one_identity() {
        // det(I + f⊗g) = 1 + (1/2πi)∮ f g.
        let f = |w: C64| (w * 0.7).exp();
        let g = |w: C64| 1.0 / (w - 0.2) + w * w;
        let c = Contour::circle(C64::new(0.1, 0.0), 0.8, 64);
        let k = FnKernel { name: "rank one".into(), f: move |w, wp| f(w) * g(wp) };
        let d = fredholm_det(&k, &c).unwrap().value;
        let direct = 1.0 + c.integrate(|z| f(z) * g(z)) / C64::new(0.0, TAU);
        assert!((d - direct).norm() < 1e-12);
        // Residue at 0.2: 1 + e^{0.14}.
        assert!((d - (1.0 + 0.14f64.exp())).norm() < 1e-12);
    }
}
