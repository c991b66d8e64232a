//! q-moments `E[b^{L N_x(t)}]` as `L`-fold nested contour integrals.
//!
//! With `α = (1−ρ)/ρ`,
//!
//! `E[b^{L N_x}] = b^{L(L−1)/2} ∮…∮ Π_{A<B} (u_A − u_B)/(u_A − b u_B)
//!   Π_A e^{t u_A/b} ((1+u_A)/(1+u_A/b))^{x+1} / (u_A (1 − α u_A/b)) du_A/(2πi)`,
//!
//! where the contour of `u_A` contains 0, −b and `b·C_{A+1}` but not `b/α`.
//! Circles are placed with geometrically growing right and left edges and
//! sampled with nodes clustered toward the right edge, where the nearest
//! singularities sit.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::C64;

use super::FredholmError;

const MOMENT_TOL: f64 = 1e-10;
/// Node clustering strength `a` in `θ = φ − a sin φ` (nodes bunch at θ = 0).
const CLUSTER: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub value: f64,
    pub imag: f64,
    pub cauchy_gap: f64,
    pub nodes_per_circle: usize,
}

struct Circle {
    nodes: Vec<C64>,
    /// `dz/(2πi)` weights.
    weights: Vec<C64>,
}

fn circle(left: f64, right: f64, n: usize, cl: f64) -> Circle {
    let c = 0.5 * (left + right);
    let r = 0.5 * (right - left);
    let (nodes, weights) = (0..n)
        .map(|k| {
            let phi = TAU * k as f64 / n as f64;
            let theta = phi - cl * phi.sin();
            let e = C64::from_polar(1.0, theta);
            (c + r * e, r * e * (1.0 - cl * phi.cos()) / n as f64)
        })
        .unzip();
    Circle { nodes, weights }
}

/// Right and left edges of the `L` circles.
fn edges(b: f64, alpha: f64, l: usize) -> Result<Vec<(f64, f64)>, FredholmError> {
    let cap = if alpha > 0.0 { (0.8 * b / alpha).min(2.0) } else { 2.0 };
    let q = if l > 1 { 1.3 / b } else { 1.0 };
    let out: Vec<(f64, f64)> = (0..l)
        .map(|a| (-1.6 * b * q.powi(a as i32), cap * q.powi(a as i32 + 1 - l as i32)))
        .collect();
    if out[0].1 < 1e-4 {
        return Err(FredholmError::Nesting(format!("innermost right edge {:.3e} too close to 0", out[0].1)));
    }
    Ok(out)
}

/// Returns the quadrature sum and the sum of absolute terms (roundoff scale).
fn integrate(x1: i32, t: f64, b: f64, alpha: f64, circles: &[Circle]) -> (C64, f64) {
    let l = circles.len();
    // Per-circle single-variable factor times weight.
    let single: Vec<Vec<C64>> = circles
        .iter()
        .map(|c| {
            c.nodes
                .iter()
                .zip(&c.weights)
                .map(|(&u, &w)| {
                    (t * u / b).exp() * ((1.0 + u) / (1.0 + u / b)).powi(x1) / (u * (1.0 - alpha * u / b)) * w
                })
                .collect()
        })
        .collect();
    let n = circles[0].nodes.len();
    let pref = b.powi((l * (l - 1) / 2) as i32);
    // The outermost variable is split across threads; the rest run as an
    // odometer over `n^{L−1}` index tuples.
    let (total, abs) = (0..n)
        .into_par_iter()
        .map(|top| {
            let mut idx = vec![0usize; l];
            idx[l - 1] = top;
            let mut total = C64::new(0.0, 0.0);
            let mut abs = 0.0;
            loop {
                let mut f = C64::new(1.0, 0.0);
                for a in 0..l {
                    let ua = circles[a].nodes[idx[a]];
                    f *= single[a][idx[a]];
                    for bb in a + 1..l {
                        let ub = circles[bb].nodes[idx[bb]];
                        f *= (ua - ub) / (ua - b * ub);
                    }
                }
                total += f;
                abs += f.norm();
                let mut k = 0;
                loop {
                    if k + 1 >= l {
                        return (total, abs);
                    }
                    idx[k] += 1;
                    if idx[k] < n {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        })
        .reduce(|| (C64::new(0.0, 0.0), 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    (total * pref, abs * pref)
}

/// `E[b^{L N_x(t)}]` under step-Bernoulli(ρ) data, with `L ≥ 1`.
pub fn moment_ql(x: u64, t: f64, b: f64, rho: f64, l: usize) -> Result<MomentValue, FredholmError> {
    if !(b > 0.0 && b < 1.0) {
        return Err(FredholmError::Domain { name: "b", value: b });
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(FredholmError::Domain { name: "rho", value: rho });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FredholmError::Domain { name: "t", value: t });
    }
    if l == 0 {
        return Err(FredholmError::Domain { name: "L", value: 0.0 });
    }
    let alpha = (1.0 - rho) / rho;
    let e = edges(b, alpha, l)?;
    let max_nodes = match l {
        1 => 1 << 14,
        2 => 1 << 10,
        3 => 512,
        _ => 64,
    };
    let x1 = x as i32 + 1;
    // A single circle has its nearest singularity (−b) on the left; nested
    // circles are limited by the poles just right of their right edges.
    let cluster = if l > 1 { CLUSTER } else { 0.0 };
    let eval = |n: usize| {
        let circles: Vec<Circle> = e.iter().map(|&(lft, rgt)| circle(lft, rgt, n, cluster)).collect();
        integrate(x1, t, b, alpha, &circles)
    };
    let mut n = 32;
    let (mut prev, _) = eval(n);
    let mut older = prev;
    while 2 * n <= max_nodes {
        n *= 2;
        let (cur, abs) = eval(n);
        let gap = (cur - prev).norm();
        if gap < MOMENT_TOL * cur.norm() + 1e3 * f64::EPSILON * abs {
            return Ok(MomentValue { value: cur.re, imag: cur.im, cauchy_gap: gap, nodes_per_circle: n });
        }
        older = prev;
        prev = cur;
    }
    Err(FredholmError::NoConvergence { prev: older, last: prev })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_zero_step() {
        let b = 0.5;
        for l in 1..=3 {
            let v = moment_ql(3, 0.0, b, 1.0, l).unwrap();
            let exact = b.powi(4 * l as i32);
            assert!((v.value - exact).abs() < 1e-12, "L={l}: {v:?} vs {exact}");
        }
    }

    #[test]
    fn matches_window_chain() {
        let b: f64 = 0.5;
        for rho in [1.0, 0.5] {
            let law = crate::exact::window_height_pmf(5, 1.0, b, rho).unwrap();
            for l in 1..=3 {
                let exact: f64 = law.iter().enumerate().map(|(n, p)| p * b.powi((l * n) as i32)).sum();
                let v = moment_ql(5, 1.0, b, rho, l).unwrap();
                assert!((v.value - exact).abs() < 1e-9 * exact.max(1e-3), "rho={rho} L={l}: {v:?} vs {exact}");
            }
        }
    }
}
