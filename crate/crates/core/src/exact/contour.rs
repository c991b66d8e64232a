//! Contour-integral transition probabilities for `N ≤ 3`.
//!
//! With `E(z) = exp(−t(1−z)/(1−bz))`, the transition probability from `y`
//! (initial) to `x` (final) has two representations:
//!
//! * small circles around 0 (all other singularities outside):
//!   `∮ Φ_b(y; z) Π_i z_i^{−x_i−1} E(z_i) dz/(2πi)^N`;
//! * large circles (all singularities inside):
//!   `∮ Φ_{1/b}(x; z) Π_i z_i^{−y_i−1} E(1/z_i) dz/(2πi)^N`,
//!
//! where `Φ_q` is the Bethe eigenfunction built from `A_σ` with parameter
//! `q`. Both are evaluated by tensor trapezoid rules on circles with node
//! doubling.

use crate::fredholm::q_binomial;
use crate::C64;

use super::bethe::{pair, permutations, sign};
use super::{check_b, check_n, check_positions, ExactError};

/// Successive node doublings must agree to this tolerance.
pub const DOUBLING_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourTransition {
    /// Small-circle value (the primary result).
    pub value: f64,
    pub large_circle: f64,
    pub r_small: f64,
    pub r_large: f64,
    /// Nodes per circle at convergence of the small-circle rule.
    pub nodes: usize,
    /// Estimated rounding error of the two rules.
    pub roundoff: f64,
}

/// Largest radius keeping `1 − (1+b)z_i + b z_i z_j` away from zero on the
/// polydisc: `b r² + (1+b) r < 1`.
fn small_radius(n: usize, b: f64) -> f64 {
    if n == 1 {
        // |E(z)| ≤ 1 on the unit circle and 1/b lies outside it.
        return 1.0;
    }
    let r_max = (-(1.0 + b) + ((1.0 + b).powi(2) + 4.0 * b).sqrt()) / (2.0 * b);
    // Closer to r_max the pair poles slow the trapezoid rule down; further
    // in, z^{−x−1} amplifies rounding. 0.7 balances the two for N ≤ 3.
    0.7 * r_max
}

/// Smallest radius outside which `1 − (1+1/b)z_i + z_i z_j/b` cannot vanish:
/// `R² − (1+b)R − b > 0`.
fn large_radius(n: usize, b: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let r_min = ((1.0 + b) + ((1.0 + b).powi(2) + 4.0 * b).sqrt()) / 2.0;
    // The poles `z_j = (1+b) − b/z_i` of the pair factors sit just inside
    // r_min, so a circle hugging it converges slowly.
    1.5 * r_min
}

fn max_nodes(n: usize) -> usize {
    match n {
        1 => 1 << 14,
        2 => 1 << 10,
        _ => 256,
    }
}

fn circle(n: usize, r: f64) -> Vec<C64> {
    (0..n).map(|j| C64::from_polar(r, std::f64::consts::TAU * j as f64 / n as f64)).collect()
}

/// Tensor trapezoid rule of `Φ_q(p; z) Π_i z_i^{−s_i} g(z_i)` over circles of
/// radius `r`, normalised by `(2πi)^N` (so `dz/(2πi) = z dθ/2π`).
/// Returns `(value, Σ|terms|)`.
fn tensor_rule<G: Fn(C64) -> C64>(p: &[i64], s: &[i64], q: f64, g: G, r: f64, n: usize) -> (C64, f64) {
    let dim = p.len();
    let z = circle(n, r);
    let gz: Vec<C64> = z.iter().map(|&v| g(v)).collect();
    // pw_p[i][j] = z_j^{p_i}, pw_s[i][j] = z_j^{1 − s_i} (the extra z is dz/dθ).
    let pw_p: Vec<Vec<C64>> = p.iter().map(|&e| z.iter().map(|v| v.powi(e as i32)).collect()).collect();
    let pw_s: Vec<Vec<C64>> = s.iter().map(|&e| z.iter().map(|v| v.powi(1 - e as i32)).collect()).collect();
    let perms = permutations(dim);
    let signs: Vec<f64> = perms.iter().map(|p| sign(p)).collect();
    let pairs: Vec<C64> = (0..n * n).map(|k| pair(z[k / n], z[k % n], q)).collect();
    let mut idx = vec![0usize; dim];
    let mut total = C64::new(0.0, 0.0);
    let mut abs_total = 0.0;
    let count = n.pow(dim as u32);
    for _ in 0..count {
        let mut denom = C64::new(1.0, 0.0);
        for i in 0..dim {
            for j in i + 1..dim {
                denom *= pairs[idx[i] * n + idx[j]];
            }
        }
        let mut phi = C64::new(0.0, 0.0);
        for (perm, sg) in perms.iter().zip(&signs) {
            let mut a = C64::new(*sg, 0.0);
            for i in 0..dim {
                for j in i + 1..dim {
                    a *= pairs[idx[perm[i]] * n + idx[perm[j]]];
                }
                a *= pw_p[i][idx[perm[i]]];
            }
            phi += a;
        }
        let mut rest = C64::new(1.0, 0.0);
        for i in 0..dim {
            rest *= pw_s[i][idx[i]] * gz[idx[i]];
        }
        let term = phi / denom * rest;
        total += term;
        abs_total += term.norm();
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    let norm = (n as f64).powi(dim as i32);
    (total / norm, abs_total / norm)
}

fn doubled<F: Fn(usize) -> (C64, f64)>(eval: F, start: usize, max: usize) -> Result<(C64, f64, usize), ExactError> {
    let mut n = start.max(8);
    let (mut prev, _) = eval(n);
    loop {
        let n2 = 2 * n;
        let (v, a) = eval(n2);
        if (v - prev).norm() < DOUBLING_TOL + 1e3 * f64::EPSILON * a {
            return Ok((v, a, n2));
        }
        if n2 >= max {
            return Err(ExactError::NoConvergence { prev: prev.re, last: v.re });
        }
        prev = v;
        n = n2;
    }
}

/// `P(x(t) = x1 | x(0) = x0)` from both contour representations.
pub fn transition_pmf_contour(x0: &[u64], x1: &[u64], t: f64, b: f64, nodes: usize) -> Result<ContourTransition, ExactError> {
    check_b(b)?;
    check_n(x0, 3)?;
    check_positions(x0)?;
    check_positions(x1)?;
    if x0.len() != x1.len() {
        return Err(ExactError::InvalidPositions);
    }
    let dim = x0.len();
    let y: Vec<i64> = x0.iter().map(|&v| v as i64).collect();
    let x: Vec<i64> = x1.iter().map(|&v| v as i64).collect();
    let s_small: Vec<i64> = x.iter().map(|&v| v + 1).collect();
    let s_large: Vec<i64> = y.iter().map(|&v| v + 1).collect();
    let e_small = move |z: C64| (-t * (1.0 - z) / (1.0 - b * z)).exp();
    let e_large = move |z: C64| (-t * (z - 1.0) / (z - b)).exp();
    let (r1, r2) = (small_radius(dim, b), large_radius(dim, b));
    let (v1, a1, n1) = doubled(|n| tensor_rule(&y, &s_small, b, e_small, r1, n), nodes, max_nodes(dim))?;
    let (v2, a2, _) = doubled(|n| tensor_rule(&x, &s_large, 1.0 / b, e_large, r2, n), nodes, max_nodes(dim))?;
    let roundoff = 1e-15 * (a1 + a2);
    if (v1 - v2).norm() > 1e-9 + 10.0 * roundoff {
        return Err(ExactError::ContourMismatch { small: v1.re, large: v2.re, r_small: r1, r_large: r2 });
    }
    Ok(ContourTransition { value: v1.re, large_circle: v2.re, r_small: r1, r_large: r2, nodes: n1, roundoff })
}

/// `P(x_m(t) = x)` for initial data `y` (1-based `m`), summing over subsets
/// `S ∋` particle indices with `|S| = k ≥ m` of `k`-fold large-circle
/// integrals with prefactor
/// `(−1)^{m−1} b^{m(m−1)/2} b^{κ(S) − mk − k(k−1)/2} (k−1 choose m−1)_b`,
/// `κ(S) = Σ_{i∈S} i`.
pub fn mth_particle_pmf(y: &[u64], m: usize, x: u64, t: f64, b: f64) -> Result<f64, ExactError> {
    check_b(b)?;
    check_n(y, 3)?;
    check_positions(y)?;
    let n_part = y.len();
    if m == 0 || m > n_part {
        return Err(ExactError::Domain { name: "m", value: m as f64 });
    }
    let r = large_radius(n_part.max(2), b);
    let mut total = 0.0;
    for k in m..=n_part {
        for subset in subsets(n_part, k) {
            let kappa: usize = subset.iter().map(|i| i + 1).sum();
            let (mf, kf) = (m as f64, k as f64);
            let pref = (-1f64).powi(m as i32 - 1)
                * b.powf(mf * (mf - 1.0) / 2.0 + kappa as f64 - mf * kf - kf * (kf - 1.0) / 2.0)
                * q_binomial(k as i64 - 1, m as i64 - 1, b);
            let exps: Vec<i64> = subset.iter().map(|&i| x as i64 - y[i] as i64 - 1).collect();
            let (v, _, _) = doubled(|n| subset_rule(&exps, t, b, r, n), 32, 512)?;
            total += pref * v.re;
        }
    }
    Ok(total)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

fn subset_rule(exps: &[i64], t: f64, b: f64, r: f64, n: usize) -> (C64, f64) {
    let k = exps.len();
    let z = circle(n, r);
    let g: Vec<C64> = z.iter().map(|&v| (-t * (v - 1.0) / (v - b)).exp()).collect();
    let pw: Vec<Vec<C64>> = exps.iter().map(|&e| z.iter().map(|v| v.powi(e as i32 + 1)).collect()).collect();
    let mut idx = vec![0usize; k];
    let mut total = C64::new(0.0, 0.0);
    for _ in 0..n.pow(k as u32) {
        let mut f = C64::new(1.0, 0.0);
        let mut prod = C64::new(1.0, 0.0);
        for a in 0..k {
            let za = z[idx[a]];
            for c in a + 1..k {
                let zc = z[idx[c]];
                f *= (zc - za) / pair(za, zc, 1.0 / b);
            }
            prod *= za;
            f *= pw[a][idx[a]] * g[idx[a]] / (1.0 - za);
        }
        total += f * (1.0 - prod);
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    let norm = (n as f64).powi(k as i32);
    (total / norm, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::single_particle_pmf;

    #[test]
    fn one_particle_matches_compound_poisson() {
        for k in [0u64, 1, 3, 10] {
            let c = transition_pmf_contour(&[0], &[k], 1.0, 0.5, 64).unwrap();
            assert!((c.value - single_particle_pmf(1.0, k, 0.5)).abs() < 1e-12, "k={k}: {c:?}");
        }
    }

    #[test]
    fn backwards_move_is_impossible() {
        let c = transition_pmf_contour(&[3], &[1], 1.0, 0.5, 64).unwrap();
        assert!(c.value.abs() < 1e-12);
    }

    #[test]
    fn mth_particle_single() {
        for x in 0..6u64 {
            let v = mth_particle_pmf(&[0], 1, x, 0.7, 0.5).unwrap();
            assert!((v - single_particle_pmf(0.7, x, 0.5)).abs() < 1e-10, "x={x}");
        }
    }
}
