//! Finite-time q-Laplace transform `E[1/(ζ b^{N_x(t)}; b)_∞]` as a Fredholm
//! determinant.
//!
//! For step-Bernoulli(ρ) data, `α = (1−ρ)/ρ` and
//! `g(z) = (1 + z/b)^{−(x+1)} exp(tz/(b(1−b))) / (αz/b; b)_∞`,
//! the transform equals `det(I + K)` on a positively oriented circle `C`
//! around 0 and −b, with
//!
//! `K(w, w′) = (1/2πi) ∫_D π/sin(πs) · (−ζ)^s · g(w)/g(bˢw) · 1/(bˢw − w′) ds`
//!
//! and `D` the five-piece contour `R − i∞ → R − id → δ − id → δ + id →
//! R + id → R + i∞`. The exponent is `x + 1` because sites here start at 0.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::C64;

use super::contour::{ray_truncation, Contour};
use super::det::{nystrom_det, CAUCHY_TOL};
use super::qspecial::q_pochhammer_inf;
use super::FredholmError;

/// Contour parameters: circle `C` (center, radius) and `D_{R,d,δ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QLaplaceContours {
    pub center: f64,
    pub radius: f64,
    pub big_r: f64,
    pub d: f64,
    pub delta: f64,
}

impl QLaplaceContours {
    /// Scaled from the `b = 1/2` choice (center −0.3, radius 0.45).
    pub fn default_for(b: f64) -> Self {
        QLaplaceContours { center: -0.6 * b, radius: 0.9 * b, big_r: 8.0, d: 0.4, delta: 0.9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QLaplaceValue {
    pub value: C64,
    pub cauchy_gap: f64,
    pub nodes: usize,
    pub contours: QLaplaceContours,
    /// Observed `inf |bˢw − w′|` over quadrature nodes (condition A).
    pub min_separation: f64,
    /// Observed `sup |g(w)/g(bˢw)|` over quadrature nodes (condition B).
    pub sup_ratio: f64,
}

const MAX_LEVEL: usize = 2;

struct Setup {
    x1: i32,
    t: f64,
    b: f64,
    alpha: f64,
    log_mz: C64,
}

impl Setup {
    /// `g(w)/g(bˢw)` given `bˢ`.
    fn ratio(&self, w: C64, bs: C64) -> C64 {
        let bw = bs * w;
        let lin = ((1.0 + bw / self.b) / (1.0 + w / self.b)).powi(self.x1);
        let ex = (self.t * (w - bw) / (self.b * (1.0 - self.b))).exp();
        if self.alpha == 0.0 {
            return lin * ex;
        }
        let num = q_pochhammer_inf(self.alpha * bw / self.b, self.b).map(|v| v.0).unwrap_or(C64::new(f64::NAN, 0.0));
        let den = q_pochhammer_inf(self.alpha * w / self.b, self.b).map(|v| v.0).unwrap_or(C64::new(f64::NAN, 0.0));
        lin * ex * num / den
    }

    /// `π/sin(πs) · (−ζ)^s`.
    fn s_factor(&self, s: C64) -> C64 {
        PI / (PI * s).sin() * (s * self.log_mz).exp()
    }
}

fn d_contour(setup: &Setup, c: &QLaplaceContours, w_probe: &[C64], order: usize) -> Contour {
    let log_mag = |s: C64| -> f64 {
        let bs = (s * setup.b.ln()).exp();
        w_probe
            .iter()
            .map(|&w| (setup.s_factor(s) * setup.ratio(w, bs)).norm().ln())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let top = c.d + ray_truncation(|y| log_mag(C64::new(c.big_r, c.d + y)), 0.25, 400.0);
    let bottom = c.d + ray_truncation(|y| log_mag(C64::new(c.big_r, -c.d - y)), 0.25, 400.0);
    // Panels are graded toward the poles of π/sin(πs) nearest each piece:
    // s = 1 beside the vertical segment, the integers along the horizontal
    // ones and s = R at the foot of each ray.
    let near = (1.0 - c.delta).min(c.delta).min(c.d);
    let mid = C64::new(c.delta, 0.0);
    let lo = C64::new(c.delta, -c.d);
    let hi = C64::new(c.delta, c.d);
    let r_lo = C64::new(c.big_r, -c.d);
    let r_hi = C64::new(c.big_r, c.d);
    let horizontal = |from: C64, to: C64| {
        let len = (to - from).norm();
        Contour::line(from, to, (len / c.d).ceil().max(1.0) as usize, order)
    };
    Contour::graded_line(r_lo, C64::new(c.big_r, -bottom), c.d, 2.0, order)
        .reversed()
        .join(horizontal(r_lo, lo))
        .join(Contour::graded_line(mid, lo, near, c.d, order).reversed())
        .join(Contour::graded_line(mid, hi, near, c.d, order))
        .join(horizontal(hi, r_hi))
        .join(Contour::graded_line(r_hi, C64::new(c.big_r, top), c.d, 2.0, order))
}

struct Level {
    det: super::det::DetValue,
    min_sep: f64,
    sup_ratio: f64,
}

fn level(setup: &Setup, c: &QLaplaceContours, lvl: usize) -> Result<Level, FredholmError> {
    let nw = 64 << lvl;
    let order = 12 + 8 * lvl;
    let outer = Contour::circle(C64::new(c.center, 0.0), c.radius, nw);
    let probe: Vec<C64> = outer.nodes.iter().step_by((nw / 8).max(1)).copied().collect();
    let dc = d_contour(setup, c, &probe, order);
    let ln_b = setup.b.ln();
    let inv2pii = C64::new(0.0, TAU).inv();
    let bs: Vec<C64> = dc.nodes.iter().map(|s| (s * ln_b).exp()).collect();
    let sf: Vec<C64> = dc.nodes.iter().zip(&dc.weights).map(|(s, ds)| setup.s_factor(*s) * ds * inv2pii).collect();
    let n = outer.len();
    let mut k = DMatrix::<C64>::zeros(n, n);
    let mut min_sep = f64::INFINITY;
    let mut sup_ratio: f64 = 0.0;
    for i in 0..n {
        let w = outer.nodes[i];
        for (q, bq) in bs.iter().enumerate() {
            let ratio = setup.ratio(w, *bq);
            sup_ratio = sup_ratio.max(ratio.norm());
            let h = sf[q] * ratio;
            let pole = bq * w;
            for j in 0..n {
                let diff = pole - outer.nodes[j];
                min_sep = min_sep.min(diff.norm());
                k[(i, j)] += h / diff;
            }
        }
    }
    let det = nystrom_det(k, &outer.weights)?;
    Ok(Level { det, min_sep, sup_ratio })
}

fn certify(c: &QLaplaceContours, b: f64, alpha: f64) -> Result<(), String> {
    let contains = |z: f64| (z - c.center).abs() < c.radius;
    if !(contains(0.0) && contains(-b)) {
        return Err("C must contain 0 and −b".into());
    }
    // bC strictly inside C.
    if (b * c.center - c.center).abs() + b * c.radius >= c.radius {
        return Err("bC is not inside C".into());
    }
    if alpha > 0.0 && (b / alpha - c.center).abs() <= c.radius {
        return Err("C encloses b/α".into());
    }
    if !(c.delta > 0.0 && c.delta < 1.0 && c.d > 0.0 && c.big_r > 1.0) {
        return Err("D parameters out of range".into());
    }
    Ok(())
}

/// Evaluates the transform with explicit contour parameters.
pub fn q_laplace_with(x: u64, t: f64, b: f64, rho: f64, zeta: C64, c: QLaplaceContours) -> Result<QLaplaceValue, FredholmError> {
    if !(b > 0.0 && b < 1.0) {
        return Err(FredholmError::Domain { name: "b", value: b });
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(FredholmError::Domain { name: "rho", value: rho });
    }
    if zeta.im == 0.0 && zeta.re >= 0.0 {
        return Err(FredholmError::Domain { name: "zeta", value: zeta.re });
    }
    let alpha = (1.0 - rho) / rho;
    certify(&c, b, alpha).map_err(FredholmError::Certification)?;
    let setup = Setup { x1: x as i32 + 1, t, b, alpha, log_mz: (-zeta).ln() };
    let mut prev = level(&setup, &c, 0)?;
    for lvl in 1..=MAX_LEVEL {
        let cur = level(&setup, &c, lvl)?;
        if cur.min_sep <= 1e-3 || !(cur.sup_ratio < 1e12) {
            return Err(FredholmError::Certification(format!(
                "min separation {:.3e}, sup ratio {:.3e}",
                cur.min_sep, cur.sup_ratio
            )));
        }
        let gap = (cur.det.value - prev.det.value).norm();
        if gap < CAUCHY_TOL {
            return Ok(QLaplaceValue {
                value: cur.det.value,
                cauchy_gap: gap,
                nodes: cur.det.nodes,
                contours: c,
                min_separation: cur.min_sep,
                sup_ratio: cur.sup_ratio,
            });
        }
        if lvl == MAX_LEVEL {
            return Err(FredholmError::NoConvergence { prev: prev.det.value, last: cur.det.value });
        }
        prev = cur;
    }
    unreachable!()
}

/// `E[1/(ζ b^{N_x(t)}; b)_∞]` for step-Bernoulli(ρ) data. Starts from
/// [`QLaplaceContours::default_for`] and, if that fails certification,
/// searches nearby circles and `D` parameters.
pub fn q_laplace_finite_t(x: u64, t: f64, b: f64, rho: f64, zeta: C64) -> Result<QLaplaceValue, FredholmError> {
    let base = QLaplaceContours::default_for(b);
    let mut report = Vec::new();
    for scale in [1.0, 0.85, 0.7, 0.55] {
        for (big_r, d, delta) in [(base.big_r, base.d, base.delta), (4.0, 0.4, 0.9), (8.0, 0.25, 0.8)] {
            let c = QLaplaceContours {
                center: base.center * scale + (1.0 - scale) * (-0.5 * b),
                radius: base.radius * (0.5 + 0.5 * scale),
                big_r,
                d,
                delta,
            };
            match q_laplace_with(x, t, b, rho, zeta, c) {
                Ok(v) => return Ok(v),
                Err(e @ FredholmError::Domain { .. }) => return Err(e),
                Err(e) => report.push(format!("{c:?}: {e}")),
            }
        }
    }
    Err(FredholmError::Certification(report.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::q_pochhammer_inf_real;

    #[test]
    fn time_zero_step_data() {
        let b: f64 = 0.5;
        let zeta = C64::new(-b.powi(-3), 0.0);
        for x in [0u64, 2, 5] {
            let v = q_laplace_finite_t(x, 0.0, b, 1.0, zeta).unwrap();
            let exact = 1.0 / q_pochhammer_inf_real(zeta.re * b.powi(x as i32 + 1), b);
            assert!((v.value.re - exact).abs() < 1e-8, "x={x}: {v:?} vs {exact}");
            assert!(v.value.im.abs() < 1e-8);
        }
    }

    #[test]
    fn small_zeta_gives_one() {
        let v = q_laplace_finite_t(3, 1.0, 0.5, 1.0, C64::new(-1e-9, 0.0)).unwrap();
        assert!((v.value.re - 1.0).abs() < 1e-8, "{v:?}");
    }

    #[test]
    fn matches_window_chain() {
        let b: f64 = 0.5;
        let zeta = C64::new(-b.powi(-3), 0.0);
        for rho in [1.0, 0.5] {
            let law = crate::exact::window_height_pmf(5, 1.0, b, rho).unwrap();
            let exact: f64 =
                law.iter().enumerate().map(|(n, p)| p / q_pochhammer_inf_real(zeta.re * b.powi(n as i32), b)).sum();
            let v = q_laplace_finite_t(5, 1.0, b, rho, zeta).unwrap();
            assert!((v.value.re - exact).abs() < 1e-8, "rho={rho}: {v:?} vs {exact}");
        }
    }
}
