//! Quadrature on piecewise-linear complex contours.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::C64;

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Newton on the three-term
/// recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// A directed piece of a contour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    Line { from: C64, to: C64 },
    /// Full positively oriented circle.
    Circle { center: C64, radius: f64 },
}

/// Nodes `z_j` and complex weights `w_j` with `∫_Γ f(z) dz ≈ Σ_j w_j f(z_j)`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Contour {
    pub segments: Vec<Segment>,
    pub nodes: Vec<C64>,
    pub weights: Vec<C64>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Straight segment split into `panels` equal Gauss–Legendre panels.
    pub fn line(from: C64, to: C64, panels: usize, order: usize) -> Contour {
        let (x, w) = gauss_legendre(order);
        let mut c = Contour { segments: vec![Segment::Line { from, to }], ..Contour::default() };
        let d = (to - from) / panels as f64;
        for p in 0..panels {
            let a = from + d * p as f64;
            for (xi, wi) in x.iter().zip(&w) {
                c.nodes.push(a + d * (0.5 * (xi + 1.0)));
                c.weights.push(d * (0.5 * wi));
            }
        }
        c
    }

    /// Segment with panels graded geometrically away from `from`: the first
    /// panel has length `first`, each next one doubles, capped at `max_panel`.
    pub fn graded_line(from: C64, to: C64, first: f64, max_panel: f64, order: usize) -> Contour {
        let (x, w) = gauss_legendre(order);
        let length = (to - from).norm();
        let dir = (to - from) / length;
        let mut c = Contour { segments: vec![Segment::Line { from, to }], ..Contour::default() };
        let mut a = 0.0;
        let mut h = first.min(length);
        while a < length - 1e-14 {
            let e = (a + h).min(length);
            for (xi, wi) in x.iter().zip(&w) {
                c.nodes.push(from + dir * (a + 0.5 * (e - a) * (xi + 1.0)));
                c.weights.push(dir * (0.5 * (e - a) * wi));
            }
            a = e;
            h = (2.0 * h).min(max_panel);
        }
        c
    }

    /// Positively oriented circle, `n`-point trapezoid rule.
    pub fn circle(center: C64, radius: f64, n: usize) -> Contour {
        let mut c = Contour { segments: vec![Segment::Circle { center, radius }], ..Contour::default() };
        for j in 0..n {
            let e = C64::from_polar(1.0, TAU * j as f64 / n as f64);
            c.nodes.push(center + radius * e);
            c.weights.push(C64::new(0.0, TAU / n as f64) * radius * e);
        }
        c
    }

    /// Two rays meeting at `anchor`: in from `anchor + L e^{−iθ}`, out to
    /// `anchor + L e^{iθ}` (upwards for `θ ∈ (0, π)`), graded at the corner.
    pub fn wedge(anchor: C64, angle: f64, length: f64, first: f64, max_panel: f64, order: usize) -> Contour {
        let lower = anchor + C64::from_polar(length, -angle);
        let upper = anchor + C64::from_polar(length, angle);
        Contour::graded_line(anchor, lower, first, max_panel, order)
            .reversed()
            .join(Contour::graded_line(anchor, upper, first, max_panel, order))
    }

    pub fn reversed(mut self) -> Contour {
        self.segments.reverse();
        for s in &mut self.segments {
            if let Segment::Line { from, to } = s {
                std::mem::swap(from, to);
            }
        }
        self.nodes.reverse();
        self.weights.reverse();
        for w in &mut self.weights {
            *w = -*w;
        }
        self
    }

    pub fn join(mut self, other: Contour) -> Contour {
        self.segments.extend(other.segments);
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
        self
    }

    /// `∫_Γ f(z) dz`.
    pub fn integrate<F: Fn(C64) -> C64>(&self, f: F) -> C64 {
        self.nodes.iter().zip(&self.weights).map(|(z, w)| w * f(*z)).sum()
    }
}

/// Truncation radius for a ray: scans `log|integrand|` outwards in steps of
/// `step` and returns the first radius past the peak where it has dropped by
/// `ln 10¹⁶` below the running maximum and keeps decreasing.
pub fn ray_truncation<F: Fn(f64) -> f64>(log_mag: F, step: f64, max_len: f64) -> f64 {
    let drop = 16.0 * std::f64::consts::LN_10;
    let mut peak = log_mag(0.0);
    let mut prev = peak;
    let mut r = 0.0;
    while r < max_len {
        r += step;
        let v = log_mag(r);
        peak = peak.max(v);
        if v < peak - drop && v < prev {
            return r;
        }
        prev = v;
    }
    max_len
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 5, 16, 64, 128] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
            // ∫ x^{2n−2} = 2/(2n−1)
            let deg = 2 * n - 2;
            let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn closed_contours_integrate_one_to_zero() {
        let c = Contour::circle(C64::new(-0.3, 0.1), 0.45, 32);
        assert!(c.integrate(|_| C64::new(1.0, 0.0)).norm() < 1e-15);
        let r = c.integrate(|z| 1.0 / (z + 0.3));
        assert!((r - C64::new(0.0, TAU)).norm() < 1e-13);
        // Closed polygon.
        let p = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 1.0), C64::new(0.0, 0.0)];
        let poly = p.windows(2).map(|s| Contour::line(s[0], s[1], 2, 8)).reduce(Contour::join).unwrap();
        assert!(poly.integrate(|_| C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn wedge_orientation_and_reversal() {
        let w = Contour::wedge(C64::new(0.0, 0.0), PI / 3.0, 5.0, 0.1, 1.0, 16);
        // ∫ dz from 5e^{−iπ/3} to 5e^{iπ/3}
        let expect = C64::from_polar(5.0, PI / 3.0) - C64::from_polar(5.0, -PI / 3.0);
        assert!((w.integrate(|_| C64::new(1.0, 0.0)) - expect).norm() < 1e-13);
        let r = w.reversed();
        assert!((r.integrate(|_| C64::new(1.0, 0.0)) + expect).norm() < 1e-13);
    }

    #[test]
    fn truncation_of_gaussian_tail() {
        let r = ray_truncation(|r| -r * r, 0.25, 100.0);
        assert!(r * r > 36.8 && r < 7.0, "{r}");
    }
}
