//! The three limit laws as Fredholm determinants on wedge contours.
//!
//! With `φ(z) = z³/3 − sz`,
//!
//! * `F_GUE(s) = det(I + K_Ai)`, `K_Ai(w,w′) = (1/2πi)∫ e^{φ(w)−φ(v)} / ((v−w)(v−w′)) dv`,
//!   `w` on rays `∞e^{±iπ/3}` through 0 and `v` on rays `∞e^{±2iπ/3}` through −1;
//! * `F_GOE(s)² = det(I + K_2)` with the extra factor `v/w`, the contours
//!   shifted to `−δ` and `−2δ`;
//! * `Φ(s) = det(I + K_G)` with `ψ(z) = z²/2 + sz`,
//!   `K_G(w,w′) = (1/2πi)∫ e^{ψ(v)−ψ(w)} (v/w) / ((v−w)(v−w′)) dv`, `w` on rays
//!   `∞e^{±iπ/6}` through `−δ` and `v` on the vertical line through `−2δ`.
//!
//! In every case the `w` contour is traversed from the upper ray to the lower
//! one (downwards, i.e. clockwise around the `v` contour); with the opposite
//! orientation the same matrices give `det(I − K)` instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::C64;

use super::contour::{ray_truncation, Contour};
use super::det::{fredholm_det, fredholm_det_converged, Converged, InnerContourKernel, KernelParams, CAUCHY_TOL};
use super::FredholmError;

/// Gauss–Legendre order per panel at doubling level 0.
pub const BASE_ORDER: usize = 16;
/// Maximum number of doublings before giving up.
pub const MAX_DOUBLINGS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Gue,
    Goe2,
    Gauss,
}

impl std::str::FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gue" => Ok(Distribution::Gue),
            "goe2" => Ok(Distribution::Goe2),
            "gauss" => Ok(Distribution::Gauss),
            other => Err(format!("unknown distribution {other:?} (expected gue, goe2 or gauss)")),
        }
    }
}

/// A certified distribution value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistValue {
    pub value: f64,
    pub imag: f64,
    pub cauchy_gap: f64,
    pub nodes: usize,
}

impl DistValue {
    fn from(c: Converged) -> Self {
        DistValue { value: c.value.re, imag: c.value.im, cauchy_gap: c.cauchy_gap, nodes: c.nodes }
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(s: f64) -> f64 {
    0.5 * erfc(-s / std::f64::consts::SQRT_2)
}

fn cubic(z: C64, s: f64) -> C64 {
    z * z * z / 3.0 - s * z
}

fn quadratic(z: C64, s: f64) -> C64 {
    z * z / 2.0 + s * z
}

/// Length of a ray from `anchor` along `angle` beyond which `exp(sign·g)` is
/// negligible.
fn ray_length<G: Fn(C64) -> C64>(anchor: C64, angle: f64, g: G) -> f64 {
    let dir = C64::from_polar(1.0, angle);
    let up = ray_truncation(|r| g(anchor + dir * r).re, 0.1, 60.0);
    let down = ray_truncation(|r| g(anchor + dir.conj() * r).re, 0.1, 60.0);
    up.max(down)
}

fn airy_type(s: f64, w_anchor: f64, v_anchor: f64, goe: bool, level: usize) -> Result<super::det::DetValue, FredholmError> {
    let order = BASE_ORDER << level;
    let (wa, va) = (C64::new(w_anchor, 0.0), C64::new(v_anchor, 0.0));
    let lw = ray_length(wa, PI / 3.0, |w| cubic(w, s));
    let lv = ray_length(va, 2.0 * PI / 3.0, |v| -cubic(v, s));
    // Grade the corners on the scale of the nearest singularity.
    let scale = (w_anchor - v_anchor).abs().min(if goe { w_anchor.abs() } else { f64::INFINITY });
    let first = (0.5 * scale).min(0.5);
    let outer = Contour::wedge(wa, PI / 3.0, lw, first, 1.0, order).reversed();
    let inner = Contour::wedge(va, 2.0 * PI / 3.0, lv, first, 1.0, order);
    let params = KernelParams { s: Some(s), delta: goe.then_some(-w_anchor), ..KernelParams::default() };
    if goe {
        let k = InnerContourKernel {
            name: "goe2".into(),
            params,
            inner,
            f: move |w: C64, v: C64| (cubic(w, s) - cubic(v, s)).exp() / (v - w) * (v / w),
        };
        fredholm_det(&k, &outer)
    } else {
        let k = InnerContourKernel {
            name: "airy".into(),
            params,
            inner,
            f: move |w: C64, v: C64| (cubic(w, s) - cubic(v, s)).exp() / (v - w),
        };
        fredholm_det(&k, &outer)
    }
}

/// GUE Tracy–Widom distribution function.
pub fn f_gue(s: f64) -> Result<DistValue, FredholmError> {
    f_gue_with_anchor(s, -1.0)
}

/// [`f_gue`] with the inner contour through `v_anchor < 0`.
pub fn f_gue_with_anchor(s: f64, v_anchor: f64) -> Result<DistValue, FredholmError> {
    if !(v_anchor < 0.0) {
        return Err(FredholmError::Domain { name: "anchor", value: v_anchor });
    }
    fredholm_det_converged(|l| airy_type(s, 0.0, v_anchor, false, l), CAUCHY_TOL, MAX_DOUBLINGS).map(DistValue::from)
}

/// `F_GOE(s)²`, contours through `−δ` and `−2δ`.
pub fn f_goe_sq(s: f64, delta: f64) -> Result<DistValue, FredholmError> {
    if !(delta > 0.0) {
        return Err(FredholmError::Domain { name: "delta", value: delta });
    }
    if delta < 0.05 {
        return Err(FredholmError::NearSingular { delta });
    }
    fredholm_det_converged(|l| airy_type(s, -delta, -2.0 * delta, true, l), CAUCHY_TOL, MAX_DOUBLINGS).map(DistValue::from)
}

/// `F_GOE(s) = √(F_GOE(s)²)` at the default `δ`.
pub fn f_goe(s: f64) -> Result<f64, FredholmError> {
    f_goe_sq(s, DEFAULT_DELTA).map(|v| v.value.max(0.0).sqrt())
}

/// Default contour shift for the GOE² and Gaussian kernels.
pub const DEFAULT_DELTA: f64 = 0.3;

fn gaussian_level(s: f64, delta: f64, level: usize) -> Result<super::det::DetValue, FredholmError> {
    let order = BASE_ORDER << level;
    let wa = C64::new(-delta, 0.0);
    let va = C64::new(-2.0 * delta, 0.0);
    let lw = ray_length(wa, PI / 6.0, |w| -quadratic(w, s));
    let lv = ray_length(va, PI / 2.0, |v| quadratic(v, s));
    let first = (0.25 * delta).min(0.5);
    let outer = Contour::wedge(wa, PI / 6.0, lw, first, 1.0, order).reversed();
    let inner = Contour::wedge(va, PI / 2.0, lv, first, 1.0, order);
    let k = InnerContourKernel {
        name: "gaussian".into(),
        params: KernelParams { s: Some(s), delta: Some(delta), ..KernelParams::default() },
        inner,
        f: move |w: C64, v: C64| (quadratic(v, s) - quadratic(w, s)).exp() / (v - w) * (v / w),
    };
    fredholm_det(&k, &outer)
}

/// `det(I + K_G)`, which equals the standard normal distribution function.
pub fn gaussian_via_fredholm(s: f64, delta: f64) -> Result<DistValue, FredholmError> {
    if !(delta > 0.0) {
        return Err(FredholmError::Domain { name: "delta", value: delta });
    }
    if delta < 0.05 {
        return Err(FredholmError::NearSingular { delta });
    }
    fredholm_det_converged(|l| gaussian_level(s, delta, l), CAUCHY_TOL, MAX_DOUBLINGS).map(DistValue::from)
}

/// Evaluates a distribution at `s` with default contour parameters.
pub fn evaluate(dist: Distribution, s: f64) -> Result<DistValue, FredholmError> {
    match dist {
        Distribution::Gue => f_gue(s),
        Distribution::Goe2 => f_goe_sq(s, DEFAULT_DELTA),
        Distribution::Gauss => gaussian_via_fredholm(s, DEFAULT_DELTA),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub s: f64,
    pub value: f64,
    pub certified: bool,
    pub cauchy_gap: f64,
}

/// Tabulates a distribution on a sorted grid. Rows whose evaluation did not
/// converge are kept with `certified = false` and a NaN value.
pub fn tabulate(dist: Distribution, grid: &[f64]) -> Result<Vec<TableRow>, FredholmError> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(FredholmError::UnsortedGrid);
    }
    use rayon::prelude::*;
    let rows: Vec<TableRow> = grid
        .par_iter()
        .map(|&s| match evaluate(dist, s) {
            Ok(v) => TableRow { s, value: v.value, certified: v.imag.abs() < 1e-8, cauchy_gap: v.cauchy_gap },
            Err(_) => TableRow { s, value: f64::NAN, certified: false, cauchy_gap: f64::NAN },
        })
        .collect();
    Ok(rows)
}

/// Writes `s,F(s),certified,cauchy_gap`.
pub fn write_table_csv<W: std::io::Write>(mut w: W, rows: &[TableRow]) -> std::io::Result<()> {
    writeln!(w, "s,F(s),certified,cauchy_gap")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", crate::f17(r.s), crate::f17(r.value), r.certified, crate::f17(r.cauchy_gap))?;
    }
    Ok(())
}

/// A distribution function interpolated from a dense table: monotone cubic
/// (Fritsch–Carlson) between nodes, clamped to 0 and 1 outside.
#[derive(Clone, Debug)]
pub struct CdfTable {
    s: Vec<f64>,
    f: Vec<f64>,
    slope: Vec<f64>,
}

impl CdfTable {
    pub fn from_rows(rows: &[TableRow]) -> Result<Self, FredholmError> {
        if rows.iter().any(|r| !r.certified) {
            return Err(FredholmError::Uncertified);
        }
        let s: Vec<f64> = rows.iter().map(|r| r.s).collect();
        let f: Vec<f64> = rows.iter().map(|r| r.value.clamp(0.0, 1.0)).collect();
        Ok(Self::new(s, f))
    }

    pub fn build(dist: Distribution, lo: f64, hi: f64, step: f64) -> Result<Self, FredholmError> {
        let n = ((hi - lo) / step).round() as usize;
        let grid: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
        Self::from_rows(&tabulate(dist, &grid)?)
    }

    fn new(s: Vec<f64>, f: Vec<f64>) -> Self {
        let n = s.len();
        let d: Vec<f64> = (0..n - 1).map(|i| (f[i + 1] - f[i]) / (s[i + 1] - s[i])).collect();
        let mut slope = vec![0.0; n];
        for i in 1..n - 1 {
            slope[i] = if d[i - 1] * d[i] <= 0.0 {
                0.0
            } else {
                let (h0, h1) = (s[i] - s[i - 1], s[i + 1] - s[i]);
                let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
                (w1 + w2) / (w1 / d[i - 1] + w2 / d[i])
            };
        }
        slope[0] = d[0];
        slope[n - 1] = d[n - 2];
        CdfTable { s, f, slope }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.s.len();
        if x <= self.s[0] {
            return self.f[0];
        }
        if x >= self.s[n - 1] {
            return self.f[n - 1];
        }
        let i = self.s.partition_point(|&v| v <= x) - 1;
        let h = self.s[i + 1] - self.s[i];
        let u = (x - self.s[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * u) * (1.0 - u).powi(2),
            u * (1.0 - u).powi(2),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        (h00 * self.f[i] + h10 * h * self.slope[i] + h01 * self.f[i + 1] + h11 * h * self.slope[i + 1]).clamp(0.0, 1.0)
    }
}

/// Mean and median of a distribution from its Fredholm evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub median: f64,
    pub variance: f64,
}

/// `E S = s_hi − ∫_{s_lo}^{s_hi} F − s_lo F(s_lo)` by Gauss–Legendre panels,
/// and the median by bisection.
pub fn distribution_moments(dist: Distribution, lo: f64, hi: f64) -> Result<Moments, FredholmError> {
    let f = |s: f64| evaluate(dist, s).map(|v| v.value);
    let (x, w) = super::contour::gauss_legendre(24);
    let panels = ((hi - lo) / 1.5).ceil() as usize;
    let h = (hi - lo) / panels as f64;
    let mut nodes = Vec::new();
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push((a + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    use rayon::prelude::*;
    let values: Vec<f64> = nodes.par_iter().map(|&(s, _)| f(s)).collect::<Result<_, _>>()?;
    let int_f: f64 = nodes.iter().zip(&values).map(|((_, wi), v)| wi * v).sum();
    let int_sf: f64 = nodes.iter().zip(&values).map(|((s, wi), v)| wi * s * v).sum();
    let f_lo = f(lo)?;
    let mean = hi - int_f - lo * f_lo;
    // E S² = s_hi² − 2∫ s F − s_lo² F(s_lo).
    let second = hi * hi - 2.0 * int_sf - lo * lo * f_lo;
    let (mut a, mut b) = (lo, hi);
    while b - a > 1e-7 {
        let m = 0.5 * (a + b);
        if f(m)? < 0.5 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Moments { mean, median: 0.5 * (a + b), variance: second - mean * mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_identity_at_zero_and_two() {
        let v = gaussian_via_fredholm(0.0, 0.3).unwrap();
        assert!((v.value - 0.5).abs() < 1e-6, "{v:?}");
        let v2 = gaussian_via_fredholm(2.0, 0.3).unwrap();
        assert!((v2.value - 0.977250).abs() < 1e-6, "{v2:?}");
        let m2 = gaussian_via_fredholm(-2.0, 0.3).unwrap();
        assert!((m2.value - (1.0 - v2.value)).abs() < 1e-6);
    }

    #[test]
    fn gue_known_values() {
        // Reference values of the Airy-kernel determinant on (s, ∞).
        for (s, f) in [(-3.0, 0.0803195529), (0.0, 0.9693728284)] {
            let v = f_gue(s).unwrap();
            assert!((v.value - f).abs() < 5e-6, "s={s}: {v:?}");
            assert!(v.imag.abs() < 1e-8);
        }
    }

    #[test]
    fn monotone_table_interpolation() {
        let t = CdfTable::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.2, 0.9, 1.0]);
        let mut prev = -1.0;
        for i in 0..=300 {
            let v = t.eval(i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(t.eval(1.0), 0.2);
    }
}
