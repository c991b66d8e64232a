//! The Tracy–Widom laws checked against an independent Bornemann-style
//! evaluation: Nyström discretisation of the Airy kernels on the real half-line
//! `(s, ∞)`, with the Airy function computed from its Laplace-type integral on
//! a vertical line through the saddle point.

use std::f64::consts::PI;

use hlpush::fredholm::{f_goe_sq, f_gue, DEFAULT_DELTA};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Gauss–Legendre nodes and weights on `[a, b]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut x, mut w) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
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
        x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
        w[i] = (b - a) / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `(Ai(x), Ai′(x))` from `Ai(x) = (1/2πi) ∫ exp(v³/3 − xv) dv` along
/// `Re v = c`, with `c` at the saddle point for `x > 0`.
fn airy(x: f64) -> (f64, f64) {
    let c = x.max(1.0).sqrt();
    // |integrand| ≈ exp(c³/3 − cx − c y²): stop 40 e-folds down.
    let ymax = (40.0 / c).sqrt();
    let panels = 200;
    let (nodes, weights) = gauss_legendre(16, -1.0, 1.0);
    let h = ymax / panels as f64;
    let (mut ai, mut aip) = (0.0, 0.0);
    for p in 0..panels {
        for (u, w) in nodes.iter().zip(&weights) {
            let y = (p as f64 + 0.5 * (u + 1.0)) * h;
            let v = C64::new(c, y);
            let e = (v * v * v / 3.0 - x * v).exp();
            // dv = i dy; the integrand is conjugate-symmetric in y, so the
            // full line is twice the real part of the upper half.
            ai += w * 0.5 * h * e.re;
            aip += w * 0.5 * h * (-v * e).re;
        }
    }
    (ai / PI, aip / PI)
}

fn det_i_minus(k: DMatrix<f64>) -> f64 {
    (DMatrix::identity(k.nrows(), k.ncols()) - k).determinant()
}

/// `det(I − K_Ai)` on `L²(s, s + 16)`.
fn f_gue_oracle(s: f64) -> f64 {
    let n = 60;
    let (x, w) = gauss_legendre(n, s, s + 16.0);
    let a: Vec<(f64, f64)> = x.iter().map(|&x| airy(x)).collect();
    let k = DMatrix::from_fn(n, n, |i, j| {
        let kij = if i == j {
            a[i].1 * a[i].1 - x[i] * a[i].0 * a[i].0
        } else {
            (a[i].0 * a[j].1 - a[i].1 * a[j].0) / (x[i] - x[j])
        };
        w[i].sqrt() * kij * w[j].sqrt()
    });
    det_i_minus(k)
}

/// `F_GOE(s) = det(I − K₁)` with `K₁(x, y) = ½ Ai((x + y)/2)` on `L²(s, s + 32)`.
fn f_goe_oracle(s: f64) -> f64 {
    let n = 80;
    let (x, w) = gauss_legendre(n, s, s + 32.0);
    let k = DMatrix::from_fn(n, n, |i, j| w[i].sqrt() * 0.5 * airy(0.5 * (x[i] + x[j])).0 * w[j].sqrt());
    det_i_minus(k)
}

#[test]
fn airy_function_reference_values() {
    let (ai, aip) = airy(0.0);
    assert!((ai - 0.355_028_053_887_817_2).abs() < 1e-13, "Ai(0) = {ai}");
    assert!((aip + 0.258_819_403_792_806_8).abs() < 1e-13, "Ai'(0) = {aip}");
    let (ai, _) = airy(-2.0);
    assert!((ai - 0.227_407_428_201_685_5).abs() < 1e-12, "Ai(-2) = {ai}");
    let (ai, _) = airy(5.0);
    assert!((ai - 1.083_444_281_360_744e-4).abs() < 1e-15, "Ai(5) = {ai}");
}

#[test]
fn oracle_matches_tabulated_gue_value() {
    assert!((f_gue_oracle(-2.0) - 0.413_224_142_505_116_1).abs() < 1e-10);
}

#[test]
fn f_gue_agrees_with_airy_kernel() {
    for s in [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0] {
        let got = f_gue(s).unwrap().value;
        let want = f_gue_oracle(s);
        assert!((got - want).abs() < 1e-9, "s = {s}: {got} vs {want}");
    }
}

#[test]
fn f_goe_squared_agrees_with_airy_kernel() {
    for s in [-4.0, -2.0, -1.0, 0.0, 1.0] {
        let got = f_goe_sq(s, DEFAULT_DELTA).unwrap().value;
        let want = f_goe_oracle(s).powi(2);
        assert!((got - want).abs() < 1e-8, "s = {s}: {got} vs {want}");
    }
}
