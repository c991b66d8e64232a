use statrs::function::gamma::ln_gamma;

/// `P(x(t) − x(0) = k)` for a lone particle: a Poisson(`t`) number of
/// geometric jumps,
/// `e^{−t} 1{k=0} + Σ_{n=1}^{k} e^{−t} tⁿ/n! · C(k−1,n−1) (1−b)ⁿ b^{k−n}`.
///
/// Terms are summed in log space so large `k` and `t` do not overflow.
pub fn single_particle_pmf(t: f64, k: u64, b: f64) -> f64 {
    assert!(t >= 0.0 && b > 0.0 && b < 1.0, "single_particle_pmf: t = {t}, b = {b}");
    if k == 0 {
        return (-t).exp();
    }
    if t == 0.0 {
        return 0.0;
    }
    let (lt, lb, l1b) = (t.ln(), b.ln(), (1.0 - b).ln());
    let kf = k as f64;
    let logs: Vec<f64> = (1..=k)
        .map(|n| {
            let nf = n as f64;
            -t + nf * lt - ln_gamma(nf + 1.0) + ln_gamma(kf) - ln_gamma(nf) - ln_gamma(kf - nf + 1.0)
                + nf * l1b
                + (kf - nf) * lb
        })
        .collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    peak.exp() * logs.iter().map(|l| (l - peak).exp()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_points() {
        assert!((single_particle_pmf(1.0, 0, 0.5) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((single_particle_pmf(1.0, 1, 0.5) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((single_particle_pmf(1.0, 1, 0.5) - 0.183940).abs() < 1e-6);
    }

    #[test]
    fn normalised() {
        for &(t, b) in &[(0.25f64, 0.2f64), (1.0, 0.5), (4.0, 0.8), (10.0, 0.5)] {
            let kmax = (20.0 * t / (1.0 - b)).ceil() as u64 + 20;
            let s: f64 = (0..=kmax).map(|k| single_particle_pmf(t, k, b)).sum();
            assert!((s - 1.0).abs() < 1e-12, "t={t} b={b} sum={s}");
        }
    }

    #[test]
    fn mean_is_t_over_one_minus_b() {
        let (t, b) = (1.0, 0.5);
        let m: f64 = (0..400).map(|k| k as f64 * single_particle_pmf(t, k, b)).sum();
        assert!((m - t / (1.0 - b)).abs() < 1e-12);
    }
}
