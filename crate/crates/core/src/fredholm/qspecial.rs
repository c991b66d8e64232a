use crate::C64;

use super::FredholmError;

/// Infinite products stop once `|a q^j|` drops below this.
pub const POCHHAMMER_CUTOFF: f64 = 1e-17;

/// `(a; q)_n = Π_{j=1}^{n} (1 − a q^{j−1})`; `n = None` is the infinite
/// product, which needs `|q| < 1`.
pub fn q_pochhammer(a: C64, q: f64, n: Option<u64>) -> Result<C64, FredholmError> {
    match n {
        Some(n) => {
            let mut p = C64::new(1.0, 0.0);
            let mut term = a;
            for _ in 0..n {
                p *= 1.0 - term;
                term *= q;
            }
            Ok(p)
        }
        None => q_pochhammer_inf(a, q).map(|(v, _)| v),
    }
}

/// `(a; q)_∞` together with a bound on the relative error of truncation.
///
/// After the last factor, `|a q^J| < 10⁻¹⁷`, so the dropped tail satisfies
/// `|log Π_{j≥J}(1 − a q^j)| ≤ 2|a q^J|/(1−q)`.
pub fn q_pochhammer_inf(a: C64, q: f64) -> Result<(C64, f64), FredholmError> {
    if !(q.abs() < 1.0) {
        return Err(FredholmError::Domain { name: "q", value: q });
    }
    let mut p = C64::new(1.0, 0.0);
    let mut term = a;
    loop {
        if term.norm() < POCHHAMMER_CUTOFF {
            let tail = 2.0 * term.norm() / (1.0 - q.abs());
            return Ok((p, tail));
        }
        p *= 1.0 - term;
        term *= q;
    }
}

/// Real-argument `(a; q)_∞`, used in hot loops.
pub fn q_pochhammer_inf_real(a: f64, q: f64) -> f64 {
    let mut p = 1.0;
    let mut term = a;
    while term.abs() >= POCHHAMMER_CUTOFF {
        p *= 1.0 - term;
        term *= q;
    }
    p
}

/// Gaussian binomial `(q^{n−k+1}; q)_k / (q; q)_k`; zero outside `0 ≤ k ≤ n`.
pub fn q_binomial(n: i64, k: i64, q: f64) -> f64 {
    q_binomial_checked(n, k, q).unwrap_or(0.0)
}

/// As [`q_binomial`] but reports an out-of-range `k`.
pub fn q_binomial_checked(n: i64, k: i64, q: f64) -> Result<f64, FredholmError> {
    if k < 0 || k > n {
        return Err(FredholmError::Domain { name: "k", value: k as f64 });
    }
    let mut v = 1.0;
    for j in 0..k {
        v *= (1.0 - q.powi((n - k + 1 + j) as i32)) / (1.0 - q.powi((1 + j) as i32));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_values() {
        let one = C64::new(1.0, 0.0);
        assert_eq!(q_pochhammer(C64::new(0.3, 0.2), 0.5, Some(0)).unwrap(), one);
        assert_eq!(q_pochhammer(C64::new(0.0, 0.0), 0.5, None).unwrap(), one);
        let v = q_pochhammer(C64::new(0.5, 0.0), 0.5, None).unwrap();
        assert!((v.re - 0.2887880950866024).abs() < 1e-15 && v.im == 0.0);
        assert!((q_pochhammer_inf_real(0.5, 0.5) - v.re).abs() < 1e-16);
        assert!(q_pochhammer(one, 1.0, None).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(q_binomial(7, 0, 0.3), 1.0);
        assert!((q_binomial(3, 1, 0.5) - 1.75).abs() < 1e-15);
        assert!((q_binomial(4, 2, 1.0 - 1e-8) - 6.0).abs() < 1e-6);
        assert_eq!(q_binomial(3, 4, 0.5), 0.0);
        assert!(q_binomial_checked(3, -1, 0.5).is_err());
    }

    #[test]
    fn pascal_rule() {
        // (n k)_q = (n−1 k−1)_q + q^k (n−1 k)_q
        let q = 0.37;
        for n in 1..8 {
            for k in 1..n {
                let lhs = q_binomial(n, k, q);
                let rhs = q_binomial(n - 1, k - 1, q) + q.powi(k as i32) * q_binomial(n - 1, k, q);
                assert!((lhs - rhs).abs() < 1e-13);
            }
        }
    }
}
