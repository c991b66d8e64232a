//! The discrete heat kernel: a compound Poisson walk with geometric steps.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{LatticeField, WeakScaling};

/// Relative mass below which Poisson and negative-binomial terms are dropped.
const TAIL: f64 = 1e-17;

/// Law of `S = k₁ + … + k_Γ` on ℤ≥0, `Γ ~ Poisson(c·dt)`, `kᵢ` i.i.d. with
/// `P(k) = (1−β)β^k`. Each Poisson term is a negative binomial evaluated from
/// its mode outward in log space.
pub fn increment_law(scaling: &WeakScaling, dt: f64) -> Vec<f64> {
    let beta = scaling.beta();
    let lam = scaling.rate() * dt;
    let mut out = vec![0.0];
    if lam <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    let (ln_b, ln_1b) = (beta.ln(), (1.0 - beta).ln());
    let ln_pois = |n: f64| -lam + n * lam.ln() - ln_gamma(n + 1.0);
    let mode_n = lam.floor();
    let ln_peak = ln_pois(mode_n);
    let add = |out: &mut Vec<f64>, k: usize, v: f64| {
        if k >= out.len() {
            out.resize(k + 1, 0.0);
        }
        out[k] += v;
    };
    for dir in [1i64, -1] {
        let mut n = if dir > 0 { mode_n as i64 } else { mode_n as i64 - 1 };
        while n >= 0 {
            let lp = ln_pois(n as f64);
            if lp - ln_peak < TAIL.ln() && (n as f64 - lam).abs() > 1.0 {
                break;
            }
            if n == 0 {
                add(&mut out, 0, lp.exp());
            } else {
                let nf = n as f64;
                let mode_k = ((nf - 1.0) * beta / (1.0 - beta)).floor().max(0.0);
                let ln_nb = |k: f64| ln_gamma(nf + k) - ln_gamma(nf) - ln_gamma(k + 1.0) + nf * ln_1b + k * ln_b;
                let top = lp + ln_nb(mode_k);
                let m = mode_k as usize;
                // Upward and downward recurrences P(k+1)/P(k) = β(n+k)/(k+1).
                let mut v = top.exp();
                let floor = v * TAIL;
                add(&mut out, m, v);
                let mut k = m;
                loop {
                    v *= beta * (nf + k as f64) / (k as f64 + 1.0);
                    k += 1;
                    if v < floor || v == 0.0 {
                        break;
                    }
                    add(&mut out, k, v);
                }
                let mut v = top.exp();
                let mut k = m;
                while k > 0 {
                    v *= k as f64 / (beta * (nf + k as f64 - 1.0));
                    k -= 1;
                    if v < floor || v == 0.0 {
                        break;
                    }
                    add(&mut out, k, v);
                }
            }
            n += dir;
        }
    }
    out
}

/// `p_ε(0, dt, ·)`: [`increment_law`] recentred by its mean `c·dt·β/(1−β)`.
pub fn heat_kernel_p(scaling: &WeakScaling, dt: f64) -> LatticeField {
    LatticeField {
        time: dt,
        offset: scaling.rate() * dt * scaling.mean_increment(),
        first: 0,
        values: increment_law(scaling, dt),
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `max_ξ |p(0,t₁) ∗ p(t₁,t₂) − p(0,t₂)|`.
pub fn semigroup_defect(scaling: &WeakScaling, t1: f64, t2: f64) -> f64 {
    let joined = convolve(&increment_law(scaling, t1), &increment_law(scaling, t2 - t1));
    let direct = increment_law(scaling, t2);
    let n = joined.len().max(direct.len());
    (0..n)
        .map(|k| (joined.get(k).unwrap_or(&0.0) - direct.get(k).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}

/// `max_ξ |∂ₜp − c(P∗p − p)|` with a central difference of step `h`.
pub fn forward_equation_defect(scaling: &WeakScaling, t: f64, h: f64) -> f64 {
    let beta = scaling.beta();
    let c = scaling.rate();
    let (lo, mid, hi) = (increment_law(scaling, t - h), increment_law(scaling, t), increment_law(scaling, t + h));
    let n = hi.len().max(lo.len()).max(mid.len());
    let get = |v: &[f64], k: usize| *v.get(k).unwrap_or(&0.0);
    let mut smoothed = 0.0;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        smoothed = (1.0 - beta) * get(&mid, k) + beta * smoothed;
        let rhs = c * (smoothed - get(&mid, k));
        let lhs = (get(&hi, k) - get(&lo, k)) / (2.0 * h);
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// Empirical constant of one estimate on a coarse grid and its refinement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateConstant {
    pub name: String,
    pub c_coarse: f64,
    pub c_fine: f64,
    pub refinement_ratio: f64,
    /// Finite and within a factor 2 under refinement.
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub eps: f64,
    pub dt: f64,
    /// Ratio of left side to shape for estimates (i)–(iv).
    pub ratios: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimateReport {
    pub horizon: f64,
    pub u: f64,
    pub v: f64,
    pub rows: Vec<EstimateRow>,
    pub constants: Vec<EstimateConstant>,
    /// Largest ratio per `ε` over the refined `Δt` grid, for each estimate.
    pub per_eps: Vec<(f64, [f64; 4])>,
}

fn ratios(scaling: &WeakScaling, dt: f64, u: f64, v: f64) -> [f64; 4] {
    let p = heat_kernel_p(scaling, dt);
    let eps = scaling.eps;
    let (mut s1, mut s2, mut sup) = (0.0, 0.0, 0.0f64);
    for (j, q) in p.values.iter().enumerate() {
        let z = p.xi(j).abs();
        let w = (u * eps * z).exp();
        s1 += q * w;
        s2 += q * z.powf(v) * w;
        sup = sup.max(*q);
    }
    // Hölder quotient over dyadic separations.
    let mut holder = 0.0f64;
    let mut d = 1;
    while d < p.values.len() {
        let dv = (d as f64).powf(v);
        for j in 0..p.values.len() - d {
            holder = holder.max((p.values[j + d] - p.values[j]).abs() / dv);
        }
        d *= 2;
    }
    let m = 1.0f64.min(dt.powf(-0.5));
    [
        s1,
        s2 / (eps.powf(-v / 2.0) * dt.powf(v / 2.0)),
        sup / (eps.sqrt() * m),
        holder / (eps.powf((1.0 + v) / 2.0) * 1.0f64.min(dt.powf(-(1.0 + v) / 2.0))),
    ]
}

/// Empirical constants of the four heat-kernel estimates, keeping `Δt ≤ T/ε`.
/// The coarse grid is `coarse_eps × coarse_dt`; the refined grid adds the
/// `fine_*` points.
pub fn heat_kernel_estimate_check(
    coarse_eps: &[f64],
    fine_eps: &[f64],
    coarse_dt: &[f64],
    fine_dt: &[f64],
    horizon: f64,
    u: f64,
    v: f64,
) -> Result<KernelEstimateReport, super::SheError> {
    let mut rows = Vec::new();
    let mut coarse_max = [0.0f64; 4];
    let mut fine_max = [0.0f64; 4];
    let mut per_eps = Vec::new();
    let mut eps_grid: Vec<(f64, bool)> = coarse_eps.iter().map(|&e| (e, true)).collect();
    eps_grid.extend(fine_eps.iter().filter(|e| !coarse_eps.contains(e)).map(|&e| (e, false)));
    for (eps, eps_coarse) in eps_grid {
        let s = WeakScaling::new(eps)?;
        let mut grid: Vec<(f64, bool)> = coarse_dt.iter().map(|&d| (d, eps_coarse)).collect();
        grid.extend(fine_dt.iter().filter(|d| !coarse_dt.contains(d)).map(|&d| (d, false)));
        let mut local = [0.0f64; 4];
        for (dt, coarse) in grid {
            if !(dt > 0.0 && dt <= horizon / eps) {
                continue;
            }
            let r = ratios(&s, dt, u, v);
            for i in 0..4 {
                local[i] = local[i].max(r[i]);
                fine_max[i] = fine_max[i].max(r[i]);
                if coarse {
                    coarse_max[i] = coarse_max[i].max(r[i]);
                }
            }
            rows.push(EstimateRow { eps, dt, ratios: r });
        }
        per_eps.push((eps, local));
    }
    let names = ["(i) exponential moment", "(ii) fractional moment", "(iii) pointwise sup", "(iv) Hölder difference"];
    let constants = (0..4)
        .map(|i| {
            let ratio = fine_max[i] / coarse_max[i];
            EstimateConstant {
                name: names[i].into(),
                c_coarse: coarse_max[i],
                c_fine: fine_max[i],
                refinement_ratio: ratio,
                stable: fine_max[i].is_finite() && ratio < 2.0,
            }
        })
        .collect();
    Ok(KernelEstimateReport { horizon, u, v, rows, constants, per_eps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_at_time_zero() {
        let s = WeakScaling::new(0.01).unwrap();
        let p = heat_kernel_p(&s, 0.0);
        assert_eq!(p.values, vec![1.0]);
        assert_eq!(p.offset, 0.0);
    }

    #[test]
    fn normalised_and_centred() {
        for eps in [1e-2, 1e-3] {
            let s = WeakScaling::new(eps).unwrap();
            for dt in [0.3, 1.0, 10.0, 100.0] {
                let p = heat_kernel_p(&s, dt);
                let mass: f64 = p.values.iter().sum();
                let mean: f64 = p.values.iter().enumerate().map(|(j, q)| q * p.xi(j)).sum();
                assert!((mass - 1.0).abs() < 1e-12, "eps={eps} dt={dt} mass={mass}");
                assert!(mean.abs() < 1e-10, "eps={eps} dt={dt} mean={mean}");
            }
        }
    }

    #[test]
    fn semigroup() {
        let s = WeakScaling::new(0.01).unwrap();
        assert!(semigroup_defect(&s, 3.0, 10.0) < 1e-10);
    }

    #[test]
    fn forward_equation_converges() {
        let s = WeakScaling::new(0.01).unwrap();
        let coarse = forward_equation_defect(&s, 5.0, 1e-2);
        let fine = forward_equation_defect(&s, 5.0, 5e-3);
        assert!(fine < coarse && fine < 1e-4, "{coarse} {fine}");
    }

    #[test]
    fn exponential_moment_with_zero_u_is_one() {
        let r = heat_kernel_estimate_check(&[1e-2], &[], &[1.0, 10.0], &[3.0], 1.0, 0.0, 0.5).unwrap();
        assert!((r.constants[0].c_fine - 1.0).abs() < 1e-12);
    }
}
