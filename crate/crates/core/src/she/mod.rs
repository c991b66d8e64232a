//! Gärtner transform under weak noise scaling and the discrete heat kernel.
//!
//! With `b = e^{−λ√ε}`, `ν = (√5−1)/2`, `λ = ν^{−3/2}` and
//! `Z̄(t, y) = b^{N_y(t) − (1−ν)y} e^{−μt}` on the unshifted lattice, the
//! expectation solves the closed linear equation
//!
//! `∂ₜ E Z̄(y) = c Σ_{k≥0} (1−β)β^k E Z̄(y−k) − c E Z̄(y) + γ E Z̄(y)`,
//!
//! with `β = b^ν`, `c = (b⁻¹−1)/(1−β)` and `γ = (b⁻¹−1)β/(1−β) − 1 − μ`,
//! on all of ℤ (for `y < 0`, `N_y = 0`). Hence
//! `E Z̄(t) = e^{γt} q_t ∗ Z̄(0)`, where `q_t` is the law of a compound
//! Poisson(`ct`) sum of Geometric(`1−β`) increments on ℤ≥0. The field `Z` of
//! the transform is `Z̄` read in the frame shifted by `⌊t/(1−β)⌋`.

mod kernel;

pub use kernel::{
    forward_equation_defect, heat_kernel_estimate_check, heat_kernel_p, increment_law, semigroup_defect, EstimateConstant, EstimateRow,
    KernelEstimateReport,
};

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::f17;
use crate::particle_system::{run_until_with_sink, Configuration, JumpLaw};
use crate::rng::replica_rng;

#[derive(Debug, Error, PartialEq)]
pub enum SheError {
    #[error("eps = {0} must lie in (0, 1)")]
    InvalidEps(f64),
    #[error("time t = {0} must be finite and non-negative")]
    InvalidTime(f64),
    #[error("need at least {min} replicas, got {got}")]
    TooFewReplicas { min: usize, got: usize },
    #[error("window is empty")]
    Window,
    #[error(transparent)]
    Particle(#[from] crate::particle_system::ParticleError),
}

/// Normalisation of the transformed field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `ε⁻¹(1 − e^{−λν√ε}) = ε⁻¹(1 − β)`; makes `ε Σ Z̃(0, ·) = b`.
    SqrtEps,
    /// `ε⁻¹(1 − e^{−λν})` without the `√ε`.
    Literal,
}

/// Weak noise scaling at a given `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakScaling {
    pub eps: f64,
    pub nu: f64,
    pub lambda: f64,
    pub b: f64,
    pub mu: f64,
}

impl WeakScaling {
    pub fn new(eps: f64) -> Result<Self, SheError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(SheError::InvalidEps(eps));
        }
        let nu = (5f64.sqrt() - 1.0) / 2.0;
        let lambda = nu.powf(-1.5);
        let b = (-lambda * eps.sqrt()).exp();
        let bn = b.powf(nu);
        let mu = (1.0 / b - 1.0) / (1.0 / bn - 1.0) + (1.0 - nu) * b.ln() / (1.0 - bn);
        Ok(WeakScaling { eps, nu, lambda, b, mu })
    }

    /// `β = b^ν`.
    pub fn beta(&self) -> f64 {
        self.b.powf(self.nu)
    }

    /// Event rate `c = (b⁻¹−1)/(1−β)` of the heat-kernel walk.
    pub fn rate(&self) -> f64 {
        (1.0 / self.b - 1.0) / (1.0 - self.beta())
    }

    /// Mean increment `β/(1−β)` of one walk step.
    pub fn mean_increment(&self) -> f64 {
        let beta = self.beta();
        beta / (1.0 - beta)
    }

    /// Lattice frame shift `⌊t/(1−β)⌋`.
    pub fn frame_shift(&self, t: f64) -> u64 {
        (t / (1.0 - self.beta())).floor() as u64
    }

    /// Growth rate `γ` of `E Z̄`; zero would make the mean stationary.
    pub fn drift(&self) -> f64 {
        (1.0 / self.b - 1.0) * self.mean_increment() - 1.0 - self.mu
    }

    /// `1 − ν − ν²`.
    pub fn golden_residual(&self) -> f64 {
        1.0 - self.nu - self.nu * self.nu
    }

    pub fn normalization(&self, n: Normalization) -> f64 {
        let arg = match n {
            Normalization::SqrtEps => self.lambda * self.nu * self.eps.sqrt(),
            Normalization::Literal => self.lambda * self.nu,
        };
        -(-arg).exp_m1() / self.eps
    }

    /// `Z̄(0, y)` for step data: `b^{1+νy}` for `y ≥ 0`, `b^{(1−ν)|y|}` below.
    pub fn step_initial(&self, y: i64) -> f64 {
        if y >= 0 {
            self.b.powf(1.0 + self.nu * y as f64)
        } else {
            self.b.powf((1.0 - self.nu) * (-y) as f64)
        }
    }
}

/// Values on the lattice points `first + j`, read at `ξ = first + j − offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    pub time: f64,
    pub offset: f64,
    pub first: i64,
    pub values: Vec<f64>,
}

impl LatticeField {
    pub fn xi(&self, j: usize) -> f64 {
        (self.first + j as i64) as f64 - self.offset
    }

    /// Value at lattice point `k` (zero off the stored support).
    pub fn at(&self, k: i64) -> f64 {
        let j = k - self.first;
        if j < 0 {
            return 0.0;
        }
        self.values.get(j as usize).copied().unwrap_or(0.0)
    }

    /// CSV with a comment header recording `eps`, `t` and `offset`.
    pub fn write_csv<W: Write>(&self, mut w: W, eps: f64) -> io::Result<()> {
        writeln!(w, "# eps={},t={},offset={}", f17(eps), f17(self.time), f17(self.offset))?;
        writeln!(w, "xi,value")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", f17(self.xi(j)), f17(*v))?;
        }
        Ok(())
    }
}

/// `Z(t, x)` on `x = y − ⌊t/(1−β)⌋` for `y ∈ [0, sites)`.
///
/// Heights are read from `config`; when it was simulated with a sink, pass
/// `sites` no larger than `sink + 1`.
pub fn gartner_transform(config: &Configuration, scaling: &WeakScaling, sites: usize) -> LatticeField {
    let shift = scaling.frame_shift(config.time);
    let decay = (-scaling.mu * config.time).exp();
    let mut values = Vec::with_capacity(sites);
    let mut n = 0usize;
    for y in 0..sites {
        while n < config.positions.len() && config.positions[n] as usize <= y {
            n += 1;
        }
        values.push(scaling.b.powf(n as f64 - (1.0 - scaling.nu) * y as f64) * decay);
    }
    LatticeField { time: config.time, offset: shift as f64, first: 0, values }
}

/// Field sampled in macroscopic coordinates `Z_ε(t, x) = Z(t/ε, x/ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledField {
    pub t: f64,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScaledField {
    /// Linear interpolation; zero outside the sampled range.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.x.partition_point(|&v| v <= x);
        if k == 0 || (k == self.x.len() && x > self.x[k - 1]) {
            return 0.0;
        }
        if k == self.x.len() {
            return self.values[k - 1];
        }
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let w = (x - x0) / (x1 - x0);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }
}

pub fn scaled_field(field: &LatticeField, scaling: &WeakScaling, normalize: Option<Normalization>) -> ScaledField {
    let factor = normalize.map_or(1.0, |n| scaling.normalization(n));
    ScaledField {
        t: scaling.eps * field.time,
        x: (0..field.values.len()).map(|j| scaling.eps * field.xi(j)).collect(),
        values: field.values.iter().map(|v| v * factor).collect(),
    }
}

/// `E Z̄(t, y)` for `y ∈ [0, sites)` from step data.
pub fn expected_field(scaling: &WeakScaling, t: f64, sites: usize) -> Vec<f64> {
    let q = increment_law(scaling, t);
    let growth = (scaling.drift() * t).exp();
    (0..sites as i64)
        .map(|y| growth * q.iter().enumerate().map(|(k, p)| p * scaling.step_initial(y - k as i64)).sum::<f64>())
        .collect()
}

/// Step data on `[0, sites)` evolved to each of `times` (increasing) with a
/// sink at `sites − 1`; returns one Gärtner field per time.
pub fn simulate_fields(scaling: &WeakScaling, times: &[f64], sites: usize, seed: u64, replica: u64) -> Vec<LatticeField> {
    let law = JumpLaw::new(scaling.b).expect("0 < b < 1");
    let mut rng = replica_rng(seed, replica);
    let mut config = Configuration::new((0..sites as u64).collect()).expect("sorted");
    times
        .iter()
        .map(|&t| {
            run_until_with_sink(&mut config, &law, t, sites as u64 - 1, &mut rng).expect("forward time");
            gartner_transform(&config, scaling, sites)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanResidualReport {
    pub eps: f64,
    pub t: f64,
    pub replicas: usize,
    /// Frame coordinates `x` of the checked sites.
    pub x: Vec<i64>,
    pub mc_mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub expected: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
    /// `γ`: non-zero means `μ` does not make the mean stationary.
    pub drift: f64,
}

/// Monte Carlo mean of `Z(t, x)` for `x ∈ [−half, half)` against the exact
/// semigroup prediction.
pub fn she_mean_residual(
    scaling: &WeakScaling,
    t: f64,
    replicas: usize,
    seed: u64,
    half: usize,
) -> Result<MeanResidualReport, SheError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(SheError::InvalidTime(t));
    }
    if replicas < 2 {
        return Err(SheError::TooFewReplicas { min: 2, got: replicas });
    }
    let shift = scaling.frame_shift(t) as i64;
    // Sites left of the lattice origin carry Z = 0 and are dropped.
    let lo = (shift - half as i64).max(0);
    let sites = (shift + half as i64) as usize;
    if sites <= lo as usize {
        return Err(SheError::Window);
    }
    let width = sites - lo as usize;
    let (sum, sum2) = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let f = simulate_fields(scaling, &[t], sites, seed, r).pop().expect("one time");
            let v: Vec<f64> = f.values[lo as usize..].to_vec();
            let v2 = v.iter().map(|z| z * z).collect::<Vec<_>>();
            (v, v2)
        })
        .reduce(
            || (vec![0.0; width], vec![0.0; width]),
            |(mut a, mut a2), (b, b2)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a2.iter_mut().zip(&b2).for_each(|(x, y)| *x += y);
                (a, a2)
            },
        );
    let n = replicas as f64;
    let expected: Vec<f64> = expected_field(scaling, t, sites)[lo as usize..].to_vec();
    let mc_mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_err: Vec<f64> =
        sum2.iter().zip(&mc_mean).map(|(s2, m)| ((s2 / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt()).collect();
    let z_scores: Vec<f64> = mc_mean
        .iter()
        .zip(&expected)
        .zip(&std_err)
        .map(|((m, e), s)| match *s > 0.0 {
            true => (m - e) / s,
            // Deterministic field: compare to rounding.
            false if (m - e).abs() <= 1e-12 * e.abs() => 0.0,
            false => f64::INFINITY,
        })
        .collect();
    let max_abs_z = z_scores.iter().fold(0.0f64, |a, z| a.max(z.abs()));
    Ok(MeanResidualReport {
        eps: scaling.eps,
        t,
        replicas,
        x: (lo - shift..half as i64).collect(),
        mc_mean,
        std_err,
        expected,
        z_scores,
        max_abs_z,
        drift: scaling.drift(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundRow {
    pub t: f64,
    /// `max_ζ ‖Z̃(t, ζ)‖₂` over the simulated lattice.
    pub norm: f64,
    pub shape: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundReport {
    pub eps: f64,
    pub horizon: f64,
    pub normalization: Normalization,
    /// Whether `Z` was multiplied by `e^{−γt}` to remove the mean drift.
    pub drift_compensated: bool,
    pub coarse: Vec<MomentBoundRow>,
    pub fine: Vec<MomentBoundRow>,
    pub c_coarse: f64,
    pub c_fine: f64,
    /// `c_fine / c_coarse`.
    pub refinement_ratio: f64,
}

/// Empirical constant in `‖Z̃(t, ζ)‖₂ ≤ C min{ε^{−1/2}, (εt)^{−1/2}}` for
/// `t ∈ (0, T/ε]`, on a coarse grid of `points` times and its refinement.
/// With `compensate`, `Z(t)` is multiplied by `e^{−γt}`.
pub fn moment_bound_check(
    scaling: &WeakScaling,
    horizon: f64,
    points: usize,
    replicas: usize,
    seed: u64,
    normalization: Normalization,
    compensate: bool,
) -> Result<MomentBoundReport, SheError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SheError::InvalidTime(horizon));
    }
    if replicas < 2 {
        return Err(SheError::TooFewReplicas { min: 2, got: replicas });
    }
    let t_max = horizon / scaling.eps;
    let fine_times: Vec<f64> = (1..=2 * points).map(|k| t_max * k as f64 / (2 * points) as f64).collect();
    // Lattice wide enough for the bulk of q_t at the final time.
    let q_mean = scaling.rate() * t_max * scaling.mean_increment();
    let q_sd = (scaling.rate() * t_max).sqrt() * (1.0 + scaling.beta()).sqrt() / (1.0 - scaling.beta());
    let sites = (q_mean + 10.0 * q_sd).ceil() as usize + 1;
    let factor = scaling.normalization(normalization);
    let sum2 = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            simulate_fields(scaling, &fine_times, sites, seed, r)
                .into_iter()
                .map(|f| {
                    let k = if compensate { factor * (-scaling.drift() * f.time).exp() } else { factor };
                    f.values.iter().map(|z| (z * k).powi(2)).collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        })
        .reduce(
            || vec![vec![0.0; sites]; fine_times.len()],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(&b) {
                    ra.iter_mut().zip(rb).for_each(|(x, y)| *x += y);
                }
                a
            },
        );
    let rows: Vec<MomentBoundRow> = fine_times
        .iter()
        .zip(&sum2)
        .map(|(&t, s2)| {
            let norm = s2.iter().fold(0.0f64, |a, v| a.max((v / replicas as f64).sqrt()));
            let shape = scaling.eps.powf(-0.5).min((scaling.eps * t).powf(-0.5));
            MomentBoundRow { t, norm, shape, ratio: norm / shape }
        })
        .collect();
    let coarse: Vec<MomentBoundRow> = rows.iter().skip(1).step_by(2).cloned().collect();
    let c_of = |r: &[MomentBoundRow]| r.iter().fold(0.0f64, |a, row| a.max(row.ratio));
    let (c_coarse, c_fine) = (c_of(&coarse), c_of(&rows));
    Ok(MomentBoundReport {
        eps: scaling.eps,
        horizon,
        normalization,
        drift_compensated: compensate,
        coarse,
        fine: rows,
        c_coarse,
        c_fine,
        refinement_ratio: c_fine / c_coarse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_identity() {
        let s = WeakScaling::new(0.01).unwrap();
        assert!(s.golden_residual().abs() < 1e-14);
        assert!((s.lambda - 2.058171).abs() < 1e-6);
        assert!(s.b > 0.0 && s.b < 1.0);
    }

    #[test]
    fn step_field_at_time_zero() {
        let s = WeakScaling::new(0.01).unwrap();
        let config = Configuration::new((0..400).collect()).unwrap();
        let f = gartner_transform(&config, &s, 400);
        for (y, v) in f.values.iter().enumerate() {
            assert!((v / s.b.powf(1.0 + s.nu * y as f64) - 1.0).abs() < 1e-12);
            assert!(*v > 0.0);
        }
        // ε Σ ε⁻¹(1−β) Z(0, x) = b up to the geometric tail past the window.
        let total: f64 = s.eps * s.normalization(Normalization::SqrtEps) * f.values.iter().sum::<f64>();
        let tail = s.b * s.beta().powi(400);
        assert!((total + tail - s.b).abs() < 1e-12, "{total}");
    }

    #[test]
    fn expected_field_at_time_zero_is_initial_data() {
        let s = WeakScaling::new(0.05).unwrap();
        let e = expected_field(&s, 0.0, 10);
        for (y, v) in e.iter().enumerate() {
            assert!((v - s.step_initial(y as i64)).abs() < 1e-15);
        }
    }

    #[test]
    fn mean_residual_vanishes_at_time_zero() {
        let s = WeakScaling::new(0.05).unwrap();
        let r = she_mean_residual(&s, 0.0, 4, 1, 5).unwrap();
        assert_eq!(r.x, vec![0, 1, 2, 3, 4]);
        assert_eq!(r.max_abs_z, 0.0);
    }

    #[test]
    fn interpolation_is_exact_at_lattice_points() {
        let s = WeakScaling::new(0.01).unwrap();
        let field = LatticeField { time: 3.0, offset: 2.0, first: 0, values: vec![1.0, 3.0, 2.0, 5.0] };
        let sf = scaled_field(&field, &s, None);
        for j in 0..4 {
            assert_eq!(sf.eval(s.eps * field.xi(j)), field.values[j]);
        }
        assert!((sf.eval(s.eps * -1.5) - 2.0).abs() < 1e-12);
    }
}
