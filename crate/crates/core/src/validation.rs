//! End-to-end acceptance checks.
//!
//! Each criterion runs a fixed experiment and returns a [`CriterionReport`]
//! listing every measured quantity next to its pinned tolerance. Checks marked
//! non-gating are diagnostics and do not affect the verdict.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{
    eigenfunction_residual, master_equation_pmf, single_particle_pmf, transition_pmf_contour, BetheVector, ExactError,
};
use crate::fredholm::{
    distribution_moments, f_gue, gaussian_via_fredholm, moment_ql, normal_cdf, q_laplace_finite_t,
    q_pochhammer_inf_real, CdfTable, Distribution, FredholmError, DEFAULT_DELTA,
};
use crate::observables::{
    classify_regime_with, height_along_ray, limit_shape, mean_and_se, rescale_fluctuations, Ecdf, ObservableError,
    RayExperiment, Regime,
};
use crate::particle_system::{run_with_influx, six_vertex_run, Configuration, ModelParams, ParticleError, SixVertexParams};
use crate::rng::{replica_rng, seeded};
use crate::she::{heat_kernel_estimate_check, semigroup_defect, she_mean_residual, SheError, WeakScaling};
use crate::C64;

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("unknown criterion {0}; valid ids are 1..=11")]
    UnknownCriterion(u8),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
    #[error(transparent)]
    Particle(#[from] ParticleError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    She(#[from] SheError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured − reference| ≤ tolerance`.
    Within,
    /// `measured ≤ tolerance`.
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    /// Whether the check counts toward the criterion verdict.
    pub gating: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, measured: f64, reference: f64, tolerance: f64) -> Self {
        let pass = (measured - reference).abs() <= tolerance;
        Check { name: name.into(), measured, reference, tolerance, relation: Relation::Within, pass, gating: true }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let pass = measured <= tolerance;
        Check { name: name.into(), measured, reference: 0.0, tolerance, relation: Relation::AtMost, pass, gating: true }
    }

    pub fn diagnostic(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub elapsed_s: f64,
}

impl CriterionReport {
    /// One-line verdict, e.g. `PASS criterion 3: Fredholm limit laws`.
    pub fn summary_line(&self) -> String {
        format!("{} criterion {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.title)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.gating && !c.pass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Options {
    pub seed: u64,
    /// Multiplies every Monte Carlo replica count (1 = the pinned sizes).
    pub replica_scale: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: 20_240_917, replica_scale: 1.0 }
    }
}

impl Options {
    fn replicas(&self, n: u64) -> u64 {
        ((n as f64 * self.replica_scale).round() as u64).max(2)
    }
}

pub const ALL: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "transition-probability oracles agree",
        2 => "Bethe eigenfunctions",
        3 => "Fredholm limit laws",
        4 => "finite-time q-Laplace transform and q-moments",
        5 => "law of large numbers",
        6 => "GUE regime fluctuations",
        7 => "Gaussian regime fluctuations",
        8 => "critical regime fluctuations",
        9 => "reservoir stationarity",
        10 => "weak noise scaling",
        11 => "six-vertex limit",
        _ => "unknown",
    }
}

/// Runs criterion `id`.
pub fn run(id: u8, opts: &Options) -> Result<CriterionReport, ValidationError> {
    let start = Instant::now();
    let checks = match id {
        1 => transition_oracles()?,
        2 => bethe(opts)?,
        3 => limit_laws()?,
        4 => finite_time(opts)?,
        5 => lln(opts)?,
        6 => regime(opts, 1.0, Regime::Gue, 0.05)?,
        7 => regime(opts, 0.2, Regime::Gaussian, 0.05)?,
        8 => regime(opts, critical_rho(NU, B), Regime::Goe2, 0.07)?,
        9 => stationarity(opts)?,
        10 => weak_noise(opts)?,
        11 => six_vertex(opts)?,
        _ => return Err(ValidationError::UnknownCriterion(id)),
    };
    let pass = checks.iter().all(|c| c.pass || !c.gating);
    Ok(CriterionReport {
        id,
        title: title(id).into(),
        seed: opts.seed,
        checks,
        pass,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

const B: f64 = 0.5;
const NU: f64 = 4.0;

fn critical_rho(nu: f64, b: f64) -> f64 {
    1.0 - (nu * (1.0 - b)).powf(-0.5)
}

fn transition_oracles() -> Result<Vec<Check>, ValidationError> {
    let mut worst: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        let me = master_equation_pmf(&[0], t, 80, B)?;
        for k in 0..=12u64 {
            let a = single_particle_pmf(t, k, B);
            let c = transition_pmf_contour(&[0], &[k], t, B, 64)?.value;
            let m = me.get(&[k]);
            worst = worst.max((a - c).abs()).max((a - m).abs()).max((c - m).abs());
        }
    }
    let mut checks = vec![Check::at_most("N=1: max pairwise gap of the three oracles", worst, 1e-8)];
    let cases: [(&[u64], usize, u64); 2] = [(&[0, 1], 60, 6), (&[0, 1, 2], 50, 5)];
    for (init, bound, top) in cases {
        let n = init.len();
        let me = master_equation_pmf(init, 0.5, bound, B)?;
        let finals: Vec<&Vec<u64>> = me.states.iter().filter(|s| s[n - 1] <= top).collect();
        let gaps: Vec<f64> = finals
            .par_iter()
            .map(|y| transition_pmf_contour(init, y, 0.5, B, 32).map(|c| (c.value - me.get(y)).abs()))
            .collect::<Result<_, _>>()?;
        let worst = gaps.into_iter().fold(0.0f64, f64::max);
        checks.push(Check::at_most(format!("N={n}: contour vs master equation, {} states", finals.len()), worst, 1e-6));
    }
    Ok(checks)
}

fn bethe(opts: &Options) -> Result<Vec<Check>, ValidationError> {
    use rand::Rng;
    let mut rng = seeded(opts.seed);
    let mut vectors = Vec::new();
    while vectors.len() < 20 {
        let mut z = || C64::from_polar(0.45 * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>());
        let pair = vec![z(), z()];
        if let Ok(v) = BetheVector::new(pair, B) {
            vectors.push(v);
        }
    }
    let mut worst: f64 = 0.0;
    for v in &vectors {
        for x in [[0u64, 1], [0, 3], [2, 5], [1, 7], [4, 5]] {
            worst = worst.max(eigenfunction_residual(v, &x, B, 200)?.residual);
        }
    }
    Ok(vec![Check::at_most("N=2: max residual over 20 random vectors", worst, 1e-8)])
}

fn limit_laws() -> Result<Vec<Check>, ValidationError> {
    let mut worst: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for s in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        let v = gaussian_via_fredholm(s, DEFAULT_DELTA)?;
        worst = worst.max((v.value - normal_cdf(s)).abs());
        gap = gap.max(v.cauchy_gap);
        gap = gap.max(f_gue(s)?.cauchy_gap);
    }
    let m = distribution_moments(Distribution::Gue, -9.0, 6.0)?;
    Ok(vec![
        Check::at_most("Gaussian kernel determinant vs Φ", worst, 1e-6),
        Check::within("F_GUE median", m.median, -1.2719, 1e-3),
        Check::within("F_GUE mean", m.mean, -1.7711, 1e-3),
        Check::at_most("largest Cauchy gap", gap, 1e-9),
    ])
}

fn finite_time(opts: &Options) -> Result<Vec<Check>, ValidationError> {
    let (x, t) = (5u64, 1.0);
    let zeta = -B.powi(-3);
    let observable = |n: u64| 1.0 / q_pochhammer_inf_real(zeta * B.powi(n as i32), B);
    let mut checks = Vec::new();
    for rho in [1.0, 0.5] {
        let runs = height_along_ray(&RayExperiment {
            b: B,
            nu: x as f64 / t,
            rho,
            t,
            replicas: opts.replicas(1_000_000),
            seed: opts.seed,
        })?;
        let heights: Vec<u64> = runs.iter().map(|r| r.n).collect();
        let mc = |f: &dyn Fn(u64) -> f64| mean_and_se(&heights.iter().map(|&n| f(n)).collect::<Vec<_>>());
        let s = mc(&observable);
        let exact = q_laplace_finite_t(x, t, B, rho, C64::new(zeta, 0.0))?.value.re;
        checks.push(Check::within(format!("ρ={rho}: q-Laplace vs MC (3 SE)"), exact, s.mean, 3.0 * s.se));
        for l in 1..=3usize {
            let s = mc(&|n| B.powi((l as u64 * n) as i32));
            let exact = moment_ql(x, t, B, rho, l)?.value;
            checks.push(Check::within(format!("ρ={rho}: E[b^({l}N)] vs MC (3 SE)"), exact, s.mean, 3.0 * s.se));
        }
        // At t = 0, N_x ~ Binomial(x+1, ρ).
        let binom: Vec<f64> = (0..=x + 1)
            .map(|k| {
                let c = statrs::function::factorial::binomial(x + 1, k);
                c * rho.powi(k as i32) * (1.0 - rho).powi((x + 1 - k) as i32)
            })
            .collect();
        let closed: f64 = binom.iter().enumerate().map(|(k, p)| p * observable(k as u64)).sum();
        let v = q_laplace_finite_t(x, 0.0, B, rho, C64::new(zeta, 0.0))?.value.re;
        checks.push(Check::within(format!("ρ={rho}: q-Laplace at t=0"), v, closed, 1e-6));
        for l in 1..=3 {
            let closed = (1.0 - rho + rho * B.powi(l as i32)).powi(x as i32 + 1);
            let v = moment_ql(x, 0.0, B, rho, l)?.value;
            checks.push(Check::within(format!("ρ={rho}: E[b^({l}N)] at t=0"), v, closed, 1e-6));
        }
    }
    Ok(checks)
}

fn lln(opts: &Options) -> Result<Vec<Check>, ValidationError> {
    let t = 1000.0;
    let ratios = |nu: f64| -> Result<Vec<f64>, ValidationError> {
        let runs =
            height_along_ray(&RayExperiment { b: B, nu, rho: 1.0, t, replicas: opts.replicas(100), seed: opts.seed })?;
        Ok(runs.iter().map(|r| r.n as f64 / t).collect())
    };
    let above = ratios(NU)?;
    let below = ratios(1.5)?;
    Ok(vec![
        Check::within("limit shape m_ν at ν=4", limit_shape(NU, B), 0.343146, 1e-6),
        Check::within("ν=4: mean N/t", mean_and_se(&above).mean, 0.343146, 0.02),
        Check::at_most("ν=1.5: max N/t", below.iter().copied().fold(0.0, f64::max), 0.01),
    ])
}

fn regime(opts: &Options, rho: f64, kind: Regime, ks_tol: f64) -> Result<Vec<Check>, ValidationError> {
    let t = 2000.0;
    let constants = classify_regime_with(NU, B, rho, Some(kind))?;
    let runs = height_along_ray(&RayExperiment { b: B, nu: NU, rho, t, replicas: opts.replicas(2000), seed: opts.seed })?;
    let pairs: Vec<(f64, f64)> = runs.iter().map(|r| (t, r.n as f64)).collect();
    let samples = rescale_fluctuations(&pairs, &constants)?;
    let mean = mean_and_se(&samples).mean;
    let mut checks = Vec::new();
    let cdf: Box<dyn Fn(f64) -> f64> = match kind {
        Regime::Gaussian => Box::new(normal_cdf),
        Regime::Gue => {
            let table = CdfTable::build(Distribution::Gue, -9.0, 6.0, 0.05)?;
            Box::new(move |s| table.eval(s))
        }
        _ => {
            let table = CdfTable::build(Distribution::Goe2, -9.0, 6.0, 0.05)?;
            Box::new(move |s| table.eval(s))
        }
    };
    let ecdf = Ecdf::new(&samples);
    checks.push(Check::at_most("KS distance to the limit law", ecdf.ks_distance(&cdf), ks_tol));
    if kind == Regime::Gue {
        checks.push(Check::within("mean of rescaled samples in [−2.05, −1.50]", mean, -1.775, 0.275));
    } else {
        checks.push(Check::within("mean of rescaled samples", mean, 0.0, f64::INFINITY).diagnostic());
    }
    if kind == Regime::Gaussian {
        // Same samples on the kinematic scale ρ(1−ρ)(ν − j′(ρ)) = α σ̃_ν².
        let kin: Vec<f64> = samples.iter().map(|s| s / constants.alpha.sqrt()).collect();
        let ks = Ecdf::new(&kin).ks_distance(&cdf);
        checks.push(Check::at_most("KS distance with σ̃_ν α^(1/2)", ks, ks_tol).diagnostic());
    } else {
        // Same samples on the scale (½ j″ A²)^{1/3} = σ_ν b^{−1/3}.
        let kpz: Vec<f64> = samples.iter().map(|s| s * B.cbrt()).collect();
        let ks = Ecdf::new(&kpz).ks_distance(&cdf);
        checks.push(Check::at_most("KS distance with σ_ν b^(−1/3)", ks, ks_tol).diagnostic());
        checks.push(Check::within("mean with σ_ν b^(−1/3)", mean_and_se(&kpz).mean, 0.0, f64::INFINITY).diagnostic());
    }
    Ok(checks)
}

fn stationarity(opts: &Options) -> Result<Vec<Check>, ValidationError> {
    let (rho, window, burn_in) = (0.4, 200u64, 200.0);
    let half = (window / 2) as usize;
    let params = ModelParams::new(B, opts.seed)?;
    let n = opts.replicas(10_000);
    let (occ, pairs) = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(opts.seed, r);
            let run = run_with_influx(&params, rho, burn_in, window, &mut rng)?;
            let eta = run.config.occupations(window);
            let occ: Vec<f64> = eta[..half].iter().map(|&e| e as u8 as f64).collect();
            let pairs: Vec<f64> = (0..half - 1).map(|x| (eta[x] && eta[x + 1]) as u8 as f64).collect();
            Ok((occ, pairs))
        })
        .try_reduce(
            || (vec![0.0; half], vec![0.0; half - 1]),
            |(mut a, mut b), (c, d)| {
                a.iter_mut().zip(&c).for_each(|(x, y)| *x += y);
                b.iter_mut().zip(&d).for_each(|(x, y)| *x += y);
                Ok::<_, ParticleError>((a, b))
            },
        )?;
    let nf = n as f64;
    let max_z = |sums: &[f64], p: f64| {
        let sd = (p * (1.0 - p) / nf).sqrt();
        sums.iter().fold(0.0f64, |a, s| a.max((s / nf - p).abs() / sd))
    };
    Ok(vec![
        Check::at_most("max |z| of occupation means on the left half", max_z(&occ, rho), 3.0),
        Check::at_most("max |z| of adjacent pair means on the left half", max_z(&pairs, rho * rho), 3.0),
    ])
}

fn weak_noise(opts: &Options) -> Result<Vec<Check>, ValidationError> {
    let s = WeakScaling::new(1e-2)?;
    let mean = she_mean_residual(&s, 50.0, opts.replicas(10_000) as usize, opts.seed, 25)?;
    let defect = [(1.0, 3.0), (3.0, 10.0), (10.0, 50.0)]
        .iter()
        .map(|&(a, b)| semigroup_defect(&s, a, b))
        .fold(0.0, f64::max);
    let est = heat_kernel_estimate_check(&[1e-2, 1e-3], &[], &[1.0, 10.0, 100.0], &[3.0, 30.0], 1.0, 1.0, 0.5)?;
    let mut checks = vec![
        Check::at_most("max |z| of the mean field, t=50", mean.max_abs_z, 4.0),
        Check::at_most("semigroup defect", defect, 1e-10),
    ];
    for c in &est.constants {
        let ratio = if c.c_fine.is_finite() { c.refinement_ratio.max(1.0 / c.refinement_ratio) } else { f64::INFINITY };
        checks.push(Check::at_most(format!("{}: refinement ratio of C", c.name), ratio, 2.0));
    }
    checks.push(Check::at_most("golden-ratio identity λν² + ν − 1 = 0", s.golden_residual(), 1e-14));
    checks.push(Check::within("mean drift γ", mean.drift, 0.0, f64::INFINITY).diagnostic());
    Ok(checks)
}

fn six_vertex(opts: &Options) -> Result<Vec<Check>, ValidationError> {
    let (eps, t) = (1e-2, 1.0);
    let sv = SixVertexParams { b1: 1.0 - eps, b2: B, steps: (t / eps).round() as u64 };
    let n = opts.replicas(100_000);
    let displacements: Vec<u64> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut state = Configuration::new(vec![0])?;
            six_vertex_run(&mut state, &sv, &mut replica_rng(opts.seed, r))?;
            Ok(state.positions[0])
        })
        .collect::<Result<_, ParticleError>>()?;
    let top = *displacements.iter().max().unwrap_or(&0) as usize;
    let mut hist = vec![0.0; top + 1];
    for &d in &displacements {
        hist[d as usize] += 1.0 / n as f64;
    }
    let mut tv = 0.0;
    let mut covered = 0.0;
    for (k, h) in hist.iter().enumerate() {
        let p = single_particle_pmf(t, k as u64, B);
        covered += p;
        tv += (h - p).abs();
    }
    tv = 0.5 * (tv + (1.0 - covered).max(0.0));
    Ok(vec![Check::at_most("total variation to the continuous-time law", tv, 0.05)])
}
