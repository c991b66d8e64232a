use std::path::Path;

use hlpush::exact::{master_equation_pmf, single_particle_pmf, transition_pmf_contour};
use hlpush::fredholm::{moment_ql, q_laplace_finite_t, q_pochhammer_inf_real};
use hlpush::observables::{height_along_ray, mean_and_se, RayExperiment};
use hlpush::she::{she_mean_residual, WeakScaling};
use hlpush::C64;
use serde::{Deserialize, Serialize};

use crate::config::{check, output_path, resolve, usage, write_report, Resolve};
use crate::Outcome;

#[derive(clap::Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// qlaplace, moment, transition or she-mean.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub x: Option<u64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// q-Laplace argument (real, negative); default `−b⁻³`.
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<f64>,
    /// Moment order.
    #[arg(long = "order")]
    pub l: Option<usize>,
    /// Initial and final positions for `transition`.
    #[arg(long, value_delimiter = ',')]
    pub x0: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub x1: Option<Vec<u64>>,
    /// Lattice bound of the master equation.
    #[arg(long)]
    pub bound: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Half-width of the `she-mean` window.
    #[arg(long)]
    pub half: Option<usize>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the gate: standard errors for MC comparisons, absolute
    /// difference for exact ones, max |z| for `she-mean`.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub output: Option<String>,
}

impl Resolve for Args {
    fn fill_defaults(&mut self) {
        self.b.get_or_insert(0.5);
        self.seed.get_or_insert(1);
        match self.kind.as_deref() {
            Some("qlaplace") | Some("moment") => {
                self.x.get_or_insert(5);
                self.t.get_or_insert(1.0);
                self.rho.get_or_insert(1.0);
                if self.kind.as_deref() == Some("qlaplace") {
                    let b = self.b.unwrap();
                    self.zeta.get_or_insert(-b.powi(-3));
                } else {
                    self.l.get_or_insert(1);
                }
            }
            Some("transition") => {
                self.t.get_or_insert(0.5);
                self.bound.get_or_insert(60);
            }
            Some("she-mean") => {
                self.eps.get_or_insert(1e-2);
                self.t.get_or_insert(50.0);
                self.half.get_or_insert(25);
                self.replicas.get_or_insert(10_000);
            }
            _ => {}
        }
        self.replicas.get_or_insert(100_000);
    }
}

#[derive(Serialize)]
struct Comparison {
    exact: f64,
    other: f64,
    /// Monte Carlo standard error; `None` for exact-vs-exact comparisons.
    std_err: Option<f64>,
    /// `|exact − other|`, in standard errors when `std_err` is present.
    discrepancy: f64,
    tolerance: f64,
}

/// Heights `N_x(t)` from `replicas` runs.
fn heights(x: u64, t: f64, b: f64, rho: f64, replicas: u64, seed: u64) -> anyhow::Result<Vec<u64>> {
    // ⌊νt⌋ = x even after rounding.
    let nu = (x as f64 + 0.5) / t;
    Ok(height_along_ray(&RayExperiment { b, nu, rho, t, replicas, seed })?.into_iter().map(|s| s.n).collect())
}

/// Law of `N_x(0)`: Binomial(x+1, ρ).
fn initial_law(x: u64, rho: f64) -> Vec<f64> {
    (0..=x + 1)
        .map(|k| statrs::function::factorial::binomial(x + 1, k) * rho.powi(k as i32) * (1.0 - rho).powi((x + 1 - k) as i32))
        .collect()
}

fn versus_mc(exact: f64, samples: &[f64], sigmas: f64) -> Comparison {
    let s = mean_and_se(samples);
    let gap = (exact - s.mean).abs();
    let discrepancy = match (s.se > 0.0, gap <= 1e-12) {
        (true, _) => gap / s.se,
        (false, true) => 0.0,
        (false, false) => f64::INFINITY,
    };
    Comparison { exact, other: s.mean, std_err: Some(s.se), discrepancy, tolerance: sigmas }
}

fn versus_exact(exact: f64, other: f64, tol: f64) -> Comparison {
    Comparison { exact, other, std_err: None, discrepancy: (exact - other).abs(), tolerance: tol }
}

pub fn run(file: Option<&Path>, out_dir: &Path, flags: &Args) -> Outcome {
    let cfg = resolve(file, flags)?;
    let kind = cfg.kind.clone().ok_or_else(|| usage("missing required field `kind`"))?;
    let b = cfg.b.unwrap();
    check(b > 0.0 && b < 1.0, "b", b, "in (0, 1)")?;
    let (replicas, seed) = (cfg.replicas.unwrap(), cfg.seed.unwrap());
    let cmp = match kind.as_str() {
        "qlaplace" | "moment" => {
            let (x, t, rho) = (cfg.x.unwrap(), cfg.t.unwrap(), cfg.rho.unwrap());
            check(t >= 0.0 && t.is_finite(), "t", t, "non-negative")?;
            check(rho > 0.0 && rho <= 1.0, "rho", rho, "in (0, 1]")?;
            let f: Box<dyn Fn(u64) -> f64> = if kind == "qlaplace" {
                let zeta = cfg.zeta.unwrap();
                check(zeta < 0.0, "zeta", zeta, "negative")?;
                Box::new(move |n| 1.0 / q_pochhammer_inf_real(zeta * b.powi(n as i32), b))
            } else {
                let l = cfg.l.unwrap();
                check(l >= 1, "l", l, "at least 1")?;
                Box::new(move |n| b.powi((l as u64 * n) as i32))
            };
            let exact = if kind == "qlaplace" {
                q_laplace_finite_t(x, t, b, rho, C64::new(cfg.zeta.unwrap(), 0.0))?.value.re
            } else {
                moment_ql(x, t, b, rho, cfg.l.unwrap())?.value
            };
            if t == 0.0 {
                let closed: f64 = initial_law(x, rho).iter().enumerate().map(|(k, p)| p * f(k as u64)).sum();
                versus_exact(exact, closed, cfg.tolerance.unwrap_or(1e-6))
            } else {
                check(replicas >= 2, "replicas", replicas, "at least 2")?;
                let values: Vec<f64> = heights(x, t, b, rho, replicas, seed)?.into_iter().map(&f).collect();
                versus_mc(exact, &values, cfg.tolerance.unwrap_or(3.0))
            }
        }
        "transition" => {
            let x0 = cfg.x0.clone().ok_or_else(|| usage("missing required field `x0`"))?;
            let x1 = cfg.x1.clone().ok_or_else(|| usage("missing required field `x1`"))?;
            check(x0.len() == x1.len() && (1..=3).contains(&x0.len()), "x1", format!("{x1:?}"), "as long as x0, with 1 to 3 particles")?;
            let t = cfg.t.unwrap();
            let contour = transition_pmf_contour(&x0, &x1, t, b, 64)?.value;
            if x0.len() == 1 {
                let k = x1[0].checked_sub(x0[0]);
                let oracle = k.map_or(0.0, |k| single_particle_pmf(t, k, b));
                versus_exact(contour, oracle, cfg.tolerance.unwrap_or(1e-8))
            } else {
                let me = master_equation_pmf(&x0, t, cfg.bound.unwrap(), b)?;
                versus_exact(contour, me.get(&x1), cfg.tolerance.unwrap_or(1e-6))
            }
        }
        "she-mean" => {
            let eps = cfg.eps.unwrap();
            let s = WeakScaling::new(eps).map_err(|e| usage(format!("field `eps`: {e}")))?;
            let r = she_mean_residual(&s, cfg.t.unwrap(), replicas as usize, seed, cfg.half.unwrap())?;
            let tol = cfg.tolerance.unwrap_or(4.0);
            let pass = r.max_abs_z <= tol;
            let path = output_path(out_dir, cfg.output.as_deref(), "crosscheck_she-mean.json")?;
            write_report(&path, "crosscheck", &cfg, pass, &r)?;
            println!("{} she-mean: max |z| = {} (gate {tol}) -> {}", verdict(pass), r.max_abs_z, path.display());
            return Ok(pass);
        }
        other => return Err(usage(format!("field `kind` = {other:?} must be qlaplace, moment, transition or she-mean"))),
    };
    let pass = cmp.discrepancy <= cmp.tolerance;
    let path = output_path(out_dir, cfg.output.as_deref(), &format!("crosscheck_{kind}.json"))?;
    write_report(&path, "crosscheck", &cfg, pass, &cmp)?;
    println!(
        "{} {kind}: exact {} vs {} (discrepancy {}, gate {}) -> {}",
        verdict(pass),
        cmp.exact,
        cmp.other,
        cmp.discrepancy,
        cmp.tolerance,
        path.display()
    );
    Ok(pass)
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
