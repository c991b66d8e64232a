use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hlpush::she::{heat_kernel_estimate_check, moment_bound_check, she_mean_residual, simulate_fields, Normalization, WeakScaling};
use serde::{Deserialize, Serialize};

use crate::config::{check, csv_preamble, output_path, resolve, usage, write_report, Resolve};
use crate::crosscheck::verdict;
use crate::Outcome;

#[derive(clap::Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// field, mean, kernel or moments.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Snapshot times of `field`.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Lattice size of `field`.
    #[arg(long)]
    pub sites: Option<usize>,
    /// Which replica stream `field` uses.
    #[arg(long)]
    pub replica: Option<u64>,
    /// Time of `mean`.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub half: Option<usize>,
    /// Macroscopic horizon T (times up to T/ε).
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub coarse_eps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub fine_eps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub coarse_dt: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub fine_dt: Option<Vec<f64>>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long)]
    pub v: Option<f64>,
    /// Coarse time points of `moments`.
    #[arg(long)]
    pub points: Option<usize>,
    /// sqrt-eps or literal.
    #[arg(long)]
    pub normalization: Option<String>,
    /// Multiply the field by e^{−γt}.
    #[arg(long)]
    pub compensate: Option<bool>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gate for `mean` (max |z|).
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub output: Option<String>,
}

impl Resolve for Args {
    fn fill_defaults(&mut self) {
        self.mode.get_or_insert_with(|| "field".into());
        self.eps.get_or_insert(1e-2);
        self.seed.get_or_insert(1);
        match self.mode.as_deref() {
            Some("field") => {
                self.times.get_or_insert_with(|| vec![10.0, 50.0, 100.0]);
                self.sites.get_or_insert(400);
                self.replica.get_or_insert(0);
            }
            Some("mean") => {
                self.t.get_or_insert(50.0);
                self.half.get_or_insert(25);
                self.replicas.get_or_insert(10_000);
                self.tolerance.get_or_insert(4.0);
            }
            Some("kernel") => {
                self.coarse_eps.get_or_insert_with(|| vec![1e-2, 1e-3]);
                self.fine_eps.get_or_insert_with(Vec::new);
                self.coarse_dt.get_or_insert_with(|| vec![1.0, 10.0, 100.0]);
                self.fine_dt.get_or_insert_with(|| vec![3.0, 30.0]);
                self.horizon.get_or_insert(1.0);
                self.u.get_or_insert(1.0);
                self.v.get_or_insert(0.5);
            }
            Some("moments") => {
                self.horizon.get_or_insert(1.0);
                self.points.get_or_insert(4);
                self.replicas.get_or_insert(200);
                self.normalization.get_or_insert_with(|| "sqrt-eps".into());
                self.compensate.get_or_insert(true);
            }
            _ => {}
        }
    }
}

fn scaling(eps: f64) -> anyhow::Result<WeakScaling> {
    WeakScaling::new(eps).map_err(|e| usage(format!("field `eps`: {e}")))
}

pub fn run(file: Option<&Path>, out_dir: &Path, flags: &Args) -> Outcome {
    let cfg = resolve(file, flags)?;
    let mode = cfg.mode.clone().unwrap();
    let s = scaling(cfg.eps.unwrap())?;
    let seed = cfg.seed.unwrap();
    match mode.as_str() {
        "field" => {
            let times = cfg.times.clone().unwrap();
            let sites = cfg.sites.unwrap();
            check(sites >= 1, "sites", sites, "at least 1")?;
            check(
                times.iter().all(|t| *t >= 0.0 && t.is_finite()) && times.windows(2).all(|w| w[0] <= w[1]),
                "times",
                format!("{times:?}"),
                "non-negative and increasing",
            )?;
            let fields = simulate_fields(&s, &times, sites, seed, cfg.replica.unwrap());
            let path = output_path(out_dir, cfg.output.as_deref(), "she_field.csv")?;
            let mut w = BufWriter::new(File::create(&path)?);
            csv_preamble(&mut w, "she", &cfg)?;
            for f in &fields {
                f.write_csv(&mut w, s.eps)?;
            }
            w.flush()?;
            println!("{} snapshots -> {}", fields.len(), path.display());
            Ok(true)
        }
        "mean" => {
            let r = she_mean_residual(&s, cfg.t.unwrap(), cfg.replicas.unwrap(), seed, cfg.half.unwrap())?;
            let tol = cfg.tolerance.unwrap();
            let pass = r.max_abs_z <= tol;
            let path = output_path(out_dir, cfg.output.as_deref(), "she_mean.json")?;
            write_report(&path, "she", &cfg, pass, &r)?;
            println!("{} mean field: max |z| = {} (gate {tol}), γ = {} -> {}", verdict(pass), r.max_abs_z, r.drift, path.display());
            Ok(pass)
        }
        "kernel" => {
            let r = heat_kernel_estimate_check(
                cfg.coarse_eps.as_deref().unwrap(),
                cfg.fine_eps.as_deref().unwrap(),
                cfg.coarse_dt.as_deref().unwrap(),
                cfg.fine_dt.as_deref().unwrap(),
                cfg.horizon.unwrap(),
                cfg.u.unwrap(),
                cfg.v.unwrap(),
            )
            .map_err(|e| usage(format!("field `coarse_eps`/`fine_eps`: {e}")))?;
            let pass = r.constants.iter().all(|c| c.stable);
            let path = output_path(out_dir, cfg.output.as_deref(), "she_kernel.json")?;
            write_report(&path, "she", &cfg, pass, &r)?;
            for c in &r.constants {
                println!("{} {}: C = {} (refinement ratio {})", verdict(c.stable), c.name, c.c_fine, c.refinement_ratio);
            }
            Ok(pass)
        }
        "moments" => {
            let normalization = match cfg.normalization.as_deref() {
                Some("sqrt-eps") => Normalization::SqrtEps,
                Some("literal") => Normalization::Literal,
                other => return Err(usage(format!("field `normalization` = {other:?} must be sqrt-eps or literal"))),
            };
            let r = moment_bound_check(
                &s,
                cfg.horizon.unwrap(),
                cfg.points.unwrap(),
                cfg.replicas.unwrap(),
                seed,
                normalization,
                cfg.compensate.unwrap(),
            )?;
            let pass = r.c_fine.is_finite() && r.refinement_ratio < 2.0 && r.refinement_ratio > 0.5;
            let path = output_path(out_dir, cfg.output.as_deref(), "she_moments.json")?;
            write_report(&path, "she", &cfg, pass, &r)?;
            println!("{} moment bound: C = {} (refinement ratio {}) -> {}", verdict(pass), r.c_fine, r.refinement_ratio, path.display());
            Ok(pass)
        }
        other => Err(usage(format!("field `mode` = {other:?} must be field, mean, kernel or moments"))),
    }
}
