use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hlpush::f17;
use hlpush::observables::{classify_regime, height_along_ray, mean_and_se, RayExperiment};
use serde::{Deserialize, Serialize};

use crate::config::{check, csv_preamble, output_path, require, resolve, Resolve};
use crate::Outcome;

#[derive(clap::Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `auto` prints the regime of (b, ν, ρ) before simulating.
    #[arg(long)]
    pub regime: Option<String>,
    /// Output file name inside the output directory.
    #[arg(long)]
    pub output: Option<String>,
}

impl Resolve for Args {
    fn fill_defaults(&mut self) {
        self.b.get_or_insert(0.5);
        self.nu.get_or_insert(4.0);
        self.rho.get_or_insert(1.0);
        self.replicas.get_or_insert(100);
        self.seed.get_or_insert(1);
        self.output.get_or_insert_with(|| "simulate.csv".into());
    }
}

pub fn run(file: Option<&Path>, out_dir: &Path, flags: &Args) -> Outcome {
    let cfg = resolve(file, flags)?;
    let (b, nu, rho) = (cfg.b.unwrap(), cfg.nu.unwrap(), cfg.rho.unwrap());
    let t = require(cfg.t, "t")?;
    check(b > 0.0 && b < 1.0, "b", b, "in (0, 1)")?;
    check(rho > 0.0 && rho <= 1.0, "rho", rho, "in (0, 1]")?;
    check(nu > 0.0 && nu.is_finite(), "nu", nu, "positive")?;
    check(t > 0.0 && t.is_finite(), "t", t, "positive")?;
    match cfg.regime.as_deref() {
        None => {}
        Some("auto") => {
            let c = classify_regime(nu, b, rho)?;
            println!("regime: {:?} (rho_c = {:?}, m = {})", c.regime, c.rho_c, c.m_nu);
        }
        Some(other) => check(false, "regime", other, "`auto`")?,
    }
    let exp = RayExperiment { b, nu, rho, t, replicas: cfg.replicas.unwrap(), seed: cfg.seed.unwrap() };
    let samples = if exp.replicas == 0 { Vec::new() } else { height_along_ray(&exp)? };
    let path = output_path(out_dir, cfg.output.as_deref(), "simulate.csv")?;
    let mut w = BufWriter::new(File::create(&path)?);
    csv_preamble(&mut w, "simulate", &cfg)?;
    writeln!(w, "seed,replica,t,x,N,boundary_touched")?;
    for s in &samples {
        writeln!(w, "{},{},{},{},{},{}", exp.seed, s.replica, f17(s.t), s.x, s.n, s.boundary_touched)?;
    }
    w.flush()?;
    let heights: Vec<f64> = samples.iter().map(|s| s.n as f64).collect();
    let summary = mean_and_se(&heights);
    let touched = samples.iter().filter(|s| s.boundary_touched).count();
    println!(
        "replicas {}  mean N {:.4}  variance {:.4}  boundary touched {}  -> {}",
        samples.len(),
        summary.mean,
        summary.variance,
        touched,
        path.display()
    );
    Ok(true)
}
