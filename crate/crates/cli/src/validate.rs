use std::path::Path;

use hlpush::validation::{self, Options, ALL};
use serde::{Deserialize, Serialize};

use crate::config::{check, output_path, resolve, write_report, Resolve};
use crate::Outcome;

#[derive(clap::Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Comma-separated criterion ids (default: all).
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u8>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scales every replica count; anything but 1 is a smoke run.
    #[arg(long)]
    pub replica_scale: Option<f64>,
    #[arg(long)]
    pub output: Option<String>,
}

impl Resolve for Args {
    fn fill_defaults(&mut self) {
        let d = Options::default();
        self.only.get_or_insert_with(|| ALL.to_vec());
        self.seed.get_or_insert(d.seed);
        self.replica_scale.get_or_insert(d.replica_scale);
    }
}

pub fn run(file: Option<&Path>, out_dir: &Path, flags: &Args) -> Outcome {
    let cfg = resolve(file, flags)?;
    let ids = cfg.only.clone().unwrap();
    for id in &ids {
        check(ALL.contains(id), "only", id, "a criterion id in 1..=11")?;
    }
    let scale = cfg.replica_scale.unwrap();
    check(scale > 0.0 && scale.is_finite(), "replica_scale", scale, "positive")?;
    let opts = Options { seed: cfg.seed.unwrap(), replica_scale: scale };
    let mut reports = Vec::new();
    for id in ids {
        let report = validation::run(id, &opts)?;
        println!("{} ({:.1} s)", report.summary_line(), report.elapsed_s);
        for c in report.failed_checks() {
            println!("    {}: measured {} (reference {}, tolerance {})", c.name, c.measured, c.reference, c.tolerance);
        }
        reports.push(report);
    }
    let pass = reports.iter().all(|r| r.pass);
    let path = output_path(out_dir, cfg.output.as_deref(), "validation.json")?;
    write_report(&path, "validate", &cfg, pass, &reports)?;
    println!("{} of {} criteria passed -> {}", reports.iter().filter(|r| r.pass).count(), reports.len(), path.display());
    Ok(pass)
}
