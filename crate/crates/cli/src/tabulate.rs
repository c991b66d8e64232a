use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hlpush::fredholm::{tabulate, write_table_csv, Distribution};
use serde::{Deserialize, Serialize};

use crate::config::{check, csv_preamble, output_path, resolve, usage, Resolve};
use crate::Outcome;

#[derive(clap::Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// gue, goe2 or gauss.
    #[arg(long)]
    pub dist: Option<String>,
    /// Explicit comma-separated grid; otherwise `from`, `to`, `step`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub output: Option<String>,
}

impl Resolve for Args {
    fn fill_defaults(&mut self) {
        self.dist.get_or_insert_with(|| "gue".into());
        if self.grid.is_none() {
            let (from, to, step) = (*self.from.get_or_insert(-5.0), *self.to.get_or_insert(3.0), *self.step.get_or_insert(0.1));
            if step > 0.0 && to >= from {
                let n = ((to - from) / step + 1e-9).floor() as usize;
                self.grid = Some((0..=n).map(|i| from + i as f64 * step).collect());
            }
        }
    }
}

pub fn run(file: Option<&Path>, out_dir: &Path, flags: &Args) -> Outcome {
    let cfg = resolve(file, flags)?;
    let name = cfg.dist.clone().unwrap();
    let dist: Distribution = name.parse().map_err(|e: String| usage(format!("field `dist`: {e}")))?;
    let grid = cfg.grid.clone().ok_or_else(|| usage("field `step` must be positive and `to` ≥ `from`"))?;
    check(!grid.is_empty(), "grid", "[]", "non-empty")?;
    check(grid.windows(2).all(|w| w[0] < w[1]), "grid", format!("{grid:?}"), "strictly increasing")?;
    let rows = tabulate(dist, &grid)?;
    let path = output_path(out_dir, cfg.output.as_deref(), &format!("tabulate_{name}.csv"))?;
    let mut w = BufWriter::new(File::create(&path)?);
    csv_preamble(&mut w, "tabulate", &cfg)?;
    write_table_csv(&mut w, &rows)?;
    w.flush()?;
    let uncertified = rows.iter().filter(|r| !r.certified).count();
    // A distribution function cannot decrease; allow for the quadrature error.
    let certified: Vec<f64> = rows.iter().filter(|r| r.certified).map(|r| r.value).collect();
    let monotone = certified.windows(2).all(|p| p[1] >= p[0] - 1e-10);
    if !monotone {
        eprintln!("value column is not monotone");
    }
    println!("{} rows, {} uncertified -> {}", rows.len(), uncertified, path.display());
    Ok(uncertified == 0 && monotone)
}
