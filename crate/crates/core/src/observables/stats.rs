use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean.
    pub se: f64,
}

/// Sample mean, unbiased variance and standard error.
pub fn mean_and_se(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary { n, mean: f64::NAN, variance: f64::NAN, se: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Summary { n, mean, variance, se: (variance / n as f64).sqrt() }
}

/// Empirical distribution function.
#[derive(Clone, Debug)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ecdf { sorted }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `sup_x |F_n(x) − F(x)|` for a continuous `F`. Ties are handled because
    /// both one-sided gaps are checked at every order statistic.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                ((i + 1) as f64 / n - f).max(f - i as f64 / n)
            })
            .fold(0.0, f64::max)
    }
}

pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    assert!(!samples.is_empty(), "KS distance of an empty sample");
    Ecdf::new(samples).ks_distance(cdf)
}

/// Single-column CSV with header `value`.
pub fn write_samples_csv<W: Write>(mut w: W, values: &[f64]) -> io::Result<()> {
    writeln!(w, "value")?;
    for v in values {
        writeln!(w, "{}", crate::f17(*v))?;
    }
    Ok(())
}

/// Reads the last column of a headed CSV as floats.
pub fn read_samples_csv<R: BufRead>(r: R) -> io::Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or("").trim();
        let v = field
            .parse::<f64>()
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    #[test]
    fn single_sample_at_median() {
        assert!((ks_distance(&[0.5], uniform) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_grid_is_close() {
        let n = 1000;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_distance(&s, uniform) - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ties_counted_as_a_jump() {
        let s = [0.5, 0.5, 0.5, 0.5];
        assert!((ks_distance(&s, uniform) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn summary_and_csv_round_trip() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let s = mean_and_se(&v);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &v).unwrap();
        assert_eq!(read_samples_csv(&buf[..]).unwrap(), v);
    }
}
