use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::Configuration;

/// One JSON-lines trajectory record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub positions: Vec<u64>,
    pub clock_rings: u64,
}

impl From<&Configuration> for Snapshot {
    fn from(c: &Configuration) -> Self {
        Snapshot { time: c.time, positions: c.positions.clone(), clock_rings: c.clock_rings }
    }
}

pub fn write_snapshot<W: Write>(mut w: W, config: &Configuration) -> io::Result<()> {
    serde_json::to_writer(&mut w, &Snapshot::from(config))?;
    w.write_all(b"\n")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightSample {
    pub seed: u64,
    pub t: f64,
    pub x: i64,
    pub n_x: u64,
}

/// CSV with columns `seed,t,x,N_x`.
pub fn write_height_csv<W: Write>(mut w: W, samples: &[HeightSample]) -> io::Result<()> {
    writeln!(w, "seed,t,x,N_x")?;
    for s in samples {
        writeln!(w, "{},{},{},{}", s.seed, crate::f17(s.t), s.x, s.n_x)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let mut c = Configuration::new(vec![1, 4, 6]).unwrap();
        c.time = 0.25;
        c.clock_rings = 3;
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &c).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.ends_with('\n'));
        let back: Snapshot = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(back, Snapshot::from(&c));
    }

    #[test]
    fn height_csv_header() {
        let mut buf = Vec::new();
        write_height_csv(&mut buf, &[HeightSample { seed: 1, t: 2.0, x: 8, n_x: 3 }]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next(), Some("seed,t,x,N_x"));
        assert_eq!(s.lines().nth(1), Some("1,2.0000000000000000e0,8,3"));
    }
}
