//! Event-driven HL-PushTASEP on ℤ≥0.
//!
//! A particle whose exponential clock rings becomes *active*: it jumps `j`
//! sites to the right with probability `(1−b)b^{j−1}`. If the jump would reach
//! the right neighbour, the active particle stops on the neighbour's site and
//! the neighbour becomes active in turn (a push cascade).
//!
//! Because activity only ever travels to the right, the restriction of the
//! process to `[0, x]` is itself Markov. Simulating only the particles that
//! start in `[0, x]` therefore gives the exact law of the height function on
//! `[0, x]`; this is what makes finite windows exact rather than approximate.

mod dynamics;
mod io;
mod reservoir;
mod six_vertex;

pub use dynamics::{activate, height, run_until, run_until_with_sink, sample_initial, step, JumpLaw};
pub use io::{write_height_csv, write_snapshot, HeightSample, Snapshot};
pub use reservoir::{influx_rate, run_with_influx, ReservoirRun};
pub use six_vertex::{six_vertex_run, six_vertex_step};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParticleError {
    #[error("jump parameter b = {0} must lie in (0, 1)")]
    InvalidB(f64),
    #[error("density rho = {0} must lie in (0, 1]")]
    InvalidRho(f64),
    #[error("window length must be at least 1")]
    InvalidWindow,
    #[error("explicit positions must be non-negative and strictly increasing")]
    InvalidPositions,
    #[error("configuration has no particles")]
    Empty,
    #[error("particle index {index} out of range for {len} particles")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("target time {t_end} precedes current time {time}")]
    TimeReversed { time: f64, t_end: f64 },
    #[error("six-vertex parameters need b1 in [0, 1] and b2 in (0, 1), got b1 = {b1}, b2 = {b2}")]
    InvalidSixVertex { b1: f64, b2: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub b: f64,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(b: f64, seed: u64) -> Result<Self, ParticleError> {
        let p = ModelParams { b, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParticleError> {
        if self.b > 0.0 && self.b < 1.0 {
            Ok(())
        } else {
            Err(ParticleError::InvalidB(self.b))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Each site of `[0, L]` occupied independently with probability `rho`.
    StepBernoulli { rho: f64, l: u64 },
    /// Every site of `[0, L]` occupied.
    Step { l: u64 },
    Explicit { positions: Vec<u64> },
}

impl InitialCondition {
    pub fn validate(&self) -> Result<(), ParticleError> {
        match self {
            InitialCondition::StepBernoulli { rho, l } => {
                if !(*rho > 0.0 && *rho <= 1.0) {
                    return Err(ParticleError::InvalidRho(*rho));
                }
                if *l < 1 {
                    return Err(ParticleError::InvalidWindow);
                }
                Ok(())
            }
            InitialCondition::Step { l } => {
                if *l < 1 {
                    Err(ParticleError::InvalidWindow)
                } else {
                    Ok(())
                }
            }
            InitialCondition::Explicit { positions } => {
                if positions.windows(2).all(|w| w[0] < w[1]) {
                    Ok(())
                } else {
                    Err(ParticleError::InvalidPositions)
                }
            }
        }
    }
}

/// Particle positions plus bookkeeping. Sentinels `x₀ = −1` and
/// `x_{N+1} = +∞` are implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub positions: Vec<u64>,
    pub time: f64,
    pub clock_rings: u64,
    pub max_cascade_depth: u32,
    pub boundary_touched: bool,
}

impl Configuration {
    pub fn new(positions: Vec<u64>) -> Result<Self, ParticleError> {
        if !positions.windows(2).all(|w| w[0] < w[1]) {
            return Err(ParticleError::InvalidPositions);
        }
        Ok(Configuration {
            positions,
            time: 0.0,
            clock_rings: 0,
            max_cascade_depth: 0,
            boundary_touched: false,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `N_x = #{i : x_i ≤ x}`.
    pub fn height(&self, x: i64) -> u64 {
        height(self, x)
    }

    /// Occupation variables `η(0..=window)`.
    pub fn occupations(&self, window: u64) -> Vec<bool> {
        let mut eta = vec![false; window as usize + 1];
        for &p in self.positions.iter().take_while(|&&p| p <= window) {
            eta[p as usize] = true;
        }
        eta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SixVertexParams {
    pub b1: f64,
    pub b2: f64,
    pub steps: u64,
}

impl SixVertexParams {
    pub fn validate(&self) -> Result<(), ParticleError> {
        // b1 ∈ {0, 1} are the degenerate always-move / never-move sweeps.
        if (0.0..=1.0).contains(&self.b1) && self.b2 > 0.0 && self.b2 < 1.0 {
            Ok(())
        } else {
            Err(ParticleError::InvalidSixVertex { b1: self.b1, b2: self.b2 })
        }
    }
}
