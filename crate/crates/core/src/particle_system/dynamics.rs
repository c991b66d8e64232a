use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use super::{Configuration, InitialCondition, ModelParams, ParticleError};

/// Geometric jump law `P(j) = (1−b) b^{j−1}`, `j ≥ 1`.
#[derive(Clone, Copy, Debug)]
pub struct JumpLaw {
    b: f64,
    inv_neg_ln_b: f64,
}

impl JumpLaw {
    pub fn new(b: f64) -> Result<Self, ParticleError> {
        if !(b > 0.0 && b < 1.0) {
            return Err(ParticleError::InvalidB(b));
        }
        Ok(JumpLaw { b, inv_neg_ln_b: -1.0 / b.ln() })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `1 + ⌊E / (−ln b)⌋` with `E ~ Exp(1)` has exactly the geometric law.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let e: f64 = Exp1.sample(rng);
        1 + (e * self.inv_neg_ln_b) as u64
    }
}

pub fn sample_initial<R: Rng + ?Sized>(
    params: &ModelParams,
    ic: &InitialCondition,
    rng: &mut R,
) -> Result<Configuration, ParticleError> {
    params.validate()?;
    ic.validate()?;
    let positions: Vec<u64> = match ic {
        InitialCondition::Step { l } => (0..=*l).collect(),
        InitialCondition::StepBernoulli { rho, l } => {
            if *rho >= 1.0 {
                (0..=*l).collect()
            } else {
                (0..=*l).filter(|_| rng.random::<f64>() < *rho).collect()
            }
        }
        InitialCondition::Explicit { positions } => positions.clone(),
    };
    if positions.is_empty() {
        return Err(ParticleError::Empty);
    }
    Configuration::new(positions)
}

/// Runs the push cascade started by particle `index` with an already drawn
/// jump length. Returns `(depth, index of the last particle moved)`.
///
/// The jump of a pushed particle is drawn by memorylessness: conditioned on
/// reaching the neighbour (`jump ≥ gap`), `jump − gap + 1` is again geometric.
#[inline]
fn cascade(positions: &mut [u64], mut m: usize, mut jump: u64) -> (u32, usize) {
    let n = positions.len();
    let mut depth = 0u32;
    loop {
        let p = positions[m];
        if m + 1 == n {
            positions[m] = p + jump;
            return (depth, m);
        }
        let gap = positions[m + 1] - p;
        if jump < gap {
            positions[m] = p + jump;
            return (depth, m);
        }
        positions[m] = positions[m + 1];
        jump -= gap - 1;
        m += 1;
        depth += 1;
    }
}

/// One full cascade started by particle `index`.
pub fn activate<R: Rng + ?Sized>(
    config: &mut Configuration,
    law: &JumpLaw,
    index: usize,
    rng: &mut R,
) -> Result<(), ParticleError> {
    let len = config.positions.len();
    if index >= len {
        return Err(ParticleError::IndexOutOfRange { index, len });
    }
    let jump = law.sample(rng);
    let (depth, last) = cascade(&mut config.positions, index, jump);
    config.max_cascade_depth = config.max_cascade_depth.max(depth);
    if last + 1 == len {
        config.boundary_touched = true;
    }
    Ok(())
}

/// Exponential holding time at total rate `N`, then a uniformly chosen
/// particle is activated.
pub fn step<R: Rng + ?Sized>(
    config: &mut Configuration,
    law: &JumpLaw,
    rng: &mut R,
) -> Result<(), ParticleError> {
    let n = config.positions.len();
    if n == 0 {
        return Err(ParticleError::Empty);
    }
    let hold: f64 = Exp1.sample(rng);
    config.time += hold / n as f64;
    let index = rng.random_range(0..n);
    config.clock_rings += 1;
    activate(config, law, index, rng)
}

/// Advances the configuration to `t_end`.
///
/// With a fixed particle number the ring times form a Poisson process of rate
/// `N`, so the number of rings in `[time, t_end]` is drawn directly and each
/// ring activates a uniformly chosen particle. This has the same law as
/// iterating [`step`] and stopping before the first holding time past `t_end`.
pub fn run_until<R: Rng + ?Sized>(
    config: &mut Configuration,
    law: &JumpLaw,
    t_end: f64,
    rng: &mut R,
) -> Result<(), ParticleError> {
    if t_end < config.time {
        return Err(ParticleError::TimeReversed { time: config.time, t_end });
    }
    let n = config.positions.len();
    if n == 0 {
        return Err(ParticleError::Empty);
    }
    let lambda = n as f64 * (t_end - config.time);
    let rings = if lambda > 0.0 {
        Poisson::new(lambda).expect("positive finite rate").sample(rng) as u64
    } else {
        0
    };
    let mut depth_max = config.max_cascade_depth;
    let mut touched = config.boundary_touched;
    for _ in 0..rings {
        let index = rng.random_range(0..n);
        let jump = law.sample(rng);
        let (depth, last) = cascade(&mut config.positions, index, jump);
        depth_max = depth_max.max(depth);
        touched |= last + 1 == n;
    }
    config.clock_rings += rings;
    config.max_cascade_depth = depth_max;
    config.boundary_touched = touched;
    config.time = t_end;
    Ok(())
}

/// Like [`run_until`] but particles that pass site `sink` are discarded.
///
/// The height function `N_x` for `x ≤ sink` is unaffected: a particle to the
/// right of `sink` can never influence the motion of particles at or left of
/// it. The live particle count shrinks, so the clock is advanced event by
/// event. `boundary_touched` records whether any particle was discarded.
pub fn run_until_with_sink<R: Rng + ?Sized>(
    config: &mut Configuration,
    law: &JumpLaw,
    t_end: f64,
    sink: u64,
    rng: &mut R,
) -> Result<(), ParticleError> {
    if t_end < config.time {
        return Err(ParticleError::TimeReversed { time: config.time, t_end });
    }
    let cut = config.positions.partition_point(|&p| p <= sink);
    if cut < config.positions.len() {
        config.positions.truncate(cut);
        config.boundary_touched = true;
    }
    let mut time = config.time;
    let mut depth_max = config.max_cascade_depth;
    while !config.positions.is_empty() {
        let n = config.positions.len();
        let hold: f64 = Exp1.sample(rng);
        time += hold / n as f64;
        if time > t_end {
            break;
        }
        let index = rng.random_range(0..n);
        let jump = law.sample(rng);
        let (depth, last) = cascade(&mut config.positions, index, jump);
        depth_max = depth_max.max(depth);
        config.clock_rings += 1;
        if last + 1 == n && config.positions[last] > sink {
            config.positions.pop();
            config.boundary_touched = true;
        }
    }
    config.max_cascade_depth = depth_max;
    config.time = t_end;
    Ok(())
}

/// `N_x(t) = #{i : x_i ≤ x}`; zero for `x < 0`.
pub fn height(config: &Configuration, x: i64) -> u64 {
    if x < 0 {
        return 0;
    }
    config.positions.partition_point(|&p| p <= x as u64) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn config(p: &[u64]) -> Configuration {
        Configuration::new(p.to_vec()).unwrap()
    }

    #[test]
    fn step_fill() {
        let params = ModelParams::new(0.5, 1).unwrap();
        let mut rng = seeded(1);
        let c = sample_initial(&params, &InitialCondition::Step { l: 4 }, &mut rng).unwrap();
        assert_eq!(c.positions, vec![0, 1, 2, 3, 4]);
        let c = sample_initial(&params, &InitialCondition::StepBernoulli { rho: 1.0, l: 4 }, &mut rng).unwrap();
        assert_eq!(c.positions, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn explicit_must_increase() {
        let params = ModelParams::new(0.5, 1).unwrap();
        let ic = InitialCondition::Explicit { positions: vec![2, 2] };
        assert_eq!(
            sample_initial(&params, &ic, &mut seeded(0)).unwrap_err(),
            ParticleError::InvalidPositions
        );
        let ic = InitialCondition::Explicit { positions: vec![] };
        assert_eq!(sample_initial(&params, &ic, &mut seeded(0)).unwrap_err(), ParticleError::Empty);
    }

    #[test]
    fn heights() {
        let c = config(&[0, 2, 5]);
        assert_eq!(height(&c, 3), 2);
        assert_eq!(height(&c, -4), 0);
        assert_eq!(height(&c, i64::MAX), 3);
    }

    #[test]
    fn forced_push() {
        let law = JumpLaw::new(0.5).unwrap();
        let mut rng = seeded(3);
        for _ in 0..100 {
            let mut c = config(&[0, 1]);
            activate(&mut c, &law, 0, &mut rng).unwrap();
            assert_eq!(c.positions[0], 1);
            assert!(c.positions[1] >= 2);
            assert!(c.boundary_touched);
            assert_eq!(c.max_cascade_depth, 1);
        }
    }

    #[test]
    fn zero_length_run_is_identity() {
        let law = JumpLaw::new(0.5).unwrap();
        let mut c = config(&[0, 3, 7]);
        let before = c.clone();
        run_until(&mut c, &law, 0.0, &mut seeded(1)).unwrap();
        assert_eq!(c, before);
        assert!(run_until(&mut c, &law, -1.0, &mut seeded(1)).is_err());
    }

    #[test]
    fn sink_run_matches_full_run_in_law() {
        // Mean of N_6(2) from step data on [0, 6]: with and without discarding.
        let law = JumpLaw::new(0.5).unwrap();
        let reps = 20_000;
        let (mut a, mut b) = (0.0, 0.0);
        for r in 0..reps {
            let mut rng = crate::rng::replica_rng(11, r);
            let mut c = config(&[0, 1, 2, 3, 4, 5, 6]);
            run_until(&mut c, &law, 2.0, &mut rng).unwrap();
            a += height(&c, 6) as f64;
            let mut rng = crate::rng::replica_rng(12, r);
            let mut c = config(&[0, 1, 2, 3, 4, 5, 6]);
            run_until_with_sink(&mut c, &law, 2.0, 6, &mut rng).unwrap();
            b += c.positions.len() as f64;
        }
        let (a, b) = (a / reps as f64, b / reps as f64);
        // Both means are ~3.5 with standard deviation ~1.3 per replica.
        assert!((a - b).abs() < 4.0 * 1.5 * (2.0 / reps as f64).sqrt(), "{a} vs {b}");
    }
}
