//! Left reservoir feeding particles in at the stationary rate.
//!
//! An arrival behaves like an active particle sitting at the virtual site −1:
//! it draws a geometric jump, settles on the first empty site it reaches, and
//! pushes any particle it lands on. Site 0 therefore receives a particle at
//! rate `τρ` via a push when occupied, and the arrival continues past an empty
//! site 0 with probability `b`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{sample_initial, Configuration, InitialCondition, JumpLaw, ModelParams, ParticleError};

/// Stationary influx rate `τ = ρ / ((1−ρ)(1−b))`.
pub fn influx_rate(rho: f64, b: f64) -> f64 {
    rho / ((1.0 - rho) * (1.0 - b))
}

#[derive(Clone, Debug)]
pub struct ReservoirRun {
    pub config: Configuration,
    pub arrivals: u64,
    /// Particles that left `[0, window]`.
    pub exits: u64,
}

/// Inserts one reservoir arrival. Returns `true` if a particle left the window.
fn arrive<R: Rng + ?Sized>(config: &mut Configuration, law: &JumpLaw, window: u64, rng: &mut R) -> bool {
    let jump = law.sample(rng);
    let pos = &mut config.positions;
    match pos.first().copied() {
        Some(first) if jump > first => {
            // Lands on the first particle, which continues with the remainder.
            pos.insert(0, first);
            let mut m = 1;
            let mut rem = jump - first;
            loop {
                let p = pos[m];
                if m + 1 == pos.len() {
                    pos[m] = p + rem;
                    break;
                }
                let gap = pos[m + 1] - p;
                if rem < gap {
                    pos[m] = p + rem;
                    break;
                }
                pos[m] = pos[m + 1];
                rem -= gap - 1;
                m += 1;
            }
            config.max_cascade_depth = config.max_cascade_depth.max(m as u32);
        }
        _ => pos.insert(0, jump - 1),
    }
    if pos.last().is_some_and(|&p| p > window) {
        pos.pop();
        true
    } else {
        false
    }
}

/// Runs the influx dynamics on `[0, window]` from a Bernoulli(`rho`) product
/// measure until `t_end`. Particles leaving the window are discarded, which is
/// exact for the occupation process on the window.
pub fn run_with_influx<R: Rng + ?Sized>(
    params: &ModelParams,
    rho: f64,
    t_end: f64,
    window: u64,
    rng: &mut R,
) -> Result<ReservoirRun, ParticleError> {
    params.validate()?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(ParticleError::InvalidRho(rho));
    }
    let ic = InitialCondition::StepBernoulli { rho, l: window };
    let config = match sample_initial(params, &ic, rng) {
        Ok(c) => c,
        Err(ParticleError::Empty) => Configuration::new(Vec::new())?,
        Err(e) => return Err(e),
    };
    let mut run = ReservoirRun { config, arrivals: 0, exits: 0 };
    advance_with_influx(&mut run, params, rho, t_end, window, rng)?;
    Ok(run)
}

/// Continues an influx run up to `t_end` (Gillespie over `N + τ`).
pub fn advance_with_influx<R: Rng + ?Sized>(
    run: &mut ReservoirRun,
    params: &ModelParams,
    rho: f64,
    t_end: f64,
    window: u64,
    rng: &mut R,
) -> Result<(), ParticleError> {
    let law = JumpLaw::new(params.b)?;
    let tau = influx_rate(rho, params.b);
    let config = &mut run.config;
    if t_end < config.time {
        return Err(ParticleError::TimeReversed { time: config.time, t_end });
    }
    let mut time = config.time;
    loop {
        let n = config.positions.len();
        let total = n as f64 + tau;
        let hold: f64 = Exp1.sample(rng);
        time += hold / total;
        if time > t_end {
            break;
        }
        let u = rng.random::<f64>() * total;
        let exited = if u < tau {
            run.arrivals += 1;
            arrive(config, &law, window, rng)
        } else {
            let index = ((u - tau) as usize).min(n - 1);
            config.clock_rings += 1;
            super::activate(config, &law, index, rng)?;
            if config.positions[n - 1] > window {
                config.positions.pop();
                true
            } else {
                false
            }
        };
        if exited {
            run.exits += 1;
            config.boundary_touched = true;
        }
    }
    config.time = t_end;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn tau_at_reference_point() {
        assert!((influx_rate(0.4, 0.5) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn arrival_into_empty_window_settles_geometrically() {
        let law = JumpLaw::new(0.5).unwrap();
        let mut rng = seeded(9);
        let trials = 100_000;
        let mut at_zero = 0;
        for _ in 0..trials {
            let mut c = Configuration::new(vec![]).unwrap();
            arrive(&mut c, &law, 1000, &mut rng);
            if c.positions == [0] {
                at_zero += 1;
            }
        }
        let f = at_zero as f64 / trials as f64;
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }

    #[test]
    fn arrival_onto_occupied_origin_pushes() {
        let law = JumpLaw::new(0.5).unwrap();
        let mut rng = seeded(2);
        let mut c = Configuration::new(vec![0, 5]).unwrap();
        arrive(&mut c, &law, 1000, &mut rng);
        assert_eq!(c.positions.len(), 3);
        assert_eq!(c.positions[0], 0);
        assert!(c.positions[1] >= 1);
        assert!(c.positions.windows(2).all(|w| w[0] < w[1]));
    }
}
