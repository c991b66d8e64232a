use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::particle_system::{run_until_with_sink, sample_initial, Configuration, InitialCondition, JumpLaw, ModelParams, ParticleError};
use crate::rng::replica_rng;

/// Replicated measurement of `N_{⌊νt⌋}(t)` from step-Bernoulli data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayExperiment {
    pub b: f64,
    pub nu: f64,
    pub rho: f64,
    pub t: f64,
    pub replicas: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub replica: u64,
    pub t: f64,
    pub x: u64,
    pub n: u64,
    /// Whether any particle left `[0, x]` during the run.
    pub boundary_touched: bool,
}

/// Only the initial occupation of `[0, x]` can influence `N_x`, so each
/// replica samples that window and discards particles as they pass `x`; the
/// result is exact, not a finite-size approximation.
pub fn height_along_ray(exp: &RayExperiment) -> Result<Vec<RaySample>, ParticleError> {
    let law = JumpLaw::new(exp.b)?;
    let x = (exp.nu * exp.t).floor() as u64;
    let params = ModelParams::new(exp.b, exp.seed)?;
    let ic = InitialCondition::StepBernoulli { rho: exp.rho, l: x.max(1) };
    ic.validate()?;
    (0..exp.replicas)
        .into_par_iter()
        .map(|replica| {
            let mut rng = replica_rng(exp.seed, replica);
            let mut config = match sample_initial(&params, &ic, &mut rng) {
                Ok(c) => c,
                Err(ParticleError::Empty) => Configuration::new(Vec::new())?,
                Err(e) => return Err(e),
            };
            run_until_with_sink(&mut config, &law, exp.t, x, &mut rng)?;
            Ok(RaySample {
                replica,
                t: exp.t,
                x,
                n: config.height(x as i64),
                boundary_touched: config.boundary_touched,
            })
        })
        .collect()
}
