//! Discrete-time stochastic six-vertex (SSVM) particle sweep.
//!
//! Particles are updated left to right against the positions of the previous
//! time step. An unpushed particle stays with probability `b1`; otherwise it
//! moves `j ≥ 1` sites with probability `(1−b2) b2^{j−1}`, stopping on the
//! right neighbour if it reaches it. A particle that is landed on is pushed one
//! site and then keeps moving with the same geometric continuation, so its
//! displacement is again geometric (≥ 1) and may push further.
//!
//! `Y^{1−ε,b}(t/ε) → HL-PushTASEP(b)` at time `t` as `ε → 0`.

use rand::Rng;

use super::{Configuration, JumpLaw, ParticleError, SixVertexParams};

pub fn six_vertex_step<R: Rng + ?Sized>(
    state: &mut Configuration,
    sv: &SixVertexParams,
    rng: &mut R,
) -> Result<(), ParticleError> {
    sv.validate()?;
    let law = JumpLaw::new(sv.b2)?;
    sweep(state, sv.b1, &law, rng);
    Ok(())
}

fn sweep<R: Rng + ?Sized>(state: &mut Configuration, b1: f64, law: &JumpLaw, rng: &mut R) {
    let pos = &mut state.positions;
    let n = pos.len();
    let mut m = 0;
    while m < n {
        if rng.random::<f64>() < b1 {
            m += 1;
            continue;
        }
        // Move particle m, then walk along the push chain it triggers.
        let mut jump = law.sample(rng);
        let mut depth = 0;
        loop {
            let p = pos[m];
            if m + 1 == n {
                pos[m] = p + jump;
                state.boundary_touched = true;
                break;
            }
            let gap = pos[m + 1] - p;
            if jump < gap {
                pos[m] = p + jump;
                break;
            }
            pos[m] = pos[m + 1];
            jump -= gap - 1;
            m += 1;
            depth += 1;
        }
        state.max_cascade_depth = state.max_cascade_depth.max(depth);
        m += 1;
    }
    state.clock_rings += 1;
    state.time += 1.0;
}

/// Runs `sv.steps` sweeps.
pub fn six_vertex_run<R: Rng + ?Sized>(
    state: &mut Configuration,
    sv: &SixVertexParams,
    rng: &mut R,
) -> Result<(), ParticleError> {
    sv.validate()?;
    let law = JumpLaw::new(sv.b2)?;
    for _ in 0..sv.steps {
        sweep(state, sv.b1, &law, rng);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn pushed_chain_keeps_order() {
        let sv = SixVertexParams { b1: 0.3, b2: 0.6, steps: 50 };
        let mut c = Configuration::new(vec![0, 1, 2, 3, 4, 10, 11]).unwrap();
        six_vertex_run(&mut c, &sv, &mut seeded(5)).unwrap();
        assert!(c.positions.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(c.time, 50.0);
    }

    #[test]
    fn b1_one_is_identity() {
        let sv = SixVertexParams { b1: 1.0, b2: 0.5, steps: 10 };
        let mut c = Configuration::new(vec![0, 4, 9]).unwrap();
        six_vertex_run(&mut c, &sv, &mut seeded(1)).unwrap();
        assert_eq!(c.positions, vec![0, 4, 9]);
    }

    #[test]
    fn b1_zero_gap_one_pushes() {
        let sv = SixVertexParams { b1: 0.0, b2: 0.5, steps: 1 };
        for seed in 0..50 {
            let mut c = Configuration::new(vec![0, 1]).unwrap();
            six_vertex_run(&mut c, &sv, &mut seeded(seed)).unwrap();
            assert_eq!(c.positions[0], 1);
            assert!(c.positions[1] >= 2);
        }
    }
}
