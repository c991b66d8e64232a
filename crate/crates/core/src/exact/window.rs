use super::ode::{dopri5, OdeOptions};
use super::{check_b, ExactError};

/// Largest window handled by the occupation chain (`2^{x+1}` states).
pub const MAX_WINDOW: u64 = 14;

/// Exact law of `N_x(t)` under step-Bernoulli(`rho`) data.
///
/// The occupations of `[0, x]` form a Markov chain on their own: a ring at an
/// occupied site `i` empties it and sends activity to the right, which passes
/// occupied sites for free, settles at each empty site with probability
/// `1−b`, and leaves the window otherwise. Entry `n` of the result is
/// `P(N_x(t) = n)`, `0 ≤ n ≤ x+1`.
pub fn window_height_pmf(x: u64, t: f64, b: f64, rho: f64) -> Result<Vec<f64>, ExactError> {
    check_b(b)?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(ExactError::Domain { name: "rho", value: rho });
    }
    if x > MAX_WINDOW {
        return Err(ExactError::Domain { name: "x", value: x as f64 });
    }
    let sites = x as usize + 1;
    let ns = 1usize << sites;
    let mut transitions: Vec<(u32, u32, f64)> = Vec::new();
    // Every particle rings at rate 1.
    let exit: Vec<f64> = (0..ns).map(|m| (m as u32).count_ones() as f64).collect();
    for mask in 0..ns {
        for i in (0..sites).filter(|&i| mask & (1 << i) != 0) {
            let base = mask & !(1 << i);
            let mut reach = 1.0;
            for k in i + 1..sites {
                if mask & (1 << k) != 0 {
                    continue;
                }
                transitions.push((mask as u32, (base | 1 << k) as u32, reach * (1.0 - b)));
                reach *= b;
            }
            // Leaving the window: the particle count drops by one.
            transitions.push((mask as u32, base as u32, reach));
        }
    }
    let mut p: Vec<f64> = (0..ns)
        .map(|mask| {
            let k = (mask as u32).count_ones() as i32;
            if rho >= 1.0 {
                if mask == ns - 1 { 1.0 } else { 0.0 }
            } else {
                rho.powi(k) * (1.0 - rho).powi(sites as i32 - k)
            }
        })
        .collect();
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-16, ..OdeOptions::default() };
    dopri5(
        |p, d| {
            for i in 0..ns {
                d[i] = -exit[i] * p[i];
            }
            for &(s, t, r) in &transitions {
                d[t as usize] += r * p[s as usize];
            }
        },
        &mut p,
        t,
        opts,
    )
    .map_err(ExactError::Ode)?;
    let mut law = vec![0.0; sites + 1];
    for (mask, q) in p.iter().enumerate() {
        law[(mask as u32).count_ones() as usize] += q;
    }
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_window() {
        // N_0(t) = 1 iff the particle at 0 never rang.
        let law = window_height_pmf(0, 0.7, 0.5, 1.0).unwrap();
        assert!((law[1] - (-0.7f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_master_equation() {
        let t = 0.8;
        let law = window_height_pmf(1, t, 0.5, 1.0).unwrap();
        let joint = crate::exact::master_equation_pmf(&[0, 1], t, 64, 0.5).unwrap();
        let mut expect = [0.0; 3];
        for (s, p) in joint.states.iter().zip(&joint.probs) {
            expect[s.iter().filter(|&&v| v <= 1).count()] += p;
        }
        for n in 0..3 {
            assert!((law[n] - expect[n]).abs() < 1e-9, "n={n}: {} vs {}", law[n], expect[n]);
        }
    }

    #[test]
    fn normalised() {
        let law = window_height_pmf(5, 1.0, 0.5, 0.5).unwrap();
        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
