//! Adaptive Dormand–Prince 5(4) integrator for linear systems `y' = f(y)`.

/// Tolerances and step limits.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-15, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (first-same-as-last: equal to the last row of `A`).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the autonomous system `y' = f(y)` from 0 to `t_end` in place.
pub fn dopri5<F>(f: F, y: &mut [f64], t_end: f64, opts: OdeOptions) -> Result<OdeStats, String>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = y.len();
    let mut stats = OdeStats::default();
    if t_end <= 0.0 || n == 0 {
        return Ok(stats);
    }
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    f(y, &mut k[0]);
    let mut t = 0.0;
    // Initial step from the ratio of solution and derivative scales.
    let sc: Vec<f64> = y.iter().map(|yi| opts.atol + opts.rtol * yi.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let (d0, d1) = (rms(y), rms(&k[0]));
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(t_end);
    let mut err_prev: f64 = 1e-4;
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(format!("step limit reached at t = {t}"));
        }
        h = h.min(t_end - t);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, a) in A[s][..s].iter().enumerate() {
                    acc += h * a * k[j][i];
                }
                tmp[i] = acc;
            }
            f(&tmp, &mut k[s]);
        }
        // tmp holds the 5th-order solution (stage 7 argument).
        y5.copy_from_slice(&tmp);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for s in 0..7 {
                e += (B5[s] - B4[s]) * k[s][i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * e).abs() / sc);
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
            k.swap(0, 6);
            stats.accepted += 1;
            // PI controller (Hairer & Wanner, β = 0.04).
            let fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.17) * err_prev.powf(0.04) };
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-4);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h < 1e-14 * t.max(t_end * 1e-6) {
            return Err(format!("step size underflow at t = {t}"));
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut y = [1.0, 2.0];
        dopri5(|y, d| {
            d[0] = -y[0];
            d[1] = -3.0 * y[1];
        }, &mut y, 2.0, OdeOptions::default())
        .unwrap();
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-12);
        assert!((y[1] - 2.0 * (-6.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn rotation_conserves_norm() {
        let mut y = [1.0, 0.0];
        dopri5(|y, d| {
            d[0] = -y[1];
            d[1] = y[0];
        }, &mut y, std::f64::consts::PI, OdeOptions::default())
        .unwrap();
        assert!((y[0] + 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }
}
