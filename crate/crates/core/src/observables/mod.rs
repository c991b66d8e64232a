//! Scaling constants of the fluctuation theorem, KPZ scaling theory and
//! empirical statistics of simulated heights.

mod samples;
mod stats;

pub use samples::{height_along_ray, RaySample, RayExperiment};
pub use stats::{ks_distance, mean_and_se, read_samples_csv, write_samples_csv, Ecdf, Summary};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::particle_system::Configuration;

#[derive(Debug, Error, PartialEq)]
pub enum ObservableError {
    #[error("parameter {name} = {value} outside its domain")]
    Domain { name: &'static str, value: f64 },
    #[error("no fluctuation scaling in regime {0:?}")]
    NoScaling(Regime),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `ρ > ρ_c`: Tracy–Widom GUE at scale `t^{1/3}`.
    Gue,
    /// `ρ = ρ_c`: squared GOE at scale `t^{1/3}`.
    Goe2,
    /// `ρ < ρ_c`: Gaussian at scale `t^{1/2}`.
    Gaussian,
    /// `ν ≤ 1/(1−b)`: inside the rarefaction fan, zero density.
    SubcriticalFan,
}

/// Constants of the three-regime limit theorem. Entries that do not apply to
/// the parameters are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub regime: Regime,
    pub nu: f64,
    pub b: f64,
    pub rho: f64,
    pub rho_c: Option<f64>,
    pub m_nu: f64,
    pub sigma_nu: Option<f64>,
    pub varrho: Option<f64>,
    pub m_tilde: Option<f64>,
    pub sigma_tilde: Option<f64>,
    pub alpha: f64,
}

/// Relative tolerance used to call `ρ = ρ_c`.
pub const CRITICAL_TOL: f64 = 1e-12;

fn check(name: &'static str, value: f64, ok: bool) -> Result<(), ObservableError> {
    if ok {
        Ok(())
    } else {
        Err(ObservableError::Domain { name, value })
    }
}

pub fn classify_regime(nu: f64, b: f64, rho: f64) -> Result<ScalingConstants, ObservableError> {
    classify_regime_with(nu, b, rho, None)
}

/// As [`classify_regime`], with an optional regime override for callers that
/// know the parameters are exactly critical.
pub fn classify_regime_with(
    nu: f64,
    b: f64,
    rho: f64,
    forced: Option<Regime>,
) -> Result<ScalingConstants, ObservableError> {
    check("b", b, b > 0.0 && b < 1.0)?;
    check("rho", rho, rho > 0.0 && rho <= 1.0)?;
    check("nu", nu, nu > 0.0 && nu.is_finite())?;
    let alpha = (1.0 - rho) / rho;
    let k = nu * (1.0 - b);
    if k <= 1.0 {
        return Ok(ScalingConstants {
            regime: Regime::SubcriticalFan,
            nu,
            b,
            rho,
            rho_c: None,
            m_nu: 0.0,
            sigma_nu: None,
            varrho: None,
            m_tilde: None,
            sigma_tilde: None,
            alpha,
        });
    }
    let sk = k.sqrt();
    let rho_c = 1.0 - 1.0 / sk;
    let m_nu = (sk - 1.0).powi(2) / (1.0 - b);
    let sigma_nu = b.cbrt() * (sk - 1.0).powf(2.0 / 3.0) / ((1.0 - b).sqrt() * nu.powf(1.0 / 6.0));
    let varrho = b * (sk - 1.0);
    let regime = forced.unwrap_or(if (rho - rho_c).abs() <= CRITICAL_TOL {
        Regime::Goe2
    } else if rho > rho_c {
        Regime::Gue
    } else {
        Regime::Gaussian
    });
    let (m_tilde, sigma_tilde) = if regime == Regime::Gaussian && alpha > 0.0 {
        let radicand = (k * (1.0 - rho).powi(2) - 1.0) / (alpha * alpha * (1.0 - b));
        let m = nu / (1.0 + alpha) - 1.0 / (alpha * (1.0 - b));
        (Some(m), (radicand > 0.0).then(|| radicand.sqrt()))
    } else {
        (None, None)
    };
    Ok(ScalingConstants {
        regime,
        nu,
        b,
        rho,
        rho_c: Some(rho_c),
        m_nu,
        sigma_nu: Some(sigma_nu),
        varrho: Some(varrho),
        m_tilde,
        sigma_tilde,
        alpha,
    })
}

/// `m̃_ν` of the Gaussian regime, defined for any `ρ < 1`.
pub fn m_tilde(nu: f64, b: f64, rho: f64) -> f64 {
    let alpha = (1.0 - rho) / rho;
    nu / (1.0 + alpha) - 1.0 / (alpha * (1.0 - b))
}

/// Macroscopic density profile `lim N_{νt}(t)/t`.
pub fn limit_shape(nu: f64, b: f64) -> f64 {
    let k = nu * (1.0 - b);
    if k > 1.0 {
        (k.sqrt() - 1.0).powi(2) / (1.0 - b)
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpzQuantities {
    pub j_rho: f64,
    pub a_rho: f64,
    pub lambda_rho: f64,
    pub sigma_check: f64,
    /// Characteristic speed `y` with `ρ = 1 − (y(1−b))^{−1/2}`.
    pub y: f64,
}

/// Steady-state current, integrated covariance and the KPZ coupling.
///
/// `λ(ρ) = −2 y^{3/2} b (1−b)^{1/2}` is used as the coupling. Note that
/// differentiating `j` twice gives the same expression without the factor `b`;
/// only the form with `b` reproduces `σ_ν` through `(−½λA²)^{1/3}`.
pub fn kpz_quantities(rho: f64, b: f64) -> Result<KpzQuantities, ObservableError> {
    check("rho", rho, rho > 0.0 && rho < 1.0)?;
    check("b", b, b > 0.0 && b < 1.0)?;
    let y = 1.0 / ((1.0 - rho).powi(2) * (1.0 - b));
    let j_rho = rho / ((1.0 - rho) * (1.0 - b));
    let a_rho = rho * (1.0 - rho);
    let lambda_rho = -2.0 * y.powf(1.5) * b * (1.0 - b).sqrt();
    let sigma_check = (-0.5 * lambda_rho * a_rho * a_rho).cbrt();
    Ok(KpzQuantities { j_rho, a_rho, lambda_rho, sigma_check, y })
}

/// Rescales `(t, N_{νt}(t))` pairs to the fluctuation variable of the regime.
pub fn rescale_fluctuations(
    samples: &[(f64, f64)],
    constants: &ScalingConstants,
) -> Result<Vec<f64>, ObservableError> {
    let (center, scale, exponent) = match constants.regime {
        Regime::Gue | Regime::Goe2 => (
            constants.m_nu,
            constants.sigma_nu.ok_or(ObservableError::NoScaling(constants.regime))?,
            1.0 / 3.0,
        ),
        Regime::Gaussian => (
            constants.m_tilde.ok_or(ObservableError::NoScaling(constants.regime))?,
            constants.sigma_tilde.ok_or(ObservableError::NoScaling(constants.regime))?,
            0.5,
        ),
        Regime::SubcriticalFan => return Err(ObservableError::NoScaling(Regime::SubcriticalFan)),
    };
    samples
        .iter()
        .map(|&(t, n)| {
            if t > 0.0 {
                Ok((center * t - n) / (scale * t.powf(exponent)))
            } else {
                Err(ObservableError::NonPositiveTime(t))
            }
        })
        .collect()
}

/// Checks `{N_y ≥ m} = {x_m ≤ y}` for every particle `m` and every site `y`
/// up to one past the rightmost particle.
pub fn height_duality_holds(config: &Configuration) -> bool {
    let Some(&last) = config.positions.last() else {
        return true;
    };
    (0..=last as i64 + 1).all(|y| {
        let n = config.height(y);
        config
            .positions
            .iter()
            .enumerate()
            .all(|(i, &x)| (n > i as u64) == (x as i64 <= y))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gue_reference_point() {
        let c = classify_regime(4.0, 0.5, 1.0).unwrap();
        assert_eq!(c.regime, Regime::Gue);
        assert!((c.m_nu - 0.343146).abs() < 1e-6);
        assert!((c.varrho.unwrap() - 0.207107).abs() < 1e-6);
        assert!(c.sigma_tilde.is_none() && c.m_tilde.is_none());
    }

    #[test]
    fn critical_and_gaussian_points() {
        let rc = 1.0 - 0.5f64.sqrt();
        assert_eq!(classify_regime(4.0, 0.5, rc).unwrap().regime, Regime::Goe2);
        let g = classify_regime(4.0, 0.5, 0.2).unwrap();
        assert_eq!(g.regime, Regime::Gaussian);
        assert!((g.m_tilde.unwrap() - 0.3).abs() < 1e-12);
        assert!((g.sigma_tilde.unwrap() - 0.187083).abs() < 1e-6);
        assert!((g.alpha - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fan_and_limit_shape() {
        assert_eq!(classify_regime(1.5, 0.5, 1.0).unwrap().regime, Regime::SubcriticalFan);
        assert_eq!(limit_shape(2.0, 0.5), 0.0);
        assert!((limit_shape(4.0, 0.5) - 0.343146).abs() < 1e-6);
        let nu = 1e9;
        assert!((limit_shape(nu, 0.5) / nu - 1.0).abs() < 1e-4);
    }

    #[test]
    fn kpz_reference_point() {
        let rho = 1.0 - 0.5f64.sqrt();
        let k = kpz_quantities(rho, 0.5).unwrap();
        assert!((k.y - 4.0).abs() < 1e-12);
        assert!((k.j_rho - 0.828427).abs() < 1e-6);
        assert_eq!(kpz_quantities(0.5, 0.3).unwrap().a_rho, 0.25);
        assert!(kpz_quantities(1.0, 0.5).is_err());
    }

    #[test]
    fn rescaling_is_affine() {
        let c = classify_regime(4.0, 0.5, 1.0).unwrap();
        let t = 1000.0;
        let n = c.m_nu * t;
        let s = c.sigma_nu.unwrap() * t.cbrt();
        let r = rescale_fluctuations(&[(t, n), (t, n + s)], &c).unwrap();
        assert!(r[0].abs() < 1e-12);
        assert!((r[1] - (r[0] - 1.0)).abs() < 1e-12);
        let fan = classify_regime(1.0, 0.5, 1.0).unwrap();
        assert!(rescale_fluctuations(&[(t, n)], &fan).is_err());
    }

    #[test]
    fn duality_on_fixed_configuration() {
        let c = Configuration::new(vec![0, 2, 3, 9]).unwrap();
        assert!(height_duality_holds(&c));
    }
}
