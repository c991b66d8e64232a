use crate::C64;

use super::{check_b, ExactError};

/// Tolerance below which `1 − (1+b)z_i + b z_i z_j` counts as vanishing.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;
/// Largest truncation bound [`eigenfunction_residual`] accepts.
pub const TRUNCATION_TOL: f64 = 1e-10;

/// Spectral variables of a Bethe eigenfunction.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheVector {
    pub z: Vec<C64>,
}

impl BetheVector {
    pub fn new(z: Vec<C64>, b: f64) -> Result<Self, ExactError> {
        check_b(b)?;
        if z.is_empty() || z.len() > 3 {
            return Err(ExactError::TooManyParticles { n: z.len(), max: 3 });
        }
        for (i, zi) in z.iter().enumerate() {
            if (zi * b).norm() >= 1.0 {
                return Err(ExactError::Inadmissible(format!("|b z_{i}| = {} ≥ 1", (zi * b).norm())));
            }
            for (j, zj) in z.iter().enumerate() {
                if i != j && pair(*zi, *zj, b).norm() <= ADMISSIBILITY_TOL {
                    return Err(ExactError::Inadmissible(format!("1 − (1+b)z_{i} + b z_{i} z_{j} ≈ 0")));
                }
            }
        }
        Ok(BetheVector { z })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

#[inline]
pub(crate) fn pair(zi: C64, zj: C64, b: f64) -> C64 {
    1.0 - (1.0 + b) * zi + b * zi * zj
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub(crate) fn sign(perm: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                s = -s;
            }
        }
    }
    s
}

/// `A_σ(z) = sgn σ · Π_{i<j} (1 − (1+b)z_{σ(i)} + b z_{σ(i)}z_{σ(j)}) / (1 − (1+b)z_i + b z_i z_j)`.
pub(crate) fn a_sigma(perm: &[usize], z: &[C64], b: f64) -> C64 {
    let mut v = C64::new(sign(perm), 0.0);
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            v *= pair(z[perm[i]], z[perm[j]], b) / pair(z[i], z[j], b);
        }
    }
    v
}

/// `Φ(x; z) = Σ_σ A_σ(z) Π_i z_{σ(i)}^{x_i}`.
pub fn bethe_phi(x: &[i64], z: &[C64], b: f64) -> C64 {
    permutations(z.len())
        .iter()
        .map(|p| a_sigma(p, z, b) * x.iter().enumerate().map(|(i, &xi)| z[p[i]].powi(xi as i32)).product::<C64>())
        .sum()
}

/// `Σ_i −(1−z_i)/(1−b z_i)`.
pub fn eigenvalue(z: &[C64], b: f64) -> C64 {
    z.iter().map(|&zi| -(1.0 - zi) / (1.0 - b * zi)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub residual: f64,
    /// Bound on the contribution of last-particle jumps longer than `trunc`.
    pub truncation_bound: f64,
}

/// `|𝓛Φ(x; z) − E(z) Φ(x; z)|` with the generator applied to `Φ(·; z)`.
///
/// Pushes are enumerated exactly; jumps of the rightmost particle are summed
/// up to `trunc` and the remainder is bounded by `Σ_σ |A_σ| Π|z|^{x} · |z|^j`.
pub fn eigenfunction_residual(z: &BetheVector, x: &[u64], b: f64, trunc: u64) -> Result<Residual, ExactError> {
    check_b(b)?;
    super::check_n(x, 3)?;
    super::check_positions(x)?;
    if x.len() != z.len() {
        return Err(ExactError::TooManyParticles { n: x.len(), max: z.len() });
    }
    let zs = &z.z;
    let perms = permutations(zs.len());
    let amps: Vec<C64> = perms.iter().map(|p| a_sigma(p, zs, b)).collect();
    let phi = |y: &[i64]| -> C64 {
        perms
            .iter()
            .zip(&amps)
            .map(|(p, a)| a * y.iter().enumerate().map(|(i, &yi)| zs[p[i]].powi(yi as i32)).product::<C64>())
            .sum()
    };
    let envelope = |y: &[i64]| -> f64 {
        perms
            .iter()
            .zip(&amps)
            .map(|(p, a)| a.norm() * y.iter().enumerate().map(|(i, &yi)| zs[p[i]].norm().powi(yi as i32)).product::<f64>())
            .sum()
    };
    let zmax = zs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let x: Vec<i64> = x.iter().map(|&v| v as i64).collect();
    let phi_x = phi(&x);
    let mut gen = C64::new(0.0, 0.0);
    let mut tail = 0.0;
    for m in 0..x.len() {
        let mut pos = x.clone();
        let mut idx = m;
        let mut weight = 1.0;
        loop {
            let p = pos[idx];
            if idx + 1 == pos.len() {
                let mut bj = 1.0;
                for j in 1..=trunc as i64 {
                    let mut y = pos.clone();
                    y[idx] = p + j;
                    gen += weight * (1.0 - b) * bj * (phi(&y) - phi_x);
                    bj *= b;
                }
                // bj = b^trunc: mass of the dropped jumps.
                let env = envelope(&pos);
                let geo = if b * zmax < 1.0 {
                    (1.0 - b) * zmax * (b * zmax).powi(trunc as i32) / (1.0 - b * zmax)
                } else {
                    f64::INFINITY
                };
                tail += weight * (bj * phi_x.norm() + env * geo);
                break;
            }
            let gap = pos[idx + 1] - p;
            let mut bj = 1.0;
            for j in 1..gap {
                let mut y = pos.clone();
                y[idx] = p + j;
                gen += weight * (1.0 - b) * bj * (phi(&y) - phi_x);
                bj *= b;
            }
            weight *= bj;
            pos[idx] = pos[idx + 1];
            idx += 1;
        }
    }
    let residual = (gen - eigenvalue(zs, b) * phi_x).norm();
    if tail > TRUNCATION_TOL {
        return Err(ExactError::Truncation { bound: tail, tol: TRUNCATION_TOL });
    }
    Ok(Residual { residual, truncation_bound: tail })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_particle_telescopes() {
        let z = BetheVector::new(vec![C64::new(0.3, -0.4)], 0.5).unwrap();
        let r = eigenfunction_residual(&z, &[4], 0.5, 200).unwrap();
        assert!(r.residual < 1e-12, "{r:?}");
    }

    #[test]
    fn two_particle_reference_point() {
        let zs = vec![C64::new(0.1, 0.05), C64::new(-0.12, 0.0)];
        let z = BetheVector::new(zs.clone(), 0.5).unwrap();
        let r = eigenfunction_residual(&z, &[0, 3], 0.5, 200).unwrap();
        assert!(r.residual < 1e-8, "{r:?}");
        let swapped = BetheVector::new(vec![zs[1], zs[0]], 0.5).unwrap();
        let r2 = eigenfunction_residual(&swapped, &[0, 3], 0.5, 200).unwrap();
        assert!((r.residual - r2.residual).abs() < 1e-15);
    }

    #[test]
    fn three_particles() {
        let z = BetheVector::new(vec![C64::new(0.1, 0.05), C64::new(-0.12, 0.0), C64::new(0.0, 0.2)], 0.5).unwrap();
        for x in [[0, 1, 2], [0, 3, 4], [1, 4, 9]] {
            let r = eigenfunction_residual(&z, &x, 0.5, 200).unwrap();
            assert!(r.residual < 1e-12, "{x:?}: {r:?}");
        }
    }

    #[test]
    fn rejects_inadmissible() {
        assert!(BetheVector::new(vec![C64::new(3.0, 0.0)], 0.5).is_err());
        // 1 − 1.5 z + 0.5 z² = 0 at z = 1 (pair with itself is excluded; use z_i = z_j = 1).
        assert!(BetheVector::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)], 0.5).is_err());
    }
}
