use super::ode::{dopri5, OdeOptions};
use super::{check_b, check_n, check_positions, ExactError};

/// Leaked mass above which [`master_equation_pmf`] refuses the bound.
pub const LEAK_TOL: f64 = 1e-10;

/// Generator of the N-particle process restricted to ordered tuples in
/// `[0, bound]`. A cascade that would move a particle past `bound` sends its
/// mass to a single absorbing leak state instead.
#[derive(Clone, Debug)]
pub struct TruncatedGenerator {
    pub lattice_bound: usize,
    pub n: usize,
    pub b: f64,
    states: Vec<Vec<u64>>,
    index: Vec<u32>,
    /// `(source, target, rate)` for every off-diagonal transition.
    transitions: Vec<(u32, u32, f64)>,
    /// Rate from each state into the leak state.
    leak: Vec<f64>,
}

impl TruncatedGenerator {
    pub fn new(n: usize, bound: usize, b: f64) -> Result<Self, ExactError> {
        check_b(b)?;
        if n == 0 || n > 3 {
            return Err(ExactError::TooManyParticles { n, max: 3 });
        }
        if bound + 1 < n {
            return Err(ExactError::EnlargeBound { leaked: 1.0, suggested: n });
        }
        let side = bound + 1;
        let mut states = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn combos(start: u64, side: u64, left: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for v in start..side {
                cur.push(v);
                combos(v + 1, side, left - 1, cur, out);
                cur.pop();
            }
        }
        combos(0, side as u64, n, &mut cur, &mut states);
        let mut index = vec![u32::MAX; side.pow(n as u32)];
        let key = |x: &[u64]| x.iter().fold(0usize, |acc, &v| acc * side + v as usize);
        for (i, s) in states.iter().enumerate() {
            index[key(s)] = i as u32;
        }
        let mut transitions = Vec::new();
        let mut leak = vec![0.0; states.len()];
        let mut outcomes: Vec<(Option<Vec<u64>>, f64)> = Vec::new();
        for (i, s) in states.iter().enumerate() {
            for m in 0..n {
                outcomes.clear();
                cascade_outcomes(s.clone(), m, 1.0, bound as u64, b, &mut outcomes);
                for (target, p) in outcomes.drain(..) {
                    match target {
                        Some(y) => transitions.push((i as u32, index[key(&y)], p)),
                        None => leak[i] += p,
                    }
                }
            }
        }
        Ok(TruncatedGenerator { lattice_bound: bound, n, b, states, index, transitions, leak })
    }

    pub fn states(&self) -> &[Vec<u64>] {
        &self.states
    }

    pub fn index_of(&self, x: &[u64]) -> Option<usize> {
        let side = self.lattice_bound + 1;
        if x.len() != self.n || x.iter().any(|&v| v as usize >= side) {
            return None;
        }
        let k = x.iter().fold(0usize, |acc, &v| acc * side + v as usize);
        match self.index[k] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    /// Row sums of the generator restricted to lattice states: `−leak rate`.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![-(self.n as f64); self.states.len()];
        for &(s, _, r) in &self.transitions {
            sums[s as usize] += r;
        }
        sums
    }

    /// `out = p Q` on the lattice states, with the leak inflow in the last slot.
    pub fn apply_forward(&self, p: &[f64], out: &mut [f64]) {
        let ns = self.states.len();
        let exit = self.n as f64;
        for i in 0..ns {
            out[i] = -exit * p[i];
        }
        for &(s, d, r) in &self.transitions {
            out[d as usize] += r * p[s as usize];
        }
        out[ns] = self.leak.iter().zip(p).map(|(l, q)| l * q).sum();
    }
}

/// Enumerates the cascade started by particle `m` as a tree over push
/// chains. `None` collects everything that leaves `[0, bound]`.
fn cascade_outcomes(mut pos: Vec<u64>, m: usize, weight: f64, bound: u64, b: f64, out: &mut Vec<(Option<Vec<u64>>, f64)>) {
    let n = pos.len();
    let p = pos[m];
    let limit = if m + 1 == n { bound + 1 } else { pos[m + 1] };
    let mut bj = 1.0;
    for j in 1..(limit - p) {
        let mut y = pos.clone();
        y[m] = p + j;
        out.push((Some(y), weight * (1.0 - b) * bj));
        bj *= b;
    }
    // bj = b^{limit − p − 1}: probability of reaching `limit`.
    if m + 1 == n {
        out.push((None, weight * bj));
    } else {
        pos[m] = limit;
        cascade_outcomes(pos, m + 1, weight * bj, bound, b, out);
    }
}

/// Joint law of the positions on the truncated lattice.
#[derive(Clone, Debug)]
pub struct JointPmf {
    pub states: Vec<Vec<u64>>,
    pub probs: Vec<f64>,
    pub leaked: f64,
    pub bound: usize,
}

impl JointPmf {
    pub fn get(&self, x: &[u64]) -> f64 {
        self.states.iter().position(|s| s == x).map_or(0.0, |i| self.probs[i])
    }

    /// Law of the `m`-th particle (0-based) on `[0, bound]`.
    pub fn marginal(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.bound + 1];
        for (s, p) in self.states.iter().zip(&self.probs) {
            out[s[m] as usize] += p;
        }
        out
    }
}

/// Integrates the forward equation from a point mass at `init`.
pub fn master_equation_pmf(init: &[u64], t: f64, bound: usize, b: f64) -> Result<JointPmf, ExactError> {
    master_equation_pmf_tol(init, t, bound, b, LEAK_TOL)
}

pub fn master_equation_pmf_tol(init: &[u64], t: f64, bound: usize, b: f64, leak_tol: f64) -> Result<JointPmf, ExactError> {
    check_n(init, 3)?;
    check_positions(init)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(ExactError::Domain { name: "t", value: t });
    }
    let gen = TruncatedGenerator::new(init.len(), bound, b)?;
    let start = gen.index_of(init).ok_or(ExactError::EnlargeBound {
        leaked: 1.0,
        suggested: *init.last().unwrap() as usize + 10,
    })?;
    let ns = gen.states.len();
    let mut y = vec![0.0; ns + 1];
    y[start] = 1.0;
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-16, ..OdeOptions::default() };
    dopri5(|p, d| gen.apply_forward(p, d), &mut y, t, opts).map_err(ExactError::Ode)?;
    let leaked = y[ns];
    if leaked > leak_tol {
        return Err(ExactError::EnlargeBound { leaked, suggested: bound * 3 / 2 + 10 });
    }
    y.truncate(ns);
    Ok(JointPmf { states: gen.states, probs: y, leaked, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_tree_for_three_particles() {
        // b = 1/2, [0,3,4], activate 0: stop at 2 has probability (1−b)b.
        let mut out = Vec::new();
        cascade_outcomes(vec![0, 3, 4], 0, 1.0, 100, 0.5, &mut out);
        let p = out.iter().find(|(y, _)| y.as_deref() == Some(&[2, 3, 4][..])).unwrap().1;
        assert!((p - 0.25).abs() < 1e-15);
        let total: f64 = out.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rows_only_lose_mass_through_leak() {
        let g = TruncatedGenerator::new(2, 12, 0.4).unwrap();
        for (i, s) in g.row_sums().into_iter().enumerate() {
            assert!(s <= 1e-14);
            assert!((s + g.leak[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn time_zero_is_point_mass() {
        let p = master_equation_pmf(&[0, 1], 0.0, 10, 0.5).unwrap();
        assert_eq!(p.get(&[0, 1]), 1.0);
        assert_eq!(p.probs.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn two_particles_leak_small() {
        let p = master_equation_pmf(&[0, 1], 0.5, 60, 0.5).unwrap();
        assert!(p.leaked < 1e-10);
        assert!((p.probs.iter().sum::<f64>() + p.leaked - 1.0).abs() < 1e-11);
    }

    #[test]
    fn small_bound_is_rejected() {
        match master_equation_pmf(&[0, 1], 2.0, 6, 0.5) {
            Err(ExactError::EnlargeBound { suggested, .. }) => assert!(suggested > 6),
            other => panic!("{other:?}"),
        }
    }
}
