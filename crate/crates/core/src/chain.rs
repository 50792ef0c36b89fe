//! The embedded per-cycle Markov chain over (source bit, correct count)
//! and the long-term average error.

use crate::cycle::ndp_given_n_pmf;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::pmf::Pmf;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Per-state transmission capacity: `capacity[N]` is the number of nodes
/// the source may update in a cycle starting with N correct nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyTable {
    capacity: Vec<u32>,
}

impl PolicyTable {
    /// Validates 0 <= capacity[N] <= n - N for every N.
    pub fn new(n: u32, capacity: Vec<u32>) -> Result<Self> {
        if capacity.len() != n as usize + 1 {
            return Err(Error::PolicyLength {
                got: capacity.len(),
                expected: n as usize + 1,
            });
        }
        for (big_n, &c) in capacity.iter().enumerate() {
            let max = n - big_n as u32;
            if c > max {
                return Err(Error::PolicyCapacity {
                    state: big_n as u32,
                    capacity: c,
                    max,
                });
            }
        }
        Ok(PolicyTable { capacity })
    }

    /// The constant-m policy, clamped to the number of incorrect nodes.
    pub fn constant(params: &ModelParams) -> Self {
        let caps = (0..=params.n).map(|big_n| params.m.min(params.n - big_n)).collect();
        PolicyTable { capacity: caps }
    }

    pub fn capacity(&self, big_n: u32) -> u32 {
        self.capacity[big_n as usize]
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacity
    }

    pub fn len(&self) -> usize {
        self.capacity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capacity.is_empty()
    }
}

/// Row-stochastic transition matrix over the 2(n+1) states (x_s, N):
/// states 0..=n are (0, 0)..(0, n), states n+1..=2n+1 are (1, 0)..(1, n).
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    n: u32,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * (self.n as usize + 1)
    }

    /// Flat state index for (bit, N).
    pub fn state(&self, bit: u8, big_n: u32) -> usize {
        bit as usize * (self.n as usize + 1) + big_n as usize
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.dim() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let d = self.dim();
        &self.entries[from * d..(from + 1) * d]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.row(a).iter().sum()).collect()
    }

    /// Left multiplication y = x P.
    fn apply_left(&self, x: &[f64], y: &mut [f64]) {
        let d = self.dim();
        y.iter_mut().for_each(|v| *v = 0.0);
        for (a, &xa) in x.iter().enumerate() {
            if xa == 0.0 {
                continue;
            }
            let row = &self.entries[a * d..(a + 1) * d];
            for (yb, &pab) in y.iter_mut().zip(row) {
                *yb += xa * pab;
            }
        }
    }

    /// True when every state reaches every other along positive entries
    /// and every diagonal entry is positive.
    pub fn is_ergodic(&self) -> bool {
        let d = self.dim();
        if (0..d).any(|a| self.get(a, a) <= 0.0) {
            return false;
        }
        let reach = |forward: bool| -> usize {
            let mut seen = vec![false; d];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut count = 1;
            while let Some(a) = stack.pop() {
                for b in 0..d {
                    let edge = if forward { self.get(a, b) } else { self.get(b, a) };
                    if edge > 0.0 && !seen[b] {
                        seen[b] = true;
                        count += 1;
                        stack.push(b);
                    }
                }
            }
            count
        };
        reach(true) == d && reach(false) == d
    }
}

/// One end-of-cycle law per starting state N, under a given policy.
fn cycle_laws(params: &ModelParams, policy: &PolicyTable) -> Result<Vec<Pmf>> {
    if policy.len() != params.n as usize + 1 {
        return Err(Error::PolicyLength {
            got: policy.len(),
            expected: params.n as usize + 1,
        });
    }
    (0..=params.n)
        .into_par_iter()
        .map(|big_n| {
            let local = ModelParams {
                m: policy.capacity(big_n),
                ..*params
            };
            ndp_given_n_pmf(&local, big_n)
        })
        .collect()
}

fn assemble(params: &ModelParams, laws: &[Pmf]) -> TransitionMatrix {
    let n = params.n as usize;
    let dim = 2 * (n + 1);
    let mut entries = vec![0.0; dim * dim];
    for big_n in 0..=n {
        let q = &laws[big_n];
        for bit in 0..2usize {
            let a = bit * (n + 1) + big_n;
            let row = &mut entries[a * dim..(a + 1) * dim];
            for ndp in 0..=n {
                let mass = q.prob(ndp as i64);
                // Same bit: N'' correct nodes carry over.
                row[bit * (n + 1) + ndp] += (1.0 - params.p) * mass;
                // Source flip: the N'' holders of the old bit become the
                // incorrect ones, so the correct count relabels to n - N''.
                row[(1 - bit) * (n + 1) + (n - ndp)] += params.p * mass;
            }
        }
    }
    TransitionMatrix {
        n: params.n,
        entries,
    }
}

/// Assembles the transition matrix from the per-state end-of-cycle laws.
pub fn build_chain(params: &ModelParams, policy: &PolicyTable) -> Result<TransitionMatrix> {
    Ok(assemble(params, &cycle_laws(params, policy)?))
}

/// How a stationary distribution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    PowerIteration,
    DirectSolve,
}

/// A stationary row vector pi with pi = pi P.
#[derive(Debug, Clone)]
pub struct StationaryDist {
    pub pi: Vec<f64>,
    pub residual: f64,
    pub method: SolveMethod,
}

impl StationaryDist {
    /// pi_{0,j} + pi_{1,j} for j = 0..=n.
    pub fn state_marginals(&self) -> Vec<f64> {
        let half = self.pi.len() / 2;
        (0..half).map(|j| self.pi[j] + self.pi[half + j]).collect()
    }
}

pub const POWER_ITERATION_CAP: usize = 1_000_000;

fn residual_inf(p_mat: &TransitionMatrix, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    p_mat.apply_left(x, &mut y);
    x.iter()
        .zip(&y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Power iteration from the uniform distribution. Iterates past the
/// target residual (down to tol/100 when reachable) so that the solution
/// error, not just the residual, is small for slowly mixing chains.
pub fn stationary_power(p_mat: &TransitionMatrix, tol: f64) -> Result<StationaryDist> {
    let d = p_mat.dim();
    let mut x = vec![1.0 / d as f64; d];
    let mut y = vec![0.0; d];
    let inner = tol / 100.0;
    let mut best = f64::INFINITY;
    let mut stagnant = 0usize;
    for it in 0..POWER_ITERATION_CAP {
        p_mat.apply_left(&x, &mut y);
        let res: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let total: f64 = y.iter().sum();
        for v in y.iter_mut() {
            *v /= total;
        }
        std::mem::swap(&mut x, &mut y);
        if res < best - 1e-18 {
            best = res;
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        if res <= inner || (res <= tol && stagnant > 100) {
            let residual = residual_inf(p_mat, &x);
            return Ok(StationaryDist {
                pi: x,
                residual,
                method: SolveMethod::PowerIteration,
            });
        }
        if stagnant > 1000 {
            break; // at the floating-point floor
        }
        let _ = it;
    }
    let residual = residual_inf(p_mat, &x);
    if residual <= tol {
        return Ok(StationaryDist {
            pi: x,
            residual,
            method: SolveMethod::PowerIteration,
        });
    }
    Err(Error::NonConvergence {
        residual,
        iterations: POWER_ITERATION_CAP,
    })
}

/// Direct linear solve of pi (P - I) = 0 with the normalization
/// constraint sum(pi) = 1 replacing the last column equation.
pub fn stationary_direct(p_mat: &TransitionMatrix, tol: f64) -> Result<StationaryDist> {
    let d = p_mat.dim();
    // Solve A pi^T = b where A = (P - I)^T with its last row replaced by ones.
    let mut a = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = p_mat.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..d {
        a[(d - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(d);
    b[d - 1] = 1.0;
    let lu = a.lu();
    let sol = lu.solve(&b).ok_or(Error::NonConvergence {
        residual: f64::INFINITY,
        iterations: 0,
    })?;
    let mut pi: Vec<f64> = sol.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    for v in pi.iter_mut() {
        *v /= total;
    }
    let residual = residual_inf(p_mat, &pi);
    if residual > tol {
        return Err(Error::NonConvergence {
            residual,
            iterations: 0,
        });
    }
    Ok(StationaryDist {
        pi,
        residual,
        method: SolveMethod::DirectSolve,
    })
}

/// Stationary distribution: power iteration first, falling back to the
/// direct solve when the iteration cannot reach the residual target.
pub fn stationary(p_mat: &TransitionMatrix, tol: f64) -> Result<StationaryDist> {
    match stationary_power(p_mat, tol) {
        Ok(d) => Ok(d),
        Err(_) => stationary_direct(p_mat, tol),
    }
}

fn delta_from_laws(n: u32, laws: &[Pmf], marginals: &[f64]) -> f64 {
    let nf = n as f64;
    laws.iter()
        .zip(marginals)
        .map(|(q, &w)| {
            q.iter()
                .map(|(ndp, mass)| w * mass * (nf - ndp as f64) / nf)
                .sum::<f64>()
        })
        .sum()
}

/// Long-term average error: the stationary expectation of the fraction
/// of nodes ending a cycle with a bit different from the source's.
pub fn average_error(
    params: &ModelParams,
    policy: &PolicyTable,
    pi: &StationaryDist,
) -> Result<f64> {
    let laws = cycle_laws(params, policy)?;
    Ok(delta_from_laws(params.n, &laws, &pi.state_marginals()))
}

/// A fully solved chain: matrix, stationary distribution, and error.
#[derive(Debug, Clone)]
pub struct SolvedChain {
    pub matrix: TransitionMatrix,
    pub pi: StationaryDist,
    pub delta: f64,
}

/// Builds, solves, and scores the chain in one pass (the per-state
/// cycle laws are computed once).
pub fn evaluate(params: &ModelParams, policy: &PolicyTable) -> Result<SolvedChain> {
    let laws = cycle_laws(params, policy)?;
    let matrix = assemble(params, &laws);
    let pi = stationary(&matrix, params.solve_tol)?;
    let delta = delta_from_laws(params.n, &laws, &pi.state_marginals());
    Ok(SolvedChain { matrix, pi, delta })
}

/// Average error of the same system with gossiping disabled.
pub fn no_gossip_baseline(params: &ModelParams, policy: &PolicyTable) -> Result<f64> {
    let silent = ModelParams {
        lambda: 0.0,
        ..*params
    };
    Ok(evaluate(&silent, policy)?.delta)
}
