//! High- and low-gossip-rate approximations, the gossip gain, and the
//! adaptive transmission-capacity policy.

use crate::chain::{evaluate, no_gossip_baseline, PolicyTable, StationaryDist};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use rayon::prelude::*;
use statrs::function::erf::erfc;

/// Standard normal upper-tail function Q(x) = P(Z > x), via the
/// complementary error function (relative error well below 1e-10 for
/// |x| <= 8; verified against multiprecision references in tests).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn composition(params: &ModelParams, big_n: u32) -> Result<f64> {
    let s = big_n + params.m;
    if s == 0 || s >= params.n {
        return Err(Error::DegenerateComposition(s));
    }
    Ok(s as f64 / params.n as f64)
}

/// Normal-approximation drift coefficient
/// A(N) = (1/2 - (N+m)/n) / sqrt((N+m)/n (1 - (N+m)/n)).
pub fn a_coefficient(params: &ModelParams, big_n: u32) -> Result<f64> {
    let q = composition(params, big_n)?;
    Ok((0.5 - q) / (q * (1.0 - q)).sqrt())
}

/// High-rate approximation of the incorrect-prior adoption probability:
/// a geometric mixture of Q-function tails.
pub fn pt2_high_approx(params: &ModelParams, big_n: u32) -> Result<f64> {
    let a = a_coefficient(params, big_n)?;
    let r = params.ratios();
    let mut total = 0.0;
    let mut geo = r.rho_g * (1.0 - r.rho_g);
    for k in 1..=r.k_max {
        total += q_function((k as f64).sqrt() * a) * geo;
        geo *= r.rho_g;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Infinite-gossip-rate limit: a step function of the composition
/// (N + m)/n around 1/2.
pub fn pt2_high_limit(params: &ModelParams, big_n: u32) -> f64 {
    let twice = 2 * (big_n + params.m);
    match twice.cmp(&params.n) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Greater => 1.0,
    }
}

/// Low-rate linear approximation of the adoption probabilities:
/// rho_g (N+m)/n for an incorrect prior, 1 - rho_g (n-N-m)/n for a
/// correct prior.
pub fn pt_low_approx(params: &ModelParams, big_n: u32, prior_matches: bool) -> Result<f64> {
    let s = big_n + params.m;
    if s > params.n {
        return Err(Error::OutOfRange {
            what: "N + m",
            value: s as i64,
            lo: 0,
            hi: params.n as i64,
        });
    }
    let rho_g = params.ratios().rho_g;
    let nf = params.n as f64;
    if prior_matches {
        Ok(1.0 - rho_g * (params.n - s) as f64 / nf)
    } else {
        Ok(rho_g * s as f64 / nf)
    }
}

/// Low-rate per-cycle gossip gain
/// G(N) = (m/n^2)(n - N - m) rho_g rho_s^m.
pub fn gossip_gain(params: &ModelParams, big_n: u32) -> Result<f64> {
    let (n, m) = (params.n, params.m);
    if big_n + m > n {
        return Err(Error::OutOfRange {
            what: "N",
            value: big_n as i64,
            lo: 0,
            hi: (n - m) as i64,
        });
    }
    let r = params.ratios();
    Ok(m as f64 / (n as f64 * n as f64)
        * (n - big_n - m) as f64
        * r.rho_g
        * r.rho_s.powi(m as i32))
}

/// Per-state gains and their stationary-weighted total.
#[derive(Debug, Clone)]
pub struct GainProfile {
    /// G(N) for N = 0..=n-m.
    pub per_state_gain: Vec<f64>,
    /// Least-squares scaling B, when a fit produced this profile.
    pub fitted_b: Option<f64>,
    /// Sum over N of (pi_{0N} + pi_{1N}) G(N).
    pub total_gain_estimate: f64,
}

impl GainProfile {
    pub fn compute(params: &ModelParams, pi: &StationaryDist) -> Result<Self> {
        let marginals = pi.state_marginals();
        let mut per_state_gain = Vec::with_capacity((params.n - params.m) as usize + 1);
        let mut total = 0.0;
        for big_n in 0..=(params.n - params.m) {
            let g = gossip_gain(params, big_n)?;
            total += marginals[big_n as usize] * g;
            per_state_gain.push(g);
        }
        Ok(GainProfile {
            per_state_gain,
            fitted_b: None,
            total_gain_estimate: total,
        })
    }
}

/// Least-squares scalar B matching the observed overall gain
/// |delta - delta_ng| to the stationary-weighted gossip gain across a
/// grid of constant capacities.
pub fn fit_scaling_b(params: &ModelParams, m_grid: &[u32]) -> Result<f64> {
    if m_grid.is_empty() {
        return Err(Error::DegenerateFit);
    }
    let points: Result<Vec<(f64, f64)>> = m_grid
        .par_iter()
        .map(|&m| {
            let local = params.with_m(m)?;
            let policy = PolicyTable::constant(&local);
            let solved = evaluate(&local, &policy)?;
            let ng = no_gossip_baseline(&local, &policy)?;
            let predictor = GainProfile::compute(&local, &solved.pi)?.total_gain_estimate;
            Ok((predictor, (solved.delta - ng).abs()))
        })
        .collect();
    let points = points?;
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    Ok((sxy / sxx).max(0.0))
}

/// Capacity maximizing the gossip gain at state N: the continuous root
/// and its nearest-integer rounding clamped to [0, n - N].
pub fn m_star(params: &ModelParams, big_n: u32) -> Result<(f64, u32)> {
    if big_n > params.n {
        return Err(Error::OutOfRange {
            what: "N",
            value: big_n as i64,
            lo: 0,
            hi: params.n as i64,
        });
    }
    if params.lambda_s == 0.0 {
        return Ok((0.0, 0));
    }
    let rho_s = params.ratios().rho_s;
    let inv_log = 1.0 / rho_s.ln(); // negative
    let half = (params.n - big_n) as f64 / 2.0;
    let root_term = (half * half + inv_log * inv_log).sqrt();
    let root = half - inv_log - root_term;
    // The positive-sign companion root is infeasible: larger than n - N.
    let other = half - inv_log + root_term;
    assert!(other > (params.n - big_n) as f64);
    let rounded = (root.round().max(0.0) as u32).min(params.n - big_n);
    Ok((root, rounded))
}

/// Policy table choosing the gain-maximizing rounded capacity at each N.
pub fn adaptive_policy_table(params: &ModelParams) -> Result<PolicyTable> {
    let caps: Result<Vec<u32>> = (0..=params.n).map(|j| Ok(m_star(params, j)?.1)).collect();
    PolicyTable::new(params.n, caps?)
}

/// Stationary mean capacity of a policy.
pub fn expected_capacity(pi: &StationaryDist, policy: &PolicyTable) -> f64 {
    pi.state_marginals()
        .iter()
        .zip(policy.capacities())
        .map(|(&w, &c)| w * c as f64)
        .sum()
}
