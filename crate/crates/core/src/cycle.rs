//! Per-update-cycle probability laws.
//!
//! Everything here is conditioned on the number `N` of nodes holding the
//! source's bit at the start of a cycle. The source phase emits a
//! truncated-geometric number of updates to incorrect nodes; if the
//! capacity is exhausted before the source state changes, a gossip phase
//! follows in which every node not updated by the source tallies peer
//! updates and applies the majority rule at the end of the cycle.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::pmf::Pmf;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

fn check_state(n: u32, big_n: u32) -> Result<()> {
    if big_n > n {
        return Err(Error::OutOfRange {
            what: "N",
            value: big_n as i64,
            lo: 0,
            hi: n as i64,
        });
    }
    Ok(())
}

/// Law of the number of source-phase updates K_s, given the cycle starts
/// with `big_n` correct nodes. The per-cycle budget is `m` when
/// `big_n < n - m` and `n - big_n` otherwise; each update wins its race
/// against the next source change with probability rho_s, and reaching
/// the full budget carries the remaining geometric mass.
pub fn ks_pmf(params: &ModelParams, big_n: u32) -> Result<Pmf> {
    check_state(params.n, big_n)?;
    let budget = if big_n < params.n - params.m {
        params.m
    } else {
        params.n - big_n
    };
    let rho_s = params.ratios().rho_s;
    let mut w = Vec::with_capacity(budget as usize + 1);
    let mut pow = 1.0;
    for _ in 0..budget {
        w.push(pow * (1.0 - rho_s));
        pow *= rho_s;
    }
    w.push(pow); // budget completed: rho_s^budget
    Ok(Pmf::new(0, w))
}

/// Law of the number of gossip updates K_i a node receives during the
/// gossip phase: geometric with ratio rho_g, truncated at k_max.
pub fn ki_pmf(params: &ModelParams) -> Pmf {
    let r = params.ratios();
    Pmf::truncated_geometric(r.rho_g, r.k_max)
}

/// Success probability of a single received gossip update carrying the
/// source's bit, for a receiver whose prior matches (`true`) or differs
/// (`false`). The sender pool is the other n-1 nodes, of which N+m hold
/// the source's bit at gossip start (one fewer when the receiver itself
/// is among them).
fn gossip_success_prob(params: &ModelParams, big_n: u32, prior_matches: bool) -> Result<f64> {
    let (n, m) = (params.n, params.m);
    check_state(n, big_n)?;
    if big_n + m > n {
        return Err(Error::OutOfRange {
            what: "N + m",
            value: (big_n + m) as i64,
            lo: 0,
            hi: n as i64,
        });
    }
    if prior_matches {
        if big_n < 1 {
            return Err(Error::OutOfRange {
                what: "N (prior-correct node required)",
                value: 0,
                lo: 1,
                hi: n as i64,
            });
        }
        Ok((big_n + m - 1) as f64 / (n - 1) as f64)
    } else {
        if big_n + m > n - 1 {
            return Err(Error::OutOfRange {
                what: "N + m (prior-incorrect node required)",
                value: (big_n + m) as i64,
                lo: 0,
                hi: (n - 1) as i64,
            });
        }
        Ok((big_n + m) as f64 / (n - 1) as f64)
    }
}

/// Conditional law of R_i, the number of received updates equal to the
/// source's bit, given K_i = `k_i`: binomial on {0, ..., k_i}.
pub fn ri_pmf(params: &ModelParams, big_n: u32, k_i: u32, prior_matches: bool) -> Result<Pmf> {
    let q = gossip_success_prob(params, big_n, prior_matches)?;
    Ok(Pmf::binomial(k_i, q))
}

/// Upper tail P(Bin(k, q) >= r) via the regularized incomplete beta
/// function; exact at the q = 0 / q = 1 boundaries.
fn binomial_tail(k: u32, q: f64, r: u32) -> f64 {
    if r == 0 {
        return 1.0;
    }
    if r > k {
        return 0.0;
    }
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    beta_reg(r as f64, (k - r + 1) as f64, q)
}

/// ln P(Bin(2k, q) = k), the exact-tie probability.
fn ln_central_binomial(k: u32, q: f64) -> f64 {
    let kf = k as f64;
    ln_gamma(2.0 * kf + 1.0) - 2.0 * ln_gamma(kf + 1.0) + kf * (q.ln() + (1.0 - q).ln())
}

/// Probability that a node ends the gossip phase holding the source's
/// bit, given its prior matches (`true`) or differs (`false`).
///
/// Three contributions: a strict majority of received updates carry the
/// source's bit; an exact tie resolved by a fair coin; and, for a
/// matching prior only, receiving no updates at all. The geometric sum
/// over K_i is truncated at k_max (tie sum at k_max/2), each neglecting
/// mass at most `tail_tol`.
pub fn adopt_prob(params: &ModelParams, big_n: u32, prior_matches: bool) -> Result<f64> {
    let q = gossip_success_prob(params, big_n, prior_matches)?;
    let r = params.ratios();
    if r.rho_g == 0.0 {
        // No gossip arrivals: keep the prior.
        return Ok(if prior_matches { 1.0 } else { 0.0 });
    }
    let mut total = 0.0;
    // Strict majority: k = 1..k_max, threshold floor(k/2) + 1.
    let mut geo = r.rho_g * (1.0 - r.rho_g);
    for k in 1..=r.k_max {
        total += binomial_tail(k, q, k / 2 + 1) * geo;
        geo *= r.rho_g;
    }
    // Ties: K_i = 2j with exactly j matching updates, fair coin.
    if q > 0.0 && q < 1.0 {
        let rho2 = r.rho_g * r.rho_g;
        let mut geo_even = rho2 * (1.0 - r.rho_g);
        for j in 1..=r.k_max / 2 {
            total += 0.5 * ln_central_binomial(j, q).exp() * geo_even;
            geo_even *= rho2;
        }
    }
    if prior_matches {
        total += 1.0 - r.rho_g; // P(K_i = 0): hold the prior
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Law of N' = N_1' + N_2' on {0, ..., n - m}: among the nodes not
/// updated by the source this cycle, the count adopting the source's bit
/// at gossip end. N_1' ~ Bin(N, P_T1(N)) over prior-correct nodes,
/// N_2' ~ Bin(n - N - m, P_T2(N)) over prior-incorrect nodes.
pub fn nprime_pmf(params: &ModelParams, big_n: u32) -> Result<Pmf> {
    let (n, m) = (params.n, params.m);
    check_state(n, big_n)?;
    if big_n >= n - m {
        return Err(Error::OutOfRange {
            what: "N (gossip phase requires N < n - m)",
            value: big_n as i64,
            lo: 0,
            hi: (n - m) as i64 - 1,
        });
    }
    let correct = if big_n >= 1 {
        Pmf::binomial(big_n, adopt_prob(params, big_n, true)?)
    } else {
        Pmf::point(0)
    };
    let incorrect = Pmf::binomial(n - big_n - m, adopt_prob(params, big_n, false)?);
    Ok(correct.convolve(&incorrect))
}

/// Law of N'', the number of correct nodes at the end of a cycle that
/// started with `big_n` correct nodes, on {0, ..., n}.
///
/// Built constructively as a mixture over the source-phase outcome: each
/// incomplete source phase (K_s short of the budget) leaves N + K_s
/// correct nodes; a completed budget of `m` enters the gossip phase and
/// spreads its mass as m + N'; a completed budget of n - N (all
/// incorrect nodes reached) ends the cycle with all n nodes correct.
pub fn ndp_given_n_pmf(params: &ModelParams, big_n: u32) -> Result<Pmf> {
    let (n, m) = (params.n, params.m);
    check_state(n, big_n)?;
    let ks = ks_pmf(params, big_n)?;
    let mut w = vec![0.0; n as usize + 1];
    if big_n < n - m {
        for k in 0..m {
            w[(big_n + k) as usize] += ks.prob(k as i64);
        }
        let enter_gossip = ks.prob(m as i64);
        let nprime = nprime_pmf(params, big_n)?;
        for (v, p) in nprime.iter() {
            w[(m as i64 + v) as usize] += enter_gossip * p;
        }
    } else {
        // Budget n - N: every update creates a correct node; completing
        // the budget makes the network unanimous and gossip changes
        // nothing.
        for k in 0..(n - big_n) {
            w[(big_n + k) as usize] += ks.prob(k as i64);
        }
        w[n as usize] += ks.prob((n - big_n) as i64);
    }
    Ok(Pmf::new(0, w))
}
