//! Seeded Monte-Carlo simulation of update cycles.
//!
//! Two fidelity modes: `PaperFaithful` samples each node's gossip-update
//! count independently from the truncated geometric law (matching the
//! product-form analysis), while `EventDriven` draws one shared gossip
//! phase duration and per-node Poisson arrival counts over it, which
//! correlates the counts across nodes. The event-driven mode exists to
//! measure the size of the independence assumption; it is a diagnostic,
//! not a validation target.

use crate::chain::PolicyTable;
use crate::params::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};

/// Simulation fidelity mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McMode {
    PaperFaithful,
    EventDriven,
}

impl McMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            McMode::PaperFaithful => "paper-faithful",
            McMode::EventDriven => "event-driven",
        }
    }
}

/// Full network state at the start of an update cycle.
#[derive(Debug, Clone)]
pub struct CycleState {
    pub source_bit: u8,
    pub node_bits: Vec<u8>,
    pub cycle_index: u64,
}

impl CycleState {
    /// All nodes agreeing with a zero source bit.
    pub fn unanimous(n: u32) -> Self {
        CycleState {
            source_bit: 0,
            node_bits: vec![0; n as usize],
            cycle_index: 0,
        }
    }

    /// Number of nodes currently matching the source bit.
    pub fn correct_count(&self) -> u32 {
        self.node_bits
            .iter()
            .filter(|&&b| b == self.source_bit)
            .count() as u32
    }
}

/// What one simulated cycle produced, recorded before the source flip.
#[derive(Debug, Clone, Copy)]
pub struct CycleRecord {
    pub n_start: u32,
    pub n_end: u32,
    /// Fraction of nodes ending the cycle with the wrong bit.
    pub error: f64,
}

fn sample_truncated_geometric(rho: f64, k_max: u32, rng: &mut ChaCha8Rng) -> u32 {
    // Tail mass beyond k_max (at most tail_tol) folds into k_max.
    let mut k = 0;
    while k < k_max && rng.gen::<f64>() < rho {
        k += 1;
    }
    k
}

/// Advances the state by one full update cycle in place.
///
/// Phase S: the source races its own next state change, each win
/// updating the first incorrect node in index order (incorrect nodes are
/// exchangeable on the complete graph). If the full budget is sent, the
/// gossip phase runs on the phase-start snapshot: every node not updated
/// by the source this cycle tallies its received senders' bits and
/// applies the majority rule (fair coin on ties, keep prior on zero
/// updates). Finally the source flips with probability p.
pub fn simulate_cycle(
    state: &mut CycleState,
    params: &ModelParams,
    policy: &PolicyTable,
    mode: McMode,
    rng: &mut ChaCha8Rng,
) -> CycleRecord {
    let n = params.n as usize;
    let ratios = params.ratios();
    let n_start = state.correct_count();
    let budget = policy.capacity(n_start).min(params.n - n_start);

    let mut source_updated = vec![false; n];
    let mut completed = true;
    for _ in 0..budget {
        if rng.gen::<f64>() < ratios.rho_s {
            let target = state
                .node_bits
                .iter()
                .position(|&b| b != state.source_bit)
                .expect("budget never exceeds the incorrect count");
            state.node_bits[target] = state.source_bit;
            source_updated[target] = true;
        } else {
            completed = false;
            break;
        }
    }

    if completed {
        let snapshot = state.node_bits.clone();
        let shared_duration = match mode {
            McMode::PaperFaithful => None,
            McMode::EventDriven => {
                // Remaining cycle time is memoryless.
                Some(Exp::new(params.lambda_e).expect("lambda_e > 0").sample(rng))
            }
        };
        for i in 0..n {
            if source_updated[i] {
                continue; // senders only during gossip
            }
            let k = match shared_duration {
                None => sample_truncated_geometric(ratios.rho_g, ratios.k_max, rng),
                Some(t) => {
                    let mean = params.lambda * t;
                    if mean == 0.0 {
                        0
                    } else {
                        Poisson::new(mean).expect("positive mean").sample(rng) as u32
                    }
                }
            };
            if k == 0 {
                continue; // keep prior
            }
            let mut matching = 0u32;
            for _ in 0..k {
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1; // senders exclude the receiver
                }
                if snapshot[j] == state.source_bit {
                    matching += 1;
                }
            }
            state.node_bits[i] = if 2 * matching > k {
                state.source_bit
            } else if 2 * matching < k {
                1 - state.source_bit
            } else if rng.gen::<bool>() {
                state.source_bit
            } else {
                1 - state.source_bit
            };
        }
    }

    let n_end = state.correct_count();
    let record = CycleRecord {
        n_start,
        n_end,
        error: (params.n - n_end) as f64 / params.n as f64,
    };
    if rng.gen::<f64>() < params.p {
        state.source_bit = 1 - state.source_bit;
    }
    state.cycle_index += 1;
    record
}

/// A Monte-Carlo estimate of the long-term average error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean_error: f64,
    pub std_error: f64,
    pub cycles: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub mode: McMode,
}

pub const DEFAULT_BURN_IN: u64 = 1_000;
/// Number of batches used for the batch-means standard error.
pub const BATCH_COUNT: u64 = 32;

/// Runs `burn_in` discarded cycles followed by `cycles` retained ones,
/// invoking `on_cycle` for each retained cycle, and estimates the mean
/// per-cycle error with a batch-means standard error (32 batches over
/// the largest multiple of 32 retained cycles). Bit-for-bit reproducible
/// for a fixed (seed, mode, params, policy).
pub fn estimate_error_traced(
    params: &ModelParams,
    policy: &PolicyTable,
    mode: McMode,
    cycles: u64,
    burn_in: u64,
    seed: u64,
    mut on_cycle: impl FnMut(&CycleState, &CycleRecord),
) -> McEstimate {
    assert!(cycles >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = CycleState::unanimous(params.n);
    for _ in 0..burn_in {
        simulate_cycle(&mut state, params, policy, mode, &mut rng);
    }
    let mut sum = 0.0;
    let batch_len = (cycles / BATCH_COUNT).max(1);
    let mut batch_means = Vec::with_capacity(BATCH_COUNT as usize);
    let mut batch_sum = 0.0;
    let mut in_batch = 0u64;
    for _ in 0..cycles {
        let record = simulate_cycle(&mut state, params, policy, mode, &mut rng);
        on_cycle(&state, &record);
        sum += record.error;
        if (batch_means.len() as u64) < BATCH_COUNT {
            batch_sum += record.error;
            in_batch += 1;
            if in_batch == batch_len {
                batch_means.push(batch_sum / batch_len as f64);
                batch_sum = 0.0;
                in_batch = 0;
            }
        }
    }
    let mean_error = sum / cycles as f64;
    let std_error = if batch_means.len() >= 2 {
        let k = batch_means.len() as f64;
        let center: f64 = batch_means.iter().sum::<f64>() / k;
        let var: f64 = batch_means.iter().map(|b| (b - center).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    McEstimate {
        mean_error,
        std_error,
        cycles,
        burn_in,
        seed,
        mode,
    }
}

/// See [`estimate_error_traced`]; this variant discards per-cycle data.
pub fn estimate_error(
    params: &ModelParams,
    policy: &PolicyTable,
    mode: McMode,
    cycles: u64,
    burn_in: u64,
    seed: u64,
) -> McEstimate {
    estimate_error_traced(params, policy, mode, cycles, burn_in, seed, |_, _| {})
}
