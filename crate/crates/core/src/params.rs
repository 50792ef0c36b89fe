//! Model parameters and shared derived quantities.
//!
//! The model is a source holding a binary state that changes at rate
//! `lambda_e`, plus `n` receiver nodes on a complete graph. Each update
//! cycle has a source phase (the source transmits to up to `m` incorrect
//! nodes at total rate `lambda_s`) followed by a gossip phase (each node
//! receives peer updates at total rate `lambda` until the source state
//! changes again).

use crate::error::{Error, Result};

/// All rates and counts of the dissemination model, plus numerical
/// tolerances. Immutable after validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Number of receiver nodes (>= 2).
    pub n: u32,
    /// Source transmission capacity per cycle, 0 <= m <= n.
    pub m: u32,
    /// Probability the source bit flips at a state change, 0 < p < 1.
    pub p: f64,
    /// Source state-change rate (> 0).
    pub lambda_e: f64,
    /// Source total transmission rate (>= 0).
    pub lambda_s: f64,
    /// Per-node total gossip reception rate (>= 0).
    pub lambda: f64,
    /// Neglected mass allowed when truncating geometric tails.
    pub tail_tol: f64,
    /// Residual tolerance for the stationary solve.
    pub solve_tol: f64,
}

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
pub const DEFAULT_SOLVE_TOL: f64 = 1e-12;

impl ModelParams {
    /// Builds and validates a parameter set with default tolerances.
    pub fn new(n: u32, m: u32, p: f64, lambda_e: f64, lambda_s: f64, lambda: f64) -> Result<Self> {
        ModelParams {
            n,
            m,
            p,
            lambda_e,
            lambda_s,
            lambda,
            tail_tol: DEFAULT_TAIL_TOL,
            solve_tol: DEFAULT_SOLVE_TOL,
        }
        .validated()
    }

    /// Checks every invariant, reporting the first violation by name.
    pub fn validated(self) -> Result<Self> {
        if self.n < 2 {
            return Err(Error::InvalidParams("n >= 2 required".into()));
        }
        if self.m > self.n {
            return Err(Error::InvalidParams("m <= n required".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidParams("p out of (0,1)".into()));
        }
        if !(self.lambda_e > 0.0) {
            return Err(Error::InvalidParams("lambda_e > 0 required".into()));
        }
        if !(self.lambda_s >= 0.0) {
            return Err(Error::InvalidParams("lambda_s >= 0 required".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParams("lambda >= 0 required".into()));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::InvalidParams("tail_tol out of (0,1)".into()));
        }
        if !(self.solve_tol > 0.0) {
            return Err(Error::InvalidParams("solve_tol > 0 required".into()));
        }
        Ok(self)
    }

    pub fn with_m(self, m: u32) -> Result<Self> {
        ModelParams { m, ..self }.validated()
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        ModelParams { lambda, ..self }.validated()
    }

    pub fn with_lambda_s(self, lambda_s: f64) -> Result<Self> {
        ModelParams { lambda_s, ..self }.validated()
    }

    /// Race-winning probabilities and the gossip-count truncation depth.
    pub fn ratios(&self) -> DerivedRatios {
        let rho_s = self.lambda_s / (self.lambda_s + self.lambda_e);
        let rho_g = self.lambda / (self.lambda + self.lambda_e);
        let k_max = if rho_g > 0.0 {
            (self.tail_tol.ln() / rho_g.ln()).ceil() as u32
        } else {
            0
        };
        DerivedRatios { rho_s, rho_g, k_max }
    }
}

/// Quantities derived from the rates once per computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRatios {
    /// Probability the source wins a transmission-vs-change race.
    pub rho_s: f64,
    /// Probability a gossip arrival precedes the next source change.
    pub rho_g: f64,
    /// Depth at which geometric gossip-count sums are truncated; the
    /// neglected tail mass rho_g^(k_max+1) is at most `tail_tol`.
    pub k_max: u32,
}
