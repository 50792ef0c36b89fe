//! Finite probability mass functions over a contiguous integer support.

use statrs::function::gamma::ln_gamma;

/// A pmf stored as an offset (value of the first support point) and a
/// dense weight vector. Weights are non-negative; the total mass is 1 up
/// to whatever truncation the producing law documents.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    offset: i64,
    weights: Vec<f64>,
}

impl Pmf {
    pub fn new(offset: i64, weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|&w| w >= 0.0 && w.is_finite()));
        Pmf { offset, weights }
    }

    /// Point mass at `value`.
    pub fn point(value: i64) -> Self {
        Pmf::new(value, vec![1.0])
    }

    /// Binomial(trials, q) on {0, ..., trials}, computed in log space.
    pub fn binomial(trials: u32, q: f64) -> Self {
        let t = trials as usize;
        if t == 0 {
            return Pmf::point(0);
        }
        let mut w = vec![0.0; t + 1];
        if q <= 0.0 {
            w[0] = 1.0;
        } else if q >= 1.0 {
            w[t] = 1.0;
        } else {
            let (lq, l1q) = (q.ln(), (1.0 - q).ln());
            let lnt = ln_gamma(trials as f64 + 1.0);
            for (k, wk) in w.iter_mut().enumerate() {
                let lp = lnt - ln_gamma(k as f64 + 1.0) - ln_gamma((t - k) as f64 + 1.0)
                    + k as f64 * lq
                    + (t - k) as f64 * l1q;
                *wk = lp.exp();
            }
        }
        Pmf::new(0, w)
    }

    /// Truncated geometric on {0, ..., k_max}: P(k) = rho^k (1 - rho).
    /// The residual tail mass rho^(k_max+1) is dropped, not folded back.
    pub fn truncated_geometric(rho: f64, k_max: u32) -> Self {
        if rho <= 0.0 {
            return Pmf::point(0);
        }
        let mut w = Vec::with_capacity(k_max as usize + 1);
        let mut term = 1.0 - rho;
        for _ in 0..=k_max {
            w.push(term);
            term *= rho;
        }
        Pmf::new(0, w)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Inclusive support bounds (min, max).
    pub fn support(&self) -> (i64, i64) {
        (self.offset, self.offset + self.weights.len() as i64 - 1)
    }

    pub fn prob(&self, value: i64) -> f64 {
        let idx = value - self.offset;
        if idx < 0 || idx >= self.weights.len() as i64 {
            0.0
        } else {
            self.weights[idx as usize]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| (self.offset + i as i64) as f64 * w)
            .sum()
    }

    /// Iterates (value, weight) pairs over the support.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (self.offset + i as i64, w))
    }

    /// Discrete convolution: law of the sum of two independent variables.
    pub fn convolve(&self, other: &Pmf) -> Pmf {
        let mut w = vec![0.0; self.weights.len() + other.weights.len() - 1];
        for (i, &a) in self.weights.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.weights.iter().enumerate() {
                w[i + j] += a * b;
            }
        }
        Pmf::new(self.offset + other.offset, w)
    }

    /// Same law shifted by `delta`.
    pub fn shift(&self, delta: i64) -> Pmf {
        Pmf::new(self.offset + delta, self.weights.clone())
    }
}
