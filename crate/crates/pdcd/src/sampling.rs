//! Proper serial samplings over coordinates with O(1) draws.
//!
//! Every sampling here picks exactly one coordinate per iteration. Draws go
//! through a precomputed alias table so the per-iteration sampling cost is
//! constant regardless of the support size, matching the cost model that
//! charges an iteration only for the nonzeros it visits.
//!
//! Randomness comes from a seedable, named generator ([`RNG_ALGORITHM`]) so
//! that solver traces are reproducible bit for bit.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Name of the generator used by all solvers; recorded in trace headers.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Probabilities below this are considered improper in floating point.
const MIN_PROB: f64 = 1e-30;

/// A proper discrete distribution over `{0, .., m-1}` with an alias table
/// for O(1) sampling.
#[derive(Debug, Clone)]
pub struct SerialSampling {
    probs: Vec<f64>,
    /// Per-cell acceptance threshold of the alias table.
    cut: Vec<f64>,
    alias: Vec<usize>,
}

impl SerialSampling {
    /// Uniform sampling: `p_i = 1/m`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroSize);
        }
        Self::from_weights(&vec![1.0; m])
    }

    /// Importance sampling from unnormalized weights `s_i > 0`:
    /// `p_i = s_i / Σ_l s_l`.
    pub fn importance(s: &[f64]) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::ZeroSize);
        }
        for (i, &w) in s.iter().enumerate() {
            if w.is_nan() || w <= 0.0 {
                return Err(Error::NonpositiveWeight(w, i));
            }
        }
        Self::from_weights(s)
    }

    /// Builds a sampling from arbitrary positive weights (normalized here).
    pub fn from_weights(s: &[f64]) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::ZeroSize);
        }
        let total: f64 = s.iter().sum();
        let probs: Vec<f64> = s.iter().map(|&w| w / total).collect();
        for (i, &p) in probs.iter().enumerate() {
            if p.is_nan() || p < MIN_PROB {
                return Err(Error::ImproperSampling(p, i));
            }
        }
        let m = probs.len();
        // Vose's alias construction.
        let mut cut: Vec<f64> = probs.iter().map(|&p| p * m as f64).collect();
        let mut alias: Vec<usize> = (0..m).collect();
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, &c) in cut.iter().enumerate() {
            if c < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s_i), Some(&l_i)) = (small.last(), large.last()) {
            small.pop();
            alias[s_i] = l_i;
            cut[l_i] -= 1.0 - cut[s_i];
            if cut[l_i] < 1.0 {
                large.pop();
                small.push(l_i);
            }
        }
        // Leftovers are numerically 1.
        for &i in small.iter().chain(large.iter()) {
            cut[i] = 1.0;
            alias[i] = i;
        }
        Ok(Self { probs, cut, alias })
    }

    /// Support size.
    pub fn m(&self) -> usize {
        self.probs.len()
    }

    /// The normalized probability vector.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Draws one coordinate index in O(1).
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let i = rng.gen_range(0..self.probs.len());
        if rng.gen::<f64>() < self.cut[i] {
            i
        } else {
            self.alias[i]
        }
    }

    /// Marginals implied by the alias table, tallied analytically.
    ///
    /// Cell `i` contributes mass `cut[i]/m` to `i` and `(1 − cut[i])/m` to
    /// its alias; summing reconstructs `probs` up to rounding.
    pub fn table_marginals(&self) -> Vec<f64> {
        let m = self.probs.len() as f64;
        let mut out = vec![0.0; self.probs.len()];
        for i in 0..self.probs.len() {
            out[i] += self.cut[i] / m;
            out[self.alias[i]] += (1.0 - self.cut[i]) / m;
        }
        out
    }
}
