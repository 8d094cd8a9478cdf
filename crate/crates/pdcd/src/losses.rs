//! Smooth convex loss families, their conjugates and coordinate maximizers.
//!
//! A [`LossModel`] bundles a per-example loss family `{φ_j}` with the labels
//! and the family's smoothness constant β. Squared loss is `(s − y_j)²/2`
//! with β = 1; logistic loss is `log(1 + exp(−y_j s))` with β = 1/4.
//!
//! The dual solver needs, per coordinate, the maximizer of
//! `−φ_j*(−(α_j + h)) − h·⟨X_{:j}, w⟩ − v_j h²/(2λn)` over `h`. For squared
//! loss this has a closed form; for logistic loss the fixed-stepsize η
//! variant is used instead.

use crate::error::{Error, Result};

/// The supported loss families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `φ_j(s) = (s − y_j)²/2`, β = 1.
    Squared,
    /// `φ_j(s) = log(1 + exp(−y_j s))`, β = 1/4.
    Logistic,
}

/// A loss family together with its labels.
#[derive(Debug, Clone)]
pub struct LossModel {
    kind: LossKind,
    labels: Vec<f64>,
}

impl LossModel {
    pub fn squared(labels: Vec<f64>) -> Self {
        Self { kind: LossKind::Squared, labels }
    }

    /// Logistic loss requires nonzero labels (±1 in practice).
    pub fn logistic(labels: Vec<f64>) -> Result<Self> {
        if let Some(j) = labels.iter().position(|&y| y == 0.0) {
            return Err(Error::NonpositiveWeight(0.0, j));
        }
        Ok(Self { kind: LossKind::Logistic, labels })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, j: usize) -> f64 {
        self.labels[j]
    }

    /// Smoothness constant β of the family.
    pub fn beta(&self) -> f64 {
        match self.kind {
            LossKind::Squared => 1.0,
            LossKind::Logistic => 0.25,
        }
    }

    /// `φ_j(s)`.
    pub fn value(&self, j: usize, s: f64) -> f64 {
        let y = self.labels[j];
        match self.kind {
            LossKind::Squared => {
                let r = s - y;
                0.5 * r * r
            }
            LossKind::Logistic => {
                // log(1 + e^t) with t = -y*s, branch on sign to stay finite.
                let t = -y * s;
                if t > 0.0 {
                    t + (-t).exp().ln_1p()
                } else {
                    t.exp().ln_1p()
                }
            }
        }
    }

    /// `φ_j'(s)`.
    pub fn derivative(&self, j: usize, s: f64) -> f64 {
        let y = self.labels[j];
        match self.kind {
            LossKind::Squared => s - y,
            LossKind::Logistic => {
                // -y / (1 + e^{y s}), branch to avoid overflow of the exp.
                let t = y * s;
                if t > 0.0 {
                    let e = (-t).exp();
                    -y * e / (1.0 + e)
                } else {
                    -y / (1.0 + t.exp())
                }
            }
        }
    }

    /// The convex conjugate `φ_j*(s) = sup_t { st − φ_j(t) }`.
    ///
    /// For logistic loss the conjugate is finite only for `−s/y_j ∈ [0, 1]`
    /// (value 0 at the endpoints) and `+∞` elsewhere.
    pub fn conjugate(&self, j: usize, s: f64) -> f64 {
        let y = self.labels[j];
        match self.kind {
            LossKind::Squared => 0.5 * s * s + y * s,
            LossKind::Logistic => {
                let u = -s / y;
                if !(0.0..=1.0).contains(&u) {
                    f64::INFINITY
                } else if u == 0.0 || u == 1.0 {
                    0.0
                } else {
                    u * u.ln() + (1.0 - u) * (1.0 - u).ln()
                }
            }
        }
    }

    /// Exact maximizer `h` of `−φ_j*(−(α_j + h)) − h·dot − v_j h²/(2λn)`.
    ///
    /// Closed form exists for squared loss only:
    /// `Δ = (y_j − dot − α_j) / (1 + v_j/(λn))`.
    pub fn dual_coordinate_max(
        &self,
        j: usize,
        alpha_j: f64,
        dot: f64,
        v_j: f64,
        lambda: f64,
        n: usize,
    ) -> Result<f64> {
        match self.kind {
            LossKind::Squared => {
                let y = self.labels[j];
                Ok((y - dot - alpha_j) / (1.0 + v_j / (lambda * n as f64)))
            }
            LossKind::Logistic => Err(Error::UnsupportedLoss),
        }
    }

    /// Inexact dual step `Δ = −η (φ_j'(dot) + α_j)` with precomputed stepsize
    /// η. Drives `α_j` toward the dual fixed point `α_j = −φ_j'(dot)`; the
    /// step vanishes exactly there.
    pub fn eta_step(&self, j: usize, alpha_j: f64, dot: f64, eta: f64) -> f64 {
        -eta * (self.derivative(j, dot) + alpha_j)
    }
}

/// Stepsize `η = min_j (q_j λ n) / (β v_j + λ n)` for the inexact dual step.
pub fn eta_stepsize(q: &[f64], v: &[f64], lambda: f64, n: usize, beta: f64) -> f64 {
    let ln = lambda * n as f64;
    q.iter()
        .zip(v)
        .map(|(&qj, &vj)| qj * ln / (beta * vj + ln))
        .fold(f64::INFINITY, f64::min)
}
