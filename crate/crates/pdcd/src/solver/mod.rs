//! Coordinate-descent solvers for the primal and dual ERM problems.
//!
//! Both solvers are strictly sequential (one coordinate per iteration) and
//! share the trace format and stopping machinery defined here. Work is
//! accounted in visited nonzero entries of the data matrix; one "pass"
//! equals `‖X‖_0` visited nonzeros.

mod dual;
mod primal;

pub use dual::{dual_step, solve_dual, DualState, StepMode};
pub use primal::{primal_step, solve_primal, PrimalState};

use std::io::Write;
use std::time::Duration;

use crate::error::Result;
use crate::losses::LossModel;
use crate::matrix::DualIndexedSparseMatrix;
use crate::sampling::RNG_ALGORITHM;

/// One checkpoint of a solver run.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub iter: u64,
    pub nnz_visited: u64,
    pub passes: f64,
    pub primal_obj: f64,
    /// Absent for primal-only runs.
    pub dual_obj: Option<f64>,
    /// Duality gap `P(w) − D(α)`; absent for primal-only runs.
    pub gap: Option<f64>,
    /// One-dimensional loss derivative/value evaluations inside iterations.
    pub loss_evals: u64,
    pub wall_ns: u64,
}

/// Time series of solver checkpoints, one per trace interval.
#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub seed: u64,
    pub rows: Vec<TraceRow>,
}

impl SolverTrace {
    /// Writes the trace as CSV. A `#` comment line records the RNG algorithm
    /// and seed; the header line is
    /// `iter,nnz_visited,passes,primal_obj,dual_obj,gap,loss_evals,wall_ns`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# rng={RNG_ALGORITHM} seed={}", self.seed)?;
        writeln!(out, "iter,nnz_visited,passes,primal_obj,dual_obj,gap,loss_evals,wall_ns")?;
        for r in &self.rows {
            let dual = r.dual_obj.map(|v| v.to_string()).unwrap_or_default();
            let gap = r.gap.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.iter, r.nnz_visited, r.passes, r.primal_obj, dual, gap, r.loss_evals, r.wall_ns
            )?;
        }
        Ok(())
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace always has an initial row")
    }
}

/// When to terminate a solver run. Any satisfied condition stops the run;
/// with no condition set the run stops only at `max_passes` default budget.
#[derive(Debug, Clone)]
pub struct StoppingRule {
    /// Stop once the measured suboptimality is at or below this value.
    /// The dual solver measures the duality gap `P − D`; the primal solver
    /// measures `P − reference_obj` and needs [`Self::reference_obj`].
    pub target_gap: Option<f64>,
    /// Known optimal objective value, for primal suboptimality stopping.
    pub reference_obj: Option<f64>,
    pub max_passes: Option<f64>,
    pub max_iterations: Option<u64>,
    pub max_wall: Option<Duration>,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            target_gap: None,
            reference_obj: None,
            max_passes: Some(100.0),
            max_iterations: None,
            max_wall: None,
        }
    }
}

/// Options shared by both solvers.
#[derive(Debug, Clone)]
#[derive(Default)]
pub struct SolveOptions {
    pub seed: u64,
    /// Visited-nonzero interval between trace rows; `None` means one pass.
    pub trace_interval_nnz: Option<u64>,
    /// Initial iterate: `w⁰` for the primal solver, `α⁰` for the dual.
    pub init: Option<Vec<f64>>,
    pub stop: StoppingRule,
}


/// `P(w)` given the residuals `z = X^⊤ w`.
pub fn primal_objective_from_z(loss: &LossModel, lambda: f64, w: &[f64], z: &[f64]) -> f64 {
    let n = z.len();
    let avg_loss = (0..n).map(|j| loss.value(j, z[j])).sum::<f64>() / n as f64;
    avg_loss + 0.5 * lambda * w.iter().map(|x| x * x).sum::<f64>()
}

/// `P(w) = (1/n) Σ_j φ_j(⟨X_{:j}, w⟩) + (λ/2)‖w‖²`.
pub fn primal_objective(x: &DualIndexedSparseMatrix, loss: &LossModel, lambda: f64, w: &[f64]) -> f64 {
    let z = residuals(x, w);
    primal_objective_from_z(loss, lambda, w, &z)
}

/// `D(α) = −(λ/2)‖w(α)‖² − (1/n) Σ_j φ_j*(−α_j)` where `w(α) = (1/λn)Xα`
/// is passed in (the solvers maintain it incrementally).
pub fn dual_objective(loss: &LossModel, lambda: f64, w: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let conj = (0..n).map(|j| loss.conjugate(j, -alpha[j])).sum::<f64>() / n as f64;
    -0.5 * lambda * w.iter().map(|x| x * x).sum::<f64>() - conj
}

/// `z = X^⊤ w`, computed from scratch.
pub fn residuals(x: &DualIndexedSparseMatrix, w: &[f64]) -> Vec<f64> {
    (0..x.n())
        .map(|j| x.col(j).iter().map(|&(i, v)| v * w[i]).sum())
        .collect()
}

/// `(1/λn) X α`, computed from scratch.
pub fn primal_from_dual(x: &DualIndexedSparseMatrix, lambda: f64, alpha: &[f64]) -> Vec<f64> {
    let scale = 1.0 / (lambda * x.n() as f64);
    let mut w = vec![0.0; x.d()];
    for (j, &a) in alpha.iter().enumerate() {
        for &(i, v) in x.col(j) {
            w[i] += scale * a * v;
        }
    }
    w
}

pub(crate) fn stop_interval(d: usize, n: usize) -> u64 {
    (d.max(n) as u64).div_ceil(10).max(1)
}
