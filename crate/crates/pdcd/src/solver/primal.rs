//! Serial randomized coordinate descent on the primal problem.
//!
//! Each iteration picks a feature `i`, computes the exact minimizer of the
//! separable quadratic upper bound in that coordinate,
//! `Δ_i = −n/(βu_i + λn) · ((1/n) Σ_j φ_j'(z_j) X_{ij} + λ w_i)`,
//! and keeps the residual `z = X^⊤ w` up to date incrementally. The sum runs
//! over the nonzeros of row `i` only, so one iteration costs `‖X_{i:}‖_0`
//! visited nonzeros.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::losses::LossModel;
use crate::matrix::DualIndexedSparseMatrix;
use crate::sampling::SerialSampling;

use super::{
    primal_objective_from_z, residuals, stop_interval, SolveOptions, SolverTrace, TraceRow,
};

/// Mutable state of a primal run.
#[derive(Debug, Clone)]
pub struct PrimalState {
    pub w: Vec<f64>,
    /// `z = X^⊤ w`, maintained incrementally.
    pub z: Vec<f64>,
    pub nnz_visited: u64,
    pub iterations: u64,
    pub loss_evals: u64,
}

impl PrimalState {
    pub fn new(x: &DualIndexedSparseMatrix, w0: Vec<f64>) -> Self {
        let z = residuals(x, &w0);
        Self { w: w0, z, nnz_visited: 0, iterations: 0, loss_evals: 0 }
    }
}

/// One coordinate update on feature `i`.
pub fn primal_step(
    state: &mut PrimalState,
    i: usize,
    x: &DualIndexedSparseMatrix,
    loss: &LossModel,
    lambda: f64,
    u_i: f64,
) {
    let n = x.n() as f64;
    let row = x.row(i);
    let grad_loss: f64 = row.iter().map(|&(j, v)| loss.derivative(j, state.z[j]) * v).sum();
    let delta = -(n / (loss.beta() * u_i + lambda * n)) * (grad_loss / n + lambda * state.w[i]);
    state.w[i] += delta;
    for &(j, v) in row {
        state.z[j] += delta * v;
    }
    // The z-update touches the same nonzeros again, but the cost model
    // charges the row once; memory traffic is really 2x this figure.
    state.nnz_visited += row.len() as u64;
    state.loss_evals += row.len() as u64;
    state.iterations += 1;
}

/// Runs primal RCD until the stopping rule fires. `sampling` is over the `d`
/// features; `u` is the separable overapproximation vector (row squared
/// norms for serial sampling, or anything at least as large).
pub fn solve_primal(
    x: &DualIndexedSparseMatrix,
    loss: &LossModel,
    lambda: f64,
    sampling: &SerialSampling,
    u: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolverTrace)> {
    let (d, n) = (x.d(), x.n());
    if sampling.m() != d {
        return Err(Error::DimensionMismatch { expected: d, got: sampling.m() });
    }
    if u.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.len() });
    }
    if loss.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: loss.n() });
    }
    let w0 = match &opts.init {
        Some(w) => {
            if w.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: w.len() });
            }
            w.clone()
        }
        None => vec![0.0; d],
    };

    let mut state = PrimalState::new(x, w0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let interval = opts.trace_interval_nnz.unwrap_or(x.nnz().max(1) as u64).max(1);
    let check_every = stop_interval(d, n);
    let nnz_budget = opts.stop.max_passes.map(|p| (p * x.nnz() as f64) as u64);
    let start = Instant::now();

    let mut trace = SolverTrace { seed: opts.seed, rows: Vec::new() };
    let mut next_trace = interval;
    let mut row_is_current;

    let push_row = |state: &PrimalState, trace: &mut SolverTrace, start: &Instant, x: &DualIndexedSparseMatrix, p: f64| {
        trace.rows.push(TraceRow {
            iter: state.iterations,
            nnz_visited: state.nnz_visited,
            passes: state.nnz_visited as f64 / x.nnz().max(1) as f64,
            primal_obj: p,
            dual_obj: None,
            gap: None,
            loss_evals: state.loss_evals,
            wall_ns: start.elapsed().as_nanos() as u64,
        });
    };

    let p0 = primal_objective_from_z(loss, lambda, &state.w, &state.z);
    push_row(&state, &mut trace, &start, x, p0);
    row_is_current = true;

    loop {
        let budget_hit = nnz_budget.is_some_and(|b| state.nnz_visited >= b)
            || opts.stop.max_iterations.is_some_and(|m| state.iterations >= m)
            || opts.stop.max_wall.is_some_and(|m| start.elapsed() >= m);
        let at_check = state.iterations.is_multiple_of(check_every) || state.nnz_visited >= next_trace;
        if budget_hit || at_check {
            let p = primal_objective_from_z(loss, lambda, &state.w, &state.z);
            if state.nnz_visited >= next_trace {
                push_row(&state, &mut trace, &start, x, p);
                row_is_current = true;
                while next_trace <= state.nnz_visited {
                    next_trace += interval;
                }
            }
            let target_hit = match (opts.stop.target_gap, opts.stop.reference_obj) {
                (Some(tol), Some(reference)) => p - reference <= tol,
                _ => false,
            };
            if budget_hit || target_hit {
                if !row_is_current {
                    push_row(&state, &mut trace, &start, x, p);
                }
                break;
            }
        }
        let i = sampling.draw(&mut rng);
        primal_step(&mut state, i, x, loss, lambda, u[i]);
        row_is_current = false;
    }
    Ok((state.w, trace))
}
