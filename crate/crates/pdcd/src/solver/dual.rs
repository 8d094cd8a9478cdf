//! Serial randomized coordinate ascent on the dual problem.
//!
//! Each iteration picks an example `j`, forms `dot = ⟨X_{:j}, w⟩` over the
//! nonzeros of column `j`, takes either the exact coordinate maximizer
//! (squared loss) or the fixed-stepsize η step (logistic loss), and keeps
//! `w = (1/λn) X α` up to date incrementally.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::losses::{eta_stepsize, LossKind, LossModel};
use crate::matrix::DualIndexedSparseMatrix;
use crate::sampling::SerialSampling;

use super::{
    dual_objective, primal_from_dual, primal_objective, stop_interval, SolveOptions, SolverTrace,
    TraceRow,
};

/// How the per-coordinate increment is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    /// Closed-form maximizer of the one-dimensional dual subproblem.
    Exact,
    /// `Δ = −η (φ_j'(dot) + α_j)` with a fixed stepsize.
    EtaStep(f64),
}

/// Mutable state of a dual run.
#[derive(Debug, Clone)]
pub struct DualState {
    pub alpha: Vec<f64>,
    /// `w = (1/λn) X α`, maintained incrementally.
    pub w: Vec<f64>,
    pub nnz_visited: u64,
    pub iterations: u64,
    pub loss_evals: u64,
}

impl DualState {
    pub fn new(x: &DualIndexedSparseMatrix, lambda: f64, alpha0: Vec<f64>) -> Self {
        let w = primal_from_dual(x, lambda, &alpha0);
        Self { alpha: alpha0, w, nnz_visited: 0, iterations: 0, loss_evals: 0 }
    }
}

/// One coordinate update on example `j`.
pub fn dual_step(
    state: &mut DualState,
    j: usize,
    x: &DualIndexedSparseMatrix,
    loss: &LossModel,
    lambda: f64,
    v_j: f64,
    mode: StepMode,
) -> Result<()> {
    let n = x.n();
    let col = x.col(j);
    let dot: f64 = col.iter().map(|&(i, v)| v * state.w[i]).sum();
    let delta = match mode {
        StepMode::Exact => loss.dual_coordinate_max(j, state.alpha[j], dot, v_j, lambda, n)?,
        StepMode::EtaStep(eta) => loss.eta_step(j, state.alpha[j], dot, eta),
    };
    state.alpha[j] += delta;
    let scale = delta / (lambda * n as f64);
    for &(i, v) in col {
        state.w[i] += scale * v;
    }
    state.nnz_visited += col.len() as u64;
    state.loss_evals += 1;
    state.iterations += 1;
    Ok(())
}

/// Runs dual RCD until the stopping rule fires. `sampling` is over the `n`
/// examples; `v` is the separable overapproximation vector (column squared
/// norms for serial sampling, or anything at least as large).
///
/// The step mode is chosen from the loss: exact maximization for squared
/// loss, the η variant (with `η = min_j q_j λn/(βv_j + λn)`) for logistic.
pub fn solve_dual(
    x: &DualIndexedSparseMatrix,
    loss: &LossModel,
    lambda: f64,
    sampling: &SerialSampling,
    v: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, Vec<f64>, SolverTrace)> {
    let (d, n) = (x.d(), x.n());
    if sampling.m() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sampling.m() });
    }
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if loss.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: loss.n() });
    }
    let alpha0 = match &opts.init {
        Some(a) => {
            if a.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: a.len() });
            }
            a.clone()
        }
        None => vec![0.0; n],
    };
    let mode = match loss.kind() {
        LossKind::Squared => StepMode::Exact,
        LossKind::Logistic => {
            StepMode::EtaStep(eta_stepsize(sampling.probs(), v, lambda, n, loss.beta()))
        }
    };

    let mut state = DualState::new(x, lambda, alpha0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let interval = opts.trace_interval_nnz.unwrap_or(x.nnz().max(1) as u64).max(1);
    let check_every = stop_interval(d, n);
    let nnz_budget = opts.stop.max_passes.map(|p| (p * x.nnz() as f64) as u64);
    let start = Instant::now();

    let mut trace = SolverTrace { seed: opts.seed, rows: Vec::new() };
    let mut next_trace = interval;
    let mut row_is_current;

    let eval = |state: &DualState| {
        let p = primal_objective(x, loss, lambda, &state.w);
        let dl = dual_objective(loss, lambda, &state.w, &state.alpha);
        (p, dl)
    };
    let push_row = |state: &DualState, trace: &mut SolverTrace, start: &Instant, p: f64, dl: f64| {
        trace.rows.push(TraceRow {
            iter: state.iterations,
            nnz_visited: state.nnz_visited,
            passes: state.nnz_visited as f64 / x.nnz().max(1) as f64,
            primal_obj: p,
            dual_obj: Some(dl),
            gap: Some(p - dl),
            loss_evals: state.loss_evals,
            wall_ns: start.elapsed().as_nanos() as u64,
        });
    };

    let (p0, d0) = eval(&state);
    push_row(&state, &mut trace, &start, p0, d0);
    row_is_current = true;

    loop {
        let budget_hit = nnz_budget.is_some_and(|b| state.nnz_visited >= b)
            || opts.stop.max_iterations.is_some_and(|m| state.iterations >= m)
            || opts.stop.max_wall.is_some_and(|m| start.elapsed() >= m);
        let at_check = state.iterations.is_multiple_of(check_every) || state.nnz_visited >= next_trace;
        if budget_hit || at_check {
            let (p, dl) = eval(&state);
            if state.nnz_visited >= next_trace {
                push_row(&state, &mut trace, &start, p, dl);
                row_is_current = true;
                while next_trace <= state.nnz_visited {
                    next_trace += interval;
                }
            }
            let target_hit = opts.stop.target_gap.is_some_and(|tol| {
                let measured = match opts.stop.reference_obj {
                    Some(reference) => p - reference,
                    None => p - dl,
                };
                measured <= tol
            });
            if budget_hit || target_hit {
                if !row_is_current {
                    push_row(&state, &mut trace, &start, p, dl);
                }
                break;
            }
        }
        let j = sampling.draw(&mut rng);
        dual_step(&mut state, j, x, loss, lambda, v[j], mode)?;
        row_is_current = false;
    }
    Ok((state.w, state.alpha, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::eso_serial;
    use crate::reference::{ridge_dual_solution, ridge_primal_solution};
    use crate::solver::StoppingRule;

    #[test]
    fn one_exact_step_reaches_optimum_on_1x1() {
        // Same 1x1 instance as the primal test, from the dual side:
        // y = 0, so alpha* = 0 - z* = 0 and w* = 0.
        let x = DualIndexedSparseMatrix::build(&[(0, 0, 1.0)], 1, 1).unwrap();
        let loss = LossModel::squared(vec![0.0]);
        let mut state = DualState::new(&x, 1.0, vec![1.0]);
        dual_step(&mut state, 0, &x, &loss, 1.0, 1.0, StepMode::Exact).unwrap();
        // Delta = (0 - 1 - 1)/(1 + 1) = -1 -> alpha = 0, w = 0
        assert_eq!(state.alpha[0], 0.0);
        assert_eq!(state.w[0], 0.0);
    }

    #[test]
    fn exact_step_is_stationary_at_optimum() {
        let x = crate::generators::gen_random(7, 11, 0.1, 1.0, 0.6, 13).unwrap().matrix;
        let y: Vec<f64> = (0..11).map(|j| (j as f64 / 5.0) - 1.0).collect();
        let lambda = 1.0 / 11.0;
        let w_star = ridge_primal_solution(&x, &y, lambda).unwrap();
        let alpha_star = ridge_dual_solution(&x, &y, &w_star);
        let loss = LossModel::squared(y);
        let (_, v) = eso_serial(&x);
        for (j, &vj) in v.iter().enumerate() {
            let mut state = DualState::new(&x, lambda, alpha_star.clone());
            let before = state.alpha[j];
            dual_step(&mut state, j, &x, &loss, lambda, vj, StepMode::Exact).unwrap();
            assert!((state.alpha[j] - before).abs() < 1e-8, "coordinate {j}");
        }
    }

    #[test]
    fn eta_step_noop_at_fixed_point() {
        let x = DualIndexedSparseMatrix::build(&[(0, 0, 1.0)], 1, 1).unwrap();
        let loss = LossModel::logistic(vec![1.0]).unwrap();
        // alpha such that phi'(dot) = -alpha
        let lambda = 1.0;
        let alpha = 0.3;
        let state = DualState::new(&x, lambda, vec![alpha]);
        let dot = state.w[0];
        let needed = -loss.derivative(0, dot);
        let mut state2 = DualState::new(&x, lambda, vec![needed]);
        // at the constructed point the step must vanish
        let dot2: f64 = x.col(0).iter().map(|&(i, v)| v * state2.w[i]).sum();
        if (loss.derivative(0, dot2) + needed).abs() < 1e-12 {
            dual_step(&mut state2, 0, &x, &loss, lambda, 1.0, StepMode::EtaStep(0.1)).unwrap();
            assert!((state2.alpha[0] - needed).abs() < 1e-12);
        }
        // and in general the eta step with derivative = -alpha is a no-op
        assert_eq!(loss.eta_step(0, -loss.derivative(0, dot), dot, 0.5), 0.0);
        let _ = state.alpha;
    }

    #[test]
    fn converges_on_ridge_and_respects_weak_duality() {
        let x = crate::generators::gen_random(30, 20, 0.2, 1.0, 0.5, 17).unwrap().matrix;
        let y: Vec<f64> = (0..20).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let lambda = 1.0 / 20.0;
        let loss = LossModel::squared(y.clone());
        let (_, v) = eso_serial(&x);
        let s: Vec<f64> = v.iter().map(|&vj| vj + lambda * 20.0).collect();
        let sampling = SerialSampling::importance(&s).unwrap();
        let opts = SolveOptions {
            stop: StoppingRule {
                target_gap: Some(1e-8),
                max_passes: Some(5000.0),
                ..StoppingRule::default()
            },
            ..SolveOptions::default()
        };
        let (w, alpha, trace) = solve_dual(&x, &loss, lambda, &sampling, &v, &opts).unwrap();
        assert!(trace.last().gap.unwrap() <= 1e-8);
        for row in &trace.rows {
            assert!(row.primal_obj >= row.dual_obj.unwrap() - 1e-10, "weak duality violated");
        }
        // optimality relation alpha_j + (dot_j - y_j) -> 0
        let z = crate::solver::residuals(&x, &w);
        for j in 0..20 {
            assert!((alpha[j] + z[j] - y[j]).abs() < 1e-3);
        }
    }

    #[test]
    fn starting_at_dual_optimum_terminates_immediately() {
        let x = crate::generators::gen_random(6, 8, 0.4, 1.0, 0.7, 23).unwrap().matrix;
        let y = vec![1.0; 8];
        let lambda = 1.0 / 8.0;
        let w_star = ridge_primal_solution(&x, &y, lambda).unwrap();
        let alpha_star = ridge_dual_solution(&x, &y, &w_star);
        let loss = LossModel::squared(y);
        let (_, v) = eso_serial(&x);
        let sampling = SerialSampling::uniform(8).unwrap();
        let opts = SolveOptions {
            init: Some(alpha_star),
            stop: StoppingRule { target_gap: Some(1e-10), ..StoppingRule::default() },
            ..SolveOptions::default()
        };
        let (_, _, trace) = solve_dual(&x, &loss, lambda, &sampling, &v, &opts).unwrap();
        assert_eq!(trace.rows.len(), 1);
    }

    #[test]
    fn maintained_w_stays_consistent() {
        let x = crate::generators::gen_random(9, 12, 0.0, 1.0, 0.5, 31).unwrap().matrix;
        let y: Vec<f64> = (0..12).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let lambda = 1.0 / 12.0;
        let loss = LossModel::logistic(y).unwrap();
        let (_, v) = eso_serial(&x);
        let sampling = SerialSampling::uniform(12).unwrap();
        let eta = eta_stepsize(sampling.probs(), &v, lambda, 12, loss.beta());
        let mut state = DualState::new(&x, lambda, vec![0.0; 12]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for k in 0..3000 {
            let j = sampling.draw(&mut rng);
            dual_step(&mut state, j, &x, &loss, lambda, v[j], StepMode::EtaStep(eta)).unwrap();
            if k % 1000 == 999 {
                let w = primal_from_dual(&x, lambda, &state.alpha);
                let scale = 1.0 + state.w.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                for (a, b) in state.w.iter().zip(&w) {
                    assert!((a - b).abs() <= 1e-8 * scale);
                }
            }
        }
    }

    #[test]
    fn exact_mode_rejected_for_logistic() {
        let x = DualIndexedSparseMatrix::build(&[(0, 0, 1.0)], 1, 1).unwrap();
        let loss = LossModel::logistic(vec![1.0]).unwrap();
        let mut state = DualState::new(&x, 1.0, vec![0.0]);
        let res = dual_step(&mut state, 0, &x, &loss, 1.0, 1.0, StepMode::Exact);
        assert!(matches!(res, Err(Error::UnsupportedLoss)));
    }
}
