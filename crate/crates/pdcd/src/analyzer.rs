//! The cost model deciding between primal and dual coordinate descent.
//!
//! For a data matrix `X`, regularizer `λ` and smoothness `β`, the expected
//! total work of each method under a serial sampling `p` factors into an
//! iteration bound times an average per-iteration cost:
//!
//! ```text
//! K̂_P = max_i (β u_i + λn)/(p_i λn)      W_P = Σ_i p_i ‖X_{i:}‖_0
//! T_P = K̂_P · W_P                        (log factor dropped)
//! ```
//!
//! and symmetrically for the dual over columns. Under importance sampling
//! (`p_i ∝ β u_i + λn`) these collapse to
//! `T_P = ‖X‖_0 + (β/λn) C_P(X)` with `C_P(X) = Σ_i ‖X_{i:}‖_0 ‖X_{i:}‖²`,
//! so the face-off between the two methods is governed by the structural
//! costs `C_P` and `C_D`. For binary matrices with `α` nonzeros the extreme
//! values of these costs are the closed-form functions `L` and `U`, checked
//! here against an exhaustive enumerator at small sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::DualIndexedSparseMatrix;
use crate::sampling::SerialSampling;

/// Which of the two problems a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Coordinates are the `d` features (rows of `X`).
    Primal,
    /// Coordinates are the `n` examples (columns of `X`).
    Dual,
}

/// Serial ESO parameters: `u_i = ‖X_{i:}‖_2²`, `v_j = ‖X_{:j}‖_2²`.
pub fn eso_serial(x: &DualIndexedSparseMatrix) -> (Vec<f64>, Vec<f64>) {
    let s = x.stats();
    (s.row_sqnorm, s.col_sqnorm)
}

/// Unnormalized importance-sampling weights `s_i = β e_i + λn` for the given
/// side, where `e` is the serial ESO vector of that side.
pub fn importance_weights(
    side: Side,
    x: &DualIndexedSparseMatrix,
    lambda: f64,
    beta: f64,
) -> Vec<f64> {
    let (u, v) = eso_serial(x);
    let e = match side {
        Side::Primal => u,
        Side::Dual => v,
    };
    let ln = lambda * x.n() as f64;
    e.into_iter().map(|ei| beta * ei + ln).collect()
}

/// The importance sampling for the given side.
pub fn importance_sampling(
    side: Side,
    x: &DualIndexedSparseMatrix,
    lambda: f64,
    beta: f64,
) -> Result<SerialSampling> {
    SerialSampling::importance(&importance_weights(side, x, lambda, beta))
}

fn side_nnz(side: Side, x: &DualIndexedSparseMatrix) -> Vec<usize> {
    let s = x.stats();
    match side {
        Side::Primal => s.row_nnz,
        Side::Dual => s.col_nnz,
    }
}

fn check_side_dims(side: Side, x: &DualIndexedSparseMatrix, m: usize) -> Result<()> {
    let expected = match side {
        Side::Primal => x.d(),
        Side::Dual => x.n(),
    };
    if m != expected {
        return Err(Error::DimensionMismatch { expected, got: m });
    }
    Ok(())
}

/// The bracketed iteration factor `max_i (β e_i + λn)/(p_i λn)` (log-free).
pub fn iteration_factor(
    side: Side,
    x: &DualIndexedSparseMatrix,
    lambda: f64,
    beta: f64,
    sampling: &SerialSampling,
) -> Result<f64> {
    check_side_dims(side, x, sampling.m())?;
    let ln = lambda * x.n() as f64;
    let weights = importance_weights(side, x, lambda, beta);
    Ok(weights
        .iter()
        .zip(sampling.probs())
        .map(|(&s, &p)| s / (p * ln))
        .fold(0.0, f64::max))
}

/// Iteration bound `K = max_i((β e_i + λn)/(p_i λn)) · log(conv_const/ε)`
/// guaranteeing expected suboptimality at most ε.
pub fn iteration_bound(
    side: Side,
    x: &DualIndexedSparseMatrix,
    lambda: f64,
    beta: f64,
    sampling: &SerialSampling,
    eps: f64,
    conv_const: f64,
) -> Result<f64> {
    if eps.is_nan() || eps <= 0.0 || eps > conv_const {
        return Err(Error::BadEpsilon { eps, limit: conv_const });
    }
    Ok(iteration_factor(side, x, lambda, beta, sampling)? * (conv_const / eps).ln())
}

/// Expected nonzeros visited per iteration, `W = Σ_i p_i ‖X_{i:}‖_0`
/// (rows for the primal side, columns for the dual).
pub fn iteration_cost(
    side: Side,
    x: &DualIndexedSparseMatrix,
    sampling: &SerialSampling,
) -> Result<f64> {
    check_side_dims(side, x, sampling.m())?;
    Ok(side_nnz(side, x)
        .iter()
        .zip(sampling.probs())
        .map(|(&c, &p)| p * c as f64)
        .sum())
}

/// Log-free total complexity `T = K̂ · W` for the given sampling.
pub fn total_complexity(
    side: Side,
    x: &DualIndexedSparseMatrix,
    lambda: f64,
    beta: f64,
    sampling: &SerialSampling,
) -> Result<f64> {
    Ok(iteration_factor(side, x, lambda, beta, sampling)? * iteration_cost(side, x, sampling)?)
}

/// `C_P(X) = Σ_i ‖X_{i:}‖_0 ‖X_{i:}‖²`.
pub fn cost_cp(x: &DualIndexedSparseMatrix) -> f64 {
    (0..x.d())
        .map(|i| {
            let row = x.row(i);
            row.len() as f64 * row.iter().map(|&(_, v)| v * v).sum::<f64>()
        })
        .sum()
}

/// `C_D(X) = Σ_j ‖X_{:j}‖_0 ‖X_{:j}‖²`.
pub fn cost_cd(x: &DualIndexedSparseMatrix) -> f64 {
    (0..x.n())
        .map(|j| {
            let col = x.col(j);
            col.len() as f64 * col.iter().map(|&(_, v)| v * v).sum::<f64>()
        })
        .sum()
}

/// Exact integer `C_P` for a ±1 matrix: `Σ_i ‖X_{i:}‖_0²`.
pub fn binary_cost_cp(x: &DualIndexedSparseMatrix) -> u64 {
    (0..x.d()).map(|i| (x.row(i).len() as u64).pow(2)).sum()
}

/// Exact integer `C_D` for a ±1 matrix: `Σ_j ‖X_{:j}‖_0²`.
pub fn binary_cost_cd(x: &DualIndexedSparseMatrix) -> u64 {
    (0..x.n()).map(|j| (x.col(j).len() as u64).pow(2)).sum()
}

fn round_down_to_multiple(a: u64, b: u64) -> u64 {
    b * (a / b)
}

/// `L(α, n)`: the minimum of `Σ_j ω_j²` over column counts `ω_j ≥ 1` summing
/// to α with `ω_j ≤ d` implied feasible. Exact integer.
pub fn l_value(alpha: u64, n: usize) -> u64 {
    let n = n as u64;
    let a = alpha / n;
    let abar = n * a;
    // (1/n)(abar² + (α − abar)(2·abar + n)), simplified to stay integral
    n * a * a + (alpha - abar) * (2 * a + 1)
}

/// `U(α, d, n)`: the maximum of `Σ_j ω_j²` over column counts as above.
/// Exact integer.
pub fn u_value(alpha: u64, d: usize, n: usize) -> u64 {
    if d == 1 {
        // every column holds exactly one entry
        return n as u64;
    }
    let (d, n) = (d as u64, n as u64);
    let m = alpha - n;
    let mbar = round_down_to_multiple(m, d - 1);
    let b = m + 1 - mbar;
    (d + 1) * mbar + n - 1 + b * b
}

/// `R(α, d, n) = U(α, n, d) / L(α, n)`: the tight upper bound on
/// `C_P/C_D` over `d×n` binary matrices with `α` nonzeros (the numerator is
/// the maximal `C_P`, the denominator the minimal `C_D`). At most 1 whenever
/// `d ≥ n` and `α ≥ n² + 3n`.
pub fn r_value(alpha: u64, d: usize, n: usize) -> f64 {
    u_value(alpha, n, d) as f64 / l_value(alpha, n) as f64
}

/// Extremes of the binary structural costs at fixed nonzero count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryCostExtremes {
    pub min_cd: u64,
    pub max_cd: u64,
    pub min_cp: u64,
    pub max_cp: u64,
}

/// Closed-form extremes of `C_D`/`C_P` over `B^{d×n}_{≠0}` with `‖X‖_0 = α`,
/// plus the ratio bounds `R(α,d,n)` and `R(α,n,d)` sandwiching `C_P/C_D`
/// in `[1/R(α,n,d), R(α,d,n)]`.
pub fn binary_extremes(alpha: u64, d: usize, n: usize) -> Result<(BinaryCostExtremes, f64, f64)> {
    if alpha < d.max(n) as u64 || alpha > (d as u64) * (n as u64) {
        return Err(Error::InfeasibleAlpha { alpha, d, n });
    }
    let ext = BinaryCostExtremes {
        min_cd: l_value(alpha, n),
        max_cd: u_value(alpha, d, n),
        min_cp: l_value(alpha, d),
        max_cp: u_value(alpha, n, d),
    };
    let r_dn = ext.max_cp as f64 / ext.min_cd as f64;
    let r_nd = ext.max_cd as f64 / ext.min_cp as f64;
    Ok((ext, r_dn, r_nd))
}

/// Exhaustive enumeration of all `{0,1}` patterns of shape `d×n` with `α`
/// nonzeros and no zero row or column, returning the exact extremes of
/// `C_D` and `C_P`. Signs are irrelevant to the structural costs. Limited
/// to `d·n ≤ 24` cells.
pub fn brute_force_binary_extremes(d: usize, n: usize, alpha: u64) -> Result<BinaryCostExtremes> {
    let cells = d * n;
    if cells > 24 {
        return Err(Error::TooLarge { got: cells, limit: 24 });
    }
    if alpha < d.max(n) as u64 || alpha > cells as u64 {
        return Err(Error::InfeasibleAlpha { alpha, d, n });
    }
    let mut ext: Option<BinaryCostExtremes> = None;
    for mask in 0u32..(1u32 << cells) {
        if mask.count_ones() as u64 != alpha {
            continue;
        }
        let mut row_cnt = vec![0u64; d];
        let mut col_cnt = vec![0u64; n];
        for c in 0..cells {
            if mask & (1 << c) != 0 {
                row_cnt[c / n] += 1;
                col_cnt[c % n] += 1;
            }
        }
        if row_cnt.contains(&0) || col_cnt.contains(&0) {
            continue;
        }
        let cp: u64 = row_cnt.iter().map(|&c| c * c).sum();
        let cd: u64 = col_cnt.iter().map(|&c| c * c).sum();
        ext = Some(match ext {
            None => BinaryCostExtremes { min_cd: cd, max_cd: cd, min_cp: cp, max_cp: cp },
            Some(e) => BinaryCostExtremes {
                min_cd: e.min_cd.min(cd),
                max_cd: e.max_cd.max(cd),
                min_cp: e.min_cp.min(cp),
                max_cp: e.max_cp.max(cp),
            },
        });
    }
    ext.ok_or(Error::InfeasibleAlpha { alpha, d, n })
}

/// Outcome of one structural-bound check.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// All structural bounds verified on one matrix.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub cp: f64,
    pub cd: f64,
    pub frob_sq: f64,
    /// Each entry asserts `lhs ≤ rhs`.
    pub checks: Vec<BoundCheck>,
}

/// Verifies the structural-cost bounds on `X`: `‖X‖_F² ≤ C_P ≤ n‖X‖_F²`,
/// `‖X‖_F² ≤ C_D ≤ d‖X‖_F²` and `1/d ≤ C_P/C_D ≤ n`; for ±1 matrices
/// additionally the ratio bounds via `R` and, when the density hypotheses
/// hold, the one-sided dominance `C_P ≤ C_D` (or symmetrically).
///
/// A violated bound is a hard error: it would falsify the implementation.
pub fn check_theorem_bounds(x: &DualIndexedSparseMatrix) -> Result<BoundReport> {
    let s = x.stats();
    if s.row_nnz.contains(&0) {
        return Err(Error::ZeroRowOrColumn("row"));
    }
    if s.col_nnz.contains(&0) {
        return Err(Error::ZeroRowOrColumn("column"));
    }
    let (d, n) = (x.d() as f64, x.n() as f64);
    let cp = cost_cp(x);
    let cd = cost_cd(x);
    let f2 = s.frob_sq;
    let mut checks = vec![
        BoundCheck { name: "frob_sq <= C_P", lhs: f2, rhs: cp },
        BoundCheck { name: "C_P <= n*frob_sq", lhs: cp, rhs: n * f2 },
        BoundCheck { name: "frob_sq <= C_D", lhs: f2, rhs: cd },
        BoundCheck { name: "C_D <= d*frob_sq", lhs: cd, rhs: d * f2 },
        BoundCheck { name: "1/d <= C_P/C_D", lhs: 1.0 / d, rhs: cp / cd },
        BoundCheck { name: "C_P/C_D <= n", lhs: cp / cd, rhs: n },
    ];
    let is_binary = x.triples().iter().all(|&(_, _, v)| v.abs() == 1.0);
    if is_binary {
        let alpha = x.nnz() as u64;
        let (_, r_dn, r_nd) = binary_extremes(alpha, x.d(), x.n())?;
        let ratio = cp / cd;
        checks.push(BoundCheck { name: "1/R(a,n,d) <= C_P/C_D", lhs: 1.0 / r_nd, rhs: ratio });
        checks.push(BoundCheck { name: "C_P/C_D <= R(a,d,n)", lhs: ratio, rhs: r_dn });
        if x.d() >= x.n() && alpha >= (x.n() * x.n() + 3 * x.n()) as u64 {
            checks.push(BoundCheck { name: "dense-enough, d>=n: C_P <= C_D", lhs: cp, rhs: cd });
        }
        if x.n() >= x.d() && alpha >= (x.d() * x.d() + 3 * x.d()) as u64 {
            checks.push(BoundCheck { name: "dense-enough, n>=d: C_D <= C_P", lhs: cd, rhs: cp });
        }
    }
    for c in &checks {
        // tiny relative slack for float accumulation
        let tol = 1e-9 * c.rhs.abs().max(c.lhs.abs()).max(1.0);
        if c.lhs > c.rhs + tol {
            return Err(Error::BoundViolated(format!("{}: {} > {}", c.name, c.lhs, c.rhs)));
        }
    }
    Ok(BoundReport { cp, cd, frob_sq: f2, checks })
}

/// Which method the cost model favors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recommendation {
    Primal,
    Dual,
    /// `T_P` and `T_D` within 1% of each other.
    Tie,
}

impl std::fmt::Display for Recommendation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Recommendation::Primal => write!(f, "Primal"),
            Recommendation::Dual => write!(f, "Dual"),
            Recommendation::Tie => write!(f, "Tie"),
        }
    }
}

/// Full cost-model report for one `(X, λ, β)` instance under importance
/// sampling on both sides.
#[derive(Debug, Clone)]
pub struct ComplexityReport {
    pub d: usize,
    pub n: usize,
    pub nnz: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Log-free iteration factors `K̂` under importance sampling.
    pub khat_p: f64,
    pub khat_d: f64,
    pub w_p: f64,
    pub w_d: f64,
    pub t_p: f64,
    pub t_d: f64,
    pub c_p: f64,
    pub c_d: f64,
    /// `T_P / T_D`.
    pub ratio: f64,
    pub recommendation: Recommendation,
}

/// Computes the full report and the primal-vs-dual recommendation.
pub fn recommend(x: &DualIndexedSparseMatrix, lambda: f64, beta: f64) -> Result<ComplexityReport> {
    let s = x.stats();
    if s.row_nnz.contains(&0) {
        return Err(Error::ZeroRowOrColumn("row"));
    }
    if s.col_nnz.contains(&0) {
        return Err(Error::ZeroRowOrColumn("column"));
    }
    let (u, v) = eso_serial(x);
    let sp = importance_sampling(Side::Primal, x, lambda, beta)?;
    let sd = importance_sampling(Side::Dual, x, lambda, beta)?;
    let khat_p = iteration_factor(Side::Primal, x, lambda, beta, &sp)?;
    let khat_d = iteration_factor(Side::Dual, x, lambda, beta, &sd)?;
    let w_p = iteration_cost(Side::Primal, x, &sp)?;
    let w_d = iteration_cost(Side::Dual, x, &sd)?;
    let c_p = cost_cp(x);
    let c_d = cost_cd(x);
    // importance-sampling closed form: T = nnz + (β/λn) C
    let ln = lambda * x.n() as f64;
    let t_p = x.nnz() as f64 + beta / ln * c_p;
    let t_d = x.nnz() as f64 + beta / ln * c_d;
    let ratio = t_p / t_d;
    let recommendation = if (t_p - t_d).abs() <= 0.01 * t_p.max(t_d) {
        Recommendation::Tie
    } else if t_p < t_d {
        Recommendation::Primal
    } else {
        Recommendation::Dual
    };
    Ok(ComplexityReport {
        d: x.d(),
        n: x.n(),
        nnz: x.nnz(),
        u,
        v,
        khat_p,
        khat_d,
        w_p,
        w_d,
        t_p,
        t_d,
        c_p,
        c_d,
        ratio,
        recommendation,
    })
}

/// Random search plus local refinement over the probability simplex for a
/// serial sampling minimizing the total complexity `T`. Returns the best
/// sampling found and its `T`. Used to probe the optimality of importance
/// sampling, not as a production component.
pub fn optimal_sampling_search(
    side: Side,
    x: &DualIndexedSparseMatrix,
    lambda: f64,
    beta: f64,
    trials: usize,
    seed: u64,
) -> (Vec<f64>, f64) {
    let weights = importance_weights(side, x, lambda, beta);
    let nnzs = side_nnz(side, x);
    let ln = lambda * x.n() as f64;
    let m = weights.len();
    let eval = |p: &[f64]| -> f64 {
        let total: f64 = p.iter().sum();
        let khat = weights
            .iter()
            .zip(p)
            .map(|(&s, &pi)| s / (pi / total * ln))
            .fold(0.0, f64::max);
        let w: f64 = nnzs.iter().zip(p).map(|(&c, &pi)| pi / total * c as f64).sum();
        khat * w
    };
    let normalize = |p: &mut Vec<f64>| {
        let t: f64 = p.iter().sum();
        for pi in p.iter_mut() {
            *pi /= t;
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Vec<f64> = vec![1.0 / m as f64; m];
    let mut best_t = eval(&best);
    let importance: Vec<f64> = {
        let t: f64 = weights.iter().sum();
        weights.iter().map(|&w| w / t).collect()
    };
    let t_imp = eval(&importance);
    if t_imp < best_t {
        best = importance;
        best_t = t_imp;
    }
    let random_trials = trials / 2;
    for _ in 0..random_trials {
        // exponential draws normalized: uniform on the simplex
        let mut p: Vec<f64> = (0..m).map(|_| -rng.gen::<f64>().ln().max(1e-12)).collect();
        normalize(&mut p);
        let t = eval(&p);
        if t < best_t {
            best = p;
            best_t = t;
        }
    }
    for _ in 0..(trials - random_trials) {
        let mut p = best.clone();
        let i = rng.gen_range(0..m);
        p[i] *= rng.gen_range(0.7..1.4);
        normalize(&mut p);
        let t = eval(&p);
        if t < best_t {
            best = p;
            best_t = t;
        }
    }
    (best, best_t)
}

/// Monte-Carlo means (with standard errors) of `C_P` and `C_D` over dense
/// `d×n` matrices with i.i.d. `Normal(mu, sigma²)` entries.
///
/// Since every entry is nonzero almost surely, `C_P = n‖X‖_F²` and
/// `C_D = d‖X‖_F²`, so `E[C_P] = dn²(σ² + μ²)` and `E[C_D] = nd²(σ² + μ²)`:
/// which side wins in expectation is exactly `d` versus `n`.
pub fn random_dense_expectation(
    d: usize,
    n: usize,
    mu: f64,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> ((f64, f64), (f64, f64)) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(mu, sigma.max(0.0)).expect("sigma >= 0");
    let mut cps = Vec::with_capacity(samples);
    let mut cds = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut row_sq = vec![0.0; d];
        let mut col_sq = vec![0.0; n];
        for rs in row_sq.iter_mut() {
            for cs in col_sq.iter_mut() {
                let v: f64 = normal.sample(&mut rng);
                *rs += v * v;
                *cs += v * v;
            }
        }
        cps.push(n as f64 * row_sq.iter().sum::<f64>());
        cds.push(d as f64 * col_sq.iter().sum::<f64>());
    }
    (mean_and_se(&cps), mean_and_se(&cds))
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ones(d: usize, n: usize) -> DualIndexedSparseMatrix {
        let triples: Vec<_> = (0..d)
            .flat_map(|i| (0..n).map(move |j| (i, j, 1.0)))
            .collect();
        DualIndexedSparseMatrix::build(&triples, d, n).unwrap()
    }

    fn identity(k: usize) -> DualIndexedSparseMatrix {
        let triples: Vec<_> = (0..k).map(|i| (i, i, 1.0)).collect();
        DualIndexedSparseMatrix::build(&triples, k, k).unwrap()
    }

    #[test]
    fn eso_identity_and_ones() {
        let (u, v) = eso_serial(&identity(3));
        assert_eq!(u, vec![1.0; 3]);
        assert_eq!(v, vec![1.0; 3]);
        let (u, v) = eso_serial(&ones(2, 3));
        assert_eq!(u, vec![3.0; 2]);
        assert_eq!(v, vec![2.0; 3]);
    }

    #[test]
    fn serial_eso_is_exact_diagonal() {
        // For serial sampling P = (1/d) I, so P∘XX^T = Diag(p∘u) exactly:
        // the diagonal of XX^T must equal u entrywise.
        let x = crate::generators::gen_random(5, 4, 0.2, 1.0, 0.8, 2).unwrap().matrix;
        let (u, _) = eso_serial(&x);
        for (i, &ui) in u.iter().enumerate() {
            let diag: f64 = x.row(i).iter().map(|&(_, v)| v * v).sum();
            assert_eq!(diag, ui);
        }
    }

    #[test]
    fn iteration_bound_uniform_constant_rows() {
        // constant u: K_P = d (1 + beta*u/(lambda n)) log(C/eps)
        let x = ones(4, 3);
        let lambda = 0.5;
        let sampling = SerialSampling::uniform(4).unwrap();
        let k = iteration_bound(Side::Primal, &x, lambda, 1.0, &sampling, 0.01, 1.0).unwrap();
        let expected = 4.0 * (1.0 + 3.0 / (lambda * 3.0)) * (1.0f64 / 0.01).ln();
        assert_relative_eq!(k, expected, epsilon = 1e-12);
    }

    #[test]
    fn iteration_bound_importance_all_ratios_equal() {
        let x = crate::generators::gen_random(6, 5, 0.1, 1.0, 0.7, 4).unwrap().matrix;
        let lambda = 0.2;
        let beta = 0.25;
        let s = importance_sampling(Side::Primal, &x, lambda, beta).unwrap();
        let weights = importance_weights(Side::Primal, &x, lambda, beta);
        let ln = lambda * 5.0;
        let ratios: Vec<f64> = weights.iter().zip(s.probs()).map(|(&w, &p)| w / (p * ln)).collect();
        let expected = weights.iter().sum::<f64>() / ln;
        for r in ratios {
            assert_relative_eq!(r, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn iteration_bound_eps_equals_const_is_zero() {
        let x = identity(2);
        let s = SerialSampling::uniform(2).unwrap();
        assert_eq!(iteration_bound(Side::Primal, &x, 1.0, 1.0, &s, 1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            iteration_bound(Side::Primal, &x, 1.0, 1.0, &s, 2.0, 1.0),
            Err(Error::BadEpsilon { .. })
        ));
    }

    #[test]
    fn iteration_cost_uniform_and_degenerate() {
        let x = crate::generators::gen_random(8, 6, 0.5, 1.0, 0.5, 6).unwrap().matrix;
        let uni = SerialSampling::uniform(8).unwrap();
        assert_relative_eq!(
            iteration_cost(Side::Primal, &x, &uni).unwrap(),
            x.nnz() as f64 / 8.0,
            epsilon = 1e-12
        );
        // nearly all mass on the densest row
        let s = x.stats();
        let densest = (0..8).max_by_key(|&i| s.row_nnz[i]).unwrap();
        let mut w = vec![1e-12; 8];
        w[densest] = 1.0;
        let conc = SerialSampling::from_weights(&w).unwrap();
        assert_relative_eq!(
            iteration_cost(Side::Primal, &x, &conc).unwrap(),
            s.row_nnz[densest] as f64,
            max_relative = 1e-9
        );
    }

    #[test]
    fn iteration_cost_matches_monte_carlo() {
        use rand::SeedableRng;
        let x = crate::generators::gen_random(10, 10, 0.3, 1.0, 0.6, 8).unwrap().matrix;
        let s = importance_sampling(Side::Primal, &x, 0.1, 1.0).unwrap();
        let w = iteration_cost(Side::Primal, &x, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 1_000_000;
        let total: u64 = (0..draws).map(|_| x.row(s.draw(&mut rng)).len() as u64).sum();
        let mc = total as f64 / draws as f64;
        assert!((mc - w).abs() / w < 0.01, "mc={mc} w={w}");
    }

    #[test]
    fn total_complexity_importance_closed_form() {
        let x = crate::generators::gen_random(7, 9, 0.2, 1.0, 0.6, 10).unwrap().matrix;
        let (lambda, beta) = (1.0 / 9.0, 0.25);
        let s = importance_sampling(Side::Primal, &x, lambda, beta).unwrap();
        let t = total_complexity(Side::Primal, &x, lambda, beta, &s).unwrap();
        let closed = x.nnz() as f64 + beta / (lambda * 9.0) * cost_cp(&x);
        assert_relative_eq!(t, closed, max_relative = 1e-9);
    }

    #[test]
    fn total_complexity_uniform_closed_form() {
        let x = crate::generators::gen_random(7, 9, 0.2, 1.0, 0.6, 11).unwrap().matrix;
        let (lambda, beta) = (1.0 / 9.0, 1.0);
        let s = SerialSampling::uniform(7).unwrap();
        let t = total_complexity(Side::Primal, &x, lambda, beta, &s).unwrap();
        let max_row = eso_serial(&x).0.into_iter().fold(0.0f64, f64::max);
        let closed = x.nnz() as f64 * (1.0 + beta / (lambda * 9.0) * max_row);
        assert_relative_eq!(t, closed, max_relative = 1e-9);
    }

    #[test]
    fn importance_never_worse_than_uniform() {
        for seed in 0..200 {
            let x = crate::generators::gen_random(6, 7, 0.4, 1.0, 0.5, seed).unwrap().matrix;
            for side in [Side::Primal, Side::Dual] {
                let m = if side == Side::Primal { 6 } else { 7 };
                let uni = SerialSampling::uniform(m).unwrap();
                let imp = importance_sampling(side, &x, 1.0 / 7.0, 1.0).unwrap();
                let tu = total_complexity(side, &x, 1.0 / 7.0, 1.0, &uni).unwrap();
                let ti = total_complexity(side, &x, 1.0 / 7.0, 1.0, &imp).unwrap();
                assert!(ti <= tu * (1.0 + 1e-12), "seed {seed}: {ti} > {tu}");
            }
        }
    }

    #[test]
    fn cost_dense_binary() {
        let x = ones(4, 3);
        assert_eq!(cost_cp(&x), (4 * 3 * 3) as f64);
        assert_eq!(cost_cd(&x), (3 * 4 * 4) as f64);
        assert_eq!(binary_cost_cp(&x), 36);
        assert_eq!(binary_cost_cd(&x), 48);
    }

    #[test]
    fn l_and_u_hand_values() {
        assert_eq!(l_value(5, 3), 9); // columns (2,2,1)
        assert_eq!(u_value(5, 3, 3), 11); // columns (3,1,1)
        // full matrix: unique configuration
        assert_eq!(l_value(12, 3), u_value(12, 4, 3));
        assert_eq!(l_value(12, 3), 3 * 16);
        // permutation: alpha = d = n
        assert_eq!(l_value(4, 4), 4);
        assert_eq!(u_value(4, 4, 4), 4);
    }

    #[test]
    fn binary_extremes_feasibility() {
        assert!(matches!(binary_extremes(2, 3, 3), Err(Error::InfeasibleAlpha { .. })));
        assert!(matches!(binary_extremes(10, 3, 3), Err(Error::InfeasibleAlpha { .. })));
        let (e, _, _) = binary_extremes(9, 3, 3).unwrap();
        assert_eq!(e.min_cd, e.max_cd); // full matrix is unique
    }

    #[test]
    fn brute_force_matches_formulas_small() {
        for d in 2..=4usize {
            for n in 2..=4usize {
                for alpha in (d.max(n) as u64)..=((d * n) as u64) {
                    let bf = brute_force_binary_extremes(d, n, alpha).unwrap();
                    let (f, _, _) = binary_extremes(alpha, d, n).unwrap();
                    assert_eq!(bf, f, "d={d} n={n} alpha={alpha}");
                }
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        let e = brute_force_binary_extremes(2, 2, 2).unwrap();
        assert_eq!(e.min_cd, 2); // diagonal
        assert_eq!(e.max_cd, u_value(2, 2, 2));
        let e = brute_force_binary_extremes(2, 3, 3).unwrap();
        assert_eq!(e.min_cd, l_value(3, 3));
        assert_eq!(e.max_cd, u_value(3, 2, 3));
        // alpha = dn: single matrix, min = max
        let e = brute_force_binary_extremes(3, 3, 9).unwrap();
        assert_eq!((e.min_cd, e.min_cp), (e.max_cd, e.max_cp));
    }

    #[test]
    fn brute_force_size_limit() {
        assert!(matches!(
            brute_force_binary_extremes(5, 5, 10),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn bounds_hold_on_tightness_family_limits() {
        // (b,c) -> 0: ratio -> 1/d
        let x = crate::generators::gen_tightness_family(50, 20, 1.0, 1e-6, 1e-6).unwrap();
        let r = check_theorem_bounds(&x).unwrap();
        assert_relative_eq!(r.cp / r.cd, 1.0 / 50.0, max_relative = 1e-3);
        // (a,c) -> 0: ratio -> n
        let x = crate::generators::gen_tightness_family(50, 20, 1e-6, 1.0, 1e-6).unwrap();
        let r = check_theorem_bounds(&x).unwrap();
        assert_relative_eq!(r.cp / r.cd, 20.0, max_relative = 1e-3);
    }

    #[test]
    fn bounds_reject_zero_rows() {
        let x = DualIndexedSparseMatrix::build(&[(0, 0, 1.0)], 2, 1).unwrap();
        assert!(matches!(check_theorem_bounds(&x), Err(Error::ZeroRowOrColumn("row"))));
    }

    #[test]
    fn all_binary_3x3_alpha5_within_ratio_bounds() {
        let (_, r_dn, r_nd) = binary_extremes(5, 3, 3).unwrap();
        for mask in 0u32..(1 << 9) {
            if mask.count_ones() != 5 {
                continue;
            }
            let triples: Vec<_> = (0..9)
                .filter(|c| mask & (1 << c) != 0)
                .map(|c| (c / 3, c % 3, 1.0))
                .collect();
            let x = DualIndexedSparseMatrix::build(&triples, 3, 3).unwrap();
            let s = x.stats();
            if s.row_nnz.contains(&0) || s.col_nnz.contains(&0) {
                continue;
            }
            let ratio = binary_cost_cp(&x) as f64 / binary_cost_cd(&x) as f64;
            assert!(ratio <= r_dn + 1e-12 && ratio >= 1.0 / r_nd - 1e-12);
        }
    }

    #[test]
    fn recommend_symmetric_matrix_is_tie() {
        // symmetric pattern and values: X = X^T
        let triples = vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0), (2, 2, 3.0)];
        let x = DualIndexedSparseMatrix::build(&triples, 3, 3).unwrap();
        let r = recommend(&x, 1.0 / 3.0, 1.0).unwrap();
        assert_eq!(r.recommendation, Recommendation::Tie);
        assert_eq!(r.c_p, r.c_d);
    }

    #[test]
    fn recommend_rejects_zero_column() {
        let x = DualIndexedSparseMatrix::build(&[(0, 0, 1.0), (1, 0, 1.0)], 2, 2).unwrap();
        assert!(matches!(recommend(&x, 0.1, 1.0), Err(Error::ZeroRowOrColumn("column"))));
    }

    #[test]
    fn search_never_beats_importance() {
        for seed in 0..10 {
            let x = crate::generators::gen_random(5, 6, 0.3, 1.0, 0.6, seed).unwrap().matrix;
            let (lambda, beta) = (1.0 / 6.0, 1.0);
            let imp = importance_sampling(Side::Primal, &x, lambda, beta).unwrap();
            let t_imp = total_complexity(Side::Primal, &x, lambda, beta, &imp).unwrap();
            let (_, best_t) = optimal_sampling_search(Side::Primal, &x, lambda, beta, 10_000, seed);
            assert!(best_t >= t_imp - 1e-9 * t_imp, "seed {seed}: {best_t} < {t_imp}");
        }
    }

    #[test]
    fn search_degenerate_single_row() {
        let x = DualIndexedSparseMatrix::build(&[(0, 0, 1.0), (0, 1, 2.0)], 1, 2).unwrap();
        let imp = importance_sampling(Side::Primal, &x, 0.5, 1.0).unwrap();
        let t_imp = total_complexity(Side::Primal, &x, 0.5, 1.0, &imp).unwrap();
        let (p, best_t) = optimal_sampling_search(Side::Primal, &x, 0.5, 1.0, 100, 0);
        assert_eq!(p, vec![1.0]);
        assert_relative_eq!(best_t, t_imp, max_relative = 1e-12);
    }

    #[test]
    fn search_finds_proportionality_condition() {
        // two-row matrix: the optimizer satisfies s_i/p_i = const
        let x = DualIndexedSparseMatrix::build(&[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0)], 2, 2)
            .unwrap();
        let (lambda, beta) = (0.25, 1.0);
        let weights = importance_weights(Side::Primal, &x, lambda, beta);
        let (p, _) = optimal_sampling_search(Side::Primal, &x, lambda, beta, 200_000, 3);
        let r0 = weights[0] / p[0];
        let r1 = weights[1] / p[1];
        assert!((r0 - r1).abs() / r0.max(r1) < 1e-3, "{r0} vs {r1}");
    }

    #[test]
    fn dense_expectation_zero_mean() {
        let ((cp, se_p), (cd, se_d)) = random_dense_expectation(6, 4, 0.0, 1.0, 400, 0);
        // E[C_P] = d n² σ², E[C_D] = n d² σ²
        assert!((cp - 96.0).abs() <= 3.0 * se_p, "{cp} vs 96 (se {se_p})");
        assert!((cd - 144.0).abs() <= 3.0 * se_d, "{cd} vs 144 (se {se_d})");
    }

    #[test]
    fn dense_expectation_deterministic_case() {
        // mu=1, sigma=0, d=2, n=3: C_P = 18, C_D = 12 exactly
        let ((cp, se_p), (cd, se_d)) = random_dense_expectation(2, 3, 1.0, 0.0, 5, 1);
        assert_eq!((cp, cd), (18.0, 12.0));
        assert_eq!((se_p, se_d), (0.0, 0.0));
        // matches cost_cp/cost_cd on the all-ones matrix
        let x = ones(2, 3);
        assert_eq!(cost_cp(&x), 18.0);
        assert_eq!(cost_cd(&x), 12.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn transpose_duality_of_costs(seed in 0u64..10_000, d in 1usize..8, n in 1usize..8) {
            let x = crate::generators::gen_random(d, n, 0.5, 1.0, 0.5, seed).unwrap().matrix;
            prop_assert_eq!(cost_cp(&x), cost_cd(&x.transpose()));
            prop_assert_eq!(cost_cd(&x), cost_cp(&x.transpose()));
        }

        #[test]
        fn r_le_one_in_dense_regime(n in 1usize..10, d_off in 0usize..10, alpha_frac in 0.0f64..1.0) {
            let d = n + d_off + 3;
            let lo = ((n * n + 3 * n) as u64).max(d as u64);
            let hi = (d * n) as u64;
            prop_assume!(lo <= hi);
            let alpha = lo + ((hi - lo) as f64 * alpha_frac) as u64;
            prop_assert!(r_value(alpha, d, n) <= 1.0 + 1e-12);
        }
    }
}
