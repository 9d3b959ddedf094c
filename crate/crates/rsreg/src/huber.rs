//! Weighted ℓ1-penalized Huber loss: values, gradients, the default penalty
//! rule, and an accelerated proximal-gradient minimizer with a verifiable
//! subgradient-optimality residual.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::weights::WeightVector;

/// One weighted penalized Huber problem:
/// L_w(β) = Σᵢ wᵢ h(⟨Xᵢ, β⟩ − yᵢ) + λ‖β‖₁.
#[derive(Debug, Clone)]
pub struct HuberProblem<S> {
    pub design: Array2<S>,
    pub response: Array1<S>,
    pub weights: WeightVector<S>,
    pub lambda: S,
    /// Transition point between the quadratic and linear regimes (2 in the
    /// normalized model).
    pub threshold: S,
}

impl<S: Scalar> HuberProblem<S> {
    pub fn validate(&self) -> Result<()> {
        let n = self.design.nrows();
        if self.response.len() != n {
            return Err(Error::dim(format!(
                "response length {} vs {} rows",
                self.response.len(),
                n
            )));
        }
        if self.weights.len() != n {
            return Err(Error::dim(format!(
                "weights length {} vs {} rows",
                self.weights.len(),
                n
            )));
        }
        if self.lambda < S::zero() {
            return Err(Error::invalid("lambda must be non-negative"));
        }
        if !(self.threshold > S::zero()) {
            return Err(Error::invalid("threshold must be positive"));
        }
        Ok(())
    }
}

/// h(x) = x²/2 for |x| ≤ threshold, threshold·|x| − threshold²/2 otherwise.
#[inline]
pub fn huber_value<S: Scalar>(x: S, threshold: S) -> S {
    let ax = x.abs();
    if ax <= threshold {
        x * x / S::from_f64(2.0)
    } else {
        threshold * ax - threshold * threshold / S::from_f64(2.0)
    }
}

/// φ(x) = h′(x): x clipped to [−threshold, threshold].
#[inline]
pub fn huber_deriv<S: Scalar>(x: S, threshold: S) -> S {
    x.max(-threshold).min(threshold)
}

/// Smooth part H_w(β) and its gradient Σᵢ wᵢ φ(rᵢ) Xᵢ. The ℓ1 penalty is
/// excluded.
pub fn loss_and_grad<S: Scalar>(problem: &HuberProblem<S>, beta: &ArrayView1<S>) -> (S, Array1<S>) {
    let n = problem.design.nrows();
    let d = problem.design.ncols();
    debug_assert_eq!(beta.len(), d);
    let w = problem.weights.as_slice();
    let mut loss = S::zero();
    let mut grad = Array1::zeros(d);
    for i in 0..n {
        let wi = w[i];
        if wi == S::zero() {
            continue;
        }
        let row = problem.design.row(i);
        let mut r = -problem.response[i];
        for j in 0..d {
            r += row[j] * beta[j];
        }
        loss += wi * huber_value(r, problem.threshold);
        let f = wi * huber_deriv(r, problem.threshold);
        if f != S::zero() {
            for j in 0..d {
                grad[j] += f * row[j];
            }
        }
    }
    (loss, grad)
}

/// Full objective L_w(β) including the penalty.
pub fn objective<S: Scalar>(problem: &HuberProblem<S>, beta: &ArrayView1<S>) -> S {
    let (loss, _) = loss_and_grad(problem, beta);
    loss + problem.lambda * beta.iter().map(|b| b.abs()).sum()
}

/// Default penalty rule λ = c_λ · M_{2t} · √σ̂_max · ε^{1 − 1/(2t)} / √k.
pub fn lambda_default<S: Scalar>(
    m2t: S,
    sigma_max_hat: S,
    epsilon: S,
    k: usize,
    t: usize,
    c_lambda: S,
) -> S {
    let exponent = S::one() - S::one() / S::from_usize(2 * t);
    c_lambda * m2t * sigma_max_hat.sqrt() * epsilon.powf(exponent) / S::from_usize(k).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport<S> {
    pub iterations: usize,
    pub final_objective: S,
    /// ∞-norm distance from −∇H_w(β̂) to λ·∂‖β̂‖₁.
    pub kkt_residual: S,
    pub step_size_used: S,
    pub converged: bool,
}

/// Subgradient optimality residual at `beta`:
/// max over j of  max(0, |g_j| − λ) on zero coordinates and
/// |g_j + λ sign(β_j)| on nonzeros.
pub fn kkt_residual<S: Scalar>(problem: &HuberProblem<S>, beta: &ArrayView1<S>) -> S {
    let (_, grad) = loss_and_grad(problem, beta);
    let lambda = problem.lambda;
    let mut worst = S::zero();
    for j in 0..beta.len() {
        let g = grad[j];
        let r = if beta[j] == S::zero() {
            (g.abs() - lambda).max(S::zero())
        } else {
            (g + lambda * beta[j].signum()).abs()
        };
        worst = worst.max(r);
    }
    worst
}

fn soft_threshold<S: Scalar>(x: S, t: S) -> S {
    (x.abs() - t).max(S::zero()) * x.signum()
}

/// Upper bound on the smooth-part Lipschitz constant:
/// λ_max(Σ wᵢ XᵢXᵢᵀ) via power iteration on u ↦ Xᵀ(w ⊙ (X u)). Valid because
/// h″ ≤ 1.
fn lipschitz_bound<S: Scalar>(design: &Array2<S>, w: &[S]) -> S {
    let n = design.nrows();
    let d = design.ncols();
    let mut u: Vec<S> = (0..d)
        .map(|j| S::from_f64(1.0 + ((j * 37 + 11) % 97) as f64 / 97.0))
        .collect();
    let norm0 = u.iter().map(|x| *x * *x).sum::<S>().sqrt();
    for x in u.iter_mut() {
        *x /= norm0;
    }
    let mut lam = S::zero();
    for _ in 0..60 {
        let mut xu = vec![S::zero(); n];
        for i in 0..n {
            if w[i] == S::zero() {
                continue;
            }
            let row = design.row(i);
            let mut acc = S::zero();
            for j in 0..d {
                acc += row[j] * u[j];
            }
            xu[i] = acc * w[i];
        }
        let mut v = vec![S::zero(); d];
        for i in 0..n {
            if xu[i] == S::zero() {
                continue;
            }
            let row = design.row(i);
            for j in 0..d {
                v[j] += xu[i] * row[j];
            }
        }
        let norm = v.iter().map(|x| *x * *x).sum::<S>().sqrt();
        if norm == S::zero() {
            return S::from_f64(1e-12);
        }
        let new_lam = norm;
        let rel = ((new_lam - lam) / new_lam).abs();
        lam = new_lam;
        for (ui, vi) in u.iter_mut().zip(v.iter()) {
            *ui = *vi / norm;
        }
        if rel < S::from_f64(1e-10) {
            break;
        }
    }
    lam
}

/// Accelerated proximal gradient (soft-threshold prox) with backtracking and
/// objective-based restarts. Accepted iterates never increase the objective.
pub fn minimize<S: Scalar>(
    problem: &HuberProblem<S>,
    tol_kkt: S,
    max_iters: usize,
) -> Result<(Array1<S>, SolveReport<S>)> {
    problem.validate()?;
    let d = problem.design.ncols();
    let lam = problem.lambda;

    let lip = lipschitz_bound(&problem.design, problem.weights.as_slice())
        .max(S::from_f64(1e-12));
    let mut step = S::one() / (lip * S::from_f64(1.02));

    let mut beta: Array1<S> = Array1::zeros(d);
    let mut momentum = beta.clone();
    let mut theta = S::one();
    let mut iterations = 0usize;
    let mut converged = false;

    for it in 0..max_iters {
        iterations = it + 1;
        let (loss_y, grad_y) = loss_and_grad(problem, &momentum.view());
        // Backtracking on the majorization at the extrapolated point.
        let mut candidate;
        loop {
            candidate = Array1::from_shape_fn(d, |j| {
                soft_threshold(momentum[j] - step * grad_y[j], step * lam)
            });
            let diff = &candidate - &momentum;
            let (loss_c, _) = loss_and_grad(problem, &candidate.view());
            let quad = loss_y
                + grad_y
                    .iter()
                    .zip(diff.iter())
                    .map(|(g, d)| *g * *d)
                    .sum::<S>()
                + diff.iter().map(|x| *x * *x).sum::<S>() / (S::from_f64(2.0) * step);
            if loss_c <= quad + S::from_f64(1e-15) * (S::one() + loss_c.abs()) {
                break;
            }
            step = step / S::from_f64(2.0);
            if step < S::from_f64(1e-300) {
                break;
            }
        }
        let obj_c = objective(problem, &candidate.view());
        let obj_b = objective(problem, &beta.view());
        if obj_c <= obj_b {
            // Accept with momentum update.
            let theta_next =
                (S::one() + (S::one() + S::from_f64(4.0) * theta * theta).sqrt())
                    / S::from_f64(2.0);
            let coef = (theta - S::one()) / theta_next;
            momentum = Array1::from_shape_fn(d, |j| {
                candidate[j] + coef * (candidate[j] - beta[j])
            });
            beta = candidate;
            theta = theta_next;
            best_obj = obj_c;
        } else {
            // Restart momentum at the current best point.
            momentum = beta.clone();
            theta = S::one();
        }
        if it % 10 == 0 || it + 1 == max_iters {
            let res = kkt_residual(problem, &beta.view());
            if res <= tol_kkt {
                converged = true;
                break;
            }
        }
    }
    let _ = best_obj;
    let final_res = kkt_residual(problem, &beta.view());
    if final_res <= tol_kkt {
        converged = true;
    }
    let report = SolveReport {
        iterations,
        final_objective: objective(problem, &beta.view()),
        kkt_residual: final_res,
        step_size_used: step,
        converged,
    };
    Ok((beta, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(
        design: Array2<f64>,
        response: Array1<f64>,
        lambda: f64,
    ) -> HuberProblem<f64> {
        let n = design.nrows();
        HuberProblem {
            design,
            response,
            weights: WeightVector::uniform(n),
            lambda,
            threshold: 2.0,
        }
    }

    #[test]
    fn huber_values_at_reference_points() {
        assert_eq!(huber_value(1.0, 2.0), 0.5);
        assert_eq!(huber_value(2.0, 2.0), 2.0);
        assert_eq!(huber_value(4.0, 2.0), 6.0);
        assert_eq!(huber_value(0.0, 2.0), 0.0);
        assert_eq!(huber_value(-4.0, 2.0), 6.0);
    }

    #[test]
    fn huber_derivative_clips() {
        assert_eq!(huber_deriv(1.0, 2.0), 1.0);
        assert_eq!(huber_deriv(-5.0, 2.0), -2.0);
        assert_eq!(huber_deriv(0.0, 2.0), 0.0);
        assert_eq!(huber_deriv(100.0, 2.0), 2.0);
    }

    #[test]
    fn zero_problem_has_zero_loss_and_grad() {
        let p = problem(array![[1.0, 2.0], [3.0, 4.0]], array![0.0, 0.0], 0.1);
        let beta = array![0.0, 0.0];
        let (loss, grad) = loss_and_grad(&p, &beta.view());
        assert_eq!(loss, 0.0);
        assert_eq!(grad, array![0.0, 0.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _case in 0..20 {
            let n = rng.gen_range(3..10);
            let d = rng.gen_range(1..5);
            let design = Array2::from_shape_fn((n, d), |_| rng.gen_range(-2.0..2.0));
            let response = Array1::from_shape_fn(n, |_| rng.gen_range(-3.0..3.0));
            let p = problem(design, response, 0.0);
            let beta = Array1::from_shape_fn(d, |_| rng.gen_range(-1.5..1.5));
            let (_, grad) = loss_and_grad(&p, &beta.view());
            let h = 1e-6;
            for j in 0..d {
                let mut bp = beta.clone();
                bp[j] += h;
                let mut bm = beta.clone();
                bm[j] -= h;
                let (lp, _) = loss_and_grad(&p, &bp.view());
                let (lm, _) = loss_and_grad(&p, &bm.view());
                let fd = (lp - lm) / (2.0 * h);
                let denom = grad[j].abs().max(1.0);
                assert!(
                    ((grad[j] - fd) / denom).abs() < 1e-5,
                    "grad {} vs fd {}",
                    grad[j],
                    fd
                );
            }
        }
    }

    #[test]
    fn duplicated_rows_match_doubled_weight() {
        let design1 = array![[1.0, -1.0], [1.0, -1.0], [0.5, 2.0]];
        let y1 = array![1.0, 1.0, -0.5];
        let p1 = problem(design1, y1, 0.0);
        let design2 = array![[1.0, -1.0], [0.5, 2.0]];
        let y2 = array![1.0, -0.5];
        let w2 = WeightVector::from_values(vec![2.0 / 3.0 / 2.0, 1.0 / 3.0]).unwrap();
        let p2 = HuberProblem {
            design: design2,
            response: y2,
            weights: w2,
            lambda: 0.0,
            threshold: 2.0,
        };
        let beta = array![0.3, 0.7];
        let (l1, g1) = loss_and_grad(&p1, &beta.view());
        let (l2, g2) = loss_and_grad(&p2, &beta.view());
        // p2's first weight is 2·(1/3)·(1/2)... use matching mass: w = (2/3·1/... )
        // Just compare against explicit recomputation instead.
        let _ = (l2, g2);
        let mut expect = 0.0;
        for (row, y) in [([1.0, -1.0], 1.0), ([1.0, -1.0], 1.0), ([0.5, 2.0], -0.5)] {
            let r = row[0] * beta[0] + row[1] * beta[1] - y;
            expect += huber_value(r, 2.0) / 3.0;
        }
        assert_abs_diff_eq!(l1, expect, epsilon = 1e-14);
        let w3 = WeightVector::from_values(vec![2.0 / 3.0 / 2.0, 1.0 / 3.0]).unwrap();
        // weight cap is 1/n = 1/2 for n = 2, and 2/3/2 = 1/3 ≤ 1/2.
        let p3 = HuberProblem {
            design: array![[1.0, -1.0], [0.5, 2.0]],
            response: array![1.0, -0.5],
            weights: w3,
            lambda: 0.0,
            threshold: 2.0,
        };
        let (l3, g3) = loss_and_grad(&p3, &beta.view());
        // Doubled-weight single row equals two duplicate rows at half mass each:
        // l1 uses mass (1/3, 1/3, 1/3); p3 uses (1/3 on the duplicate, 1/3 on the other)...
        assert_abs_diff_eq!(l3 + 0.0, l1, epsilon = 1e-14);
        for j in 0..2 {
            assert_abs_diff_eq!(g3[j], g1[j], epsilon = 1e-14);
        }
    }

    #[test]
    fn lambda_default_reference_value() {
        // c_λ = 1000, M = 1, σ̂ = 1, ε = 0.01, k = 4, t = 1 → 1000·0.1/2 = 50.
        let lam = lambda_default(1.0, 1.0, 0.01, 4, 1, 1000.0);
        assert_abs_diff_eq!(lam, 50.0, epsilon = 1e-12);
        // Quadrupling k halves λ.
        let lam2 = lambda_default(1.0, 1.0, 0.01, 16, 1, 1000.0);
        assert_abs_diff_eq!(lam2, 25.0, epsilon = 1e-12);
        // Exponent → 1 as t → ∞.
        let lam_big_t = lambda_default(1.0, 1.0, 0.01, 1, 500, 1.0);
        assert!((lam_big_t - 0.01).abs() < 1e-4);
    }

    #[test]
    fn exact_interpolation_1d() {
        let p = problem(array![[1.0]], array![1.0], 0.0);
        let (beta, report) = minimize(&p, 1e-10, 10_000).unwrap();
        assert!(report.converged);
        assert_abs_diff_eq!(beta[0], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn large_lambda_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 12;
        let d = 4;
        let design = Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0));
        let response = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
        let p0 = problem(design.clone(), response.clone(), 0.0);
        let zero = Array1::zeros(d);
        let (_, g0) = loss_and_grad(&p0, &zero.view());
        let lam = g0.iter().fold(0.0f64, |a, g| a.max(g.abs())) * 1.001;
        let p = problem(design, response, lam);
        let (beta, report) = minimize(&p, 1e-10, 20_000).unwrap();
        assert!(report.converged);
        assert!(beta.iter().all(|b| *b == 0.0), "beta = {beta:?}");
    }

    #[test]
    fn kkt_residual_is_recomputable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let design = Array2::from_shape_fn((15, 3), |_| rng.gen_range(-1.0..1.0));
        let response = Array1::from_shape_fn(15, |_| rng.gen_range(-1.0..1.0));
        let p = problem(design, response, 0.05);
        let (beta, report) = minimize(&p, 1e-9, 50_000).unwrap();
        let res = kkt_residual(&p, &beta.view());
        assert!((res - report.kkt_residual).abs() < 1e-12);
        assert!(res <= 1e-9, "res = {res}");
    }

    #[test]
    fn objective_nonincreasing_over_iterations() {
        // Track objective externally by re-running with increasing budgets.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let design = Array2::from_shape_fn((30, 6), |_| rng.gen_range(-1.0..1.0));
        let response = Array1::from_shape_fn(30, |_| rng.gen_range(-2.0..2.0));
        let p = problem(design, response, 0.1);
        let mut prev = f64::INFINITY;
        for iters in [1, 3, 10, 30, 100, 300] {
            let (_, report) = minimize(&p, 0.0, iters).unwrap();
            assert!(
                report.final_objective <= prev + 1e-12,
                "objective increased at {iters}"
            );
            prev = report.final_objective;
        }
    }

    #[test]
    fn scale_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let design = Array2::from_shape_fn((25, 4), |_| rng.gen_range(-1.0..1.0));
        let response = Array1::from_shape_fn(25, |_| rng.gen_range(-2.0..2.0));
        let c = 3.5;
        let p1 = problem(design.clone(), response.clone(), 0.07);
        let p2 = HuberProblem {
            design,
            response: response.mapv(|y| c * y),
            weights: WeightVector::uniform(25),
            lambda: 0.07 * c,
            threshold: 2.0 * c,
        };
        let (b1, _) = minimize(&p1, 1e-12, 100_000).unwrap();
        let (b2, _) = minimize(&p2, 1e-12, 100_000).unwrap();
        for j in 0..4 {
            let denom = b1[j].abs().max(1e-9);
            assert!(
                ((b2[j] - c * b1[j]) / denom).abs() < 1e-6,
                "j={j}: {} vs {}",
                b2[j],
                c * b1[j]
            );
        }
    }
}
