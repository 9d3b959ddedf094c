//! Design preprocessing: entrywise truncation, a median-of-means operator-norm
//! scale estimate, and the automatic truncation-level formula.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Outcome of entrywise truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationReport<S> {
    pub tau: S,
    /// Rows with at least one clipped entry.
    pub affected_rows: Vec<usize>,
    pub affected_fraction: S,
}

/// Entrywise clipping to zero: entry (i,j) keeps its value when |x| ≤ τ and
/// becomes 0 otherwise.
pub fn truncate_entries<S: Scalar>(
    design: &ArrayView2<S>,
    tau: S,
) -> Result<(Array2<S>, TruncationReport<S>)> {
    if !(tau > S::zero()) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    let n = design.nrows();
    let mut out = design.to_owned();
    let mut affected_rows = Vec::new();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let mut touched = false;
        for x in row.iter_mut() {
            if x.abs() > tau {
                *x = S::zero();
                touched = true;
            }
        }
        if touched {
            affected_rows.push(i);
        }
    }
    let affected_fraction = S::from_usize(affected_rows.len()) / S::from_usize(n.max(1));
    Ok((
        out,
        TruncationReport {
            tau,
            affected_rows,
            affected_fraction,
        },
    ))
}

fn fnv1a(words: &[u64]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &w in words {
        for byte in w.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    hash
}

/// Median-of-means estimate of the covariance operator-norm scale.
///
/// Per coordinate j, squared entries are split into `num_blocks` groups and
/// the median of the group means is taken; the estimate is
/// 2·κ̂·max_j median_j. Group membership is derived from the entry's rank
/// within its column (hashed), so the estimate is invariant under row
/// permutation and positive rescaling commutes exactly.
pub fn mom_covnorm_estimate<S: Scalar>(
    design: &ArrayView2<S>,
    num_blocks: usize,
    kappa_hat: S,
) -> Result<S> {
    let n = design.nrows();
    let d = design.ncols();
    if num_blocks == 0 || num_blocks % 2 == 0 {
        return Err(Error::invalid(format!(
            "num_blocks must be odd and positive, got {num_blocks}"
        )));
    }
    if n < 3 * num_blocks {
        return Err(Error::invalid(format!(
            "need n ≥ 3·num_blocks, got n = {n}, num_blocks = {num_blocks}"
        )));
    }
    if !(kappa_hat > S::zero()) {
        return Err(Error::invalid("kappa_hat must be positive"));
    }
    let col_medians: Vec<S> = (0..d)
        .into_par_iter()
        .map(|j| {
            let mut vals: Vec<S> = design.column(j).iter().cloned().collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut sums = vec![S::zero(); num_blocks];
            let mut counts = vec![0usize; num_blocks];
            for (rank, v) in vals.iter().enumerate() {
                let b = (fnv1a(&[rank as u64, j as u64, 0x9e3779b9]) % num_blocks as u64) as usize;
                sums[b] += *v * *v;
                counts[b] += 1;
            }
            let mut means: Vec<S> = sums
                .iter()
                .zip(counts.iter())
                .map(|(s, c)| {
                    if *c == 0 {
                        S::zero()
                    } else {
                        *s / S::from_usize(*c)
                    }
                })
                .collect();
            means.sort_by(|a, b| a.partial_cmp(b).unwrap());
            means[num_blocks / 2]
        })
        .collect();
    let max_median = col_medians
        .into_iter()
        .fold(S::zero(), |acc, m| acc.max(m));
    Ok(S::from_f64(2.0) * kappa_hat * max_median)
}

/// Default block count: ⌈min(√n, 1/ε)⌉ rounded up to odd, floored so that
/// n ≥ 3·blocks still holds.
pub fn default_num_blocks<S: Scalar>(n: usize, epsilon: S) -> usize {
    let sqrt_n = (n as f64).sqrt();
    let inv_eps = if epsilon > S::zero() {
        (S::one() / epsilon).as_f64()
    } else {
        sqrt_n
    };
    let mut b = sqrt_n.min(inv_eps).ceil() as usize;
    b = b.max(1).min(n / 3).max(1);
    if b % 2 == 0 {
        b = b.saturating_sub(1).max(1);
    }
    b
}

/// Automatic truncation level:
/// τ = √σ̂_max · c_τ · (n / (κ̂ᵗ kᵗ t log(d/δ)))^{1/(2t)}.
#[allow(clippy::too_many_arguments)]
pub fn auto_tau<S: Scalar>(
    n: usize,
    d: usize,
    k: usize,
    t: usize,
    sigma_max_hat: S,
    kappa_hat: S,
    delta: S,
    c_tau: S,
) -> Result<S> {
    if n == 0 || d == 0 || k == 0 || t == 0 {
        return Err(Error::invalid("n, d, k, t must be positive"));
    }
    if !(sigma_max_hat > S::zero() && kappa_hat > S::zero() && c_tau > S::zero()) {
        return Err(Error::invalid(
            "sigma_max_hat, kappa_hat, c_tau must be positive",
        ));
    }
    if !(delta > S::zero() && delta < S::one()) {
        return Err(Error::invalid("delta must be in (0,1)"));
    }
    let log_term = (S::from_usize(d) / delta).ln();
    if !(log_term > S::zero()) {
        return Err(Error::invalid("log(d/delta) must be positive"));
    }
    let ti = t as i32;
    let denom = kappa_hat.powi(ti) * S::from_usize(k).powi(ti) * S::from_usize(t) * log_term;
    let ratio = S::from_usize(n) / denom;
    let exponent = S::one() / S::from_usize(2 * t);
    Ok(sigma_max_hat.sqrt() * c_tau * ratio.powf(exponent))
}

/// Inverts the sample-size relation n ≈ C·10^{10t}(κ^{4+s/(s-2)} + κ^{2t})
/// · k^{2t} log(d/δ) / ε^{2t-1} for κ̂ by bisection. Helper only; the
/// estimator takes κ̂ as direct input.
#[allow(clippy::too_many_arguments)]
pub fn invert_kappa_from_sample_size<S: Scalar>(
    n: usize,
    d: usize,
    k: usize,
    t: usize,
    s_moment: S,
    epsilon: S,
    delta: S,
    big_c: S,
) -> Result<S> {
    if s_moment <= S::from_f64(2.0) {
        return Err(Error::invalid("s must exceed 2"));
    }
    let exp1 = S::from_f64(4.0) + s_moment / (s_moment - S::from_f64(2.0));
    let exp2 = S::from_usize(2 * t);
    let log_term = (S::from_usize(d) / delta).ln();
    let scale = big_c
        * S::from_f64(10.0).powi(10 * t as i32)
        * S::from_usize(k).powi(2 * t as i32)
        * log_term
        / epsilon.powi(2 * t as i32 - 1);
    let f = |kappa: S| scale * (kappa.powf(exp1) + kappa.powf(exp2));
    let target = S::from_usize(n);
    if f(S::one()) >= target {
        return Ok(S::one());
    }
    let mut lo = S::one();
    let mut hi = S::from_f64(2.0);
    while f(hi) < target && hi < S::from_f64(1e12) {
        hi = hi * S::from_f64(2.0);
    }
    for _ in 0..200 {
        let mid = (lo + hi) / S::from_f64(2.0);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / S::from_f64(2.0))
}
