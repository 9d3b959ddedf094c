//! Dense symmetric linear algebra kernels: eigendecomposition (Householder
//! tridiagonalization + implicit QL), Cholesky, Lanczos-based positive-part
//! extraction, and the projections used by the relaxation solvers.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues ascending; `vectors` holds eigenvectors in columns, so
/// `a ≈ V diag(λ) Vᵀ`.
#[derive(Debug, Clone)]
pub struct SymEigen<S> {
    pub values: Array1<S>,
    pub vectors: Array2<S>,
}

/// Full eigendecomposition via tred2/tql2.
pub fn sym_eigen<S: Scalar>(a: &ArrayView2<S>) -> SymEigen<S> {
    let d = a.nrows();
    assert_eq!(d, a.ncols(), "matrix must be square");
    let mut z: Vec<S> = a.iter().cloned().collect();
    let mut diag = vec![S::zero(); d];
    let mut sub = vec![S::zero(); d];
    tred2(&mut z, &mut diag, &mut sub, d);
    tql2(&mut z, &mut diag, &mut sub, d);
    // Sort ascending (tql2 output is ascending already, but make it explicit
    // and stable for ties).
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values = Array1::from_iter(idx.iter().map(|&i| diag[i]));
    let mut vectors = Array2::zeros((d, d));
    for (new_col, &old_col) in idx.iter().enumerate() {
        for r in 0..d {
            vectors[[r, new_col]] = z[r * d + old_col];
        }
    }
    SymEigen { values, vectors }
}

/// Householder reduction to tridiagonal form (EISPACK tred2).
/// `z` is row-major d×d, overwritten with the accumulated transformation.
fn tred2<S: Scalar>(z: &mut [S], d: &mut [S], e: &mut [S], n: usize) {
    for j in 0..n {
        d[j] = z[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = S::zero();
        let mut scale = S::zero();
        if l > 0 {
            for k in 0..=l {
                scale += d[k].abs();
            }
        }
        if scale == S::zero() {
            e[i] = if l > 0 { d[l] } else { S::zero() };
            for j in 0..=l {
                d[j] = z[l * n + j];
                z[i * n + j] = S::zero();
                z[j * n + i] = S::zero();
            }
        } else {
            for k in 0..=l {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[l];
            let mut g = if f > S::zero() { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            d[l] = f - g;
            for j in 0..=l {
                e[j] = S::zero();
            }
            for j in 0..=l {
                f = d[j];
                z[j * n + i] = f;
                g = e[j] + z[j * n + j] * f;
                for k in (j + 1)..=l {
                    g += z[k * n + j] * d[k];
                    e[k] += z[k * n + j] * f;
                }
                e[j] = g;
            }
            f = S::zero();
            for j in 0..=l {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..=l {
                e[j] -= hh * d[j];
            }
            for j in 0..=l {
                f = d[j];
                g = e[j];
                for k in j..=l {
                    z[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = z[l * n + j];
                z[i * n + j] = S::zero();
            }
        }
        d[i] = h;
    }
    for i in 1..n {
        z[(n - 1) * n + (i - 1)] = z[(i - 1) * n + (i - 1)];
        z[(i - 1) * n + (i - 1)] = S::one();
        let l = i - 1;
        if d[i] != S::zero() {
            for k in 0..=l {
                d[k] = z[k * n + i] / d[i];
            }
            for j in 0..=l {
                let mut g = S::zero();
                for k in 0..=l {
                    g += z[k * n + i] * z[k * n + j];
                }
                for k in 0..=l {
                    z[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=l {
            z[k * n + i] = S::zero();
        }
    }
    for j in 0..n {
        d[j] = z[(n - 1) * n + j];
        z[(n - 1) * n + j] = S::zero();
    }
    z[(n - 1) * n + (n - 1)] = S::one();
    e[0] = S::zero();
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix,
/// accumulating eigenvectors into `z` (EISPACK tql2).
fn tql2<S: Scalar>(z: &mut [S], d: &mut [S], e: &mut [S], n: usize) {
    if n == 0 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = S::zero();
    let mut f = S::zero();
    let mut tst1 = S::zero();
    let eps = S::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                // Wilkinson shift.
                let mut g = d[l];
                let two = S::from_f64(2.0);
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(S::one());
                let r_signed = if p < S::zero() { -r } else { r };
                d[l] = e[l] / (p + r_signed);
                d[l + 1] = e[l] * (p + r_signed);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;
                // Implicit QL step.
                p = d[m];
                let mut c = S::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = S::zero();
                let mut s2 = S::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = z[k * n + (i + 1)];
                        z[k * n + (i + 1)] = s * z[k * n + i] + c * h;
                        z[k * n + i] = c * z[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
                if iter > 60 {
                    break; // accept current accuracy
                }
            }
        }
        d[l] += f;
        e[l] = S::zero();
    }
    // Selection-sort eigenvalues ascending, permuting vectors alongside.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                z.swap(r * n + i, r * n + k);
            }
        }
    }
}

/// Cholesky factor L (lower triangular) with `a = L Lᵀ`.
pub fn cholesky<S: Scalar>(a: &ArrayView2<S>) -> Result<Array2<S>> {
    let d = a.nrows();
    if d != a.ncols() {
        return Err(Error::dim("cholesky needs a square matrix".into()));
    }
    let mut l: Array2<S> = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= S::zero() {
                    return Err(Error::invalid(format!(
                        "matrix is not positive definite (pivot {i} = {sum})"
                    )));
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// xᵀ A x for symmetric A.
pub fn quad_form<S: Scalar>(a: &ArrayView2<S>, x: &ArrayView1<S>) -> S {
    let d = x.len();
    let mut acc = S::zero();
    for i in 0..d {
        let xi = x[i];
        if xi == S::zero() {
            continue;
        }
        let row = a.row(i);
        let mut inner = S::zero();
        for j in 0..d {
            inner += row[j] * x[j];
        }
        acc += xi * inner;
    }
    acc
}

/// Weighted Gram matrix Σᵢ wᵢ xᵢ xᵢᵀ (d×d) for row-major samples X (n×d).
///
/// Accumulates per fixed row-chunk and folds chunks in index order, so the
/// result does not depend on the number of worker threads.
pub fn weighted_gram<S: Scalar>(x: &ArrayView2<S>, w: &[S]) -> Array2<S> {
    let n = x.nrows();
    let d = x.ncols();
    assert_eq!(n, w.len());
    let chunks = 8usize;
    let chunk_len = n.div_ceil(chunks.max(1)).max(1);
    let partials: Vec<Vec<S>> = (0..n.div_ceil(chunk_len))
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk_len;
            let hi = ((c + 1) * chunk_len).min(n);
            let mut g = vec![S::zero(); d * d];
            let mut scaled = vec![S::zero(); d];
            for i in lo..hi {
                let wi = w[i];
                if wi == S::zero() {
                    continue;
                }
                let row = x.row(i);
                for j in 0..d {
                    scaled[j] = row[j];
                }
                for j in 0..d {
                    let f = wi * scaled[j];
                    if f == S::zero() {
                        continue;
                    }
                    let out = &mut g[j * d + j..j * d + d];
                    let src = &scaled[j..d];
                    for (o, s) in out.iter_mut().zip(src.iter()) {
                        *o += f * *s;
                    }
                }
            }
            g
        })
        .collect();
    let mut g = vec![S::zero(); d * d];
    for part in &partials {
        for (a, b) in g.iter_mut().zip(part.iter()) {
            *a += *b;
        }
    }
    // Mirror upper triangle to lower.
    for j in 0..d {
        for l in (j + 1)..d {
            g[l * d + j] = g[j * d + l];
        }
    }
    Array2::from_shape_vec((d, d), g).unwrap()
}

/// Project a vector of eigenvalues onto {λ ≥ 0, Σλ ≤ cap}.
pub fn project_nonneg_trace_cap<S: Scalar>(values: &mut [S], cap: S) {
    let mut pos_sum = S::zero();
    for v in values.iter_mut() {
        if *v < S::zero() {
            *v = S::zero();
        } else {
            pos_sum += *v;
        }
    }
    if pos_sum <= cap {
        return;
    }
    // Water-filling: λᵢ ← max(λᵢ − θ, 0) with Σ max(λᵢ − θ, 0) = cap.
    let mut sorted: Vec<S> = values.iter().cloned().filter(|v| *v > S::zero()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = S::zero();
    let mut theta = S::zero();
    for (i, &v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - cap) / S::from_usize(i + 1);
        if i + 1 == sorted.len() || sorted[i + 1] <= t {
            theta = t;
            break;
        }
    }
    for v in values.iter_mut() {
        *v = (*v - theta).max(S::zero());
    }
}

/// Project `v` onto the ℓ1 ball of the given radius (in place). Returns the
/// shrinkage threshold θ (0 when already inside the ball).
pub fn project_l1_ball<S: Scalar>(v: &mut [S], radius: S) -> S {
    assert!(radius >= S::zero());
    let norm1: S = v.iter().map(|x| x.abs()).sum();
    if norm1 <= radius {
        return S::zero();
    }
    let mut abs: Vec<S> = v.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = S::zero();
    let mut theta = S::zero();
    for (i, &a) in abs.iter().enumerate() {
        cum += a;
        let t = (cum - radius) / S::from_usize(i + 1);
        if i + 1 == abs.len() || abs[i + 1] <= t {
            theta = t;
            break;
        }
    }
    for x in v.iter_mut() {
        let mag = (x.abs() - theta).max(S::zero());
        *x = mag * x.signum();
    }
    theta
}

/// Positive spectral part with eigenvectors: returns (λᵢ > floor, qᵢ).
/// Uses full eigendecomposition; see [`positive_part_lanczos`] for the
/// iterative large-d path.
pub fn positive_eigenpairs<S: Scalar>(a: &ArrayView2<S>, floor: S) -> (Vec<S>, Array2<S>) {
    let eig = sym_eigen(a);
    let d = a.nrows();
    let idx: Vec<usize> = (0..d).filter(|&i| eig.values[i] > floor).collect();
    let mut vectors = Array2::zeros((d, idx.len()));
    let mut values = Vec::with_capacity(idx.len());
    for (c, &i) in idx.iter().enumerate() {
        values.push(eig.values[i]);
        for r in 0..d {
            vectors[[r, c]] = eig.vectors[[r, i]];
        }
    }
    (values, vectors)
}

/// Lanczos with full reorthogonalization. Returns Ritz pairs with positive
/// Ritz values, or `None` if the run cannot certify that all positive
/// spectrum was captured (caller should fall back to the dense path).
pub fn positive_part_lanczos<S: Scalar>(
    a: &ArrayView2<S>,
    max_steps: usize,
    seed_vec: Option<&[S]>,
) -> Option<(Vec<S>, Array2<S>)> {
    let d = a.nrows();
    let m = max_steps.min(d);
    if m == 0 {
        return Some((vec![], Array2::zeros((d, 0))));
    }
    let scale = a.iter().fold(S::zero(), |acc, x| acc.max(x.abs()));
    if scale == S::zero() {
        return Some((vec![], Array2::zeros((d, 0))));
    }
    let tol = S::from_f64(1e-9) * scale * S::from_usize(d);

    let mut basis: Vec<Vec<S>> = Vec::with_capacity(m);
    let mut alphas: Vec<S> = Vec::with_capacity(m);
    let mut betas: Vec<S> = Vec::with_capacity(m);

    // Deterministic start vector.
    let mut q = vec![S::zero(); d];
    match seed_vec {
        Some(v) if v.len() == d => q.copy_from_slice(v),
        _ => {
            for (i, qi) in q.iter_mut().enumerate() {
                // Fixed quasi-random pattern; any dense start works.
                *qi = S::from_f64(((i * 2654435761 + 1) % 1000) as f64 / 1000.0 - 0.5)
                    + S::from_f64(1e-3);
            }
        }
    }
    normalize(&mut q)?;

    let mut prev: Vec<S> = vec![S::zero(); d];
    let mut beta_prev = S::zero();
    for step in 0..m {
        let mut v = mat_vec(a, &q);
        if step > 0 {
            for i in 0..d {
                v[i] -= beta_prev * prev[i];
            }
        }
        let alpha = dot(&q, &v);
        for i in 0..d {
            v[i] -= alpha * q[i];
        }
        // Full reorthogonalization (twice for stability).
        for _pass in 0..2 {
            for b in basis.iter() {
                let c = dot(b, &v);
                for i in 0..d {
                    v[i] -= c * b[i];
                }
            }
            let c = dot(&q, &v);
            for i in 0..d {
                v[i] -= c * q[i];
            }
        }
        alphas.push(alpha);
        basis.push(q.clone());
        let beta = dot(&v, &v).sqrt();
        if beta <= S::from_f64(1e-13) * scale {
            betas.push(S::zero());
            break;
        }
        betas.push(beta);
        for i in 0..d {
            prev[i] = q[i];
            q[i] = v[i] / beta;
        }
        beta_prev = beta;
    }

    let k = alphas.len();
    // Eigen of the k×k tridiagonal.
    let mut t: Array2<S> = Array2::zeros((k, k));
    for i in 0..k {
        t[[i, i]] = alphas[i];
        if i + 1 < k && betas[i] != S::zero() {
            t[[i, i + 1]] = betas[i];
            t[[i + 1, i]] = betas[i];
        }
    }
    let eig = sym_eigen(&t.view());
    let last_beta = if k < d { betas[k - 1] } else { S::zero() };

    let mut values = Vec::new();
    let mut cols: Vec<Vec<S>> = Vec::new();
    for j in (0..k).rev() {
        let theta = eig.values[j];
        if theta <= S::zero() {
            break;
        }
        let resid = (last_beta * eig.vectors[[k - 1, j]]).abs();
        if resid > tol {
            return None; // unconverged positive Ritz pair
        }
        let mut col = vec![S::zero(); d];
        for (s, b) in basis.iter().enumerate() {
            let c = eig.vectors[[s, j]];
            for i in 0..d {
                col[i] += c * b[i];
            }
        }
        values.push(theta);
        cols.push(col);
    }
    // Certify no positive eigenvalue was missed: if the Krylov space was
    // exhausted (lucky breakdown or k == d) everything is captured; otherwise
    // require the smallest retained Ritz value to be safely non-positive.
    if k < d && betas[k - 1] != S::zero() {
        let smallest_kept = eig.values[0];
        let has_nonpositive_evidence = values.len() < k && smallest_kept <= S::zero();
        if !has_nonpositive_evidence {
            return None;
        }
    }
    let r = values.len();
    let mut vectors = Array2::zeros((d, r));
    for (c, col) in cols.iter().enumerate() {
        for i in 0..d {
            vectors[[i, c]] = col[i];
        }
    }
    Some((values, vectors))
}

fn mat_vec<S: Scalar>(a: &ArrayView2<S>, x: &[S]) -> Vec<S> {
    let d = a.nrows();
    let mut out = vec![S::zero(); d];
    for i in 0..d {
        let row = a.row(i);
        let mut acc = S::zero();
        for j in 0..d {
            acc += row[j] * x[j];
        }
        out[i] = acc;
    }
    out
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b.iter()).map(|(x, y)| *x * *y).sum()
}

fn normalize<S: Scalar>(v: &mut [S]) -> Option<()> {
    let norm = dot(v, v).sqrt();
    if norm == S::zero() {
        return None;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                a[[i, j]] = v;
                a[[j, i]] = v;
            }
        }
        a
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        for d in [1, 2, 3, 8, 25] {
            let a = random_sym(d, d as u64);
            let eig = sym_eigen(&a.view());
            // A = V Λ Vᵀ
            let mut recon = Array2::zeros((d, d));
            for i in 0..d {
                for j in 0..d {
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += eig.vectors[[i, k]] * eig.values[k] * eig.vectors[[j, k]];
                    }
                    recon[[i, j]] = acc;
                }
            }
            for i in 0..d {
                for j in 0..d {
                    assert_abs_diff_eq!(recon[[i, j]], a[[i, j]], epsilon = 1e-9);
                }
            }
            // Orthonormal columns.
            for i in 0..d {
                for j in 0..d {
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += eig.vectors[[k, i]] * eig.vectors[[k, j]];
                    }
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(acc, want, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn eigen_known_values() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let eig = sym_eigen(&a.view());
        assert_abs_diff_eq!(eig.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_round_trip() {
        let a = array![[4.0, 2.0], [2.0, 3.0]];
        let l = cholesky(&a.view()).unwrap();
        let recon = l.dot(&l.t());
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(recon[[i, j]], a[[i, j]], epsilon = 1e-12);
            }
        }
        let bad = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(&bad.view()).is_err());
    }

    #[test]
    fn l1_projection_hits_radius() {
        let mut v = vec![3.0, -2.0, 0.5];
        project_l1_ball(&mut v, 2.0);
        let norm1: f64 = v.iter().map(|x| x.abs()).sum();
        assert_abs_diff_eq!(norm1, 2.0, epsilon = 1e-12);
        // Signs preserved, ordering preserved.
        assert!(v[0] > 0.0 && v[1] < 0.0);
        let mut w = vec![0.5, -0.25];
        project_l1_ball(&mut w, 2.0);
        assert_eq!(w, vec![0.5, -0.25]);
    }

    #[test]
    fn trace_cap_projection() {
        let mut v = vec![3.0, 2.0, -1.0];
        project_nonneg_trace_cap(&mut v, 1.0);
        assert!(v.iter().all(|x| *x >= 0.0));
        assert_abs_diff_eq!(v.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let mut w = vec![0.25, 0.25, -5.0];
        project_nonneg_trace_cap(&mut w, 1.0);
        assert_eq!(w, vec![0.25, 0.25, 0.0]);
    }

    #[test]
    fn weighted_gram_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 57;
        let d = 7;
        let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0));
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.1)).collect();
        let g = weighted_gram(&x.view(), &w);
        for j in 0..d {
            for l in 0..d {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += w[i] * x[[i, j]] * x[[i, l]];
                }
                assert_abs_diff_eq!(g[[j, l]], acc, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lanczos_positive_part_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = 40;
        // Low-rank positive + negative background.
        let mut a = Array2::zeros((d, d));
        for r in 0..3 {
            let q: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm: f64 = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            let lam = 5.0 - r as f64;
            for i in 0..d {
                for j in 0..d {
                    a[[i, j]] += lam * q[i] * q[j] / (norm * norm);
                }
            }
        }
        for i in 0..d {
            a[[i, i]] -= 2.0;
        }
        let (vals, vecs) = positive_part_lanczos(&a.view(), d, None).expect("converged");
        let (dvals, _) = positive_eigenpairs(&a.view(), 0.0);
        assert_eq!(vals.len(), dvals.len());
        let mut sorted = vals.clone();
        sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let mut dsorted = dvals.clone();
        dsorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (v, dv) in sorted.iter().zip(dsorted.iter()) {
            assert_abs_diff_eq!(v, dv, epsilon = 1e-7);
        }
        // Residual check: ‖A q − λ q‖ small for each pair.
        for (c, &lam) in vals.iter().enumerate() {
            let q: Vec<f64> = (0..d).map(|i| vecs[[i, c]]).collect();
            let aq = mat_vec(&a.view(), &q);
            let resid: f64 = aq
                .iter()
                .zip(q.iter())
                .map(|(x, y)| (x - lam * y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-6, "residual {resid}");
        }
    }
}
