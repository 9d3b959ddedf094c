//! Core domain types shared by every stage: regression instances, ground
//! truth for diagnostics, estimator configuration, instance validation and
//! noise-scale normalization, plus the on-disk instance directory format.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Default hard-coded ratio requirement ε ≤ α / C.
pub const DEFAULT_EPSILON_ALPHA_RATIO: f64 = 4.0;

/// Covariance of the design distribution, stored structurally so ground
/// truth stays compact for large d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceModel<S> {
    Identity,
    Diagonal { values: Vec<S> },
    Toeplitz { rho: S },
    Dense { matrix: Vec<Vec<S>> },
}

impl<S: Scalar> CovarianceModel<S> {
    pub fn dense(&self, d: usize) -> Array2<S> {
        match self {
            CovarianceModel::Identity => Array2::eye(d),
            CovarianceModel::Diagonal { values } => {
                let mut m = Array2::zeros((d, d));
                for i in 0..d {
                    m[[i, i]] = values[i];
                }
                m
            }
            CovarianceModel::Toeplitz { rho } => {
                let mut m = Array2::zeros((d, d));
                for i in 0..d {
                    for j in 0..d {
                        let k = i.abs_diff(j) as i32;
                        m[[i, j]] = rho.powi(k);
                    }
                }
                m
            }
            CovarianceModel::Dense { matrix } => {
                let mut m = Array2::zeros((d, d));
                for i in 0..d {
                    for j in 0..d {
                        m[[i, j]] = matrix[i][j];
                    }
                }
                m
            }
        }
    }

    /// uᵀ Σ u without materializing Σ for the structured cases.
    pub fn quad_form(&self, u: &[S]) -> S {
        match self {
            CovarianceModel::Identity => u.iter().map(|x| *x * *x).sum(),
            CovarianceModel::Diagonal { values } => u
                .iter()
                .zip(values.iter())
                .map(|(x, v)| *x * *x * *v)
                .sum(),
            _ => {
                let d = u.len();
                let m = self.dense(d);
                let uv = ndarray::ArrayView1::from(u);
                linalg::quad_form(&m.view(), &uv)
            }
        }
    }

    /// ‖Σ^{1/2} u‖.
    pub fn sigma_norm(&self, u: &[S]) -> S {
        self.quad_form(u).max(S::zero()).sqrt()
    }
}

/// Ground truth attached to synthetic instances; absent on production data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth<S> {
    pub beta_star: Array1<S>,
    pub covariance: CovarianceModel<S>,
    /// True on rows the adaptive adversary (and truncation accounting) left
    /// intact.
    pub good_mask: Vec<bool>,
    /// Oblivious noise vector.
    pub eta: Array1<S>,
    /// Support of the adaptive corruption.
    pub zeta_support: Vec<usize>,
    /// Sparsity bound k for beta_star.
    pub sparsity: usize,
    pub seed: Option<u64>,
}

/// One observed instance: corrupted design and responses plus the model
/// scale parameters.
#[derive(Debug, Clone)]
pub struct RegressionInstance<S> {
    pub design: Array2<S>,
    pub response: Array1<S>,
    /// Oblivious-noise scale σ.
    pub sigma: S,
    /// Adaptive corruption budget ε ∈ (0, 1/2).
    pub epsilon: S,
    /// Fraction of noise entries guaranteed to have |ηᵢ| ≤ σ.
    pub alpha: S,
    pub truth: Option<GroundTruth<S>>,
}

impl<S: Scalar> RegressionInstance<S> {
    pub fn n(&self) -> usize {
        self.design.nrows()
    }
    pub fn d(&self) -> usize {
        self.design.ncols()
    }
}

/// Checks all instance invariants; returns one description per violation.
/// Pure: produces data, never fails.
pub fn validate_instance<S: Scalar>(inst: &RegressionInstance<S>) -> Vec<String> {
    validate_instance_with(inst, S::from_f64(DEFAULT_EPSILON_ALPHA_RATIO))
}

pub fn validate_instance_with<S: Scalar>(
    inst: &RegressionInstance<S>,
    epsilon_alpha_ratio: S,
) -> Vec<String> {
    let mut violations = Vec::new();
    let n = inst.design.nrows();
    let d = inst.design.ncols();
    if inst.response.len() != n {
        violations.push(format!(
            "response length {} does not match design rows {}",
            inst.response.len(),
            n
        ));
    }
    if inst.design.iter().any(|x| !x.is_finite()) {
        violations.push("design contains non-finite entries".to_string());
    }
    if inst.response.iter().any(|x| !x.is_finite()) {
        violations.push("response contains non-finite entries".to_string());
    }
    if !(inst.epsilon > S::zero()) {
        violations.push(format!("epsilon out of range: {} ≤ 0", inst.epsilon));
    }
    if inst.epsilon >= S::from_f64(0.5) {
        violations.push(format!("epsilon out of range: {} ≥ 1/2", inst.epsilon));
    }
    if !(inst.alpha > S::zero() && inst.alpha <= S::one()) {
        violations.push(format!("alpha out of range: {}", inst.alpha));
    }
    if inst.epsilon > S::zero() && inst.epsilon * epsilon_alpha_ratio > inst.alpha {
        violations.push(format!(
            "epsilon {} exceeds alpha/{} = {}",
            inst.epsilon,
            epsilon_alpha_ratio,
            inst.alpha / epsilon_alpha_ratio
        ));
    }
    if !(inst.sigma > S::zero()) {
        violations.push(format!("sigma must be positive, got {}", inst.sigma));
    }
    if let Some(truth) = &inst.truth {
        if truth.beta_star.len() != d {
            violations.push(format!(
                "beta_star length {} does not match dimension {}",
                truth.beta_star.len(),
                d
            ));
        }
        let nnz = truth.beta_star.iter().filter(|x| **x != S::zero()).count();
        if nnz > truth.sparsity {
            violations.push(format!(
                "beta_star has {} nonzeros, exceeds sparsity {}",
                nnz, truth.sparsity
            ));
        }
        if truth.good_mask.len() != n {
            violations.push(format!(
                "good_mask length {} does not match sample count {}",
                truth.good_mask.len(),
                n
            ));
        } else {
            let bad = truth.good_mask.iter().filter(|g| !**g).count();
            let budget = (inst.epsilon * S::from_usize(n)).as_f64().ceil() as usize;
            if bad > budget {
                violations.push(format!(
                    "good_mask marks {bad} corrupted rows, exceeds ⌈εn⌉ = {budget}"
                ));
            }
        }
        if truth.eta.len() == n {
            let inliers = truth
                .eta
                .iter()
                .filter(|e| e.abs() <= inst.sigma)
                .count();
            let needed = (inst.alpha * S::from_usize(n)).as_f64().ceil() as usize;
            if inliers < needed {
                violations.push(format!(
                    "eta has {inliers} entries within sigma, fewer than ⌈αn⌉ = {needed}"
                ));
            }
        } else {
            violations.push(format!(
                "eta length {} does not match sample count {}",
                truth.eta.len(),
                n
            ));
        }
    }
    violations
}

/// Record of the σ-normalization, used to unscale the estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScaleRecord<S> {
    pub sigma: S,
}

impl<S: Scalar> ScaleRecord<S> {
    /// Maps the estimate computed on the normalized instance back to the
    /// original scale.
    pub fn unscale_beta(&self, beta: &Array1<S>) -> Array1<S> {
        beta.mapv(|b| b * self.sigma)
    }
}

/// Divides responses (and truth quantities) by σ so the normalized instance
/// has σ = 1. The design is unchanged.
pub fn rescale_by_sigma<S: Scalar>(
    inst: &RegressionInstance<S>,
) -> Result<(RegressionInstance<S>, ScaleRecord<S>)> {
    if !(inst.sigma > S::zero()) {
        return Err(Error::invalid(format!(
            "sigma must be positive, got {}",
            inst.sigma
        )));
    }
    let record = ScaleRecord { sigma: inst.sigma };
    if inst.sigma == S::one() {
        return Ok((inst.clone(), record));
    }
    let sigma = inst.sigma;
    let mut scaled = inst.clone();
    scaled.response.mapv_inplace(|y| y / sigma);
    scaled.sigma = S::one();
    if let Some(truth) = &mut scaled.truth {
        truth.beta_star.mapv_inplace(|b| b / sigma);
        truth.eta.mapv_inplace(|e| e / sigma);
    }
    Ok((scaled, record))
}

/// Which convex relaxation backs `solve_max_moment`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    BasicSdpT1,
    LiteQuarticT2,
    FullSos,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default = "RelaxationBackend::default_f64_erased")]
pub struct RelaxationBackend<S> {
    pub kind: BackendKind,
    pub tol_feas: S,
    /// Relative duality-gap target.
    pub tol_gap: S,
    pub max_solver_iters: usize,
    pub seed: u64,
    /// full_sos refuses dimensions above this cap.
    pub full_sos_dim_cap: usize,
}

impl<S: Scalar> RelaxationBackend<S> {
    pub fn basic_t1() -> Self {
        RelaxationBackend {
            kind: BackendKind::BasicSdpT1,
            tol_feas: S::from_f64(1e-6),
            tol_gap: S::from_f64(1e-4),
            max_solver_iters: 20_000,
            seed: 0,
            full_sos_dim_cap: 10,
        }
    }

    pub fn lite_t2() -> Self {
        RelaxationBackend {
            kind: BackendKind::LiteQuarticT2,
            ..Self::basic_t1()
        }
    }

    pub fn full_sos() -> Self {
        RelaxationBackend {
            kind: BackendKind::FullSos,
            ..Self::basic_t1()
        }
    }

    fn default_f64_erased() -> Self {
        Self::basic_t1()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_feas > S::zero() && self.tol_gap > S::zero()) {
            return Err(Error::invalid("backend tolerances must be positive"));
        }
        Ok(())
    }
}

/// Estimator configuration: model parameters the algorithm is given, plus the
/// analysis constants (exposed because the underlying constants were never
/// optimized; defaults follow the source analysis).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorConfig<S> {
    pub k: usize,
    pub epsilon: S,
    pub sigma: S,
    /// Moment order: the filter certifies 2t-th moments.
    #[serde(default = "default_t")]
    pub t: usize,
    /// Relaxation degree parameter; even, ≥ 2t. `None` means 2t.
    #[serde(default)]
    pub ell: Option<usize>,
    /// Moment constant M_{2t}.
    #[serde(default = "default_m2t_erased")]
    pub m2t: S,
    #[serde(default = "default_c_lambda_erased")]
    pub c_lambda: S,
    #[serde(default = "default_c_tau_erased")]
    pub c_tau: S,
    /// Filter threshold factor; `None` means 10^t.
    #[serde(default)]
    pub c_threshold: Option<S>,
    #[serde(default)]
    pub skip_truncation: bool,
    #[serde(default = "RelaxationBackend::default_f64_erased")]
    pub backend: RelaxationBackend<S>,
    #[serde(default = "default_delta_erased")]
    pub delta: S,
    /// Condition-number estimate κ̂ supplied by the user (default 1).
    #[serde(default = "default_kappa_erased")]
    pub kappa_hat: S,
    /// Median-of-means block count; `None` picks ⌈min(√n, 1/ε)⌉ rounded odd.
    #[serde(default)]
    pub num_blocks: Option<usize>,
    /// Elastic sparsity parameter K override; `None` means 100·k/σ_min.
    #[serde(default)]
    pub k_elastic: Option<S>,
    /// Effective corruption ε̃ override; `None` means 2ε.
    #[serde(default)]
    pub epsilon_tilde: Option<S>,
    /// Ablation: force uniform weights (no filtering).
    #[serde(default)]
    pub disable_filter: bool,
    #[serde(default = "default_huber_threshold_erased")]
    pub huber_threshold: S,
    #[serde(default = "default_huber_tol_erased")]
    pub huber_tol_kkt: S,
    #[serde(default = "default_huber_iters")]
    pub huber_max_iters: usize,
}

fn default_t() -> usize {
    1
}
fn default_m2t_erased<S: Scalar>() -> S {
    S::from_f64(3.0)
}
fn default_c_lambda_erased<S: Scalar>() -> S {
    S::from_f64(1000.0)
}
fn default_c_tau_erased<S: Scalar>() -> S {
    S::from_f64(0.01)
}
fn default_delta_erased<S: Scalar>() -> S {
    S::from_f64(0.01)
}
fn default_kappa_erased<S: Scalar>() -> S {
    S::one()
}
fn default_huber_threshold_erased<S: Scalar>() -> S {
    S::from_f64(2.0)
}
fn default_huber_tol_erased<S: Scalar>() -> S {
    S::from_f64(1e-8)
}
fn default_huber_iters() -> usize {
    50_000
}

impl<S: Scalar> EstimatorConfig<S> {
    pub fn new(k: usize, epsilon: S, sigma: S) -> Self {
        EstimatorConfig {
            k,
            epsilon,
            sigma,
            t: 1,
            ell: None,
            m2t: default_m2t_erased(),
            c_lambda: default_c_lambda_erased(),
            c_tau: default_c_tau_erased(),
            c_threshold: None,
            skip_truncation: false,
            backend: RelaxationBackend::basic_t1(),
            delta: default_delta_erased(),
            kappa_hat: S::one(),
            num_blocks: None,
            k_elastic: None,
            epsilon_tilde: None,
            disable_filter: false,
            huber_threshold: default_huber_threshold_erased(),
            huber_tol_kkt: default_huber_tol_erased(),
            huber_max_iters: default_huber_iters(),
        }
    }

    pub fn ell(&self) -> usize {
        self.ell.unwrap_or(2 * self.t)
    }

    /// Filter threshold factor (10^t unless overridden).
    pub fn threshold_factor(&self) -> S {
        self.c_threshold
            .unwrap_or_else(|| S::from_f64(10.0).powi(self.t as i32))
    }

    pub fn epsilon_tilde(&self) -> S {
        self.epsilon_tilde
            .unwrap_or_else(|| S::from_f64(2.0) * self.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if self.t == 0 {
            return Err(Error::invalid("t must be positive"));
        }
        let ell = self.ell();
        if ell % 2 != 0 || ell < 2 * self.t {
            return Err(Error::invalid(format!(
                "ell must be even and ≥ 2t, got {ell} with t = {}",
                self.t
            )));
        }
        if !(self.m2t >= S::one()) {
            return Err(Error::invalid("m2t must be ≥ 1"));
        }
        for (name, v) in [
            ("c_lambda", self.c_lambda),
            ("c_tau", self.c_tau),
            ("threshold factor", self.threshold_factor()),
            ("sigma", self.sigma),
            ("kappa_hat", self.kappa_hat),
            ("huber_threshold", self.huber_threshold),
        ] {
            if !(v > S::zero()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.delta > S::zero() && self.delta < S::one()) {
            return Err(Error::invalid("delta must be in (0, 1)"));
        }
        if !(self.epsilon > S::zero() && self.epsilon < S::from_f64(0.5)) {
            return Err(Error::invalid("epsilon must be in (0, 1/2)"));
        }
        self.backend.validate()
    }
}

// ---------------------------------------------------------------------------
// Instance directory format: design.csv / response.csv / meta.json
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct MetaFile<S> {
    sigma: S,
    epsilon: S,
    alpha: S,
    n: usize,
    d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<TruthBlock<S>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthBlock<S> {
    beta_star: Vec<S>,
    covariance: CovarianceModel<S>,
    good_mask: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<Vec<S>>,
    #[serde(default)]
    zeta_support: Vec<usize>,
    sparsity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn format_scalar<S: Scalar>(x: S) -> String {
    format!("{}", x)
}

fn write_matrix_csv<S: Scalar>(path: &Path, m: &ArrayView2<S>) -> Result<()> {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|x| format_scalar(*x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn parse_scalar<S: Scalar>(s: &str) -> Result<S> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))?;
    Ok(S::from_f64(v))
}

/// Writes `design.csv`, `response.csv`, `meta.json` into `dir`.
pub fn save_instance<S: Scalar + Serialize>(
    dir: &Path,
    inst: &RegressionInstance<S>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix_csv(&dir.join("design.csv"), &inst.design.view())?;
    let mut resp = String::new();
    for y in inst.response.iter() {
        resp.push_str(&format_scalar(*y));
        resp.push('\n');
    }
    fs::write(dir.join("response.csv"), resp)?;
    let meta = MetaFile {
        sigma: inst.sigma,
        epsilon: inst.epsilon,
        alpha: inst.alpha,
        n: inst.n(),
        d: inst.d(),
        truth: inst.truth.as_ref().map(|t| TruthBlock {
            beta_star: t.beta_star.to_vec(),
            covariance: t.covariance.clone(),
            good_mask: t.good_mask.clone(),
            eta: Some(t.eta.to_vec()),
            zeta_support: t.zeta_support.clone(),
            sparsity: t.sparsity,
            seed: t.seed,
        }),
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Reads an instance directory written by [`save_instance`].
pub fn load_instance<S: Scalar + for<'de> Deserialize<'de>>(
    dir: &Path,
) -> Result<RegressionInstance<S>> {
    let meta: MetaFile<S> = serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
    let design_txt = fs::read_to_string(dir.join("design.csv"))?;
    let mut values: Vec<S> = Vec::with_capacity(meta.n * meta.d);
    for line in design_txt.lines() {
        if line.trim().is_empty() {
            continue;
        }
        for cell in line.split(',') {
            values.push(parse_scalar(cell)?);
        }
    }
    if values.len() != meta.n * meta.d {
        return Err(Error::Parse(format!(
            "design.csv has {} values, expected {}×{}",
            values.len(),
            meta.n,
            meta.d
        )));
    }
    let design = Array2::from_shape_vec((meta.n, meta.d), values)
        .map_err(|e| Error::Parse(e.to_string()))?;
    let resp_txt = fs::read_to_string(dir.join("response.csv"))?;
    let mut response: Vec<S> = Vec::with_capacity(meta.n);
    for line in resp_txt.lines() {
        if line.trim().is_empty() {
            continue;
        }
        response.push(parse_scalar(line)?);
    }
    if response.len() != meta.n {
        return Err(Error::Parse(format!(
            "response.csv has {} values, expected {}",
            response.len(),
            meta.n
        )));
    }
    let truth = meta.truth.map(|t| {
        let n = meta.n;
        GroundTruth {
            beta_star: Array1::from_vec(t.beta_star),
            covariance: t.covariance,
            good_mask: t.good_mask,
            eta: Array1::from_vec(t.eta.unwrap_or_else(|| vec![S::zero(); n])),
            zeta_support: t.zeta_support,
            sparsity: t.sparsity,
            seed: t.seed,
        }
    });
    Ok(RegressionInstance {
        design,
        response: Array1::from_vec(response),
        sigma: meta.sigma,
        epsilon: meta.epsilon,
        alpha: meta.alpha,
        truth,
    })
}
