//! Sparse Bayesian learning by expectation maximization.
//!
//! The E-step works in observation space, factoring `Σ_y = Φ Γ⁻¹ Φᴴ + I/ζ`,
//! when the dictionary has more columns than rows. Otherwise it factors the
//! posterior precision `Γ + ζ ΦᴴΦ` directly, which avoids the cancellation
//! in `Γ⁻¹ − Γ⁻¹ Φᴴ Σ_y⁻¹ Φ Γ⁻¹` once the noise precision is large.
//!
//! For the two-stage estimator the dictionary is `b ⊗ a(θ_ℓ)` column by
//! column. Every column lives in `C^P ⊗ span{a(θ_ℓ)}`, so the observation is
//! rotated onto that subspace and the orthogonal remainder, which is pure
//! noise under the model, enters only through its dimension and energy.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dictionary::StackedDictionary;
use crate::channel::{steering, CMat};
use crate::error::{input, Result};
use crate::frontend::PilotObservation;
use crate::linalg::{cholesky_logdet, hermitian_cholesky, orthonormal_basis, CVec};

const JITTER: f64 = 1e-12;
const INIT_RIDGE: f64 = 1e-8;
const BASIS_RTOL: f64 = 1e-10;
/// Precisions are kept inside `[PRECISION_FLOOR, PRECISION_CEILING]` so that
/// degenerate (exactly zero) moments cannot produce infinities.
const PRECISION_FLOOR: f64 = 1e-300;
const PRECISION_CEILING: f64 = 1e100;
/// Noise power is not allowed to fall below this fraction of the observed power.
const NOISE_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ZetaRate {
    /// Denominator `E‖y − Φα‖²/D + 2d`.
    #[default]
    TwoD,
    /// Denominator `E‖y − Φα‖²/D + 2c`.
    TwoC,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperpriors {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    #[serde(default)]
    pub zeta_rate: ZetaRate,
}

impl Default for Hyperpriors {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 1.0,
            d: 0.0,
            zeta_rate: ZetaRate::TwoD,
        }
    }
}

impl Hyperpriors {
    fn zeta_offset(&self) -> f64 {
        match self.zeta_rate {
            ZetaRate::TwoD => 2.0 * self.d,
            ZetaRate::TwoC => 2.0 * self.c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SblOptions {
    pub hyper: Hyperpriors,
    pub tol: f64,
    pub max_iter: usize,
    pub prune_threshold: f64,
    /// Keep the full posterior covariance (otherwise only its diagonal).
    #[serde(default)]
    pub full_covariance: bool,
    /// Record every iterate.
    #[serde(default)]
    pub record_history: bool,
}

impl Default for SblOptions {
    fn default() -> Self {
        Self {
            hyper: Hyperpriors::default(),
            tol: 1e-6,
            max_iter: 200,
            prune_threshold: 1e8,
            full_covariance: false,
            record_history: false,
        }
    }
}

/// One E-step and the hyperparameters it was computed with.
#[derive(Debug, Clone, PartialEq)]
pub struct SblIterate {
    pub gamma: Vec<f64>,
    pub zeta: f64,
    pub mean: CVec,
    pub covariance_diag: Vec<f64>,
    pub covariance: Option<CMat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SblPosterior {
    /// Posterior mean with pruned entries zeroed.
    pub mean: CVec,
    pub covariance_diag: Vec<f64>,
    pub covariance: Option<CMat>,
    pub gamma: Vec<f64>,
    pub zeta: f64,
    pub hyper: Hyperpriors,
    /// Objective before each hyperparameter update.
    pub log_evidence: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub pruned: Vec<bool>,
    pub history: Vec<SblIterate>,
}

/// Linear map `Φ` together with the products the EM iteration needs.
pub trait SblOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `Φ diag(w) Φᴴ`.
    fn weighted_gram(&self, w: &[f64]) -> CMat;
    fn apply(&self, x: &CVec) -> CVec;
    fn adjoint_apply(&self, v: &CVec) -> CVec;
    /// `diag(Φᴴ S Φ)` for Hermitian `S`.
    fn quadratic_diag(&self, s: &CMat) -> Vec<f64>;
    fn to_dense(&self) -> CMat;
    /// `ΦᴴΦ`.
    fn coefficient_gram(&self) -> CMat {
        let phi = self.to_dense();
        phi.ad_mul(&phi)
    }
}

pub struct DenseOperator<'a>(pub &'a CMat);

impl SblOperator for DenseOperator<'_> {
    fn rows(&self) -> usize {
        self.0.nrows()
    }

    fn cols(&self) -> usize {
        self.0.ncols()
    }

    fn weighted_gram(&self, w: &[f64]) -> CMat {
        let mut scaled = self.0.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(w[j], 0.0);
        }
        scaled * self.0.adjoint()
    }

    fn apply(&self, x: &CVec) -> CVec {
        self.0 * x
    }

    fn adjoint_apply(&self, v: &CVec) -> CVec {
        self.0.ad_mul(v)
    }

    fn quadratic_diag(&self, s: &CMat) -> Vec<f64> {
        let sp = s * self.0;
        self.0
            .column_iter()
            .zip(sp.column_iter())
            .map(|(a, b)| a.dotc(&b).re)
            .collect()
    }

    fn to_dense(&self) -> CMat {
        self.0.clone()
    }
}

/// Columns `b_ℓj ⊗ ã_ℓ`; row index `p·r + i`.
pub struct KroneckerOperator {
    /// Per group `ℓ`: `P × n_ℓ` pilot responses.
    pub pilot: Vec<CMat>,
    /// Per group `ℓ`: spatial vector of length `r`.
    pub spatial: Vec<CVec>,
    pub spatial_dim: usize,
    pub num_pilots: usize,
}

impl KroneckerOperator {
    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.pilot.len() + 1);
        off.push(0);
        for b in &self.pilot {
            off.push(off.last().unwrap() + b.ncols());
        }
        off
    }
}

impl SblOperator for KroneckerOperator {
    fn rows(&self) -> usize {
        self.spatial_dim * self.num_pilots
    }

    fn cols(&self) -> usize {
        self.pilot.iter().map(|b| b.ncols()).sum()
    }

    fn weighted_gram(&self, w: &[f64]) -> CMat {
        let (r, p) = (self.spatial_dim, self.num_pilots);
        let mut out = CMat::zeros(r * p, r * p);
        let off = self.offsets();
        for (l, (b, a)) in self.pilot.iter().zip(&self.spatial).enumerate() {
            let mut bw = b.clone();
            for (j, mut col) in bw.column_iter_mut().enumerate() {
                col *= Complex64::new(w[off[l] + j], 0.0);
            }
            let g = bw * b.adjoint();
            let aa = a * a.adjoint();
            for p2 in 0..p {
                for p1 in 0..p {
                    let gv = g[(p1, p2)];
                    if gv == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for i2 in 0..r {
                        for i1 in 0..r {
                            out[(p1 * r + i1, p2 * r + i2)] += gv * aa[(i1, i2)];
                        }
                    }
                }
            }
        }
        out
    }

    fn apply(&self, x: &CVec) -> CVec {
        let (r, p) = (self.spatial_dim, self.num_pilots);
        let mut out = CVec::zeros(r * p);
        let off = self.offsets();
        for (l, (b, a)) in self.pilot.iter().zip(&self.spatial).enumerate() {
            let bx = b * x.rows(off[l], b.ncols());
            for pp in 0..p {
                for i in 0..r {
                    out[pp * r + i] += bx[pp] * a[i];
                }
            }
        }
        out
    }

    fn adjoint_apply(&self, v: &CVec) -> CVec {
        let (r, p) = (self.spatial_dim, self.num_pilots);
        let mut out = CVec::zeros(self.cols());
        let off = self.offsets();
        for (l, (b, a)) in self.pilot.iter().zip(&self.spatial).enumerate() {
            let u = CVec::from_fn(p, |pp, _| a.dotc(&v.rows(pp * r, r)));
            out.rows_mut(off[l], b.ncols()).copy_from(&b.ad_mul(&u));
        }
        out
    }

    fn quadratic_diag(&self, s: &CMat) -> Vec<f64> {
        let (r, p) = (self.spatial_dim, self.num_pilots);
        let mut out = Vec::with_capacity(self.cols());
        for (b, a) in self.pilot.iter().zip(&self.spatial) {
            // H[p1, p2] = ãᴴ S_{p1 p2} ã
            let mut h = CMat::zeros(p, p);
            for p2 in 0..p {
                for p1 in 0..p {
                    let block = s.view((p1 * r, p2 * r), (r, r));
                    h[(p1, p2)] = a.dotc(&(block * a));
                }
            }
            let hb = &h * b;
            out.extend(
                b.column_iter()
                    .zip(hb.column_iter())
                    .map(|(x, y)| x.dotc(&y).re),
            );
        }
        out
    }

    fn to_dense(&self) -> CMat {
        let (r, p) = (self.spatial_dim, self.num_pilots);
        let mut out = CMat::zeros(r * p, self.cols());
        let mut col = 0;
        for (b, a) in self.pilot.iter().zip(&self.spatial) {
            for j in 0..b.ncols() {
                for pp in 0..p {
                    for i in 0..r {
                        out[(pp * r + i, col)] = b[(pp, j)] * a[i];
                    }
                }
                col += 1;
            }
        }
        out
    }
}

/// Observation dimensions that no column reaches.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OrthogonalPart {
    pub dims: usize,
    pub energy: f64,
}

fn check_inputs<O: SblOperator>(op: &O, y: &CVec, opts: &SblOptions) -> Result<()> {
    if op.rows() != y.len() {
        return input("observation length does not match the dictionary");
    }
    if op.cols() == 0 {
        return input("dictionary has no columns");
    }
    if !(opts.tol > 0.0) {
        return input("tolerance must be positive");
    }
    if opts.max_iter == 0 {
        return input("max_iter must be at least 1");
    }
    Ok(())
}

fn identity_shift(mut m: CMat, shift: f64) -> CMat {
    for i in 0..m.nrows() {
        m[(i, i)] += Complex64::new(shift, 0.0);
    }
    m
}

/// EM over a generic operator.
pub fn sbl_em_operator<O: SblOperator>(
    op: &O,
    y: &CVec,
    orth: OrthogonalPart,
    noise_var: f64,
    opts: &SblOptions,
) -> Result<SblPosterior> {
    check_inputs(op, y, opts)?;
    let n = op.cols();
    let rows = op.rows();
    let total_dims = (rows + orth.dims) as f64;
    let observed_power = (y.norm_squared() + orth.energy) / total_dims;
    let zeta_ceiling = if observed_power > 0.0 {
        1.0 / (NOISE_FLOOR * observed_power)
    } else {
        PRECISION_CEILING
    };
    let h = opts.hyper;

    // Tiny-ridge least squares as the starting mean.
    let ones = vec![1.0; n];
    let gram = op.weighted_gram(&ones);
    let ridge = INIT_RIDGE * gram.trace().re.abs().max(f64::MIN_POSITIVE) / n as f64;
    let init = hermitian_cholesky(&identity_shift(gram, ridge), JITTER)?;
    let mut alpha = op.adjoint_apply(&init.solve(y));

    let mut gamma = vec![1.0; n];
    let mut zeta = if noise_var > 0.0 { 1.0 / noise_var } else { 1.0 };
    let mut trace = Vec::new();
    let mut history = Vec::new();
    let mut diag = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;

    let coefficient_space = n <= rows;
    let (gram_c, proj) = if coefficient_space {
        (op.coefficient_gram(), op.adjoint_apply(y))
    } else {
        (CMat::zeros(0, 0), CVec::zeros(0))
    };
    let mut covariance = None;

    for t in 1..=opts.max_iter {
        iterations = t;
        let inv_gamma: Vec<f64> = gamma.iter().map(|g| 1.0 / g).collect();
        let e = if coefficient_space {
            coefficient_step(op, y, &gram_c, &proj, &gamma, zeta, opts.full_covariance)?
        } else {
            observation_step(op, y, &inv_gamma, zeta, opts.full_covariance)?
        };
        let next = e.mean;
        diag = e.diag;

        let mut objective = -(rows as f64) * PI.ln() - e.logdet - e.quad;
        if orth.dims > 0 {
            objective += -(orth.dims as f64) * (PI / zeta).ln() - zeta * orth.energy;
        }
        objective += gamma
            .iter()
            .map(|g| 2.0 * (h.a - 1.0) * g.ln() - 2.0 * h.b * g)
            .sum::<f64>();
        objective += total_dims * (2.0 * (h.c - 1.0) * zeta.ln() - h.zeta_offset() * zeta);
        trace.push(objective);

        if opts.record_history {
            history.push(SblIterate {
                gamma: gamma.clone(),
                zeta,
                mean: next.clone(),
                covariance_diag: diag.clone(),
                covariance: e.covariance.clone(),
            });
        }
        covariance = e.covariance;

        for i in 0..n {
            let second = next[i].norm_sqr() + diag[i] + 2.0 * h.b;
            gamma[i] = ((2.0 * h.a - 1.0) / second).clamp(PRECISION_FLOOR, PRECISION_CEILING);
        }
        let mean_err = (e.residual + orth.energy + e.explained.max(0.0)) / total_dims;
        zeta = ((2.0 * h.c - 1.0) / (mean_err + h.zeta_offset())).clamp(PRECISION_FLOOR, zeta_ceiling);

        let change = (&next - &alpha).norm() / alpha.norm().max(1e-12);
        alpha = next;
        if t >= 2 && change < opts.tol {
            converged = true;
            break;
        }
    }

    let pruned: Vec<bool> = gamma.iter().map(|&g| g > opts.prune_threshold).collect();
    for (x, &p) in alpha.iter_mut().zip(&pruned) {
        if p {
            *x = Complex64::new(0.0, 0.0);
        }
    }

    Ok(SblPosterior {
        mean: alpha,
        covariance_diag: diag,
        covariance,
        gamma,
        zeta,
        hyper: h,
        log_evidence: trace,
        iterations,
        converged,
        pruned,
        history,
    })
}

/// Posterior moments for fixed `(γ, ζ)` and the evidence terms they imply.
struct EStep {
    mean: CVec,
    diag: Vec<f64>,
    covariance: Option<CMat>,
    /// `log det Σ_y`.
    logdet: f64,
    /// `yᴴ Σ_y⁻¹ y`.
    quad: f64,
    /// `‖y − Φ α̂‖²`.
    residual: f64,
    /// `trace(Φ Σ̂ Φᴴ)`.
    explained: f64,
}

fn observation_step<O: SblOperator>(
    op: &O,
    y: &CVec,
    inv_gamma: &[f64],
    zeta: f64,
    full: bool,
) -> Result<EStep> {
    let sigma_y = identity_shift(op.weighted_gram(inv_gamma), 1.0 / zeta);
    let chol = hermitian_cholesky(&sigma_y, JITTER)?;
    let s = chol.inverse();
    let u = &s * y;
    let mut mean = op.adjoint_apply(&u);
    for (x, ig) in mean.iter_mut().zip(inv_gamma) {
        *x *= *ig;
    }
    let q = op.quadratic_diag(&s);
    let diag = q
        .iter()
        .zip(inv_gamma)
        .map(|(qi, ig)| (ig * (1.0 - qi * ig)).max(0.0))
        .collect();
    let explained = q.iter().zip(inv_gamma).map(|(qi, ig)| qi * ig).sum::<f64>() / zeta;
    Ok(EStep {
        residual: (y - op.apply(&mean)).norm_squared(),
        covariance: full.then(|| posterior_covariance(op, &s, inv_gamma)),
        logdet: cholesky_logdet(&chol),
        quad: y.dotc(&u).re,
        mean,
        diag,
        explained,
    })
}

/// E-step through `Σ̂ = (Γ + ζ ΦᴴΦ)⁻¹`, factored after unit-diagonal scaling.
fn coefficient_step<O: SblOperator>(
    op: &O,
    y: &CVec,
    gram: &CMat,
    proj: &CVec,
    gamma: &[f64],
    zeta: f64,
    full: bool,
) -> Result<EStep> {
    let n = gamma.len();
    let rows = y.len() as f64;
    let scale: Vec<f64> = (0..n).map(|i| (zeta * gram[(i, i)].re + gamma[i]).sqrt()).collect();
    let scaled = CMat::from_fn(n, n, |i, j| {
        let v = gram[(i, j)] * zeta + if i == j { Complex64::new(gamma[i], 0.0) } else { Complex64::new(0.0, 0.0) };
        v / (scale[i] * scale[j])
    });
    let chol = hermitian_cholesky(&scaled, JITTER)?;
    let inv = chol.inverse();
    let cov = CMat::from_fn(n, n, |i, j| inv[(i, j)] / (scale[i] * scale[j]));
    let mean = &cov * proj * Complex64::new(zeta, 0.0);
    let residual = (y - op.apply(&mean)).norm_squared();
    let prior: f64 = mean.iter().zip(gamma).map(|(m, g)| g * m.norm_sqr()).sum();
    // det Σ_y = ζ^{−rows} det(Γ)⁻¹ det(Γ + ζ ΦᴴΦ)
    let logdet = -rows * zeta.ln() - gamma.iter().map(|g| g.ln()).sum::<f64>()
        + 2.0 * scale.iter().map(|s| s.ln()).sum::<f64>()
        + cholesky_logdet(&chol);
    let explained = cov.component_mul(&gram.transpose()).iter().map(|z| z.re).sum();
    Ok(EStep {
        diag: (0..n).map(|i| cov[(i, i)].re.max(0.0)).collect(),
        covariance: full.then(|| cov.clone()),
        quad: zeta * residual + prior,
        logdet,
        residual,
        explained,
        mean,
    })
}

/// `Γ⁻¹ − Γ⁻¹ Φᴴ S Φ Γ⁻¹`.
fn posterior_covariance<O: SblOperator>(op: &O, s: &CMat, inv_gamma: &[f64]) -> CMat {
    let phi = op.to_dense();
    let middle = phi.adjoint() * s * &phi;
    CMat::from_fn(op.cols(), op.cols(), |i, j| {
        let base = if i == j { inv_gamma[i] } else { 0.0 };
        Complex64::new(base, 0.0) - middle[(i, j)] * (inv_gamma[i] * inv_gamma[j])
    })
}

/// EM on an explicit dictionary.
pub fn sbl_em_dense(
    omega: &CMat,
    y: &CVec,
    noise_var: f64,
    opts: &SblOptions,
) -> Result<SblPosterior> {
    sbl_em_operator(&DenseOperator(omega), y, OrthogonalPart::default(), noise_var, opts)
}

/// Compressed problem: operator, rotated observation and orthogonal remainder.
pub fn compress(
    obs: &PilotObservation,
    dict: &StackedDictionary,
) -> Result<(KroneckerOperator, CVec, OrthogonalPart)> {
    let m = obs.num_antennas();
    let p = obs.pattern.len();
    if dict.pilot_ks != obs.pattern.indices {
        return input("dictionary and observation use different pilots");
    }
    if dict.num_paths() == 0 || dict.points_per_path == 0 {
        return input("dictionary is empty");
    }
    let steer = CMat::from_fn(m, dict.num_paths(), |i, l| steering(dict.path_angles[l], m)[i]);
    let q = orthonormal_basis(&steer, BASIS_RTOL);
    let r = q.ncols();
    let y_red = q.ad_mul(&obs.y);
    let orth = OrthogonalPart {
        dims: (m - r) * p,
        energy: (&obs.y - &q * &y_red).norm_squared(),
    };
    let spatial: Vec<CVec> = (0..dict.num_paths())
        .map(|l| q.ad_mul(&steer.column(l)))
        .collect();
    let mut pilot = Vec::with_capacity(dict.num_paths());
    let mut start = 0;
    for grid in &dict.delay_grids {
        pilot.push(dict.pilot_betas.columns(start, grid.len()).into_owned());
        start += grid.len();
    }
    let op = KroneckerOperator {
        pilot,
        spatial,
        spatial_dim: r,
        num_pilots: p,
    };
    Ok((op, DVector::from_column_slice(y_red.as_slice()), orth))
}

/// EM against the stacked delay dictionary.
pub fn sbl_em(
    obs: &PilotObservation,
    dict: &StackedDictionary,
    opts: &SblOptions,
) -> Result<SblPosterior> {
    let (op, y, orth) = compress(obs, dict)?;
    sbl_em_operator(&op, &y, orth, obs.noise_var, opts)
}
