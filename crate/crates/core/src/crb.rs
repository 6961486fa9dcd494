//! Fisher information blocks for the angle–gain–hyperparameter model and
//! the resulting Cramér–Rao bounds on angles and gains.
//!
//! Parameters are ordered `[θ (L), α (L), γ (L), ζ, τ (L)]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{beta, beta_derivative, build_omega, steering, steering_derivative, ArrayConfig, CMat, OfdmConfig};
use crate::error::{input, Result};
use crate::linalg::{hermitian_condition, hermitian_eigenvalues, rank};

/// Pivots with a condition number at or above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FimConvention {
    /// Block formulas exactly as written, including their leading signs.
    AsPrinted,
    /// Expected negated Hessian of the log-posterior; positive semidefinite.
    #[default]
    NegatedHessian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FimInput {
    pub angles: Vec<f64>,
    pub delays: Vec<f64>,
    /// Plug-in gain precisions.
    pub gamma: Vec<f64>,
    /// Plug-in noise precision.
    pub zeta: f64,
    pub a: f64,
    pub c: f64,
    pub pilot_ks: Vec<usize>,
    pub arr: ArrayConfig,
    pub ofdm: OfdmConfig,
    pub convention: FimConvention,
}

impl FimInput {
    pub fn num_paths(&self) -> usize {
        self.angles.len()
    }

    fn validate(&self) -> Result<()> {
        let l = self.angles.len();
        if l == 0 || self.delays.len() != l || self.gamma.len() != l {
            return input("angles, delays and precisions must be equally long and non-empty");
        }
        if self.gamma.iter().any(|&g| !(g > 0.0 && g.is_finite())) || !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return input("plug-in precisions must be positive and finite");
        }
        if self.pilot_ks.is_empty() || self.pilot_ks.iter().any(|&k| k >= self.ofdm.fft_size) {
            return input("pilot subcarriers must be non-empty and below fft_size");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FimBlocks {
    pub theta_theta: CMat,
    /// `L × 1`.
    pub theta_zeta: CMat,
    pub theta_tau: CMat,
    pub gamma_gamma: CMat,
    pub zeta_zeta: f64,
    pub alpha_alpha: CMat,
    /// `1 × L`.
    pub zeta_tau: CMat,
    pub tau_tau: CMat,
    pub convention: FimConvention,
}

impl FimBlocks {
    pub fn num_paths(&self) -> usize {
        self.theta_theta.nrows()
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn fim_blocks(inp: &FimInput) -> Result<FimBlocks> {
    inp.validate()?;
    let l = inp.num_paths();
    let m = inp.arr.num_antennas;
    let zeta = inp.zeta;
    let a_vecs: Vec<Vec<Complex64>> = inp.angles.iter().map(|&t| steering(t, m)).collect();
    let d_vecs: Vec<Vec<Complex64>> = inp.angles.iter().map(|&t| steering_derivative(t, m)).collect();
    let gram = |x: &[Vec<Complex64>], y: &[Vec<Complex64>]| {
        CMat::from_fn(l, l, |i, j| inner(&x[i], &y[j]))
    };
    let dd = gram(&d_vecs, &d_vecs);
    let aa = gram(&a_vecs, &a_vecs);
    let da = gram(&d_vecs, &a_vecs);
    let ad = gram(&a_vecs, &d_vecs);

    let betas: Vec<Vec<Complex64>> = inp
        .pilot_ks
        .iter()
        .map(|&k| inp.delays.iter().map(|&t| beta(k, t, &inp.ofdm)).collect())
        .collect();
    let dbetas: Vec<Vec<Complex64>> = inp
        .pilot_ks
        .iter()
        .map(|&k| inp.delays.iter().map(|&t| beta_derivative(k, t, &inp.ofdm)).collect())
        .collect();

    // S[i, j] = Σ_k conj(u_k,i) G[i, j] v_k,j
    let weighted = |u: &[Vec<Complex64>], g: &CMat, v: &[Vec<Complex64>]| {
        let mut s = CMat::zeros(l, l);
        for (uk, vk) in u.iter().zip(v) {
            for j in 0..l {
                for i in 0..l {
                    s[(i, j)] += uk[i].conj() * g[(i, j)] * vk[j];
                }
            }
        }
        s
    };
    let s_dd = weighted(&betas, &dd, &betas);
    let s_tt = weighted(&dbetas, &aa, &dbetas);
    let s_aa = weighted(&betas, &aa, &betas);
    let s_da = weighted(&betas, &da, &betas);
    let inv_gamma: Vec<f64> = inp.gamma.iter().map(|g| 1.0 / g).collect();
    let dims = (m * inp.pilot_ks.len()) as f64;

    // θ–ζ as written: diag(Re{β_kᴴ ∂Aᴴ A β_k}) Γ⁻¹, which vanishes for this array.
    let theta_zeta = CMat::from_fn(l, 1, |i, _| c(s_da[(i, i)].re * inv_gamma[i]));

    let blocks = match inp.convention {
        FimConvention::NegatedHessian => {
            let amp: Vec<f64> = inv_gamma.iter().map(|v| v.sqrt()).collect();
            let real_part = |s: &CMat| CMat::from_fn(l, l, |i, j| c(2.0 * zeta * (s[(i, j)] * amp[i] * amp[j]).re));
            let s_dt = weighted(&betas, &da, &dbetas);
            let mut alpha_alpha = s_aa * c(zeta);
            for i in 0..l {
                alpha_alpha[(i, i)] += c(inp.gamma[i]);
            }
            FimBlocks {
                theta_theta: real_part(&s_dd),
                theta_zeta,
                theta_tau: real_part(&s_dt),
                gamma_gamma: CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                    l,
                    inp.gamma.iter().map(|g| c(inp.a / (g * g))),
                )),
                zeta_zeta: (dims + inp.c - 1.0) / (zeta * zeta),
                alpha_alpha,
                zeta_tau: CMat::zeros(1, l),
                tau_tau: real_part(&s_tt),
                convention: inp.convention,
            }
        }
        FimConvention::AsPrinted => {
            let right_gamma = |s: CMat| CMat::from_fn(l, l, |i, j| s[(i, j)] * zeta * inv_gamma[j]);
            let s_td = weighted(&dbetas, &ad, &betas);
            let mut alpha_alpha = -(s_aa * c(zeta));
            for i in 0..l {
                alpha_alpha[(i, i)] -= c(inp.gamma[i]);
            }
            let zeta_tau = CMat::from_fn(1, l, |_, j| {
                let v: Complex64 = dbetas
                    .iter()
                    .zip(&betas)
                    .map(|(db, b)| db[j].conj() * aa[(j, j)] * b[j])
                    .sum();
                c(v.re * inv_gamma[j])
            });
            FimBlocks {
                theta_theta: right_gamma(s_dd),
                theta_zeta,
                theta_tau: right_gamma(s_td),
                gamma_gamma: CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                    l,
                    inv_gamma.iter().map(|ig| c(-ig + (inp.a - 1.0) * ig)),
                )),
                zeta_zeta: -dims / (zeta * zeta) + (inp.c - 1.0) / zeta,
                alpha_alpha,
                zeta_tau,
                tau_tau: right_gamma(s_tt),
                convention: inp.convention,
            }
        }
    };
    Ok(blocks)
}

/// Offsets of the θ, α, γ, ζ and τ groups for `l` paths.
pub fn layout(l: usize) -> [usize; 5] {
    [0, l, 2 * l, 3 * l, 3 * l + 1]
}

pub fn assemble_fim(b: &FimBlocks) -> Result<CMat> {
    let l = b.num_paths();
    let square = |m: &CMat| m.shape() == (l, l);
    if !(square(&b.theta_theta)
        && square(&b.theta_tau)
        && square(&b.gamma_gamma)
        && square(&b.alpha_alpha)
        && square(&b.tau_tau)
        && b.theta_zeta.shape() == (l, 1)
        && b.zeta_tau.shape() == (1, l))
    {
        return input("FIM block dimensions are inconsistent");
    }
    let [th, al, ga, ze, ta] = layout(l);
    let n = 4 * l + 1;
    let mut j = CMat::zeros(n, n);
    j.view_mut((th, th), (l, l)).copy_from(&b.theta_theta);
    j.view_mut((al, al), (l, l)).copy_from(&b.alpha_alpha);
    j.view_mut((ga, ga), (l, l)).copy_from(&b.gamma_gamma);
    j[(ze, ze)] = c(b.zeta_zeta);
    j.view_mut((ta, ta), (l, l)).copy_from(&b.tau_tau);
    j.view_mut((th, ze), (l, 1)).copy_from(&b.theta_zeta);
    j.view_mut((ze, th), (1, l)).copy_from(&b.theta_zeta.adjoint());
    j.view_mut((th, ta), (l, l)).copy_from(&b.theta_tau);
    j.view_mut((ta, th), (l, l)).copy_from(&b.theta_tau.adjoint());
    j.view_mut((ze, ta), (1, l)).copy_from(&b.zeta_tau);
    j.view_mut((ta, ze), (l, 1)).copy_from(&b.zeta_tau.adjoint());
    Ok((&j + j.adjoint()) * c(0.5))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrbResult {
    /// Diagonal of `CRB(θ)` in rad²; empty when not identifiable.
    pub crb_theta: Vec<f64>,
    /// Diagonal of `CRB(α)`; empty when not identifiable.
    pub crb_alpha: Vec<f64>,
    pub identifiable: bool,
    /// Condition numbers are taken after unit-diagonal scaling.
    /// Angle Schur complement.
    pub theta_condition: f64,
    /// Condition number of `J_αα`.
    pub alpha_condition: f64,
    /// Condition number of the `(ζ, τ)` block being eliminated.
    pub nuisance_condition: f64,
}

/// Condition number after symmetric diagonal scaling, so that parameters in
/// seconds and in precision units compare fairly.
fn finite_condition(m: &CMat) -> f64 {
    let n = m.nrows();
    let scale: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    if scale.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return f64::INFINITY;
    }
    let scaled = CMat::from_fn(n, n, |i, j| m[(i, j)] / (scale[i] * scale[j]).sqrt());
    let k = hermitian_condition(&scaled);
    if k.is_finite() { k } else { f64::INFINITY }
}

pub fn crb_theta_alpha(j: &CMat) -> Result<CrbResult> {
    let n = j.nrows();
    if n != j.ncols() || n < 5 || (n - 1) % 4 != 0 {
        return input("FIM must be square of size 4L + 1");
    }
    let l = (n - 1) / 4;
    let [th, al, _, ze, _] = layout(l);
    let j_tt = j.view((th, th), (l, l)).into_owned();
    let j_aa = j.view((al, al), (l, l)).into_owned();
    // Nuisance block over (ζ, τ), which are contiguous.
    let f = j.view((ze, ze), (l + 1, l + 1)).into_owned();
    let cross = j.view((th, ze), (l, l + 1)).into_owned();

    let nuisance_condition = finite_condition(&f);
    let alpha_condition = finite_condition(&j_aa);
    let unset = |theta_condition| CrbResult {
        crb_theta: Vec::new(),
        crb_alpha: Vec::new(),
        identifiable: false,
        theta_condition,
        alpha_condition,
        nuisance_condition,
    };
    if nuisance_condition >= MAX_CONDITION {
        return Ok(unset(f64::INFINITY));
    }
    let Some(f_inv) = f.clone().try_inverse() else {
        return Ok(unset(f64::INFINITY));
    };
    let schur = &j_tt - &cross * f_inv * cross.adjoint();
    let schur = (&schur + schur.adjoint()) * c(0.5);
    let theta_condition = finite_condition(&schur);
    if theta_condition >= MAX_CONDITION || alpha_condition >= MAX_CONDITION {
        return Ok(unset(theta_condition));
    }
    let (Some(crb_t), Some(crb_a)) = (schur.try_inverse(), j_aa.try_inverse()) else {
        return Ok(unset(theta_condition));
    };
    Ok(CrbResult {
        crb_theta: (0..l).map(|i| crb_t[(i, i)].re).collect(),
        crb_alpha: (0..l).map(|i| crb_a[(i, i)].re).collect(),
        identifiable: true,
        theta_condition,
        alpha_condition,
        nuisance_condition,
    })
}

/// Smallest eigenvalue relative to the largest magnitude one.
pub fn relative_min_eigenvalue(j: &CMat) -> f64 {
    let ev = hermitian_eigenvalues(j);
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        0.0
    } else {
        ev[0] / max
    }
}

/// Rank of the stacked dictionary at the true angles and delays.
pub fn dictionary_rank(inp: &FimInput) -> Result<usize> {
    let omega = build_omega(&inp.angles, &inp.delays, &inp.pilot_ks, &inp.arr, &inp.ofdm)?;
    Ok(rank(&omega, 1e-10))
}

/// Fisher blocks, assembly and bounds in one call.
pub fn crb(inp: &FimInput) -> Result<(FimBlocks, CMat, CrbResult)> {
    let blocks = fim_blocks(inp)?;
    let j = assemble_fim(&blocks)?;
    let res = crb_theta_alpha(&j)?;
    Ok((blocks, j, res))
}
