//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DVector, Dyn};
use num_complex::Complex64;

use crate::channel::CMat;
use crate::error::{Error, Result};

pub type CVec = DVector<Complex64>;

/// Cholesky factor of a Hermitian positive-definite matrix. If the plain
/// factorization fails, retries once with `jitter_scale · trace/n` added to
/// the diagonal.
pub fn hermitian_cholesky(mat: &CMat, jitter_scale: f64) -> Result<Cholesky<Complex64, Dyn>> {
    if let Some(ch) = factor(mat.clone()) {
        return Ok(ch);
    }
    let n = mat.nrows().max(1) as f64;
    let jitter = jitter_scale * mat.trace().re.abs() / n;
    let mut shifted = mat.clone();
    for i in 0..mat.nrows() {
        shifted[(i, i)] += Complex64::new(jitter, 0.0);
    }
    factor(shifted).ok_or_else(|| {
        Error::Numeric(format!(
            "Hermitian factorization failed even with diagonal jitter {jitter:e}"
        ))
    })
}

/// Complex square roots let a plain factorization "succeed" on indefinite
/// input, so the pivots are checked explicitly.
fn factor(mat: CMat) -> Option<Cholesky<Complex64, Dyn>> {
    let ch = Cholesky::new(mat)?;
    let l = ch.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() < d.re
    });
    ok.then_some(ch)
}

pub fn cholesky_logdet(ch: &Cholesky<Complex64, Dyn>) -> f64 {
    let l = ch.l_dirty();
    (0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum()
}

/// Moore–Penrose pseudo-inverse; singular values below `rtol · σ_max` are dropped.
pub fn pseudo_inverse(a: &CMat, rtol: f64) -> CMat {
    if a.is_empty() {
        return CMat::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = rtol * smax;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut out = CMat::zeros(a.ncols(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let vi = v_t.row(i).adjoint();
            let ui = u.column(i).adjoint();
            out += (vi * ui) * Complex64::new(1.0 / s, 0.0);
        }
    }
    out
}

/// Orthonormal basis of the column space, with the same rank rule as
/// [`pseudo_inverse`].
pub fn orthonormal_basis(a: &CMat, rtol: f64) -> CMat {
    if a.is_empty() {
        return CMat::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let smax = svd.singular_values.max();
    let u = svd.u.as_ref().expect("u requested");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rtol * smax && s > 0.0)
        .map(|(i, _)| i)
        .collect();
    u.select_columns(keep.iter())
}

/// Numerical rank by singular values relative to the largest.
pub fn rank(a: &CMat, rtol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let s = a.clone().singular_values();
    let smax = s.max();
    s.iter().filter(|&&v| v > rtol * smax && v > 0.0).count()
}

/// Eigenvalues of a Hermitian matrix (ascending).
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let sym = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// `|λ|_max / |λ|_min` of a Hermitian matrix; infinite when singular.
pub fn hermitian_condition(a: &CMat) -> f64 {
    let ev = hermitian_eigenvalues(a);
    let abs: Vec<f64> = ev.iter().map(|v| v.abs()).collect();
    let max = abs.iter().copied().fold(0.0, f64::max);
    let min = abs.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}
