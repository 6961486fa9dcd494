//! Simultaneous orthogonal matching pursuit over a shared atom set.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{nearest_path, AngleGrid};
use crate::channel::CMat;
use crate::error::{input, Result};
use crate::frontend::PilotObservation;
use crate::linalg::pseudo_inverse;

const PINV_RTOL: f64 = 1e-12;
/// Residual energy below this fraction of `‖Y‖²` counts as an exact fit.
const EXACT_FIT: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwompOptions {
    /// Stop once the mean residual power drops to `stop_factor · σ²`.
    pub stop_factor: f64,
    /// Iteration cap; `None` means one atom per sensing path.
    pub max_atoms: Option<usize>,
}

impl Default for SwompOptions {
    fn default() -> Self {
        Self {
            stop_factor: 1.0,
            max_atoms: None,
        }
    }
}

/// Support, joint least-squares coefficients and residual history of a pursuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Pursuit {
    pub support: Vec<usize>,
    /// `|support| × P`.
    pub coefficients: CMat,
    /// Residual energy after each iteration; entry 0 is `‖Y‖²`.
    pub residual_trace: Vec<f64>,
}

impl Pursuit {
    pub fn residual_energy(&self) -> f64 {
        *self.residual_trace.last().expect("trace starts with ‖Y‖²")
    }
}

/// `Σ_k |a_iᴴ r_k|²` for every atom.
fn correlations(atoms: &CMat, residual: &CMat) -> Vec<f64> {
    let (m, p) = residual.shape();
    if p > m {
        // aᴴ (R Rᴴ) a is cheaper when there are many more columns than rows.
        let gram = residual * residual.adjoint();
        atoms
            .column_iter()
            .map(|a| {
                let ga = &gram * a;
                a.iter().zip(ga.iter()).map(|(x, y)| (x.conj() * y).re).sum()
            })
            .collect()
    } else {
        let c = atoms.adjoint() * residual;
        c.row_iter()
            .map(|r| r.iter().map(Complex64::norm_sqr).sum())
            .collect()
    }
}

/// Greedy joint-sparse recovery of `y` (`M × P`) over `atoms` (`M × N`).
pub fn simultaneous_omp(
    y: &CMat,
    atoms: &CMat,
    noise_var: f64,
    stop_factor: f64,
    max_atoms: usize,
) -> Result<Pursuit> {
    if atoms.nrows() != y.nrows() {
        return input("atoms and observation differ in row count");
    }
    if atoms.ncols() == 0 || atoms.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return input("atom set is empty or all zero");
    }
    let dims = (y.nrows() * y.ncols()) as f64;
    let threshold = stop_factor * noise_var;
    let budget = max_atoms.min(atoms.ncols());

    let mut support: Vec<usize> = Vec::new();
    let mut used = vec![false; atoms.ncols()];
    let mut residual = y.clone();
    let mut coefficients = CMat::zeros(0, y.ncols());
    let mut trace = vec![y.norm_squared()];
    let exact = EXACT_FIT * trace[0];

    while support.len() < budget {
        let energy = *trace.last().unwrap();
        if energy <= exact || (!support.is_empty() && energy / dims <= threshold) {
            break;
        }
        let corr = correlations(atoms, &residual);
        let best = corr
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i);
        let Some(best) = best else { break };
        if corr[best] <= 0.0 {
            break;
        }
        used[best] = true;
        support.push(best);

        let selected = atoms.select_columns(support.iter());
        coefficients = pseudo_inverse(&selected, PINV_RTOL) * y;
        residual = y - &selected * &coefficients;
        // Guard against rounding making the projection look worse.
        trace.push(residual.norm_squared().min(energy));
    }

    Ok(Pursuit {
        support,
        coefficients,
        residual_trace: trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwompResult {
    pub selected_angles: Vec<f64>,
    pub atom_indices: Vec<usize>,
    /// Sensing path associated with every selected angle.
    pub path_indices: Vec<usize>,
    pub residual_energy: f64,
    pub residual_trace: Vec<f64>,
    pub iterations: usize,
}

impl SwompResult {
    pub fn num_selected(&self) -> usize {
        self.selected_angles.len()
    }
}

/// Angular support of the pilot observation on the sensing-aided grid.
pub fn swomp_select(
    obs: &PilotObservation,
    grid: &AngleGrid,
    opts: &SwompOptions,
) -> Result<SwompResult> {
    let atoms = grid.atoms(obs.num_antennas());
    let cap = opts.max_atoms.unwrap_or(grid.num_paths());
    let pursuit = simultaneous_omp(&obs.y, &atoms, obs.noise_var, opts.stop_factor, cap)?;
    let selected_angles: Vec<f64> = pursuit.support.iter().map(|&i| grid.angles[i]).collect();
    let path_indices = selected_angles
        .iter()
        .map(|&t| nearest_path(t, &grid.sensing_angles))
        .collect();
    Ok(SwompResult {
        iterations: pursuit.support.len(),
        residual_energy: pursuit.residual_energy(),
        selected_angles,
        atom_indices: pursuit.support,
        path_indices,
        residual_trace: pursuit.residual_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::grid::{steering_matrix, uniform_angles};

    fn columns(a: &CMat, idx: &[usize], weights: &[Complex64], p: usize) -> CMat {
        let mut y = CMat::zeros(a.nrows(), p);
        for k in 0..p {
            for (&i, &w) in idx.iter().zip(weights) {
                let phase = Complex64::from_polar(1.0, 0.7 * (k + i) as f64);
                y.set_column(k, &(y.column(k) + a.column(i) * (w * phase)));
            }
        }
        y
    }

    #[test]
    fn single_exact_atom() {
        let a = steering_matrix(&uniform_angles(64), 16);
        let mut y = CMat::zeros(16, 4);
        for k in 0..4 {
            y.set_column(k, &a.column(37));
        }
        let out = simultaneous_omp(&y, &a, 0.0, 1.0, 5).unwrap();
        assert_eq!(out.support, vec![37]);
        assert!(out.residual_energy() < 1e-20);
    }

    #[test]
    fn orthogonal_pair_matches_exhaustive_search() {
        // Angles with cos θ on the DFT grid give mutually orthogonal steering vectors.
        let m = 8;
        let angles: Vec<f64> = (1..m).map(|i| (1.0 - 2.0 * i as f64 / m as f64).acos()).collect();
        let a = steering_matrix(&angles, m);
        let y = columns(&a, &[2, 5], &[Complex64::new(1.0, 0.5), Complex64::new(-0.4, 0.9)], 3);
        let out = simultaneous_omp(&y, &a, 0.0, 1.0, 2).unwrap();
        let mut got = out.support.clone();
        got.sort();
        assert_eq!(got, vec![2, 5]);
    }

    #[test]
    fn stops_at_noise_floor() {
        let a = steering_matrix(&uniform_angles(100), 16);
        let y = columns(&a, &[10, 60], &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)], 4);
        let huge = y.norm_squared();
        let out = simultaneous_omp(&y, &a, huge, 1.0, 10).unwrap();
        assert_eq!(out.support.len(), 1, "always keeps one atom");
        let zero = simultaneous_omp(&CMat::zeros(16, 4), &a, 0.0, 1.0, 10).unwrap();
        assert!(zero.support.is_empty());
    }

    #[test]
    fn rejects_zero_atoms() {
        let y = CMat::zeros(4, 2);
        assert!(simultaneous_omp(&y, &CMat::zeros(4, 3), 0.0, 1.0, 2).is_err());
        assert!(simultaneous_omp(&y, &CMat::zeros(5, 3), 0.0, 1.0, 2).is_err());
    }

    #[test]
    fn both_correlation_paths_agree() {
        let a = steering_matrix(&uniform_angles(40), 4);
        let r = CMat::from_fn(4, 9, |i, j| Complex64::new((i * j) as f64 * 0.1 - 0.3, j as f64 - i as f64));
        let wide = correlations(&a, &r);
        let direct: Vec<f64> = (a.adjoint() * &r)
            .row_iter()
            .map(|row| row.iter().map(Complex64::norm_sqr).sum())
            .collect();
        for (x, y) in wide.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()));
        }
    }
}
