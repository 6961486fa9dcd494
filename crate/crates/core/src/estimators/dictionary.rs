use num_complex::Complex64;

use super::grid::window;
use super::swomp::SwompResult;
use crate::channel::{beta, steering, twiddle, ArrayConfig, CMat, OfdmConfig};
use crate::error::{input, Result};
use crate::scene::SensingReport;

/// Angle and delay of every dictionary column, path-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomMetadata {
    pub angles: Vec<f64>,
    pub delays: Vec<f64>,
}

impl AtomMetadata {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedDictionary {
    /// `MP × d_τ L′`, pilot blocks stacked.
    pub omega_hat: CMat,
    /// `P × d_τ L′`: `β_{k_p}(τ)` of every column.
    pub pilot_betas: CMat,
    pub columns: AtomMetadata,
    /// One angle per selected path.
    pub path_angles: Vec<f64>,
    pub delay_grids: Vec<Vec<f64>>,
    pub points_per_path: usize,
    pub pilot_ks: Vec<usize>,
}

impl StackedDictionary {
    pub fn num_paths(&self) -> usize {
        self.path_angles.len()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }
}

/// Delay dictionary around the translated delay of every selected angle.
pub fn build_delay_dictionary(
    swomp: &SwompResult,
    report: &SensingReport,
    delay_points: usize,
    pilot_ks: &[usize],
    arr: &ArrayConfig,
    cfg: &OfdmConfig,
) -> Result<StackedDictionary> {
    if swomp.num_selected() == 0 {
        return input("no angles were selected");
    }
    if delay_points == 0 {
        return input("delay grid needs at least one point");
    }
    if pilot_ks.is_empty() {
        return input("no pilot subcarriers");
    }
    let centers = report.translated_delays()?;
    let m = arr.num_antennas;
    let p = pilot_ks.len();

    let mut delay_grids = Vec::with_capacity(swomp.num_selected());
    let mut angles = Vec::new();
    let mut delays = Vec::new();
    for (&theta, &chi) in swomp.selected_angles.iter().zip(&swomp.path_indices) {
        let center = *centers
            .get(chi)
            .ok_or_else(|| crate::error::Error::Input(format!("sensing path {chi} out of range")))?;
        let grid: Vec<f64> = if delay_points == 1 {
            vec![center]
        } else {
            window(center, report.sigma_tau, delay_points)
        }
        .into_iter()
        .map(|t| t.max(0.0))
        .collect();
        angles.extend(std::iter::repeat_n(theta, grid.len()));
        delays.extend_from_slice(&grid);
        delay_grids.push(grid);
    }
    let points_per_path = delay_grids[0].len();

    let n = angles.len();
    let pilot_betas = CMat::from_fn(p, n, |row, col| beta(pilot_ks[row], delays[col], cfg));
    let mut omega_hat = CMat::zeros(m * p, n);
    for col in 0..n {
        let a = steering(angles[col], m);
        for row in 0..p {
            let b = pilot_betas[(row, col)];
            for i in 0..m {
                omega_hat[(row * m + i, col)] = a[i] * b;
            }
        }
    }

    Ok(StackedDictionary {
        omega_hat,
        pilot_betas,
        columns: AtomMetadata { angles, delays },
        path_angles: swomp.selected_angles.clone(),
        delay_grids,
        points_per_path,
        pilot_ks: pilot_ks.to_vec(),
    })
}

/// `ĥ_k = Ψ_k α` on all `K` subcarriers, as an `M × K` matrix.
///
/// Columns sharing an angle are folded into one delay-domain tap profile
/// before the DFT.
pub fn reconstruct_channel(
    meta: &AtomMetadata,
    alpha: &[Complex64],
    arr: &ArrayConfig,
    cfg: &OfdmConfig,
) -> Result<CMat> {
    if alpha.len() != meta.len() {
        return input(format!(
            "{} coefficients for {} dictionary columns",
            alpha.len(),
            meta.len()
        ));
    }
    let m = arr.num_antennas;
    let k_total = cfg.fft_size;
    let ts = cfg.sample_period;
    let table: Vec<Complex64> = (0..k_total).map(|r| twiddle(r, 1, k_total)).collect();
    let mut h = CMat::zeros(m, k_total);

    let mut start = 0;
    while start < meta.len() {
        let theta = meta.angles[start];
        let mut end = start + 1;
        while end < meta.len() && meta.angles[end].to_bits() == theta.to_bits() {
            end += 1;
        }
        let mut taps = vec![Complex64::new(0.0, 0.0); cfg.num_taps];
        for c in start..end {
            if alpha[c] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (d, tap) in taps.iter_mut().enumerate() {
                *tap += alpha[c] * cfg.pulse.value(d as f64 * ts - meta.delays[c], ts);
            }
        }
        if taps.iter().any(|t| *t != Complex64::new(0.0, 0.0)) {
            let a = steering(theta, m);
            for k in 0..k_total {
                let s: Complex64 = taps
                    .iter()
                    .enumerate()
                    .map(|(d, t)| t * table[(k * d) % k_total])
                    .sum();
                for i in 0..m {
                    h[(i, k)] += a[i] * s;
                }
            }
        }
        start = end;
    }
    Ok(h)
}
