use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dictionary::{build_delay_dictionary, reconstruct_channel, AtomMetadata, StackedDictionary};
use super::grid::{build_angle_grid, steering_matrix, uniform_angles};
use super::sbl::{sbl_em, SblOptions, SblPosterior};
use super::swomp::{simultaneous_omp, swomp_select, SwompOptions, SwompResult};
use super::{ChannelEstimate, EstimatorKind};
use crate::channel::{build_omega, ArrayConfig, OfdmConfig};
use crate::error::{input, Result};
use crate::frontend::PilotObservation;
use crate::linalg::pseudo_inverse;
use crate::scene::{PathParams, SensingReport};

/// Uniform angular dictionary size of the wideband pursuit baseline.
pub const WIDEBAND_ATOMS: usize = 500;

const PINV_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwompSblConfig {
    pub angle_points: usize,
    pub delay_points: usize,
    pub swomp: SwompOptions,
    pub sbl: SblOptions,
}

impl Default for SwompSblConfig {
    fn default() -> Self {
        Self {
            angle_points: 500,
            delay_points: 50,
            swomp: SwompOptions::default(),
            sbl: SblOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SwompSblOutput {
    pub estimate: ChannelEstimate,
    pub swomp: SwompResult,
    pub dictionary: StackedDictionary,
    pub posterior: SblPosterior,
}

/// Sensing-aided two-stage estimate from the pilot comb.
pub fn swomp_sbl(
    obs: &PilotObservation,
    report: &SensingReport,
    arr: &ArrayConfig,
    cfg: &OfdmConfig,
    est: &SwompSblConfig,
) -> Result<SwompSblOutput> {
    let start = Instant::now();
    let grid = build_angle_grid(report, est.angle_points)?;
    let swomp = swomp_select(obs, &grid, &est.swomp)?;
    if swomp.num_selected() == 0 {
        return input("observation is identically zero; nothing to estimate");
    }
    let dictionary = build_delay_dictionary(
        &swomp,
        report,
        est.delay_points,
        &obs.pattern.indices,
        arr,
        cfg,
    )?;
    let posterior = sbl_em(obs, &dictionary, &est.sbl)?;
    let alpha: Vec<Complex64> = posterior.mean.iter().copied().collect();
    let h_hat = reconstruct_channel(&dictionary.columns, &alpha, arr, cfg)?;
    Ok(SwompSblOutput {
        estimate: ChannelEstimate {
            h_hat,
            estimator: EstimatorKind::SwompSbl,
            elapsed_secs: start.elapsed().as_secs_f64(),
        },
        swomp,
        dictionary,
        posterior,
    })
}

/// Least squares on the dictionary of the true angles and delays.
pub fn ideal_sensing_ls(
    obs: &PilotObservation,
    paths: &[PathParams],
    arr: &ArrayConfig,
    cfg: &OfdmConfig,
) -> Result<ChannelEstimate> {
    let start = Instant::now();
    if paths.len() > obs.y.len() {
        return input("more paths than observations");
    }
    let meta = AtomMetadata {
        angles: paths.iter().map(|p| p.aoa).collect(),
        delays: paths.iter().map(|p| p.delay).collect(),
    };
    let omega = build_omega(&meta.angles, &meta.delays, &obs.pattern.indices, arr, cfg)?;
    let alpha = pseudo_inverse(&omega, PINV_RTOL) * obs.stacked();
    let alpha: Vec<Complex64> = alpha.iter().copied().collect();
    let h_hat = reconstruct_channel(&meta, &alpha, arr, cfg)?;
    Ok(ChannelEstimate {
        h_hat,
        estimator: EstimatorKind::IdealLs,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

fn require_full(obs: &PilotObservation, cfg: &OfdmConfig) -> Result<()> {
    let full = obs.pattern.len() == cfg.fft_size
        && obs.pattern.indices.iter().enumerate().all(|(i, &k)| i == k);
    if !full {
        return input("wideband estimators need an observation on every subcarrier");
    }
    Ok(())
}

/// Per-subcarrier least squares, which is the observation itself.
pub fn wideband_ls(obs: &PilotObservation, cfg: &OfdmConfig) -> Result<ChannelEstimate> {
    let start = Instant::now();
    require_full(obs, cfg)?;
    Ok(ChannelEstimate {
        h_hat: obs.y.clone(),
        estimator: EstimatorKind::WbLs,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Pursuit on a uniform angle grid over all subcarriers, then per-subcarrier
/// least squares on the selected steering vectors.
pub fn wideband_swomp(
    obs: &PilotObservation,
    cfg: &OfdmConfig,
    num_atoms: usize,
    opts: &SwompOptions,
    default_cap: usize,
) -> Result<ChannelEstimate> {
    let start = Instant::now();
    require_full(obs, cfg)?;
    let m = obs.num_antennas();
    let atoms = steering_matrix(&uniform_angles(num_atoms), m);
    let cap = opts.max_atoms.unwrap_or(default_cap);
    let pursuit = simultaneous_omp(&obs.y, &atoms, obs.noise_var, opts.stop_factor, cap)?;
    let selected = atoms.select_columns(pursuit.support.iter());
    let h_hat = &selected * &pursuit.coefficients;
    Ok(ChannelEstimate {
        h_hat,
        estimator: EstimatorKind::WbSwomp,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}
