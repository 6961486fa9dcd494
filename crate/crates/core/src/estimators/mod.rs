//! Channel estimators: the sensing-aided SWOMP–SBL pipeline and three baselines.

mod baselines;
pub mod dictionary;
pub mod grid;
pub mod sbl;
pub mod swomp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{write_complex64, ChannelRealization, CMat};
use crate::error::{input, Error, Result};

pub use baselines::{
    ideal_sensing_ls, swomp_sbl, wideband_ls, wideband_swomp, SwompSblConfig, SwompSblOutput,
    WIDEBAND_ATOMS,
};
pub use dictionary::{build_delay_dictionary, reconstruct_channel, AtomMetadata, StackedDictionary};
pub use grid::{build_angle_grid, AngleGrid};
pub use sbl::{sbl_em, sbl_em_dense, Hyperpriors, SblOptions, SblPosterior, ZetaRate};
pub use swomp::{swomp_select, SwompOptions, SwompResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    SwompSbl,
    IdealLs,
    WbLs,
    WbSwomp,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::SwompSbl,
        EstimatorKind::IdealLs,
        EstimatorKind::WbLs,
        EstimatorKind::WbSwomp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::SwompSbl => "swomp-sbl",
            EstimatorKind::IdealLs => "ideal-ls",
            EstimatorKind::WbLs => "wb-ls",
            EstimatorKind::WbSwomp => "wb-swomp",
        }
    }

    /// Whether the estimator sees every subcarrier rather than the pilot comb.
    pub fn is_wideband(self) -> bool {
        matches!(self, EstimatorKind::WbLs | EstimatorKind::WbSwomp)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown estimator `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// `M × K`; column `k` is `ĥ[k]`.
    pub h_hat: CMat,
    pub estimator: EstimatorKind,
    pub elapsed_secs: f64,
}

impl ChannelEstimate {
    pub fn write_dump<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        write_complex64(&self.h_hat, w)
    }
}

/// `Σ_k ‖ĥ_k − h_k‖² / Σ_k ‖h_k‖²`.
pub fn nmse(est: &ChannelEstimate, truth: &ChannelRealization) -> Result<f64> {
    nmse_matrix(&est.h_hat, &truth.freq_response)
}

pub fn nmse_matrix(est: &CMat, truth: &CMat) -> Result<f64> {
    if est.shape() != truth.shape() {
        return input(format!(
            "estimate is {:?} but the channel is {:?}",
            est.shape(),
            truth.shape()
        ));
    }
    let energy = truth.norm_squared();
    if energy == 0.0 {
        return input("NMSE is undefined for an all-zero channel");
    }
    Ok((est - truth).norm_squared() / energy)
}
