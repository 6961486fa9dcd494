//! SRS comb scheduling, SNR calibration and noisy pilot observations.

use std::io::{Read, Write};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{read_complex64, write_complex64, ChannelRealization, CMat};
use crate::error::{input, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PilotPattern {
    pub comb_size: usize,
    pub offset: usize,
    pub indices: Vec<usize>,
}

impl PilotPattern {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Fraction of the `fft_size` subcarriers spent on pilots.
    pub fn overhead(&self, fft_size: usize) -> f64 {
        self.indices.len() as f64 / fft_size as f64
    }
}

/// Pilots on subcarriers `offset, offset + K_c, ...` below `K`.
pub fn comb_pattern(fft_size: usize, comb_size: usize, offset: usize) -> Result<PilotPattern> {
    if comb_size == 0 || comb_size > fft_size {
        return input(format!("comb size {comb_size} must lie in [1, {fft_size}]"));
    }
    if offset >= comb_size {
        return input(format!("comb offset {offset} must be below the comb size {comb_size}"));
    }
    let indices = (offset..fft_size).step_by(comb_size).collect();
    Ok(PilotPattern {
        comb_size,
        offset,
        indices,
    })
}

/// Per-antenna noise variance for a target average SNR.
///
/// SNR is the mean per-subcarrier channel energy over all `K` subcarriers
/// divided by the total noise energy `M σ²`, so that per-subcarrier least
/// squares on the observation scores an NMSE of exactly `1/SNR` on average.
pub fn noise_var_for_snr(ch: &ChannelRealization, snr_db: f64) -> Result<f64> {
    let k = ch.num_subcarriers() as f64;
    let m = ch.num_antennas() as f64;
    let mean_energy = ch.energy() / k;
    if !(mean_energy > 0.0) {
        return input("cannot calibrate noise against an all-zero channel");
    }
    Ok(mean_energy / m / 10f64.powf(snr_db / 10.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservation {
    /// `M × P`; column `p` is `y[pattern.indices[p]]`.
    pub y: CMat,
    pub pattern: PilotPattern,
    pub noise_var: f64,
}

#[derive(Serialize, Deserialize)]
struct DumpHeader {
    num_antennas: usize,
    noise_var: f64,
    pattern: PilotPattern,
}

impl PilotObservation {
    /// `y` as one `MP` vector, pilot blocks in pattern order.
    pub fn stacked(&self) -> DVector<Complex64> {
        DVector::from_column_slice(self.y.as_slice())
    }

    pub fn from_stacked(
        stacked: &DVector<Complex64>,
        num_antennas: usize,
        pattern: PilotPattern,
        noise_var: f64,
    ) -> Result<Self> {
        if num_antennas == 0 || stacked.len() != num_antennas * pattern.len() {
            return input("stacked length does not match antennas × pilots");
        }
        Ok(Self {
            y: CMat::from_column_slice(num_antennas, pattern.len(), stacked.as_slice()),
            pattern,
            noise_var,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.y.nrows()
    }

    /// Keep only the subcarriers of `pattern`, which must all be observed here.
    pub fn restrict(&self, pattern: &PilotPattern) -> Result<PilotObservation> {
        let mut cols = Vec::with_capacity(pattern.len());
        for &k in &pattern.indices {
            match self.pattern.indices.binary_search(&k) {
                Ok(pos) => cols.push(pos),
                Err(_) => return input(format!("subcarrier {k} was not observed")),
            }
        }
        let y = self.y.select_columns(cols.iter());
        Ok(PilotObservation {
            y,
            pattern: pattern.clone(),
            noise_var: self.noise_var,
        })
    }

    /// One JSON header line, then the samples as complex64 pairs.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> Result<()> {
        let header = DumpHeader {
            num_antennas: self.num_antennas(),
            noise_var: self.noise_var,
            pattern: self.pattern.clone(),
        };
        serde_json::to_writer(&mut *w, &header)?;
        w.write_all(b"\n")?;
        write_complex64(&self.y, w)
    }

    pub fn read_dump<R: Read>(r: &mut R) -> Result<Self> {
        let mut line = Vec::new();
        let mut byte = [0u8; 1];
        loop {
            r.read_exact(&mut byte)?;
            if byte[0] == b'\n' {
                break;
            }
            line.push(byte[0]);
        }
        let header: DumpHeader = serde_json::from_slice(&line).map_err(Error::Json)?;
        let y = read_complex64(r, header.num_antennas, header.pattern.len())?;
        Ok(Self {
            y,
            pattern: header.pattern,
            noise_var: header.noise_var,
        })
    }
}

/// `y[k] = h[k] + n[k]` with `n[k] ~ CN(0, σ² I_M)` on the pattern subcarriers.
pub fn observe<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    pattern: &PilotPattern,
    noise_var: f64,
    rng: &mut R,
) -> Result<PilotObservation> {
    if !(noise_var >= 0.0) {
        return input("noise variance must be non-negative");
    }
    if pattern.indices.iter().any(|&k| k >= ch.num_subcarriers()) {
        return input("pilot index beyond the channel's subcarriers");
    }
    let m = ch.num_antennas();
    let s = (noise_var / 2.0).sqrt();
    let mut y = ch.freq_response.select_columns(pattern.indices.iter());
    for p in 0..pattern.len() {
        for i in 0..m {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if noise_var > 0.0 {
                y[(i, p)] += Complex64::new(s * re, s * im);
            }
        }
    }
    Ok(PilotObservation {
        y,
        pattern: pattern.clone(),
        noise_var,
    })
}
