//! Parametric wideband channel: ULA steering vectors, pulse shaping, the
//! per-subcarrier delay response `β_{k,ℓ}`, and dictionary assembly.

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, input, Result};
use crate::scene::PathParams;

pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
pub struct ArrayConfig {
    /// `M`; elements are spaced half a wavelength apart.
    pub num_antennas: usize,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { num_antennas: 32 }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 {
            return config("num_antennas must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PulseShape {
    /// Normalized sinc with zero crossings at multiples of `T_s`.
    #[default]
    Sinc,
    RaisedCosine { rolloff: f64 },
}

impl PulseShape {
    pub fn value(&self, t: f64, ts: f64) -> f64 {
        match *self {
            PulseShape::Sinc => sinc(t / ts),
            PulseShape::RaisedCosine { rolloff } => raised_cosine(t / ts, rolloff),
        }
    }

    /// `dp/dt`.
    pub fn derivative(&self, t: f64, ts: f64) -> f64 {
        match *self {
            PulseShape::Sinc => sinc_derivative(t / ts) / ts,
            PulseShape::RaisedCosine { rolloff } => {
                let h = 1e-5;
                let x = t / ts;
                (raised_cosine(x + h, rolloff) - raised_cosine(x - h, rolloff)) / (2.0 * h * ts)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
pub struct OfdmConfig {
    /// `K`.
    pub fft_size: usize,
    /// `N_c`.
    pub num_taps: usize,
    /// `T_s` in seconds.
    pub sample_period: f64,
    /// `N_cp`.
    pub cp_len: usize,
    #[serde(default)]
    pub pulse: PulseShape,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            fft_size: 256,
            num_taps: 34,
            sample_period: 1.0 / 30.72e6,
            cp_len: 34,
            pulse: PulseShape::Sinc,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_taps == 0 || self.fft_size == 0 || self.cp_len == 0 {
            return config("fft_size, num_taps and cp_len must be positive");
        }
        if !(self.num_taps <= self.cp_len && self.cp_len <= self.fft_size) {
            return config("expected num_taps <= cp_len <= fft_size");
        }
        if !(self.sample_period > 0.0) {
            return config("sample_period must be positive");
        }
        if let PulseShape::RaisedCosine { rolloff } = self.pulse {
            if !(0.0..=1.0).contains(&rolloff) {
                return config("raised-cosine rolloff must lie in [0, 1]");
            }
        }
        Ok(())
    }

    /// Largest delay representable by the tap model.
    pub fn max_delay(&self) -> f64 {
        self.num_taps as f64 * self.sample_period
    }
}

/// `sin(πx)/(πx)`, exactly zero at nonzero integers.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let n = x.round();
    let r = x - n;
    if r == 0.0 {
        return 0.0;
    }
    let sign = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
    sign * (PI * r).sin() / (PI * x)
}

/// `d/dx sinc(x)`.
pub fn sinc_derivative(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let p2 = PI * PI;
        return -p2 * x / 3.0 + p2 * p2 * x * x * x / 30.0;
    }
    let n = x.round();
    let sign = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
    let cos = sign * (PI * (x - n)).cos();
    (cos - sinc(x)) / x
}

fn raised_cosine(x: f64, rolloff: f64) -> f64 {
    if rolloff == 0.0 {
        return sinc(x);
    }
    let edge = 2.0 * rolloff * x;
    if (edge.abs() - 1.0).abs() < 1e-9 {
        return PI / 4.0 * sinc(1.0 / (2.0 * rolloff));
    }
    sinc(x) * (PI * rolloff * x).cos() / (1.0 - edge * edge)
}

/// Pulse-shaping filter used by the channel model.
pub fn pulse(t: f64, ts: f64) -> f64 {
    PulseShape::Sinc.value(t, ts)
}

/// `a(θ)`: element `m` is `exp(jπ m cos θ)`.
pub fn steering(theta: f64, m: usize) -> Vec<Complex64> {
    let phase = PI * theta.cos();
    (0..m)
        .map(|i| Complex64::from_polar(1.0, phase * i as f64))
        .collect()
}

/// `∂a(θ)/∂θ`: element `m` is `-jπ m sin θ exp(jπ m cos θ)`.
pub fn steering_derivative(theta: f64, m: usize) -> Vec<Complex64> {
    let phase = PI * theta.cos();
    let s = PI * theta.sin();
    (0..m)
        .map(|i| {
            let i = i as f64;
            Complex64::new(0.0, -s * i) * Complex64::from_polar(1.0, phase * i)
        })
        .collect()
}

/// `exp(-j2π kd/K)` with the exponent reduced modulo `K`.
pub fn twiddle(k: usize, d: usize, fft_size: usize) -> Complex64 {
    let r = (k * d) % fft_size;
    Complex64::from_polar(1.0, -2.0 * PI * r as f64 / fft_size as f64)
}

/// `β_{k}(τ) = Σ_d p(dT_s - τ) exp(-j2πkd/K)`.
pub fn beta(k: usize, tau: f64, cfg: &OfdmConfig) -> Complex64 {
    let ts = cfg.sample_period;
    (0..cfg.num_taps)
        .map(|d| twiddle(k, d, cfg.fft_size) * cfg.pulse.value(d as f64 * ts - tau, ts))
        .sum()
}

/// `∂β_k(τ)/∂τ`.
pub fn beta_derivative(k: usize, tau: f64, cfg: &OfdmConfig) -> Complex64 {
    let ts = cfg.sample_period;
    -(0..cfg.num_taps)
        .map(|d| twiddle(k, d, cfg.fft_size) * cfg.pulse.derivative(d as f64 * ts - tau, ts))
        .sum::<Complex64>()
}

/// Frequency- and delay-domain views of one channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `M × K`; column `k` is `h[k]`.
    pub freq_response: CMat,
    /// `M × N_c`; column `d` is `h_d`.
    pub tap_response: CMat,
}

impl ChannelRealization {
    pub fn num_antennas(&self) -> usize {
        self.freq_response.nrows()
    }

    pub fn num_subcarriers(&self) -> usize {
        self.freq_response.ncols()
    }

    /// K-point DFT of the tap response over the tap index.
    pub fn dft_of_taps(&self) -> CMat {
        let k_total = self.num_subcarriers();
        let m = self.num_antennas();
        let mut out = CMat::zeros(m, k_total);
        for k in 0..k_total {
            for (d, tap) in self.tap_response.column_iter().enumerate() {
                let w = twiddle(k, d, k_total);
                for i in 0..m {
                    out[(i, k)] += tap[i] * w;
                }
            }
        }
        out
    }

    pub fn energy(&self) -> f64 {
        self.freq_response.norm_squared()
    }

    pub fn write_dump<W: Write>(&self, w: &mut W) -> Result<()> {
        write_complex64(&self.freq_response, w)
    }
}

fn check_delays(delays: &[f64], cfg: &OfdmConfig) -> Result<()> {
    let bound = cfg.max_delay();
    if let Some(t) = delays.iter().find(|&&t| !(t >= 0.0 && t < bound)) {
        return input(format!("delay {t:e} s outside the tap range [0, {bound:e})"));
    }
    Ok(())
}

pub fn synthesize_channel(
    paths: &[PathParams],
    arr: &ArrayConfig,
    cfg: &OfdmConfig,
) -> Result<ChannelRealization> {
    arr.validate()?;
    cfg.validate()?;
    if paths.is_empty() {
        return input("at least one path is required");
    }
    let delays: Vec<f64> = paths.iter().map(|p| p.delay).collect();
    check_delays(&delays, cfg)?;

    let m = arr.num_antennas;
    let scale = (m as f64 / paths.len() as f64).sqrt();
    let ts = cfg.sample_period;
    let steer: Vec<Vec<Complex64>> = paths.iter().map(|p| steering(p.aoa, m)).collect();

    let mut taps = CMat::zeros(m, cfg.num_taps);
    for d in 0..cfg.num_taps {
        for (p, a) in paths.iter().zip(&steer) {
            let w = p.gain * (scale * cfg.pulse.value(d as f64 * ts - p.delay, ts));
            for i in 0..m {
                taps[(i, d)] += a[i] * w;
            }
        }
    }

    let mut freq = CMat::zeros(m, cfg.fft_size);
    for k in 0..cfg.fft_size {
        for (p, a) in paths.iter().zip(&steer) {
            let w = beta(k, p.delay, cfg) * p.gain * scale;
            for i in 0..m {
                freq[(i, k)] += a[i] * w;
            }
        }
    }

    Ok(ChannelRealization {
        freq_response: freq,
        tap_response: taps,
    })
}

/// `Ψ_k`: column `i` is `a(θ_i) β_k(τ_i)`.
pub fn build_psi(
    angles: &[f64],
    delays: &[f64],
    k: usize,
    arr: &ArrayConfig,
    cfg: &OfdmConfig,
) -> Result<CMat> {
    if angles.is_empty() || angles.len() != delays.len() {
        return input(format!(
            "need equally long non-empty angle and delay lists, got {} and {}",
            angles.len(),
            delays.len()
        ));
    }
    let m = arr.num_antennas;
    let mut psi = CMat::zeros(m, angles.len());
    for (col, (&theta, &tau)) in angles.iter().zip(delays).enumerate() {
        let a = steering(theta, m);
        let b = beta(k, tau, cfg);
        for i in 0..m {
            psi[(i, col)] = a[i] * b;
        }
    }
    Ok(psi)
}

fn check_pilots(pilot_ks: &[usize], cfg: &OfdmConfig) -> Result<()> {
    if pilot_ks.is_empty() {
        return input("pilot list is empty");
    }
    if pilot_ks.windows(2).any(|w| w[0] >= w[1]) {
        return input("pilot indices must be strictly increasing");
    }
    if pilot_ks.last().is_some_and(|&k| k >= cfg.fft_size) {
        return input("pilot index beyond fft_size");
    }
    Ok(())
}

/// `Ω`: the `Ψ_k` blocks stacked over the pilot subcarriers.
pub fn build_omega(
    angles: &[f64],
    delays: &[f64],
    pilot_ks: &[usize],
    arr: &ArrayConfig,
    cfg: &OfdmConfig,
) -> Result<CMat> {
    check_pilots(pilot_ks, cfg)?;
    let m = arr.num_antennas;
    let mut omega = CMat::zeros(m * pilot_ks.len(), angles.len());
    for (p, &k) in pilot_ks.iter().enumerate() {
        let psi = build_psi(angles, delays, k, arr, cfg)?;
        omega.view_mut((p * m, 0), (m, angles.len())).copy_from(&psi);
    }
    Ok(omega)
}

/// Column-major `M × K` matrix as little-endian `(f32 re, f32 im)` pairs,
/// one subcarrier after another.
pub fn write_complex64<W: Write>(mat: &CMat, w: &mut W) -> Result<()> {
    let mut buf = Vec::with_capacity(mat.len() * 8);
    for z in mat.iter() {
        buf.extend_from_slice(&(z.re as f32).to_le_bytes());
        buf.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_complex64<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<CMat> {
    let mut buf = vec![0u8; rows * cols * 8];
    r.read_exact(&mut buf)?;
    let vals: Vec<Complex64> = buf
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    Ok(CMat::from_vec(rows, cols, vals))
}
