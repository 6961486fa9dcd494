use std::f64::consts::PI;


use crate::channel::{steering, CMat};
use crate::error::{input, Result};
use crate::scene::{clamp_angle, SensingReport};

/// Angle atoms around every sensing path, LoS first.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    /// Flattened atom angles, path-major.
    pub angles: Vec<f64>,
    /// Sensing path each atom was generated from.
    pub path_of: Vec<usize>,
    /// Atoms per path (1 when the angle window has zero width).
    pub points_per_path: usize,
    /// Sensing angle of every path (`θ_0` followed by the reported angles).
    pub sensing_angles: Vec<f64>,
}

impl AngleGrid {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn num_paths(&self) -> usize {
        self.sensing_angles.len()
    }

    /// `A'`, one steering vector per atom.
    pub fn atoms(&self, num_antennas: usize) -> CMat {
        steering_matrix(&self.angles, num_antennas)
    }
}

pub fn steering_matrix(angles: &[f64], num_antennas: usize) -> CMat {
    let mut a = CMat::zeros(num_antennas, angles.len());
    for (j, &theta) in angles.iter().enumerate() {
        for (i, z) in steering(theta, num_antennas).into_iter().enumerate() {
            a[(i, j)] = z;
        }
    }
    a
}

/// `n` points `start, start + 4σ/n, ...` covering `[center - 2σ, center + 2σ)`.
pub(crate) fn window(center: f64, sigma: f64, n: usize) -> Vec<f64> {
    if sigma == 0.0 || n <= 1 {
        return vec![center];
    }
    let start = center - 2.0 * sigma;
    let step = 4.0 * sigma / n as f64;
    (0..n).map(|i| start + i as f64 * step).collect()
}

pub fn build_angle_grid(report: &SensingReport, points_per_path: usize) -> Result<AngleGrid> {
    if points_per_path < 2 {
        return input("angle grid needs at least 2 points per path");
    }
    let sensing_angles = report.angles();
    let mut angles = Vec::new();
    let mut path_of = Vec::new();
    let mut per_path = 0;
    for (path, &center) in sensing_angles.iter().enumerate() {
        let w = window(center, report.sigma_theta, points_per_path);
        per_path = w.len();
        path_of.extend(std::iter::repeat_n(path, w.len()));
        angles.extend(w.into_iter().map(clamp_angle));
    }
    Ok(AngleGrid {
        angles,
        path_of,
        points_per_path: per_path,
        sensing_angles,
    })
}

/// `n` atoms evenly spread over `(0, π)` at bin centers.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) * PI / n as f64).collect()
}

/// Index of the sensing angle closest to `theta`.
pub fn nearest_path(theta: f64, sensing_angles: &[f64]) -> usize {
    sensing_angles
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - theta).abs().total_cmp(&(b.1 - theta).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}
