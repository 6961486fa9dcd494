//! Two-dimensional scatterer geometry and the radar-side sensing report.
//!
//! The gNB sits at the origin with its ULA along the x axis, so the
//! angle of arrival of a ray is its polar angle: broadside is `π/2` and the
//! array can only see the upper half plane `(0, π)`. Path index 0 is always
//! the line-of-sight path; communication path `ℓ ≥ 1` is the reflection off
//! scatterer `active_set[ℓ - 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Minimum distance between any scatterer and the gNB or UE (meters).
pub const MIN_CLEARANCE: f64 = 1.0;

/// Reported angles are kept this far away from the array endfire directions.
pub const ANGLE_MARGIN: f64 = 1e-9;

const PLACEMENT_ATTEMPTS: usize = 100;

/// Radicand values down to this (in s²) are treated as rounding noise.
const RADICAND_SLACK: f64 = -1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Polar angle seen from the origin.
    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

/// Axis-aligned rectangle, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn distance_to(&self, p: &Point) -> f64 {
        let dx = (self.x_min - p.x).max(0.0).max(p.x - self.x_max);
        let dy = (self.y_min - p.y).max(0.0).max(p.y - self.y_max);
        dx.hypot(dy)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let x = self.x_min + (self.x_max - self.x_min) * rng.random::<f64>();
        let y = self.y_min + (self.y_max - self.y_min) * rng.random::<f64>();
        Point::new(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainModel {
    /// i.i.d. `CN(0, 1)` path gains.
    #[default]
    UnitComplexGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
pub struct SceneConfig {
    /// `L_r`, scatterers visible to the radar.
    pub num_scatterers: usize,
    /// `L_c`, scatterers that also shape the communication channel.
    pub num_active: usize,
    /// gNB-to-UE distance in meters.
    pub ue_distance: f64,
    /// Direction of the UE seen from the gNB, radians in `(0, π)`.
    pub ue_angle: f64,
    pub scatter_region: Rect,
    #[serde(default)]
    pub gain_model: GainModel,
    /// Bistatic delays at or beyond this value (seconds) are resampled.
    pub max_delay: f64,
    /// Seed for standalone generation via [`SceneConfig::rng`]. Sweeps derive
    /// their per-trial streams from the sweep's master seed instead.
    #[serde(default)]
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            num_scatterers: 10,
            num_active: 6,
            ue_distance: 30.0,
            ue_angle: PI / 2.0,
            scatter_region: Rect {
                x_min: -15.0,
                x_max: 15.0,
                y_min: 5.0,
                y_max: 25.0,
            },
            gain_model: GainModel::UnitComplexGaussian,
            max_delay: 34.0 / 30.72e6,
            seed: 7,
        }
    }
}

impl SceneConfig {
    pub fn rng(&self) -> rand_chacha::ChaCha8Rng {
        rand::SeedableRng::seed_from_u64(self.seed)
    }

    pub fn ue_position(&self) -> Point {
        Point::new(
            self.ue_distance * self.ue_angle.cos(),
            self.ue_distance * self.ue_angle.sin(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_scatterers == 0 || self.num_active == 0 {
            return config("scatterer counts must be positive");
        }
        if self.num_active > self.num_scatterers {
            return config(format!(
                "num_active ({}) exceeds num_scatterers ({})",
                self.num_active, self.num_scatterers
            ));
        }
        if !(self.ue_distance > 0.0) {
            return config("ue_distance must be positive");
        }
        if !(self.ue_angle > 0.0 && self.ue_angle < PI) {
            return config("ue_angle must lie in (0, pi)");
        }
        if !(self.max_delay > 0.0) {
            return config("max_delay must be positive");
        }
        let r = &self.scatter_region;
        if !(r.x_max > r.x_min && r.y_max > r.y_min) {
            return config("scatter region too small to place scatterers");
        }
        if r.y_min <= 0.0 {
            return config("scatter region must lie in the half plane y > 0 seen by the array");
        }
        let gnb = Point::new(0.0, 0.0);
        if r.distance_to(&gnb) < MIN_CLEARANCE {
            return config("scatter region must keep 1 m clearance from the gNB");
        }
        if r.distance_to(&self.ue_position()) < MIN_CLEARANCE {
            return config("scatter region must keep 1 m clearance from the UE");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub gnb_position: Point,
    pub ue_position: Point,
    pub scatterers: Vec<Point>,
    /// Zero-based indices into `scatterers`, increasing.
    pub active_set: Vec<usize>,
    /// `gains[0]` is the LoS gain, `gains[i + 1]` belongs to `active_set[i]`.
    pub gains: Vec<Complex64>,
    pub speed_of_light: f64,
}

/// Ground-truth parameters of one propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    pub gain: Complex64,
    /// Seconds.
    pub delay: f64,
    /// Radians in `(0, π)`.
    pub aoa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingEntry {
    /// Perturbed monostatic round-trip delay, seconds.
    pub round_trip_delay: f64,
    /// Perturbed angle, radians in `(0, π)`.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingReport {
    pub los_delay: f64,
    pub los_aoa: f64,
    /// One entry per scatterer, active or not, in scatterer order.
    pub entries: Vec<SensingEntry>,
    pub sigma_theta: f64,
    pub sigma_tau: f64,
}

impl SensingReport {
    /// Angles indexed by sensing path: LoS first, then every scatterer.
    pub fn angles(&self) -> Vec<f64> {
        std::iter::once(self.los_aoa)
            .chain(self.entries.iter().map(|e| e.angle))
            .collect()
    }

    /// Communication-delay estimates per sensing path, LoS first.
    pub fn translated_delays(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.entries.len() + 1);
        out.push(self.los_delay);
        for e in &self.entries {
            out.push(translate_delay(
                e.round_trip_delay,
                e.angle,
                self.los_delay,
                self.los_aoa,
            )?);
        }
        Ok(out)
    }

    pub fn num_paths(&self) -> usize {
        self.entries.len() + 1
    }
}

pub fn clamp_angle(theta: f64) -> f64 {
    theta.clamp(ANGLE_MARGIN, PI - ANGLE_MARGIN)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn generate_scene<R: Rng + ?Sized>(cfg: &SceneConfig, rng: &mut R) -> Result<Scene> {
    cfg.validate()?;
    let gnb = Point::new(0.0, 0.0);
    let ue = cfg.ue_position();
    let c = SPEED_OF_LIGHT;

    let mut scatterers = Vec::with_capacity(cfg.num_scatterers);
    for i in 0..cfg.num_scatterers {
        let mut placed = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let s = cfg.scatter_region.sample(rng);
            let clear = s.distance(&gnb) >= MIN_CLEARANCE && s.distance(&ue) >= MIN_CLEARANCE;
            let delay = (s.norm() + s.distance(&ue)) / c;
            if clear && delay < cfg.max_delay {
                placed = Some(s);
                break;
            }
        }
        match placed {
            Some(s) => scatterers.push(s),
            None => {
                return Err(Error::Config(format!(
                    "could not place scatterer {i} within the delay bound after \
                     {PLACEMENT_ATTEMPTS} attempts"
                )))
            }
        }
    }
    if ue.norm() / c >= cfg.max_delay {
        return config("line-of-sight delay exceeds max_delay");
    }

    let mut active_set =
        rand::seq::index::sample(rng, cfg.num_scatterers, cfg.num_active).into_vec();
    active_set.sort_unstable();

    let gains = match cfg.gain_model {
        GainModel::UnitComplexGaussian => (0..=cfg.num_active)
            .map(|_| complex_gaussian(rng, 1.0))
            .collect(),
    };

    Ok(Scene {
        gnb_position: gnb,
        ue_position: ue,
        scatterers,
        active_set,
        gains,
        speed_of_light: c,
    })
}

impl Scene {
    fn relative(&self, p: &Point) -> Point {
        Point::new(p.x - self.gnb_position.x, p.y - self.gnb_position.y)
    }

    pub fn los_delay(&self) -> f64 {
        self.ue_position.distance(&self.gnb_position) / self.speed_of_light
    }

    pub fn los_aoa(&self) -> f64 {
        clamp_angle(self.relative(&self.ue_position).angle())
    }

    /// Bistatic gNB → scatterer → UE delay.
    pub fn bistatic_delay(&self, s: &Point) -> f64 {
        (s.distance(&self.gnb_position) + s.distance(&self.ue_position)) / self.speed_of_light
    }

    pub fn true_path_params(&self) -> Vec<PathParams> {
        let mut paths = Vec::with_capacity(self.active_set.len() + 1);
        paths.push(PathParams {
            gain: self.gains[0],
            delay: self.los_delay(),
            aoa: self.los_aoa(),
        });
        for (i, &idx) in self.active_set.iter().enumerate() {
            let s = &self.scatterers[idx];
            paths.push(PathParams {
                gain: self.gains[i + 1],
                delay: self.bistatic_delay(s),
                aoa: clamp_angle(self.relative(s).angle()),
            });
        }
        paths
    }

    /// Radar report with i.i.d. Gaussian delay and angle errors on every scatterer.
    pub fn sense<R: Rng + ?Sized>(
        &self,
        sigma_theta: f64,
        sigma_tau: f64,
        rng: &mut R,
    ) -> Result<SensingReport> {
        if !(sigma_theta >= 0.0 && sigma_tau >= 0.0) {
            return crate::error::input("sensing standard deviations must be non-negative");
        }
        let entries = self
            .scatterers
            .iter()
            .map(|s| {
                let rel = self.relative(s);
                let e_tau: f64 = rng.sample(StandardNormal);
                let e_theta: f64 = rng.sample(StandardNormal);
                let round_trip = 2.0 * rel.norm() / self.speed_of_light + sigma_tau * e_tau;
                SensingEntry {
                    round_trip_delay: round_trip.max(0.0),
                    angle: clamp_angle(rel.angle() + sigma_theta * e_theta),
                }
            })
            .collect();
        Ok(SensingReport {
            los_delay: self.los_delay(),
            los_aoa: self.los_aoa(),
            entries,
            sigma_theta,
            sigma_tau,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Bistatic communication delay of a scatterer from its monostatic radar
/// round-trip delay, via the law of cosines on the gNB–scatterer–UE triangle.
pub fn translate_delay(tau_rad: f64, theta: f64, tau_los: f64, theta_los: f64) -> Result<f64> {
    if !(tau_rad >= 0.0) {
        return crate::error::input("round-trip delay must be non-negative");
    }
    if !(tau_los > 0.0) {
        return crate::error::input("line-of-sight delay must be positive");
    }
    let half = tau_rad / 2.0;
    let radicand = tau_los * tau_los + half * half - tau_los * tau_rad * (theta - theta_los).cos();
    let radicand = if radicand < 0.0 {
        if radicand < RADICAND_SLACK {
            return Err(Error::Numeric(format!(
                "negative law-of-cosines radicand {radicand:e} s^2"
            )));
        }
        0.0
    } else {
        radicand
    };
    Ok(half + radicand.sqrt())
}
