//! Monte-Carlo sweeps over SNR and trials, CSV and SVG output, replay.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{synthesize_channel, ArrayConfig, OfdmConfig};
use crate::crb::{crb, dictionary_rank, FimConvention, FimInput};
use crate::error::{config, input, Error, Result};
use crate::estimators::{
    ideal_sensing_ls, nmse, swomp_sbl, wideband_ls, wideband_swomp, ChannelEstimate,
    EstimatorKind, SwompSblConfig, WIDEBAND_ATOMS,
};
use crate::frontend::{comb_pattern, noise_var_for_snr, observe, PilotPattern};
use crate::scene::{generate_scene, SceneConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PilotConfig {
    /// `K_c`.
    pub comb_size: usize,
    pub offset: usize,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            comb_size: 16,
            offset: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingConfig {
    /// Angle error standard deviation in degrees.
    pub sigma_theta_deg: f64,
    /// Round-trip delay error standard deviation in samples.
    pub sigma_tau_samples: f64,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            sigma_theta_deg: 3.0,
            sigma_tau_samples: 1.0 / 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub svg: bool,
    /// Record wall time per row; disable for byte-reproducible CSVs.
    pub timing: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            svg: false,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub scene: SceneConfig,
    pub array: ArrayConfig,
    pub ofdm: OfdmConfig,
    pub pilots: PilotConfig,
    pub sensing: SensingConfig,
    pub estimator: SwompSblConfig,
    pub wideband_atoms: usize,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub estimators: Vec<EstimatorKind>,
    pub seed: u64,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    pub output: OutputConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            scene: SceneConfig::default(),
            array: ArrayConfig::default(),
            ofdm: OfdmConfig::default(),
            pilots: PilotConfig::default(),
            sensing: SensingConfig::default(),
            estimator: SwompSblConfig::default(),
            wideband_atoms: WIDEBAND_ATOMS,
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            trials: 100,
            estimators: EstimatorKind::ALL.to_vec(),
            seed: 2024,
            workers: None,
            output: OutputConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.array.validate()?;
        self.ofdm.validate()?;
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return config("snr_db must be a non-empty list of finite values");
        }
        if self.trials == 0 {
            return config("trials must be at least 1");
        }
        if self.estimators.is_empty() {
            return config("at least one estimator is required");
        }
        if self.workers == Some(0) {
            return config("workers must be positive");
        }
        if self.wideband_atoms == 0 {
            return config("wideband_atoms must be positive");
        }
        let s = &self.sensing;
        if !(s.sigma_theta_deg >= 0.0 && s.sigma_tau_samples >= 0.0) {
            return config("sensing standard deviations must be non-negative");
        }
        self.pattern().map(|_| ()).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn pattern(&self) -> Result<PilotPattern> {
        comb_pattern(self.ofdm.fft_size, self.pilots.comb_size, self.pilots.offset)
    }

    pub fn pilot_overhead(&self) -> Result<f64> {
        Ok(self.pattern()?.overhead(self.ofdm.fft_size))
    }

    /// SHA-256 over everything that affects row values.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = None;
        canonical.output = OutputConfig {
            timing: self.output.timing,
            ..OutputConfig::default()
        };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Seed for one `(snr, trial)` cell, derived from the master seed by counter.
pub fn cell_seed(master: u64, snr_index: usize, trial: usize) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    splitmix(splitmix(splitmix(master) ^ snr_index as u64) ^ trial as u64)
}

const SCENE_STREAM: u64 = 0;
const SENSING_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub snr_db: f64,
    pub estimator: EstimatorKind,
    pub trial: usize,
    /// `NaN` when the estimator failed.
    pub nmse: f64,
    pub seconds: f64,
    pub seed: u64,
    #[serde(skip)]
    pub error: Option<String>,
}

pub const CSV_COLUMNS: &str = "snr_db,estimator,trial,nmse,seconds,seed";

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.snr_db, self.estimator, self.trial, self.nmse, self.seconds, self.seed
        )
    }

    pub fn parse_csv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return input(format!("expected 6 CSV fields, got {}", f.len()));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Input(format!("bad {what} `{s}`")))
        };
        let int = |s: &str, what: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Input(format!("bad {what} `{s}`")))
        };
        Ok(Self {
            snr_db: num(f[0], "snr_db")?,
            estimator: f[1].parse()?,
            trial: int(f[2], "trial")? as usize,
            nmse: num(f[3], "nmse")?,
            seconds: num(f[4], "seconds")?,
            seed: int(f[5], "seed")?,
            error: None,
        })
    }
}

/// Everything one trial draws before any estimator runs.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub scene: crate::scene::Scene,
    pub paths: Vec<crate::scene::PathParams>,
    pub channel: crate::channel::ChannelRealization,
    pub report: crate::scene::SensingReport,
    /// Every subcarrier observed; the pilot view shares its noise.
    pub full: crate::frontend::PilotObservation,
    pub pilots: crate::frontend::PilotObservation,
}

pub fn trial_data(cfg: &SweepConfig, snr_db: f64, seed: u64) -> Result<TrialData> {
    let scene = generate_scene(&cfg.scene, &mut stream(seed, SCENE_STREAM))?;
    let paths = scene.true_path_params();
    let channel = synthesize_channel(&paths, &cfg.array, &cfg.ofdm)?;
    let sigma_theta = cfg.sensing.sigma_theta_deg.to_radians();
    let sigma_tau = cfg.sensing.sigma_tau_samples * cfg.ofdm.sample_period;
    let report = scene.sense(sigma_theta, sigma_tau, &mut stream(seed, SENSING_STREAM))?;
    let noise_var = noise_var_for_snr(&channel, snr_db)?;
    let full_pattern = comb_pattern(cfg.ofdm.fft_size, 1, 0)?;
    let full = observe(&channel, &full_pattern, noise_var, &mut stream(seed, NOISE_STREAM))?;
    let pilots = full.restrict(&cfg.pattern()?)?;
    Ok(TrialData {
        scene,
        paths,
        channel,
        report,
        full,
        pilots,
    })
}

/// One trial from an explicit cell seed.
pub fn run_trial_seeded(
    cfg: &SweepConfig,
    snr_db: f64,
    trial: usize,
    seed: u64,
    estimators: &[EstimatorKind],
) -> Result<Vec<ResultRow>> {
    let TrialData {
        paths,
        channel: ch,
        report,
        full,
        pilots,
        ..
    } = trial_data(cfg, snr_db, seed)?;

    let rows = estimators
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let est: Result<ChannelEstimate> = match kind {
                EstimatorKind::SwompSbl => {
                    swomp_sbl(&pilots, &report, &cfg.array, &cfg.ofdm, &cfg.estimator).map(|o| o.estimate)
                }
                EstimatorKind::IdealLs => ideal_sensing_ls(&pilots, &paths, &cfg.array, &cfg.ofdm),
                EstimatorKind::WbLs => wideband_ls(&full, &cfg.ofdm),
                EstimatorKind::WbSwomp => wideband_swomp(
                    &full,
                    &cfg.ofdm,
                    cfg.wideband_atoms,
                    &cfg.estimator.swomp,
                    report.num_paths(),
                ),
            };
            let seconds = if cfg.output.timing { start.elapsed().as_secs_f64() } else { 0.0 };
            let (value, error) = match est.and_then(|e| nmse(&e, &ch)) {
                Ok(v) => (v, None),
                Err(e) => {
                    log::warn!("{kind} failed at snr {snr_db} dB, trial {trial}: {e}");
                    (f64::NAN, Some(e.to_string()))
                }
            };
            ResultRow {
                snr_db,
                estimator: kind,
                trial,
                nmse: value,
                seconds,
                seed,
                error,
            }
        })
        .collect();
    Ok(rows)
}

pub fn run_trial(cfg: &SweepConfig, snr_index: usize, trial: usize) -> Result<Vec<ResultRow>> {
    let snr_db = *cfg
        .snr_db
        .get(snr_index)
        .ok_or_else(|| Error::Input(format!("snr index {snr_index} out of range")))?;
    let seed = cell_seed(cfg.seed, snr_index, trial);
    run_trial_seeded(cfg, snr_db, trial, seed, &cfg.estimators)
}

/// Rows for every `(snr, trial)` cell, in grid order regardless of scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..cfg.snr_db.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let work = || -> Result<Vec<Vec<ResultRow>>> {
        cells.par_iter().map(|&(s, t)| run_trial(cfg, s, t)).collect()
    };
    let nested = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(nested.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub snr_db: f64,
    pub estimator: EstimatorKind,
    /// Rows with a finite NMSE.
    pub count: usize,
    pub failures: usize,
    pub mean_nmse: f64,
    pub std_error: f64,
    pub mean_seconds: f64,
}

impl Aggregate {
    pub fn mean_db(&self) -> f64 {
        10.0 * self.mean_nmse.log10()
    }
}

/// Mean and standard error of the NMSE per `(snr, estimator)`, ordered by SNR.
pub fn aggregate(rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(u64, EstimatorKind), (f64, Vec<&ResultRow>)> = BTreeMap::new();
    for r in rows {
        // Total order on SNR that is valid for finite values of either sign.
        let bits = r.snr_db.to_bits();
        let key = if r.snr_db.is_sign_negative() { !bits } else { bits | (1 << 63) };
        groups.entry((key, r.estimator)).or_insert((r.snr_db, Vec::new())).1.push(r);
    }
    groups
        .into_iter()
        .map(|((_, estimator), (snr_db, group))| {
            let ok: Vec<f64> = group.iter().map(|r| r.nmse).filter(|v| v.is_finite()).collect();
            let n = ok.len();
            let mean = if n > 0 { ok.iter().sum::<f64>() / n as f64 } else { f64::NAN };
            let std_error = if n > 1 {
                let var = ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                f64::NAN
            };
            Aggregate {
                snr_db,
                estimator,
                count: n,
                failures: group.len() - n,
                mean_nmse: mean,
                std_error,
                mean_seconds: group.iter().map(|r| r.seconds).sum::<f64>() / group.len() as f64,
            }
        })
        .collect()
}

pub fn mean_nmse(aggregates: &[Aggregate], snr_db: f64, kind: EstimatorKind) -> Option<f64> {
    aggregates
        .iter()
        .find(|a| a.snr_db == snr_db && a.estimator == kind)
        .map(|a| a.mean_nmse)
}

pub fn header_line(cfg: &SweepConfig) -> String {
    format!("# config-sha256={}", cfg.hash())
}

pub fn write_rows<W: Write>(cfg: &SweepConfig, rows: &[ResultRow], w: &mut W) -> Result<()> {
    writeln!(w, "{}", header_line(cfg))?;
    writeln!(w, "{CSV_COLUMNS}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    Ok(())
}

pub fn write_aggregates<W: Write>(cfg: &SweepConfig, aggs: &[Aggregate], w: &mut W) -> Result<()> {
    writeln!(w, "{}", header_line(cfg))?;
    writeln!(w, "snr_db,estimator,count,failures,mean_nmse,std_error,mean_nmse_db,mean_seconds")?;
    for a in aggs {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            a.snr_db,
            a.estimator,
            a.count,
            a.failures,
            a.mean_nmse,
            a.std_error,
            a.mean_db(),
            a.mean_seconds
        )?;
    }
    Ok(())
}

/// NMSE (dB) against SNR (dB), one polyline per estimator.
pub fn render_svg(aggs: &[Aggregate]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    const COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];

    let pts: Vec<(f64, f64)> = aggs
        .iter()
        .filter(|a| a.mean_nmse > 0.0 && a.mean_nmse.is_finite())
        .map(|a| (a.snr_db, a.mean_db()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    y0 = (y0 / 5.0).floor() * 5.0;
    y1 = ((y1 / 5.0).ceil() * 5.0).max(y0 + 5.0);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let mut y = y0;
    while y <= y1 + 1e-9 {
        let _ = writeln!(s, r##"<line x1="{PAD}" x2="{}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##, W - PAD, sy(y), sy(y));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{y}</text>"#, PAD - 6.0, sy(y) + 4.0);
        y += 5.0;
    }
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{x}</text>"#, sx(x), H - PAD + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">SNR (dB)</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">NMSE (dB)</text>"#, H / 2.0, H / 2.0);

    for (i, kind) in EstimatorKind::ALL.iter().enumerate() {
        let line: Vec<String> = aggs
            .iter()
            .filter(|a| a.estimator == *kind && a.mean_nmse > 0.0 && a.mean_nmse.is_finite())
            .map(|a| format!("{:.1},{:.1}", sx(a.snr_db), sy(a.mean_db())))
            .collect();
        if line.is_empty() {
            continue;
        }
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, line.join(" "));
        let ly = PAD + 16.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, W - PAD - 110.0, W - PAD - 90.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{kind}</text>"#, W - PAD - 85.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<Aggregate>,
    pub rows_path: PathBuf,
    pub aggregate_path: PathBuf,
    pub svg_path: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Runs the sweep and writes `rows.csv`, `summary.csv` and optionally `nmse.svg`.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let rows_path = dir.join("rows.csv");
    let aggregate_path = dir.join("summary.csv");
    let svg_path = cfg.output.svg.then(|| dir.join("nmse.svg"));
    // Open every output before the first trial so bad paths fail fast.
    let mut rows_w = create(&rows_path)?;
    let mut agg_w = create(&aggregate_path)?;
    let mut svg_w = svg_path.as_deref().map(create).transpose()?;

    log::info!(
        "sweep: {} SNR points x {} trials, pilot overhead {:.2}%",
        cfg.snr_db.len(),
        cfg.trials,
        100.0 * cfg.pilot_overhead()?
    );
    let rows = run_sweep(cfg)?;
    let aggregates = aggregate(&rows);
    write_rows(cfg, &rows, &mut rows_w)?;
    rows_w.flush()?;
    write_aggregates(cfg, &aggregates, &mut agg_w)?;
    agg_w.flush()?;
    if let Some(w) = svg_w.as_mut() {
        w.write_all(render_svg(&aggregates).as_bytes())?;
        w.flush()?;
    }
    Ok(SweepOutput {
        rows,
        aggregates,
        rows_path,
        aggregate_path,
        svg_path,
    })
}

/// Re-runs the trial behind one row-level CSV line.
pub fn replay(cfg: &SweepConfig, line: &str) -> Result<ResultRow> {
    let row = ResultRow::parse_csv(line)?;
    let mut out = run_trial_seeded(cfg, row.snr_db, row.trial, row.seed, &[row.estimator])?;
    Ok(out.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrbRow {
    pub scenario: String,
    pub snr_db: f64,
    pub trial: usize,
    pub path: usize,
    pub crb_theta: f64,
    pub crb_alpha: f64,
    pub identifiable: bool,
    pub theta_condition: f64,
    pub alpha_condition: f64,
    pub dictionary_rank: usize,
}

pub const CRB_COLUMNS: &str =
    "scenario,snr_db,trial,path,crb_theta,crb_alpha,identifiable,theta_condition,alpha_condition,dictionary_rank";

impl CrbRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.snr_db,
            self.trial,
            self.path,
            self.crb_theta,
            self.crb_alpha,
            self.identifiable,
            self.theta_condition,
            self.alpha_condition,
            self.dictionary_rank
        )
    }
}

/// Bounds at the true path parameters of every sweep cell, with the true
/// gains and noise level as plug-in precisions.
pub fn crb_rows(cfg: &SweepConfig, convention: FimConvention) -> Result<Vec<CrbRow>> {
    cfg.validate()?;
    let pattern = cfg.pattern()?;
    let mut rows = Vec::new();
    for (s, &snr_db) in cfg.snr_db.iter().enumerate() {
        for trial in 0..cfg.trials {
            let seed = cell_seed(cfg.seed, s, trial);
            let scene = generate_scene(&cfg.scene, &mut stream(seed, SCENE_STREAM))?;
            let paths = scene.true_path_params();
            let ch = synthesize_channel(&paths, &cfg.array, &cfg.ofdm)?;
            let noise_var = noise_var_for_snr(&ch, snr_db)?;
            let scale = (cfg.array.num_antennas as f64 / paths.len() as f64).sqrt();
            let inp = FimInput {
                angles: paths.iter().map(|p| p.aoa).collect(),
                delays: paths.iter().map(|p| p.delay).collect(),
                gamma: paths
                    .iter()
                    .map(|p| 1.0 / (p.gain * scale).norm_sqr().max(f64::MIN_POSITIVE))
                    .collect(),
                zeta: 1.0 / noise_var,
                a: cfg.estimator.sbl.hyper.a,
                c: cfg.estimator.sbl.hyper.c,
                pilot_ks: pattern.indices.clone(),
                arr: cfg.array,
                ofdm: cfg.ofdm,
                convention,
            };
            let (_, _, res) = crb(&inp)?;
            let rank = dictionary_rank(&inp)?;
            for path in 0..paths.len() {
                rows.push(CrbRow {
                    scenario: format!("s{s}t{trial}"),
                    snr_db,
                    trial,
                    path,
                    crb_theta: res.crb_theta.get(path).copied().unwrap_or(f64::NAN),
                    crb_alpha: res.crb_alpha.get(path).copied().unwrap_or(f64::NAN),
                    identifiable: res.identifiable,
                    theta_condition: res.theta_condition,
                    alpha_condition: res.alpha_condition,
                    dictionary_rank: rank,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_crb<W: Write>(cfg: &SweepConfig, rows: &[CrbRow], w: &mut W) -> Result<()> {
    writeln!(w, "{}", header_line(cfg))?;
    writeln!(w, "{CRB_COLUMNS}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    Ok(())
}

/// Parses `a:b:step` into an inclusive grid.
pub fn parse_snr_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Input(format!("bad SNR range `{spec}`")))?;
    match parts.as_slice() {
        [v] => Ok(vec![*v]),
        [a, b, step] if *step > 0.0 && b >= a => {
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + step * i as f64).collect())
        }
        _ => input(format!("expected `a:b:step` with step > 0 and b >= a, got `{spec}`")),
    }
}
