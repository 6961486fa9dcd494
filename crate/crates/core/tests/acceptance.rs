//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run a subset with `cargo test --test acceptance -- 1 8`.

use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use mwse::channel::{
    beta, build_omega, steering, synthesize_channel, ArrayConfig, CMat, ChannelRealization,
    OfdmConfig,
};
use mwse::crb::{assemble_fim, crb, fim_blocks, relative_min_eigenvalue, FimConvention, FimInput};
use mwse::estimators::sbl::sbl_em_dense;
use mwse::estimators::swomp::simultaneous_omp;
use mwse::estimators::{nmse, swomp_sbl, EstimatorKind, SblOptions, SwompSblConfig};
use mwse::frontend::{comb_pattern, noise_var_for_snr, observe};
use mwse::harness::{self, aggregate, cell_seed, mean_nmse, OutputConfig, SweepConfig};
use mwse::linalg::pseudo_inverse;
use mwse::scene::{generate_scene, PathParams, SceneConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn cn<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / 2f64.sqrt()
}

fn randn<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cn(rng))
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Worst DFT-consistency and Parseval errors seen so far.
#[derive(Default)]
struct ChannelChecks {
    count: usize,
    dft: f64,
    parseval: f64,
}

impl ChannelChecks {
    fn check(&mut self, ch: &ChannelRealization) {
        let energy = ch.energy();
        let dft = (&ch.dft_of_taps() - &ch.freq_response).norm() / energy.sqrt();
        let taps = ch.tap_response.norm_squared() * ch.num_subcarriers() as f64;
        self.dft = self.dft.max(dft);
        self.parseval = self.parseval.max((energy - taps).abs() / energy);
        self.count += 1;
    }
}

fn pipeline_exactness(checks: &mut ChannelChecks) -> Outcome {
    let start = Instant::now();
    let arr = ArrayConfig::default();
    let ofdm = OfdmConfig::default();
    let pattern = comb_pattern(ofdm.fft_size, 16, 0).unwrap();
    let est = SwompSblConfig::default();
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let scene = generate_scene(&SceneConfig::default(), &mut rng).unwrap();
        let ch = synthesize_channel(&scene.true_path_params(), &arr, &ofdm).unwrap();
        checks.check(&ch);
        let report = scene.sense(0.0, 0.0, &mut rng).unwrap();
        let obs = observe(&ch, &pattern, 0.0, &mut rng).unwrap();
        let e = match swomp_sbl(&obs, &report, &arr, &ofdm, &est).and_then(|o| nmse(&o.estimate, &ch)) {
            Ok(e) => e,
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(e);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-6 && secs < 30.0,
        format!("worst NMSE {worst:.2e} over 20 scenes (limit 1e-6), {secs:.1} s (limit 30 s)"),
    )
}

fn sweep_ordering(checks: &mut ChannelChecks) -> (Outcome, Outcome) {
    let cfg = SweepConfig::default();
    let start = Instant::now();
    let rows = harness::run_sweep(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    for (s, &snr) in cfg.snr_db.iter().enumerate() {
        for t in 0..cfg.trials {
            checks.check(&harness::trial_data(&cfg, snr, cell_seed(cfg.seed, s, t)).unwrap().channel);
        }
    }
    let aggs = aggregate(&rows);
    let failures: usize = aggs.iter().map(|a| a.failures).sum();

    let mut ordering = true;
    let mut margin_10 = f64::NAN;
    let mut table = Vec::new();
    let mut ideal_violations = Vec::new();
    for &snr in &cfg.snr_db {
        let get = |k| mean_nmse(&aggs, snr, k).unwrap_or(f64::NAN);
        let sbl = get(EstimatorKind::SwompSbl);
        let ideal = get(EstimatorKind::IdealLs);
        let wbls = get(EstimatorKind::WbLs);
        let wbsw = get(EstimatorKind::WbSwomp);
        table.push(format!(
            "{snr:>5} dB: swomp-sbl {:.2} ideal-ls {:.2} wb-ls {:.2} wb-swomp {:.2}",
            db(sbl),
            db(ideal),
            db(wbls),
            db(wbsw)
        ));
        if snr >= 0.0 && !(sbl < wbls && sbl < wbsw) {
            ordering = false;
        }
        if snr == 10.0 {
            margin_10 = db(wbls.min(wbsw)) - db(sbl);
        }
        if !(ideal <= sbl) {
            ideal_violations.push(snr);
        }
    }
    for line in &table {
        println!("        {line}");
    }
    let fig = outcome(
        ordering && margin_10 >= 3.0 && secs < 1800.0 && failures == 0,
        format!(
            "ordering at SNR >= 0 dB {}, margin at 10 dB {margin_10:.2} dB (limit 3 dB), {failures} failed rows, {:.1} min (limit 30)",
            if ordering { "holds" } else { "violated" },
            secs / 60.0
        ),
    );
    let floor = outcome(
        ideal_violations.len() <= 1,
        format!("ideal-ls above swomp-sbl at {} SNR points {ideal_violations:?} (at most one allowed)", ideal_violations.len()),
    );
    (fig, floor)
}

fn pilot_overhead() -> Outcome {
    let cfg = SweepConfig::default();
    let p = cfg.pattern().unwrap();
    let o = cfg.pilot_overhead().unwrap();
    outcome(
        o == 0.0625 && p.len() == 16,
        format!("{}/{} pilots, overhead {:.2}%", p.len(), cfg.ofdm.fft_size, 100.0 * o),
    )
}

fn sbl_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (m, n) = (64, 20);
    let opts = SblOptions {
        record_history: true,
        full_covariance: true,
        ..Default::default()
    };
    let mut close = 0;
    let mut worst_woodbury = 0.0f64;
    for _ in 0..100 {
        let phi = randn(&mut rng, m, n) / c((m as f64).sqrt());
        let mut support: Vec<usize> = (0..n).collect();
        for i in 0..3 {
            let j = rng.random_range(i..n);
            support.swap(i, j);
        }
        support.truncate(3);
        support.sort();
        let mut alpha = DVector::<Complex64>::zeros(n);
        for &i in &support {
            alpha[i] = cn(&mut rng);
        }
        let clean = &phi * &alpha;
        let sigma2 = clean.norm_squared() / m as f64 / 1e3;
        let noise = DVector::from_fn(m, |_, _| cn(&mut rng) * sigma2.sqrt());
        let y = clean + noise;
        let post = sbl_em_dense(&phi, &y, sigma2, &opts).unwrap();

        let sub = phi.select_columns(support.iter());
        let ls = pseudo_inverse(&sub, 1e-12) * &y;
        let est = DVector::from_iterator(3, support.iter().map(|&i| post.mean[i]));
        if (&est - &ls).norm() <= 0.05 * ls.norm() {
            close += 1;
        }
        for it in &post.history {
            let mut direct = phi.adjoint() * &phi * c(it.zeta);
            for i in 0..n {
                direct[(i, i)] += c(it.gamma[i]);
            }
            let inv = direct.clone().try_inverse().unwrap();
            let cov = it.covariance.as_ref().unwrap();
            worst_woodbury = worst_woodbury.max((cov - &inv).norm() / inv.norm());
        }
    }
    outcome(
        close >= 95 && worst_woodbury < 1e-8,
        format!("{close}/100 within 5% of oracle LS (need 95), worst Woodbury residual {worst_woodbury:.1e} (limit 1e-8)"),
    )
}

fn swomp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (m, p) = (64, 4);
    let mut matched = 0;
    for _ in 0..200 {
        let n = rng.random_range(4..=20);
        let k = rng.random_range(1..=2);
        let atoms = randn(&mut rng, m, n) / c((m as f64).sqrt());
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            idx.swap(i, j);
        }
        let coeff = randn(&mut rng, k, p);
        let y = atoms.select_columns(idx[..k].iter()) * coeff;

        let residual = |s: &[usize]| {
            let a = atoms.select_columns(s.iter());
            (&y - &a * (pseudo_inverse(&a, 1e-12) * &y)).norm_squared()
        };
        let mut best: (f64, Vec<usize>) = (f64::INFINITY, Vec::new());
        for i in 0..n {
            if k == 1 {
                let r = residual(&[i]);
                if r < best.0 {
                    best = (r, vec![i]);
                }
            } else {
                for j in i + 1..n {
                    let r = residual(&[i, j]);
                    if r < best.0 {
                        best = (r, vec![i, j]);
                    }
                }
            }
        }
        let out = simultaneous_omp(&y, &atoms, 0.0, 1.0, n).unwrap();
        let mut got = out.support.clone();
        got.sort();
        if got == best.1 {
            matched += 1;
        }
    }
    outcome(matched == 200, format!("{matched}/200 supports equal the exhaustive optimum"))
}

fn em_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    let mut steps = 0;
    // Dense random problems.
    for _ in 0..25 {
        let rows = rng.random_range(20..60);
        let cols = rng.random_range(5..40);
        let phi = randn(&mut rng, rows, cols);
        let mut alpha = DVector::<Complex64>::zeros(cols);
        for _ in 0..3 {
            alpha[rng.random_range(0..cols)] = cn(&mut rng);
        }
        let sigma2 = 10f64.powf(rng.random_range(-3.0..0.0));
        let y = &phi * &alpha + DVector::from_fn(rows, |_, _| cn(&mut rng) * sigma2.sqrt());
        let post = sbl_em_dense(&phi, &y, sigma2, &SblOptions::default()).unwrap();
        for w in post.log_evidence.windows(2) {
            worst = worst.max(w[0] - w[1]);
            steps += 1;
        }
    }
    // Compressed pipeline problems on random scenes.
    let cfg = SweepConfig::default();
    for t in 0..25 {
        let data = harness::trial_data(&cfg, 10.0, cell_seed(77, 0, t)).unwrap();
        let out = swomp_sbl(&data.pilots, &data.report, &cfg.array, &cfg.ofdm, &cfg.estimator).unwrap();
        for w in out.posterior.log_evidence.windows(2) {
            worst = worst.max(w[0] - w[1]);
            steps += 1;
        }
    }
    outcome(
        worst <= 1e-9,
        format!("largest decrease {worst:.1e} over {steps} steps on 50 problems (limit 1e-9)"),
    )
}

struct FdCheck {
    theta: f64,
    tau: f64,
    theta_tau: f64,
    alpha: f64,
    zeta: f64,
}

/// Negated Hessians by central differences of the noiseless Gaussian
/// log-density, with real positive gains `γ^{-1/2}`.
fn finite_difference(inp: &FimInput) -> FdCheck {
    let l = inp.num_paths();
    let m = inp.arr.num_antennas;
    let ts = inp.ofdm.sample_period;
    let h = 1e-6;
    let amp: Vec<f64> = inp.gamma.iter().map(|g| g.powf(-0.5)).collect();
    let truth = build_omega(&inp.angles, &inp.delays, &inp.pilot_ks, &inp.arr, &inp.ofdm).unwrap()
        * DVector::from_iterator(l, amp.iter().map(|&a| c(a)));
    // x = [θ (rad), τ (samples)]
    let loglik = |x: &[f64]| {
        let angles = &x[..l];
        let delays: Vec<f64> = x[l..].iter().map(|d| d * ts).collect();
        let mut sum = 0.0;
        for (p, &k) in inp.pilot_ks.iter().enumerate() {
            for i in 0..m {
                let mut v = truth[p * m + i];
                for j in 0..l {
                    v -= steering(angles[j], m)[i] * beta(k, delays[j], &inp.ofdm) * amp[j];
                }
                sum += v.norm_sqr();
            }
        }
        -inp.zeta * sum
    };
    let x0: Vec<f64> = inp.angles.iter().copied().chain(inp.delays.iter().map(|d| d / ts)).collect();
    let n = 2 * l;
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let at = |si: f64, sj: f64| {
                let mut x = x0.clone();
                x[i] += si * h;
                x[j] += sj * h;
                loglik(&x)
            };
            hess[i][j] = -(at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
        }
    }
    let blocks = fim_blocks(inp).unwrap();
    let rel = |fd: &dyn Fn(usize, usize) -> f64, an: &CMat| {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..l {
            for j in 0..l {
                num += (fd(i, j) - an[(i, j)].re).powi(2);
                den += an[(i, j)].norm_sqr();
            }
        }
        (num / den).sqrt()
    };
    let theta = rel(&|i, j| hess[i][j], &blocks.theta_theta);
    let tau = rel(&|i, j| hess[l + i][l + j] / (ts * ts), &blocks.tau_tau);
    // The cross block can vanish exactly, so scale it by its diagonal neighbours.
    let theta_tau = {
        let num: f64 = (0..l)
            .flat_map(|i| (0..l).map(move |j| (i, j)))
            .map(|(i, j)| (hess[i][l + j] / ts - blocks.theta_tau[(i, j)].re).powi(2))
            .sum();
        num.sqrt() / (blocks.theta_theta.norm() * blocks.tau_tau.norm()).sqrt()
    };

    // Wirtinger Hessian of the negated log-density in α, noiseless y.
    let omega = build_omega(&inp.angles, &inp.delays, &inp.pilot_ks, &inp.arr, &inp.ofdm).unwrap();
    let a0: Vec<Complex64> = amp.iter().map(|&a| c(a)).collect();
    let neg = |alpha: &[Complex64]| {
        let diff = &truth - &omega * DVector::from_column_slice(alpha);
        inp.zeta * diff.norm_squared()
            + alpha.iter().zip(&inp.gamma).map(|(a, g)| g * a.norm_sqr()).sum::<f64>()
    };
    let dir = |idx: usize| {
        let (i, imag) = (idx / 2, idx % 2 == 1);
        move |v: &mut Vec<Complex64>, s: f64| {
            v[i] += if imag { Complex64::new(0.0, s) } else { c(s) };
        }
    };
    let second = |p: usize, q: usize| {
        let (dp, dq) = (dir(p), dir(q));
        let at = |sp: f64, sq: f64| {
            let mut v = a0.clone();
            dp(&mut v, sp * h);
            dq(&mut v, sq * h);
            neg(&v)
        };
        (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
    };
    let mut fd_alpha = CMat::zeros(l, l);
    for i in 0..l {
        for j in 0..l {
            let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
            fd_alpha[(i, j)] = Complex64::new(
                second(xi, xj) + second(yi, yj),
                second(yi, xj) - second(xi, yj),
            ) / 4.0;
        }
    }
    let alpha = (&fd_alpha - &blocks.alpha_alpha).norm() / blocks.alpha_alpha.norm();

    // ζ: D ln ζ − ζ E‖n‖² + (c − 1) ln ζ with the expected noise energy D/ζ₀.
    let d = (m * inp.pilot_ks.len()) as f64;
    let z0 = inp.zeta;
    let lz = |z: f64| (d + inp.c - 1.0) * z.ln() - z * d / z0;
    // A logarithm needs a wider step than 1e-6 to beat rounding.
    let hz = 1e-4 * z0;
    let fd_zeta = -(lz(z0 + hz) - 2.0 * lz(z0) + lz(z0 - hz)) / (hz * hz);
    let zeta = (fd_zeta - blocks.zeta_zeta).abs() / blocks.zeta_zeta;
    FdCheck {
        theta,
        tau,
        theta_tau,
        alpha,
        zeta,
    }
}

fn random_fim_input<R: Rng>(rng: &mut R, paths: usize) -> FimInput {
    let ofdm = OfdmConfig::default();
    let mut angles: Vec<f64> = Vec::new();
    while angles.len() < paths {
        let t = rng.random_range(0.4..2.7);
        if angles.iter().all(|a: &f64| (a - t).abs() > 0.2) {
            angles.push(t);
        }
    }
    FimInput {
        delays: (0..paths).map(|_| rng.random_range(1.0..20.0) * ofdm.sample_period).collect(),
        gamma: (0..paths).map(|_| rng.random_range(0.5..2.0)).collect(),
        zeta: rng.random_range(1.0..10.0),
        a: 1.0,
        c: 1.0,
        pilot_ks: (0..16).map(|i| 16 * i).collect(),
        arr: ArrayConfig { num_antennas: 8 },
        ofdm,
        angles,
        convention: FimConvention::NegatedHessian,
    }
}

/// Dense-grid maximum likelihood over `(θ, τ)` with an unknown complex gain,
/// refined on successively finer grids around the running optimum.
fn ml_angle(y: &CMat, pilot_ks: &[usize], ofdm: &OfdmConfig, theta0: f64, tau0: f64) -> f64 {
    let m = y.nrows();
    let ts = ofdm.sample_period;
    let score = |theta: f64, tau: f64| {
        let a = steering(theta, m);
        let mut num = Complex64::new(0.0, 0.0);
        for (p, &k) in pilot_ks.iter().enumerate() {
            let ay: Complex64 = a.iter().zip(y.column(p).iter()).map(|(x, v)| x.conj() * v).sum();
            num += beta(k, tau, ofdm).conj() * ay;
        }
        let energy: f64 = pilot_ks.iter().map(|&k| beta(k, tau, ofdm).norm_sqr()).sum::<f64>() * m as f64;
        num.norm_sqr() / energy
    };
    let (mut tc, mut dc) = (theta0, tau0 / ts);
    let (mut span_t, mut span_d) = (5f64.to_radians(), 0.5);
    for _ in 0..5 {
        let steps = 20;
        let mut best = (f64::MIN, tc, dc);
        for i in -steps..=steps {
            let t = tc + span_t * i as f64 / steps as f64;
            for j in -steps..=steps {
                let d = dc + span_d * j as f64 / steps as f64;
                let s = score(t, d * ts);
                if s > best.0 {
                    best = (s, t, d);
                }
            }
        }
        (tc, dc) = (best.1, best.2);
        span_t /= 8.0;
        span_d /= 8.0;
    }
    tc
}

fn crb_validity(checks: &mut ChannelChecks) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst_fd = 0.0f64;
    let mut worst_eig = f64::INFINITY;
    for i in 0..20 {
        let inp = random_fim_input(&mut rng, 1 + i % 2);
        let fd = finite_difference(&inp);
        worst_fd = worst_fd.max(fd.theta).max(fd.tau).max(fd.theta_tau).max(fd.alpha).max(fd.zeta);
        let j = assemble_fim(&fim_blocks(&inp).unwrap()).unwrap();
        worst_eig = worst_eig.min(relative_min_eigenvalue(&j));
    }
    let cfg = SweepConfig::default();
    for row in harness::crb_rows(
        &SweepConfig {
            snr_db: vec![10.0],
            trials: 20,
            ..cfg.clone()
        },
        FimConvention::NegatedHessian,
    )
    .unwrap()
    {
        assert!(!row.identifiable || row.crb_theta >= 0.0);
    }

    // Single path at 20 dB, only the noise varies across trials.
    let arr = ArrayConfig { num_antennas: 16 };
    let ofdm = OfdmConfig::default();
    let pattern = comb_pattern(ofdm.fft_size, 16, 0).unwrap();
    let path = PathParams {
        gain: Complex64::from_polar(1.0, 0.4),
        delay: 3.3 * ofdm.sample_period,
        aoa: 1.1,
    };
    let ch = synthesize_channel(&[path], &arr, &ofdm).unwrap();
    checks.check(&ch);
    let sigma2 = noise_var_for_snr(&ch, 20.0).unwrap();
    let inp = FimInput {
        angles: vec![path.aoa],
        delays: vec![path.delay],
        gamma: vec![1.0 / (path.gain.norm_sqr() * arr.num_antennas as f64)],
        zeta: 1.0 / sigma2,
        a: 1.0,
        c: 1.0,
        pilot_ks: pattern.indices.clone(),
        arr,
        ofdm,
        convention: FimConvention::NegatedHessian,
    };
    let (_, _, bound) = crb(&inp).unwrap();
    let bound = bound.crb_theta[0];
    let mut mse = 0.0;
    for _ in 0..500 {
        let obs = observe(&ch, &pattern, sigma2, &mut rng).unwrap();
        let est = ml_angle(&obs.y, &pattern.indices, &ofdm, path.aoa, path.delay);
        mse += (est - path.aoa).powi(2) / 500.0;
    }
    outcome(
        worst_fd < 1e-4 && worst_eig >= -1e-9 && mse >= bound,
        format!(
            "worst FD mismatch {worst_fd:.1e} (limit 1e-4), min eigenvalue/λmax {worst_eig:.1e}, ML MSE {mse:.3e} vs CRB {bound:.3e} rad²"
        ),
    )
}

fn numerical_model(checks: &mut ChannelChecks) -> Outcome {
    let cfg = SweepConfig::default();
    let mut total = 0.0;
    for t in 0..200 {
        let seed = cell_seed(909, 0, t);
        checks.check(&harness::trial_data(&cfg, 0.0, seed).unwrap().channel);
        let row = harness::run_trial_seeded(&cfg, 0.0, t, seed, &[EstimatorKind::WbLs]).unwrap();
        total += row[0].nmse;
    }
    let mean = total / 200.0;
    outcome(
        checks.dft < 1e-10 && checks.parseval < 1e-8 && (mean - 1.0).abs() <= 0.1,
        format!(
            "{} channels: worst DFT error {:.1e} (limit 1e-10), Parseval {:.1e} (limit 1e-8); wb-ls NMSE at 0 dB {mean:.4} (1 ± 10%)",
            checks.count, checks.dft, checks.parseval
        ),
    )
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let run = |workers: usize| {
        let dir = tmp.path().join(format!("w{workers}"));
        let cfg = SweepConfig {
            snr_db: vec![0.0, 10.0],
            trials: 3,
            workers: Some(workers),
            output: OutputConfig {
                dir,
                svg: false,
                timing: false,
            },
            ..SweepConfig::default()
        };
        let out = harness::sweep(&cfg).unwrap();
        std::fs::read(out.rows_path).unwrap()
    };
    let (a, b) = (run(1), run(3));
    outcome(
        a == b && !a.is_empty(),
        format!("{} bytes with 1 and 3 workers, identical: {}", a.len(), a == b),
    )
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let on = |id: u32| wanted.is_empty() || wanted.contains(&id);
    let mut checks = ChannelChecks::default();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let report = |id: u32, name: &'static str, o: Outcome, results: &mut Vec<(u32, &str, Outcome)>| {
        println!("[{}] {id} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    if on(1) {
        let o = pipeline_exactness(&mut checks);
        report(1, "pipeline exactness", o, &mut results);
    }
    if on(2) || on(3) {
        let (fig, floor) = sweep_ordering(&mut checks);
        report(2, "NMSE ordering against wideband baselines", fig, &mut results);
        report(3, "ideal-sensing floor", floor, &mut results);
    }
    if on(4) {
        report(4, "pilot overhead", pilot_overhead(), &mut results);
    }
    if on(5) {
        report(5, "SBL oracle equivalence", sbl_oracle(), &mut results);
    }
    if on(6) {
        report(6, "SWOMP oracle equivalence", swomp_oracle(), &mut results);
    }
    if on(7) {
        report(7, "EM monotonicity", em_monotonicity(), &mut results);
    }
    if on(8) {
        let o = crb_validity(&mut checks);
        report(8, "CRB validity", o, &mut results);
    }
    if on(9) {
        let o = numerical_model(&mut checks);
        report(9, "numerical model checks", o, &mut results);
    }
    if on(10) {
        report(10, "determinism", determinism(), &mut results);
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed < results.len() {
        std::process::exit(1);
    }
}
