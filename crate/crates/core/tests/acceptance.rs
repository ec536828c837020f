use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use psp_cvqkd::channel::{
    add_excess_noise, apply_channel, fading_noise, sample_channel, transmittance_histogram,
    ChannelRealization, TurbulenceModel,
};
use psp_cvqkd::harness::config::TurbulenceSection;
use psp_cvqkd::harness::pipeline::{analyze_frame, calibrate, simulate, RunOptions};
use psp_cvqkd::harness::report::frames_csv;
use psp_cvqkd::harness::ExperimentConfig;
use psp_cvqkd::optics::{
    apply_attenuator, apply_beam_splitter, g2_zero, heterodyne_measure, intensities,
    sample_thermal_quadratures, sample_thermal_with, DetectorParams, QuadraturePair,
    ThermalSourceConfig,
};
use psp_cvqkd::receiver::{bob_detect, extract_pilot, BasebandTrace, PilotFilter};
use psp_cvqkd::rng::{seeded, SeedTree, Stream};
use psp_cvqkd::security::{
    holevo_bound, key_rate, symplectic_eigenvalues, total_key_rate, Ablation, KeyRateBin,
    SecurityConfig,
};
use psp_cvqkd::stats::{from_db, mean, pearson, slope, to_db, variance};
use psp_cvqkd::transmitter::{
    alice_station, effective_modulation_variance, epsilon_psp, optimal_estimator_alpha,
    TransmitterParams,
};
use psp_cvqkd::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn reference_transmitter(v_a: f64) -> TransmitterParams {
    TransmitterParams {
        eta0: 0.0299,
        eta1: 0.01,
        eta3: 0.01,
        alice_det: DetectorParams::new(0.56, 0.34).unwrap(),
        n0: v_a / 0.0299,
        beacon_amplitude: 1e4,
    }
}

fn reference_security(trusted: bool) -> SecurityConfig {
    SecurityConfig {
        beta: 0.96,
        fer: 0.3,
        f_m_hz: 20e9,
        detector_trusted: trusted,
        bob_det: DetectorParams::new(0.56, 0.38).unwrap(),
    }
}

fn epsilon_psp_oracle() -> Result<Outcome> {
    let start = Instant::now();
    let mut draws = seeded(101);
    let n = 1_000_000;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let eta0 = draws.random_range(0.01..1.0);
        let v_a = draws.random_range(0.5..10.0);
        let params = TransmitterParams {
            eta0,
            eta1: draws.random_range(0.0..1.0),
            eta3: draws.random_range(0.0..1.0),
            alice_det: DetectorParams::new(
                draws.random_range(0.3..1.0),
                draws.random_range(0.0..0.5),
            )?,
            n0: v_a / eta0,
            beacon_amplitude: 0.0,
        };
        let alpha = optimal_estimator_alpha(&params)?;
        let out = alice_station(&params, n, &mut seeded(1000 + i))?;
        let r2: Vec<f64> = out
            .channel_bound
            .iter()
            .zip(&out.alice_measured)
            .flat_map(|(x1, x2)| {
                let r = *x1 - *x2 * alpha;
                [r.x * r.x, r.p * r.p]
            })
            .collect();
        let mc = mean(&r2) - 1.0;
        let se = (variance(&r2) / r2.len() as f64).sqrt();
        let closed = epsilon_psp(&params, v_a)?;
        worst = worst.max((mc - closed).abs() / se);
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        worst < 3.0 && elapsed < Duration::from_secs(60),
        format!(
            "max |MC - closed| = {worst:.2} SE over 50 draws, {:.1} s",
            elapsed.as_secs_f64()
        ),
    ))
}

fn epsilon_psp_operating_point() -> Result<Outcome> {
    let eps = epsilon_psp(&reference_transmitter(2.973), 2.973)?;
    Ok(Outcome::new(
        (5e-4..=5e-3).contains(&eps),
        format!("eps_psp = {eps:.6} SNU at V_A = 2.973"),
    ))
}

fn fading() -> Result<Outcome> {
    let two = fading_noise(&[0.25, 0.01], 3.0)?;
    let model = TurbulenceModel::LogNormal {
        mean_db: -3.0,
        sigma_db: 2.0,
    };
    let mut rng = seeded(303);
    let mut worst: f64 = 0.0;
    for profile in 0..5 {
        let n = 1_000_000;
        let t: Vec<f64> = (0..n)
            .map(|_| from_db(model.sample_level_db(&mut rng)).min(1.0))
            .collect();
        let n0 = 1.0 + profile as f64;
        let v = 2.0 * n0 + 1.0;
        let x = sample_thermal_with(n0, n, &mut rng)?;
        let real = ChannelRealization {
            transmittance: t.clone(),
            ..ChannelRealization::identity(n, 1.0)
        };
        let y = apply_channel(&x, 0.0, &real, &mut rng)?.envelope;
        let mut direct = 0.0;
        for part in [|q: &QuadraturePair| q.x, |q: &QuadraturePair| q.p] {
            let xs: Vec<f64> = x.iter().map(part).collect();
            let ys: Vec<f64> = y.iter().map(part).collect();
            let k = slope(&xs, &ys);
            let resid: Vec<f64> = xs.iter().zip(&ys).map(|(a, b)| b - k * a).collect();
            direct += 0.5 * (variance(&resid) - (1.0 - k * k));
        }
        let formula = fading_noise(&t, v)?;
        worst = worst.max((direct / formula - 1.0).abs());
    }
    Ok(Outcome::new(
        (two - 0.08).abs() <= 4.0 * f64::EPSILON * 0.08 && worst < 0.05,
        format!(
            "two-bin case {two}, Monte Carlo max relative deviation {:.2}%",
            100.0 * worst
        ),
    ))
}

fn tone(n: usize, f: f64, fs: f64, snr_db: f64, seed: u64) -> BasebandTrace {
    let mut rng = seeded(seed);
    let sigma = (from_db(-snr_db) / 2.0).sqrt();
    let phase0 = rng.random::<f64>() * std::f64::consts::TAU;
    let samples = (0..n)
        .map(|i| {
            let noise = QuadraturePair::vacuum(&mut rng) * sigma;
            Complex64::from_polar(1.0, phase0 + std::f64::consts::TAU * f * i as f64 / fs)
                + noise.to_complex()
        })
        .collect();
    BasebandTrace {
        samples,
        sample_rate_hz: fs,
        symbol_rate_hz: fs / 2.0,
    }
}

fn frequency_recovery() -> Result<Outcome> {
    let start = Instant::now();
    let fs = 40e9;
    let n = 1 << 16;
    let filter = PilotFilter {
        guard_hz: 0.0,
        bandwidth_hz: 20e6,
        search: None,
    };
    let single = extract_pilot(&tone(n, 1.1e9, fs, 30.0, 404), &filter)?.beat_freq_hz;

    let mut cfg = ExperimentConfig::default();
    cfg.run.frames = 2;
    cfg.run.ablations = false;
    cfg.run.calibration_symbols = 100_000;
    let cal = calibrate(&cfg)?;
    let run = simulate(&cfg, &cal, &RunOptions::default())?;
    let pipeline = run
        .records
        .iter()
        .map(|r| (r.dsp.beat_freq_hz - 1.1e9).abs())
        .fold(0.0, f64::max);

    let bin = fs / n as f64;
    let mut rng = seeded(405);
    let mut sq = 0.0;
    for i in 0..100 {
        let f = rng.random_range(-5e9..5e9);
        let p = extract_pilot(&tone(n, f, fs, 30.0, 500 + i), &filter)?;
        sq += (p.tone_freq_hz - f).powi(2);
    }
    let rmse = (sq / 100.0).sqrt();
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        (single - 1.1e9).abs() < 1e6 && pipeline < 1e6 && rmse < bin / 10.0 && elapsed < Duration::from_secs(30),
        format!(
            "1.1 GHz tone error {:.1} kHz, pipeline frames {:.1} kHz, RMSE {:.2} kHz vs bin/10 {:.1} kHz, {:.1} s",
            (single - 1.1e9).abs() / 1e3,
            pipeline / 1e3,
            rmse / 1e3,
            bin / 10e3,
            elapsed.as_secs_f64()
        ),
    ))
}

fn pilot_levels(
    mut cfg: ExperimentConfig,
    turbulence: TurbulenceSection,
    frames: usize,
) -> Result<Vec<(f64, f64)>> {
    cfg.channel.turbulence = turbulence;
    cfg.run.frames = frames;
    cfg.run.ablations = false;
    cfg.run.calibration_symbols = 200_000;
    let cal = calibrate(&cfg)?;
    let run = simulate(&cfg, &cal, &RunOptions::default())?;
    Ok(run
        .records
        .iter()
        .map(|r| (r.dsp.t_pilot_db, r.dsp.t_pilot_spread_db))
        .collect())
}

fn transmittance_estimation() -> Result<Outcome> {
    let base = ExperimentConfig::default();
    let mut worst_static: f64 = 0.0;
    for level in [-16.0, -20.0, -23.5] {
        for (db, _) in pilot_levels(
            base.clone(),
            TurbulenceSection::Static { mean_db: level },
            3,
        )? {
            worst_static = worst_static.max((db - level).abs());
        }
    }
    let b2b = pilot_levels(base.clone(), TurbulenceSection::Static { mean_db: 0.0 }, 3)?
        .iter()
        .map(|(db, _)| db.abs())
        .fold(0.0, f64::max);

    let mut drift_cfg = base.clone();
    drift_cfg.channel.turbulence = TurbulenceSection::LogNormal {
        mean_db: -20.0,
        sigma_db: 1.0,
    };
    let frames = 8;
    let measured = pilot_levels(base, drift_cfg.channel.turbulence.clone(), frames)?;
    let seeds = SeedTree::new(drift_cfg.source.seed);
    let params = drift_cfg.channel_params(Ablation::Baseline)?;
    let (mut max_spread, mut worst_track): (f64, f64) = (0.0, 0.0);
    for (f, (_, spread)) in measured.iter().enumerate() {
        let real = sample_channel(
            &params,
            drift_cfg.symbol_rate_hz(),
            drift_cfg.run.symbols_per_frame,
            &mut seeds.stream(f as u64, Stream::ChannelState),
        )?;
        let lo = real
            .transmittance
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let hi = real.transmittance.iter().cloned().fold(0.0, f64::max);
        max_spread = max_spread.max(*spread);
        worst_track = worst_track.max((spread - (to_db(hi) - to_db(lo))).abs());
    }
    Ok(Outcome::new(
        worst_static <= 0.2 && b2b <= 0.05 && max_spread < 1.0 && worst_track < 0.1,
        format!(
            "static max error {worst_static:.4} dB, back-to-back {b2b:.4} dB, drift spread max {max_spread:.3} dB tracking truth within {worst_track:.3} dB"
        ),
    ))
}

fn correlation() -> Result<Outcome> {
    let mut cfg = ExperimentConfig::default();
    let n = 1_000_000;
    cfg.run.symbols_per_frame = n;
    cfg.run.calibration_symbols = 200_000;
    cfg.channel.turbulence = TurbulenceSection::Static { mean_db: -3.0 };
    let cal = calibrate(&cfg)?;
    let tx = cfg.transmitter_params()?;
    let alpha = optimal_estimator_alpha(&tx)?;
    let seeds = SeedTree::new(99);
    let out = alice_station(&tx, n, &mut seeds.stream(0, Stream::Source))?;
    let mut sent = out.channel_bound;
    add_excess_noise(
        &mut sent,
        cfg.channel.excess_noise,
        &mut seeds.stream(0, Stream::ExcessNoise),
    )?;
    let alice: Vec<QuadraturePair> = out.alice_measured.iter().map(|q| *q * alpha).collect();
    let real = sample_channel(
        &cfg.channel_params(Ablation::Baseline)?,
        cfg.symbol_rate_hz(),
        n,
        &mut seeds.stream(0, Stream::ChannelState),
    )?;
    let ch = apply_channel(
        &sent,
        out.pilot_amplitude_sent,
        &real,
        &mut seeds.stream(0, Stream::ChannelVacuum),
    )?;
    let trace = bob_detect(
        &ch,
        &real,
        &cfg.receiver_params()?,
        &mut seeds.stream(0, Stream::BobDetector),
    )?;
    let a = analyze_frame(&cfg, &cal, &trace, &alice)?;
    let lag = a.record.sync_lag;
    let m = n - lag;
    let part =
        |s: &[QuadraturePair], f: fn(&QuadraturePair) -> f64| s.iter().map(f).collect::<Vec<f64>>();
    let rho = 0.5
        * (pearson(
            &part(&alice[..m], |q| q.x),
            &part(&a.recovered[lag..], |q| q.x),
        ) + pearson(
            &part(&alice[..m], |q| q.p),
            &part(&a.recovered[lag..], |q| q.p),
        ));

    let eta = cfg.receiver.bob_detector.efficiency;
    let nu = cfg.receiver.bob_detector.electronic_noise;
    let t = from_db(-3.0);
    let eps = epsilon_psp(&tx, tx.equivalent_modulation_variance())? + cfg.channel.excess_noise;
    let snr = eta * t / 2.0 * effective_modulation_variance(&tx) / (1.0 + nu + eta * t * eps / 2.0);
    let analytic = (snr / (1.0 + snr)).sqrt();
    let rel = (rho / analytic - 1.0).abs();
    Ok(Outcome::new(
        rel < 0.02,
        format!(
            "Pearson {rho:.5} vs analytic {analytic:.5} ({:.2}%), sync lag {lag}",
            100.0 * rel
        ),
    ))
}

fn key_rate_soft_target() -> Result<Outcome> {
    let t = 10f64.powf(-2.34);
    let trusted = key_rate(2.973, t, 0.0393, &reference_security(true))?.skr_bps;
    let untrusted = key_rate(2.973, t, 0.0393, &reference_security(false))?.skr_bps;
    let target = 3.3492e6;
    let within = |r: f64| (r / target - 1.0).abs() <= 0.3;
    Ok(Outcome::new(
        within(trusted) || within(untrusted),
        format!(
            "trusted {:.4} Mb/s ({:+.1}%), untrusted {:.4} Mb/s ({:+.1}%)",
            trusted / 1e6,
            100.0 * (trusted / target - 1.0),
            untrusted / 1e6,
            100.0 * (untrusted / target - 1.0)
        ),
    ))
}

fn weighted_total() -> Result<Outcome> {
    let bin = |lower_db: f64, probability: f64, skr_bps: f64| KeyRateBin {
        lower_db,
        upper_db: lower_db + 1.0,
        probability,
        skr_bps,
    };
    let two = total_key_rate(vec![bin(-17.0, 0.5, 2e6), bin(-24.0, 0.5, 4e6)])?.total_bps;

    let (hi_rate, lo_rate): (f64, f64) = (24.305e6, 2.596e6);
    let rate_at = |i: usize| hi_rate * (lo_rate / hi_rate).powf(i as f64 / 7.0);
    let mut rng = seeded(808);
    let mut inside = true;
    for _ in 0..1000 {
        let w: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        let bins = (0..8)
            .map(|i| bin(-17.0 - i as f64, w[i] / s, rate_at(i)))
            .collect();
        let total = total_key_rate(bins)?.total_bps;
        inside &= (lo_rate..=hi_rate).contains(&total);
    }
    let mut frames = seeded(809);
    let model = TurbulenceModel::LogNormal {
        mean_db: -20.0,
        sigma_db: 2.0,
    };
    let levels: Vec<f64> = (0..500)
        .map(|_| model.sample_level_db(&mut frames))
        .collect();
    let hist = transmittance_histogram(&levels, 1.0, (-24.0, -16.0))?;
    let bins = hist
        .bins
        .iter()
        .map(|b| {
            bin(
                b.lower_db,
                b.probability,
                rate_at((-17.0 - b.lower_db).round() as usize),
            )
        })
        .collect();
    let sampled = total_key_rate(bins)?.total_bps;
    inside &= (lo_rate..=hi_rate).contains(&sampled);
    Ok(Outcome::new(
        two == 3e6 && inside,
        format!(
            "two-bin total {two} b/s; 1000 random histograms and a sampled one ({:.3} Mb/s) stay within [2.596, 24.305] Mb/s",
            sampled / 1e6
        ),
    ))
}

fn thermal_statistics() -> Result<Outcome> {
    let n = 1_000_000;
    let n0 = 4.0;
    let s = sample_thermal_quadratures(&ThermalSourceConfig { n0, seed: 909 }, n)?;
    let g2 = g2_zero(&intensities(&s))?;
    let x2: Vec<f64> = s.iter().map(|q| q.x * q.x).collect();
    let m = mean(&x2);
    let sigma = (variance(&x2) / n as f64).sqrt();
    let second_ok = (m - (2.0 * n0 + 1.0)).abs() <= 3.0 * sigma;

    let mut rng = seeded(910);
    let var_x = |v: &[QuadraturePair]| {
        0.5 * (variance(&v.iter().map(|q| q.x).collect::<Vec<_>>())
            + variance(&v.iter().map(|q| q.p).collect::<Vec<_>>()))
    };
    let vac: Vec<QuadraturePair> = (0..n).map(|_| QuadraturePair::vacuum(&mut rng)).collect();
    let blocked: Vec<QuadraturePair> = s
        .iter()
        .map(|q| apply_attenuator(*q, 0.0, &mut rng))
        .collect::<Result<_>>()?;
    let split: Vec<QuadraturePair> = (0..n)
        .map(|_| {
            apply_beam_splitter(
                QuadraturePair::vacuum(&mut rng),
                QuadraturePair::vacuum(&mut rng),
                0.3,
            )
            .map(|o| o.1)
        })
        .collect::<Result<_>>()?;
    let het: Vec<QuadraturePair> = (0..n)
        .map(|_| {
            heterodyne_measure(
                QuadraturePair::vacuum(&mut rng),
                &DetectorParams::ideal(),
                &mut rng,
            )
        })
        .collect();
    let vacuum_vars = [var_x(&vac), var_x(&blocked), var_x(&split), var_x(&het)];
    let vacuum_ok = vacuum_vars.iter().all(|v| (v - 1.0).abs() <= 0.01);
    Ok(Outcome::new(
        (g2 - 2.0).abs() <= 0.02 && second_ok && vacuum_ok,
        format!(
            "g2(0) = {g2:.4}, <x^2> = {m:.4} vs {} ({:.1} sigma), vacuum paths {:?}",
            2.0 * n0 + 1.0,
            (m - (2.0 * n0 + 1.0)).abs() / sigma,
            vacuum_vars.map(|v| (v * 1e4).round() / 1e4)
        ),
    ))
}

/// Random symplectic matrix on `modes` modes from beam splitters, phase
/// shifts and single-mode squeezers.
fn random_symplectic<R: Rng>(modes: usize, rng: &mut R) -> DMatrix<f64> {
    let dim = 2 * modes;
    let mut s = DMatrix::identity(dim, dim);
    let rotation = |i: usize, j: usize, theta: f64| {
        let mut m = DMatrix::identity(dim, dim);
        let (sn, c) = theta.sin_cos();
        for (a, b) in [(2 * i, 2 * j), (2 * i + 1, 2 * j + 1)] {
            m[(a, a)] = c;
            m[(b, b)] = c;
            m[(a, b)] = sn;
            m[(b, a)] = -sn;
        }
        m
    };
    let phase = |k: usize, phi: f64| {
        let mut m = DMatrix::identity(dim, dim);
        let (sn, c) = phi.sin_cos();
        m[(2 * k, 2 * k)] = c;
        m[(2 * k, 2 * k + 1)] = -sn;
        m[(2 * k + 1, 2 * k)] = sn;
        m[(2 * k + 1, 2 * k + 1)] = c;
        m
    };
    for _ in 0..3 {
        for k in 0..modes {
            s = phase(k, rng.random_range(0.0..std::f64::consts::TAU)) * s;
            let r: f64 = rng.random_range(-1.0..1.0);
            let mut sq = DMatrix::identity(dim, dim);
            sq[(2 * k, 2 * k)] = r.exp();
            sq[(2 * k + 1, 2 * k + 1)] = (-r).exp();
            s = sq * s;
        }
        for i in 0..modes {
            for j in i + 1..modes {
                s = rotation(i, j, rng.random_range(0.0..std::f64::consts::TAU)) * s;
            }
        }
    }
    s
}

fn holevo_oracle() -> Result<Outcome> {
    let mut rng = seeded(1010);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let modes = 1 + i % 4;
        let mut nus: Vec<f64> = (0..modes)
            .map(|_| 1.0 + rng.random_range(0.0..10.0))
            .collect();
        let diag = DMatrix::from_fn(
            2 * modes,
            2 * modes,
            |r, c| if r == c { nus[r / 2] } else { 0.0 },
        );
        let s = random_symplectic(modes, &mut rng);
        let gamma = &s * diag * s.transpose();
        let gamma = (&gamma + gamma.transpose()) * 0.5;

        let ours = symplectic_eigenvalues(&gamma)?;
        let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
        for k in 0..modes {
            omega[(2 * k, 2 * k + 1)] = 1.0;
            omega[(2 * k + 1, 2 * k)] = -1.0;
        }
        let mut brute: Vec<f64> = (omega * &gamma)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.im.abs())
            .collect();
        brute.sort_by(f64::total_cmp);
        let brute: Vec<f64> = brute.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        nus.sort_by(f64::total_cmp);
        for ((a, b), c) in ours.iter().zip(&brute).zip(&nus) {
            worst = worst.max(((a - b) / b).abs()).max(((a - c) / c).abs());
        }
    }
    let ideal = SecurityConfig {
        bob_det: DetectorParams::ideal(),
        ..reference_security(true)
    };
    let mut lossless = Vec::new();
    for cfg in [
        ideal,
        SecurityConfig {
            detector_trusted: false,
            ..ideal
        },
        reference_security(true),
    ] {
        lossless.push(holevo_bound(2.973, 1.0, 0.0, &cfg)?);
    }
    Ok(Outcome::new(
        worst <= 1e-9 && lossless.iter().all(|k| *k == 0.0),
        format!(
            "max relative error {worst:.2e} over 1000 matrices, chi(T=1, eps=0) = {lossless:?}"
        ),
    ))
}

fn determinism() -> Result<Outcome> {
    let mut cfg = ExperimentConfig::default();
    cfg.run.frames = 6;
    cfg.run.symbols_per_frame = 40_000;
    cfg.run.calibration_symbols = 100_000;
    let cal = calibrate(&cfg)?;
    let csv = |workers| -> Result<String> {
        Ok(frames_csv(
            &simulate(
                &cfg,
                &cal,
                &RunOptions {
                    workers,
                    trace_dir: None,
                },
            )?
            .records,
        ))
    };
    let (a, b, c) = (csv(1)?, csv(1)?, csv(4)?);
    Ok(Outcome::new(
        a == b && a == c,
        format!(
            "{} bytes; repeated run identical: {}, 4 workers identical: {}",
            a.len(),
            a == b,
            a == c
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        (
            "preparation noise closed form vs Monte Carlo",
            epsilon_psp_oracle,
        ),
        (
            "preparation noise at the operating point",
            epsilon_psp_operating_point,
        ),
        ("fading noise", fading),
        ("frequency recovery", frequency_recovery),
        ("transmittance estimation", transmittance_estimation),
        ("end-to-end correlation", correlation),
        ("key-rate soft target", key_rate_soft_target),
        ("weighted total key rate", weighted_total),
        ("thermal statistics", thermal_statistics),
        (
            "symplectic eigenvalues and lossless Holevo bound",
            holevo_oracle,
        ),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        failed += usize::from(!outcome.pass);
        println!(
            "{} {:>2} {name}: {} [{:.1} s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
