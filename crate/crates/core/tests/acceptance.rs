//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line
//! with its measurements before asserting; run with `--nocapture` to see
//! them.

mod common;

use std::process::Command;
use std::time::Instant;

use rayon::prelude::*;

use common::{oracle, TestRng};
use swrdm::exponent::{exponent, Beta, MetricKind};
use swrdm::phase::{gamma, gamma_inverse, CurveId, Phase, PhaseModel, TwoSidedModel, TwoSidedQuery};
use swrdm::sim::{
    dominance_map, n_sweep, rdm_dilution_experiment, slopes_nondecreasing, transition_band, DilutionConfig, SimConfig,
};
use swrdm::source::JointSource;
use swrdm::spectrum::{ClosedFormSpectrum, EntropySpectrum, Spectrum, SpectrumKind};

fn verdict(n: u32, ok: bool, start: Instant, detail: &str) {
    println!(
        "criterion {n}: {} ({:.1} s): {detail}",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn binary(rng: &mut TestRng) -> ([[f64; 2]; 2], JointSource) {
    let rows = rng.joint(2, 2, 0.01);
    let p = [[rows[0][0], rows[0][1]], [rows[1][0], rows[1][1]]];
    (p, JointSource::from_rows(&rows).unwrap())
}

#[test]
fn criterion_1_triple_point_identity() {
    let start = Instant::now();
    let mut rng = TestRng::new(101);
    let mut sources = vec![JointSource::dsbs(0.1).unwrap()];
    sources.extend((0..50).map(|_| binary(&mut rng).1));
    let (mut worst_gamma, mut worst_beta) = (0.0f64, 0.0f64);
    for src in &sources {
        let h = src.entropy_x_given_y();
        worst_gamma = worst_gamma.max((gamma(src, 1.0).unwrap() - h).abs());
        let bc = Spectrum::conditional_x_given_y(src).beta_c(h).unwrap();
        worst_beta = worst_beta.max((bc - 1.0).abs());
    }
    let ok = worst_gamma < 1e-10 && worst_beta < 1e-6 && start.elapsed().as_secs_f64() < 10.0;
    verdict(
        1,
        ok,
        start,
        &format!("{} sources, max |Gamma(1) - H(X|Y)| = {worst_gamma:.2e}, max |beta_c(H) - 1| = {worst_beta:.2e}", sources.len()),
    );
}

#[test]
fn criterion_2_spectrum_oracle() {
    let start = Instant::now();
    let mut rng = TestRng::new(102);
    let (mut worst, mut worst_id) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let (p, src) = binary(&mut rng);
        let spec = Spectrum::conditional_x_given_y(&src);
        let (lo, hi) = spec.energy_range();
        for i in 0..10 {
            let eps = lo + (hi - lo) * (i as f64 + 0.5) / 10.0;
            worst = worst.max((spec.s_at(eps).unwrap() - oracle::s_at(&p, eps, 1000)).abs());
        }
        let id = spec.s_at(src.joint_entropy()).unwrap() - src.entropy_x_given_y();
        worst_id = worst_id.max(id.abs());
    }
    let ok = worst < 2e-4 && worst_id < 1e-9 && start.elapsed().as_secs_f64() < 120.0;
    verdict(
        2,
        ok,
        start,
        &format!("200 energies, max |s - grid| = {worst:.2e}, max |s(H(X,Y)) - H(X|Y)| = {worst_id:.2e}"),
    );
}

#[test]
fn criterion_3_harmonic_closed_form() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (kappa, a) in [(1.0, 1.0), (2.0, 0.5), (0.3, 1.7)] {
        let spec = ClosedFormSpectrum::harmonic(kappa, a).unwrap();
        for i in 0..=40 {
            let r = 2.0 * i as f64 / 40.0;
            let want = 2.0 * std::f64::consts::PI * std::f64::consts::E / (kappa * a * a) * (-2.0 * r).exp();
            worst = worst.max((spec.beta_c(r).unwrap() - want).abs());
        }
    }
    let ok = worst < 1e-9 && start.elapsed().as_secs_f64() < 1.0;
    verdict(3, ok, start, &format!("3 settings x 41 rates, max |beta_c - closed form| = {worst:.2e}"));
}

#[test]
fn criterion_4_exponent_oracle() {
    let start = Instant::now();
    let mut rng = TestRng::new(104);
    let triples: Vec<_> = (0..30)
        .map(|_| {
            let (p, src) = binary(&mut rng);
            let r = rng.range(0.0, 2f64.ln());
            let beta = if rng.uniform() < 0.2 { None } else { Some(rng.range(0.2, 3.0)) };
            (p, src, r, beta)
        })
        .collect();
    let diffs: Vec<f64> = triples
        .par_iter()
        .map(|(p, src, r, beta)| {
            let b = beta.map_or(Beta::Infinite, Beta::Finite);
            let got = exponent(src, *r, b, &MetricKind::Matched).unwrap().value;
            let m = p.map(|row| row.map(f64::ln));
            (got - oracle::exponent(p, &m, *r, *beta, 500)).abs()
        })
        .collect();
    let worst = diffs.iter().copied().fold(0.0, f64::max);

    let src = JointSource::dsbs(0.1).unwrap();
    let h = src.entropy_x_given_y();
    let mut zero_points = 0;
    let mut worst_zero = 0.0f64;
    for i in 0..=25 {
        let r = 0.69 * i as f64 / 25.0;
        let b0 = if r > h { gamma_inverse(&src, r).unwrap() } else { f64::INFINITY };
        for j in 0..=25 {
            let beta = 0.1 + 3.9 * j as f64 / 25.0;
            if r <= h || beta <= b0 {
                zero_points += 1;
                let e = exponent(&src, r, Beta::Finite(beta), &MetricKind::Matched).unwrap().value;
                worst_zero = worst_zero.max(e.abs());
            }
        }
    }

    let mut worst_plateau = 0.0f64;
    for r in [0.45, 0.55, 0.65] {
        let e1 = exponent(&src, r, Beta::Finite(1.0), &MetricKind::Matched).unwrap().value;
        let e8 = exponent(&src, r, Beta::Finite(8.0), &MetricKind::Matched).unwrap().value;
        worst_plateau = worst_plateau.max((e1 - e8).abs());
    }
    let ok = worst < 5e-3
        && zero_points >= 200
        && worst_zero < 1e-9
        && worst_plateau < 1e-4
        && start.elapsed().as_secs_f64() < 900.0;
    verdict(
        4,
        ok,
        start,
        &format!(
            "30 triples max |E - grid| = {worst:.2e}; {zero_points} zero-region points max |E| = {worst_zero:.1e}; plateau max |E(R,1) - E(R,8)| = {worst_plateau:.1e}"
        ),
    );
}

#[test]
fn criterion_5_universal_decoder() {
    let start = Instant::now();
    let mut rng = TestRng::new(105);
    let mut sources = vec![JointSource::dsbs(0.1).unwrap()];
    sources.extend((0..3).map(|_| binary(&mut rng).1));
    let (mut worst_line, mut violations, mut universal_ferro) = (0.0f64, 0usize, 0usize);
    for src in &sources {
        let matched = PhaseModel::matched(src);
        let universal = PhaseModel::universal(src);
        let ln2 = 2f64.ln();
        for i in 1..64 {
            let r = ln2 * i as f64 / 64.0;
            worst_line = worst_line.max((universal.beta_c(r).unwrap() - 1.0).abs());
        }
        for p in universal.sample_boundaries(64, 3.0).unwrap() {
            if p.curve_id == CurveId::ParaGlassy {
                worst_line = worst_line.max((p.t - 1.0).abs());
            }
        }
        for i in 1..=128 {
            let r = ln2 * i as f64 / 128.0;
            for j in 1..=128 {
                let t = 3.0 * j as f64 / 128.0;
                let u = universal.classify(r, t).unwrap();
                if u.phase == Phase::Ferromagnetic && !u.on_boundary() {
                    universal_ferro += 1;
                    if matched.classify(r, t).unwrap().phase != Phase::Ferromagnetic {
                        violations += 1;
                    }
                }
            }
        }
    }
    let ok = worst_line == 0.0 && violations == 0 && universal_ferro > 0 && start.elapsed().as_secs_f64() < 30.0;
    verdict(
        5,
        ok,
        start,
        &format!(
            "{} sources, max |T_pg - 1| = {worst_line:.1e}; {universal_ferro} universal ferromagnetic cells, {violations} outside the matched region",
            sources.len()
        ),
    );
}

#[test]
fn criterion_6_two_sided_region() {
    let start = Instant::now();
    let mut rng = TestRng::new(106);
    let mut sources = vec![JointSource::dsbs(0.1).unwrap()];
    sources.extend((0..4).map(|_| binary(&mut rng).1));
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for src in &sources {
        let model = TwoSidedModel::new(src);
        let (hx, hy, hxy) = (src.entropy_x_given_y(), src.entropy_y_given_x(), src.joint_entropy());
        let top = 1.05 * src.entropy_x().max(src.entropy_y());
        for i in 0..64 {
            let rx = top * i as f64 / 63.0;
            for j in 0..64 {
                let ry = top * j as f64 / 63.0;
                let margins = [rx - hx, ry - hy, rx + ry - hxy];
                if margins.iter().any(|m| m.abs() <= 1e-9) {
                    continue;
                }
                checked += 1;
                let textbook = margins.iter().all(|&m| m > 0.0);
                if model.reliable(&TwoSidedQuery { r_x: rx, r_y: ry, beta: 1.0 }) != textbook {
                    mismatches += 1;
                }
            }
        }
    }
    let ok = mismatches == 0 && start.elapsed().as_secs_f64() < 5.0;
    verdict(6, ok, start, &format!("{checked} cells over {} sources, {mismatches} disagreements", sources.len()));
}

#[test]
fn criterion_7_simulation_vs_theory() {
    let start = Instant::now();
    let src = JointSource::dsbs(0.1).unwrap();
    let e = exponent(&src, 0.55, Beta::Finite(1.0), &MetricKind::Matched).unwrap().value;
    let mut cfg = SimConfig::new(src.clone(), 8, 0.55, Beta::Finite(1.0));
    cfg.trials = 200_000;
    let pts = n_sweep(&cfg, &[8, 12, 16, 20]).unwrap();
    let monotone = slopes_nondecreasing(&pts, 2.0);
    let last = pts.last().unwrap().slope.unwrap_or(f64::INFINITY);
    let in_window = (0.5 * e..=1.5 * e).contains(&last);
    let series: Vec<String> = pts
        .iter()
        .map(|p| {
            format!(
                "n={} BER={:.5} slope={:.4}+-{:.4}",
                p.n,
                p.report.ber.estimate,
                p.slope.unwrap_or(f64::NAN),
                p.slope_std_error.unwrap_or(f64::NAN)
            )
        })
        .collect();
    // slope of −ln BER against n cancels the sub-exponential prefactor
    let fd: Vec<String> = pts
        .windows(2)
        .map(|w| {
            let d = (w[0].report.ber.estimate.ln() - w[1].report.ber.estimate.ln()) / (w[1].n - w[0].n) as f64;
            format!("{:.4}", d)
        })
        .collect();

    let mut dom = SimConfig::new(src.clone(), 20, 0.1, Beta::Finite(1.0));
    dom.trials = 4000;
    let rates: Vec<f64> = (0..=24).map(|i| 0.1 + 0.025 * i as f64).collect();
    let cells = dominance_map(&dom, &rates, &[1.0]).unwrap();
    let curve: Vec<(f64, f64)> = cells.iter().map(|c| (c.rate, c.fraction)).collect();
    let boundary = PhaseModel::matched(&src).ferro_rate(1.0).unwrap();
    let band = transition_band(&curve, 0.1, 0.9);
    let brackets = band.is_some_and(|(lo, hi)| lo - 0.05 <= boundary && boundary <= hi + 0.05);

    let ok = monotone && in_window && brackets && start.elapsed().as_secs_f64() < 1200.0;
    verdict(
        7,
        ok,
        start,
        &format!(
            "E(0.55,1) = {e:.6}; {}; nondecreasing within 2 SE: {monotone}; n=20 slope in [{:.4}, {:.4}]: {in_window}; finite-difference slopes {}; dominance band {:?} vs boundary {boundary:.4}: {brackets}",
            series.join(", "),
            0.5 * e,
            1.5 * e,
            fd.join(", "),
            band.map(|(a, b)| (format!("{a:.4}"), format!("{b:.4}")))
        ),
    );
}

#[test]
fn criterion_8_dilution() {
    let start = Instant::now();
    let src = JointSource::dsbs(0.1).unwrap();
    let betas: Vec<f64> = (0..=28).map(|i| 0.2 + 0.1 * i as f64).collect();
    let n = 20;
    let mut ok = true;
    let mut notes = Vec::new();
    for rate in [0.1, 0.3] {
        let cfg = DilutionConfig {
            kind: SpectrumKind::ConditionalXGivenY,
            n,
            rate,
            betas: betas.clone(),
            realizations: 32,
            seed: swrdm::sim::DEFAULT_SEED,
        };
        let rep = rdm_dilution_experiment(&src, &cfg).unwrap();
        let worst = rep.cells.iter().map(|c| (c.measured - c.analytic).abs()).fold(0.0, f64::max);
        let knee_ok = match (rep.beta_c, rep.beta_c_hat) {
            (Some(bc), Some(hat)) => (hat - bc).abs() <= 0.3,
            _ => false,
        };
        ok &= worst <= 5.0 / n as f64 && knee_ok;
        notes.push(format!(
            "r={rate}: max |measured - analytic| = {worst:.4} (limit {:.2}), beta_c = {:?}, knee = {:?}",
            5.0 / n as f64,
            rep.beta_c.map(|v| (v * 1e4).round() / 1e4),
            rep.beta_c_hat.map(|v| (v * 1e4).round() / 1e4)
        ));
    }
    ok &= start.elapsed().as_secs_f64() < 300.0;
    verdict(8, ok, start, &notes.join("; "));
}

#[test]
fn criterion_9_cli_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cf = dir.path().join("harmonic.json");
    std::fs::write(&cf, r#"{"closed_form": "harmonic", "kappa": 1.0, "a": 1.0}"#).unwrap();
    let cf = cf.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["spectrum", "--source", "dsbs:0.1", "--points", "64"],
        vec!["spectrum", "--closed-form", cf, "--energy", "0.1:3", "--points", "32"],
        vec!["phase", "--source", "dsbs:0.1", "--decoder", "universal", "--grid", "64"],
        vec!["classify", "--source", "dsbs:0.1", "--rate", "0.4", "--temperature", "0.8"],
        vec!["exponent", "--source", "dsbs:0.1", "--sweep", "rate=0.3:0.7:5,beta=0.5:2:4"],
        vec!["simulate", "--source", "dsbs:0.1", "--n", "12", "--rate", "0.5", "--trials", "3000", "--seed", "3"],
        vec!["simulate", "--source", "dsbs:0.1", "--sweep-n", "6,10", "--rate", "0.5", "--trials", "2000", "--seed", "3", "--mode", "enumerate"],
        vec!["dilution", "--source", "dsbs:0.1", "--n", "16", "--rate", "0.2", "--realizations", "8", "--seed", "3"],
        vec!["two-sided", "--source", "dsbs:0.1", "--grid", "rate_x=0:0.7:8,rate_y=0:0.7:8"],
    ];
    let run = |args: &[&str], threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_swrdm"))
            .args(args)
            .env("SWRDM_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    let mut differing = Vec::new();
    for args in &runs {
        let a = run(args, "1");
        let b = run(args, "1");
        let c = run(args, "3");
        if a != b || a != c || a.is_empty() {
            differing.push(args[0]);
        }
    }
    let ok = differing.is_empty() && start.elapsed().as_secs_f64() < 60.0;
    verdict(
        9,
        ok,
        start,
        &format!("{} invocations run three times (1, 1, 3 workers); differing: {differing:?}", runs.len()),
    );
}
