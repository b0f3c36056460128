//! Library results against the brute-force oracles in `common::oracle`.

mod common;

use common::{oracle, TestRng};
use swrdm::exponent::{a_term, exponent, inner_e1, Beta, MetricKind};
use swrdm::sim::{estimate_ber, SimConfig, SimMode};
use swrdm::source::{JointSource, JointType};
use swrdm::spectrum::{diluted_free_energy, EntropySpectrum, Spectrum};
use swrdm::Matrix;

fn binary(rng: &mut TestRng, floor: f64) -> ([[f64; 2]; 2], JointSource) {
    let rows = rng.joint(2, 2, floor);
    let p = [[rows[0][0], rows[0][1]], [rows[1][0], rows[1][1]]];
    (p, JointSource::from_rows(&rows).unwrap())
}

fn ln(p: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    p.map(|r| r.map(f64::ln))
}

#[test]
fn spectrum_matches_constrained_grid() {
    let mut rng = TestRng::new(11);
    for _ in 0..5 {
        let (p, src) = binary(&mut rng, 0.02);
        let spec = Spectrum::conditional_x_given_y(&src);
        let (lo, hi) = spec.energy_range();
        for i in 1..10 {
            let eps = lo + (hi - lo) * i as f64 / 10.0;
            let got = spec.s_at(eps).unwrap();
            let want = oracle::s_at(&p, eps, 1000);
            assert!((got - want).abs() < 2e-4, "eps={eps}: {got} vs {want}");
        }
    }
}

#[test]
fn a_term_on_dsbs_matches_grid() {
    let p = [[0.45, 0.05], [0.05, 0.45]];
    let src = JointSource::dsbs(0.1).unwrap();
    let got = a_term(&src, &src.as_joint_type(), 0.5, Beta::Finite(1.0), &MetricKind::Matched);
    let want = oracle::a_term(&ln(&p), &p, 0.5, Some(1.0), 1000);
    assert!((got - want).abs() < 2e-3, "{got} vs {want}");
}

#[test]
fn a_term_on_random_types_matches_grid() {
    let mut rng = TestRng::new(12);
    for _ in 0..4 {
        let (p, src) = binary(&mut rng, 0.03);
        let q = rng.joint(2, 2, 0.01);
        let qa = [[q[0][0], q[0][1]], [q[1][0], q[1][1]]];
        let qt = JointType::new(Matrix::from_rows(&q).unwrap()).unwrap();
        let r = rng.range(0.1, 0.6);
        for beta in [Some(0.6), Some(1.5), None] {
            let b = beta.map_or(Beta::Infinite, Beta::Finite);
            let got = a_term(&src, &qt, r, b, &MetricKind::Matched);
            let want = oracle::a_term(&ln(&p), &qa, r, beta, 600);
            assert!((got - want).abs() < 3e-3, "beta={beta:?} r={r}: {got} vs {want}");
        }
    }
}

#[test]
fn r0_matches_grid() {
    let mut rng = TestRng::new(13);
    for _ in 0..4 {
        let (p, src) = binary(&mut rng, 0.03);
        let w0 = rng.range(0.2, 0.8);
        let r = rng.range(0.05, 0.6);
        let beta = rng.range(0.4, 2.0);
        let got = inner_e1(&src, 0.0, beta, r, &[w0, 1.0 - w0], &MetricKind::Matched)
            .unwrap()
            .r0;
        let want = oracle::r0(&ln(&p), [w0, 1.0 - w0], r, beta, 600);
        assert!((got - want).abs() < 2e-3, "{got} vs {want}");
    }
}

#[test]
fn exponent_matches_nested_grid() {
    let mut rng = TestRng::new(14);
    for _ in 0..3 {
        let (p, src) = binary(&mut rng, 0.03);
        let h = src.entropy_x_given_y();
        let r = rng.range(h, 2f64.ln());
        for beta in [Some(0.7), None] {
            let b = beta.map_or(Beta::Infinite, Beta::Finite);
            let got = exponent(&src, r, b, &MetricKind::Matched).unwrap().value;
            let want = oracle::exponent(&p, &ln(&p), r, beta, 200);
            assert!(got <= want + 1e-9, "solver above the grid: {got} vs {want}");
            assert!((got - want).abs() < 5e-3, "r={r} beta={beta:?}: {got} vs {want}");
        }
    }
}

#[test]
fn mismatched_exponent_matches_nested_grid() {
    let p = [[0.42, 0.08], [0.06, 0.44]];
    let pt = [[0.4, 0.1], [0.08, 0.42]];
    let src = JointSource::from_rows(&p.map(|r| r.to_vec())).unwrap();
    let mm = swrdm::MismatchModel::new(Matrix::from_rows(&pt.map(|r| r.to_vec())).unwrap(), &src).unwrap();
    let m = mm.ln_matrix().rows();
    let m = [[m[0][0], m[0][1]], [m[1][0], m[1][1]]];
    for (r, beta) in [(0.5, Some(1.0)), (0.6, Some(0.8)), (0.55, None)] {
        let b = beta.map_or(Beta::Infinite, Beta::Finite);
        let got = exponent(&src, r, b, &MetricKind::Mismatched(mm.clone())).unwrap().value;
        let want = oracle::exponent(&p, &m, r, beta, 200);
        assert!((got - want).abs() < 5e-3, "r={r}: {got} vs {want}");
    }
}

#[test]
fn simulator_matches_exact_ensemble_average() {
    let rows = vec![vec![0.4, 0.1], vec![0.15, 0.35]];
    let src = JointSource::from_rows(&rows).unwrap();
    // M = round(e^{nR}) = 2 at n = 2
    let (n, r) = (2, 0.35);
    for beta in [Some(0.5), Some(1.0), None] {
        let exact = oracle::exact_ber(&rows, n, 2, beta);
        for mode in [SimMode::Enumerate, SimMode::TypeClass] {
            let b = beta.map_or(Beta::Infinite, Beta::Finite);
            let mut cfg = SimConfig::new(src.clone(), n, r, b);
            cfg.trials = 100_000;
            cfg.mode = mode;
            assert_eq!(cfg.bins(), 2);
            let rep = estimate_ber(&cfg).unwrap();
            let z = (rep.ber.estimate - exact).abs() / rep.ber.std_error;
            assert!(z < 3.0, "{mode} beta={beta:?}: {} vs exact {exact} (z={z:.2})", rep.ber.estimate);
        }
    }
}

#[test]
fn simulator_matches_exact_ternary() {
    let rows = vec![vec![0.3, 0.05], vec![0.05, 0.3], vec![0.1, 0.2]];
    let src = JointSource::from_rows(&rows).unwrap();
    let exact = oracle::exact_ber(&rows, 2, 3, Some(1.0));
    let mut cfg = SimConfig::new(src, 2, 3f64.ln() / 2.0, Beta::Finite(1.0));
    cfg.trials = 100_000;
    assert_eq!(cfg.bins(), 3);
    let rep = estimate_ber(&cfg).unwrap();
    let z = (rep.ber.estimate - exact).abs() / rep.ber.std_error;
    assert!(z < 3.0, "{} vs exact {exact}", rep.ber.estimate);
}

/// `φ_D(β) = max{s(ε) − r − βε : s(ε) ≥ r}` on an energy grid.
#[test]
fn diluted_free_energy_matches_grid() {
    let p = [[0.45, 0.05], [0.05, 0.45]];
    let src = JointSource::dsbs(0.1).unwrap();
    let spec = Spectrum::conditional_x_given_y(&src);
    let (lo, hi) = spec.energy_range();
    let grid: Vec<(f64, f64)> = (0..=4000)
        .map(|i| {
            let e = lo + (hi - lo) * i as f64 / 4000.0;
            (e, oracle::s_at(&p, e, 2000))
        })
        .collect();
    for r in [0.05, 0.2, 0.4, 0.6] {
        for beta in [0.3, 0.8, 1.0, 1.7, 3.0] {
            let want = grid
                .iter()
                .filter(|(_, s)| *s >= r)
                .map(|(e, s)| s - r - beta * e)
                .fold(f64::NEG_INFINITY, f64::max);
            let got = diluted_free_energy(&spec, beta, r).unwrap().value;
            assert!((got - want).abs() < 2e-3, "r={r} beta={beta}: {got} vs {want}");
        }
    }
}
