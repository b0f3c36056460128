use proptest::prelude::*;

use swrdm::cli::Axis;
use swrdm::exponent::{exponent, Beta, MetricKind};
use swrdm::phase::{Phase, PhaseModel};
use swrdm::report::{fmt_f64, from_json, to_json};
use swrdm::sim::wilson;
use swrdm::source::{JointSource, SourceFile};
use swrdm::spectrum::{phi_diluted, EntropySpectrum, Spectrum};

fn joint(nx: usize, ny: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(0.02f64..1.0, nx * ny).prop_map(move |w| {
        let s: f64 = w.iter().sum();
        (0..nx).map(|x| (0..ny).map(|y| w[x * ny + y] / s).collect()).collect()
    })
}

fn source() -> impl Strategy<Value = JointSource> {
    (2usize..4, 2usize..4)
        .prop_flat_map(|(nx, ny)| joint(nx, ny))
        .prop_map(|rows| JointSource::from_rows(&rows).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twelve_digit_rendering_round_trips(v in prop::num::f64::NORMAL) {
        let back: f64 = fmt_f64(v).parse().unwrap();
        prop_assert!(((back - v) / v).abs() <= 5e-12, "{v} -> {}", fmt_f64(v));
        // a second pass is a fixed point
        prop_assert_eq!(fmt_f64(back), fmt_f64(v));
    }

    #[test]
    fn axis_is_inclusive_and_monotone(a in -5.0f64..5.0, len in 0.0f64..5.0, n in 1usize..50) {
        let ax = Axis { start: a, stop: a + len, count: n };
        let v = ax.values();
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], a);
        if n > 1 {
            prop_assert_eq!(*v.last().unwrap(), a + len);
        }
        prop_assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn wilson_brackets_the_estimate(k in 0u64..500, extra in 0u64..500) {
        let n = k + extra + 1;
        let p = wilson(k as f64, n);
        prop_assert!(0.0 <= p.ci_low && p.ci_low <= p.estimate + 1e-15);
        prop_assert!(p.estimate <= p.ci_high + 1e-15 && p.ci_high <= 1.0);
    }

    #[test]
    fn source_file_round_trips(src in source()) {
        let file = SourceFile::from_source(&src);
        let text = serde_json::to_string(&file).unwrap();
        let (back, mm) = SourceFile::parse(&text).unwrap().build().unwrap();
        prop_assert!(mm.is_none());
        for (a, b) in back.matrix().as_slice().iter().zip(src.matrix().as_slice()) {
            prop_assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn spectrum_identities(src in source()) {
        let spec = Spectrum::conditional_x_given_y(&src);
        let h = src.entropy_x_given_y();
        let s = spec.s_at(src.joint_entropy()).unwrap();
        prop_assert!((s - h).abs() < 1e-9, "{s} vs {h}");
        // φ is convex and the diluted free energy sits below φ − r
        let betas: Vec<f64> = (1..30).map(|i| 0.1 * i as f64).collect();
        let phi: Vec<f64> = betas.iter().map(|&b| spec.phi(b).unwrap()).collect();
        for w in phi.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-9);
        }
        for r in [0.05, 0.2, 0.5] {
            for (&b, &p) in betas.iter().zip(&phi) {
                prop_assert!(phi_diluted(&spec, b, r).unwrap() <= p - r + 1e-9);
            }
        }
    }

    #[test]
    fn entropy_is_concave_in_energy(src in source()) {
        let spec = Spectrum::conditional_x_given_y(&src);
        let (lo, hi) = spec.energy_range();
        let s: Vec<f64> = (1..40).map(|i| spec.s_at(lo + (hi - lo) * i as f64 / 40.0).unwrap()).collect();
        for w in s.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] <= 1e-9);
        }
    }

    #[test]
    fn low_temperature_above_threshold_is_ferromagnetic(src in source(), dr in 0.01f64..0.3) {
        let model = PhaseModel::matched(&src);
        let fg = model.boundaries().ferro_glassy_rate;
        let label = model.classify(fg + dr, 0.05).unwrap();
        prop_assert_eq!(label.phase, Phase::Ferromagnetic);
        if fg > 0.02 {
            let label = model.classify(fg - 0.01, 0.05).unwrap();
            prop_assert_eq!(label.phase, Phase::Glassy);
        }
    }

    #[test]
    fn report_json_is_stable(vals in prop::collection::vec(-1e6f64..1e6, 1..8)) {
        let text = to_json(&vals).unwrap();
        let back: Vec<f64> = from_json(&text).unwrap();
        prop_assert_eq!(to_json(&back).unwrap(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exponent_is_bounded(rows in joint(2, 2), r in 0.0f64..0.7, b in 0.2f64..4.0) {
        let src = JointSource::from_rows(&rows).unwrap();
        let e = exponent(&src, r, Beta::Finite(b), &MetricKind::Matched).unwrap().value;
        prop_assert!(e >= 0.0);
        prop_assert!(e <= (r - src.entropy_x_given_y()).max(0.0) + 1e-9);
    }
}
