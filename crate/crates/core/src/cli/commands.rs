use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{parse_range, parse_sweep, Axis};
use super::{
    ClassifyArgs, CliError, Command, DecoderArg, DilutionArgs, ExponentArgs, Format, KindArg, MetricArg,
    PhaseArgs, SimulateArgs, SpectrumArgs, TwoSidedArgs,
};
use crate::exponent::{exponent, Beta, MetricKind};
use crate::phase::{BoundarySet, DecoderKind, DominantTerm, GrowthRates, Phase, PhaseModel, TwoSidedModel, TwoSidedQuery};
use crate::report::{fmt_f64, to_json, Table};
use crate::sim::{estimate_ber, n_sweep, rdm_dilution_experiment, DilutionConfig, SimConfig};
use crate::source::{JointSource, MismatchModel, SourceFile};
use crate::spectrum::{ClosedFormSpectrum, EntropySpectrum, Spectrum, SpectrumKind};

type Out = Result<String, CliError>;

pub(super) fn dispatch(cmd: &Command) -> Out {
    match cmd {
        Command::Spectrum(a) => spectrum(a),
        Command::Phase(a) => phase(a),
        Command::Classify(a) => classify(a),
        Command::Exponent(a) => exponent_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::Dilution(a) => dilution(a),
        Command::TwoSided(a) => two_sided(a),
    }
}

fn load_source(spec: &str) -> Result<(JointSource, Option<MismatchModel>), CliError> {
    if let Some(p) = spec.strip_prefix("dsbs:") {
        let p: f64 = p
            .parse()
            .map_err(|_| CliError::flag("source", format!("'{spec}': crossover is not a number")))?;
        let src = JointSource::dsbs(p).map_err(|e| CliError::flag("source", e.to_string()))?;
        return Ok((src, None));
    }
    let text = std::fs::read_to_string(Path::new(spec)).map_err(|e| CliError::flag("source", format!("{spec}: {e}")))?;
    SourceFile::parse(&text)
        .and_then(|f| f.build())
        .map_err(|e| CliError::flag("source", format!("{spec}: {e}")))
}

fn nonneg(flag: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::flag(flag, format!("{v} must be a finite non-negative number")))
    }
}

fn positive(flag: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::flag(flag, format!("{v} must be a finite positive number")))
    }
}

fn axis(flag: &str, s: &str) -> Result<Axis, CliError> {
    s.parse().map_err(|e: String| CliError::flag(flag, e))
}

fn parse_beta(flag: &str, s: &str) -> Result<Beta, CliError> {
    s.parse().map_err(|e: crate::Error| CliError::flag(flag, e.to_string()))
}

fn kind_of(k: KindArg) -> SpectrumKind {
    match k {
        KindArg::XGivenY => SpectrumKind::ConditionalXGivenY,
        KindArg::YGivenX => SpectrumKind::ConditionalYGivenX,
        KindArg::Joint => SpectrumKind::JointXy,
    }
}

fn needs_p_tilde(flag: &str, mm: Option<MismatchModel>) -> Result<MismatchModel, CliError> {
    mm.ok_or_else(|| CliError::flag(flag, "mismatched decoding needs \"p_tilde\" in the source file"))
}

fn metric(flag: &str, m: MetricArg, mm: Option<MismatchModel>) -> Result<MetricKind, CliError> {
    Ok(match m {
        MetricArg::Matched => MetricKind::Matched,
        MetricArg::Mismatched => MetricKind::Mismatched(needs_p_tilde(flag, mm)?),
        MetricArg::Mce => MetricKind::MinConditionalEntropy,
    })
}

fn phase_model(src: &JointSource, d: DecoderArg, mm: Option<MismatchModel>) -> Result<PhaseModel, CliError> {
    Ok(match d {
        DecoderArg::Matched => PhaseModel::matched(src),
        DecoderArg::Universal => PhaseModel::universal(src),
        DecoderArg::Mismatched => PhaseModel::mismatched(src, &needs_p_tilde("decoder", mm)?),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn spectrum(a: &SpectrumArgs) -> Out {
    if a.points < 2 {
        return Err(CliError::flag("points", "need at least 2 points"));
    }
    let energy = a
        .energy
        .as_deref()
        .map(parse_range)
        .transpose()
        .map_err(|e| CliError::flag("energy", e))?;
    let rates = a.beta_c.as_deref().map(|s| axis("beta-c", s)).transpose()?;
    if let Some(r) = &rates {
        nonneg("beta-c", r.min())?;
    }

    let spec: Box<dyn EntropySpectrum> = match (&a.source, &a.closed_form) {
        (Some(s), _) => {
            let (src, _) = load_source(s)?;
            Box::new(match kind_of(a.kind) {
                SpectrumKind::ConditionalYGivenX => Spectrum::conditional_y_given_x(&src),
                SpectrumKind::JointXy => Spectrum::joint(&src),
                _ => Spectrum::conditional_x_given_y(&src),
            })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::flag("closed-form", format!("{}: {e}", path.display())))?;
            let cf: ClosedFormSpectrum = serde_json::from_str(&text)
                .map_err(|e| CliError::flag("closed-form", format!("{}: {e}", path.display())))?;
            let cf = match cf {
                ClosedFormSpectrum::Harmonic { kappa, a } => ClosedFormSpectrum::harmonic(kappa, a),
                ClosedFormSpectrum::Linear { max_energy } if max_energy > 0.0 && max_energy.is_finite() => Ok(cf),
                ClosedFormSpectrum::Linear { max_energy } => Err(crate::Error::Config(format!(
                    "linear spectrum needs a finite positive max_energy, got {max_energy}"
                ))),
            }
            .map_err(|e| CliError::flag("closed-form", e.to_string()))?;
            Box::new(cf)
        }
        (None, None) => return Err(CliError::flag("source", "either --source or --closed-form is required")),
    };

    if let Some(r) = rates {
        let mut t = Table::new(&["R", "beta_c"]);
        for rate in r.values() {
            t.push(vec![fmt_f64(rate), fmt_f64(spec.beta_c(rate)?)]);
        }
        return Ok(t.to_csv()?);
    }

    if spec.is_degenerate() {
        return Err(crate::Error::DegenerateSpectrum.into());
    }
    let (lo, hi) = match energy {
        Some(w) => w,
        None => {
            let (lo, hi) = spec.energy_range();
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(CliError::flag("energy", "the energy range is unbounded; give --energy lo:hi"));
            }
            (lo, hi)
        }
    };
    let mut t = Table::new(&["alpha", "epsilon", "entropy"]);
    let window = Axis {
        start: lo,
        stop: hi,
        count: a.points,
    };
    for eps in window.values() {
        let Ok(s) = spec.s_at(eps) else { continue };
        // the slope diverges at the ends of a bounded range
        let alpha = spec
            .slope_at(eps)
            .unwrap_or(if eps <= 0.5 * (lo + hi) { f64::INFINITY } else { f64::NEG_INFINITY });
        t.push(vec![fmt_f64(alpha), fmt_f64(eps), fmt_f64(s)]);
    }
    Ok(t.to_csv()?)
}

fn phase(a: &PhaseArgs) -> Out {
    if a.grid < 2 {
        return Err(CliError::flag("grid", "need at least 2 points"));
    }
    positive("t-max", a.t_max)?;
    let (src, mm) = load_source(&a.source.source)?;
    let model = phase_model(&src, a.decoder, mm)?;
    let mut t = Table::new(&["curve_id", "R", "T"]);
    for p in model.sample_boundaries(a.grid, a.t_max)? {
        t.push(vec![p.curve_id.as_str().into(), fmt_f64(p.r), fmt_f64(p.t)]);
    }
    Ok(t.to_csv()?)
}

/// Output of `classify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub decoder: DecoderKind,
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub phase: Phase,
    pub on_ferro_boundary: bool,
    pub on_glassy_boundary: bool,
    pub boundaries: BoundarySet,
}

fn classify(a: &ClassifyArgs) -> Out {
    let r = nonneg("rate", a.rate)?;
    let temp = positive("temperature", a.temperature)?;
    let (src, mm) = load_source(&a.source.source)?;
    let model = phase_model(&src, a.decoder, mm)?;
    let label = model.classify(r, temp).map_err(CliError::validation)?;
    Ok(to_json(&ClassifyReport {
        decoder: model.kind(),
        rate: r,
        temperature: temp,
        phase: label.phase,
        on_ferro_boundary: label.on_ferro_boundary,
        on_glassy_boundary: label.on_glassy_boundary,
        boundaries: model.boundaries(),
    })?)
}

fn exponent_cmd(a: &ExponentArgs) -> Out {
    let mut rates = a.rate.map(|r| nonneg("rate", r).map(Axis::single)).transpose()?;
    let mut betas = a.beta.as_deref().map(|b| parse_beta("beta", b)).transpose()?.map(|b| vec![b]);
    if let Some(s) = &a.sweep {
        for (name, ax) in parse_sweep(s, &["rate", "beta"]).map_err(|e| CliError::flag("sweep", e))? {
            if name == "rate" {
                nonneg("sweep", ax.min())?;
                rates = Some(ax);
            } else {
                betas = Some(
                    ax.values()
                        .into_iter()
                        .map(|b| Beta::new(b).map_err(|e| CliError::flag("sweep", e.to_string())))
                        .collect::<Result<_, _>>()?,
                );
            }
        }
    }
    let rates = rates.ok_or_else(|| CliError::flag("rate", "give --rate or a rate axis in --sweep"))?;
    let betas = betas.ok_or_else(|| CliError::flag("beta", "give --beta or a beta axis in --sweep"))?;
    let (src, mm) = load_source(&a.source.source)?;
    let metric = metric("metric", a.metric, mm)?;

    let cells: Vec<(f64, Beta)> = rates
        .values()
        .into_iter()
        .flat_map(|r| betas.iter().map(move |&b| (r, b)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(r, b)| {
            exponent(&src, r, b, &metric).map(|e| vec![fmt_f64(r), fmt_f64(b.value()), fmt_f64(e.value), e.phase.as_str().into()])
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut t = Table::new(&["R", "beta", "E", "phase"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t.to_csv()?)
}

fn simulate(a: &SimulateArgs) -> Out {
    let r = nonneg("rate", a.rate)?;
    let beta = parse_beta("beta", &a.beta)?;
    if a.trials == 0 {
        return Err(CliError::flag("trials", "need at least one trial"));
    }
    if a.n == Some(0) || a.sweep_n.contains(&0) {
        return Err(CliError::flag(if a.n.is_some() { "n" } else { "sweep-n" }, "blocklength must be at least 1"));
    }
    let (src, mm) = load_source(&a.source.source)?;
    let metric = metric("metric", a.metric, mm)?;
    let mut cfg = SimConfig::new(src, a.n.unwrap_or(a.sweep_n.first().copied().unwrap_or(1)), r, beta);
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.metric = metric;
    cfg.mode = a.mode;
    cfg.tie_rule = a.tie_rule;
    cfg.all_positions = a.all_positions;

    if a.sweep_n.is_empty() {
        cfg.validate().map_err(CliError::validation)?;
        let report = estimate_ber(&cfg)?;
        return match a.format.unwrap_or(Format::Json) {
            Format::Json => Ok(to_json(&report)?),
            Format::Csv => sweep_table(&[(report.n, report, None, None)]),
        };
    }
    for &n in &a.sweep_n {
        SimConfig { n, ..cfg.clone() }.validate().map_err(CliError::validation)?;
    }
    let points = n_sweep(&cfg, &a.sweep_n)?;
    match a.format.unwrap_or(Format::Csv) {
        Format::Json => Ok(to_json(&points)?),
        Format::Csv => sweep_table(
            &points
                .into_iter()
                .map(|p| (p.n, p.report, p.slope, p.slope_std_error))
                .collect::<Vec<_>>(),
        ),
    }
}

type SweepRow = (usize, crate::sim::SimReport, Option<f64>, Option<f64>);

fn sweep_table(rows: &[SweepRow]) -> Out {
    let mut t = Table::new(&[
        "n",
        "bins",
        "trials",
        "ber",
        "ci_low",
        "ci_high",
        "std_error",
        "slope",
        "slope_std_error",
        "log_z_correct",
        "log_z_error",
        "dominance_fraction",
        "seed",
    ]);
    for (n, r, slope, se) in rows {
        t.push(vec![
            n.to_string(),
            r.bins.to_string(),
            r.trials.to_string(),
            fmt_f64(r.ber.estimate),
            fmt_f64(r.ber.ci_low),
            fmt_f64(r.ber.ci_high),
            fmt_f64(r.ber.std_error),
            opt(slope.or(r.slope_estimate)),
            opt(*se),
            fmt_f64(r.log_z_correct),
            opt(r.log_z_error),
            fmt_f64(r.dominance_fraction),
            r.seeds.seed.to_string(),
        ]);
    }
    Ok(t.to_csv()?)
}

fn dilution(a: &DilutionArgs) -> Out {
    if a.n == 0 {
        return Err(CliError::flag("n", "blocklength must be at least 1"));
    }
    if a.realizations == 0 {
        return Err(CliError::flag("realizations", "need at least one realization"));
    }
    let rate = nonneg("rate", a.rate)?;
    let betas = axis("betas", &a.betas)?;
    nonneg("betas", betas.min())?;
    let (src, _) = load_source(&a.source.source)?;
    let cfg = DilutionConfig {
        kind: kind_of(a.kind),
        n: a.n,
        rate,
        betas: betas.values(),
        realizations: a.realizations,
        seed: a.seed,
    };
    let report = rdm_dilution_experiment(&src, &cfg).map_err(CliError::validation)?;
    match a.format {
        Format::Json => Ok(to_json(&report)?),
        Format::Csv => {
            let mut t = Table::new(&["beta", "measured", "measured_std_error", "entropy", "analytic", "branch"]);
            for c in &report.cells {
                let branch = serde_json::to_value(c.branch)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                t.push(vec![
                    fmt_f64(c.beta),
                    fmt_f64(c.measured),
                    fmt_f64(c.measured_std_error),
                    fmt_f64(c.entropy),
                    fmt_f64(c.analytic),
                    branch,
                ]);
            }
            Ok(t.to_csv()?)
        }
    }
}

/// Reliability thresholds `βH + φ` of the three error events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub x: f64,
    pub y: f64,
    pub xy: f64,
}

/// Output of `two-sided` at a single rate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedReport {
    #[serde(rename = "R_X")]
    pub rate_x: f64,
    #[serde(rename = "R_Y")]
    pub rate_y: f64,
    pub beta: f64,
    pub growth_rates: GrowthRates,
    /// Absent for `β > 1`, where the dominance rule does not apply.
    pub dominant: Option<DominantTerm>,
    pub reliable: bool,
    pub thresholds: Thresholds,
}

fn two_sided(a: &TwoSidedArgs) -> Out {
    let beta = nonneg("beta", a.beta)?;
    let (rx, ry) = match &a.grid {
        Some(g) => {
            let axes = parse_sweep(g, &["rate_x", "rate_y"]).map_err(|e| CliError::flag("grid", e))?;
            let get = |name: &str| {
                axes.iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, ax)| *ax)
                    .ok_or_else(|| CliError::flag("grid", format!("missing axis {name}")))
            };
            (get("rate_x")?, get("rate_y")?)
        }
        None => (
            Axis::single(a.rate_x.ok_or_else(|| CliError::flag("rate-x", "required"))?),
            Axis::single(a.rate_y.ok_or_else(|| CliError::flag("rate-y", "required"))?),
        ),
    };
    let flag = if a.grid.is_some() { ("grid", "grid") } else { ("rate-x", "rate-y") };
    nonneg(flag.0, rx.min())?;
    nonneg(flag.1, ry.min())?;
    let (src, _) = load_source(&a.source.source)?;
    let model = TwoSidedModel::new(&src);
    let (tx, ty, txy) = model.thresholds(beta)?;
    let cell = |r_x: f64, r_y: f64| -> crate::Result<TwoSidedReport> {
        let q = TwoSidedQuery { r_x, r_y, beta };
        Ok(TwoSidedReport {
            rate_x: r_x,
            rate_y: r_y,
            beta,
            growth_rates: model.growth_rates(&q)?,
            dominant: (beta <= 1.0).then(|| model.dominance(&q)).transpose()?,
            reliable: model.reliable(&q),
            thresholds: Thresholds { x: tx, y: ty, xy: txy },
        })
    };
    if a.grid.is_none() {
        return Ok(to_json(&cell(rx.start, ry.start)?)?);
    }
    let pairs: Vec<(f64, f64)> = rx
        .values()
        .into_iter()
        .flat_map(|x| ry.values().into_iter().map(move |y| (x, y)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(x, y)| cell(x, y))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut t = Table::new(&["R_X", "R_Y", "beta", "dominant", "reliable"]);
    for c in cells {
        t.push(vec![
            fmt_f64(c.rate_x),
            fmt_f64(c.rate_y),
            fmt_f64(c.beta),
            c.dominant.map(|d| d.as_str().to_string()).unwrap_or_default(),
            c.reliable.to_string(),
        ]);
    }
    Ok(t.to_csv()?)
}
