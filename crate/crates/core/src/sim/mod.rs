//! Small-blocklength simulator of random binning with a finite-temperature
//! symbol decoder.
//!
//! A trial draws `(x, y)` i.i.d. from the source, drops every sequence of
//! `X^n` into one of `M` bins uniformly at random, and decodes the first
//! symbol of `x` from `y` and the bin of `x` by comparing the posterior
//! masses `Σ_{x' in bin, x'_1 = a} e^{β n ℓ(x', y)}`. Two samplers produce
//! the same distribution of outcomes:
//!
//! * [`SimMode::Enumerate`] visits every sequence and hashes it to a bin;
//! * [`SimMode::TypeClass`] draws, for every conditional type class of
//!   `x'` against `y`, how many of its members land in the bin of `x`. The
//!   counts are independent binomials because bins are assigned
//!   independently, so this is exact in law at a cost polynomial in `n`.
//!
//! Trial `t` reads ChaCha8 stream `2t` of the configured seed for the source
//! and stream `2t + 1` for the binning, so outcomes do not depend on which
//! worker ran the trial. Aggregation runs over fixed chunks in index order.

mod classes;
pub mod dilution;
mod stats;
mod trial;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{Beta, MetricKind};
use crate::logmath::KahanSum;
use crate::source::JointSource;

pub use dilution::{rdm_dilution_experiment, DilutionCell, DilutionConfig, DilutionReport};
pub use stats::{wilson, Proportion};
pub use trial::TrialRecord;

/// Largest `|X|^n` the simulator accepts.
pub const SEQUENCE_BUDGET: u64 = 1 << 26;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

const MAX_BINS: u64 = 1 << 62;
const CHUNK: u64 = 256;

/// How a trial finds the contents of the bin of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Enumerate,
    TypeClass,
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(SimMode::Enumerate),
            "type_class" | "type-class" => Ok(SimMode::TypeClass),
            _ => Err(Error::Config(format!("unknown simulation mode '{s}'"))),
        }
    }
}

/// Scoring of a posterior tie that includes the true symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// A `k`-way tie costs `(k − 1)/k`, the error of a uniform pick.
    Fractional,
    /// The lowest symbol index wins.
    LowestIndex,
    /// Any tie is an error.
    Pessimistic,
}

impl FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fractional" => Ok(TieRule::Fractional),
            "lowest_index" | "lowest-index" => Ok(TieRule::LowestIndex),
            "pessimistic" => Ok(TieRule::Pessimistic),
            _ => Err(Error::Config(format!("unknown tie rule '{s}'"))),
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMode::Enumerate => "enumerate",
            SimMode::TypeClass => "type_class",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub source: JointSource,
    pub n: usize,
    /// Nats per symbol.
    pub rate: f64,
    /// `Beta::Infinite` decodes with the word-MAP rule.
    pub beta: Beta,
    pub trials: u64,
    pub seed: u64,
    pub metric: MetricKind,
    pub mode: SimMode,
    pub tie_rule: TieRule,
    /// Average the error over every position instead of the first only.
    pub all_positions: bool,
}

impl SimConfig {
    pub fn new(source: JointSource, n: usize, rate: f64, beta: Beta) -> Self {
        Self {
            source,
            n,
            rate,
            beta,
            trials: 1000,
            seed: DEFAULT_SEED,
            metric: MetricKind::Matched,
            mode: SimMode::TypeClass,
            tie_rule: TieRule::Fractional,
            all_positions: false,
        }
    }

    /// `M = round(e^{nR})`, at least 2 for `R > 0`; `M = 1` at `R = 0`.
    pub fn bins(&self) -> u64 {
        if self.rate <= 0.0 {
            return 1;
        }
        let m = (self.n as f64 * self.rate).exp().round();
        m.clamp(2.0, MAX_BINS as f64) as u64
    }

    /// `|X|^n` as a float (it may overflow an integer).
    pub fn sequences(&self) -> f64 {
        (self.source.nx() as f64).powi(self.n as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("blocklength n must be at least 1".into()));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::OutOfRange {
                what: "rate",
                value: self.rate,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sequences() > SEQUENCE_BUDGET as f64 {
            return Err(Error::MemoryBudgetExceeded {
                sequences: self.sequences(),
                budget: SEQUENCE_BUDGET,
            });
        }
        if let MetricKind::Mismatched(m) = &self.metric {
            if m.matrix().nx() != self.source.nx() || m.matrix().ny() != self.source.ny() {
                return Err(Error::Config("mismatched metric has the wrong shape".into()));
            }
        }
        Ok(())
    }
}

/// Provenance of the random streams behind a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub generator: String,
    /// Stream layout, trial `t` reading `source_stream = 2t`,
    /// `bin_stream = 2t + 1`.
    pub streams: String,
}

impl SeedRecord {
    fn new(seed: u64) -> Self {
        Self {
            seed,
            generator: "chacha8".into(),
            streams: "source 2t, binning 2t+1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub rate: f64,
    pub bins: u64,
    pub beta: Beta,
    pub metric: String,
    pub mode: SimMode,
    pub tie_rule: TieRule,
    pub all_positions: bool,
    pub trials: u64,
    pub ber: Proportion,
    /// Mean of `(1/n) ln Z_c`.
    pub log_z_correct: f64,
    /// Mean of `(1/n) ln Z_e` over trials whose bin holds a competitor.
    pub log_z_error: Option<f64>,
    /// Fraction of trials in which `x` was alone in its bin.
    pub empty_bin_fraction: f64,
    /// Fraction of trials with `Z_c > Z_e`.
    pub dominance_fraction: f64,
    /// `−(1/n) ln BER`; absent when no error was observed.
    pub slope_estimate: Option<f64>,
    pub seeds: SeedRecord,
}

#[derive(Default)]
struct Tally {
    errors: f64,
    errors_sq: f64,
    dominant: u64,
    log_zc: f64,
    log_ze: f64,
    nonempty: u64,
}

/// Runs trial `trial` of `cfg`.
pub fn run_binning_trial(cfg: &SimConfig, trial: u64) -> Result<TrialRecord> {
    cfg.validate()?;
    trial::Context::new(cfg)?.run(trial)
}

/// Monte Carlo bit-error rate with a Wilson 95% interval.
pub fn estimate_ber(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let ctx = trial::Context::new(cfg)?;
    let chunks = cfg.trials.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
                let rec = ctx.run(i)?;
                t.errors += rec.error;
                t.errors_sq += rec.error * rec.error;
                t.log_zc += rec.log_z_correct;
                if rec.log_z_error > f64::NEG_INFINITY {
                    t.log_ze += rec.log_z_error;
                    t.nonempty += 1;
                }
                if rec.log_z_correct > rec.log_z_error {
                    t.dominant += 1;
                }
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;

    let mut errors = KahanSum::default();
    let mut errors_sq = KahanSum::default();
    let mut log_zc = KahanSum::default();
    let mut log_ze = KahanSum::default();
    let (mut dominant, mut nonempty) = (0u64, 0u64);
    for t in &tallies {
        errors.add(t.errors);
        errors_sq.add(t.errors_sq);
        log_zc.add(t.log_zc);
        log_ze.add(t.log_ze);
        dominant += t.dominant;
        nonempty += t.nonempty;
    }
    let trials = cfg.trials;
    let nt = trials as f64;
    let mut ber = wilson(errors.value(), trials);
    if cfg.all_positions {
        // per-trial errors are averages, not Bernoulli draws
        let mean = errors.value() / nt;
        let var = (errors_sq.value() / nt - mean * mean).max(0.0);
        ber.std_error = (var / nt).sqrt();
    }
    let slope = (ber.estimate > 0.0).then(|| -ber.estimate.ln() / cfg.n as f64);
    Ok(SimReport {
        n: cfg.n,
        rate: cfg.rate,
        bins: cfg.bins(),
        beta: cfg.beta,
        metric: cfg.metric.name().into(),
        mode: cfg.mode,
        tie_rule: cfg.tie_rule,
        all_positions: cfg.all_positions,
        trials,
        ber,
        log_z_correct: log_zc.value() / nt,
        log_z_error: (nonempty > 0).then(|| log_ze.value() / nonempty as f64),
        empty_bin_fraction: (trials - nonempty) as f64 / nt,
        dominance_fraction: dominant as f64 / nt,
        slope_estimate: slope,
        seeds: SeedRecord::new(cfg.seed),
    })
}

/// One blocklength of an N-sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub report: SimReport,
    /// `−(1/n) ln BER` and its delta-method standard error.
    pub slope: Option<f64>,
    pub slope_std_error: Option<f64>,
}

/// Runs `cfg` at every blocklength in `ns`; the rate stays fixed.
pub fn n_sweep(cfg: &SimConfig, ns: &[usize]) -> Result<Vec<SweepPoint>> {
    ns.iter()
        .map(|&n| {
            let mut c = cfg.clone();
            c.n = n;
            let report = estimate_ber(&c)?;
            let p = report.ber.estimate;
            let (slope, se) = if p > 0.0 {
                (
                    Some(-p.ln() / n as f64),
                    Some(report.ber.std_error / (p * n as f64)),
                )
            } else {
                (None, None)
            };
            Ok(SweepPoint {
                n,
                report,
                slope,
                slope_std_error: se,
            })
        })
        .collect()
}

/// True when consecutive slopes never drop by more than `k` combined
/// standard errors.
pub fn slopes_nondecreasing(points: &[SweepPoint], k: f64) -> bool {
    points.windows(2).all(|w| match (w[0].slope, w[1].slope) {
        (Some(a), Some(b)) => {
            let sa = w[0].slope_std_error.unwrap_or(0.0);
            let sb = w[1].slope_std_error.unwrap_or(0.0);
            b >= a - k * (sa * sa + sb * sb).sqrt()
        }
        // no observed error means an unbounded slope
        (_, None) => true,
        (None, Some(_)) => false,
    })
}

/// Dominance statistics of one `(R, T)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceCell {
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub fraction: f64,
    pub ber: f64,
    pub trials: u64,
}

/// Fraction of trials with `Z_c > Z_e` on the grid `rates × temperatures`
/// (rate-major order). Every cell reuses the seed of `cfg`.
pub fn dominance_map(cfg: &SimConfig, rates: &[f64], temperatures: &[f64]) -> Result<Vec<DominanceCell>> {
    let mut out = Vec::with_capacity(rates.len() * temperatures.len());
    for &r in rates {
        for &t in temperatures {
            if !(t > 0.0) {
                return Err(Error::OutOfRange {
                    what: "temperature",
                    value: t,
                    lo: 0.0,
                    hi: f64::INFINITY,
                });
            }
            let mut c = cfg.clone();
            c.rate = r;
            c.beta = Beta::new(1.0 / t)?;
            let rep = estimate_ber(&c)?;
            out.push(DominanceCell {
                rate: r,
                temperature: t,
                fraction: rep.dominance_fraction,
                ber: rep.ber.estimate,
                trials: rep.trials,
            });
        }
    }
    Ok(out)
}

/// Rates at which the dominance fraction first crosses `lo` and then `hi`
/// along increasing `R` (linear interpolation between cells). Points must
/// be `(R, fraction)` sorted by `R`.
pub fn transition_band(points: &[(f64, f64)], lo: f64, hi: f64) -> Option<(f64, f64)> {
    let crossing = |level: f64| -> Option<f64> {
        let first = points.first()?;
        if first.1 >= level {
            return Some(first.0);
        }
        points.windows(2).find_map(|w| {
            let ((r0, f0), (r1, f1)) = (w[0], w[1]);
            (f0 < level && f1 >= level).then(|| r0 + (level - f0) / (f1 - f0) * (r1 - r0))
        })
    };
    Some((crossing(lo)?, crossing(hi)?))
}
