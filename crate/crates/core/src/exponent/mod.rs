//! Exact random-binning bit-error exponent
//!
//! ```text
//! E(R, β) = min_{Q_XY} [ D(Q_XY‖P) + A(Q_XY, R, β) ]
//! A = min_{Q_{X'|Y}} { [R − H_Q(X'|Y)]_+ : ℓ(Q_{X'Y}) + [H_Q(X'|Y) − R]_+ / β ≥ ℓ(Q_XY) }
//! ```
//!
//! with `Q_{X'Y} = Q_Y × Q_{X'|Y}` sharing the `Y`-marginal of `Q_XY` and
//! `ℓ` the signed decoding metric (`Σ Q ln P` for the matched decoder). The
//! inner problem is evaluated in the equivalent form
//! `A = E_1(βℓ(Q_XY))`, see [`inner_e1`].

mod inner;
mod mce;
mod outer;
pub(crate) mod simplex;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logmath::pos;
use crate::source::{ConditionalType, JointSource, JointType, Matrix, MismatchModel};

use inner::InnerModel;
use outer::LinearProblem;

/// Decoding metric.
#[derive(Debug, Clone)]
pub enum MetricKind {
    Matched,
    Mismatched(MismatchModel),
    /// `ℓ(Q) = −H_Q(X|Y)`.
    MinConditionalEntropy,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Matched => "matched",
            MetricKind::Mismatched(_) => "mismatched",
            MetricKind::MinConditionalEntropy => "mce",
        }
    }

    fn scores<'a>(&'a self, src: &'a JointSource) -> Option<&'a Matrix> {
        match self {
            MetricKind::Matched => Some(src.ln_matrix()),
            MetricKind::Mismatched(m) => Some(m.ln_matrix()),
            MetricKind::MinConditionalEntropy => None,
        }
    }

    /// `ℓ(Q_XY)`; `−∞` if `Q` touches a zero of a probabilistic metric.
    pub fn evaluate(&self, src: &JointSource, q: &JointType) -> f64 {
        match self.scores(src) {
            Some(m) => {
                let mut l = 0.0;
                for x in 0..q.nx() {
                    for y in 0..q.ny() {
                        let v = q.get(x, y);
                        if v > 0.0 {
                            l += v * m.get(x, y);
                        }
                    }
                }
                l
            }
            None => -q.conditional_entropy(),
        }
    }

    fn inner(&self, src: &JointSource, q_y: &[f64]) -> InnerModel {
        match self.scores(src) {
            Some(m) => InnerModel::tilted(m, q_y),
            None => InnerModel::Entropy {
                log_nx: (src.nx() as f64).ln(),
            },
        }
    }
}

/// Inverse decoding temperature, with the word-MAP limit as a distinct value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        if beta == f64::INFINITY {
            Ok(Beta::Infinite)
        } else if beta > 0.0 && beta.is_finite() {
            Ok(Beta::Finite(beta))
        } else {
            Err(Error::OutOfRange {
                what: "beta",
                value: beta,
                lo: 0.0,
                hi: f64::INFINITY,
            })
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Beta::Finite(b) => b,
            Beta::Infinite => f64::INFINITY,
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "∞" => Ok(Beta::Infinite),
            t => {
                let b: f64 = t
                    .parse()
                    .map_err(|_| Error::Config(format!("cannot parse beta '{t}'")))?;
                Beta::new(b)
            }
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Beta::new(b).map_err(serde::de::Error::custom),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Region of the `(R, β)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentPhase {
    /// `E = 0`: paramagnetic or glassy posterior.
    Zero,
    /// `E > 0` at `β ≥ 1`, where the exponent equals its word-MAP value.
    FerroBetaGe1,
    /// `E > 0` at `β < 1`.
    FerroBetaLt1,
    /// `E > 0` for metrics without the `β = 1` subdivision.
    Positive,
}

impl ExponentPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            ExponentPhase::Zero => "zero",
            ExponentPhase::FerroBetaGe1 => "ferro_beta_ge_1",
            ExponentPhase::FerroBetaLt1 => "ferro_beta_lt_1",
            ExponentPhase::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExponentResult {
    /// `E(R, β)`, `+∞` when every type is infeasible.
    pub value: f64,
    pub minimizing_q_xy: JointType,
    pub minimizing_q_xprime: ConditionalType,
    pub feasible: bool,
    pub phase: ExponentPhase,
}

/// `E_1(t)` at one `Q_Y`, with the threshold `r_0` below which it vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerExponent {
    pub t: f64,
    pub value: f64,
    pub r0: f64,
}

fn check_rate(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "rate",
            value: r,
            lo: 0.0,
            hi: f64::INFINITY,
        })
    }
}

fn check_marginal(src: &JointSource, q_y: &[f64]) -> Result<()> {
    if q_y.len() != src.ny() {
        return Err(Error::InvalidSource(format!(
            "q_y has {} entries but |Y| = {}",
            q_y.len(),
            src.ny()
        )));
    }
    let s: f64 = q_y.iter().sum();
    if q_y.iter().any(|&v| !(v >= 0.0)) || (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidSource("q_y is not a distribution".into()));
    }
    Ok(())
}

/// `A(Q_XY, R, β)`; `+∞` when the constraint set is empty.
pub fn a_term(src: &JointSource, q_xy: &JointType, r: f64, beta: Beta, metric: &MetricKind) -> f64 {
    let q_y = q_xy.marginal_y();
    let l0 = metric.evaluate(src, q_xy);
    metric.inner(src, &q_y).a_term(l0, beta, r)
}

/// `E_1(t, β, R, Q_Y) = min{[R − H'] _+ : βℓ' + [H' − R]_+ ≥ t}` and `r_0(Q_Y)`.
pub fn inner_e1(
    src: &JointSource,
    t: f64,
    beta: f64,
    r: f64,
    q_y: &[f64],
    metric: &MetricKind,
) -> Result<InnerExponent> {
    check_rate(r)?;
    check_marginal(src, q_y)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::OutOfRange {
            what: "beta",
            value: beta,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let (value, r0) = metric.inner(src, q_y).e1(t, beta, r);
    Ok(InnerExponent { t, value, r0 })
}

fn tilt_columns(src: &JointSource, scores: &Matrix, q_y: &[f64], alpha: f64) -> ConditionalType {
    let (nx, ny) = (src.nx(), src.ny());
    let mut q = vec![0.0; nx * ny];
    let mut filled = vec![false; ny];
    for y in 0..ny {
        if q_y[y] <= 0.0 {
            continue;
        }
        let logits: Vec<f64> = (0..nx)
            .map(|x| {
                let m = scores.get(x, y);
                if m.is_finite() {
                    alpha * m
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let z = crate::logmath::log_sum_exp(&logits);
        if !z.is_finite() {
            continue;
        }
        filled[y] = true;
        for x in 0..nx {
            q[x * ny + y] = (logits[x] - z).exp();
        }
    }
    outer::fill_missing(src, &mut q, &filled);
    ConditionalType::new(Matrix::from_fn(nx, ny, |x, y| q[x * ny + y])).expect("normalized columns")
}

fn conditional_of(src: &JointSource, q: &JointType) -> ConditionalType {
    let (nx, ny) = (src.nx(), src.ny());
    let q_y = q.marginal_y();
    let mut c = vec![0.0; nx * ny];
    let mut filled = vec![false; ny];
    for y in 0..ny {
        if q_y[y] > 0.0 {
            filled[y] = true;
            for x in 0..nx {
                c[x * ny + y] = q.get(x, y) / q_y[y];
            }
        }
    }
    outer::fill_missing(src, &mut c, &filled);
    ConditionalType::new(Matrix::from_fn(nx, ny, |x, y| c[x * ny + y])).expect("normalized columns")
}

/// `A(P, R, β) = 0`: the exponent vanishes.
fn vanishes(src: &JointSource, r: f64, beta: Beta, metric: &MetricKind) -> bool {
    a_term(src, &src.as_joint_type(), r, beta, metric) <= 0.0
}

/// Phase of `(R, β)` without computing the exponent value.
pub fn exponent_phase(src: &JointSource, r: f64, beta: Beta, metric: &MetricKind) -> Result<ExponentPhase> {
    check_rate(r)?;
    Ok(if vanishes(src, r, beta, metric) {
        ExponentPhase::Zero
    } else if matches!(metric, MetricKind::MinConditionalEntropy) {
        ExponentPhase::Positive
    } else if beta.value() >= 1.0 {
        ExponentPhase::FerroBetaGe1
    } else {
        ExponentPhase::FerroBetaLt1
    })
}

/// `E(R, β)` with its minimizers.
pub fn exponent(src: &JointSource, r: f64, beta: Beta, metric: &MetricKind) -> Result<ExponentResult> {
    let phase = exponent_phase(src, r, beta, metric)?;
    let p_y = src.marginal_y().to_vec();

    if let Some(scores) = metric.scores(src) {
        let witness = |q_y: &[f64], l0: f64| {
            let alpha = metric
                .inner(src, q_y)
                .witness_alpha(l0, beta, r)
                .unwrap_or(0.0);
            tilt_columns(src, scores, q_y, alpha)
        };
        if phase == ExponentPhase::Zero {
            let p = src.as_joint_type();
            let l0 = metric.evaluate(src, &p);
            return Ok(ExponentResult {
                value: 0.0,
                minimizing_q_xprime: witness(&p_y, l0),
                minimizing_q_xy: p,
                feasible: true,
                phase,
            });
        }
        let problem = LinearProblem {
            src,
            metric: scores,
            r,
            beta,
        };
        let (q_y, cand, value) = problem.solve();
        let q_xy = JointSource::compose(&q_y, &problem.conditional(&q_y, cand.lambda));
        let l0 = metric.evaluate(src, &q_xy);
        return Ok(ExponentResult {
            value: pos(value),
            minimizing_q_xprime: witness(&q_y, l0),
            minimizing_q_xy: q_xy,
            feasible: value.is_finite(),
            phase,
        });
    }

    let inner = metric.inner(src, &p_y);
    let h_t = -inner.tau(beta, r);
    let sol = if phase == ExponentPhase::Zero {
        mce::EntropySolution {
            value: 0.0,
            q_xy: src.as_joint_type(),
            a_zero: true,
        }
    } else {
        mce::solve(src, r, h_t)
    };
    let log_nx = (src.nx() as f64).ln();
    let uniform_wins = sol.a_zero && beta.value() <= 1.0 && r <= log_nx;
    let q_xprime = if uniform_wins {
        ConditionalType::new(Matrix::from_fn(src.nx(), src.ny(), |_, _| 1.0 / src.nx() as f64))
            .expect("uniform columns")
    } else {
        conditional_of(src, &sol.q_xy)
    };
    Ok(ExponentResult {
        value: pos(sol.value),
        minimizing_q_xy: sol.q_xy,
        minimizing_q_xprime: q_xprime,
        feasible: sol.value.is_finite(),
        phase,
    })
}

/// `E(R, ∞)`, the word-error exponent of the matched decoder.
pub fn exponent_word(src: &JointSource, r: f64) -> Result<f64> {
    Ok(exponent(src, r, Beta::Infinite, &MetricKind::Matched)?.value)
}
