//! Entropy-vs-energy spectra `s(ε)` and the random-dilution free energy.
//!
//! For a source, the conditional spectrum is traced by the tilted family
//! `Q_α(x|y) ∝ P^α(x,y)`: the energy is `ε(α) = −Σ P(y) Q_α(x|y) ln P(x,y)`
//! and `s(ε(α)) = Σ_y P(y) ln ζ(α|y) + α ε(α)` with `ζ(α|y) = Σ_x P^α(x,y)`.
//! The slope `s'(ε)` equals `α`, so `α` doubles as the inverse temperature
//! at which `ε` is typical.
//!
//! Diluting each microstate independently with survival probability
//! `e^{−nR}` leaves `e^{n[s(ε)−R]}` states where `s(ε) ≥ R` and none
//! elsewhere, so
//!
//! ```text
//! φ_D(β) = φ(β) − R      β < β_c(R)
//!        = −β s⁻¹(R)     β ≥ β_c(R),     β_c(R) = s'(s⁻¹(R))
//! ```
//!
//! `s⁻¹` is taken on the increasing branch (`α ≥ 0`).
//!
//! At the endpoints of the energy range `s` is defined by continuity, i.e.
//! `s(ε_min) = Σ_y P(y) ln #argmax_x P(x,y)`. When the ground states are
//! degenerate with different multiplicities across `y` this limit is still
//! well defined, but the slope there is infinite.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::source::JointSource;
use crate::tilt::TiltedFamily;

const TABLE_SIZE: usize = 2048;
const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    ConditionalXGivenY,
    ConditionalYGivenX,
    JointXy,
    ClosedForm,
}

/// One point `(α, ε, s(ε))` on a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub epsilon: f64,
    pub entropy: f64,
}

/// Common interface of tabulated and closed-form spectra.
pub trait EntropySpectrum {
    fn kind(&self) -> SpectrumKind;

    /// `[ε_min, ε_max]`; either end may be infinite for closed forms.
    fn energy_range(&self) -> (f64, f64);

    fn s_at(&self, eps: f64) -> Result<f64>;

    /// `s'(ε)`.
    fn slope_at(&self, eps: f64) -> Result<f64>;

    /// Ground-state energy after dilution at rate `r`: the `ε ≤ ε(α=0)`
    /// with `s(ε) = r`.
    fn s_inverse(&self, r: f64) -> Result<f64>;

    /// Normalized log-partition function of the undiluted system.
    fn phi(&self, beta: f64) -> Result<f64>;

    /// Peak of `s`.
    fn max_entropy(&self) -> f64;

    /// `s(ε_min)`; rates at or below it leave exponentially many ground
    /// states alive and the system never freezes.
    fn ground_entropy(&self) -> f64;

    fn is_degenerate(&self) -> bool {
        false
    }

    /// Glassy critical point `β_c(R) = s'(s⁻¹(R))`.
    fn beta_c(&self, r: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateSpectrum);
        }
        if r <= self.ground_entropy() {
            return Ok(f64::INFINITY);
        }
        self.slope_at(self.s_inverse(r)?)
    }
}

/// Branch of the diluted free energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilutedBranch {
    Paramagnetic,
    Glassy,
    /// No microstate survives: the free energy is `−∞`.
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilutedFreeEnergy {
    pub value: f64,
    pub branch: DilutedBranch,
    /// `β_c(r)`, or NaN for degenerate spectra.
    pub beta_c: f64,
}

/// Free energy of the diluted system with its branch. Never errors for
/// rates above the spectrum peak (those give [`DilutedBranch::Empty`]).
pub fn diluted_free_energy<S: EntropySpectrum + ?Sized>(
    spec: &S,
    beta: f64,
    r: f64,
) -> Result<DilutedFreeEnergy> {
    if !(beta >= 0.0) {
        return Err(Error::OutOfRange {
            what: "beta",
            value: beta,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if !(r >= 0.0) {
        return Err(Error::OutOfRange {
            what: "rate",
            value: r,
            lo: 0.0,
            hi: spec.max_entropy(),
        });
    }
    let empty = DilutedFreeEnergy {
        value: f64::NEG_INFINITY,
        branch: DilutedBranch::Empty,
        beta_c: f64::NAN,
    };
    if spec.is_degenerate() {
        let s0 = spec.ground_entropy();
        if r > s0 + ENDPOINT_TOL {
            return Ok(empty);
        }
        let e0 = spec.energy_range().0;
        return Ok(DilutedFreeEnergy {
            value: s0 - r - beta * e0,
            branch: DilutedBranch::Paramagnetic,
            beta_c: f64::NAN,
        });
    }
    if r > spec.max_entropy() {
        return Ok(empty);
    }
    let bc = spec.beta_c(r)?;
    if beta < bc {
        Ok(DilutedFreeEnergy {
            value: spec.phi(beta)? - r,
            branch: DilutedBranch::Paramagnetic,
            beta_c: bc,
        })
    } else {
        Ok(DilutedFreeEnergy {
            value: -beta * spec.s_inverse(r)?,
            branch: DilutedBranch::Glassy,
            beta_c: bc,
        })
    }
}

/// `φ_D(β)` at rate `r`; rates above the spectrum peak are out of range.
pub fn phi_diluted<S: EntropySpectrum + ?Sized>(spec: &S, beta: f64, r: f64) -> Result<f64> {
    if r > spec.max_entropy() && !spec.is_degenerate() {
        return Err(Error::OutOfRange {
            what: "rate",
            value: r,
            lo: 0.0,
            hi: spec.max_entropy(),
        });
    }
    diluted_free_energy(spec, beta, r).map(|d| d.value)
}

/// Spectrum traced by a tilted family.
#[derive(Debug)]
pub struct Spectrum {
    kind: SpectrumKind,
    family: TiltedFamily,
    table: OnceLock<Vec<SpectrumPoint>>,
}

impl Clone for Spectrum {
    fn clone(&self) -> Self {
        Self::from_family(self.kind, self.family.clone())
    }
}

impl Spectrum {
    pub fn from_family(kind: SpectrumKind, family: TiltedFamily) -> Self {
        Self {
            kind,
            family,
            table: OnceLock::new(),
        }
    }

    /// `s_{X|Y}`: the spectrum relevant when `Y` is decoder side information.
    pub fn conditional_x_given_y(src: &JointSource) -> Self {
        Self::from_family(
            SpectrumKind::ConditionalXGivenY,
            TiltedFamily::conditional_x_given_y(src),
        )
    }

    pub fn conditional_y_given_x(src: &JointSource) -> Self {
        Self::from_family(
            SpectrumKind::ConditionalYGivenX,
            TiltedFamily::conditional_y_given_x(src),
        )
    }

    pub fn joint(src: &JointSource) -> Self {
        Self::from_family(SpectrumKind::JointXy, TiltedFamily::joint(src))
    }

    pub fn family(&self) -> &TiltedFamily {
        &self.family
    }

    pub fn epsilon_min(&self) -> f64 {
        -self.family.mean_max()
    }

    pub fn epsilon_max(&self) -> f64 {
        -self.family.mean_min()
    }

    /// Energy of `Q_α`.
    pub fn epsilon_of_alpha(&self, alpha: f64) -> f64 {
        -self.family.mean(alpha)
    }

    /// The unique `α` with `ε(α) = eps`, for `eps` strictly inside the range.
    pub fn alpha_of_epsilon(&self, eps: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateSpectrum);
        }
        let (lo, hi) = (self.epsilon_min(), self.epsilon_max());
        let out = Error::OutOfRange {
            what: "epsilon",
            value: eps,
            lo,
            hi,
        };
        if !(eps > lo && eps < hi) {
            return Err(out);
        }
        self.family.solve_mean(-eps).ok_or(out)
    }

    /// Point on the curve at tilt `alpha`.
    pub fn point(&self, alpha: f64) -> SpectrumPoint {
        let p = self.family.eval(alpha);
        SpectrumPoint {
            alpha,
            epsilon: -p.mean,
            entropy: p.entropy,
        }
    }

    /// `Σ_y P(y) ln ζ(α|y)`, i.e. `φ` at inverse temperature `α`.
    pub fn log_zeta(&self, alpha: f64) -> f64 {
        self.family.log_partition(alpha)
    }

    /// Lazily built table of 2048 points, tanh-spaced in `α` so that most
    /// points fall in `|α| ≤ 5`, sorted by decreasing `α` (so increasing energy). Intended for
    /// plotting; root-finding never reads it.
    pub fn table(&self) -> &[SpectrumPoint] {
        self.table.get_or_init(|| {
            let mut pts: Vec<SpectrumPoint> = (0..TABLE_SIZE)
                .map(|i| {
                    let u = (2 * i + 1) as f64 / TABLE_SIZE as f64 - 1.0;
                    self.point(5.0 * u.atanh())
                })
                .collect();
            pts.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
            pts
        })
    }

    /// Linear interpolation in the table. Plotting only.
    pub fn s_interpolated(&self, eps: f64) -> Option<f64> {
        let t = self.table();
        let i = t.partition_point(|p| p.epsilon < eps);
        if i == 0 || i == t.len() {
            return None;
        }
        let (a, b) = (t[i - 1], t[i]);
        let w = (eps - a.epsilon) / (b.epsilon - a.epsilon);
        Some(a.entropy + w * (b.entropy - a.entropy))
    }

    fn check_in_range(&self, eps: f64) -> Result<()> {
        let (lo, hi) = (self.epsilon_min(), self.epsilon_max());
        if eps < lo - ENDPOINT_TOL || eps > hi + ENDPOINT_TOL || eps.is_nan() {
            return Err(Error::OutOfRange {
                what: "epsilon",
                value: eps,
                lo,
                hi,
            });
        }
        Ok(())
    }
}

impl EntropySpectrum for Spectrum {
    fn kind(&self) -> SpectrumKind {
        self.kind
    }

    fn energy_range(&self) -> (f64, f64) {
        (self.epsilon_min(), self.epsilon_max())
    }

    fn s_at(&self, eps: f64) -> Result<f64> {
        self.check_in_range(eps)?;
        let (lo, hi) = (self.epsilon_min(), self.epsilon_max());
        if eps <= lo + ENDPOINT_TOL {
            return Ok(self.family.ground_entropy());
        }
        if eps >= hi - ENDPOINT_TOL {
            return Ok(self.family.ceiling_entropy());
        }
        let alpha = self.alpha_of_epsilon(eps)?;
        Ok(self.family.log_partition(alpha) + alpha * eps)
    }

    fn slope_at(&self, eps: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateSpectrum);
        }
        self.check_in_range(eps)?;
        if eps <= self.epsilon_min() + ENDPOINT_TOL {
            return Ok(f64::INFINITY);
        }
        if eps >= self.epsilon_max() - ENDPOINT_TOL {
            return Ok(f64::NEG_INFINITY);
        }
        self.alpha_of_epsilon(eps)
    }

    fn s_inverse(&self, r: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateSpectrum);
        }
        let max = self.family.max_entropy();
        if !(r >= 0.0 && r <= max) {
            return Err(Error::OutOfRange {
                what: "rate",
                value: r,
                lo: 0.0,
                hi: max,
            });
        }
        let alpha = self.family.solve_entropy_nonneg(r);
        if alpha.is_infinite() {
            return Ok(self.epsilon_min());
        }
        Ok(self.epsilon_of_alpha(alpha))
    }

    fn phi(&self, beta: f64) -> Result<f64> {
        if !(beta >= 0.0) || beta.is_infinite() {
            return Err(Error::OutOfRange {
                what: "beta",
                value: beta,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(self.family.log_partition(beta))
    }

    fn max_entropy(&self) -> f64 {
        self.family.max_entropy()
    }

    fn ground_entropy(&self) -> f64 {
        self.family.ground_entropy()
    }

    fn is_degenerate(&self) -> bool {
        self.family.is_degenerate()
    }

    /// Solves for `α` directly on the increasing branch rather than going
    /// through `ε`, which keeps precision when `α` is large.
    fn beta_c(&self, r: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateSpectrum);
        }
        let max = self.family.max_entropy();
        if !(r >= 0.0 && r <= max) {
            return Err(Error::OutOfRange {
                what: "rate",
                value: r,
                lo: 0.0,
                hi: max,
            });
        }
        Ok(self.family.solve_entropy_nonneg(r))
    }
}

/// Analytic spectra. Serialized as `{"closed_form": "harmonic", "kappa": …,
/// "a": …}` or `{"closed_form": "linear", "max_energy": …}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "closed_form", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedFormSpectrum {
    /// Harmonic potential `κ‖x‖²/2` on a lattice of spacing `a`:
    /// `s(ε) = ½ ln(4πeε/(κa²))` on `ε > 0`.
    Harmonic { kappa: f64, a: f64 },
    /// `s(ε) = ε` on `[0, max_energy]`: the spectrum seen by the finite-
    /// temperature minimum conditional entropy decoder, with
    /// `max_energy = ln|X|`.
    Linear { max_energy: f64 },
}

impl ClosedFormSpectrum {
    pub fn harmonic(kappa: f64, a: f64) -> Result<Self> {
        if !(kappa > 0.0 && a > 0.0 && kappa.is_finite() && a.is_finite()) {
            return Err(Error::Config(format!(
                "harmonic spectrum needs kappa > 0 and a > 0 (got kappa={kappa}, a={a})"
            )));
        }
        Ok(Self::Harmonic { kappa, a })
    }

    /// `s'(ε)` by its analytic expression.
    pub fn s_prime(&self, eps: f64) -> f64 {
        match *self {
            Self::Harmonic { .. } => 0.5 / eps,
            Self::Linear { .. } => 1.0,
        }
    }

    /// `n` points on an energy grid over `[lo, hi]`.
    pub fn sample(&self, lo: f64, hi: f64, n: usize) -> Vec<SpectrumPoint> {
        let n = n.max(2);
        (0..n)
            .filter_map(|i| {
                let eps = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                let s = self.s_at(eps).ok()?;
                Some(SpectrumPoint {
                    alpha: self.s_prime(eps),
                    epsilon: eps,
                    entropy: s,
                })
            })
            .collect()
    }
}

impl EntropySpectrum for ClosedFormSpectrum {
    fn kind(&self) -> SpectrumKind {
        SpectrumKind::ClosedForm
    }

    fn energy_range(&self) -> (f64, f64) {
        match *self {
            Self::Harmonic { .. } => (0.0, f64::INFINITY),
            Self::Linear { max_energy } => (0.0, max_energy),
        }
    }

    fn s_at(&self, eps: f64) -> Result<f64> {
        let (lo, hi) = self.energy_range();
        match *self {
            Self::Harmonic { kappa, a } if eps > 0.0 => Ok(0.5
                * (4.0 * std::f64::consts::PI * std::f64::consts::E * eps / (kappa * a * a)).ln()),
            Self::Linear { max_energy } if (0.0..=max_energy).contains(&eps) => Ok(eps),
            _ => Err(Error::OutOfRange {
                what: "epsilon",
                value: eps,
                lo,
                hi,
            }),
        }
    }

    fn slope_at(&self, eps: f64) -> Result<f64> {
        self.s_at(eps)?;
        Ok(self.s_prime(eps))
    }

    fn s_inverse(&self, r: f64) -> Result<f64> {
        match *self {
            Self::Harmonic { kappa, a } => Ok(kappa * a * a
                / (4.0 * std::f64::consts::PI * std::f64::consts::E)
                * (2.0 * r).exp()),
            Self::Linear { max_energy } => {
                if (0.0..=max_energy).contains(&r) {
                    Ok(r)
                } else {
                    Err(Error::OutOfRange {
                        what: "rate",
                        value: r,
                        lo: 0.0,
                        hi: max_energy,
                    })
                }
            }
        }
    }

    fn phi(&self, beta: f64) -> Result<f64> {
        let bad = Error::OutOfRange {
            what: "beta",
            value: beta,
            lo: 0.0,
            hi: f64::INFINITY,
        };
        match *self {
            Self::Harmonic { kappa, a } => {
                if !(beta > 0.0) {
                    return Err(bad);
                }
                Ok(0.5 * (2.0 * std::f64::consts::PI / (beta * kappa * a * a)).ln())
            }
            Self::Linear { max_energy } => {
                if !(beta >= 0.0) {
                    return Err(bad);
                }
                Ok(if beta < 1.0 {
                    (1.0 - beta) * max_energy
                } else {
                    0.0
                })
            }
        }
    }

    fn max_entropy(&self) -> f64 {
        match *self {
            Self::Harmonic { .. } => f64::INFINITY,
            Self::Linear { max_energy } => max_energy,
        }
    }

    fn ground_entropy(&self) -> f64 {
        match *self {
            Self::Harmonic { .. } => f64::NEG_INFINITY,
            Self::Linear { .. } => 0.0,
        }
    }

    /// The linear spectrum has slope 1 everywhere, including at `ε = 0`.
    fn beta_c(&self, r: f64) -> Result<f64> {
        let eps = self.s_inverse(r)?;
        Ok(self.s_prime(eps))
    }
}

/// `(s_{X|Y}, s_{Y|X}, s_{XY})` for the two-sided problem. The matching
/// log-partition functions `φ_X`, `φ_Y`, `φ_XY` are their `phi`.
pub fn two_sided_spectra(src: &JointSource) -> (Spectrum, Spectrum, Spectrum) {
    (
        Spectrum::conditional_x_given_y(src),
        Spectrum::conditional_y_given_x(src),
        Spectrum::joint(src),
    )
}
