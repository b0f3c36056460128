//! Phase diagram of the bin partition function `Z = Z_c + Z_e`.
//!
//! Every decoder handled here fits one template: the correct sequence has
//! per-symbol energy `ε_c` and the competitors in the bin form a randomly
//! diluted system with spectrum `s(ε)`. The correct term dominates
//! (ferromagnetic phase) iff `−βε_c ≥ φ_D(β, R)`; otherwise the competitors
//! are either frozen at `s⁻¹(R)` (glassy, `β ≥ β_c(R)`) or typical
//! (paramagnetic).
//!
//! With `β* = s'(ε_c)` the ferromagnetic threshold in `R` is
//!
//! ```text
//! R_f(β) = Γ(β) = βε_c + φ(β)    β < β*
//!        = s(ε_c)                β ≥ β*
//! ```
//!
//! and the three boundaries meet at `(s(ε_c), 1/β*)`.
//!
//! | decoder    | `ε_c`             | competitor spectrum                         | `β*` |
//! |------------|-------------------|---------------------------------------------|------|
//! | matched    | `H(X,Y)`          | `s_{X\|Y}` of `P`                           | 1    |
//! | mismatched | `−E_P ln P̃(X,Y)`  | tilted family of `ln P̃`, weights `P(y)`     | `α(ε_c)` |
//! | universal  | `H(X\|Y)`         | `s(ε) = ε` on `[0, ln\|X\|]`                 | 1    |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::source::{JointSource, MismatchModel};
use crate::spectrum::{ClosedFormSpectrum, EntropySpectrum, Spectrum, SpectrumKind};
use crate::tilt::{bisect, TiltedFamily};

/// Distance in the queried coordinate below which a point is flagged as
/// lying on a boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    Matched,
    Mismatched,
    Universal,
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matched" => Ok(Self::Matched),
            "mismatched" => Ok(Self::Mismatched),
            "universal" | "mce" => Ok(Self::Universal),
            other => Err(Error::Config(format!("unknown decoder '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Ferromagnetic,
    Paramagnetic,
    Glassy,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Ferromagnetic => "ferromagnetic",
            Phase::Paramagnetic => "paramagnetic",
            Phase::Glassy => "glassy",
        }
    }
}

/// Classification of one `(R, T)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub phase: Phase,
    /// Within [`BOUNDARY_TOL`] in `R` of the ferromagnetic threshold.
    pub on_ferro_boundary: bool,
    /// Within [`BOUNDARY_TOL`] in `T` of the para–glassy line `1/β_c(R)`.
    pub on_glassy_boundary: bool,
}

impl PhaseLabel {
    pub fn on_boundary(&self) -> bool {
        self.on_ferro_boundary || self.on_glassy_boundary
    }
}

#[derive(Debug, Clone)]
enum Competitors {
    Tilted(Spectrum),
    Linear(ClosedFormSpectrum),
}

/// Summary of the three phase boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    pub decoder: DecoderKind,
    /// `R = s(ε_c)`: the ferro–glassy line.
    pub ferro_glassy_rate: f64,
    /// `β*`, the inverse temperature of the triple point.
    pub triple_beta: f64,
    /// `ε_c`, energy of the correct sequence.
    pub correct_energy: f64,
}

impl BoundarySet {
    pub fn triple_point(&self) -> (f64, f64) {
        (self.ferro_glassy_rate, 1.0 / self.triple_beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveId {
    FerroGlassy,
    FerroPara,
    ParaGlassy,
}

impl CurveId {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveId::FerroGlassy => "ferro_glassy",
            CurveId::FerroPara => "ferro_para",
            CurveId::ParaGlassy => "para_glassy",
        }
    }
}

/// A vertex of a boundary polyline in the `(R, T)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub curve_id: CurveId,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

/// A decoder reduced to its correct-term energy and competitor spectrum.
#[derive(Debug, Clone)]
pub struct PhaseModel {
    kind: DecoderKind,
    eps_correct: f64,
    beta_star: f64,
    fg_rate: f64,
    competitors: Competitors,
}

impl PhaseModel {
    pub fn matched(src: &JointSource) -> Self {
        Self {
            kind: DecoderKind::Matched,
            eps_correct: src.joint_entropy(),
            beta_star: 1.0,
            fg_rate: src.entropy_x_given_y(),
            competitors: Competitors::Tilted(Spectrum::conditional_x_given_y(src)),
        }
    }

    /// Decoder using `P̃^β` in place of `P^β`.
    pub fn mismatched(src: &JointSource, model: &MismatchModel) -> Self {
        let family = TiltedFamily::by_columns(model.ln_matrix(), src.marginal_y());
        let spec = Spectrum::from_family(SpectrumKind::ConditionalXGivenY, family);
        let eps_c = -src
            .matrix()
            .as_slice()
            .iter()
            .zip(model.ln_matrix().as_slice())
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, l)| p * l)
            .sum::<f64>();
        let (beta_star, fg_rate) = if spec.is_degenerate() {
            (f64::INFINITY, spec.ground_entropy())
        } else {
            match spec.family().solve_mean(-eps_c) {
                Some(a) => (a, spec.log_zeta(a) + a * eps_c),
                None if eps_c <= spec.epsilon_min() + 1e-12 => {
                    (f64::INFINITY, spec.ground_entropy())
                }
                None => (f64::NEG_INFINITY, spec.family().ceiling_entropy()),
            }
        };
        Self {
            kind: DecoderKind::Mismatched,
            eps_correct: eps_c,
            beta_star,
            fg_rate,
            competitors: Competitors::Tilted(spec),
        }
    }

    /// Finite-temperature minimum conditional entropy decoder, with weights
    /// `exp(−βn Ĥ(x'|y))`.
    pub fn universal(src: &JointSource) -> Self {
        let h = src.entropy_x_given_y();
        Self {
            kind: DecoderKind::Universal,
            eps_correct: h,
            beta_star: 1.0,
            fg_rate: h,
            competitors: Competitors::Linear(ClosedFormSpectrum::Linear {
                max_energy: (src.matrix().nx() as f64).ln(),
            }),
        }
    }

    /// Builds the model for `kind`; the mismatched kind needs `model`.
    pub fn for_decoder(
        kind: DecoderKind,
        src: &JointSource,
        model: Option<&MismatchModel>,
    ) -> Result<Self> {
        match kind {
            DecoderKind::Matched => Ok(Self::matched(src)),
            DecoderKind::Universal => Ok(Self::universal(src)),
            DecoderKind::Mismatched => model
                .map(|m| Self::mismatched(src, m))
                .ok_or_else(|| Error::Config("mismatched decoder needs p_tilde in the source file".into())),
        }
    }

    pub fn kind(&self) -> DecoderKind {
        self.kind
    }

    pub fn correct_energy(&self) -> f64 {
        self.eps_correct
    }

    pub fn spectrum(&self) -> &dyn EntropySpectrum {
        match &self.competitors {
            Competitors::Tilted(s) => s,
            Competitors::Linear(s) => s,
        }
    }

    pub fn beta_star(&self) -> f64 {
        self.beta_star
    }

    /// `s(ε_c)`.
    pub fn ferro_glassy_rate(&self) -> f64 {
        self.fg_rate
    }

    pub fn boundaries(&self) -> BoundarySet {
        BoundarySet {
            decoder: self.kind,
            ferro_glassy_rate: self.fg_rate,
            triple_beta: self.beta_star,
            correct_energy: self.eps_correct,
        }
    }

    /// `Γ(β) = βε_c + φ(β)`.
    pub fn gamma(&self, beta: f64) -> Result<f64> {
        Ok(beta * self.eps_correct + self.spectrum().phi(beta)?)
    }

    /// Smallest `β ∈ [0, β*]` with `Γ(β') ≤ r` for all `β' ∈ [β, β*]`.
    /// `Γ` decreases on that interval, from `Γ(0)` down to `s(ε_c)`.
    pub fn gamma_inverse(&self, r: f64) -> Result<f64> {
        let top = self.gamma(0.0)?;
        if r >= top {
            return Ok(0.0);
        }
        let hi = self.beta_star;
        if r < self.fg_rate - 1e-12 || !hi.is_finite() || hi <= 0.0 {
            return Err(Error::OutOfRange {
                what: "rate",
                value: r,
                lo: self.fg_rate,
                hi: top,
            });
        }
        if r <= self.fg_rate {
            return Ok(hi);
        }
        let mut err = None;
        let b = bisect(0.0, hi, |b| match self.gamma(b) {
            Ok(g) => g > r,
            Err(e) => {
                err = Some(e);
                false
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(b),
        }
    }

    /// Ferromagnetic threshold `R_f(β)`.
    pub fn ferro_rate(&self, beta: f64) -> Result<f64> {
        if beta >= self.beta_star {
            Ok(self.fg_rate)
        } else {
            self.gamma(beta)
        }
    }

    /// `β_c(R)` of the competitor spectrum.
    pub fn beta_c(&self, r: f64) -> Result<f64> {
        self.spectrum().beta_c(r)
    }

    /// Phase of `(r, temperature)`. Points exactly on the ferromagnetic
    /// threshold are ferromagnetic.
    pub fn classify(&self, r: f64, temperature: f64) -> Result<PhaseLabel> {
        if !(r >= 0.0) || r.is_infinite() {
            return Err(Error::OutOfRange {
                what: "rate",
                value: r,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if !(temperature > 0.0) {
            return Err(Error::OutOfRange {
                what: "temperature",
                value: temperature,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let beta = 1.0 / temperature;
        let rf = self.ferro_rate(beta)?;
        let on_ferro_boundary = (r - rf).abs() < BOUNDARY_TOL;
        let spec = self.spectrum();
        let glassy_line = |r: f64| -> Result<Option<f64>> {
            if spec.is_degenerate() || r > spec.max_entropy() {
                return Ok(None);
            }
            spec.beta_c(r).map(Some)
        };
        if r >= rf {
            let on_glassy_boundary = match glassy_line(r)? {
                Some(bc) if r <= self.fg_rate + BOUNDARY_TOL => {
                    (temperature - 1.0 / bc).abs() < BOUNDARY_TOL
                }
                _ => false,
            };
            return Ok(PhaseLabel {
                phase: Phase::Ferromagnetic,
                on_ferro_boundary,
                on_glassy_boundary,
            });
        }
        if spec.is_degenerate() {
            return Err(Error::DegenerateSpectrum);
        }
        let bc = spec.beta_c(r)?;
        let phase = if beta >= bc {
            Phase::Glassy
        } else {
            Phase::Paramagnetic
        };
        Ok(PhaseLabel {
            phase,
            on_ferro_boundary,
            on_glassy_boundary: (temperature - 1.0 / bc).abs() < BOUNDARY_TOL,
        })
    }

    /// Polylines of the three boundaries on `grid` points each, for
    /// `T ∈ (0, t_max]`. Sorted by curve id, then `R`, then `T`.
    pub fn sample_boundaries(&self, grid: usize, t_max: f64) -> Result<Vec<BoundaryPoint>> {
        if grid < 2 {
            return Err(Error::Config("grid needs at least 2 points".into()));
        }
        if !(t_max > 0.0) {
            return Err(Error::Config("t_max must be positive".into()));
        }
        let spec = self.spectrum();
        let t_star = 1.0 / self.beta_star;
        let lin = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (grid - 1) as f64;
        let mut out = Vec::with_capacity(3 * grid);

        // Vertical ferro-glassy line from T = 0 up to the triple point.
        let t_top = if spec.is_degenerate() {
            t_max
        } else {
            t_star.min(t_max)
        };
        for i in 0..grid {
            out.push(BoundaryPoint {
                curve_id: CurveId::FerroGlassy,
                r: self.fg_rate,
                t: lin(0.0, t_top, i),
            });
        }

        if !spec.is_degenerate() {
            if t_star < t_max {
                for i in 0..grid {
                    let t = lin(t_star, t_max, i);
                    let beta = if i == 0 { self.beta_star } else { 1.0 / t };
                    out.push(BoundaryPoint {
                        curve_id: CurveId::FerroPara,
                        r: self.ferro_rate(beta)?,
                        t,
                    });
                }
            }
            let r_lo = spec.ground_entropy().max(0.0);
            if self.fg_rate > r_lo {
                for i in 0..grid {
                    let r = lin(r_lo, self.fg_rate, i);
                    let t = if i + 1 == grid {
                        t_star
                    } else {
                        1.0 / spec.beta_c(r)?
                    };
                    if t <= t_max {
                        out.push(BoundaryPoint {
                            curve_id: CurveId::ParaGlassy,
                            r,
                            t,
                        });
                    }
                }
            }
        }
        out.sort_by(|a, b| {
            a.curve_id
                .as_str()
                .cmp(b.curve_id.as_str())
                .then(a.r.total_cmp(&b.r))
                .then(a.t.total_cmp(&b.t))
        });
        Ok(out)
    }
}

/// `T = (ln|X| − H(X|Y)) / (ln|X| − R)`: the ferro–para line of the
/// universal decoder, valid for `H(X|Y) ≤ R < ln|X|`.
pub fn universal_ferro_para_temperature(src: &JointSource, r: f64) -> Result<f64> {
    let l = (src.matrix().nx() as f64).ln();
    let h = src.entropy_x_given_y();
    if !(r >= h - 1e-12 && r < l) {
        return Err(Error::OutOfRange {
            what: "rate",
            value: r,
            lo: h,
            hi: l,
        });
    }
    Ok((l - h) / (l - r))
}

/// `Γ(β)` of the matched decoder.
pub fn gamma(src: &JointSource, beta: f64) -> Result<f64> {
    PhaseModel::matched(src).gamma(beta)
}

/// `Γ⁻¹(R)` of the matched decoder on `[0, 1]`.
pub fn gamma_inverse(src: &JointSource, r: f64) -> Result<f64> {
    PhaseModel::matched(src).gamma_inverse(r)
}

/// Which of the four partial partition functions dominates in two-sided
/// decoding: `c` = correct, `e` = erroneous, first letter for `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominantTerm {
    Cc,
    Ec,
    Ce,
    Ee,
}

impl DominantTerm {
    pub fn as_str(self) -> &'static str {
        match self {
            DominantTerm::Cc => "cc",
            DominantTerm::Ec => "ec",
            DominantTerm::Ce => "ce",
            DominantTerm::Ee => "ee",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedQuery {
    pub r_x: f64,
    pub r_y: f64,
    pub beta: f64,
}

/// Growth rates of `Z_cc, Z_ec, Z_ce, Z_ee` at one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRates {
    pub cc: f64,
    pub ec: f64,
    pub ce: f64,
    pub ee: f64,
}

impl GrowthRates {
    /// Argmax with ties resolved in the order cc, ec, ce, ee.
    pub fn dominant(&self) -> DominantTerm {
        let mut best = (DominantTerm::Cc, self.cc);
        for (t, v) in [
            (DominantTerm::Ec, self.ec),
            (DominantTerm::Ce, self.ce),
            (DominantTerm::Ee, self.ee),
        ] {
            if v > best.1 {
                best = (t, v);
            }
        }
        best.0
    }
}

/// The three spectra of the two-sided problem, built once.
#[derive(Debug, Clone)]
pub struct TwoSidedModel {
    h_xy: f64,
    sx: Spectrum,
    sy: Spectrum,
    sxy: Spectrum,
}

impl TwoSidedModel {
    pub fn new(src: &JointSource) -> Self {
        let (sx, sy, sxy) = crate::spectrum::two_sided_spectra(src);
        Self {
            h_xy: src.joint_entropy(),
            sx,
            sy,
            sxy,
        }
    }

    fn check(q: &TwoSidedQuery) -> Result<()> {
        for (what, v) in [("r_x", q.r_x), ("r_y", q.r_y)] {
            if !(v >= 0.0) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    lo: 0.0,
                    hi: f64::INFINITY,
                });
            }
        }
        if !(q.beta >= 0.0) {
            return Err(Error::OutOfRange {
                what: "beta",
                value: q.beta,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(())
    }

    pub fn growth_rates(&self, q: &TwoSidedQuery) -> Result<GrowthRates> {
        Self::check(q)?;
        let b = q.beta;
        Ok(GrowthRates {
            cc: -b * self.h_xy,
            ec: self.sx.phi(b)? - q.r_x,
            ce: self.sy.phi(b)? - q.r_y,
            ee: self.sxy.phi(b)? - q.r_x - q.r_y,
        })
    }

    /// Dominant term; only defined for `β ≤ 1`, where every erroneous
    /// partial sum is paramagnetic.
    pub fn dominance(&self, q: &TwoSidedQuery) -> Result<DominantTerm> {
        if q.beta > 1.0 {
            return Err(Error::BetaOutOfRange(q.beta));
        }
        Ok(self.growth_rates(q)?.dominant())
    }

    /// Strict reliability conditions
    /// `R_X > βH + φ_X`, `R_Y > βH + φ_Y`, `R_X + R_Y > βH + φ_XY`.
    pub fn reliable(&self, q: &TwoSidedQuery) -> bool {
        let Ok(g) = self.growth_rates(q) else {
            return false;
        };
        g.cc > g.ec && g.cc > g.ce && g.cc > g.ee
    }

    /// The three thresholds `(βH + φ_X, βH + φ_Y, βH + φ_XY)`.
    pub fn thresholds(&self, beta: f64) -> Result<(f64, f64, f64)> {
        let bh = beta * self.h_xy;
        Ok((
            bh + self.sx.phi(beta)?,
            bh + self.sy.phi(beta)?,
            bh + self.sxy.phi(beta)?,
        ))
    }
}

pub fn two_sided_dominance(src: &JointSource, q: &TwoSidedQuery) -> Result<DominantTerm> {
    TwoSidedModel::new(src).dominance(q)
}

pub fn reliability_region_check(src: &JointSource, q: &TwoSidedQuery) -> bool {
    TwoSidedModel::new(src).reliable(q)
}
