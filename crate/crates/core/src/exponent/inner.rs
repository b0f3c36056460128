//! The inner problem over competitor conditionals `Q_{X'|Y}` at a fixed
//! side-information type `Q_Y`.
//!
//! With `ℓ` the signed decoding metric, the competitor count at conditional
//! type `Q'` is about `e^{n(H' − R)}` and each competitor weighs
//! `e^{nβℓ'}`. Two quantities describe everything:
//!
//! * `r_0 = max{βℓ' + H' : H' ≥ R} − R`, the typical log-mass of the bin,
//! * `Hmax(c) = max{H' : ℓ' ≥ c}`, the richest competitor class that still
//!   beats a correct term with metric `c`.
//!
//! Then `E_1(t) = 0` for `t ≤ r_0` and `E_1(t) = [R − Hmax(t/β)]_+`
//! otherwise (`+∞` when no competitor reaches `t/β`). The `A`-term of a
//! correct type with metric `ℓ_0` is `E_1(βℓ_0)`. For `β = ∞` the threshold
//! `r_0/β` becomes `max{ℓ' : H' ≥ R}`.
//!
//! For metrics linear in `Q` the maximizers are members of the tilted family
//! `Q'_α(x|y) ∝ exp(α m(x,y))` with weights `Q_Y`, so both quantities
//! reduce to one-dimensional root finding. For the minimum conditional
//! entropy metric `ℓ' = −H'` they are closed form.

use crate::logmath::pos;
use crate::source::Matrix;
use crate::tilt::TiltedFamily;

use super::Beta;

const EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) enum InnerModel {
    Tilted(TiltedFamily),
    /// `ℓ' = −H'` with `H' ∈ [0, ln|X|]`.
    Entropy { log_nx: f64 },
}

impl InnerModel {
    pub(crate) fn tilted(metric: &Matrix, q_y: &[f64]) -> Self {
        Self::Tilted(TiltedFamily::by_columns(metric, q_y))
    }

    /// Largest competitor conditional entropy.
    pub(crate) fn max_entropy(&self) -> f64 {
        match self {
            Self::Tilted(f) => f.max_entropy(),
            Self::Entropy { log_nx } => *log_nx,
        }
    }

    /// `r_0(Q_Y)` at finite `β`; `−∞` when no competitor class has `H' ≥ R`.
    pub(crate) fn r0(&self, beta: f64, r: f64) -> f64 {
        if r > self.max_entropy() {
            return f64::NEG_INFINITY;
        }
        match self {
            Self::Tilted(f) => {
                let p = f.eval(beta);
                if p.entropy >= r {
                    p.log_partition - r
                } else {
                    let a = f.solve_entropy_nonneg(r);
                    beta * f.mean(a)
                }
            }
            Self::Entropy { log_nx } => {
                if beta <= 1.0 {
                    (1.0 - beta) * log_nx - r
                } else {
                    -beta * r
                }
            }
        }
    }

    /// Metric threshold `τ`: the `A`-term vanishes iff `ℓ_0 ≤ τ`.
    pub(crate) fn tau(&self, beta: Beta, r: f64) -> f64 {
        match beta {
            Beta::Finite(b) => self.r0(b, r) / b,
            Beta::Infinite => {
                if r > self.max_entropy() {
                    return f64::NEG_INFINITY;
                }
                match self {
                    Self::Tilted(f) => {
                        let a = f.solve_entropy_nonneg(r);
                        if a.is_infinite() {
                            f.mean_max()
                        } else {
                            f.mean(a)
                        }
                    }
                    Self::Entropy { .. } => -r,
                }
            }
        }
    }

    /// `Hmax(c)`, or `−∞` when no competitor has metric `≥ c`.
    pub(crate) fn hmax(&self, c: f64) -> f64 {
        match self {
            Self::Tilted(f) => {
                let top = f.mean_max();
                if c > top + EDGE_TOL * (1.0 + top.abs()) {
                    return f64::NEG_INFINITY;
                }
                if c <= f.mean(0.0) {
                    return f.max_entropy();
                }
                match f.solve_mean(c) {
                    Some(a) => f.entropy(a),
                    None => f.ground_entropy(),
                }
            }
            Self::Entropy { log_nx } => {
                if c > EDGE_TOL {
                    f64::NEG_INFINITY
                } else {
                    log_nx.min(-c)
                }
            }
        }
    }

    /// `A` for a correct type with metric `l0`.
    pub(crate) fn a_term(&self, l0: f64, beta: Beta, r: f64) -> f64 {
        let tau = self.tau(beta, r);
        self.a_term_with_tau(l0, tau, r)
    }

    pub(crate) fn a_term_with_tau(&self, l0: f64, tau: f64, r: f64) -> f64 {
        if l0 <= tau {
            return 0.0;
        }
        let h = self.hmax(l0);
        if h == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            pos(r - h)
        }
    }

    /// `E_1(t)` at finite `β`, together with `r_0`.
    pub(crate) fn e1(&self, t: f64, beta: f64, r: f64) -> (f64, f64) {
        let r0 = self.r0(beta, r);
        if t <= r0 {
            return (0.0, r0);
        }
        let h = self.hmax(t / beta);
        let v = if h == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            pos(r - h)
        };
        (v, r0)
    }

    /// Tilt `α` of a competitor class attaining the inner minimum for a
    /// correct metric `l0` (tilted model only).
    pub(crate) fn witness_alpha(&self, l0: f64, beta: Beta, r: f64) -> Option<f64> {
        let Self::Tilted(f) = self else {
            return None;
        };
        let tau = self.tau(beta, r);
        if l0 <= tau {
            // Any class with H' ≥ R reaching the threshold works.
            if let Beta::Finite(b) = beta {
                if f.entropy(b) >= r {
                    return Some(b);
                }
            }
            return Some(f.solve_entropy_nonneg(r).min(1e6));
        }
        if l0 <= f.mean(0.0) {
            return Some(0.0);
        }
        Some(f.solve_mean(l0).unwrap_or(1e6))
    }
}
