//! Weighted tilted families.
//!
//! A family is a list of groups `g` with weights `w_g ≥ 0` and log-scores
//! `v_g(x)` (`-inf` marks an excluded letter). The member at tilt `α` is
//! `Q_α(x|g) ∝ exp(α v_g(x))`. With `v = ln P(x,y)` grouped by `y` and
//! `w = P(y)` this is the conditional family whose energy/entropy curve is
//! the entropy spectrum; with `w = Q_Y` it is the same family under a
//! different side-information type, which is what the exponent needs.
//!
//! Conventions: `mean(α) = Σ_g w_g E_α[v_g]` (a log-likelihood rate),
//! `log_partition(α) = Σ_g w_g ln Σ_x exp(α v_g(x))`,
//! `entropy(α) = Σ_g w_g H(Q_α(·|g)) = log_partition(α) − α·mean(α)`.

use crate::source::{JointSource, Matrix};

/// Evaluation of the family at one tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltPoint {
    pub alpha: f64,
    pub log_partition: f64,
    pub mean: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone)]
struct Group {
    weight: f64,
    values: Vec<f64>,
    max: f64,
    min: f64,
    n_max: usize,
    n_min: usize,
    support: usize,
}

const TIE_TOL: f64 = 1e-12;
const ALPHA_CAP: f64 = 1e12;

impl Group {
    fn new(weight: f64, values: Vec<f64>) -> Self {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let n_max = finite.iter().filter(|&&v| (v - max).abs() <= TIE_TOL).count();
        let n_min = finite.iter().filter(|&&v| (v - min).abs() <= TIE_TOL).count();
        Self {
            weight,
            values,
            max,
            min,
            n_max,
            n_min,
            support: finite.len(),
        }
    }

    /// (ln Z, E[v], H) at tilt `alpha`.
    fn eval(&self, alpha: f64) -> (f64, f64, f64) {
        // Shift by the dominant score so the largest term is exp(0).
        let shift = if alpha >= 0.0 {
            alpha * self.max
        } else {
            alpha * self.min
        };
        let mut z = 0.0;
        let mut zv = 0.0;
        for &v in &self.values {
            if v.is_finite() {
                let e = (alpha * v - shift).exp();
                z += e;
                zv += e * v;
            }
        }
        let log_z = shift + z.ln();
        let mean = zv / z;
        let mut h = 0.0;
        for &v in &self.values {
            if v.is_finite() {
                let neg_log_q = log_z - alpha * v;
                h += (-neg_log_q).exp() * neg_log_q;
            }
        }
        (log_z, mean, h.max(0.0))
    }
}

#[derive(Debug, Clone)]
pub struct TiltedFamily {
    groups: Vec<Group>,
}

impl TiltedFamily {
    /// Builds a family from `(weight, log-scores)` pairs. Groups with zero
    /// weight or no admissible letter are dropped.
    pub fn new(groups: impl IntoIterator<Item = (f64, Vec<f64>)>) -> Self {
        let groups = groups
            .into_iter()
            .filter(|(w, v)| *w > 0.0 && v.iter().any(|s| s.is_finite()))
            .map(|(w, v)| Group::new(w, v))
            .collect();
        Self { groups }
    }

    /// Columns of `ln_scores` (indexed by `y`) weighted by `w_y`.
    pub fn by_columns(ln_scores: &Matrix, w_y: &[f64]) -> Self {
        Self::new((0..ln_scores.ny()).map(|y| {
            (
                w_y[y],
                (0..ln_scores.nx()).map(|x| ln_scores.get(x, y)).collect(),
            )
        }))
    }

    /// The `X|Y` family of a source: groups `y`, weights `P(y)`.
    pub fn conditional_x_given_y(src: &JointSource) -> Self {
        Self::by_columns(src.ln_matrix(), src.marginal_y())
    }

    /// The `Y|X` family: groups `x`, weights `P(x)`.
    pub fn conditional_y_given_x(src: &JointSource) -> Self {
        Self::by_columns(&src.ln_matrix().transpose(), src.marginal_x())
    }

    /// The joint family: a single group over all pairs.
    pub fn joint(src: &JointSource) -> Self {
        Self::new([(1.0, src.ln_matrix().as_slice().to_vec())])
    }

    pub fn eval(&self, alpha: f64) -> TiltPoint {
        let mut lp = 0.0;
        let mut mean = 0.0;
        let mut h = 0.0;
        for g in &self.groups {
            let (z, m, e) = g.eval(alpha);
            lp += g.weight * z;
            mean += g.weight * m;
            h += g.weight * e;
        }
        TiltPoint {
            alpha,
            log_partition: lp,
            mean,
            entropy: h,
        }
    }

    pub fn mean(&self, alpha: f64) -> f64 {
        self.eval(alpha).mean
    }

    pub fn entropy(&self, alpha: f64) -> f64 {
        self.eval(alpha).entropy
    }

    pub fn log_partition(&self, alpha: f64) -> f64 {
        self.groups
            .iter()
            .map(|g| {
                let shift = if alpha >= 0.0 { alpha * g.max } else { alpha * g.min };
                let s: f64 = g
                    .values
                    .iter()
                    .filter(|v| v.is_finite())
                    .map(|&v| (alpha * v - shift).exp())
                    .sum();
                g.weight * (shift + s.ln())
            })
            .sum()
    }

    /// Largest attainable mean (α → +∞).
    pub fn mean_max(&self) -> f64 {
        self.groups.iter().map(|g| g.weight * g.max).sum()
    }

    /// Smallest attainable mean (α → −∞).
    pub fn mean_min(&self) -> f64 {
        self.groups.iter().map(|g| g.weight * g.min).sum()
    }

    /// Entropy in the α → +∞ limit: `Σ w ln #argmax`.
    pub fn ground_entropy(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.weight * (g.n_max as f64).ln())
            .sum()
    }

    /// Entropy in the α → −∞ limit: `Σ w ln #argmin`.
    pub fn ceiling_entropy(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.weight * (g.n_min as f64).ln())
            .sum()
    }

    /// `Σ w ln |support|`, the entropy at α = 0.
    pub fn max_entropy(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.weight * (g.support as f64).ln())
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.groups.iter().map(|g| g.weight).sum()
    }

    /// True when every admissible letter in every group has the same score,
    /// so the mean does not move with α.
    pub fn is_degenerate(&self) -> bool {
        let spread = self.mean_max() - self.mean_min();
        spread <= TIE_TOL * (1.0 + self.mean_max().abs())
    }

    /// Solves `mean(α) = target` by bracket doubling from `[-1, 1]` and
    /// bisection. `None` when `target` is outside `(mean_min, mean_max)` or
    /// the bracket cannot be closed.
    pub fn solve_mean(&self, target: f64) -> Option<f64> {
        if !(target > self.mean_min() && target < self.mean_max()) {
            return None;
        }
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        while self.mean(hi) < target {
            if hi > ALPHA_CAP {
                return None;
            }
            lo = hi;
            hi *= 2.0;
        }
        while self.mean(lo) > target {
            if lo < -ALPHA_CAP {
                return None;
            }
            hi = lo;
            lo *= 2.0;
        }
        Some(bisect(lo, hi, |a| self.mean(a) < target))
    }

    /// Solves `entropy(α) = target` on the branch `α ≥ 0`, where the entropy
    /// decreases from `max_entropy()` to `ground_entropy()`. Targets at or
    /// above the maximum return 0; targets at or below the ground value
    /// return `+inf`.
    pub fn solve_entropy_nonneg(&self, target: f64) -> f64 {
        if target >= self.max_entropy() {
            return 0.0;
        }
        if target <= self.ground_entropy() {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while self.entropy(hi) > target {
            if hi > ALPHA_CAP {
                return f64::INFINITY;
            }
            lo = hi;
            hi *= 2.0;
        }
        bisect(lo, hi, |a| self.entropy(a) > target)
    }

    /// Tilted conditional distribution for every group, in group order.
    pub fn distributions(&self, alpha: f64) -> Vec<Vec<f64>> {
        self.groups
            .iter()
            .map(|g| {
                let (log_z, _, _) = g.eval(alpha);
                g.values
                    .iter()
                    .map(|&v| {
                        if v.is_finite() {
                            (alpha * v - log_z).exp()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Bisection on a monotone predicate: `go_right(a)` is true left of the root.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, mut go_right: impl FnMut(f64) -> bool) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if go_right(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}
