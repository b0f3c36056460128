//! Outer minimization `min_{Q_XY} D(Q_XY‖P) + A(Q_XY)` for metrics that are
//! linear in the type, `ℓ(Q) = Σ Q(x,y) m(x,y)`.
//!
//! `A` depends on `Q_XY` only through `Q_Y` and `ℓ_0 = ℓ(Q_XY)`, and is
//! non-decreasing in `ℓ_0`. At fixed `Q_Y` and `ℓ_0` the smallest
//! divergence is attained by `Q_λ(x|y) ∝ P(x|y) e^{λ m(x,y)}` (`λ ≤ 0`), so
//! the search collapses to the segment `ℓ_0 ∈ [ℓ_min, ℓ_P]`, where
//! `D*(ℓ_0)` is convex and decreasing and `[R − Hmax(ℓ_0)]_+` is convex.
//! The `A = 0` candidate sits at `ℓ_0 = τ`. Only `Q_Y` is searched on a grid.

use crate::logmath::pos;
use crate::source::{ConditionalType, JointSource, Matrix};

use super::inner::InnerModel;
use super::{simplex, Beta};

const LAMBDA_CAP: f64 = 1e9;

/// The family `Q_λ(·|y)` for each `y` with `Q_Y(y) > 0`.
struct DivergenceFamily {
    groups: Vec<Group>,
}

struct Group {
    y: usize,
    weight: f64,
    /// `(x, ln P(x|y), m(x,y))` over the support of `P(·|y)`.
    letters: Vec<(usize, f64, f64)>,
    m_min: f64,
}

struct FamilyPoint {
    metric: f64,
    divergence: f64,
}

impl DivergenceFamily {
    fn new(src: &JointSource, metric: &Matrix, q_y: &[f64]) -> Self {
        let p_y = src.marginal_y();
        let groups = (0..src.ny())
            .filter(|&y| q_y[y] > 0.0)
            .map(|y| {
                let letters: Vec<(usize, f64, f64)> = (0..src.nx())
                    .filter(|&x| src.p(x, y) > 0.0)
                    .map(|x| (x, src.ln_p(x, y) - p_y[y].ln(), metric.get(x, y)))
                    .collect();
                let m_min = letters.iter().map(|l| l.2).fold(f64::INFINITY, f64::min);
                Group {
                    y,
                    weight: q_y[y],
                    letters,
                    m_min,
                }
            })
            .collect();
        Self { groups }
    }

    fn metric_min(&self) -> f64 {
        self.groups.iter().map(|g| g.weight * g.m_min).sum()
    }

    /// Conditional divergence `Σ Q_Y D(Q_λ‖P(·|y))` and metric at `λ`.
    fn eval(&self, lambda: f64) -> FamilyPoint {
        let mut metric = 0.0;
        let mut div = 0.0;
        for g in &self.groups {
            let shift = g
                .letters
                .iter()
                .map(|&(_, lp, m)| lp + lambda * m)
                .fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            let mut zm = 0.0;
            for &(_, lp, m) in &g.letters {
                let e = (lp + lambda * m - shift).exp();
                z += e;
                zm += e * m;
            }
            let mean = zm / z;
            let log_z = shift + z.ln();
            metric += g.weight * mean;
            div += g.weight * (lambda * mean - log_z);
        }
        FamilyPoint {
            metric,
            divergence: div.max(0.0),
        }
    }

    /// `λ → −∞`: each group keeps only its lowest-metric letters.
    fn floor_divergence(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| {
                let mass: f64 = g
                    .letters
                    .iter()
                    .filter(|l| l.2 <= g.m_min + 1e-12 * (1.0 + g.m_min.abs()))
                    .map(|l| l.1.exp())
                    .sum();
                -g.weight * mass.ln()
            })
            .sum()
    }

    /// `λ ≤ 0` with metric `c`, for `ℓ_min < c < ℓ(0)`.
    fn solve(&self, c: f64) -> f64 {
        let mut lo = -1.0;
        while self.eval(lo).metric > c {
            if lo < -LAMBDA_CAP {
                return lo;
            }
            lo *= 2.0;
        }
        let mut hi = 0.0;
        let mut lo_ = lo;
        for _ in 0..200 {
            let mid = 0.5 * (lo_ + hi);
            if mid <= lo_ || mid >= hi {
                break;
            }
            if self.eval(mid).metric < c {
                lo_ = mid;
            } else {
                hi = mid;
            }
            if hi - lo_ <= 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo_ + hi)
    }

    /// `min D` over conditionals with metric exactly `c` (plus the tilt used).
    fn d_star(&self, c: f64, top: f64) -> (f64, f64) {
        if c >= top {
            return (0.0, 0.0);
        }
        let floor = self.metric_min();
        if c <= floor + 1e-13 * (1.0 + floor.abs()) {
            return (self.floor_divergence(), f64::NEG_INFINITY);
        }
        let lambda = self.solve(c);
        (self.eval(lambda).divergence, lambda)
    }

    fn conditional(&self, src: &JointSource, lambda: f64) -> ConditionalType {
        let (nx, ny) = (src.nx(), src.ny());
        let mut q = vec![0.0; nx * ny];
        let mut filled = vec![false; ny];
        for g in &self.groups {
            filled[g.y] = true;
            let scores: Vec<f64> = g
                .letters
                .iter()
                .map(|&(_, lp, m)| {
                    if lambda == f64::NEG_INFINITY {
                        if m <= g.m_min + 1e-12 * (1.0 + g.m_min.abs()) {
                            lp
                        } else {
                            f64::NEG_INFINITY
                        }
                    } else {
                        lp + lambda * m
                    }
                })
                .collect();
            let z = crate::logmath::log_sum_exp(&scores);
            for (&(x, _, _), s) in g.letters.iter().zip(&scores) {
                q[x * ny + g.y] = (s - z).exp();
            }
        }
        fill_missing(src, &mut q, &filled);
        ConditionalType::new(Matrix::from_fn(nx, ny, |x, y| q[x * ny + y]))
            .expect("tilted columns are normalized")
    }
}

/// Columns not covered by any group get `P(x|y)` or, if `P(y) = 0`, the
/// uniform distribution.
pub(crate) fn fill_missing(src: &JointSource, q: &mut [f64], filled: &[bool]) {
    let (nx, ny) = (src.nx(), src.ny());
    for y in 0..ny {
        if filled[y] {
            continue;
        }
        let py = src.marginal_y()[y];
        for x in 0..nx {
            q[x * ny + y] = if py > 0.0 {
                src.p(x, y) / py
            } else {
                1.0 / nx as f64
            };
        }
    }
}

/// Result of the search at one `Q_Y`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    /// `Σ Q_Y D(Q(·|y)‖P(·|y)) + A`, without the `Q_Y` divergence.
    pub value: f64,
    pub lambda: f64,
}

pub(crate) struct LinearProblem<'a> {
    pub src: &'a JointSource,
    pub metric: &'a Matrix,
    pub r: f64,
    pub beta: Beta,
}

impl LinearProblem<'_> {
    fn qy_divergence(&self, q_y: &[f64]) -> f64 {
        q_y.iter()
            .zip(self.src.marginal_y())
            .filter(|(q, _)| **q > 0.0)
            .map(|(q, p)| q * (q / p).ln())
            .sum::<f64>()
            .max(0.0)
    }

    /// `min_{Q_{X|Y}} D + A` at fixed `Q_Y`.
    pub(crate) fn at_qy(&self, q_y: &[f64]) -> Candidate {
        let fam = DivergenceFamily::new(self.src, self.metric, q_y);
        let inner = InnerModel::tilted(self.metric, q_y);
        let top = fam.eval(0.0).metric;
        let floor = fam.metric_min();
        let tau = inner.tau(self.beta, self.r);

        if top <= tau {
            return Candidate {
                value: 0.0,
                lambda: 0.0,
            };
        }
        let mut best = Candidate {
            value: f64::INFINITY,
            lambda: 0.0,
        };
        if tau >= floor {
            let (d, lambda) = fam.d_star(tau, top);
            best = Candidate {
                value: d,
                lambda,
            };
        }
        let obj = |c: f64| -> (f64, f64) {
            let (d, lambda) = fam.d_star(c, top);
            let h = inner.hmax(c);
            let a = if h == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                pos(self.r - h)
            };
            (d + a, lambda)
        };
        let lo = tau.max(floor);
        let (_, v, lambda) = golden(lo, top, obj);
        if v < best.value {
            best = Candidate {
                value: v,
                lambda,
            };
        }
        best
    }

    pub(crate) fn total(&self, q_y: &[f64]) -> f64 {
        self.qy_divergence(q_y) + self.at_qy(q_y).value
    }

    /// Global search over `Q_Y ≪ P_Y`.
    pub(crate) fn solve(&self) -> (Vec<f64>, Candidate, f64) {
        let p_y = self.src.marginal_y().to_vec();
        let mask: Vec<bool> = p_y.iter().map(|&p| p > 0.0).collect();
        let d = mask.iter().filter(|&&m| m).count();
        let mut k = 50;
        while k > 4 && simplex::grid_size(d, k) > 20_000.0 {
            k /= 2;
        }
        let (q_y, _) = simplex::minimize(&mask, k, 3, &[p_y], |q| self.total(q));
        let cand = self.at_qy(&q_y);
        let value = self.qy_divergence(&q_y) + cand.value;
        (q_y, cand, value)
    }

    pub(crate) fn conditional(&self, q_y: &[f64], lambda: f64) -> ConditionalType {
        DivergenceFamily::new(self.src, self.metric, q_y).conditional(self.src, lambda)
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`; also
/// checks both endpoints. Returns `(argmin, min, aux)`.
fn golden(a: f64, b: f64, f: impl Fn(f64) -> (f64, f64)) -> (f64, f64, f64) {
    let mut best = {
        let (va, xa) = f(a);
        (a, va, xa)
    };
    let (vb, xb) = f(b);
    if vb < best.1 {
        best = (b, vb, xb);
    }
    if !(b > a) {
        return best;
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1.0 <= f2.0 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, (v, aux)) in [(x1, f1), (x2, f2)] {
        if v < best.1 {
            best = (x, v, aux);
        }
    }
    best
}
