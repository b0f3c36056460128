//! Outer minimization for the minimum conditional entropy metric
//! `ℓ(Q) = −H_Q(X|Y)`.
//!
//! Here `A` depends on `Q_XY` only through `h = H_Q(X|Y)`: it vanishes for
//! `h ≥ h_t = −τ` and equals `R − h` below (where `h < h_t ≤ R`). Hence
//!
//! ```text
//! E = min( min{D(Q‖P) : h ≥ h_t},  min{D(Q‖P) − h : h < h_t} + R ).
//! ```
//!
//! The first problem is convex and solved through its Lagrange dual: the
//! minimizer of `D − μH` is `Q(x|y) ∝ P(x|y)^{1/(1+μ)}`,
//! `Q_Y(y) ∝ P(y) (Σ_x P(x|y)^{1/(1+μ)})^{1+μ}`, and `H` increases with
//! `μ`. The second is the `μ = 1` member whenever that member has
//! `h < h_t`; otherwise its infimum lies on `h = h_t` and is dominated by
//! the first.

use crate::logmath::xlogx;
use crate::source::{JointSource, JointType, Matrix};

struct Member {
    q: Vec<f64>,
    divergence: f64,
    entropy: f64,
}

fn member(src: &JointSource, mu: f64) -> Member {
    let (nx, ny) = (src.nx(), src.ny());
    let s = 1.0 / (1.0 + mu);
    let p_y = src.marginal_y();
    let mut log_w = vec![f64::NEG_INFINITY; ny];
    let mut cond = vec![0.0; nx * ny];
    for y in 0..ny {
        if p_y[y] <= 0.0 {
            continue;
        }
        let logits: Vec<f64> = (0..nx)
            .map(|x| {
                let p = src.p(x, y);
                if p > 0.0 {
                    s * (p / p_y[y]).ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let z = crate::logmath::log_sum_exp(&logits);
        for x in 0..nx {
            cond[x * ny + y] = (logits[x] - z).exp();
        }
        log_w[y] = p_y[y].ln() + (1.0 + mu) * z;
    }
    let norm = crate::logmath::log_sum_exp(&log_w);
    let q_y: Vec<f64> = log_w.iter().map(|w| (w - norm).exp()).collect();
    joint_member(src, &q_y, &cond)
}

fn joint_member(src: &JointSource, q_y: &[f64], cond: &[f64]) -> Member {
    let (nx, ny) = (src.nx(), src.ny());
    let mut q = vec![0.0; nx * ny];
    let mut divergence = 0.0;
    let mut entropy = 0.0;
    for y in 0..ny {
        if q_y[y] <= 0.0 {
            continue;
        }
        for x in 0..nx {
            let v = q_y[y] * cond[x * ny + y];
            q[x * ny + y] = v;
            if v > 0.0 {
                divergence += v * (v / src.p(x, y)).ln();
            }
            entropy -= q_y[y] * xlogx(cond[x * ny + y]);
        }
    }
    Member {
        q,
        divergence: divergence.max(0.0),
        entropy,
    }
}

/// Outcome of the minimization.
pub(crate) struct EntropySolution {
    pub value: f64,
    pub q_xy: JointType,
    /// True when the minimizer lies in the `A = 0` region.
    pub a_zero: bool,
}

fn to_type(src: &JointSource, q: &[f64]) -> JointType {
    let ny = src.ny();
    let total: f64 = q.iter().sum();
    JointType::new(Matrix::from_fn(src.nx(), ny, |x, y| q[x * ny + y] / total))
        .expect("normalized member")
}

/// `min{D(Q‖P) : H_Q(X|Y) ≥ h_t}`.
fn constrained(src: &JointSource, h_t: f64) -> Option<Member> {
    let base = member(src, 0.0);
    if base.entropy >= h_t {
        return Some(base);
    }
    let (nx, ny) = (src.nx(), src.ny());
    let p_y = src.marginal_y();
    let support = |y: usize| (0..nx).filter(|&x| src.p(x, y) > 0.0).count();
    let cap = (0..ny)
        .filter(|&y| p_y[y] > 0.0)
        .map(|y| (support(y) as f64).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    if h_t > cap + 1e-12 {
        return None;
    }
    if h_t >= cap - 1e-12 {
        // Only the richest columns, uniformly filled, reach the cap.
        let mut best: Option<Member> = None;
        for y in (0..ny).filter(|&y| p_y[y] > 0.0 && (support(y) as f64).ln() >= cap - 1e-12) {
            let mut q_y = vec![0.0; ny];
            q_y[y] = 1.0;
            let k = support(y) as f64;
            let cond: Vec<f64> = (0..nx * ny)
                .map(|i| {
                    let (x, yy) = (i / ny, i % ny);
                    if yy == y && src.p(x, y) > 0.0 {
                        1.0 / k
                    } else {
                        0.0
                    }
                })
                .collect();
            let m = joint_member(src, &q_y, &cond);
            if best.as_ref().is_none_or(|b| m.divergence < b.divergence) {
                best = Some(m);
            }
        }
        return best;
    }
    let mut hi = 1.0;
    while member(src, hi).entropy < h_t {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    let mu = crate::tilt::bisect(0.0, hi, |m| member(src, m).entropy < h_t);
    Some(member(src, mu))
}

pub(crate) fn solve(src: &JointSource, r: f64, h_t: f64) -> EntropySolution {
    let first = constrained(src, h_t);
    let free = member(src, 1.0);
    let second = (free.entropy < h_t).then_some((free.divergence - free.entropy + r, free));
    match (first, second) {
        (Some(a), Some((v2, b))) if v2 < a.divergence => EntropySolution {
            value: v2,
            q_xy: to_type(src, &b.q),
            a_zero: false,
        },
        (Some(a), _) => EntropySolution {
            value: a.divergence,
            q_xy: to_type(src, &a.q),
            a_zero: true,
        },
        (None, Some((v2, b))) => EntropySolution {
            value: v2,
            q_xy: to_type(src, &b.q),
            a_zero: false,
        },
        (None, None) => EntropySolution {
            value: f64::INFINITY,
            q_xy: src.as_joint_type(),
            a_zero: false,
        },
    }
}
