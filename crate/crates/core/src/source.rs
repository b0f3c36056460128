//! Finite-alphabet joint sources and the information measures built on them.
//!
//! Matrices are row-major by `x`: entry `(x, y)` lives at `x * ny + y`.
//! Zero-probability entries follow the `0 ln 0 = 0` convention in entropies,
//! while any type that touches a zero of the model has infinite energy and
//! divergence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logmath::{log_sum_exp, xlogx};

const SUM_TOL: f64 = 1e-12;
const MARGINAL_TOL: f64 = 1e-10;

/// Dense `nx × ny` matrix, row-major by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        if nx == 0 {
            return Err(Error::InvalidSource("matrix has no rows".into()));
        }
        let ny = rows[0].len();
        if ny == 0 {
            return Err(Error::InvalidSource("row 0 is empty".into()));
        }
        let mut data = Vec::with_capacity(nx * ny);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != ny {
                return Err(Error::InvalidSource(format!(
                    "row {x} has {} entries, expected {ny}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { nx, ny, data })
    }

    pub fn from_fn(nx: usize, ny: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                data.push(f(x, y));
            }
        }
        Self { nx, ny, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.ny + y]
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.ny).map(|c| c.to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.ny, self.nx, |y, x| self.get(x, y))
    }

    fn column_sum(&self, y: usize) -> f64 {
        (0..self.nx).map(|x| self.get(x, y)).sum()
    }

    fn row_sum(&self, x: usize) -> f64 {
        (0..self.ny).map(|y| self.get(x, y)).sum()
    }
}

fn validate_joint(m: &Matrix, name: &str) -> Result<()> {
    for x in 0..m.nx {
        for y in 0..m.ny {
            let v = m.get(x, y);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSource(format!(
                    "{name} row {x}, column {y}: entry {v} is not a non-negative number"
                )));
            }
        }
    }
    let total: f64 = m.data.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidSource(format!(
            "{name} entries sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Joint distribution `P(x, y)` on ordered finite alphabets, with cached
/// marginals and entropies.
#[derive(Debug, Clone)]
pub struct JointSource {
    alphabet_x: Vec<String>,
    alphabet_y: Vec<String>,
    p: Matrix,
    ln_p: Matrix,
    p_x: Vec<f64>,
    p_y: Vec<f64>,
    h_xy: f64,
    h_x: f64,
    h_y: f64,
}

impl JointSource {
    pub fn new(alphabet_x: Vec<String>, alphabet_y: Vec<String>, p: Matrix) -> Result<Self> {
        if alphabet_x.len() != p.nx() {
            return Err(Error::InvalidSource(format!(
                "alphabet_x has {} symbols but p has {} rows",
                alphabet_x.len(),
                p.nx()
            )));
        }
        if alphabet_y.len() != p.ny() {
            return Err(Error::InvalidSource(format!(
                "alphabet_y has {} symbols but p has {} columns",
                alphabet_y.len(),
                p.ny()
            )));
        }
        validate_joint(&p, "p")?;
        let p_x: Vec<f64> = (0..p.nx()).map(|x| p.row_sum(x)).collect();
        let p_y: Vec<f64> = (0..p.ny()).map(|y| p.column_sum(y)).collect();
        let ln_p = Matrix::from_fn(p.nx(), p.ny(), |x, y| {
            let v = p.get(x, y);
            if v > 0.0 {
                v.ln()
            } else {
                f64::NEG_INFINITY
            }
        });
        let h_xy = -p.as_slice().iter().map(|&v| xlogx(v)).sum::<f64>();
        let h_x = -p_x.iter().map(|&v| xlogx(v)).sum::<f64>();
        let h_y = -p_y.iter().map(|&v| xlogx(v)).sum::<f64>();
        Ok(Self {
            alphabet_x,
            alphabet_y,
            p,
            ln_p,
            p_x,
            p_y,
            h_xy,
            h_x,
            h_y,
        })
    }

    /// Source with symbols labelled `0, 1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = Matrix::from_rows(rows)?;
        let ax = (0..p.nx()).map(|i| i.to_string()).collect();
        let ay = (0..p.ny()).map(|i| i.to_string()).collect();
        Self::new(ax, ay, p)
    }

    /// Doubly symmetric binary source: `X` uniform, `Y = X ⊕ Z` with `Z ~ Bern(p)`.
    pub fn dsbs(crossover: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(Error::InvalidSource(format!(
                "crossover {crossover} is not a probability"
            )));
        }
        let a = 0.5 * (1.0 - crossover);
        let b = 0.5 * crossover;
        Self::from_rows(&[vec![a, b], vec![b, a]])
    }

    pub fn nx(&self) -> usize {
        self.p.nx()
    }

    pub fn ny(&self) -> usize {
        self.p.ny()
    }

    pub fn alphabet_x(&self) -> &[String] {
        &self.alphabet_x
    }

    pub fn alphabet_y(&self) -> &[String] {
        &self.alphabet_y
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.p.get(x, y)
    }

    /// `ln P(x, y)`, `-inf` on zeros.
    #[inline]
    pub fn ln_p(&self, x: usize, y: usize) -> f64 {
        self.ln_p.get(x, y)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.p
    }

    pub fn ln_matrix(&self) -> &Matrix {
        &self.ln_p
    }

    pub fn marginal_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn marginal_y(&self) -> &[f64] {
        &self.p_y
    }

    /// `P(x|y)`; zero columns yield zero.
    pub fn conditional_x_given_y(&self, x: usize, y: usize) -> f64 {
        if self.p_y[y] > 0.0 {
            self.p(x, y) / self.p_y[y]
        } else {
            0.0
        }
    }

    /// `H(X,Y)` in nats.
    pub fn joint_entropy(&self) -> f64 {
        self.h_xy
    }

    pub fn entropy_x(&self) -> f64 {
        self.h_x
    }

    pub fn entropy_y(&self) -> f64 {
        self.h_y
    }

    /// `H(X|Y) = -Σ P(x,y) ln P(x|y)`.
    pub fn entropy_x_given_y(&self) -> f64 {
        let mut h = 0.0;
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                let v = self.p(x, y);
                if v > 0.0 {
                    h -= v * (v / self.p_y[y]).ln();
                }
            }
        }
        h.max(0.0)
    }

    /// `H(Y|X)`.
    pub fn entropy_y_given_x(&self) -> f64 {
        let mut h = 0.0;
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                let v = self.p(x, y);
                if v > 0.0 {
                    h -= v * (v / self.p_x[x]).ln();
                }
            }
        }
        h.max(0.0)
    }

    /// Source with the roles of `X` and `Y` exchanged.
    pub fn swapped(&self) -> JointSource {
        JointSource::new(
            self.alphabet_y.clone(),
            self.alphabet_x.clone(),
            self.p.transpose(),
        )
        .expect("transpose of a valid source is valid")
    }

    /// `D(Q‖P)`; errors if `Q` is not absolutely continuous w.r.t. `P`.
    pub fn divergence(&self, q: &JointType) -> Result<f64> {
        self.check_shape(q.nx(), q.ny())?;
        let mut d = 0.0;
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                let qv = q.get(x, y);
                if qv > 0.0 {
                    let pv = self.p(x, y);
                    if pv <= 0.0 {
                        return Err(Error::AbsoluteContinuityViolation { x, y, mass: qv });
                    }
                    d += qv * (qv / pv).ln();
                }
            }
        }
        Ok(d.max(0.0))
    }

    /// Per-symbol energy `-Σ P(y) Q(x|y) ln P(x,y)` of a conditional type.
    pub fn energy_of_conditional(&self, q: &ConditionalType) -> Result<f64> {
        energy_of_conditional(q, &self.p_y, &self.ln_p)
    }

    /// Per-symbol energy `-Σ Q(x,y) ln P(x,y)` of a joint type.
    pub fn energy_of_joint(&self, q: &JointType) -> Result<f64> {
        energy_of_joint(q, &self.ln_p)
    }

    /// Signed log-likelihood rate `Σ Q ln P`, i.e. the negated energy.
    pub fn log_likelihood_rate(&self, q: &JointType) -> Result<f64> {
        self.energy_of_joint(q).map(|e| -e)
    }

    /// The tilted conditional `Q_α(x|y) = P^α(x,y) / Σ_x' P^α(x',y)`,
    /// supported on the support of `P(·, y)`.
    pub fn tilted_conditional(&self, alpha: f64) -> Result<ConditionalType> {
        if !alpha.is_finite() {
            return Err(Error::OutOfRange {
                what: "alpha",
                value: alpha,
                lo: f64::MIN,
                hi: f64::MAX,
            });
        }
        let (nx, ny) = (self.nx(), self.ny());
        let mut q = vec![0.0; nx * ny];
        let mut logits = vec![0.0; nx];
        for y in 0..ny {
            if self.p_y[y] <= 0.0 {
                return Err(Error::DegenerateRow { y });
            }
            for (x, l) in logits.iter_mut().enumerate() {
                let lp = self.ln_p(x, y);
                *l = if lp.is_finite() { alpha * lp } else { f64::NEG_INFINITY };
            }
            let z = log_sum_exp(&logits);
            for x in 0..nx {
                q[x * ny + y] = (logits[x] - z).exp();
            }
        }
        Ok(ConditionalType {
            q: Matrix {
                nx,
                ny,
                data: q,
            },
        })
    }

    /// `Q(x,y) = Q_Y(y) Q(x|y)`.
    pub fn compose(q_y: &[f64], q: &ConditionalType) -> JointType {
        let m = Matrix::from_fn(q.nx(), q.ny(), |x, y| q_y[y] * q.get(x, y));
        JointType { q: m }
    }

    /// The source itself viewed as a joint type.
    pub fn as_joint_type(&self) -> JointType {
        JointType { q: self.p.clone() }
    }

    fn check_shape(&self, nx: usize, ny: usize) -> Result<()> {
        if nx != self.nx() || ny != self.ny() {
            return Err(Error::InvalidSource(format!(
                "type is {nx}x{ny} but the source is {}x{}",
                self.nx(),
                self.ny()
            )));
        }
        Ok(())
    }
}

fn energy_of_conditional(q: &ConditionalType, w_y: &[f64], ln_p: &Matrix) -> Result<f64> {
    let mut e = 0.0;
    for x in 0..q.nx() {
        for y in 0..q.ny() {
            let mass = w_y[y] * q.get(x, y);
            if mass > 0.0 {
                let lp = ln_p.get(x, y);
                if !lp.is_finite() {
                    return Err(Error::InfiniteEnergy { x, y });
                }
                e -= mass * lp;
            }
        }
    }
    Ok(e)
}

fn energy_of_joint(q: &JointType, ln_p: &Matrix) -> Result<f64> {
    let mut e = 0.0;
    for x in 0..q.nx() {
        for y in 0..q.ny() {
            let mass = q.get(x, y);
            if mass > 0.0 {
                let lp = ln_p.get(x, y);
                if !lp.is_finite() {
                    return Err(Error::InfiniteEnergy { x, y });
                }
                e -= mass * lp;
            }
        }
    }
    Ok(e)
}

/// Mismatched decoding model `P̃(x,y)`, normalized so that `P̃(y) = P(y)`.
#[derive(Debug, Clone)]
pub struct MismatchModel {
    p_tilde: Matrix,
    ln_p_tilde: Matrix,
}

impl MismatchModel {
    /// Validates `P̃` against the true source: same shape, normalized, equal
    /// `Y`-marginals (within 1e-10), and positive wherever `P` is positive.
    pub fn new(p_tilde: Matrix, src: &JointSource) -> Result<Self> {
        if p_tilde.nx() != src.nx() || p_tilde.ny() != src.ny() {
            return Err(Error::InvalidSource(format!(
                "p_tilde is {}x{} but p is {}x{}",
                p_tilde.nx(),
                p_tilde.ny(),
                src.nx(),
                src.ny()
            )));
        }
        validate_joint(&p_tilde, "p_tilde")?;
        for y in 0..src.ny() {
            let m = p_tilde.column_sum(y);
            if (m - src.marginal_y()[y]).abs() > MARGINAL_TOL {
                return Err(Error::InvalidSource(format!(
                    "p_tilde column {y} (y='{}') has marginal {m}, but p has {}",
                    src.alphabet_y()[y],
                    src.marginal_y()[y]
                )));
            }
        }
        for x in 0..src.nx() {
            for y in 0..src.ny() {
                if src.p(x, y) > 0.0 && p_tilde.get(x, y) <= 0.0 {
                    return Err(Error::InvalidSource(format!(
                        "p_tilde row {x}, column {y} is zero where p is positive"
                    )));
                }
            }
        }
        let ln_p_tilde = Matrix::from_fn(p_tilde.nx(), p_tilde.ny(), |x, y| {
            let v = p_tilde.get(x, y);
            if v > 0.0 {
                v.ln()
            } else {
                f64::NEG_INFINITY
            }
        });
        Ok(Self {
            p_tilde,
            ln_p_tilde,
        })
    }

    /// The matched model `P̃ = P`.
    pub fn matched(src: &JointSource) -> Self {
        Self::new(src.matrix().clone(), src).expect("a source is its own valid mismatch model")
    }

    pub fn matrix(&self) -> &Matrix {
        &self.p_tilde
    }

    pub fn ln_matrix(&self) -> &Matrix {
        &self.ln_p_tilde
    }

    #[inline]
    pub fn ln_p(&self, x: usize, y: usize) -> f64 {
        self.ln_p_tilde.get(x, y)
    }

    /// `-Σ Q(x,y) ln P̃(x,y)`.
    pub fn energy_of_joint(&self, q: &JointType) -> Result<f64> {
        energy_of_joint(q, &self.ln_p_tilde)
    }

    /// `-Σ P(y) Q(x|y) ln P̃(x,y)`, weighting columns by the true `P(y)`.
    pub fn energy_of_conditional(&self, q: &ConditionalType, src: &JointSource) -> Result<f64> {
        energy_of_conditional(q, src.marginal_y(), &self.ln_p_tilde)
    }

    /// `-E_P ln P̃(X|Y)`.
    pub fn conditional_cross_entropy(&self, src: &JointSource) -> f64 {
        let mut h = 0.0;
        for x in 0..src.nx() {
            for y in 0..src.ny() {
                let v = src.p(x, y);
                if v > 0.0 {
                    h -= v * (self.p_tilde.get(x, y) / src.marginal_y()[y]).ln();
                }
            }
        }
        h
    }
}

/// Conditional distribution `Q(x|y)`; each column is a distribution over `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalType {
    q: Matrix,
}

impl ConditionalType {
    pub fn new(q: Matrix) -> Result<Self> {
        for y in 0..q.ny() {
            let mut s = 0.0;
            for x in 0..q.nx() {
                let v = q.get(x, y);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidSource(format!(
                        "conditional type row {x}, column {y}: entry {v} is negative"
                    )));
                }
                s += v;
            }
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidSource(format!(
                    "conditional type column {y} sums to {s}, expected 1"
                )));
            }
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.q.get(x, y)
    }

    pub fn nx(&self) -> usize {
        self.q.nx()
    }

    pub fn ny(&self) -> usize {
        self.q.ny()
    }

    pub fn column(&self, y: usize) -> Vec<f64> {
        (0..self.nx()).map(|x| self.get(x, y)).collect()
    }

    /// `Σ_y w(y) H(Q(·|y))`.
    pub fn conditional_entropy(&self, w_y: &[f64]) -> f64 {
        let mut h = 0.0;
        for (y, &w) in w_y.iter().enumerate() {
            if w > 0.0 {
                h -= w * (0..self.nx()).map(|x| xlogx(self.get(x, y))).sum::<f64>();
            }
        }
        h
    }
}

/// Joint distribution `Q(x,y)`, typically a joint empirical type.
#[derive(Debug, Clone, PartialEq)]
pub struct JointType {
    q: Matrix,
}

impl JointType {
    pub fn new(q: Matrix) -> Result<Self> {
        validate_joint(&q, "joint type")?;
        Ok(Self { q })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.q.get(x, y)
    }

    pub fn nx(&self) -> usize {
        self.q.nx()
    }

    pub fn ny(&self) -> usize {
        self.q.ny()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.q
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.ny()).map(|y| self.q.column_sum(y)).collect()
    }

    /// `H_Q(X|Y)`.
    pub fn conditional_entropy(&self) -> f64 {
        let qy = self.marginal_y();
        let mut h = 0.0;
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                let v = self.get(x, y);
                if v > 0.0 {
                    h -= v * (v / qy[y]).ln();
                }
            }
        }
        h.max(0.0)
    }
}

/// A symbol label in a source file: either a string or a number.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SymbolLabel {
    Text(String),
    Number(serde_json::Number),
}

impl SymbolLabel {
    fn render(&self) -> String {
        match self {
            SymbolLabel::Text(s) => s.clone(),
            SymbolLabel::Number(n) => n.to_string(),
        }
    }
}

/// On-disk source specification.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SourceFile {
    pub alphabet_x: Vec<SymbolLabel>,
    pub alphabet_y: Vec<SymbolLabel>,
    pub p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_tilde: Option<Vec<Vec<f64>>>,
}

impl SourceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSource(e.to_string()))
    }

    pub fn build(&self) -> Result<(JointSource, Option<MismatchModel>)> {
        let src = JointSource::new(
            self.alphabet_x.iter().map(SymbolLabel::render).collect(),
            self.alphabet_y.iter().map(SymbolLabel::render).collect(),
            Matrix::from_rows(&self.p).map_err(|e| match e {
                Error::InvalidSource(m) => Error::InvalidSource(format!("p: {m}")),
                other => other,
            })?,
        )?;
        let mismatch = match &self.p_tilde {
            Some(rows) => Some(MismatchModel::new(
                Matrix::from_rows(rows).map_err(|e| match e {
                    Error::InvalidSource(m) => Error::InvalidSource(format!("p_tilde: {m}")),
                    other => other,
                })?,
                &src,
            )?),
            None => None,
        };
        Ok((src, mismatch))
    }

    pub fn from_source(src: &JointSource) -> Self {
        Self {
            alphabet_x: src
                .alphabet_x()
                .iter()
                .map(|s| SymbolLabel::Text(s.clone()))
                .collect(),
            alphabet_y: src
                .alphabet_y()
                .iter()
                .map(|s| SymbolLabel::Text(s.clone()))
                .collect(),
            p: src.matrix().rows(),
            p_tilde: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2(p: f64) -> f64 {
        -xlogx(p) - xlogx(1.0 - p)
    }

    #[test]
    fn conditional_entropy_examples() {
        let perfect = JointSource::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(perfect.entropy_x_given_y(), 0.0);
        let indep = JointSource::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert!((indep.entropy_x_given_y() - 2f64.ln()).abs() < 1e-15);
        let dsbs = JointSource::dsbs(0.1).unwrap();
        assert!((dsbs.entropy_x_given_y() - 0.325083).abs() < 1e-6);
        assert!((dsbs.entropy_x_given_y() - h2(0.1)).abs() < 1e-15);
    }

    #[test]
    fn joint_entropy_examples() {
        let perfect = JointSource::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((perfect.joint_entropy() - 2f64.ln()).abs() < 1e-15);
        let dsbs = JointSource::dsbs(0.1).unwrap();
        assert!((dsbs.joint_entropy() - 1.018230).abs() < 1e-6);
        let indep = JointSource::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert!((indep.joint_entropy() - 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn divergence_examples() {
        let dsbs = JointSource::dsbs(0.1).unwrap();
        assert_eq!(dsbs.divergence(&dsbs.as_joint_type()).unwrap(), 0.0);
        let point = JointType::new(Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap())
            .unwrap();
        assert!((dsbs.divergence(&point).unwrap() - 0.798508).abs() < 1e-6);

        let sparse = JointSource::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let q = JointType::new(Matrix::from_rows(&[vec![0.5, 0.5], vec![0.0, 0.0]]).unwrap())
            .unwrap();
        assert!(matches!(
            sparse.divergence(&q),
            Err(Error::AbsoluteContinuityViolation { x: 0, y: 1, .. })
        ));
    }

    #[test]
    fn tilted_conditional_examples() {
        let dsbs = JointSource::dsbs(0.1).unwrap();
        let q1 = dsbs.tilted_conditional(1.0).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert!((q1.get(x, y) - dsbs.conditional_x_given_y(x, y)).abs() < 1e-15);
            }
        }
        let sparse =
            JointSource::from_rows(&[vec![0.2, 0.1], vec![0.3, 0.0], vec![0.4, 0.0]]).unwrap();
        let q0 = sparse.tilted_conditional(0.0).unwrap();
        for x in 0..3 {
            assert!((q0.get(x, 0) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(q0.get(0, 1), 1.0);
        assert_eq!(q0.get(1, 1), 0.0);

        let q200 = dsbs.tilted_conditional(200.0).unwrap();
        assert!(q200.get(1, 0) < 1e-20);
        assert!(q200.get(0, 1) < 1e-20);
        assert!((q200.get(0, 0) - 1.0).abs() < 1e-15);
        let qm = dsbs.tilted_conditional(-200.0).unwrap();
        assert!(qm.get(0, 0) < 1e-20);
        assert!(dsbs.tilted_conditional(f64::NAN).is_err());
    }

    #[test]
    fn zero_column_is_degenerate_row() {
        let src = JointSource::from_rows(&[vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        assert_eq!(src.tilted_conditional(1.0), Err(Error::DegenerateRow { y: 1 }));
    }

    #[test]
    fn energy_examples() {
        let dsbs = JointSource::dsbs(0.1).unwrap();
        let q1 = dsbs.tilted_conditional(1.0).unwrap();
        assert!((dsbs.energy_of_conditional(&q1).unwrap() - dsbs.joint_entropy()).abs() < 1e-14);
        let argmax = ConditionalType::new(Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap())
            .unwrap();
        assert!((dsbs.energy_of_conditional(&argmax).unwrap() - 0.798508).abs() < 1e-6);
        let argmin = ConditionalType::new(Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap())
            .unwrap();
        assert!((dsbs.energy_of_conditional(&argmin).unwrap() - 2.995732).abs() < 1e-6);

        let sparse = JointSource::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!(matches!(
            sparse.energy_of_conditional(&argmin),
            Err(Error::InfiniteEnergy { .. })
        ));
        let ll = dsbs.log_likelihood_rate(&dsbs.as_joint_type()).unwrap();
        assert!((ll + dsbs.joint_entropy()).abs() < 1e-15);
    }

    #[test]
    fn validation_names_offending_entries() {
        let e = JointSource::from_rows(&[vec![0.5, -0.1], vec![0.3, 0.3]]).unwrap_err();
        assert!(e.to_string().contains("row 0, column 1"), "{e}");
        let e = JointSource::from_rows(&[vec![0.5, 0.1], vec![0.3]]).unwrap_err();
        assert!(e.to_string().contains("row 1"), "{e}");
        let e = JointSource::from_rows(&[vec![0.5, 0.1], vec![0.3, 0.3]]).unwrap_err();
        assert!(e.to_string().contains("sum"), "{e}");
    }

    #[test]
    fn mismatch_marginal_is_enforced() {
        let src = JointSource::dsbs(0.1).unwrap();
        let ok = Matrix::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        assert!(MismatchModel::new(ok, &src).is_ok());
        let bad = Matrix::from_rows(&[vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
        let e = MismatchModel::new(bad, &src).unwrap_err();
        assert!(e.to_string().contains("column 0"), "{e}");
    }

    #[test]
    fn source_file_roundtrip() {
        let text = r#"{"alphabet_x": [0, 1], "alphabet_y": ["a", "b"],
                       "p": [[0.45, 0.05], [0.05, 0.45]],
                       "p_tilde": [[0.4, 0.1], [0.1, 0.4]]}"#;
        let file = SourceFile::parse(text).unwrap();
        let (src, mm) = file.build().unwrap();
        assert_eq!(src.alphabet_x(), ["0", "1"]);
        assert_eq!(src.alphabet_y(), ["a", "b"]);
        assert!(mm.is_some());
        let bad = r#"{"alphabet_x": [0, 1], "alphabet_y": [0, 1], "p": [[0.5, 0.5], [0.5]]}"#;
        let e = SourceFile::parse(bad).unwrap().build().unwrap_err();
        assert!(e.to_string().contains("row 1"), "{e}");
    }
}
