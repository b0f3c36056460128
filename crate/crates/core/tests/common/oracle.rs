//! Grid oracles for binary `X` and `Y`. A conditional `Q(x|y)` is encoded by
//! `(Q(0|0), Q(0|1))`.

fn h2(a: f64) -> f64 {
    let f = |v: f64| if v > 0.0 { -v * v.ln() } else { 0.0 };
    f(a) + f(1.0 - a)
}

fn kl2(a: f64, p: f64) -> f64 {
    let f = |q: f64, p: f64| if q > 0.0 { q * (q / p).ln() } else { 0.0 };
    f(a, p) + f(1.0 - a, 1.0 - p)
}

/// `Σ_y w_y Σ_x Q(x|y) m(x,y)`; `None` when positive mass meets `m = −∞`.
fn metric(m: &[[f64; 2]; 2], w: [f64; 2], a: f64, b: f64) -> Option<f64> {
    let mut l = 0.0;
    for (y, (qy, q0)) in [(w[0], a), (w[1], b)].into_iter().enumerate() {
        for (x, mass) in [(0, qy * q0), (1, qy * (1.0 - q0))] {
            if mass > 0.0 {
                if !m[x][y].is_finite() {
                    return None;
                }
                l += mass * m[x][y];
            }
        }
    }
    Some(l)
}

/// `A(ℓ_0)` lookup for one `Q_Y`: keys sorted descending with a running
/// minimum of the objective.
struct InnerTable {
    keys: Vec<f64>,
    prefix_min: Vec<f64>,
}

impl InnerTable {
    fn build(m: &[[f64; 2]; 2], w: [f64; 2], r: f64, beta: Option<f64>, k: usize) -> Self {
        let mut items = Vec::with_capacity((k + 1) * (k + 1));
        for i in 0..=k {
            let a = i as f64 / k as f64;
            for j in 0..=k {
                let b = j as f64 / k as f64;
                let Some(l) = metric(m, w, a, b) else { continue };
                let h = w[0] * h2(a) + w[1] * h2(b);
                let key = match beta {
                    Some(beta) => l + (h - r).max(0.0) / beta,
                    None => l,
                };
                items.push((key, (r - h).max(0.0)));
            }
        }
        items.sort_by(|x, y| y.0.total_cmp(&x.0));
        let mut run = f64::INFINITY;
        let mut keys = Vec::with_capacity(items.len());
        let mut prefix_min = Vec::with_capacity(items.len());
        for (key, v) in items {
            run = run.min(v);
            keys.push(key);
            prefix_min.push(run);
        }
        Self { keys, prefix_min }
    }

    fn a(&self, l0: f64) -> f64 {
        // number of keys ≥ l0
        let n = self.keys.partition_point(|&k| k >= l0);
        if n == 0 {
            f64::INFINITY
        } else {
            self.prefix_min[n - 1]
        }
    }
}

/// Nested brute-force `E(R, β)` over `Q_Y`, `Q_{X|Y}` and `Q_{X'|Y}` grids
/// of step `1/k`. `beta = None` is the word-MAP limit; `m` is the metric
/// `m(x,y)` (`ln P` for the matched decoder).
pub fn exponent(p: &[[f64; 2]; 2], m: &[[f64; 2]; 2], r: f64, beta: Option<f64>, k: usize) -> f64 {
    let py = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
    let cond = [p[0][0] / py[0], p[0][1] / py[1]];
    let mut best = f64::INFINITY;
    for s in 0..=k {
        let qy0 = s as f64 / k as f64;
        let w = [qy0, 1.0 - qy0];
        let dy = kl2(qy0, py[0]);
        let table = InnerTable::build(m, w, r, beta, k);
        for i in 0..=k {
            let c = i as f64 / k as f64;
            let dc = w[0] * kl2(c, cond[0]);
            if dy + dc >= best {
                continue;
            }
            for j in 0..=k {
                let d = j as f64 / k as f64;
                let div = dy + dc + w[1] * kl2(d, cond[1]);
                if div >= best {
                    continue;
                }
                let Some(l0) = metric(m, w, c, d) else { continue };
                let v = div + table.a(l0);
                if v < best {
                    best = v;
                }
            }
        }
    }
    best
}

/// `A(Q_XY)` by grid over `Q_{X'|Y}`; `q` is the joint type.
pub fn a_term(m: &[[f64; 2]; 2], q: &[[f64; 2]; 2], r: f64, beta: Option<f64>, k: usize) -> f64 {
    let w = [q[0][0] + q[1][0], q[0][1] + q[1][1]];
    let a = if w[0] > 0.0 { q[0][0] / w[0] } else { 0.5 };
    let b = if w[1] > 0.0 { q[0][1] / w[1] } else { 0.5 };
    let l0 = metric(m, w, a, b).unwrap_or(f64::NEG_INFINITY);
    InnerTable::build(m, w, r, beta, k).a(l0)
}

/// `r_0(Q_Y) = max{βℓ' + H' : H' ≥ R} − R` by grid.
pub fn r0(m: &[[f64; 2]; 2], w: [f64; 2], r: f64, beta: f64, k: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=k {
        let a = i as f64 / k as f64;
        for j in 0..=k {
            let b = j as f64 / k as f64;
            let h = w[0] * h2(a) + w[1] * h2(b);
            if h < r {
                continue;
            }
            if let Some(l) = metric(m, w, a, b) {
                best = best.max(beta * l + h);
            }
        }
    }
    best - r
}

/// `s(ε) = max{Σ_y P(y) H(Q(·|y)) : −Σ P(y) Q(x|y) ln P(x,y) = ε}` for a
/// binary source: scan `Q(0|0)` on a grid of step `1/k`, solve the linear
/// energy constraint for `Q(0|1)`, keep the best feasible entropy.
pub fn s_at(p: &[[f64; 2]; 2], eps: f64, k: usize) -> f64 {
    let py = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
    let lp = |x: usize, y: usize| p[x][y].ln();
    // ε = −py0 [a lp00 + (1−a) lp10] − py1 [b lp01 + (1−b) lp11]
    let mut best = f64::NEG_INFINITY;
    let eval = |a: f64, b: f64| py[0] * h2(a) + py[1] * h2(b);
    let c1 = -py[1] * (lp(0, 1) - lp(1, 1));
    let c0 = -py[0] * (lp(0, 0) - lp(1, 0));
    let base = -py[0] * lp(1, 0) - py[1] * lp(1, 1);
    // Solve for the coordinate with the larger coefficient, scan the other.
    let solve_b = c1.abs() >= c0.abs();
    for i in 0..=k {
        let t = i as f64 / k as f64;
        let (a, b) = if solve_b {
            (t, (eps - base - c0 * t) / c1)
        } else {
            ((eps - base - c1 * t) / c0, t)
        };
        if (-1e-12..=1.0 + 1e-12).contains(&a) && (-1e-12..=1.0 + 1e-12).contains(&b) {
            best = best.max(eval(a.clamp(0.0, 1.0), b.clamp(0.0, 1.0)));
        }
    }
    best
}

/// Exact expected first-symbol error of the finite-temperature decoder,
/// averaged over every source pair and every bin assignment of `X^n` into
/// `m` bins. `p[x][y]` is the joint pmf; `beta = None` is word-MAP. A
/// `k`-way posterior tie containing the truth costs `(k − 1)/k`.
pub fn exact_ber(p: &[Vec<f64>], n: usize, m: usize, beta: Option<f64>) -> f64 {
    let nx = p.len();
    let ny = p[0].len();
    let seqs = nx.pow(n as u32);
    let digits = |mut v: usize, base: usize| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let d = v % base;
                v /= base;
                d
            })
            .collect()
    };
    let assignments = m.pow(seqs as u32);
    let mut total = 0.0;
    for yi in 0..ny.pow(n as u32) {
        let y = digits(yi, ny);
        // log-likelihood of every candidate against y
        let ll: Vec<f64> = (0..seqs)
            .map(|xi| {
                digits(xi, nx)
                    .iter()
                    .zip(&y)
                    .map(|(&a, &b)| p[a][b].ln())
                    .sum()
            })
            .collect();
        for xi in 0..seqs {
            let prob = ll[xi].exp();
            if prob == 0.0 {
                continue;
            }
            let truth = digits(xi, nx)[0];
            let mut err = 0.0;
            for f in 0..assignments {
                let bin = |s: usize| (f / m.pow(s as u32)) % m;
                let mut vals = vec![f64::NEG_INFINITY; nx];
                let mut mass = vec![0.0; nx];
                for s in (0..seqs).filter(|&s| bin(s) == bin(xi)) {
                    let a = s % nx;
                    match beta {
                        Some(b) => mass[a] += (b * ll[s]).exp(),
                        None => vals[a] = vals[a].max(ll[s]),
                    }
                }
                if beta.is_some() {
                    vals = mass.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
                }
                let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let winners: Vec<usize> = (0..nx).filter(|&a| vals[a] == best).collect();
                err += if winners.contains(&truth) {
                    (winners.len() - 1) as f64 / winners.len() as f64
                } else {
                    1.0
                };
            }
            total += prob * err / assignments as f64;
        }
    }
    total
}
