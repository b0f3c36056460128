//! Derivative-free minimization over a probability simplex: a uniform
//! coarse grid followed by pattern refinement along pair directions
//! `e_i − e_j` with shrinking step. Evaluation order is fixed and ties keep
//! the earlier point, so results do not depend on scheduling.

/// All points of `{q ≥ 0, Σq = 1}` on the lattice `1/k`, restricted to the
/// coordinates where `mask` is true, in lexicographic order.
pub(crate) fn grid(mask: &[bool], k: usize) -> Vec<Vec<f64>> {
    let active: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let mut out = Vec::new();
    if active.is_empty() {
        return out;
    }
    let mut counts = vec![0usize; active.len()];
    fn rec(
        pos: usize,
        left: usize,
        counts: &mut [usize],
        active: &[usize],
        dim: usize,
        k: usize,
        out: &mut Vec<Vec<f64>>,
    ) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            let mut q = vec![0.0; dim];
            for (c, &i) in counts.iter().zip(active) {
                q[i] = *c as f64 / k as f64;
            }
            out.push(q);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(pos + 1, left - c, counts, active, dim, k, out);
        }
    }
    rec(0, k, &mut counts, &active, mask.len(), k, &mut out);
    out
}

/// Number of lattice points for `d` active coordinates at resolution `k`.
pub(crate) fn grid_size(d: usize, k: usize) -> f64 {
    if d == 0 {
        return 0.0;
    }
    // C(k + d − 1, d − 1)
    let mut v = 1.0;
    for i in 1..d {
        v *= (k + i) as f64 / i as f64;
    }
    v
}

/// Pattern refinement from `start` with initial step `h`: `rounds` rounds,
/// each sweeping every pair direction with offsets `±1..±10` of `h/10^j`
/// until no move improves.
pub(crate) fn refine(
    mask: &[bool],
    start: Vec<f64>,
    start_val: f64,
    h: f64,
    rounds: usize,
    mut f: impl FnMut(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let active: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let mut best = start;
    let mut best_val = start_val;
    let mut step = h;
    for _ in 0..rounds {
        step /= 10.0;
        for _pass in 0..50 {
            let mut improved = false;
            for a in 0..active.len() {
                for b in (a + 1)..active.len() {
                    let (i, j) = (active[a], active[b]);
                    for t in (-10i32..=10).filter(|&t| t != 0) {
                        let d = t as f64 * step;
                        let (qi, qj) = (best[i] + d, best[j] - d);
                        if qi < -1e-15 || qj < -1e-15 {
                            continue;
                        }
                        let mut cand = best.clone();
                        cand[i] = qi.max(0.0);
                        cand[j] = qj.max(0.0);
                        let v = f(&cand);
                        if v < best_val {
                            best_val = v;
                            best = cand;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    (best, best_val)
}

/// Coarse grid, then refinement around the best `seeds` distinct cells and
/// around every point of `extra`. Returns the overall minimizer.
pub(crate) fn minimize(
    mask: &[bool],
    k: usize,
    seeds: usize,
    extra: &[Vec<f64>],
    mut f: impl FnMut(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let pts = grid(mask, k);
    let mut scored: Vec<(usize, f64)> = pts.iter().enumerate().map(|(i, q)| (i, f(q))).collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let h = 1.0 / k as f64;
    let mut starts: Vec<(Vec<f64>, f64)> = scored
        .iter()
        .take(seeds)
        .map(|&(i, v)| (pts[i].clone(), v))
        .collect();
    for q in extra {
        let v = f(q);
        starts.push((q.clone(), v));
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (q, v) in starts {
        let (q, v) = refine(mask, q, v, h, 3, &mut f);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((q, v));
        }
    }
    best.unwrap_or((vec![], f64::INFINITY))
}
