//! Type classes of length-`n` sequences, counted exactly.
//!
//! Count matrices use the `x * ny + y` layout of [`crate::Matrix`].

/// Every way to write `total` as an ordered sum of `parts` non-negative
/// integers, in lexicographic order.
pub(crate) fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0u32; parts];
    fn rec(pos: usize, left: u32, cur: &mut [u32], out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.to_vec());
            return;
        }
        for c in 0..=left {
            cur[pos] = c;
            rec(pos + 1, left - c, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// `(Σk)! / Π k!`, or `None` if it does not fit in a `u64`.
pub(crate) fn multinomial(counts: &[u32]) -> Option<u64> {
    let mut acc: u128 = 1;
    let mut n: u64 = 0;
    for &k in counts {
        // acc *= C(n + k, k), built one factor at a time so every step is exact
        for i in 1..=u64::from(k) {
            acc = acc.checked_mul(u128::from(n + i))? / u128::from(i);
        }
        n += u64::from(k);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    u64::try_from(acc).ok()
}

/// Count matrices over `nx × ny` whose column `y` sums to `col[y]`.
pub(crate) fn conditional_classes(nx: usize, col: &[u32]) -> Vec<Vec<u32>> {
    let ny = col.len();
    let per_col: Vec<Vec<Vec<u32>>> = col.iter().map(|&c| compositions(c, nx)).collect();
    let mut out = vec![vec![0u32; nx * ny]];
    for (y, options) in per_col.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for base in &out {
            for opt in options {
                let mut m = base.clone();
                for x in 0..nx {
                    m[x * ny + y] = opt[x];
                }
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// Number of `x`-sequences with conditional count matrix `counts` against a
/// fixed `y`-sequence: `Π_y multinomial(counts[·, y])`.
pub(crate) fn conditional_class_size(counts: &[u32], nx: usize, ny: usize) -> Option<u64> {
    let mut size: u64 = 1;
    let mut column = vec![0u32; nx];
    for y in 0..ny {
        for x in 0..nx {
            column[x] = counts[x * ny + y];
        }
        size = size.checked_mul(multinomial(&column)?)?;
    }
    Some(size)
}

/// Counts `N(x, y)` of a sequence pair.
pub(crate) fn joint_counts(x: &[usize], y: &[usize], nx: usize, ny: usize) -> Vec<u32> {
    let mut c = vec![0u32; nx * ny];
    for (&a, &b) in x.iter().zip(y) {
        c[a * ny + b] += 1;
    }
    c
}
