//! Independent brute-force oracles shared by the integration tests. None of
//! them calls into the solvers they are used to check.

#![allow(dead_code)]

pub mod oracle;

/// Small deterministic generator for test inputs (SplitMix64).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Random joint pmf on `nx × ny` with every entry at least `floor`.
    pub fn joint(&mut self, nx: usize, ny: usize, floor: f64) -> Vec<Vec<f64>> {
        let raw: Vec<f64> = (0..nx * ny).map(|_| -self.uniform().max(1e-300).ln()).collect();
        let s: f64 = raw.iter().sum();
        let n = (nx * ny) as f64;
        (0..nx)
            .map(|x| {
                (0..ny)
                    .map(|y| floor + (1.0 - n * floor) * raw[x * ny + y] / s)
                    .collect()
            })
            .collect()
    }
}
