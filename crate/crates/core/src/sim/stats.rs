use serde::{Deserialize, Serialize};

const Z95: f64 = 1.959_963_984_540_054;

/// A proportion with its Wilson 95% score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub std_error: f64,
}

/// Wilson interval for `successes` out of `trials`; `successes` may be
/// fractional (tie credit).
pub fn wilson(successes: f64, trials: u64) -> Proportion {
    let n = trials as f64;
    if trials == 0 {
        return Proportion {
            estimate: 0.0,
            ci_low: 0.0,
            ci_high: 1.0,
            std_error: f64::INFINITY,
        };
    }
    let p = (successes / n).clamp(0.0, 1.0);
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Proportion {
        estimate: p,
        ci_low: (centre - half).max(0.0),
        ci_high: (centre + half).min(1.0),
        std_error: (p * (1.0 - p) / n).sqrt(),
    }
}
