//! Random dilution of a finite microstate system.
//!
//! Microstates are length-`n` sequences with energy `−ln P`. Each survives
//! independently with probability `e^{−nr}`; the measured free energy is
//! `(1/n) ln Z_D(β)` with `Z_D = Σ_{survivors} e^{−βE}`. Survivors are drawn
//! per type class (a binomial count per class), which is exact in law.
//!
//! For the conditional spectra the conditioning sequence is fixed to a
//! typical one: its type is `n P_Y` rounded by largest remainders.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::classes::{compositions, conditional_class_size, conditional_classes, multinomial};
use crate::error::{Error, Result};
use crate::logmath::{log_sum_exp, KahanSum};
use crate::source::JointSource;
use crate::spectrum::{diluted_free_energy, DilutedBranch, Spectrum, SpectrumKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilutionConfig {
    pub kind: SpectrumKind,
    pub n: usize,
    /// Dilution rate `r`: survival probability `e^{−nr}`.
    pub rate: f64,
    pub betas: Vec<f64>,
    pub realizations: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilutionCell {
    pub beta: f64,
    /// Realization mean of `(1/n) ln Z_D`.
    pub measured: f64,
    pub measured_std_error: f64,
    /// Realization mean of the Gibbs entropy per symbol of the survivors.
    pub entropy: f64,
    /// Analytic `φ_D(β)`; `−∞` when nothing survives asymptotically.
    #[serde(with = "crate::report::extended_float")]
    pub analytic: f64,
    pub branch: DilutedBranch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilutionReport {
    pub kind: SpectrumKind,
    pub n: usize,
    pub rate: f64,
    pub realizations: u64,
    pub seed: u64,
    /// Analytic `β_c(r)`; absent when the system never freezes.
    pub beta_c: Option<f64>,
    /// Knee of the measured curve, see [`knee`]; absent when no knee is
    /// found on the grid or the ground level stays exponentially large.
    pub beta_c_hat: Option<f64>,
    /// Realization mean of the `β → ∞` entropy `(1/n) ln #ground states`.
    pub entropy_floor: f64,
    pub cells: Vec<DilutionCell>,
}

/// A type class: exact size and total energy of each member.
struct Class {
    size: u64,
    energy: f64,
}

/// `n P_Y` rounded to integers summing to `n` (largest remainders, ties to
/// the lower index).
pub(crate) fn typical_counts(p: &[f64], n: usize) -> Vec<u32> {
    let raw: Vec<f64> = p.iter().map(|&q| q * n as f64).collect();
    let mut counts: Vec<u32> = raw.iter().map(|v| v.floor() as u32).collect();
    let short = n as u32 - counts.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().take(short as usize) {
        counts[i] += 1;
    }
    counts
}

fn too_large(n: usize, states: usize) -> Error {
    Error::MemoryBudgetExceeded {
        sequences: (states as f64).powi(n as i32),
        budget: u64::MAX,
    }
}

fn classes(src: &JointSource, kind: SpectrumKind, n: usize) -> Result<Vec<Class>> {
    let (nx, ny) = (src.nx(), src.ny());
    let ln = src.ln_matrix().as_slice();
    let energy = |k: &[u32]| -> f64 {
        k.iter()
            .zip(ln)
            .filter(|(c, _)| **c > 0)
            .map(|(&c, &l)| -f64::from(c) * l)
            .sum()
    };
    let out: Vec<Class> = match kind {
        SpectrumKind::ConditionalXGivenY => {
            let col = typical_counts(src.marginal_y(), n);
            conditional_classes(nx, &col)
                .into_iter()
                .map(|k| {
                    let size = conditional_class_size(&k, nx, ny).ok_or_else(|| too_large(n, nx))?;
                    Ok(Class {
                        size,
                        energy: energy(&k),
                    })
                })
                .collect::<Result<_>>()?
        }
        SpectrumKind::ConditionalYGivenX => return classes(&src.swapped(), SpectrumKind::ConditionalXGivenY, n),
        SpectrumKind::JointXy => compositions(n as u32, nx * ny)
            .into_iter()
            .map(|k| {
                let size = multinomial(&k).ok_or_else(|| too_large(n, nx * ny))?;
                Ok(Class {
                    size,
                    energy: energy(&k),
                })
            })
            .collect::<Result<_>>()?,
        SpectrumKind::ClosedForm => {
            return Err(Error::Config(
                "dilution experiments need a source spectrum, not a closed form".into(),
            ))
        }
    };
    Ok(out.into_iter().filter(|c| c.energy.is_finite()).collect())
}

fn spectrum(src: &JointSource, kind: SpectrumKind) -> Spectrum {
    match kind {
        SpectrumKind::ConditionalYGivenX => Spectrum::conditional_y_given_x(src),
        SpectrumKind::JointXy => Spectrum::joint(src),
        _ => Spectrum::conditional_x_given_y(src),
    }
}

/// Knee of the measured curve. The Gibbs entropy `f − βf'` is the
/// intercept of the tangent to the free energy; it falls while the system
/// is paramagnetic and settles on the ground-state floor `entropy_floor`
/// once frozen. The knee is the first `β` at which the excess over the
/// floor drops to `resolution`, interpolated linearly on the grid.
pub fn knee(betas: &[f64], entropy: &[f64], entropy_floor: f64, resolution: f64) -> Option<f64> {
    let excess: Vec<f64> = entropy.iter().map(|s| s - entropy_floor).collect();
    if excess.first().is_some_and(|&s| s <= resolution) {
        return betas.first().copied();
    }
    betas.windows(2).zip(excess.windows(2)).find_map(|(b, s)| {
        (s[0] > resolution && s[1] <= resolution)
            .then(|| b[0] + (s[0] - resolution) / (s[0] - s[1]) * (b[1] - b[0]))
    })
}

/// Measures `(1/n) ln Z_D(β)` over `cfg.realizations` independent
/// dilutions and sets it against `φ_D(β)`.
pub fn rdm_dilution_experiment(src: &JointSource, cfg: &DilutionConfig) -> Result<DilutionReport> {
    if cfg.n == 0 || cfg.realizations == 0 {
        return Err(Error::Config("n and realizations must be at least 1".into()));
    }
    if !(cfg.rate >= 0.0 && cfg.rate.is_finite()) {
        return Err(Error::OutOfRange {
            what: "rate",
            value: cfg.rate,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if let Some(&b) = cfg.betas.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
        return Err(Error::OutOfRange {
            what: "beta",
            value: b,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let classes = classes(src, cfg.kind, cfg.n)?;
    let n = cfg.n as f64;
    let keep = (-n * cfg.rate).exp();
    let nb = cfg.betas.len();
    let mut free = vec![KahanSum::default(); nb];
    let mut free_sq = vec![KahanSum::default(); nb];
    let mut entropy = vec![KahanSum::default(); nb];
    let mut floor = KahanSum::default();

    for k in 0..cfg.realizations {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k);
        let mut survivors: Vec<(f64, f64)> = Vec::new();
        for c in &classes {
            let count = if cfg.rate == 0.0 {
                c.size
            } else {
                Binomial::new(c.size, keep)
                    .map_err(|e| Error::Config(e.to_string()))?
                    .sample(&mut rng)
            };
            if count > 0 {
                survivors.push(((count as f64).ln(), c.energy));
            }
        }
        if survivors.is_empty() {
            return Err(Error::EmptyDilution);
        }
        // β → ∞: uniform over the lowest surviving energy level
        let e_min = survivors.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let ground: Vec<f64> = survivors
            .iter()
            .filter(|s| s.1 <= e_min + 1e-12 * (1.0 + e_min.abs()))
            .map(|s| s.0)
            .collect();
        floor.add(log_sum_exp(&ground) / n);
        for (j, &beta) in cfg.betas.iter().enumerate() {
            let logs: Vec<f64> = survivors.iter().map(|&(lc, e)| lc - beta * e).collect();
            let ln_z = log_sum_exp(&logs);
            let mean_energy: f64 = survivors
                .iter()
                .zip(&logs)
                .map(|(&(_, e), &l)| (l - ln_z).exp() * e)
                .sum();
            let f = ln_z / n;
            free[j].add(f);
            free_sq[j].add(f * f);
            entropy[j].add(f + beta * mean_energy / n);
        }
    }

    let spec = spectrum(src, cfg.kind);
    let m = cfg.realizations as f64;
    let mut cells = Vec::with_capacity(nb);
    let mut beta_c = None;
    for (j, &beta) in cfg.betas.iter().enumerate() {
        let mean = free[j].value() / m;
        let var = if cfg.realizations > 1 {
            ((free_sq[j].value() - m * mean * mean) / (m - 1.0)).max(0.0)
        } else {
            0.0
        };
        let d = diluted_free_energy(&spec, beta, cfg.rate)?;
        if d.beta_c.is_finite() {
            beta_c = Some(d.beta_c);
        }
        cells.push(DilutionCell {
            beta,
            measured: mean,
            measured_std_error: (var / m).sqrt(),
            entropy: entropy[j].value() / m,
            analytic: d.value,
            branch: d.branch,
        });
    }
    let s: Vec<f64> = cells.iter().map(|c| c.entropy).collect();
    let entropy_floor = floor.value() / m;
    // A frozen phase keeps sub-exponentially many ground states; a floor
    // above ln(n)/n means the survivors never freeze.
    let beta_c_hat = if entropy_floor <= n.ln() / n {
        knee(&cfg.betas, &s, entropy_floor, 1.0 / n)
    } else {
        None
    };
    Ok(DilutionReport {
        kind: cfg.kind,
        n: cfg.n,
        rate: cfg.rate,
        realizations: cfg.realizations,
        seed: cfg.seed,
        beta_c,
        beta_c_hat,
        entropy_floor,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typical_counts_sum_to_n() {
        assert_eq!(typical_counts(&[0.5, 0.5], 20), vec![10, 10]);
        assert_eq!(typical_counts(&[0.3, 0.3, 0.4], 10), vec![3, 3, 4]);
        assert_eq!(typical_counts(&[1.0 / 3.0; 3], 10).iter().sum::<u32>(), 10);
    }

    #[test]
    fn knee_interpolates() {
        let b = [0.0, 1.0, 2.0, 3.0];
        let s = [0.5, 0.3, 0.1, 0.0];
        assert!((knee(&b, &s, 0.0, 0.2).unwrap() - 1.5).abs() < 1e-12);
        assert!((knee(&b, &s, 0.1, 0.1).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(knee(&b, &s, 0.0, -1.0), None);
    }
}
