use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;

use super::classes::{conditional_class_size, conditional_classes, joint_counts};
use super::{SimConfig, SimMode, TieRule};
use crate::error::{Error, Result};
use crate::exponent::{Beta, MetricKind};
use crate::logmath::log_add_exp;

/// `n ℓ(x', y)` of a sequence from its joint counts.
enum Scorer {
    Linear { m: Vec<f64> },
    Entropy { nx: usize, ny: usize },
}

impl Scorer {
    fn new(cfg: &SimConfig) -> Self {
        let src = &cfg.source;
        match &cfg.metric {
            MetricKind::Matched => Scorer::Linear {
                m: src.ln_matrix().as_slice().to_vec(),
            },
            MetricKind::Mismatched(mm) => Scorer::Linear {
                m: mm.ln_matrix().as_slice().to_vec(),
            },
            MetricKind::MinConditionalEntropy => Scorer::Entropy {
                nx: src.nx(),
                ny: src.ny(),
            },
        }
    }

    fn score(&self, counts: &[u32]) -> f64 {
        match self {
            Scorer::Linear { m } => counts
                .iter()
                .zip(m)
                .filter(|(c, _)| **c > 0)
                .map(|(&c, &v)| f64::from(c) * v)
                .sum(),
            Scorer::Entropy { nx, ny } => {
                let mut s = 0.0;
                for y in 0..*ny {
                    let col: u32 = (0..*nx).map(|x| counts[x * ny + y]).sum();
                    for x in 0..*nx {
                        let c = counts[x * ny + y];
                        if c > 0 {
                            s += f64::from(c) * (f64::from(c) / f64::from(col)).ln();
                        }
                    }
                }
                s
            }
        }
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Symbol error under the configured tie rule, averaged over positions
    /// when requested.
    pub error: f64,
    /// True first symbol.
    pub truth: usize,
    /// Decided first symbol, ties going to the lowest index.
    pub decision: usize,
    /// Whether the first-symbol maximum was shared.
    pub tied: bool,
    /// First-position log masses `ln Σ_{x'_1 = a} e^{βnℓ}` per symbol `a`
    /// (best score `nℓ` per symbol for word-MAP).
    pub log_masses: Vec<f64>,
    /// `(1/n) ln Z_c` (`ℓ(x, y)` for word-MAP).
    pub log_z_correct: f64,
    /// `(1/n) ln Z_e` (best competitor `ℓ` for word-MAP); `−∞` if the bin
    /// holds nothing else.
    pub log_z_error: f64,
    /// Number of other sequences in the bin of `x`.
    pub competitors: u64,
}

/// Competitor statistics at one position.
struct Position {
    values: Vec<f64>,
    z_error: f64,
    competitors: u64,
}

pub(crate) struct Context<'a> {
    cfg: &'a SimConfig,
    nx: usize,
    ny: usize,
    scorer: Scorer,
    bins: u64,
    cells: WeightedIndex<f64>,
}

fn bin_of(word: u64, bins: u64) -> u64 {
    ((u128::from(word) * u128::from(bins)) >> 64) as u64
}

/// Decision among per-symbol values; returns `(error, decision, tied)`.
fn decide(values: &[f64], truth: usize, rule: TieRule) -> (f64, usize, bool) {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<usize> = (0..values.len()).filter(|&a| values[a] == best).collect();
    let k = winners.len();
    let error = if !winners.contains(&truth) {
        1.0
    } else {
        match rule {
            TieRule::Fractional => (k - 1) as f64 / k as f64,
            TieRule::LowestIndex => f64::from(u8::from(winners[0] != truth)),
            TieRule::Pessimistic => f64::from(u8::from(k > 1)),
        }
    };
    (error, winners[0], k > 1)
}

impl<'a> Context<'a> {
    pub(crate) fn new(cfg: &'a SimConfig) -> Result<Self> {
        let src = &cfg.source;
        let cells = WeightedIndex::new(src.matrix().as_slice())
            .map_err(|e| Error::InvalidSource(e.to_string()))?;
        Ok(Self {
            cfg,
            nx: src.nx(),
            ny: src.ny(),
            scorer: Scorer::new(cfg),
            bins: cfg.bins(),
            cells,
        })
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(id);
        rng
    }

    /// Log weight of `count` sequences with score `s`.
    fn weight(&self, s: f64, count: u64) -> f64 {
        match self.cfg.beta {
            Beta::Finite(b) => b * s + (count as f64).ln(),
            Beta::Infinite => s,
        }
    }

    fn combine(&self, acc: f64, w: f64) -> f64 {
        match self.cfg.beta {
            Beta::Finite(_) => log_add_exp(acc, w),
            Beta::Infinite => acc.max(w),
        }
    }

    pub(crate) fn run(&self, trial: u64) -> Result<TrialRecord> {
        let n = self.cfg.n;
        let mut src_rng = self.stream(2 * trial);
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let c = self.cells.sample(&mut src_rng);
            x.push(c / self.ny);
            y.push(c % self.ny);
        }
        let mut bin_rng = self.stream(2 * trial + 1);
        let positions = if self.cfg.all_positions { n } else { 1 };
        let stats = match self.cfg.mode {
            SimMode::TypeClass => (0..positions)
                .map(|i| self.type_class_position(&x, &y, i, &mut bin_rng))
                .collect::<Result<Vec<_>>>()?,
            SimMode::Enumerate => self.enumerate(&x, &y, positions, &mut bin_rng),
        };

        let s_correct = self.scorer.score(&joint_counts(&x, &y, self.nx, self.ny));
        let z_correct = self.weight(s_correct, 1);
        let mut total_error = 0.0;
        let mut first = None;
        for (i, mut p) in stats.into_iter().enumerate() {
            p.values[x[i]] = self.combine(p.values[x[i]], z_correct);
            let (err, decision, tied) = decide(&p.values, x[i], self.cfg.tie_rule);
            total_error += err;
            if i == 0 {
                first = Some((p, decision, tied));
            }
        }
        let (p, decision, tied) = first.expect("at least one position");
        Ok(TrialRecord {
            error: total_error / positions as f64,
            truth: x[0],
            decision,
            tied,
            log_masses: p.values,
            log_z_correct: z_correct / n as f64,
            log_z_error: p.z_error / n as f64,
            competitors: p.competitors,
        })
    }

    /// Bin contents at position `i` by type class: for every class of
    /// `x'` (symbol `a` at `i`, conditional counts elsewhere) draw how many
    /// of its members share the bin of `x`.
    fn type_class_position(
        &self,
        x: &[usize],
        y: &[usize],
        i: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Position> {
        let (nx, ny) = (self.nx, self.ny);
        let mut col = vec![0u32; ny];
        let mut own = vec![0u32; nx * ny];
        for j in (0..x.len()).filter(|&j| j != i) {
            col[y[j]] += 1;
            own[x[j] * ny + y[j]] += 1;
        }
        let classes = conditional_classes(nx, &col);
        let p = 1.0 / self.bins as f64;
        let mut values = vec![f64::NEG_INFINITY; nx];
        let mut z_error = f64::NEG_INFINITY;
        let mut competitors = 0;
        for a in 0..nx {
            for k in &classes {
                let mut size = conditional_class_size(k, nx, ny).ok_or(Error::MemoryBudgetExceeded {
                    sequences: self.cfg.sequences(),
                    budget: super::SEQUENCE_BUDGET,
                })?;
                if a == x[i] && *k == own {
                    size -= 1;
                }
                if size == 0 {
                    continue;
                }
                let count = if self.bins == 1 {
                    size
                } else {
                    Binomial::new(size, p)
                        .map_err(|e| Error::Config(e.to_string()))?
                        .sample(rng)
                };
                if count == 0 {
                    continue;
                }
                competitors += count;
                let mut full = k.clone();
                full[a * ny + y[i]] += 1;
                let w = self.weight(self.scorer.score(&full), count);
                values[a] = self.combine(values[a], w);
                z_error = self.combine(z_error, w);
            }
        }
        Ok(Position {
            values,
            z_error,
            competitors,
        })
    }

    /// Bin contents by visiting all `|X|^n` sequences. Sequence `j` (base
    /// `|X|` digits, position 0 least significant) is binned by the `j`-th
    /// 64-bit word of the binning stream.
    fn enumerate(&self, x: &[usize], y: &[usize], positions: usize, rng: &mut ChaCha8Rng) -> Vec<Position> {
        let (nx, ny, n) = (self.nx, self.ny, x.len());
        let total = (nx as u64).pow(n as u32);
        let x_idx = x.iter().rev().fold(0u64, |acc, &d| acc * nx as u64 + d as u64);
        rng.set_word_pos(2 * u128::from(x_idx));
        let bin_x = bin_of(rng.next_u64(), self.bins);
        rng.set_word_pos(0);

        let mut stats: Vec<Position> = (0..positions)
            .map(|_| Position {
                values: vec![f64::NEG_INFINITY; nx],
                z_error: f64::NEG_INFINITY,
                competitors: 0,
            })
            .collect();
        let mut digits = vec![0usize; n];
        let mut counts = vec![0u32; nx * ny];
        for idx in 0..total {
            let word = rng.next_u64();
            if idx == x_idx || bin_of(word, self.bins) != bin_x {
                continue;
            }
            let mut v = idx;
            counts.iter_mut().for_each(|c| *c = 0);
            for j in 0..n {
                digits[j] = (v % nx as u64) as usize;
                v /= nx as u64;
                counts[digits[j] * ny + y[j]] += 1;
            }
            let w = self.weight(self.scorer.score(&counts), 1);
            for (i, p) in stats.iter_mut().enumerate() {
                p.values[digits[i]] = self.combine(p.values[digits[i]], w);
                p.z_error = self.combine(p.z_error, w);
                p.competitors += 1;
            }
        }
        stats
    }
}
