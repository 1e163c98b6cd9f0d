use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flood::{watershed_labels_with, FloodLevels, LINE};
use super::seeds::{gen_uniform_seeds, gen_windowed_seeds_with_origin, LatticeOrigin, SeedSet};
use crate::error::{Error, Result};
use crate::imaging::{io, BinaryMask, RasterImage};

/// How seeds are drawn in each experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedingMode {
    Uniform { count: usize },
    Windowed { rows: usize, cols: usize },
}

impl SeedingMode {
    /// Windowed lattice with cells of roughly `cell` pixels, at least 2x2 cells.
    pub fn windowed_for(height: usize, width: usize, cell: usize) -> Self {
        let parts = |len: usize| {
            let n = ((len as f64) / (cell.max(1) as f64)).round() as usize;
            n.max(2).min(len.max(1))
        };
        SeedingMode::Windowed {
            rows: parts(height),
            cols: parts(width),
        }
    }

    pub fn seed_count(&self) -> usize {
        match *self {
            SeedingMode::Uniform { count } => count,
            SeedingMode::Windowed { rows, cols } => rows * cols,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StochasticConfig {
    pub experiments: usize,
    pub seeding: SeedingMode,
    pub origin: LatticeOrigin,
    pub threshold: f64,
    pub master_seed: u64,
}

impl StochasticConfig {
    pub fn new(experiments: usize, seeding: SeedingMode, master_seed: u64) -> Self {
        Self {
            experiments,
            seeding,
            origin: LatticeOrigin::Random,
            threshold: 0.8,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiments == 0 {
            return Err(Error::Config("number of experiments must be >= 1".into()));
        }
        if self.seeding.seed_count() < 2 {
            return Err(Error::Config("at least 2 seeds per experiment are required".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Config(format!(
                "threshold {} outside (0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Independent random stream of experiment `index`.
pub fn experiment_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

/// Seeds drawn for experiment `index` under `cfg`.
pub fn experiment_seeds(
    height: usize,
    width: usize,
    cfg: &StochasticConfig,
    index: usize,
) -> Result<SeedSet> {
    let mut rng = experiment_rng(cfg.master_seed, index);
    let seeds = match cfg.seeding {
        SeedingMode::Uniform { count } => gen_uniform_seeds(height, width, count, &mut rng)?,
        SeedingMode::Windowed { rows, cols } => {
            gen_windowed_seeds_with_origin(height, width, rows, cols, cfg.origin, &mut rng)?
        }
    };
    Ok(SeedSet {
        experiment_index: index,
        seeds,
    })
}

/// Fraction of experiments in which each pixel was a watershed line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbabilityImage {
    height: usize,
    width: usize,
    experiments: usize,
    counts: Vec<u32>,
}

impl ProbabilityImage {
    pub fn from_counts(
        height: usize,
        width: usize,
        experiments: usize,
        counts: Vec<u32>,
    ) -> Result<Self> {
        if experiments == 0 || counts.len() != height * width {
            return Err(Error::invalid("malformed probability image"));
        }
        if counts.iter().any(|c| *c as usize > experiments) {
            return Err(Error::invalid("count exceeds the number of experiments"));
        }
        Ok(Self {
            height,
            width,
            experiments,
            counts,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn experiments(&self) -> usize {
        self.experiments
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.counts[row * self.width + col] as f64 / self.experiments as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let m = self.experiments as f64;
        self.counts.iter().map(|c| *c as f64 / m).collect()
    }

    pub fn max(&self) -> f64 {
        self.counts.iter().copied().max().unwrap_or(0) as f64 / self.experiments as f64
    }

    /// 16-bit PNG, `value * 65535`.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        io::save_gray16(self.height, self.width, &self.values(), path)
    }
}

/// Monte Carlo average of seeded watershed lines over `cfg.experiments`
/// independently seeded runs. Experiments run in parallel; counts are summed,
/// so the result does not depend on scheduling.
pub fn stochastic_watershed(gray: &RasterImage, cfg: &StochasticConfig) -> Result<ProbabilityImage> {
    gray.require_channels(1)?;
    cfg.validate()?;
    let (h, w) = gray.dims();
    let levels = FloodLevels::of(gray)?;
    let counts = (0..cfg.experiments)
        .into_par_iter()
        .map(|i| -> Result<Vec<u32>> {
            let seeds = experiment_seeds(h, w, cfg, i)?;
            let labels = watershed_labels_with(gray, &levels, &seeds)?;
            Ok(labels.iter().map(|l| (*l == LINE) as u32).collect())
        })
        .try_reduce(
            || vec![0u32; h * w],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    ProbabilityImage::from_counts(h, w, cfg.experiments, counts)
}

/// Line mask: probability at least `threshold` and inside the field mask.
pub fn binarize_lines(
    prob: &ProbabilityImage,
    field: &BinaryMask,
    threshold: f64,
) -> Result<BinaryMask> {
    field.require_dims(prob.dims())?;
    let m = prob.experiments as f64;
    let bits = prob
        .counts
        .iter()
        .zip(field.bits())
        .map(|(c, f)| *f && *c as f64 / m >= threshold)
        .collect();
    BinaryMask::from_bits(prob.height, prob.width, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::watershed::seeded_watershed;
    use proptest::prelude::*;

    fn ridge_card() -> RasterImage {
        // Two basins: slopes falling away from a 1-px crest at column 40.
        RasterImage::from_fn_gray(64, 80, |_, c| {
            if c == 40 {
                0.8
            } else {
                0.1 + 0.4 * (1.0 - (c as f64 - 40.0).abs() / 40.0)
            }
        })
        .unwrap()
    }

    #[test]
    fn single_experiment_equals_one_run() {
        let img = ridge_card();
        let cfg = StochasticConfig::new(1, SeedingMode::Windowed { rows: 3, cols: 4 }, 5);
        let prob = stochastic_watershed(&img, &cfg).unwrap();
        let seeds = experiment_seeds(64, 80, &cfg, 0).unwrap();
        let once = seeded_watershed(&img, &seeds).unwrap();
        for r in 0..64 {
            for c in 0..80 {
                let v = prob.get(r, c);
                assert!(v == 0.0 || v == 1.0);
                assert_eq!(v == 1.0, once.get(r, c));
            }
        }
    }

    #[test]
    fn ridge_is_found_with_windowed_seeds() {
        let img = ridge_card();
        // One seed per vertical strip: interior boundaries inside a basin are
        // what pull pixels off the crest, so keep one marker per basin.
        let cfg = StochasticConfig::new(20, SeedingMode::Windowed { rows: 1, cols: 2 }, 42);
        let prob = stochastic_watershed(&img, &cfg).unwrap();
        for r in 0..64 {
            for c in 0..80 {
                if c == 40 {
                    assert!(prob.get(r, c) >= 0.8, "ridge ({r},{c}) = {}", prob.get(r, c));
                } else {
                    assert!(prob.get(r, c) <= 0.2, "({r},{c}) = {}", prob.get(r, c));
                }
            }
        }
    }

    #[test]
    fn flat_image_has_no_stable_lines() {
        let img = RasterImage::filled(128, 128, 1, 0.0).unwrap();
        let cfg = StochasticConfig::new(200, SeedingMode::windowed_for(128, 128, 32), 9);
        let prob = stochastic_watershed(&img, &cfg).unwrap();
        assert!(prob.max() < 0.8, "max {}", prob.max());
    }

    #[test]
    fn binarize_examples() {
        let prob = ProbabilityImage::from_counts(1, 3, 100, vec![79, 80, 81]).unwrap();
        let field = BinaryMask::full(1, 3);
        let m = binarize_lines(&prob, &field, 0.8).unwrap();
        assert_eq!(m.bits(), &[false, true, true]);

        let ones = ProbabilityImage::from_counts(2, 2, 4, vec![4; 4]).unwrap();
        assert_eq!(binarize_lines(&ones, &BinaryMask::full(2, 2), 0.8).unwrap().count(), 4);
        assert!(binarize_lines(&ones, &BinaryMask::new(2, 2), 0.8).unwrap().is_empty());
        assert!(binarize_lines(&ones, &BinaryMask::new(2, 3), 0.8).is_err());
    }

    #[test]
    fn twenty_experiments_hit_point_eight_exactly() {
        let prob = ProbabilityImage::from_counts(1, 2, 20, vec![15, 16]).unwrap();
        let m = binarize_lines(&prob, &BinaryMask::full(1, 2), 0.8).unwrap();
        assert_eq!(m.bits(), &[false, true]);
    }

    #[test]
    fn config_validation() {
        let ok = StochasticConfig::new(20, SeedingMode::Uniform { count: 10 }, 0);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.experiments = 0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.threshold = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.seeding = SeedingMode::Windowed { rows: 1, cols: 1 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn reproducible_and_order_free() {
        let img = ridge_card();
        let cfg = StochasticConfig::new(12, SeedingMode::Uniform { count: 30 }, 77);
        let a = stochastic_watershed(&img, &cfg).unwrap();
        let b = stochastic_watershed(&img, &cfg).unwrap();
        assert_eq!(a, b);
        // Sequential accumulation gives the same counts.
        let mut counts = vec![0u32; 64 * 80];
        for i in (0..12).rev() {
            let s = experiment_seeds(64, 80, &cfg, i).unwrap();
            for (k, b) in seeded_watershed(&img, &s).unwrap().bits().iter().enumerate() {
                counts[k] += *b as u32;
            }
        }
        assert_eq!(a.counts(), &counts[..]);
    }

    #[test]
    fn windowed_for_defaults() {
        assert_eq!(
            SeedingMode::windowed_for(270, 480, 32),
            SeedingMode::Windowed { rows: 8, cols: 15 }
        );
        assert_eq!(
            SeedingMode::windowed_for(40, 40, 32),
            SeedingMode::Windowed { rows: 2, cols: 2 }
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn probabilities_and_threshold_monotonicity(
            m in 1usize..40,
            raw in prop::collection::vec(any::<u32>(), 24),
            field in prop::collection::vec(any::<bool>(), 24),
            t1 in 0.001f64..1.0, t2 in 0.001f64..1.0,
        ) {
            let counts: Vec<u32> = raw.iter().map(|c| c % (m as u32 + 1)).collect();
            let prob = ProbabilityImage::from_counts(4, 6, m, counts).unwrap();
            for v in prob.values() {
                prop_assert!((0.0..=1.0).contains(&v));
                let k = v * m as f64;
                prop_assert!((k - k.round()).abs() < 1e-9);
            }
            let field = BinaryMask::from_bits(4, 6, field).unwrap();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = binarize_lines(&prob, &field, lo).unwrap();
            let b = binarize_lines(&prob, &field, hi).unwrap();
            prop_assert!(b.is_subset_of(&a));
            prop_assert!(a.is_subset_of(&field));
        }
    }
}
