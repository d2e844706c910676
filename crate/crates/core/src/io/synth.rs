//! Synthetic dataset generator.
//!
//! Desk-scale stand-in for the benchmark datasets: a random binary
//! class-attribute matrix defines class centers through a fixed random linear
//! lift into feature space; samples are centers plus Gaussian noise. Fully
//! deterministic for a fixed seed.

use crate::error::{Error, Result};
use crate::eval::SplitSpec;
use crate::io::dataset::Dataset;
use crate::numerics::{Mat, Rng};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub num_classes: usize,
    pub num_attrs: usize,
    pub samples_per_class: usize,
    /// Standard deviation of the per-entry Gaussian feature noise.
    pub noise: f64,
    /// Probability of each class-attribute entry being 1.
    pub density: f64,
    pub feature_dim: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_classes: 20,
            num_attrs: 30,
            samples_per_class: 50,
            noise: 0.05,
            density: 0.5,
            feature_dim: 64,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 4 {
            return Err(Error::InvalidConfig(
                "need at least 4 classes so a seen/unseen split exists".to_string(),
            ));
        }
        if self.num_attrs == 0 || self.samples_per_class == 0 || self.feature_dim == 0 {
            return Err(Error::InvalidConfig("all counts must be >= 1".to_string()));
        }
        if self.noise < 0.0 || !self.noise.is_finite() {
            return Err(Error::InvalidConfig("noise must be nonnegative".to_string()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidConfig("density must be in (0, 1]".to_string()));
        }
        Ok(())
    }
}

/// Generate a dataset. The last ceil(d_C / 4) classes form the unseen split.
pub fn synth_dataset(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = Rng::with_stream(cfg.seed, 0x5359_4e54); // "SYNT"

    let d_c = cfg.num_classes;
    let d_t = cfg.num_attrs;
    let mut class_attr = Mat::zeros(d_c, d_t);
    for i in 0..d_c {
        for j in 0..d_t {
            class_attr.set(i, j, if rng.next_f64() < cfg.density { 1.0 } else { 0.0 });
        }
    }
    // Repair all-zero rows by resampling, then all-zero columns by flipping
    // one random entry on (which cannot empty a row).
    for i in 0..d_c {
        while class_attr.row(i).iter().all(|&v| v == 0.0) {
            for j in 0..d_t {
                class_attr.set(i, j, if rng.next_f64() < cfg.density { 1.0 } else { 0.0 });
            }
        }
    }
    for j in 0..d_t {
        if (0..d_c).all(|i| class_attr.get(i, j) == 0.0) {
            class_attr.set(rng.next_below(d_c), j, 1.0);
        }
    }

    // Fixed random lift into feature space; 1/sqrt(d_T) keeps center entries O(1).
    let scale = 1.0 / (d_t as f64).sqrt();
    let lift = Mat::from_vec(
        d_t,
        cfg.feature_dim,
        (0..d_t * cfg.feature_dim).map(|_| rng.normal() * scale).collect(),
    )?;
    let centers = class_attr.matmul(&lift)?;

    let n = d_c * cfg.samples_per_class;
    let mut features = Mat::zeros(n, cfg.feature_dim);
    let mut labels = Vec::with_capacity(n);
    let mut row = 0;
    for class in 0..d_c {
        for _ in 0..cfg.samples_per_class {
            for j in 0..cfg.feature_dim {
                features.set(row, j, centers.get(class, j) + cfg.noise * rng.normal());
            }
            labels.push(class);
            row += 1;
        }
    }

    let num_unseen = d_c.div_ceil(4);
    let seen: Vec<usize> = (0..d_c - num_unseen).collect();
    let unseen: Vec<usize> = (d_c - num_unseen..d_c).collect();

    let dataset = Dataset {
        features,
        labels,
        class_attr,
        split: SplitSpec::new(seen, unseen)?,
        class_names: None,
        attr_names: None,
    };
    dataset.validate()?;
    Ok(dataset)
}
