//! Run configuration: plain key=value files with `#` comments, overridden by
//! command-line flags. Every command echoes its fully resolved configuration
//! and writes it next to its outputs, so a run can be reproduced bit for bit
//! from the echoed file alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anchorzsl::anchors::Activation;
use anchorzsl::{Error, Result};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alpha: f64,
    pub p: usize,
    pub anchor_dim: Option<usize>,
    pub dataset: Option<String>,
    pub anchor_epochs: usize,
    pub align_epochs: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub anchor_lr: f64,
    pub align_lr: f64,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub tied_weights: bool,
    pub normalize_anchors: bool,
    pub cosine_scores: bool,
    pub no_reg: bool,
    pub pca_anchors: bool,
    pub drop_empty_attributes: bool,
    pub raw_loss: bool,
    /// Repeated runs per sweep point, averaged (seeds seed, seed+1, ...).
    pub repeats: usize,
    pub synth_classes: usize,
    pub synth_attrs: usize,
    pub synth_samples_per_class: usize,
    pub synth_noise: f64,
    pub synth_density: f64,
    pub synth_feature_dim: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.8,
            p: 2,
            anchor_dim: None,
            dataset: None,
            anchor_epochs: 1000,
            align_epochs: 3,
            lambda1: 1.0,
            lambda2: 5e-6,
            batch_size: 64,
            seed: 0,
            anchor_lr: 1e-2,
            align_lr: 2e-2,
            hidden_activation: Activation::Tanh,
            output_activation: Activation::Linear,
            tied_weights: false,
            normalize_anchors: false,
            cosine_scores: false,
            no_reg: false,
            pca_anchors: false,
            drop_empty_attributes: false,
            raw_loss: false,
            repeats: 1,
            synth_classes: 20,
            synth_attrs: 30,
            synth_samples_per_class: 50,
            synth_noise: 0.05,
            synth_density: 0.5,
            synth_feature_dim: 64,
        }
    }
}

/// Anchor widths from the published per-dataset defaults.
fn named_dataset_dim(name: &str) -> Option<usize> {
    match name.to_ascii_lowercase().as_str() {
        "awa2" => Some(32),
        "cub" => Some(256),
        "sun" => Some(64),
        "apy" => Some(64),
        _ => None,
    }
}

impl RunConfig {
    /// Apply one key=value assignment (from a config file or a flag).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| {
                Error::InvalidConfig(format!("invalid value {value:?} for key {key:?}"))
            })
        }
        match key {
            "alpha" => self.alpha = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "anchor_dim" => self.anchor_dim = Some(parse(key, value)?),
            "dataset" => self.dataset = Some(value.to_string()),
            "anchor_epochs" => self.anchor_epochs = parse(key, value)?,
            "align_epochs" => self.align_epochs = parse(key, value)?,
            "lambda1" => self.lambda1 = parse(key, value)?,
            "lambda2" => self.lambda2 = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "anchor_lr" => self.anchor_lr = parse(key, value)?,
            "align_lr" => self.align_lr = parse(key, value)?,
            "hidden_activation" => self.hidden_activation = Activation::parse(value)?,
            "output_activation" => self.output_activation = Activation::parse(value)?,
            "tied_weights" => self.tied_weights = parse(key, value)?,
            "normalize_anchors" => self.normalize_anchors = parse(key, value)?,
            "cosine_scores" => self.cosine_scores = parse(key, value)?,
            "no_reg" => self.no_reg = parse(key, value)?,
            "pca_anchors" => self.pca_anchors = parse(key, value)?,
            "drop_empty_attributes" => self.drop_empty_attributes = parse(key, value)?,
            "raw_loss" => self.raw_loss = parse(key, value)?,
            "repeats" => self.repeats = parse(key, value)?,
            "synth_classes" => self.synth_classes = parse(key, value)?,
            "synth_attrs" => self.synth_attrs = parse(key, value)?,
            "synth_samples_per_class" => self.synth_samples_per_class = parse(key, value)?,
            "synth_noise" => self.synth_noise = parse(key, value)?,
            "synth_density" => self.synth_density = parse(key, value)?,
            "synth_feature_dim" => self.synth_feature_dim = parse(key, value)?,
            other => {
                return Err(Error::InvalidConfig(format!("unknown configuration key {other:?}")))
            }
        }
        Ok(())
    }

    /// Parse a key=value file; later lines win.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let content = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        for (lineno, raw) in content.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "{}:{}: expected key=value, got {raw:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Effective anchor width: explicit value first, then the named-dataset
    /// table.
    pub fn resolve_anchor_dim(&self) -> Result<usize> {
        if let Some(dim) = self.anchor_dim {
            return Ok(dim);
        }
        if let Some(name) = &self.dataset {
            if let Some(dim) = named_dataset_dim(name) {
                return Ok(dim);
            }
            return Err(Error::InvalidConfig(format!(
                "unknown dataset name {name:?}; set anchor_dim explicitly"
            )));
        }
        Err(Error::InvalidConfig(
            "anchor_dim is required (or pass a known dataset name)".to_string(),
        ))
    }

    /// Canonical key=value rendering; feeding this back through
    /// [`RunConfig::apply_file`] reproduces the identical configuration.
    pub fn render(&self) -> String {
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        kv.insert("alpha", format!("{:.17e}", self.alpha));
        kv.insert("p", self.p.to_string());
        if let Some(dim) = self.anchor_dim {
            kv.insert("anchor_dim", dim.to_string());
        }
        if let Some(name) = &self.dataset {
            kv.insert("dataset", name.clone());
        }
        kv.insert("anchor_epochs", self.anchor_epochs.to_string());
        kv.insert("align_epochs", self.align_epochs.to_string());
        kv.insert("lambda1", format!("{:.17e}", self.lambda1));
        kv.insert("lambda2", format!("{:.17e}", self.lambda2));
        kv.insert("batch_size", self.batch_size.to_string());
        kv.insert("seed", self.seed.to_string());
        kv.insert("anchor_lr", format!("{:.17e}", self.anchor_lr));
        kv.insert("align_lr", format!("{:.17e}", self.align_lr));
        kv.insert("hidden_activation", self.hidden_activation.name().to_string());
        kv.insert("output_activation", self.output_activation.name().to_string());
        kv.insert("tied_weights", self.tied_weights.to_string());
        kv.insert("normalize_anchors", self.normalize_anchors.to_string());
        kv.insert("cosine_scores", self.cosine_scores.to_string());
        kv.insert("no_reg", self.no_reg.to_string());
        kv.insert("pca_anchors", self.pca_anchors.to_string());
        kv.insert("drop_empty_attributes", self.drop_empty_attributes.to_string());
        kv.insert("raw_loss", self.raw_loss.to_string());
        kv.insert("repeats", self.repeats.to_string());
        kv.insert("synth_classes", self.synth_classes.to_string());
        kv.insert("synth_attrs", self.synth_attrs.to_string());
        kv.insert("synth_samples_per_class", self.synth_samples_per_class.to_string());
        kv.insert("synth_noise", format!("{:.17e}", self.synth_noise));
        kv.insert("synth_density", format!("{:.17e}", self.synth_density));
        kv.insert("synth_feature_dim", self.synth_feature_dim.to_string());

        let mut out = String::new();
        for (k, v) in kv {
            writeln!(out, "{k}={v}").expect("string write");
        }
        out
    }
}
