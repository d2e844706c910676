//! Distribution alignment: project visual features into the anchor space,
//! reconstruct them, and optionally regularize sample-attribute relations
//! through a learned metric.
//!
//! With projected samples `U~ = X W_cons` the loss is
//!
//! ```text
//! L = ||X W_cons - Y U_C||^2 / n                       (consistency)
//!   + lambda1 * ||U~ W_recons - X||^2 / n              (reconstruction)
//!   + lambda2 * ||Y C - U~ M U_T^T||^2 / n             (relation)
//! ```
//!
//! All three gradients are closed-form products of the residuals. The 1/n
//! normalization keeps the lambda defaults meaningful across batch sizes; a
//! raw (unnormalized) mode is available via [`AlignConfig::per_sample`].

use crate::anchors::AnchorSet;
use crate::error::{Error, Result};
use crate::numerics::{glorot_init, AdamConfig, AdamState, Mat, Rng};

/// Projection, reconstruction, and relation-metric weights.
#[derive(Debug, Clone)]
pub struct AlignModel {
    pub w_cons: Mat,
    pub w_recons: Mat,
    pub metric: Mat,
    pub lambda1: f64,
    pub lambda2: f64,
    pub reg_enabled: bool,
    pub tied_weights: bool,
    pub per_sample: bool,
}

impl AlignModel {
    /// Anchor-space width d.
    pub fn dim(&self) -> usize {
        self.w_cons.cols()
    }

    /// Feature-space width d_X.
    pub fn feature_dim(&self) -> usize {
        self.w_cons.rows()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.reg_enabled && self.lambda2 != 0.0 {
            return Err(Error::InvalidConfig(format!(
                "lambda2 must be exactly 0 when relation regularization is disabled, got {}",
                self.lambda2
            )));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::InvalidConfig(
                "lambda1 and lambda2 must be nonnegative".to_string(),
            ));
        }
        let d = self.dim();
        if self.w_recons.shape() != (d, self.feature_dim()) {
            return Err(self.w_cons.dim_mismatch("align model", &self.w_recons));
        }
        if self.metric.shape() != (d, d) {
            return Err(self.w_cons.dim_mismatch("align model metric", &self.metric));
        }
        Ok(())
    }
}

/// Features with one-hot labels.
#[derive(Debug, Clone)]
pub struct LabeledBatch {
    features: Mat,
    labels: Vec<usize>,
    onehot: Mat,
}

impl LabeledBatch {
    pub fn new(features: Mat, labels: Vec<usize>, num_classes: usize) -> Result<LabeledBatch> {
        if features.rows() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidArgument("batch must contain at least one sample".to_string()));
        }
        let mut onehot = Mat::zeros(labels.len(), num_classes);
        for (i, &label) in labels.iter().enumerate() {
            if label >= num_classes {
                return Err(Error::LabelOutOfRange {
                    index: i,
                    label,
                    num_classes,
                });
            }
            onehot.set(i, label, 1.0);
        }
        Ok(LabeledBatch {
            features,
            labels,
            onehot,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &Mat {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn onehot(&self) -> &Mat {
        &self.onehot
    }

    pub fn num_classes(&self) -> usize {
        self.onehot.cols()
    }

    /// Sub-batch in the given index order.
    pub fn select(&self, indices: &[usize]) -> LabeledBatch {
        LabeledBatch {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            onehot: self.onehot.select_rows(indices),
        }
    }
}

/// Loss terms plus gradients for the free parameters.
pub struct AlignLoss {
    pub total: f64,
    pub consistency: f64,
    pub reconstruction: f64,
    pub relation: f64,
    pub grad_w_cons: Mat,
    pub grad_w_recons: Mat,
    pub grad_metric: Mat,
}

fn check_term(value: f64, term: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            context: format!("align_loss: {term} term diverged"),
        })
    }
}

pub fn align_loss(
    model: &AlignModel,
    batch: &LabeledBatch,
    anchors: &AnchorSet,
    class_attr: &Mat,
) -> Result<AlignLoss> {
    model.validate()?;
    if batch.features.cols() != model.feature_dim() {
        return Err(batch.features.dim_mismatch("align_loss features", &model.w_cons));
    }
    if batch.num_classes() != anchors.num_classes()
        || class_attr.rows() != anchors.num_classes()
        || class_attr.cols() != anchors.num_attrs()
    {
        return Err(Error::InvalidArgument(format!(
            "align_loss: {} label classes, {}x{} class-attribute matrix, anchors for {} classes / {} attributes",
            batch.num_classes(),
            class_attr.rows(),
            class_attr.cols(),
            anchors.num_classes(),
            anchors.num_attrs()
        )));
    }

    let n = batch.len() as f64;
    let norm = if model.per_sample { 1.0 / n } else { 1.0 };
    let x = &batch.features;
    let y = &batch.onehot;
    let u_c = anchors.class_anchors();
    let u_t = anchors.attr_anchors();
    let w_recons = if model.tied_weights {
        model.w_cons.transpose()
    } else {
        model.w_recons.clone()
    };

    let embedded = x.matmul(&model.w_cons)?;

    // Consistency: X W_cons - Y U_C
    let res_cons = embedded.sub(&y.matmul(&u_c)?)?;
    let consistency = check_term(res_cons.frob_norm_sq() * norm, "consistency")?;

    // Reconstruction: U~ W_recons - X
    let res_recons = embedded.matmul(&w_recons)?.sub(x)?;
    let reconstruction = check_term(res_recons.frob_norm_sq() * norm, "reconstruction")?;

    // Relation: U~ M U_T^T - Y C
    let metric_ut = model.metric.matmul(&u_t.transpose())?;
    let res_rel = embedded.matmul(&metric_ut)?.sub(&y.matmul(class_attr)?)?;
    let relation = check_term(res_rel.frob_norm_sq() * norm, "relation")?;

    let total = check_term(
        consistency + model.lambda1 * reconstruction + model.lambda2 * relation,
        "total",
    )?;

    // d consistency / d W_cons
    let mut grad_w_cons = x.transpose().matmul(&res_cons)?.scale(2.0 * norm)?;
    // d reconstruction / d W_cons (through the embedding)
    let recons_path = x
        .transpose()
        .matmul(&res_recons.matmul(&w_recons.transpose())?)?
        .scale(2.0 * norm * model.lambda1)?;
    grad_w_cons = grad_w_cons.add(&recons_path)?;
    // d relation / d W_cons (through the embedding)
    let rel_path = x
        .transpose()
        .matmul(&res_rel.matmul(&metric_ut.transpose())?)?
        .scale(2.0 * norm * model.lambda2)?;
    grad_w_cons = grad_w_cons.add(&rel_path)?;

    let grad_w_recons = if model.tied_weights {
        // Tied decoder contributes an extra path into W_cons instead.
        let extra = res_recons
            .transpose()
            .matmul(&x.matmul(&model.w_cons)?)?
            .scale(2.0 * norm * model.lambda1)?;
        grad_w_cons = grad_w_cons.add(&extra)?;
        Mat::zeros(model.dim(), model.feature_dim())
    } else {
        embedded
            .transpose()
            .matmul(&res_recons)?
            .scale(2.0 * norm * model.lambda1)?
    };

    let grad_metric = embedded
        .transpose()
        .matmul(&res_rel.matmul(&u_t)?)?
        .scale(2.0 * norm * model.lambda2)?;

    Ok(AlignLoss {
        total,
        consistency,
        reconstruction,
        relation,
        grad_w_cons,
        grad_w_recons,
        grad_metric,
    })
}

/// Settings for [`train_align`].
#[derive(Debug, Clone)]
pub struct AlignConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub lambda1: f64,
    pub lambda2: f64,
    pub reg_enabled: bool,
    pub tied_weights: bool,
    pub per_sample: bool,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            epochs: 3,
            batch_size: 64,
            adam: AdamConfig::default(),
            lambda1: 1.0,
            lambda2: 5e-6,
            reg_enabled: true,
            tied_weights: false,
            per_sample: true,
        }
    }
}

pub struct TrainedAlignModel {
    pub model: AlignModel,
    /// Full-set loss before each epoch plus the final loss; length epochs + 1.
    pub loss_trace: Vec<f64>,
}

/// Mini-batch Adam over shuffled passes of the batch. The metric starts at
/// the identity, the projections at Glorot samples. Deterministic for a
/// fixed seed.
pub fn train_align(
    batch: &LabeledBatch,
    anchors: &AnchorSet,
    class_attr: &Mat,
    cfg: &AlignConfig,
    rng: &mut Rng,
) -> Result<TrainedAlignModel> {
    if cfg.epochs == 0 {
        return Err(Error::InvalidConfig("align epochs must be >= 1".to_string()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be >= 1".to_string()));
    }
    let d = anchors.dim();
    let d_x = batch.features().cols();
    let lambda2 = if cfg.reg_enabled { cfg.lambda2 } else { 0.0 };

    let mut model = AlignModel {
        w_cons: glorot_init(rng, d_x, d),
        w_recons: Mat::zeros(d, d_x),
        metric: Mat::identity(d),
        lambda1: cfg.lambda1,
        lambda2,
        reg_enabled: cfg.reg_enabled,
        tied_weights: cfg.tied_weights,
        per_sample: cfg.per_sample,
    };
    if !cfg.tied_weights {
        model.w_recons = glorot_init(rng, d, d_x);
    }
    // Fail fast on inconsistent shapes before the epoch loop.
    align_loss(&model, &batch.select(&[0]), anchors, class_attr)?;

    let mut params = if cfg.tied_weights {
        vec![model.w_cons.clone(), model.metric.clone()]
    } else {
        vec![model.w_cons.clone(), model.w_recons.clone(), model.metric.clone()]
    };
    let mut adam = AdamState::new(cfg.adam, &params);
    let mut loss_trace = Vec::with_capacity(cfg.epochs + 1);
    let mut order: Vec<usize> = (0..batch.len()).collect();

    let write_back = |model: &mut AlignModel, params: &[Mat]| {
        model.w_cons = params[0].clone();
        if params.len() == 3 {
            model.w_recons = params[1].clone();
            model.metric = params[2].clone();
        } else {
            model.w_recons = params[0].transpose();
            model.metric = params[1].clone();
        }
    };

    for _ in 0..cfg.epochs {
        write_back(&mut model, &params);
        loss_trace.push(align_loss(&model, batch, anchors, class_attr)?.total);

        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            write_back(&mut model, &params);
            let sub = batch.select(chunk);
            let lg = align_loss(&model, &sub, anchors, class_attr)?;
            let grads = if cfg.tied_weights {
                vec![lg.grad_w_cons, lg.grad_metric]
            } else {
                vec![lg.grad_w_cons, lg.grad_w_recons, lg.grad_metric]
            };
            adam.step(&mut params, &grads)?;
        }
    }
    write_back(&mut model, &params);
    loss_trace.push(align_loss(&model, batch, anchors, class_attr)?.total);

    Ok(TrainedAlignModel { model, loss_trace })
}

/// Project features into anchor space: X W_cons.
pub fn embed(model: &AlignModel, x: &Mat) -> Result<Mat> {
    if x.cols() != model.feature_dim() {
        return Err(x.dim_mismatch("embed", &model.w_cons));
    }
    x.matmul(&model.w_cons)
}

/// How class scores are computed from embeddings and class anchors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreKind {
    /// Raw inner product (the default bilinear score).
    #[default]
    Dot,
    /// Cosine similarity; zero-norm rows score 0.
    Cosine,
}

/// Per-row argmax of the embedding/anchor score over `label_set`. Ties break
/// toward the smallest class id.
pub fn classify(
    model: &AlignModel,
    x: &Mat,
    anchors: &AnchorSet,
    label_set: &[usize],
    score: ScoreKind,
) -> Result<Vec<usize>> {
    if label_set.is_empty() {
        return Err(Error::EmptyLabelSet);
    }
    let mut candidates: Vec<usize> = label_set.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    if let Some(&bad) = candidates.iter().find(|&&c| c >= anchors.num_classes()) {
        return Err(Error::InvalidArgument(format!(
            "label set contains class {bad}, but anchors cover {} classes",
            anchors.num_classes()
        )));
    }

    let embedded = embed(model, x)?;
    let u_c = anchors.class_anchors();
    let dim = embedded.cols();
    let mut predictions = Vec::with_capacity(x.rows());

    for i in 0..embedded.rows() {
        let row = embedded.row(i);
        let row_norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut best_class = candidates[0];
        let mut best_score = f64::NEG_INFINITY;
        for &c in &candidates {
            let anchor = u_c.row(c);
            let mut s: f64 = (0..dim).map(|j| row[j] * anchor[j]).sum();
            if score == ScoreKind::Cosine {
                let a_norm = anchor.iter().map(|v| v * v).sum::<f64>().sqrt();
                s = if row_norm > 0.0 && a_norm > 0.0 {
                    s / (row_norm * a_norm)
                } else {
                    0.0
                };
            }
            if s > best_score {
                best_score = s;
                best_class = c;
            }
        }
        predictions.push(best_class);
    }
    Ok(predictions)
}
