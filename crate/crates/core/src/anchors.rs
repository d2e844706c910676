//! Anchor generation: a two-layer auto-encoder whose forward propagation is
//! the truncated diffusion convolution, plus a PCA baseline used for
//! ablations.
//!
//! The encoder maps node features (the adjacency rows) to a hidden layer of
//! width `d`; those hidden activations, one row per class/attribute node, are
//! the anchors. Gradients are hand-derived; the diffusion operator is
//! symmetric, so the backward pass reuses [`truncated_diffusion`].

use crate::error::{Error, Result};
use crate::graph::{truncated_diffusion, BipartiteGraph};
use crate::numerics::{glorot_init, linalg, AdamConfig, AdamState, Mat, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }

    pub fn parse(name: &str) -> Result<Activation> {
        match name {
            "linear" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::InvalidConfig(format!(
                "unknown activation {other:?} (expected linear, tanh or relu)"
            ))),
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Activation::Linear => 0,
            Activation::Tanh => 1,
            Activation::Relu => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Activation> {
        match id {
            0 => Ok(Activation::Linear),
            1 => Ok(Activation::Tanh),
            2 => Ok(Activation::Relu),
            other => Err(Error::InvalidConfig(format!("unknown activation id {other}"))),
        }
    }
}

/// Encoder/decoder weights plus the diffusion settings they were trained
/// with.
#[derive(Debug, Clone)]
pub struct AnchorModel {
    pub w_encode: Mat,
    pub w_decode: Mat,
    pub alpha: f64,
    pub p: usize,
    pub act_hidden: Activation,
    pub act_output: Activation,
}

impl AnchorModel {
    /// Hidden width d.
    pub fn dim(&self) -> usize {
        self.w_encode.cols()
    }
}

/// The extracted anchors: one row per node, classes first.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    u: Mat,
    num_classes: usize,
    num_attrs: usize,
}

impl AnchorSet {
    pub fn new(u: Mat, num_classes: usize, num_attrs: usize) -> Result<AnchorSet> {
        if u.rows() != num_classes + num_attrs {
            return Err(Error::InvalidArgument(format!(
                "anchor matrix has {} rows, expected {} classes + {} attributes",
                u.rows(),
                num_classes,
                num_attrs
            )));
        }
        u.ensure_finite("anchor set")?;
        Ok(AnchorSet {
            u,
            num_classes,
            num_attrs,
        })
    }

    pub fn matrix(&self) -> &Mat {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_attrs(&self) -> usize {
        self.num_attrs
    }

    /// U_C: the first `num_classes` rows.
    pub fn class_anchors(&self) -> Mat {
        let idx: Vec<usize> = (0..self.num_classes).collect();
        self.u.select_rows(&idx)
    }

    /// U_T: the last `num_attrs` rows.
    pub fn attr_anchors(&self) -> Mat {
        let idx: Vec<usize> = (self.num_classes..self.num_classes + self.num_attrs).collect();
        self.u.select_rows(&idx)
    }

    /// Copy with every row scaled to unit L2 norm (zero rows left alone).
    pub fn normalize_rows(&self) -> AnchorSet {
        let mut u = self.u.clone();
        let cols = u.cols();
        for i in 0..u.rows() {
            let norm = u.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                let data = u.data_mut();
                for j in 0..cols {
                    data[i * cols + j] /= norm;
                }
            }
        }
        AnchorSet {
            u,
            num_classes: self.num_classes,
            num_attrs: self.num_attrs,
        }
    }
}

struct ForwardTrace {
    diffused_input: Mat,
    pre_hidden: Mat,
    hidden: Mat,
    diffused_hidden: Mat,
    pre_output: Mat,
    reconstruction: Mat,
}

fn forward_trace(model: &AnchorModel, g: &BipartiteGraph, features: &Mat) -> Result<ForwardTrace> {
    if features.rows() != g.num_nodes() || features.cols() != model.w_encode.rows() {
        return Err(features.dim_mismatch("anchor forward", &model.w_encode));
    }
    let diffused_input = truncated_diffusion(g, model.alpha, model.p, features)?;
    let pre_hidden = diffused_input.matmul(&model.w_encode)?;
    let hidden = pre_hidden.map(|z| model.act_hidden.apply(z))?;
    let diffused_hidden = truncated_diffusion(g, model.alpha, model.p, &hidden)?;
    let pre_output = diffused_hidden.matmul(&model.w_decode)?;
    let reconstruction = pre_output.map(|z| model.act_output.apply(z))?;
    Ok(ForwardTrace {
        diffused_input,
        pre_hidden,
        hidden,
        diffused_hidden,
        pre_output,
        reconstruction,
    })
}

/// Forward pass: returns (hidden activations, reconstruction).
pub fn forward(model: &AnchorModel, g: &BipartiteGraph, features: &Mat) -> Result<(Mat, Mat)> {
    let t = forward_trace(model, g, features)?;
    Ok((t.hidden, t.reconstruction))
}

/// Loss value and gradients of the mean squared reconstruction error
/// ||reconstruction - F||_F^2 / (d_C + d_T).
pub struct AnchorLoss {
    pub loss: f64,
    pub grad_encode: Mat,
    pub grad_decode: Mat,
}

pub fn anchor_loss(model: &AnchorModel, g: &BipartiteGraph, features: &Mat) -> Result<AnchorLoss> {
    let t = forward_trace(model, g, features)?;
    let n = g.num_nodes() as f64;
    let residual = t.reconstruction.sub(features)?;
    let loss = residual.frob_norm_sq() / n;

    let d_recon = residual.scale(2.0 / n)?;
    let d_pre_output = d_recon.hadamard(&t.pre_output.map(|z| model.act_output.derivative(z))?)?;
    let grad_decode = t.diffused_hidden.transpose().matmul(&d_pre_output)?;

    // The diffusion operator is symmetric, so its adjoint is itself.
    let d_hidden = truncated_diffusion(g, model.alpha, model.p, &d_pre_output)?
        .matmul(&model.w_decode.transpose())?;
    let d_pre_hidden = d_hidden.hadamard(&t.pre_hidden.map(|z| model.act_hidden.derivative(z))?)?;
    let grad_encode = t.diffused_input.transpose().matmul(&d_pre_hidden)?;

    Ok(AnchorLoss {
        loss,
        grad_encode,
        grad_decode,
    })
}

/// Settings for [`train_anchor_model`].
#[derive(Debug, Clone)]
pub struct AnchorConfig {
    pub dim: usize,
    pub alpha: f64,
    pub p: usize,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub act_hidden: Activation,
    pub act_output: Activation,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        AnchorConfig {
            dim: 32,
            alpha: 0.8,
            p: 2,
            epochs: 1000,
            adam: AdamConfig::default(),
            act_hidden: Activation::Tanh,
            act_output: Activation::Linear,
        }
    }
}

pub struct TrainedAnchorModel {
    pub model: AnchorModel,
    /// Loss before each step plus the final loss; length epochs + 1.
    pub loss_trace: Vec<f64>,
}

/// Full-batch Adam on the reconstruction loss; one epoch is one step since
/// the graph is a single sample. Deterministic for a fixed seed.
pub fn train_anchor_model(
    g: &BipartiteGraph,
    cfg: &AnchorConfig,
    rng: &mut Rng,
) -> Result<TrainedAnchorModel> {
    let n = g.num_nodes();
    if cfg.dim == 0 || cfg.dim >= n {
        return Err(Error::InvalidConfig(format!(
            "anchor dim must satisfy 1 <= d < {n}, got {}",
            cfg.dim
        )));
    }
    if cfg.epochs == 0 {
        return Err(Error::InvalidConfig("anchor epochs must be >= 1".to_string()));
    }

    let mut model = AnchorModel {
        w_encode: glorot_init(rng, n, cfg.dim),
        w_decode: glorot_init(rng, cfg.dim, n),
        alpha: cfg.alpha,
        p: cfg.p,
        act_hidden: cfg.act_hidden,
        act_output: cfg.act_output,
    };
    let features = g.node_features().clone();

    let mut params = vec![model.w_encode.clone(), model.w_decode.clone()];
    let mut adam = AdamState::new(cfg.adam, &params);
    let mut loss_trace = Vec::with_capacity(cfg.epochs + 1);

    for _ in 0..cfg.epochs {
        model.w_encode = params[0].clone();
        model.w_decode = params[1].clone();
        let lg = anchor_loss(&model, g, &features)?;
        loss_trace.push(lg.loss);
        adam.step(&mut params, &[lg.grad_encode, lg.grad_decode])?;
    }
    model.w_encode = params[0].clone();
    model.w_decode = params[1].clone();
    loss_trace.push(anchor_loss(&model, g, &features)?.loss);

    Ok(TrainedAnchorModel { model, loss_trace })
}

/// Anchors are the hidden activations of the forward pass on the node
/// features.
pub fn extract_anchors(model: &AnchorModel, g: &BipartiteGraph) -> Result<AnchorSet> {
    let (hidden, _) = forward(model, g, g.node_features())?;
    AnchorSet::new(hidden, g.num_classes(), g.num_attrs())
}

/// PCA baseline: project the node features onto their top-d principal
/// components instead of training the auto-encoder.
pub fn pca_anchors(g: &BipartiteGraph, dim: usize) -> Result<AnchorSet> {
    let scores = pca_scores(g.node_features(), dim)?;
    AnchorSet::new(scores, g.num_classes(), g.num_attrs())
}

/// Mean-centered PCA scores with a fixed sign convention: the
/// largest-magnitude entry of each component is positive (first index wins
/// ties), which makes the result deterministic.
fn pca_scores(data: &Mat, dim: usize) -> Result<Mat> {
    let n = data.rows();
    let d_feat = data.cols();
    if dim == 0 || dim > d_feat.min(n) {
        return Err(Error::InvalidArgument(format!(
            "pca dimension {dim} out of range for {n}x{d_feat} data"
        )));
    }

    let mut means = vec![0.0; d_feat];
    for i in 0..n {
        for (j, m) in means.iter_mut().enumerate() {
            *m += data.get(i, j);
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut centered = data.clone();
    for i in 0..n {
        for j in 0..d_feat {
            centered.set(i, j, data.get(i, j) - means[j]);
        }
    }

    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let cov = centered.transpose().matmul(&centered)?.scale(1.0 / denom)?;
    let (_, vectors) = linalg::sym_eig(&cov)?;

    let mut components = Mat::zeros(d_feat, dim);
    for c in 0..dim {
        let mut best = 0usize;
        for r in 1..d_feat {
            if vectors.get(r, c).abs() > vectors.get(best, c).abs() {
                best = r;
            }
        }
        let sign = if vectors.get(best, c) < 0.0 { -1.0 } else { 1.0 };
        for r in 0..d_feat {
            components.set(r, c, sign * vectors.get(r, c));
        }
    }
    centered.matmul(&components)
}
