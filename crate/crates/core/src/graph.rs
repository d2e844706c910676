//! Class-attribute bipartite graph and the diffusion operators on it.
//!
//! Nodes are ordered classes first (0..d_C) then attributes (d_C..d_C+d_T).
//! The weighted adjacency has the class-attribute matrix in its off-diagonal
//! blocks and zero diagonal blocks; `S = D^{-1/2} A D^{-1/2}` is the
//! propagation operator used everywhere downstream.

use crate::error::{Error, NodeKind, Result};
use crate::numerics::{linalg, Mat};

#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    num_classes: usize,
    num_attrs: usize,
    class_attr: Mat,
    adjacency: Mat,
    degrees: Vec<f64>,
    norm_adjacency: Mat,
}

impl BipartiteGraph {
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_attrs(&self) -> usize {
        self.num_attrs
    }

    /// Total node count d_C + d_T.
    pub fn num_nodes(&self) -> usize {
        self.num_classes + self.num_attrs
    }

    pub fn class_attr(&self) -> &Mat {
        &self.class_attr
    }

    /// Weighted adjacency A; also the node feature matrix F.
    pub fn adjacency(&self) -> &Mat {
        &self.adjacency
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Normalized adjacency S = D^{-1/2} A D^{-1/2}.
    pub fn norm_adjacency(&self) -> &Mat {
        &self.norm_adjacency
    }

    /// Node features default to the adjacency itself.
    pub fn node_features(&self) -> &Mat {
        &self.adjacency
    }
}

/// Assemble the bipartite graph from a nonnegative class-attribute matrix.
///
/// Every row and column must have at least one positive entry; an isolated
/// node has no defined normalization and is rejected rather than patched.
pub fn build_graph(class_attr: &Mat) -> Result<BipartiteGraph> {
    let d_c = class_attr.rows();
    let d_t = class_attr.cols();
    if d_c == 0 || d_t == 0 {
        return Err(Error::InvalidArgument(
            "class-attribute matrix must be non-empty".to_string(),
        ));
    }
    for i in 0..d_c {
        for j in 0..d_t {
            let v = class_attr.get(i, j);
            if v < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j, value: v });
            }
        }
    }
    for i in 0..d_c {
        if class_attr.row(i).iter().all(|&v| v == 0.0) {
            return Err(Error::IsolatedNode {
                kind: NodeKind::Class,
                index: i,
            });
        }
    }
    for j in 0..d_t {
        if (0..d_c).all(|i| class_attr.get(i, j) == 0.0) {
            return Err(Error::IsolatedNode {
                kind: NodeKind::Attribute,
                index: j,
            });
        }
    }

    let n = d_c + d_t;
    let mut adjacency = Mat::zeros(n, n);
    for i in 0..d_c {
        for j in 0..d_t {
            let v = class_attr.get(i, j);
            adjacency.set(i, d_c + j, v);
            adjacency.set(d_c + j, i, v);
        }
    }

    let degrees: Vec<f64> = (0..n).map(|i| adjacency.row(i).iter().sum()).collect();
    let inv_sqrt: Vec<f64> = degrees.iter().map(|&d| 1.0 / d.sqrt()).collect();
    let mut norm_adjacency = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = adjacency.get(i, j);
            if v != 0.0 {
                norm_adjacency.set(i, j, inv_sqrt[i] * v * inv_sqrt[j]);
            }
        }
    }
    norm_adjacency.ensure_finite("build_graph: normalized adjacency")?;

    Ok(BipartiteGraph {
        num_classes: d_c,
        num_attrs: d_t,
        class_attr: class_attr.clone(),
        adjacency,
        degrees,
        norm_adjacency,
    })
}

fn check_alpha(alpha: f64, expected: &'static str, allow_zero: bool) -> Result<()> {
    let ok = alpha.is_finite() && alpha < 1.0 && (alpha > 0.0 || (allow_zero && alpha == 0.0));
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            param: "alpha",
            value: alpha,
            expected,
        })
    }
}

/// Truncated diffusion: sum_{k=0..p} (alpha S)^k X, evaluated Horner style
/// (R <- X + alpha S R, p times). No powers of S are materialized.
pub fn truncated_diffusion(g: &BipartiteGraph, alpha: f64, p: usize, x: &Mat) -> Result<Mat> {
    check_alpha(alpha, "[0, 1)", true)?;
    if x.rows() != g.num_nodes() {
        return Err(g.norm_adjacency.dim_mismatch("truncated_diffusion", x));
    }
    let mut result = x.clone();
    for _ in 0..p {
        result = x.add(&g.norm_adjacency.matmul(&result)?.scale(alpha)?)?;
    }
    Ok(result)
}

/// Closed-form diffusion H* = (1-alpha)(I - alpha S)^{-1} F via a direct
/// linear solve. Unique minimizer of [`diffusion_objective`] at
/// mu = (1-alpha)/alpha.
pub fn closed_form_diffusion(g: &BipartiteGraph, alpha: f64, f: &Mat) -> Result<Mat> {
    check_alpha(alpha, "(0, 1)", false)?;
    if f.rows() != g.num_nodes() {
        return Err(g.norm_adjacency.dim_mismatch("closed_form_diffusion", f));
    }
    let n = g.num_nodes();
    let system = Mat::identity(n).sub(&g.norm_adjacency.scale(alpha)?)?;
    let rhs = f.scale(1.0 - alpha)?;
    linalg::solve(&system, &rhs)
}

/// Diffusion objective: graph smoothness plus a fit term,
/// sum_{i,j} (A_ij / 2) ||H_i/sqrt(d_i) - H_j/sqrt(d_j)||^2 + mu sum_i ||H_i - F_i||^2.
pub fn diffusion_objective(g: &BipartiteGraph, mu: f64, h: &Mat, f: &Mat) -> Result<f64> {
    check_objective_shapes(g, h, f)?;
    let n = g.num_nodes();
    let dim = h.cols();
    let inv_sqrt: Vec<f64> = g.degrees.iter().map(|&d| 1.0 / d.sqrt()).collect();

    let mut smooth = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = g.adjacency.get(i, j);
            if w == 0.0 {
                continue;
            }
            let mut diff_sq = 0.0;
            for c in 0..dim {
                let d = h.get(i, c) * inv_sqrt[i] - h.get(j, c) * inv_sqrt[j];
                diff_sq += d * d;
            }
            smooth += 0.5 * w * diff_sq;
        }
    }
    let fit = h.sub(f)?.frob_norm_sq();
    Ok(smooth + mu * fit)
}

/// Same objective via the trace identity tr(H^T (I - S) H) + mu ||H - F||_F^2.
/// Kept as an independent route for cross-checking.
pub fn diffusion_objective_trace(g: &BipartiteGraph, mu: f64, h: &Mat, f: &Mat) -> Result<f64> {
    check_objective_shapes(g, h, f)?;
    let sh = g.norm_adjacency.matmul(h)?;
    let laplacian_term = h.frob_norm_sq() - dot(h, &sh);
    Ok(laplacian_term + mu * h.sub(f)?.frob_norm_sq())
}

/// Gradient of the diffusion objective: 2 (I - S) H + 2 mu (H - F).
pub fn diffusion_objective_grad(g: &BipartiteGraph, mu: f64, h: &Mat, f: &Mat) -> Result<Mat> {
    check_objective_shapes(g, h, f)?;
    let lap_h = h.sub(&g.norm_adjacency.matmul(h)?)?;
    lap_h.scale(2.0)?.add(&h.sub(f)?.scale(2.0 * mu)?)
}

fn check_objective_shapes(g: &BipartiteGraph, h: &Mat, f: &Mat) -> Result<()> {
    if h.shape() != f.shape() {
        return Err(h.dim_mismatch("diffusion_objective", f));
    }
    if h.rows() != g.num_nodes() {
        return Err(g.norm_adjacency.dim_mismatch("diffusion_objective", h));
    }
    Ok(())
}

fn dot(a: &Mat, b: &Mat) -> f64 {
    a.data().iter().zip(b.data()).map(|(&x, &y)| x * y).sum()
}

/// Largest-magnitude eigenvalue estimate of S by power iteration; used in
/// tests to confirm the spectral radius stays at or below one.
pub fn spectral_radius_estimate(g: &BipartiteGraph, iters: usize) -> f64 {
    let n = g.num_nodes();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut estimate = 0.0;
    for _ in 0..iters {
        let mut next = vec![0.0; n];
        for i in 0..n {
            let row = g.norm_adjacency.row(i);
            next[i] = row.iter().zip(&v).map(|(&s, &x)| s * x).sum();
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm;
        for x in &mut next {
            *x /= norm;
        }
        v = next;
    }
    estimate
}
