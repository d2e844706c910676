//! Adam optimizer over a list of parameter matrices.

use crate::error::{Error, Result};
use crate::numerics::Mat;

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(lr: f64) -> Self {
        AdamConfig {
            learning_rate: lr,
            ..Default::default()
        }
    }
}

/// Per-parameter first/second moment estimates plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    first_moment: Vec<Mat>,
    second_moment: Vec<Mat>,
    step_count: u64,
}

impl AdamState {
    /// Moments start at zero with the shapes of `params`.
    pub fn new(cfg: AdamConfig, params: &[Mat]) -> AdamState {
        AdamState {
            cfg,
            first_moment: params.iter().map(|p| Mat::zeros(p.rows(), p.cols())).collect(),
            second_moment: params.iter().map(|p| Mat::zeros(p.rows(), p.cols())).collect(),
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected Adam update, in place.
    pub fn step(&mut self, params: &mut [Mat], grads: &[Mat]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::InvalidArgument(format!(
                "adam_step: {} params, {} grads, optimizer tracks {}",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() {
                return Err(p.dim_mismatch("adam_step", g));
            }
            if !g.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("adam_step: gradient for parameter {i}"),
                });
            }
            debug_assert_eq!(self.first_moment[i].shape(), p.shape());
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.cfg;
        let bias1 = 1.0 - beta1.powi(t);
        let bias2 = 1.0 - beta2.powi(t);

        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = self.first_moment[i].data_mut();
            let v = self.second_moment[i].data_mut();
            let pd = p.data_mut();
            for ((pv, &gv), (mv, vv)) in pd.iter_mut().zip(g.data()).zip(m.iter_mut().zip(v.iter_mut())) {
                *mv = beta1 * *mv + (1.0 - beta1) * gv;
                *vv = beta2 * *vv + (1.0 - beta2) * gv * gv;
                let m_hat = *mv / bias1;
                let v_hat = *vv / bias2;
                *pv -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
            p.ensure_finite("adam_step: updated parameter")?;
        }
        Ok(())
    }
}
