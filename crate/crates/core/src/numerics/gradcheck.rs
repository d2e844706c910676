//! Central finite-difference gradient checker.
//!
//! Test harness for every hand-derived gradient in the training modules. The
//! numeric side perturbs one entry at a time, so it stays independent of the
//! analytic path it validates.

use crate::numerics::Mat;

/// Max over all entries of |analytic - numeric| / max(1, |analytic|, |numeric|).
///
/// `loss_fn` must be pure: same params, same loss.
pub fn grad_check<F>(loss_fn: F, params: &[Mat], analytic_grads: &[Mat], h: f64) -> f64
where
    F: Fn(&[Mat]) -> f64,
{
    assert_eq!(params.len(), analytic_grads.len(), "one gradient per parameter");
    let mut work: Vec<Mat> = params.to_vec();
    let mut max_rel = 0.0_f64;

    for pi in 0..params.len() {
        assert_eq!(params[pi].shape(), analytic_grads[pi].shape());
        for idx in 0..params[pi].data().len() {
            let orig = work[pi].data()[idx];
            work[pi].data_mut()[idx] = orig + h;
            let f_plus = loss_fn(&work);
            work[pi].data_mut()[idx] = orig - h;
            let f_minus = loss_fn(&work);
            work[pi].data_mut()[idx] = orig;

            let numeric = (f_plus - f_minus) / (2.0 * h);
            let analytic = analytic_grads[pi].data()[idx];
            let denom = 1.0_f64.max(analytic.abs()).max(numeric.abs());
            max_rel = max_rel.max((analytic - numeric).abs() / denom);
        }
    }
    max_rel
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn random_mat(rng: &mut Rng, rows: usize, cols: usize) -> Mat {
        let data = (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Mat::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn frobenius_gradient_passes() {
        // loss = ||W||_F^2, grad = 2W
        let mut rng = Rng::new(21);
        let w = random_mat(&mut rng, 4, 3);
        let grad = w.scale(2.0).unwrap();
        let err = grad_check(|p| p[0].frob_norm_sq(), &[w], &[grad], 1e-5);
        assert!(err < 1e-7, "rel err {err}");
    }

    #[test]
    fn constant_loss_zero_gradient_passes() {
        let w = Mat::identity(3);
        let zero = Mat::zeros(3, 3);
        let err = grad_check(|_| 4.2, &[w], &[zero], 1e-5);
        assert!(err < 1e-9, "rel err {err}");
    }

    #[test]
    fn detects_scaled_gradient() {
        // Deliberately wrong gradient (2x the truth) must be flagged.
        let mut rng = Rng::new(22);
        let w = random_mat(&mut rng, 3, 3);
        let wrong = w.scale(4.0).unwrap(); // truth is 2W
        let err = grad_check(|p| p[0].frob_norm_sq(), &[w], &[wrong], 1e-5);
        assert!(err > 0.3, "checker failed to catch wrong gradient: {err}");
    }
}
