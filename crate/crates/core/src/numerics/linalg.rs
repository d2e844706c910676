//! Small dense solvers: LU with partial pivoting and a cyclic Jacobi
//! eigensolver for symmetric matrices. Both are deterministic.

use crate::error::{Error, Result};
use crate::numerics::Mat;

/// Solve A X = B by LU decomposition with partial pivoting. No explicit
/// inverse is formed.
pub fn solve(a: &Mat, b: &Mat) -> Result<Mat> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidArgument(format!(
            "solve: coefficient matrix must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() != b.rows() {
        return Err(a.dim_mismatch("solve", b));
    }
    let n = a.rows();
    let ncols = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();

    for col in 0..n {
        // Pivot: largest magnitude in column at or below the diagonal.
        let mut pivot_row = col;
        let mut pivot_val = lu.get(col, col).abs();
        for r in (col + 1)..n {
            let v = lu.get(r, col).abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val < 1e-300 {
            return Err(Error::SolverFailure {
                context: format!("singular pivot at column {col}"),
            });
        }
        if pivot_row != col {
            swap_rows(&mut lu, col, pivot_row);
            swap_rows(&mut x, col, pivot_row);
        }
        let pivot = lu.get(col, col);
        for r in (col + 1)..n {
            let factor = lu.get(r, col) / pivot;
            if factor == 0.0 {
                continue;
            }
            lu.set(r, col, 0.0);
            for c in (col + 1)..n {
                let v = lu.get(r, c) - factor * lu.get(col, c);
                lu.set(r, c, v);
            }
            for c in 0..ncols {
                let v = x.get(r, c) - factor * x.get(col, c);
                x.set(r, c, v);
            }
        }
    }

    // Back substitution.
    for col in (0..n).rev() {
        let diag = lu.get(col, col);
        for c in 0..ncols {
            let mut acc = x.get(col, c);
            for k in (col + 1)..n {
                acc -= lu.get(col, k) * x.get(k, c);
            }
            x.set(col, c, acc / diag);
        }
    }
    x.ensure_finite("solve")?;
    Ok(x)
}

fn swap_rows(m: &mut Mat, a: usize, b: usize) {
    if a == b {
        return;
    }
    let cols = m.cols();
    let data = m.data_mut();
    for j in 0..cols {
        data.swap(a * cols + j, b * cols + j);
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// columns. Ties keep the original sweep order, so the output is
/// deterministic.
pub fn sym_eig(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::InvalidArgument(format!(
            "sym_eig: matrix must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let scale = a.max_abs().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (a.get(i, j) - a.get(j, i)).abs() > 1e-9 * scale {
                return Err(Error::InvalidArgument(format!(
                    "sym_eig: matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }

    let mut b = a.clone();
    let mut v = Mat::identity(n);
    let tol = 1e-14 * scale;
    let max_sweeps = 100;

    for _ in 0..max_sweeps {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(b.get(i, j).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = b.get(p, q);
                if apq.abs() <= tol {
                    continue;
                }
                let theta = (b.get(q, q) - b.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let bkp = b.get(k, p);
                    let bkq = b.get(k, q);
                    b.set(k, p, c * bkp - s * bkq);
                    b.set(k, q, s * bkp + c * bkq);
                }
                for k in 0..n {
                    let bpk = b.get(p, k);
                    let bqk = b.get(q, k);
                    b.set(p, k, c * bpk - s * bqk);
                    b.set(q, k, s * bpk + c * bqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        b.get(j, j)
            .partial_cmp(&b.get(i, i))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| b.get(i, i)).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok((values, vectors))
}
