//! Dense linear algebra, deterministic RNG, the Adam optimizer, and the
//! finite-difference gradient checker shared by the training modules.

mod adam;
mod gradcheck;
pub mod linalg;
mod mat;
mod rng;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::grad_check;
pub use mat::Mat;
pub use rng::Rng;

/// Glorot/Xavier uniform initialization: entries in +-sqrt(6/(rows+cols)).
pub fn glorot_init(rng: &mut Rng, rows: usize, cols: usize) -> Mat {
    assert!(rows >= 1 && cols >= 1, "glorot_init needs positive dims");
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.uniform(-bound, bound)).collect();
    Mat::from_vec(rows, cols, data).expect("uniform samples are finite")
}
