//! On-disk formats: matrix files, dataset directories, model checkpoints,
//! and the synthetic dataset generator.

mod checkpoint;
mod dataset;
mod matfile;
mod synth;

pub use checkpoint::{
    load_align_model, load_anchor_model, load_anchor_set, save_align_model, save_anchor_model,
    save_anchor_set,
};
pub use dataset::{load_dataset, load_dataset_opts, save_dataset, Dataset};
pub use matfile::{load_matrix, save_matrix};
pub use synth::{synth_dataset, SynthConfig};
