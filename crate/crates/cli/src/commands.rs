//! Subcommand implementations. Each command resolves its configuration,
//! echoes it, runs, and writes `config.resolved` next to its outputs so the
//! run can be reproduced exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anchorzsl::align::{train_align, AlignConfig, ScoreKind, TrainedAlignModel};
use anchorzsl::anchors::{
    extract_anchors, pca_anchors, train_anchor_model, AnchorConfig, AnchorSet,
};
use anchorzsl::eval::{evaluate_conventional, evaluate_generalized, EvalReport};
use anchorzsl::graph::{build_graph, BipartiteGraph};
use anchorzsl::io::{
    load_align_model, load_anchor_set, load_dataset_opts, save_align_model, save_anchor_model,
    save_anchor_set, save_dataset, save_matrix, synth_dataset, Dataset, SynthConfig,
};
use anchorzsl::numerics::{AdamConfig, Rng};
use anchorzsl::{Error, Result};

use crate::config::RunConfig;

// Stage tags for deriving independent RNG streams from the run seed (the
// synthetic generator derives its own internally).
const STREAM_ANCHORS: u64 = 1;
const STREAM_ALIGN: u64 = 2;

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(format!("creating {}", out.display()), e))
}

fn write_out(path: &Path, content: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Print the resolved configuration and persist it for reproduction.
fn echo_config(cfg: &RunConfig, out: &Path) -> Result<()> {
    let rendered = cfg.render();
    println!("# resolved configuration");
    print!("{rendered}");
    write_out(&out.join("config.resolved"), rendered)
}

fn load_dataset_for(cfg: &RunConfig, dir: &Path) -> Result<Dataset> {
    let (dataset, dropped) = load_dataset_opts(dir, cfg.drop_empty_attributes)?;
    if !dropped.is_empty() {
        eprintln!(
            "warning: dropped {} all-zero attribute column(s): {:?}",
            dropped.len(),
            dropped
        );
    }
    Ok(dataset)
}

fn synth_config(cfg: &RunConfig) -> SynthConfig {
    SynthConfig {
        num_classes: cfg.synth_classes,
        num_attrs: cfg.synth_attrs,
        samples_per_class: cfg.synth_samples_per_class,
        noise: cfg.synth_noise,
        density: cfg.synth_density,
        feature_dim: cfg.synth_feature_dim,
        seed: cfg.seed,
    }
}

pub fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    echo_config(cfg, out)?;
    let dataset = synth_dataset(&synth_config(cfg))?;
    save_dataset(out, &dataset)?;
    println!(
        "wrote dataset: {} samples, {} classes ({} unseen), {} attributes -> {}",
        dataset.num_samples(),
        dataset.num_classes(),
        dataset.split.unseen().len(),
        dataset.num_attrs(),
        out.display()
    );
    Ok(())
}

fn anchor_config(cfg: &RunConfig, dim: usize) -> AnchorConfig {
    AnchorConfig {
        dim,
        alpha: cfg.alpha,
        p: cfg.p,
        epochs: cfg.anchor_epochs,
        adam: AdamConfig::with_learning_rate(cfg.anchor_lr),
        act_hidden: cfg.hidden_activation,
        act_output: cfg.output_activation,
    }
}

/// Anchors plus, when trained, the model and its loss trace.
type ProducedAnchors = (AnchorSet, Option<(anchorzsl::anchors::AnchorModel, Vec<f64>)>);

/// Anchor production shared by `anchors` and `sweep-alpha`: trained model or
/// the PCA baseline, plus the optional row normalization.
fn produce_anchors(cfg: &RunConfig, g: &BipartiteGraph, dim: usize) -> Result<ProducedAnchors> {
    if cfg.pca_anchors {
        let anchors = pca_anchors(g, dim)?;
        Ok((anchors, None))
    } else {
        let trained = train_anchor_model(g, &anchor_config(cfg, dim), &mut Rng::with_stream(cfg.seed, STREAM_ANCHORS))?;
        let anchors = extract_anchors(&trained.model, g)?;
        Ok((anchors, Some((trained.model, trained.loss_trace))))
    }
}

fn maybe_normalize(cfg: &RunConfig, anchors: AnchorSet) -> AnchorSet {
    if cfg.normalize_anchors {
        anchors.normalize_rows()
    } else {
        anchors
    }
}

fn render_trace(trace: &[f64]) -> String {
    let mut out = String::new();
    for v in trace {
        writeln!(out, "{v:.17e}").expect("string write");
    }
    out
}

pub fn cmd_anchors(dataset_dir: &Path, cfg: &RunConfig, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    echo_config(cfg, out)?;
    let dataset = load_dataset_for(cfg, dataset_dir)?;
    let g = build_graph(&dataset.class_attr)?;
    let dim = cfg.resolve_anchor_dim()?;

    let (anchors, trained) = produce_anchors(cfg, &g, dim)?;
    let anchors = maybe_normalize(cfg, anchors);
    save_anchor_set(&out.join("anchors.ckpt"), &anchors)?;
    match trained {
        Some((model, trace)) => {
            save_anchor_model(&out.join("anchor_model.ckpt"), &model)?;
            write_out(&out.join("anchor_trace.txt"), render_trace(&trace))?;
            println!(
                "trained anchor model: dim {dim}, {} epochs, loss {:.6e} -> {:.6e}",
                cfg.anchor_epochs,
                trace.first().unwrap(),
                trace.last().unwrap()
            );
        }
        None => println!("computed PCA anchors: dim {dim} (no training)"),
    }
    println!("wrote anchors for {} classes + {} attributes", anchors.num_classes(), anchors.num_attrs());
    Ok(())
}

fn align_config(cfg: &RunConfig) -> AlignConfig {
    AlignConfig {
        epochs: cfg.align_epochs,
        batch_size: cfg.batch_size,
        adam: AdamConfig::with_learning_rate(cfg.align_lr),
        lambda1: cfg.lambda1,
        lambda2: if cfg.no_reg { 0.0 } else { cfg.lambda2 },
        reg_enabled: !cfg.no_reg,
        tied_weights: cfg.tied_weights,
        per_sample: !cfg.raw_loss,
    }
}

fn train_alignment(cfg: &RunConfig, dataset: &Dataset, anchors: &AnchorSet) -> Result<TrainedAlignModel> {
    if anchors.num_classes() != dataset.num_classes() || anchors.num_attrs() != dataset.num_attrs() {
        return Err(Error::InvalidArgument(format!(
            "anchors cover {} classes / {} attributes but the dataset has {} / {}",
            anchors.num_classes(),
            anchors.num_attrs(),
            dataset.num_classes(),
            dataset.num_attrs()
        )));
    }
    if let Some(dim) = cfg.anchor_dim {
        if dim != anchors.dim() {
            return Err(Error::InvalidConfig(format!(
                "anchor_dim {dim} but the checkpoint has dimension {}",
                anchors.dim()
            )));
        }
    }
    let batch = dataset.seen_batch()?;
    // Training must never see unseen classes.
    if let Some(&bad) = batch.labels().iter().find(|&&l| !dataset.split.is_seen(l)) {
        return Err(Error::Protocol(format!(
            "unseen-class sample (class {bad}) in the training batch"
        )));
    }
    train_align(
        &batch,
        anchors,
        &dataset.class_attr,
        &align_config(cfg),
        &mut Rng::with_stream(cfg.seed, STREAM_ALIGN),
    )
}

pub fn cmd_align(dataset_dir: &Path, anchors_path: &Path, cfg: &RunConfig, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    echo_config(cfg, out)?;
    let dataset = load_dataset_for(cfg, dataset_dir)?;
    let anchors = load_anchor_set(anchors_path)?;
    let trained = train_alignment(cfg, &dataset, &anchors)?;
    save_align_model(&out.join("align_model.ckpt"), &trained.model)?;
    write_out(&out.join("align_trace.txt"), render_trace(&trained.loss_trace))?;
    println!(
        "trained alignment: {} epochs, loss {:.6e} -> {:.6e}",
        cfg.align_epochs,
        trained.loss_trace.first().unwrap(),
        trained.loss_trace.last().unwrap()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Conventional,
    Generalized,
}

fn run_eval(
    cfg: &RunConfig,
    dataset: &Dataset,
    anchors: &AnchorSet,
    model: &anchorzsl::align::AlignModel,
    mode: EvalMode,
) -> Result<EvalReport> {
    let score = if cfg.cosine_scores {
        ScoreKind::Cosine
    } else {
        ScoreKind::Dot
    };
    match mode {
        EvalMode::Conventional => {
            let test = dataset.unseen_batch()?;
            evaluate_conventional(model, anchors, &test, &dataset.split, score)
        }
        EvalMode::Generalized => {
            let seen_test = dataset.seen_batch()?;
            let unseen_test = dataset.unseen_batch()?;
            evaluate_generalized(model, anchors, &seen_test, &unseen_test, &dataset.split, score)
        }
    }
}

pub fn cmd_eval(
    dataset_dir: &Path,
    anchors_path: &Path,
    model_path: &Path,
    mode: EvalMode,
    cfg: &RunConfig,
    out: &Path,
) -> Result<()> {
    ensure_out_dir(out)?;
    echo_config(cfg, out)?;
    let dataset = load_dataset_for(cfg, dataset_dir)?;
    let anchors = load_anchor_set(anchors_path)?;
    let model = load_align_model(model_path)?;
    let report = run_eval(cfg, &dataset, &anchors, &model, mode)?;
    write_out(&out.join("report.txt"), report.to_kv_text())?;
    write_out(&out.join("report.csv"), report.to_table())?;
    print!("{}", report.to_kv_text());
    Ok(())
}

/// Full pipeline at one alpha; shared seeds so rows differ only in alpha.
/// With repeats > 1 the run is repeated at seeds seed, seed+1, ... and the
/// mean MCA is returned.
fn pipeline_mca(cfg: &RunConfig, dataset: &Dataset, alpha: f64) -> Result<f64> {
    if cfg.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".to_string()));
    }
    let mut total = 0.0;
    for repeat in 0..cfg.repeats {
        let mut run_cfg = cfg.clone();
        run_cfg.alpha = alpha;
        run_cfg.seed = cfg.seed + repeat as u64;
        let g = build_graph(&dataset.class_attr)?;
        let dim = run_cfg.resolve_anchor_dim()?;
        let (anchors, _) = produce_anchors(&run_cfg, &g, dim)?;
        let anchors = maybe_normalize(&run_cfg, anchors);
        let trained = train_alignment(&run_cfg, dataset, &anchors)?;
        let report = run_eval(&run_cfg, dataset, &anchors, &trained.model, EvalMode::Conventional)?;
        total += report.mca;
    }
    Ok(total / cfg.repeats as f64)
}

pub fn cmd_sweep_alpha(dataset_dir: &Path, alphas: &[f64], cfg: &RunConfig, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    echo_config(cfg, out)?;
    for &alpha in alphas {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Domain {
                param: "alpha",
                value: alpha,
                expected: "[0, 1)",
            });
        }
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("alphas are finite"));
    sorted.dedup();

    let dataset = load_dataset_for(cfg, dataset_dir)?;
    let mut table = String::from("alpha,mca,status\n");
    for &alpha in &sorted {
        match pipeline_mca(cfg, &dataset, alpha) {
            Ok(mca) => {
                writeln!(table, "{alpha:.17e},{mca:.17e},ok").expect("string write");
                println!("alpha {alpha}: MCA {mca:.4}");
            }
            Err(e) => {
                let msg = e.to_string().replace(',', ";");
                writeln!(table, "{alpha:.17e},,error: {msg}").expect("string write");
                eprintln!("alpha {alpha}: failed: {e}");
            }
        }
    }
    write_out(&out.join("sweep.csv"), table)?;
    println!("wrote {}", out.join("sweep.csv").display());
    Ok(())
}

pub fn cmd_export_anchors(anchors_path: &Path, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let anchors = load_anchor_set(anchors_path)?;
    save_matrix(&out.join("anchors.txt"), anchors.matrix())?;

    let mut sidecar = String::from("row,kind,index\n");
    for c in 0..anchors.num_classes() {
        writeln!(sidecar, "{c},class,{c}").expect("string write");
    }
    for t in 0..anchors.num_attrs() {
        writeln!(sidecar, "{},attribute,{t}", anchors.num_classes() + t).expect("string write");
    }
    write_out(&out.join("anchors_nodes.txt"), sidecar)?;
    println!(
        "exported {} anchor rows ({} classes + {} attributes)",
        anchors.matrix().rows(),
        anchors.num_classes(),
        anchors.num_attrs()
    );
    Ok(())
}
