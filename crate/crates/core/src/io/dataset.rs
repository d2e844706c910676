//! Dataset directory layout.
//!
//! A dataset is a directory with four required files (indices are 0-based
//! everywhere):
//!
//! * `features.dmat` (or `.txt`) — n x d_X visual features, one row per
//!   sample
//! * `labels.txt` — one class id per line, n lines
//! * `class_attr.dmat` (or `.txt`) — d_C x d_T class-attribute matrix
//! * `split.txt` — two lines: `seen: 0 1 ...` and `unseen: 5 6 ...`
//!
//! Optional: `class_names.txt` / `attr_names.txt`, one name per line.
//! All invariants are enforced at load time; a dataset that loads will also
//! pass graph construction.

use std::fs;
use std::path::{Path, PathBuf};

use crate::align::LabeledBatch;
use crate::error::{Error, Result};
use crate::eval::SplitSpec;
use crate::graph::build_graph;
use crate::io::matfile::{load_matrix, save_matrix};
use crate::numerics::Mat;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Mat,
    pub labels: Vec<usize>,
    pub class_attr: Mat,
    pub split: SplitSpec,
    pub class_names: Option<Vec<String>>,
    pub attr_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn num_classes(&self) -> usize {
        self.class_attr.rows()
    }

    pub fn num_attrs(&self) -> usize {
        self.class_attr.cols()
    }

    pub fn num_samples(&self) -> usize {
        self.labels.len()
    }

    /// Everything consistent: label ranges, row counts, split coverage, and
    /// graph preconditions.
    pub fn validate(&self) -> Result<()> {
        if self.features.rows() != self.labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} labels",
                self.features.rows(),
                self.labels.len()
            )));
        }
        let d_c = self.num_classes();
        for (index, &label) in self.labels.iter().enumerate() {
            if label >= d_c {
                return Err(Error::LabelOutOfRange {
                    index,
                    label,
                    num_classes: d_c,
                });
            }
            if !self.split.is_seen(label) && !self.split.is_unseen(label) {
                return Err(Error::Protocol(format!(
                    "label {label} (sample {index}) is not covered by the split"
                )));
            }
        }
        if self.split.max_class() >= d_c {
            return Err(Error::InvalidArgument(format!(
                "split references class {} but only {d_c} classes exist",
                self.split.max_class()
            )));
        }
        if let Some(names) = &self.class_names {
            if names.len() != d_c {
                return Err(Error::InvalidArgument(format!(
                    "{} class names for {d_c} classes",
                    names.len()
                )));
            }
        }
        if let Some(names) = &self.attr_names {
            if names.len() != self.num_attrs() {
                return Err(Error::InvalidArgument(format!(
                    "{} attribute names for {} attributes",
                    names.len(),
                    self.num_attrs()
                )));
            }
        }
        build_graph(&self.class_attr)?;
        Ok(())
    }

    fn batch_for(&self, keep: impl Fn(usize) -> bool) -> Result<LabeledBatch> {
        let indices: Vec<usize> = (0..self.labels.len())
            .filter(|&i| keep(self.labels[i]))
            .collect();
        let features = self.features.select_rows(&indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        LabeledBatch::new(features, labels, self.num_classes())
    }

    /// Samples whose class is in the seen split.
    pub fn seen_batch(&self) -> Result<LabeledBatch> {
        self.batch_for(|label| self.split.is_seen(label))
    }

    /// Samples whose class is in the unseen split.
    pub fn unseen_batch(&self) -> Result<LabeledBatch> {
        self.batch_for(|label| self.split.is_unseen(label))
    }
}

fn matrix_path(dir: &Path, stem: &str) -> Result<PathBuf> {
    let binary = dir.join(format!("{stem}.dmat"));
    if binary.exists() {
        return Ok(binary);
    }
    let text = dir.join(format!("{stem}.txt"));
    if text.exists() {
        return Ok(text);
    }
    Err(Error::MissingFile(binary))
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(format!("reading {}", path.display()), e)
        }
    })
}

fn parse_labels(content: &str, path: &Path) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let label: usize = line.parse().map_err(|_| Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: format!("line {}: invalid class id {line:?}", lineno + 1),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

fn parse_split(content: &str, path: &Path) -> Result<SplitSpec> {
    let mut seen: Option<Vec<usize>> = None;
    let mut unseen: Option<Vec<usize>> = None;
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(':').ok_or_else(|| Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: format!("line {}: expected \"seen:\" or \"unseen:\"", lineno + 1),
        })?;
        let ids = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|_| Error::MalformedHeader {
                    path: path.to_path_buf(),
                    detail: format!("line {}: invalid class id {t:?}", lineno + 1),
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        match key.trim() {
            "seen" => seen = Some(ids),
            "unseen" => unseen = Some(ids),
            other => {
                return Err(Error::MalformedHeader {
                    path: path.to_path_buf(),
                    detail: format!("line {}: unknown key {other:?}", lineno + 1),
                })
            }
        }
    }
    match (seen, unseen) {
        (Some(s), Some(u)) => SplitSpec::new(s, u),
        _ => Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: "file must define both a seen: and an unseen: line".to_string(),
        }),
    }
}

fn load_names(path: &Path) -> Result<Option<Vec<String>>> {
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(read_to_string(path)?.lines().map(str::to_string).collect()))
}

/// Load and validate a dataset directory.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let (dataset, _) = load_dataset_opts(dir, false)?;
    Ok(dataset)
}

/// Like [`load_dataset`], but with `drop_empty_attributes` set, all-zero
/// attribute columns are removed instead of failing graph validation.
/// Returns the dropped column indices.
pub fn load_dataset_opts(dir: &Path, drop_empty_attributes: bool) -> Result<(Dataset, Vec<usize>)> {
    let features = load_matrix(&matrix_path(dir, "features")?)?;
    let labels_path = dir.join("labels.txt");
    let labels = parse_labels(&read_to_string(&labels_path)?, &labels_path)?;
    let mut class_attr = load_matrix(&matrix_path(dir, "class_attr")?)?;
    let split_path = dir.join("split.txt");
    let split = parse_split(&read_to_string(&split_path)?, &split_path)?;
    let class_names = load_names(&dir.join("class_names.txt"))?;
    let mut attr_names = load_names(&dir.join("attr_names.txt"))?;

    let mut dropped = Vec::new();
    if drop_empty_attributes {
        let keep: Vec<usize> = (0..class_attr.cols())
            .filter(|&j| (0..class_attr.rows()).any(|i| class_attr.get(i, j) != 0.0))
            .collect();
        if keep.len() != class_attr.cols() {
            dropped = (0..class_attr.cols()).filter(|j| !keep.contains(j)).collect();
            let mut reduced = Mat::zeros(class_attr.rows(), keep.len());
            for i in 0..class_attr.rows() {
                for (new_j, &old_j) in keep.iter().enumerate() {
                    reduced.set(i, new_j, class_attr.get(i, old_j));
                }
            }
            class_attr = reduced;
            if let Some(names) = attr_names {
                attr_names = Some(
                    keep.iter()
                        .filter_map(|&j| names.get(j).cloned())
                        .collect(),
                );
            }
        }
    }

    let dataset = Dataset {
        features,
        labels,
        class_attr,
        split,
        class_names,
        attr_names,
    };
    dataset.validate()?;
    Ok((dataset, dropped))
}

/// Write a dataset into `dir` using the binary matrix format.
pub fn save_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    save_matrix(&dir.join("features.dmat"), &dataset.features)?;
    save_matrix(&dir.join("class_attr.dmat"), &dataset.class_attr)?;

    let labels: String = dataset.labels.iter().map(|l| format!("{l}\n")).collect();
    fs::write(dir.join("labels.txt"), labels)
        .map_err(|e| Error::io("writing labels.txt".to_string(), e))?;

    let mut split = String::from("seen:");
    for c in dataset.split.seen() {
        split.push_str(&format!(" {c}"));
    }
    split.push_str("\nunseen:");
    for c in dataset.split.unseen() {
        split.push_str(&format!(" {c}"));
    }
    split.push('\n');
    fs::write(dir.join("split.txt"), split)
        .map_err(|e| Error::io("writing split.txt".to_string(), e))?;

    if let Some(names) = &dataset.class_names {
        fs::write(dir.join("class_names.txt"), names.join("\n") + "\n")
            .map_err(|e| Error::io("writing class_names.txt".to_string(), e))?;
    }
    if let Some(names) = &dataset.attr_names {
        fs::write(dir.join("attr_names.txt"), names.join("\n") + "\n")
            .map_err(|e| Error::io("writing attr_names.txt".to_string(), e))?;
    }
    Ok(())
}
