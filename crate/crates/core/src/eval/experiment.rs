//! Corruption-sweep and transfer experiment drivers.
//!
//! Feature corruption is parameterized by the percentage of feature columns
//! *preserved*: `preserved_pct = 35` means 65% of the columns are replaced
//! by a random rotation and 35% pass through unchanged.
//!
//! Random streams are derived from the configured seed: one per trial for
//! the data, one per (trial, level) for the corruption. Reruns with the same
//! configuration are bit-identical.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::align::{align_pair, harmonics, AlignmentParams, Harmonics};
use crate::baselines::{mnn_correct, MnnParams};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::io::{load_matrix, MatrixFormat};
use crate::report::{Report, TrialRecord};
use crate::rng::Rng;
use crate::scalar::Matrix;

use super::corruption::sample_corruption;
use super::knn::knn_accuracy;
use super::reconstruction::{class_average_reconstruction, mean_row_correlation};
use super::synth::{SynthModel, SynthSpec};

const STREAM_DATA: u64 = 1;
const STREAM_CORRUPTION: u64 = 2;
const STREAM_TEST: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classify corrupted points directly in feature space.
    #[serde(rename = "none")]
    Unaligned,
    Harmonic,
    Mnn,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Unaligned => "none",
            Method::Harmonic => "harmonic",
            Method::Mnn => "mnn",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" | "unaligned" => Ok(Method::Unaligned),
            "harmonic" => Ok(Method::Harmonic),
            "mnn" => Ok(Method::Mnn),
            _ => Err(format!("unknown method {s:?} (expected none, harmonic or mnn)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Source {
    Synthetic(SynthSpec),
    /// Labeled matrix file; rows are sampled without replacement per trial.
    File {
        path: PathBuf,
        format: MatrixFormat,
        /// Zero-based column holding labels, for files without a `label` header.
        label_column: Option<usize>,
    },
}

impl Default for Source {
    fn default() -> Self {
        Source::Synthetic(SynthSpec::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub source: Source,
    /// Labeled reference size.
    pub n1: usize,
    /// Corrupted dataset size (corruption experiment).
    pub n2: usize,
    pub methods: Vec<Method>,
    pub align: AlignmentParams,
    pub mnn: MnnParams,
    pub trials: usize,
    /// Neighbors in the lazy classifier.
    pub knn: usize,
    /// Neighbors in the class-average reconstruction.
    pub reconstruction_k: usize,
    pub seed: u64,
    /// Sweep of preserved feature percentages (corruption experiment).
    pub preserved_pct: Vec<f64>,
    /// Test-set size multiples of `n1` (transfer experiment).
    pub ratios: Vec<usize>,
    /// Preserved percentage in the transfer experiment.
    pub transfer_pct: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: Source::default(),
            n1: 1000,
            n2: 1000,
            methods: vec![Method::Unaligned, Method::Harmonic, Method::Mnn],
            align: AlignmentParams::default(),
            mnn: MnnParams::default(),
            trials: 3,
            knn: 5,
            reconstruction_k: 10,
            seed: 0,
            preserved_pct: (0..=20).map(|i| i as f64 * 5.0).collect(),
            ratios: vec![1, 2, 4],
            transfer_pct: 35.0,
        }
    }
}

/// Where datasets come from: a generative model or a loaded pool of rows.
enum Pool {
    Synthetic(SynthSpec),
    Rows(DataMatrix<f64>),
}

impl Pool {
    /// Reference set of `n1` rows and `sizes.len()` further sets drawn for
    /// `trial`. Synthetic sets share class means; file sets are disjoint.
    fn draw(
        &self,
        seed: u64,
        trial: usize,
        n1: usize,
        sizes: &[(u64, usize)],
    ) -> Result<(DataMatrix<f64>, Vec<DataMatrix<f64>>)> {
        let mut rng = Rng::derive(seed, &[STREAM_DATA, trial as u64]);
        match self {
            Pool::Synthetic(spec) => {
                let model = SynthModel::draw(*spec, &mut rng)?;
                let x = model.sample(n1, &mut rng)?;
                let ys = sizes
                    .iter()
                    .map(|&(tag, n)| model.sample(n, &mut Rng::derive(seed, &[STREAM_TEST, trial as u64, tag])))
                    .collect::<Result<Vec<_>>>()?;
                Ok((x, ys))
            }
            Pool::Rows(all) => {
                let perm = rng.permutation(all.n_points());
                let x = all.select_rows(&perm[..n1])?;
                // nested prefixes after the reference rows: larger sets extend smaller ones
                let ys = sizes
                    .iter()
                    .map(|&(_, n)| all.select_rows(&perm[n1..n1 + n]))
                    .collect::<Result<Vec<_>>>()?;
                Ok((x, ys))
            }
        }
    }

    fn d(&self) -> usize {
        match self {
            Pool::Synthetic(s) => s.d,
            Pool::Rows(m) => m.n_features(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.n1 < 2 || self.n2 < 2 {
            return bad(format!(
                "dataset sizes must be at least 2, got {} and {}",
                self.n1, self.n2
            ));
        }
        if self.knn == 0 || self.reconstruction_k == 0 {
            return bad("neighbor counts must be at least 1".into());
        }
        if let Some(p) = self
            .preserved_pct
            .iter()
            .chain(std::iter::once(&self.transfer_pct))
            .find(|p| !(0.0..=100.0).contains(*p))
        {
            return bad(format!("preserved percentage {p} outside [0, 100]"));
        }
        if self.ratios.contains(&0) {
            return bad("ratios must be positive".into());
        }
        self.align.validate()
    }

    fn pool(&self) -> Result<Pool> {
        match &self.source {
            Source::Synthetic(spec) => Ok(Pool::Synthetic(*spec)),
            Source::File {
                path,
                format,
                label_column,
            } => {
                let mut m = load_matrix(path, *format)?;
                if let Some(c) = label_column {
                    m = split_label_column(m, *c)?;
                }
                if m.labels().is_none() {
                    return Err(Error::InvalidData(format!(
                        "{}: experiments need class labels (a `label` header column or label_column)",
                        path.display()
                    )));
                }
                Ok(Pool::Rows(m))
            }
        }
    }

    fn require_rows(&self, pool: &Pool, needed: usize) -> Result<()> {
        if let Pool::Rows(m) = pool {
            if m.n_points() < needed {
                return Err(Error::InvalidParameter(format!(
                    "the experiment needs {needed} distinct rows, the file has {}",
                    m.n_points()
                )));
            }
        }
        Ok(())
    }

    fn start_report(&self, kind: &str) -> Report {
        let mut r = Report::new(kind);
        r.param("config", self);
        r.notes.push(
            "preserved_pct is the percentage of feature columns left uncorrupted (35 preserved = 65 corrupted)".into(),
        );
        if self.methods.contains(&Method::Mnn) {
            r.notes.push(
                "mnn is a compact mutual-nearest-neighbors reimplementation without cosine normalization or per-feature scaling"
                    .into(),
            );
        }
        r
    }
}

/// Moves feature column `col` into the labels.
fn split_label_column(m: DataMatrix<f64>, col: usize) -> Result<DataMatrix<f64>> {
    let (values, _, name) = m.into_parts();
    if col >= values.ncols() {
        return Err(Error::InvalidParameter(format!(
            "label column {col} out of range for {} columns",
            values.ncols()
        )));
    }
    let labels = values
        .column(col)
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidData(format!(
                    "row {i}: label {v} is not a non-negative integer"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    DataMatrix::new(values.remove_column(col), Some(labels), name)
}

/// Per-trial state reused across every corruption of the same data.
struct Reference<'a> {
    x: &'a DataMatrix<f64>,
    harmonics: Option<Harmonics<f64>>,
}

fn labels(m: &DataMatrix<f64>) -> &[usize] {
    m.labels().expect("experiment datasets are labeled")
}

/// Accuracy and reconstruction quality of one method on one corrupted set.
fn evaluate(
    method: Method,
    reference: &Reference,
    y: &DataMatrix<f64>,
    corrupted: &DataMatrix<f64>,
    cfg: &ExperimentConfig,
) -> Result<BTreeMap<String, f64>> {
    let x = reference.x;
    let (train, test): (Matrix<f64>, Matrix<f64>) = match method {
        Method::Unaligned => (x.values().clone(), corrupted.values().clone()),
        Method::Harmonic => {
            let hx = reference.harmonics.as_ref().expect("reference harmonics computed");
            let hy = harmonics(corrupted, &cfg.align)?;
            let res = align_pair(hx, &hy, &cfg.align)?;
            (res.x_embedding(), res.y_embedding())
        }
        Method::Mnn => {
            let res = mnn_correct(x, corrupted, &cfg.mnn)?;
            (x.values().clone(), res.corrected)
        }
    };
    let acc = knn_accuracy(&train, labels(x), &test, labels(y), cfg.knn)?;
    let recon = class_average_reconstruction(&test, &train, x.values(), labels(x), cfg.reconstruction_k)?;
    let mut metrics = BTreeMap::new();
    metrics.insert("accuracy".to_string(), acc);
    metrics.insert("reconstruction_r".to_string(), mean_row_correlation(&recon, y.values()));
    Ok(metrics)
}

fn reference<'a>(x: &'a DataMatrix<f64>, cfg: &ExperimentConfig) -> Result<Reference<'a>> {
    let harmonics = if cfg.methods.contains(&Method::Harmonic) {
        Some(harmonics(x, &cfg.align)?)
    } else {
        None
    };
    Ok(Reference { x, harmonics })
}

/// Sweeps the preserved percentage. Each trial draws `X` (labeled
/// reference) and `Y`, then for each level corrupts `Y` by right
/// multiplication with a partial random rotation and scores every method
/// by lazy kNN classification of `Y` against `X`.
pub fn corruption_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let pool = cfg.pool()?;
    cfg.require_rows(&pool, cfg.n1 + cfg.n2)?;
    let d = pool.d();
    let mut report = cfg.start_report("corruption");
    for trial in 0..cfg.trials {
        let (x, mut ys) = pool.draw(cfg.seed, trial, cfg.n1, &[(0, cfg.n2)])?;
        let y = ys.pop().expect("one test set");
        let reference = reference(&x, cfg)?;
        for &p in &cfg.preserved_pct {
            let mut rng = Rng::derive(cfg.seed, &[STREAM_CORRUPTION, trial as u64, p.to_bits()]);
            let o = sample_corruption::<f64>(d, p, &mut rng)?;
            let corrupted = y.map_values(y.values() * &o)?;
            for &method in &cfg.methods {
                let metrics = evaluate(method, &reference, &y, &corrupted, cfg)?;
                log::info!("trial {trial} p={p} {}: {:?}", method.name(), metrics);
                report.push_trial(TrialRecord {
                    method: method.name().into(),
                    variable: "preserved_pct".into(),
                    level: p,
                    trial,
                    metrics,
                });
            }
        }
    }
    report.aggregate();
    Ok(report)
}

/// Fixed labeled reference of `n1` points against corrupted unlabeled sets
/// of `n1·ratio` points. All ratios of a trial share the reference and the
/// corruption matrix, so only the test-set size varies.
pub fn transfer_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let pool = cfg.pool()?;
    let sizes: Vec<(u64, usize)> = cfg.ratios.iter().map(|&r| (r as u64, cfg.n1 * r)).collect();
    let largest = sizes.iter().map(|s| s.1).max().unwrap_or(0);
    cfg.require_rows(&pool, cfg.n1 + largest)?;
    let d = pool.d();
    let mut report = cfg.start_report("transfer");
    for trial in 0..cfg.trials {
        let (x, ys) = pool.draw(cfg.seed, trial, cfg.n1, &sizes)?;
        let mut rng = Rng::derive(cfg.seed, &[STREAM_CORRUPTION, trial as u64, cfg.transfer_pct.to_bits()]);
        let o = sample_corruption::<f64>(d, cfg.transfer_pct, &mut rng)?;
        let reference = reference(&x, cfg)?;
        for (&ratio, y) in cfg.ratios.iter().zip(&ys) {
            let corrupted = y.map_values(y.values() * &o)?;
            for &method in &cfg.methods {
                let metrics = evaluate(method, &reference, y, &corrupted, cfg)?;
                log::info!("trial {trial} ratio={ratio} {}: {:?}", method.name(), metrics);
                report.push_trial(TrialRecord {
                    method: method.name().into(),
                    variable: "ratio".into(),
                    level: ratio as f64,
                    trial,
                    metrics,
                });
            }
        }
    }
    report.aggregate();
    Ok(report)
}
