//! `harmalign`: align datasets and run the corruption experiments from the shell.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use harmonic_align::align::{align_harmonics, harmonics, AlignmentParams, DatasetDiagnostics, Harmonics};
use harmonic_align::baselines::{MnnParams, Smoothing};
use harmonic_align::eval::{
    corruption_experiment, self_match_rate, transfer_experiment, ExperimentConfig, Method, Source, SynthSpec,
};
use harmonic_align::filters::BandSum;
use harmonic_align::graph::{Bandwidth, KernelKind, KernelSpec};
use harmonic_align::io::{load_matrix, write_output, MatrixFormat, Table};
use harmonic_align::report::Report;
use harmonic_align::spectral::{Phi0, Rank};
use harmonic_align::{DataMatrix, Matrix};

#[derive(Parser, Debug, Serialize)]
#[command(name = "harmalign", version, about, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Align two datasets and write their joint diffusion embedding.
    Align(AlignCmd),
    /// Align two or more datasets pairwise into one block embedding.
    MultiAlign(MultiAlignCmd),
    /// Run the feature-corruption or label-transfer experiment.
    Experiment(ExperimentCmd),
}

/// Flags shared by every subcommand that builds alignments.
#[derive(Args, Debug, Serialize)]
struct AlignFlags {
    /// Number of itersine bands
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    bands: u32,
    /// Diffusion time
    #[arg(long, default_value_t = 1)]
    t: u32,
    /// Neighbor index giving each point's adaptive bandwidth
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    knn_bandwidth: u64,
    /// Fixed kernel bandwidth; overrides the adaptive one
    #[arg(long, required_if_eq("kernel", "eq1"))]
    sigma: Option<f64>,
    /// Kernel: symmetric adaptive Gaussian (alg2) or density-normalized (eq1)
    #[arg(long, value_enum, default_value_t = Kernel::Alg2)]
    kernel: Kernel,
    /// Kernel anisotropy; only 1 with --kernel eq1 is supported
    #[arg(long)]
    anisotropy: Option<f64>,
    /// Eigenpairs per dataset: auto, full, or a count
    #[arg(long, default_value = "auto", value_parser = parse_rank)]
    #[serde(serialize_with = "ser_rank")]
    rank: Rank,
    /// Use D^{1/2}Ψ instead of D^{-1/2}Ψ for the diffusion coordinates
    #[arg(long)]
    literal_phi0: bool,
    /// Sum windows from 1 instead of 0 in the bandlimiting weights
    #[arg(long)]
    strict_band_sum: bool,
    /// Z-score feature columns before the graph Fourier transform
    #[arg(long)]
    standardize: bool,
}

#[derive(Args, Debug, Serialize)]
struct AlignCmd {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[command(flatten)]
    align: AlignFlags,
    #[command(flatten)]
    files: FileFlags,
}

#[derive(Args, Debug, Serialize)]
struct MultiAlignCmd {
    /// Two or more input matrices
    #[arg(long, num_args = 2.., required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    align: AlignFlags,
    #[command(flatten)]
    files: FileFlags,
}

#[derive(Args, Debug, Serialize)]
struct FileFlags {
    /// Input format (csv or raw-f64); guessed from the extension by default
    #[arg(long, value_parser = parse_format)]
    format: Option<MatrixFormat>,
    /// Embedding CSV with columns dataset,row,c0,...
    #[arg(long)]
    out: PathBuf,
    /// JSON report
    #[arg(long)]
    report: Option<PathBuf>,
    /// Flat key = value file of flag defaults; flags on the command line win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ExperimentCmd {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Flat key = value file of flag defaults; flags on the command line win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Labeled data file to sample from; synthetic clusters if absent
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<MatrixFormat>,
    /// Zero-based label column for files without a `label` header
    #[arg(long)]
    label_column: Option<usize>,
    /// Synthetic classes
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Synthetic ambient dimension
    #[arg(long, default_value_t = 100)]
    dim: usize,
    /// Synthetic within-class spread
    #[arg(long, default_value_t = 0.03)]
    spread: f64,
    /// Synthetic mean offset
    #[arg(long, default_value_t = 3.0)]
    offset: f64,
    #[arg(long, default_value_t = 1000)]
    n1: usize,
    #[arg(long, default_value_t = 1000)]
    n2: usize,
    /// Comma list of none, harmonic, mnn
    #[arg(long, value_delimiter = ',', default_value = "none,harmonic,mnn")]
    #[serde(serialize_with = "ser_methods")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    /// Neighbors in the lazy classifier
    #[arg(long, default_value_t = 5)]
    knn: usize,
    /// Neighbors in the class-average reconstruction
    #[arg(long, default_value_t = 10)]
    reconstruction_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma list of preserved feature percentages (corruption mode)
    #[arg(long, value_delimiter = ',')]
    preserved_pct: Option<Vec<f64>>,
    /// Comma list of test-set multiples of n1 (transfer mode)
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    ratios: Vec<usize>,
    /// Preserved feature percentage (transfer mode)
    #[arg(long, default_value_t = 35.0)]
    transfer_pct: f64,
    #[arg(long, default_value_t = 20)]
    mnn_k: usize,
    /// Fixed MNN smoothing bandwidth; median pairwise distance if absent
    #[arg(long)]
    mnn_sigma: Option<f64>,
    #[arg(long, value_enum, default_value_t = MnnSmoothing::PairedOnly)]
    mnn_smoothing: MnnSmoothing,
    #[command(flatten)]
    align: AlignFlags,
    /// JSON report
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-trial accuracy CSV with columns level,method,trial,accuracy
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kernel {
    Alg2,
    Eq1,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    Corruption,
    Transfer,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MnnSmoothing {
    PairedOnly,
    AllPoints,
}

fn parse_rank(s: &str) -> Result<Rank, String> {
    match s {
        "auto" => Ok(Rank::Auto),
        "full" => Ok(Rank::Full),
        _ => match s.parse::<usize>() {
            Ok(r) if r > 0 => Ok(Rank::Top(r)),
            _ => Err(format!("expected auto, full or a positive count, got {s:?}")),
        },
    }
}

fn parse_format(s: &str) -> Result<MatrixFormat, String> {
    s.parse().map_err(|e: harmonic_align::Error| e.to_string())
}

fn ser_rank<S: serde::Serializer>(r: &Rank, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Rank::Auto => s.serialize_str("auto"),
        Rank::Full => s.serialize_str("full"),
        Rank::Top(n) => s.serialize_u64(*n as u64),
    }
}

fn ser_methods<S: serde::Serializer>(m: &[Method], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(|m| m.name()))
}

impl AlignFlags {
    fn params(&self) -> AlignmentParams {
        let bandwidth = match self.sigma {
            Some(s) => Bandwidth::Fixed(s),
            None => Bandwidth::Adaptive(self.knn_bandwidth as usize),
        };
        let kind = match self.kernel {
            Kernel::Alg2 => KernelKind::Gaussian,
            Kernel::Eq1 => KernelKind::Anisotropic,
        };
        AlignmentParams {
            bands: self.bands,
            t: self.t,
            kernel: KernelSpec {
                kind,
                bandwidth,
                anisotropy: self.anisotropy,
            },
            rank: self.rank,
            phi0: if self.literal_phi0 {
                Phi0::SqrtDegree
            } else {
                Phi0::InverseSqrtDegree
            },
            band_sum: if self.strict_band_sum {
                BandSum::FromOne
            } else {
                BandSum::AllWindows
            },
            standardize: self.standardize,
        }
    }
}

impl ExperimentCmd {
    fn config(&self) -> ExperimentConfig {
        let source = match &self.data {
            Some(path) => Source::File {
                path: path.clone(),
                format: self.format.unwrap_or_else(|| MatrixFormat::from_path(path)),
                label_column: self.label_column,
            },
            None => Source::Synthetic(SynthSpec {
                classes: self.classes,
                d: self.dim,
                spread: self.spread,
                offset: self.offset,
            }),
        };
        let defaults = ExperimentConfig::default();
        ExperimentConfig {
            source,
            n1: self.n1,
            n2: self.n2,
            methods: self.methods.clone(),
            align: self.align.params(),
            mnn: MnnParams {
                k: self.mnn_k,
                sigma: self.mnn_sigma,
                smoothing: match self.mnn_smoothing {
                    MnnSmoothing::PairedOnly => Smoothing::PairedOnly,
                    MnnSmoothing::AllPoints => Smoothing::AllPoints,
                },
            },
            trials: self.trials,
            knn: self.knn,
            reconstruction_k: self.reconstruction_k,
            seed: self.seed,
            preserved_pct: self.preserved_pct.clone().unwrap_or(defaults.preserved_pct),
            ratios: self.ratios.clone(),
            transfer_pct: self.transfer_pct,
        }
    }
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

/// Loads every input and aligns them, recording per-phase timings.
fn run_alignment(kind: &str, cli: &Command, paths: &[PathBuf], flags: &AlignFlags, files: &FileFlags) -> AnyResult<()> {
    let p = flags.params();
    p.validate()?;
    let mut timings = serde_json::Map::new();

    let t0 = Instant::now();
    let data = paths
        .iter()
        .map(|path| load_matrix(path, files.format.unwrap_or_else(|| MatrixFormat::from_path(path))))
        .collect::<Result<Vec<DataMatrix<f64>>, _>>()?;
    timings.insert("load".into(), t0.elapsed().as_secs_f64().into());

    let t0 = Instant::now();
    let h = data
        .iter()
        .map(|x| harmonics(x, &p))
        .collect::<Result<Vec<Harmonics<f64>>, _>>()?;
    timings.insert("harmonics".into(), t0.elapsed().as_secs_f64().into());

    let t0 = Instant::now();
    let result = align_harmonics(&h, &p)?;
    timings.insert("alignment".into(), t0.elapsed().as_secs_f64().into());
    log::info!("aligned {} datasets in {:.3}s", data.len(), t0.elapsed().as_secs_f64());

    let embeddings: Vec<Matrix<f64>> = (0..data.len()).map(|i| result.dataset_embedding(i)).collect();
    write_output(&embedding_table(&embeddings), &files.out)?;

    let Some(report_path) = &files.report else {
        return Ok(());
    };
    let mut report = Report::new(kind);
    report
        .param("config", cli)
        .param("alignment", &p)
        .param("inputs", paths);
    report
        .metric("orthogonality_error", result.orthogonality_error)
        .metric("datasets", &result.datasets)
        .metric(
            "spectra",
            result.datasets.iter().map(|d| &d.spectrum).collect::<Vec<_>>(),
        )
        .metric("timings", &timings);
    let rates = self_match_rates(&embeddings)?;
    if data.len() == 2 {
        if let Some(r) = rates.first() {
            report.metric("self_match_rate", r.rate);
        }
    } else if !rates.is_empty() {
        report.metric("self_match_rates", &rates);
    }
    if result
        .datasets
        .iter()
        .any(|d: &DatasetDiagnostics| d.spectral.clamped > 0)
    {
        report
            .notes
            .push("some eigenvalues fell outside [0, 1] and were clamped".into());
    }
    write_output(&report, report_path)?;
    Ok(())
}

#[derive(Serialize)]
struct PairRate {
    from: usize,
    to: usize,
    rate: f64,
}

/// Self-match rates for every ordered pair of equally sized datasets.
fn self_match_rates(embeddings: &[Matrix<f64>]) -> AnyResult<Vec<PairRate>> {
    let mut out = Vec::new();
    for (i, a) in embeddings.iter().enumerate() {
        for (j, b) in embeddings.iter().enumerate() {
            if i != j && a.nrows() == b.nrows() {
                out.push(PairRate {
                    from: i,
                    to: j,
                    rate: self_match_rate(a, b)?,
                });
            }
        }
    }
    Ok(out)
}

fn embedding_table(blocks: &[Matrix<f64>]) -> Table {
    let dim = blocks.first().map_or(0, |b| b.ncols());
    let mut header = vec!["dataset".to_string(), "row".to_string()];
    header.extend((0..dim).map(|c| format!("c{c}")));
    let mut rows = Vec::new();
    for (id, b) in blocks.iter().enumerate() {
        for i in 0..b.nrows() {
            let mut row = vec![id.to_string(), i.to_string()];
            row.extend(b.row(i).iter().map(|v| v.to_string()));
            rows.push(row);
        }
    }
    Table { header, rows }
}

fn run_experiment(cli: &Command, cmd: &ExperimentCmd) -> AnyResult<()> {
    let cfg = cmd.config();
    cfg.validate()?;
    let t0 = Instant::now();
    let mut report = match cmd.mode {
        Mode::Corruption => corruption_experiment(&cfg)?,
        Mode::Transfer => transfer_experiment(&cfg)?,
    };
    report.param("cli", cli);
    report.metric("elapsed_seconds", t0.elapsed().as_secs_f64());
    for a in report.aggregates.iter().filter(|a| a.metric == "accuracy") {
        println!("{}={} {} accuracy {:.4}", a.variable, a.level, a.method, a.mean);
    }
    if let Some(path) = &cmd.csv {
        write_output(&report.trial_table("accuracy"), path)?;
    }
    if let Some(path) = &cmd.report {
        write_output(&report, path)?;
    }
    Ok(())
}

/// Splices a flat `key = value` config file into the arguments right after
/// the subcommand, so explicit flags given later take precedence.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("config {}: {e}", path.display()))?;
    let table: toml::Table = text.parse().map_err(|e| format!("config {}: {e}", path.display()))?;
    let mut extra = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => extra.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let parts: Result<Vec<String>, String> = items.iter().map(|v| scalar(&key, v)).collect();
                extra.push(flag);
                extra.push(parts?.join(","));
            }
            other => {
                extra.push(flag);
                extra.push(scalar(&key, &other)?);
            }
        }
    }
    let at = args
        .iter()
        .position(|a| matches!(a.to_str(), Some("align" | "multi-align" | "experiment")))
        .map_or(args.len(), |i| i + 1);
    let mut out = args;
    out.splice(at..at, extra.into_iter().map(OsString::from));
    Ok(out)
}

fn scalar(key: &str, v: &toml::Value) -> Result<String, String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        _ => Err(format!("config key {key:?}: unsupported value {v}")),
    }
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(Path::new(p).to_path_buf());
        }
    }
    None
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Align(c) => run_alignment("align", &cli.command, &[c.x.clone(), c.y.clone()], &c.align, &c.files),
        Command::MultiAlign(c) => run_alignment("multi-align", &cli.command, &c.inputs, &c.align, &c.files),
        Command::Experiment(c) => run_experiment(&cli.command, c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
