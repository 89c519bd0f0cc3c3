//! `cwrgeo`: isotropy reports, outlier scans, frequency exports, cluster-based
//! isotropy enhancement, STS evaluation and synthetic fixtures.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation failure, 3 numeric failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cwr_geometry::metrics::{
    detect_outliers, frequency_bias_export, isotropy_report, ReportParams, DEFAULT_PAIRS, DEFAULT_SAMPLES,
    DEFAULT_THRESHOLD_SIGMAS, DEFAULT_TOP_K,
};
use cwr_geometry::store::{attach_frequencies, load_matrix, load_sts, save_matrix, save_sts, FrequencyTable};
use cwr_geometry::sts::{evaluate, Setting};
use cwr_geometry::synth::{self, AnisotropicSpec, IsotropicSpec, OutlierSpec, StsSpec};
use cwr_geometry::transform::{fit, load_transform, save_transform, FitOptions, DEFAULT_CLUSTERS, DEFAULT_REMOVE};
use cwr_geometry::{EmbeddingMatrix, Error, ErrorClass, Result};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cwrgeo", version, about = "Geometry analysis of contextual embedding spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Isotropy report: I_Cos, I_PC and the top per-dimension contributions.
    Metrics(MetricsArgs),
    /// Outlier dimensions of the sampled mean representation.
    Outliers(OutliersArgs),
    /// Word-level PCA coordinates with frequencies, as TSV.
    Freqbias(FreqbiasArgs),
    /// Fit a cluster-based isotropy transform.
    Fit(FitArgs),
    /// Apply a fitted transform to an embedding file.
    Apply(ApplyArgs),
    /// Evaluate an STS dataset under one setting.
    Sts(StsArgs),
    /// Write a synthetic embedding file (and STS pairs or frequency table).
    Synth(SynthArgs),
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Report path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pairs: usize,
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top_k: usize,
}

#[derive(Args)]
struct OutliersArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_SIGMAS)]
    threshold_sigmas: f64,
}

#[derive(Args)]
struct FreqbiasArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// word<TAB>count-per-million table attached before the export.
    #[arg(long)]
    freq_table: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CLUSTERS)]
    clusters: usize,
    #[arg(long, default_value_t = DEFAULT_REMOVE)]
    remove: usize,
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    transform: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    Baseline,
    Individual,
    ZeroShot,
}

impl From<SettingArg> for Setting {
    fn from(s: SettingArg) -> Self {
        match s {
            SettingArg::Baseline => Setting::Baseline,
            SettingArg::Individual => Setting::Individual,
            SettingArg::ZeroShot => Setting::ZeroShot,
        }
    }
}

#[derive(Args)]
struct StsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    sts: PathBuf,
    #[arg(long, value_enum, default_value = "baseline")]
    setting: SettingArg,
    /// Fitted transform; required for zero-shot, fitted on the input for
    /// individual when omitted.
    #[arg(long)]
    transform: Option<PathBuf>,
    /// JSON result path; the per-pair scores go next to it as `.pairs.tsv`.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CLUSTERS)]
    clusters: usize,
    #[arg(long, default_value_t = DEFAULT_REMOVE)]
    remove: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Isotropic,
    Anisotropic,
    Outliers,
    Sts,
}

#[derive(Args, Serialize)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    dims: Option<usize>,
    /// Constant offset (isotropic) or offset scale (anisotropic).
    #[arg(long)]
    offset: Option<f64>,
    /// Comma-separated planted outlier dimensions.
    #[arg(long, value_delimiter = ',')]
    outlier_dims: Vec<usize>,
    #[arg(long)]
    outlier_magnitude: Option<f64>,
    /// Planted clusters of the anisotropic generator.
    #[arg(long)]
    clusters: Option<usize>,
    /// Seed of the shared structure; equal values give draws of one "family".
    #[arg(long)]
    structure_seed: Option<u64>,
    #[arg(long)]
    language: Option<String>,
    /// Number of STS pairs.
    #[arg(long)]
    pairs: Option<usize>,
    /// No offset or dominant direction, so pooled cosine tracks gold exactly.
    #[arg(long)]
    clean: bool,
    /// Subtract the global token mean.
    #[arg(long)]
    center: bool,
    /// STS pairs output (kind sts).
    #[arg(long)]
    sts: Option<PathBuf>,
    /// Frequency table output (kind anisotropic).
    #[arg(long)]
    freq_table: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cwrgeo: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Io => 1,
                ErrorClass::Validation => 2,
                ErrorClass::Numeric => 3,
            })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Metrics(a) => metrics(a),
        Command::Outliers(a) => outliers(a),
        Command::Freqbias(a) => freqbias(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Apply(a) => apply(a),
        Command::Sts(a) => sts(a),
        Command::Synth(a) => synth_cmd(a),
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Argument(msg()))
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Numeric(format!("cannot serialize report: {e}")))
}

/// `{"provenance": {...}, "report": {...}}` with sorted keys and a trailing newline.
fn write_report<T: Serialize>(path: Option<&Path>, provenance: Value, report: &T) -> Result<()> {
    let doc = json!({ "provenance": provenance, "report": to_value(report)? });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Numeric(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn metrics(a: MetricsArgs) -> Result<()> {
    require(a.pairs > 0, || "--pairs must be positive".into())?;
    let m = load_matrix(&a.input)?;
    let report = isotropy_report(&m, ReportParams { n_pairs: a.pairs, seed: a.seed, top_k: a.top_k })?;
    let prov = json!({
        "command": "metrics",
        "input": a.input,
        "pairs": a.pairs,
        "seed": a.seed,
        "top_k": a.top_k,
    });
    write_report(a.output.as_deref(), prov, &report)
}

fn outliers(a: OutliersArgs) -> Result<()> {
    require(a.samples > 0, || "--samples must be positive".into())?;
    require(a.threshold_sigmas.is_finite() && a.threshold_sigmas > 0.0, || {
        format!("--threshold-sigmas must be positive, got {}", a.threshold_sigmas)
    })?;
    let m = load_matrix(&a.input)?;
    let report = detect_outliers(&m, a.samples, a.seed, a.threshold_sigmas)?;
    let prov = json!({
        "command": "outliers",
        "input": a.input,
        "samples": a.samples,
        "seed": a.seed,
        "threshold_sigmas": a.threshold_sigmas,
    });
    write_report(a.output.as_deref(), prov, &report)
}

fn freqbias(a: FreqbiasArgs) -> Result<()> {
    let mut m = load_matrix(&a.input)?;
    if let Some(path) = &a.freq_table {
        let table = FrequencyTable::load(path)?;
        let (with_freq, coverage) = attach_frequencies(&m, &table);
        eprintln!(
            "frequency coverage: {}/{} word occurrences ({:.3})",
            coverage.words_matched, coverage.words_total, coverage.coverage
        );
        m = with_freq;
    }
    let export = frequency_bias_export(&m)?;
    write_text(a.output.as_deref(), &export.to_tsv())
}

fn fit_options(clusters: usize, remove: usize, seed: u64) -> Result<FitOptions> {
    let opts = FitOptions::new(clusters, remove, seed);
    opts.validate()?;
    Ok(opts)
}

fn fit_cmd(a: FitArgs) -> Result<()> {
    let opts = fit_options(a.clusters, a.remove, a.seed)?;
    let m = load_matrix(&a.input)?;
    let t = fit(&m, &opts)?;
    save_transform(&t, &a.output)
}

fn apply(a: ApplyArgs) -> Result<()> {
    let t = load_transform(&a.transform)?;
    let m = load_matrix(&a.input)?;
    let mut out = t.apply(&m)?;
    out.provenance.insert(
        "apply".into(),
        json!({ "input": a.input, "transform": a.transform }),
    );
    save_matrix(&out, &a.output)
}

fn sts(a: StsArgs) -> Result<()> {
    let setting = Setting::from(a.setting);
    match setting {
        Setting::Baseline => require(a.transform.is_none(), || "baseline takes no --transform".into())?,
        Setting::ZeroShot => require(a.transform.is_some(), || "zero-shot requires --transform".into())?,
        Setting::Individual => {}
    }
    let opts = fit_options(a.clusters, a.remove, a.seed)?;
    let m = load_matrix(&a.input)?;
    let ds = load_sts(&a.sts, &m)?;
    let transform = match (&a.transform, setting) {
        (Some(path), _) => Some(load_transform(path)?),
        (None, Setting::Individual) => Some(fit(&m, &opts)?),
        (None, _) => None,
    };
    let result = evaluate(&m, &ds, transform.as_ref(), setting)?;
    let fitted_here = a.transform.is_none() && setting == Setting::Individual;
    let prov = json!({
        "command": "sts",
        "input": a.input,
        "sts": a.sts,
        "setting": setting.as_str(),
        "transform": a.transform,
        "fitted_on_input": fitted_here,
        "clusters": if fitted_here { json!(a.clusters) } else { Value::Null },
        "remove": if fitted_here { json!(a.remove) } else { Value::Null },
        "seed": if fitted_here { json!(a.seed) } else { Value::Null },
    });
    write_report(a.output.as_deref(), prov, &result)?;
    if let Some(out) = &a.output {
        let pairs = out.with_extension("pairs.tsv");
        fs::write(&pairs, result.pairs_tsv()).map_err(|e| Error::io(&pairs, e))?;
    }
    Ok(())
}

fn validate_synth(a: &SynthArgs) -> Result<()> {
    for (name, v) in [("--rows", a.rows), ("--dims", a.dims), ("--pairs", a.pairs), ("--clusters", a.clusters)] {
        if let Some(v) = v {
            require(v > 0, || format!("{name} must be positive"))?;
        }
    }
    for (name, v) in [("--offset", a.offset), ("--outlier-magnitude", a.outlier_magnitude)] {
        if let Some(v) = v {
            require(v.is_finite(), || format!("{name} must be finite"))?;
        }
    }
    let dims = a.dims.unwrap_or(match a.kind {
        Kind::Isotropic => IsotropicSpec::default().dims,
        Kind::Anisotropic => AnisotropicSpec::default().dims,
        Kind::Outliers => OutlierSpec::default().dims,
        Kind::Sts => StsSpec::default().dims,
    });
    if let Some(&bad) = a.outlier_dims.iter().find(|&&i| i >= dims) {
        return Err(Error::Argument(format!("outlier dimension {bad} is out of range for {dims} dimensions")));
    }
    match a.kind {
        Kind::Sts => {
            require(a.sts.is_some(), || "kind sts requires --sts for the pairs file".into())?;
            require(a.pairs.is_none_or(|p| p >= 2), || "--pairs must be at least 2".into())?;
            require(dims >= 2, || "--dims must be at least 2".into())?;
        }
        Kind::Anisotropic => {
            let rows = a.rows.unwrap_or(AnisotropicSpec::default().rows);
            let k = a.clusters.unwrap_or(AnisotropicSpec::default().clusters);
            require(rows >= k, || format!("{rows} rows cannot fill {k} clusters"))?;
        }
        _ => {}
    }
    if !matches!(a.kind, Kind::Anisotropic) {
        require(a.freq_table.is_none(), || "--freq-table is only produced by kind anisotropic".into())?;
    }
    Ok(())
}

fn synth_cmd(a: SynthArgs) -> Result<()> {
    validate_synth(&a)?;
    let mut freq = None;
    let mut ds = None;
    let mut m: EmbeddingMatrix = match a.kind {
        Kind::Isotropic => {
            let d = IsotropicSpec::default();
            synth::isotropic(&IsotropicSpec {
                rows: a.rows.unwrap_or(d.rows),
                dims: a.dims.unwrap_or(d.dims),
                seed: a.seed,
                offset: a.offset.unwrap_or(d.offset),
                language: a.language.clone().unwrap_or(d.language),
                ..d
            })
        }
        Kind::Anisotropic => {
            let d = AnisotropicSpec::default();
            let (m, table) = synth::anisotropic(&AnisotropicSpec {
                rows: a.rows.unwrap_or(d.rows),
                dims: a.dims.unwrap_or(d.dims),
                seed: a.seed,
                structure_seed: a.structure_seed.unwrap_or(d.structure_seed),
                clusters: a.clusters.unwrap_or(d.clusters),
                offset: a.offset.unwrap_or(d.offset),
                outlier_dims: a.outlier_dims.clone(),
                outlier_magnitude: a.outlier_magnitude.unwrap_or(d.outlier_magnitude),
                language: a.language.clone().unwrap_or(d.language),
                ..d
            });
            freq = Some(table);
            m
        }
        Kind::Outliers => {
            let d = OutlierSpec::default();
            let m = synth::planted_outliers(&OutlierSpec {
                rows: a.rows.unwrap_or(d.rows),
                dims: a.dims.unwrap_or(d.dims),
                seed: a.seed,
                outlier_dims: a.outlier_dims.clone(),
                magnitude: a.outlier_magnitude.unwrap_or(d.magnitude),
                ..d
            });
            match &a.language {
                Some(lang) => {
                    let model = m.model_id.clone();
                    m.with_tags(lang.clone(), model)
                }
                None => m,
            }
        }
        Kind::Sts => {
            let base = if a.clean { StsSpec::clean(0, 0, 0) } else { StsSpec::default() };
            let d = StsSpec::default();
            let (m, pairs) = synth::sts_benchmark(&StsSpec {
                pairs: a.pairs.unwrap_or(d.pairs),
                dims: a.dims.unwrap_or(d.dims),
                seed: a.seed,
                offset: a.offset.unwrap_or(base.offset),
                center: a.center,
                language: a.language.clone().unwrap_or(d.language),
                ..base
            });
            ds = Some(pairs);
            m
        }
    };
    m.provenance.insert("synth".into(), to_value(&a)?);
    save_matrix(&m, &a.output)?;
    if let (Some(table), Some(path)) = (freq, &a.freq_table) {
        fs::write(path, table.to_tsv()).map_err(|e| Error::io(path, e))?;
    }
    if let (Some(ds), Some(path)) = (ds, &a.sts) {
        save_sts(&ds, path)?;
    }
    Ok(())
}
