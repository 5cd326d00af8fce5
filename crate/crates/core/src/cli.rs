//! Command-line front end: `compress`, `stream`, `bench` and `eval`.
//!
//! Every artifact is written under `--out-dir`:
//!
//! | subcommand | files |
//! |------------|-------|
//! | compress   | `segmentation.csv`, `reconstruction.csv`, `report.json` |
//! | stream     | `checkpoints.jsonl`, `segmentation.csv`, `reconstruction.csv`, `synopsis.json`, `report.json`, and `batch_segmentation.csv` with `--compare-batch` |
//! | bench      | `bench.csv`, `report.json` |
//! | eval       | `report.json`, plus `series.csv` and `labels.csv` for generated input |
//!
//! [`run`] returns the process exit code: 0 on success, 1 after printing an
//! `error:` diagnostic, 2 for usage errors reported by the argument parser.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bench::{self, BenchConfig};
use crate::error::{Error, Result};
use crate::metrics::{self, EvalReport, IntervalLabel};
use crate::reconstruct::{reconstruct, snap_points, ReconstructionKind};
use crate::relevance::{self, QueryShape, RelevanceKind, RelevanceSpec, StreamingScorer};
use crate::series::{fmt_real, PairReader};
use crate::sim;
use crate::synopsis::Synopsis;
use crate::transport::{segment, Segmentation};
use crate::TimeSeries;

#[derive(Debug, Parser)]
#[command(name = "relcomp", version, about = "Relevance-aware time-series compression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment and reconstruct a whole series at once.
    Compress(CompressArgs),
    /// Compress a stream of records with a pruned synopsis.
    Stream(StreamArgs),
    /// Compare streaming and batch segmentation on the cubed-sine stream.
    Bench(BenchArgs),
    /// Per-interval compression ratios and errors against labeled intervals.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelevanceArg {
    Abs,
    Diff,
    Thresh,
    Query,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReconstructionArg {
    Constant,
    Linear,
    Regression,
    None,
}

impl ReconstructionArg {
    fn kind(self) -> Option<ReconstructionKind> {
        match self {
            Self::Constant => Some(ReconstructionKind::PiecewiseConstant),
            Self::Linear => Some(ReconstructionKind::PiecewiseLinear),
            Self::Regression => Some(ReconstructionKind::PiecewiseRegression),
            Self::None => None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RelevanceArgs {
    /// Relevance score family.
    #[arg(long, value_enum)]
    pub relevance: Option<RelevanceArg>,
    /// Score exponent.
    #[arg(long)]
    pub p: Option<u32>,
    /// Threshold for `thresh`.
    #[arg(long)]
    pub beta: Option<f64>,
    /// One-column CSV holding an odd-length query shape.
    #[arg(long)]
    pub query_file: Option<PathBuf>,
    /// Rescale the query to each window's mean and standard deviation.
    #[arg(long)]
    pub normalize_window: bool,
}

impl RelevanceArgs {
    fn spec(&self, default: RelevanceArg, default_p: u32) -> Result<RelevanceSpec> {
        let kind = match self.relevance.unwrap_or(default) {
            RelevanceArg::Abs => RelevanceKind::AbsMagnitude,
            RelevanceArg::Diff => RelevanceKind::AbsDifference,
            RelevanceArg::Thresh => RelevanceKind::ThresholdDifference {
                beta: self
                    .beta
                    .ok_or_else(|| Error::Config("--relevance thresh needs --beta".into()))?,
            },
            RelevanceArg::Query => {
                let query = match &self.query_file {
                    Some(path) => QueryShape::read_path(path)?,
                    None => default_query()?,
                };
                RelevanceKind::QueryShape {
                    query,
                    normalize_window: self.normalize_window,
                }
            }
        };
        RelevanceSpec::new(kind, self.p.unwrap_or(default_p))
    }
}

/// Compression ratio used by `eval` when neither size flag is given.
pub const DEFAULT_EVAL_RATIO: f64 = 5.0;

/// Sine of period 50 samples over 51 samples.
pub fn default_query() -> Result<QueryShape> {
    QueryShape::sine(51, 25.0)
}

#[derive(Debug, Clone, Args)]
#[group(id = "size", multiple = false)]
pub struct SizeArgs {
    /// Number of segmentation points n'.
    #[arg(long, group = "size")]
    pub n_points: Option<usize>,
    /// Target compression ratio; n' = max(1, floor(n / ratio)).
    #[arg(long, group = "size")]
    pub ratio: Option<f64>,
}

impl SizeArgs {
    fn resolve(&self, n: usize, default_ratio: Option<f64>) -> Result<usize> {
        match (self.n_points, self.ratio.or(default_ratio)) {
            (Some(k), _) => Ok(k),
            (None, Some(r)) if r >= 1.0 && r.is_finite() => {
                Ok(((n as f64 / r).floor() as usize).max(1))
            }
            (None, Some(r)) => Err(Error::Config(format!("--ratio must be at least 1, got {r}"))),
            (None, None) => Err(Error::Config("one of --n-points or --ratio is required".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompressArgs {
    /// Headerless `timestamp,value` CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub relevance: RelevanceArgs,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long, value_enum, default_value = "linear")]
    pub reconstruction: ReconstructionArg,
    /// Round segmentation points up to integers.
    #[arg(long)]
    pub integerize: bool,
    /// Optional `start,end,kind,name` labels for per-interval metrics.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StreamArgs {
    /// Input CSV; standard input when absent or `-`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub relevance: RelevanceArgs,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Points scored before the synopsis starts.
    #[arg(long, default_value_t = 1000)]
    pub init_n: usize,
    /// Segmentation points for the initial prefix; half of it when absent.
    #[arg(long = "init-nprime")]
    pub init_n_prime: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub checkpoint_every: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub reconstruction: ReconstructionArg,
    #[arg(long)]
    pub integerize: bool,
    /// Also recompute the batch segmentation and check the streaming bound.
    #[arg(long)]
    pub compare_batch: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Stream length.
    #[arg(long, default_value_t = 500_000)]
    pub length: usize,
    #[command(flatten)]
    pub relevance: RelevanceArgs,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub init_n: usize,
    #[arg(long = "init-nprime", default_value_t = 500)]
    pub init_n_prime: usize,
    #[arg(long, default_value_t = 5000)]
    pub checkpoint_every: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub reconstruction: ReconstructionArg,
    /// Recorded in the report; the benchmark signal is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Input CSV; a synthetic labeled event stream when absent.
    #[arg(long, requires = "labels")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub relevance: RelevanceArgs,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long, value_enum, default_value = "linear")]
    pub reconstruction: ReconstructionArg,
    /// Seed of the synthetic generator.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stdout = io::stdout().lock();
    match execute(&cli.command, &mut io::stdin().lock(), &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs a parsed subcommand. `stdin` feeds `stream` when no input file is
/// given; a short summary goes to `out`.
pub fn execute(command: &Command, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Compress(args) => compress(args, out),
        Command::Stream(args) => stream(args, stdin, out),
        Command::Bench(args) => bench_cmd(args, out),
        Command::Eval(args) => eval(args, out),
    }
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let (path, mut w) = create(dir, name)?;
    body(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| Error::io(&path, e))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_file(dir, name, |w| writeln!(w, "{text}"))
}

fn write_segmentation(
    dir: &Path,
    name: &str,
    points: &[f64],
    intervals: &[(f64, f64)],
) -> Result<()> {
    write_file(dir, name, |w| {
        writeln!(w, "# j,point,lower,upper")?;
        for (j, (p, (lo, hi))) in points.iter().zip(intervals).enumerate() {
            writeln!(w, "{},{},{},{}", j + 1, fmt_real(*p), fmt_real(*lo), fmt_real(*hi))?;
        }
        Ok(())
    })
}

/// Reconstructed samples, or the original values when reconstruction is off.
fn reconstructed_values(
    series: &TimeSeries,
    points: &[f64],
    kind: Option<ReconstructionKind>,
    dir: &Path,
) -> Result<Option<Vec<f64>>> {
    let Some(kind) = kind else {
        return Ok(None);
    };
    let recon = reconstruct(series, &snap_points(series.timestamps(), points), kind)?;
    write_file(dir, "reconstruction.csv", |w| recon.write_csv(series, w))?;
    Ok(Some(recon.sampled))
}

fn batch_segmentation(
    series: &TimeSeries,
    spec: &RelevanceSpec,
    n_prime: usize,
    integerize: bool,
) -> Result<Segmentation> {
    let profile = relevance::profile(series, spec)?;
    segment(&profile, series.timestamps(), n_prime, integerize)
}

fn compress(args: &CompressArgs, out: &mut dyn Write) -> Result<()> {
    let series = TimeSeries::read_path(&args.input)?;
    let spec = args.relevance.spec(RelevanceArg::Diff, 1)?;
    let n_prime = args.size.resolve(series.len(), None)?;
    let labels = match &args.labels {
        Some(path) => metrics::read_labels_path(path)?,
        None => Vec::new(),
    };
    let seg = batch_segmentation(&series, &spec, n_prime, args.integerize)?;

    prepare_out_dir(&args.out_dir)?;
    write_segmentation(&args.out_dir, "segmentation.csv", &seg.points, &seg.intervals)?;
    let recon = reconstructed_values(&series, &seg.points, args.reconstruction.kind(), &args.out_dir)?;
    let values = recon.unwrap_or_else(|| series.values().to_vec());
    let report = metrics::evaluate(&series, &seg.points, &values, &labels)?;
    print_warnings(&report);
    write_json(&args.out_dir, "report.json", &report)?;
    writeln!(
        out,
        "compressed {} points to {} segmentation points",
        series.len(),
        n_prime
    )
    .map_err(|e| Error::io("<stdout>", e))
}

fn print_warnings(report: &EvalReport) {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

#[derive(Serialize)]
struct Checkpoint<'a> {
    n: u64,
    #[serde(rename = "nPrime")]
    n_prime: usize,
    points: &'a [f64],
}

struct StreamState {
    synopsis: Option<Synopsis>,
    pending: Vec<(f64, f64)>,
    init_n: usize,
    init_n_prime: Option<usize>,
    alpha: f64,
    every: u64,
    checkpoints: BufWriter<File>,
    checkpoints_path: PathBuf,
}

impl StreamState {
    fn start(&mut self) -> Result<()> {
        let (x, phi): (Vec<f64>, Vec<f64>) = self.pending.drain(..).unzip();
        let n_prime = self.init_n_prime.unwrap_or(x.len() / 2).clamp(1, x.len());
        self.synopsis = Some(Synopsis::new(&x, &phi, n_prime, self.alpha)?);
        self.checkpoint_if_due()
    }

    fn push(&mut self, x: f64, phi: f64) -> Result<()> {
        match &mut self.synopsis {
            Some(s) => {
                s.observe(x, phi)?;
                self.checkpoint_if_due()
            }
            None => {
                self.pending.push((x, phi));
                if self.pending.len() >= self.init_n {
                    self.start()?;
                }
                Ok(())
            }
        }
    }

    fn checkpoint_if_due(&mut self) -> Result<()> {
        let s = self.synopsis.as_ref().expect("synopsis started");
        if !s.n_seen().is_multiple_of(self.every) {
            return Ok(());
        }
        let estimate = s.query()?;
        let line = serde_json::to_string(&Checkpoint {
            n: s.n_seen(),
            n_prime: estimate.n_prime,
            points: &estimate.points,
        })?;
        writeln!(self.checkpoints, "{line}").map_err(|e| Error::io(&self.checkpoints_path, e))
    }
}

fn stream(args: &StreamArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<()> {
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(Error::InvalidAlpha(args.alpha));
    }
    let spec = args.relevance.spec(RelevanceArg::Diff, 1)?;
    prepare_out_dir(&args.out_dir)?;
    let (checkpoints_path, checkpoints) = create(&args.out_dir, "checkpoints.jsonl")?;
    let mut state = StreamState {
        synopsis: None,
        pending: Vec::new(),
        init_n: args.init_n.max(1),
        init_n_prime: args.init_n_prime,
        alpha: args.alpha,
        every: args.checkpoint_every.max(1) as u64,
        checkpoints,
        checkpoints_path,
    };

    let mut scorer = StreamingScorer::new(spec.clone());
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let file_input = args.input.as_ref().filter(|p| p.as_os_str() != "-");
    let reader: Box<dyn Read + '_> = match file_input {
        Some(path) => Box::new(File::open(path).map_err(|e| Error::io(path, e))?),
        None => Box::new(stdin),
    };
    let origin = file_input.map_or("<stdin>".to_string(), |p| p.display().to_string());
    for pair in PairReader::new(reader, &origin) {
        let (x, y) = pair?;
        timestamps.push(x);
        values.push(y);
        for (x, phi) in scorer.push(x, y) {
            state.push(x, phi)?;
        }
    }
    for (x, phi) in scorer.finish()? {
        state.push(x, phi)?;
    }
    if state.synopsis.is_none() {
        if state.pending.is_empty() {
            return Err(Error::EmptySeries);
        }
        state.start()?;
    }
    state
        .checkpoints
        .flush()
        .map_err(|e| Error::io(&state.checkpoints_path, e))?;

    let synopsis = state.synopsis.expect("synopsis started");
    let series = TimeSeries::new(timestamps, values)?;
    let estimate = synopsis.query()?;
    let mut points = estimate.points.clone();
    if args.integerize {
        points.iter_mut().for_each(|p| *p = p.ceil());
    }
    write_segmentation(&args.out_dir, "segmentation.csv", &points, &estimate.interval_ends)?;
    synopsis.save(args.out_dir.join("synopsis.json"))?;
    let recon = reconstructed_values(&series, &points, args.reconstruction.kind(), &args.out_dir)?;
    let values = recon.unwrap_or_else(|| series.values().to_vec());
    let mut report = metrics::evaluate(&series, &points, &values, &[])?;
    if args.compare_batch {
        let batch = batch_segmentation(&series, &spec, estimate.n_prime, false)?;
        write_segmentation(&args.out_dir, "batch_segmentation.csv", &batch.points, &batch.intervals)?;
        report.bounds.push(metrics::streaming_bound_check(
            &estimate.points,
            &batch,
            series.timestamps(),
            args.alpha,
        )?);
    }
    write_json(&args.out_dir, "report.json", &report)?;
    writeln!(
        out,
        "streamed {} points; n' = {}, synopsis holds {} triples",
        series.len(),
        estimate.n_prime,
        synopsis.len()
    )
    .map_err(|e| Error::io("<stdout>", e))
}

fn bench_cmd(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(Error::InvalidAlpha(args.alpha));
    }
    let spec = args.relevance.spec(RelevanceArg::Abs, 2)?;
    if spec.lookahead() > 0 {
        return Err(Error::Config(
            "bench needs a pointwise relevance (abs, diff or thresh)".into(),
        ));
    }
    let reconstruction = args
        .reconstruction
        .kind()
        .ok_or_else(|| Error::Config("bench needs a reconstruction kind".into()))?;
    if args.length == 0 {
        return Err(Error::EmptySeries);
    }
    let config = BenchConfig {
        spec,
        init_n: args.init_n,
        init_n_prime: args.init_n_prime,
        alpha: args.alpha,
        checkpoint_every: args.checkpoint_every,
        reconstruction,
    };
    prepare_out_dir(&args.out_dir)?;
    let (csv_path, mut csv) = create(&args.out_dir, "bench.csv")?;
    writeln!(csv, "{}", bench::CSV_HEADER).map_err(|e| Error::io(&csv_path, e))?;
    let mut write_error = None;
    let series = sim::sin_cubed(args.length);
    let run = bench::run(&series, &config, |row| {
        if write_error.is_none() {
            write_error = writeln!(csv, "{}", row.csv_line()).err();
        }
    })?;
    if let Some(e) = write_error {
        return Err(Error::io(&csv_path, e));
    }
    csv.flush().map_err(|e| Error::io(&csv_path, e))?;
    write_json(
        &args.out_dir,
        "report.json",
        &json!({
            "summary": run.summary,
            "alpha": args.alpha,
            "p": config.spec.p(),
            "seed": args.seed,
        }),
    )?;
    writeln!(
        out,
        "n = {}, final n' = {}, max normalized error = {}, violations = {}",
        run.summary.n,
        run.summary.final_n_prime,
        fmt_real(run.summary.max_normalized_error),
        run.summary.violations
    )
    .map_err(|e| Error::io("<stdout>", e))
}

/// Series and labels for `eval`: the given files, or a generated stream.
fn eval_input(args: &EvalArgs) -> Result<(TimeSeries, Vec<IntervalLabel>, Option<u64>)> {
    match &args.input {
        Some(input) => {
            let labels = match &args.labels {
                Some(path) => metrics::read_labels_path(path)?,
                None => Vec::new(),
            };
            Ok((TimeSeries::read_path(input)?, labels, None))
        }
        None => {
            let generated = sim::event_stream(&sim::EventStreamConfig::default(), args.seed);
            Ok((generated.series, generated.labels, Some(args.seed)))
        }
    }
}

fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let (series, labels, seed) = eval_input(args)?;
    let spec = args.relevance.spec(RelevanceArg::Query, 1)?;
    let n_prime = args.size.resolve(series.len(), Some(DEFAULT_EVAL_RATIO))?;
    let seg = batch_segmentation(&series, &spec, n_prime, false)?;
    prepare_out_dir(&args.out_dir)?;
    if seed.is_some() {
        write_file(&args.out_dir, "series.csv", |w| series.write(w))?;
        write_file(&args.out_dir, "labels.csv", |w| {
            writeln!(w, "start,end,kind,name")?;
            for l in &labels {
                let kind = match l.kind {
                    metrics::LabelKind::Event => "event",
                    metrics::LabelKind::NonEvent => "non-event",
                };
                writeln!(w, "{},{},{},{}", fmt_real(l.start), fmt_real(l.end), kind, l.name)?;
            }
            Ok(())
        })?;
    }
    let recon = reconstructed_values(&series, &seg.points, args.reconstruction.kind(), &args.out_dir)?;
    let values = recon.unwrap_or_else(|| series.values().to_vec());
    let mut report = metrics::evaluate(&series, &seg.points, &values, &labels)?;
    report.seed = seed;
    print_warnings(&report);
    write_json(&args.out_dir, "report.json", &report)?;

    writeln!(out, "{:<14} {:<9} {:>10} {:>14}", "interval", "kind", "C_R", "rel. sq. error")
        .and_then(|()| {
            for r in &report.intervals {
                let kind = match r.kind {
                    metrics::LabelKind::Event => "event",
                    metrics::LabelKind::NonEvent => "non-event",
                };
                writeln!(
                    out,
                    "{:<14} {:<9} {:>10} {:>14}",
                    r.name,
                    kind,
                    fmt_real(r.metrics.ratio()),
                    fmt_real(r.metrics.error())
                )?;
            }
            Ok(())
        })
        .map_err(|e| Error::io("<stdout>", e))
}
