mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kstar::report::{self, stem_path, write_atomic, RenderFormat, ReportOptions, DEFAULT_BINS};
use kstar::{
    build_class_index, build_neighbor_matrix, compute_kstar, load_predictions, EmbeddingSet,
    Format, Layout, Metric, SynthSpec,
};

use config::{resolve_threads, resolve_timestamp, FileConfig, EPOCH_TIMESTAMP};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] kstar::Error),
    #[error("UsageError: {0}")]
    Usage(String),
    #[error("ConfigError: {0}")]
    Config(String),
    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for filesystem failures, 1 for everything wrong with the request or data.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_io() => 2,
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "kstar",
    version,
    about = "k* distribution diagnostics for labelled latent spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute k* statistics for one embedding file and write all report formats.
    Analyze(AnalyzeArgs),
    /// Write a synthetic embedding set with a planted pattern.
    Generate(GenerateArgs),
    /// Analyze several embedding files with one metric and line up their classes.
    Compare(CompareArgs),
    /// Write per-class neighbour matrices as CSV and SVG.
    Matrix(MatrixArgs),
}

#[derive(Args)]
struct Common {
    /// Input format: csv, npy-pair or jsonl. Inferred from the extension by default.
    #[arg(long)]
    format: Option<Format>,
    /// euclidean, cityblock, maxnorm, cosine or minkowski-<r>.
    #[arg(long)]
    metric: Option<String>,
    /// Worker threads; 0 uses all cores. Falls back to KSTAR_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// TOML file with defaults for metric, threads, bins, format, fixed-timestamp.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Label file for npy input (default: `<input stem>.labels.txt`).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Predicted labels, one per line, to add an accuracy column.
    #[arg(long)]
    preds: Option<PathBuf>,
    /// Output path prefix (default: the input path without its extension).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    bins: Option<usize>,
    /// Timestamp recorded in the report instead of the current time.
    #[arg(long, num_args = 0..=1, default_missing_value = EPOCH_TIMESTAMP)]
    fixed_timestamp: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Clustered,
    Overlapped,
    Fractured,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    layout: LayoutArg,
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Distance between clustered class centres.
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    /// Arc length by which overlapped classes reach into their neighbours.
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    /// Sub-blobs per fractured class.
    #[arg(long, default_value_t = 8)]
    shards: usize,
    /// Keep each fractured class's shards adjacent instead of alternating.
    #[arg(long)]
    no_interleave: bool,
    /// Output file; the format follows its extension unless --format is given.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct CompareArgs {
    /// Embedding files to compare; repeat at least twice.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Output path prefix for `.compare.json` and `.compare.md`.
    #[arg(long, default_value = "comparison")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Comma-separated class names.
    #[arg(long, value_delimiter = ',', conflicts_with = "all_classes")]
    classes: Vec<String>,
    #[arg(long)]
    all_classes: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

/// Settings shared by the commands that run the neighbour engine.
struct Resolved {
    format: Option<Format>,
    metric: Metric,
    pool: rayon::ThreadPool,
    file: FileConfig,
}

impl Resolved {
    fn new(common: &Common) -> CliResult<Self> {
        let file = FileConfig::load(common.config.as_deref())?;
        let metric = common
            .metric
            .clone()
            .or_else(|| file.metric.clone())
            .map(|m| m.parse::<Metric>().map_err(CliError::Usage))
            .transpose()?
            .unwrap_or_default();
        let format = match (common.format, &file.format) {
            (Some(f), _) => Some(f),
            (None, Some(f)) => Some(f.parse().map_err(CliError::Usage)?),
            (None, None) => None,
        };
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = resolve_threads(common.threads, &file)? {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            format,
            metric,
            pool,
            file,
        })
    }

    fn load(&self, input: &Path, labels: Option<&Path>) -> CliResult<EmbeddingSet> {
        let format = self
            .format
            .or_else(|| Format::infer(input))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "cannot infer the format of {}; pass --format",
                    input.display()
                ))
            })?;
        match (format, labels) {
            (Format::NpyPair, Some(labels)) => Ok(kstar::dataset::load_npy_pair(input, labels)?),
            (_, None) => Ok(kstar::load_embeddings(input, format)?),
            (_, Some(_)) => Err(CliError::Usage("--labels applies only to npy input".into())),
        }
    }

    fn analyze(
        &self,
        input: &Path,
        labels: Option<&Path>,
        preds: Option<&Path>,
        opts: &ReportOptions,
    ) -> CliResult<kstar::AnalysisReport> {
        let set = self.load(input, labels)?;
        let index = build_class_index(&set);
        let result = self
            .pool
            .install(|| compute_kstar(&set, &index, self.metric))?;
        let preds = preds.map(|p| load_predictions(p, &set)).transpose()?;
        let stats = kstar::all_class_statistics(&result, &index, preds.as_ref());
        Ok(kstar::build_report(&set, &result, &stats, opts))
    }
}

fn default_stem(input: &Path) -> PathBuf {
    input.with_extension("")
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> CliResult<()> {
    let env = Resolved::new(&args.common)?;
    let bins = args.bins.or(env.file.bins).unwrap_or(DEFAULT_BINS);
    if bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let opts = ReportOptions {
        input: args.input.display().to_string(),
        timestamp: resolve_timestamp(args.fixed_timestamp, &env.file),
        bins,
    };
    let report = env.analyze(
        &args.input,
        args.labels.as_deref(),
        args.preds.as_deref(),
        &opts,
    )?;
    let stem = args.out.unwrap_or_else(|| default_stem(&args.input));
    let mut written = Vec::new();
    for format in RenderFormat::ALL {
        written.extend(report::render(&report, format, &stem)?);
    }
    print_written(&written);
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> CliResult<()> {
    let layout = match args.layout {
        LayoutArg::Clustered => Layout::Clustered {
            separation: args.separation,
        },
        LayoutArg::Overlapped => Layout::Overlapped {
            offset: args.offset,
        },
        LayoutArg::Fractured => Layout::Fractured {
            shards: args.shards,
            interleave: !args.no_interleave,
        },
    };
    let spec = SynthSpec {
        classes: args.classes,
        per_class: args.per_class,
        dim: args.dim,
        layout,
        seed: args.seed,
    };
    let format = args
        .format
        .or_else(|| Format::infer(&args.out))
        .ok_or_else(|| {
            CliError::Usage(format!(
                "cannot infer the format of {}; pass --format",
                args.out.display()
            ))
        })?;
    let set = kstar::generate(&spec)?;
    kstar::write_embeddings(&set, &args.out, format)?;
    println!("{}", args.out.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> CliResult<()> {
    if args.input.len() < 2 {
        return Err(CliError::Usage(
            "compare needs --input at least twice".into(),
        ));
    }
    let env = Resolved::new(&args.common)?;
    let timestamp = resolve_timestamp(None, &env.file);
    let reports = args
        .input
        .iter()
        .map(|input| {
            let opts = ReportOptions {
                input: input.display().to_string(),
                timestamp: timestamp.clone(),
                bins: env.file.bins.unwrap_or(DEFAULT_BINS),
            };
            env.analyze(input, None, None, &opts)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let comparison = kstar::compare(&reports)?;
    let json = stem_path(&args.out, "compare.json");
    let md = stem_path(&args.out, "compare.md");
    write_atomic(&json, comparison.to_json().as_bytes())?;
    write_atomic(&md, comparison.to_markdown().as_bytes())?;
    print_written(&[json, md]);
    eprintln!(
        "{} of {} classes changed pattern",
        comparison.n_changed,
        comparison.classes.len()
    );
    Ok(())
}

fn cmd_matrix(args: MatrixArgs) -> CliResult<()> {
    if args.classes.is_empty() && !args.all_classes {
        return Err(CliError::Usage("pass --classes or --all-classes".into()));
    }
    let env = Resolved::new(&args.common)?;
    let set = env.load(&args.input, args.labels.as_deref())?;
    let index = build_class_index(&set);
    let classes: Vec<usize> = if args.all_classes {
        (0..set.num_classes()).collect()
    } else {
        args.classes
            .iter()
            .map(|name| {
                set.class_id(name)
                    .ok_or_else(|| kstar::Error::UnknownClass(name.clone()).into())
            })
            .collect::<CliResult<_>>()?
    };

    let stem = args.out.unwrap_or_else(|| default_stem(&args.input));
    let file_names = report::class_file_names(set.class_names());
    let mut written = Vec::new();
    for class in classes {
        let matrix = env
            .pool
            .install(|| build_neighbor_matrix(&set, &index, class, env.metric))?;
        let mut csv = Vec::new();
        matrix
            .write_csv(&mut csv)
            .expect("writing to memory cannot fail");
        let csv_path = stem_path(&stem, &format!("{}.nnmatrix.csv", file_names[class]));
        write_atomic(&csv_path, &csv)?;
        let svg = report::svg::neighbor_matrix(&matrix, set.class_name(class), index.size(class));
        let svg_path = stem_path(&stem, &format!("{}.nnmatrix.svg", file_names[class]));
        write_atomic(&svg_path, svg.as_bytes())?;
        written.push(csv_path);
        written.push(svg_path);
    }
    print_written(&written);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage_error { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Matrix(a) => cmd_matrix(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kstar: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
