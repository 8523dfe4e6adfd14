//! Command-line front end for the rsmiles pipeline.
//!
//! One binary, five subcommands: `align` (dataset → token-file pairs),
//! `score` (beam outputs → ranked candidates), `stats` (alignment distance
//! report), `eval` (top-K / largest-fragment accuracy and cohort breakdown),
//! and `mask` (masked-corpus generation). All randomness flows from the
//! `--seed` flag; record `i` derives its generator from `seed XOR i`, so
//! results are byte-identical for any thread count.
//!
//! Exit codes: 0 success, 1 usage error, 2 input/format error, 3 internal
//! error.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;

use rsmiles::align::{
    align_p2r, align_p2s_rooted, align_r2p, align_s2r_rooted, AlignError, AlignedPair, Task,
};
use rsmiles::augment::{augment_training, mask_corpus, AugmentConfig, MaskConfig};
use rsmiles::dataio::{
    clean, read_dataset, write_pairs, CleanReport, DataError, DatasetFormat, ReagentMode,
};
use rsmiles::metrics::{
    cohort_report, fold_distances, maxfrag_accuracy, record_distances, topk_accuracy,
    MetricsError, RecordDistances,
};
use rsmiles::molgraph::Reaction;
use rsmiles::scoring::{aggregate, BeamOutputs, ScoringConfig, ScoringError};
use rsmiles::smiles::TokenSeq;

const THREADS_ENV: &str = "RSMILES_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "rsmiles",
    version,
    about = "Root-aligned SMILES dataset preparation and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: one per core; RSMILES_THREADS overrides the
    /// default, the flag overrides both). Outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a reaction dataset and write aligned source/target token files.
    Align(AlignArgs),
    /// Aggregate beam-search outputs into ranked candidates.
    Score(ScoreArgs),
    /// Report source/target edit distances with and without alignment.
    Stats(StatsArgs),
    /// Score predictions against truths: top-K, largest-fragment, cohorts.
    Eval(EvalArgs),
    /// Mask a token corpus and emit the label sidecar.
    Mask(MaskArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TaskArg {
    P2r,
    P2s,
    S2r,
    R2p,
}

impl From<TaskArg> for Task {
    fn from(value: TaskArg) -> Task {
        match value {
            TaskArg::P2r => Task::P2R,
            TaskArg::P2s => Task::P2S,
            TaskArg::S2r => Task::S2R,
            TaskArg::R2p => Task::R2P,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Lines,
    Csv,
}

impl From<FormatArg> for DatasetFormat {
    fn from(value: FormatArg) -> DatasetFormat {
        match value {
            FormatArg::Lines => DatasetFormat::Lines,
            FormatArg::Csv => DatasetFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReagentArg {
    Separated,
    Mixed,
}

impl From<ReagentArg> for ReagentMode {
    fn from(value: ReagentArg) -> ReagentMode {
        match value {
            ReagentArg::Separated => ReagentMode::Separated,
            ReagentArg::Mixed => ReagentMode::Mixed,
        }
    }
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Reaction dataset: one reactants>reagents>products line per record,
    /// or a CSV with a reaction_smiles column.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Lines)]
    format: FormatArg,
    #[arg(long, value_enum, default_value_t = ReagentArg::Separated)]
    reagent_mode: ReagentArg,
}

#[derive(Debug, Args)]
struct AlignArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Directory receiving src.txt and tgt.txt.
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = TaskArg::P2r)]
    task: TaskArg,
    /// Aligned variants per record (the first uses the canonical root).
    #[arg(long, default_value_t = 1)]
    factor: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Force this atom-map number as the root for every record, one pair
    /// per record (overrides --factor).
    #[arg(long)]
    root_map: Option<u32>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Prediction lines, augmentation × beam per record.
    input: PathBuf,
    /// Ranked TSV output: record, rank, score, prediction.
    output: PathBuf,
    /// Input variants per record.
    #[arg(long)]
    augmentation: usize,
    /// Predictions per variant.
    #[arg(long)]
    beam: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Candidates kept per record.
    #[arg(long, default_value_t = 10)]
    topk: usize,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long, default_value_t = 1)]
    factor: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Prediction lines, --beam per record, token or plain form.
    predictions: PathBuf,
    /// Ground-truth lines, one per record.
    #[arg(long)]
    truths: PathBuf,
    /// Predictions per record.
    #[arg(long, default_value_t = 1)]
    beam: usize,
    /// Cutoffs for the accuracy tables.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 5, 10])]
    ks: Vec<usize>,
    /// Reaction dataset matching the records; enables the cohort report.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Lines)]
    format: FormatArg,
    #[arg(long, value_enum, default_value_t = ReagentArg::Separated)]
    reagent_mode: ReagentArg,
}

#[derive(Debug, Args)]
struct MaskArgs {
    /// Token corpus, one space-separated line per sequence.
    input: PathBuf,
    /// Masked corpus output.
    output: PathBuf,
    /// Fraction of tokens to mask.
    #[arg(long, default_value_t = 0.15)]
    rate: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Label sidecar path (default: output path + ".labels").
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    File { path: PathBuf, source: std::io::Error },
    Data(DataError),
    Scoring(ScoringError),
    Metrics(MetricsError),
    Shape(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::File { path, source } => write!(f, "{}: {}", path.display(), source),
            CliError::Data(e) => write!(f, "{e}"),
            CliError::Scoring(e) => write!(f, "{e}"),
            CliError::Metrics(e) => write!(f, "{e}"),
            CliError::Shape(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    /// All run-phase errors are input problems; internal violations
    /// surface as panics and exit with 3 from `main`.
    fn exit_code(&self) -> u8 {
        2
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e)
    }
}

impl From<ScoringError> for CliError {
    fn from(e: ScoringError) -> Self {
        CliError::Scoring(e)
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Metrics(e)
    }
}

fn with_path<T>(path: &Path, result: std::io::Result<T>) -> Result<T, CliError> {
    result.map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    with_path(path, fs::read_to_string(path))
}

/// Undo token spacing: SMILES never contain spaces, so dropping them turns
/// a token line back into the plain string (and leaves plain lines alone).
fn detokenize(line: &str) -> String {
    line.split_whitespace().collect()
}

fn load_reactions(args: &DatasetArgs) -> Result<(Vec<Reaction>, CleanReport), CliError> {
    let records = read_dataset(&args.input, args.format.into()).map_err(|e| match e {
        DataError::Io(source) => CliError::File {
            path: args.input.clone(),
            source,
        },
        other => CliError::Data(other),
    })?;
    Ok(clean(&records, args.reagent_mode.into()))
}

fn align_one(task: Task, rxn: &Reaction, root_map: u32) -> Result<AlignedPair, AlignError> {
    match task {
        Task::P2R => align_p2r(rxn, root_map),
        Task::P2S => align_p2s_rooted(rxn, root_map),
        Task::S2R => align_s2r_rooted(rxn, root_map),
        Task::R2P => align_r2p(rxn, root_map),
    }
}

fn cmd_align(args: &AlignArgs) -> Result<(), CliError> {
    let task: Task = args.task.into();
    let (reactions, report) = load_reactions(&args.dataset)?;
    let per_record: Vec<Result<Vec<AlignedPair>, AlignError>> = reactions
        .par_iter()
        .enumerate()
        .map(|(i, rxn)| match args.root_map {
            Some(map) => align_one(task, rxn, map).map(|p| vec![p]),
            None => {
                let cfg = AugmentConfig::new(task, args.factor, args.seed ^ i as u64);
                augment_training(rxn, &cfg)
            }
        })
        .collect();

    let mut pairs = Vec::new();
    let mut failed = 0usize;
    for (i, result) in per_record.into_iter().enumerate() {
        match result {
            Ok(mut batch) => pairs.append(&mut batch),
            Err(e) => {
                warn!("record {i}: {e}");
                failed += 1;
            }
        }
    }

    with_path(&args.out_dir, fs::create_dir_all(&args.out_dir))?;
    let src_path = args.out_dir.join("src.txt");
    let tgt_path = args.out_dir.join("tgt.txt");
    write_pairs(&pairs, &src_path, &tgt_path)?;

    println!("{report}");
    println!("alignment_failed         {failed}");
    println!("pairs_written            {}", pairs.len());
    info!(
        "wrote {} pairs to {} and {}",
        pairs.len(),
        src_path.display(),
        tgt_path.display()
    );
    Ok(())
}

fn cmd_score(args: &ScoreArgs) -> Result<(), CliError> {
    let lines: Vec<String> = read_text(&args.input)?.lines().map(detokenize).collect();
    let group = args.augmentation.checked_mul(args.beam).unwrap_or(0);
    if group == 0 || lines.len() % group != 0 {
        return Err(ScoringError::ShapeMismatch {
            lines: lines.len(),
            augmentation: args.augmentation,
            beam: args.beam,
        }
        .into());
    }
    let cfg = ScoringConfig {
        alpha: args.alpha,
        topk_out: args.topk,
    };
    let mut out = String::from("record\trank\tscore\tprediction\n");
    for (record, chunk) in lines.chunks(group).enumerate() {
        let outputs = BeamOutputs::from_flat_lines(chunk, args.augmentation, args.beam, args.beam)?;
        for candidate in aggregate(&outputs, &cfg) {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                record, candidate.final_rank, candidate.score, candidate.canonical
            ));
        }
    }
    with_path(&args.output, fs::write(&args.output, out))?;
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> Result<(), CliError> {
    let (reactions, report) = load_reactions(&args.dataset)?;
    let per_record: Vec<Result<RecordDistances, AlignError>> = reactions
        .par_iter()
        .enumerate()
        .map(|(i, rxn)| record_distances(rxn, args.factor, args.seed ^ i as u64))
        .collect();

    let mut ok = Vec::new();
    let mut failed = 0usize;
    for (i, result) in per_record.into_iter().enumerate() {
        match result {
            Ok(r) => ok.push(r),
            Err(e) => {
                warn!("record {i}: {e}");
                failed += 1;
            }
        }
    }
    let stats = fold_distances(&ok);
    let reduction = if stats.mean_edit_distance_plain > 0.0 {
        100.0 * (stats.mean_edit_distance_plain - stats.mean_edit_distance_aligned)
            / stats.mean_edit_distance_plain
    } else {
        0.0
    };

    println!("{report}");
    println!("records_failed           {failed}");
    println!("records_used             {}", stats.n_records);
    println!("factor                   {}", args.factor);
    println!("mean_product_len         {:.4}", stats.mean_product_len);
    println!("mean_reactant_len        {:.4}", stats.mean_reactant_len);
    println!("mean_edit_distance_plain    {:.4}", stats.mean_edit_distance_plain);
    println!("mean_edit_distance_aligned  {:.4}", stats.mean_edit_distance_aligned);
    println!("reduction_percent        {reduction:.2}");
    Ok(())
}

fn accuracy_table(rows: &[(usize, f64)], maxfrag: &[(usize, f64)]) -> String {
    let mut out = String::from("k\texact\tmaxfrag\n");
    for ((k, exact), (_, frag)) in rows.iter().zip(maxfrag) {
        out.push_str(&format!("{k}\t{exact:.4}\t{frag:.4}\n"));
    }
    out
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let truths: Vec<String> = read_text(&args.truths)?.lines().map(detokenize).collect();
    let pred_lines: Vec<String> = read_text(&args.predictions)?
        .lines()
        .map(detokenize)
        .collect();
    if args.beam == 0 || pred_lines.len() != truths.len() * args.beam {
        return Err(CliError::Shape(format!(
            "{} prediction lines cannot cover {} truths at beam {}",
            pred_lines.len(),
            truths.len(),
            args.beam
        )));
    }
    let predictions: Vec<Vec<String>> = pred_lines
        .chunks(args.beam)
        .map(|c| c.to_vec())
        .collect();

    let exact = topk_accuracy(&predictions, &truths, &args.ks)?;
    let frag = maxfrag_accuracy(&predictions, &truths, &args.ks)?;
    print!("{}", accuracy_table(&exact, &frag));

    if let Some(dataset) = &args.dataset {
        let (reactions, _) = load_reactions(&DatasetArgs {
            input: dataset.clone(),
            format: args.format,
            reagent_mode: args.reagent_mode,
        })?;
        if reactions.len() != truths.len() {
            return Err(CliError::Shape(format!(
                "{} cleaned dataset records but {} truth lines",
                reactions.len(),
                truths.len()
            )));
        }
        let pairs: Vec<AlignedPair> = reactions
            .par_iter()
            .map(|rxn| {
                augment_training(rxn, &AugmentConfig::new(Task::P2R, 1, 0))
                    .map(|mut v| v.remove(0))
            })
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Shape(format!("cohort alignment failed: {e}")))?;
        let report = cohort_report(&reactions, &pairs, &predictions)?;
        for (kind, stats) in &report.by_kind {
            print!(
                "cohort\tkind={kind}\tn={}\tmean_edit_distance={:.4}",
                stats.n, stats.mean_edit_distance
            );
            for (k, acc) in &stats.topk {
                print!("\ttop{k}={acc:.4}");
            }
            println!();
        }
        for (bucket, stats) in &report.by_new_atoms {
            print!(
                "cohort\tnew_atoms={bucket}\tn={}\tmean_edit_distance={:.4}",
                stats.n, stats.mean_edit_distance
            );
            for (k, acc) in &stats.topk {
                print!("\ttop{k}={acc:.4}");
            }
            println!();
        }
    }
    Ok(())
}

fn cmd_mask(args: &MaskArgs) -> Result<(), CliError> {
    let corpus: Vec<TokenSeq> = read_text(&args.input)?
        .lines()
        .map(|line| {
            TokenSeq::new(
                line.split_whitespace()
                    .map(str::to_string)
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let cfg = MaskConfig {
        mask_rate: args.rate,
        seed: args.seed,
        ..MaskConfig::default()
    };
    let (masked, labels) =
        mask_corpus(&corpus, &cfg).map_err(|e| CliError::Shape(e.to_string()))?;

    let mut out = String::new();
    for line in &masked {
        out.push_str(&line.to_string());
        out.push('\n');
    }
    with_path(&args.output, fs::write(&args.output, out))?;

    let labels_path = args.labels.clone().unwrap_or_else(|| {
        let mut name = args.output.as_os_str().to_owned();
        name.push(".labels");
        PathBuf::from(name)
    });
    let mut sidecar = String::from("line\tposition\toriginal\n");
    for label in &labels {
        sidecar.push_str(&format!(
            "{}\t{}\t{}\n",
            label.line, label.position, label.original
        ));
    }
    with_path(&labels_path, fs::write(&labels_path, sidecar))?;
    info!("masked {} positions across {} lines", labels.len(), masked.len());
    Ok(())
}

fn configure_threads(flag: Option<usize>) {
    let from_env = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let threads = flag.or(from_env);
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            warn!("thread pool already initialised: {e}");
        }
    }
    info!(
        "threads: {}",
        threads
            .map(|n| n.to_string())
            .unwrap_or_else(|| "auto".to_string())
    );
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Align(args) => cmd_align(args),
        Command::Score(args) => cmd_score(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Mask(args) => cmd_mask(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    info!("config: {cli:?}");
    configure_threads(cli.threads);

    match catch_unwind(AssertUnwindSafe(|| run(&cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            eprintln!("error: internal invariant violated: {msg}");
            ExitCode::from(3)
        }
    }
}
