//! The `exit-cdr` command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error, 3 I/O
//! error, 4 training did not converge, 5 malformed input file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::datagen::{generate, read_log, split, write_log, Field, GroundTruth, LogStats, NUM_FIELDS};
use crate::labels::{compute_gci_sharded, GciMap};
use crate::model::Model;
use crate::training::{
    ablation_table, evaluate_model, run_ablation, run_experiment, sweep_lambda, sweep_table, ExperimentData,
    MetricsReport, Variant,
};
use crate::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;
pub const EXIT_PARSE: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "exit-cdr", version, about = "Explicit cross-domain interest transfer")]
pub struct Cli {
    /// TOML run configuration; defaults apply to anything it leaves out.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the world, training and simulation seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `paths.out_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic train/test logs and their ground truth.
    GenData,
    /// Compute item group consistency interest from the training log.
    ComputeGci {
        #[arg(long, default_value_t = 1)]
        shards: usize,
    },
    /// Train one variant, write the checkpoint and the metrics report.
    Train(TrainArgs),
    /// Evaluate a checkpoint on the test log.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train every requested variant and tabulate the results.
    Ablate {
        /// Comma-separated variant names; `ablate.variants` if omitted.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<String>,
    },
    /// One fit per λ grid point.
    Sweep,
    /// Score decomposition for hand-written candidates.
    Explain {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// CSV with one column per feature field and an optional `label`.
        #[arg(long)]
        examples: PathBuf,
        /// Rank cutoff for the exposure decision; `sim.k` if omitted.
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Debug, Default, clap::Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub lambda3: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug)]
pub struct CliError {
    pub error: Error,
    pub hint: Option<String>,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self.error {
            Error::Config(_) => EXIT_CONFIG,
            Error::Io { .. } => EXIT_IO,
            Error::Parse { .. } | Error::Encoding(_) => EXIT_PARSE,
            _ => EXIT_OTHER,
        }
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        let hint = match &error {
            Error::Io { path, source } if source.kind() == std::io::ErrorKind::NotFound => Some(format!(
                "`{}` does not exist; run `exit-cdr gen-data` with the same --config/--out first, \
                 or point paths.data_dir at existing logs",
                path.display()
            )),
            _ => None,
        };
        CliError { error, hint }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)?;
        if let Some(h) = &self.hint {
            write!(f, " ({h})")?;
        }
        Ok(())
    }
}

/// Resolves the configuration and runs one command, printing to stdout.
pub fn run(cli: &Cli) -> std::result::Result<u8, CliError> {
    let cfg = resolve_config(cli)?;
    let mut out = String::new();
    let code = dispatch(&cli.command, cfg, &mut out)?;
    print!("{out}");
    Ok(code)
}

/// Like [`run`] but returns what would have been printed.
pub fn run_captured(cli: &Cli) -> std::result::Result<(u8, String), CliError> {
    let cfg = resolve_config(cli)?;
    let mut out = String::new();
    let code = dispatch(&cli.command, cfg, &mut out)?;
    Ok((code, out))
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.paths.out_dir = out.clone();
    }
    Ok(cfg)
}

fn dispatch(command: &Command, mut cfg: RunConfig, out: &mut String) -> Result<u8> {
    match command {
        Command::GenData => gen_data(&cfg, out),
        Command::ComputeGci { shards } => {
            cfg.echo(&cfg.paths.out_dir)?;
            let gci = gci_from_train(&cfg, *shards)?;
            let mean = if gci.is_empty() {
                0.0
            } else {
                gci.iter().map(|(_, e)| e).sum::<f64>() / gci.len() as f64
            };
            let _ = writeln!(out, "items: {}\nmean_eta: {mean:.6}\nwrote: {}", gci.len(), cfg.paths.gci().display());
            Ok(EXIT_OK)
        }
        Command::Train(args) => {
            apply_train_args(&mut cfg, args)?;
            train(&cfg, out)
        }
        Command::Eval { checkpoint } => {
            cfg.echo(&cfg.paths.out_dir)?;
            let path = checkpoint.clone().unwrap_or_else(|| cfg.paths.checkpoint());
            let model = Model::load(&path)?;
            let data = load_data(&cfg)?;
            let report = evaluate_model(&model, &data, &cfg.experiment())?;
            out.push_str(&report.to_text());
            Ok(EXIT_OK)
        }
        Command::Ablate { variants } => {
            if !variants.is_empty() {
                cfg.ablate.variants = variants.iter().map(|v| v.parse()).collect::<Result<_>>()?;
            }
            ablate(&cfg, out)
        }
        Command::Sweep => {
            cfg.echo(&cfg.paths.out_dir)?;
            let data = load_data(&cfg)?;
            let rows = sweep_lambda(&cfg.sweep.weights(), &data, &cfg.experiment())?;
            let table = sweep_table(&rows);
            write_file(&cfg.paths.out_dir.join("sweep.tsv"), &table)?;
            out.push_str(&table);
            Ok(EXIT_OK)
        }
        Command::Explain { checkpoint, examples, k } => {
            let path = checkpoint.clone().unwrap_or_else(|| cfg.paths.checkpoint());
            let model = Model::load(&path)?;
            let rows = read_examples(examples)?;
            out.push_str(&explain_table(&model, &rows, k.unwrap_or(cfg.sim.k))?);
            Ok(EXIT_OK)
        }
    }
}

fn apply_train_args(cfg: &mut RunConfig, args: &TrainArgs) -> Result<()> {
    if let Some(v) = &args.variant {
        cfg.train.variant = v.parse::<Variant>()?;
    }
    if let Some(l) = args.lambda1 {
        cfg.train.lambda1 = l;
    }
    if let Some(l) = args.lambda2 {
        cfg.train.lambda2 = l;
    }
    if let Some(l) = args.lambda3 {
        cfg.train.lambda3 = l;
    }
    if let Some(e) = args.epochs {
        cfg.train.epochs = e;
    }
    cfg.validate()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn stats_row(out: &mut String, name: &str, s: &LogStats) {
    let sources: Vec<String> = s.source_purchases.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(
        out,
        "{name}\t{}\t{}\t{}\t{}\t{}",
        s.records,
        s.users,
        s.items,
        s.target_purchases,
        sources.join("\t")
    );
}

fn gen_data(cfg: &RunConfig, out: &mut String) -> Result<u8> {
    cfg.echo(&cfg.paths.out_dir)?;
    let (records, truth) = generate(&cfg.world)?;
    let (train, test) = split(&records, cfg.world.train_fraction, cfg.world.seed);
    let n_src = cfg.world.n_source_domains;
    let dir = cfg.paths.data_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_log(&cfg.paths.train_log(), &train, n_src)?;
    write_log(&cfg.paths.test_log(), &test, n_src)?;
    truth.write(&cfg.paths.truth())?;
    let header: Vec<String> = (1..=n_src).map(|d| format!("source_{d}_purchases")).collect();
    let _ = writeln!(out, "split\trecords\tusers\titems\ttarget_purchases\t{}", header.join("\t"));
    stats_row(out, "train", &LogStats::of(&train));
    stats_row(out, "test", &LogStats::of(&test));
    stats_row(out, "all", &LogStats::of(&records));
    let _ = writeln!(out, "wrote: {}", dir.display());
    Ok(EXIT_OK)
}

fn gci_from_train(cfg: &RunConfig, shards: usize) -> Result<GciMap> {
    if shards == 0 {
        return Err(Error::Config("--shards must be >= 1".into()));
    }
    let train = read_log(&cfg.paths.train_log())?;
    let gci = compute_gci_sharded(&train, shards)?;
    gci.write(&cfg.paths.gci())?;
    Ok(gci)
}

fn load_data(cfg: &RunConfig) -> Result<ExperimentData> {
    let train = read_log(&cfg.paths.train_log())?;
    let test = read_log(&cfg.paths.test_log())?;
    let truth_path = cfg.paths.truth();
    let truth = if truth_path.exists() {
        Some(GroundTruth::read(&truth_path)?)
    } else {
        None
    };
    let gci_path = cfg.paths.gci();
    let gci = if gci_path.exists() {
        GciMap::read(&gci_path)?
    } else {
        let g = crate::labels::compute_gci(&train)?;
        g.write(&gci_path)?;
        g
    };
    let vocab = cfg.world.vocab();
    for r in train.iter().chain(&test) {
        vocab.check(&r.features)?;
    }
    Ok(ExperimentData {
        train,
        test,
        truth,
        vocab,
        gci: Some(gci),
    })
}

fn record_report(cfg: &RunConfig, report: &MetricsReport) -> Result<()> {
    report.append_to_ledger(&cfg.paths.ledger())
}

fn train(cfg: &RunConfig, out: &mut String) -> Result<u8> {
    cfg.echo(&cfg.paths.out_dir)?;
    let data = load_data(cfg)?;
    let (model, report) = run_experiment(&data, &cfg.experiment())?;
    model.save(&cfg.paths.checkpoint())?;
    write_file(&cfg.paths.out_dir.join("report.txt"), &report.to_text())?;
    record_report(cfg, &report)?;
    out.push_str(&report.to_text());
    if !report.converged {
        let _ = writeln!(
            out,
            "not converged: the epoch loss failed to improve for {} consecutive epochs",
            cfg.train.convergence.patience
        );
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

fn ablate(cfg: &RunConfig, out: &mut String) -> Result<u8> {
    cfg.echo(&cfg.paths.out_dir)?;
    let data = load_data(cfg)?;
    let exp = cfg.experiment();
    let mut reports = Vec::new();
    for &v in &cfg.ablate.variants {
        let r = run_ablation(v, &data, &exp)?;
        record_report(cfg, &r)?;
        reports.push(r);
    }
    let table = ablation_table(&reports);
    write_file(&cfg.paths.out_dir.join("ablation.tsv"), &table)?;
    out.push_str(&table);
    Ok(EXIT_OK)
}

/// A candidate row from the explain input, with its optional label.
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleRow {
    pub features: [u32; NUM_FIELDS],
    pub label: Option<String>,
}

pub fn read_examples(path: &Path) -> Result<Vec<ExampleRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_examples(&text, path)
}

/// Parses a CSV whose header names every feature field, in any order, plus an
/// optional `label` column.
pub fn parse_examples(text: &str, origin: &Path) -> Result<Vec<ExampleRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 1, "empty example file"))?;
    let mut columns = Vec::new();
    let mut label_col = None;
    for (i, name) in header.split(',').map(str::trim).enumerate() {
        if name == "label" {
            label_col = Some(i);
            columns.push(None);
        } else {
            let field =
                Field::from_name(name).ok_or_else(|| Error::parse(origin, 1, format!("unknown column `{name}`")))?;
            columns.push(Some(field));
        }
    }
    for f in Field::ALL {
        if !columns.contains(&Some(f)) {
            return Err(Error::parse(origin, 1, format!("missing column `{}`", f.name())));
        }
    }
    lines
        .map(|(n, line)| {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != columns.len() {
                return Err(Error::parse(
                    origin,
                    n + 1,
                    format!("expected {} values, found {}", columns.len(), cells.len()),
                ));
            }
            let mut features = [0u32; NUM_FIELDS];
            for (cell, col) in cells.iter().zip(&columns) {
                if let Some(f) = col {
                    features[f.index()] = cell
                        .parse()
                        .map_err(|_| Error::parse(origin, n + 1, format!("`{cell}` is not an id for {}", f.name())))?;
                }
            }
            Ok(ExampleRow {
                features,
                label: label_col.map(|i| cells[i].to_string()),
            })
        })
        .collect()
}

/// One row per candidate in input order, ranked by serving score.
pub fn explain_table(model: &Model, rows: &[ExampleRow], k: usize) -> Result<String> {
    let features: Vec<_> = rows.iter().map(|r| r.features).collect();
    let preds = model.predict(&features)?;
    let mode = model.config().serving_score;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| preds[b].serving(mode).total_cmp(&preds[a].serving(mode)));
    let mut rank = vec![0; rows.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    let mut s = String::from("candidate\tp_target\tp_source\tp_trans\tp_whole\tscore\trank\texposed\n");
    for (i, (row, p)) in rows.iter().zip(&preds).enumerate() {
        let name = row.label.clone().unwrap_or_else(|| format!("item{}", i + 1));
        let _ = writeln!(
            s,
            "{name}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{}\t{}",
            p.p_target,
            p.p_source,
            p.p_trans,
            p.p_whole,
            p.serving(mode),
            rank[i],
            if rank[i] <= k { "Y" } else { "N" }
        );
    }
    Ok(s)
}
