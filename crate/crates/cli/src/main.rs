//! Batch front end: fit distributions to a numeric file, run the full
//! corpus pipeline, generate synthetic corpora, and run the standalone
//! rescale and correlation commands. Every output directory carries the
//! exact run configuration and tool version that produced it.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use citedist::analysis::{correlation_matrix, CorrOptions, DisciplineLevel};
use citedist::corpus::{
    cohorts, drop_orphan_entries, load_corpus, merge_journal_ids, IngestConfig,
};
use citedist::distributions::{ModelFamily, SampleVector};
use citedist::fitting::{fit_mle, scan_xmin, select_best, default_xmin_grid, FitError, FitOptions, XMinPolicy};
use citedist::pipeline::{run_to_dir, PipelineConfig, PipelineError};
use citedist::rescale::{normalize, write_exclusions_csv, write_rescaled_csv};
use citedist::synthgen::{generate, write_corpus, SynthConfig, SynthError};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "citedist", version, about = "Heavy-tailed citation distribution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the six model families to a numeric sample and select the best.
    Fit(FitArgs),
    /// Ingest a corpus and emit the full analysis report bundle.
    Pipeline(PipelineArgs),
    /// Generate a synthetic corpus in the ingestion formats.
    Simulate(SimulateArgs),
    /// Compute normalized citation scores only.
    Normalize(NormalizeArgs),
    /// Compute cited-year Pearson correlation matrices only.
    Correlate(CorrelateArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Input file: one positive value per line, or a CSV with --column.
    file: PathBuf,
    /// Fit a single family instead of running model selection.
    #[arg(long)]
    family: Option<String>,
    /// Truncation point: "auto" scans by KS distance, a number fixes it.
    #[arg(long, default_value = "auto")]
    x_min: String,
    /// Smallest tail that is still fitted.
    #[arg(long, default_value_t = 50)]
    tail_min: usize,
    /// Significance level for the parsimony tie-break.
    #[arg(long, default_value_t = 0.1)]
    alpha_level: f64,
    /// CSV column (header name or zero-based index).
    #[arg(long)]
    column: Option<String>,
    /// Also write the result JSON into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    articles: PathBuf,
    #[arg(long)]
    citations: PathBuf,
    #[arg(long)]
    classification: Option<PathBuf>,
    /// Skip the normalized-score sections.
    #[arg(long)]
    no_normalize: bool,
    /// Discipline level: none, area or category.
    #[arg(long, default_value = "none")]
    level: String,
    /// Valid publication years as LO:HI.
    #[arg(long, default_value = "1996:2017")]
    window: String,
    #[arg(long, default_value = "auto")]
    x_min: String,
    #[arg(long, default_value_t = 50)]
    tail_min: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha_level: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON file with the generator configuration; absent fields use
    /// defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NormalizeArgs {
    #[arg(long)]
    articles: PathBuf,
    #[arg(long)]
    citations: PathBuf,
    #[arg(long, default_value = "1996:2017")]
    window: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long)]
    articles: PathBuf,
    #[arg(long)]
    citations: PathBuf,
    /// Publication year; all years when omitted.
    #[arg(long)]
    y_p: Option<i32>,
    /// Correlate normalized scores instead of raw counts.
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = 10)]
    min_pairs: usize,
    #[arg(long, default_value = "1996:2017")]
    window: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Pipeline(args) => cmd_pipeline(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Normalize(args) => cmd_normalize(&args),
        Command::Correlate(args) => cmd_correlate(&args),
    }
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn parse_window(s: &str) -> Result<(i32, i32), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("window must be LO:HI, got {s:?}"))?;
    let lo = lo.trim().parse::<i32>().map_err(|e| format!("window low bound: {e}"))?;
    let hi = hi.trim().parse::<i32>().map_err(|e| format!("window high bound: {e}"))?;
    if lo > hi {
        return Err(format!("window low bound {lo} exceeds high bound {hi}"));
    }
    Ok((lo, hi))
}

fn parse_x_min(s: &str) -> Result<XMinPolicy, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(XMinPolicy::Scan);
    }
    let v = s
        .parse::<f64>()
        .map_err(|_| format!("--x-min must be \"auto\" or a positive number, got {s:?}"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("--x-min must be positive, got {v}"));
    }
    Ok(XMinPolicy::Fixed(v))
}

/// Read one positive value per line, or a CSV column when `column` is set.
/// Zeros are dropped (the models live on x > 0); anything malformed is a
/// line-numbered error.
fn read_sample(path: &Path, column: Option<&str>) -> Result<(SampleVector, usize), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut values = Vec::new();
    let mut zeros = 0usize;
    let mut push = |raw: &str, line: usize| -> Result<(), String> {
        let v: f64 = raw
            .trim()
            .parse()
            .map_err(|_| format!("{}:{line}: not a number: {raw:?}", path.display()))?;
        if !v.is_finite() || v < 0.0 {
            return Err(format!(
                "{}:{line}: values must be finite and non-negative, got {v}",
                path.display()
            ));
        }
        if v == 0.0 {
            zeros += 1;
        } else {
            values.push(v);
        }
        Ok(())
    };

    match column {
        None => {
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                push(line, i + 1)?;
            }
        }
        Some(col) => {
            let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
            let headers = reader
                .headers()
                .map_err(|e| format!("{}: {e}", path.display()))?
                .clone();
            let idx = match col.parse::<usize>() {
                Ok(i) if i < headers.len() => i,
                Ok(i) => return Err(format!("column index {i} out of range")),
                Err(_) => headers
                    .iter()
                    .position(|h| h == col)
                    .ok_or_else(|| format!("no column named {col:?}"))?,
            };
            for (i, row) in reader.records().enumerate() {
                let row = row.map_err(|e| format!("{}:{}: {e}", path.display(), i + 2))?;
                let raw = row
                    .get(idx)
                    .ok_or_else(|| format!("{}:{}: missing column {idx}", path.display(), i + 2))?;
                push(raw, i + 2)?;
            }
        }
    }
    SampleVector::new(values)
        .map(|sv| (sv, zeros))
        .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct FitOutput<'a, T: Serialize> {
    version: &'a str,
    config: serde_json::Value,
    zeros_dropped: usize,
    result: T,
}

fn cmd_fit(args: &FitArgs) -> ExitCode {
    let config = serde_json::json!({
        "command": "fit",
        "file": args.file.display().to_string(),
        "family": args.family,
        "x_min": args.x_min,
        "tail_min": args.tail_min,
        "alpha_level": args.alpha_level,
        "column": args.column,
    });
    let (sample, zeros) = match read_sample(&args.file, args.column.as_deref()) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let policy = match parse_x_min(&args.x_min) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let opts = FitOptions {
        tail_min: args.tail_min,
        alpha_level: args.alpha_level,
        ..FitOptions::default()
    };

    let rendered = if let Some(name) = &args.family {
        let Some(family) = ModelFamily::from_label(name) else {
            return fail(format!(
                "unknown family {name:?}; expected one of PL, PLE, EXP, STEX, LN, LNP"
            ));
        };
        let fitted = match policy {
            XMinPolicy::Fixed(x) => fit_mle(family, &sample, x, &opts),
            XMinPolicy::Scan => {
                let grid = default_xmin_grid(&sample, opts.scan_grid_cap);
                scan_xmin(family, &sample, &grid, &opts).map(|(_, fit)| fit)
            }
        };
        match fitted {
            Ok(result) => serde_json::to_string_pretty(&FitOutput {
                version: VERSION,
                config,
                zeros_dropped: zeros,
                result,
            })
            .expect("fit result serializes"),
            Err(e) => return fit_failure(e),
        }
    } else {
        match select_best(&sample, policy, &opts) {
            Ok(result) => serde_json::to_string_pretty(&FitOutput {
                version: VERSION,
                config,
                zeros_dropped: zeros,
                result,
            })
            .expect("selection serializes"),
            Err(e) => return fit_failure(e),
        }
    };

    println!("{rendered}");
    if let Some(dir) = &args.out {
        if let Err(e) = std::fs::create_dir_all(dir)
            .and_then(|()| std::fs::write(dir.join("fit.json"), rendered.as_bytes()))
        {
            return fail(format!("cannot write {}: {e}", dir.display()));
        }
    }
    ExitCode::SUCCESS
}

fn fit_failure(e: FitError) -> ExitCode {
    match e {
        FitError::InsufficientTail { .. } | FitError::EmptyTail => {
            eprintln!("insufficient tail: {e}");
            ExitCode::from(2)
        }
        other => fail(other),
    }
}

fn cmd_pipeline(args: &PipelineArgs) -> ExitCode {
    let Some(level) = DisciplineLevel::parse(&args.level) else {
        return fail(format!("--level must be none, area or category, got {:?}", args.level));
    };
    let window = match parse_window(&args.window) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    let x_min = match parse_x_min(&args.x_min) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let config = PipelineConfig {
        articles: args.articles.clone(),
        citations: args.citations.clone(),
        classification: args.classification.clone(),
        window,
        normalize: !args.no_normalize,
        level,
        x_min,
        fit: FitOptions {
            tail_min: args.tail_min,
            alpha_level: args.alpha_level,
            ..FitOptions::default()
        },
        corr: CorrOptions::default(),
    };
    if let Err(e) = write_run_config(&args.out, &config) {
        return fail(e);
    }
    match run_to_dir(&config, &args.out) {
        Ok(output) => {
            println!(
                "pipeline done: {} articles loaded, {} ok cells (raw, global), report in {}",
                output.bundle.ingest.loaded,
                output.bundle.raw.global.n_ok,
                args.out.display()
            );
            ExitCode::SUCCESS
        }
        Err(PipelineError::Corpus(e)) => fail(e),
        Err(e) => fail(e),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> ExitCode {
    let mut config: SynthConfig = match &args.config {
        None => SynthConfig::default(),
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(format!("cannot read {}: {e}", path.display())),
            };
            match serde_json::from_str(&text) {
                Ok(c) => c,
                Err(e) => return fail(format!("{}: {e}", path.display())),
            }
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let (records, citations, truth) = match generate(&config) {
        Ok(out) => out,
        Err(e @ SynthError::InvalidField { .. }) => return fail(e),
        Err(e) => return fail(e),
    };
    if let Err(e) = write_corpus(&args.out, &records, &citations, &truth) {
        return fail(e);
    }
    if let Err(e) = write_run_config(&args.out, &config) {
        return fail(e);
    }
    let total: u64 = citations.iter().map(|(_, _, c)| u64::from(c)).sum();
    println!(
        "simulated {} journals, {} articles, {} citation entries ({} citations total) into {}",
        config.n_journals,
        records.len(),
        citations.n_entries(),
        total,
        args.out.display()
    );
    ExitCode::SUCCESS
}

fn cmd_normalize(args: &NormalizeArgs) -> ExitCode {
    let window = match parse_window(&args.window) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    let loaded = match load_corpus(&args.articles, &args.citations, &IngestConfig { window }) {
        Ok(l) => l,
        Err(e) => return fail(e),
    };
    let (records, _) = merge_journal_ids(loaded.records);
    let mut citations = loaded.citations;
    drop_orphan_entries(&mut citations, &records);
    let cohort_set = cohorts(&records);
    let (scores, audit) = match normalize(&citations, &cohort_set) {
        Ok(out) => out,
        Err(e) => return fail(e),
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return fail(format!("cannot create {}: {e}", args.out.display()));
    }
    let result = write_rescaled_csv(&args.out.join("rescaled.csv"), &scores)
        .and_then(|()| write_exclusions_csv(&args.out.join("exclusions.csv"), &scores));
    if let Err(e) = result {
        return fail(e);
    }
    let audit_json = serde_json::json!({
        "version": VERSION,
        "ingest": loaded.report,
        "audit": audit,
        "entries": scores.n_entries(),
    });
    if let Err(e) = std::fs::write(
        args.out.join("normalize_audit.json"),
        serde_json::to_string_pretty(&audit_json).expect("audit serializes") + "\n",
    ) {
        return fail(e);
    }
    let window_config = serde_json::json!({ "command": "normalize", "window": window });
    if let Err(e) = write_run_config_value(&args.out, &window_config) {
        return fail(e);
    }
    println!(
        "normalized {} entries, {} excluded pairs, {} singleton cohorts",
        scores.n_entries(),
        audit.excluded_pairs,
        audit.singleton_cohorts
    );
    ExitCode::SUCCESS
}

fn cmd_correlate(args: &CorrelateArgs) -> ExitCode {
    let window = match parse_window(&args.window) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    let loaded = match load_corpus(&args.articles, &args.citations, &IngestConfig { window }) {
        Ok(l) => l,
        Err(e) => return fail(e),
    };
    let (records, _) = merge_journal_ids(loaded.records);
    let mut citations = loaded.citations;
    drop_orphan_entries(&mut citations, &records);

    let scores = if args.normalize {
        let cohort_set = cohorts(&records);
        match normalize(&citations, &cohort_set) {
            Ok((s, _)) => Some(s),
            Err(e) => return fail(e),
        }
    } else {
        None
    };

    let mut years: Vec<i32> = Vec::new();
    let mut hi = i32::MIN;
    for (_, y, _) in citations.iter() {
        hi = hi.max(y);
    }
    if hi == i32::MIN {
        hi = window.1;
    }
    match args.y_p {
        Some(y) => years.push(y),
        None => {
            years = records.iter().map(|r| r.year).collect();
            years.sort_unstable();
            years.dedup();
        }
    }

    let opts = CorrOptions {
        min_pairs: args.min_pairs,
        require_citation: true,
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return fail(format!("cannot create {}: {e}", args.out.display()));
    }
    let mut matrices = Vec::new();
    for y_p in years {
        matrices.push(correlation_matrix(
            &citations,
            scores.as_ref(),
            &records,
            y_p,
            (window.0, hi),
            &opts,
        ));
    }
    let doc = serde_json::json!({
        "version": VERSION,
        "config": {
            "command": "correlate",
            "normalize": args.normalize,
            "min_pairs": args.min_pairs,
            "window": window,
        },
        "matrices": matrices,
    });
    if let Err(e) = std::fs::write(
        args.out.join("correlations.json"),
        serde_json::to_string_pretty(&doc).expect("matrices serialize") + "\n",
    ) {
        return fail(e);
    }
    println!("wrote {} correlation matrices to {}", matrices.len(), args.out.display());
    ExitCode::SUCCESS
}

fn write_run_config<T: Serialize>(dir: &Path, config: &T) -> Result<(), String> {
    let value = serde_json::to_value(config).expect("config serializes");
    write_run_config_value(dir, &value)
}

fn write_run_config_value(dir: &Path, value: &serde_json::Value) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let doc = serde_json::json!({ "version": VERSION, "config": value });
    std::fs::write(
        dir.join("run_config.json"),
        serde_json::to_string_pretty(&doc).expect("config serializes") + "\n",
    )
    .map_err(|e| format!("cannot write run_config.json: {e}"))
}
