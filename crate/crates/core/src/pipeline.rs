//! End-to-end batch pipeline: ingest, journal merging, classification,
//! optional rescaling, best-fit grids, exponent summaries, journal means
//! and correlation matrices, assembled into one deterministic report
//! bundle.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    best_fit_grid, correlation_matrix, exponent_summary, journal_mean_distribution, CorrOptions,
    DisciplineLevel, GridOptions, ValueLookup,
};
use crate::corpus::{
    self, apply_classification_map, cohorts, drop_orphan_entries, load_classification_map,
    load_corpus, CitationTable, CorpusError, IngestConfig,
};
use crate::fitting::{FitOptions, XMinPolicy};
use crate::report::{AnalysisSection, GridReport, ReportBundle};
use crate::rescale::{normalize, RescaleError, RescaledTable};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Rescale(#[from] RescaleError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub articles: PathBuf,
    pub citations: PathBuf,
    pub classification: Option<PathBuf>,
    /// Valid publication years, inclusive.
    pub window: (i32, i32),
    /// Also compute the normalized-score sections.
    pub normalize: bool,
    pub level: DisciplineLevel,
    pub x_min: XMinPolicy,
    pub fit: FitOptions,
    pub corr: CorrOptions,
}

impl PipelineConfig {
    pub fn new(articles: PathBuf, citations: PathBuf) -> Self {
        PipelineConfig {
            articles,
            citations,
            classification: None,
            window: IngestConfig::default().window,
            normalize: true,
            level: DisciplineLevel::None,
            x_min: XMinPolicy::Scan,
            fit: FitOptions::default(),
            corr: CorrOptions::default(),
        }
    }
}

/// Everything the pipeline produces.
pub struct PipelineOutput {
    pub bundle: ReportBundle,
    pub rescaled: Option<RescaledTable>,
}

fn cited_year_range(citations: &CitationTable, fallback: (i32, i32)) -> (i32, i32) {
    let mut lo = i32::MAX;
    let mut hi = i32::MIN;
    for (_, y, _) in citations.iter() {
        lo = lo.min(y);
        hi = hi.max(y);
    }
    if lo > hi {
        fallback
    } else {
        (lo, hi)
    }
}

#[allow(clippy::too_many_arguments)]
fn analysis_section(
    values: &impl ValueLookup,
    citations: &CitationTable,
    scores: Option<&RescaledTable>,
    records: &[corpus::ArticleRecord],
    cited_years: (i32, i32),
    level: DisciplineLevel,
    grid_opts: &GridOptions,
    corr_opts: &CorrOptions,
) -> AnalysisSection {
    let global = best_fit_grid(values, records, cited_years, DisciplineLevel::None, grid_opts);
    let exponent_summary_global = exponent_summary(&global);
    let (by_discipline, exponent_summary_discipline) = if level == DisciplineLevel::None {
        (None, None)
    } else {
        let grid = best_fit_grid(values, records, cited_years, level, grid_opts);
        let summary = exponent_summary(&grid);
        (Some(GridReport::from_grid(grid)), Some(summary))
    };

    let mut pub_years: Vec<i32> = records.iter().map(|r| r.year).collect();
    pub_years.sort_unstable();
    pub_years.dedup();
    let correlations = pub_years
        .iter()
        .map(|&y_p| correlation_matrix(citations, scores, records, y_p, cited_years, corr_opts))
        .collect();

    AnalysisSection {
        global: GridReport::from_grid(global),
        by_discipline,
        exponent_summary_global,
        exponent_summary_discipline,
        correlations,
    }
}

/// Run the full pipeline. Fatal only on unreadable inputs; analysis-level
/// gaps surface as cell statuses and report notes.
pub fn run(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    let ingest_config = IngestConfig {
        window: config.window,
    };
    let loaded = load_corpus(&config.articles, &config.citations, &ingest_config)?;
    let mut report = loaded.report;
    let mut diagnostics = loaded.diagnostics;
    let mut statuses = Vec::new();

    let (mut records, merged) = corpus::merge_journal_ids(loaded.records);
    report.merged_journals = merged;

    if let Some(map_path) = &config.classification {
        let map = load_classification_map(map_path)?;
        apply_classification_map(&mut records, &map);
    }

    let mut citations = loaded.citations;
    drop_orphan_entries(&mut citations, &records);

    let cohort_set = cohorts(&records);
    let cited_years = cited_year_range(&citations, config.window);

    if config.level != DisciplineLevel::None
        && records.iter().all(|r| r.categories.is_empty())
    {
        statuses.push(format!(
            "discipline level {:?} requested but no classifications are present; \
             discipline sections are empty",
            config.level
        ));
    }

    let grid_opts = GridOptions {
        fit: config.fit.clone(),
        x_min: config.x_min,
    };

    let journal_means = journal_mean_distribution(&citations, &records);
    let raw = analysis_section(
        &citations,
        &citations,
        None,
        &records,
        cited_years,
        config.level,
        &grid_opts,
        &config.corr,
    );

    let (normalized, rescale_audit, rescaled) = if config.normalize {
        let (scores, audit) = normalize(&citations, &cohort_set)?;
        let section = analysis_section(
            &scores,
            &citations,
            Some(&scores),
            &records,
            cited_years,
            config.level,
            &grid_opts,
            &config.corr,
        );
        (Some(section), Some(audit), Some(scores))
    } else {
        statuses.push("normalization disabled; normalized sections are absent".to_string());
        (None, None, None)
    };

    diagnostics.sort();
    let bundle = ReportBundle {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(config).expect("config serializes"),
        ingest: report,
        diagnostics,
        statuses,
        journal_means,
        raw,
        rescale_audit,
        normalized,
    };
    Ok(PipelineOutput { bundle, rescaled })
}

/// Run and write the bundle (JSON + CSV series) into `out_dir`.
pub fn run_to_dir(config: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutput, PipelineError> {
    let output = run(config)?;
    crate::report::write_bundle(out_dir, &output.bundle, output.rescaled.as_ref())?;
    Ok(output)
}
