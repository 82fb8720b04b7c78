//! End-to-end pipeline runs over generated corpora: report-bundle shape,
//! grid/tally consistency, discipline handling, and byte-level determinism
//! of the emitted files.

mod common;

use std::collections::BTreeMap;
use std::path::Path;

use citedist::analysis::{CellStatus, DisciplineLevel};
use citedist::pipeline::{run, run_to_dir, PipelineConfig};
use citedist::synthgen::{generate, write_corpus, SynthConfig};

fn fixture(dir: &Path, config: &SynthConfig) {
    let (records, citations, truth) = generate(config).unwrap();
    write_corpus(dir, &records, &citations, &truth).unwrap();
}

fn small_config() -> SynthConfig {
    SynthConfig {
        n_journals: 30,
        articles_per_cohort: 8,
        years: (2000, 2005),
        base_log_mean: 2.2,
        journal_mu_spread: 0.8,
        sigma_within: 0.5,
        prestige_persistence: 0.5,
        aging_rate: 0.15,
        seed: 4242,
    }
}

fn pipeline_config(dir: &Path) -> PipelineConfig {
    let mut config = PipelineConfig::new(dir.join("articles.jsonl"), dir.join("citations.csv"));
    config.level = DisciplineLevel::Category;
    config
}

#[test]
fn report_bundle_carries_every_surface() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), &small_config());
    let output = run(&pipeline_config(dir.path())).unwrap();
    let bundle = &output.bundle;

    assert_eq!(bundle.ingest.loaded, 30 * 8 * 6);
    assert_eq!(bundle.ingest.invalid_timestamp, 0);
    assert_eq!(bundle.ingest.orphan_citation, 0);
    assert!(!bundle.version.is_empty());
    assert!(bundle.config.get("articles").is_some());

    // Raw section: a populated global grid plus the discipline grid.
    assert!(bundle.raw.global.n_ok > 0, "no ok cells in the raw grid");
    let disc = bundle.raw.by_discipline.as_ref().expect("category grid");
    assert!(disc.cells.iter().all(|c| c.discipline.is_some()));
    assert!(!bundle.raw.exponent_summary_global.is_empty());
    assert_eq!(bundle.raw.correlations.len(), 6); // one matrix per y_p

    // Winner tally sums must equal the ok cells per (y_p, y).
    let mut ok_cells: BTreeMap<(i32, i32), usize> = BTreeMap::new();
    for c in disc.cells.iter().filter(|c| c.status == CellStatus::Ok) {
        *ok_cells.entry((c.y_p, c.y)).or_insert(0) += 1;
    }
    for row in &disc.tally {
        let total: usize = row.counts.values().sum();
        assert_eq!(total, ok_cells[&(row.y_p, row.y)], "tally at {:?}", (row.y_p, row.y));
    }

    // Normalized section present with its audit.
    let normalized = bundle.normalized.as_ref().expect("normalized section");
    assert!(normalized.global.n_ok > 0);
    assert!(bundle.rescale_audit.is_some());
    assert!(output.rescaled.is_some());

    // Journal means cover every journal that has citations.
    assert_eq!(bundle.journal_means.means.len(), 30);
    assert!(!bundle.journal_means.ccdf.is_empty());

    // Correlation matrices carry defined diagonals where data exists.
    let m = &bundle.raw.correlations[0];
    let any_defined = m
        .r
        .iter()
        .enumerate()
        .any(|(i, row)| row[i].is_some_and(|v| (v - 1.0).abs() < 1e-12));
    assert!(any_defined, "no defined diagonal in the first raw matrix");
}

#[test]
fn bundle_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), &small_config());
    let out_a = dir.path().join("run_a");
    let out_b = dir.path().join("run_b");
    run_to_dir(&pipeline_config(dir.path()), &out_a).unwrap();
    run_to_dir(&pipeline_config(dir.path()), &out_b).unwrap();

    let mut names_a: Vec<String> = std::fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names_a.sort();
    assert!(names_a.contains(&"report.json".to_string()));
    assert!(names_a.contains(&"rescaled.csv".to_string()));
    assert!(names_a.contains(&"exclusions.csv".to_string()));
    assert!(names_a.iter().any(|n| n.starts_with("grid_raw_global")));
    assert!(names_a.iter().any(|n| n.starts_with("grid_normalized_category")));
    assert!(names_a.iter().any(|n| n.starts_with("correlation_raw_")));
    assert!(names_a.iter().any(|n| n.starts_with("exponent_")));

    for name in &names_a {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "file {name} differs between runs");
    }
    let names_b_count = std::fs::read_dir(&out_b).unwrap().count();
    assert_eq!(names_a.len(), names_b_count);
}

#[test]
fn discipline_level_without_classifications_reports_status() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config();
    config.n_journals = 10;
    config.years = (2000, 2002);
    let (mut records, citations, truth) = generate(&config).unwrap();
    for r in &mut records {
        r.categories.clear();
    }
    write_corpus(dir.path(), &records, &citations, &truth).unwrap();

    let output = run(&pipeline_config(dir.path())).unwrap();
    assert!(output
        .bundle
        .statuses
        .iter()
        .any(|s| s.contains("no classifications")));
    let disc = output.bundle.raw.by_discipline.as_ref().unwrap();
    assert!(disc.cells.is_empty());
}

#[test]
fn undersized_cells_are_insufficient_not_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = SynthConfig {
        n_journals: 3,
        articles_per_cohort: 4,
        years: (2000, 2001),
        ..small_config()
    };
    fixture(dir.path(), &config);
    let output = run(&pipeline_config(dir.path())).unwrap();
    let grid = &output.bundle.raw.global;
    assert_eq!(grid.n_ok, 0);
    assert!(grid.n_insufficient > 0);
    assert!(grid.cells.iter().all(|c| c.status == CellStatus::Insufficient));
}
