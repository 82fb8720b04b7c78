//! Machine-readable report bundle: one JSON document plus per-figure CSV
//! series, written with a fixed ordering so identical inputs produce
//! byte-identical output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{
    BestFitGrid, CorrelationMatrix, DisciplineLevel, JournalMeanDistribution, OffsetSummary,
};
use crate::corpus::IngestReport;
use crate::distributions::ModelFamily;
use crate::rescale::{RescaleAudit, RescaledTable};

/// Winner counts for one (publication year, cited year) pair across
/// disciplines.
#[derive(Debug, Clone, Serialize)]
pub struct TallyRow {
    pub y_p: i32,
    pub y: i32,
    pub counts: BTreeMap<ModelFamily, usize>,
}

/// A best-fit grid prepared for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub level: DisciplineLevel,
    pub n_ok: usize,
    pub n_insufficient: usize,
    pub n_failed: usize,
    /// Fraction of ok cells won by each family.
    pub winner_shares: BTreeMap<ModelFamily, f64>,
    pub tally: Vec<TallyRow>,
    pub cells: Vec<crate::analysis::GridCell>,
}

impl GridReport {
    pub fn from_grid(grid: BestFitGrid) -> Self {
        use crate::analysis::CellStatus;
        let n_ok = grid.cells.iter().filter(|c| c.status == CellStatus::Ok).count();
        let n_insufficient = grid
            .cells
            .iter()
            .filter(|c| c.status == CellStatus::Insufficient)
            .count();
        let n_failed = grid
            .cells
            .iter()
            .filter(|c| c.status == CellStatus::Failed)
            .count();
        let winner_shares = grid.winner_shares();
        let tally = grid
            .winner_tally()
            .into_iter()
            .map(|((y_p, y), counts)| TallyRow { y_p, y, counts })
            .collect();
        GridReport {
            level: grid.level,
            n_ok,
            n_insufficient,
            n_failed,
            winner_shares,
            tally,
            cells: grid.cells,
        }
    }
}

/// Grids, exponent summaries and correlation matrices for one value table
/// (raw counts or normalized scores).
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisSection {
    pub global: GridReport,
    pub by_discipline: Option<GridReport>,
    pub exponent_summary_global: Vec<OffsetSummary>,
    pub exponent_summary_discipline: Option<Vec<OffsetSummary>>,
    pub correlations: Vec<CorrelationMatrix>,
}

/// The full pipeline output.
#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub version: String,
    /// Echo of the exact configuration that produced this bundle.
    pub config: serde_json::Value,
    pub ingest: IngestReport,
    pub diagnostics: Vec<String>,
    pub statuses: Vec<String>,
    pub journal_means: JournalMeanDistribution,
    pub raw: AnalysisSection,
    pub rescale_audit: Option<RescaleAudit>,
    pub normalized: Option<AnalysisSection>,
}

fn create(path: &Path) -> std::io::Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

fn grid_suffix(level: DisciplineLevel) -> &'static str {
    match level {
        DisciplineLevel::None => "global",
        DisciplineLevel::Area => "area",
        DisciplineLevel::Category => "category",
    }
}

fn write_grid_csv(dir: &Path, name: &str, grid: &GridReport) -> std::io::Result<()> {
    let mut out = create(&dir.join(format!("grid_{name}.csv")))?;
    writeln!(out, "y_p,y,discipline,status,winner,ple_alpha,n_tail")?;
    for c in &grid.cells {
        let discipline = c.discipline.as_deref().unwrap_or("");
        let status = match c.status {
            crate::analysis::CellStatus::Ok => "ok",
            crate::analysis::CellStatus::Insufficient => "insufficient",
            crate::analysis::CellStatus::Failed => "failed",
        };
        let winner = c.winner.map(|w| w.label()).unwrap_or("");
        let alpha = c.ple_alpha.map(|a| a.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.y_p, c.y, discipline, status, winner, alpha, c.n_tail
        )?;
    }
    let mut out = create(&dir.join(format!("tally_{name}.csv")))?;
    writeln!(out, "y_p,y,family,count")?;
    for row in &grid.tally {
        for (family, count) in &row.counts {
            writeln!(out, "{},{},{},{}", row.y_p, row.y, family.label(), count)?;
        }
    }
    Ok(())
}

fn write_exponent_csv(dir: &Path, name: &str, summary: &[OffsetSummary]) -> std::io::Result<()> {
    let mut out = create(&dir.join(format!("exponent_{name}.csv")))?;
    writeln!(out, "offset,mean_alpha,std_alpha,n_cells")?;
    for s in summary {
        writeln!(out, "{},{},{},{}", s.offset, s.mean_alpha, s.std_alpha, s.n_cells)?;
    }
    Ok(())
}

fn write_correlation_csv(dir: &Path, m: &CorrelationMatrix) -> std::io::Result<()> {
    let mode = match m.mode {
        crate::analysis::CorrMode::Raw => "raw",
        crate::analysis::CorrMode::Normalized => "normalized",
    };
    let mut out = create(&dir.join(format!("correlation_{mode}_{}.csv", m.y_p)))?;
    let header: Vec<String> = m.years.iter().map(|y| y.to_string()).collect();
    writeln!(out, "y,{}", header.join(","))?;
    for (i, year) in m.years.iter().enumerate() {
        let row: Vec<String> = m.r[i]
            .iter()
            .map(|v| v.map(|r| r.to_string()).unwrap_or_default())
            .collect();
        writeln!(out, "{},{}", year, row.join(","))?;
    }
    let mut out = create(&dir.join(format!("correlation_{mode}_{}_pairs.csv", m.y_p)))?;
    writeln!(out, "y,{}", header.join(","))?;
    for (i, year) in m.years.iter().enumerate() {
        let row: Vec<String> = m.n_pairs[i].iter().map(|n| n.to_string()).collect();
        writeln!(out, "{},{}", year, row.join(","))?;
    }
    Ok(())
}

fn write_section_csvs(dir: &Path, prefix: &str, section: &AnalysisSection) -> std::io::Result<()> {
    write_grid_csv(dir, &format!("{prefix}_global"), &section.global)?;
    write_exponent_csv(dir, &format!("{prefix}_global"), &section.exponent_summary_global)?;
    if let Some(grid) = &section.by_discipline {
        let suffix = grid_suffix(grid.level);
        write_grid_csv(dir, &format!("{prefix}_{suffix}"), grid)?;
        if let Some(summary) = &section.exponent_summary_discipline {
            write_exponent_csv(dir, &format!("{prefix}_{suffix}"), summary)?;
        }
    }
    for m in &section.correlations {
        write_correlation_csv(dir, m)?;
    }
    Ok(())
}

/// Write `report.json` and every CSV series into `dir`.
pub fn write_bundle(
    dir: &Path,
    bundle: &ReportBundle,
    rescaled: Option<&RescaledTable>,
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(bundle).expect("report bundle serializes");
    std::fs::write(dir.join("report.json"), json + "\n")?;
    let ingest = serde_json::to_string_pretty(&bundle.ingest).expect("ingest report serializes");
    std::fs::write(dir.join("ingest_report.json"), ingest + "\n")?;

    let mut out = create(&dir.join("journal_means.csv"))?;
    writeln!(out, "journal_id,mean,n_cells")?;
    for m in &bundle.journal_means.means {
        writeln!(out, "{},{},{}", m.journal_id, m.mean, m.n_cells)?;
    }
    let mut out = create(&dir.join("journal_mean_pdf.csv"))?;
    writeln!(out, "bin_lo,bin_hi,density")?;
    for b in &bundle.journal_means.pdf {
        writeln!(out, "{},{},{}", b.lo, b.hi, b.density)?;
    }
    let mut out = create(&dir.join("journal_mean_ccdf.csv"))?;
    writeln!(out, "x,ccdf")?;
    for (x, p) in &bundle.journal_means.ccdf {
        writeln!(out, "{x},{p}")?;
    }

    write_section_csvs(dir, "raw", &bundle.raw)?;
    if let Some(section) = &bundle.normalized {
        write_section_csvs(dir, "normalized", section)?;
    }
    if let Some(table) = rescaled {
        crate::rescale::write_rescaled_csv(&dir.join("rescaled.csv"), table)
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        crate::rescale::write_exclusions_csv(&dir.join("exclusions.csv"), table)
            .map_err(|e| std::io::Error::other(e.to_string()))?;
    }
    Ok(())
}
