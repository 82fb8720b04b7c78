//! Analysis surfaces over a loaded corpus: per-(publication year, cited
//! year[, discipline]) best-fit grids with the forced-PLE exponent, winner
//! tallies across disciplines, exponent summaries by citation age,
//! per-journal mean citation distributions, and cited-year Pearson
//! correlation ("memory") matrices.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{ArticleRecord, CitationTable};
use crate::distributions::{ModelFamily, SampleVector};
use crate::fitting::{select_best, FitError, FitOptions, XMinPolicy};
use crate::rescale::RescaledTable;

/// Read access to a per-(article, cited-year) value table.
pub trait ValueLookup: Sync {
    fn value(&self, article_id: &str, year: i32) -> f64;
}

impl ValueLookup for CitationTable {
    fn value(&self, article_id: &str, year: i32) -> f64 {
        f64::from(self.get(article_id, year))
    }
}

impl ValueLookup for RescaledTable {
    fn value(&self, article_id: &str, year: i32) -> f64 {
        self.get(article_id, year)
    }
}

/// Discipline granularity of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisciplineLevel {
    None,
    Area,
    Category,
}

impl DisciplineLevel {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Some(DisciplineLevel::None),
            "area" => Some(DisciplineLevel::Area),
            "category" => Some(DisciplineLevel::Category),
            _ => None,
        }
    }
}

/// One discipline label: a subject area, or an `area/category` pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Discipline {
    Area(String),
    Category(String),
}

impl Discipline {
    pub fn label(&self) -> &str {
        match self {
            Discipline::Area(s) | Discipline::Category(s) => s,
        }
    }

    pub fn matches(&self, record: &ArticleRecord) -> bool {
        match self {
            Discipline::Area(a) => record.categories.iter().any(|c| &c.area == a),
            Discipline::Category(l) => record.categories.iter().any(|c| &c.label() == l),
        }
    }
}

/// All discipline labels present in the records at the given level, sorted.
pub fn disciplines(records: &[ArticleRecord], level: DisciplineLevel) -> Vec<Discipline> {
    let mut labels: Vec<Discipline> = match level {
        DisciplineLevel::None => return Vec::new(),
        DisciplineLevel::Area => records
            .iter()
            .flat_map(|r| r.categories.iter().map(|c| Discipline::Area(c.area.clone())))
            .collect(),
        DisciplineLevel::Category => records
            .iter()
            .flat_map(|r| r.categories.iter().map(|c| Discipline::Category(c.label())))
            .collect(),
    };
    labels.sort();
    labels.dedup();
    labels
}

/// The positive values of one (publication year, cited year[, discipline])
/// cell. Zeros are omitted: the fitted models live on x >= x_min > 0. An
/// empty result is a status, not an error.
pub fn slice(
    values: &impl ValueLookup,
    records: &[ArticleRecord],
    y_p: i32,
    y: i32,
    discipline: Option<&Discipline>,
) -> SampleVector {
    if y < y_p {
        return SampleVector::default();
    }
    let collected: Vec<f64> = records
        .iter()
        .filter(|r| r.year == y_p && discipline.is_none_or(|d| d.matches(r)))
        .map(|r| values.value(&r.article_id, y))
        .filter(|&v| v > 0.0)
        .collect();
    SampleVector::new(collected).expect("positive filter guarantees validity")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Insufficient,
    Failed,
}

/// One grid cell: the winning family and forced-PLE exponent where the fit
/// succeeded, a status otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct GridCell {
    pub y_p: i32,
    pub y: i32,
    pub discipline: Option<String>,
    pub status: CellStatus,
    pub winner: Option<ModelFamily>,
    pub ple_alpha: Option<f64>,
    pub n_tail: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestFitGrid {
    pub level: DisciplineLevel,
    pub cells: Vec<GridCell>,
}

/// Options shared by every cell fit of a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridOptions {
    pub fit: FitOptions,
    pub x_min: XMinPolicy,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            fit: FitOptions::default(),
            x_min: XMinPolicy::Scan,
        }
    }
}

/// Fit every cell of the (y_p, y[, discipline]) lattice.
///
/// `cited_years` bounds the cited-year axis; publication years come from the
/// records. Cell failures become statuses, never errors.
pub fn best_fit_grid(
    values: &impl ValueLookup,
    records: &[ArticleRecord],
    cited_years: (i32, i32),
    level: DisciplineLevel,
    opts: &GridOptions,
) -> BestFitGrid {
    let mut pub_years: Vec<i32> = records.iter().map(|r| r.year).collect();
    pub_years.sort_unstable();
    pub_years.dedup();

    let labels = disciplines(records, level);
    let mut tasks: Vec<(i32, i32, Option<&Discipline>)> = Vec::new();
    for &y_p in &pub_years {
        for y in y_p.max(cited_years.0)..=cited_years.1 {
            if level == DisciplineLevel::None {
                tasks.push((y_p, y, None));
            } else {
                for d in &labels {
                    tasks.push((y_p, y, Some(d)));
                }
            }
        }
    }

    let cells: Vec<GridCell> = tasks
        .par_iter()
        .map(|&(y_p, y, discipline)| {
            let sample = slice(values, records, y_p, y, discipline);
            let discipline_label = discipline.map(|d| d.label().to_string());
            if sample.len() < opts.fit.tail_min {
                return GridCell {
                    y_p,
                    y,
                    discipline: discipline_label,
                    status: CellStatus::Insufficient,
                    winner: None,
                    ple_alpha: None,
                    n_tail: sample.len(),
                };
            }
            match select_best(&sample, opts.x_min, &opts.fit) {
                Ok(sel) => GridCell {
                    y_p,
                    y,
                    discipline: discipline_label,
                    status: CellStatus::Ok,
                    winner: Some(sel.best),
                    ple_alpha: Some(sel.ple_alpha),
                    n_tail: sel.fit(sel.best).n_tail,
                },
                Err(FitError::InsufficientTail { n_tail, .. }) => GridCell {
                    y_p,
                    y,
                    discipline: discipline_label,
                    status: CellStatus::Insufficient,
                    winner: None,
                    ple_alpha: None,
                    n_tail,
                },
                Err(_) => GridCell {
                    y_p,
                    y,
                    discipline: discipline_label,
                    status: CellStatus::Failed,
                    winner: None,
                    ple_alpha: None,
                    n_tail: sample.len(),
                },
            }
        })
        .collect();

    BestFitGrid { level, cells }
}

impl BestFitGrid {
    pub fn ok_cells(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(|c| c.status == CellStatus::Ok)
    }

    /// Winner counts per (y_p, y) across disciplines.
    pub fn winner_tally(&self) -> BTreeMap<(i32, i32), BTreeMap<ModelFamily, usize>> {
        let mut tally: BTreeMap<(i32, i32), BTreeMap<ModelFamily, usize>> = BTreeMap::new();
        for cell in self.ok_cells() {
            if let Some(winner) = cell.winner {
                *tally
                    .entry((cell.y_p, cell.y))
                    .or_default()
                    .entry(winner)
                    .or_insert(0) += 1;
            }
        }
        tally
    }

    /// Fraction of ok cells won by each family.
    pub fn winner_shares(&self) -> BTreeMap<ModelFamily, f64> {
        let mut counts: BTreeMap<ModelFamily, usize> = BTreeMap::new();
        let mut total = 0usize;
        for cell in self.ok_cells() {
            if let Some(winner) = cell.winner {
                *counts.entry(winner).or_insert(0) += 1;
                total += 1;
            }
        }
        counts
            .into_iter()
            .map(|(f, c)| (f, c as f64 / total.max(1) as f64))
            .collect()
    }
}

/// Mean and population standard deviation of the forced-PLE exponent over
/// all ok cells sharing one citation age d = y - y_p.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OffsetSummary {
    pub offset: i32,
    pub mean_alpha: f64,
    pub std_alpha: f64,
    pub n_cells: usize,
}

pub fn exponent_summary(grid: &BestFitGrid) -> Vec<OffsetSummary> {
    let mut by_offset: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for cell in grid.ok_cells() {
        if let Some(alpha) = cell.ple_alpha {
            by_offset.entry(cell.y - cell.y_p).or_default().push(alpha);
        }
    }
    by_offset
        .into_iter()
        .map(|(offset, alphas)| {
            let n = alphas.len() as f64;
            let mean = alphas.iter().sum::<f64>() / n;
            let var = alphas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
            OffsetSummary {
                offset,
                mean_alpha: mean,
                std_alpha: var.sqrt(),
                n_cells: alphas.len(),
            }
        })
        .collect()
}

/// One journal's mean count over its present (article, cited-year) cells.
#[derive(Debug, Clone, Serialize)]
pub struct JournalMean {
    pub journal_id: String,
    pub mean: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

/// Per-journal average yearly citations with PDF and CCDF series.
#[derive(Debug, Clone, Serialize, Default)]
pub struct JournalMeanDistribution {
    pub means: Vec<JournalMean>,
    pub pdf: Vec<HistogramBin>,
    /// (x, P(X >= x)) at each distinct mean.
    pub ccdf: Vec<(f64, f64)>,
}

pub fn journal_mean_distribution(
    citations: &CitationTable,
    records: &[ArticleRecord],
) -> JournalMeanDistribution {
    let mut per_journal: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in records {
        for (_, count) in citations.years_of(&r.article_id) {
            let entry = per_journal.entry(r.journal_id.as_str()).or_insert((0.0, 0));
            entry.0 += f64::from(count);
            entry.1 += 1;
        }
    }
    let means: Vec<JournalMean> = per_journal
        .into_iter()
        .map(|(j, (sum, n))| JournalMean {
            journal_id: j.to_string(),
            mean: sum / n as f64,
            n_cells: n,
        })
        .collect();

    let positive: Vec<f64> = means.iter().map(|m| m.mean).filter(|&m| m > 0.0).collect();
    let pdf = log_binned_pdf(&positive, 10);
    let ccdf = empirical_ccdf(&positive);
    JournalMeanDistribution { means, pdf, ccdf }
}

/// Log-spaced histogram normalized to unit integral.
fn log_binned_pdf(values: &[f64], bins_per_decade: usize) -> Vec<HistogramBin> {
    if values.is_empty() {
        return Vec::new();
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0f64, f64::max);
    if lo == hi {
        return vec![HistogramBin {
            lo,
            hi,
            density: f64::INFINITY,
        }];
    }
    let decades = (hi / lo).log10();
    let n_bins = ((decades * bins_per_decade as f64).ceil() as usize).max(1);
    let ratio = (hi / lo).powf(1.0 / n_bins as f64);
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let idx = ((v / lo).log10() / ratio.log10()).floor() as usize;
        counts[idx.min(n_bins - 1)] += 1;
    }
    let total = values.len() as f64;
    (0..n_bins)
        .map(|i| {
            let b_lo = lo * ratio.powi(i as i32);
            let b_hi = lo * ratio.powi(i as i32 + 1);
            HistogramBin {
                lo: b_lo,
                hi: b_hi,
                density: counts[i] as f64 / (total * (b_hi - b_lo)),
            }
        })
        .collect()
}

/// P(X >= x) evaluated at each distinct value.
fn empirical_ccdf(values: &[f64]) -> Vec<(f64, f64)> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let at_least = sorted.len() - i;
        out.push((x, at_least as f64 / n));
        while i < sorted.len() && sorted[i] == x {
            i += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrMode {
    Raw,
    Normalized,
}

/// Pearson correlations of one publication-year cohort's values between
/// every pair of cited years.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationMatrix {
    pub y_p: i32,
    pub mode: CorrMode,
    pub years: Vec<i32>,
    /// r[i][j] for (years[i], years[j]); None where undefined.
    pub r: Vec<Vec<Option<f64>>>,
    pub n_pairs: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CorrOptions {
    /// Cells with fewer article pairs than this are undefined.
    pub min_pairs: usize,
    /// Keep only articles cited at least once (raw counts) in either of the
    /// two years; guards against zero-inflation dominating the coefficient.
    pub require_citation: bool,
}

impl Default for CorrOptions {
    fn default() -> Self {
        CorrOptions {
            min_pairs: 10,
            require_citation: true,
        }
    }
}

/// Correlate raw counts, or normalized scores with the article filter still
/// applied on raw counts so both modes cover identical article sets.
pub fn correlation_matrix(
    citations: &CitationTable,
    scores: Option<&RescaledTable>,
    records: &[ArticleRecord],
    y_p: i32,
    cited_years: (i32, i32),
    opts: &CorrOptions,
) -> CorrelationMatrix {
    let mode = if scores.is_some() {
        CorrMode::Normalized
    } else {
        CorrMode::Raw
    };
    let mut articles: Vec<&str> = records
        .iter()
        .filter(|r| r.year == y_p)
        .map(|r| r.article_id.as_str())
        .collect();
    articles.sort_unstable();

    let years: Vec<i32> = (y_p.max(cited_years.0)..=cited_years.1).collect();
    let k = years.len();
    let mut r = vec![vec![None; k]; k];
    let mut n_pairs = vec![vec![0usize; k]; k];

    for i in 0..k {
        for j in i..k {
            let (y1, y2) = (years[i], years[j]);
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &a in &articles {
                if opts.require_citation
                    && citations.get(a, y1) == 0
                    && citations.get(a, y2) == 0
                {
                    continue;
                }
                match scores {
                    Some(t) => {
                        xs.push(t.value(a, y1));
                        ys.push(t.value(a, y2));
                    }
                    None => {
                        xs.push(citations.value(a, y1));
                        ys.push(citations.value(a, y2));
                    }
                }
            }
            n_pairs[i][j] = xs.len();
            n_pairs[j][i] = xs.len();
            if xs.len() >= opts.min_pairs {
                let coeff = pearson(&xs, &ys);
                r[i][j] = coeff;
                r[j][i] = coeff;
            }
        }
    }
    CorrelationMatrix {
        y_p,
        mode,
        years,
        r,
        n_pairs,
    }
}

/// Pearson coefficient; None when either variance vanishes.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    let denom = (sxx * syy).sqrt();
    if denom <= 0.0 || !denom.is_finite() {
        return None;
    }
    Some((sxy / denom).clamp(-1.0, 1.0))
}
