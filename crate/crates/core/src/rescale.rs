//! Journal- and time-normalized citation scores: each count is divided by
//! the mean count of its journal-and-publication-year cohort in the same
//! cited year, zeros included in the mean. Cohort-years with zero mean have
//! no defined score and are routed to an exclusion list instead.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{CitationTable, CohortSet, CorpusError, JournalCohort};

#[derive(Debug, Error)]
pub enum RescaleError {
    #[error("article {0} has a citation entry but no cohort")]
    MissingCohort(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Sparse map (article, cited year) -> normalized score, plus the pairs
/// whose score is undefined because the whole cohort went uncited.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RescaledTable {
    by_article: std::collections::BTreeMap<String, std::collections::BTreeMap<i32, f64>>,
    excluded: BTreeSet<(String, i32)>,
}

impl RescaledTable {
    /// Score for (article, year); absent entries read as zero.
    pub fn get(&self, article_id: &str, cited_year: i32) -> f64 {
        self.by_article
            .get(article_id)
            .and_then(|m| m.get(&cited_year).copied())
            .unwrap_or(0.0)
    }

    pub fn entry_exists(&self, article_id: &str, cited_year: i32) -> bool {
        self.by_article
            .get(article_id)
            .is_some_and(|m| m.contains_key(&cited_year))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i32, f64)> + '_ {
        self.by_article
            .iter()
            .flat_map(|(a, m)| m.iter().map(move |(&y, &s)| (a.as_str(), y, s)))
    }

    pub fn excluded(&self) -> &BTreeSet<(String, i32)> {
        &self.excluded
    }

    pub fn n_entries(&self) -> usize {
        self.by_article.values().map(std::collections::BTreeMap::len).sum()
    }
}

/// Audit counters emitted next to every rescaled table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RescaleAudit {
    /// (article, year) pairs without a defined score.
    pub excluded_pairs: usize,
    /// Cohorts of size one: their scores are always 1 and carry no signal,
    /// but they are kept.
    pub singleton_cohorts: usize,
}

/// Mean citation count of a cohort in cited year `y`, zeros included for
/// members without an entry.
pub fn cohort_mean(cohort: &JournalCohort, y: i32, citations: &CitationTable) -> f64 {
    let sum: f64 = cohort
        .members
        .iter()
        .map(|a| f64::from(citations.get(a, y)))
        .sum();
    sum / cohort.len() as f64
}

/// Normalize every citation entry by its cohort-year mean.
///
/// Entries in cohort-years whose mean is zero go to the exclusion list and
/// are never emitted as scores. Errors if a cited article has no cohort.
pub fn normalize(
    citations: &CitationTable,
    cohorts: &CohortSet,
) -> Result<(RescaledTable, RescaleAudit), RescaleError> {
    // Validate coverage first so the error does not depend on cohort order.
    for (article, _, _) in citations.iter() {
        if cohorts.cohort_of(article).is_none() {
            return Err(RescaleError::MissingCohort(article.to_string()));
        }
    }

    let mut table = RescaledTable::default();
    let mut audit = RescaleAudit {
        singleton_cohorts: cohorts.cohorts().iter().filter(|c| c.len() == 1).count(),
        ..RescaleAudit::default()
    };

    for cohort in cohorts.cohorts() {
        // Years in which any member has an entry (zero entries included).
        let mut years: BTreeSet<i32> = BTreeSet::new();
        for member in &cohort.members {
            years.extend(citations.years_of(member).map(|(y, _)| y));
        }
        for &y in &years {
            let mean = cohort_mean(cohort, y, citations);
            for member in &cohort.members {
                if !citations.entry_exists(member, y) {
                    continue;
                }
                if mean > 0.0 {
                    let score = f64::from(citations.get(member, y)) / mean;
                    table
                        .by_article
                        .entry(member.clone())
                        .or_default()
                        .insert(y, score);
                } else {
                    table.excluded.insert((member.clone(), y));
                }
            }
        }
    }
    audit.excluded_pairs = table.excluded.len();
    Ok((table, audit))
}

/// Export scores as CSV `article_id,cited_year,score`.
pub fn write_rescaled_csv(path: &Path, table: &RescaledTable) -> Result<(), CorpusError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| {
        CorpusError::Io {
            path: path.display().to_string(),
            source: e,
        }
    })?);
    let werr = |e: std::io::Error| CorpusError::Io {
        path: path.display().to_string(),
        source: e,
    };
    writeln!(out, "article_id,cited_year,score").map_err(werr)?;
    for (article, year, score) in table.iter() {
        writeln!(out, "{article},{year},{score}").map_err(werr)?;
    }
    Ok(())
}

/// Export the undefined pairs as CSV `article_id,cited_year`.
pub fn write_exclusions_csv(path: &Path, table: &RescaledTable) -> Result<(), CorpusError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| {
        CorpusError::Io {
            path: path.display().to_string(),
            source: e,
        }
    })?);
    let werr = |e: std::io::Error| CorpusError::Io {
        path: path.display().to_string(),
        source: e,
    };
    writeln!(out, "article_id,cited_year").map_err(werr)?;
    for (article, year) in table.excluded() {
        writeln!(out, "{article},{year}").map_err(werr)?;
    }
    Ok(())
}
