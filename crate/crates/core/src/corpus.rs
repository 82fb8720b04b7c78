//! Article/journal/citation data model and desk-scale ingestion: journal-ID
//! merging by identical normalized title, publication-year validity
//! windows, classification attachment, and the sparse per-year citation
//! table.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One SJR-style label: a subject area and a subject category within it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Classification {
    pub area: String,
    pub category: String,
}

impl Classification {
    /// Parse the `area/category` form used in the article files.
    pub fn parse(s: &str) -> Option<Classification> {
        let (area, category) = s.split_once('/')?;
        let area = area.trim();
        let category = category.trim();
        if area.is_empty() || category.is_empty() {
            return None;
        }
        Some(Classification {
            area: area.to_string(),
            category: category.to_string(),
        })
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.area, self.category)
    }
}

/// One article with its journal attribution and classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub article_id: String,
    pub journal_id: String,
    pub journal_title: String,
    /// Publication year y_p.
    pub year: i32,
    /// May be empty: the article is then excluded from per-discipline
    /// analyses but kept in global ones.
    pub categories: Vec<Classification>,
}

/// Sparse map (article, cited year) -> citation count. Absent entries mean
/// zero citations in that year; explicit zero entries are preserved.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CitationTable {
    by_article: BTreeMap<String, BTreeMap<i32, u32>>,
}

impl CitationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, article_id: &str, cited_year: i32, count: u32) {
        *self
            .by_article
            .entry(article_id.to_string())
            .or_default()
            .entry(cited_year)
            .or_insert(0) += count;
    }

    /// Insert an entry even when the count is zero.
    pub fn insert_entry(&mut self, article_id: &str, cited_year: i32, count: u32) {
        self.by_article
            .entry(article_id.to_string())
            .or_default()
            .insert(cited_year, count);
    }

    /// Count for (article, year); absent entries read as zero.
    pub fn get(&self, article_id: &str, cited_year: i32) -> u32 {
        self.by_article
            .get(article_id)
            .and_then(|m| m.get(&cited_year).copied())
            .unwrap_or(0)
    }

    pub fn entry_exists(&self, article_id: &str, cited_year: i32) -> bool {
        self.by_article
            .get(article_id)
            .is_some_and(|m| m.contains_key(&cited_year))
    }

    pub fn years_of(&self, article_id: &str) -> impl Iterator<Item = (i32, u32)> + '_ {
        self.by_article
            .get(article_id)
            .into_iter()
            .flat_map(|m| m.iter().map(|(&y, &c)| (y, c)))
    }

    /// Iterate entries in (article, year) order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, i32, u32)> + '_ {
        self.by_article
            .iter()
            .flat_map(|(a, m)| m.iter().map(move |(&y, &c)| (a.as_str(), y, c)))
    }

    pub fn n_entries(&self) -> usize {
        self.by_article.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_article.is_empty()
    }

    /// Drop entries whose article is not in `keep`; returns how many entries
    /// were removed.
    pub fn retain_articles(&mut self, keep: &BTreeMap<String, ()>) -> usize {
        let before = self.n_entries();
        self.by_article.retain(|a, _| keep.contains_key(a));
        before - self.n_entries()
    }
}

/// All articles published in the same journal and the same year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JournalCohort {
    pub journal_id: String,
    pub year: i32,
    pub members: Vec<String>,
}

impl JournalCohort {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Cohort partition of a record set, with an article -> cohort index.
#[derive(Debug, Clone, Default)]
pub struct CohortSet {
    cohorts: Vec<JournalCohort>,
    by_article: BTreeMap<String, usize>,
}

impl CohortSet {
    pub fn cohorts(&self) -> &[JournalCohort] {
        &self.cohorts
    }

    pub fn cohort_of(&self, article_id: &str) -> Option<&JournalCohort> {
        self.by_article.get(article_id).map(|&i| &self.cohorts[i])
    }

    pub fn len(&self) -> usize {
        self.cohorts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cohorts.is_empty()
    }
}

/// One cohort per (journal, publication year) pair with at least one member.
pub fn cohorts(records: &[ArticleRecord]) -> CohortSet {
    let mut grouped: BTreeMap<(String, i32), Vec<String>> = BTreeMap::new();
    for r in records {
        grouped
            .entry((r.journal_id.clone(), r.year))
            .or_default()
            .push(r.article_id.clone());
    }
    let mut cohorts = Vec::with_capacity(grouped.len());
    let mut by_article = BTreeMap::new();
    for ((journal_id, year), mut members) in grouped {
        members.sort_unstable();
        let idx = cohorts.len();
        for m in &members {
            by_article.insert(m.clone(), idx);
        }
        cohorts.push(JournalCohort {
            journal_id,
            year,
            members,
        });
    }
    CohortSet { cohorts, by_article }
}

/// Ingest counters reported next to every loaded corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub loaded: usize,
    pub invalid_timestamp: usize,
    pub orphan_citation: usize,
    pub merged_journals: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestConfig {
    /// Publication years accepted as valid, inclusive.
    pub window: (i32, i32),
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            window: (1996, 2017),
        }
    }
}

/// A loaded corpus plus its ingest accounting.
#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub records: Vec<ArticleRecord>,
    pub citations: CitationTable,
    pub report: IngestReport,
    /// Line-numbered messages for rows that were skipped as malformed.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ArticleRow {
    article_id: String,
    journal_id: String,
    journal_title: String,
    year: i32,
    #[serde(default)]
    categories: Vec<String>,
}

fn row_to_record(row: ArticleRow, diagnostics: &mut Vec<String>, context: &str) -> ArticleRecord {
    let mut categories = Vec::new();
    for c in &row.categories {
        match Classification::parse(c) {
            Some(cl) => categories.push(cl),
            None => diagnostics.push(format!(
                "{context}: ignoring malformed category {c:?} (want area/category)"
            )),
        }
    }
    categories.sort();
    categories.dedup();
    ArticleRecord {
        article_id: row.article_id,
        journal_id: row.journal_id,
        journal_title: row.journal_title,
        year: row.year,
        categories,
    }
}

/// Load an article file (JSON-lines, or CSV when the extension is `.csv`)
/// and a citation CSV, applying the validity window and referential checks.
///
/// Malformed rows are skipped with a line-numbered diagnostic; only an
/// unreadable file is fatal.
pub fn load_corpus(
    articles_path: &Path,
    citations_path: &Path,
    config: &IngestConfig,
) -> Result<LoadOutcome, CorpusError> {
    let mut report = IngestReport::default();
    let mut diagnostics = Vec::new();
    let mut records: Vec<ArticleRecord> = Vec::new();
    let mut seen: BTreeMap<String, ()> = BTreeMap::new();

    let is_csv = articles_path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let rows = if is_csv {
        read_articles_csv(articles_path, &mut diagnostics)?
    } else {
        read_articles_jsonl(articles_path, &mut diagnostics)?
    };

    for (line, row) in rows {
        let context = format!("{}:{line}", articles_path.display());
        if row.year < config.window.0 || row.year > config.window.1 {
            report.invalid_timestamp += 1;
            continue;
        }
        if seen.contains_key(&row.article_id) {
            diagnostics.push(format!("{context}: duplicate article_id {:?}", row.article_id));
            continue;
        }
        seen.insert(row.article_id.clone(), ());
        records.push(row_to_record(row, &mut diagnostics, &context));
    }
    report.loaded = records.len();

    let year_of: BTreeMap<&str, i32> = records
        .iter()
        .map(|r| (r.article_id.as_str(), r.year))
        .collect();
    let mut citations = CitationTable::new();
    let file = std::fs::File::open(citations_path).map_err(|e| io_err(citations_path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    for (i, result) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                diagnostics.push(format!("{}:{line}: {e}", citations_path.display()));
                continue;
            }
        };
        let (Some(article_id), Some(year_s), Some(count_s)) =
            (record.get(0), record.get(1), record.get(2))
        else {
            diagnostics.push(format!(
                "{}:{line}: expected article_id,cited_year,count",
                citations_path.display()
            ));
            continue;
        };
        let (Ok(cited_year), Ok(count)) = (year_s.trim().parse::<i32>(), count_s.trim().parse::<u32>())
        else {
            diagnostics.push(format!(
                "{}:{line}: non-numeric cited_year or count",
                citations_path.display()
            ));
            continue;
        };
        match year_of.get(article_id) {
            // Citations before the publication year break the table
            // invariant and are treated like orphans.
            Some(&y_p) if cited_year >= y_p => citations.add(article_id, cited_year, count),
            _ => report.orphan_citation += 1,
        }
    }

    Ok(LoadOutcome {
        records,
        citations,
        report,
        diagnostics,
    })
}

type NumberedRows = Vec<(usize, ArticleRow)>;

fn read_articles_jsonl(
    path: &Path,
    diagnostics: &mut Vec<String>,
) -> Result<NumberedRows, CorpusError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| io_err(path, e))?;
        if text.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ArticleRow>(&text) {
            Ok(row) => rows.push((line_no, row)),
            Err(e) => diagnostics.push(format!("{}:{line_no}: {e}", path.display())),
        }
    }
    Ok(rows)
}

fn read_articles_csv(
    path: &Path,
    diagnostics: &mut Vec<String>,
) -> Result<NumberedRows, CorpusError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut rows = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let line_no = i + 2;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                diagnostics.push(format!("{}:{line_no}: {e}", path.display()));
                continue;
            }
        };
        let (Some(article_id), Some(journal_id), Some(journal_title), Some(year_s)) = (
            record.get(0),
            record.get(1),
            record.get(2),
            record.get(3),
        ) else {
            diagnostics.push(format!(
                "{}:{line_no}: expected article_id,journal_id,journal_title,year,categories",
                path.display()
            ));
            continue;
        };
        let Ok(year) = year_s.trim().parse::<i32>() else {
            diagnostics.push(format!("{}:{line_no}: non-numeric year {year_s:?}", path.display()));
            continue;
        };
        let categories = record
            .get(4)
            .unwrap_or("")
            .split('|')
            .filter(|s| !s.trim().is_empty())
            .map(str::to_string)
            .collect();
        rows.push((
            line_no,
            ArticleRow {
                article_id: article_id.to_string(),
                journal_id: journal_id.to_string(),
                journal_title: journal_title.to_string(),
                year,
                categories,
            },
        ));
    }
    Ok(rows)
}

/// Case-fold and collapse internal whitespace; the merge key for journal
/// titles.
pub fn normalize_title(title: &str) -> String {
    title
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Give journals that share an identical normalized title one canonical id
/// (the lexicographically smallest), with classifications unioned across the
/// merged ids. Returns the rewritten records and how many ids were merged
/// away. Idempotent.
pub fn merge_journal_ids(records: Vec<ArticleRecord>) -> (Vec<ArticleRecord>, usize) {
    let mut canonical: BTreeMap<String, String> = BTreeMap::new(); // title -> id
    let mut ids_per_title: BTreeMap<String, BTreeMap<String, ()>> = BTreeMap::new();
    for r in &records {
        let key = normalize_title(&r.journal_title);
        ids_per_title
            .entry(key.clone())
            .or_default()
            .insert(r.journal_id.clone(), ());
        let entry = canonical.entry(key).or_insert_with(|| r.journal_id.clone());
        if r.journal_id < *entry {
            *entry = r.journal_id.clone();
        }
    }
    let merged = ids_per_title.values().map(|ids| ids.len() - 1).sum();

    let mut unioned: BTreeMap<String, Vec<Classification>> = BTreeMap::new(); // title -> cats
    for r in &records {
        let key = normalize_title(&r.journal_title);
        unioned.entry(key).or_default().extend(r.categories.iter().cloned());
    }
    for cats in unioned.values_mut() {
        cats.sort();
        cats.dedup();
    }

    let records = records
        .into_iter()
        .map(|mut r| {
            let key = normalize_title(&r.journal_title);
            r.journal_id = canonical[&key].clone();
            r.categories = unioned[&key].clone();
            r
        })
        .collect();
    (records, merged)
}

/// Drop records whose publication year falls outside the window; returns the
/// survivors and the removal count. Idempotent.
pub fn filter_valid(records: Vec<ArticleRecord>, window: (i32, i32)) -> (Vec<ArticleRecord>, usize) {
    let before = records.len();
    let kept: Vec<ArticleRecord> = records
        .into_iter()
        .filter(|r| r.year >= window.0 && r.year <= window.1)
        .collect();
    let removed = before - kept.len();
    (kept, removed)
}

/// Drop citation entries whose article is not in `records`.
pub fn drop_orphan_entries(citations: &mut CitationTable, records: &[ArticleRecord]) -> usize {
    let keep: BTreeMap<String, ()> = records
        .iter()
        .map(|r| (r.article_id.clone(), ()))
        .collect();
    citations.retain_articles(&keep)
}

/// Classification map file: CSV `journal_id,area,category`, several rows per
/// journal allowed.
pub fn load_classification_map(
    path: &Path,
) -> Result<BTreeMap<String, Vec<Classification>>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut map: BTreeMap<String, Vec<Classification>> = BTreeMap::new();
    for (i, result) in reader.records().enumerate() {
        let line = i + 2;
        let record = result.map_err(|e| CorpusError::Parse {
            file: path.display().to_string(),
            line,
            message: e.to_string(),
        })?;
        let (Some(journal_id), Some(area), Some(category)) =
            (record.get(0), record.get(1), record.get(2))
        else {
            return Err(CorpusError::Parse {
                file: path.display().to_string(),
                line,
                message: "expected journal_id,area,category".to_string(),
            });
        };
        map.entry(journal_id.to_string()).or_default().push(Classification {
            area: area.trim().to_string(),
            category: category.trim().to_string(),
        });
    }
    for cats in map.values_mut() {
        cats.sort();
        cats.dedup();
    }
    Ok(map)
}

/// Replace per-article categories with the journal-level map. Journals
/// absent from the map end up with no categories: excluded from
/// per-discipline analyses, retained in global ones.
pub fn apply_classification_map(
    records: &mut [ArticleRecord],
    map: &BTreeMap<String, Vec<Classification>>,
) {
    for r in records.iter_mut() {
        r.categories = map.get(&r.journal_id).cloned().unwrap_or_default();
    }
}

/// Write articles in the JSON-lines ingestion format.
pub fn write_articles_jsonl(path: &Path, records: &[ArticleRecord]) -> Result<(), CorpusError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| io_err(path, e))?,
    );
    for r in records {
        let row = ArticleRow {
            article_id: r.article_id.clone(),
            journal_id: r.journal_id.clone(),
            journal_title: r.journal_title.clone(),
            year: r.year,
            categories: r.categories.iter().map(Classification::label).collect(),
        };
        let line = serde_json::to_string(&row).expect("article row serializes");
        writeln!(out, "{line}").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// Write the citation table in the CSV ingestion format.
pub fn write_citations_csv(path: &Path, citations: &CitationTable) -> Result<(), CorpusError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| io_err(path, e))?,
    );
    writeln!(out, "article_id,cited_year,count").map_err(|e| io_err(path, e))?;
    for (article, year, count) in citations.iter() {
        writeln!(out, "{article},{year},{count}").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, journal: &str, title: &str, year: i32, cats: &[(&str, &str)]) -> ArticleRecord {
        ArticleRecord {
            article_id: id.to_string(),
            journal_id: journal.to_string(),
            journal_title: title.to_string(),
            year,
            categories: cats
                .iter()
                .map(|(a, c)| Classification {
                    area: a.to_string(),
                    category: c.to_string(),
                })
                .collect(),
        }
    }

    #[test]
    fn merge_unifies_case_folded_titles() {
        let records = vec![
            record("a1", "J2", "Physics Letters A", 2000, &[("Phys", "X")]),
            record("a2", "J1", "physics  letters a", 2001, &[("Phys", "Y")]),
            record("a3", "J3", "Other Journal", 2001, &[]),
        ];
        let (merged, count) = merge_journal_ids(records);
        assert_eq!(count, 1);
        assert_eq!(merged[0].journal_id, "J1");
        assert_eq!(merged[1].journal_id, "J1");
        assert_eq!(merged[2].journal_id, "J3");
        // Categories unioned across the merged ids.
        assert_eq!(merged[0].categories.len(), 2);
        assert_eq!(merged[0].categories, merged[1].categories);
    }

    #[test]
    fn merge_is_idempotent_and_no_op_on_distinct_titles() {
        let records = vec![
            record("a1", "J1", "Alpha", 2000, &[]),
            record("a2", "J2", "Beta", 2000, &[]),
            record("a3", "J3", "Gamma", 2000, &[]),
        ];
        let (once, count) = merge_journal_ids(records.clone());
        assert_eq!(count, 0);
        assert_eq!(once, records);
        let (twice, count2) = merge_journal_ids(once.clone());
        assert_eq!(count2, 0);
        assert_eq!(twice, once);
    }

    #[test]
    fn filter_window_bounds_are_inclusive() {
        let records = vec![
            record("a1", "J1", "T", 1995, &[]),
            record("a2", "J1", "T", 1996, &[]),
            record("a3", "J1", "T", 2016, &[]),
            record("a4", "J1", "T", 2018, &[]),
        ];
        let (kept, removed) = filter_valid(records, (1996, 2017));
        assert_eq!(removed, 2);
        assert_eq!(kept.len(), 2);
        let (again, removed2) = filter_valid(kept.clone(), (1996, 2017));
        assert_eq!(removed2, 0);
        assert_eq!(again, kept);
        let (empty, r0) = filter_valid(Vec::new(), (1996, 2017));
        assert!(empty.is_empty());
        assert_eq!(r0, 0);
    }

    #[test]
    fn cohorts_partition_by_journal_and_year() {
        let mut records = Vec::new();
        for j in 0..5 {
            for y in 2000..2003 {
                for a in 0..10 {
                    records.push(record(
                        &format!("J{j}-{y}-{a}"),
                        &format!("J{j}"),
                        &format!("Journal {j}"),
                        y,
                        &[],
                    ));
                }
            }
        }
        let set = cohorts(&records);
        assert_eq!(set.len(), 15);
        assert!(set.cohorts().iter().all(|c| c.len() == 10));
        let total: usize = set.cohorts().iter().map(JournalCohort::len).sum();
        assert_eq!(total, records.len());
        let c = set.cohort_of("J3-2001-7").unwrap();
        assert_eq!(c.journal_id, "J3");
        assert_eq!(c.year, 2001);
    }

    #[test]
    fn two_articles_same_journal_different_years_split() {
        let records = vec![
            record("a1", "J1", "T", 2000, &[]),
            record("a2", "J1", "T", 2001, &[]),
        ];
        let set = cohorts(&records);
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn citation_table_defaults_to_zero() {
        let mut t = CitationTable::new();
        t.add("a1", 2003, 4);
        t.add("a1", 2003, 1);
        assert_eq!(t.get("a1", 2003), 5);
        assert_eq!(t.get("a1", 2004), 0);
        assert_eq!(t.get("nope", 2003), 0);
        t.insert_entry("a2", 2005, 0);
        assert!(t.entry_exists("a2", 2005));
        assert!(!t.entry_exists("a2", 2006));
        assert_eq!(t.n_entries(), 2);
    }

    #[test]
    fn load_round_trip_with_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let articles = dir.path().join("articles.jsonl");
        let citations = dir.path().join("citations.csv");
        std::fs::write(
            &articles,
            concat!(
                r#"{"article_id":"a1","journal_id":"J1","journal_title":"T One","year":2000,"categories":["Phys/Cond"]}"#,
                "\n",
                r#"{"article_id":"a2","journal_id":"J1","journal_title":"T One","year":2001,"categories":[]}"#,
                "\n",
                r#"{"article_id":"a3","journal_id":"J2","journal_title":"T Two","year":1990,"categories":[]}"#,
                "\n",
                "not json\n",
                r#"{"article_id":"a4","journal_id":"J2","journal_title":"T Two","year":2002,"categories":[]}"#,
                "\n",
            ),
        )
        .unwrap();
        std::fs::write(
            &citations,
            "article_id,cited_year,count\na1,2003,4\na1,2004,2\na2,2001,1\nunknown,2003,9\na2,2000,7\n",
        )
        .unwrap();

        let out = load_corpus(&articles, &citations, &IngestConfig::default()).unwrap();
        assert_eq!(out.report.loaded, 3); // a1, a2, a4
        assert_eq!(out.report.invalid_timestamp, 1); // a3 (1990)
        // unknown article + pre-publication citation for a2
        assert_eq!(out.report.orphan_citation, 2);
        assert_eq!(out.citations.get("a1", 2003), 4);
        assert_eq!(out.citations.get("a1", 2004), 2);
        assert_eq!(out.citations.get("a2", 2001), 1);
        assert_eq!(out.diagnostics.len(), 1);
        assert!(out.diagnostics[0].contains(":4:"), "{:?}", out.diagnostics);
    }

    #[test]
    fn csv_articles_with_piped_categories() {
        let dir = tempfile::tempdir().unwrap();
        let articles = dir.path().join("articles.csv");
        let citations = dir.path().join("citations.csv");
        std::fs::write(
            &articles,
            "article_id,journal_id,journal_title,year,categories\n\
             a1,J1,\"Journal, One\",2000,Phys/Cond|Math/Stat\n\
             a2,J1,\"Journal, One\",2000,\n",
        )
        .unwrap();
        std::fs::write(&citations, "article_id,cited_year,count\n").unwrap();
        let out = load_corpus(&articles, &citations, &IngestConfig::default()).unwrap();
        assert_eq!(out.report.loaded, 2);
        assert_eq!(out.records[0].categories.len(), 2);
        assert_eq!(out.records[0].journal_title, "Journal, One");
        assert!(out.records[1].categories.is_empty());
    }

    #[test]
    fn writers_round_trip_through_load() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            record("a1", "J1", "Journal \"Q\"", 2000, &[("Phys", "Cond")]),
            record("a2", "J2", "Other", 2003, &[]),
        ];
        let mut table = CitationTable::new();
        table.add("a1", 2001, 3);
        table.add("a2", 2003, 1);
        let ap = dir.path().join("articles.jsonl");
        let cp = dir.path().join("citations.csv");
        write_articles_jsonl(&ap, &records).unwrap();
        write_citations_csv(&cp, &table).unwrap();
        let out = load_corpus(&ap, &cp, &IngestConfig::default()).unwrap();
        assert_eq!(out.records, records);
        assert_eq!(out.citations, table);
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn orphan_entries_dropped_with_articles() {
        let records = vec![record("a1", "J1", "T", 2000, &[])];
        let mut table = CitationTable::new();
        table.add("a1", 2001, 3);
        table.add("gone", 2001, 5);
        let dropped = drop_orphan_entries(&mut table, &records);
        assert_eq!(dropped, 1);
        assert_eq!(table.get("a1", 2001), 3);
        assert_eq!(table.get("gone", 2001), 0);
    }

    #[test]
    fn classification_map_overrides_and_clears() {
        let dir = tempfile::tempdir().unwrap();
        let map_path = dir.path().join("map.csv");
        std::fs::write(
            &map_path,
            "journal_id,area,category\nJ1,Physics,Condensed Matter\nJ1,Physics,Statistical\n",
        )
        .unwrap();
        let map = load_classification_map(&map_path).unwrap();
        let mut records = vec![
            record("a1", "J1", "T", 2000, &[("Old", "Old")]),
            record("a2", "J2", "U", 2000, &[("Keep?", "No")]),
        ];
        apply_classification_map(&mut records, &map);
        assert_eq!(records[0].categories.len(), 2);
        assert_eq!(records[0].categories[0].area, "Physics");
        assert!(records[1].categories.is_empty());
    }
}
