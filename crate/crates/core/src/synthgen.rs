//! Synthetic citation-corpus generator: journal prestige drawn in log
//! space, per-article attractiveness that decays toward the journal
//! baseline through an AR(1) latent, exponential aging, and Poisson count
//! realization. The ground truth is returned so tests never re-infer what
//! the generator already knows.

use std::collections::BTreeMap;
use std::path::Path;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    write_articles_jsonl, write_citations_csv, ArticleRecord, CitationTable, Classification,
    CorpusError,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_journals: usize,
    pub articles_per_cohort: usize,
    /// Publication years, inclusive; cited years run to the upper bound.
    pub years: (i32, i32),
    /// Baseline of the per-journal log-mean (mu_0).
    pub base_log_mean: f64,
    /// Std of the per-journal log-mean mu_j around the baseline.
    pub journal_mu_spread: f64,
    /// Within-journal log-normal scale of article attractiveness.
    pub sigma_within: f64,
    /// Year-to-year retention of an article's latent attractiveness, in
    /// [0, 1]: 1 keeps the initial draw forever, 0 redraws every year.
    pub prestige_persistence: f64,
    /// Exponential decay rate of expected citations with age.
    pub aging_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_journals: 50,
            articles_per_cohort: 10,
            years: (2000, 2009),
            base_log_mean: 2.0,
            journal_mu_spread: 0.5,
            sigma_within: 0.5,
            prestige_persistence: 0.5,
            aging_rate: 0.1,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let field = |cond: bool, field: &'static str, reason: &str| {
            if cond {
                Ok(())
            } else {
                Err(SynthError::InvalidField {
                    field,
                    reason: reason.to_string(),
                })
            }
        };
        field(self.n_journals >= 1, "n_journals", "must be >= 1")?;
        field(
            self.articles_per_cohort >= 1,
            "articles_per_cohort",
            "must be >= 1",
        )?;
        field(self.years.0 <= self.years.1, "years", "lower bound exceeds upper")?;
        field(self.base_log_mean.is_finite(), "base_log_mean", "must be finite")?;
        field(
            self.journal_mu_spread.is_finite() && self.journal_mu_spread >= 0.0,
            "journal_mu_spread",
            "must be finite and >= 0",
        )?;
        field(
            self.sigma_within.is_finite() && self.sigma_within >= 0.0,
            "sigma_within",
            "must be finite and >= 0",
        )?;
        field(
            (0.0..=1.0).contains(&self.prestige_persistence),
            "prestige_persistence",
            "must lie in [0, 1]",
        )?;
        field(
            self.aging_rate.is_finite() && self.aging_rate >= 0.0,
            "aging_rate",
            "must be finite and >= 0",
        )?;
        Ok(())
    }
}

/// Latent state of the generator, exported for oracle assertions.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Per-journal log-mean mu_j.
    pub journal_mu: BTreeMap<String, f64>,
    /// Per-article initial attractiveness z_a = exp(mu_j + x_0).
    pub article_attractiveness: BTreeMap<String, f64>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

struct JournalBlock {
    records: Vec<ArticleRecord>,
    counts: Vec<(String, i32, u32)>,
    mu: f64,
    attractiveness: Vec<(String, f64)>,
}

/// Generate a full corpus. Journals use independent sub-seeded streams, so
/// the output is identical whether they are generated in parallel or not.
pub fn generate(
    config: &SynthConfig,
) -> Result<(Vec<ArticleRecord>, CitationTable, GroundTruth), SynthError> {
    config.validate()?;
    let blocks: Vec<JournalBlock> = (0..config.n_journals)
        .into_par_iter()
        .map(|j| generate_journal(config, j))
        .collect();

    let mut records = Vec::new();
    let mut citations = CitationTable::new();
    let mut truth = GroundTruth::default();
    for (j, block) in blocks.into_iter().enumerate() {
        truth.journal_mu.insert(journal_id(j), block.mu);
        for (a, z) in block.attractiveness {
            truth.article_attractiveness.insert(a, z);
        }
        for (a, y, c) in block.counts {
            citations.insert_entry(&a, y, c);
        }
        records.extend(block.records);
    }
    Ok((records, citations, truth))
}

fn journal_id(j: usize) -> String {
    format!("J{j:04}")
}

fn generate_journal(config: &SynthConfig, j: usize) -> JournalBlock {
    let mut rng = StdRng::seed_from_u64(splitmix64(config.seed ^ splitmix64(j as u64 + 1)));
    let unit = Normal::new(0.0, 1.0).expect("unit normal is valid");
    let jid = journal_id(j);
    let mu = config.base_log_mean + config.journal_mu_spread * unit.sample(&mut rng);
    let rho = config.prestige_persistence;
    let innovation = (1.0 - rho * rho).sqrt();

    let mut records = Vec::new();
    let mut counts = Vec::new();
    let mut attractiveness = Vec::new();
    for y_p in config.years.0..=config.years.1 {
        for k in 0..config.articles_per_cohort {
            let article = format!("{jid}-{y_p}-{k:04}");
            // Stationary AR(1) deviation with marginal N(0, sigma_within^2).
            let mut dev = config.sigma_within * unit.sample(&mut rng);
            attractiveness.push((article.clone(), (mu + dev).exp()));
            for y in y_p..=config.years.1 {
                if y > y_p {
                    dev = rho * dev
                        + innovation * config.sigma_within * unit.sample(&mut rng);
                }
                let expected =
                    (mu + dev - config.aging_rate * f64::from(y - y_p)).exp();
                let count = Poisson::new(expected)
                    .map(|p| p.sample(&mut rng) as u32)
                    .unwrap_or(0);
                if count > 0 {
                    counts.push((article.clone(), y, count));
                }
            }
            records.push(ArticleRecord {
                article_id: article,
                journal_id: jid.clone(),
                journal_title: format!("Synthetic Journal {j}"),
                year: y_p,
                categories: vec![Classification {
                    area: format!("area-{}", j % 2),
                    category: format!("cat-{}", j % 3),
                }],
            });
        }
    }
    JournalBlock {
        records,
        counts,
        mu,
        attractiveness,
    }
}

/// Write the corpus in the ingestion formats plus the ground-truth JSON.
pub fn write_corpus(
    dir: &Path,
    records: &[ArticleRecord],
    citations: &CitationTable,
    truth: &GroundTruth,
) -> Result<(), SynthError> {
    std::fs::create_dir_all(dir).map_err(|e| SynthError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    write_articles_jsonl(&dir.join("articles.jsonl"), records)?;
    write_citations_csv(&dir.join("citations.csv"), citations)?;
    let truth_path = dir.join("ground_truth.json");
    let json = serde_json::to_string_pretty(truth).expect("ground truth serializes");
    std::fs::write(&truth_path, json).map_err(|e| SynthError::Io {
        path: truth_path.display().to_string(),
        source: e,
    })?;
    Ok(())
}
