//! Six-level analysis of a collection of treebanks.
//!
//! Trees are grouped by language. For every level and direction each language
//! with at least one eligible sentence gets a one-tailed binomial test; the
//! p-values are then Holm-corrected jointly across languages.

mod corpus;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::null_models::{
    expected_baseline, mixture_probability, noncrossing_mixture_probability,
    noncrossing_shape_tail_probability, shape_tail_probability, Direction, EnsembleSpec,
};
use crate::stats::{self, BinomialTestInput};
use crate::tree::{classify, sum_of_distances, LinearizedTree, TreeShape};

pub use corpus::{language_from_path, Corpus, Families};
pub use report::{emit_report, ReportFormat};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("unknown level `{0}`")]
    UnknownLevel(String),
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
    #[error("families file line {line}: {message}")]
    Families { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The six applications of the binomial test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LevelSpec {
    /// Every tree with three vertices.
    N3All,
    /// Every tree with four vertices; star share taken from the language itself.
    N4AllReal,
    /// Every tree with four vertices against uniformly random unlabelled trees.
    N4Unlabelled,
    /// Every tree with four vertices against uniformly random labelled trees.
    N4Labelled,
    N4Star,
    N4Linear,
}

impl LevelSpec {
    pub const ALL: [LevelSpec; 6] = [
        LevelSpec::N3All,
        LevelSpec::N4AllReal,
        LevelSpec::N4Unlabelled,
        LevelSpec::N4Labelled,
        LevelSpec::N4Star,
        LevelSpec::N4Linear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LevelSpec::N3All => "n3_all",
            LevelSpec::N4AllReal => "n4_all_real",
            LevelSpec::N4Unlabelled => "n4_unlabelled",
            LevelSpec::N4Labelled => "n4_labelled",
            LevelSpec::N4Star => "n4_star",
            LevelSpec::N4Linear => "n4_linear",
        }
    }

    pub fn sentence_length(self) -> usize {
        match self {
            LevelSpec::N3All => 3,
            _ => 4,
        }
    }

    pub fn admits(self, tree: &LinearizedTree) -> bool {
        if tree.n() != self.sentence_length() {
            return false;
        }
        match self {
            LevelSpec::N4Star => classify(tree) == TreeShape::Star,
            LevelSpec::N4Linear => classify(tree) == TreeShape::Linear,
            _ => true,
        }
    }

    /// Parses `all` or a comma-separated list of level names.
    pub fn parse_list(s: &str) -> Result<Vec<LevelSpec>, PipelineError> {
        if s.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut levels: Vec<LevelSpec> = s
            .split(',')
            .map(|part| part.trim().parse())
            .collect::<Result<_, _>>()?;
        levels.sort();
        levels.dedup();
        Ok(levels)
    }
}

impl fmt::Display for LevelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LevelSpec {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| PipelineError::UnknownLevel(s.to_string()))
    }
}

impl Serialize for LevelSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// Per-language tallies at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelCounts {
    pub language: String,
    pub level: LevelSpec,
    pub m: u64,
    pub g_above: u64,
    pub g_below: u64,
    pub ties: u64,
    /// Share of stars among the four-vertex trees; only for `n4_all_real`.
    #[serde(serialize_with = "fraction_text::serialize_opt")]
    pub p_star_real: Option<Rational64>,
}

pub fn tally_level(language: &str, trees: &[LinearizedTree], level: LevelSpec) -> LevelCounts {
    tally_level_against(language, trees, level, false)
}

/// [`tally_level`] with the crossing-free baselines when `noncrossing` is set.
pub fn tally_level_against(
    language: &str,
    trees: &[LinearizedTree],
    level: LevelSpec,
    noncrossing: bool,
) -> LevelCounts {
    let mut counts = LevelCounts {
        language: language.to_string(),
        level,
        m: 0,
        g_above: 0,
        g_below: 0,
        ties: 0,
        p_star_real: None,
    };
    let mut stars = 0;
    for tree in trees.iter().filter(|t| level.admits(t)) {
        let shape = classify(tree);
        let baseline = expected_baseline(shape, tree.n(), noncrossing);
        let d = Rational64::from_integer(sum_of_distances(tree) as i64);
        counts.m += 1;
        match d.cmp(&baseline) {
            std::cmp::Ordering::Greater => counts.g_above += 1,
            std::cmp::Ordering::Less => counts.g_below += 1,
            std::cmp::Ordering::Equal => counts.ties += 1,
        }
        if shape == TreeShape::Star {
            stars += 1;
        }
    }
    if level == LevelSpec::N4AllReal && counts.m > 0 {
        counts.p_star_real = Some(Rational64::new(stars, counts.m as i64));
    }
    counts
}

/// Success probability of the test at `level` in direction `dir`.
///
/// `None` when the real-tree level has no four-vertex trees to take the star
/// share from.
pub fn null_probability(
    level: LevelSpec,
    dir: Direction,
    p_star_real: Option<Rational64>,
    noncrossing: bool,
) -> Option<Rational64> {
    let shape = |shape, n| {
        let lookup = if noncrossing {
            noncrossing_shape_tail_probability
        } else {
            shape_tail_probability
        };
        lookup(shape, n, dir).ok()
    };
    let mixture = |ensemble: EnsembleSpec| {
        let lookup = if noncrossing {
            noncrossing_mixture_probability
        } else {
            mixture_probability
        };
        lookup(&ensemble, dir).ok()
    };
    match level {
        LevelSpec::N3All => shape(TreeShape::Both, 3),
        LevelSpec::N4Star => shape(TreeShape::Star, 4),
        LevelSpec::N4Linear => shape(TreeShape::Linear, 4),
        LevelSpec::N4AllReal => mixture(EnsembleSpec::real(p_star_real?)),
        LevelSpec::N4Unlabelled => mixture(EnsembleSpec::uniform_unlabelled()),
        LevelSpec::N4Labelled => mixture(EnsembleSpec::uniform_labelled()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOptions {
    pub alpha: f64,
    /// Use the crossing-free null probabilities (diagnostic only).
    pub noncrossing: bool,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            alpha: stats::DEFAULT_ALPHA,
            noncrossing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub language: String,
    pub family: String,
    pub level: LevelSpec,
    pub direction: Direction,
    pub m: u64,
    pub g: u64,
    #[serde(serialize_with = "fraction_text::serialize_opt")]
    pub p_used: Option<Rational64>,
    pub p_value: f64,
    pub ln_p_value: f64,
    pub p_holm: f64,
    pub ln_p_holm: f64,
    pub significant: bool,
    pub min_sample_size: Option<u64>,
    pub adequately_sampled: bool,
    pub neglog10_holm: f64,
}

impl TestResult {
    fn set_holm(&mut self, ln_p_holm: f64, alpha: f64) {
        self.ln_p_holm = ln_p_holm;
        self.p_holm = ln_p_holm.exp();
        self.significant = self.p_holm <= alpha;
        self.neglog10_holm = neglog10_rounded(ln_p_holm);
    }
}

/// `-log10 p` rounded to one decimal, from `ln p`.
pub fn neglog10_rounded(ln_p: f64) -> f64 {
    let x = -ln_p / std::f64::consts::LN_10;
    (x * 10.0).round() / 10.0 + 0.0
}

/// Raw (uncorrected) test of one language at one level.
pub fn run_tests(counts: &LevelCounts, direction: Direction, opts: &TestOptions) -> TestResult {
    let g = match direction {
        Direction::Above => counts.g_above,
        Direction::Below => counts.g_below,
    };
    let p_used = null_probability(
        counts.level,
        direction,
        counts.p_star_real,
        opts.noncrossing,
    );
    let min_sample_size = p_used.and_then(|p| stats::min_sample_size(p, opts.alpha).ok());
    let ln_p_value = match p_used {
        Some(p) if counts.m > 0 => BinomialTestInput::new(g, counts.m, p, opts.alpha)
            .map(|input| stats::ln_binomial_upper_tail(&input))
            .unwrap_or(0.0),
        _ => 0.0,
    };
    let mut result = TestResult {
        language: counts.language.clone(),
        family: String::new(),
        level: counts.level,
        direction,
        m: counts.m,
        g,
        p_used,
        p_value: ln_p_value.exp(),
        ln_p_value,
        p_holm: 1.0,
        ln_p_holm: 0.0,
        significant: false,
        min_sample_size,
        adequately_sampled: counts.m > 0 && min_sample_size.is_some_and(|s| counts.m >= s),
        neglog10_holm: 0.0,
    };
    result.set_holm(ln_p_value, opts.alpha);
    result
}

/// Which p-values are corrected together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HolmScope {
    /// All languages tested at a level and direction.
    #[default]
    Global,
    /// Languages of the same family only.
    PerFamily,
    /// No correction (each language is its own family of one test).
    Disabled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub levels: Vec<LevelSpec>,
    pub directions: Vec<Direction>,
    pub noncrossing: bool,
    pub holm_scope: HolmScope,
    /// Leave languages with `m < m*` out of the correction; they can never reject.
    pub exclude_undersampled: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            alpha: stats::DEFAULT_ALPHA,
            levels: LevelSpec::ALL.to_vec(),
            directions: Direction::BOTH.to_vec(),
            noncrossing: false,
            holm_scope: HolmScope::Global,
            exclude_undersampled: false,
        }
    }
}

/// Aggregate counts for one level and direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSummary {
    pub level: LevelSpec,
    pub direction: Direction,
    /// Languages with at least one eligible sentence.
    pub l0: usize,
    /// Languages whose sample reaches the minimum size.
    pub l: usize,
    /// Languages rejecting before correction.
    pub f: usize,
    /// Languages rejecting after correction.
    #[serde(rename = "f_H")]
    pub f_h: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub collection: String,
    pub alpha: f64,
    pub summaries: Vec<LevelSummary>,
    pub results: Vec<TestResult>,
    pub exclusions: BTreeMap<String, u64>,
    pub parse_errors: u64,
    pub warnings: Vec<String>,
}

impl Report {
    /// No language contributed a single test.
    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn summary(&self, level: LevelSpec, direction: Direction) -> Option<&LevelSummary> {
        self.summaries
            .iter()
            .find(|s| s.level == level && s.direction == direction)
    }
}

pub fn analyze_collection(
    collection: &str,
    corpus: &Corpus,
    families: &Families,
    cfg: &AnalysisConfig,
) -> Report {
    let opts = TestOptions {
        alpha: cfg.alpha,
        noncrossing: cfg.noncrossing,
    };
    let mut warnings = Vec::new();
    let family_of = |language: &str, warnings: &mut Vec<String>| match families.family_of(language)
    {
        Some(f) => f.to_string(),
        None => {
            warnings.push(format!(
                "no family for language `{language}`; using Unknown"
            ));
            "Unknown".to_string()
        }
    };
    let language_family: BTreeMap<&str, String> = corpus
        .languages()
        .map(|(lang, _)| (lang, family_of(lang, &mut warnings)))
        .collect();

    let mut results = Vec::new();
    let mut summaries = Vec::new();
    for &level in &cfg.levels {
        let counts: Vec<LevelCounts> = corpus
            .languages()
            .map(|(lang, trees)| tally_level_against(lang, trees, level, cfg.noncrossing))
            .filter(|c| c.m > 0)
            .collect();
        for &direction in &cfg.directions {
            let mut block: Vec<TestResult> = counts
                .iter()
                .map(|c| {
                    let mut r = run_tests(c, direction, &opts);
                    r.family = language_family[c.language.as_str()].clone();
                    r
                })
                .collect();
            apply_holm(&mut block, cfg);
            summaries.push(LevelSummary {
                level,
                direction,
                l0: block.len(),
                l: block.iter().filter(|r| r.adequately_sampled).count(),
                f: block.iter().filter(|r| r.p_value <= cfg.alpha).count(),
                f_h: block.iter().filter(|r| r.significant).count(),
            });
            results.extend(block);
        }
    }

    Report {
        collection: collection.to_string(),
        alpha: cfg.alpha,
        summaries,
        results,
        exclusions: corpus
            .exclusions()
            .iter()
            .map(|(reason, &count)| (reason.as_str().to_string(), count))
            .collect(),
        parse_errors: corpus.parse_errors(),
        warnings,
    }
}

fn apply_holm(block: &mut [TestResult], cfg: &AnalysisConfig) {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in block.iter().enumerate() {
        if cfg.exclude_undersampled && !r.adequately_sampled {
            continue;
        }
        let key = match cfg.holm_scope {
            HolmScope::Global => "",
            HolmScope::PerFamily => r.family.as_str(),
            HolmScope::Disabled => r.language.as_str(),
        };
        groups.entry(key).or_default().push(i);
    }
    let assignments: Vec<(usize, f64)> = groups
        .values()
        .flat_map(|members| {
            let raw: Vec<f64> = members.iter().map(|&i| block[i].ln_p_value).collect();
            members
                .iter()
                .copied()
                .zip(stats::holm_adjust_ln(&raw))
                .collect::<Vec<_>>()
        })
        .collect();
    for (i, ln_adj) in assignments {
        block[i].set_holm(ln_adj, cfg.alpha);
    }
}

pub(crate) mod fraction_text {
    use num_rational::Rational64;
    use serde::Serializer;

    pub fn format(p: &Rational64) -> String {
        if *p.denom() == 1 {
            p.numer().to_string()
        } else {
            format!("{}/{}", p.numer(), p.denom())
        }
    }

    pub fn serialize_opt<S: Serializer>(p: &Option<Rational64>, s: S) -> Result<S::Ok, S::Error> {
        match p {
            Some(p) => s.serialize_str(&format(p)),
            None => s.serialize_none(),
        }
    }
}
