//! End-to-end runs: extraction, filters, validation with recovery, schedule
//! derivation and the soundness check, plus the artifacts a run writes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, ScheduleError};
use crate::filter::{
    filter_dependency_free, filter_nlp, rank_string_values, DobjMode, FilterReport, NlpConfig,
    PosLexicon, StringFrequencyReport, VerbTaxonomy,
};
use crate::graph::{
    extract_original_order, extract_sub_use, to_dot, to_json, DependencyGraph, EdgeOrigin,
    EdgeStatus, SubUseOptions,
};
use crate::manifest::AppManifest;
use crate::schedule::{derive_schedules, run_parallel, speedup_metrics, ScheduleSet, Speedup};
use crate::sim::Simulator;
use crate::suite::TestSuite;
use crate::validate::{events_to_jsonl, run_full_validation, ValidationOutcome, ValidationStats};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extraction {
    OriginalOrder,
    #[default]
    StringAnalysis,
}

impl Extraction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Extraction::OriginalOrder => "original-order",
            Extraction::StringAnalysis => "string-analysis",
        }
    }
}

impl FromStr for Extraction {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original-order" => Ok(Extraction::OriginalOrder),
            "string-analysis" => Ok(Extraction::StringAnalysis),
            other => Err(PipelineError::Config(format!(
                "unknown extraction `{other}` (expected original-order or string-analysis)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    DepFree,
    Nlp(NlpConfig),
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::DepFree => "dep-free",
            FilterKind::Nlp(NlpConfig::Verb) => "nlp-verb",
            FilterKind::Nlp(NlpConfig::Dobj) => "nlp-dobj",
            FilterKind::Nlp(NlpConfig::Noun) => "nlp-noun",
        })
    }
}

impl FromStr for FilterKind {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dep-free" => Ok(FilterKind::DepFree),
            "nlp-verb" => Ok(FilterKind::Nlp(NlpConfig::Verb)),
            "nlp-dobj" => Ok(FilterKind::Nlp(NlpConfig::Dobj)),
            "nlp-noun" => Ok(FilterKind::Nlp(NlpConfig::Noun)),
            other => Err(PipelineError::Config(format!(
                "unknown filter `{other}` (expected dep-free, nlp-verb, nlp-dobj or nlp-noun)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PipelineConfig {
    pub extraction: Extraction,
    /// Treat locator text as used values during string analysis.
    pub include_locators: bool,
    /// Applied in order.
    pub filters: Vec<FilterKind>,
    pub dobj_mode: DobjMode,
    /// Values used by every test are filtered without confirmation.
    pub auto_universal: bool,
}

impl PipelineConfig {
    pub fn check(&self) -> Result<(), PipelineError> {
        let nlp = self
            .filters
            .iter()
            .filter(|f| matches!(f, FilterKind::Nlp(_)))
            .count();
        if nlp > 1 {
            return Err(PipelineError::Config(
                "at most one nlp-* filter per run".into(),
            ));
        }
        let unique: BTreeSet<String> = self.filters.iter().map(|f| f.to_string()).collect();
        if unique.len() != self.filters.len() {
            return Err(PipelineError::Config("filter listed twice".into()));
        }
        Ok(())
    }

    pub fn has_dep_free(&self) -> bool {
        self.filters.contains(&FilterKind::DepFree)
    }

    /// Label used in summary rows, e.g. `NLP-Noun (String Analysis)`.
    pub fn label(&self) -> String {
        let filters: Vec<&str> = self
            .filters
            .iter()
            .map(|f| match f {
                FilterKind::DepFree => "Dep-Free",
                FilterKind::Nlp(NlpConfig::Verb) => "NLP-Verb",
                FilterKind::Nlp(NlpConfig::Dobj) => "NLP-Dobj",
                FilterKind::Nlp(NlpConfig::Noun) => "NLP-Noun",
            })
            .collect();
        let extraction = match self.extraction {
            Extraction::OriginalOrder => "Original Order",
            Extraction::StringAnalysis => "String Analysis",
        };
        if filters.is_empty() {
            format!("Baseline ({extraction})")
        } else {
            format!("{} ({extraction})", filters.join("+"))
        }
    }
}

/// Lexical resources for the NLP filters.
#[derive(Debug, Clone)]
pub struct Resources {
    pub lexicon: PosLexicon,
    pub taxonomy: VerbTaxonomy,
}

impl Default for Resources {
    fn default() -> Self {
        Self {
            lexicon: PosLexicon::bundled(),
            taxonomy: VerbTaxonomy::bundled(),
        }
    }
}

pub fn extract(
    suite: &TestSuite,
    manifest: &AppManifest,
    config: &PipelineConfig,
) -> DependencyGraph {
    match config.extraction {
        Extraction::OriginalOrder => extract_original_order(suite),
        Extraction::StringAnalysis => extract_sub_use(
            suite,
            &manifest.catalog,
            SubUseOptions {
                include_locators: config.include_locators,
            },
        ),
    }
}

/// Ranked values of `graph`, for confirmation before the dep-free filter.
pub fn frequency_report(graph: &DependencyGraph, suite: &TestSuite) -> StringFrequencyReport {
    rank_string_values(graph, suite)
}

pub fn apply_filters(
    graph: &DependencyGraph,
    suite: &TestSuite,
    config: &PipelineConfig,
    confirmed: &BTreeSet<String>,
    resources: &Resources,
) -> Result<(DependencyGraph, FilterReport), PipelineError> {
    config.check()?;
    let mut report = FilterReport {
        format_version: REPORT_FORMAT_VERSION,
        ..FilterReport::default()
    };
    let mut current = graph.clone();
    for filter in &config.filters {
        report.filters.push(filter.to_string());
        match *filter {
            FilterKind::DepFree => {
                let ranked = rank_string_values(&current, suite);
                let (next, removed) =
                    filter_dependency_free(&current, &ranked, confirmed, config.auto_universal)?;
                let mut values: BTreeSet<String> = confirmed.clone();
                if config.auto_universal {
                    values.extend(ranked.universal().map(|e| e.value.clone()));
                }
                report.confirmed_values = values.into_iter().collect();
                report.removed.extend(removed);
                current = next;
            }
            FilterKind::Nlp(nlp) => {
                let (next, removed) = filter_nlp(
                    &current,
                    suite,
                    nlp,
                    &resources.lexicon,
                    &resources.taxonomy,
                    config.dobj_mode,
                );
                report.dobj_mode = Some(config.dobj_mode.as_str());
                report.removed.extend(removed);
                current = next;
            }
        }
    }
    Ok((current, report))
}

/// Table 2-shaped counts for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub configuration: String,
    pub tests: usize,
    pub extracted: usize,
    pub filtered: usize,
    pub to_validate: usize,
    /// Surviving extracted edges refuted by validation.
    pub false_deps: usize,
    /// Manifest edges that were extracted.
    pub validated: usize,
    /// Manifest edges recovered while validating.
    pub recovered: usize,
    /// Manifest edges recovered from disconnected tests.
    pub recovered_disconnected: usize,
    pub total_praw: usize,
    /// Manifest edges decided by transitivity rather than by an inversion.
    pub implied: usize,
    pub validation_schedules: usize,
    pub recovery_schedules: usize,
    pub tests_executed: usize,
    pub validation_cost: f64,
    pub schedules: usize,
}

impl Summary {
    pub fn compute(
        config: &PipelineConfig,
        candidate: &DependencyGraph,
        filtered: &DependencyGraph,
        final_graph: &DependencyGraph,
        stats: &ValidationStats,
        schedules: usize,
    ) -> Self {
        let extracted = candidate.edge_count();
        let filtered_out = filtered.count_status(EdgeStatus::Removed)
            - candidate.count_status(EdgeStatus::Removed);
        let manifest_by = |origin: EdgeOrigin| {
            final_graph
                .edges()
                .filter(|(_, e)| e.status == EdgeStatus::Manifest && e.origin == origin)
                .count()
        };
        let validated = manifest_by(EdgeOrigin::Extracted);
        let recovered = manifest_by(EdgeOrigin::Recovered);
        let recovered_disconnected = manifest_by(EdgeOrigin::RecoveredDisconnected);
        let to_validate = extracted - filtered_out;
        Summary {
            configuration: config.label(),
            tests: candidate.node_count(),
            extracted,
            filtered: filtered_out,
            to_validate,
            false_deps: to_validate - validated,
            validated,
            recovered,
            recovered_disconnected,
            total_praw: validated + recovered + recovered_disconnected,
            implied: final_graph.edges().filter(|(_, e)| e.implied).count(),
            validation_schedules: stats.validation_runs,
            recovery_schedules: stats.recovery_runs,
            tests_executed: stats.tests_executed,
            validation_cost: stats.cost,
            schedules,
        }
    }

    pub const HEADER: [&'static str; 9] = [
        "Configuration",
        "Extracted",
        "Filtered",
        "To Validate",
        "False",
        "Validated",
        "Recovered",
        "Recovered (Disc.)",
        "Total PRAW",
    ];

    /// Fixed-width table of summaries, one row each.
    pub fn table(rows: &[Summary]) -> String {
        let cells: Vec<[String; 9]> = rows
            .iter()
            .map(|s| {
                [
                    s.configuration.clone(),
                    s.extracted.to_string(),
                    s.filtered.to_string(),
                    s.to_validate.to_string(),
                    s.false_deps.to_string(),
                    s.validated.to_string(),
                    s.recovered.to_string(),
                    s.recovered_disconnected.to_string(),
                    s.total_praw.to_string(),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = Self::HEADER.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let line = |row: &[String]| {
            let mut out = String::new();
            for (i, (c, w)) in row.iter().zip(&widths).enumerate() {
                if i == 0 {
                    out.push_str(&format!("{c:<w$}"));
                } else {
                    out.push_str(&format!("  {c:>w$}"));
                }
            }
            out.trim_end().to_string() + "\n"
        };
        let mut out = line(&Self::HEADER.map(String::from));
        for row in &cells {
            out.push_str(&line(row));
        }
        out
    }
}

/// Table 3-shaped speed-up report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub format_version: u32,
    pub original_runtime: f64,
    pub schedules: usize,
    pub worst_case_runtime: f64,
    pub worst_case_speedup: f64,
    pub average_runtime: f64,
    pub average_speedup: f64,
}

impl Metrics {
    pub fn new(set: &ScheduleSet, speedup: &Speedup) -> Self {
        Self {
            format_version: REPORT_FORMAT_VERSION,
            original_runtime: set.original_runtime,
            schedules: set.len(),
            worst_case_runtime: speedup.max_runtime,
            worst_case_speedup: speedup.worst_case,
            average_runtime: speedup.mean_runtime,
            average_speedup: speedup.average_case,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub candidate: DependencyGraph,
    pub filtered: DependencyGraph,
    pub filter_report: FilterReport,
    pub validation: ValidationOutcome,
    pub schedules: ScheduleSet,
    pub metrics: Metrics,
    pub summary: Summary,
}

impl PipelineRun {
    /// `(file name, contents)` of every artifact, in a fixed order.
    pub fn artifacts(&self) -> Vec<(&'static str, String)> {
        vec![
            ("candidate_graph.json", to_json(&self.candidate) + "\n"),
            ("filter_report.json", pretty(&self.filter_report)),
            ("events.jsonl", events_to_jsonl(&self.validation.events)),
            ("final_graph.json", to_json(&self.validation.graph) + "\n"),
            ("final_graph.dot", to_dot(&self.validation.graph)),
            ("schedules.json", self.schedules.to_json() + "\n"),
            ("metrics.json", pretty(&self.metrics)),
            ("summary.json", pretty(&self.summary)),
            (
                "summary.txt",
                Summary::table(std::slice::from_ref(&self.summary)),
            ),
        ]
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
        + "
"
}

/// Full pipeline over one configuration. `confirmed` are the dependency-free
/// values the user accepted; ignored unless the dep-free filter runs.
pub fn run_pipeline(
    suite: &TestSuite,
    manifest: &AppManifest,
    config: &PipelineConfig,
    confirmed: &BTreeSet<String>,
    resources: &Resources,
) -> Result<PipelineRun, PipelineError> {
    config.check()?;
    let candidate = extract(suite, manifest, config);
    let (filtered, filter_report) = apply_filters(&candidate, suite, config, confirmed, resources)?;
    let sim = Simulator::new(suite, manifest);
    let validation = run_full_validation(&filtered.without_removed(), &sim)?;
    let schedules = derive_schedules(&validation.graph, manifest)?;
    run_parallel(&schedules, &sim)?;
    let speedup = speedup_metrics(&schedules).or_else(|e| match e {
        ScheduleError::EmptyScheduleSet => Ok(Speedup {
            worst_case: 1.0,
            average_case: 1.0,
            max_runtime: 0.0,
            mean_runtime: 0.0,
        }),
        other => Err(other),
    })?;
    let summary = Summary::compute(
        config,
        &candidate,
        &filtered,
        &validation.graph,
        &validation.stats,
        schedules.len(),
    );
    Ok(PipelineRun {
        metrics: Metrics::new(&schedules, &speedup),
        candidate,
        filtered,
        filter_report,
        validation,
        schedules,
        summary,
    })
}
