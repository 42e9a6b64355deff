//! `testdeps`: detect, validate and schedule dependencies between E2E tests.
//!
//! Exit status: 0 on success, 2 when a derived schedule fails (the graph is
//! unsound), 1 on any input or configuration error.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use testdeps::filter::{DobjMode, PosLexicon, StringFrequencyReport, VerbTaxonomy};
use testdeps::graph::{from_json, to_dot, to_json, DependencyGraph};
use testdeps::manifest::parse_manifest;
use testdeps::pipeline::{
    apply_filters, extract, frequency_report, run_pipeline, Extraction, FilterKind, Metrics,
    PipelineConfig, Resources, Summary,
};
use testdeps::schedule::{derive_schedules, run_parallel, speedup_metrics};
use testdeps::suite::{import_java, parse_suite};
use testdeps::synth::{generate, SynthOptions};
use testdeps::validate::{events_to_jsonl, run_full_validation};
use testdeps::{AppManifest, PipelineError, ScheduleError, Simulator, TestSuite};

#[derive(Parser)]
#[command(
    name = "testdeps",
    version,
    about = "Detect and validate dependencies between end-to-end tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the candidate dependency graph.
    Extract {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[command(flatten)]
        output: GraphOutput,
    },
    /// Remove likely-false candidates from a graph.
    Filter {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        filters: FilterArgs,
        /// Where to write the filter report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        output: GraphOutput,
    },
    /// Validate a graph by executing schedules, recovering missing edges.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        graph: PathBuf,
        /// Where to write the JSON-lines event log.
        #[arg(long)]
        events: Option<PathBuf>,
        #[command(flatten)]
        output: GraphOutput,
    },
    /// Derive and run parallel schedules from a validated graph.
    Schedule {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        graph: PathBuf,
        /// Where to write the speed-up metrics.
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Trace every statement of every schedule to stderr.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Extract, filter, validate and schedule, writing every artifact.
    Pipeline {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[command(flatten)]
        filters: FilterArgs,
        /// Artifact directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print summary rows of earlier pipeline runs as one table.
    Report {
        /// summary.json files or pipeline output directories.
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
    /// Write a random suite and manifest that pass in original order.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        min_tests: usize,
        #[arg(long, default_value_t = 10)]
        max_tests: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Inputs {
    /// Test suite: line DSL, or Java/JUnit when the extension is `.java`.
    #[arg(long)]
    suite: PathBuf,
    /// Application manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args)]
struct ExtractionArgs {
    #[arg(long = "extract", value_enum, default_value_t = ExtractArg::StringAnalysis)]
    extraction: ExtractArg,
    /// Count locator text as used values.
    #[arg(long)]
    include_locators: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtractArg {
    OriginalOrder,
    StringAnalysis,
}

#[derive(Args)]
struct FilterArgs {
    /// Filters in application order; at most one nlp-*.
    #[arg(long = "filter", value_enum)]
    filters: Vec<FilterArg>,
    /// Dependency-free values to filter without asking; `*` for all shown.
    #[arg(long, value_delimiter = ',')]
    assume_yes: Vec<String>,
    /// Values to keep without asking; `*` for all shown.
    #[arg(long, value_delimiter = ',')]
    assume_no: Vec<String>,
    /// Do not filter values used by every test unless confirmed.
    #[arg(long)]
    no_auto: bool,
    #[arg(long, env = "TESTDEPS_TAXONOMY")]
    taxonomy: Option<PathBuf>,
    #[arg(long, env = "TESTDEPS_LEXICON")]
    lexicon: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DobjArg::LastNounOfLeadingCompound)]
    dobj_mode: DobjArg,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FilterArg {
    DepFree,
    NlpVerb,
    NlpDobj,
    NlpNoun,
}

#[derive(Clone, Copy, ValueEnum)]
enum DobjArg {
    FirstNoun,
    LastNounOfLeadingCompound,
}

#[derive(Args)]
struct GraphOutput {
    #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
    format: GraphFormat,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body).with_context(|| format!("cannot write {}", p.display())),
        None => io::stdout()
            .write_all(body.as_bytes())
            .context("cannot write to stdout"),
    }
}

fn load_manifest(path: &Path) -> Result<AppManifest> {
    parse_manifest(&read(path)?).with_context(|| format!("invalid manifest {}", path.display()))
}

fn load_suite(path: &Path, manifest: Option<&AppManifest>) -> Result<TestSuite> {
    let source = read(path)?;
    let suite = if path.extension().is_some_and(|e| e == "java") {
        let suite = import_java(&source).with_context(|| format!("in {}", path.display()))?;
        if let Some(m) = manifest {
            suite
                .check_actions(&m.catalog)
                .with_context(|| format!("in {}", path.display()))?;
        }
        suite
    } else {
        parse_suite(&source, manifest.map(|m| &m.catalog))
            .with_context(|| format!("in {}", path.display()))?
    };
    Ok(suite)
}

fn load_graph(path: &Path, suite: &TestSuite) -> Result<DependencyGraph> {
    let graph =
        from_json(&read(path)?).with_context(|| format!("invalid graph {}", path.display()))?;
    let names: Vec<&str> = suite.names().collect();
    if graph
        .nodes()
        .iter()
        .map(String::as_str)
        .ne(names.iter().copied())
    {
        bail!(
            "graph {} does not list the suite's tests in original order",
            path.display()
        );
    }
    Ok(graph)
}

fn render(graph: &DependencyGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Dot => to_dot(graph),
        GraphFormat::Json => to_json(graph) + "\n",
    }
}

impl ExtractionArgs {
    fn apply(&self, config: &mut PipelineConfig) {
        config.extraction = match self.extraction {
            ExtractArg::OriginalOrder => Extraction::OriginalOrder,
            ExtractArg::StringAnalysis => Extraction::StringAnalysis,
        };
        config.include_locators = self.include_locators;
    }
}

impl FilterArgs {
    fn apply(&self, config: &mut PipelineConfig) -> Result<()> {
        config.filters = self
            .filters
            .iter()
            .map(|f| match f {
                FilterArg::DepFree => "dep-free",
                FilterArg::NlpVerb => "nlp-verb",
                FilterArg::NlpDobj => "nlp-dobj",
                FilterArg::NlpNoun => "nlp-noun",
            })
            .map(str::parse::<FilterKind>)
            .collect::<Result<_, _>>()?;
        config.auto_universal = !self.no_auto;
        config.dobj_mode = match self.dobj_mode {
            DobjArg::FirstNoun => DobjMode::FirstNoun,
            DobjArg::LastNounOfLeadingCompound => DobjMode::LastNounOfLeadingCompound,
        };
        config.check()?;
        Ok(())
    }

    fn resources(&self) -> Result<Resources> {
        let mut resources = Resources::default();
        if let Some(path) = &self.taxonomy {
            resources.taxonomy = VerbTaxonomy::parse(&read(path)?)
                .with_context(|| format!("invalid taxonomy {}", path.display()))?;
        }
        if let Some(path) = &self.lexicon {
            resources.lexicon = PosLexicon::parse(&read(path)?)
                .with_context(|| format!("invalid lexicon {}", path.display()))?;
        }
        Ok(resources)
    }

    /// Decides which dependency-free values to filter: explicit answers
    /// first, then a prompt on a terminal when no answers were given. Values used by every test are
    /// pre-confirmed unless `--no-auto` is given.
    fn confirm(&self, report: &StringFrequencyReport) -> Result<BTreeSet<String>> {
        if !self.filters.contains(&FilterArg::DepFree) {
            return Ok(BTreeSet::new());
        }
        let all_yes = self.assume_yes.iter().any(|v| v == "*");
        let all_no = self.assume_no.iter().any(|v| v == "*");
        let mut confirmed: BTreeSet<String> = self
            .assume_yes
            .iter()
            .filter(|v| *v != "*")
            .cloned()
            .collect();
        let universal: BTreeSet<&str> = if self.no_auto {
            BTreeSet::new()
        } else {
            report.universal().map(|e| e.value.as_str()).collect()
        };
        let mut undecided = Vec::new();
        for entry in report.frequent() {
            let value = entry.value.as_str();
            if confirmed.contains(value)
                || universal.contains(value)
                || self.assume_no.iter().any(|v| v == value)
            {
                continue;
            }
            if all_yes {
                confirmed.insert(value.to_string());
            } else if !all_no {
                undecided.push(entry);
            }
        }
        // An answer list makes the run non-interactive; values it does not
        // mention keep their edges.
        if undecided.is_empty() || !self.assume_yes.is_empty() || !self.assume_no.is_empty() {
            return Ok(confirmed);
        }
        if !io::stdin().is_terminal() {
            return Err(PipelineError::NonInteractiveWithoutAssumptions(undecided.len()).into());
        }
        let stdin = io::stdin();
        let mut lines = stdin.lock().lines();
        eprintln!(
            "Frequently shared values (tests using them / {} tests):",
            report.test_total
        );
        for entry in undecided {
            eprint!(
                "  {:<24} {:>3}/{:<3} {} edges. Filter as dependency-free? [y/N] ",
                entry.value,
                entry.test_count,
                report.test_total,
                entry.edge_refs.len()
            );
            io::stderr().flush().ok();
            let answer = lines.next().transpose()?.unwrap_or_default();
            if matches!(answer.trim(), "y" | "Y" | "yes") {
                confirmed.insert(entry.value.clone());
            }
        }
        Ok(confirmed)
    }
}

fn is_soundness_violation(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<ScheduleError>(),
            Some(ScheduleError::SoundnessViolation { .. })
        ) || matches!(
            cause.downcast_ref::<PipelineError>(),
            Some(PipelineError::Schedule(
                ScheduleError::SoundnessViolation { .. }
            ))
        )
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract {
            inputs,
            extraction,
            output,
        } => {
            let manifest = load_manifest(&inputs.manifest)?;
            let suite = load_suite(&inputs.suite, Some(&manifest))?;
            let mut config = PipelineConfig::default();
            extraction.apply(&mut config);
            let graph = extract(&suite, &manifest, &config);
            write_out(output.output.as_deref(), &render(&graph, output.format))
        }
        Command::Filter {
            suite,
            graph,
            filters,
            report,
            output,
        } => {
            let suite = load_suite(&suite, None)?;
            let graph = load_graph(&graph, &suite)?;
            let mut config = PipelineConfig::default();
            filters.apply(&mut config)?;
            let confirmed = filters.confirm(&frequency_report(&graph, &suite))?;
            let (filtered, filter_report) =
                apply_filters(&graph, &suite, &config, &confirmed, &filters.resources()?)?;
            if let Some(path) = report {
                let body = serde_json::to_string_pretty(&filter_report)? + "\n";
                write_out(Some(&path), &body)?;
            }
            write_out(output.output.as_deref(), &render(&filtered, output.format))
        }
        Command::Validate {
            inputs,
            graph,
            events,
            output,
        } => {
            let manifest = load_manifest(&inputs.manifest)?;
            let suite = load_suite(&inputs.suite, Some(&manifest))?;
            let graph = load_graph(&graph, &suite)?.without_removed();
            let outcome = run_full_validation(&graph, &Simulator::new(&suite, &manifest))?;
            if let Some(path) = events {
                write_out(Some(&path), &events_to_jsonl(&outcome.events))?;
            }
            write_out(
                output.output.as_deref(),
                &render(&outcome.graph, output.format),
            )
        }
        Command::Schedule {
            inputs,
            graph,
            metrics,
            output,
            verbose,
        } => {
            let manifest = load_manifest(&inputs.manifest)?;
            let suite = load_suite(&inputs.suite, Some(&manifest))?;
            let graph = load_graph(&graph, &suite)?;
            let set = derive_schedules(&graph, &manifest)?;
            let sim = Simulator::new(&suite, &manifest);
            if verbose {
                let mut err = io::stderr().lock();
                for (i, schedule) in set.schedules.iter().enumerate() {
                    writeln!(err, "# schedule {i} {schedule}")?;
                    sim.execute_traced(schedule, &mut err)?;
                }
            }
            run_parallel(&set, &sim)?;
            if let Some(path) = metrics {
                let body =
                    serde_json::to_string_pretty(&Metrics::new(&set, &speedup_metrics(&set)?))?
                        + "\n";
                write_out(Some(&path), &body)?;
            }
            write_out(output.as_deref(), &(set.to_json() + "\n"))
        }
        Command::Pipeline {
            inputs,
            extraction,
            filters,
            out,
        } => {
            let manifest = load_manifest(&inputs.manifest)?;
            let suite = load_suite(&inputs.suite, Some(&manifest))?;
            let mut config = PipelineConfig::default();
            extraction.apply(&mut config);
            filters.apply(&mut config)?;
            let candidate = extract(&suite, &manifest, &config);
            let confirmed = filters.confirm(&frequency_report(&candidate, &suite))?;
            let run = run_pipeline(
                &suite,
                &manifest,
                &config,
                &confirmed,
                &filters.resources()?,
            )?;
            fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
            for (name, body) in run.artifacts() {
                write_out(Some(&out.join(name)), &body)?;
            }
            print!("{}", Summary::table(std::slice::from_ref(&run.summary)));
            Ok(())
        }
        Command::Report { summaries, format } => {
            let rows = summaries
                .iter()
                .map(|p| {
                    let path = if p.is_dir() {
                        p.join("summary.json")
                    } else {
                        p.clone()
                    };
                    serde_json::from_str::<Summary>(&read(&path)?)
                        .with_context(|| format!("invalid summary {}", path.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            let body = match format {
                ReportFormat::Table => Summary::table(&rows),
                ReportFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
            };
            write_out(None, &body)
        }
        Command::Generate {
            seed,
            min_tests,
            max_tests,
            out,
        } => {
            if min_tests == 0 || min_tests > max_tests {
                bail!("need 1 <= --min-tests <= --max-tests");
            }
            let case = generate(
                seed,
                &SynthOptions {
                    min_tests,
                    max_tests,
                    ..SynthOptions::default()
                },
            );
            fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
            write_out(Some(&out.join("suite.tests")), &case.source)?;
            write_out(
                Some(&out.join("manifest.json")),
                &(case.manifest.to_json() + "\n"),
            )
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_soundness_violation(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
