//! Parallel schedules derived from a validated dependency graph, and the
//! speed-up arithmetic over their simulated runtimes.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::ScheduleError;
use crate::graph::{DependencyGraph, EdgeStatus};
use crate::manifest::AppManifest;
use crate::sim::{Executor, OutcomeVector, Schedule, Simulator};

/// One schedule per sink (a test nothing depends on): the sink's transitive
/// prerequisites plus the sink, in original order. Considers every
/// non-removed edge. Isolated tests become single-test schedules.
pub fn sink_closures(graph: &DependencyGraph) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut has_dependent = vec![false; n];
    for (key, edge) in graph.edges() {
        if edge.status != EdgeStatus::Removed {
            has_dependent[key.1] = true;
        }
    }
    (0..n)
        .filter(|&p| !has_dependent[p])
        .map(|sink| {
            let mut tests: Vec<usize> = graph.closure(sink).into_iter().collect();
            tests.push(sink);
            tests
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleSet {
    pub schedules: Vec<Schedule>,
    pub runtimes: Vec<f64>,
    pub original_runtime: f64,
}

impl ScheduleSet {
    pub fn len(&self) -> usize {
        self.schedules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedules.is_empty()
    }

    /// Schedules file body: a JSON array of test-name arrays.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.schedules).expect("schedules serialize")
    }
}

pub fn derive_schedules(
    graph: &DependencyGraph,
    manifest: &AppManifest,
) -> Result<ScheduleSet, ScheduleError> {
    let pending = graph.count_status(EdgeStatus::Candidate);
    if pending > 0 {
        return Err(ScheduleError::GraphNotValidated(pending));
    }
    let cost = |p: usize| manifest.cost(graph.name(p));
    let closures = sink_closures(graph);
    Ok(ScheduleSet {
        runtimes: closures
            .iter()
            .map(|s| s.iter().map(|&p| cost(p)).sum())
            .collect(),
        schedules: closures
            .iter()
            .map(|s| Schedule::new(s.iter().map(|&p| graph.name(p))))
            .collect(),
        original_runtime: (0..graph.node_count()).map(cost).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Speedup {
    /// Original runtime over the slowest schedule.
    pub worst_case: f64,
    /// Original runtime over the mean schedule runtime.
    pub average_case: f64,
    pub max_runtime: f64,
    pub mean_runtime: f64,
}

pub fn speedup_from(original: f64, runtimes: &[f64]) -> Result<Speedup, ScheduleError> {
    if runtimes.is_empty() {
        return Err(ScheduleError::EmptyScheduleSet);
    }
    if original.is_nan() || original <= 0.0 || runtimes.iter().any(|r| r.is_nan() || *r <= 0.0) {
        return Err(ScheduleError::NonPositiveRuntime);
    }
    let max_runtime = runtimes.iter().copied().fold(f64::MIN, f64::max);
    let mean_runtime = runtimes.iter().sum::<f64>() / runtimes.len() as f64;
    Ok(Speedup {
        worst_case: original / max_runtime,
        average_case: original / mean_runtime,
        max_runtime,
        mean_runtime,
    })
}

pub fn speedup_metrics(set: &ScheduleSet) -> Result<Speedup, ScheduleError> {
    speedup_from(set.original_runtime, &set.runtimes)
}

/// Runs every schedule on its own simulator state, concurrently. Any failing
/// test is a soundness violation of the graph the schedules came from.
pub fn run_parallel(
    set: &ScheduleSet,
    sim: &Simulator<'_>,
) -> Result<Vec<OutcomeVector>, ScheduleError> {
    let suite = sim.suite();
    let positions: Vec<Vec<usize>> = set
        .schedules
        .iter()
        .map(|s| s.positions(suite))
        .collect::<Result<_, _>>()?;
    let outcomes: Vec<OutcomeVector> = positions.par_iter().map(|p| sim.run(p)).collect();
    for (index, (outcome, schedule)) in outcomes.iter().zip(&positions).enumerate() {
        if let Some(&failed) = schedule.iter().find(|&&p| outcome.failed().contains(&p)) {
            return Err(ScheduleError::SoundnessViolation {
                index,
                schedule: set.schedules[index].tests.clone(),
                test: suite.tests()[failed].name.clone(),
            });
        }
    }
    Ok(outcomes)
}
