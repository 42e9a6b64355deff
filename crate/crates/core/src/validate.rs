//! Dynamic validation of candidate edges with in-validation recovery of
//! missing dependencies and a post-validation sweep over disconnected tests,
//! iterated to a fixpoint.
//!
//! Targets are chosen source-first: the candidate whose dependent comes last
//! in the original order, then the one whose prerequisite comes last. A
//! target is refuted by running its dependent with every other transitive
//! prerequisite but without the target's prerequisite. When the prerequisite
//! is still reachable through other edges the target is skipped until those
//! edges are decided; if it is reachable through manifest edges alone it is
//! marked manifest as implied.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, SimError, ValidationError};
use crate::graph::{DependencyGraph, EdgeKey, EdgeOrigin, EdgeStatus};
use crate::schedule::sink_closures;
use crate::sim::{Executor, Outcome, OutcomeVector};

pub const EVENT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunPurpose {
    /// The target's prerequisite is left out.
    Inversion,
    /// The target is respected; used to tell a manifest target from a
    /// missing dependency.
    NoInversion,
    /// A disconnected test on its own.
    Isolation,
    /// A derived schedule containing a disconnected test.
    DisconnectedSchedule,
    /// A derived schedule of the converged graph.
    FinalSchedule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValidationEvent {
    Selected {
        dependent: String,
        prerequisite: String,
    },
    ScheduleRun {
        purpose: RunPurpose,
        schedule: Vec<String>,
        failed: Vec<String>,
    },
    MarkManifest {
        dependent: String,
        prerequisite: String,
        implied: bool,
    },
    MarkRemoved {
        dependent: String,
        prerequisite: String,
    },
    RecoveredEdge {
        dependent: String,
        prerequisite: String,
        origin: EdgeOrigin,
    },
    DisconnectedRun {
        purpose: RunPurpose,
        schedule: Vec<String>,
        failed: Vec<String>,
    },
}

#[derive(Serialize, Deserialize)]
struct LoggedEvent {
    schema: u32,
    seq: usize,
    #[serde(flatten)]
    event: ValidationEvent,
}

/// JSON-lines rendering, one event per line.
pub fn events_to_jsonl(events: &[ValidationEvent]) -> String {
    let mut out = String::new();
    for (seq, event) in events.iter().enumerate() {
        let line = LoggedEvent {
            schema: EVENT_SCHEMA_VERSION,
            seq,
            event: event.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("event serializes"));
        out.push('\n');
    }
    out
}

pub fn events_from_jsonl(source: &str) -> Result<Vec<ValidationEvent>, GraphError> {
    source
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let logged: LoggedEvent =
                serde_json::from_str(line).map_err(|e| GraphError::Format(e.to_string()))?;
            if logged.schema != EVENT_SCHEMA_VERSION {
                return Err(GraphError::Format(format!(
                    "unsupported event schema {}",
                    logged.schema
                )));
            }
            Ok(logged.event)
        })
        .collect()
}

/// Rebuilds a graph from the graph validation started with and its log.
pub fn replay(
    initial: &DependencyGraph,
    events: &[ValidationEvent],
) -> Result<DependencyGraph, GraphError> {
    let mut graph = initial.clone();
    for event in events {
        match event {
            ValidationEvent::RecoveredEdge {
                dependent,
                prerequisite,
                origin,
            } => {
                let key = graph.key(dependent, prerequisite)?;
                graph.add_candidate(key, BTreeSet::new(), *origin)?;
            }
            ValidationEvent::MarkManifest {
                dependent,
                prerequisite,
                implied,
            } => {
                let key = graph.key(dependent, prerequisite)?;
                if *implied {
                    graph.mark_implied(key)?;
                } else {
                    graph.set_status(key, EdgeStatus::Manifest)?;
                }
            }
            ValidationEvent::MarkRemoved {
                dependent,
                prerequisite,
            } => {
                let key = graph.key(dependent, prerequisite)?;
                graph.set_status(key, EdgeStatus::Removed)?;
            }
            _ => {}
        }
    }
    Ok(graph)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ValidationStats {
    pub steps: usize,
    /// Schedules executed while validating targets.
    pub validation_runs: usize,
    /// Schedules executed by disconnected-test recovery and the final sweep.
    pub recovery_runs: usize,
    pub tests_executed: usize,
    /// Simulated runtime of every executed schedule.
    pub cost: f64,
}

impl ValidationStats {
    pub fn schedules_executed(&self) -> usize {
        self.validation_runs + self.recovery_runs
    }
}

/// A candidate chosen for validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Can be refuted by an inversion schedule.
    Invertible(EdgeKey),
    /// The prerequisite is reachable through manifest edges alone.
    Implied(EdgeKey),
}

impl Target {
    pub fn key(&self) -> EdgeKey {
        match *self {
            Target::Invertible(k) | Target::Implied(k) => k,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationState {
    pub graph: DependencyGraph,
    pub expected: OutcomeVector,
    pub events: Vec<ValidationEvent>,
    pub stats: ValidationStats,
}

/// Result of [`validate_step`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Manifest(EdgeKey),
    Implied(EdgeKey),
    Removed(EdgeKey),
    /// The non-inverted schedule failed too; candidates were added for the
    /// first failing test and the target stays pending.
    Recovered {
        target: EdgeKey,
        added: Vec<EdgeKey>,
    },
}

/// Baseline outcomes of the full original order; every test must pass.
pub fn baseline(
    graph: &DependencyGraph,
    executor: &dyn Executor,
) -> Result<OutcomeVector, SimError> {
    let all: Vec<usize> = (0..graph.node_count()).collect();
    let outcomes = executor.run(&all);
    if let Some(&p) = outcomes.failed().first() {
        return Err(SimError::BaselineFailure {
            test: graph.name(p).to_string(),
            reason: "fails in the original order".into(),
        });
    }
    Ok(outcomes)
}

impl ValidationState {
    pub fn new(graph: DependencyGraph, expected: OutcomeVector) -> Self {
        Self {
            graph,
            expected,
            events: Vec::new(),
            stats: ValidationStats::default(),
        }
    }

    /// Candidate edges in source-first order.
    pub fn pending(&self) -> Vec<EdgeKey> {
        let mut keys = self.graph.keys_with_status(EdgeStatus::Candidate);
        keys.sort_by(|a, b| b.cmp(a));
        keys
    }

    fn names(&self, positions: &[usize]) -> Vec<String> {
        positions
            .iter()
            .map(|&p| self.graph.name(p).to_string())
            .collect()
    }

    fn pair(&self, key: EdgeKey) -> (String, String) {
        (
            self.graph.name(key.0).to_string(),
            self.graph.name(key.1).to_string(),
        )
    }

    fn run(
        &mut self,
        executor: &dyn Executor,
        schedule: &[usize],
        purpose: RunPurpose,
    ) -> OutcomeVector {
        let outcome = executor.run(schedule);
        self.stats.tests_executed += schedule.len();
        self.stats.cost += schedule.iter().map(|&p| executor.cost(p)).sum::<f64>();
        let failed = self.names(
            &schedule
                .iter()
                .copied()
                .filter(|&p| outcome.at(p) == Outcome::Fail)
                .collect::<Vec<_>>(),
        );
        let schedule = self.names(schedule);
        let event = match purpose {
            RunPurpose::Inversion | RunPurpose::NoInversion => {
                self.stats.validation_runs += 1;
                ValidationEvent::ScheduleRun {
                    purpose,
                    schedule,
                    failed,
                }
            }
            _ => {
                self.stats.recovery_runs += 1;
                ValidationEvent::DisconnectedRun {
                    purpose,
                    schedule,
                    failed,
                }
            }
        };
        self.events.push(event);
        outcome
    }

    fn add_recovered(&mut self, key: EdgeKey, origin: EdgeOrigin) -> bool {
        let added = self
            .graph
            .add_candidate(key, BTreeSet::new(), origin)
            .expect("recovered edges point backward");
        if added {
            let (dependent, prerequisite) = self.pair(key);
            self.events.push(ValidationEvent::RecoveredEdge {
                dependent,
                prerequisite,
                origin,
            });
        }
        added
    }

    /// Adds candidates from `test` to every earlier test, skipping pairs
    /// already in the graph. Returns the added keys.
    fn connect_with_preceding(
        &mut self,
        test: usize,
        exclude: &BTreeSet<usize>,
        origin: EdgeOrigin,
    ) -> Vec<EdgeKey> {
        (0..test)
            .filter(|p| !exclude.contains(p))
            .map(|p| (test, p))
            .filter(|&key| self.add_recovered(key, origin))
            .collect()
    }
}

fn reachable_without(graph: &DependencyGraph, target: EdgeKey, manifest_only: bool) -> bool {
    graph
        .closure_where(target.0, Some(target), |e| {
            !manifest_only || e.status == EdgeStatus::Manifest
        })
        .contains(&target.1)
}

/// Picks the next target: the first pending edge, in source-first order,
/// that is either invertible or implied by manifest edges. Edges whose
/// prerequisite is still reachable through undecided edges are skipped.
pub fn select_target(state: &ValidationState) -> Result<Target, ValidationError> {
    let pending = state.pending();
    if pending.is_empty() {
        return Err(ValidationError::EmptyWorklist);
    }
    for key in pending {
        if !reachable_without(&state.graph, key, false) {
            return Ok(Target::Invertible(key));
        }
        if reachable_without(&state.graph, key, true) {
            return Ok(Target::Implied(key));
        }
    }
    // The pending edge with the shortest span only has decided edges inside
    // it, so one of the branches above always fires.
    unreachable!("some pending edge is always decidable")
}

/// Transitive prerequisites of the target's dependent without the target
/// edge, in original order, followed by the dependent.
pub fn inversion_schedule(
    graph: &DependencyGraph,
    target: EdgeKey,
) -> Result<Vec<usize>, ValidationError> {
    let closure = graph.closure_where(target.0, Some(target), |_| true);
    if closure.contains(&target.1) {
        return Err(ValidationError::InversionImpossible {
            dependent: graph.name(target.0).to_string(),
            prerequisite: graph.name(target.1).to_string(),
        });
    }
    let mut schedule: Vec<usize> = closure.into_iter().collect();
    schedule.push(target.0);
    Ok(schedule)
}

/// Transitive prerequisites of the target's dependent, target included, in
/// original order, followed by the dependent.
pub fn no_inversion_schedule(graph: &DependencyGraph, target: EdgeKey) -> Vec<usize> {
    let mut closure = graph.closure(target.0);
    closure.insert(target.1);
    closure.extend(graph.closure(target.1));
    let mut schedule: Vec<usize> = closure.into_iter().collect();
    schedule.push(target.0);
    schedule
}

/// Validates one target.
pub fn validate_step(
    state: &mut ValidationState,
    executor: &dyn Executor,
) -> Result<StepResult, ValidationError> {
    let target = select_target(state)?;
    let key = target.key();
    let (dependent, prerequisite) = state.pair(key);
    state.stats.steps += 1;
    state.events.push(ValidationEvent::Selected {
        dependent: dependent.clone(),
        prerequisite: prerequisite.clone(),
    });

    if let Target::Implied(key) = target {
        state.graph.mark_implied(key)?;
        state.events.push(ValidationEvent::MarkManifest {
            dependent,
            prerequisite,
            implied: true,
        });
        return Ok(StepResult::Implied(key));
    }

    let inverted = inversion_schedule(&state.graph, key)?;
    let outcome = state.run(executor, &inverted, RunPurpose::Inversion);
    if outcome.matches_expected(&state.expected) {
        state.graph.set_status(key, EdgeStatus::Removed)?;
        state.events.push(ValidationEvent::MarkRemoved {
            dependent,
            prerequisite,
        });
        return Ok(StepResult::Removed(key));
    }

    let respected = no_inversion_schedule(&state.graph, key);
    let outcome = state.run(executor, &respected, RunPurpose::NoInversion);
    let Some(failed) = outcome.first_mismatch(&state.expected, &respected) else {
        state.graph.set_status(key, EdgeStatus::Manifest)?;
        state.events.push(ValidationEvent::MarkManifest {
            dependent,
            prerequisite,
            implied: false,
        });
        return Ok(StepResult::Manifest(key));
    };

    let executed: BTreeSet<usize> = respected.iter().copied().collect();
    let added = state.connect_with_preceding(failed, &executed, EdgeOrigin::Recovered);
    if added.is_empty() {
        return Err(ValidationError::RecoveryStalled {
            test: state.graph.name(failed).to_string(),
        });
    }
    Ok(StepResult::Recovered { target: key, added })
}

/// Tests with no prerequisites, other than the first test.
fn disconnected_tests(graph: &DependencyGraph) -> Vec<(usize, bool)> {
    (1..graph.node_count())
        .filter(|&p| graph.out_degree(p) == 0)
        .map(|p| (p, graph.in_degree(p) == 0))
        .collect()
}

/// Post-validation recovery for disconnected tests. Each one runs alone; a
/// failure connects it to every earlier test. A test that passes alone but
/// has dependents has every derived schedule containing it run, and each
/// failing test there is connected to every earlier test. Returns whether
/// the graph changed.
pub fn recover_disconnected(state: &mut ValidationState, executor: &dyn Executor) -> bool {
    let none = BTreeSet::new();
    let mut changed = false;
    for (test, isolated) in disconnected_tests(&state.graph) {
        let outcome = state.run(executor, &[test], RunPurpose::Isolation);
        if outcome.first_mismatch(&state.expected, &[test]).is_some() {
            changed |= !state
                .connect_with_preceding(test, &none, EdgeOrigin::RecoveredDisconnected)
                .is_empty();
            continue;
        }
        if isolated {
            continue;
        }
        let schedules: Vec<Vec<usize>> = sink_closures(&state.graph)
            .into_iter()
            .filter(|s| s.contains(&test))
            .collect();
        for schedule in schedules {
            let outcome = state.run(executor, &schedule, RunPurpose::DisconnectedSchedule);
            let failing: Vec<usize> = schedule
                .iter()
                .copied()
                .filter(|&p| outcome.at(p) != state.expected.at(p))
                .collect();
            for failed in failing {
                changed |= !state
                    .connect_with_preceding(failed, &none, EdgeOrigin::RecoveredDisconnected)
                    .is_empty();
            }
        }
    }
    changed
}

/// Runs the derived schedules of the converged graph until one fails; its
/// first failing test is connected to the earlier tests the schedule left
/// out. Returns whether the graph changed, or an error when a failure cannot be explained by a new
/// candidate edge.
pub fn sweep_final_schedules(
    state: &mut ValidationState,
    executor: &dyn Executor,
) -> Result<bool, ValidationError> {
    for schedule in sink_closures(&state.graph) {
        let outcome = state.run(executor, &schedule, RunPurpose::FinalSchedule);
        if let Some(failed) = outcome.first_mismatch(&state.expected, &schedule) {
            let executed: BTreeSet<usize> = schedule.iter().copied().collect();
            let added =
                state.connect_with_preceding(failed, &executed, EdgeOrigin::RecoveredDisconnected);
            if added.is_empty() {
                return Err(ValidationError::RecoveryStalled {
                    test: state.graph.name(failed).to_string(),
                });
            }
            // The remaining schedules are stale; validate the new edges first.
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub initial: DependencyGraph,
    pub graph: DependencyGraph,
    pub events: Vec<ValidationEvent>,
    pub stats: ValidationStats,
}

/// Step budget: `4·n²`.
pub fn iteration_budget(n: usize) -> usize {
    (4 * n * n).max(4)
}

/// Validates to exhaustion, then recovers disconnected tests and sweeps the
/// final schedules, repeating until nothing changes.
pub fn run_full_validation(
    initial: &DependencyGraph,
    executor: &dyn Executor,
) -> Result<ValidationOutcome, ValidationError> {
    let expected = baseline(initial, executor)?;
    let mut state = ValidationState::new(initial.clone(), expected);
    let budget = iteration_budget(initial.node_count());
    loop {
        while !state.pending().is_empty() {
            if state.stats.steps >= budget {
                return Err(ValidationError::IterationBudgetExceeded { budget });
            }
            validate_step(&mut state, executor)?;
        }
        if recover_disconnected(&mut state, executor) {
            continue;
        }
        if sweep_final_schedules(&mut state, executor)? {
            continue;
        }
        break;
    }
    Ok(ValidationOutcome {
        initial: initial.clone(),
        graph: state.graph,
        events: state.events,
        stats: state.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::parse_manifest;
    use crate::sim::Simulator;
    use crate::suite::parse_suite;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DependencyGraph {
        let mut g = DependencyGraph::from_nodes((1..=n).map(|i| format!("t{i}")).collect());
        for &(d, p) in edges {
            g.add_candidate((d - 1, p - 1), BTreeSet::new(), EdgeOrigin::Extracted)
                .unwrap();
        }
        g
    }

    fn state(g: DependencyGraph) -> ValidationState {
        let n = g.node_count();
        let expected = OutcomeVector {
            names: g.nodes().to_vec(),
            results: vec![Outcome::Pass; n],
        };
        ValidationState::new(g, expected)
    }

    fn names(g: &DependencyGraph, s: &[usize]) -> Vec<String> {
        s.iter().map(|&p| g.name(p).to_string()).collect()
    }

    #[test]
    fn later_dependent_is_selected_first() {
        let s = state(graph(3, &[(3, 2), (2, 1)]));
        assert_eq!(select_target(&s).unwrap(), Target::Invertible((2, 1)));
    }

    #[test]
    fn tie_on_dependent_prefers_later_prerequisite() {
        let s = state(graph(4, &[(4, 1), (4, 3)]));
        assert_eq!(select_target(&s).unwrap().key(), (3, 2));
        let single = state(graph(2, &[(2, 1)]));
        assert_eq!(select_target(&single).unwrap().key(), (1, 0));
    }

    #[test]
    fn empty_worklist() {
        let s = state(graph(2, &[]));
        assert!(matches!(
            select_target(&s),
            Err(ValidationError::EmptyWorklist)
        ));
    }

    #[test]
    fn inversion_keeps_other_prerequisites() {
        let g = graph(4, &[(4, 3), (4, 2), (4, 1), (2, 1)]);
        // t1 is still reachable through t2, so t4->t1 is not invertible.
        assert!(matches!(
            inversion_schedule(&g, (3, 0)),
            Err(ValidationError::InversionImpossible { .. })
        ));
        assert_eq!(
            names(&g, &inversion_schedule(&g, (3, 2)).unwrap()),
            ["t1", "t2", "t4"]
        );
        assert_eq!(
            names(&g, &no_inversion_schedule(&g, (3, 2))),
            ["t1", "t2", "t3", "t4"]
        );
    }

    #[test]
    fn sole_edge_schedules() {
        let g = graph(2, &[(2, 1)]);
        assert_eq!(names(&g, &inversion_schedule(&g, (1, 0)).unwrap()), ["t2"]);
        assert_eq!(names(&g, &no_inversion_schedule(&g, (1, 0))), ["t1", "t2"]);
    }

    #[test]
    fn blocked_edge_waits_then_is_implied() {
        let mut g = graph(3, &[(3, 2), (3, 1), (2, 1)]);
        g.set_status((2, 1), EdgeStatus::Manifest).unwrap();
        let s = state(g.clone());
        // t3->t1 goes through t3->t2->t1, where t2->t1 is undecided.
        assert_eq!(select_target(&s).unwrap(), Target::Invertible((1, 0)));
        g.set_status((1, 0), EdgeStatus::Manifest).unwrap();
        assert_eq!(select_target(&state(g)).unwrap(), Target::Implied((2, 0)));
    }

    const MANIFEST: &str = r#"{
        "actions": ["sendKeys"],
        "effects": [
            {"action": "sendKeys", "locator": "id=new", "arity": 1, "effects": [{"kind": "WRITE", "key": "{arg0}"}]},
            {"action": "sendKeys", "locator": "id=get", "arity": 1, "effects": [{"kind": "READ", "key": "{arg0}"}]}
        ]
    }"#;

    #[test]
    fn isolated_test_that_passes_alone_adds_nothing() {
        let manifest = parse_manifest(MANIFEST).unwrap();
        let suite = parse_suite(
            "TEST a\n  sendKeys id=new \"x\"\nTEST b\n  sendKeys id=new \"y\"\n",
            None,
        )
        .unwrap();
        let sim = Simulator::new(&suite, &manifest);
        let mut s = state(DependencyGraph::new(&suite));
        assert!(!recover_disconnected(&mut s, &sim));
        assert_eq!(s.graph.edge_count(), 0);
        assert_eq!(s.stats.recovery_runs, 1);
    }

    #[test]
    fn no_disconnected_tests_leaves_state_unchanged() {
        let manifest = parse_manifest(MANIFEST).unwrap();
        let suite = parse_suite(
            "TEST a\n  sendKeys id=new \"x\"\nTEST b\n  sendKeys id=get \"x\"\n",
            None,
        )
        .unwrap();
        let sim = Simulator::new(&suite, &manifest);
        let mut g = DependencyGraph::new(&suite);
        g.add_candidate((1, 0), BTreeSet::new(), EdgeOrigin::Extracted)
            .unwrap();
        g.set_status((1, 0), EdgeStatus::Manifest).unwrap();
        let mut s = state(g);
        assert!(!recover_disconnected(&mut s, &sim));
        assert!(s.events.is_empty());
    }

    #[test]
    fn missing_edge_is_recovered_from_isolation() {
        let manifest = parse_manifest(MANIFEST).unwrap();
        let suite = parse_suite(
            "TEST a\n  sendKeys id=new \"x\"\nTEST b\n  sendKeys id=get \"x\"\n",
            None,
        )
        .unwrap();
        let sim = Simulator::new(&suite, &manifest);
        let out = run_full_validation(&DependencyGraph::new(&suite), &sim).unwrap();
        let edge = out.graph.edge((1, 0)).unwrap();
        assert_eq!(edge.status, EdgeStatus::Manifest);
        assert_eq!(edge.origin, EdgeOrigin::RecoveredDisconnected);
    }

    #[test]
    fn budget_grows_quadratically() {
        assert_eq!(iteration_budget(6), 144);
        assert_eq!(iteration_budget(0), 4);
    }
}
