//! Deterministic stand-in for in-browser execution.
//!
//! Every schedule starts from the manifest's initial state. Tests run in
//! schedule order and statements in test order; a test fails at the first
//! READ of an absent key or DELETE of an absent key, keeps the mutations it
//! made before failing, and does not stop the schedule.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::manifest::{AppManifest, EffectKind};
use crate::suite::TestSuite;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimState {
    pub entities: BTreeMap<String, String>,
}

impl SimState {
    pub fn fresh(manifest: &AppManifest) -> Self {
        Self {
            entities: manifest
                .initial_state
                .iter()
                .map(|k| (k.clone(), String::new()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Pass,
    Fail,
    NotExecuted,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::NotExecuted => "NOT_EXECUTED",
        })
    }
}

/// An ordered subsequence of suite tests, by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub tests: Vec<String>,
}

impl Schedule {
    pub fn new<I, S>(tests: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            tests: tests.into_iter().map(Into::into).collect(),
        }
    }

    pub fn from_positions(suite: &TestSuite, positions: &[usize]) -> Self {
        Self::new(positions.iter().map(|&i| suite.tests()[i].name.clone()))
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    /// Resolves names to suite positions, checking existence and uniqueness.
    pub fn positions(&self, suite: &TestSuite) -> Result<Vec<usize>, SimError> {
        let mut seen = HashSet::with_capacity(self.tests.len());
        self.tests
            .iter()
            .map(|name| {
                let pos = suite
                    .position(name)
                    .ok_or_else(|| SimError::UnknownTestName(name.clone()))?;
                if !seen.insert(pos) {
                    return Err(SimError::DuplicateTestName(name.clone()));
                }
                Ok(pos)
            })
            .collect()
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.tests.join(", "))
    }
}

/// Per-test results in suite order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeVector {
    pub(crate) names: Vec<String>,
    pub(crate) results: Vec<Outcome>,
}

impl OutcomeVector {
    fn not_executed(suite: &TestSuite) -> Self {
        Self {
            names: suite.names().map(str::to_string).collect(),
            results: vec![Outcome::NotExecuted; suite.len()],
        }
    }

    pub fn get(&self, name: &str) -> Option<Outcome> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.results[i])
    }

    pub fn at(&self, position: usize) -> Outcome {
        self.results[position]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Outcome)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.results.iter().copied())
    }

    /// Positions of failed tests, in suite order.
    pub fn failed(&self) -> Vec<usize> {
        self.results
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Outcome::Fail)
            .map(|(i, _)| i)
            .collect()
    }

    /// True when every executed test has the expected result.
    pub fn matches_expected(&self, expected: &OutcomeVector) -> bool {
        self.results
            .iter()
            .zip(&expected.results)
            .all(|(got, want)| *got == Outcome::NotExecuted || got == want)
    }

    /// First test in `schedule` order whose result differs from `expected`.
    pub fn first_mismatch(&self, expected: &OutcomeVector, schedule: &[usize]) -> Option<usize> {
        schedule.iter().copied().find(|&p| {
            self.results[p] != Outcome::NotExecuted && self.results[p] != expected.results[p]
        })
    }
}

impl Serialize for OutcomeVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.names.len()))?;
        for (name, result) in self.iter() {
            map.serialize_entry(name, &result)?;
        }
        map.end()
    }
}

/// Anything able to run a schedule given as suite positions.
pub trait Executor {
    fn run(&self, schedule: &[usize]) -> OutcomeVector;

    /// Simulated runtime of the test at `position`.
    fn cost(&self, position: usize) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct Simulator<'a> {
    suite: &'a TestSuite,
    manifest: &'a AppManifest,
}

struct TestRun {
    passed: bool,
    reason: Option<String>,
}

impl<'a> Simulator<'a> {
    pub fn new(suite: &'a TestSuite, manifest: &'a AppManifest) -> Self {
        Self { suite, manifest }
    }

    pub fn suite(&self) -> &'a TestSuite {
        self.suite
    }

    pub fn manifest(&self) -> &'a AppManifest {
        self.manifest
    }

    fn run_test(
        &self,
        position: usize,
        state: &mut SimState,
        trace: &mut Option<&mut dyn Write>,
    ) -> TestRun {
        let test = &self.suite.tests()[position];
        for stmt in &test.statements {
            let effects = self.manifest.effects_for(stmt);
            let mut failure = None;
            let mut applied = Vec::with_capacity(effects.len());
            for effect in &effects {
                let ok = match effect.kind {
                    EffectKind::Write => {
                        let value = stmt.args.first().cloned().unwrap_or_default();
                        state.entities.insert(effect.key.clone(), value);
                        true
                    }
                    EffectKind::Read => state.entities.contains_key(&effect.key),
                    EffectKind::Delete => state.entities.remove(&effect.key).is_some(),
                };
                applied.push(format!("{}({})", effect.kind, effect.key));
                if !ok {
                    failure = Some(format!(
                        "{} of absent key `{}` at `{stmt}`",
                        effect.kind, effect.key
                    ));
                    break;
                }
            }
            if let Some(trace) = trace.as_mut() {
                let _ = writeln!(
                    trace,
                    "{}\t{}\t{}\t{}",
                    test.name,
                    stmt.action,
                    if applied.is_empty() {
                        "-".to_string()
                    } else {
                        applied.join(",")
                    },
                    if failure.is_some() { "FAIL" } else { "ok" }
                );
            }
            if failure.is_some() {
                return TestRun {
                    passed: false,
                    reason: failure,
                };
            }
        }
        TestRun {
            passed: true,
            reason: None,
        }
    }

    fn run_positions(
        &self,
        positions: &[usize],
        mut trace: Option<&mut dyn Write>,
    ) -> (OutcomeVector, Vec<(usize, String)>) {
        let mut state = SimState::fresh(self.manifest);
        let mut outcomes = OutcomeVector::not_executed(self.suite);
        let mut reasons = Vec::new();
        for &p in positions {
            let run = self.run_test(p, &mut state, &mut trace);
            outcomes.results[p] = if run.passed {
                Outcome::Pass
            } else {
                Outcome::Fail
            };
            if let Some(reason) = run.reason {
                reasons.push((p, reason));
            }
        }
        (outcomes, reasons)
    }

    pub fn execute_schedule(&self, schedule: &Schedule) -> Result<OutcomeVector, SimError> {
        let positions = schedule.positions(self.suite)?;
        Ok(self.run_positions(&positions, None).0)
    }

    /// Like [`Simulator::execute_schedule`], writing one line per statement:
    /// `test<TAB>action<TAB>effects<TAB>ok|FAIL`.
    pub fn execute_traced(
        &self,
        schedule: &Schedule,
        trace: &mut dyn Write,
    ) -> Result<OutcomeVector, SimError> {
        let positions = schedule.positions(self.suite)?;
        Ok(self.run_positions(&positions, Some(trace)).0)
    }

    /// Outcomes of the original order; every test must pass.
    pub fn baseline_outcomes(&self) -> Result<OutcomeVector, SimError> {
        let all: Vec<usize> = (0..self.suite.len()).collect();
        let (outcomes, reasons) = self.run_positions(&all, None);
        if let Some((p, reason)) = reasons.into_iter().next() {
            return Err(SimError::BaselineFailure {
                test: self.suite.tests()[p].name.clone(),
                reason,
            });
        }
        Ok(outcomes)
    }
}

impl Executor for Simulator<'_> {
    fn run(&self, schedule: &[usize]) -> OutcomeVector {
        self.run_positions(schedule, None).0
    }

    fn cost(&self, position: usize) -> f64 {
        self.manifest.cost(&self.suite.tests()[position].name)
    }
}
