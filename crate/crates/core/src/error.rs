use thiserror::Error;

/// Errors raised while reading a test suite.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate test name `{name}`")]
    DuplicateTestName { line: usize, name: String },
    #[error("line {line}: unknown action `{action}`")]
    UnknownAction { line: usize, action: String },
}

/// Errors raised while reading or validating an application manifest.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("manifest schema error: {0}")]
    Schema(String),
    #[error("effect rule {rule} (`{action} {locator}`): placeholder {{arg{index}}} out of range for arity {arity}")]
    PlaceholderIndexOutOfRange {
        rule: usize,
        action: String,
        locator: String,
        index: usize,
        arity: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown test `{0}`")]
    UnknownNode(String),
    #[error("edge {dependent} -> {prerequisite} does not point backward in the original order")]
    NotBackward {
        dependent: String,
        prerequisite: String,
    },
    #[error("no edge {dependent} -> {prerequisite}")]
    MissingEdge {
        dependent: String,
        prerequisite: String,
    },
    #[error("edge {dependent} -> {prerequisite} is already {status}")]
    IllegalTransition {
        dependent: String,
        prerequisite: String,
        status: String,
    },
    #[error("graph document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown test `{0}`")]
    UnknownTestName(String),
    #[error("test `{0}` appears more than once in the schedule")]
    DuplicateTestName(String),
    #[error("baseline failure: test `{test}` fails in the original order ({reason})")]
    BaselineFailure { test: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("value `{0}` does not occur in the string frequency report")]
    UnknownValue(String),
    #[error("taxonomy: {0}")]
    Taxonomy(String),
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("no candidate edge left to validate")]
    EmptyWorklist,
    #[error("edge {dependent} -> {prerequisite} cannot be inverted: the prerequisite is still reachable through other edges")]
    InversionImpossible {
        dependent: String,
        prerequisite: String,
    },
    #[error("test `{test}` fails but every earlier test it could depend on was already refuted")]
    RecoveryStalled { test: String },
    #[error("validation did not converge within {budget} steps")]
    IterationBudgetExceeded { budget: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("graph still has {0} candidate edge(s); validate it first")]
    GraphNotValidated(usize),
    #[error("empty schedule set")]
    EmptyScheduleSet,
    #[error("schedule runtimes must be positive")]
    NonPositiveRuntime,
    #[error("soundness violation: test `{test}` fails in schedule #{index} {schedule:?}")]
    SoundnessViolation {
        index: usize,
        schedule: Vec<String>,
        test: String,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Errors surfaced by the end-to-end pipeline.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0} value(s) need confirmation but no terminal is attached and no --assume-yes/--assume-no list was given")]
    NonInteractiveWithoutAssumptions(usize),
}
