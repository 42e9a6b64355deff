//! Application manifest: the declarative ground truth for which statements
//! write, read or delete persistent entities.
//!
//! ```json
//! {
//!   "actions": ["sendKeys", "click", "assertText"],
//!   "input_submitting": ["sendKeys"],
//!   "effects": [
//!     { "action": "sendKeys", "locator": "id=username", "arity": 1,
//!       "effects": [{ "kind": "WRITE", "key": "user:{arg0}" }] }
//!   ],
//!   "initial_state": ["user:admin"],
//!   "costs": { "addUserTest": 2.0 }
//! }
//! ```
//!
//! Locator patterns may contain one `*` wildcard. The first rule matching a
//! statement's action, locator and argument count wins.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ManifestError;
use crate::suite::Statement;

pub const DEFAULT_INPUT_SUBMITTING: &str = "sendKeys";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCatalog {
    pub input_submitting: BTreeSet<String>,
    pub all_actions: BTreeSet<String>,
}

impl ActionCatalog {
    pub fn new<A, I>(all: A, input_submitting: I) -> Result<Self, ManifestError>
    where
        A: IntoIterator,
        A::Item: Into<String>,
        I: IntoIterator,
        I::Item: Into<String>,
    {
        let all_actions: BTreeSet<String> = all.into_iter().map(Into::into).collect();
        let input_submitting: BTreeSet<String> =
            input_submitting.into_iter().map(Into::into).collect();
        if let Some(missing) = input_submitting.difference(&all_actions).next() {
            return Err(ManifestError::Schema(format!(
                "input-submitting action `{missing}` is not declared in `actions`"
            )));
        }
        Ok(Self {
            input_submitting,
            all_actions,
        })
    }

    pub fn is_input_submitting(&self, action: &str) -> bool {
        self.input_submitting.contains(action)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EffectKind {
    Write,
    Read,
    Delete,
}

impl std::fmt::Display for EffectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EffectKind::Write => "WRITE",
            EffectKind::Read => "READ",
            EffectKind::Delete => "DELETE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Arg(usize),
}

/// A key template such as `user:{arg0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyTemplate {
    raw: String,
    segments: Vec<Segment>,
}

impl KeyTemplate {
    pub fn parse(raw: &str) -> Result<Self, ManifestError> {
        let mut segments = Vec::new();
        let mut text = String::new();
        let mut rest = raw;
        while let Some(pos) = rest.find("{arg") {
            text.push_str(&rest[..pos]);
            let after = &rest[pos + 4..];
            let close = after.find('}').ok_or_else(|| {
                ManifestError::Schema(format!("unterminated placeholder in `{raw}`"))
            })?;
            let index = after[..close].parse::<usize>().map_err(|_| {
                ManifestError::Schema(format!(
                    "bad placeholder `{{arg{}}}` in `{raw}`",
                    &after[..close]
                ))
            })?;
            if !text.is_empty() {
                segments.push(Segment::Text(std::mem::take(&mut text)));
            }
            segments.push(Segment::Arg(index));
            rest = &after[close + 1..];
        }
        text.push_str(rest);
        if !text.is_empty() {
            segments.push(Segment::Text(text));
        }
        Ok(Self {
            raw: raw.to_string(),
            segments,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn max_placeholder(&self) -> Option<usize> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Arg(i) => Some(*i),
                Segment::Text(_) => None,
            })
            .max()
    }

    /// Caller guarantees `args` covers every placeholder.
    pub fn resolve(&self, args: &[String]) -> String {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Text(t) => t.as_str(),
                Segment::Arg(i) => args[*i].as_str(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effect {
    pub kind: EffectKind,
    pub key: KeyTemplate,
}

/// A locator pattern with at most one `*` wildcard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocatorPattern {
    prefix: String,
    suffix: Option<String>,
}

impl LocatorPattern {
    pub fn parse(raw: &str) -> Result<Self, ManifestError> {
        match raw.matches('*').count() {
            0 => Ok(Self {
                prefix: raw.to_string(),
                suffix: None,
            }),
            1 => {
                let (prefix, suffix) = raw.split_once('*').unwrap();
                Ok(Self {
                    prefix: prefix.to_string(),
                    suffix: Some(suffix.to_string()),
                })
            }
            _ => Err(ManifestError::Schema(format!(
                "locator pattern `{raw}` has more than one `*`"
            ))),
        }
    }

    pub fn matches(&self, locator: &str) -> bool {
        match &self.suffix {
            None => locator == self.prefix,
            Some(suffix) => {
                locator.len() >= self.prefix.len() + suffix.len()
                    && locator.starts_with(&self.prefix)
                    && locator.ends_with(suffix.as_str())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectRule {
    pub action: String,
    pub locator: String,
    pattern: LocatorPattern,
    pub arity: usize,
    pub effects: Vec<Effect>,
}

impl EffectRule {
    pub fn matches(&self, stmt: &Statement) -> bool {
        stmt.action == self.action
            && stmt.args.len() >= self.arity
            && self.pattern.matches(&stmt.locator)
    }
}

/// A resolved effect of one statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedEffect {
    pub kind: EffectKind,
    pub key: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppManifest {
    pub catalog: ActionCatalog,
    pub rules: Vec<EffectRule>,
    pub initial_state: BTreeSet<String>,
    pub costs: BTreeMap<String, f64>,
}

impl AppManifest {
    /// Effects of a statement under the first matching rule; no rule means
    /// no persistent effect.
    pub fn effects_for(&self, stmt: &Statement) -> Vec<ResolvedEffect> {
        self.rules
            .iter()
            .find(|rule| rule.matches(stmt))
            .map(|rule| {
                rule.effects
                    .iter()
                    .map(|e| ResolvedEffect {
                        kind: e.kind,
                        key: e.key.resolve(&stmt.args),
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Simulated runtime of a test, 1 unit unless overridden.
    pub fn cost(&self, test: &str) -> f64 {
        self.costs.get(test).copied().unwrap_or(1.0)
    }

    pub fn to_json(&self) -> String {
        let raw = RawManifest {
            actions: self.catalog.all_actions.iter().cloned().collect(),
            input_submitting: Some(self.catalog.input_submitting.iter().cloned().collect()),
            effects: self
                .rules
                .iter()
                .map(|r| RawRule {
                    action: r.action.clone(),
                    locator: r.locator.clone(),
                    arity: r.arity,
                    effects: r
                        .effects
                        .iter()
                        .map(|e| RawEffect {
                            kind: e.kind,
                            key: e.key.as_str().to_string(),
                        })
                        .collect(),
                })
                .collect(),
            initial_state: self.initial_state.iter().cloned().collect(),
            costs: self.costs.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("manifest serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEffect {
    kind: EffectKind,
    key: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    action: String,
    locator: String,
    #[serde(default)]
    arity: usize,
    effects: Vec<RawEffect>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_submitting: Option<Vec<String>>,
    #[serde(default)]
    effects: Vec<RawRule>,
    #[serde(default)]
    initial_state: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    costs: BTreeMap<String, f64>,
}

/// Parses and validates a JSON manifest. `input_submitting` defaults to
/// `["sendKeys"]` when omitted.
pub fn parse_manifest(source: &str) -> Result<AppManifest, ManifestError> {
    let raw: RawManifest =
        serde_json::from_str(source).map_err(|e| ManifestError::Schema(e.to_string()))?;
    let input = raw
        .input_submitting
        .unwrap_or_else(|| vec![DEFAULT_INPUT_SUBMITTING.to_string()]);
    let catalog = ActionCatalog::new(raw.actions, input)?;

    let mut rules = Vec::with_capacity(raw.effects.len());
    for (i, rule) in raw.effects.into_iter().enumerate() {
        if !catalog.all_actions.contains(&rule.action) {
            return Err(ManifestError::Schema(format!(
                "effect rule {i} uses undeclared action `{}`",
                rule.action
            )));
        }
        let pattern = LocatorPattern::parse(&rule.locator)?;
        let mut effects = Vec::with_capacity(rule.effects.len());
        for effect in rule.effects {
            let key = KeyTemplate::parse(&effect.key)?;
            if let Some(index) = key.max_placeholder().filter(|&idx| idx >= rule.arity) {
                return Err(ManifestError::PlaceholderIndexOutOfRange {
                    rule: i,
                    action: rule.action,
                    locator: rule.locator,
                    index,
                    arity: rule.arity,
                });
            }
            effects.push(Effect {
                kind: effect.kind,
                key,
            });
        }
        rules.push(EffectRule {
            action: rule.action,
            locator: rule.locator,
            pattern,
            arity: rule.arity,
            effects,
        });
    }

    for (test, cost) in &raw.costs {
        if !(cost.is_finite() && *cost > 0.0) {
            return Err(ManifestError::Schema(format!(
                "cost of `{test}` must be positive"
            )));
        }
    }

    Ok(AppManifest {
        catalog,
        rules,
        initial_state: raw.initial_state.into_iter().collect(),
        costs: raw.costs,
    })
}
