//! Static removal of likely-false candidate edges before validation.

mod depfree;
pub mod lexicon;
pub mod nlp;
pub mod taxonomy;

pub use depfree::{
    filter_dependency_free, rank_string_values, StringFrequency, StringFrequencyReport,
};
pub use lexicon::{PartOfSpeech, PosLexicon};
pub use nlp::{
    analyze_name, classify_verb, filter_nlp, tokenize, DobjMode, NameAnalysis, NlpConfig, RwClass,
};
pub use taxonomy::VerbTaxonomy;

use std::fmt;

use serde::{Serialize, Serializer};

use crate::graph::{DependencyGraph, EdgeKey};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RemovalReason {
    Rar,
    War,
    DobjDiff,
    NounDisjoint,
    DepFree(String),
}

impl fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RemovalReason::Rar => f.write_str("RAR"),
            RemovalReason::War => f.write_str("WAR"),
            RemovalReason::DobjDiff => f.write_str("DOBJ_DIFF"),
            RemovalReason::NounDisjoint => f.write_str("NOUN_DISJOINT"),
            RemovalReason::DepFree(value) => write!(f, "DEP_FREE:{value}"),
        }
    }
}

impl Serialize for RemovalReason {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// One edge removed by a filter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Removal {
    pub dependent: String,
    pub prerequisite: String,
    pub reason: RemovalReason,
}

impl Removal {
    pub(crate) fn new(graph: &DependencyGraph, key: EdgeKey, reason: RemovalReason) -> Self {
        Self {
            dependent: graph.name(key.0).to_string(),
            prerequisite: graph.name(key.1).to_string(),
            reason,
        }
    }
}

/// Filter report artifact.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FilterReport {
    pub format_version: u32,
    pub filters: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dobj_mode: Option<&'static str>,
    pub confirmed_values: Vec<String>,
    pub removed: Vec<Removal>,
}
