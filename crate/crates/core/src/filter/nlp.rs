//! Test-name analysis: tokenization, part-of-speech tagging, read/write
//! classification and the three name-based edge filters.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::lexicon::{PartOfSpeech, PosLexicon};
use super::taxonomy::VerbTaxonomy;
use super::{Removal, RemovalReason};
use crate::graph::{DependencyGraph, EdgeStatus};
use crate::suite::TestSuite;

pub const STOP_WORDS: [&str; 1] = ["test"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RwClass {
    Read,
    Write,
    Unclassified,
}

impl fmt::Display for RwClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RwClass::Read => "READ",
            RwClass::Write => "WRITE",
            RwClass::Unclassified => "UNCLASSIFIED",
        })
    }
}

/// Which noun of a name counts as the verb's direct object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DobjMode {
    /// First noun after the verb.
    FirstNoun,
    /// Last noun of the run of consecutive nouns right after the verb, i.e.
    /// the head of a compound such as `CourseEvent`.
    #[default]
    LastNounOfLeadingCompound,
}

impl DobjMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DobjMode::FirstNoun => "first-noun",
            DobjMode::LastNounOfLeadingCompound => "last-noun-of-leading-compound",
        }
    }
}

impl FromStr for DobjMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-noun" => Ok(DobjMode::FirstNoun),
            "last-noun-of-leading-compound" => Ok(DobjMode::LastNounOfLeadingCompound),
            other => Err(format!("unknown direct-object mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NlpConfig {
    Verb,
    Dobj,
    Noun,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: RwClass,
    pub read_score: Option<f64>,
    pub write_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NameAnalysis {
    pub name: String,
    pub tokens: Vec<String>,
    pub verb: Option<String>,
    pub direct_object: Option<String>,
    pub nouns: BTreeSet<String>,
    pub rw_class: RwClass,
}

impl NameAnalysis {
    fn nouns_lower(&self) -> BTreeSet<String> {
        self.nouns.iter().map(|n| n.to_lowercase()).collect()
    }
}

/// Splits an identifier on case boundaries, digits and underscores, and
/// drops stop words. Digit runs are separators, not tokens.
pub fn tokenize(name: &str) -> Vec<String> {
    let chars: Vec<char> = name.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphabetic() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_uppercase() && !current.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            // `userTest` -> user|Test, `HTTPServer` -> HTTP|Server
            if prev.is_lowercase() || (prev.is_uppercase() && next_lower) {
                tokens.push(std::mem::take(&mut current));
            }
        }
        current.push(c);
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
        .into_iter()
        .filter(|t| !STOP_WORDS.contains(&t.to_lowercase().as_str()))
        .collect()
}

/// Assigns a verb to the group whose best Wu-Palmer score is higher. Ties and
/// verbs outside the taxonomy are unclassified.
pub fn classify_verb(verb: &str, taxonomy: &VerbTaxonomy) -> Classification {
    let verb = verb.to_lowercase();
    let best = |group: &BTreeSet<String>| {
        group
            .iter()
            .filter_map(|g| taxonomy.wup(&verb, g))
            .fold(None, |acc: Option<f64>, s| {
                Some(acc.map_or(s, |a| a.max(s)))
            })
    };
    let read_score = best(taxonomy.read_group());
    let write_score = best(taxonomy.write_group());
    let class = match (read_score, write_score) {
        (Some(r), Some(w)) if r > w => RwClass::Read,
        (Some(r), Some(w)) if w > r => RwClass::Write,
        _ => RwClass::Unclassified,
    };
    Classification {
        class,
        read_score,
        write_score,
    }
}

pub fn analyze_name(
    name: &str,
    lexicon: &PosLexicon,
    taxonomy: &VerbTaxonomy,
    mode: DobjMode,
) -> NameAnalysis {
    let tokens = tokenize(name);
    let tags: Vec<PartOfSpeech> = tokens.iter().map(|t| lexicon.tag(t)).collect();
    let verb_at = tags.iter().position(|t| *t == PartOfSpeech::Verb);
    let verb = verb_at.map(|i| tokens[i].clone());

    let direct_object = verb_at.and_then(|v| {
        let first = (v + 1..tokens.len()).find(|&i| tags[i] == PartOfSpeech::Noun)?;
        let chosen = match mode {
            DobjMode::FirstNoun => first,
            DobjMode::LastNounOfLeadingCompound => (first..tokens.len())
                .take_while(|&i| tags[i] == PartOfSpeech::Noun)
                .last()
                .unwrap_or(first),
        };
        Some(tokens[chosen].clone())
    });

    let nouns = tokens
        .iter()
        .zip(&tags)
        .filter(|(_, t)| **t == PartOfSpeech::Noun)
        .map(|(tok, _)| tok.clone())
        .collect();

    let rw_class = verb
        .as_deref()
        .map_or(RwClass::Unclassified, |v| classify_verb(v, taxonomy).class);

    NameAnalysis {
        name: name.to_string(),
        tokens,
        verb,
        direct_object,
        nouns,
        rw_class,
    }
}

/// Decision for one edge `dependent -> prerequisite`; `None` keeps it.
pub fn nlp_decision(
    dependent: &NameAnalysis,
    prerequisite: &NameAnalysis,
    config: NlpConfig,
) -> Option<RemovalReason> {
    use RwClass::*;
    match (dependent.rw_class, prerequisite.rw_class) {
        (Read, Read) => Some(RemovalReason::Rar),
        (Write, Read) => Some(RemovalReason::War),
        (Read | Write, Write) => match config {
            NlpConfig::Verb => None,
            NlpConfig::Dobj => match (&dependent.direct_object, &prerequisite.direct_object) {
                (Some(a), Some(b)) if !a.eq_ignore_ascii_case(b) => Some(RemovalReason::DobjDiff),
                _ => None,
            },
            NlpConfig::Noun => dependent
                .nouns_lower()
                .is_disjoint(&prerequisite.nouns_lower())
                .then_some(RemovalReason::NounDisjoint),
        },
        _ => None,
    }
}

/// Applies one NLP configuration to every candidate edge.
pub fn filter_nlp(
    graph: &DependencyGraph,
    suite: &TestSuite,
    config: NlpConfig,
    lexicon: &PosLexicon,
    taxonomy: &VerbTaxonomy,
    mode: DobjMode,
) -> (DependencyGraph, Vec<Removal>) {
    let analyses: Vec<NameAnalysis> = suite
        .names()
        .map(|n| analyze_name(n, lexicon, taxonomy, mode))
        .collect();
    let mut out = graph.clone();
    let mut removed = Vec::new();
    for key in graph.keys_with_status(EdgeStatus::Candidate) {
        if let Some(reason) = nlp_decision(&analyses[key.0], &analyses[key.1], config) {
            out.set_status(key, EdgeStatus::Removed)
                .expect("candidate edge");
            removed.push(Removal::new(&out, key, reason));
        }
    }
    (out, removed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analyze(name: &str) -> NameAnalysis {
        analyze_name(
            name,
            &PosLexicon::bundled(),
            &VerbTaxonomy::bundled(),
            DobjMode::default(),
        )
    }

    #[test]
    fn tokenizer() {
        assert_eq!(tokenize("searchUserTest"), ["search", "User"]);
        assert_eq!(tokenize("addCourseEventTest"), ["add", "Course", "Event"]);
        assert_eq!(
            tokenize("test_delete_user2Account"),
            ["delete", "user", "Account"]
        );
        assert_eq!(tokenize("loginHTTPServerTest"), ["login", "HTTP", "Server"]);
        assert_eq!(tokenize("TestTest"), Vec::<String>::new());
    }

    #[test]
    fn search_user() {
        let a = analyze("searchUserTest");
        assert_eq!(a.tokens, ["search", "User"]);
        assert_eq!(a.verb.as_deref(), Some("search"));
        assert_eq!(a.rw_class, RwClass::Read);
        assert_eq!(a.direct_object.as_deref(), Some("User"));
        assert!(!a.tokens.iter().any(|t| t.eq_ignore_ascii_case("test")));
    }

    #[test]
    fn compound_direct_object_modes() {
        let lex = PosLexicon::bundled();
        let tax = VerbTaxonomy::bundled();
        let first = analyze_name("addCourseEventTest", &lex, &tax, DobjMode::FirstNoun);
        assert_eq!(
            first.nouns,
            BTreeSet::from(["Course".to_string(), "Event".to_string()])
        );
        assert_eq!(first.direct_object.as_deref(), Some("Course"));
        let head = analyze_name(
            "addCourseEventTest",
            &lex,
            &tax,
            DobjMode::LastNounOfLeadingCompound,
        );
        assert_eq!(head.direct_object.as_deref(), Some("Event"));
        assert_eq!(head.nouns, first.nouns);
    }

    #[test]
    fn enrol_is_write() {
        let a = analyze("enrolUserTest");
        assert_eq!(a.verb.as_deref(), Some("enrol"));
        assert_eq!(a.rw_class, RwClass::Write);
    }

    #[test]
    fn no_verb_is_unclassified() {
        let a = analyze("userProfileTest");
        assert_eq!(a.verb, None);
        assert_eq!(a.direct_object, None);
        assert_eq!(a.rw_class, RwClass::Unclassified);
    }

    #[test]
    fn adjectives_are_not_nouns() {
        let a = analyze("addNewUserTest");
        assert_eq!(a.nouns, BTreeSet::from(["User".to_string()]));
        assert_eq!(a.direct_object.as_deref(), Some("User"));
    }

    #[test]
    fn classify_crud_and_examples() {
        // Scores frozen from an independent Python computation over data/taxonomy.txt.
        let tax = VerbTaxonomy::bundled();
        let c = classify_verb("read", &tax);
        assert_eq!((c.class, c.read_score), (RwClass::Read, Some(1.0)));
        for seed in ["create", "update", "delete"] {
            let c = classify_verb(seed, &tax);
            assert_eq!(
                (c.class, c.write_score),
                (RwClass::Write, Some(1.0)),
                "{seed}"
            );
        }
        for (verb, read, write, class) in [
            ("add", 2.0 / 7.0, 6.0 / 7.0, RwClass::Write),
            ("remove", 2.0 / 7.0, 6.0 / 7.0, RwClass::Write),
            ("enrol", 2.0 / 7.0, 6.0 / 7.0, RwClass::Write),
            ("search", 2.0 / 3.0, 1.0 / 3.0, RwClass::Read),
            ("login", 2.0 / 3.0, 1.0 / 3.0, RwClass::Read),
            ("navigate", 0.4, 0.4, RwClass::Unclassified),
            ("logout", 1.0 / 3.0, 1.0 / 3.0, RwClass::Unclassified),
        ] {
            let c = classify_verb(verb, &tax);
            assert_eq!(c.class, class, "{verb}");
            assert!((c.read_score.unwrap() - read).abs() < 1e-12, "{verb}");
            assert!((c.write_score.unwrap() - write).abs() < 1e-12, "{verb}");
        }
        assert_eq!(
            classify_verb("frobnicate", &tax).class,
            RwClass::Unclassified
        );
        assert_eq!(classify_verb("Add", &tax).class, RwClass::Write);
    }

    #[test]
    fn decision_table() {
        let search_course = analyze("searchCourseTest");
        let search_user = analyze("searchUserTest");
        let add_user = analyze("addUserTest");
        let add_course = analyze("addCourseTest");
        let add_event = analyze("addCourseEventTest");
        let nav = analyze("navigateHomeTest");
        for config in [NlpConfig::Verb, NlpConfig::Dobj, NlpConfig::Noun] {
            assert_eq!(
                nlp_decision(&search_course, &search_user, config),
                Some(RemovalReason::Rar)
            );
            assert_eq!(
                nlp_decision(&add_user, &search_user, config),
                Some(RemovalReason::War)
            );
            assert_eq!(nlp_decision(&search_user, &add_user, config), None);
            assert_eq!(nlp_decision(&nav, &add_user, config), None);
            assert_eq!(nlp_decision(&search_user, &nav, config), None);
        }
        assert_eq!(
            nlp_decision(&search_course, &add_user, NlpConfig::Verb),
            None
        );
        assert_eq!(
            nlp_decision(&search_course, &add_user, NlpConfig::Dobj),
            Some(RemovalReason::DobjDiff)
        );
        assert_eq!(
            nlp_decision(&search_course, &add_user, NlpConfig::Noun),
            Some(RemovalReason::NounDisjoint)
        );
        assert_eq!(nlp_decision(&add_event, &add_course, NlpConfig::Noun), None);
        assert_eq!(
            nlp_decision(&add_event, &add_course, NlpConfig::Dobj),
            Some(RemovalReason::DobjDiff)
        );
    }
}
