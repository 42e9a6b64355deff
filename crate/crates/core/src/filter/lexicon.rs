use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::FilterError;

pub const BUNDLED_LEXICON: &str = include_str!("../../data/lexicon.txt");

/// The CRUD anchors; always tagged as verbs.
pub const SEED_VERBS: [&str; 4] = ["create", "read", "update", "delete"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PartOfSpeech {
    Verb,
    Noun,
    Adj,
    Adv,
}

impl fmt::Display for PartOfSpeech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartOfSpeech::Verb => "VERB",
            PartOfSpeech::Noun => "NOUN",
            PartOfSpeech::Adj => "ADJ",
            PartOfSpeech::Adv => "ADV",
        })
    }
}

/// Token to part-of-speech lookup; unknown tokens are nouns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosLexicon {
    entries: BTreeMap<String, PartOfSpeech>,
}

impl PosLexicon {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn parse(source: &str) -> Result<Self, FilterError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in source.lines().enumerate() {
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let err = |message: String| FilterError::Lexicon {
                line: i + 1,
                message,
            };
            let mut fields = text.split_whitespace();
            let (Some(token), Some(pos), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(err(format!("expected `token POS`, got `{text}`")));
            };
            let pos = match pos.to_ascii_uppercase().as_str() {
                "VERB" => PartOfSpeech::Verb,
                "NOUN" => PartOfSpeech::Noun,
                "ADJ" => PartOfSpeech::Adj,
                "ADV" => PartOfSpeech::Adv,
                other => return Err(err(format!("unknown part of speech `{other}`"))),
            };
            entries.insert(token.to_lowercase(), pos);
        }
        for seed in SEED_VERBS {
            entries.insert(seed.to_string(), PartOfSpeech::Verb);
        }
        Ok(Self { entries })
    }

    pub fn tag(&self, token: &str) -> PartOfSpeech {
        self.entries
            .get(&token.to_lowercase())
            .copied()
            .unwrap_or(PartOfSpeech::Noun)
    }
}
