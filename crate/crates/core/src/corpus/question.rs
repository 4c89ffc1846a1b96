use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::TokenSequence;

/// An answer entity together with its index in a dataset's answer vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnswerLabel {
    pub canonical_name: String,
    pub class_index: usize,
}

impl AnswerLabel {
    pub fn new(canonical_name: impl Into<String>, class_index: usize) -> Self {
        AnswerLabel {
            canonical_name: canonical_name.into(),
            class_index,
        }
    }
}

impl fmt::Display for AnswerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognized {kind} `{value}`")]
pub struct ParseEnumError {
    kind: &'static str,
    value: String,
}

/// Case- and punctuation-insensitive key used when parsing enum names.
fn enum_key(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal { $($variant:ident => $text:literal $(| $alias:literal)*),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ParseEnumError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let key = enum_key(s);
                $(
                    if key == enum_key($text) || key == enum_key(stringify!($variant)) $(|| key == enum_key($alias))* {
                        return Ok($name::$variant);
                    }
                )+
                Err(ParseEnumError { kind: $kind, value: s.to_string() })
            }
        }
    };
}

named_enum! {
    /// Topical category of a question.
    Category, "category" {
        Science => "Science",
        History => "History",
        Literature => "Literature",
        FineArts => "Fine Arts",
        ReligionMythPhilSocSci => "Religion/Mythology/Philosophy/Social Science"
            | "Religion" | "Mythology" | "Philosophy" | "Social Science",
        CurrentEventsGeoGeneral => "Current Events/Geography/General Knowledge"
            | "Current Events" | "Geography" | "General Knowledge",
        Other => "Other",
    }
}

named_enum! {
    /// Where a question came from.
    Source, "source" {
        Training => "training",
        RegularTest => "regular_test" | "test",
        AdversarialIR => "adversarial_ir",
        AdversarialRNN => "adversarial_rnn" | "adversarial_neural",
    }
}

named_enum! {
    /// Human-assigned label for the adversarial technique a question uses.
    PhenomenonTag, "phenomenon" {
        ComposingSeenClues => "composing_seen_clues",
        LogicCalculations => "logic_calculations",
        MultiStepReasoning => "multi_step_reasoning",
        Paraphrase => "paraphrase",
        EntityTypeDistractor => "entity_type_distractor",
        NovelClues => "novel_clues",
    }
}

// The enums come out of `named_enum!`, which has no slot for `#[default]`.
#[allow(clippy::derivable_impls)]
impl Default for Category {
    fn default() -> Self {
        Category::Other
    }
}

#[allow(clippy::derivable_impls)]
impl Default for Source {
    fn default() -> Self {
        Source::Training
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub raw_text: String,
    pub tokens: TokenSequence,
    pub answer: AnswerLabel,
    pub category: Category,
    pub source: Source,
    pub phenomena: BTreeSet<PhenomenonTag>,
}

impl Question {
    /// Builds a question, tokenizing `raw_text` with the canonical tokenizer.
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>, answer: AnswerLabel) -> Self {
        let raw_text = raw_text.into();
        Question {
            id: id.into(),
            tokens: super::tokenize(&raw_text),
            raw_text,
            answer,
            category: Category::default(),
            source: Source::default(),
            phenomena: BTreeSet::new(),
        }
    }

    pub fn with_category(mut self, category: Category) -> Self {
        self.category = category;
        self
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}
