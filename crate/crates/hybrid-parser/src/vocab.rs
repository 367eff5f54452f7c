//! Closed tag inventories: part-of-speech tags, dependency relations and phrase tags.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const QURANIC: &str = include_str!("../data/quranic.vocab");

/// Tag sets loaded from a vocabulary file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pos: BTreeSet<String>,
    relations: BTreeSet<String>,
    phrases: BTreeSet<String>,
}

impl Vocabulary {
    /// The built-in Quranic Treebank inventory.
    pub fn quranic() -> &'static Vocabulary {
        static V: OnceLock<Vocabulary> = OnceLock::new();
        V.get_or_init(|| Vocabulary::parse(QURANIC).expect("built-in vocabulary"))
    }

    /// Parses the sectioned vocabulary format.
    pub fn parse(text: &str) -> Result<Vocabulary> {
        let mut v = Vocabulary {
            pos: BTreeSet::new(),
            relations: BTreeSet::new(),
            phrases: BTreeSet::new(),
        };
        let mut section: Option<&str> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                let name = &line[1..line.len() - 1];
                match name {
                    "pos" | "relations" | "phrases" => section = Some(name),
                    _ => {
                        return Err(Error::parse(
                            n + 1,
                            format!("unknown vocabulary section [{name}]"),
                        ))
                    }
                }
                continue;
            }
            let set = match section {
                Some("pos") => &mut v.pos,
                Some("relations") => &mut v.relations,
                Some("phrases") => &mut v.phrases,
                _ => return Err(Error::parse(n + 1, "tag outside of a section")),
            };
            for tok in line.split_whitespace() {
                if tok.contains(['|', '+', '(', ')']) {
                    return Err(Error::parse(n + 1, format!("reserved character in tag {tok:?}")));
                }
                set.insert(tok.to_string());
            }
        }
        Ok(v)
    }

    pub fn load(path: &std::path::Path) -> Result<Vocabulary> {
        let text = std::fs::read_to_string(path)?;
        Vocabulary::parse(&text)
    }

    pub fn has_pos(&self, tag: &str) -> bool {
        self.pos.contains(tag)
    }

    pub fn has_relation(&self, rel: &str) -> bool {
        self.relations.contains(rel)
    }

    pub fn has_phrase(&self, tag: &str) -> bool {
        self.phrases.contains(tag)
    }

    pub fn pos_tags(&self) -> impl Iterator<Item = &str> {
        self.pos.iter().map(String::as_str)
    }

    pub fn relations(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(String::as_str)
    }

    pub fn phrase_tags(&self) -> impl Iterator<Item = &str> {
        self.phrases.iter().map(String::as_str)
    }

    /// Stable digest of the inventory, stored with trained models.
    pub fn fingerprint(&self) -> String {
        let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" ");
        format!(
            "pos:{};rel:{};phrase:{}",
            join(&self.pos),
            join(&self.relations),
            join(&self.phrases)
        )
    }
}

/// Surface form of the independent pronoun for a phi-feature bundle.
///
/// The first person dual has no separate form and uses the plural.
pub fn pronoun_form(person: Option<&str>, gender: Option<&str>, number: Option<&str>) -> &'static str {
    match (person, gender, number) {
        (Some("1"), _, Some("S")) => ">anaA",
        (Some("1"), _, Some("D" | "P")) => "naHonu",
        (Some("2"), Some("F"), Some("S")) => ">anti",
        (Some("2"), _, Some("S")) => ">anta",
        (Some("2"), _, Some("D")) => ">antumaA",
        (Some("2"), Some("F"), Some("P")) => ">antun~a",
        (Some("2"), _, Some("P")) => ">antum",
        (Some("3"), Some("F"), Some("S")) => "hiya",
        (Some("3"), _, Some("D")) => "humaA",
        (Some("3"), Some("F"), Some("P")) => "hun~a",
        (Some("3"), _, Some("P")) => "hum",
        _ => "huwa",
    }
}

/// Form given to a reconstructed empty category of the given part of speech.
pub fn empty_category_form(pos: &str) -> &'static str {
    match pos {
        "N" | "ADJ" => "kaA}in",
        "V" => "kaAna",
        "PRON" => "huwa",
        _ => "*",
    }
}
