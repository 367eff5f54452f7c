//! Edge labels, including the enriched forms used by pure dependency graphs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::vocab::Vocabulary;

/// A relation with optional expansion markers: `+r` expands the dependent,
/// `r+` expands the head.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlaggedRel {
    pub dep_exp: bool,
    pub rel: String,
    pub head_exp: bool,
}

impl FlaggedRel {
    pub fn plain(rel: impl Into<String>) -> FlaggedRel {
        FlaggedRel {
            dep_exp: false,
            rel: rel.into(),
            head_exp: false,
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.dep_exp || self.head_exp
    }

    fn parse(s: &str) -> Option<FlaggedRel> {
        let dep_exp = s.starts_with('+');
        let body = s.strip_prefix('+').unwrap_or(s);
        let head_exp = body.ends_with('+');
        let rel = body.strip_suffix('+').unwrap_or(body);
        if rel.is_empty() || rel.contains(['+', '|']) || rel.contains(char::is_whitespace) {
            return None;
        }
        Some(FlaggedRel {
            dep_exp,
            rel: rel.to_string(),
            head_exp,
        })
    }
}

impl fmt::Display for FlaggedRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dep_exp {
            f.write_str("+")?;
        }
        f.write_str(&self.rel)?;
        if self.head_exp {
            f.write_str("+")?;
        }
        Ok(())
    }
}

/// Dependency edge label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Rel(FlaggedRel),
    /// `r1|pos|r2`: a dependent attached to a head through an elided node.
    Bridge {
        first: FlaggedRel,
        pos: String,
        second: FlaggedRel,
    },
}

impl Label {
    pub fn rel(rel: impl Into<String>) -> Label {
        Label::Rel(FlaggedRel::plain(rel))
    }

    /// The relation carried by the edge nearest the dependent.
    pub fn base(&self) -> &str {
        match self {
            Label::Rel(r) => &r.rel,
            Label::Bridge { first, .. } => &first.rel,
        }
    }

    /// True for an ordinary relation with no markers.
    pub fn is_simple(&self) -> bool {
        matches!(self, Label::Rel(r) if !r.is_flagged())
    }

    pub fn check(&self, vocab: &Vocabulary) -> Result<(), String> {
        let rels: Vec<&FlaggedRel> = match self {
            Label::Rel(r) => vec![r],
            Label::Bridge { first, pos, second } => {
                if !vocab.has_pos(pos) {
                    return Err(format!("unknown part of speech {pos:?} in label {self}"));
                }
                vec![first, second]
            }
        };
        for r in rels {
            if !vocab.has_relation(&r.rel) {
                return Err(format!("unknown relation {:?}", r.rel));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Rel(r) => write!(f, "{r}"),
            Label::Bridge { first, pos, second } => write!(f, "{first}|{pos}|{second}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelParseError(pub String);

impl fmt::Display for LabelParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed label {:?}", self.0)
    }
}

impl std::error::Error for LabelParseError {}

impl FromStr for Label {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Label, LabelParseError> {
        let err = || LabelParseError(s.to_string());
        let parts: Vec<&str> = s.split('|').collect();
        match parts.as_slice() {
            [one] => FlaggedRel::parse(one).map(Label::Rel).ok_or_else(err),
            [a, pos, b] => {
                if pos.is_empty() || pos.contains('+') {
                    return Err(err());
                }
                Ok(Label::Bridge {
                    first: FlaggedRel::parse(a).ok_or_else(err)?,
                    pos: pos.to_string(),
                    second: FlaggedRel::parse(b).ok_or_else(err)?,
                })
            }
            _ => Err(err()),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Label, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialized_forms() {
        for s in ["subj", "+link", "obj+", "+rslt+", "link|N|predx", "+link|N|circ"] {
            let l: Label = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
        let l: Label = "+link|N|circ".parse().unwrap();
        assert_eq!(l.base(), "link");
        assert!(!l.is_simple());
    }

    #[test]
    fn malformed() {
        for s in ["", "+", "a|b", "a||b", "a|N+|b", "++a"] {
            assert!(s.parse::<Label>().is_err(), "{s}");
        }
    }
}
