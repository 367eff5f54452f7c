//! The bracketed morphological feature notation, e.g.
//! `[bi+ POS:N ACT PCPL (IV) LEM:muSorix ROOT:Srx M GEN PRON:2MP]`.

use crate::error::{Error, Result};
use crate::graph::{feat, Location, MorphSegment};
use crate::vocab::Vocabulary;

/// Prefixes written without a part-of-speech tag.
const BARE_PREFIXES: &[(&str, &str)] = &[
    ("Al", "DET"),
    ("bi", "P"),
    ("ka", "P"),
    ("ta", "P"),
    ("sa", "FUT"),
    ("ya", "VOC"),
    ("ha", "VOC"),
];

const ROMAN: &[&str] = &[
    "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII",
];

/// Form of a suffixed pronoun.
pub fn suffix_pronoun_form(person: Option<&str>, gender: Option<&str>, number: Option<&str>) -> &'static str {
    match (person, gender, number) {
        (Some("1"), _, Some("S")) => "iy",
        (Some("1"), _, _) => "naA",
        (Some("2"), Some("F"), Some("S")) => "ki",
        (Some("2"), _, Some("S")) => "ka",
        (Some("2"), _, Some("D")) => "kumaA",
        (Some("2"), Some("F"), Some("P")) => "kun~a",
        (Some("2"), _, Some("P")) => "kum",
        (Some("3"), Some("F"), Some("S")) => "haA",
        (Some("3"), _, Some("D")) => "humaA",
        (Some("3"), Some("F"), Some("P")) => "hun~a",
        (Some("3"), _, Some("P")) => "hum",
        _ => "hu",
    }
}

/// Parses `(c:v)`, `(c:v:t)` or `(c:v:t:s)`.
pub fn parse_location(text: &str) -> Result<Location> {
    let bad = || Error::parse(1, format!("malformed location {text:?}"));
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(bad)?;
    let parts = inner
        .split(':')
        .map(|p| match p.parse::<u32>() {
            Ok(n) if n >= 1 && !p.starts_with('+') => Ok(n),
            _ => Err(bad()),
        })
        .collect::<Result<Vec<u32>>>()?;
    match parts.as_slice() {
        [c, v] => Ok(Location {
            chapter: *c,
            verse: *v,
            token: None,
            segment: None,
        }),
        [c, v, t] => Ok(Location::new(*c, *v, *t)),
        [c, v, t, s] => Ok(Location::new(*c, *v, *t).with_segment(*s)),
        _ => Err(bad()),
    }
}

fn split_phi(tag: &str) -> Option<(Option<&str>, Option<&str>, Option<&str>)> {
    let mut rest = tag;
    let mut take = |set: &[&'static str]| -> Option<&'static str> {
        let found = set.iter().find(|c| rest.starts_with(**c)).copied();
        if let Some(c) = found {
            rest = &rest[c.len()..];
        }
        found
    };
    let p = take(&["1", "2", "3"]);
    let g = take(&["M", "F"]);
    let n = take(&["S", "D", "P"]);
    (rest.is_empty() && (p.is_some() || g.is_some() || n.is_some())).then_some((p, g, n))
}

fn set_phi(seg: &mut MorphSegment, phi: (Option<&str>, Option<&str>, Option<&str>)) {
    for (key, v) in [(feat::PERSON, phi.0), (feat::GENDER, phi.1), (feat::NUMBER, phi.2)] {
        if let Some(v) = v {
            seg.features.insert(key.into(), v.into());
        }
    }
}

/// Phi features as a compound tag like `3MP`.
pub fn phi_tag(seg: &MorphSegment) -> String {
    [feat::PERSON, feat::GENDER, feat::NUMBER]
        .iter()
        .filter_map(|k| seg.features.get(*k).map(String::as_str))
        .collect()
}

fn suffix(form: &str, pos: &str, location: Option<Location>) -> MorphSegment {
    let mut s = MorphSegment::new(form, pos).with(feat::SEG_TYPE, "suffix");
    s.location = location;
    s
}

/// Splits one bracketed token annotation into segments.
///
/// Segment forms are not part of the notation: prefixes take their letter,
/// stems their lemma and suffixed pronouns the standard suffix form.
pub fn parse_feature_line(text: &str, location: Option<Location>) -> Result<Vec<MorphSegment>> {
    parse_feature_line_with(text, location, Vocabulary::quranic())
}

pub fn parse_feature_line_with(
    text: &str,
    location: Option<Location>,
    vocab: &Vocabulary,
) -> Result<Vec<MorphSegment>> {
    let trimmed = text.trim();
    let body = trimmed
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::parse(1, "feature line must be enclosed in brackets"))?;
    let base = text.find('[').unwrap_or(0) + 1;
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    let mut pos = 0;
    for tok in body.split(' ') {
        if !tok.is_empty() {
            tokens.push((base + pos, tok));
        }
        pos += tok.len() + 1;
    }
    if tokens.is_empty() {
        return Err(Error::parse(1, "empty feature line"));
    }

    let mut segs: Vec<MorphSegment> = Vec::new();
    let loc_for = |n: usize| location.map(|l| if l.token.is_some() { l.with_segment(n as u32 + 1) } else { l });
    let err = |offset: usize, msg: String| Error::parse(1, format!("offset {offset}: {msg}"));
    let check_pos = |offset: usize, p: &str| {
        if vocab.has_pos(p) {
            Ok(())
        } else {
            Err(err(offset, format!("unknown part-of-speech tag {p:?}")))
        }
    };

    let mut i = 0;
    while i < tokens.len() {
        let (offset, tok) = tokens[i];
        i += 1;
        // Segment-opening tags.
        if let Some(p) = tok.strip_prefix("POS:") {
            check_pos(offset, p)?;
            let mut s = MorphSegment::new("", p).with(feat::SEG_TYPE, "stem");
            s.location = loc_for(segs.len());
            segs.push(s);
            continue;
        }
        if let Some(phi) = tok.strip_prefix("PRON:").or_else(|| tok.strip_prefix("+PRON:")) {
            let parts = split_phi(phi).ok_or_else(|| err(offset, format!("bad pronoun tag {tok:?}")))?;
            let mut s = suffix(suffix_pronoun_form(parts.0, parts.1, parts.2), "PRON", loc_for(segs.len()));
            set_phi(&mut s, parts);
            s.features.insert(feat::PRON_TYPE.into(), "object".into());
            segs.push(s);
            continue;
        }
        if let Some(rest) = tok.strip_prefix('+') {
            let s = match rest.split_once(':') {
                Some((form, p)) => {
                    check_pos(offset, p)?;
                    suffix(&format!("{form}~a"), p, loc_for(segs.len()))
                }
                None if rest == "VOC" => suffix("m~a", "VOC", loc_for(segs.len())),
                None => return Err(err(offset, format!("unknown suffix tag {tok:?}"))),
            };
            segs.push(s);
            continue;
        }
        if let Some(rest) = tok.strip_suffix('+') {
            let (form, p) = match rest.split_once(':') {
                Some((form, p)) => (form, p),
                None => match BARE_PREFIXES.iter().find(|(f, _)| *f == rest) {
                    Some((f, p)) => (*f, *p),
                    None => return Err(err(offset, format!("unknown prefix tag {tok:?}"))),
                },
            };
            check_pos(offset, p)?;
            let mut s = MorphSegment::new(form, p).with(feat::SEG_TYPE, "prefix");
            s.location = loc_for(segs.len());
            segs.push(s);
            continue;
        }

        // Feature tags attach to the last opened segment.
        let cur = segs
            .last_mut()
            .ok_or_else(|| err(offset, format!("feature {tok:?} before any segment")))?;
        let mut put = |k: &str, v: &str| {
            cur.features.insert(k.to_string(), v.to_string());
        };
        match tok {
            "ACT" | "PASS" if tokens.get(i).map(|t| t.1) == Some("PCPL") => {
                put(feat::DERIVATION, &format!("{tok} PCPL"));
                i += 1;
            }
            "ACT" | "PASS" => put(feat::VOICE, tok),
            "VN" => put(feat::DERIVATION, "VN"),
            "PERF" | "IMPF" | "IMPV" => put(feat::ASPECT, tok),
            "IND" | "SUBJ" | "JUS" => put(feat::MOOD, tok),
            "NOM" | "ACC" | "GEN" => put(feat::CASE, tok),
            "DEF" | "INDEF" => put(feat::STATE, tok),
            _ => {
                if let Some(l) = tok.strip_prefix("LEM:") {
                    cur.lemma = Some(l.to_string());
                } else if let Some(r) = tok.strip_prefix("ROOT:") {
                    cur.root = Some(r.to_string());
                } else if let Some(sp) = tok.strip_prefix("SP:") {
                    put(feat::SP, sp);
                } else if let Some(m) = tok.strip_prefix("MOOD:") {
                    if !matches!(m, "IND" | "SUBJ" | "JUS") {
                        return Err(err(offset, format!("unknown mood {m:?}")));
                    }
                    put(feat::MOOD, m);
                } else if let Some(r) = tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
                    if !ROMAN.contains(&r) {
                        return Err(err(offset, format!("unknown verb form {tok:?}")));
                    }
                    put(feat::VFORM, r);
                } else if let Some(phi) = split_phi(tok) {
                    set_phi(cur, phi);
                } else {
                    return Err(err(offset, format!("unknown tag {tok:?}")));
                }
            }
        }
    }
    for s in &mut segs {
        if s.form.is_empty() {
            s.form = s.lemma.clone().unwrap_or_else(|| s.pos.clone());
        }
    }
    Ok(segs)
}

/// Writes segments back in the bracketed notation, tags in canonical order.
pub fn write_feature_line(segs: &[MorphSegment]) -> String {
    let mut tags: Vec<String> = Vec::new();
    for s in segs {
        let f = |k: &str| s.features.get(k).map(String::as_str);
        match f(feat::SEG_TYPE) {
            Some("prefix") => {
                if BARE_PREFIXES.contains(&(s.form.as_str(), s.pos.as_str())) {
                    tags.push(format!("{}+", s.form));
                } else {
                    tags.push(format!("{}:{}+", s.form, s.pos));
                }
            }
            Some("suffix") => {
                if s.pos == "PRON" {
                    tags.push(format!("PRON:{}", phi_tag(s)));
                } else if s.pos == "VOC" && s.form == "m~a" {
                    tags.push("+VOC".into());
                } else {
                    let letter = s.form.strip_suffix("~a").unwrap_or(&s.form);
                    tags.push(format!("+{}:{}", letter, s.pos));
                }
            }
            _ => {
                tags.push(format!("POS:{}", s.pos));
                for k in [feat::DERIVATION, feat::ASPECT, feat::VOICE] {
                    if let Some(v) = f(k) {
                        tags.push(v.to_string());
                    }
                }
                if let Some(v) = f(feat::VFORM) {
                    tags.push(format!("({v})"));
                }
                if let Some(l) = &s.lemma {
                    tags.push(format!("LEM:{l}"));
                }
                if let Some(r) = &s.root {
                    tags.push(format!("ROOT:{r}"));
                }
                if let Some(v) = f(feat::SP) {
                    tags.push(format!("SP:{v}"));
                }
                let phi = phi_tag(s);
                if !phi.is_empty() {
                    tags.push(phi);
                }
                for k in [feat::STATE, feat::CASE] {
                    if let Some(v) = f(k) {
                        tags.push(v.to_string());
                    }
                }
                if let Some(v) = f(feat::MOOD) {
                    tags.push(format!("MOOD:{v}"));
                }
            }
        }
    }
    format!("[{}]", tags.join(" "))
}

/// A sentence read from a feature-notation file.
#[derive(Debug, Clone)]
pub struct NotatedSentence {
    pub location: Option<Location>,
    pub segments: Vec<MorphSegment>,
}

/// Reads lines of the form `(c:v:t) [tags]`. Tokens of one verse form one
/// sentence; a blank line also ends a sentence.
pub fn read_feature_file(text: &str) -> Result<Vec<NotatedSentence>> {
    let mut out: Vec<NotatedSentence> = Vec::new();
    let mut cur: Option<NotatedSentence> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let at = |e: Error| match e {
            Error::Parse { message, .. } => Error::parse(n + 1, message),
            other => other,
        };
        if line.is_empty() {
            out.extend(cur.take());
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let (loc, rest) = match line.strip_prefix('(') {
            Some(_) => {
                let close = line
                    .find(')')
                    .ok_or_else(|| Error::parse(n + 1, "unterminated location"))?;
                (Some(parse_location(&line[..=close]).map_err(at)?), line[close + 1..].trim())
            }
            None => (None, line),
        };
        let verse = loc.map(|l| (l.chapter, l.verse));
        let same = cur
            .as_ref()
            .map(|c| c.location.map(|l| (l.chapter, l.verse)) == verse)
            .unwrap_or(false);
        if !same {
            out.extend(cur.take());
        }
        let segs = parse_feature_line(rest, loc).map_err(at)?;
        cur.get_or_insert_with(|| NotatedSentence {
            location: loc.map(|l| Location {
                token: None,
                segment: None,
                ..l
            }),
            segments: Vec::new(),
        })
        .segments
        .extend(segs);
    }
    out.extend(cur);
    Ok(out)
}
