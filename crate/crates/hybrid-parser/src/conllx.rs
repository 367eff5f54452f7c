//! Extended CoNLL-X treebank files.
//!
//! One node per line, tab separated:
//! `ID TYPE EXTENT FORM POSTAG FEATS HEAD DEPREL`. TYPE is `T` (segment),
//! `E` (empty category) or `P` (phrase). A blank line ends a graph and lines
//! starting with `#` are comments kept with the following graph.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::{feat, EmptyCategory, Features, HybridGraph, MorphSegment, NodeRef, PhraseNode, Terminal, Edge};
use crate::label::Label;
use crate::notation::parse_location;
use crate::vocab::Vocabulary;

const KEY_LEMMA: &str = "lem";
const KEY_ROOT: &str = "root";
const KEY_LOCATION: &str = "loc";
const KEY_REFERENCE: &str = "ref";

const FEATURE_KEYS: &[&str] = &[
    feat::SEG_TYPE,
    feat::PERSON,
    feat::GENDER,
    feat::NUMBER,
    feat::CASE,
    feat::MOOD,
    feat::VOICE,
    feat::ASPECT,
    feat::STATE,
    feat::DERIVATION,
    feat::VFORM,
    feat::SP,
    feat::PRON_TYPE,
    KEY_LEMMA,
    KEY_ROOT,
    KEY_LOCATION,
    KEY_REFERENCE,
];

/// A graph with the comment lines that preceded it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TreebankEntry {
    /// Comment lines without the leading `#`.
    pub comments: Vec<String>,
    pub graph: HybridGraph,
}

impl TreebankEntry {
    pub fn new(graph: HybridGraph) -> TreebankEntry {
        TreebankEntry {
            comments: Vec::new(),
            graph,
        }
    }

    /// Value of a `# key = value` comment.
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }

    pub fn set_meta(&mut self, key: &str, value: &str) {
        self.comments.retain(|c| c.split_once('=').map(|(k, _)| k.trim() != key).unwrap_or(true));
        self.comments.push(format!(" {key} = {value}"));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TreebankDocument {
    pub entries: Vec<TreebankEntry>,
}

impl TreebankDocument {
    pub fn from_graphs(graphs: impl IntoIterator<Item = HybridGraph>) -> TreebankDocument {
        TreebankDocument {
            entries: graphs.into_iter().map(TreebankEntry::new).collect(),
        }
    }

    pub fn graphs(&self) -> impl Iterator<Item = &HybridGraph> {
        self.entries.iter().map(|e| &e.graph)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn absent(s: &str) -> bool {
    matches!(s, "_" | "-" | "–" | "")
}

struct Row {
    line: usize,
    id: usize,
    kind: char,
    extent: Option<(usize, usize)>,
    form: String,
    tag: String,
    feats: Features,
    head: Option<usize>,
    deprel: Option<String>,
}

fn parse_feats(s: &str, line: usize) -> Result<Features> {
    let mut out = Features::new();
    if absent(s) {
        return Ok(out);
    }
    let mut last: Option<String> = None;
    for piece in s.split('|') {
        let known = piece
            .split_once('=')
            .filter(|(k, _)| FEATURE_KEYS.contains(k));
        match (known, &last) {
            (Some((k, v)), _) => {
                if out.insert(k.to_string(), v.to_string()).is_some() {
                    return Err(Error::parse(line, format!("duplicate feature {k:?}")));
                }
                last = Some(k.to_string());
            }
            // Buckwalter uses `|` for alif madda; glue it back onto the value.
            (None, Some(k)) if !piece.contains('=') => {
                let v = out.get_mut(k).expect("inserted");
                v.push('|');
                v.push_str(piece);
            }
            _ => return Err(Error::parse(line, format!("malformed feature {piece:?}"))),
        }
    }
    for (k, v) in &out {
        if let Some(Some(allowed)) = feat::allowed(k) {
            if !allowed.contains(&v.as_str()) {
                return Err(Error::parse(line, format!("invalid value {v:?} for {k}")));
            }
        }
    }
    Ok(out)
}

fn parse_row(text: &str, line: usize) -> Result<Row> {
    let cols: Vec<&str> = text.split('\t').collect();
    if cols.len() != 8 {
        return Err(Error::parse(line, format!("expected 8 columns, found {}", cols.len())));
    }
    let id: usize = cols[0]
        .parse()
        .ok()
        .filter(|&i| i >= 1)
        .ok_or_else(|| Error::parse(line, format!("bad node id {:?}", cols[0])))?;
    let kind = match cols[1] {
        "T" => 'T',
        "E" => 'E',
        "P" => 'P',
        other => return Err(Error::parse(line, format!("bad node type {other:?}"))),
    };
    let extent = if kind == 'P' {
        let (a, b) = cols[2]
            .split_once('-')
            .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
            .ok_or_else(|| Error::parse(line, format!("bad extent {:?}", cols[2])))?;
        if a == 0 || a > b {
            return Err(Error::parse(line, format!("bad extent {:?}", cols[2])));
        }
        Some((a, b))
    } else {
        if !absent(cols[2]) {
            return Err(Error::parse(line, "extent given for a terminal"));
        }
        None
    };
    if kind != 'P' && absent(cols[3]) && cols[3] != "_" {
        return Err(Error::parse(line, "missing form"));
    }
    let head = match cols[6] {
        h if absent(h) || h == "0" => None,
        h => Some(
            h.parse::<usize>()
                .map_err(|_| Error::parse(line, format!("bad head {h:?}")))?,
        ),
    };
    let deprel = (!absent(cols[7])).then(|| cols[7].to_string());
    if head.is_some() != deprel.is_some() {
        return Err(Error::parse(line, "head and relation must be given together"));
    }
    Ok(Row {
        line,
        id,
        kind,
        extent,
        form: cols[3].to_string(),
        tag: cols[4].to_string(),
        feats: parse_feats(cols[5], line)?,
        head,
        deprel,
    })
}

fn build_graph(mut rows: Vec<Row>, vocab: &Vocabulary) -> Result<HybridGraph> {
    rows.sort_by_key(|r| r.id);
    let first_line = rows.iter().map(|r| r.line).min().unwrap_or(0);
    for (i, r) in rows.iter().enumerate() {
        if r.id != i + 1 {
            return Err(Error::parse(r.line, format!("node ids must run 1..n, found {}", r.id)));
        }
    }
    let n_terms = rows.iter().take_while(|r| r.kind != 'P').count();
    if let Some(r) = rows[n_terms..].iter().find(|r| r.kind != 'P') {
        return Err(Error::parse(r.line, "terminal row numbered after a phrase row"));
    }
    let mut g = HybridGraph::default();
    for r in &rows {
        match r.kind {
            'P' => {
                let (a, b) = r.extent.expect("phrase extent");
                if b > n_terms {
                    return Err(Error::parse(r.line, format!("extent {a}-{b} out of bounds")));
                }
                if !vocab.has_phrase(&r.tag) {
                    return Err(Error::parse(r.line, format!("unknown phrase tag {:?}", r.tag)));
                }
                g.phrases.push(PhraseNode::new(a - 1, b - 1, r.tag.clone()));
            }
            kind => {
                if !vocab.has_pos(&r.tag) {
                    return Err(Error::parse(r.line, format!("unknown part-of-speech tag {:?}", r.tag)));
                }
                let mut feats = r.feats.clone();
                if kind == 'E' {
                    for k in [KEY_LEMMA, KEY_ROOT, KEY_LOCATION, KEY_REFERENCE] {
                        if feats.contains_key(k) {
                            return Err(Error::parse(r.line, format!("{k} not allowed on an empty category")));
                        }
                    }
                    g.terminals.push(Terminal::Empty(EmptyCategory {
                        pos: r.tag.clone(),
                        form: r.form.clone(),
                        features: feats,
                    }));
                } else {
                    let location = feats
                        .remove(KEY_LOCATION)
                        .map(|l| parse_location(&l).map_err(|_| Error::parse(r.line, format!("bad location {l:?}"))))
                        .transpose()?;
                    let reference = match feats.remove(KEY_REFERENCE).as_deref() {
                        None => false,
                        Some("1") => true,
                        Some(v) => return Err(Error::parse(r.line, format!("bad ref flag {v:?}"))),
                    };
                    g.terminals.push(Terminal::Segment(MorphSegment {
                        location,
                        form: r.form.clone(),
                        pos: r.tag.clone(),
                        lemma: feats.remove(KEY_LEMMA),
                        root: feats.remove(KEY_ROOT),
                        features: feats,
                        reference,
                    }));
                }
            }
        }
    }
    let node = |id: usize| {
        if id <= n_terms {
            NodeRef::Terminal(id - 1)
        } else {
            NodeRef::Phrase(id - 1 - n_terms)
        }
    };
    for r in &rows {
        if let (Some(h), Some(rel)) = (r.head, &r.deprel) {
            if h > rows.len() {
                return Err(Error::parse(r.line, format!("head {h} does not exist")));
            }
            let label: Label = rel
                .parse()
                .map_err(|e| Error::parse(r.line, format!("{e}")))?;
            label
                .check(vocab)
                .map_err(|e| Error::parse(r.line, e))?;
            g.edges.push(Edge::new(node(r.id), node(h), label));
        }
    }
    let violations = g.validate();
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::parse(first_line, format!("invalid graph: {}", msg.join("; "))));
    }
    Ok(g)
}

/// Parses a whole treebank.
pub fn parse_treebank(text: &str, vocab: &Vocabulary) -> Result<TreebankDocument> {
    let mut doc = TreebankDocument::default();
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    let flush = |rows: &mut Vec<Row>, comments: &mut Vec<String>, doc: &mut TreebankDocument| -> Result<()> {
        if !rows.is_empty() {
            let graph = build_graph(std::mem::take(rows), vocab)?;
            doc.entries.push(TreebankEntry {
                comments: std::mem::take(comments),
                graph,
            });
        }
        Ok(())
    };
    for (n, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            flush(&mut rows, &mut comments, &mut doc)?;
        } else if let Some(c) = line.strip_prefix('#') {
            if !rows.is_empty() {
                return Err(Error::parse(n + 1, "comment inside a graph"));
            }
            comments.push(c.to_string());
        } else {
            rows.push(parse_row(line, n + 1)?);
        }
    }
    flush(&mut rows, &mut comments, &mut doc)?;
    Ok(doc)
}

pub fn read_treebank(mut r: impl Read, vocab: &Vocabulary) -> Result<TreebankDocument> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    parse_treebank(&text, vocab)
}

fn feats_column(t: &Terminal) -> String {
    let mut all: BTreeMap<&str, String> = t
        .features()
        .iter()
        .map(|(k, v)| (k.as_str(), v.clone()))
        .collect();
    if let Terminal::Segment(s) = t {
        if let Some(l) = &s.lemma {
            all.insert(KEY_LEMMA, l.clone());
        }
        if let Some(r) = &s.root {
            all.insert(KEY_ROOT, r.clone());
        }
        if let Some(l) = &s.location {
            all.insert(KEY_LOCATION, l.to_string());
        }
        if s.reference {
            all.insert(KEY_REFERENCE, "1".into());
        }
    }
    if all.is_empty() {
        return "_".into();
    }
    all.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join("|")
}

/// Canonical text of one graph, without comments or trailing blank line.
pub fn format_graph(g: &HybridGraph) -> String {
    let n = g.terminals.len();
    let id = |r: NodeRef| match r {
        NodeRef::Terminal(i) => i + 1,
        NodeRef::Phrase(p) => n + p + 1,
    };
    let head = |r: NodeRef| -> (String, String) {
        match g.head_edge(r) {
            Some(e) => (id(e.head).to_string(), e.label.to_string()),
            None => ("_".into(), "_".into()),
        }
    };
    let mut out = String::new();
    for (i, t) in g.terminals.iter().enumerate() {
        let (h, rel) = head(NodeRef::Terminal(i));
        let kind = if t.is_empty_category() { "E" } else { "T" };
        let _ = writeln!(
            out,
            "{}\t{kind}\t_\t{}\t{}\t{}\t{h}\t{rel}",
            i + 1,
            t.form(),
            t.pos(),
            feats_column(t)
        );
    }
    for (p, ph) in g.phrases.iter().enumerate() {
        let (h, rel) = head(NodeRef::Phrase(p));
        let _ = writeln!(
            out,
            "{}\tP\t{}-{}\t_\t{}\t_\t{h}\t{rel}",
            n + p + 1,
            ph.start + 1,
            ph.end + 1,
            ph.tag
        );
    }
    out
}

pub fn format_treebank(doc: &TreebankDocument) -> String {
    let mut out = String::new();
    for e in &doc.entries {
        for c in &e.comments {
            out.push('#');
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&format_graph(&e.graph));
        out.push('\n');
    }
    out
}

pub fn write_treebank(doc: &TreebankDocument, mut w: impl Write) -> Result<()> {
    w.write_all(format_treebank(doc).as_bytes())?;
    Ok(())
}
