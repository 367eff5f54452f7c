//! Seeded generator of small synthetic treebanks.
//!
//! Every attachment follows from the features of the words involved, so a
//! classifier can learn it:
//!
//! | dependent                                   | head                  | relation |
//! |---------------------------------------------|-----------------------|----------|
//! | NOM noun right after a plain verb           | the verb              | `subj`   |
//! | ACC noun or object suffix after a verb      | the verb              | `obj`    |
//! | ADJ agreeing in case                        | the preceding noun    | `adj`    |
//! | GEN noun or suffix after a noun             | that noun             | `poss`   |
//! | GEN noun or suffix after P or LOC           | the particle          | `gen`    |
//! | P (or PP) closing a clause                  | verb or empty noun    | `link`   |
//! | NOM noun after a copula, ACC noun after it  | the copula            | `subjx`, `predx` |
//! | ACC noun after `<in~a`, then NOM            | `<in~a`               | `subjx`, `predx` |
//! | INDEF NOM after a DEF NOM subject           | the subject           | `pred`   |
//! | condition verb (or VS), result clause       | the conditional       | `cond`, `rslt` |
//! | verb after `>an`                            | `>an`                 | `sub`    |
//! | second verb after `wa`                      | the first verb        | `conj`   |
//!
//! Profile flags add structure:
//!
//! * `+phrases` wraps prepositional, conditional, nominal and subordinate
//!   constituents in phrases tagged by [`phrase_tag`].
//! * `+ellipsis` drops subject pronouns (restored as empty `PRON` nodes),
//!   elides the predicate of `<in~a` and of `laA`, and attaches a
//!   prepositional phrase to an elided circumstantial noun.
//! * `+disconnected` joins two verbal clauses with a headless `wa` and
//!   adds a headless `fa` before conditional results.
//! * `+nonprojective` injects a crossing edge into a share of the graphs
//!   (10% by default). Those graphs carry the comment `injected = crossing`.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conllx::{TreebankDocument, TreebankEntry};
use crate::conversion::phrase_tag;
use crate::graph::{feat, EmptyCategory, Edge, Features, HybridGraph, Location, MorphSegment, NodeRef, PhraseNode, Terminal};
use crate::label::Label;
use crate::vocab::{empty_category_form, pronoun_form};

/// Which structures a generated corpus contains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub phrases: bool,
    pub ellipsis: bool,
    pub nonprojective: bool,
    pub disconnected: bool,
    /// Share of graphs with an injected crossing edge.
    pub crossing_rate: f64,
}

impl Profile {
    pub fn pure() -> Profile {
        Profile {
            phrases: false,
            ellipsis: false,
            nonprojective: false,
            disconnected: false,
            crossing_rate: 0.1,
        }
    }

    pub fn all() -> Profile {
        Profile {
            phrases: true,
            ellipsis: true,
            nonprojective: true,
            disconnected: true,
            crossing_rate: 0.1,
        }
    }
}

impl Default for Profile {
    fn default() -> Profile {
        Profile::pure()
    }
}

impl FromStr for Profile {
    type Err = String;

    /// Accepts `pure`, `all`, or a comma-separated list such as
    /// `+phrases,+ellipsis`.
    fn from_str(s: &str) -> Result<Profile, String> {
        let mut p = Profile::pure();
        for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match part.trim_start_matches('+') {
                "pure" | "pure-dep" => {}
                "all" => p = Profile::all(),
                "phrases" => p.phrases = true,
                "ellipsis" => p.ellipsis = true,
                "nonprojective" | "non-projective" => p.nonprojective = true,
                "disconnected" => p.disconnected = true,
                other => return Err(format!("unknown profile flag {other:?}")),
            }
        }
        Ok(p)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flags: Vec<&str> = [
            (self.phrases, "+phrases"),
            (self.ellipsis, "+ellipsis"),
            (self.nonprojective, "+nonprojective"),
            (self.disconnected, "+disconnected"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if flags.is_empty() {
            f.write_str("pure")
        } else {
            f.write_str(&flags.join(","))
        }
    }
}

struct Verb {
    lemma: &'static str,
    root: &'static str,
    transitive: bool,
}

const VERBS: &[Verb] = &[
    Verb { lemma: "xalaqa", root: "xlq", transitive: true },
    Verb { lemma: "jaEala", root: "jEl", transitive: true },
    Verb { lemma: "kataba", root: "ktb", transitive: true },
    Verb { lemma: "Ealima", root: "Elm", transitive: true },
    Verb { lemma: "nazala", root: "nzl", transitive: false },
    Verb { lemma: "*ahaba", root: "*hb", transitive: false },
    Verb { lemma: "jalasa", root: "jls", transitive: false },
];

const NOUNS: &[(&str, &str, &str)] = &[
    ("kitaAb", "ktb", "M"),
    ("rasuwl", "rsl", "M"),
    ("qalob", "qlb", "M"),
    ("nuwr", "nwr", "M"),
    ("Eabod", "Ebd", "M"),
    ("samaA'", "smw", "F"),
    ("jan~ap", "jnn", "F"),
    ("bayot", "byt", "M"),
    ("yawom", "ywm", "M"),
    ("fatoH", "ftH", "M"),
];

const ADJECTIVES: &[(&str, &str)] = &[
    ("Eaziym", "EZm"),
    ("kabiyr", "kbr"),
    ("Hasan", "Hsn"),
    ("qadiyr", "qdr"),
];

const PROPER: &[(&str, &str)] = &[("{ll~ah", "Alh"), ("muwsaY", ""), ("<iboraAhiym", "")];

/// Prepositions: form, and whether the form is a prefix.
const PREPOSITIONS: &[(&str, bool)] = &[("bi", true), ("li", true), ("fiy", false), ("mina", false), ("EalaY", false)];

/// Pronoun suffixes: form, person, gender, number.
const SUFFIXES: &[(&str, &str, &str, &str)] = &[
    ("hu", "3", "M", "S"),
    ("haA", "3", "F", "S"),
    ("hum", "3", "M", "P"),
    ("ka", "2", "M", "S"),
    ("kum", "2", "M", "P"),
];

const VERB_AGREEMENT: &[(&str, &str, &str, &str)] = &[
    ("3", "M", "S", ""),
    ("3", "F", "S", "t"),
    ("3", "M", "P", "uwA"),
    ("1", "M", "S", "otu"),
    ("2", "M", "S", "ota"),
    ("1", "M", "P", "onaA"),
];

fn case_ending(case: &str, definite: bool) -> &'static str {
    match (case, definite) {
        ("NOM", true) => "u",
        ("ACC", true) => "a",
        ("GEN", true) => "i",
        ("NOM", false) => "N",
        ("ACC", false) => "F",
        _ => "K",
    }
}

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    profile: Profile,
    verse: u32,
    token: u32,
    segment: u32,
    g: HybridGraph,
}

impl Builder<'_> {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn pick<'t, T>(&mut self, items: &'t [T]) -> &'t T {
        items.choose(self.rng).expect("non-empty lexicon")
    }

    fn next(&self) -> usize {
        self.g.terminals.len()
    }

    fn token(&mut self) {
        self.token += 1;
        self.segment = 0;
    }

    fn seg(&mut self, form: &str, pos: &str, features: &[(&str, &str)], lemma: Option<&str>, root: Option<&str>) -> usize {
        self.segment += 1;
        let mut s = MorphSegment::new(form, pos);
        s.location = Some(Location::new(1, self.verse, self.token).with_segment(self.segment));
        for (k, v) in features {
            s.features.insert(k.to_string(), v.to_string());
        }
        s.lemma = lemma.map(str::to_string);
        s.root = root.filter(|r| !r.is_empty()).map(str::to_string);
        self.g.terminals.push(Terminal::Segment(s));
        self.next() - 1
    }

    fn empty(&mut self, pos: &str, form: &str) -> usize {
        self.g.terminals.push(Terminal::Empty(EmptyCategory {
            pos: pos.to_string(),
            form: form.to_string(),
            features: Features::new(),
        }));
        self.next() - 1
    }

    fn edge(&mut self, dependent: NodeRef, head: NodeRef, rel: &str) {
        self.g.edges.push(Edge::new(dependent, head, Label::rel(rel)));
    }

    fn link(&mut self, dependent: usize, head: usize, rel: &str) {
        self.edge(NodeRef::Terminal(dependent), NodeRef::Terminal(head), rel);
    }

    /// Wraps the terminals from `start` in a phrase when phrases are on.
    /// The tag is filled in once the graph is complete.
    fn wrap(&mut self, start: usize, root: usize) -> NodeRef {
        if !self.profile.phrases {
            return NodeRef::Terminal(root);
        }
        self.g.phrases.push(PhraseNode::new(start, self.next() - 1, ""));
        NodeRef::Phrase(self.g.phrases.len() - 1)
    }

    fn suffix(&mut self, pron_type: Option<&str>) -> usize {
        let &(form, person, gender, number) = self.pick(SUFFIXES);
        let mut f = vec![
            (feat::SEG_TYPE, "suffix"),
            (feat::PERSON, person),
            (feat::GENDER, gender),
            (feat::NUMBER, number),
        ];
        if let Some(t) = pron_type {
            f.push((feat::PRON_TYPE, t));
        }
        self.seg(form, "PRON", &f, None, None)
    }

    /// A noun with optional possessor and adjective; returns the noun.
    fn noun(&mut self, case: &str, definite: bool) -> usize {
        self.token();
        let &(stem, root, gender) = self.pick(NOUNS);
        let state = if definite { "DEF" } else { "INDEF" };
        let form = format!("{}{stem}{}", if definite { "{l" } else { "" }, case_ending(case, definite));
        let n = self.seg(
            &form,
            "N",
            &[(feat::CASE, case), (feat::STATE, state), (feat::GENDER, gender), (feat::NUMBER, "S")],
            Some(stem),
            Some(root),
        );
        if !definite && self.chance(0.2) {
            let s = self.suffix(None);
            self.link(s, n, "poss");
        } else if self.chance(0.15) {
            let g = self.noun_plain("GEN", true);
            self.link(g, n, "poss");
            return n;
        }
        if self.chance(0.25) {
            self.adjective(n, case, definite);
        }
        n
    }

    fn noun_plain(&mut self, case: &str, definite: bool) -> usize {
        self.token();
        let &(stem, root, gender) = self.pick(NOUNS);
        let state = if definite { "DEF" } else { "INDEF" };
        let form = format!("{}{stem}{}", if definite { "{l" } else { "" }, case_ending(case, definite));
        self.seg(
            &form,
            "N",
            &[(feat::CASE, case), (feat::STATE, state), (feat::GENDER, gender), (feat::NUMBER, "S")],
            Some(stem),
            Some(root),
        )
    }

    fn adjective(&mut self, head: usize, case: &str, definite: bool) -> usize {
        self.token();
        let &(stem, root) = self.pick(ADJECTIVES);
        let state = if definite { "DEF" } else { "INDEF" };
        let form = format!("{}{stem}{}", if definite { "{l" } else { "" }, case_ending(case, definite));
        let a = self.seg(&form, "ADJ", &[(feat::CASE, case), (feat::STATE, state)], Some(stem), Some(root));
        self.link(a, head, "adj");
        a
    }

    fn subject(&mut self) -> usize {
        if self.chance(0.3) {
            self.token();
            let &(lemma, root) = self.pick(PROPER);
            let form = format!("{lemma}u");
            self.seg(&form, "PN", &[(feat::CASE, "NOM")], Some(lemma), Some(root))
        } else {
            let definite = self.chance(0.5);
            self.noun("NOM", definite)
        }
    }

    /// Preposition with its object. Returns the node to attach.
    fn pp(&mut self) -> NodeRef {
        let start = self.next();
        self.token();
        let &(form, prefix) = self.pick(PREPOSITIONS);
        let lemma = form.trim_end_matches('a');
        let p = if prefix {
            self.seg(form, "P", &[(feat::SEG_TYPE, "prefix")], Some(lemma), None)
        } else {
            self.seg(form, "P", &[], Some(lemma), None)
        };
        let object = if self.chance(0.3) {
            self.suffix(None)
        } else if prefix {
            self.segment_noun("GEN")
        } else {
            let d = self.chance(0.5);
            self.noun("GEN", d)
        };
        self.link(object, p, "gen");
        self.wrap(start, p)
    }

    /// A genitive noun in the same token as a prefix.
    fn segment_noun(&mut self, case: &str) -> usize {
        let &(stem, root, gender) = self.pick(NOUNS);
        let form = format!("{{l{stem}{}", case_ending(case, true));
        self.seg(
            &form,
            "N",
            &[(feat::CASE, case), (feat::STATE, "DEF"), (feat::GENDER, gender), (feat::NUMBER, "S")],
            Some(stem),
            Some(root),
        )
    }

    /// `V [pro] [obj-suffix] [subj] [obj] [PP]`. Returns the verb.
    fn verbal(&mut self, overt_subject: bool) -> usize {
        self.token();
        let verb = self.pick(VERBS);
        let dropped = !overt_subject && self.profile.ellipsis && self.chance(0.4);
        let &(person, gender, number, ending) = if dropped {
            self.pick(VERB_AGREEMENT)
        } else {
            &VERB_AGREEMENT[0]
        };
        let form = format!("{}{ending}", if ending.is_empty() { verb.lemma } else { verb.lemma.trim_end_matches('a') });
        let v = self.seg(
            &form,
            "V",
            &[
                (feat::ASPECT, "PERF"),
                (feat::VOICE, "ACT"),
                (feat::PERSON, person),
                (feat::GENDER, gender),
                (feat::NUMBER, number),
            ],
            Some(verb.lemma),
            Some(verb.root),
        );
        if dropped {
            let e = self.empty("PRON", pronoun_form(Some(person), Some(gender), Some(number)));
            self.link(e, v, "subj");
        }
        let object_suffix = verb.transitive && self.chance(0.3);
        if object_suffix {
            let o = self.suffix(Some("object"));
            self.link(o, v, "obj");
        }
        if !dropped {
            let s = self.subject();
            self.link(s, v, "subj");
        }
        if verb.transitive && !object_suffix {
            if self.chance(0.2) {
                let sc = self.subordinate();
                self.edge(sc, NodeRef::Terminal(v), "obj");
            } else {
                let d = self.chance(0.5);
                let o = self.noun("ACC", d);
                self.link(o, v, "obj");
            }
        }
        if self.chance(0.35) {
            let pp = self.pp();
            self.edge(pp, NodeRef::Terminal(v), "link");
        }
        v
    }

    /// `>an V subj` as the object of a verb.
    fn subordinate(&mut self) -> NodeRef {
        let start = self.next();
        self.token();
        let sub = self.seg(">an", "SUB", &[], Some(">an"), None);
        self.token();
        let verb = self.pick(VERBS);
        let form = format!("ya{}a", verb.root);
        let v = self.seg(
            &form,
            "V",
            &[
                (feat::ASPECT, "IMPF"),
                (feat::MOOD, "SUBJ"),
                (feat::PERSON, "3"),
                (feat::GENDER, "M"),
                (feat::NUMBER, "S"),
            ],
            Some(verb.lemma),
            Some(verb.root),
        );
        self.link(v, sub, "sub");
        let s = self.subject();
        self.link(s, v, "subj");
        self.wrap(start, sub)
    }

    /// `DEF-subject INDEF-predicate [PP]`.
    fn nominal(&mut self) -> usize {
        let s = self.noun_plain("NOM", true);
        let p = if self.chance(0.5) {
            self.token();
            let &(stem, root) = self.pick(ADJECTIVES);
            let form = format!("{stem}N");
            self.seg(&form, "ADJ", &[(feat::CASE, "NOM"), (feat::STATE, "INDEF")], Some(stem), Some(root))
        } else {
            self.noun_plain("NOM", false)
        };
        self.link(p, s, "pred");
        s
    }

    /// Copula clause, or with ellipsis the elided circumstantial pattern.
    fn copula(&mut self) -> usize {
        self.token();
        let k = self.seg(
            "kaAna",
            "V",
            &[
                (feat::ASPECT, "PERF"),
                (feat::PERSON, "3"),
                (feat::GENDER, "M"),
                (feat::NUMBER, "S"),
                (feat::SP, "kaAn"),
            ],
            Some("kaAna"),
            Some("kwn"),
        );
        if self.profile.ellipsis && self.chance(0.5) {
            let pp = self.pp();
            self.edge(pp, NodeRef::Terminal(k), "link");
            let s = self.noun_plain("NOM", false);
            self.link(s, k, "subjx");
            let e = self.empty("N", empty_category_form("N"));
            self.link(e, s, "circ");
            let pp = self.pp();
            self.edge(pp, NodeRef::Terminal(e), "link");
        } else {
            let s = self.noun_plain("NOM", true);
            self.link(s, k, "subjx");
            let p = self.noun_plain("ACC", false);
            self.link(p, k, "predx");
        }
        k
    }

    /// `<in~a` with its subject and a predicate that may be a nominal
    /// sentence or elided.
    fn inna(&mut self) -> usize {
        self.token();
        let a = self.seg("<in~a", "ACC", &[(feat::SP, "<in~")], Some("<in~"), None);
        let s = self.noun_plain("ACC", true);
        self.link(s, a, "subjx");
        if self.profile.ellipsis && self.chance(0.4) {
            let e = self.empty("N", empty_category_form("N"));
            self.link(e, a, "predx");
            if self.chance(0.5) {
                self.token();
                let loc = self.seg("maEa", "LOC", &[(feat::CASE, "ACC")], Some("maE"), None);
                let n = self.noun_plain("GEN", true);
                self.link(n, loc, "poss");
                self.link(loc, e, "link");
            } else {
                let pp = self.pp();
                self.edge(pp, NodeRef::Terminal(e), "link");
            }
        } else if self.profile.phrases && self.chance(0.4) {
            let start = self.next();
            let root = self.nominal();
            let ns = self.wrap(start, root);
            self.edge(ns, NodeRef::Terminal(a), "predx");
        } else {
            let p = self.noun_plain("NOM", false);
            self.link(p, a, "predx");
        }
        a
    }

    /// `laA` of absolute negation with an elided predicate.
    fn negation(&mut self) -> usize {
        self.token();
        let l = self.seg("laA", "NEG", &[], Some("laA"), None);
        let n = self.noun_plain("ACC", false);
        self.link(n, l, "subjx");
        let e = self.empty("N", empty_category_form("N"));
        self.link(e, l, "predx");
        let pp = self.pp();
        self.edge(pp, NodeRef::Terminal(e), "link");
        l
    }

    /// `<in condition [fa] result`.
    fn conditional(&mut self) -> usize {
        self.token();
        let c = self.seg("<in", "COND", &[], Some("<in"), None);
        let start = self.next();
        let v = self.verbal(false);
        let cond = self.wrap(start, v);
        self.edge(cond, NodeRef::Terminal(c), "cond");
        if self.profile.disconnected {
            self.token();
            self.seg("fa", "RSLT", &[], Some("fa"), None);
        }
        let start = self.next();
        let root = if self.profile.ellipsis && self.chance(0.3) {
            self.negation()
        } else if self.chance(0.5) {
            self.nominal()
        } else {
            self.verbal(false)
        };
        let result = self.wrap(start, root);
        self.edge(result, NodeRef::Terminal(c), "rslt");
        c
    }

    /// Two verbal clauses joined by `wa`. With `cross`, the conjunction
    /// attaches across the clause link.
    fn coordination(&mut self, cross: bool) {
        let v1 = self.verbal(false);
        self.token();
        let w = self.seg("wa", "CONJ", &[], Some("wa"), None);
        let v2 = self.verbal(cross);
        self.link(v2, v1, "conj");
        if cross {
            let last = self.next() - 1;
            self.link(w, last, "conj");
        }
    }

    fn sentence(&mut self, cross: bool) {
        if cross {
            self.coordination(true);
            return;
        }
        let two_clauses = (self.profile.disconnected || self.profile.nonprojective) && self.chance(0.25);
        if two_clauses {
            self.coordination(false);
            return;
        }
        let roll = self.rng.random_range(0..100);
        match roll {
            0..40 => {
                self.verbal(false);
            }
            40..55 => {
                self.nominal();
            }
            55..67 => {
                self.copula();
            }
            67..82 => {
                self.inna();
            }
            _ => {
                self.conditional();
            }
        }
    }

    fn finish(mut self) -> HybridGraph {
        let roots = self.g.phrase_roots();
        for (p, root) in roots.into_iter().enumerate() {
            let r = root.expect("generated phrases are well formed");
            let span = (self.g.phrases[p].start, self.g.phrases[p].end);
            self.g.phrases[p].tag = phrase_tag(&self.g, NodeRef::Terminal(r), span);
        }
        self.g
    }
}

/// One graph, and whether a crossing edge was injected.
pub fn generate_one(seed: u64, index: usize, profile: Profile) -> (HybridGraph, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let cross = profile.nonprojective && rng.random_bool(profile.crossing_rate);
    let mut b = Builder {
        rng: &mut rng,
        profile,
        verse: index as u32 + 1,
        token: 0,
        segment: 0,
        g: HybridGraph::default(),
    };
    b.sentence(cross);
    (b.finish().canonical(), cross)
}

/// A corpus of `count` graphs. Graph `i` depends only on `seed` and `i`.
pub fn generate(seed: u64, count: usize, profile: Profile) -> TreebankDocument {
    let entries = (0..count)
        .into_par_iter()
        .map(|i| {
            let (g, cross) = generate_one(seed, i, profile);
            let mut e = TreebankEntry::new(g);
            e.set_meta("sent_id", &format!("synth-{seed}-{}", i + 1));
            e.set_meta("profile", &profile.to_string());
            if cross {
                e.set_meta("injected", "crossing");
            }
            e
        })
        .collect();
    TreebankDocument { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_parse() {
        let p: Profile = "+phrases,+ellipsis".parse().unwrap();
        assert!(p.phrases && p.ellipsis && !p.disconnected);
        assert_eq!(p.to_string(), "+phrases,+ellipsis");
        assert_eq!("pure".parse::<Profile>().unwrap(), Profile::pure());
        assert!("+bogus".parse::<Profile>().is_err());
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        let a = generate(1, 40, Profile::all());
        let b = generate(1, 40, Profile::all());
        assert_eq!(a.entries, b.entries);
        for g in a.graphs() {
            assert!(g.validate().is_empty(), "{:?}", g.validate());
        }
    }
}
