//! Statistical parsing of hybrid dependency-constituency graphs.
//!
//! Two pipelines are provided. The integrated parser builds phrases and
//! empty categories directly with an extended transition set. The multi-step
//! parser converts hybrid graphs to pure dependency graphs with enriched
//! labels, parses those, and restores the hybrid structure afterwards.

pub mod conllx;
pub mod conversion;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod label;
pub mod learning;
pub mod notation;
pub mod oracle;
pub mod render;
pub mod synth;
pub mod transition;
pub mod vocab;

pub use conllx::{TreebankDocument, TreebankEntry};
pub use error::{Error, Result};
pub use graph::{EmptyCategory, Edge, HybridGraph, Location, MorphSegment, NodeRef, PhraseNode, Terminal};
pub use label::{FlaggedRel, Label};
pub use transition::{Configuration, Transition};
pub use vocab::Vocabulary;
