//! Toolkit for corpora of brief sapiential units (proverbs, maxims,
//! sentences) annotated in the `<pr.all>` container markup.
//!
//! The crate parses and validates annotated documents, normalizes unit
//! texts (lemmatization, romanization, tokenization), parses structure
//! descriptors, scores similarity between containers, clusters them, and
//! derives diachronic posterity graphs from dated work metadata. The
//! [`index`] module ties everything together into a persistent corpus index.

pub mod index;
pub mod lang;
pub mod markup;
pub mod model;
pub mod normalize;
pub mod posterity;
mod resources;
pub mod similarity;
pub mod structure;

pub use lang::Lang;
pub use markup::{
    parse_container, parse_document, serialize_container, validate_corpus_uniqueness,
    AnnotatedDocument, DuplicateReport, MarkupError, Segment, SegmentBody,
};
pub use model::{
    classify_tag, CompletenessProfile, Degree, Entity, Mode, Root, SegmentKind, TagKind,
    UnitContainer,
};
