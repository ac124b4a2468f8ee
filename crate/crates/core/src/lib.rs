//! Ontology engineering toolkit: a description-logic axiom parser, a
//! structural consistency checker, competency-question coverage scoring,
//! DOLCE alignment validation, and deterministic OWL/RDF-XML output.
//!
//! The usual pipeline is parse → normalize → check → score / align / emit:
//!
//! ```
//! use ontokit::{model, parser, srs};
//!
//! let doc = parser::parse_ontology(
//!     "Government sub some hasDivision . (Department or Agency or Municipality)\n",
//!     "example",
//! )
//! .unwrap();
//! let cfg = model::NormalizationConfig::default();
//! let graph = model::normalize(&doc, &cfg).unwrap();
//! assert_eq!(srs::card(&graph, &cfg, "Government").unwrap(), 4);
//! ```

pub mod alignment;
pub mod consistency;
pub mod model;
pub mod owl;
pub mod parser;
pub mod srs;

pub use alignment::{load_dolce, validate_alignment, AlignmentMap, AlignmentReport, DolceTaxonomy};
pub use consistency::{check, Diagnostic, DiagnosticCode, DiagnosticReport, Severity};
pub use model::{
    children, normalize, pretty_print, Axiom, ConceptExpr, ConceptGraph, NormalizationConfig,
    OntologyDoc,
};
pub use owl::{emit, reparse, OwlDocument};
pub use parser::{parse_axiom, parse_ontology, tokenize, ParseError, Token, TokenKind};
pub use srs::{card, srs, srs_report, QuestionMapping, SrsEntry, SrsReport};
