//! Deterministic OWL/RDF-XML output for a concept graph, and a reader for
//! the same element vocabulary.
//!
//! Layout, each section sorted by local name:
//!
//! 1. `owl:ObjectProperty` for every plain role and composition role, with
//!    `rdfs:domain` and `rdfs:range` children;
//! 2. `owl:Class` for every class, with one `rdfs:subClassOf` per parent and
//!    one `rdfs:comment` per residual axiom whose left side is the class;
//! 3. `owl:Thing` for every individual, with one `rdf:type` per class.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

use crate::consistency::structural_errors;
use crate::model::{ConceptGraph, NormalizationConfig, RoleDecl};
use crate::parser::parse_axiom_str;

pub const DEFAULT_BASE_IRI: &str = "http://example.org/ontodpm";

const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwlDocument {
    pub xml_text: String,
    pub class_count: usize,
    pub property_count: usize,
    pub individual_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OwlError {
    #[error("graph has {0} structural error(s); run the consistency check first")]
    UncleanGraph(usize),
    #[error("unsupported element `{element}`{}", context_suffix(.context))]
    UnsupportedElement {
        element: String,
        context: Option<String>,
    },
    #[error("element `{element}` is missing attribute `{attribute}`")]
    MissingAttribute { element: String, attribute: String },
    #[error("invalid comment axiom `{text}`: {message}")]
    InvalidComment { text: String, message: String },
    #[error("xml error: {0}")]
    Xml(String),
}

fn context_suffix(context: &Option<String>) -> String {
    context
        .as_ref()
        .map(|c| format!(" inside `{c}`"))
        .unwrap_or_default()
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Emits the graph after confirming it has no cycles or category conflicts.
pub fn emit(graph: &ConceptGraph, base_iri: &str) -> Result<OwlDocument, OwlError> {
    let errors = structural_errors(graph);
    if !errors.is_empty() {
        return Err(OwlError::UncleanGraph(errors.len()));
    }
    Ok(emit_unchecked(graph, base_iri))
}

/// Emits without the consistency gate.
pub fn emit_unchecked(graph: &ConceptGraph, base_iri: &str) -> OwlDocument {
    // plain roles and composition roles share one property section
    let mut properties: BTreeMap<&str, RoleDecl> = graph
        .roles
        .iter()
        .map(|(role, decl)| (role.as_str(), decl.clone()))
        .collect();
    for (parent, child, role) in &graph.composition_edges {
        let decl = properties.entry(role.as_str()).or_default();
        decl.domains.insert(parent.clone());
        decl.ranges.insert(child.clone());
    }

    let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (child, parent) in &graph.subclass_edges {
        parents.entry(child).or_default().push(parent);
    }
    let mut comments: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for axiom in &graph.residual_axioms {
        comments
            .entry(&axiom.lhs)
            .or_default()
            .push(axiom.to_string());
    }
    let mut types: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (individual, class) in &graph.individual_edges {
        types.entry(individual).or_default().push(class);
    }

    let base = escape(base_iri);
    let mut xml = String::new();
    xml.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(xml, "<rdf:RDF xmlns=\"{base}#\"");
    let _ = writeln!(xml, "  xml:base=\"{base}\"");
    let _ = writeln!(xml, "  xmlns:rdf=\"{RDF_NS}\"");
    let _ = writeln!(xml, "  xmlns:rdfs=\"{RDFS_NS}\"");
    let _ = writeln!(xml, "  xmlns:owl=\"{OWL_NS}\">");

    for (name, decl) in &properties {
        let _ = writeln!(
            xml,
            "  <owl:ObjectProperty rdf:about=\"#{}\">",
            escape(name)
        );
        for d in &decl.domains {
            let _ = writeln!(xml, "    <rdfs:domain rdf:resource=\"#{}\"/>", escape(d));
        }
        for r in &decl.ranges {
            let _ = writeln!(xml, "    <rdfs:range rdf:resource=\"#{}\"/>", escape(r));
        }
        xml.push_str("  </owl:ObjectProperty>\n");
    }

    for class in &graph.classes {
        let ps = parents
            .get(class.as_str())
            .map(Vec::as_slice)
            .unwrap_or_default();
        let cs = comments
            .get(class.as_str())
            .map(Vec::as_slice)
            .unwrap_or_default();
        if ps.is_empty() && cs.is_empty() {
            let _ = writeln!(xml, "  <owl:Class rdf:about=\"#{}\"/>", escape(class));
            continue;
        }
        let _ = writeln!(xml, "  <owl:Class rdf:about=\"#{}\">", escape(class));
        for p in ps {
            let _ = writeln!(
                xml,
                "    <rdfs:subClassOf rdf:resource=\"#{}\"/>",
                escape(p)
            );
        }
        for c in cs {
            let _ = writeln!(xml, "    <rdfs:comment>{}</rdfs:comment>", escape(c));
        }
        xml.push_str("  </owl:Class>\n");
    }

    for individual in &graph.individuals {
        let ts = types
            .get(individual.as_str())
            .map(Vec::as_slice)
            .unwrap_or_default();
        if ts.is_empty() {
            let _ = writeln!(xml, "  <owl:Thing rdf:about=\"#{}\"/>", escape(individual));
            continue;
        }
        let _ = writeln!(xml, "  <owl:Thing rdf:about=\"#{}\">", escape(individual));
        for t in ts {
            let _ = writeln!(xml, "    <rdf:type rdf:resource=\"#{}\"/>", escape(t));
        }
        xml.push_str("  </owl:Thing>\n");
    }
    xml.push_str("</rdf:RDF>\n");

    OwlDocument {
        xml_text: xml,
        class_count: graph.classes.len(),
        property_count: properties.len(),
        individual_count: graph.individuals.len(),
    }
}

fn local_name(reference: &str) -> &str {
    match reference.rfind('#') {
        Some(i) => &reference[i + 1..],
        None => reference,
    }
}

fn qname(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.name().as_ref()).into_owned()
}

fn attribute(e: &BytesStart<'_>, key: &str) -> Result<String, OwlError> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| OwlError::Xml(err.to_string()))?;
        if attr.key.as_ref() == key.as_bytes() {
            let value = attr
                .unescape_value()
                .map_err(|err| OwlError::Xml(err.to_string()))?;
            return Ok(local_name(&value).to_string());
        }
    }
    Err(OwlError::MissingAttribute {
        element: qname(e),
        attribute: key.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Frame {
    Root,
    Property,
    Class,
    Thing,
    Comment,
    Leaf,
}

#[derive(Default)]
struct ReadState {
    graph: ConceptGraph,
    properties: BTreeMap<String, RoleDecl>,
    /// `(subject, frame)` of the open top-level element
    subject: Option<String>,
    comment: String,
}

impl ReadState {
    fn open(&mut self, e: &BytesStart<'_>, parent: Option<Frame>) -> Result<Frame, OwlError> {
        let name = qname(e);
        let unsupported = |ctx: Option<&str>| OwlError::UnsupportedElement {
            element: name.clone(),
            context: ctx.map(str::to_string),
        };
        let frame = match (parent, name.as_str()) {
            (None, "rdf:RDF") => Frame::Root,
            (Some(Frame::Root), "owl:ObjectProperty") => {
                let about = attribute(e, "rdf:about")?;
                self.properties.entry(about.clone()).or_default();
                self.subject = Some(about);
                Frame::Property
            }
            (Some(Frame::Root), "owl:Class") => {
                let about = attribute(e, "rdf:about")?;
                self.graph.classes.insert(about.clone());
                self.subject = Some(about);
                Frame::Class
            }
            (Some(Frame::Root), "owl:Thing") => {
                let about = attribute(e, "rdf:about")?;
                self.graph.individuals.insert(about.clone());
                self.subject = Some(about);
                Frame::Thing
            }
            (Some(Frame::Property), "rdfs:domain") | (Some(Frame::Property), "rdfs:range") => {
                let target = attribute(e, "rdf:resource")?;
                let subject = self.subject.clone().expect("property subject");
                let decl = self.properties.entry(subject).or_default();
                if name == "rdfs:domain" {
                    decl.domains.insert(target);
                } else {
                    decl.ranges.insert(target);
                }
                Frame::Leaf
            }
            (Some(Frame::Class), "rdfs:subClassOf") => {
                let target = attribute(e, "rdf:resource")?;
                let subject = self.subject.clone().expect("class subject");
                self.graph.subclass_edges.insert((subject, target));
                Frame::Leaf
            }
            (Some(Frame::Class), "rdfs:comment") => {
                self.comment.clear();
                Frame::Comment
            }
            (Some(Frame::Thing), "rdf:type") => {
                let target = attribute(e, "rdf:resource")?;
                let subject = self.subject.clone().expect("individual subject");
                self.graph.individual_edges.insert((subject, target));
                Frame::Leaf
            }
            (None, _) => return Err(unsupported(None)),
            (Some(p), _) => {
                let ctx = match p {
                    Frame::Root => "rdf:RDF",
                    Frame::Property => "owl:ObjectProperty",
                    Frame::Class => "owl:Class",
                    Frame::Thing => "owl:Thing",
                    Frame::Comment => "rdfs:comment",
                    Frame::Leaf => "a reference element",
                };
                return Err(unsupported(Some(ctx)));
            }
        };
        Ok(frame)
    }

    fn close(&mut self, frame: Frame) -> Result<(), OwlError> {
        if frame == Frame::Comment {
            let text = self.comment.trim().to_string();
            let mut axiom = parse_axiom_str(&text).map_err(|e| OwlError::InvalidComment {
                text: text.clone(),
                message: e.to_string(),
            })?;
            axiom.source_line = self.graph.residual_axioms.len() + 1;
            self.graph.residual_axioms.push(axiom);
        }
        Ok(())
    }
}

/// Reads a document produced by [`emit`] back into a graph. Properties named
/// in `cfg.composition_roles` become composition edges.
pub fn reparse(doc: &OwlDocument, cfg: &NormalizationConfig) -> Result<ConceptGraph, OwlError> {
    reparse_str(&doc.xml_text, cfg)
}

pub fn reparse_str(xml: &str, cfg: &NormalizationConfig) -> Result<ConceptGraph, OwlError> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(true);
    let mut state = ReadState::default();
    let mut frames: Vec<Frame> = Vec::new();

    loop {
        let event = reader
            .read_event()
            .map_err(|e| OwlError::Xml(format!("at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Start(e) => {
                let frame = state.open(&e, frames.last().copied())?;
                frames.push(frame);
            }
            Event::Empty(e) => {
                let frame = state.open(&e, frames.last().copied())?;
                state.close(frame)?;
            }
            Event::End(_) => {
                let frame = frames
                    .pop()
                    .ok_or_else(|| OwlError::Xml("unbalanced end tag".into()))?;
                state.close(frame)?;
            }
            Event::Text(t) => {
                let text = t.unescape().map_err(|e| OwlError::Xml(e.to_string()))?;
                if frames.last() == Some(&Frame::Comment) {
                    state.comment.push_str(&text);
                } else if !text.trim().is_empty() {
                    return Err(OwlError::UnsupportedElement {
                        element: "#text".into(),
                        context: None,
                    });
                }
            }
            Event::Decl(_) | Event::Comment(_) => {}
            Event::Eof => break,
            Event::CData(_) | Event::PI(_) | Event::DocType(_) => {
                return Err(OwlError::UnsupportedElement {
                    element: "markup declaration".into(),
                    context: None,
                })
            }
        }
    }
    if !frames.is_empty() {
        return Err(OwlError::Xml("unexpected end of document".into()));
    }

    let ReadState {
        mut graph,
        properties,
        ..
    } = state;
    for (role, decl) in properties {
        if cfg.composition_roles.contains(&role) {
            for parent in &decl.domains {
                for child in &decl.ranges {
                    graph
                        .composition_edges
                        .insert((parent.clone(), child.clone(), role.clone()));
                }
            }
        } else {
            graph.roles.insert(role, decl);
        }
    }
    Ok(graph)
}

/// Names of the distinct subjects of a given top-level element in `xml`;
/// used to check the document counters.
pub fn top_level_subjects(xml: &str, element: &str) -> Result<BTreeSet<String>, OwlError> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(true);
    let mut depth = 0usize;
    let mut out = BTreeSet::new();
    loop {
        match reader
            .read_event()
            .map_err(|e| OwlError::Xml(e.to_string()))?
        {
            Event::Start(e) => {
                if depth == 1 && e.name().as_ref() == element.as_bytes() {
                    out.insert(attribute(&e, "rdf:about")?);
                }
                depth += 1;
            }
            Event::Empty(e) => {
                if depth == 1 && e.name().as_ref() == element.as_bytes() {
                    out.insert(attribute(&e, "rdf:about")?);
                }
            }
            Event::End(_) => depth = depth.saturating_sub(1),
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}
