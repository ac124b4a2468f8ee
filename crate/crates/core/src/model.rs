//! Shared domain types and the normalization pass that turns parsed axioms
//! into a [`ConceptGraph`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A concept expression on the right-hand side of a subsumption axiom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConceptExpr {
    Atom(String),
    And(Vec<ConceptExpr>),
    Or(Vec<ConceptExpr>),
    Exists {
        role: String,
        filler: Box<ConceptExpr>,
    },
    ForAll {
        role: String,
        filler: Box<ConceptExpr>,
    },
    MinCard {
        n: u32,
        role: String,
        filler: Option<Box<ConceptExpr>>,
    },
    ExactCard {
        n: u32,
        role: String,
        filler: Option<Box<ConceptExpr>>,
    },
}

impl ConceptExpr {
    pub fn atom(name: impl Into<String>) -> Self {
        ConceptExpr::Atom(name.into())
    }

    pub fn exists(role: impl Into<String>, filler: ConceptExpr) -> Self {
        ConceptExpr::Exists {
            role: role.into(),
            filler: Box::new(filler),
        }
    }

    pub fn for_all(role: impl Into<String>, filler: ConceptExpr) -> Self {
        ConceptExpr::ForAll {
            role: role.into(),
            filler: Box::new(filler),
        }
    }

    /// If this expression is an atom or a (possibly nested) disjunction of
    /// atoms, returns the atom names in order of appearance.
    pub fn atomic_alternatives(&self) -> Option<Vec<&str>> {
        match self {
            ConceptExpr::Atom(name) => Some(vec![name.as_str()]),
            ConceptExpr::Or(children) => {
                let mut out = Vec::new();
                for child in children {
                    out.extend(child.atomic_alternatives()?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Visits every concept name mentioned in the expression.
    pub fn for_each_name<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            ConceptExpr::Atom(name) => f(name),
            ConceptExpr::And(children) | ConceptExpr::Or(children) => {
                children.iter().for_each(|c| c.for_each_name(f))
            }
            ConceptExpr::Exists { filler, .. } | ConceptExpr::ForAll { filler, .. } => {
                filler.for_each_name(f)
            }
            ConceptExpr::MinCard { filler, .. } | ConceptExpr::ExactCard { filler, .. } => {
                if let Some(filler) = filler {
                    filler.for_each_name(f)
                }
            }
        }
    }

    fn write_factor(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptExpr::And(_) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

/// Canonical ASCII surface syntax. Disjunctions are always parenthesized;
/// a conjunction is parenthesized when it appears as a factor.
impl fmt::Display for ConceptExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptExpr::Atom(name) => f.write_str(name),
            ConceptExpr::And(children) => {
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" and ")?;
                    }
                    child.write_factor(f)?;
                }
                Ok(())
            }
            ConceptExpr::Or(children) => {
                f.write_str("(")?;
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" or ")?;
                    }
                    // a conjunction binds tighter than `or`
                    write!(f, "{child}")?;
                }
                f.write_str(")")
            }
            ConceptExpr::Exists { role, filler } => {
                write!(f, "some {role} . ")?;
                filler.write_factor(f)
            }
            ConceptExpr::ForAll { role, filler } => {
                write!(f, "only {role} . ")?;
                filler.write_factor(f)
            }
            ConceptExpr::MinCard { n, role, filler }
            | ConceptExpr::ExactCard { n, role, filler } => {
                let kw = if matches!(self, ConceptExpr::MinCard { .. }) {
                    "min"
                } else {
                    "exact"
                };
                write!(f, "{kw} {n} {role}")?;
                if let Some(filler) = filler {
                    f.write_str(" . ")?;
                    filler.write_factor(f)?;
                }
                Ok(())
            }
        }
    }
}

/// `lhs ⊑ rhs`, with the 1-based source line it was read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axiom {
    pub lhs: String,
    pub rhs: ConceptExpr,
    pub source_line: usize,
}

impl Axiom {
    pub fn new(lhs: impl Into<String>, rhs: ConceptExpr, source_line: usize) -> Self {
        Axiom {
            lhs: lhs.into(),
            rhs,
            source_line,
        }
    }

    /// Structural equality ignoring the source position.
    pub fn same_statement(&self, other: &Axiom) -> bool {
        self.lhs == other.lhs && self.rhs == other.rhs
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} sub {}", self.lhs, self.rhs)
    }
}

/// Renders an expression or axiom in the canonical DSL syntax.
pub fn pretty_print<T: fmt::Display + ?Sized>(item: &T) -> String {
    item.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OntologyDoc {
    pub name: String,
    pub axioms: Vec<Axiom>,
}

impl OntologyDoc {
    pub fn new(name: impl Into<String>, axioms: Vec<Axiom>) -> Self {
        OntologyDoc {
            name: name.into(),
            axioms,
        }
    }
}

/// Which role names carry structural meaning during normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationConfig {
    pub subclass_roles: BTreeSet<String>,
    pub individual_roles: BTreeSet<String>,
    pub composition_roles: BTreeSet<String>,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            subclass_roles: ["isA".to_string()].into(),
            individual_roles: ["IsIndividualOf".to_string()].into(),
            composition_roles: ["hasDivision".to_string()].into(),
        }
    }
}

impl NormalizationConfig {
    /// Builds a config, rejecting role sets that overlap.
    pub fn new(
        subclass_roles: impl IntoIterator<Item = String>,
        individual_roles: impl IntoIterator<Item = String>,
        composition_roles: impl IntoIterator<Item = String>,
    ) -> Result<Self, ModelError> {
        let cfg = NormalizationConfig {
            subclass_roles: subclass_roles.into_iter().collect(),
            individual_roles: individual_roles.into_iter().collect(),
            composition_roles: composition_roles.into_iter().collect(),
        };
        let overlap = cfg
            .subclass_roles
            .intersection(&cfg.individual_roles)
            .chain(cfg.subclass_roles.intersection(&cfg.composition_roles))
            .chain(cfg.individual_roles.intersection(&cfg.composition_roles))
            .next()
            .cloned();
        match overlap {
            Some(role) => Err(ModelError::OverlappingRoleSets { role }),
            None => Ok(cfg),
        }
    }

    /// Default subclass and individual roles with the given composition roles.
    pub fn with_composition_roles(
        roles: impl IntoIterator<Item = String>,
    ) -> Result<Self, ModelError> {
        let base = NormalizationConfig::default();
        NormalizationConfig::new(base.subclass_roles, base.individual_roles, roles)
    }

    pub fn is_reserved(&self, role: &str) -> bool {
        self.subclass_roles.contains(role)
            || self.individual_roles.contains(role)
            || self.composition_roles.contains(role)
    }
}

/// Domain and range declarations collected for a non-reserved role.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoleDecl {
    pub domains: BTreeSet<String>,
    pub ranges: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConceptGraph {
    pub classes: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
    /// `(child, parent)`
    pub subclass_edges: BTreeSet<(String, String)>,
    /// `(individual, class)`
    pub individual_edges: BTreeSet<(String, String)>,
    /// `(parent, child, role)`
    pub composition_edges: BTreeSet<(String, String, String)>,
    pub roles: BTreeMap<String, RoleDecl>,
    pub residual_axioms: Vec<Axiom>,
}

impl ConceptGraph {
    pub fn contains(&self, name: &str) -> bool {
        self.classes.contains(name) || self.individuals.contains(name)
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
            && self.individuals.is_empty()
            && self.roles.is_empty()
            && self.residual_axioms.is_empty()
    }

    pub fn add_subclass(&mut self, child: &str, parent: &str) {
        self.classes.insert(child.to_string());
        self.classes.insert(parent.to_string());
        self.subclass_edges
            .insert((child.to_string(), parent.to_string()));
    }

    pub fn add_individual(&mut self, individual: &str, class: &str) {
        self.individuals.insert(individual.to_string());
        self.classes.insert(class.to_string());
        self.individual_edges
            .insert((individual.to_string(), class.to_string()));
    }

    pub fn add_composition(&mut self, parent: &str, child: &str, role: &str) {
        self.classes.insert(parent.to_string());
        self.classes.insert(child.to_string());
        self.composition_edges
            .insert((parent.to_string(), child.to_string(), role.to_string()));
    }

    pub fn add_role(&mut self, role: &str, domain: &str, ranges: &[&str]) {
        self.classes.insert(domain.to_string());
        let decl = self.roles.entry(role.to_string()).or_default();
        decl.domains.insert(domain.to_string());
        for range in ranges {
            self.classes.insert(range.to_string());
            decl.ranges.insert(range.to_string());
        }
    }

    /// Names that take part in the graph as classes through an edge, a role
    /// domain, or a residual axiom's left side. Names that are classes only
    /// because they are a role range are excluded.
    pub fn structural_class_names(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for (child, parent) in &self.subclass_edges {
            out.insert(child.as_str());
            out.insert(parent.as_str());
        }
        for (_, class) in &self.individual_edges {
            out.insert(class.as_str());
        }
        for (parent, child, _) in &self.composition_edges {
            out.insert(parent.as_str());
            out.insert(child.as_str());
        }
        for decl in self.roles.values() {
            out.extend(decl.domains.iter().map(String::as_str));
        }
        for axiom in &self.residual_axioms {
            out.insert(axiom.lhs.as_str());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: reserved role `{role}` used under {context} in axiom for `{lhs}`; reserved roles may only appear under `some`")]
    ReservedRoleMisuse {
        lhs: String,
        role: String,
        context: &'static str,
        line: usize,
    },
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("role `{role}` appears in more than one reserved role set")]
    OverlappingRoleSets { role: String },
}

/// A reserved role found under `only` or a cardinality restriction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleMisuse {
    pub lhs: String,
    pub role: String,
    pub context: &'static str,
    pub line: usize,
}

impl From<RoleMisuse> for ModelError {
    fn from(m: RoleMisuse) -> Self {
        ModelError::ReservedRoleMisuse {
            lhs: m.lhs,
            role: m.role,
            context: m.context,
            line: m.line,
        }
    }
}

/// Builds the concept graph, failing on the first reserved-role misuse.
pub fn normalize(doc: &OntologyDoc, cfg: &NormalizationConfig) -> Result<ConceptGraph, ModelError> {
    let (graph, misuses) = normalize_lenient(doc, cfg);
    match misuses.into_iter().next() {
        Some(m) => Err(m.into()),
        None => Ok(graph),
    }
}

/// Builds the concept graph and returns every reserved-role misuse instead
/// of failing. Misused axioms end up in `residual_axioms`.
pub fn normalize_lenient(
    doc: &OntologyDoc,
    cfg: &NormalizationConfig,
) -> (ConceptGraph, Vec<RoleMisuse>) {
    let mut graph = ConceptGraph::default();
    let mut misuses = Vec::new();

    for axiom in &doc.axioms {
        find_misuse(axiom, &axiom.rhs, cfg, &mut misuses);
        graph.classes.insert(axiom.lhs.clone());
        let lhs = axiom.lhs.as_str();

        match &axiom.rhs {
            ConceptExpr::Atom(parent) => graph.add_subclass(lhs, parent),
            ConceptExpr::Exists { role, filler } => match filler.atomic_alternatives() {
                Some(fillers) => add_existential(&mut graph, cfg, lhs, role, &fillers),
                None => graph.residual_axioms.push(axiom.clone()),
            },
            ConceptExpr::ForAll { role, filler } if !cfg.is_reserved(role) => {
                match filler.atomic_alternatives() {
                    Some(fillers) => graph.add_role(role, lhs, &fillers),
                    None => graph.residual_axioms.push(axiom.clone()),
                }
            }
            ConceptExpr::And(conjuncts) => {
                for conjunct in conjuncts {
                    if let ConceptExpr::Exists { role, filler } = conjunct {
                        if cfg.is_reserved(role) {
                            if let Some(fillers) = filler.atomic_alternatives() {
                                add_existential(&mut graph, cfg, lhs, role, &fillers);
                            }
                        }
                    }
                }
                graph.residual_axioms.push(axiom.clone());
            }
            _ => graph.residual_axioms.push(axiom.clone()),
        }
    }
    (graph, misuses)
}

fn add_existential(
    graph: &mut ConceptGraph,
    cfg: &NormalizationConfig,
    lhs: &str,
    role: &str,
    fillers: &[&str],
) {
    if cfg.subclass_roles.contains(role) {
        for parent in fillers {
            graph.add_subclass(lhs, parent);
        }
    } else if cfg.individual_roles.contains(role) {
        for individual in fillers {
            graph.add_individual(individual, lhs);
        }
    } else if cfg.composition_roles.contains(role) {
        for child in fillers {
            graph.add_composition(lhs, child, role);
        }
    } else {
        graph.add_role(role, lhs, fillers);
    }
}

fn find_misuse(
    axiom: &Axiom,
    expr: &ConceptExpr,
    cfg: &NormalizationConfig,
    out: &mut Vec<RoleMisuse>,
) {
    let mut record = |role: &str, context: &'static str| {
        if cfg.is_reserved(role) {
            out.push(RoleMisuse {
                lhs: axiom.lhs.clone(),
                role: role.to_string(),
                context,
                line: axiom.source_line,
            });
        }
    };
    match expr {
        ConceptExpr::Atom(_) => {}
        ConceptExpr::And(children) | ConceptExpr::Or(children) => children
            .iter()
            .for_each(|c| find_misuse(axiom, c, cfg, out)),
        ConceptExpr::Exists { filler, .. } => find_misuse(axiom, filler, cfg, out),
        ConceptExpr::ForAll { role, filler } => {
            record(role, "`only`");
            find_misuse(axiom, filler, cfg, out);
        }
        ConceptExpr::MinCard { role, filler, .. } | ConceptExpr::ExactCard { role, filler, .. } => {
            record(role, "a cardinality restriction");
            if let Some(filler) = filler {
                find_misuse(axiom, filler, cfg, out);
            }
        }
    }
}

/// Direct children of `concept` for counting purposes: subclasses,
/// individuals, and children along the configured composition roles.
/// Sorted and deduplicated.
pub fn children(
    graph: &ConceptGraph,
    cfg: &NormalizationConfig,
    concept: &str,
) -> Result<BTreeSet<String>, ModelError> {
    if !graph.contains(concept) {
        return Err(ModelError::UnknownConcept(concept.to_string()));
    }
    let mut out = BTreeSet::new();
    out.extend(
        graph
            .subclass_edges
            .iter()
            .filter(|(_, parent)| parent == concept)
            .map(|(child, _)| child.clone()),
    );
    out.extend(
        graph
            .individual_edges
            .iter()
            .filter(|(_, class)| class == concept)
            .map(|(individual, _)| individual.clone()),
    );
    out.extend(
        graph
            .composition_edges
            .iter()
            .filter(|(parent, _, role)| parent == concept && cfg.composition_roles.contains(role))
            .map(|(_, child, _)| child.clone()),
    );
    Ok(out)
}

/// Precomputed child lists for repeated lookups over one graph.
#[derive(Debug, Clone, Default)]
pub struct ChildIndex<'g> {
    children: BTreeMap<&'g str, BTreeSet<&'g str>>,
}

impl<'g> ChildIndex<'g> {
    pub fn build(graph: &'g ConceptGraph, cfg: &NormalizationConfig) -> Self {
        let mut children: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (child, parent) in &graph.subclass_edges {
            children.entry(parent).or_default().insert(child);
        }
        for (individual, class) in &graph.individual_edges {
            children.entry(class).or_default().insert(individual);
        }
        for (parent, child, role) in &graph.composition_edges {
            if cfg.composition_roles.contains(role) {
                children.entry(parent).or_default().insert(child);
            }
        }
        ChildIndex { children }
    }

    pub fn of(&self, concept: &str) -> impl Iterator<Item = &'g str> + '_ {
        self.children
            .get(concept)
            .into_iter()
            .flat_map(|set| set.iter().copied())
    }
}
