#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use ontokit::model::{Axiom, ConceptExpr, ConceptGraph, NormalizationConfig, OntologyDoc};
use ontokit::parser::parse_ontology;
use ontokit::srs::{parse_expectations, parse_questions, Expectation, QuestionMapping};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/ontodpm")
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap()
}

pub fn fixture_doc() -> OntologyDoc {
    parse_ontology(&fixture_text("ontodpm.dlx"), "ontodpm").unwrap()
}

pub fn fixture_questions() -> Vec<QuestionMapping> {
    parse_questions(&fixture_text("questions.json")).unwrap()
}

pub fn fixture_expectations() -> Vec<Expectation> {
    parse_expectations(&fixture_text("expectations.json")).unwrap()
}

/// Edge lists of a generated ontology, kept alongside its DSL text so that
/// oracles never go through the parser or the normalizer.
#[derive(Debug, Clone, Default)]
pub struct RandomOntology {
    pub classes: Vec<String>,
    pub individuals: Vec<String>,
    /// `(child, parent)`
    pub subclass: Vec<(String, String)>,
    /// `(individual, class)`
    pub instance_of: Vec<(String, String)>,
    /// `(parent, child)` along `hasDivision`
    pub composition: Vec<(String, String)>,
    /// role → (domain, ranges)
    pub roles: Vec<(String, String, Vec<String>)>,
    pub residual: Vec<String>,
}

impl RandomOntology {
    pub fn source(&self) -> String {
        let mut out = String::new();
        for (child, parent) in &self.subclass {
            out.push_str(&format!("{child} sub some isA . {parent}\n"));
        }
        let mut by_class: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (ind, class) in &self.instance_of {
            by_class.entry(class).or_default().push(ind);
        }
        for (class, inds) in by_class {
            out.push_str(&format!(
                "{class} sub some IsIndividualOf . ({})\n",
                inds.join(" or ")
            ));
        }
        for (parent, child) in &self.composition {
            out.push_str(&format!("{parent} sub some hasDivision . {child}\n"));
        }
        for (role, domain, ranges) in &self.roles {
            out.push_str(&format!(
                "{domain} sub some {role} . ({})\n",
                ranges.join(" or ")
            ));
        }
        for line in &self.residual {
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    /// Child lists straight from the generated edges.
    pub fn child_lists(&self) -> BTreeMap<String, Vec<String>> {
        let mut kids: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (child, parent) in &self.subclass {
            kids.entry(parent.clone()).or_default().push(child.clone());
        }
        for (ind, class) in &self.instance_of {
            kids.entry(class.clone()).or_default().push(ind.clone());
        }
        for (parent, child) in &self.composition {
            kids.entry(parent.clone()).or_default().push(child.clone());
        }
        for v in kids.values_mut() {
            v.sort();
            v.dedup();
        }
        kids
    }

    pub fn all_nodes(&self) -> BTreeSet<String> {
        self.classes
            .iter()
            .chain(&self.individuals)
            .cloned()
            .collect()
    }
}

/// Random DAG ontology with at most `max_nodes` classes plus individuals.
/// Subclass and composition edges always point from a later class to an
/// earlier one, so the result is acyclic.
pub fn random_dag_ontology(
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
    with_extras: bool,
) -> RandomOntology {
    let n_classes = rng.gen_range(1..=max_nodes.max(1));
    let classes: Vec<String> = (0..n_classes).map(|i| format!("C{i}")).collect();
    let mut ont = RandomOntology {
        classes: classes.clone(),
        ..Default::default()
    };
    let mut subclass = BTreeSet::new();
    let mut composition = BTreeSet::new();
    for i in 1..n_classes {
        let n_parents = [0, 1, 1, 1, 2][rng.gen_range(0..5)];
        for _ in 0..n_parents {
            let j = rng.gen_range(0..i);
            if rng.gen_bool(0.8) {
                subclass.insert((classes[i].clone(), classes[j].clone()));
            } else {
                composition.insert((classes[j].clone(), classes[i].clone()));
            }
        }
    }
    ont.subclass = subclass.into_iter().collect();
    ont.composition = composition.into_iter().collect();

    let n_individuals = rng.gen_range(0..=(max_nodes / 5).max(1));
    let mut instance_of = BTreeSet::new();
    for k in 0..n_individuals {
        let name = format!("i{k}");
        let n_types = rng.gen_range(1..=2);
        for _ in 0..n_types {
            instance_of.insert((name.clone(), classes[rng.gen_range(0..n_classes)].clone()));
        }
        ont.individuals.push(name);
    }
    ont.instance_of = instance_of.into_iter().collect();

    if with_extras {
        for r in 0..rng.gen_range(0..4) {
            let domain = classes[rng.gen_range(0..n_classes)].clone();
            let mut ranges: Vec<String> = (0..rng.gen_range(1..=3))
                .map(|_| classes[rng.gen_range(0..n_classes)].clone())
                .collect();
            ranges.sort();
            ranges.dedup();
            ont.roles.push((format!("rel{r}"), domain, ranges));
        }
        for _ in 0..rng.gen_range(0..3) {
            let a = &classes[rng.gen_range(0..n_classes)];
            let b = &classes[rng.gen_range(0..n_classes)];
            let c = &classes[rng.gen_range(0..n_classes)];
            ont.residual
                .push(format!("{a} sub {b} and min 1 holds . ({b} or {c})"));
        }
    }
    ont.classes = ont
        .classes
        .iter()
        .filter(|c| {
            // a class with no edge at all never appears in the DSL text
            ont.subclass.iter().any(|(x, y)| x == *c || y == *c)
                || ont.composition.iter().any(|(x, y)| x == *c || y == *c)
                || ont.instance_of.iter().any(|(_, y)| y == *c)
                || ont.roles.iter().any(|(_, d, rs)| d == *c || rs.contains(c))
                || ont.residual.iter().any(|l| l.starts_with(&format!("{c} ")))
        })
        .cloned()
        .collect();
    ont
}

/// Per-path closure count by explicit enumeration: every node reached along
/// every distinct downward path is counted once.
pub fn brute_force_card(
    kids: &BTreeMap<String, Vec<String>>,
    nodes: &BTreeSet<String>,
    concept: &str,
) -> u64 {
    if !nodes.contains(concept) {
        return 0;
    }
    let mut count = 0u64;
    let mut stack = vec![concept.to_string()];
    while let Some(node) = stack.pop() {
        count += 1;
        if let Some(children) = kids.get(&node) {
            stack.extend(children.iter().cloned());
        }
    }
    count
}

/// Mutual reachability by naive path search over raw edges.
pub fn reachable(edges: &BTreeSet<(String, String)>, from: &str, to: &str) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack = vec![from.to_string()];
    while let Some(n) = stack.pop() {
        for (a, b) in edges {
            if *a == n {
                if b == to {
                    return true;
                }
                if seen.insert(b.clone()) {
                    stack.push(b.clone());
                }
            }
        }
    }
    false
}

/// Kahn's algorithm succeeds iff the edge set is acyclic.
pub fn is_dag(edges: &BTreeSet<(String, String)>) -> bool {
    let mut indeg: BTreeMap<&str, usize> = BTreeMap::new();
    for (a, b) in edges {
        indeg.entry(a).or_default();
        *indeg.entry(b).or_default() += 1;
    }
    let mut ready: Vec<&str> = indeg
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut done = 0;
    while let Some(n) = ready.pop() {
        done += 1;
        for (a, b) in edges {
            if a == n {
                let d = indeg.get_mut(b.as_str()).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(b);
                }
            }
        }
    }
    done == indeg.len()
}

fn rename_expr(expr: &ConceptExpr, map: &BTreeMap<String, String>) -> ConceptExpr {
    let r = |n: &String| map.get(n).cloned().unwrap_or_else(|| n.clone());
    match expr {
        ConceptExpr::Atom(n) => ConceptExpr::Atom(r(n)),
        ConceptExpr::And(cs) => ConceptExpr::And(cs.iter().map(|c| rename_expr(c, map)).collect()),
        ConceptExpr::Or(cs) => ConceptExpr::Or(cs.iter().map(|c| rename_expr(c, map)).collect()),
        ConceptExpr::Exists { role, filler } => {
            ConceptExpr::exists(role.clone(), rename_expr(filler, map))
        }
        ConceptExpr::ForAll { role, filler } => {
            ConceptExpr::for_all(role.clone(), rename_expr(filler, map))
        }
        ConceptExpr::MinCard { n, role, filler } => ConceptExpr::MinCard {
            n: *n,
            role: role.clone(),
            filler: filler.as_ref().map(|f| Box::new(rename_expr(f, map))),
        },
        ConceptExpr::ExactCard { n, role, filler } => ConceptExpr::ExactCard {
            n: *n,
            role: role.clone(),
            filler: filler.as_ref().map(|f| Box::new(rename_expr(f, map))),
        },
    }
}

/// A random bijection over every concept name in the document and the
/// question mappings (role names are left alone).
pub fn random_renaming(
    rng: &mut ChaCha8Rng,
    doc: &OntologyDoc,
    questions: &[QuestionMapping],
) -> BTreeMap<String, String> {
    let mut names = BTreeSet::new();
    for a in &doc.axioms {
        names.insert(a.lhs.clone());
        a.rhs.for_each_name(&mut |n| {
            names.insert(n.to_string());
        });
    }
    for q in questions {
        names.extend(q.concepts.iter().cloned());
    }
    let mut targets: Vec<String> = (0..names.len())
        .map(|i| format!("N{}x{i}", rng.gen_range(0..1_000_000u32)))
        .collect();
    targets.shuffle(rng);
    names.into_iter().zip(targets).collect()
}

pub fn rename_doc(doc: &OntologyDoc, map: &BTreeMap<String, String>) -> OntologyDoc {
    OntologyDoc::new(
        doc.name.clone(),
        doc.axioms
            .iter()
            .map(|a| Axiom::new(map[&a.lhs].clone(), rename_expr(&a.rhs, map), a.source_line))
            .collect(),
    )
}

pub fn rename_questions(
    qs: &[QuestionMapping],
    map: &BTreeMap<String, String>,
) -> Vec<QuestionMapping> {
    qs.iter()
        .map(|q| QuestionMapping {
            id: q.id.clone(),
            text: q.text.clone(),
            concepts: q.concepts.iter().map(|c| map[c].clone()).collect(),
        })
        .collect()
}

pub type Projection<'g> = (
    &'g BTreeSet<String>,
    &'g BTreeSet<String>,
    &'g BTreeSet<(String, String)>,
    &'g BTreeMap<String, ontokit::model::RoleDecl>,
    Vec<String>,
);

/// The parts of a graph that survive an OWL round trip exactly. Residual
/// axioms come back grouped by class, so they are compared sorted.
pub fn owl_projection(g: &ConceptGraph) -> Projection<'_> {
    (&g.classes, &g.individuals, &g.subclass_edges, &g.roles, {
        let mut r: Vec<String> = g.residual_axioms.iter().map(|a| a.to_string()).collect();
        r.sort();
        r
    })
}

pub fn default_cfg() -> NormalizationConfig {
    NormalizationConfig::default()
}

/// An element reduced to its name, sorted attributes and reduced children.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Shape {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Shape>,
}

fn shape(node: roxmltree::Node) -> Shape {
    let name = |n: roxmltree::Node| {
        let t = n.tag_name();
        format!("{}|{}", t.namespace().unwrap_or(""), t.name())
    };
    let mut attrs: Vec<(String, String)> = node
        .attributes()
        .map(|a| {
            (
                format!("{}|{}", a.namespace().unwrap_or(""), a.name()),
                a.value().to_string(),
            )
        })
        .collect();
    attrs.sort();
    Shape {
        name: name(node),
        attrs,
        children: node
            .children()
            .filter(|c| c.is_element() && c.tag_name().name() != "comment")
            .map(shape)
            .collect(),
    }
}

/// Top-level elements of an RDF/XML document, `rdfs:comment` children dropped.
pub fn top_level_shapes(xml: &str) -> Vec<Shape> {
    let doc = roxmltree::Document::parse(xml).unwrap();
    doc.root_element()
        .children()
        .filter(|c| c.is_element())
        .map(shape)
        .collect()
}

/// Wraps a bare snippet of RDF/XML elements in a root carrying the usual
/// namespaces.
pub fn wrap_snippet(snippet: &str) -> String {
    format!(
        "<rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\" \
         xmlns:rdfs=\"http://www.w3.org/2000/01/rdf-schema#\" \
         xmlns:owl=\"http://www.w3.org/2002/07/owl#\">{snippet}</rdf:RDF>"
    )
}

pub const GOLDEN_PERSON: &str = r##"
<owl:Class rdf:about="#Person"/>
<owl:Class rdf:about="#ProjectStaff">
  <rdfs:subClassOf rdf:resource="#Person"/>
</owl:Class>
<owl:Class rdf:about="#CommunityLeader">
  <rdfs:subClassOf rdf:resource="#Person"/>
</owl:Class>
<owl:Class rdf:about="#CommunityWorker">
  <rdfs:subClassOf rdf:resource="#Person"/>
</owl:Class>
<owl:Class rdf:about="#TraditionalLeader">
  <rdfs:subClassOf rdf:resource="#Person"/>
</owl:Class>
"##;

pub const GOLDEN_HAS_DIVISION: &str = r##"
<owl:ObjectProperty rdf:about="#hasDivision">
  <rdfs:domain rdf:resource="#Government"/>
  <rdfs:range rdf:resource="#Agency"/>
  <rdfs:range rdf:resource="#Department"/>
  <rdfs:range rdf:resource="#Municipality"/>
</owl:ObjectProperty>
"##;

pub const GOLDEN_INDICATORS: &str = r##"
<owl:Thing rdf:about="#InputIndicator">
<rdf:type rdf:resource="#MonitoringIndicator"/>
</owl:Thing>
<owl:Thing rdf:about="#OutputIndicator">
<rdf:type rdf:resource="#MonitoringIndicator"/>
</owl:Thing>
<owl:Thing rdf:about="#ProcessIndicator">
<rdf:type rdf:resource="#MonitoringIndicator"/>
</owl:Thing>
<owl:Thing rdf:about="#ProgressIndicator">
<rdf:type rdf:resource="#MonitoringIndicator"/>
</owl:Thing>
<owl:Thing rdf:about="#RiskIndicator">
<rdf:type rdf:resource="#MonitoringIndicator"/>
</owl:Thing>
<owl:Thing rdf:about="#ImpactIndicator">
<rdf:type rdf:resource="#MonitoringIndicator"/>
</owl:Thing>
"##;

/// Every element of the snippet must occur among the emitted top-level
/// elements. Returns the ones that do not.
pub fn missing_from(emitted: &str, snippet: &str) -> Vec<Shape> {
    let have: BTreeSet<Shape> = top_level_shapes(emitted).into_iter().collect();
    top_level_shapes(&wrap_snippet(snippet))
        .into_iter()
        .filter(|s| !have.contains(s))
        .collect()
}
