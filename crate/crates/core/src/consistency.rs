//! Structural inconsistency detection over a normalized ontology.
//!
//! Six detectors run over the source document and its concept graph:
//!
//! - **SubclassCycle** (error): a strongly connected component of the
//!   subclass relation, or a self-loop.
//! - **CategoryConflict** (error): a name used both as an individual and as
//!   a class.
//! - **ReservedRoleMisuse** (error): a structural role under `only` or a
//!   cardinality restriction.
//! - **RangeIsIndividual** (error): a plain role whose range is an individual.
//! - **DuplicateAxiom** (warning): the same statement on several lines.
//! - **IsolatedName** (warning): a concept name mentioned exactly once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{normalize_lenient, ConceptGraph, NormalizationConfig, OntologyDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagnosticCode {
    SubclassCycle,
    CategoryConflict,
    ReservedRoleMisuse,
    DuplicateAxiom,
    IsolatedName,
    RangeIsIndividual,
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub subjects: Vec<String>,
    pub message: String,
    pub source_lines: Vec<usize>,
}

impl Diagnostic {
    fn error(code: DiagnosticCode, subjects: Vec<String>, message: String) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            subjects,
            message,
            source_lines: Vec::new(),
        }
    }

    fn warning(code: DiagnosticCode, subjects: Vec<String>, message: String) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, subjects, message)
        }
    }

    fn sort_key(&self) -> (Severity, DiagnosticCode, &[String], &str, &[usize]) {
        (
            self.severity,
            self.code,
            &self.subjects,
            &self.message,
            &self.source_lines,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub diagnostics: Vec<Diagnostic>,
    pub error_count: usize,
    pub warning_count: usize,
    pub clean: bool,
}

impl DiagnosticReport {
    pub fn from_diagnostics(mut diagnostics: Vec<Diagnostic>) -> Self {
        diagnostics.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let error_count = diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .count();
        DiagnosticReport {
            warning_count: diagnostics.len() - error_count,
            error_count,
            clean: error_count == 0,
            diagnostics,
        }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }
}

/// Runs every detector. `graph` is expected to be the normalization of `doc`
/// under `cfg` (possibly via [`normalize_lenient`]).
pub fn check(
    doc: &OntologyDoc,
    graph: &ConceptGraph,
    cfg: &NormalizationConfig,
) -> DiagnosticReport {
    let mut out = Vec::new();
    out.extend(detect_subclass_cycles(graph));
    out.extend(detect_category_conflicts(graph));
    out.extend(detect_reserved_role_misuse(doc, cfg));
    out.extend(detect_duplicate_axioms(doc));
    out.extend(detect_isolated_names(doc));
    attach_lines(&mut out, doc);
    DiagnosticReport::from_diagnostics(out)
}

/// Normalizes leniently and checks in one step.
pub fn check_doc(doc: &OntologyDoc, cfg: &NormalizationConfig) -> (ConceptGraph, DiagnosticReport) {
    let (graph, _) = normalize_lenient(doc, cfg);
    let report = check(doc, &graph, cfg);
    (graph, report)
}

/// Graph-only detectors; these decide whether downstream stages may run.
pub fn structural_errors(graph: &ConceptGraph) -> Vec<Diagnostic> {
    let mut out = detect_subclass_cycles(graph);
    out.extend(detect_category_conflicts(graph));
    out
}

/// Strongly connected components of `edges` (Tarjan), each sorted, in
/// order of their smallest member. Singletons are included.
pub fn strongly_connected_components(edges: &BTreeSet<(String, String)>) -> Vec<Vec<String>> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (from, to) in edges {
        adjacency.entry(from).or_default().push(to);
        adjacency.entry(to).or_default();
    }
    let nodes: Vec<&str> = adjacency.keys().copied().collect();
    let id_of: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let succ: Vec<Vec<usize>> = nodes
        .iter()
        .map(|n| adjacency[n].iter().map(|m| id_of[m]).collect())
        .collect();

    let n = nodes.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut components = Vec::new();

    // explicit call stack: (node, next successor position)
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component.push(nodes[w].to_string());
                    if w == v {
                        break;
                    }
                }
                component.sort();
                components.push(component);
            }
        }
    }
    components.sort();
    components
}

pub fn detect_subclass_cycles(graph: &ConceptGraph) -> Vec<Diagnostic> {
    strongly_connected_components(&graph.subclass_edges)
        .into_iter()
        .filter(|c| c.len() >= 2 || graph.subclass_edges.contains(&(c[0].clone(), c[0].clone())))
        .map(|members| {
            let message = if members.len() == 1 {
                format!("`{}` is declared a subclass of itself", members[0])
            } else {
                format!(
                    "subclass cycle among {}",
                    members
                        .iter()
                        .map(|m| format!("`{m}`"))
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            };
            Diagnostic::error(DiagnosticCode::SubclassCycle, members, message)
        })
        .collect()
}

pub fn detect_category_conflicts(graph: &ConceptGraph) -> Vec<Diagnostic> {
    let structural = graph.structural_class_names();
    let mut out: Vec<Diagnostic> = graph
        .individuals
        .iter()
        .filter(|name| structural.contains(name.as_str()))
        .map(|name| {
            Diagnostic::error(
                DiagnosticCode::CategoryConflict,
                vec![name.clone()],
                format!("`{name}` is used both as an individual and as a class"),
            )
        })
        .collect();

    for (role, decl) in &graph.roles {
        for range in decl
            .ranges
            .iter()
            .filter(|r| graph.individuals.contains(*r))
        {
            out.push(Diagnostic::error(
                DiagnosticCode::RangeIsIndividual,
                vec![range.clone(), role.clone()],
                format!("range `{range}` of role `{role}` is an individual"),
            ));
        }
    }
    out
}

pub fn detect_reserved_role_misuse(
    doc: &OntologyDoc,
    cfg: &NormalizationConfig,
) -> Vec<Diagnostic> {
    let (_, misuses) = normalize_lenient(doc, cfg);
    misuses
        .into_iter()
        .map(|m| Diagnostic {
            severity: Severity::Error,
            code: DiagnosticCode::ReservedRoleMisuse,
            message: format!(
                "reserved role `{}` used under {} in axiom for `{}`",
                m.role, m.context, m.lhs
            ),
            subjects: vec![m.lhs, m.role],
            source_lines: vec![m.line],
        })
        .collect()
}

pub fn detect_duplicate_axioms(doc: &OntologyDoc) -> Vec<Diagnostic> {
    let mut groups: BTreeMap<String, (String, Vec<usize>)> = BTreeMap::new();
    for axiom in &doc.axioms {
        let entry = groups
            .entry(axiom.to_string())
            .or_insert_with(|| (axiom.lhs.clone(), Vec::new()));
        entry.1.push(axiom.source_line);
    }
    groups
        .into_iter()
        .filter(|(_, (_, lines))| lines.len() > 1)
        .map(|(text, (lhs, mut lines))| {
            lines.sort_unstable();
            Diagnostic {
                source_lines: lines,
                ..Diagnostic::warning(
                    DiagnosticCode::DuplicateAxiom,
                    vec![lhs],
                    format!("axiom `{text}` is stated more than once"),
                )
            }
        })
        .collect()
}

pub fn detect_isolated_names(doc: &OntologyDoc) -> Vec<Diagnostic> {
    let mut uses: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for axiom in &doc.axioms {
        uses.entry(&axiom.lhs).or_default().push(axiom.source_line);
        axiom
            .rhs
            .for_each_name(&mut |name| uses.entry(name).or_default().push(axiom.source_line));
    }
    uses.into_iter()
        .filter(|(_, lines)| lines.len() == 1)
        .map(|(name, lines)| Diagnostic {
            source_lines: lines,
            ..Diagnostic::warning(
                DiagnosticCode::IsolatedName,
                vec![name.to_string()],
                format!("`{name}` is mentioned only once"),
            )
        })
        .collect()
}

/// Fills `source_lines` for graph-level diagnostics with the lines of the
/// axioms whose left side is one of the subjects.
fn attach_lines(diagnostics: &mut [Diagnostic], doc: &OntologyDoc) {
    for d in diagnostics.iter_mut().filter(|d| d.source_lines.is_empty()) {
        let subjects: BTreeSet<&str> = d.subjects.iter().map(String::as_str).collect();
        let mut lines: Vec<usize> = doc
            .axioms
            .iter()
            .filter(|a| {
                subjects.contains(a.lhs.as_str()) || {
                    let mut hit = false;
                    if d.code == DiagnosticCode::CategoryConflict {
                        a.rhs.for_each_name(&mut |n| hit |= subjects.contains(n));
                    }
                    hit
                }
            })
            .map(|a| a.source_line)
            .collect();
        lines.sort_unstable();
        lines.dedup();
        d.source_lines = lines;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize;
    use crate::parser::parse_ontology;

    fn run(src: &str) -> DiagnosticReport {
        let doc = parse_ontology(src, "t").unwrap();
        let cfg = NormalizationConfig::default();
        let (_, report) = check_doc(&doc, &cfg);
        report
    }

    fn codes(report: &DiagnosticReport) -> Vec<DiagnosticCode> {
        report.errors().map(|d| d.code).collect()
    }

    #[test]
    fn empty_ontology_is_clean() {
        let report = run("");
        assert!(report.clean);
        assert!(report.diagnostics.is_empty());
    }

    #[test]
    fn two_cycle_is_one_error() {
        let report = run("A sub some isA . B\nB sub some isA . A\n");
        assert_eq!(codes(&report), [DiagnosticCode::SubclassCycle]);
        assert_eq!(report.diagnostics[0].subjects, ["A", "B"]);
        assert_eq!(report.diagnostics[0].source_lines, [1, 2]);
        assert!(!report.clean);
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let report = run("A sub some isA . A\n");
        assert_eq!(codes(&report), [DiagnosticCode::SubclassCycle]);
        assert_eq!(report.diagnostics[0].subjects, ["A"]);
    }

    #[test]
    fn plain_atomic_subsumption_takes_part_in_cycles() {
        let report = run("A sub B\nB sub some isA . C\nC sub A\n");
        assert_eq!(codes(&report), [DiagnosticCode::SubclassCycle]);
        assert_eq!(report.diagnostics[0].subjects, ["A", "B", "C"]);
    }

    #[test]
    fn individual_used_as_class_conflicts() {
        let report = run(
            "MI sub some IsIndividualOf . (InputIndicator or OutputIndicator)\n\
             InputIndicator sub some isA . Person\n",
        );
        assert_eq!(codes(&report), [DiagnosticCode::CategoryConflict]);
        assert_eq!(report.diagnostics[0].subjects, ["InputIndicator"]);
    }

    #[test]
    fn role_range_individual_is_flagged_separately() {
        let report = run("MI sub some IsIndividualOf . X\nP sub some uses . X\n");
        assert_eq!(codes(&report), [DiagnosticCode::RangeIsIndividual]);
        assert_eq!(report.diagnostics[0].subjects, ["X", "uses"]);
    }

    #[test]
    fn no_individuals_no_conflicts() {
        let doc = parse_ontology("A sub some isA . B\n", "t").unwrap();
        let g = normalize(&doc, &NormalizationConfig::default()).unwrap();
        assert!(detect_category_conflicts(&g).is_empty());
    }

    #[test]
    fn reserved_role_misuse_is_reported_with_line() {
        let report = run("A sub some isA . B\nC sub only isA . D\n");
        assert_eq!(codes(&report), [DiagnosticCode::ReservedRoleMisuse]);
        assert_eq!(report.diagnostics[0].source_lines, [2]);
    }

    #[test]
    fn duplicates_and_isolated_names_are_warnings() {
        let report =
            run("A sub some isA . B\nA sub some isA . B\nC sub some r . D\nC sub some isA . B\n");
        assert!(report.clean);
        let dup: Vec<_> = report
            .diagnostics
            .iter()
            .filter(|d| d.code == DiagnosticCode::DuplicateAxiom)
            .collect();
        assert_eq!(dup.len(), 1);
        assert_eq!(dup[0].source_lines, [1, 2]);
        let isolated: Vec<_> = report
            .diagnostics
            .iter()
            .filter(|d| d.code == DiagnosticCode::IsolatedName)
            .map(|d| d.subjects[0].as_str())
            .collect();
        assert_eq!(isolated, ["D"]);
        assert_eq!(report.warning_count, 2);
    }

    #[test]
    fn diagnostics_are_sorted() {
        let report = run("Z sub some isA . Z\nA sub only isA . B\nQ sub some isA . Q\n");
        let keys: Vec<_> = report
            .diagnostics
            .iter()
            .map(|d| (d.severity, d.code, d.subjects[0].clone()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(report.error_count, 3);
    }

    #[test]
    fn scc_handles_long_chains_without_recursion() {
        let edges: BTreeSet<(String, String)> = (0..20_000)
            .map(|i| (format!("N{i}"), format!("N{}", i + 1)))
            .collect();
        let comps = strongly_connected_components(&edges);
        assert_eq!(comps.len(), 20_001);
    }
}
