//! Competency-question coverage scoring.
//!
//! A concept's weight is one plus the weights of its children (subclasses,
//! individuals, and composition children); a childless concept weighs 1 and
//! an absent one 0. A question's semantic relatedness score (SRS) is the sum
//! of the weights of the concepts it is mapped to.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ChildIndex, ConceptGraph, NormalizationConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SrsError {
    #[error("subclass cycle reachable from `{0}`; run the consistency check first")]
    CycleDetected(String),
    #[error("duplicate question id `{0}`")]
    DuplicateQuestionId(String),
    #[error("weight of `{0}` overflows a 64-bit counter")]
    Overflow(String),
    #[error("malformed file: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionMapping {
    pub id: String,
    pub text: String,
    pub concepts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptScore {
    pub concept: String,
    pub card: u64,
    pub present: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrsEntry {
    pub question: String,
    pub per_concept: Vec<ConceptScore>,
    pub srs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SrsReport {
    pub entries: Vec<SrsEntry>,
    pub min_srs: u64,
    pub max_srs: u64,
    pub unmapped_concepts: BTreeSet<String>,
}

/// Memoized weight computation over one graph.
pub struct CardCounter<'g> {
    graph: &'g ConceptGraph,
    index: ChildIndex<'g>,
    memo: HashMap<&'g str, u64>,
}

impl<'g> CardCounter<'g> {
    pub fn new(graph: &'g ConceptGraph, cfg: &NormalizationConfig) -> Self {
        CardCounter {
            graph,
            index: ChildIndex::build(graph, cfg),
            memo: HashMap::new(),
        }
    }

    pub fn card(&mut self, concept: &str) -> Result<u64, SrsError> {
        let Some(start) = self
            .graph
            .classes
            .get(concept)
            .or_else(|| self.graph.individuals.get(concept))
        else {
            return Ok(0);
        };
        let start: &'g str = start.as_str();
        if let Some(&c) = self.memo.get(start) {
            return Ok(c);
        }

        // iterative post-order DFS; `on_path` catches cycles
        let mut on_path: BTreeSet<&'g str> = BTreeSet::new();
        let mut stack: Vec<(&'g str, Vec<&'g str>, u64)> = Vec::new();
        let kids: Vec<&'g str> = self.index.of(start).collect();
        on_path.insert(start);
        stack.push((start, kids, 1));

        while let Some((node, pending, acc)) = stack.last_mut() {
            let node = *node;
            match pending.pop() {
                Some(child) => {
                    if let Some(&c) = self.memo.get(child) {
                        *acc = acc
                            .checked_add(c)
                            .ok_or_else(|| SrsError::Overflow(node.to_string()))?;
                        continue;
                    }
                    if !on_path.insert(child) {
                        return Err(SrsError::CycleDetected(child.to_string()));
                    }
                    let kids: Vec<&'g str> = self.index.of(child).collect();
                    stack.push((child, kids, 1));
                }
                None => {
                    let total = *acc;
                    stack.pop();
                    on_path.remove(node);
                    self.memo.insert(node, total);
                    if let Some((parent, _, parent_acc)) = stack.last_mut() {
                        *parent_acc = parent_acc
                            .checked_add(total)
                            .ok_or_else(|| SrsError::Overflow(parent.to_string()))?;
                    }
                }
            }
        }
        Ok(self.memo[start])
    }

    pub fn score(&mut self, question: &QuestionMapping) -> Result<SrsEntry, SrsError> {
        let mut per_concept = Vec::with_capacity(question.concepts.len());
        let mut total: u64 = 0;
        for concept in &question.concepts {
            let card = self.card(concept)?;
            total = total
                .checked_add(card)
                .ok_or_else(|| SrsError::Overflow(question.id.clone()))?;
            per_concept.push(ConceptScore {
                concept: concept.clone(),
                card,
                present: card > 0,
            });
        }
        Ok(SrsEntry {
            question: question.id.clone(),
            per_concept,
            srs: total,
        })
    }
}

/// Weight of a single concept; 0 when the concept is not in the graph.
pub fn card(
    graph: &ConceptGraph,
    cfg: &NormalizationConfig,
    concept: &str,
) -> Result<u64, SrsError> {
    CardCounter::new(graph, cfg).card(concept)
}

pub fn srs(
    graph: &ConceptGraph,
    cfg: &NormalizationConfig,
    question: &QuestionMapping,
) -> Result<SrsEntry, SrsError> {
    CardCounter::new(graph, cfg).score(question)
}

pub fn srs_report(
    graph: &ConceptGraph,
    cfg: &NormalizationConfig,
    questions: &[QuestionMapping],
) -> Result<SrsReport, SrsError> {
    let mut seen = BTreeSet::new();
    if let Some(dup) = questions.iter().find(|q| !seen.insert(q.id.as_str())) {
        return Err(SrsError::DuplicateQuestionId(dup.id.clone()));
    }

    let mut counter = CardCounter::new(graph, cfg);
    let entries = questions
        .iter()
        .map(|q| counter.score(q))
        .collect::<Result<Vec<_>, _>>()?;
    let unmapped_concepts = entries
        .iter()
        .flat_map(|e| e.per_concept.iter())
        .filter(|c| !c.present)
        .map(|c| c.concept.clone())
        .collect();
    Ok(SrsReport {
        min_srs: entries.iter().map(|e| e.srs).min().unwrap_or(0),
        max_srs: entries.iter().map(|e| e.srs).max().unwrap_or(0),
        unmapped_concepts,
        entries,
    })
}

pub fn parse_questions(json: &str) -> Result<Vec<QuestionMapping>, SrsError> {
    serde_json::from_str(json).map_err(|e| SrsError::Malformed(e.to_string()))
}

/// Expected score for one question, used to compare a run against a
/// published table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    pub id: String,
    pub expected_srs: u64,
    pub paper_discrepancy: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_value: Option<u64>,
}

pub fn parse_expectations(json: &str) -> Result<Vec<Expectation>, SrsError> {
    serde_json::from_str(json).map_err(|e| SrsError::Malformed(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationStatus {
    /// Computed score equals the expected score and the published one.
    Match,
    /// Computed score equals the expected score, which is known to differ
    /// from the published value.
    FlaggedDiscrepancy,
    /// Computed score differs from the expectation.
    Mismatch,
    /// No entry in the report for this expectation.
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationOutcome {
    pub id: String,
    pub computed: Option<u64>,
    pub expected: u64,
    pub paper_discrepancy: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_value: Option<u64>,
    pub status: ExpectationStatus,
}

pub fn compare_expectations(
    report: &SrsReport,
    expectations: &[Expectation],
) -> Vec<ExpectationOutcome> {
    let computed: BTreeMap<&str, u64> = report
        .entries
        .iter()
        .map(|e| (e.question.as_str(), e.srs))
        .collect();
    expectations
        .iter()
        .map(|exp| {
            let got = computed.get(exp.id.as_str()).copied();
            let status = match got {
                None => ExpectationStatus::Missing,
                Some(v) if v != exp.expected_srs => ExpectationStatus::Mismatch,
                Some(_) if exp.paper_discrepancy => ExpectationStatus::FlaggedDiscrepancy,
                Some(_) => ExpectationStatus::Match,
            };
            ExpectationOutcome {
                id: exp.id.clone(),
                computed: got,
                expected: exp.expected_srs,
                paper_discrepancy: exp.paper_discrepancy,
                paper_value: exp.paper_value,
                status,
            }
        })
        .collect()
}
