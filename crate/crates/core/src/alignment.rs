//! Alignment of domain concepts to the DOLCE upper-level taxonomy.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ConceptGraph;

/// Default taxonomy shipped with the crate.
pub const EMBEDDED_DOLCE: &str = include_str!("../data/dolce.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignmentError {
    #[error("malformed taxonomy: {0}")]
    MalformedTaxonomy(String),
    #[error("malformed alignment file: {0}")]
    MalformedMapping(String),
    #[error("`{concept}` is aligned to unknown category `{category}`")]
    UnknownCategory { concept: String, category: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyRecord {
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DolceTaxonomy {
    parent: BTreeMap<String, Option<String>>,
    root: String,
}

impl DolceTaxonomy {
    /// Validates that the records form a single rooted tree.
    pub fn from_records(records: Vec<TaxonomyRecord>) -> Result<Self, AlignmentError> {
        let mut parent = BTreeMap::new();
        for rec in records {
            if parent.insert(rec.category.clone(), rec.parent).is_some() {
                return Err(AlignmentError::MalformedTaxonomy(format!(
                    "category `{}` is listed twice",
                    rec.category
                )));
            }
        }
        let roots: Vec<&String> = parent
            .iter()
            .filter(|(_, p)| p.is_none())
            .map(|(c, _)| c)
            .collect();
        let root = match roots.as_slice() {
            [root] => (*root).clone(),
            [] => return Err(AlignmentError::MalformedTaxonomy("no root category".into())),
            many => {
                return Err(AlignmentError::MalformedTaxonomy(format!(
                    "multiple roots: {}",
                    many.iter()
                        .map(|s| s.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                )))
            }
        };
        for (cat, p) in &parent {
            if let Some(p) = p {
                if !parent.contains_key(p) {
                    return Err(AlignmentError::MalformedTaxonomy(format!(
                        "`{cat}` has unknown parent `{p}`"
                    )));
                }
            }
        }
        let tax = DolceTaxonomy { parent, root };
        // with one root and no dangling parents, every chain must end at the
        // root unless it loops
        for cat in tax.parent.keys() {
            let mut steps = 0;
            let mut cur = cat.as_str();
            while let Some(Some(p)) = tax.parent.get(cur) {
                cur = p;
                steps += 1;
                if steps > tax.parent.len() {
                    return Err(AlignmentError::MalformedTaxonomy(format!(
                        "cycle through `{cat}`"
                    )));
                }
            }
        }
        Ok(tax)
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.parent.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn contains(&self, category: &str) -> bool {
        self.parent.contains_key(category)
    }

    pub fn parent_of(&self, category: &str) -> Option<&str> {
        self.parent.get(category)?.as_deref()
    }

    /// True when `category` equals `ancestor` or lies below it.
    pub fn is_at_or_below(&self, category: &str, ancestor: &str) -> bool {
        let mut cur = Some(category);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.parent_of(c);
        }
        false
    }

    pub fn to_records(&self) -> Vec<TaxonomyRecord> {
        self.parent
            .iter()
            .map(|(c, p)| TaxonomyRecord {
                category: c.clone(),
                parent: p.clone(),
            })
            .collect()
    }
}

/// Loads a taxonomy from JSON records, or the embedded default when `source`
/// is `None`.
pub fn load_dolce(source: Option<&str>) -> Result<DolceTaxonomy, AlignmentError> {
    let text = source.unwrap_or(EMBEDDED_DOLCE);
    let records: Vec<TaxonomyRecord> =
        serde_json::from_str(text).map_err(|e| AlignmentError::MalformedTaxonomy(e.to_string()))?;
    DolceTaxonomy::from_records(records)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentRecord {
    pub concept: String,
    pub dolce: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignmentMap {
    pub entries: BTreeMap<String, String>,
}

impl AlignmentMap {
    pub fn from_records(records: Vec<AlignmentRecord>) -> Result<Self, AlignmentError> {
        let mut entries = BTreeMap::new();
        for rec in records {
            if let Some(prev) = entries.insert(rec.concept.clone(), rec.dolce.clone()) {
                if prev != rec.dolce {
                    return Err(AlignmentError::MalformedMapping(format!(
                        "`{}` is aligned to both `{prev}` and `{}`",
                        rec.concept, rec.dolce
                    )));
                }
            }
        }
        Ok(AlignmentMap { entries })
    }

    pub fn insert(&mut self, concept: impl Into<String>, category: impl Into<String>) {
        self.entries.insert(concept.into(), category.into());
    }
}

pub fn parse_alignment(json: &str) -> Result<AlignmentMap, AlignmentError> {
    let records: Vec<AlignmentRecord> =
        serde_json::from_str(json).map_err(|e| AlignmentError::MalformedMapping(e.to_string()))?;
    AlignmentMap::from_records(records)
}

/// A subclass edge whose endpoints are aligned to categories that do not
/// nest the same way.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Incompatibility {
    pub child: String,
    pub parent: String,
    pub dolce_child: String,
    pub dolce_parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnknownCategoryEntry {
    pub concept: String,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    /// Fraction of graph classes that are aligned (1.0 for an empty graph).
    pub coverage: f64,
    pub unmapped: Vec<String>,
    /// Aligned names that do not occur in the graph.
    pub absent: Vec<String>,
    pub incompatibilities: Vec<Incompatibility>,
    pub unknown_categories: Vec<UnknownCategoryEntry>,
    pub valid: bool,
}

impl AlignmentReport {
    /// The first unknown-category entry as an error, if any.
    pub fn ensure_valid(&self) -> Result<(), AlignmentError> {
        match self.unknown_categories.first() {
            Some(e) => Err(AlignmentError::UnknownCategory {
                concept: e.concept.clone(),
                category: e.category.clone(),
            }),
            None => Ok(()),
        }
    }
}

pub fn validate_alignment(
    graph: &ConceptGraph,
    map: &AlignmentMap,
    tax: &DolceTaxonomy,
) -> AlignmentReport {
    let unknown_categories: Vec<UnknownCategoryEntry> = map
        .entries
        .iter()
        .filter(|(_, cat)| !tax.contains(cat))
        .map(|(concept, cat)| UnknownCategoryEntry {
            concept: concept.clone(),
            category: cat.clone(),
        })
        .collect();

    let mapped_classes = graph
        .classes
        .iter()
        .filter(|c| map.entries.contains_key(*c))
        .count();
    let coverage = if graph.classes.is_empty() {
        1.0
    } else {
        mapped_classes as f64 / graph.classes.len() as f64
    };
    let unmapped = graph
        .classes
        .iter()
        .filter(|c| !map.entries.contains_key(*c))
        .cloned()
        .collect();
    let absent = map
        .entries
        .keys()
        .filter(|c| !graph.contains(c))
        .cloned()
        .collect();

    let incompatibilities: BTreeSet<Incompatibility> = graph
        .subclass_edges
        .iter()
        .filter_map(|(child, parent)| {
            let dc = map.entries.get(child)?;
            let dp = map.entries.get(parent)?;
            if !tax.contains(dc) || !tax.contains(dp) || tax.is_at_or_below(dc, dp) {
                return None;
            }
            Some(Incompatibility {
                child: child.clone(),
                parent: parent.clone(),
                dolce_child: dc.clone(),
                dolce_parent: dp.clone(),
            })
        })
        .collect();

    AlignmentReport {
        coverage,
        unmapped,
        absent,
        incompatibilities: incompatibilities.into_iter().collect(),
        valid: unknown_categories.is_empty(),
        unknown_categories,
    }
}
