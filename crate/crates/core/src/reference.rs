//! Published correlation tables, their rounded patterns and the tolerances
//! each computed value is held to. Loaded from `data/reference_tables.json`.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::stats::{classify, classify_graded, Class, Corr};

const DATA: &str = include_str!("../data/reference_tables.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Matching {
    /// Rounded value must equal the pattern.
    Strict,
    /// Rounded value may differ from the pattern by one step of 0.1.
    #[default]
    Loose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Grading {
    #[default]
    Coarse,
    Graded,
}

/// One rounded table entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pattern {
    Zero,
    Value(f64),
    Weak(f64),
    VeryWeak(f64),
    Undefined,
}

impl Pattern {
    pub fn parse(s: &str) -> Result<Self> {
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) if !rest.starts_with(|c: char| c.is_ascii_digit()) => (-1.0, rest),
            _ => (1.0, s),
        };
        Ok(match body {
            "0" => Pattern::Zero,
            "weak" => Pattern::Weak(sign),
            "very weak" => Pattern::VeryWeak(sign),
            "undef" => Pattern::Undefined,
            v => Pattern::Value(
                v.parse()
                    .map_err(|_| Error::invalid("pattern", format!("cannot read {s:?}")))?,
            ),
        })
    }

    /// Whether a computed correlation rounds to this entry.
    pub fn matches(&self, r: Corr, floor: f64, grading: Grading, matching: Matching) -> bool {
        let Some(r) = r.value() else {
            return *self == Pattern::Undefined;
        };
        let class = match grading {
            Grading::Coarse => classify(r, floor),
            Grading::Graded => classify_graded(r, floor),
        };
        let slack = match matching {
            Matching::Strict => 1e-9,
            Matching::Loose => 0.1 + 1e-9,
        };
        match (*self, class) {
            (Pattern::Zero, Class::Zero) => true,
            (Pattern::Value(p), Class::Value(v)) => (v - p).abs() <= slack,
            (Pattern::Weak(s), Class::Weak(v)) | (Pattern::VeryWeak(s), Class::VeryWeak(v)) => s * v > 0.0,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub pair: (String, String),
    #[serde(default)]
    pub published: Option<f64>,
    #[serde(default)]
    pub range: Option<(f64, f64)>,
    /// Asymptotic value for high gain, shown for reference.
    #[serde(default)]
    pub limit: Option<f64>,
    #[serde(default)]
    pub pattern: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// `corr:A,B`, `sd:X` or `rejection_ratio`.
    pub quantity: String,
    #[serde(default)]
    pub published: Option<f64>,
    pub range: (f64, f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub id: String,
    pub title: String,
    pub scenario: String,
    #[serde(default)]
    pub matching: Matching,
    #[serde(default)]
    pub grading: Grading,
    pub cells: Vec<CellSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

impl TableSpec {
    pub fn has_patterns(&self) -> bool {
        self.cells.iter().any(|c| c.pattern.is_some())
    }

    /// Channel names in order of first appearance.
    pub fn channels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.cells {
            for n in [&c.pair.0, &c.pair.1] {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangleRowSpec {
    pub row: String,
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignSpec {
    pub row: String,
    pub column: String,
    pub sign: i8,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangleSpec {
    pub columns: Vec<String>,
    pub identity_tolerance: f64,
    pub value_tolerance: f64,
    pub non_collider: Vec<TriangleRowSpec>,
    pub collider: Vec<TriangleRowSpec>,
    pub regularized_signs: Vec<SignSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct References {
    pub version: u32,
    pub floor: f64,
    pub tables: Vec<TableSpec>,
    pub triangle: TriangleSpec,
}

impl References {
    pub fn table(&self, id: &str) -> Result<&TableSpec> {
        self.tables
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| Error::invalid("table", format!("no reference table {id:?}")))
    }

    /// Ids belonging to a printed table number (`9` has four parts).
    pub fn ids_for(&self, number: u32) -> Vec<&str> {
        let n = number.to_string();
        self.tables
            .iter()
            .filter(|t| t.id == n || (t.id.starts_with(&n) && t.id[n.len()..].chars().all(|c| c.is_ascii_alphabetic())))
            .map(|t| t.id.as_str())
            .collect()
    }
}

pub fn references() -> &'static References {
    static REFS: OnceLock<References> = OnceLock::new();
    REFS.get_or_init(|| serde_json::from_str(DATA).expect("bundled reference tables parse"))
}
