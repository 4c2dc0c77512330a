use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::plant::Trace;
use crate::stats::{Corr, CorrelationEngine};

/// Conditioning columns shared by both tables.
pub const TRIANGLE_COLUMNS: [&[&str]; 4] = [&[], &["R"], &["D"], &["R", "D"]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleRow {
    pub x: String,
    pub y: String,
    /// Extra conditioning variable for the collider table.
    pub through: Option<String>,
    pub cells: Vec<Corr>,
}

impl TriangleRow {
    pub fn label(&self) -> String {
        match &self.through {
            Some(t) => format!("{}{}|{}", self.x, self.y, t),
            None => format!("{}{}", self.x, self.y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleTables {
    pub columns: Vec<String>,
    pub non_collider: Vec<TriangleRow>,
    pub collider: Vec<TriangleRow>,
    pub noise_fraction: f64,
}

impl TriangleTables {
    pub fn row(&self, label: &str) -> Option<&TriangleRow> {
        self.non_collider.iter().chain(&self.collider).find(|r| r.label() == label)
    }

    /// Cell by row label (`"OP"`, `"OP|E"`) and column label (`""`, `"R"`, `"D"`, `"RD"`).
    pub fn cell(&self, row: &str, column: &str) -> Option<Corr> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.row(row).map(|r| r.cells[j])
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (title, rows) in [("non-collider", &self.non_collider), ("collider", &self.collider)] {
            let _ = write!(out, "{title:<14}");
            for c in &self.columns {
                let _ = write!(out, "{:>16}", if c.is_empty() { "-" } else { c.as_str() });
            }
            out.push('\n');
            for row in rows {
                let _ = write!(out, "{:<14}", row.label());
                for cell in &row.cells {
                    let s = match *cell {
                        Corr::Value(v) => format!("{v:.3}"),
                        Corr::Undefined { regularized: Some(v), .. } => format!("undef({v:.2})"),
                        Corr::Undefined { .. } => "undef".to_string(),
                    };
                    let _ = write!(out, "{s:>16}");
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

/// Conditional correlations around the O-P-E triangle of an integrating
/// loop, without (non-collider) and with (collider) the third vertex in the
/// conditioning set. With `noise_fraction > 0`, undefined cells carry a
/// value recomputed under that much independent measurement noise.
pub fn triangle_faithfulness_tables(trace: &Trace, noise_fraction: f64, seed: u64) -> Result<TriangleTables> {
    let names = ["O", "P", "E", "R", "D"];
    let mut engine = CorrelationEngine::from_trace(trace, &names, 0.0)?;
    if noise_fraction > 0.0 {
        engine = engine.with_regularization(trace, noise_fraction, seed)?;
    }
    let pairs = [("O", "P", "E"), ("O", "E", "P"), ("P", "E", "O")];
    let mut non_collider = Vec::new();
    let mut collider = Vec::new();
    for (x, y, third) in pairs {
        let mut plain = Vec::new();
        let mut with_third = Vec::new();
        for col in TRIANGLE_COLUMNS {
            plain.push(engine.conditional(x, y, col)?);
            let mut given = vec![third];
            given.extend_from_slice(col);
            with_third.push(engine.conditional(x, y, &given)?);
        }
        non_collider.push(TriangleRow { x: x.into(), y: y.into(), through: None, cells: plain });
        collider.push(TriangleRow { x: x.into(), y: y.into(), through: Some(third.into()), cells: with_third });
    }
    Ok(TriangleTables {
        columns: TRIANGLE_COLUMNS.iter().map(|c| c.concat()).collect(),
        non_collider,
        collider,
        noise_fraction,
    })
}
