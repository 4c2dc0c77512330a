use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::causal::graph::{unordered, CausalGraph};
use crate::causal::skeleton::Skeleton;
use crate::error::Result;
use crate::stats::CorrelationReport;

/// A direct causal edge with a correlation below the floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilentEdge {
    pub from: String,
    pub to: String,
    pub abs_r: f64,
    pub floor: f64,
}

/// A correlated pair with no direct edge between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpuriousPair {
    pub a: String,
    pub b: String,
    pub abs_r: f64,
    /// Shortest directed path in either direction; `None` if there is none.
    pub path_length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessReport {
    pub causation_without_correlation: Vec<SilentEdge>,
    pub correlation_without_adjacency: Vec<SpuriousPair>,
    pub skeleton_learned: Skeleton,
    pub skeleton_truth: Skeleton,
}

/// Compares the edges of `g` with the pairwise correlations in `report`.
/// Pairs whose correlation is undefined are skipped. The learned skeleton
/// defaults to the marginal one (pairs with `|r| >= floor`); see
/// [`FaithfulnessReport::with_learned_skeleton`].
pub fn faithfulness_violations(g: &CausalGraph, report: &CorrelationReport, floor: f64) -> Result<FaithfulnessReport> {
    let mut silent = Vec::new();
    for (from, to) in g.edges() {
        if let Some(r) = report.value(from, to)? {
            if r.abs() < floor {
                silent.push(SilentEdge {
                    from: from.to_string(),
                    to: to.to_string(),
                    abs_r: r.abs(),
                    floor,
                });
            }
        }
    }
    let nodes = g.nodes();
    let mut spurious = Vec::new();
    let mut learned = Skeleton::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let Some(r) = report.value(a, b)? else { continue };
            if r.abs() < floor {
                continue;
            }
            learned.insert(unordered(a, b));
            if !g.adjacent(a, b) {
                spurious.push(SpuriousPair {
                    a: a.clone(),
                    b: b.clone(),
                    abs_r: r.abs(),
                    path_length: g.directed_distance(a, b)?,
                });
            }
        }
    }
    Ok(FaithfulnessReport {
        causation_without_correlation: silent,
        correlation_without_adjacency: spurious,
        skeleton_learned: learned,
        skeleton_truth: g.skeleton(),
    })
}

impl FaithfulnessReport {
    pub fn with_learned_skeleton(mut self, skeleton: Skeleton) -> Self {
        self.skeleton_learned = skeleton;
        self
    }

    pub fn is_faithful(&self) -> bool {
        self.causation_without_correlation.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Two columns: the causal edges on the left, the correlated pairs (with
/// their signed correlation) on the right.
pub fn side_by_side(g: &CausalGraph, report: &CorrelationReport, floor: f64) -> Result<String> {
    let left: Vec<String> = g.edges().map(|(a, b)| format!("{a} -> {b}")).collect();
    let mut right = Vec::new();
    let nodes = g.nodes();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            match report.value(a, b)? {
                Some(r) if r.abs() >= floor => right.push(format!("{a} -- {b}  {r:+.3}")),
                Some(_) => {}
                None => right.push(format!("{a} -- {b}  undef")),
            }
        }
    }
    let width = left.iter().map(String::len).max().unwrap_or(0).max(9) + 4;
    let mut out = String::new();
    let _ = writeln!(out, "{:width$}correlation (|r| >= {floor})", "causality");
    for i in 0..left.len().max(right.len()) {
        let l = left.get(i).map_or("", String::as_str);
        let r = right.get(i).map_or("", String::as_str);
        let _ = writeln!(out, "{}", format!("{l:width$}{r}").trim_end());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::white_noise;
    use crate::stats::CorrelationEngine;

    #[test]
    fn empty_graph_with_independent_channels() {
        let e = CorrelationEngine::new(
            vec!["A".into(), "B".into()],
            vec![white_noise(1, 50_000), white_noise(2, 50_000)],
            0.05,
        )
        .unwrap();
        let g = CausalGraph::new(&["A", "B"], &[]).unwrap();
        let r = faithfulness_violations(&g, e.report(), 0.05).unwrap();
        assert!(r.causation_without_correlation.is_empty());
        assert!(r.correlation_without_adjacency.is_empty());
        assert!(r.skeleton_learned.is_empty() && r.skeleton_truth.is_empty());
    }

    #[test]
    fn hidden_edge_and_spurious_pair() {
        let n = 50_000;
        let d = white_noise(3, n);
        let o: Vec<f64> = d.iter().map(|v| -v).collect();
        let p = white_noise(4, n);
        let e = CorrelationEngine::new(vec!["D".into(), "P".into(), "O".into()], vec![d, p, o], 0.05).unwrap();
        let g = CausalGraph::new(&["D", "P", "O"], &[("D", "P"), ("P", "O"), ("O", "P")]).unwrap();
        let r = faithfulness_violations(&g, e.report(), 0.05).unwrap();
        assert_eq!(r.causation_without_correlation.len(), 3);
        assert_eq!(r.correlation_without_adjacency.len(), 1);
        let pair = &r.correlation_without_adjacency[0];
        assert_eq!((pair.a.as_str(), pair.b.as_str(), pair.path_length), ("D", "O", Some(2)));
        let text = side_by_side(&g, e.report(), 0.05).unwrap();
        assert!(text.contains("D -> P") && text.contains("D -- O  -1.000"), "{text}");
    }
}
