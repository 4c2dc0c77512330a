use std::collections::BTreeSet;

use crate::causal::graph::unordered;
use crate::error::Result;
use crate::stats::CorrelationEngine;

pub type Skeleton = BTreeSet<(String, String)>;

/// Default largest conditioning set.
pub const DEFAULT_MAX_COND: usize = 2;

fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    if items.len() < size {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], size - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Constraint-based skeleton search (order-independent variant): start
/// complete over `nodes` and drop a pair as soon as some conditioning set of
/// at most `max_cond` current neighbours makes `|r| < floor`. Undefined
/// partial correlations count as dependence.
pub fn pc_skeleton(engine: &mut CorrelationEngine, nodes: &[&str], floor: f64, max_cond: usize) -> Result<Skeleton> {
    let idx: Vec<usize> = nodes.iter().map(|n| engine.index(n)).collect::<Result<_>>()?;
    let k = idx.len();
    let mut adj = vec![vec![true; k]; k];
    for (i, row) in adj.iter_mut().enumerate() {
        row[i] = false;
    }
    for level in 0..=max_cond {
        let frozen = adj.clone();
        for a in 0..k {
            for b in a + 1..k {
                if !adj[a][b] {
                    continue;
                }
                let mut removed = false;
                for (x, y) in [(a, b), (b, a)] {
                    let nbrs: Vec<usize> = (0..k).filter(|&m| m != y && frozen[x][m]).collect();
                    for set in subsets(&nbrs, level) {
                        let given: Vec<usize> = set.iter().map(|&m| idx[m]).collect();
                        let c = engine.conditional_idx(idx[a], idx[b], &given)?;
                        if c.value().is_some_and(|r| r.abs() < floor) {
                            removed = true;
                            break;
                        }
                    }
                    if removed {
                        break;
                    }
                }
                if removed {
                    adj[a][b] = false;
                    adj[b][a] = false;
                }
            }
        }
    }
    let mut out = Skeleton::new();
    for a in 0..k {
        for b in a + 1..k {
            if adj[a][b] {
                out.insert(unordered(nodes[a], nodes[b]));
            }
        }
    }
    Ok(out)
}

/// F1 score of `learned` against `truth`; 1 when both are empty.
pub fn skeleton_f1(learned: &Skeleton, truth: &Skeleton) -> f64 {
    if learned.is_empty() && truth.is_empty() {
        return 1.0;
    }
    let tp = learned.intersection(truth).count() as f64;
    let denom = (learned.len() + truth.len()) as f64;
    2.0 * tp / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::white_noise;

    fn engine(series: Vec<(&str, Vec<f64>)>) -> CorrelationEngine {
        let (labels, data): (Vec<_>, Vec<_>) = series.into_iter().map(|(l, d)| (l.to_string(), d)).unzip();
        CorrelationEngine::new(labels, data, 0.05).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let n = 20_000;
        let mut e = engine(vec![("A", white_noise(1, n)), ("B", white_noise(2, n)), ("C", white_noise(3, n))]);
        assert!(pc_skeleton(&mut e, &["A", "B", "C"], 0.05, 2).unwrap().is_empty());
        let full = pc_skeleton(&mut e, &["A", "B", "C"], 0.0, 2).unwrap();
        assert_eq!(full.len(), 3);

        let x = white_noise(4, n);
        let y: Vec<f64> = x.iter().zip(white_noise(5, n)).map(|(a, b)| a + 0.5 * b).collect();
        let mut e = engine(vec![("X", x), ("Y", y)]);
        let s = pc_skeleton(&mut e, &["X", "Y"], 0.05, 2).unwrap();
        assert_eq!(s, Skeleton::from([unordered("X", "Y")]));
        assert!(pc_skeleton(&mut e, &["X", "Y"], 1.0 + 1e-9, 2).unwrap().is_empty());
    }

    #[test]
    fn chain_loses_its_long_edge() {
        let n = 20_000;
        let a = white_noise(6, n);
        let b: Vec<f64> = a.iter().zip(white_noise(7, n)).map(|(x, e)| x + e).collect();
        let c: Vec<f64> = b.iter().zip(white_noise(8, n)).map(|(x, e)| x + e).collect();
        let mut e = engine(vec![("A", a), ("B", b), ("C", c)]);
        let s = pc_skeleton(&mut e, &["A", "B", "C"], 0.05, 1).unwrap();
        assert_eq!(s, Skeleton::from([unordered("A", "B"), unordered("B", "C")]));
        assert_eq!(skeleton_f1(&s, &s), 1.0);
        assert!((skeleton_f1(&s, &Skeleton::from([unordered("A", "B")])) - 2.0 / 3.0).abs() < 1e-12);
    }
}
