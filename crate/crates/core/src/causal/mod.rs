//! Ground-truth graphs, d-separation, faithfulness reporting and skeleton search.

mod faithfulness;
mod graph;
mod skeleton;
mod synthetic;
mod triangle;

pub use faithfulness::{faithfulness_violations, side_by_side, FaithfulnessReport, SilentEdge, SpuriousPair};
pub use graph::{unordered, CausalGraph};
pub use skeleton::{pc_skeleton, skeleton_f1, Skeleton, DEFAULT_MAX_COND};
pub use synthetic::LinearGaussianDag;
pub use triangle::{triangle_faithfulness_tables, TriangleRow, TriangleTables, TRIANGLE_COLUMNS};

use crate::plant::{ModelKind, ScenarioSpec};

/// The causal structure each model is built from, over the channels it
/// records. Constant inputs are left out, and with a constant reference the
/// error node is folded into a direct `P -> O` edge.
pub fn default_graph(spec: &ScenarioSpec) -> CausalGraph {
    let varies = |c: &str| spec.inputs.get(c).is_some_and(|s| !s.is_constant());
    let (nodes, edges): (Vec<&str>, Vec<(&str, &str)>) = match spec.model {
        ModelKind::IntegralLoop if !varies("R") => (vec!["D", "P", "O"], vec![("D", "P"), ("P", "O"), ("O", "P")]),
        ModelKind::IntegralLoop => (
            vec!["R", "D", "P", "E", "O"],
            vec![("D", "P"), ("O", "P"), ("P", "E"), ("R", "E"), ("E", "O")],
        ),
        ModelKind::SplitDisturbanceLoop => (
            vec!["R", "D0", "D1", "P", "E", "O", "O+D0"],
            vec![
                ("D0", "O+D0"),
                ("O", "O+D0"),
                ("O+D0", "P"),
                ("D1", "P"),
                ("P", "E"),
                ("R", "E"),
                ("E", "O"),
            ],
        ),
        ModelKind::FeedforwardLoop => (
            vec!["R", "D_O", "D_P", "P", "E", "O"],
            vec![("R", "E"), ("P", "E"), ("D_O", "O"), ("O", "P"), ("D_O", "P"), ("D_P", "P")],
        ),
        ModelKind::ProportionalLoop => (
            vec!["R", "D_O", "D_P", "P", "E", "O"],
            vec![("R", "E"), ("P", "E"), ("E", "O"), ("O", "P"), ("D_O", "P"), ("D_P", "P")],
        ),
        ModelKind::Capacitor => (vec!["V", "I"], vec![("V", "I")]),
        ModelKind::PassiveEquilibrium => (vec!["D", "P", "O"], vec![("D", "P"), ("P", "O")]),
    };
    let nodes: Vec<&str> = nodes.into_iter().filter(|n| !matches!(*n, "R" | "D_O" | "D_P" | "D" | "D0" | "D1") || varies(n)).collect();
    let edges: Vec<(&str, &str)> = edges
        .into_iter()
        .filter(|(a, b)| nodes.contains(a) && nodes.contains(b))
        .collect();
    CausalGraph::new(&nodes, &edges).expect("built-in graphs are well formed")
}
