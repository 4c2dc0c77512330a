use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::causal::graph::CausalGraph;
use crate::error::Result;
use crate::signals::{derive_seed, white_noise};

/// Acyclic linear structural model with unit-variance Gaussian noise.
#[derive(Debug, Clone)]
pub struct LinearGaussianDag {
    pub graph: CausalGraph,
    /// `(from, to, coefficient)` by node index, `from < to`.
    pub coefficients: Vec<(usize, usize, f64)>,
}

impl LinearGaussianDag {
    /// Each forward pair gets an edge with probability `edge_prob`;
    /// coefficient magnitudes are uniform on [0.5, 1.5] with random sign.
    pub fn random(n_nodes: usize, edge_prob: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = (0..n_nodes).map(|i| format!("X{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut graph = CausalGraph::new(&refs, &[])?;
        let mut coefficients = Vec::new();
        for i in 0..n_nodes {
            for j in i + 1..n_nodes {
                if rng.random_bool(edge_prob) {
                    let mag = rng.random_range(0.5..=1.5);
                    let c = if rng.random_bool(0.5) { mag } else { -mag };
                    graph.add_edge(&names[i], &names[j])?;
                    coefficients.push((i, j, c));
                }
            }
        }
        Ok(Self { graph, coefficients })
    }

    /// `n` i.i.d. draws, one series per node in node order.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let k = self.graph.nodes().len();
        let mut data: Vec<Vec<f64>> = (0..k)
            .map(|i| white_noise(derive_seed(seed, &format!("dag/{i}")), n))
            .collect();
        // Node order is topological.
        for j in 0..k {
            for &(from, to, c) in self.coefficients.iter().filter(|e| e.1 == j) {
                let (head, tail) = data.split_at_mut(to);
                tail[0].iter_mut().zip(&head[from]).for_each(|(y, x)| *y += c * x);
            }
        }
        data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_edges_carry_their_coefficient() {
        let dag = LinearGaussianDag::random(5, 0.5, 3).unwrap();
        assert!(dag.graph.is_acyclic());
        let same = LinearGaussianDag::random(5, 0.5, 3).unwrap();
        assert_eq!(dag.graph, same.graph);
        let g = CausalGraph::new(&["X0", "X1"], &[("X0", "X1")]).unwrap();
        let two = LinearGaussianDag { graph: g, coefficients: vec![(0, 1, 2.0)] };
        let data = two.sample(50_000, 1);
        let var1 = crate::stats::moments::variance(&data[1]);
        assert!((var1 - 5.0).abs() < 0.15, "{var1}");
    }
}
