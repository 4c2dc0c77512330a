use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directed graph over named variables; cycles are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct CausalGraph {
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
    acyclic: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
    /// Derived; ignored on input.
    #[serde(default)]
    acyclic: Option<bool>,
}

impl TryFrom<GraphJson> for CausalGraph {
    type Error = Error;

    fn try_from(g: GraphJson) -> Result<Self> {
        let edges: Vec<(&str, &str)> = g.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let nodes: Vec<&str> = g.nodes.iter().map(String::as_str).collect();
        CausalGraph::new(&nodes, &edges)
    }
}

impl From<CausalGraph> for GraphJson {
    fn from(g: CausalGraph) -> Self {
        GraphJson {
            edges: g.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            acyclic: Some(g.acyclic),
            nodes: g.nodes,
        }
    }
}

/// Unordered pair of node names, smaller name first.
pub fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CausalGraph {
    pub fn new(nodes: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let mut g = CausalGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            acyclic: true,
        };
        for n in nodes {
            if g.nodes.iter().any(|m| m == n) {
                return Err(Error::invalid("nodes", format!("duplicate node {n:?}")));
            }
            g.nodes.push(n.to_string());
        }
        for (a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialises")
    }

    pub fn add_edge(&mut self, from: &str, to: &str) -> Result<()> {
        let (a, b) = (self.index(from)?, self.index(to)?);
        if a == b {
            return Err(Error::invalid("edges", format!("self-loop on {from:?}")));
        }
        if self.edges.contains(&(a, b)) {
            return Err(Error::invalid("edges", format!("duplicate edge {from} -> {to}")));
        }
        self.edges.push((a, b));
        self.acyclic = self.find_acyclic();
        Ok(())
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }

    pub fn is_acyclic(&self) -> bool {
        self.acyclic
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.index(from), self.index(to)) {
            (Ok(a), Ok(b)) => self.edges.contains(&(a, b)),
            _ => false,
        }
    }

    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Undirected adjacency as sorted name pairs.
    pub fn skeleton(&self) -> BTreeSet<(String, String)> {
        self.edges().map(|(a, b)| unordered(a, b)).collect()
    }

    fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == i).map(|e| e.1)
    }

    fn parents(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == i).map(|e| e.0)
    }

    fn find_acyclic(&self) -> bool {
        // Kahn's algorithm.
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for &(_, b) in &self.edges {
            indeg[b] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for c in self.children(i).collect::<Vec<_>>() {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        seen == n
    }

    /// Number of edges on the shortest directed path from `from` to `to`.
    pub fn shortest_directed_path(&self, from: &str, to: &str) -> Result<Option<usize>> {
        let (s, t) = (self.index(from)?, self.index(to)?);
        let mut dist = vec![usize::MAX; self.nodes.len()];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            if i == t {
                return Ok(Some(dist[i]));
            }
            for c in self.children(i) {
                if dist[c] == usize::MAX {
                    dist[c] = dist[i] + 1;
                    queue.push_back(c);
                }
            }
        }
        Ok(None)
    }

    /// Shorter of the directed paths in either direction.
    pub fn directed_distance(&self, a: &str, b: &str) -> Result<Option<usize>> {
        let ab = self.shortest_directed_path(a, b)?;
        let ba = self.shortest_directed_path(b, a)?;
        Ok(match (ab, ba) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        })
    }

    /// Whether every path between `x` and `y` is blocked by `given`.
    /// Refused on cyclic graphs.
    pub fn d_separated(&self, x: &str, y: &str, given: &[&str]) -> Result<bool> {
        if !self.acyclic {
            return Err(Error::NotApplicable(
                "d-separation is only defined here for acyclic graphs".into(),
            ));
        }
        let (xi, yi) = (self.index(x)?, self.index(y)?);
        if xi == yi {
            return Err(Error::invalid("y", "x and y must differ"));
        }
        let n = self.nodes.len();
        let mut in_z = vec![false; n];
        for z in given {
            let zi = self.index(z)?;
            if zi == xi || zi == yi {
                return Err(Error::invalid("given", "conditioning set contains x or y"));
            }
            in_z[zi] = true;
        }
        // Z together with its ancestors: colliders here are open.
        let mut anc = in_z.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&i| in_z[i]).collect();
        while let Some(i) = stack.pop() {
            for p in self.parents(i) {
                if !anc[p] {
                    anc[p] = true;
                    stack.push(p);
                }
            }
        }
        // Reachability over (node, arrived-from-child) states.
        let mut visited = vec![[false; 2]; n];
        let mut stack = vec![(xi, true)];
        while let Some((i, up)) = stack.pop() {
            if visited[i][up as usize] {
                continue;
            }
            visited[i][up as usize] = true;
            if i == yi {
                return Ok(false);
            }
            if up {
                if !in_z[i] {
                    stack.extend(self.parents(i).map(|p| (p, true)));
                    stack.extend(self.children(i).map(|c| (c, false)));
                }
            } else {
                if !in_z[i] {
                    stack.extend(self.children(i).map(|c| (c, false)));
                }
                if anc[i] {
                    stack.extend(self.parents(i).map(|p| (p, true)));
                }
            }
        }
        Ok(true)
    }
}
