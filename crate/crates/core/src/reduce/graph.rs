//! Colored graphs and an exhaustive multicolored-clique search.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Largest product of class sizes `brute_force_clique` will enumerate.
pub const MAX_CLIQUE_SEARCH: u128 = 10_000_000;

/// A graph whose nodes are split into color classes; edges join nodes of
/// different colors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct ColoredGraph {
    colors: Vec<Vec<usize>>,
    edges: BTreeSet<(usize, usize)>,
    /// node -> (color, position within its class)
    slot: HashMap<usize, (usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    colors: Vec<Vec<usize>>,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for ColoredGraph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        ColoredGraph::new(j.colors, j.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

impl From<ColoredGraph> for GraphJson {
    fn from(g: ColoredGraph) -> Self {
        GraphJson { colors: g.colors, edges: g.edges.into_iter().map(|(u, v)| [u, v]).collect() }
    }
}

impl ColoredGraph {
    /// Duplicate edges are merged; loops, unknown endpoints and
    /// same-color edges are rejected.
    pub fn new(colors: Vec<Vec<usize>>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut slot = HashMap::new();
        for (c, class) in colors.iter().enumerate() {
            for (i, &v) in class.iter().enumerate() {
                if slot.insert(v, (c, i)).is_some() {
                    return input(format!("node {v} appears twice"));
                }
            }
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            let (Some(cu), Some(cv)) = (slot.get(&u), slot.get(&v)) else {
                return input(format!("edge ({u}, {v}) has an unknown endpoint"));
            };
            if cu.0 == cv.0 {
                return input(format!("edge ({u}, {v}) joins two nodes of color {}", cu.0));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(ColoredGraph { colors, edges: set, slot })
    }

    /// One node per color, all pairs adjacent.
    pub fn triangle() -> Self {
        Self::new(vec![vec![0], vec![1], vec![2]], [(0, 1), (0, 2), (1, 2)]).expect("valid fixture")
    }

    pub fn triangle_minus_edge() -> Self {
        Self::new(vec![vec![0], vec![1], vec![2]], [(0, 1), (1, 2)]).expect("valid fixture")
    }

    /// Class sizes uniform in `1..=max_class`; each cross-color pair is an
    /// edge with probability `density`.
    pub fn random<R: Rng>(rng: &mut R, k: usize, max_class: usize, density: f64) -> Self {
        let mut next = 0;
        let colors: Vec<Vec<usize>> = (0..k)
            .map(|_| {
                let size = rng.random_range(1..=max_class.max(1));
                let class = (next..next + size).collect();
                next += size;
                class
            })
            .collect();
        let mut edges = Vec::new();
        for r in 0..k {
            for l in r + 1..k {
                for &u in &colors[r] {
                    for &v in &colors[l] {
                        if rng.random_bool(density) {
                            edges.push((u, v));
                        }
                    }
                }
            }
        }
        Self::new(colors, edges).expect("generated graph is valid")
    }

    pub fn k(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[Vec<usize>] {
        &self.colors
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.colors.iter().map(Vec::len).collect()
    }

    pub fn num_nodes(&self) -> usize {
        self.slot.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// `(color, position)` of a node.
    pub fn slot(&self, v: usize) -> Option<(usize, usize)> {
        self.slot.get(&v).copied()
    }

    /// Edges between colors `r < l` as position pairs `(i, j)`, sorted.
    pub fn edges_between(&self, r: usize, l: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|&(u, v)| {
                let (a, b) = (self.slot[&u], self.slot[&v]);
                let (a, b) = if a.0 < b.0 { (a, b) } else { (b, a) };
                (a.0 == r && b.0 == l).then_some((a.1, b.1))
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn is_clique(&self, nodes: &[usize]) -> bool {
        nodes.len() == self.k()
            && nodes.iter().enumerate().all(|(c, v)| self.slot(*v).is_some_and(|s| s.0 == c))
            && nodes.iter().enumerate().all(|(i, &u)| nodes[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }
}

/// A multicolored clique (node ids in color order) by exhaustive search, or
/// `None` if there is none.
pub fn brute_force_clique(g: &ColoredGraph) -> Result<Option<Vec<usize>>> {
    let space: u128 = g.colors.iter().map(|c| c.len() as u128).product();
    if space > MAX_CLIQUE_SEARCH {
        return Err(Error::Resource(format!("clique search space {space} exceeds {MAX_CLIQUE_SEARCH}")));
    }
    fn extend(g: &ColoredGraph, chosen: &mut Vec<usize>) -> bool {
        let c = chosen.len();
        if c == g.k() {
            return true;
        }
        for &v in &g.colors[c] {
            if chosen.iter().all(|&u| g.has_edge(u, v)) {
                chosen.push(v);
                if extend(g, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::with_capacity(g.k());
    Ok(extend(g, &mut chosen).then_some(chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixtures() {
        assert_eq!(brute_force_clique(&ColoredGraph::triangle()).unwrap(), Some(vec![0, 1, 2]));
        assert_eq!(brute_force_clique(&ColoredGraph::triangle_minus_edge()).unwrap(), None);
    }

    #[test]
    fn validation() {
        assert!(ColoredGraph::new(vec![vec![0, 1]], [(0, 1)]).is_err());
        assert!(ColoredGraph::new(vec![vec![0], vec![0]], []).is_err());
        assert!(ColoredGraph::new(vec![vec![0], vec![1]], [(0, 7)]).is_err());
        let g = ColoredGraph::new(vec![vec![0], vec![1]], [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn json_round_trip() {
        let g = ColoredGraph::triangle_minus_edge();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"colors":[[0],[1],[2]],"edges":[[0,1],[1,2]]}"#);
        assert_eq!(serde_json::from_str::<ColoredGraph>(&s).unwrap(), g);
        assert!(serde_json::from_str::<ColoredGraph>(r#"{"colors":[[0,1]],"edges":[[0,1]]}"#).is_err());
    }

    #[test]
    fn search_guard() {
        let g = ColoredGraph::new((0..8).map(|c| (c * 10..c * 10 + 10).collect()).collect(), []).unwrap();
        assert!(matches!(brute_force_clique(&g), Err(Error::Resource(_))));
    }

    #[test]
    fn found_cliques_are_cliques() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let g = ColoredGraph::random(&mut rng, 4, 4, 0.6);
            if let Some(c) = brute_force_clique(&g).unwrap() {
                assert!(g.is_clique(&c));
            }
        }
    }
}
