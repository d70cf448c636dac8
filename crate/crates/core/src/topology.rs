//! Qubit connectivity graphs and two-qubit gate scheduling by edge coloring.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const HEAVY_HEX_27: &str = include_str!("../data/heavy_hex_27.txt");

/// An undirected graph over node indices `0..node_bound`. Removed nodes
/// keep their index slot so that configurations can name physical qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    node_bound: usize,
    active: Vec<bool>,
    edges: BTreeSet<(usize, usize)>,
    coordinates: Option<Vec<(f64, f64)>>,
}

pub type Edge = (usize, usize);

#[inline]
fn ordered(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Topology {
    pub fn new(node_count: usize, edges: &[Edge]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= node_count {
                return Err(Error::UnknownNode(a));
            }
            if b >= node_count {
                return Err(Error::UnknownNode(b));
            }
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop on node {a}")));
            }
            if !set.insert(ordered(a, b)) {
                return Err(Error::InvalidParameter(format!("duplicate edge {a}-{b}")));
            }
        }
        Ok(Self {
            node_bound: node_count,
            active: vec![true; node_count],
            edges: set,
            coordinates: None,
        })
    }

    /// Builds a graph whose active nodes are exactly `nodes`, indices kept.
    pub fn with_nodes(nodes: &[usize], edges: &[Edge]) -> Result<Self> {
        let bound = nodes.iter().copied().max().map_or(0, |m| m + 1);
        let mut top = Self::new(bound, &[])?;
        top.active = vec![false; bound];
        for &n in nodes {
            top.active[n] = true;
        }
        for &(a, b) in edges {
            if !top.contains(a) {
                return Err(Error::UnknownNode(a));
            }
            if !top.contains(b) {
                return Err(Error::UnknownNode(b));
            }
            if a == b || !top.edges.insert(ordered(a, b)) {
                return Err(Error::InvalidParameter(format!("bad edge {a}-{b}")));
            }
        }
        Ok(top)
    }

    pub fn chain(n: usize) -> Self {
        let edges: Vec<Edge> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges).expect("chain edges are valid")
    }

    pub fn with_coordinates(mut self, coords: Vec<(f64, f64)>) -> Result<Self> {
        if coords.len() != self.node_bound {
            return Err(Error::LengthMismatch {
                expected: self.node_bound,
                found: coords.len(),
            });
        }
        self.coordinates = Some(coords);
        Ok(self)
    }

    pub fn coordinates(&self) -> Option<&[(f64, f64)]> {
        self.coordinates.as_deref()
    }

    /// One past the largest node index ever present.
    pub fn node_bound(&self) -> usize {
        self.node_bound
    }

    pub fn node_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn nodes(&self) -> Vec<usize> {
        (0..self.node_bound).filter(|&n| self.active[n]).collect()
    }

    pub fn contains(&self, node: usize) -> bool {
        node < self.node_bound && self.active[node]
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.edges.iter().copied().collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&ordered(a, b))
    }

    /// Neighbors in ascending order.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == node {
                    Some(b)
                } else if b == node {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == node || b == node).count()
    }

    pub fn max_degree(&self) -> usize {
        self.nodes().iter().map(|&n| self.degree(n)).max().unwrap_or(0)
    }

    /// Removes a node and its incident edges. Other indices are unchanged.
    pub fn exclude_node(&self, node: usize) -> Result<Self> {
        if !self.contains(node) {
            return Err(Error::UnknownNode(node));
        }
        let mut out = self.clone();
        out.active[node] = false;
        out.edges.retain(|&(a, b)| a != node && b != node);
        Ok(out)
    }

    pub fn is_connected(&self) -> bool {
        let nodes = self.nodes();
        let Some(&start) = nodes.first() else {
            return true;
        };
        self.bfs_order(start).len() == nodes.len()
    }

    /// Nodes reachable from `start`, in breadth-first order with neighbors
    /// visited in ascending index order.
    pub fn bfs_order(&self, start: usize) -> Vec<usize> {
        if !self.contains(start) {
            return Vec::new();
        }
        let mut seen = vec![false; self.node_bound];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for m in self.neighbors(n) {
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        order
    }

    /// Two-coloring of the nodes if the graph is bipartite.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let mut side = vec![u8::MAX; self.node_bound];
        for start in self.nodes() {
            if side[start] != u8::MAX {
                continue;
            }
            side[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(n) = queue.pop_front() {
                for m in self.neighbors(n) {
                    if side[m] == u8::MAX {
                        side[m] = 1 - side[n];
                        queue.push_back(m);
                    } else if side[m] == side[n] {
                        return None;
                    }
                }
            }
        }
        Some(side)
    }

    /// Subgraph induced by `nodes`; indices are preserved.
    pub fn induced(&self, nodes: &[usize]) -> Result<Self> {
        for &n in nodes {
            if !self.contains(n) {
                return Err(Error::UnknownNode(n));
            }
        }
        let keep: BTreeSet<usize> = nodes.iter().copied().collect();
        let mut out = self.clone();
        for n in 0..self.node_bound {
            if !keep.contains(&n) {
                out.active[n] = false;
            }
        }
        out.edges.retain(|(a, b)| keep.contains(a) && keep.contains(b));
        Ok(out)
    }

    /// Renumbers active nodes densely in ascending order. Returns the new
    /// graph and `map[new] = old`.
    pub fn compact(&self) -> (Self, Vec<usize>) {
        let map = self.nodes();
        let mut inverse = vec![usize::MAX; self.node_bound];
        for (new, &old) in map.iter().enumerate() {
            inverse[old] = new;
        }
        let edges: Vec<Edge> = self.edges.iter().map(|&(a, b)| (inverse[a], inverse[b])).collect();
        let mut out = Self::new(map.len(), &edges).expect("relabeled edges are valid");
        if let Some(coords) = &self.coordinates {
            out.coordinates = Some(map.iter().map(|&o| coords[o]).collect());
        }
        (out, map)
    }
}

/// The 27-qubit heavy-hex coupling map shipped in `data/heavy_hex_27.txt`.
pub fn heavy_hex_27() -> Topology {
    let edges: Vec<Edge> = HEAVY_HEX_27
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace().map(|t| t.parse::<usize>().expect("node index"));
            (it.next().expect("first node"), it.next().expect("second node"))
        })
        .collect();
    Topology::new(27, &edges).expect("bundled heavy-hex map is valid")
}

/// A partition of the edges into matchings. Gates on edges of one class
/// can run simultaneously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    pub classes: Vec<Vec<Edge>>,
}

impl EdgeColoring {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Checks that the classes are matchings that exactly cover the edges.
    pub fn validate(&self, top: &Topology) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (k, class) in self.classes.iter().enumerate() {
            let mut used = BTreeSet::new();
            for &(a, b) in class {
                let e = ordered(a, b);
                if !top.has_edge(e.0, e.1) {
                    return Err(Error::InvalidColoring(format!("edge {a}-{b} not in topology")));
                }
                if !seen.insert(e) {
                    return Err(Error::InvalidColoring(format!("edge {a}-{b} colored twice")));
                }
                if !used.insert(a) || !used.insert(b) {
                    return Err(Error::InvalidColoring(format!("class {k} is not a matching")));
                }
            }
        }
        if seen.len() != top.edge_count() {
            return Err(Error::InvalidColoring(format!(
                "{} of {} edges colored",
                seen.len(),
                top.edge_count()
            )));
        }
        Ok(())
    }
}

/// Greedy coloring over lexicographically sorted edges, each edge taking
/// the lowest class free at both endpoints. On bipartite graphs where
/// greedy overshoots the maximum degree, the coloring is redone with
/// alternating-path recoloring, which always reaches the maximum degree.
pub fn color_edges(top: &Topology) -> EdgeColoring {
    let edges = top.edges();
    let delta = top.max_degree();
    let greedy = greedy_colors(top, &edges);
    let count = greedy.iter().map(|&k| k + 1).max().unwrap_or(0);
    let colors = if count > delta && top.bipartition().is_some() {
        bipartite_colors(top, &edges, delta)
    } else {
        greedy
    };
    let count = colors.iter().map(|&k| k + 1).max().unwrap_or(0);
    let mut classes = vec![Vec::new(); count];
    for (e, k) in edges.iter().zip(colors) {
        classes[k].push(*e);
    }
    EdgeColoring { classes }
}

fn greedy_colors(top: &Topology, edges: &[Edge]) -> Vec<usize> {
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); top.node_bound()];
    edges
        .iter()
        .map(|&(a, b)| {
            let k = (0..)
                .find(|k| !used[a].contains(k) && !used[b].contains(k))
                .expect("unbounded search");
            used[a].push(k);
            used[b].push(k);
            k
        })
        .collect()
}

fn bipartite_colors(top: &Topology, edges: &[Edge], delta: usize) -> Vec<usize> {
    let n = top.node_bound();
    // at[node][color] = neighbor joined by an edge of that color
    let mut at: Vec<Vec<Option<usize>>> = vec![vec![None; delta]; n];
    for &(u, v) in edges {
        let free = |x: usize, at: &Vec<Vec<Option<usize>>>| (0..delta).find(|&k| at[x][k].is_none());
        let a = free(u, &at).expect("degree bound");
        let b = free(v, &at).expect("degree bound");
        if at[v][a].is_some() {
            // Swap colors a and b along the alternating path starting at v.
            // In a bipartite graph that path cannot reach u.
            let mut path = Vec::new();
            let mut x = v;
            let mut k = a;
            while let Some(y) = at[x][k] {
                path.push((x, y, k));
                x = y;
                k = if k == a { b } else { a };
            }
            for &(x, y, k) in &path {
                at[x][k] = None;
                at[y][k] = None;
            }
            for &(x, y, k) in &path {
                let swapped = if k == a { b } else { a };
                at[x][swapped] = Some(y);
                at[y][swapped] = Some(x);
            }
        }
        at[u][a] = Some(v);
        at[v][a] = Some(u);
    }
    edges
        .iter()
        .map(|&(u, v)| (0..delta).find(|&k| at[u][k] == Some(v)).expect("edge colored"))
        .collect()
}

/// A simple path with `length` nodes, found by depth-first search from
/// the lowest-index start node with neighbors tried in ascending order.
pub fn longest_chain(top: &Topology, length: usize) -> Result<Vec<usize>> {
    if length == 0 || length > top.node_count() {
        return Err(Error::NoSuchPath(length));
    }
    let mut on_path = vec![false; top.node_bound()];
    let mut path = Vec::with_capacity(length);
    let adjacency: Vec<Vec<usize>> = (0..top.node_bound()).map(|n| top.neighbors(n)).collect();
    for start in top.nodes() {
        path.push(start);
        on_path[start] = true;
        if extend(&adjacency, &mut path, &mut on_path, length) {
            return Ok(path);
        }
        path.pop();
        on_path[start] = false;
    }
    Err(Error::NoSuchPath(length))
}

fn extend(adj: &[Vec<usize>], path: &mut Vec<usize>, on_path: &mut [bool], length: usize) -> bool {
    if path.len() == length {
        return true;
    }
    let last = *path.last().expect("path is nonempty");
    for &m in &adj[last] {
        if on_path[m] {
            continue;
        }
        path.push(m);
        on_path[m] = true;
        if extend(adj, path, on_path, length) {
            return true;
        }
        path.pop();
        on_path[m] = false;
    }
    false
}

/// Checks that consecutive entries of `chain` are distinct adjacent nodes.
pub fn validate_path(top: &Topology, chain: &[usize]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &n in chain {
        if !top.contains(n) {
            return Err(Error::UnknownNode(n));
        }
        if !seen.insert(n) {
            return Err(Error::NotAPath(format!("node {n} repeated")));
        }
    }
    for w in chain.windows(2) {
        if !top.has_edge(w[0], w[1]) {
            return Err(Error::NotAPath(format!("{}-{} is not an edge", w[0], w[1])));
        }
    }
    Ok(())
}
