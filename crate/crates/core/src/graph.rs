//! Simple undirected graphs, half-unit distances and biconnectivity.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MdimError, Result};

/// Undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n], edges: Vec::new() }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n();
        for w in [u, v] {
            if w >= n {
                return Err(MdimError::InvalidVertex { vertex: w, n });
            }
        }
        if u == v {
            return Err(MdimError::SelfLoop(u));
        }
        if self.has_edge(u, v) {
            return Err(MdimError::ParallelEdge(u.min(v), u.max(v)));
        }
        let pos = self.adj[u].binary_search(&v).unwrap_err();
        self.adj[u].insert(pos, v);
        let pos = self.adj[v].binary_search(&u).unwrap_err();
        self.adj[v].insert(pos, u);
        let e = (u.min(v), u.max(v));
        let pos = self.edges.binary_search(&e).unwrap_err();
        self.edges.insert(pos, e);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Sorted neighbour list.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let d = bfs_vertex(self, 0);
        d.iter().all(|&x| x != UNREACHABLE)
    }

    pub fn is_tree(&self) -> bool {
        self.n() >= 1 && self.m() + 1 == self.n() && self.is_connected()
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(MdimError::DisconnectedInput)
        }
    }

    /// Parses the edge-list text format: `n m` header, then `u v` lines.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(MdimError::Parse { line: 0, msg: "missing header".into() })?;
        let (n, m) = parse_pair(hline, header)?;
        let mut g = Graph::empty(n);
        let mut count = 0;
        for (line, l) in lines {
            let (u, v) = parse_pair(line, l)?;
            g.add_edge(u, v).map_err(|e| MdimError::Parse { line, msg: e.to_string() })?;
            count += 1;
        }
        if count != m {
            return Err(MdimError::Parse { line: hline, msg: format!("header declares {m} edges, found {count}") });
        }
        Ok(g)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n(), self.m());
        for &(u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }
}

fn parse_pair(line: usize, l: &str) -> Result<(usize, usize)> {
    let mut it = l.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or(MdimError::Parse { line, msg: "expected two integers".into() })?;
        tok.parse().map_err(|_| MdimError::Parse { line, msg: format!("bad integer '{tok}'") })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(MdimError::Parse { line, msg: "trailing tokens".into() });
    }
    Ok((a, b))
}

pub(crate) const UNREACHABLE: u32 = u32::MAX;

fn bfs_vertex(g: &Graph, s: usize) -> Vec<u32> {
    let mut d = vec![UNREACHABLE; g.n()];
    let mut q = VecDeque::new();
    d[s] = 0;
    q.push_back(s);
    while let Some(u) = q.pop_front() {
        for &w in g.neighbors(u) {
            if d[w] == UNREACHABLE {
                d[w] = d[u] + 1;
                q.push_back(w);
            }
        }
    }
    d
}

/// A distance measured in half edges; `HalfDist::INF` marks unreachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfDist(pub u32);

impl HalfDist {
    pub const INF: HalfDist = HalfDist(u32::MAX);

    pub fn from_edges(d: u32) -> Self {
        if d == UNREACHABLE {
            HalfDist::INF
        } else {
            HalfDist(2 * d)
        }
    }

    pub fn is_finite(self) -> bool {
        self != HalfDist::INF
    }

    pub fn as_f64(self) -> f64 {
        if self.is_finite() {
            self.0 as f64 / 2.0
        } else {
            f64::INFINITY
        }
    }
}

impl fmt::Display for HalfDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_finite() {
            write!(f, "inf")
        } else if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

/// A vertex, or the midpoint of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Point {
    Vertex(usize),
    /// Endpoints stored with the smaller id first.
    Midpoint(usize, usize),
}

impl Point {
    pub fn midpoint(a: usize, b: usize) -> Self {
        Point::Midpoint(a.min(b), a.max(b))
    }

    pub fn as_vertex(self) -> Option<usize> {
        match self {
            Point::Vertex(v) => Some(v),
            Point::Midpoint(..) => None,
        }
    }

    pub fn is_valid_in(self, g: &Graph) -> bool {
        match self {
            Point::Vertex(v) => v < g.n(),
            Point::Midpoint(a, b) => g.has_edge(a, b),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Vertex(v) => write!(f, "{v}"),
            Point::Midpoint(a, b) => write!(f, "mid({a},{b})"),
        }
    }
}

/// Distances from `source` to every vertex, in half units.
pub fn bfs_distances(g: &Graph, source: Point) -> Vec<HalfDist> {
    match source {
        Point::Vertex(v) => bfs_vertex(g, v).into_iter().map(HalfDist::from_edges).collect(),
        Point::Midpoint(a, b) => {
            let da = bfs_vertex(g, a);
            let db = bfs_vertex(g, b);
            da.iter()
                .zip(&db)
                .map(|(&x, &y)| {
                    let m = x.min(y);
                    if m == UNREACHABLE {
                        HalfDist::INF
                    } else {
                        HalfDist(2 * m + 1)
                    }
                })
                .collect()
        }
    }
}

/// All-pairs vertex distances (in edges), with helpers for midpoints.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    pub fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut d = Vec::with_capacity(n * n);
        for s in 0..n {
            d.extend(bfs_vertex(g, s));
        }
        DistanceMatrix { n, d }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Vertex distance in edges; `u32::MAX` if unreachable.
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.d[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[u32] {
        &self.d[u * self.n..(u + 1) * self.n]
    }

    /// Half-unit distance from a point to a vertex.
    #[inline]
    pub fn half(&self, p: Point, x: usize) -> HalfDist {
        match p {
            Point::Vertex(v) => HalfDist::from_edges(self.get(v, x)),
            Point::Midpoint(a, b) => {
                let m = self.get(a, x).min(self.get(b, x));
                if m == UNREACHABLE {
                    HalfDist::INF
                } else {
                    HalfDist(2 * m + 1)
                }
            }
        }
    }

    /// True when `m` lies on some shortest `a`-`b` path.
    #[inline]
    pub fn on_geodesic(&self, a: usize, m: usize, b: usize) -> bool {
        let (x, y, z) = (self.get(a, m), self.get(m, b), self.get(a, b));
        z != UNREACHABLE && x != UNREACHABLE && y != UNREACHABLE && x + y == z
    }

    /// Whether `z` resolves the pair `x`, `y`.
    #[inline]
    pub fn resolves(&self, z: usize, x: usize, y: usize) -> bool {
        self.get(z, x) != self.get(z, y)
    }
}

/// Cut vertices and biconnected components (as vertex sets and edge sets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Biconnectivity {
    pub cut_vertices: Vec<usize>,
    /// Each component lists its vertices (sorted) and its edges.
    pub components: Vec<Component>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// Hopcroft-Tarjan decomposition with an explicit stack.
pub fn biconnectivity(g: &Graph) -> Result<Biconnectivity> {
    g.require_connected()?;
    let n = g.n();
    let mut comps = Vec::new();
    let mut is_cut = vec![false; n];
    if n <= 1 {
        if n == 1 {
            comps.push(Component { vertices: vec![0], edges: vec![] });
        }
        return Ok(Biconnectivity { cut_vertices: vec![], components: comps });
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();
    // (vertex, parent, next neighbour index)
    let mut stack: Vec<(usize, usize, usize)> = vec![(0, usize::MAX, 0)];
    disc[0] = 0;
    low[0] = 0;
    timer += 1;
    let mut root_children = 0;
    while let Some(top) = stack.len().checked_sub(1) {
        let (u, parent, idx) = stack[top];
        if idx < g.degree(u) {
            let w = g.neighbors(u)[idx];
            stack[top].2 += 1;
            if w == parent {
                continue;
            }
            if disc[w] == usize::MAX {
                disc[w] = timer;
                low[w] = timer;
                timer += 1;
                edge_stack.push((u, w));
                if u == 0 {
                    root_children += 1;
                }
                stack.push((w, u, 0));
            } else if disc[w] < disc[u] {
                low[u] = low[u].min(disc[w]);
                edge_stack.push((u, w));
            }
        } else {
            stack.pop();
            if parent != usize::MAX {
                low[parent] = low[parent].min(low[u]);
                if low[u] >= disc[parent] {
                    if parent != 0 {
                        is_cut[parent] = true;
                    }
                    let mut edges = Vec::new();
                    while let Some(e) = edge_stack.pop() {
                        edges.push((e.0.min(e.1), e.0.max(e.1)));
                        if e == (parent, u) {
                            break;
                        }
                    }
                    edges.sort_unstable();
                    let mut vertices: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
                    vertices.sort_unstable();
                    vertices.dedup();
                    comps.push(Component { vertices, edges });
                }
            }
        }
    }
    if root_children > 1 {
        is_cut[0] = true;
    }
    comps.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    let cut_vertices = (0..n).filter(|&v| is_cut[v]).collect();
    Ok(Biconnectivity { cut_vertices, components: comps })
}
