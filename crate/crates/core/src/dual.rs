//! Generalized dual tree: bounded faces, cut vertices and degree-one vertices.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::embed::OuterEmbedding;
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    Face(usize),
    Vertex(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualNode {
    pub kind: NodeKind,
    /// s(v'): the face's vertices, or the single vertex.
    pub s: Vec<usize>,
}

impl DualNode {
    pub fn is_face(&self) -> bool {
        matches!(self.kind, NodeKind::Face(_))
    }
}

/// Rooted generalized dual tree. Node ids: faces first (node id = face id),
/// then vertex nodes in increasing vertex order.
#[derive(Debug, Clone, Serialize)]
pub struct DualTree {
    pub nodes: Vec<DualNode>,
    pub adj: Vec<Vec<usize>>,
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// Preorder from the root.
    pub order: Vec<usize>,
}

pub fn build_dual_tree(g: &Graph, emb: &OuterEmbedding) -> DualTree {
    let mut nodes: Vec<DualNode> = emb
        .faces
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut s = f.vertices.clone();
            s.sort_unstable();
            DualNode { kind: NodeKind::Face(i), s }
        })
        .collect();
    let mut vertex_node = vec![usize::MAX; g.n()];
    for v in 0..g.n() {
        if emb.is_cut_vertex(v) || g.degree(v) == 1 || g.n() == 1 {
            vertex_node[v] = nodes.len();
            nodes.push(DualNode { kind: NodeKind::Vertex(v), s: vec![v] });
        }
    }
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut link = |a: usize, b: usize| {
        edges.insert((a.min(b), a.max(b)));
    };
    for block in &emb.blocks {
        if block.cycle.len() == 2 {
            let (a, b) = (block.cycle[0], block.cycle[1]);
            link(vertex_node[a], vertex_node[b]);
            continue;
        }
        for &(a, b) in &block.inner_edges {
            let both: Vec<usize> =
                block.faces.iter().copied().filter(|&f| emb.faces[f].contains(a) && emb.faces[f].contains(b)).collect();
            debug_assert_eq!(both.len(), 2);
            link(both[0], both[1]);
        }
        for &v in &block.cycle {
            if emb.is_cut_vertex(v) {
                let f = block.faces.iter().copied().find(|&f| emb.faces[f].contains(v)).expect("cycle vertex on a face");
                link(vertex_node[v], f);
            }
        }
    }
    let k = nodes.len();
    let mut adj = vec![Vec::new(); k];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let root = (0..k).find(|&v| adj[v].len() <= 1).unwrap_or(0);
    let mut parent = vec![None; k];
    let mut children = vec![Vec::new(); k];
    let mut order = Vec::with_capacity(k);
    let mut seen = vec![false; k];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in adj[v].iter().rev() {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(v);
                children[v].push(w);
                stack.push(w);
            }
        }
    }
    for c in children.iter_mut() {
        c.sort_unstable();
    }
    DualTree { nodes, adj, root, parent, children, order }
}

impl DualTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_tree(&self) -> bool {
        let edges: usize = self.adj.iter().map(Vec::len).sum::<usize>() / 2;
        edges + 1 == self.len() && self.order.len() == self.len()
    }

    /// s(e') of a dual edge: both vertices for a bridge, else the common vertices.
    pub fn s_of_edge(&self, a: usize, b: usize) -> Vec<usize> {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        if !na.is_face() && !nb.is_face() {
            let mut s = vec![na.s[0], nb.s[0]];
            s.sort_unstable();
            s
        } else {
            self.separator(a, b)
        }
    }

    /// s(a) ∩ s(b); empty for a bridge.
    pub fn separator(&self, a: usize, b: usize) -> Vec<usize> {
        self.nodes[a].s.iter().copied().filter(|v| self.nodes[b].s.contains(v)).collect()
    }

    /// Dual nodes on `v`'s side after removing the edge `v`-`w`.
    pub fn component(&self, v: usize, w: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut stack = vec![(v, w)];
        while let Some((x, from)) = stack.pop() {
            for &y in &self.adj[x] {
                if y != from {
                    out.push(y);
                    stack.push((y, x));
                }
            }
        }
        out
    }

    /// Vertex set of B(v', w').
    pub fn side(&self, v: usize, w: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.component(v, w).into_iter().flat_map(|u| self.nodes[u].s.iter().copied()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Nodes of the subtree rooted at `v`.
    pub fn subtree(&self, v: usize) -> Vec<usize> {
        match self.parent[v] {
            Some(p) => self.component(v, p),
            None => (0..self.len()).collect(),
        }
    }
}

/// Vertex sets of B(v', w'), B(w', v') and B⁻(v', w') for a dual edge.
pub fn split(t: &DualTree, v: usize, w: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let bv = t.side(v, w);
    let bw = t.side(w, v);
    let minus: Vec<usize> = bv.iter().copied().filter(|x| bw.binary_search(x).is_err()).collect();
    (bv, bw, minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::outerplanar_embed;

    fn tree_of(n: usize, e: &[(usize, usize)]) -> (Graph, DualTree) {
        let g = Graph::from_edges(n, e).unwrap();
        let emb = outerplanar_embed(&g).unwrap();
        let t = build_dual_tree(&g, &emb);
        (g, t)
    }

    #[test]
    fn diamond_two_faces() {
        let (_, t) = tree_of(4, &[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.adj[0], vec![1]);
        assert_eq!(t.s_of_edge(0, 1), vec![0, 1]);
        let (a, b, m) = split(&t, 0, 1);
        assert_eq!(a, vec![0, 1, 2]);
        assert_eq!(b, vec![0, 1, 3]);
        assert_eq!(m, vec![2]);
    }

    #[test]
    fn path_reproduces_graph() {
        let (_, t) = tree_of(3, &[(0, 1), (1, 2)]);
        assert_eq!(t.len(), 3);
        assert!(t.nodes.iter().all(|n| !n.is_face()));
        assert_eq!(t.s_of_edge(0, 1), vec![0, 1]);
        assert_eq!(t.s_of_edge(1, 2), vec![1, 2]);
        assert_eq!(t.root, 0);
        let (a, b, _) = split(&t, 0, 1);
        assert_eq!(a, vec![0]);
        assert_eq!(b, vec![1, 2]);
    }

    #[test]
    fn triangle_with_pendant() {
        let (_, t) = tree_of(4, &[(0, 1), (1, 2), (0, 2), (0, 3)]);
        // nodes: face 0, vertex 0, vertex 3
        assert_eq!(t.len(), 3);
        assert_eq!(t.nodes[1].kind, NodeKind::Vertex(0));
        assert_eq!(t.nodes[2].kind, NodeKind::Vertex(3));
        assert_eq!(t.adj[0], vec![1]);
        assert_eq!(t.adj[1], vec![0, 2]);
        let (a, b, _) = split(&t, 0, 1);
        assert_eq!(a, vec![0, 1, 2]);
        assert_eq!(b, vec![0, 3]);
        assert!(t.is_tree());
    }

    #[test]
    fn random_outerplanar_dual_is_tree() {
        use crate::gen::{gen_instance, Family};
        for seed in 0..300 {
            let g = gen_instance(Family::Outerplanar, 3 + (seed as usize % 10), seed);
            let emb = outerplanar_embed(&g).unwrap();
            let t = build_dual_tree(&g, &emb);
            assert!(t.is_tree(), "seed {seed}");
            // every vertex appears in some node, nodes containing it are connected
            for v in 0..g.n() {
                let holders: Vec<usize> = (0..t.len()).filter(|&u| t.nodes[u].s.contains(&v)).collect();
                assert!(!holders.is_empty());
                let top = holders.iter().filter(|&&u| t.parent[u].is_none_or(|p| !t.nodes[p].s.contains(&v))).count();
                assert_eq!(top, 1, "seed {seed} vertex {v}");
            }
            // separator property on every edge
            for u in 0..t.len() {
                if let Some(p) = t.parent[u] {
                    let (a, b, _) = split(&t, u, p);
                    let sep = t.separator(u, p);
                    for x in &a {
                        for y in &b {
                            if g.has_edge(*x, *y) && !sep.contains(x) && !sep.contains(y) {
                                let s = t.s_of_edge(u, p);
                                assert!(s.contains(x) && s.contains(y), "seed {seed}: edge {x}-{y} crosses");
                            }
                        }
                    }
                }
            }
        }
    }
}
