//! Outerplanarity recognition and the outerplanar embedding.
//!
//! Each biconnected component with at least three vertices has a unique
//! Hamiltonian outer cycle. It is recovered by repeatedly removing a
//! degree-2 vertex (adding the edge between its neighbours) and reinserting
//! the vertices in reverse order. The result is then certified: consecutive
//! cycle vertices must be adjacent and the remaining edges must be pairwise
//! non-crossing chords.

use std::collections::BTreeSet;

use crate::error::{MdimError, Result};
use crate::graph::{biconnectivity, Graph};

/// A biconnected component with its outer cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Outer cycle, starting at the smallest vertex. Blocks with one or two
    /// vertices list them in increasing order.
    pub cycle: Vec<usize>,
    pub inner_edges: Vec<(usize, usize)>,
    /// Global ids of the bounded faces of this block.
    pub faces: Vec<usize>,
}

/// A bounded face; vertices follow the orientation of the block's cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub block: usize,
    pub vertices: Vec<usize>,
}

impl Face {
    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }

    /// Edges of the face boundary, as consecutive vertex pairs.
    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.vertices.len();
        (0..k).map(move |i| (self.vertices[i], self.vertices[(i + 1) % k]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OuterEmbedding {
    pub blocks: Vec<Block>,
    pub faces: Vec<Face>,
    pub cut_vertices: Vec<usize>,
    blocks_of: Vec<Vec<usize>>,
    walk: Vec<usize>,
    occurrences: Vec<Vec<usize>>,
}

impl OuterEmbedding {
    /// The closed walk along the outer face, as a cyclic vertex sequence.
    pub fn outer_walk(&self) -> &[usize] {
        &self.walk
    }

    /// Positions of `v` on the outer walk, ascending.
    pub fn occurrences(&self, v: usize) -> &[usize] {
        &self.occurrences[v]
    }

    pub fn blocks_of(&self, v: usize) -> &[usize] {
        &self.blocks_of[v]
    }

    pub fn is_cut_vertex(&self, v: usize) -> bool {
        self.cut_vertices.binary_search(&v).is_ok()
    }

    /// Faces whose boundary contains `v`.
    pub fn faces_at(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.blocks_of[v]
            .iter()
            .flat_map(move |&b| self.blocks[b].faces.iter().copied())
            .filter(move |&f| self.faces[f].contains(v))
    }

    /// Position of `v` on the cycle of block `b`.
    pub fn cycle_position(&self, b: usize, v: usize) -> Option<usize> {
        self.blocks[b].cycle.iter().position(|&x| x == v)
    }
}

/// Computes the outerplanar embedding, or reports why none exists.
pub fn outerplanar_embed(g: &Graph) -> Result<OuterEmbedding> {
    if g.n() == 0 {
        return Err(MdimError::TooSmall { min: 1, got: 0 });
    }
    let bic = biconnectivity(g)?;
    let n = g.n();
    let mut blocks = Vec::with_capacity(bic.components.len());
    let mut faces = Vec::new();
    let mut blocks_of = vec![Vec::new(); n];
    for (bi, comp) in bic.components.iter().enumerate() {
        for &v in &comp.vertices {
            blocks_of[v].push(bi);
        }
        if comp.vertices.len() <= 2 {
            blocks.push(Block { cycle: comp.vertices.clone(), inner_edges: vec![], faces: vec![] });
            continue;
        }
        let cycle = outer_cycle(&comp.vertices, &comp.edges)?;
        let pos = positions(n, &cycle);
        let mut inner: Vec<(usize, usize)> = comp
            .edges
            .iter()
            .copied()
            .filter(|&(a, b)| {
                let (pa, pb) = (pos[a], pos[b]);
                let d = pa.abs_diff(pb);
                d != 1 && d != cycle.len() - 1
            })
            .collect();
        inner.sort_unstable();
        check_chords(&cycle, &pos, &inner)?;
        let mut polys = Vec::new();
        split_faces(cycle.clone(), &pos, &inner, &mut polys);
        polys.sort_by_key(|p| {
            let mut s = p.clone();
            s.sort_unstable();
            s
        });
        let mut ids = Vec::with_capacity(polys.len());
        for p in polys {
            ids.push(faces.len());
            faces.push(Face { block: bi, vertices: p });
        }
        blocks.push(Block { cycle, inner_edges: inner, faces: ids });
    }
    let walk = build_walk(n, &blocks, &blocks_of);
    let mut occurrences = vec![Vec::new(); n];
    for (i, &v) in walk.iter().enumerate() {
        occurrences[v].push(i);
    }
    Ok(OuterEmbedding { blocks, faces, cut_vertices: bic.cut_vertices, blocks_of, walk, occurrences })
}

pub fn is_outerplanar(g: &Graph) -> bool {
    outerplanar_embed(g).is_ok()
}

fn positions(n: usize, cycle: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in cycle.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

/// Outer Hamiltonian cycle of a biconnected component with >= 3 vertices.
fn outer_cycle(vertices: &[usize], edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    let k = vertices.len();
    if edges.len() > 2 * k - 3 {
        return Err(MdimError::NotOuterplanar(format!(
            "block {vertices:?} has {} edges, more than 2n-3 = {}",
            edges.len(),
            2 * k - 3
        )));
    }
    let idx = |v: usize| vertices.binary_search(&v).unwrap();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for &(a, b) in edges {
        adj[idx(a)].insert(idx(b));
        adj[idx(b)].insert(idx(a));
    }
    let mut alive = vec![true; k];
    let mut removed = Vec::with_capacity(k);
    let mut deg2: BTreeSet<usize> = (0..k).filter(|&v| adj[v].len() == 2).collect();
    let mut remaining = k;
    while remaining > 3 {
        let v = match deg2.pop_first() {
            Some(v) => v,
            None => {
                return Err(MdimError::NotOuterplanar(format!(
                    "reduction of block {vertices:?} stalled with {remaining} vertices and no degree-2 vertex"
                )))
            }
        };
        let (a, b) = {
            let mut it = adj[v].iter();
            (*it.next().unwrap(), *it.next().unwrap())
        };
        alive[v] = false;
        remaining -= 1;
        adj[a].remove(&v);
        adj[b].remove(&v);
        adj[v].clear();
        adj[a].insert(b);
        adj[b].insert(a);
        removed.push((v, a, b));
        for w in [a, b] {
            if adj[w].len() == 2 {
                deg2.insert(w);
            } else {
                deg2.remove(&w);
            }
        }
    }
    let rest: Vec<usize> = (0..k).filter(|&v| alive[v]).collect();
    if rest.iter().any(|&v| adj[v].len() != 2) {
        return Err(MdimError::NotOuterplanar(format!("reduction of block {vertices:?} did not end in a triangle")));
    }
    // circular doubly linked list over local ids
    let mut next = vec![usize::MAX; k];
    let mut prev = vec![usize::MAX; k];
    for i in 0..3 {
        next[rest[i]] = rest[(i + 1) % 3];
        prev[rest[(i + 1) % 3]] = rest[i];
    }
    for &(v, a, b) in removed.iter().rev() {
        let (x, y) = if next[a] == b {
            (a, b)
        } else if next[b] == a {
            (b, a)
        } else {
            return Err(MdimError::NotOuterplanar(format!(
                "cannot reinsert vertex {}: neighbours {} and {} are not consecutive",
                vertices[v], vertices[a], vertices[b]
            )));
        };
        next[x] = v;
        prev[v] = x;
        next[v] = y;
        prev[y] = v;
    }
    let mut cycle = Vec::with_capacity(k);
    let mut cur = 0;
    for _ in 0..k {
        cycle.push(vertices[cur]);
        cur = next[cur];
    }
    if cur != 0 {
        return Err(MdimError::InternalInconsistency("outer cycle reconstruction lost vertices".into()));
    }
    // every consecutive pair must be a real edge
    let real: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    for i in 0..k {
        let (a, b) = (cycle[i], cycle[(i + 1) % k]);
        if !real.contains(&(a.min(b), a.max(b))) {
            return Err(MdimError::NotOuterplanar(format!("no Hamiltonian outer cycle: {a}-{b} is not an edge")));
        }
    }
    // orientation: the smaller neighbour of the first vertex comes second
    if cycle[k - 1] < cycle[1] {
        cycle[1..].reverse();
    }
    Ok(cycle)
}

fn check_chords(cycle: &[usize], pos: &[usize], chords: &[(usize, usize)]) -> Result<()> {
    let span = |(a, b): (usize, usize)| {
        let (p, q) = (pos[a], pos[b]);
        (p.min(q), p.max(q))
    };
    for (i, &c1) in chords.iter().enumerate() {
        let (a1, b1) = span(c1);
        for &c2 in &chords[i + 1..] {
            let (a2, b2) = span(c2);
            if (a1 < a2 && a2 < b1 && b1 < b2) || (a2 < a1 && a1 < b2 && b2 < b1) {
                return Err(MdimError::NotOuterplanar(format!(
                    "chords {:?} and {:?} cross with respect to outer cycle {cycle:?}",
                    c1, c2
                )));
            }
        }
    }
    Ok(())
}

fn split_faces(poly: Vec<usize>, pos: &[usize], chords: &[(usize, usize)], out: &mut Vec<Vec<usize>>) {
    let k = poly.len();
    let local = |v: usize| poly.iter().position(|&x| x == v);
    for &(a, b) in chords {
        if let (Some(i), Some(j)) = (local(a), local(b)) {
            let (i, j) = (i.min(j), i.max(j));
            if j - i == 1 || (i == 0 && j == k - 1) {
                continue;
            }
            let first: Vec<usize> = poly[i..=j].to_vec();
            let mut second: Vec<usize> = poly[j..].to_vec();
            second.extend_from_slice(&poly[..=i]);
            second.sort_by_key(|&v| pos[v]);
            split_faces(first, pos, chords, out);
            split_faces(second, pos, chords, out);
            return;
        }
    }
    out.push(poly);
}

/// Outer walk: each block's cycle in its own orientation, with blocks hanging
/// at a cut vertex toured in place when the walk reaches that vertex.
fn build_walk(n: usize, blocks: &[Block], blocks_of: &[Vec<usize>]) -> Vec<usize> {
    let mut walk = vec![0];
    if n == 1 {
        return walk;
    }
    let mut visited = vec![false; blocks.len()];
    // frames: (block cycle rotated to start at entry, next index, pending hang at current vertex)
    enum Frame {
        Hang { v: usize, next_block: usize },
        Tour { cyc: Vec<usize>, i: usize },
    }
    let mut stack = vec![Frame::Hang { v: 0, next_block: 0 }];
    while let Some(frame) = stack.last_mut() {
        match frame {
            Frame::Hang { v, next_block } => {
                let v = *v;
                let list = &blocks_of[v];
                let mut chosen = None;
                while *next_block < list.len() {
                    let b = list[*next_block];
                    *next_block += 1;
                    if !visited[b] {
                        chosen = Some(b);
                        break;
                    }
                }
                match chosen {
                    Some(b) => {
                        visited[b] = true;
                        let cyc = &blocks[b].cycle;
                        let s = cyc.iter().position(|&x| x == v).unwrap();
                        let rot: Vec<usize> = cyc[s..].iter().chain(&cyc[..s]).copied().collect();
                        stack.push(Frame::Tour { cyc: rot, i: 1 });
                    }
                    None => {
                        stack.pop();
                    }
                }
            }
            Frame::Tour { cyc, i } => {
                if *i < cyc.len() {
                    let c = cyc[*i];
                    *i += 1;
                    walk.push(c);
                    stack.push(Frame::Hang { v: c, next_block: 0 });
                } else {
                    walk.push(cyc[0]);
                    stack.pop();
                }
            }
        }
    }
    walk.pop();
    walk
}
