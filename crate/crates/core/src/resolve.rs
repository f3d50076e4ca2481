//! Resolving-set predicates, the exhaustive oracle and the greedy heuristic.

use std::collections::HashMap;

use serde::Serialize;

use crate::embed::OuterEmbedding;
use crate::error::{MdimError, Result};
use crate::graph::{DistanceMatrix, Graph, Point, UNREACHABLE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResolutionReport {
    pub resolved: bool,
    /// Lexicographically smallest unresolved pair.
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Req1Report {
    pub satisfied: bool,
    /// First vertex with more than one element in g(v, L).
    pub witness: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Req2Violation {
    pub face: usize,
    pub pair: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Req2Report {
    pub satisfied: bool,
    pub witness: Option<Req2Violation>,
}

/// Sorts and deduplicates a landmark list, rejecting out-of-range ids.
pub fn normalize_landmarks(g: &Graph, landmarks: &[usize]) -> Result<Vec<usize>> {
    let mut l = landmarks.to_vec();
    l.sort_unstable();
    l.dedup();
    if let Some(&v) = l.iter().find(|&&v| v >= g.n()) {
        return Err(MdimError::InvalidVertex { vertex: v, n: g.n() });
    }
    Ok(l)
}

pub fn is_resolving(g: &Graph, landmarks: &[usize]) -> ResolutionReport {
    is_resolving_dm(&DistanceMatrix::new(g), landmarks)
}

pub fn is_resolving_dm(dm: &DistanceMatrix, landmarks: &[usize]) -> ResolutionReport {
    let n = dm.n();
    for x in 0..n {
        for y in x + 1..n {
            if !landmarks.iter().any(|&z| dm.resolves(z, x, y)) {
                return ResolutionReport { resolved: false, witness: Some((x, y)) };
            }
        }
    }
    ResolutionReport { resolved: true, witness: None }
}

/// Fast yes/no check through distance-vector signatures.
fn resolves_all(dm: &DistanceMatrix, landmarks: &[usize], buf: &mut Vec<Vec<u32>>) -> bool {
    buf.clear();
    for x in 0..dm.n() {
        buf.push(landmarks.iter().map(|&z| dm.get(z, x)).collect());
    }
    buf.sort_unstable();
    buf.windows(2).all(|w| w[0] != w[1])
}

/// Smallest resolving set by exhaustive search, sizes ascending and subsets
/// in lexicographic order.
pub fn brute_force_mdim(g: &Graph) -> (usize, Vec<usize>) {
    let dm = DistanceMatrix::new(g);
    brute_force_mdim_dm(&dm)
}

pub fn brute_force_mdim_dm(dm: &DistanceMatrix) -> (usize, Vec<usize>) {
    let n = dm.n();
    let mut buf = Vec::with_capacity(n);
    for k in 0..=n {
        let mut comb: Vec<usize> = (0..k).collect();
        loop {
            if resolves_all(dm, &comb, &mut buf) {
                return (k, comb);
            }
            let mut i = k;
            while i > 0 && comb[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            comb[i - 1] += 1;
            for j in i..k {
                comb[j] = comb[j - 1] + 1;
            }
        }
    }
    unreachable!("the full vertex set always resolves")
}

/// Greedy landmark selection: repeatedly add the vertex leaving the fewest
/// unresolved pairs, ties to the lowest id.
pub fn greedy_mdim(g: &Graph) -> Result<Vec<usize>> {
    g.require_connected()?;
    if g.n() < 2 {
        return Err(MdimError::TooSmall { min: 2, got: g.n() });
    }
    Ok(greedy_mdim_dm(&DistanceMatrix::new(g)))
}

pub fn greedy_mdim_dm(dm: &DistanceMatrix) -> Vec<usize> {
    let n = dm.n();
    // class id per vertex under the current landmarks
    let mut class = vec![0usize; n];
    let mut chosen = Vec::new();
    let mut in_set = vec![false; n];
    let unresolved = |class: &[usize]| -> u64 {
        let mut count: HashMap<usize, u64> = HashMap::new();
        for &c in class {
            *count.entry(c).or_default() += 1;
        }
        count.values().map(|&s| s * (s - 1) / 2).sum()
    };
    let refine = |class: &[usize], z: usize| -> Vec<usize> {
        let mut ids: HashMap<(usize, u32), usize> = HashMap::new();
        (0..n)
            .map(|x| {
                let next = ids.len();
                *ids.entry((class[x], dm.get(z, x))).or_insert(next)
            })
            .collect()
    };
    while unresolved(&class) > 0 {
        let mut best: Option<(u64, usize, Vec<usize>)> = None;
        for z in 0..n {
            if in_set[z] {
                continue;
            }
            let c = refine(&class, z);
            let u = unresolved(&c);
            if best.as_ref().is_none_or(|b| u < b.0) {
                best = Some((u, z, c));
            }
        }
        let (_, z, c) = best.expect("an unresolved pair implies a candidate");
        in_set[z] = true;
        chosen.push(z);
        class = c;
    }
    chosen.sort_unstable();
    chosen
}

/// Neighbours w of v with d(z, w) = d(z, v) + 1 for every landmark z.
pub fn g_set(dm: &DistanceMatrix, g: &Graph, v: usize, landmarks: &[usize]) -> Vec<usize> {
    g.neighbors(v)
        .iter()
        .copied()
        .filter(|&w| {
            landmarks.iter().all(|&z| {
                let (dv, dw) = (dm.get(z, v), dm.get(z, w));
                dv != UNREACHABLE && dw == dv + 1
            })
        })
        .collect()
}

pub fn requirement1(g: &Graph, landmarks: &[usize]) -> Req1Report {
    requirement1_dm(&DistanceMatrix::new(g), g, landmarks)
}

pub fn requirement1_dm(dm: &DistanceMatrix, g: &Graph, landmarks: &[usize]) -> Req1Report {
    for v in 0..g.n() {
        if g_set(dm, g, v, landmarks).len() > 1 {
            return Req1Report { satisfied: false, witness: Some(v) };
        }
    }
    Req1Report { satisfied: true, witness: None }
}

/// The vertex farthest from `z` lying on shortest paths to both `x` and `y`
/// beyond which those paths share nothing.
pub fn bifurcation_point(dm: &DistanceMatrix, z: usize, x: usize, y: usize) -> Result<usize> {
    let n = dm.n();
    let mut best: Option<usize> = None;
    let mut tie = false;
    for v in 0..n {
        if !is_bifurcation_point(dm, z, x, y, v) {
            continue;
        }
        match best {
            Some(b) if dm.get(z, b) > dm.get(z, v) => {}
            Some(b) if dm.get(z, b) == dm.get(z, v) => tie = true,
            _ => {
                best = Some(v);
                tie = false;
            }
        }
    }
    match best {
        Some(v) if !tie => Ok(v),
        Some(_) => Err(MdimError::NotOuterplanar(format!("bifurcation point of ({z},{x},{y}) is not unique"))),
        None => Err(MdimError::InternalInconsistency(format!("no bifurcation point for ({z},{x},{y})"))),
    }
}

/// Whether `v` lies on shortest paths from `z` to both `x` and `y` and no
/// other vertex lies on shortest paths from `v` to both.
pub fn is_bifurcation_point(dm: &DistanceMatrix, z: usize, x: usize, y: usize, v: usize) -> bool {
    dm.on_geodesic(z, v, x)
        && dm.on_geodesic(z, v, y)
        && (0..dm.n()).all(|w| w == v || !(dm.on_geodesic(v, w, x) && dm.on_geodesic(v, w, y)))
}

/// Closest point of `cycle` (an edge or a cycle, as a vertex list) to `z`.
pub fn representative(dm: &DistanceMatrix, g: &Graph, z: usize, cycle: &[usize]) -> Result<Point> {
    let best = cycle.iter().map(|&v| dm.get(z, v)).min().unwrap_or(UNREACHABLE);
    let closest: Vec<usize> = cycle.iter().copied().filter(|&v| dm.get(z, v) == best).collect();
    match closest[..] {
        [v] => Ok(Point::Vertex(v)),
        [a, b] if best != UNREACHABLE && g.has_edge(a, b) => Ok(Point::midpoint(a, b)),
        _ => Err(MdimError::AmbiguousRepresentative { landmark: z, closest }),
    }
}

/// First and last landmarks of the two representative groups on a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FaceExtremes {
    pub reps: [Point; 2],
    pub first: [usize; 2],
    pub last: [usize; 2],
}

/// Shared state for evaluating the face condition on an outerplanar graph.
pub struct Req2Context<'a> {
    pub g: &'a Graph,
    pub dm: &'a DistanceMatrix,
    pub emb: &'a OuterEmbedding,
}

impl<'a> Req2Context<'a> {
    pub fn new(g: &'a Graph, dm: &'a DistanceMatrix, emb: &'a OuterEmbedding) -> Self {
        Req2Context { g, dm, emb }
    }

    /// Representative groups of `landmarks` on `face`, in order of first
    /// appearance.
    pub fn groups(&self, face: usize, landmarks: &[usize]) -> Result<Vec<(Point, Vec<usize>)>> {
        let verts = &self.emb.faces[face].vertices;
        let mut groups: Vec<(Point, Vec<usize>)> = Vec::new();
        for &z in landmarks {
            let r = representative(self.dm, self.g, z, verts)?;
            match groups.iter_mut().find(|(p, _)| *p == r) {
                Some((_, zs)) => zs.push(z),
                None => groups.push((r, vec![z])),
            }
        }
        Ok(groups)
    }

    /// Offsets of `z`'s occurrences on the outer walk, measured from `start`.
    fn offset_range(&self, z: usize, start: usize) -> (usize, usize) {
        let m = self.emb.outer_walk().len();
        let mut lo = usize::MAX;
        let mut hi = 0;
        for &p in self.emb.occurrences(z) {
            let o = (p + m - start) % m;
            lo = lo.min(o);
            hi = hi.max(o);
        }
        (lo, hi)
    }

    /// First and last member of `group` on the walk starting inside `other`.
    pub fn group_extremes(&self, group: &[usize], other: &[usize]) -> (usize, usize) {
        let anchor = *other.iter().min().unwrap();
        let start = self.emb.occurrences(anchor)[0];
        let mut first = (usize::MAX, usize::MAX);
        let mut last = (0, usize::MAX);
        for &z in group {
            let (lo, hi) = self.offset_range(z, start);
            if lo < first.0 {
                first = (lo, z);
            }
            if last.1 == usize::MAX || hi > last.0 {
                last = (hi, z);
            }
        }
        (first.1, last.1)
    }

    pub fn extremes(&self, face: usize, landmarks: &[usize]) -> Result<Option<FaceExtremes>> {
        let groups = self.groups(face, landmarks)?;
        if groups.len() != 2 {
            return Ok(None);
        }
        let (f0, l0) = self.group_extremes(&groups[0].1, &groups[1].1);
        let (f1, l1) = self.group_extremes(&groups[1].1, &groups[0].1);
        Ok(Some(FaceExtremes { reps: [groups[0].0, groups[1].0], first: [f0, f1], last: [l0, l1] }))
    }

    fn geodesics_meet(&self, a: usize, x: usize, b: usize, y: usize) -> bool {
        (0..self.dm.n()).any(|w| self.dm.on_geodesic(a, w, x) && self.dm.on_geodesic(b, w, y))
    }

    /// A shortest path from `a` to `b`, stepping to the lowest-id neighbour.
    fn canonical_path(&self, a: usize, b: usize, out: &mut Vec<usize>) {
        let mut cur = a;
        out.push(cur);
        while cur != b {
            let d = self.dm.get(cur, b);
            cur = *self.g.neighbors(cur).iter().find(|&&w| self.dm.get(w, b) + 1 == d).unwrap();
            out.push(cur);
        }
    }

    /// Vertices of the cycle through the four bifurcation points.
    pub fn bifurcation_cycle(&self, z1: usize, z2: usize, x: usize, y: usize) -> Result<Vec<usize>> {
        let v = bifurcation_point(self.dm, z1, x, y)?;
        let u = bifurcation_point(self.dm, x, z1, z2)?;
        let t = bifurcation_point(self.dm, z2, x, y)?;
        let s = bifurcation_point(self.dm, y, z1, z2)?;
        let mut c = Vec::new();
        for (a, b) in [(v, s), (s, t), (t, u), (u, v)] {
            self.canonical_path(a, b, &mut c);
        }
        c.sort_unstable();
        c.dedup();
        Ok(c)
    }

    /// Some pair violating the face condition for the given extremes.
    pub fn violation(&self, face: usize, ex: &FaceExtremes) -> Result<Option<(usize, usize)>> {
        let n = self.g.n();
        let [z1f, z2f] = ex.first;
        let [z1l, z2l] = ex.last;
        let verts = &self.emb.faces[face].vertices;
        for x in 0..n {
            for y in 0..n {
                if x == y || self.dm.resolves(z1f, x, y) || self.dm.resolves(z2f, x, y) {
                    continue;
                }
                if self.dm.resolves(z1l, x, y) || self.dm.resolves(z2l, x, y) {
                    continue;
                }
                if self.geodesics_meet(z1f, x, z2f, y) {
                    continue;
                }
                let c = self.bifurcation_cycle(z1f, z2f, x, y)?;
                if verts.iter().all(|v| c.binary_search(v).is_ok()) {
                    return Ok(Some((x.min(y), x.max(y))));
                }
            }
        }
        Ok(None)
    }
}

pub fn requirement2(g: &Graph, emb: &OuterEmbedding, landmarks: &[usize]) -> Result<Req2Report> {
    g.require_connected()?;
    if g.n() < 3 {
        return Err(MdimError::TooSmall { min: 3, got: g.n() });
    }
    let dm = DistanceMatrix::new(g);
    requirement2_dm(&Req2Context::new(g, &dm, emb), landmarks)
}

pub fn requirement2_dm(ctx: &Req2Context<'_>, landmarks: &[usize]) -> Result<Req2Report> {
    for face in 0..ctx.emb.faces.len() {
        if let Some(ex) = ctx.extremes(face, landmarks)? {
            if let Some(pair) = ctx.violation(face, &ex)? {
                return Ok(Req2Report { satisfied: false, witness: Some(Req2Violation { face, pair }) });
            }
        }
    }
    Ok(Req2Report { satisfied: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::outerplanar_embed;

    fn g(n: usize, e: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, e).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        g(n, &e)
    }

    fn path(n: usize) -> Graph {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        g(n, &e)
    }

    #[test]
    fn is_resolving_examples() {
        let c4 = cycle(4);
        assert_eq!(is_resolving(&c4, &[0, 2]), ResolutionReport { resolved: false, witness: Some((1, 3)) });
        assert!(is_resolving(&path(3), &[0]).resolved);
        assert!(is_resolving(&c4, &[0, 1]).resolved);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_mdim(&Graph::empty(3)).0, 2);
        assert_eq!(brute_force_mdim(&path(5)), (1, vec![0]));
        assert_eq!(brute_force_mdim(&cycle(6)).0, 2);
        assert_eq!(brute_force_mdim(&Graph::empty(1)).0, 0);
    }

    #[test]
    fn greedy_examples() {
        let p4 = greedy_mdim(&path(4)).unwrap();
        assert!(p4.len() <= 2 && is_resolving(&path(4), &p4).resolved);
        let k3 = cycle(3);
        assert_eq!(greedy_mdim(&k3).unwrap().len(), 2);
        let star = g(4, &[(0, 1), (0, 2), (0, 3)]);
        let s = greedy_mdim(&star).unwrap();
        assert_eq!(s.len(), 2);
        assert!(is_resolving(&star, &s).resolved);
    }

    #[test]
    fn g_set_examples() {
        let p3 = path(3);
        let dm = DistanceMatrix::new(&p3);
        assert_eq!(g_set(&dm, &p3, 1, &[0]), vec![2]);
        let tp = g(4, &[(0, 1), (1, 2), (0, 2), (0, 3)]);
        let dm = DistanceMatrix::new(&tp);
        assert_eq!(g_set(&dm, &tp, 0, &[3]), vec![1, 2]);
        assert_eq!(g_set(&dm, &tp, 0, &[0]), vec![1, 2, 3]);
        assert_eq!(g_set(&dm, &tp, 0, &[]), vec![1, 2, 3]);
    }

    #[test]
    fn requirement1_examples() {
        assert!(requirement1(&path(3), &[0]).satisfied);
        assert_eq!(requirement1(&path(3), &[]), Req1Report { satisfied: false, witness: Some(1) });
        assert!(requirement1(&cycle(4), &[0, 2]).satisfied);
    }

    #[test]
    fn bifurcation_examples() {
        let star = g(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(bifurcation_point(&DistanceMatrix::new(&star), 1, 2, 3).unwrap(), 0);
        let p4 = path(4);
        assert_eq!(bifurcation_point(&DistanceMatrix::new(&p4), 0, 2, 3).unwrap(), 2);
        let d = g(4, &[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)]);
        assert_eq!(bifurcation_point(&DistanceMatrix::new(&d), 2, 0, 1).unwrap(), 2);
    }

    #[test]
    fn representative_examples() {
        let c4 = cycle(4);
        let dm = DistanceMatrix::new(&c4);
        assert_eq!(representative(&dm, &c4, 3, &[0, 1]).unwrap(), Point::Vertex(0));
        let c5 = cycle(5);
        let dm = DistanceMatrix::new(&c5);
        assert_eq!(representative(&dm, &c5, 3, &[0, 1]).unwrap(), Point::midpoint(0, 1));
        let c6 = cycle(6);
        let dm = DistanceMatrix::new(&c6);
        assert_eq!(representative(&dm, &c6, 0, &[0, 1, 2, 3, 4, 5]).unwrap(), Point::Vertex(0));
        // two non-adjacent closest vertices
        assert!(matches!(
            representative(&dm, &c6, 0, &[1, 5]),
            Err(MdimError::AmbiguousRepresentative { .. })
        ));
    }

    #[test]
    fn requirement2_examples() {
        let c4 = cycle(4);
        let emb = outerplanar_embed(&c4).unwrap();
        let r = requirement2(&c4, &emb, &[0, 2]).unwrap();
        assert!(!r.satisfied);
        assert_eq!(r.witness, Some(Req2Violation { face: 0, pair: (1, 3) }));
        assert!(requirement2(&c4, &emb, &[0, 1]).unwrap().satisfied);
        // three representatives: vacuous
        assert!(requirement2(&c4, &emb, &[0, 1, 2]).unwrap().satisfied);
    }
}
