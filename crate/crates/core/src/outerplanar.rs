//! Exact dynamic program for the metric dimension of outerplanar graphs.
//!
//! The program runs over the generalized dual tree. For a tree edge between
//! a node `c` and its parent, the lower region is `D = B(c, p) \ (s(c) ∩ s(p))`.
//! Everything a landmark outside `D` tells about vertices inside `D` (or on
//! the separator) is captured by its closest point on the separator, and vice
//! versa. Each tree edge is therefore summarised by
//!
//! * the set of separator points representing landmarks on each side,
//! * per representative, the first and last landmark on the outer walk
//!   (restricted to the side), needed by the face condition above or below,
//! * for each separator vertex outside `D`, its neighbours in `D` that are
//!   still candidates for `g(v, L)`.
//!
//! A table entry for node `c` is keyed by the upper summary (a parameter)
//! and the lower summary (a result) and holds a cheapest landmark set inside
//! `D`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::Serialize;

use crate::dual::{build_dual_tree, DualTree, NodeKind};
use crate::embed::{outerplanar_embed, OuterEmbedding};
use crate::error::{MdimError, Result};
use crate::graph::{DistanceMatrix, Graph, Point};
use crate::resolve::{g_set, is_resolving_dm, normalize_landmarks, FaceExtremes, Req2Context};

/// First and last landmark of one representative group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Extreme {
    pub rep: Point,
    pub first: usize,
    pub last: usize,
}

/// Landmarks on one side of a tree edge, seen from the separator.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct SideSummary {
    pub reps: Vec<Point>,
    /// Empty when no face can observe this side's walk order.
    pub extremes: Vec<Extreme>,
}

/// Lower condition: the lower summary plus the surviving neighbour sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct LowerCondition {
    pub summary: SideSummary,
    /// For each separator vertex `s` outside `D`: `g(s, L ∩ D) ∩ N(s) ∩ D`.
    pub neighbours: Vec<(usize, Vec<usize>)>,
}

/// A face check with exactly two groups, some of whose landmarks lie above
/// the current tree edge and are not known yet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Obligation {
    pub face: usize,
    pub reps: [Point; 2],
    /// Landmarks of each group seen so far, a superset of its extremes
    /// among the landmarks below.
    pub known: [Vec<usize>; 2],
    /// Per group, the upper representatives on the current separator whose
    /// landmarks belong to it.
    pub pending: [Vec<Point>; 2],
}

/// The boundary condition of a tree edge induced by a landmark set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundaryCondition {
    pub t_u: Vec<Point>,
    pub t_l: Vec<Point>,
    /// Per lower representative: first and last landmark.
    pub t_z: Vec<(Point, usize, usize)>,
    /// Per separator vertex: 0, 1 or 2 following the neighbour case analysis.
    pub t_v: Vec<(usize, u8)>,
    pub upper: SideSummary,
    pub lower: LowerCondition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConfigKind {
    I,
    II,
    III,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Configuration {
    pub node: usize,
    pub kind: ConfigKind,
    /// Extended representatives `(point, direction node)` (types I and III).
    pub extended: Vec<(Point, usize)>,
    /// Core representatives chosen on the face (type III).
    pub q: Vec<Point>,
    /// Type II: first and last landmark of each group.
    pub landmarks: Vec<usize>,
}

/// One step of the solution's derivation, for debugging.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub node: usize,
    pub kind: NodeKind,
    pub own: Vec<usize>,
    pub upper: SideSummary,
    pub lower: Option<LowerCondition>,
}

#[derive(Debug, Clone, Copy)]
pub struct DpOptions {
    /// Abort with `TooLarge` after this many candidate evaluations.
    pub max_work: u64,
    /// Run with cost bounds 1, 2, ... instead of a single unbounded pass.
    pub deepen: bool,
    /// Start with face checks that depend on landmarks not yet placed
    /// switched off, and switch them on face by face while the optimum
    /// fails to resolve the graph.
    pub lazy_faces: bool,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions { max_work: 200_000_000, deepen: true, lazy_faces: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DpOutcome {
    pub landmarks: Vec<usize>,
    pub trace: Vec<TraceRecord>,
    pub table_entries: usize,
    pub work: u64,
}

struct Trace {
    node: usize,
    own: Vec<usize>,
    upper: SideSummary,
    lower: Option<LowerCondition>,
    children: Vec<Rc<Trace>>,
}

/// One lower condition realised by a node together with its cheapest set.
pub struct Variant {
    pub neighbours: Vec<(usize, Vec<usize>)>,
    pub obligations: Vec<Obligation>,
    pub cost: usize,
    pub set: Vec<usize>,
    trace: Rc<Trace>,
}

/// `m(c, upper)`: lower summaries and their variants.
pub type Table = HashMap<SideSummary, HashMap<VariantKey, Variant>>;

/// What distinguishes variants sharing a lower summary.
pub type VariantKey = (Vec<(usize, Vec<usize>)>, Vec<Obligation>);

/// A child's part in one evaluation of a node.
#[derive(Clone, Copy)]
pub struct ChildChoice<'t> {
    pub node: usize,
    pub upper: &'t SideSummary,
    pub lower: &'t SideSummary,
    pub variant: &'t Variant,
}

struct EdgeInfo {
    port: Vec<usize>,
    in_lower: Vec<bool>,
    /// Port vertices outside `D`.
    upper_ports: Vec<usize>,
    lower_start: usize,
    lower_len: usize,
    /// Vertices of the port, and its midpoint if it has two.
    port_points: Vec<Point>,
    /// Per lower representative, the vertices of `D` it represents.
    lower_cands: Vec<(Point, Vec<usize>)>,
    /// Representatives of vertices outside `D`.
    upper_points: Vec<Point>,
    /// Upper representatives standing for a single vertex.
    upper_single: Vec<(Point, usize)>,
    lower_relevant: bool,
}

struct NodeInfo {
    owned: Vec<usize>,
    /// For each owned vertex, its neighbours outside every child's `D`.
    direct: Vec<Vec<usize>>,
}

/// An outerplanar graph with everything the dynamic program needs.
pub struct Instance {
    pub g: Graph,
    pub dm: DistanceMatrix,
    pub emb: OuterEmbedding,
    pub tree: DualTree,
    edges: Vec<Option<EdgeInfo>>,
    nodes: Vec<NodeInfo>,
}

impl Instance {
    pub fn new(g: &Graph) -> Result<Self> {
        g.require_connected()?;
        if g.n() < 2 {
            return Err(MdimError::TooSmall { min: 2, got: g.n() });
        }
        let emb = outerplanar_embed(g)?;
        let tree = build_dual_tree(g, &emb);
        let dm = DistanceMatrix::new(g);
        let mut inst = Instance { g: g.clone(), dm, emb, tree, edges: Vec::new(), nodes: Vec::new() };
        inst.prepare()?;
        Ok(inst)
    }

    fn prepare(&mut self) -> Result<()> {
        let t = &self.tree;
        let n = self.g.n();
        let walk = self.emb.outer_walk();
        let total_faces = t.nodes.iter().filter(|x| x.is_face()).count();
        let mut subtree_faces = vec![0usize; t.len()];
        for &v in t.order.iter().rev() {
            subtree_faces[v] = usize::from(t.nodes[v].is_face()) + t.children[v].iter().map(|&c| subtree_faces[c]).sum::<usize>();
        }
        let mut edges: Vec<Option<EdgeInfo>> = (0..t.len()).map(|_| None).collect();
        for c in 0..t.len() {
            let Some(p) = t.parent[c] else { continue };
            let port = t.s_of_edge(c, p);
            let sep = t.separator(c, p);
            let mut in_lower = vec![false; n];
            for v in t.side(c, p) {
                in_lower[v] = !sep.contains(&v);
            }
            let upper_ports: Vec<usize> = port.iter().copied().filter(|&v| !in_lower[v]).collect();
            // The lower side spans one cyclic interval of the walk; only
            // port vertices may interrupt it.
            let foreign: Vec<bool> = walk.iter().map(|&v| !in_lower[v] && !port.contains(&v)).collect();
            let marked: Vec<bool> = walk.iter().map(|&v| in_lower[v]).collect();
            let (lower_start, lower_len) = lower_span(&marked, &foreign).ok_or_else(|| {
                MdimError::InternalInconsistency(format!("lower side of dual edge {c}-{p} is not contiguous on the walk"))
            })?;
            let mut lower_cands: Vec<(Point, Vec<usize>)> = Vec::new();
            let mut upper_points: Vec<Point> = Vec::new();
            let mut upper_members: Vec<(Point, Vec<usize>)> = Vec::new();
            for v in 0..n {
                let r = rep_on(&self.dm, Point::Vertex(v), &port);
                if in_lower[v] {
                    match lower_cands.iter_mut().find(|(p, _)| *p == r) {
                        Some((_, vs)) => vs.push(v),
                        None => lower_cands.push((r, vec![v])),
                    }
                } else {
                    match upper_members.iter_mut().find(|(p, _)| *p == r) {
                        Some((_, vs)) => vs.push(v),
                        None => upper_members.push((r, vec![v])),
                    }
                }
            }
            lower_cands.sort();
            for (_, vs) in lower_cands.iter_mut() {
                vs.sort_by_key(|&z| arc_range(&self.emb, z, lower_start, lower_len).0);
            }
            upper_members.sort();
            upper_points.extend(upper_members.iter().map(|m| m.0));
            let upper_single = upper_members.iter().filter(|m| m.1.len() == 1).map(|m| (m.0, m.1[0])).collect();
            let mut port_points: Vec<Point> = port.iter().map(|&v| Point::Vertex(v)).collect();
            if let [a, b] = port[..] {
                port_points.push(Point::midpoint(a, b));
            }
            edges[c] = Some(EdgeInfo {
                port_points,
                port,
                in_lower,
                upper_ports,
                lower_start,
                lower_len,
                lower_cands,
                upper_points,
                upper_single,
                lower_relevant: subtree_faces[c] < total_faces,
            });
        }
        let mut nodes = Vec::with_capacity(t.len());
        for o in 0..t.len() {
            let owned: Vec<usize> = match t.parent[o] {
                Some(p) => {
                    let sep = t.separator(o, p);
                    t.nodes[o].s.iter().copied().filter(|v| !sep.contains(v)).collect()
                }
                None => t.nodes[o].s.clone(),
            };
            let direct = owned
                .iter()
                .map(|&v| {
                    self.g
                        .neighbors(v)
                        .iter()
                        .copied()
                        .filter(|&w| t.children[o].iter().all(|&c| !edges[c].as_ref().unwrap().in_lower[w]))
                        .collect()
                })
                .collect();
            nodes.push(NodeInfo { owned, direct });
        }
        self.edges = edges;
        self.nodes = nodes;
        Ok(())
    }

    fn edge(&self, c: usize) -> &EdgeInfo {
        self.edges[c].as_ref().expect("non-root node")
    }

    pub fn req2(&self) -> Req2Context<'_> {
        Req2Context::new(&self.g, &self.dm, &self.emb)
    }

    /// Whether `w` can be in `g(s, ·)` as far as the point `r` is concerned.
    fn passes(&self, r: Point, s: usize, w: usize) -> bool {
        self.dm.half(r, w).0 == self.dm.half(r, s).0 + 2
    }

    fn summarize(&self, cands: &[(Point, Option<usize>)], arc: (usize, usize), with_ext: bool) -> SideSummary {
        let mut reps: Vec<Point> = cands.iter().map(|c| c.0).collect();
        reps.sort();
        reps.dedup();
        let mut extremes = Vec::new();
        if with_ext {
            for &r in &reps {
                let mut first: Option<(usize, usize)> = None;
                let mut last: Option<(usize, usize)> = None;
                for &(p, z) in cands {
                    let Some(z) = z else { continue };
                    if p != r {
                        continue;
                    }
                    let (lo, hi) = arc_range(&self.emb, z, arc.0, arc.1);
                    if first.is_none_or(|f| lo < f.0) {
                        first = Some((lo, z));
                    }
                    if last.is_none_or(|l| hi > l.0) {
                        last = Some((hi, z));
                    }
                }
                if let (Some(f), Some(l)) = (first, last) {
                    extremes.push(Extreme { rep: r, first: f.1, last: l.1 });
                }
            }
        }
        SideSummary { reps, extremes }
    }

    fn push_summary(&self, out: &mut Vec<(Point, Option<usize>)>, s: &SideSummary, port: &[usize]) {
        for &r in &s.reps {
            out.push((rep_on(&self.dm, r, port), None));
        }
        for e in &s.extremes {
            let p = rep_on(&self.dm, e.rep, port);
            out.push((p, Some(e.first)));
            out.push((p, Some(e.last)));
        }
    }

    /// Upper representatives of child `c` given its parent's, the parent's
    /// own landmarks and the siblings' lower representatives.
    fn upper_for(&self, c: usize, up: &SideSummary, own: &[usize], siblings: &[(usize, &SideSummary)]) -> SideSummary {
        let e = self.edge(c);
        let mut reps: Vec<Point> = up.reps.iter().map(|&r| rep_on(&self.dm, r, &e.port)).collect();
        reps.extend(own.iter().map(|&a| rep_on(&self.dm, Point::Vertex(a), &e.port)));
        for &(s, sig) in siblings {
            if s != c {
                reps.extend(sig.reps.iter().map(|&r| rep_on(&self.dm, r, &e.port)));
            }
        }
        reps.sort();
        reps.dedup();
        SideSummary { reps, extremes: Vec::new() }
    }
}

/// Closest point of `port` to `p` (a vertex or the midpoint of the port edge).
fn rep_on(dm: &DistanceMatrix, p: Point, port: &[usize]) -> Point {
    match port {
        [v] => Point::Vertex(*v),
        [a, b] => {
            let (da, db) = (dm.half(p, *a), dm.half(p, *b));
            if da < db {
                Point::Vertex(*a)
            } else if db < da {
                Point::Vertex(*b)
            } else {
                Point::midpoint(*a, *b)
            }
        }
        _ => unreachable!("ports have one or two vertices"),
    }
}

/// The cyclic interval `(start, len)` covering every marked position and no
/// foreign one.
fn lower_span(marked: &[bool], foreign: &[bool]) -> Option<(usize, usize)> {
    let m = marked.len();
    let first = (0..m).find(|&i| marked[i])?;
    // Walk backwards and forwards from a marked position until a foreign one.
    let mut lo = 0;
    while lo < m && !foreign[(first + m - lo - 1) % m] {
        lo += 1;
    }
    let mut hi = 0;
    while hi < m && !foreign[(first + hi + 1) % m] {
        hi += 1;
    }
    if lo >= m {
        // Nothing foreign: the other side is the port alone. Cut the cycle
        // at the largest run of unmarked positions.
        let mut best = (0, 0);
        for s in 0..m {
            if marked[s] || !marked[(s + m - 1) % m] {
                continue;
            }
            let run = (0..m).take_while(|&k| !marked[(s + k) % m]).count();
            if run > best.1 {
                best = (s, run);
            }
        }
        let start = (best.0 + best.1) % m;
        return Some((start, m - best.1));
    }
    // Trim unmarked ends.
    let mut start = (first + m - lo) % m;
    let mut len = lo + hi + 1;
    while !marked[start] {
        start = (start + 1) % m;
        len -= 1;
    }
    while !marked[(start + len - 1) % m] {
        len -= 1;
    }
    let covered = (0..len).filter(|&k| marked[(start + k) % m]).count();
    (covered == marked.iter().filter(|&&b| b).count()).then_some((start, len))
}

/// Least and greatest offset from `start` among the occurrences of `z` that
/// fall in the arc `[start, start + len)`; all occurrences if none do.
fn arc_range(emb: &OuterEmbedding, z: usize, start: usize, len: usize) -> (usize, usize) {
    let m = emb.outer_walk().len();
    let mut lo = usize::MAX;
    let mut hi = 0;
    for &p in emb.occurrences(z) {
        let o = (p + m - start) % m;
        if o < len {
            lo = lo.min(o);
            hi = hi.max(o);
        }
    }
    if lo == usize::MAX {
        for &p in emb.occurrences(z) {
            let o = (p + m - start) % m;
            lo = lo.min(o);
            hi = hi.max(o);
        }
    }
    (lo, hi)
}

/// Fixed inputs of one join over a node's children.
struct Join<'a, 't> {
    up: &'a SideSummary,
    own: &'a [usize],
    options: &'a [Vec<ChildChoice<'t>>],
    reach: &'a [Vec<Vec<Point>>],
    bases: &'a [SideSummary],
}

/// The dynamic program over one instance.
pub struct Solver<'a> {
    inst: &'a Instance,
    opts: DpOptions,
    memo: RefCell<HashMap<(usize, SideSummary), Rc<Table>>>,
    violations: RefCell<HashMap<(usize, FaceExtremes), bool>>,
    work: RefCell<u64>,
    bound: usize,
    /// Per face: whether checks waiting on landmarks above are kept.
    strict: Vec<bool>,
}

impl<'a> Solver<'a> {
    pub fn new(inst: &'a Instance, opts: DpOptions) -> Self {
        Solver {
            inst,
            opts,
            memo: RefCell::new(HashMap::new()),
            violations: RefCell::new(HashMap::new()),
            work: RefCell::new(0),
            bound: usize::MAX,
            strict: vec![true; inst.emb.faces.len()],
        }
    }

    /// Keeps pending face checks only for faces marked in `strict`.
    pub fn with_strict(mut self, strict: Vec<bool>) -> Self {
        self.strict = strict;
        self
    }

    /// Drops every partial solution with more than `bound` landmarks.
    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    fn violated(&self, face: usize, ex: FaceExtremes) -> Result<bool> {
        if let Some(&b) = self.violations.borrow().get(&(face, ex)) {
            return Ok(b);
        }
        let b = self.inst.req2().violation(face, &ex)?.is_some();
        self.violations.borrow_mut().insert((face, ex), b);
        Ok(b)
    }

    /// `m(o, up)`: every lower condition of node `o` reachable under the
    /// upper summary `up`, each with a cheapest landmark set.
    pub fn opt(&self, o: usize, up: &SideSummary) -> Result<Rc<Table>> {
        if let Some(t) = self.memo.borrow().get(&(o, up.clone())) {
            return Ok(t.clone());
        }
        let owned = &self.inst.nodes[o].owned;
        let mut table = Table::new();
        for mask in 0u32..(1 << owned.len()) {
            if mask.count_ones() as usize > self.bound {
                continue;
            }
            let own: Vec<usize> = (0..owned.len()).filter(|i| mask >> i & 1 == 1).map(|i| owned[i]).collect();
            self.combine(o, up, &own, &mut table)?;
        }
        let t = Rc::new(table);
        self.memo.borrow_mut().insert((o, up.clone()), t.clone());
        Ok(t)
    }

    fn combine(&self, o: usize, up: &SideSummary, own: &[usize], table: &mut Table) -> Result<()> {
        let kids = &self.inst.tree.children[o];
        if kids.is_empty() {
            return self.intermediate_sol(o, up, own, &[], table);
        }
        let budget = self.bound.saturating_sub(own.len());
        // reach[j][c]: points on c's separator that landmarks below sibling j can map to.
        let reach: Vec<Vec<Vec<Point>>> = kids
            .iter()
            .map(|&j| {
                kids.iter()
                    .map(|&c| {
                        let port = &self.inst.edge(c).port;
                        let mut ps: Vec<Point> =
                            self.inst.edge(j).lower_cands.iter().map(|(r, _)| rep_on(&self.inst.dm, *r, port)).collect();
                        ps.sort();
                        ps.dedup();
                        ps
                    })
                    .collect()
            })
            .collect();
        // Every upper summary a child could see: what the parent side forces
        // plus any further separator points its siblings might add.
        let mut contexts: Vec<Vec<(SideSummary, Rc<Table>)>> = Vec::with_capacity(kids.len());
        for (ci, &c) in kids.iter().enumerate() {
            let base = self.inst.upper_for(c, up, own, &[]);
            let points = &self.inst.edge(c).port_points;
            let mut found = Vec::new();
            for mask in 0u32..(1 << points.len()) {
                let extra: Vec<Point> = (0..points.len()).filter(|i| mask >> i & 1 == 1).map(|i| points[i]).collect();
                let reachable = |p: &Point| (0..kids.len()).any(|j| j != ci && reach[j][ci].contains(p));
                if extra.iter().any(|p| base.reps.contains(p) || !reachable(p)) {
                    continue;
                }
                let mut reps = base.reps.clone();
                reps.extend(extra);
                reps.sort();
                let u = SideSummary { reps, extremes: Vec::new() };
                let t = self.opt(c, &u)?;
                found.push((u, t));
            }
            contexts.push(found);
        }
        let mut options: Vec<Vec<ChildChoice<'_>>> = Vec::with_capacity(kids.len());
        for (i, found) in contexts.iter().enumerate() {
            let mut opts: Vec<ChildChoice<'_>> = found
                .iter()
                .flat_map(|(u, t)| {
                    t.iter().flat_map(move |(lower, vs)| {
                        vs.values().map(move |variant| ChildChoice { node: kids[i], upper: u, lower, variant })
                    })
                })
                .filter(|ch| ch.variant.cost <= budget)
                .collect();
            if opts.is_empty() {
                return Ok(());
            }
            opts.sort_by_key(|ch| ch.variant.cost);
            options.push(opts);
        }
        let bases: Vec<SideSummary> = kids.iter().map(|&c| self.inst.upper_for(c, up, own, &[])).collect();
        let ctx = Join { up, own, options: &options, reach: &reach, bases: &bases };
        let mut chosen = Vec::with_capacity(kids.len());
        self.pick_children(o, &ctx, budget, &mut chosen, table)
    }

    /// Whether the upper summary of chosen child `i` can still be completed
    /// by the children after position `next`.
    fn completable(&self, ctx: &Join<'_, '_>, chosen: &[ChildChoice<'_>], i: usize, next: usize) -> bool {
        let port = &self.inst.edge(chosen[i].node).port;
        chosen[i].upper.reps.iter().all(|r| {
            ctx.bases[i].reps.contains(r)
                || chosen.iter().enumerate().any(|(j, c)| j != i && c.lower.reps.iter().any(|&x| rep_on(&self.inst.dm, x, port) == *r))
                || (next..ctx.options.len()).any(|j| ctx.reach[j][i].contains(r))
        })
    }

    /// Whether every representative in `s`, moved onto the separator of
    /// `c`, is among `u`'s.
    fn maps_into(&self, s: &SideSummary, c: usize, u: &SideSummary) -> bool {
        let port = &self.inst.edge(c).port;
        s.reps.iter().all(|&r| u.reps.contains(&rep_on(&self.inst.dm, r, port)))
    }

    /// Every mutually consistent combination of child variants within the
    /// remaining budget.
    fn pick_children<'t>(
        &self,
        o: usize,
        ctx: &Join<'_, 't>,
        budget: usize,
        chosen: &mut Vec<ChildChoice<'t>>,
        table: &mut Table,
    ) -> Result<()> {
        let (up, own, options) = (ctx.up, ctx.own, ctx.options);
        let i = chosen.len();
        if i == options.len() {
            let lowers: Vec<(usize, &SideSummary)> = chosen.iter().map(|c| (c.node, c.lower)).collect();
            for ch in chosen.iter() {
                if self.inst.upper_for(ch.node, up, own, &lowers).reps != ch.upper.reps {
                    return Ok(());
                }
            }
            return self.intermediate_sol(o, up, own, chosen, table);
        }
        for opt in &options[i] {
            if opt.variant.cost > budget {
                break;
            }
            let fits = chosen
                .iter()
                .all(|c| self.maps_into(c.lower, opt.node, opt.upper) && self.maps_into(opt.lower, c.node, c.upper));
            if !fits {
                continue;
            }
            chosen.push(*opt);
            if (0..=i).all(|j| self.completable(ctx, chosen, j, i + 1)) {
                self.pick_children(o, ctx, budget - opt.variant.cost, chosen, table)?;
            }
            chosen.pop();
        }
        Ok(())
    }

    /// Evaluates node `o` for one choice of its own landmarks and one variant
    /// per child, recording the result in `table` unless the choice is
    /// inconsistent or breaks a requirement.
    pub fn intermediate_sol(&self, o: usize, up: &SideSummary, own: &[usize], kids: &[ChildChoice<'_>], table: &mut Table) -> Result<()> {
        {
            let mut w = self.work.borrow_mut();
            *w += 1;
            if *w > self.opts.max_work {
                return Err(MdimError::TooLarge(format!("dynamic program exceeded {} evaluations", self.opts.max_work)));
            }
        }
        let inst = self.inst;
        let info = &inst.nodes[o];
        // Requirement 1 at every vertex owned here.
        for (i, &v) in info.owned.iter().enumerate() {
            let mut count = 0;
            for &w in &info.direct[i] {
                let ok = up.reps.iter().all(|&r| inst.passes(r, v, w))
                    && own.iter().all(|&a| inst.passes(Point::Vertex(a), v, w))
                    && kids.iter().all(|ch| ch.lower.reps.iter().all(|&r| inst.passes(r, v, w)));
                count += usize::from(ok);
            }
            for ch in kids {
                if let Some((_, xs)) = ch.variant.neighbours.iter().find(|(s, _)| *s == v) {
                    count += xs.iter().filter(|&&w| ch.upper.reps.iter().all(|&r| inst.passes(r, v, w))).count();
                }
            }
            if count > 1 {
                return Ok(());
            }
        }
        // Requirement 2: this face, then the checks handed up by the children.
        let mut obligations: Vec<Obligation> = Vec::new();
        if let NodeKind::Face(face) = inst.tree.nodes[o].kind {
            let mut groups: Vec<(Point, Vec<usize>)> = Vec::new();
            let mut add = |p: Point, z: Option<usize>| {
                let slot = match groups.iter().position(|g| g.0 == p) {
                    Some(i) => i,
                    None => {
                        groups.push((p, Vec::new()));
                        groups.len() - 1
                    }
                };
                if let Some(z) = z {
                    groups[slot].1.push(z);
                }
            };
            for &r in &up.reps {
                add(r, None);
            }
            for &a in own {
                add(Point::Vertex(a), Some(a));
            }
            for ch in kids {
                for &r in &ch.lower.reps {
                    add(r, None);
                }
                for e in &ch.lower.extremes {
                    add(e.rep, Some(e.first));
                    add(e.rep, Some(e.last));
                }
            }
            if groups.len() == 2 {
                groups.sort();
                let mut ob = Obligation {
                    face,
                    reps: [groups[0].0, groups[1].0],
                    known: [std::mem::take(&mut groups[0].1), std::mem::take(&mut groups[1].1)],
                    pending: [Vec::new(), Vec::new()],
                };
                for g in 0..2 {
                    let p = ob.reps[g];
                    if up.reps.contains(&p) {
                        self.defer(o, &mut ob, g, p);
                    }
                }
                obligations.push(ob);
            }
        }
        for (i, ch) in kids.iter().enumerate() {
            let port = &inst.edge(ch.node).port;
            for ob in &ch.variant.obligations {
                let mut next = ob.clone();
                for g in 0..2 {
                    let wanted = &ob.pending[g];
                    if wanted.is_empty() {
                        continue;
                    }
                    let hit = |p: Point| wanted.contains(&rep_on(&inst.dm, p, port));
                    next.known[g].extend(own.iter().copied().filter(|&a| hit(Point::Vertex(a))));
                    for (j, sib) in kids.iter().enumerate() {
                        if j != i {
                            for e in sib.lower.extremes.iter().filter(|e| hit(e.rep)) {
                                next.known[g].push(e.first);
                                next.known[g].push(e.last);
                            }
                        }
                    }
                    next.pending[g].clear();
                    for &r in up.reps.iter().filter(|&&r| hit(r)) {
                        self.defer(o, &mut next, g, r);
                    }
                }
                obligations.push(next);
            }
        }
        let mut open = Vec::new();
        for mut ob in obligations {
            for k in ob.known.iter_mut() {
                k.sort_unstable();
                k.dedup();
            }
            let ctx = inst.req2();
            if ob.pending.iter().any(|p| !p.is_empty()) {
                if !self.strict[ob.face] {
                    continue;
                }
                // Only each group's extremes can matter once both groups
                // have a landmark to anchor the walk.
                if ob.known.iter().all(|k| !k.is_empty()) {
                    for g in 0..2 {
                        let (f, l) = ctx.group_extremes(&ob.known[g], &ob.known[1 - g]);
                        let mut k = vec![f, l];
                        k.sort_unstable();
                        k.dedup();
                        ob.known[g] = k;
                    }
                }
                open.push(ob);
                continue;
            }
            let (f0, l0) = ctx.group_extremes(&ob.known[0], &ob.known[1]);
            let (f1, l1) = ctx.group_extremes(&ob.known[1], &ob.known[0]);
            let ex = FaceExtremes { reps: ob.reps, first: [f0, f1], last: [l0, l1] };
            if self.violated(ob.face, ex)? {
                return Ok(());
            }
        }
        open.sort();
        let cost = own.len() + kids.iter().map(|c| c.variant.cost).sum::<usize>();
        if cost > self.bound {
            return Ok(());
        }
        let mut set: Vec<usize> = own.to_vec();
        for ch in kids {
            set.extend_from_slice(&ch.variant.set);
        }
        set.sort_unstable();
        let (key, lower) = match inst.tree.parent[o] {
            None => (SideSummary::default(), None),
            Some(_) => match self.lower_condition(o, own, kids) {
                Some(l) => (l.summary.clone(), Some(l)),
                None => return Ok(()),
            },
        };
        let neighbours = lower.as_ref().map(|l| l.neighbours.clone()).unwrap_or_default();
        let variants = table.entry(key).or_default();
        let vkey = (neighbours, open);
        if let Some(v) = variants.get(&vkey) {
            if (v.cost, &v.set) <= (cost, &set) {
                return Ok(());
            }
        }
        let trace = Rc::new(Trace {
            node: o,
            own: own.to_vec(),
            upper: up.clone(),
            lower,
            children: kids.iter().map(|c| c.variant.trace.clone()).collect(),
        });
        let v = Variant { neighbours: vkey.0.clone(), obligations: vkey.1.clone(), cost, set, trace };
        variants.insert(vkey, v);
        Ok(())
    }

    /// Records that landmarks above `o` represented by `r` join group `g`.
    fn defer(&self, o: usize, ob: &mut Obligation, g: usize, r: Point) {
        match self.inst.edge(o).upper_single.iter().find(|s| s.0 == r) {
            Some(&(_, z)) => ob.known[g].push(z),
            None => ob.pending[g].push(r),
        }
    }

    /// Lower condition of `o` for a fixed evaluation, or `None` if some
    /// separator vertex already has two neighbours no upper landmark can
    /// separate.
    fn lower_condition(&self, o: usize, own: &[usize], kids: &[ChildChoice<'_>]) -> Option<LowerCondition> {
        let inst = self.inst;
        let e = inst.edge(o);
        let mut cands = Vec::new();
        for &a in own {
            cands.push((rep_on(&inst.dm, Point::Vertex(a), &e.port), Some(a)));
        }
        for ch in kids {
            inst.push_summary(&mut cands, ch.lower, &e.port);
        }
        let summary = inst.summarize(&cands, (e.lower_start, e.lower_len), e.lower_relevant);
        let owned = &inst.nodes[o].owned;
        let mut neighbours = Vec::new();
        for &s in &e.upper_ports {
            let mut xs: Vec<usize> = Vec::new();
            for &w in inst.g.neighbors(s) {
                if owned.contains(&w)
                    && own.iter().all(|&a| inst.passes(Point::Vertex(a), s, w))
                    && kids.iter().all(|ch| ch.lower.reps.iter().all(|&r| inst.passes(r, s, w)))
                {
                    xs.push(w);
                }
            }
            for (i, ch) in kids.iter().enumerate() {
                let Some((_, ys)) = ch.variant.neighbours.iter().find(|(x, _)| *x == s) else { continue };
                for &w in ys {
                    let ok = own.iter().all(|&a| inst.passes(Point::Vertex(a), s, w))
                        && kids.iter().enumerate().all(|(j, o2)| j == i || o2.lower.reps.iter().all(|&r| inst.passes(r, s, w)));
                    if ok {
                        xs.push(w);
                    }
                }
            }
            xs.sort_unstable();
            let stuck = xs.iter().filter(|&&w| e.upper_points.iter().all(|&r| inst.passes(r, s, w))).count();
            if stuck > 1 {
                return None;
            }
            neighbours.push((s, xs));
        }
        Some(LowerCondition { summary, neighbours })
    }

    pub fn work(&self) -> u64 {
        *self.work.borrow()
    }

    pub fn table_entries(&self) -> usize {
        self.memo.borrow().values().map(|t| t.values().map(HashMap::len).sum::<usize>()).sum()
    }
}

fn flatten(inst: &Instance, t: &Rc<Trace>, out: &mut Vec<TraceRecord>) {
    out.push(TraceRecord {
        node: t.node,
        kind: inst.tree.nodes[t.node].kind,
        own: t.own.clone(),
        upper: t.upper.clone(),
        lower: t.lower.clone(),
    });
    for c in &t.children {
        flatten(inst, c, out);
    }
}

/// A metric basis of a connected outerplanar graph.
pub fn metric_d(g: &Graph) -> Result<Vec<usize>> {
    Ok(metric_d_with(g, DpOptions::default())?.landmarks)
}

pub fn metric_d_with(g: &Graph, opts: DpOptions) -> Result<DpOutcome> {
    g.require_connected()?;
    match g.n() {
        0 => return Err(MdimError::TooSmall { min: 1, got: 0 }),
        1 => return Ok(DpOutcome { landmarks: Vec::new(), trace: Vec::new(), table_entries: 0, work: 0 }),
        2 => return Ok(DpOutcome { landmarks: vec![0], trace: Vec::new(), table_entries: 0, work: 0 }),
        _ => {}
    }
    let inst = Instance::new(g)?;
    inst.metric_d(opts)
}

impl Instance {
    pub fn metric_d(&self, opts: DpOptions) -> Result<DpOutcome> {
        let bounds: Vec<usize> = if opts.deepen { (1..=self.g.n()).collect() } else { vec![usize::MAX] };
        let mut strict = vec![!opts.lazy_faces; self.emb.faces.len()];
        let mut spent = 0;
        for bound in bounds {
            loop {
                let budget = DpOptions { max_work: opts.max_work.saturating_sub(spent), ..opts };
                let solver = Solver::new(self, budget).with_bound(bound).with_strict(strict.clone());
                let table = solver.opt(self.tree.root, &SideSummary::default()).map_err(|e| match e {
                    MdimError::TooLarge(_) => {
                        MdimError::TooLarge(format!("dynamic program exceeded {} evaluations", opts.max_work))
                    }
                    e => e,
                })?;
                spent += solver.work();
                let best = table
                    .values()
                    .flat_map(HashMap::values)
                    .min_by(|a, b| (a.cost, &a.set).cmp(&(b.cost, &b.set)));
                let Some(best) = best else { break };
                if is_resolving_dm(&self.dm, &best.set).resolved {
                    return self.finish(best, solver.table_entries(), spent);
                }
                let failing = self.failing_faces(&best.set)?;
                if failing.iter().all(|&f| strict[f]) {
                    return Err(MdimError::InternalInconsistency(format!(
                        "landmarks {:?} pass every enforced check but do not resolve the graph",
                        best.set
                    )));
                }
                for f in failing {
                    strict[f] = true;
                }
            }
        }
        Err(MdimError::InternalInconsistency("no feasible landmark set found".into()))
    }

    /// Faces whose two-group check fails for `landmarks`.
    fn failing_faces(&self, landmarks: &[usize]) -> Result<Vec<usize>> {
        let ctx = self.req2();
        let mut out = Vec::new();
        for face in 0..self.emb.faces.len() {
            if let Some(ex) = ctx.extremes(face, landmarks)? {
                if ctx.violation(face, &ex)?.is_some() {
                    out.push(face);
                }
            }
        }
        Ok(out)
    }

    fn finish(&self, best: &Variant, table_entries: usize, work: u64) -> Result<DpOutcome> {
        let report = is_resolving_dm(&self.dm, &best.set);
        if !report.resolved {
            return Err(MdimError::InternalInconsistency(format!(
                "landmarks {:?} leave pair {:?} unresolved",
                best.set,
                report.witness.unwrap()
            )));
        }
        let mut trace = Vec::new();
        flatten(self, &best.trace, &mut trace);
        Ok(DpOutcome { landmarks: best.set.clone(), trace, table_entries, work })
    }

    /// Upper summary of the tree edge above `c` induced by `landmarks`.
    pub fn upper_condition(&self, c: usize, landmarks: &[usize]) -> SideSummary {
        let e = self.edge(c);
        let cands: Vec<(Point, Option<usize>)> = landmarks
            .iter()
            .filter(|&&z| !e.in_lower[z])
            .map(|&z| (rep_on(&self.dm, Point::Vertex(z), &e.port), Some(z)))
            .collect();
        self.summarize(&cands, (0, 0), false)
    }

    /// Lower condition of the tree edge above `c` induced by `landmarks`.
    pub fn lower_condition(&self, c: usize, landmarks: &[usize]) -> LowerCondition {
        let (summary, _, neighbours) = self.lower_parts(c, landmarks, self.edge(c).lower_relevant);
        LowerCondition { summary, neighbours }
    }

    #[allow(clippy::type_complexity)]
    fn lower_parts(&self, c: usize, landmarks: &[usize], with_ext: bool) -> (SideSummary, Vec<usize>, Vec<(usize, Vec<usize>)>) {
        let e = self.edge(c);
        let inside: Vec<usize> = landmarks.iter().copied().filter(|&z| e.in_lower[z]).collect();
        let cands: Vec<(Point, Option<usize>)> =
            inside.iter().map(|&z| (rep_on(&self.dm, Point::Vertex(z), &e.port), Some(z))).collect();
        let summary = self.summarize(&cands, (e.lower_start, e.lower_len), with_ext);
        let neighbours = e
            .upper_ports
            .iter()
            .map(|&s| {
                let xs = self
                    .g
                    .neighbors(s)
                    .iter()
                    .copied()
                    .filter(|&w| e.in_lower[w] && inside.iter().all(|&z| self.dm.get(z, w) == self.dm.get(z, s) + 1))
                    .collect();
                (s, xs)
            })
            .collect();
        (summary, inside, neighbours)
    }

    /// The boundary condition of the tree edge between `c` and its parent.
    pub fn boundary_condition_of(&self, c: usize, landmarks: &[usize]) -> BoundaryCondition {
        let e = self.edge(c);
        let upper = self.upper_condition(c, landmarks);
        let (full, inside, _) = self.lower_parts(c, landmarks, true);
        let lower = self.lower_condition(c, landmarks);
        let t_v = e
            .port
            .iter()
            .map(|&v1| {
                let other = e.port.iter().copied().find(|&x| x != v1);
                let xs: Vec<usize> = self
                    .g
                    .neighbors(v1)
                    .iter()
                    .copied()
                    .filter(|&w| e.in_lower[w] && inside.iter().all(|&z| self.dm.get(z, w) == self.dm.get(z, v1) + 1))
                    .collect();
                let t = if xs.iter().any(|&x| other.is_none_or(|v2| !self.g.has_edge(x, v2))) {
                    0
                } else if xs.len() == 1 {
                    1
                } else {
                    2
                };
                (v1, t)
            })
            .collect();
        BoundaryCondition {
            t_u: upper.reps.clone(),
            t_l: full.reps.clone(),
            t_z: full.extremes.iter().map(|x| (x.rep, x.first, x.last)).collect(),
            t_v,
            upper,
            lower,
        }
    }

    /// Tree node whose side contains `z`, seen from node `v`: `v` itself if
    /// `z ∈ s(v)`, else the neighbour `w` with `z ∈ B⁻(w, v)`.
    pub fn direction(&self, v: usize, z: usize) -> usize {
        if self.tree.nodes[v].s.contains(&z) {
            return v;
        }
        for &w in &self.tree.adj[v] {
            if self.tree.side(w, v).contains(&z) {
                return w;
            }
        }
        unreachable!("every vertex lies on some side")
    }

    /// h(v, v', L).
    pub fn h_of(&self, v: usize, node: usize, landmarks: &[usize]) -> Result<Option<usize>> {
        let l = normalize_landmarks(&self.g, landmarks)?;
        let gs = g_set(&self.dm, &self.g, v, &l);
        let mut dirs: Vec<usize> = gs.iter().map(|&w| self.direction(node, w)).collect();
        dirs.sort_unstable();
        dirs.dedup();
        match dirs[..] {
            [] => Ok(None),
            [d] => Ok(Some(d)),
            _ => Err(MdimError::IllDefined { vertex: v }),
        }
    }

    /// The configuration of `landmarks` at tree node `node`.
    pub fn construct_conf(&self, node: usize, landmarks: &[usize]) -> Result<Configuration> {
        let l = normalize_landmarks(&self.g, landmarks)?;
        let mut extended: Vec<(Point, usize)> = Vec::new();
        match self.tree.nodes[node].kind {
            NodeKind::Vertex(v) => {
                for &z in &l {
                    extended.push((Point::Vertex(v), self.direction(node, z)));
                }
                extended.sort();
                extended.dedup();
                Ok(Configuration { node, kind: ConfigKind::I, extended, q: Vec::new(), landmarks: Vec::new() })
            }
            NodeKind::Face(face) => {
                let ctx = self.req2();
                let groups = ctx.groups(face, &l)?;
                if groups.len() <= 2 {
                    let mut lm = Vec::new();
                    if groups.len() == 2 {
                        let ex = ctx.extremes(face, &l)?.expect("two groups");
                        lm = vec![ex.first[0], ex.last[0], ex.first[1], ex.last[1]];
                    } else if let Some((_, zs)) = groups.first() {
                        lm = zs.clone();
                    }
                    return Ok(Configuration { node, kind: ConfigKind::II, extended, q: Vec::new(), landmarks: lm });
                }
                for (p, zs) in &groups {
                    for &z in zs {
                        extended.push((*p, self.direction(node, z)));
                    }
                }
                extended.sort();
                extended.dedup();
                let reps: Vec<Point> = groups.iter().map(|g| g.0).collect();
                let q = core_representatives(&self.emb.faces[face].vertices, &reps);
                extended.retain(|(p, _)| q.contains(p));
                Ok(Configuration { node, kind: ConfigKind::III, extended, q, landmarks: Vec::new() })
            }
        }
    }
}

/// Position of a point on a face cycle, in half edges.
fn face_pos(face: &[usize], p: Point) -> usize {
    let k = face.len();
    let idx = |v: usize| face.iter().position(|&x| x == v).expect("point on face");
    match p {
        Point::Vertex(v) => 2 * idx(v),
        Point::Midpoint(a, b) => {
            let (i, j) = (idx(a), idx(b));
            if (i + 1) % k == j {
                2 * i + 1
            } else {
                2 * j + 1
            }
        }
    }
}

/// Distance along a face cycle, in half edges.
pub fn face_distance(face: &[usize], a: Point, b: Point) -> usize {
    let per = 2 * face.len();
    let d = (face_pos(face, a) + per - face_pos(face, b)) % per;
    d.min(per - d)
}

/// Whether `r` lies on some shortest path from `a` to `b` along the face.
pub fn on_face_path(face: &[usize], a: Point, r: Point, b: Point) -> bool {
    face_distance(face, a, r) + face_distance(face, r, b) == face_distance(face, a, b)
}

/// Representatives kept by the configuration construction for a face with
/// at least three representative points.
pub fn core_representatives(face: &[usize], reps: &[Point]) -> Vec<Point> {
    let mut reps = reps.to_vec();
    reps.sort();
    reps.dedup();
    let half = face.len();
    let mut best = (0, 0, 1);
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            let d = face_distance(face, reps[i], reps[j]);
            if d > best.0 {
                best = (d, i, j);
            }
        }
    }
    let (dmax, i1, i2) = best;
    let (z1, z2) = (reps[i1], reps[i2]);
    let rest: Vec<Point> = reps.iter().copied().filter(|&r| r != z1 && r != z2).collect();
    let z3 = rest.iter().copied().find(|&r| !on_face_path(face, z1, r, z2)).or_else(|| rest.first().copied());
    let mut q = vec![z1, z2];
    q.extend(z3);
    if dmax == half {
        if let Some(z3) = z3 {
            // Antipodal pair: both half-cycles carry representatives.
            let p1 = face_pos(face, z1);
            let per = 2 * half;
            let forward = |r: Point| (face_pos(face, r) + per - p1) % per < half;
            let other = rest.iter().copied().find(|&r| r != z3 && forward(r) != forward(z3));
            if let Some(z4) = other {
                q.push(z4);
            }
        }
    }
    let core: Vec<Point> = q.iter().copied().take(3).collect();
    for a in 0..core.len() {
        for b in a + 1..core.len() {
            if face_distance(face, core[a], core[b]) + 1 == half {
                if let Some(r) = rest.iter().copied().find(|&r| !q.contains(&r) && on_face_path(face, core[a], r, core[b])) {
                    q.push(r);
                }
            }
        }
    }
    q
}

/// S(z, W): pairs of `w` resolved by the point `z`.
pub fn resolved_pairs(dm: &DistanceMatrix, z: Point, w: &[usize]) -> Vec<(usize, usize)> {
    let mut w = w.to_vec();
    w.sort_unstable();
    w.dedup();
    let mut out = Vec::new();
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if dm.half(z, w[i]) != dm.half(z, w[j]) {
                out.push((w[i], w[j]));
            }
        }
    }
    out
}

/// Closest point of the separator `port` to the point `p`.
pub fn representative_on(dm: &DistanceMatrix, p: Point, port: &[usize]) -> Point {
    rep_on(dm, p, port)
}
