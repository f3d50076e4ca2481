//! Oracle and property suites shared by the acceptance tests and the
//! `cross-validate` command. Every suite is deterministic for a fixed seed.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dual::split;
use crate::embed::{is_outerplanar, outerplanar_embed};
use crate::error::Result;
use crate::gen::{gen_instance, Family};
use crate::graph::{DistanceMatrix, Graph, Point};
use crate::outerplanar::{on_face_path, representative_on, resolved_pairs, ConfigKind, Instance, DpOptions};
use crate::reductions::{
    clause_variable_graph, one_negative_transform, random_dahlhaus_formula, sat_enumerate, validate_dahlhaus,
    validate_one_negative, CnfFormula,
};
use crate::resolve::{
    brute_force_mdim_dm, greedy_mdim_dm, is_resolving_dm, requirement1_dm, requirement2_dm, Req2Context,
};
use crate::solver::concrete_solvers;
use crate::tree::tree_mdim;

#[derive(Debug, Clone, Copy)]
pub struct HarnessConfig {
    pub n_max: usize,
    /// Number of distinct graphs in the oracle suite; the other suites
    /// scale from it.
    pub trials: usize,
    pub seed: u64,
    /// Corrupt the dynamic program's answers, to check that the harness
    /// notices.
    pub inject_fault: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig { n_max: 8, trials: 500, seed: 0, inject_fault: false }
    }
}

/// A graph on which some check failed.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub graph: Graph,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteResult {
    pub id: usize,
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
    /// Report-only observations.
    pub notes: Vec<String>,
    pub fixtures: Vec<Fixture>,
}

impl SuiteResult {
    fn new(id: usize, name: &'static str) -> Self {
        SuiteResult { id, name, ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: String, graph: Option<&Graph>) {
        if let Some(g) = graph {
            let name = format!("suite{}-{:03}", self.id, self.fixtures.len());
            self.fixtures.push(Fixture { name, graph: g.clone() });
        }
        self.failures.push(msg);
    }

    /// One summary line.
    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!("[{}] {:<28} {verdict} checked={}", self.id, self.name, self.checked);
        if !self.failures.is_empty() {
            let _ = write!(s, " failures={}", self.failures.len());
        }
        s
    }
}

/// Text report: one line per suite, then failures and notes.
pub fn render_report(cfg: &HarnessConfig, results: &[SuiteResult]) -> String {
    let mut s = format!("cross-validate n_max={} trials={} seed={}\n", cfg.n_max, cfg.trials, cfg.seed);
    for r in results {
        s.push_str(&r.line());
        s.push('\n');
        for f in &r.failures {
            let _ = writeln!(s, "    failure: {f}");
        }
        for n in &r.notes {
            let _ = writeln!(s, "    note: {n}");
        }
    }
    let ok = results.iter().all(SuiteResult::passed);
    let _ = writeln!(s, "overall: {}", if ok { "PASS" } else { "FAIL" });
    s
}

fn rng_for(cfg: &HarnessConfig, suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ suite)
}

fn sample_subset(rng: &mut ChaCha8Rng, n: usize, sizes: std::ops::RangeInclusive<usize>) -> Vec<usize> {
    let k = rng.gen_range(sizes);
    let mut l: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
    l.sort_unstable();
    l
}

/// Distinct connected outerplanar graphs with `3 <= n <= n_max`, distinct by
/// edge set.
pub fn distinct_outerplanar(cfg: &HarnessConfig) -> Vec<Graph> {
    let lo = 3;
    let hi = cfg.n_max.max(lo);
    let mut seen: HashSet<(usize, Vec<(usize, usize)>)> = HashSet::new();
    let mut out = Vec::new();
    let mut seed = cfg.seed.wrapping_mul(1_000_003);
    let mut attempts = 0;
    while out.len() < cfg.trials && attempts < cfg.trials * 100 {
        let n = lo + attempts % (hi - lo + 1);
        attempts += 1;
        let g = gen_instance(Family::Outerplanar, n, seed);
        seed = seed.wrapping_add(1);
        if seen.insert((n, g.edges().to_vec())) {
            out.push(g);
        }
    }
    out
}

/// Runs every suite except the timing one.
pub fn run_all(cfg: &HarnessConfig) -> Vec<SuiteResult> {
    let graphs = distinct_outerplanar(cfg);
    let (oracle, greedy, bounds) = oracle_suites(cfg, &graphs);
    let (sep, mid) = separator_suites(cfg);
    vec![
        oracle,
        face_condition_suite(cfg),
        tree_suite(cfg),
        even_cycle_suite(),
        sep,
        mid,
        bounds,
        transform_suite(cfg),
        greedy,
    ]
}

/// Criteria on the distinct-graph set: exact size against the oracle,
/// greedy sanity, and bounds on the face configurations of several bases.
pub fn oracle_suites(cfg: &HarnessConfig, graphs: &[Graph]) -> (SuiteResult, SuiteResult, SuiteResult) {
    let mut oracle = SuiteResult::new(1, "oracle-equivalence");
    let mut greedy = SuiteResult::new(8, "greedy-sanity");
    let mut bounds = SuiteResult::new(6, "type-iii-bounds");
    let mut over_bound = 0;
    let mut type3 = 0;
    for g in graphs {
        oracle.checked += 1;
        greedy.checked += 1;
        let n = g.n();
        let inst = match Instance::new(g) {
            Ok(i) => i,
            Err(e) => {
                oracle.fail(format!("{}: {e}", g.to_edge_list().replace('\n', ";")), Some(g));
                continue;
            }
        };
        let (k, base) = brute_force_mdim_dm(&inst.dm);
        let mut dp = match inst.metric_d(DpOptions::default()) {
            Ok(out) => out.landmarks,
            Err(e) => {
                oracle.fail(format!("{}: {e}", compact(g)), Some(g));
                continue;
            }
        };
        if cfg.inject_fault {
            dp.pop();
        }
        if dp.len() != k {
            oracle.fail(format!("{}: dynamic program found {} landmarks, oracle {k}", compact(g), dp.len()), Some(g));
        } else if !is_resolving_dm(&inst.dm, &dp).resolved {
            oracle.fail(format!("{}: landmarks {dp:?} do not resolve", compact(g)), Some(g));
        }

        let gr = greedy_mdim_dm(&inst.dm);
        if !is_resolving_dm(&inst.dm, &gr).resolved {
            greedy.fail(format!("{}: greedy {gr:?} does not resolve", compact(g)), Some(g));
        }
        let ln = (n as f64).ln().ceil() as usize;
        if gr.len() > 2 * ln * k {
            over_bound += 1;
        }

        for l in [&dp, &base, &gr] {
            for node in 0..inst.tree.len() {
                if !inst.tree.nodes[node].is_face() {
                    continue;
                }
                let conf = match inst.construct_conf(node, l) {
                    Ok(c) => c,
                    Err(e) => {
                        bounds.fail(format!("{}: node {node}: {e}", compact(g)), Some(g));
                        continue;
                    }
                };
                if conf.kind != ConfigKind::III {
                    continue;
                }
                type3 += 1;
                bounds.checked += 1;
                if conf.extended.len() > 20 || !(3..=5).contains(&conf.q.len()) {
                    bounds.fail(
                        format!("{}: node {node} L={l:?}: |R|={} |Q|={}", compact(g), conf.extended.len(), conf.q.len()),
                        Some(g),
                    );
                    continue;
                }
                if is_resolving_dm(&inst.dm, l).resolved {
                    if let Some(r) = uncovered_rep(&inst, node, l, &conf.q) {
                        bounds.fail(format!("{}: node {node} L={l:?}: {r} off every core path", compact(g)), Some(g));
                    }
                }
            }
        }
    }
    greedy.notes.push(format!("{over_bound} instances exceed 2*ceil(ln n)*k"));
    bounds.notes.push(format!("{type3} type-III configurations"));
    (oracle, greedy, bounds)
}

/// A representative on the face lying on no shortest face path between two
/// of the first three core points.
fn uncovered_rep(inst: &Instance, node: usize, l: &[usize], q: &[Point]) -> Option<Point> {
    let crate::dual::NodeKind::Face(face) = inst.tree.nodes[node].kind else { return None };
    let verts = &inst.emb.faces[face].vertices;
    let core = &q[..3];
    let groups = inst.req2().groups(face, l).ok()?;
    groups.into_iter().map(|(p, _)| p).find(|&r| {
        !(0..3).any(|i| (0..3).any(|j| i != j && on_face_path(verts, core[i], r, core[j])))
    })
}

fn compact(g: &Graph) -> String {
    let e: Vec<String> = g.edges().iter().map(|(u, v)| format!("{u}-{v}")).collect();
    format!("n={} [{}]", g.n(), e.join(" "))
}

fn random_connected_outerplanar(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Graph {
    let n = rng.gen_range(lo..=hi);
    gen_instance(Family::Outerplanar, n, rng.gen())
}

/// is_resolving agrees with the conjunction of the neighbour and face
/// conditions.
pub fn face_condition_suite(cfg: &HarnessConfig) -> SuiteResult {
    let mut res = SuiteResult::new(2, "face-condition-equivalence");
    let mut rng = rng_for(cfg, 2);
    let pairs = 2 * cfg.trials;
    let mut resolving = 0;
    while res.checked < pairs {
        let g = random_connected_outerplanar(&mut rng, 3, 10);
        let emb = outerplanar_embed(&g).expect("generated graphs are outerplanar");
        let dm = DistanceMatrix::new(&g);
        let ctx = Req2Context::new(&g, &dm, &emb);
        for _ in 0..4 {
            let l = sample_subset(&mut rng, g.n(), 0..=g.n());
            res.checked += 1;
            let lhs = is_resolving_dm(&dm, &l).resolved;
            resolving += usize::from(lhs);
            let rhs = match requirement2_dm(&ctx, &l) {
                Ok(r) => requirement1_dm(&dm, &g, &l).satisfied && r.satisfied,
                Err(e) => {
                    res.fail(format!("{} L={l:?}: {e}", compact(&g)), Some(&g));
                    continue;
                }
            };
            if lhs != rhs {
                res.fail(format!("{} L={l:?}: resolving={lhs}, conditions={rhs}", compact(&g)), Some(&g));
            }
        }
    }
    res.notes.push(format!("{resolving} resolving samples"));
    res
}

/// On trees: is_resolving agrees with the neighbour condition for nonempty
/// landmark sets, and the tree solver matches the oracle.
pub fn tree_suite(cfg: &HarnessConfig) -> SuiteResult {
    let mut res = SuiteResult::new(3, "tree-neighbour-condition");
    let mut rng = rng_for(cfg, 3);
    let trees = (2 * cfg.trials).div_ceil(5);
    for _ in 0..trees {
        let n = rng.gen_range(2..=10);
        let t = gen_instance(Family::Tree, n, rng.gen());
        let dm = DistanceMatrix::new(&t);
        let k = brute_force_mdim_dm(&dm).0;
        match tree_mdim(&t) {
            Ok(l) if l.len() == k => {}
            Ok(l) => res.fail(format!("{}: tree solver {l:?}, oracle {k}", compact(&t)), Some(&t)),
            Err(e) => res.fail(format!("{}: {e}", compact(&t)), Some(&t)),
        }
        for _ in 0..20 {
            let l = sample_subset(&mut rng, n, 1..=n);
            res.checked += 1;
            let lhs = is_resolving_dm(&dm, &l).resolved;
            let rhs = requirement1_dm(&dm, &t, &l).satisfied;
            if lhs != rhs {
                res.fail(format!("{} L={l:?}: resolving={lhs}, neighbour condition={rhs}", compact(&t)), Some(&t));
            }
        }
    }
    res
}

/// Antipodal pairs on even cycles, and every applicable solver on them.
pub fn even_cycle_suite() -> SuiteResult {
    let mut res = SuiteResult::new(4, "even-cycles");
    for half in 2..=6 {
        let n = 2 * half;
        let g = gen_instance(Family::Cycle, n, 0);
        let emb = outerplanar_embed(&g).expect("cycles are outerplanar");
        let dm = DistanceMatrix::new(&g);
        let ctx = Req2Context::new(&g, &dm, &emb);
        let l = [0, half];
        res.checked += 1;
        let r1 = requirement1_dm(&dm, &g, &l).satisfied;
        let r2 = requirement2_dm(&ctx, &l).map(|r| r.satisfied);
        let resolving = is_resolving_dm(&dm, &l).resolved;
        if !r1 || r2 != Ok(false) || resolving {
            res.fail(format!("C{n}: req1={r1} req2={r2:?} resolving={resolving}"), Some(&g));
        }
        for s in concrete_solvers().iter().filter(|s| s.applies_to(&g)) {
            res.checked += 1;
            match s.solve(&g) {
                Ok(sol) if sol.landmarks.len() == 2 => {}
                Ok(sol) => res.fail(format!("C{n}: {} returned {:?}", s.name(), sol.landmarks), Some(&g)),
                Err(e) => res.fail(format!("C{n}: {}: {e}", s.name()), Some(&g)),
            }
        }
    }
    res
}

/// Pair-resolution suites across dual tree edges: a point resolves the same
/// pairs on the far side as its representative on the separator, and an
/// edge midpoint resolves no pair its endpoints both leave unresolved.
pub fn separator_suites(cfg: &HarnessConfig) -> (SuiteResult, SuiteResult) {
    let mut sep = SuiteResult::new(5, "separator-representative");
    let mut mid = SuiteResult::new(5, "midpoint-dominance");
    let mut rng = rng_for(cfg, 5);
    let tuples = 2 * cfg.trials;
    while sep.checked < tuples || mid.checked < tuples {
        let g = random_connected_outerplanar(&mut rng, 3, 10);
        let inst = Instance::new(&g).expect("generated graphs are outerplanar");
        let t = &inst.tree;
        let edges: Vec<(usize, usize)> =
            (0..t.len()).filter_map(|c| t.parent[c].map(|p| (c, p))).collect();
        if edges.is_empty() {
            continue;
        }
        let &(a, b) = edges.choose(&mut rng).unwrap();
        let (v, w) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        let (bv, bw, _) = split(t, v, w);
        let port = t.s_of_edge(v, w);
        if sep.checked < tuples {
            let z = *bv.choose(&mut rng).unwrap();
            let rep = representative_on(&inst.dm, Point::Vertex(z), &port);
            sep.checked += 1;
            if resolved_pairs(&inst.dm, Point::Vertex(z), &bw) != resolved_pairs(&inst.dm, rep, &bw) {
                sep.fail(format!("{}: edge {v}-{w}, z={z}, rep={rep}", compact(&g)), Some(&g));
            }
        }
        if mid.checked < tuples && t.nodes[v].is_face() && t.nodes[w].is_face() {
            let [x, y] = [port[0], port[1]];
            mid.checked += 1;
            let s1: BTreeSet<_> = resolved_pairs(&inst.dm, Point::Vertex(x), &bw).into_iter().collect();
            let s2: BTreeSet<_> = resolved_pairs(&inst.dm, Point::Vertex(y), &bw).into_iter().collect();
            let se = resolved_pairs(&inst.dm, Point::midpoint(x, y), &bw);
            if let Some(p) = se.iter().find(|p| !s1.contains(p) && !s2.contains(p)) {
                mid.fail(format!("{}: edge {x}-{y} pair {p:?}", compact(&g)), Some(&g));
            }
        }
    }
    (sep, mid)
}

const UNSAT_EXAMPLE: &str = "p cnf 8 11\n2 1 5 0\n7 4 0\n5 3 0\n8 -5 0\n6 -7 0\n-4 -8 0\n8 6 3 0\n2 -1 0\n4 -6 0\n1 7 0\n-2 -3 0\n";

/// Random formulas with the three-occurrence pattern: the transform meets
/// the one-negative constraints, keeps satisfiability, and only subdivides
/// edges of the clause-variable graph.
pub fn transform_suite(cfg: &HarnessConfig) -> SuiteResult {
    let mut res = SuiteResult::new(7, "one-negative-transform");
    let mut rng = rng_for(cfg, 7);
    let count = cfg.trials.div_ceil(5);
    let mut sat = 0;
    // Random formulas of this shape are almost always satisfiable; one
    // known unsatisfiable instance covers the other outcome.
    let unsat = CnfFormula::parse_dimacs(UNSAT_EXAMPLE).expect("valid DIMACS");
    for i in 0..=count {
        let f = if i == count {
            unsat.clone()
        } else {
            let vars = rng.gen_range(2..=12);
            random_dahlhaus_formula(vars, &mut rng).expect("at least two variables")
        };
        res.checked += 1;
        let dimacs = f.to_dimacs().replace('\n', " ");
        if !validate_dahlhaus(&f).valid {
            res.fail(format!("generator produced invalid input: {dimacs}"), None);
            continue;
        }
        let out = match one_negative_transform(&f) {
            Ok(o) => o,
            Err(e) => {
                res.fail(format!("{dimacs}: {e}"), None);
                continue;
            }
        };
        let report = validate_one_negative(&out);
        if !report.valid {
            res.fail(format!("{dimacs}: {}", report.summary()), None);
        }
        let before = sat_enumerate(&f).map(|m| m.is_some());
        let after = sat_enumerate(&out).map(|m| m.is_some());
        if before != after {
            res.fail(format!("{dimacs}: satisfiable before {before:?}, after {after:?}"), None);
        }
        sat += usize::from(before == Ok(true));
        if let Err(e) = subdivision_check(&f, &out) {
            res.fail(format!("{dimacs}: {e}"), None);
        }
    }
    res.notes.push(format!("{sat} satisfiable formulas"));
    res
}

/// Checks that the clause-variable graph of `out` turns into that of `f`
/// once every fresh variable and every clause pairing an old variable with
/// a fresh one is smoothed away.
pub fn subdivision_check(f: &CnfFormula, out: &CnfFormula) -> std::result::Result<(), String> {
    let old = clause_variable_graph(f);
    let new = clause_variable_graph(out);
    let fresh = |x: usize| new.is_variable(x) && x >= f.num_vars;
    // Clause of `out` -> clause of `f`; the first half of a split clause
    // has no image.
    let mut image: Vec<Option<usize>> = Vec::with_capacity(out.clauses.len());
    for (i, c) in out.clauses.iter().enumerate() {
        let split_head = c.iter().any(|&l| l > 0 && l as usize > f.num_vars);
        image.push(if split_head { None } else { Some(i) });
    }
    let mut next = 0;
    for slot in image.iter_mut().flatten() {
        *slot = next;
        next += 1;
    }
    if next != f.clauses.len() {
        return Err(format!("{next} surviving clauses, expected {}", f.clauses.len()));
    }
    let removable = |x: usize| {
        if new.is_variable(x) {
            fresh(x)
        } else {
            image[x - new.num_vars].is_none()
        }
    };
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(u, v) in new.graph.edges() {
        adj.entry(u).or_default().insert(v);
        adj.entry(v).or_default().insert(u);
    }
    let doomed: Vec<usize> = (0..new.graph.n()).filter(|&x| removable(x)).collect();
    for x in doomed {
        let nb = adj.remove(&x).unwrap_or_default();
        if nb.len() != 2 {
            return Err(format!("vertex {x} has degree {}", nb.len()));
        }
        let (a, b) = (*nb.first().unwrap(), *nb.last().unwrap());
        for (p, q) in [(a, b), (b, a)] {
            let s = adj.get_mut(&p).expect("neighbour present");
            s.remove(&x);
            if !s.insert(q) {
                return Err(format!("smoothing {x} creates a parallel edge"));
            }
        }
    }
    let relabel = |x: usize| if new.is_variable(x) { x } else { old.num_vars + image[x - new.num_vars].unwrap() };
    let mut got: Vec<(usize, usize)> = adj
        .iter()
        .flat_map(|(&u, s)| s.iter().map(move |&v| (u, v)))
        .filter(|(u, v)| u < v)
        .map(|(u, v)| {
            let (a, b) = (relabel(u), relabel(v));
            (a.min(b), a.max(b))
        })
        .collect();
    got.sort_unstable();
    if got != old.graph.edges() {
        return Err("smoothed graph differs from the original clause-variable graph".into());
    }
    Ok(())
}

/// Whether the graph is outerplanar by the embedding routine; used by
/// fixture replay.
pub fn replay_fixture(g: &Graph) -> Result<bool> {
    if !is_outerplanar(g) || !g.is_connected() {
        return Ok(true);
    }
    let inst = Instance::new(g)?;
    let l = inst.metric_d(DpOptions::default())?.landmarks;
    let k = brute_force_mdim_dm(&inst.dm).0;
    Ok(l.len() == k && is_resolving_dm(&inst.dm, &l).resolved)
}
