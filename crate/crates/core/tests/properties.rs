use std::collections::HashMap;

use mdim::embed::{is_outerplanar, outerplanar_embed};
use mdim::gen::{gen_instance, Family};
use mdim::graph::{bfs_distances, DistanceMatrix, HalfDist, Point};
use mdim::harness::subdivision_check;
use mdim::outerplanar::{metric_d_with, DpOptions, Instance};
use mdim::reductions::{one_negative_transform, random_dahlhaus_formula, validate_one_negative};
use mdim::resolve::{
    bifurcation_point, brute_force_mdim_dm, g_set, is_bifurcation_point, is_resolving, is_resolving_dm,
    requirement1, requirement1_dm, requirement2_dm, Req2Context,
};
use mdim::tree::tree_mdim;
use mdim::Graph;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_from_mask(n: usize, mask: &[bool]) -> Graph {
    let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
    let edges: Vec<(usize, usize)> = pairs.zip(mask).filter(|(_, &b)| b).map(|(e, _)| e).collect();
    Graph::from_edges(n, &edges).unwrap()
}

fn small_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 0.1f64..0.8).prop_flat_map(|(n, p)| {
        prop::collection::vec(prop::bool::weighted(p), n * (n - 1) / 2).prop_map(move |m| graph_from_mask(n, &m))
    })
}

fn outerplanar(lo: usize, hi: usize) -> impl Strategy<Value = Graph> {
    (lo..=hi, any::<u64>()).prop_map(|(n, seed)| gen_instance(Family::Outerplanar, n, seed))
}

fn subset_of(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<bool>(), n).prop_map(|m| (0..m.len()).filter(|&i| m[i]).collect())
}

fn graph_and_subset(g: impl Strategy<Value = Graph>) -> impl Strategy<Value = (Graph, Vec<usize>)> {
    g.prop_flat_map(|g| {
        let n = g.n();
        (Just(g), subset_of(n))
    })
}

/// Whether `g` contains a subdivision of the graph on `branch.len()`
/// vertices with edges `h_edges` whose branch vertices are `branch`.
fn routes(g: &Graph, branch: &[usize], h_edges: &[(usize, usize)], used: &mut Vec<bool>) -> bool {
    let Some((&(a, b), rest)) = h_edges.split_first() else { return true };
    let (src, dst) = (branch[a], branch[b]);
    fn extend(
        g: &Graph,
        cur: usize,
        dst: usize,
        used: &mut Vec<bool>,
        k: &mut dyn FnMut(&mut Vec<bool>) -> bool,
    ) -> bool {
        for &w in g.neighbors(cur) {
            if w == dst {
                if k(used) {
                    return true;
                }
            } else if !used[w] {
                used[w] = true;
                let found = extend(g, w, dst, used, k);
                used[w] = false;
                if found {
                    return true;
                }
            }
        }
        false
    }
    extend(g, src, dst, used, &mut |u: &mut Vec<bool>| routes(g, branch, rest, u))
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut c in combinations(&items[i + 1..], k - 1) {
            c.insert(0, x);
            out.push(c);
        }
    }
    out
}

fn has_forbidden_subdivision(g: &Graph) -> bool {
    let n = g.n();
    let all: Vec<usize> = (0..n).collect();
    let k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let k23 = [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)];
    let try_branch = |branch: &[usize], edges: &[(usize, usize)]| {
        let mut used = vec![false; n];
        for &b in branch {
            used[b] = true;
        }
        routes(g, branch, edges, &mut used)
    };
    if combinations(&all, 4).iter().any(|b| try_branch(b, &k4)) {
        return true;
    }
    for pair in combinations(&all, 2) {
        let rest: Vec<usize> = all.iter().copied().filter(|v| !pair.contains(v)).collect();
        for triple in combinations(&rest, 3) {
            let branch = [pair[0], pair[1], triple[0], triple[1], triple[2]];
            if try_branch(&branch, &k23) {
                return true;
            }
        }
    }
    false
}

#[test]
fn embedding_matches_subdivision_search_exhaustively_up_to_six() {
    for n in 1..=6usize {
        let m = n * (n - 1) / 2;
        for mask in 0u32..(1 << m) {
            let bits: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
            let g = graph_from_mask(n, &bits);
            if !g.is_connected() {
                continue;
            }
            assert_eq!(is_outerplanar(&g), !has_forbidden_subdivision(&g), "{:?}", g.edges());
        }
    }
}

#[test]
fn subdivision_search_finds_known_obstructions() {
    let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    let k23 = Graph::from_edges(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
    // K4 with one edge subdivided twice
    let sub = Graph::from_edges(6, &[(0, 4), (4, 5), (5, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    assert!(has_forbidden_subdivision(&k4));
    assert!(has_forbidden_subdivision(&k23));
    assert!(has_forbidden_subdivision(&sub));
    assert!(!has_forbidden_subdivision(&gen_instance(Family::Cycle, 7, 0)));
}

fn tree_and_subset() -> impl Strategy<Value = (Graph, Vec<usize>)> {
    (3..=10usize, any::<u64>())
        .prop_map(|(n, s)| gen_instance(Family::Tree, n, s))
        .prop_flat_map(|g| {
            let n = g.n();
            (Just(g), subset_of(n).prop_filter("nonempty", |l| !l.is_empty()))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn embedding_matches_subdivision_search_seven(
        p in 0.0f64..0.6,
        mask in prop::collection::vec(any::<u8>(), 21),
        seed in any::<u64>(),
    ) {
        // A random spanning tree keeps the graph connected.
        let mut g = gen_instance(Family::Tree, 7, seed);
        let pairs = (0..7).flat_map(|i| (i + 1..7).map(move |j| (i, j)));
        for ((a, b), &r) in pairs.zip(&mask) {
            if (r as f64) < p * 256.0 && !g.has_edge(a, b) {
                g.add_edge(a, b).unwrap();
            }
        }
        prop_assert_eq!(is_outerplanar(&g), !has_forbidden_subdivision(&g));
    }

    #[test]
    fn midpoint_distance_is_half_more_than_nearer_end(g in small_graph(8)) {
        for &(a, b) in g.edges() {
            let dm = bfs_distances(&g, Point::midpoint(a, b));
            let (da, db) = (bfs_distances(&g, Point::Vertex(a)), bfs_distances(&g, Point::Vertex(b)));
            for x in 0..g.n() {
                let near = da[x].min(db[x]);
                if near == HalfDist::INF {
                    prop_assert_eq!(dm[x], HalfDist::INF);
                } else {
                    prop_assert_eq!(dm[x].0, near.0 + 1);
                }
            }
        }
    }

    #[test]
    fn biconnected_embeddings_are_sparse_with_simple_walks(g in outerplanar(3, 12)) {
        let emb = outerplanar_embed(&g).unwrap();
        if emb.blocks.len() == 1 {
            prop_assert!(g.m() <= 2 * g.n() - 3);
            let mut walk = emb.outer_walk().to_vec();
            walk.sort_unstable();
            prop_assert_eq!(walk, (0..g.n()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn resolving_iff_both_conditions((g, l) in graph_and_subset(outerplanar(3, 10))) {
        let emb = outerplanar_embed(&g).unwrap();
        let dm = DistanceMatrix::new(&g);
        let ctx = Req2Context::new(&g, &dm, &emb);
        let both = requirement1_dm(&dm, &g, &l).satisfied && requirement2_dm(&ctx, &l).unwrap().satisfied;
        prop_assert_eq!(is_resolving_dm(&dm, &l).resolved, both);
    }

    #[test]
    fn trees_resolving_iff_neighbour_condition((t, l) in tree_and_subset()) {
        prop_assert_eq!(is_resolving(&t, &l).resolved, requirement1(&t, &l).satisfied);
    }

    #[test]
    fn shared_bifurcation_points(g in outerplanar(3, 9)) {
        let n = g.n();
        let dm = DistanceMatrix::new(&g);
        for x in 0..n {
            for y in x + 1..n {
                let blind: Vec<usize> = (0..n).filter(|&z| !dm.resolves(z, x, y)).collect();
                for &z in &blind {
                    let v = bifurcation_point(&dm, z, x, y).unwrap();
                    for &z2 in &blind {
                        if (0..n).any(|w| dm.on_geodesic(z, w, x) && dm.on_geodesic(z2, w, y)) {
                            prop_assert!(is_bifurcation_point(&dm, z2, x, y, v), "z={} z2={} x={} y={}", z, z2, x, y);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn all_vertices_resolve(g in small_graph(8)) {
        let all: Vec<usize> = (0..g.n()).collect();
        prop_assert!(is_resolving(&g, &all).resolved);
    }

    #[test]
    fn supersets_of_resolving_sets_resolve((g, l) in graph_and_subset(small_graph(8)), extra in subset_of(8)) {
        let dm = DistanceMatrix::new(&g);
        if is_resolving_dm(&dm, &l).resolved {
            let mut bigger = l.clone();
            bigger.extend(extra.into_iter().filter(|&v| v < g.n()));
            bigger.sort_unstable();
            bigger.dedup();
            prop_assert!(is_resolving_dm(&dm, &bigger).resolved);
        }
    }

    #[test]
    fn oracle_is_minimum(g in small_graph(8)) {
        let dm = DistanceMatrix::new(&g);
        let (k, base) = brute_force_mdim_dm(&dm);
        prop_assert_eq!(base.len(), k);
        prop_assert!(is_resolving_dm(&dm, &base).resolved);
        let n = g.n();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize + 1 == k {
                let l: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                prop_assert!(!is_resolving_dm(&dm, &l).resolved);
            }
        }
    }

    #[test]
    fn tree_basis_is_locally_minimal(t in (2..=12usize, any::<u64>()).prop_map(|(n, s)| gen_instance(Family::Tree, n, s))) {
        let l = tree_mdim(&t).unwrap();
        prop_assert!(requirement1(&t, &l).satisfied);
        for i in 0..l.len() {
            let mut fewer = l.clone();
            fewer.remove(i);
            prop_assert!(!requirement1(&t, &fewer).satisfied || !is_resolving(&t, &fewer).resolved);
        }
    }

    #[test]
    fn dynamic_program_matches_oracle(g in outerplanar(3, 9)) {
        let out = metric_d_with(&g, DpOptions::default()).unwrap();
        let dm = DistanceMatrix::new(&g);
        prop_assert!(is_resolving_dm(&dm, &out.landmarks).resolved);
        prop_assert_eq!(out.landmarks.len(), brute_force_mdim_dm(&dm).0);
    }

    #[test]
    fn stored_conditions_are_realised(g in outerplanar(3, 10), lazy in any::<bool>()) {
        let inst = Instance::new(&g).unwrap();
        let out = inst.metric_d(DpOptions { lazy_faces: lazy, ..DpOptions::default() }).unwrap();
        for rec in &out.trace {
            if let Some(lower) = &rec.lower {
                prop_assert_eq!(&inst.upper_condition(rec.node, &out.landmarks), &rec.upper);
                prop_assert_eq!(&inst.lower_condition(rec.node, &out.landmarks), lower);
            }
        }
    }

    #[test]
    fn transform_meets_constraints_and_subdivides(vars in 2..=12usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_dahlhaus_formula(vars, &mut rng).unwrap();
        let out = one_negative_transform(&f).unwrap();
        prop_assert!(validate_one_negative(&out).valid);
        prop_assert_eq!(subdivision_check(&f, &out), Ok(()));
        let splits = out.num_vars - f.num_vars;
        prop_assert_eq!(out.clauses.len(), f.clauses.len() + splits);
    }

    #[test]
    fn generators_are_reproducible(n in 1..40usize, seed in any::<u64>()) {
        for family in Family::ALL {
            prop_assert_eq!(gen_instance(family, n, seed), gen_instance(family, n, seed));
        }
    }
}

/// Landmark sets with the same configuration at a face agree on which face
/// vertices keep a candidate in `g(v, L)` on the face.
#[test]
fn configuration_determines_face_candidates() {
    for seed in 0..150 {
        let g = gen_instance(Family::Outerplanar, 4 + seed as usize % 6, seed);
        let inst = Instance::new(&g).unwrap();
        let n = g.n();
        for node in 0..inst.tree.len() {
            let s = &inst.tree.nodes[node].s;
            if !inst.tree.nodes[node].is_face() {
                continue;
            }
            let mut seen: HashMap<String, Vec<bool>> = HashMap::new();
            for mask in 1u32..(1 << n) {
                let l: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                let conf = inst.construct_conf(node, &l).unwrap();
                let key = format!("{:?}", (conf.kind, &conf.extended, &conf.q, &conf.landmarks));
                let hits: Vec<bool> =
                    s.iter().map(|&v| g_set(&inst.dm, &g, v, &l).iter().any(|w| s.contains(w))).collect();
                let prev = seen.entry(key).or_insert_with(|| hits.clone());
                assert_eq!(prev, &hits, "seed {seed} node {node} L={l:?}");
            }
        }
    }
}
