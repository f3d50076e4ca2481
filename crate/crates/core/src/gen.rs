//! Seeded random instance generators.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::MdimError;
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Path,
    Cycle,
    Tree,
    Outerplanar,
    Complete,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Path, Family::Cycle, Family::Tree, Family::Outerplanar, Family::Complete];
}

impl FromStr for Family {
    type Err = MdimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "path" => Ok(Family::Path),
            "cycle" => Ok(Family::Cycle),
            "tree" => Ok(Family::Tree),
            "outerplanar" => Ok(Family::Outerplanar),
            "complete" => Ok(Family::Complete),
            other => Err(MdimError::Parse { line: 0, msg: format!("unknown family '{other}'") }),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Path => "path",
            Family::Cycle => "cycle",
            Family::Tree => "tree",
            Family::Outerplanar => "outerplanar",
            Family::Complete => "complete",
        };
        f.write_str(s)
    }
}

/// Deterministic instance for `(family, n, seed)`. `n` is clamped to at least 1.
pub fn gen_instance(family: Family, n: usize, seed: u64) -> Graph {
    let n = n.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = match family {
        Family::Path => (1..n).map(|i| (i - 1, i)).collect(),
        Family::Cycle if n >= 3 => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        Family::Cycle => (1..n).map(|i| (i - 1, i)).collect(),
        Family::Tree => random_tree(n, &mut rng),
        Family::Outerplanar => random_outerplanar(n, &mut rng),
        Family::Complete => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
    };
    Graph::from_edges(n, &edges).expect("generated edges are simple")
}

fn relabel(n: usize, edges: &mut [(usize, usize)], rng: &mut ChaCha8Rng) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    for e in edges.iter_mut() {
        *e = (perm[e.0], perm[e.1]);
    }
}

pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    relabel(n, &mut edges, rng);
    edges
}

/// Random triangulation of a polygon, relabelled at random.
pub fn random_maximal_outerplanar(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = triangulated_polygon(n, rng);
    relabel(n, &mut edges, rng);
    edges
}

fn triangulated_polygon(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if n < 3 {
        return (1..n).map(|i| (i - 1, i)).collect();
    }
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let mut stack = vec![(0..n).collect::<Vec<_>>()];
    while let Some(poly) = stack.pop() {
        let k = poly.len();
        if k <= 3 {
            if k == 3 && !edges.contains(&(poly[0], poly[2])) {
                edges.push((poly[0], poly[2]));
            }
            continue;
        }
        let apex = rng.gen_range(1..k - 1);
        if apex > 1 {
            edges.push((poly[0], poly[apex]));
        }
        if apex < k - 2 {
            edges.push((poly[apex], poly[k - 1]));
        }
        stack.push(poly[..=apex].to_vec());
        stack.push(poly[apex..].to_vec());
    }
    for e in edges.iter_mut() {
        *e = (e.0.min(e.1), e.0.max(e.1));
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Random polygon triangulation followed by connectivity-preserving edge
/// deletions and a random relabelling.
pub fn random_outerplanar(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if n < 3 {
        return (1..n).map(|i| (i - 1, i)).collect();
    }
    let edges = triangulated_polygon(n, rng);
    let p_delete: f64 = rng.gen_range(0.0..0.7);
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(rng);
    let mut keep = vec![true; edges.len()];
    for i in order {
        if !rng.gen_bool(p_delete) {
            continue;
        }
        keep[i] = false;
        let rest: Vec<(usize, usize)> = edges.iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
        if !Graph::from_edges(n, &rest).expect("subset of simple edges").is_connected() {
            keep[i] = true;
        }
    }
    let mut out: Vec<(usize, usize)> = edges.iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
    relabel(n, &mut out, rng);
    out
}
