//! Metric dimension of trees by leg counting.

use crate::error::{MdimError, Result};
use crate::graph::{DistanceMatrix, Graph};
use crate::resolve::is_resolving_dm;

/// Full pairwise verification is skipped above this size; the linear
/// neighbour check still runs.
const PAIRWISE_LIMIT: usize = 2000;

/// A metric basis of a tree, verified before it is returned.
pub fn tree_mdim(g: &Graph) -> Result<Vec<usize>> {
    tree_mdim_with(g, true)
}

pub fn tree_mdim_with(g: &Graph, verify: bool) -> Result<Vec<usize>> {
    if g.n() < 2 {
        return Err(MdimError::TooSmall { min: 2, got: g.n() });
    }
    if !g.is_tree() {
        return Err(MdimError::NotATree);
    }
    let n = g.n();
    let leaves: Vec<usize> = (0..n).filter(|&v| g.degree(v) == 1).collect();
    // Follow each leaf inwards through degree-2 vertices to the base of its leg.
    let mut legs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut has_major = false;
    for &leaf in &leaves {
        let (mut prev, mut cur) = (leaf, g.neighbors(leaf)[0]);
        while g.degree(cur) == 2 {
            let next = if g.neighbors(cur)[0] == prev { g.neighbors(cur)[1] } else { g.neighbors(cur)[0] };
            prev = cur;
            cur = next;
        }
        if g.degree(cur) >= 3 {
            legs[cur].push(leaf);
            has_major = true;
        }
    }
    let mut out: Vec<usize> = if has_major {
        legs.iter()
            .filter(|l| l.len() >= 2)
            .flat_map(|l| {
                let mut l = l.clone();
                l.sort_unstable();
                l.pop();
                l
            })
            .collect()
    } else {
        vec![leaves[0]]
    };
    out.sort_unstable();
    if verify {
        if let Some(v) = first_requirement1_failure(g, &out) {
            return Err(MdimError::InternalInconsistency(format!("vertex {v} has two indistinguishable neighbours")));
        }
        if n <= PAIRWISE_LIMIT {
            let dm = DistanceMatrix::new(g);
            let r = is_resolving_dm(&dm, &out);
            if !r.resolved {
                return Err(MdimError::InternalInconsistency(format!("pair {:?} unresolved", r.witness.unwrap())));
            }
        }
    }
    Ok(out)
}

/// Linear-time neighbour check on a tree: `w ∈ g(v, L)` exactly when the
/// component of `T - vw` containing `w` has no landmark.
pub fn first_requirement1_failure(g: &Graph, landmarks: &[usize]) -> Option<usize> {
    let n = g.n();
    let mut is_l = vec![false; n];
    for &z in landmarks {
        is_l[z] = true;
    }
    let total = landmarks.len();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0];
    parent[0] = 0;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in g.neighbors(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                stack.push(w);
            }
        }
    }
    let mut below = vec![0usize; n];
    for &v in order.iter().rev() {
        below[v] += usize::from(is_l[v]);
        if v != 0 {
            below[parent[v]] += below[v];
        }
    }
    let mut bad: Vec<usize> = (0..n)
        .filter(|&v| {
            let mut free = g.neighbors(v).iter().filter(|&&w| w != parent[v] || v == 0).filter(|&&w| below[w] == 0).count();
            if v != 0 && total - below[v] == 0 {
                free += 1;
            }
            free > 1
        })
        .collect();
    bad.sort_unstable();
    bad.first().copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolve::brute_force_mdim;

    fn g(n: usize, e: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, e).unwrap()
    }

    #[test]
    fn examples() {
        let p6 = g(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]);
        assert_eq!(tree_mdim(&p6).unwrap(), vec![0]);
        let star = g(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(tree_mdim(&star).unwrap(), vec![1, 2]);
        let spider = g(7, &[(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)]);
        assert_eq!(tree_mdim(&spider).unwrap().len(), 2);
        assert_eq!(tree_mdim(&g(2, &[(0, 1)])).unwrap(), vec![0]);
    }

    #[test]
    fn errors() {
        assert_eq!(tree_mdim(&Graph::empty(1)), Err(MdimError::TooSmall { min: 2, got: 1 }));
        let c3 = g(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(tree_mdim(&c3), Err(MdimError::NotATree));
        assert_eq!(tree_mdim(&Graph::empty(3)), Err(MdimError::NotATree));
    }

    #[test]
    fn matches_oracle() {
        use crate::gen::{gen_instance, Family};
        for seed in 0..300 {
            let t = gen_instance(Family::Tree, 2 + seed as usize % 9, seed);
            assert_eq!(tree_mdim(&t).unwrap().len(), brute_force_mdim(&t).0, "seed {seed}");
        }
    }

    #[test]
    fn requirement1_check_agrees() {
        use crate::gen::{gen_instance, Family};
        use crate::resolve::requirement1;
        for seed in 0..100 {
            let t = gen_instance(Family::Tree, 8, seed);
            for mask in 0u32..256 {
                let l: Vec<usize> = (0..8).filter(|i| mask >> i & 1 == 1).collect();
                assert_eq!(first_requirement1_failure(&t, &l), requirement1(&t, &l).witness, "seed {seed} {l:?}");
            }
        }
    }
}
