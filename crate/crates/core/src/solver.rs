//! Solver registry: every algorithm behind one trait, looked up by name.

use crate::embed::is_outerplanar;
use crate::error::{MdimError, Result};
use crate::graph::Graph;
use crate::outerplanar::{metric_d_with, DpOptions, TraceRecord};
use crate::resolve::{brute_force_mdim, greedy_mdim};
use crate::tree::tree_mdim;

/// Largest graph the exhaustive solver accepts when asked for explicitly.
pub const BRUTE_LIMIT: usize = 32;
/// Largest non-outerplanar graph `auto` hands to the exhaustive solver.
pub const AUTO_BRUTE_LIMIT: usize = 20;

#[derive(Debug, Clone, Default)]
pub struct Solution {
    pub landmarks: Vec<usize>,
    /// Name of the algorithm that produced the set.
    pub algorithm: &'static str,
    /// Set when the result is not guaranteed to be minimum.
    pub warning: Option<String>,
    pub trace: Vec<TraceRecord>,
}

impl Solution {
    fn new(algorithm: &'static str, landmarks: Vec<usize>) -> Self {
        Solution { landmarks, algorithm, ..Default::default() }
    }
}

pub trait MdimSolver: Send + Sync {
    fn name(&self) -> &'static str;
    /// Whether `solve` accepts this graph.
    fn applies_to(&self, g: &Graph) -> bool;
    fn solve(&self, g: &Graph) -> Result<Solution>;
}

pub struct Brute;
pub struct TreeSolver;
pub struct OuterplanarSolver {
    pub opts: DpOptions,
}
pub struct Greedy;
pub struct Auto;

impl MdimSolver for Brute {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn applies_to(&self, g: &Graph) -> bool {
        g.n() >= 1 && g.n() <= BRUTE_LIMIT && g.is_connected()
    }

    fn solve(&self, g: &Graph) -> Result<Solution> {
        g.require_connected()?;
        if g.n() > BRUTE_LIMIT {
            return Err(MdimError::TooLarge(format!("exhaustive search is limited to {BRUTE_LIMIT} vertices")));
        }
        Ok(Solution::new(self.name(), brute_force_mdim(g).1))
    }
}

impl MdimSolver for TreeSolver {
    fn name(&self) -> &'static str {
        "tree"
    }

    fn applies_to(&self, g: &Graph) -> bool {
        g.n() >= 2 && g.is_tree()
    }

    fn solve(&self, g: &Graph) -> Result<Solution> {
        Ok(Solution::new(self.name(), tree_mdim(g)?))
    }
}

impl MdimSolver for OuterplanarSolver {
    fn name(&self) -> &'static str {
        "outerplanar"
    }

    fn applies_to(&self, g: &Graph) -> bool {
        g.n() >= 1 && g.is_connected() && is_outerplanar(g)
    }

    fn solve(&self, g: &Graph) -> Result<Solution> {
        let out = metric_d_with(g, self.opts)?;
        Ok(Solution { trace: out.trace, ..Solution::new(self.name(), out.landmarks) })
    }
}

impl MdimSolver for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn applies_to(&self, g: &Graph) -> bool {
        g.n() >= 2 && g.is_connected()
    }

    fn solve(&self, g: &Graph) -> Result<Solution> {
        let mut s = Solution::new(self.name(), greedy_mdim(g)?);
        s.warning = Some("greedy result is resolving but not necessarily minimum".into());
        Ok(s)
    }
}

impl MdimSolver for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn applies_to(&self, g: &Graph) -> bool {
        g.n() >= 1 && g.is_connected()
    }

    fn solve(&self, g: &Graph) -> Result<Solution> {
        g.require_connected()?;
        if TreeSolver.applies_to(g) {
            TreeSolver.solve(g)
        } else if is_outerplanar(g) {
            OuterplanarSolver { opts: DpOptions::default() }.solve(g)
        } else if g.n() <= AUTO_BRUTE_LIMIT {
            Brute.solve(g)
        } else {
            let mut s = Greedy.solve(g)?;
            s.warning = Some(format!(
                "graph is not outerplanar and has more than {AUTO_BRUTE_LIMIT} vertices; greedy result may not be minimum"
            ));
            Ok(s)
        }
    }
}

pub const NAMES: [&str; 5] = ["auto", "brute", "tree", "outerplanar", "greedy"];

pub fn solver_by_name(name: &str) -> Result<Box<dyn MdimSolver>> {
    Ok(match name {
        "auto" => Box::new(Auto),
        "brute" => Box::new(Brute),
        "tree" => Box::new(TreeSolver),
        "outerplanar" => Box::new(OuterplanarSolver { opts: DpOptions::default() }),
        "greedy" => Box::new(Greedy),
        other => return Err(MdimError::UnknownAlgorithm(other.to_string())),
    })
}

/// The exact solvers plus greedy, for cross-checking.
pub fn concrete_solvers() -> Vec<Box<dyn MdimSolver>> {
    NAMES[1..].iter().map(|n| solver_by_name(n).expect("registered")).collect()
}
