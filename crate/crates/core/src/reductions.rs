//! CNF formulas: occurrence-pattern validation, the one-negative transform,
//! clause-variable graphs, DIMACS I/O and a truth-table solver.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{MdimError, Result};
use crate::graph::Graph;

/// Largest variable count `sat_enumerate` accepts.
pub const SAT_LIMIT: usize = 24;

/// Variables are `1..=num_vars`; a literal is `v` or `-v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for (i, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(MdimError::InvalidFormula(format!("clause {} is empty", i + 1)));
            }
            if let Some(&l) = c.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > num_vars) {
                return Err(MdimError::InvalidFormula(format!("clause {} has literal {l} outside 1..={num_vars}", i + 1)));
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let parsed = match parts[..] {
                    ["cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                    _ => None,
                };
                let Some(h) = parsed else {
                    return Err(MdimError::Parse { line: line_no, msg: format!("bad problem line '{line}'") });
                };
                if header.replace(h).is_some() {
                    return Err(MdimError::Parse { line: line_no, msg: "duplicate problem line".into() });
                }
                continue;
            }
            if header.is_none() {
                return Err(MdimError::Parse { line: line_no, msg: "clause before 'p cnf' header".into() });
            }
            for tok in line.split_whitespace() {
                let lit: i32 =
                    tok.parse().map_err(|_| MdimError::Parse { line: line_no, msg: format!("bad literal '{tok}'") })?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(lit);
                }
            }
        }
        let (num_vars, num_clauses) =
            header.ok_or_else(|| MdimError::Parse { line: 0, msg: "missing 'p cnf' header".into() })?;
        if !current.is_empty() {
            clauses.push(current);
        }
        if clauses.len() != num_clauses {
            return Err(MdimError::Parse {
                line: 0,
                msg: format!("header announces {num_clauses} clauses, found {}", clauses.len()),
            });
        }
        CnfFormula::new(num_vars, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                write!(s, "{l} ").unwrap();
            }
            s.push_str("0\n");
        }
        s
    }

    /// `assignment[v - 1]` is the value of variable `v`.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    fn distinct_vars(clause: &[i32]) -> Vec<usize> {
        let mut vs: Vec<usize> = clause.iter().map(|l| l.unsigned_abs() as usize).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Per variable: number of clauses with a positive and with a negative
    /// occurrence.
    fn occurrences(&self) -> Vec<(usize, usize)> {
        let mut occ = vec![(0, 0); self.num_vars + 1];
        for c in &self.clauses {
            let mut pos: Vec<usize> = c.iter().filter(|&&l| l > 0).map(|&l| l as usize).collect();
            let mut neg: Vec<usize> = c.iter().filter(|&&l| l < 0).map(|&l| l.unsigned_abs() as usize).collect();
            pos.sort_unstable();
            pos.dedup();
            neg.sort_unstable();
            neg.dedup();
            for v in pos {
                occ[v].0 += 1;
            }
            for v in neg {
                occ[v].1 += 1;
            }
        }
        occ
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableIssue {
    pub var: usize,
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClauseIssue {
    /// 0-based clause index.
    pub clause: usize,
    pub problem: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormulaReport {
    pub valid: bool,
    pub variables: Vec<VariableIssue>,
    pub clauses: Vec<ClauseIssue>,
}

impl FormulaReport {
    fn new(variables: Vec<VariableIssue>, clauses: Vec<ClauseIssue>) -> Self {
        FormulaReport { valid: variables.is_empty() && clauses.is_empty(), variables, clauses }
    }

    pub fn summary(&self) -> String {
        let mut parts: Vec<String> = self
            .variables
            .iter()
            .map(|v| format!("variable {} occurs {}x positive, {}x negative", v.var, v.positive, v.negative))
            .collect();
        parts.extend(self.clauses.iter().map(|c| format!("clause {}: {}", c.clause + 1, c.problem)));
        parts.join("; ")
    }
}

fn width_issues(f: &CnfFormula) -> Vec<ClauseIssue> {
    f.clauses
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let k = CnfFormula::distinct_vars(c).len();
            (!(2..=3).contains(&k)).then(|| ClauseIssue { clause: i, problem: format!("{k} distinct variables") })
        })
        .collect()
}

/// Every variable in exactly three clauses (twice positive, once negative)
/// and every clause over two or three distinct variables.
pub fn validate_dahlhaus(f: &CnfFormula) -> FormulaReport {
    let occ = f.occurrences();
    let variables = (1..=f.num_vars)
        .filter(|&v| occ[v] != (2, 1))
        .map(|v| VariableIssue { var: v, positive: occ[v].0, negative: occ[v].1 })
        .collect();
    FormulaReport::new(variables, width_issues(f))
}

/// Every variable exactly once negative and once or twice positive, clauses
/// over two or three distinct variables, and no all-positive three-variable
/// clause.
pub fn validate_one_negative(f: &CnfFormula) -> FormulaReport {
    let occ = f.occurrences();
    let variables = (1..=f.num_vars)
        .filter(|&v| occ[v].1 != 1 || !(1..=2).contains(&occ[v].0))
        .map(|v| VariableIssue { var: v, positive: occ[v].0, negative: occ[v].1 })
        .collect();
    let mut clauses = width_issues(f);
    for (i, c) in f.clauses.iter().enumerate() {
        if CnfFormula::distinct_vars(c).len() == 3 && c.iter().all(|&l| l > 0) {
            clauses.push(ClauseIssue { clause: i, problem: "three variables, no negative literal".into() });
        }
    }
    clauses.sort_by_key(|c| c.clause);
    FormulaReport::new(variables, clauses)
}

/// Splits every all-positive clause `x ∨ y ∨ z` into `x ∨ x'` and
/// `¬x' ∨ y ∨ z`. The k-th split clause gets the fresh variable
/// `num_vars + k`.
pub fn one_negative_transform(f: &CnfFormula) -> Result<CnfFormula> {
    let report = validate_dahlhaus(f);
    if !report.valid {
        return Err(MdimError::InvalidFormula(report.summary()));
    }
    let mut num_vars = f.num_vars;
    let mut clauses = Vec::with_capacity(f.clauses.len());
    for c in &f.clauses {
        if CnfFormula::distinct_vars(c).len() == 3 && c.iter().all(|&l| l > 0) {
            num_vars += 1;
            let fresh = num_vars as i32;
            clauses.push(vec![c[0], fresh]);
            let mut rest = vec![-fresh];
            rest.extend(c.iter().copied().filter(|&l| l != c[0]));
            clauses.push(rest);
        } else {
            clauses.push(c.clone());
        }
    }
    CnfFormula::new(num_vars, clauses)
}

/// Bipartite graph with variable `v` at vertex `v - 1` and clause `i`
/// (0-based) at vertex `num_vars + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseVariableGraph {
    pub graph: Graph,
    pub num_vars: usize,
    pub num_clauses: usize,
}

impl ClauseVariableGraph {
    pub fn variable_vertex(&self, v: usize) -> usize {
        v - 1
    }

    pub fn clause_vertex(&self, i: usize) -> usize {
        self.num_vars + i
    }

    pub fn is_variable(&self, x: usize) -> bool {
        x < self.num_vars
    }
}

pub fn clause_variable_graph(f: &CnfFormula) -> ClauseVariableGraph {
    let mut g = Graph::empty(f.num_vars + f.clauses.len());
    for (i, c) in f.clauses.iter().enumerate() {
        for v in CnfFormula::distinct_vars(c) {
            g.add_edge(v - 1, f.num_vars + i).expect("distinct bipartite edge");
        }
    }
    ClauseVariableGraph { graph: g, num_vars: f.num_vars, num_clauses: f.clauses.len() }
}

/// Exhaustive search in increasing order of the assignment read as a binary
/// number with variable 1 as the lowest bit. Returns the first model.
pub fn sat_enumerate(f: &CnfFormula) -> Result<Option<Vec<bool>>> {
    if f.num_vars > SAT_LIMIT {
        return Err(MdimError::TooLarge(format!("{} variables, at most {SAT_LIMIT} supported", f.num_vars)));
    }
    let masks: Vec<(u32, u32)> = f
        .clauses
        .iter()
        .map(|c| {
            c.iter().fold((0, 0), |(p, n), &l| {
                let bit = 1u32 << (l.unsigned_abs() - 1);
                if l > 0 {
                    (p | bit, n)
                } else {
                    (p, n | bit)
                }
            })
        })
        .collect();
    for a in 0u32..(1 << f.num_vars) {
        if masks.iter().all(|&(p, n)| a & p != 0 || !a & n != 0) {
            return Ok(Some((0..f.num_vars).map(|i| a >> i & 1 == 1).collect()));
        }
    }
    Ok(None)
}

/// A random formula passing `validate_dahlhaus`. Planarity of the
/// clause-variable graph is not enforced. Needs at least two variables.
pub fn random_dahlhaus_formula<R: Rng>(num_vars: usize, rng: &mut R) -> Result<CnfFormula> {
    if num_vars < 2 {
        return Err(MdimError::InvalidFormula("need at least two variables".into()));
    }
    let total = 3 * num_vars;
    loop {
        let mut lits: Vec<i32> = (1..=num_vars as i32).flat_map(|v| [v, v, -v]).collect();
        lits.shuffle(rng);
        // Split into widths 2 and 3 summing to the occurrence count.
        let mut widths = Vec::new();
        let mut left = total;
        while left > 0 {
            let w = match left {
                2 | 3 => left,
                4 => 2,
                _ => rng.gen_range(2..=3),
            };
            widths.push(w);
            left -= w;
        }
        let mut clauses = Vec::with_capacity(widths.len());
        let mut at = 0;
        for w in widths {
            clauses.push(lits[at..at + w].to_vec());
            at += w;
        }
        if clauses.iter().all(|c| CnfFormula::distinct_vars(c).len() == c.len()) {
            return CnfFormula::new(num_vars, clauses);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cnf(n: usize, c: &[&[i32]]) -> CnfFormula {
        CnfFormula::new(n, c.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn rejects_malformed() {
        assert!(CnfFormula::new(2, vec![vec![]]).is_err());
        assert!(CnfFormula::new(2, vec![vec![3]]).is_err());
        assert!(CnfFormula::new(2, vec![vec![0]]).is_err());
    }

    #[test]
    fn dahlhaus_validation() {
        let bad = cnf(3, &[&[1, 2], &[1, -2, 3]]);
        let r = validate_dahlhaus(&bad);
        assert!(!r.valid);
        assert_eq!(r.variables[0], VariableIssue { var: 1, positive: 2, negative: 0 });
        // each variable twice positive and once negative
        let good = cnf(3, &[&[1, 2, 3], &[1, 2, -3], &[-1, -2, 3]]);
        assert!(validate_dahlhaus(&good).valid, "{:?}", validate_dahlhaus(&good));
        assert!(validate_dahlhaus(&cnf(0, &[])).valid);
        let narrow = cnf(2, &[&[1, 1], &[1, 2], &[-1, 2], &[-2]]);
        assert!(validate_dahlhaus(&narrow).clauses.iter().any(|c| c.clause == 0));
    }

    #[test]
    fn transform_splits_positive_clause() {
        let f = cnf(3, &[&[1, 2, 3], &[1, 2, -3], &[-1, -2, 3]]);
        let t = one_negative_transform(&f).unwrap();
        assert_eq!(t.num_vars, 4);
        assert_eq!(t.clauses, vec![vec![1, 4], vec![-4, 2, 3], vec![1, 2, -3], vec![-1, -2, 3]]);
        assert!(validate_one_negative(&t).valid);
        let plain = cnf(2, &[&[1, 2], &[1, -2], &[-1, 2]]);
        assert_eq!(one_negative_transform(&plain).unwrap(), plain);
        assert!(matches!(one_negative_transform(&cnf(2, &[&[1, 2]])), Err(MdimError::InvalidFormula(_))));
    }

    #[test]
    fn transform_keeps_unsatisfiable_formula_unsatisfiable() {
        let f = CnfFormula::parse_dimacs(
            "p cnf 8 11\n2 1 5 0\n7 4 0\n5 3 0\n8 -5 0\n6 -7 0\n-4 -8 0\n8 6 3 0\n2 -1 0\n4 -6 0\n1 7 0\n-2 -3 0\n",
        )
        .unwrap();
        assert!(validate_dahlhaus(&f).valid);
        assert_eq!(sat_enumerate(&f).unwrap(), None);
        let t = one_negative_transform(&f).unwrap();
        assert_eq!(t.num_vars, 10);
        assert_eq!(sat_enumerate(&t).unwrap(), None);
    }

    #[test]
    fn clause_variable_graph_examples() {
        let g = clause_variable_graph(&cnf(2, &[&[1, 2]]));
        assert_eq!(g.graph.n(), 3);
        assert_eq!(g.graph.m(), 2);
        assert_eq!(g.graph.degree(2), 2);
        let g = clause_variable_graph(&cnf(3, &[&[1, 2], &[2, 3]]));
        let e = [(0, 3), (1, 3), (1, 4), (2, 4)];
        assert!(e.iter().all(|&(a, b)| g.graph.has_edge(a, b)) && g.graph.m() == 4);
        let f = cnf(4, &[&[-1, 2], &[1, -2, 3], &[2, 4, -3], &[-4, 3]]);
        let g = clause_variable_graph(&f);
        assert_eq!((g.graph.n(), g.graph.m()), (8, 10));
        let repeated = clause_variable_graph(&cnf(2, &[&[1, -1, 2]]));
        assert_eq!(repeated.graph.m(), 2);
    }

    #[test]
    fn sat_examples() {
        assert_eq!(sat_enumerate(&cnf(1, &[&[1], &[-1]])).unwrap(), None);
        assert_eq!(sat_enumerate(&cnf(2, &[&[1, 2]])).unwrap(), Some(vec![true, false]));
        assert!(matches!(sat_enumerate(&CnfFormula::new(25, vec![]).unwrap()), Err(MdimError::TooLarge(_))));
    }

    #[test]
    fn dimacs_round_trip() {
        let f = cnf(4, &[&[-1, 2], &[1, -2, 3], &[2, 4, -3], &[-4, 3]]);
        let text = f.to_dimacs();
        assert_eq!(CnfFormula::parse_dimacs(&text).unwrap(), f);
        let with_comments = "c hello\np cnf 2 2\n1 -2\n 0 2\n0\n";
        assert_eq!(CnfFormula::parse_dimacs(with_comments).unwrap(), cnf(2, &[&[1, -2], &[2]]));
        assert!(CnfFormula::parse_dimacs("p cnf 2 3\n1 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("1 2 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf 2 1\n1 x 0\n").is_err());
    }

    #[test]
    fn generator_meets_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..12 {
            let f = random_dahlhaus_formula(n, &mut rng).unwrap();
            assert!(validate_dahlhaus(&f).valid, "{f:?}");
        }
        assert!(random_dahlhaus_formula(1, &mut rng).is_err());
    }
}
