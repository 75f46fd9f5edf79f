//! Best-bound branch-and-bound over the declared binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LpError, Result};
use crate::problem::LinearProgram;
use crate::simplex::{solve_standard, Basis, LpSolution, SimplexOptions, SolveStatus, StandardForm};

#[derive(Debug, Clone)]
pub struct MilpOptions {
    pub max_nodes: usize,
    /// Distance from 0 or 1 below which a binary counts as integral.
    pub integrality_tol: f64,
    /// Nodes whose bound is within this relative gap of the incumbent are pruned.
    pub gap_tol: f64,
    pub simplex: SimplexOptions,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            max_nodes: 100_000,
            integrality_tol: 1e-6,
            gap_tol: 1e-9,
            simplex: SimplexOptions::default(),
        }
    }
}

struct Node {
    bound: f64,
    id: usize,
    /// (variable index, fixed value)
    fixings: Vec<(usize, f64)>,
    warm: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: the smallest bound, then the oldest node, is
    // the greatest element.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

pub fn solve_milp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_milp_with(lp, &MilpOptions::default())
}

pub fn solve_milp_with(lp: &LinearProgram, opts: &MilpOptions) -> Result<LpSolution> {
    let sf = StandardForm::new(lp);
    let binaries: Vec<usize> = lp.binaries().iter().map(|v| v.index()).collect();

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: 0,
        fixings: Vec::new(),
        warm: opts.simplex.warm_start.clone(),
    });
    let mut next_id = 1;
    let mut nodes = 0;
    let mut iterations = 0;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - opts.gap_tol * best.abs().max(1.0) {
                break;
            }
        }
        if nodes >= opts.max_nodes {
            return Err(LpError::NodeLimit {
                nodes,
                incumbent: incumbent.map(|(v, _)| v),
                bound: node.bound,
            });
        }
        nodes += 1;

        let mut lower = sf.lower.clone();
        let mut upper = sf.upper.clone();
        for &(j, v) in &node.fixings {
            lower[j] = v;
            upper[j] = v;
        }
        let raw = solve_standard(&sf, lower, upper, node.warm.as_ref(), &opts.simplex)?;
        iterations += raw.iterations;
        match raw.status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                return Ok(LpSolution {
                    status: SolveStatus::Unbounded,
                    values: raw.x[..sf.n].to_vec(),
                    objective_value: f64::NEG_INFINITY,
                    iterations,
                    duals: None,
                    basis: None,
                })
            }
            SolveStatus::Optimal => {}
        }
        let objective = raw.objective(&sf);
        if let Some((best, _)) = &incumbent {
            if objective >= best - opts.gap_tol * best.abs().max(1.0) {
                continue;
            }
        }

        let mut branch: Option<(usize, f64)> = None;
        for &j in &binaries {
            let v = raw.x[j];
            let frac = v.min(1.0 - v);
            if frac > opts.integrality_tol && branch.is_none_or(|(_, f)| frac > f) {
                branch = Some((j, frac));
            }
        }
        match branch {
            None => {
                let mut values = raw.x[..sf.n].to_vec();
                for &j in &binaries {
                    values[j] = values[j].round();
                }
                incumbent = Some((objective, values));
            }
            Some((j, _)) => {
                for fix in [0.0, 1.0] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, fix));
                    heap.push(Node {
                        bound: objective,
                        id: next_id,
                        fixings,
                        warm: Some(raw.basis.clone()),
                    });
                    next_id += 1;
                }
            }
        }
    }

    Ok(match incumbent {
        Some((_, values)) => LpSolution {
            status: SolveStatus::Optimal,
            objective_value: lp.objective_value(&values),
            values,
            iterations,
            duals: None,
            basis: None,
        },
        None => LpSolution {
            status: SolveStatus::Infeasible,
            values: vec![0.0; sf.n],
            objective_value: f64::INFINITY,
            iterations,
            duals: None,
            basis: None,
        },
    })
}
