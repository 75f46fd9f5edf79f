//! Single-objective solves and epsilon-constraint sweeps.

use std::fmt;
use std::io::Write;

use heatdispatch_lp::{
    solve_lp_with, solve_milp_with, Basis, LinearProgram, LpSolution, MilpOptions, Row, Sense,
    SimplexOptions, SolveStatus, Var,
};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formulation::{
    attach_epsilon, build_dispatch, extract_solution, find_row, validate_solution, DispatchProblem,
    DispatchSolution, ObjectiveExpressions, VariableMap, EPSILON_ROW,
};

/// Relative slack on the primary objective during the lexicographic second stage.
const LEX_REL: f64 = 1e-9;
/// Relative tolerance for dominance comparisons.
pub const DOMINANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Cost,
    Emissions,
}

impl Objective {
    fn other(self) -> Self {
        match self {
            Objective::Cost => Objective::Emissions,
            Objective::Emissions => Objective::Cost,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Cost => "cost",
            Objective::Emissions => "emissions",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Reuse each interior solve's basis for the next epsilon. When off, the
    /// interior solves run in parallel.
    pub warm_start: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { warm_start: true }
    }
}

/// A built dispatch program ready for repeated solves.
#[derive(Debug, Clone)]
pub struct DispatchModel<'a> {
    problem: &'a DispatchProblem,
    lp: LinearProgram,
    map: VariableMap,
    expressions: ObjectiveExpressions,
}

impl<'a> DispatchModel<'a> {
    pub fn new(problem: &'a DispatchProblem) -> Result<Self> {
        let (lp, map, expressions) = build_dispatch(problem)?;
        Ok(Self {
            problem,
            lp,
            map,
            expressions,
        })
    }

    pub fn problem(&self) -> &DispatchProblem {
        self.problem
    }

    pub fn program(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn expressions(&self) -> &ObjectiveExpressions {
        &self.expressions
    }

    fn expression(&self, objective: Objective) -> &[(Var, f64)] {
        match objective {
            Objective::Cost => &self.expressions.cost,
            Objective::Emissions => &self.expressions.emissions,
        }
    }

    fn run(&self, lp: &LinearProgram, warm: Option<&Basis>) -> Result<LpSolution> {
        let simplex = SimplexOptions {
            warm_start: warm.cloned(),
            ..SimplexOptions::default()
        };
        Ok(if lp.binaries().is_empty() {
            solve_lp_with(lp, &simplex)?
        } else {
            solve_milp_with(
                lp,
                &MilpOptions {
                    simplex,
                    ..MilpOptions::default()
                },
            )?
        })
    }

    fn finish(&self, raw: &LpSolution) -> Result<DispatchSolution> {
        let sol = extract_solution(raw, &self.map, &self.expressions, self.problem)?;
        let violations = validate_solution(&sol, self.problem);
        if let Some(v) = violations.first() {
            return Err(Error::Consistency(format!(
                "solution fails validation ({} violations, first: {v})",
                violations.len()
            )));
        }
        Ok(sol)
    }

    /// Minimises `objective`, then the other objective with the first held
    /// at its optimum.
    pub fn solve(&self, objective: Objective) -> Result<DispatchSolution> {
        let mut lp = self.lp.clone();
        lp.set_objective(self.expression(objective).iter().copied())?;
        let first = self.run(&lp, None)?;
        if first.status != SolveStatus::Optimal {
            return self.finish(&first);
        }
        let best = first.objective_value;
        lp.add_constraint(
            format!("{objective}_optimum"),
            self.expression(objective).iter().copied(),
            Sense::Le,
            best + LEX_REL * best.abs().max(1.0),
        )?;
        lp.set_objective(self.expression(objective.other()).iter().copied())?;
        let second = self.run(&lp, first.basis())?;
        // the first stage's point is feasible for the second stage
        match second.status {
            SolveStatus::Optimal => self.finish(&second),
            _ => Err(Error::Consistency(format!(
                "tie-break stage for {objective} ended {:?}",
                second.status
            ))),
        }
    }

    fn epsilon_program(&self) -> Result<(LinearProgram, Row)> {
        let lp = attach_epsilon(&self.lp, &self.expressions, 0.0)?;
        let row = find_row(&lp, EPSILON_ROW).expect("epsilon row was just added");
        Ok((lp, row))
    }

    /// Cost-optimal dispatch with emissions at most `epsilon`; `None` when
    /// the limit is infeasible.
    pub fn solve_epsilon(&self, epsilon: f64) -> Result<Option<DispatchSolution>> {
        let (mut lp, row) = self.epsilon_program()?;
        check_epsilon(epsilon)?;
        lp.set_rhs(row, epsilon)?;
        let raw = self.run(&lp, None)?;
        match raw.status {
            SolveStatus::Infeasible => Ok(None),
            _ => self.finish(&raw).map(Some),
        }
    }

    /// Solves each epsilon in order; the result is aligned with `epsilons`.
    pub fn epsilon_sweep(
        &self,
        epsilons: &[f64],
        options: &SweepOptions,
    ) -> Result<Vec<Option<DispatchSolution>>> {
        for &e in epsilons {
            check_epsilon(e)?;
        }
        let (lp, row) = self.epsilon_program()?;
        let solve_one = |lp: &mut LinearProgram, eps: f64, warm: Option<&Basis>| -> Result<LpSolution> {
            lp.set_rhs(row, eps)?;
            self.run(lp, warm)
        };
        let raws: Vec<LpSolution> = if options.warm_start {
            let mut lp = lp;
            let mut basis: Option<Basis> = None;
            let mut out = Vec::with_capacity(epsilons.len());
            for &eps in epsilons {
                let raw = solve_one(&mut lp, eps, basis.as_ref())?;
                if let Some(b) = raw.basis() {
                    basis = Some(b.clone());
                }
                out.push(raw);
            }
            out
        } else {
            epsilons
                .par_iter()
                .map(|&eps| solve_one(&mut lp.clone(), eps, None))
                .collect::<Result<_>>()?
        };
        raws.iter()
            .map(|raw| match raw.status {
                SolveStatus::Infeasible => Ok(None),
                _ => self.finish(raw).map(Some),
            })
            .collect()
    }

    pub fn pareto_front(&self, n_points: usize, options: &SweepOptions) -> Result<ParetoFront> {
        if n_points < 2 {
            return Err(Error::Domain(format!("a front needs at least 2 points, got {n_points}")));
        }
        let emissions_optimal = self.solve(Objective::Emissions)?;
        let cost_optimal = self.solve(Objective::Cost)?;
        let e_min = emissions_optimal.emissions;
        let e_max = cost_optimal.emissions.max(e_min);
        let interior: Vec<f64> = (1..n_points - 1)
            .map(|k| e_min + (e_max - e_min) * k as f64 / (n_points - 1) as f64)
            .collect();
        let solved = self.epsilon_sweep(&interior, options)?;

        let mut sweep = Vec::with_capacity(n_points);
        sweep.push(ParetoPoint::new(0, e_min, emissions_optimal.clone()));
        for (k, (eps, sol)) in interior.iter().zip(solved).enumerate() {
            let sol = sol.ok_or_else(|| {
                Error::Consistency(format!("interior epsilon {eps} is infeasible between feasible endpoints"))
            })?;
            sweep.push(ParetoPoint::new(k + 1, *eps, sol));
        }
        sweep.push(ParetoPoint::new(n_points - 1, e_max, cost_optimal.clone()));
        let points = dominance_filter(&sweep);
        Ok(ParetoFront {
            points,
            sweep,
            cost_optimal,
            emissions_optimal,
        })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0) {
        return Err(Error::Domain(format!("emissions limit {epsilon} must be nonnegative")));
    }
    Ok(())
}

/// Builds and solves `problem` for one objective.
pub fn solve_single(problem: &DispatchProblem, objective: Objective) -> Result<DispatchSolution> {
    DispatchModel::new(problem)?
        .solve(objective)
        .map_err(|e| e.context(&format!("{objective}-optimal dispatch")))
}

pub fn pareto_front(problem: &DispatchProblem, n_points: usize, options: &SweepOptions) -> Result<ParetoFront> {
    DispatchModel::new(problem)?
        .pareto_front(n_points, options)
        .map_err(|e| e.context("pareto front"))
}

/// Anything with a cost and an emissions value.
pub trait Payoff {
    fn cost(&self) -> f64;
    fn emissions(&self) -> f64;
    fn epsilon(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub epsilon: f64,
    pub cost: f64,
    pub emissions: f64,
    /// Position in the epsilon sweep, 0 being the emissions optimum.
    pub solution_id: usize,
    pub solution: DispatchSolution,
}

impl ParetoPoint {
    fn new(solution_id: usize, epsilon: f64, solution: DispatchSolution) -> Self {
        Self {
            epsilon,
            cost: solution.cost,
            emissions: solution.emissions,
            solution_id,
            solution,
        }
    }
}

impl Payoff for ParetoPoint {
    fn cost(&self) -> f64 {
        self.cost
    }
    fn emissions(&self) -> f64 {
        self.emissions
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `(epsilon, cost, emissions)`.
impl Payoff for (f64, f64, f64) {
    fn cost(&self) -> f64 {
        self.1
    }
    fn emissions(&self) -> f64 {
        self.2
    }
    fn epsilon(&self) -> f64 {
        self.0
    }
}

fn less(a: f64, b: f64) -> bool {
    a < b - DOMINANCE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Keeps the points not weakly dominated, sorted by emissions. Among points
/// with the same payoff the one with the lowest epsilon survives.
pub fn dominance_filter<P: Payoff + Clone>(points: &[P]) -> Vec<P> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&points[i], &points[j]);
        a.emissions()
            .total_cmp(&b.emissions())
            .then(a.cost().total_cmp(&b.cost()))
            .then(a.epsilon().total_cmp(&b.epsilon()))
    });
    let mut kept: Vec<P> = Vec::new();
    for i in order {
        let p = &points[i];
        let survives = match kept.last() {
            None => true,
            Some(last) => less(p.cost(), last.cost()),
        };
        if survives {
            // an earlier kept point with equal emissions but higher cost is dominated
            while kept.last().is_some_and(|last| !less(last.emissions(), p.emissions())) {
                kept.pop();
            }
            kept.push(p.clone());
        }
    }
    kept
}

#[derive(Debug, Clone)]
pub struct ParetoFront {
    /// Non-dominated points sorted by ascending emissions.
    pub points: Vec<ParetoPoint>,
    /// Every sweep result in ascending epsilon order, before filtering.
    pub sweep: Vec<ParetoPoint>,
    pub cost_optimal: DispatchSolution,
    pub emissions_optimal: DispatchSolution,
}

impl ParetoFront {
    /// Writes `epsilon_tco2,cost_chf,emissions_tco2,solution_id`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let err = |e: csv::Error| Error::Data(format!("front export: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epsilon_tco2", "cost_chf", "emissions_tco2", "solution_id"])
            .map_err(err)?;
        for p in &self.points {
            w.write_record([
                p.epsilon.to_string(),
                p.cost.to_string(),
                p.emissions.to_string(),
                p.solution_id.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Data(format!("front export: {e}")))
    }
}
