//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a logical variable `r_i` so the constraints read
//! `A x - r = 0` with `r_i` bounded by the row sense. Phase one minimises the
//! sum of bound violations of the basic variables, phase two the objective.
//! Pricing is Dantzig's rule; after a run of degenerate pivots Bland's rule
//! takes over until the objective moves again.

use crate::error::{LpError, Result};
use crate::lu::{BasisFactor, SparseColumns};
use crate::problem::{LinearProgram, Sense};

const NONBASIC: usize = usize::MAX;
/// Primal feasibility tolerance (absolute) and Harris relaxation width.
const FEAS_TOL: f64 = 1e-9;
/// Reduced-cost optimality tolerance.
const DUAL_TOL: f64 = 1e-9;
/// Entries of the transformed column below this are never pivots.
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

/// Basic/nonbasic status of every variable and constraint row, usable as a
/// warm start for a later solve of the same or an extended program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    pub(crate) vars: Vec<VarStatus>,
    pub(crate) rows: Vec<VarStatus>,
}

impl Basis {
    pub fn num_variables(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Defaults to `100 * (rows + columns) + 10_000`.
    pub max_iterations: Option<usize>,
    /// Basis changes between two LU refactorisations.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before Bland's rule is engaged.
    pub stall_threshold: usize,
    pub warm_start: Option<Basis>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: None,
            refactor_interval: 100,
            stall_threshold: 50,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: SolveStatus,
    /// One value per variable, aligned with [`LinearProgram::variables`].
    pub values: Vec<f64>,
    /// `+inf` when infeasible, `-inf` when unbounded.
    pub objective_value: f64,
    pub iterations: usize,
    pub(crate) duals: Option<Vec<f64>>,
    pub(crate) basis: Option<Basis>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Final basis of an LP solve, for warm-starting a related program.
    pub fn basis(&self) -> Option<&Basis> {
        self.basis.as_ref()
    }
}

/// The program in computational form: structural columns over the nonempty
/// rows plus bounds for structural and logical variables.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub n: usize,
    pub m: usize,
    pub cols: SparseColumns,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// original constraint -> internal row (`None` for empty rows)
    pub row_of: Vec<Option<usize>>,
    pub trivially_infeasible: bool,
}

impl StandardForm {
    pub fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_variables();
        let mut row_of = Vec::with_capacity(lp.num_constraints());
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut row_lower = Vec::new();
        let mut row_upper = Vec::new();
        let mut trivially_infeasible = false;

        for c in lp.constraints() {
            let mut coeffs: Vec<(usize, f64)> =
                c.coefficients.iter().map(|&(v, a)| (v.index(), a)).collect();
            coeffs.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
            for (j, a) in coeffs {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|&(_, a)| a != 0.0);
            if merged.is_empty() {
                if c.violation(&vec![0.0; n]) > FEAS_TOL {
                    trivially_infeasible = true;
                }
                row_of.push(None);
                continue;
            }
            row_of.push(Some(rows.len()));
            let (lo, hi) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            row_lower.push(lo);
            row_upper.push(hi);
            rows.push(merged);
        }

        let m = rows.len();
        let mut counts = vec![0usize; n];
        for r in &rows {
            for &(j, _) in r {
                counts[j] += 1;
            }
        }
        let mut ptr = vec![0usize; n + 1];
        for j in 0..n {
            ptr[j + 1] = ptr[j] + counts[j];
        }
        let nnz = ptr[n];
        let mut idx = vec![0usize; nnz];
        let mut val = vec![0.0; nnz];
        let mut fill = ptr.clone();
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in r {
                idx[fill[j]] = i;
                val[fill[j]] = a;
                fill[j] += 1;
            }
        }

        let mut cost = vec![0.0; n];
        for &(v, c) in lp.objective() {
            cost[v.index()] += c;
        }
        let mut lower: Vec<f64> = lp.variables().iter().map(|d| d.lower).collect();
        let mut upper: Vec<f64> = lp.variables().iter().map(|d| d.upper).collect();
        lower.extend(row_lower);
        upper.extend(row_upper);

        Self {
            n,
            m,
            cols: SparseColumns { ptr, idx, val },
            cost,
            lower,
            upper,
            row_of,
            trivially_infeasible,
        }
    }
}

pub(crate) struct RawSolution {
    pub status: SolveStatus,
    /// structural and logical values
    pub x: Vec<f64>,
    /// internal row duals, present when optimal
    pub duals: Option<Vec<f64>>,
    pub basis: Basis,
    pub iterations: usize,
}

impl RawSolution {
    pub fn objective(&self, sf: &StandardForm) -> f64 {
        match self.status {
            SolveStatus::Optimal => sf.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum(),
            SolveStatus::Infeasible => f64::INFINITY,
            SolveStatus::Unbounded => f64::NEG_INFINITY,
        }
    }
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { pos: usize, theta: f64, target: f64, to_upper: bool },
}

struct Simplex<'a> {
    sf: &'a StandardForm,
    m: usize,
    n: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    pos_of: Vec<usize>,
    x: Vec<f64>,
    factor: Option<BasisFactor>,
    fresh: bool,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
    repairs: usize,
    opts: &'a SimplexOptions,
}

pub(crate) fn solve_standard(
    sf: &StandardForm,
    lower: Vec<f64>,
    upper: Vec<f64>,
    warm: Option<&Basis>,
    opts: &SimplexOptions,
) -> Result<RawSolution> {
    let mut s = Simplex::new(sf, lower, upper, opts);
    if sf.trivially_infeasible || s.lower.iter().zip(&s.upper).any(|(l, u)| l > u) {
        return Ok(s.finish(SolveStatus::Infeasible, None));
    }
    s.initial_basis(warm);
    s.refactor()?;
    let (status, duals) = s.run()?;
    Ok(s.finish(status, duals))
}

impl<'a> Simplex<'a> {
    fn new(sf: &'a StandardForm, lower: Vec<f64>, upper: Vec<f64>, opts: &'a SimplexOptions) -> Self {
        let total = sf.n + sf.m;
        Self {
            sf,
            m: sf.m,
            n: sf.n,
            lower,
            upper,
            status: vec![VarStatus::AtLower; total],
            basis: Vec::with_capacity(sf.m),
            pos_of: vec![NONBASIC; total],
            x: vec![0.0; total],
            factor: None,
            fresh: false,
            iterations: 0,
            degenerate_run: 0,
            bland: false,
            repairs: 0,
            opts,
        }
    }

    fn nonbasic_status(&self, j: usize, prefer: VarStatus) -> VarStatus {
        let (l, u) = (self.lower[j], self.upper[j]);
        match prefer {
            VarStatus::AtUpper if u.is_finite() => VarStatus::AtUpper,
            _ if l.is_finite() => VarStatus::AtLower,
            _ if u.is_finite() => VarStatus::AtUpper,
            _ => VarStatus::Free,
        }
    }

    fn set_nonbasic(&mut self, j: usize, st: VarStatus) {
        self.status[j] = st;
        self.pos_of[j] = NONBASIC;
        self.x[j] = match st {
            VarStatus::AtLower => self.lower[j],
            VarStatus::AtUpper => self.upper[j],
            _ => 0.0,
        };
    }

    fn initial_basis(&mut self, warm: Option<&Basis>) {
        let (n, m) = (self.n, self.m);
        let mut wanted = vec![VarStatus::AtLower; n + m];
        for w in wanted.iter_mut().skip(n) {
            *w = VarStatus::Basic;
        }
        if let Some(b) = warm.filter(|b| b.vars.len() == n) {
            wanted[..n].copy_from_slice(&b.vars);
            for (k, r) in self.sf.row_of.iter().enumerate() {
                if let (Some(i), Some(&st)) = (r, b.rows.get(k)) {
                    wanted[n + i] = st;
                }
            }
        }

        let mut basics: Vec<usize> = (0..n + m)
            .filter(|&j| wanted[j] == VarStatus::Basic)
            .collect();
        if basics.len() > m {
            for &j in &basics[m..] {
                wanted[j] = VarStatus::AtLower;
            }
            basics.truncate(m);
        }
        let mut i = 0;
        while basics.len() < m {
            if wanted[n + i] != VarStatus::Basic {
                wanted[n + i] = VarStatus::Basic;
                basics.push(n + i);
            }
            i += 1;
        }

        for j in 0..n + m {
            if wanted[j] != VarStatus::Basic {
                let st = self.nonbasic_status(j, wanted[j]);
                self.set_nonbasic(j, st);
            }
        }
        self.basis = basics;
        for (p, &j) in self.basis.iter().enumerate() {
            self.status[j] = VarStatus::Basic;
            self.pos_of[j] = p;
        }
    }

    fn reset_to_slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in 0..n + m {
            let st = self.nonbasic_status(j, VarStatus::AtLower);
            self.set_nonbasic(j, st);
        }
        self.basis = (n..n + m).collect();
        for (p, &j) in self.basis.iter().enumerate() {
            self.status[j] = VarStatus::Basic;
            self.pos_of[j] = p;
        }
    }

    fn basis_columns(&self) -> SparseColumns {
        let mut cols = SparseColumns::new();
        for &j in &self.basis {
            if j < self.n {
                let (idx, val) = self.sf.cols.column(j);
                cols.push_column(idx.iter().copied().zip(val.iter().copied()));
            } else {
                cols.push_column([(j - self.n, -1.0)]);
            }
        }
        cols
    }

    fn refactor(&mut self) -> Result<()> {
        loop {
            match BasisFactor::new(self.m, &self.basis_columns()) {
                Ok(f) => {
                    self.factor = Some(f);
                    break;
                }
                Err(sing) => {
                    self.repairs += 1;
                    if self.repairs > 20 {
                        return Err(LpError::NumericalBreakdown {
                            iterations: self.iterations,
                            detail: "basis stays singular after repeated repairs".into(),
                        });
                    }
                    let clash = sing
                        .free_rows
                        .iter()
                        .any(|&r| self.status[self.n + r] == VarStatus::Basic);
                    if clash {
                        self.reset_to_slack_basis();
                        continue;
                    }
                    for (&p, &r) in sing.positions.iter().zip(&sing.free_rows) {
                        let out = self.basis[p];
                        let prefer = if (self.upper[out] - self.x[out]).abs()
                            < (self.x[out] - self.lower[out]).abs()
                        {
                            VarStatus::AtUpper
                        } else {
                            VarStatus::AtLower
                        };
                        let st = self.nonbasic_status(out, prefer);
                        self.set_nonbasic(out, st);
                        let inn = self.n + r;
                        self.basis[p] = inn;
                        self.status[inn] = VarStatus::Basic;
                        self.pos_of[inn] = p;
                    }
                }
            }
        }
        self.recompute_basic_values();
        self.fresh = true;
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.status[j] == VarStatus::Basic || self.x[j] == 0.0 {
                continue;
            }
            if j < self.n {
                let (idx, val) = self.sf.cols.column(j);
                for (&i, &a) in idx.iter().zip(val) {
                    rhs[i] -= a * self.x[j];
                }
            } else {
                rhs[j - self.n] += self.x[j];
            }
        }
        self.factor.as_mut().expect("factorised").ftran(&mut rhs);
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[p];
        }
    }

    /// Phase-appropriate basic costs; returns true while infeasible.
    fn basic_costs(&self, cb: &mut [f64]) -> bool {
        let mut infeasible = false;
        for (p, &j) in self.basis.iter().enumerate() {
            let xj = self.x[j];
            cb[p] = if xj < self.lower[j] - FEAS_TOL {
                infeasible = true;
                -1.0
            } else if xj > self.upper[j] + FEAS_TOL {
                infeasible = true;
                1.0
            } else {
                0.0
            };
        }
        if !infeasible {
            for (p, &j) in self.basis.iter().enumerate() {
                cb[p] = self.cost(j);
            }
        }
        infeasible
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.sf.cost[j]
        } else {
            0.0
        }
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase_one: bool) -> f64 {
        if j < self.n {
            let (idx, val) = self.sf.cols.column(j);
            let dot: f64 = idx.iter().zip(val).map(|(&i, &a)| a * y[i]).sum();
            let c = if phase_one { 0.0 } else { self.sf.cost[j] };
            c - dot
        } else {
            y[j - self.n]
        }
    }

    /// Entering variable and its direction of movement (+1 up, -1 down).
    fn price(&self, y: &[f64], phase_one: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            let st = self.status[j];
            if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, y, phase_one);
            let dir = match st {
                VarStatus::AtLower if d < -DUAL_TOL => 1.0,
                VarStatus::AtUpper if d > DUAL_TOL => -1.0,
                VarStatus::Free if d.abs() > DUAL_TOL => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn scatter_column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            let (idx, val) = self.sf.cols.column(j);
            for (&i, &a) in idx.iter().zip(val) {
                out[i] = a;
            }
        } else {
            out[j - self.n] = -1.0;
        }
    }

    /// Bound the basic variable at `p` runs into when it changes at `rate`
    /// per unit step, as (exact ratio, relaxed ratio, bound, is upper).
    fn breakpoint(&self, p: usize, rate: f64) -> Option<(f64, f64, f64, bool)> {
        let j = self.basis[p];
        let (xj, l, u) = (self.x[j], self.lower[j], self.upper[j]);
        let (target, to_upper) = if rate > 0.0 {
            if xj < l - FEAS_TOL {
                (l, false)
            } else if xj <= u + FEAS_TOL && u.is_finite() {
                (u, true)
            } else {
                return None;
            }
        } else if xj > u + FEAS_TOL {
            (u, true)
        } else if xj >= l - FEAS_TOL && l.is_finite() {
            (l, false)
        } else {
            return None;
        };
        let exact = ((target - xj) / rate).max(0.0);
        let relaxed = ((target + FEAS_TOL * rate.signum() - xj) / rate).max(0.0);
        Some((exact, relaxed, target, to_upper))
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64]) -> Step {
        let range = self.upper[q] - self.lower[q];
        let mut theta_max = f64::INFINITY;
        let mut candidates = Vec::new();
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some(bp) = self.breakpoint(p, -dir * a) {
                let limit = if self.bland { bp.0 } else { bp.1 };
                theta_max = theta_max.min(limit);
                candidates.push((p, bp));
            }
        }
        if candidates.is_empty() {
            return if range.is_finite() {
                Step::Flip(range)
            } else {
                Step::Unbounded
            };
        }
        if range <= theta_max {
            return Step::Flip(range);
        }

        let mut chosen: Option<(usize, (f64, f64, f64, bool))> = None;
        for &(p, bp) in &candidates {
            let better = match chosen {
                None => true,
                Some((cp, cbp)) => {
                    if self.bland {
                        bp.0 < cbp.0 - DEGENERATE_STEP
                            || (bp.0 <= cbp.0 + DEGENERATE_STEP && self.basis[p] < self.basis[cp])
                    } else {
                        let (a, ca) = (alpha[p].abs(), alpha[cp].abs());
                        a > ca || (a == ca && self.basis[p] < self.basis[cp])
                    }
                }
            };
            if (self.bland || bp.0 <= theta_max) && better {
                chosen = Some((p, bp));
            }
        }
        let (pos, (theta, _, target, to_upper)) = chosen.expect("a candidate within theta_max");
        Step::Pivot {
            pos,
            theta,
            target,
            to_upper,
        }
    }

    fn run(&mut self) -> Result<(SolveStatus, Option<Vec<f64>>)> {
        let (m, n) = (self.m, self.n);
        let max_iter = self
            .opts
            .max_iterations
            .unwrap_or(100 * (m + n) + 10_000);
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];

        loop {
            {
                let f = self.factor.as_ref().expect("factorised");
                if f.num_updates() >= self.opts.refactor_interval.max(1) || f.is_bloated() {
                    self.refactor()?;
                }
            }
            let phase_one = self.basic_costs(&mut y);
            self.factor.as_mut().expect("factorised").btran(&mut y);

            let Some((q, dir)) = self.price(&y, phase_one) else {
                if !self.fresh {
                    self.refactor()?;
                    continue;
                }
                return Ok(if phase_one {
                    (SolveStatus::Infeasible, None)
                } else {
                    (SolveStatus::Optimal, Some(y))
                });
            };

            if self.iterations >= max_iter {
                return Err(LpError::IterationLimit(max_iter));
            }

            self.scatter_column(q, &mut alpha);
            self.factor.as_mut().expect("factorised").ftran(&mut alpha);

            match self.ratio_test(q, dir, &alpha) {
                Step::Unbounded => {
                    if !self.fresh {
                        self.refactor()?;
                        continue;
                    }
                    if phase_one {
                        return Err(LpError::NumericalBreakdown {
                            iterations: self.iterations,
                            detail: format!("no limiting row for entering column {q} in phase one"),
                        });
                    }
                    return Ok((SolveStatus::Unbounded, None));
                }
                Step::Flip(range) => {
                    let delta = dir * range;
                    self.x[q] += delta;
                    self.status[q] = if dir > 0.0 {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                    for (p, &a) in alpha.iter().enumerate() {
                        if a != 0.0 {
                            self.x[self.basis[p]] -= delta * a;
                        }
                    }
                    self.note_step(range);
                }
                Step::Pivot {
                    pos,
                    theta,
                    target,
                    to_upper,
                } => {
                    let delta = dir * theta;
                    if delta != 0.0 {
                        self.x[q] += delta;
                        for (p, &a) in alpha.iter().enumerate() {
                            if a != 0.0 {
                                self.x[self.basis[p]] -= delta * a;
                            }
                        }
                    }
                    let out = self.basis[pos];
                    self.status[out] = if to_upper {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                    self.pos_of[out] = NONBASIC;
                    self.x[out] = target;
                    self.basis[pos] = q;
                    self.status[q] = VarStatus::Basic;
                    self.pos_of[q] = pos;
                    self.factor.as_mut().expect("factorised").update(pos, &alpha);
                    self.note_step(theta);
                }
            }
            self.iterations += 1;
            self.fresh = false;
        }
    }

    fn note_step(&mut self, theta: f64) {
        if theta <= DEGENERATE_STEP {
            self.degenerate_run += 1;
            if self.degenerate_run >= self.opts.stall_threshold {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    fn finish(mut self, status: SolveStatus, duals: Option<Vec<f64>>) -> RawSolution {
        if status == SolveStatus::Optimal {
            for j in 0..self.n + self.m {
                let (l, u) = (self.lower[j], self.upper[j]);
                self.x[j] = self.x[j].clamp(l, u);
            }
        }
        let n = self.n;
        let rows = self
            .sf
            .row_of
            .iter()
            .map(|r| r.map_or(VarStatus::Basic, |i| self.status[n + i]))
            .collect();
        RawSolution {
            status,
            x: self.x,
            duals,
            basis: Basis {
                vars: self.status[..n].to_vec(),
                rows,
            },
            iterations: self.iterations,
        }
    }
}

/// Solves the continuous relaxation of `lp` (binaries are treated as `[0, 1]`).
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution> {
    let sf = StandardForm::new(lp);
    let raw = solve_standard(&sf, sf.lower.clone(), sf.upper.clone(), opts.warm_start.as_ref(), opts)?;
    let objective_value = raw.objective(&sf);
    let duals = raw.duals.as_ref().map(|y| {
        sf.row_of
            .iter()
            .map(|r| r.map_or(0.0, |i| y[i]))
            .collect()
    });
    let mut values = raw.x;
    values.truncate(sf.n);
    Ok(LpSolution {
        status: raw.status,
        values,
        objective_value,
        iterations: raw.iterations,
        duals,
        basis: Some(raw.basis),
    })
}

/// Row duals of an optimal pure-LP solve: the objective's sensitivity to each
/// right-hand side, so `>=` rows carry nonnegative and `<=` rows nonpositive
/// values.
pub fn dual_values(lp: &LinearProgram, solution: &LpSolution) -> Result<Vec<f64>> {
    if solution.status != SolveStatus::Optimal {
        return Err(LpError::NotOptimal);
    }
    let duals = solution.duals.as_ref().ok_or(LpError::Unsupported(
        "dual values are only defined for pure LP solves",
    ))?;
    if duals.len() != lp.num_constraints() {
        return Err(LpError::Unsupported("solution belongs to a different program"));
    }
    Ok(duals.clone())
}

/// Value of the dual objective for row duals `duals`: right-hand sides
/// weighted by their duals plus the bound terms of the reduced costs.
/// Returns `-inf` when a reduced cost pushes against an infinite bound.
pub fn dual_objective(lp: &LinearProgram, duals: &[f64]) -> f64 {
    let mut reduced = vec![0.0; lp.num_variables()];
    for &(v, c) in lp.objective() {
        reduced[v.index()] += c;
    }
    let mut value = 0.0;
    for (c, &y) in lp.constraints().iter().zip(duals) {
        value += y * c.rhs;
        for &(v, a) in &c.coefficients {
            reduced[v.index()] -= y * a;
        }
    }
    for (def, &d) in lp.variables().iter().zip(&reduced) {
        if d > DUAL_TOL {
            value += d * def.lower;
        } else if d < -DUAL_TOL {
            if def.upper.is_infinite() {
                return f64::NEG_INFINITY;
            }
            value += d * def.upper;
        }
    }
    value
}
