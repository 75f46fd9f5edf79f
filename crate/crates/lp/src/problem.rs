//! Model-building side of the solver: variables, rows, objective and binaries.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use crate::error::{LpError, Result};

/// Dense, stable handle to a variable of a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub(crate) usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Handle to a constraint row of a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Row(pub(crate) usize);

impl Row {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coefficients: Vec<(Var, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|&(v, a)| a * values[v.0])
            .sum()
    }

    /// Violation of the row at `values`, zero when satisfied.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let act = self.activity(values);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// A minimisation linear program with optional binary variables.
///
/// Lower bounds are finite, upper bounds may be `f64::INFINITY`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    variables: Vec<VariableDef>,
    var_names: HashMap<String, Var>,
    constraints: Vec<Constraint>,
    row_names: HashSet<String>,
    objective: Vec<(Var, f64)>,
    binaries: BTreeSet<Var>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<Var> {
        let name = name.into();
        check_bounds(&name, lower, upper)?;
        if self.var_names.contains_key(&name) {
            return Err(LpError::DuplicateVariable(name));
        }
        let var = Var(self.variables.len());
        self.var_names.insert(name.clone(), var);
        self.variables.push(VariableDef { name, lower, upper });
        Ok(var)
    }

    /// Adds a variable with bounds `[0, 1]` and declares it binary.
    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<Var> {
        let var = self.add_variable(name, 0.0, 1.0)?;
        self.binaries.insert(var);
        Ok(var)
    }

    pub fn mark_binary(&mut self, var: Var) -> Result<()> {
        let def = self.def(var)?;
        if def.lower < 0.0 || def.upper > 1.0 {
            return Err(LpError::BinaryBounds(def.name.clone()));
        }
        self.binaries.insert(var);
        Ok(())
    }

    pub fn set_bounds(&mut self, var: Var, lower: f64, upper: f64) -> Result<()> {
        let name = self.def(var)?.name.clone();
        check_bounds(&name, lower, upper)?;
        if self.binaries.contains(&var) && (lower < 0.0 || upper > 1.0) {
            return Err(LpError::BinaryBounds(name));
        }
        let def = &mut self.variables[var.0];
        def.lower = lower;
        def.upper = upper;
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coefficients: impl IntoIterator<Item = (Var, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<Row> {
        let name = name.into();
        if !rhs.is_finite() {
            return Err(LpError::NonFinite(format!("right-hand side of `{name}`")));
        }
        let coefficients: Vec<_> = coefficients.into_iter().collect();
        self.check_coefficients(&coefficients, &name)?;
        if !self.row_names.insert(name.clone()) {
            return Err(LpError::DuplicateConstraint(name));
        }
        let row = Row(self.constraints.len());
        self.constraints.push(Constraint {
            name,
            coefficients,
            sense,
            rhs,
        });
        Ok(row)
    }

    pub fn set_rhs(&mut self, row: Row, rhs: f64) -> Result<()> {
        if !rhs.is_finite() {
            return Err(LpError::NonFinite("right-hand side".into()));
        }
        self.constraints
            .get_mut(row.0)
            .ok_or(LpError::UnknownConstraint(row.0))?
            .rhs = rhs;
        Ok(())
    }

    pub fn set_objective(&mut self, coefficients: impl IntoIterator<Item = (Var, f64)>) -> Result<()> {
        let coefficients: Vec<_> = coefficients.into_iter().collect();
        self.check_coefficients(&coefficients, "objective")?;
        self.objective = coefficients;
        Ok(())
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variables(&self) -> &[VariableDef] {
        &self.variables
    }

    pub fn variable(&self, var: Var) -> &VariableDef {
        &self.variables[var.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<Var> {
        self.var_names.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn rows(&self) -> impl Iterator<Item = Row> {
        (0..self.constraints.len()).map(Row)
    }

    pub fn constraint(&self, row: Row) -> &Constraint {
        &self.constraints[row.0]
    }

    pub fn objective(&self) -> &[(Var, f64)] {
        &self.objective
    }

    pub fn binaries(&self) -> &BTreeSet<Var> {
        &self.binaries
    }

    pub fn is_binary(&self, var: Var) -> bool {
        self.binaries.contains(&var)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Largest bound or row violation of `values`, in absolute terms.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(d, &x)| (d.lower - x).max(x - d.upper).max(0.0));
        let rows = self.constraints.iter().map(|c| c.violation(values));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    /// Writes the program in a fixed-order plain-text LP format.
    ///
    /// The output only depends on the program contents, so two identical
    /// programs always produce identical bytes.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ heatdispatch linear program\nMinimize\n obj:");
        self.write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            self.write_terms(&mut out, &c.coefficients);
            let _ = writeln!(out, " {} {}", c.sense, c.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            if v.upper.is_infinite() {
                let _ = writeln!(out, " {} >= {}", v.name, v.lower);
            } else if v.lower == v.upper {
                let _ = writeln!(out, " {} = {}", v.name, v.lower);
            } else {
                let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
            }
        }
        if !self.binaries.is_empty() {
            out.push_str("Binaries\n");
            for b in &self.binaries {
                let _ = writeln!(out, " {}", self.variables[b.0].name);
            }
        }
        out.push_str("End\n");
        out
    }

    fn write_terms(&self, out: &mut String, terms: &[(Var, f64)]) {
        if terms.is_empty() {
            out.push_str(" 0");
            return;
        }
        for (k, &(v, a)) in terms.iter().enumerate() {
            let name = &self.variables[v.0].name;
            let sign = if a < 0.0 { '-' } else { '+' };
            if k == 0 && sign == '+' {
                let _ = write!(out, " {} {}", a, name);
            } else {
                let _ = write!(out, " {} {} {}", sign, a.abs(), name);
            }
        }
    }

    fn def(&self, var: Var) -> Result<&VariableDef> {
        self.variables
            .get(var.0)
            .ok_or(LpError::UnknownVariable(var.0))
    }

    fn check_coefficients(&self, coefficients: &[(Var, f64)], context: &str) -> Result<()> {
        for &(v, a) in coefficients {
            if v.0 >= self.variables.len() {
                return Err(LpError::UnknownVariable(v.0));
            }
            if !a.is_finite() {
                return Err(LpError::NonFinite(format!("coefficient in `{context}`")));
            }
        }
        Ok(())
    }
}

fn check_bounds(name: &str, lower: f64, upper: f64) -> Result<()> {
    if !lower.is_finite() || upper.is_nan() || upper == f64::NEG_INFINITY {
        return Err(LpError::NonFinite(format!("bounds of `{name}`")));
    }
    if lower > upper {
        return Err(LpError::InvertedBounds {
            name: name.to_string(),
            lower,
            upper,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_variable_gets_index_zero() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, f64::INFINITY).unwrap();
        assert_eq!(x.index(), 0);
        let y = lp.add_variable("y", 0.0, 1.0).unwrap();
        assert_eq!(y.index(), 1);
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let mut lp = LinearProgram::new();
        lp.add_variable("x", 0.0, 1.0).unwrap();
        assert_eq!(
            lp.add_variable("x", 0.0, 1.0),
            Err(LpError::DuplicateVariable("x".into()))
        );
    }

    #[test]
    fn inverted_bounds_are_rejected() {
        let mut lp = LinearProgram::new();
        assert!(matches!(
            lp.add_variable("x", 2.0, 1.0),
            Err(LpError::InvertedBounds { .. })
        ));
        assert!(matches!(
            lp.add_variable("y", f64::NEG_INFINITY, 1.0),
            Err(LpError::NonFinite(_))
        ));
    }

    #[test]
    fn binaries_need_unit_bounds() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 2.0).unwrap();
        assert!(matches!(lp.mark_binary(x), Err(LpError::BinaryBounds(_))));
        let u = lp.add_binary("u").unwrap();
        assert!(lp.is_binary(u));
        assert!(lp.set_bounds(u, 0.0, 3.0).is_err());
    }

    #[test]
    fn coefficients_must_reference_existing_variables() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 1.0).unwrap();
        let err = lp.add_constraint("c", [(x, 1.0), (Var(7), 1.0)], Sense::Le, 1.0);
        assert_eq!(err, Err(LpError::UnknownVariable(7)));
        let err = lp.add_constraint("d", [(x, f64::NAN)], Sense::Le, 1.0);
        assert!(matches!(err, Err(LpError::NonFinite(_))));
    }

    #[test]
    fn lp_export_is_fixed_order() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 2.0).unwrap();
        let y = lp.add_variable("y", 0.0, f64::INFINITY).unwrap();
        let u = lp.add_binary("u").unwrap();
        lp.add_constraint("cap", [(x, 1.0), (y, -2.5), (u, 1.0)], Sense::Le, 3.0)
            .unwrap();
        lp.set_objective([(x, -1.0), (y, 0.5)]).unwrap();
        let expected = "\\ heatdispatch linear program\n\
Minimize\n obj: - 1 x + 0.5 y\n\
Subject To\n cap: 1 x - 2.5 y + 1 u <= 3\n\
Bounds\n 0 <= x <= 2\n y >= 0\n 0 <= u <= 1\n\
Binaries\n u\n\
End\n";
        assert_eq!(lp.to_lp_string(), expected);
        assert_eq!(lp.clone().to_lp_string(), lp.to_lp_string());
    }
}
