//! A small mixed-integer linear programming toolkit: model representation,
//! LP-file emission, solution files, an exact branch-and-bound solver for
//! desk-scale models, and an adapter for external solver executables.

mod bnb;
mod external;
mod lp;
mod solution;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use bnb::{solve_exact, Limits, SolveError};
pub use external::{solve_external, ExternalConfig, ExternalError};
pub use lp::write_lp;
pub use solution::{parse_solution, write_solution, ParsedSolution, SolutionError};

/// Constraint feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-6;
/// Distance from an integer still accepted as integral.
pub const INT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    /// Branching priority for the internal solver; higher branches first.
    pub priority: i32,
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
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(f64, VarId)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(c, v)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violates the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let a = self.activity(values);
        match self.sense {
            Sense::Le => (a - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - a).max(0.0),
            Sense::Eq => (a - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
    #[error("duplicate constraint name {0:?}")]
    DuplicateConstraint(String),
    #[error("variable {0:?} appears twice in constraint {1:?}")]
    RepeatedTerm(String, String),
    #[error("non-finite coefficient in {0:?}")]
    NonFinite(String),
    #[error("name {0:?} is not a valid LP identifier")]
    InvalidName(String),
    #[error("constraint {0:?} has no terms")]
    EmptyRow(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {name:?} has empty bounds [{lower}, {upper}]")]
    EmptyBounds { name: String, lower: f64, upper: f64 },
}

/// A minimization MILP.
#[derive(Debug, Clone, Default)]
pub struct Model {
    vars: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(f64, VarId)>,
    var_names: HashMap<String, VarId>,
    cons_names: HashMap<String, usize>,
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(ModelError::EmptyBounds { name, lower, upper });
        }
        if self.var_names.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        let id = VarId(self.vars.len());
        self.var_names.insert(name.clone(), id);
        self.vars.push(Variable { name, kind, lower, upper, priority: 0 });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn set_priority(&mut self, v: VarId, priority: i32) {
        self.vars[v.0].priority = priority;
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(f64, VarId)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        if self.cons_names.contains_key(&name) {
            return Err(ModelError::DuplicateConstraint(name));
        }
        if !rhs.is_finite() || terms.iter().any(|(c, _)| !c.is_finite()) {
            return Err(ModelError::NonFinite(name));
        }
        if let Some(&(_, v)) = terms.iter().find(|t| t.1 .0 >= self.vars.len()) {
            return Err(ModelError::UnknownVariable(format!("#{}", v.0)));
        }
        let mut ids: Vec<usize> = terms.iter().map(|t| t.1 .0).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::RepeatedTerm(self.vars[w[0]].name.clone(), name));
        }
        let idx = self.constraints.len();
        self.cons_names.insert(name.clone(), idx);
        self.constraints.push(LinearConstraint { name, terms, sense, rhs });
        Ok(idx)
    }

    /// Adds `coef` to the objective coefficient of `v`.
    pub fn add_objective(&mut self, coef: f64, v: VarId) {
        if coef == 0.0 {
            return;
        }
        if let Some(t) = self.objective.iter_mut().find(|t| t.1 == v) {
            t.0 += coef;
        } else {
            self.objective.push((coef, v));
        }
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(f64, VarId)] {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.terms.len()).sum()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn constraint_by_name(&self, name: &str) -> Option<&LinearConstraint> {
        self.cons_names.get(name).map(|&i| &self.constraints[i])
    }

    /// Dense objective vector.
    pub fn objective_dense(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.vars.len()];
        for &(coef, v) in &self.objective {
            c[v.0] += coef;
        }
        c
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(c, v)| c * values[v.0]).sum()
    }
}

/// Values for every variable of a model, in variable order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    pub values: Vec<f64>,
}

impl Assignment {
    pub fn zeros(model: &Model) -> Assignment {
        Assignment { values: vec![0.0; model.num_vars()] }
    }

    pub fn get(&self, v: VarId) -> f64 {
        self.values[v.0]
    }

    /// Builds an assignment from a name map; every model variable must be
    /// present.
    pub fn from_named<'a, I>(model: &Model, pairs: I) -> Result<Assignment, EvalError>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut values = vec![None; model.num_vars()];
        for (name, val) in pairs {
            let id = model.var_by_name(name).ok_or_else(|| EvalError::UnknownVariable(name.to_string()))?;
            values[id.0] = Some(val);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| EvalError::MissingVariable(model.vars[i].name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Assignment { values })
    }

    pub fn named<'a>(&'a self, model: &'a Model) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        model.vars.iter().zip(&self.values).map(|(v, &x)| (v.name.as_str(), x))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("assignment has no value for variable {0:?}")]
    MissingVariable(String),
    #[error("assignment names unknown variable {0:?}")]
    UnknownVariable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    Constraint { name: String, amount: f64 },
    Bound { name: String, value: f64 },
    Integrality { name: String, value: f64 },
}

impl Infeasibility {
    pub fn name(&self) -> &str {
        match self {
            Infeasibility::Constraint { name, .. }
            | Infeasibility::Bound { name, .. }
            | Infeasibility::Integrality { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub feasible: bool,
    pub violated: Vec<Infeasibility>,
    pub objective: f64,
}

/// Checks every bound, integrality requirement and constraint of `model`
/// against `assignment`, and computes the objective.
pub fn evaluate(model: &Model, assignment: &Assignment) -> Result<Evaluation, EvalError> {
    let x = &assignment.values;
    if x.len() < model.num_vars() {
        return Err(EvalError::MissingVariable(model.vars[x.len()].name.clone()));
    }
    let mut violated = Vec::new();
    for (v, &val) in model.vars.iter().zip(x) {
        if val < v.lower - FEAS_TOL || val > v.upper + FEAS_TOL || val.is_nan() {
            violated.push(Infeasibility::Bound { name: v.name.clone(), value: val });
        } else if v.kind != VarKind::Continuous && (val - val.round()).abs() > INT_TOL {
            violated.push(Infeasibility::Integrality { name: v.name.clone(), value: val });
        }
    }
    for c in &model.constraints {
        let amount = c.violation(x);
        if amount > FEAS_TOL {
            violated.push(Infeasibility::Constraint { name: c.name.clone(), amount });
        }
    }
    Ok(Evaluation { feasible: violated.is_empty(), violated, objective: model.objective_value(x) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    Limit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Limit => "limit",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: u64,
    /// Objective of every improving solution, in discovery order.
    pub incumbents: Vec<f64>,
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub assignment: Option<Assignment>,
    pub proof_gap: f64,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn has_solution(&self) -> bool {
        self.assignment.is_some()
    }
}
