use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    /// Branch-and-bound branches on fractional variables of the highest
    /// priority first.
    #[serde(default)]
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear or mixed-integer program in natural form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgramSpec {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    /// Dense objective coefficients, one per variable.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgramSpec {
    pub fn new(sense: Sense) -> Self {
        LinearProgramSpec {
            sense,
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer: false,
            priority: 0,
        });
        self.objective.push(obj);
        self.variables.len() - 1
    }

    pub fn add_int_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> usize {
        let v = self.add_var(name, lower, upper, obj);
        self.variables[v].integer = true;
        v
    }

    pub fn add_binary(&mut self, name: impl Into<String>, obj: f64) -> usize {
        self.add_int_var(name, 0.0, 1.0, obj)
    }

    /// Adds a constraint and returns its index.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.integer)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Checks finiteness of coefficients, bound consistency and indices.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.objective.len() != self.variables.len() {
            problems.push(format!(
                "{} objective coefficients for {} variables",
                self.objective.len(),
                self.variables.len()
            ));
        }
        for (v, c) in self.variables.iter().zip(&self.objective) {
            if v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan() {
                problems.push(format!("variable {} has bounds [{}, {}]", v.name, v.lower, v.upper));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                problems.push(format!("variable {} has an infinite bound on the wrong side", v.name));
            }
            if !c.is_finite() {
                problems.push(format!("variable {} has objective coefficient {c}", v.name));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                problems.push(format!("constraint {} has right-hand side {}", c.name, c.rhs));
            }
            for &(j, a) in &c.coeffs {
                if j >= self.variables.len() {
                    problems.push(format!("constraint {} references variable {j}", c.name));
                } else if !a.is_finite() {
                    problems.push(format!("constraint {} has coefficient {a}", c.name));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Solver(problems.join("; ")))
        }
    }

    /// Left-hand side values of every constraint at `x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| c.coeffs.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or constraint violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xv) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xv).max(xv - v.upper);
        }
        for (c, act) in self.constraints.iter().zip(self.activities(x)) {
            let viol = match c.relation {
                Relation::Le => act - c.rhs,
                Relation::Ge => c.rhs - act,
                Relation::Eq => (act - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration, node or time limit reached. For integer programs the
    /// primal vector holds the best incumbent, if any.
    LimitReached,
    NumericalFailure,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub nodes: usize,
    pub branches: usize,
}

/// Outcome of a solve. Duals and reduced costs follow the convention
/// "derivative of the optimal objective with respect to the right-hand side
/// (resp. the variable)", in the sense of the original problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub(crate) fn without_solution(status: Status, stats: SolveStats) -> Self {
        SolveResult {
            status,
            objective: f64::NAN,
            primal: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            stats,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn has_solution(&self) -> bool {
        !self.primal.is_empty() || (self.status == Status::Optimal)
    }
}
