use std::fmt;

use serde::{Deserialize, Serialize};

use super::LpError;

/// Index of a variable within its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

/// Index of a constraint within its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Row activity at `x`.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

/// A sparse linear program over bounded variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(VarId, f64)>,
    pub sense: ObjectiveSense,
}

impl Default for LpModel {
    fn default() -> Self {
        Self::new(ObjectiveSense::Minimize)
    }
}

impl LpModel {
    pub fn new(sense: ObjectiveSense) -> Self {
        LpModel {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            sense,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> RowId {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
        RowId(self.constraints.len() - 1)
    }

    pub fn set_objective(&mut self, sense: ObjectiveSense, terms: Vec<(VarId, f64)>) {
        self.sense = sense;
        self.objective = terms;
    }

    /// Adds `coef` to the objective coefficient of `var`.
    pub fn add_objective_term(&mut self, var: VarId, coef: f64) {
        self.objective.push((var, coef));
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        let v = &mut self.variables[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    /// Objective coefficients as a dense vector (duplicates summed).
    pub fn dense_objective(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.variables.len()];
        for &(v, coef) in &self.objective {
            c[v.0] += coef;
        }
        c
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * x[v.0]).sum()
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    /// Checks bounds, references and finiteness.
    pub fn validate(&self) -> Result<(), LpError> {
        for (j, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper || v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(LpError::BadBounds {
                    var: v.name.clone(),
                    index: j,
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        let n = self.variables.len();
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite {
                    context: format!("rhs of constraint {} ({})", i, row.name),
                });
            }
            for &(v, a) in &row.terms {
                if v.0 >= n {
                    return Err(LpError::UnknownVariable {
                        constraint: row.name.clone(),
                        index: v.0,
                    });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite {
                        context: format!("coefficient of {} in {}", self.variables[v.0].name, row.name),
                    });
                }
            }
        }
        for &(v, c) in &self.objective {
            if v.0 >= n {
                return Err(LpError::UnknownVariable {
                    constraint: "objective".into(),
                    index: v.0,
                });
            }
            if !c.is_finite() {
                return Err(LpError::NonFinite {
                    context: format!("objective coefficient of {}", self.variables[v.0].name),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Result of a solve. Duals are d(objective)/d(rhs) in the model's own sense.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.primal[var.0]
    }
}
