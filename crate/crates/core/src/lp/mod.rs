//! Linear programs: sparse models, a bounded-variable revised simplex,
//! KKT residual checks and a plain-text model format.

mod certificate;
mod lu;
mod model;
mod simplex;
mod standard;
mod text;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use certificate::{check_certificate, ResidualReport, ACCEPT_TOL};
pub use model::{
    Constraint, LpModel, ObjectiveSense, RowId, Sense, Solution, SolveStatus, VarId, Variable,
};
pub use simplex::solve;
pub use standard::{to_standard_form, CscMatrix, StandardForm, VarMap};
pub use text::{parse_model_text, write_model_text, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("variable {var} (#{index}) has lower bound {lower} above upper bound {upper}")]
    BadBounds {
        var: String,
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("non-finite value in {context}")]
    NonFinite { context: String },
    #[error("constraint {constraint} references undeclared variable #{index}")]
    UnknownVariable { constraint: String, index: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Solver tolerances and limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub primal_feasibility: f64,
    pub dual_feasibility: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot: f64,
    /// Pivots between basis refactorizations.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    /// Defaults to 50 * (rows + columns) of the model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            primal_feasibility: 1e-7,
            dual_feasibility: 1e-7,
            pivot: 1e-9,
            refactor_interval: 100,
            bland_after: 50,
            max_iterations: None,
        }
    }
}

impl Tolerances {
    pub fn iteration_limit(&self, model: &LpModel) -> usize {
        self.max_iterations
            .unwrap_or(50 * (model.num_vars() + model.num_constraints()).max(1))
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [self.primal_feasibility, self.dual_feasibility, self.pivot];
        if positive.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return Err("solver tolerances must lie in (0, 1)".into());
        }
        if self.refactor_interval == 0 {
            return Err("solver.refactor_interval must be >= 1".into());
        }
        Ok(())
    }
}
