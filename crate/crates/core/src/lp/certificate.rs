use serde::Serialize;

use super::model::{LpModel, ObjectiveSense, Sense, Solution};

/// Acceptance tolerance for certificates.
pub const ACCEPT_TOL: f64 = 1e-6;

/// KKT residuals of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Largest row or bound violation.
    pub primal_residual: f64,
    /// Largest stationarity or dual sign violation.
    pub dual_residual: f64,
    pub duality_gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `max |rhs|` over the constraints.
    pub rhs_norm: f64,
}

impl ResidualReport {
    pub fn primal_ok(&self, tol: f64) -> bool {
        self.primal_residual <= tol * (1.0 + self.rhs_norm)
    }

    pub fn dual_ok(&self, tol: f64) -> bool {
        self.dual_residual <= tol
    }

    pub fn gap_ok(&self, tol: f64) -> bool {
        self.duality_gap <= tol * (1.0 + self.primal_objective.abs())
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.primal_ok(tol) && self.dual_ok(tol) && self.gap_ok(tol)
    }
}

/// Recomputes primal, dual and gap residuals of `solution` against `model`.
pub fn check_certificate(model: &LpModel, solution: &Solution) -> ResidualReport {
    let x = &solution.primal;
    // Work in minimization form.
    let sign = match model.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let c: Vec<f64> = model.dense_objective().iter().map(|v| sign * v).collect();
    let y: Vec<f64> = solution.duals.iter().map(|v| sign * v).collect();
    let d: Vec<f64> = solution.reduced_costs.iter().map(|v| sign * v).collect();

    let mut primal_residual = 0.0f64;
    let mut rhs_norm = 0.0f64;
    for row in &model.constraints {
        primal_residual = primal_residual.max(row.violation(x));
        rhs_norm = rhs_norm.max(row.rhs.abs());
    }
    for (v, &xj) in model.variables.iter().zip(x) {
        primal_residual = primal_residual.max(v.lower - xj).max(xj - v.upper);
    }

    let mut dual_residual = 0.0f64;
    let mut aty = vec![0.0; model.num_vars()];
    let mut dual_objective = 0.0;
    for (row, &yi) in model.constraints.iter().zip(&y) {
        let wrong_sign = match row.sense {
            Sense::Le => yi.max(0.0),
            Sense::Ge => (-yi).max(0.0),
            Sense::Eq => 0.0,
        };
        dual_residual = dual_residual.max(wrong_sign);
        dual_objective += row.rhs * yi;
        for &(v, a) in &row.terms {
            aty[v.0] += a * yi;
        }
    }
    for (j, v) in model.variables.iter().enumerate() {
        dual_residual = dual_residual.max((c[j] - aty[j] - d[j]).abs());
        if d[j] > 0.0 {
            if v.lower.is_finite() {
                dual_objective += v.lower * d[j];
            } else {
                dual_residual = dual_residual.max(d[j]);
            }
        } else if d[j] < 0.0 {
            if v.upper.is_finite() {
                dual_objective += v.upper * d[j];
            } else {
                dual_residual = dual_residual.max(-d[j]);
            }
        }
    }

    let primal_min: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
    ResidualReport {
        primal_residual,
        dual_residual,
        duality_gap: (primal_min - dual_objective).abs(),
        primal_objective: sign * primal_min,
        dual_objective: sign * dual_objective,
        rhs_norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve, Tolerances};

    fn cover() -> LpModel {
        let mut m = LpModel::default();
        let x = m.add_var("x", 0.0, f64::INFINITY);
        let y = m.add_var("y", 0.0, f64::INFINITY);
        m.add_constraint("cover", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 4.0);
        m.add_constraint("xcap", vec![(x, 1.0)], Sense::Le, 3.0);
        m.add_constraint("ycap", vec![(y, 1.0)], Sense::Le, 3.0);
        m.set_objective(ObjectiveSense::Minimize, vec![(x, 2.0), (y, 3.0)]);
        m
    }

    #[test]
    fn optimal_cover_has_zero_gap() {
        let m = cover();
        let s = solve(&m, &Tolerances::default()).unwrap();
        let r = check_certificate(&m, &s);
        assert!(r.duality_gap <= 1e-9, "{r:?}");
        assert!(r.passes(ACCEPT_TOL));
    }

    #[test]
    fn perturbed_primal_is_flagged() {
        let m = cover();
        let mut s = solve(&m, &Tolerances::default()).unwrap();
        s.primal[0] += 1e-2;
        let r = check_certificate(&m, &s);
        assert!(!r.primal_ok(ACCEPT_TOL), "{r:?}");
    }

    #[test]
    fn redundant_equality_still_certifies() {
        let mut m = LpModel::default();
        let x = m.add_var("x", 0.0, 10.0);
        let y = m.add_var("y", 0.0, 10.0);
        m.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Sense::Eq, 5.0);
        m.add_constraint("b", vec![(x, 2.0), (y, 2.0)], Sense::Eq, 10.0);
        m.add_constraint("c", vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
        m.set_objective(ObjectiveSense::Maximize, vec![(x, 1.0), (y, 0.5)]);
        let s = solve(&m, &Tolerances::default()).unwrap();
        assert!(s.is_optimal());
        assert!((s.objective - 4.0).abs() < 1e-9);
        let r = check_certificate(&m, &s);
        assert!(r.duality_gap <= 1e-6, "{r:?}");
        assert!(r.passes(ACCEPT_TOL));
    }
}
