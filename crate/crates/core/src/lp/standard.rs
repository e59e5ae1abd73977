//! Equality form `A x' = b, 0 <= x' <= u` (or `x'` free) with one slack
//! column per inequality row.

use super::model::{LpModel, ObjectiveSense, Sense};
use super::LpError;

/// How an original variable maps onto its standard-form column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarMap {
    /// `x = offset + x'`
    Shifted { col: usize, offset: f64 },
    /// `x = upper - x'`
    Mirrored { col: usize, upper: f64 },
    /// `x = x'`, unrestricted.
    Free { col: usize },
}

impl VarMap {
    pub fn col(&self) -> usize {
        match *self {
            VarMap::Shifted { col, .. } | VarMap::Mirrored { col, .. } | VarMap::Free { col } => col,
        }
    }

    fn to_original(self, xs: f64) -> f64 {
        match self {
            VarMap::Shifted { offset, .. } => offset + xs,
            VarMap::Mirrored { upper, .. } => upper - xs,
            VarMap::Free { .. } => xs,
        }
    }

    fn to_standard(self, x: f64) -> f64 {
        match self {
            VarMap::Shifted { offset, .. } => x - offset,
            VarMap::Mirrored { upper, .. } => upper - x,
            VarMap::Free { .. } => x,
        }
    }

    /// +1 when the column moves with the variable, -1 when mirrored.
    pub fn sign(&self) -> f64 {
        match self {
            VarMap::Mirrored { .. } => -1.0,
            _ => 1.0,
        }
    }
}

/// Compressed sparse columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CscMatrix {
    pub rows: usize,
    pub col_start: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    pub fn cols(&self) -> usize {
        self.col_start.len().saturating_sub(1)
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_start[j]..self.col_start[j + 1];
        self.row_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Builds from per-column (row, value) lists; duplicates are summed, zeros dropped.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        let mut m = CscMatrix {
            rows,
            col_start: Vec::with_capacity(columns.len() + 1),
            row_idx: Vec::new(),
            values: Vec::new(),
        };
        m.col_start.push(0);
        for mut col in columns {
            col.sort_by_key(|&(i, _)| i);
            let mut k = 0;
            while k < col.len() {
                let row = col[k].0;
                let mut sum = 0.0;
                while k < col.len() && col[k].0 == row {
                    sum += col[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    m.row_idx.push(row);
                    m.values.push(sum);
                }
            }
            m.col_start.push(m.row_idx.len());
        }
        m
    }

    /// `y^T A_j`
    pub fn dot_col(&self, j: usize, y: &[f64]) -> f64 {
        self.col(j).map(|(i, a)| a * y[i]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
    /// Minimization costs per column.
    pub cost: Vec<f64>,
    /// Lower bound per column: 0, or -inf for free columns.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Constant added to the minimization objective by the bound shifts.
    pub cost_offset: f64,
    pub var_maps: Vec<VarMap>,
    /// Slack column and its coefficient (+1 for <=, -1 for >=) per row.
    pub slacks: Vec<Option<(usize, f64)>>,
    pub senses: Vec<Sense>,
    pub maximize: bool,
}

impl StandardForm {
    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn cols(&self) -> usize {
        self.cost.len()
    }

    /// Original variable values from standard-form column values.
    pub fn recover(&self, xs: &[f64]) -> Vec<f64> {
        self.var_maps.iter().map(|m| m.to_original(xs[m.col()])).collect()
    }

    /// Standard-form column values (including slacks) for original values `x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut xs = vec![0.0; self.cols()];
        for (m, &v) in self.var_maps.iter().zip(x) {
            xs[m.col()] = m.to_standard(v);
        }
        let mut activity = vec![0.0; self.rows()];
        for m in &self.var_maps {
            for (i, a) in self.matrix.col(m.col()) {
                activity[i] += a * xs[m.col()];
            }
        }
        for (i, slack) in self.slacks.iter().enumerate() {
            if let Some((col, sign)) = *slack {
                xs[col] = (self.rhs[i] - activity[i]) / sign;
            }
        }
        xs
    }
}

/// Converts a model to equality form with shifted bounds.
pub fn to_standard_form(model: &LpModel) -> Result<StandardForm, LpError> {
    model.validate()?;
    let n = model.num_vars();
    let m = model.num_constraints();
    let c = model.dense_objective();
    let maximize = model.sense == ObjectiveSense::Maximize;
    let obj_sign = if maximize { -1.0 } else { 1.0 };

    let mut var_maps = Vec::with_capacity(n);
    let mut cost = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut cost_offset = 0.0;
    for (j, v) in model.variables.iter().enumerate() {
        let cj = obj_sign * c[j];
        if v.lower.is_finite() {
            var_maps.push(VarMap::Shifted { col: j, offset: v.lower });
            cost.push(cj);
            lower.push(0.0);
            upper.push(v.upper - v.lower);
            cost_offset += cj * v.lower;
        } else if v.upper.is_finite() {
            var_maps.push(VarMap::Mirrored { col: j, upper: v.upper });
            cost.push(-cj);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            cost_offset += cj * v.upper;
        } else {
            var_maps.push(VarMap::Free { col: j });
            cost.push(cj);
            lower.push(f64::NEG_INFINITY);
            upper.push(f64::INFINITY);
        }
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut rhs = Vec::with_capacity(m);
    for (i, row) in model.constraints.iter().enumerate() {
        let mut b = row.rhs;
        for &(v, a) in &row.terms {
            match var_maps[v.0] {
                VarMap::Shifted { offset, .. } => {
                    columns[v.0].push((i, a));
                    b -= a * offset;
                }
                VarMap::Mirrored { upper, .. } => {
                    columns[v.0].push((i, -a));
                    b -= a * upper;
                }
                VarMap::Free { .. } => columns[v.0].push((i, a)),
            }
        }
        rhs.push(b);
    }

    let mut slacks = Vec::with_capacity(m);
    for (i, row) in model.constraints.iter().enumerate() {
        let sign = match row.sense {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
            Sense::Eq => {
                slacks.push(None);
                continue;
            }
        };
        let col = columns.len();
        columns.push(vec![(i, sign)]);
        cost.push(0.0);
        lower.push(0.0);
        upper.push(f64::INFINITY);
        slacks.push(Some((col, sign)));
    }

    Ok(StandardForm {
        matrix: CscMatrix::from_columns(m, columns),
        rhs,
        cost,
        lower,
        upper,
        cost_offset,
        var_maps,
        slacks,
        senses: model.constraints.iter().map(|r| r.sense).collect(),
        maximize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::model::VarId;
    use proptest::prelude::*;

    #[test]
    fn single_le_row_gains_one_slack() {
        let mut m = LpModel::default();
        let x = m.add_var("x", 0.0, f64::INFINITY);
        m.add_constraint("c", vec![(x, 1.0)], Sense::Le, 5.0);
        let sf = to_standard_form(&m).unwrap();
        assert_eq!(sf.cols(), 2);
        assert_eq!(sf.slacks, vec![Some((1, 1.0))]);
    }

    #[test]
    fn three_vars_two_inequalities_give_five_columns() {
        let mut m = LpModel::default();
        let v: Vec<VarId> = (0..3).map(|i| m.add_var(format!("x{i}"), 0.0, 10.0)).collect();
        m.add_constraint("a", vec![(v[0], 1.0), (v[1], 1.0)], Sense::Le, 4.0);
        m.add_constraint("b", vec![(v[1], 1.0), (v[2], 2.0)], Sense::Ge, 1.0);
        m.add_constraint("c", vec![(v[0], 1.0), (v[2], -1.0)], Sense::Eq, 0.0);
        assert_eq!(to_standard_form(&m).unwrap().cols(), 5);
    }

    #[test]
    fn inverted_bounds_are_rejected() {
        let mut m = LpModel::default();
        m.add_var("x", 2.0, 1.0);
        assert!(matches!(to_standard_form(&m), Err(LpError::BadBounds { .. })));
    }

    #[test]
    fn shifts_move_rhs_and_cost() {
        let mut m = LpModel::new(ObjectiveSense::Maximize);
        let x = m.add_var("x", 2.0, 7.0);
        let y = m.add_var("y", f64::NEG_INFINITY, 3.0);
        m.add_constraint("c", vec![(x, 1.0), (y, 2.0)], Sense::Le, 10.0);
        m.set_objective(ObjectiveSense::Maximize, vec![(x, 1.0), (y, 1.0)]);
        let sf = to_standard_form(&m).unwrap();
        // x = 2 + x', y = 3 - y': x' - 2 y' + s = 10 - 2 - 6
        assert_eq!(sf.rhs, vec![2.0]);
        assert_eq!(sf.upper[0], 5.0);
        assert_eq!(sf.cost[..2], [-1.0, 1.0]);
        assert_eq!(sf.cost_offset, -5.0);
    }

    fn random_model(seed: u64, n: usize, rows: usize) -> LpModel {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = LpModel::default();
        let vars: Vec<VarId> = (0..n)
            .map(|j| {
                let (lo, hi) = match rng.gen_range(0..4) {
                    0 => (rng.gen_range(-5.0..0.0), rng.gen_range(0.0..5.0)),
                    1 => (f64::NEG_INFINITY, rng.gen_range(-3.0..3.0)),
                    2 => (f64::NEG_INFINITY, f64::INFINITY),
                    _ => (rng.gen_range(-2.0..2.0), f64::INFINITY),
                };
                m.add_var(format!("x{j}"), lo, hi)
            })
            .collect();
        for i in 0..rows {
            let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
            let terms = vars.iter().map(|&v| (v, rng.gen_range(-3.0..3.0))).collect();
            m.add_constraint(format!("r{i}"), terms, sense, rng.gen_range(-5.0..5.0));
        }
        m
    }

    proptest! {
        #[test]
        fn project_then_recover_is_identity(seed in 0u64..1000, n in 1usize..7, rows in 0usize..6) {
            let model = random_model(seed, n, rows);
            let sf = to_standard_form(&model).unwrap();
            let x: Vec<f64> = model.variables.iter().enumerate().map(|(j, v)| {
                let lo = if v.lower.is_finite() { v.lower } else { v.upper.min(0.0) - 1.0 };
                let hi = if v.upper.is_finite() { v.upper } else { lo + 4.0 };
                lo + (hi - lo) * ((j as f64 * 0.37 + seed as f64 * 0.11) % 1.0)
            }).collect();
            let back = sf.recover(&sf.project(&x));
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
            // slacks reproduce every row exactly in equality form
            let xs = sf.project(&x);
            for i in 0..sf.rows() {
                let lhs: f64 = (0..sf.cols()).map(|j| sf.matrix.col(j).filter(|&(r, _)| r == i).map(|(_, a)| a * xs[j]).sum::<f64>()).sum();
                if sf.slacks[i].is_some() {
                    prop_assert!((lhs - sf.rhs[i]).abs() <= 1e-9 * (1.0 + sf.rhs[i].abs()));
                }
            }
        }
    }
}
