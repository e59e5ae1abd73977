#![allow(dead_code)]

use bioflow::lp::{LpModel, ObjectiveSense, Sense, Solution, VarId};
use bioflow::scenarios::BuiltModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random LP with finite bounds and a known feasible point.
pub fn random_lp(seed: u64) -> LpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=8);
    let sense = if rng.gen_bool(0.5) { ObjectiveSense::Minimize } else { ObjectiveSense::Maximize };
    let mut model = LpModel::new(sense);
    let mut x0 = Vec::with_capacity(n);
    for j in 0..n {
        let lo = -(rng.gen_range(0..=5) as f64);
        let hi = rng.gen_range(1..=10) as f64;
        model.add_var(format!("x{j}"), lo, hi);
        x0.push(rng.gen_range(lo..=hi));
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                let a = rng.gen_range(-5..=5) as f64;
                if a != 0.0 {
                    terms.push((VarId(j), a));
                }
            }
        }
        let act: f64 = terms.iter().map(|&(v, a)| a * x0[v.0]).sum();
        let slack = rng.gen_range(0.0..3.0);
        let (sense, rhs) = match rng.gen_range(0..5) {
            0 => (Sense::Eq, act),
            1 | 2 => (Sense::Ge, act - slack),
            _ => (Sense::Le, act + slack),
        };
        model.add_constraint(format!("r{i}"), terms, sense, rhs);
    }
    let objective = (0..n).map(|j| (VarId(j), rng.gen_range(-10..=10) as f64)).collect();
    model.set_objective(sense, objective);
    model
}

/// Best objective over all basic feasible points, by brute force.
///
/// Every variable needs finite bounds. Each variable is at its lower bound,
/// at its upper bound, or free; the free ones are pinned by as many tight
/// rows. Equalities outside the tight set are checked like any other row.
pub fn vertex_oracle(model: &LpModel) -> Option<f64> {
    let n = model.num_vars();
    let rows: Vec<(Vec<f64>, f64, Sense)> = model
        .constraints
        .iter()
        .map(|c| {
            let mut a = vec![0.0; n];
            for &(v, coef) in &c.terms {
                a[v.0] += coef;
            }
            (a, c.rhs, c.sense)
        })
        .collect();
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    assert!(lower.iter().chain(&upper).all(|b| b.is_finite()), "oracle needs finite bounds");
    let c = model.dense_objective();
    let better = |a: f64, b: f64| match model.sense {
        ObjectiveSense::Minimize => a < b,
        ObjectiveSense::Maximize => a > b,
    };

    let mut best: Option<f64> = None;
    let mut state = vec![0u8; n];
    loop {
        let free: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
        let k = free.len();
        if k <= rows.len() {
            for tight in combinations(rows.len(), k) {
                let mut x: Vec<f64> = (0..n)
                    .map(|j| match state[j] {
                        0 => lower[j],
                        1 => upper[j],
                        _ => 0.0,
                    })
                    .collect();
                if k > 0 {
                    let mut a = vec![vec![0.0; k]; k];
                    let mut b = vec![0.0; k];
                    for (r, &i) in tight.iter().enumerate() {
                        b[r] = rows[i].1;
                        for j in 0..n {
                            if state[j] != 2 {
                                b[r] -= rows[i].0[j] * x[j];
                            }
                        }
                        for (col, &j) in free.iter().enumerate() {
                            a[r][col] = rows[i].0[j];
                        }
                    }
                    let Some(sol) = gauss(a, b) else { continue };
                    for (col, &j) in free.iter().enumerate() {
                        x[j] = sol[col];
                    }
                }
                if !feasible(&rows, &lower, &upper, &x) {
                    continue;
                }
                let obj: f64 = c.iter().zip(&x).map(|(c, x)| c * x).sum();
                if best.map_or(true, |b| better(obj, b)) {
                    best = Some(obj);
                }
            }
        }
        // Next state in base 3.
        let mut j = 0;
        while j < n && state[j] == 2 {
            state[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
        state[j] += 1;
    }
    best
}

fn feasible(rows: &[(Vec<f64>, f64, Sense)], lower: &[f64], upper: &[f64], x: &[f64]) -> bool {
    const TOL: f64 = 1e-9;
    for j in 0..x.len() {
        if x[j] < lower[j] - TOL || x[j] > upper[j] + TOL {
            return false;
        }
    }
    rows.iter().all(|(a, b, s)| {
        let act: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
        let tol = TOL * (1.0 + b.abs());
        match s {
            Sense::Le => act <= b + tol,
            Sense::Ge => act >= b - tol,
            Sense::Eq => (act - b).abs() <= tol,
        }
    })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let p = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..k {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Largest row or bound violation, each relative to the row's own magnitude.
pub fn max_relative_violation(model: &LpModel, x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for c in &model.constraints {
        worst = worst.max(c.violation(x) / row_scale(c, x));
    }
    for (v, &xv) in model.variables.iter().zip(x) {
        let viol = (v.lower - xv).max(xv - v.upper).max(0.0);
        worst = worst.max(viol / xv.abs().max(1.0));
    }
    worst
}

/// Largest flow-balance error `inflow - use - (v_t - v_{t-1})` over every
/// plant, biomass and month, relative to the largest shipment or stock.
pub fn conservation_error(built: &BuiltModel, solution: &Solution, initial_inventory: f64) -> f64 {
    use std::collections::HashMap;
    let x = &solution.primal;
    let mut inflow: HashMap<(usize, usize, usize), f64> = HashMap::new();
    for s in &built.x {
        *inflow.entry((s.plant, s.biomass, s.month)).or_default() += x[s.var.0];
    }
    let stock: HashMap<(usize, usize, usize), f64> =
        built.v.iter().map(|s| ((s.plant, s.biomass, s.month), x[s.var.0])).collect();
    let scale = built
        .x
        .iter()
        .map(|s| s.var)
        .chain(built.v.iter().map(|s| s.var))
        .chain(built.u.iter().map(|s| s.var))
        .map(|v| x[v.0].abs())
        .fold(initial_inventory.abs(), f64::max)
        .max(1.0);
    let mut worst = 0.0f64;
    for u in &built.u {
        let key = (u.plant, u.biomass, u.month);
        let prev = if u.month == 0 { initial_inventory } else { stock[&(u.plant, u.biomass, u.month - 1)] };
        let lhs = inflow.get(&key).copied().unwrap_or(0.0) - x[u.var.0];
        let rhs = stock[&key] - prev;
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    worst
}

fn row_scale(c: &bioflow::lp::Constraint, x: &[f64]) -> f64 {
    c.terms.iter().map(|&(v, a)| (a * x[v.0]).abs()).fold(c.rhs.abs(), f64::max).max(1.0)
}

/// Largest demand-row violation relative to the row's magnitude.
pub fn demand_violation(built: &BuiltModel, solution: &Solution) -> f64 {
    built
        .demand_rows
        .iter()
        .map(|d| {
            let c = &built.model.constraints[d.row.0];
            c.violation(&solution.primal) / row_scale(c, &solution.primal)
        })
        .fold(0.0, f64::max)
}
