//! Two-phase bounded-variable revised simplex.
//!
//! The standard form is scaled by powers of two, an artificial column is
//! added for every row that no slack can start feasible in, and phase 1
//! minimizes their sum. Phase 2 fixes artificials at zero and minimizes the
//! true cost. The basis inverse is an LU factorization followed by a
//! product-form eta file, rebuilt every `refactor_interval` pivots.

use log::{debug, warn};

use super::lu::LuFactors;
use super::model::{LpModel, Solution, SolveStatus};
use super::standard::{to_standard_form, CscMatrix, StandardForm};
use super::{LpError, Tolerances};

/// Relative tolerance for treating two ratios as tied.
const TIE_EPS: f64 = 1e-12;
const SINGULAR_EPS: f64 = 1e-11;
/// Pivots smaller than this fraction of the entering column trigger a refactor.
const STABLE_PIVOT: f64 = 1e-7;

/// Solves `model`. Only malformed models are errors; infeasibility,
/// unboundedness and the iteration cap are reported through the status.
pub fn solve(model: &LpModel, tol: &Tolerances) -> Result<Solution, LpError> {
    let sf = to_standard_form(model)?;
    let scaled = Scaled::new(&sf);
    let limit = tol.iteration_limit(model);
    let mut s = Simplex::new(&scaled, tol, limit);
    let status = s.run();
    debug!(
        "simplex: {:?} after {} iterations ({} rows, {} columns)",
        status,
        s.iterations,
        sf.rows(),
        sf.cols()
    );

    // Basic values can sit a rounding error outside their bounds.
    let xs: Vec<f64> = (0..sf.cols())
        .map(|j| (s.x[j] * scaled.col_scale[j]).clamp(sf.lower[j], sf.upper[j]))
        .collect();
    let primal = sf.recover(&xs);
    let objective = model.objective_value(&primal);
    let sign = if sf.maximize { -1.0 } else { 1.0 };
    let (duals, reduced_costs) = if status == SolveStatus::Optimal {
        let y = s.duals();
        let duals: Vec<f64> = y.iter().zip(&scaled.row_scale).map(|(v, r)| sign * v * r).collect();
        let reduced = sf
            .var_maps
            .iter()
            .map(|m| {
                let j = m.col();
                sign * m.sign() * (scaled.cost[j] - scaled.matrix.dot_col(j, &y)) / scaled.col_scale[j]
            })
            .collect();
        (duals, reduced)
    } else {
        (vec![0.0; sf.rows()], vec![0.0; model.num_vars()])
    };
    Ok(Solution {
        status,
        objective,
        primal,
        duals,
        reduced_costs,
        iterations: s.iterations,
    })
}

/// `R A S`, `R b`, `S c`, `u / s` with power-of-two factors.
struct Scaled {
    matrix: CscMatrix,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl Scaled {
    fn new(sf: &StandardForm) -> Self {
        let m = sf.rows();
        let n = sf.cols();
        let a = &sf.matrix;
        let mut r = vec![1.0; m];
        let mut s = vec![1.0; n];
        for _ in 0..4 {
            let mut lo = vec![f64::INFINITY; m];
            let mut hi = vec![0.0f64; m];
            for j in 0..n {
                for (i, v) in a.col(j) {
                    let x = (v * s[j]).abs();
                    lo[i] = lo[i].min(x);
                    hi[i] = hi[i].max(x);
                }
            }
            for i in 0..m {
                if hi[i] > 0.0 {
                    r[i] = pow2(1.0 / (lo[i] * hi[i]).sqrt());
                }
            }
            for j in 0..n {
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for (i, v) in a.col(j) {
                    let x = (v * r[i]).abs();
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
                if hi > 0.0 {
                    s[j] = pow2(1.0 / (lo * hi).sqrt());
                }
            }
        }
        let mut matrix = a.clone();
        for j in 0..n {
            for k in matrix.col_start[j]..matrix.col_start[j + 1] {
                matrix.values[k] *= r[matrix.row_idx[k]] * s[j];
            }
        }
        Scaled {
            matrix,
            rhs: sf.rhs.iter().zip(&r).map(|(b, ri)| b * ri).collect(),
            cost: sf.cost.iter().zip(&s).map(|(c, sj)| c * sj).collect(),
            lower: sf.lower.iter().zip(&s).map(|(l, sj)| l / sj).collect(),
            upper: sf.upper.iter().zip(&s).map(|(u, sj)| u / sj).collect(),
            row_scale: r,
            col_scale: s,
        }
    }
}

fn pow2(x: f64) -> f64 {
    if x.is_finite() && x > 0.0 {
        2f64.powi(x.log2().round().clamp(-60.0, 60.0) as i32)
    } else {
        1.0
    }
}

/// Elementary column transformation from one basis change.
struct Eta {
    slot: usize,
    pivot: f64,
    /// Off-pivot entries of the entering column in basis coordinates.
    entries: Vec<(usize, f64)>,
}

const NONBASIC: usize = usize::MAX;

struct Simplex<'a> {
    p: &'a Scaled,
    tol: &'a Tolerances,
    m: usize,
    /// Structural plus slack columns; artificial `i` is column `n + i`.
    n: usize,
    art_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    slot_of: Vec<usize>,
    lu: Option<LuFactors>,
    etas: Vec<Eta>,
    iterations: usize,
    limit: usize,
    degenerate_run: usize,
    dual_tol: f64,
}

enum Step {
    Optimal,
    Unbounded,
    Limit,
    Continue,
}

impl<'a> Simplex<'a> {
    fn new(p: &'a Scaled, tol: &'a Tolerances, limit: usize) -> Self {
        let m = p.rhs.len();
        let n = p.cost.len();
        let mut lower = p.lower.clone();
        let mut upper = p.upper.clone();
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(std::iter::repeat_n(0.0, m));

        // Nonbasic structurals start at the bound nearest zero.
        let mut x = vec![0.0; n + m];
        for j in 0..n {
            x[j] = if lower[j].is_finite() {
                lower[j]
            } else if upper[j].is_finite() {
                upper[j]
            } else {
                0.0
            };
        }

        // A single-entry column whose sign agrees with the residual can start basic.
        let mut residual = p.rhs.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                for (i, a) in p.matrix.col(j) {
                    residual[i] -= a * x[j];
                }
            }
        }
        let mut basis = vec![NONBASIC; m];
        for j in 0..n {
            let start = p.matrix.col_start[j];
            if p.matrix.col_start[j + 1] - start != 1 || lower[j] != 0.0 || upper[j] != f64::INFINITY || p.cost[j] != 0.0 {
                continue;
            }
            let (i, a) = (p.matrix.row_idx[start], p.matrix.values[start]);
            if basis[i] == NONBASIC && residual[i] / a >= 0.0 {
                basis[i] = j;
            }
        }
        let mut art_sign = vec![1.0; m];
        for i in 0..m {
            art_sign[i] = if residual[i] < 0.0 { -1.0 } else { 1.0 };
            if basis[i] == NONBASIC {
                basis[i] = n + i;
                upper[n + i] = f64::INFINITY;
            }
        }
        let mut slot_of = vec![NONBASIC; n + m];
        for (k, &j) in basis.iter().enumerate() {
            slot_of[j] = k;
        }

        Simplex {
            p,
            tol,
            m,
            n,
            art_sign,
            lower,
            upper,
            cost: vec![0.0; n + m],
            x,
            basis,
            slot_of,
            lu: None,
            etas: Vec::new(),
            iterations: 0,
            limit,
            degenerate_run: 0,
            dual_tol: tol.dual_feasibility,
        }
    }

    fn run(&mut self) -> SolveStatus {
        self.refactor();
        self.recompute_basic();

        let needs_phase1 = self.basis.iter().any(|&j| j >= self.n);
        if needs_phase1 {
            for i in 0..self.m {
                self.cost[self.n + i] = 1.0;
            }
            // Badly scaled columns can price just inside the dual tolerance while
            // a long step along them still removes infeasibility.
            for dual_tol in [self.tol.dual_feasibility, self.tol.dual_feasibility * 1e-4] {
                self.dual_tol = dual_tol;
                match self.optimize() {
                    SolveStatus::Optimal => {}
                    SolveStatus::Unbounded => return SolveStatus::Infeasible,
                    other => return other,
                }
                if self.phase1_shortfall().is_none() {
                    break;
                }
            }
            self.dual_tol = self.tol.dual_feasibility;
            if let Some((i, short)) = self.phase1_shortfall() {
                debug!("phase 1 leaves row {i} short by {short:e}");
                return SolveStatus::Infeasible;
            }
            for i in 0..self.m {
                let a = self.n + i;
                self.cost[a] = 0.0;
                self.upper[a] = 0.0;
                if self.slot_of[a] == NONBASIC {
                    self.x[a] = 0.0;
                }
            }
            self.recompute_basic();
        }
        self.cost[..self.n].copy_from_slice(&self.p.cost);
        let status = self.optimize();
        if status == SolveStatus::Optimal {
            let worst = (0..self.n)
                .map(|j| (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]) / (1.0 + self.x[j].abs()))
                .fold(0.0f64, f64::max);
            if worst > self.tol.primal_feasibility {
                warn!("optimal basis violates a bound by {worst:e} (relative)");
            }
        }
        status
    }

    /// First row whose artificial is still above tolerance.
    fn phase1_shortfall(&self) -> Option<(usize, f64)> {
        (0..self.m)
            .map(|i| (i, self.x[self.n + i]))
            .find(|&(i, v)| v > self.tol.primal_feasibility * (1.0 + self.p.rhs[i].abs()))
    }

    /// Runs pivots on the current cost vector until optimal, unbounded or out of iterations.
    fn optimize(&mut self) -> SolveStatus {
        let mut fresh = true;
        loop {
            match self.iterate() {
                Step::Continue => fresh = false,
                Step::Unbounded => return SolveStatus::Unbounded,
                Step::Limit => return SolveStatus::IterationLimit,
                Step::Optimal => {
                    if fresh {
                        return SolveStatus::Optimal;
                    }
                    // Confirm on a clean factorization before accepting.
                    self.refactor();
                    self.recompute_basic();
                    fresh = true;
                }
            }
        }
    }

    fn iterate(&mut self) -> Step {
        let y = self.duals();
        let bland = self.degenerate_run >= self.tol.bland_after;
        let Some((q, dir)) = self.price(&y, bland) else {
            return Step::Optimal;
        };
        if self.iterations >= self.limit {
            return Step::Limit;
        }

        let mut w = vec![0.0; self.m];
        self.load_column(q, &mut w);
        self.ftran(&mut w);

        // Ratio test over basic variables; ties go to the lowest column index.
        let mut theta = f64::INFINITY;
        let mut leave: Option<(usize, f64)> = None;
        for (k, &wk) in w.iter().enumerate() {
            if wk.abs() <= self.tol.pivot {
                continue;
            }
            let j = self.basis[k];
            let rate = -dir * wk;
            let (ratio, bound) = if rate < 0.0 {
                if !self.lower[j].is_finite() {
                    continue;
                }
                ((self.x[j] - self.lower[j]) / -rate, self.lower[j])
            } else {
                if !self.upper[j].is_finite() {
                    continue;
                }
                ((self.upper[j] - self.x[j]) / rate, self.upper[j])
            };
            let ratio = ratio.max(0.0);
            let take = match leave {
                None => true,
                Some((slot, _)) => {
                    let eps = TIE_EPS * (1.0 + theta);
                    ratio < theta - eps || (ratio <= theta + eps && j < self.basis[slot])
                }
            };
            if take {
                theta = theta.min(ratio);
                leave = Some((k, bound));
            }
        }
        let span = self.upper[q] - self.lower[q];
        let flip = span.is_finite() && span <= theta + TIE_EPS * (1.0 + theta);
        if flip {
            theta = span;
        } else if leave.is_none() {
            return Step::Unbounded;
        }

        if let Some((r, _)) = leave {
            let wmax = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if !flip && !self.etas.is_empty() && w[r].abs() < STABLE_PIVOT * wmax {
                // Likely eta-file round-off; retry on a fresh factorization.
                self.refactor();
                self.recompute_basic();
                return Step::Continue;
            }
        }

        if theta <= TIE_EPS {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
        self.iterations += 1;

        if theta > 0.0 {
            for (k, &wk) in w.iter().enumerate() {
                if wk != 0.0 {
                    self.x[self.basis[k]] -= dir * theta * wk;
                }
            }
        }
        if flip {
            self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
            return Step::Continue;
        }
        self.x[q] += dir * theta;

        let (r, bound) = leave.expect("blocking row exists");
        let out = self.basis[r];
        self.x[out] = bound;
        self.slot_of[out] = NONBASIC;
        self.basis[r] = q;
        self.slot_of[q] = r;
        self.etas.push(Eta {
            slot: r,
            pivot: w[r],
            entries: w.iter().enumerate().filter(|&(k, v)| k != r && *v != 0.0).map(|(k, v)| (k, *v)).collect(),
        });
        if self.etas.len() >= self.tol.refactor_interval {
            self.refactor();
            self.recompute_basic();
        }
        Step::Continue
    }

    /// Entering column and direction (+1 up, -1 down), or `None` at optimality.
    fn price(&self, y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let tol = self.dual_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            if self.slot_of[j] != NONBASIC || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.cost[j] - self.dot_column(j, y);
            let dir = if self.x[j] == self.lower[j] {
                if d < -tol { 1.0 } else { continue }
            } else if self.x[j] == self.upper[j] {
                if d > tol { -1.0 } else { continue }
            } else if d.abs() > tol {
                -d.signum()
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn load_column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j >= self.n {
            out[j - self.n] = self.art_sign[j - self.n];
        } else {
            for (i, a) in self.p.matrix.col(j) {
                out[i] = a;
            }
        }
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j >= self.n {
            self.art_sign[j - self.n] * y[j - self.n]
        } else {
            self.p.matrix.dot_col(j, y)
        }
    }

    fn column_entries(&self, j: usize) -> Vec<(usize, f64)> {
        if j >= self.n {
            vec![(j - self.n, self.art_sign[j - self.n])]
        } else {
            self.p.matrix.col(j).collect()
        }
    }

    /// Row duals `y` with `B^T y = c_B`.
    fn duals(&self) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        for eta in self.etas.iter().rev() {
            let s: f64 = eta.entries.iter().map(|&(k, v)| v * y[k]).sum();
            y[eta.slot] = (y[eta.slot] - s) / eta.pivot;
        }
        self.lu.as_ref().expect("factored").btran(&mut y);
        y
    }

    fn ftran(&self, v: &mut [f64]) {
        self.lu.as_ref().expect("factored").ftran(v);
        for eta in &self.etas {
            let vr = v[eta.slot] / eta.pivot;
            v[eta.slot] = vr;
            if vr != 0.0 {
                for &(k, w) in &eta.entries {
                    v[k] -= w * vr;
                }
            }
        }
    }

    /// Factors the current basis, swapping dependent columns for artificials.
    fn refactor(&mut self) {
        self.etas.clear();
        for _ in 0..=self.m {
            let cols: Vec<Vec<(usize, f64)>> = self.basis.iter().map(|&j| self.column_entries(j)).collect();
            match LuFactors::factor(self.m, &cols, SINGULAR_EPS) {
                Ok(lu) => {
                    self.lu = Some(lu);
                    return;
                }
                Err(s) => {
                    let out = self.basis[s.slot];
                    let art = self.n + s.row;
                    warn!("singular basis: replacing column {out} with artificial of row {}", s.row);
                    self.slot_of[out] = NONBASIC;
                    self.x[out] = nearest_bound(self.x[out], self.lower[out], self.upper[out]);
                    if self.slot_of[art] != NONBASIC {
                        // The row's artificial is already basic elsewhere; free that slot too.
                        let other = self.slot_of[art];
                        self.basis[other] = out;
                        self.slot_of[out] = other;
                    }
                    self.basis[s.slot] = art;
                    self.slot_of[art] = s.slot;
                }
            }
        }
        panic!("basis repair did not converge");
    }

    /// `x_B = B^{-1} (b - N x_N)`
    fn recompute_basic(&mut self) {
        let mut r = self.p.rhs.clone();
        for j in 0..self.n + self.m {
            if self.slot_of[j] == NONBASIC && self.x[j] != 0.0 {
                let xj = self.x[j];
                if j >= self.n {
                    r[j - self.n] -= self.art_sign[j - self.n] * xj;
                } else {
                    for (i, a) in self.p.matrix.col(j) {
                        r[i] -= a * xj;
                    }
                }
            }
        }
        self.ftran(&mut r);
        for (k, &j) in self.basis.iter().enumerate() {
            self.x[j] = r[k];
        }
    }
}

fn nearest_bound(x: f64, lower: f64, upper: f64) -> f64 {
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => {
            if (x - lower).abs() <= (upper - x).abs() {
                lower
            } else {
                upper
            }
        }
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}
