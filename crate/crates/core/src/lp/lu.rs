//! Basis factorization `P B = L U` with partial pivoting, kept as sparse
//! columns for the triangular solves.

/// Sparse LU factors of a square basis matrix.
#[derive(Debug, Clone)]
pub(crate) struct LuFactors {
    m: usize,
    /// `perm[k]` is the original row sitting at pivot position `k`.
    perm: Vec<usize>,
    /// Strictly lower part of L (unit diagonal), by column, rows in pivot order.
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Strictly upper part of U, by column.
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
}

/// A basis column that turned out dependent, and a row its replacement
/// unit column would cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Singular {
    pub slot: usize,
    pub row: usize,
}

impl LuFactors {
    /// Factors the `m x m` matrix given as sparse columns.
    pub fn factor(m: usize, columns: &[Vec<(usize, f64)>], tiny: f64) -> Result<Self, Singular> {
        let mut a = vec![0.0; m * m];
        for (j, col) in columns.iter().enumerate() {
            for &(i, v) in col {
                a[i + j * m] += v;
            }
        }
        let mut perm: Vec<usize> = (0..m).collect();
        let mut nz = Vec::with_capacity(m);
        for k in 0..m {
            let colk = &a[k * m..(k + 1) * m];
            let mut p = k;
            let mut best = colk[k].abs();
            for (i, v) in colk.iter().enumerate().skip(k + 1) {
                if v.abs() > best {
                    best = v.abs();
                    p = i;
                }
            }
            if best <= tiny {
                return Err(Singular { slot: k, row: perm[k] });
            }
            if p != k {
                for j in 0..m {
                    a.swap(p + j * m, k + j * m);
                }
                perm.swap(p, k);
            }
            let pivot = a[k + k * m];
            nz.clear();
            for i in k + 1..m {
                let v = a[i + k * m];
                if v != 0.0 {
                    a[i + k * m] = v / pivot;
                    nz.push(i);
                }
            }
            if nz.is_empty() {
                continue;
            }
            for j in k + 1..m {
                let akj = a[k + j * m];
                if akj == 0.0 {
                    continue;
                }
                for &i in &nz {
                    a[i + j * m] -= a[i + k * m] * akj;
                }
            }
        }

        let mut l_cols = Vec::with_capacity(m);
        let mut u_cols = Vec::with_capacity(m);
        let mut u_diag = Vec::with_capacity(m);
        for k in 0..m {
            let col = &a[k * m..(k + 1) * m];
            u_cols.push(col[..k].iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect());
            u_diag.push(col[k]);
            l_cols.push(
                col[k + 1..]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| (i + k + 1, *v))
                    .collect(),
            );
        }
        Ok(LuFactors { m, perm, l_cols, u_cols, u_diag })
    }

    /// Solves `B w = v` in place: `v` indexed by row on entry, by basis slot on exit.
    pub fn ftran(&self, v: &mut [f64]) {
        let mut w: Vec<f64> = self.perm.iter().map(|&r| v[r]).collect();
        for k in 0..self.m {
            let wk = w[k];
            if wk != 0.0 {
                for &(i, l) in &self.l_cols[k] {
                    w[i] -= l * wk;
                }
            }
        }
        for k in (0..self.m).rev() {
            if w[k] != 0.0 {
                w[k] /= self.u_diag[k];
                let wk = w[k];
                for &(i, u) in &self.u_cols[k] {
                    w[i] -= u * wk;
                }
            }
        }
        v.copy_from_slice(&w);
    }

    /// Solves `B^T y = c` in place: `c` indexed by basis slot on entry, by row on exit.
    pub fn btran(&self, c: &mut [f64]) {
        let mut z = c.to_vec();
        for k in 0..self.m {
            let s: f64 = self.u_cols[k].iter().map(|&(i, u)| u * z[i]).sum();
            z[k] = (z[k] - s) / self.u_diag[k];
        }
        for k in (0..self.m).rev() {
            let s: f64 = self.l_cols[k].iter().map(|&(i, l)| l * z[i]).sum();
            z[k] -= s;
        }
        for (k, &r) in self.perm.iter().enumerate() {
            c[r] = z[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn dense_to_cols(m: usize, a: &[f64]) -> Vec<Vec<(usize, f64)>> {
        (0..m)
            .map(|j| (0..m).filter(|&i| a[i * m + j] != 0.0).map(|i| (i, a[i * m + j])).collect())
            .collect()
    }

    #[test]
    fn solves_random_systems_both_ways() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let m = rng.gen_range(1..9);
            let mut a: Vec<f64> = (0..m * m)
                .map(|_| if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(-4.0..4.0) })
                .collect();
            for i in 0..m {
                a[i * m + i] += 10.0;
            }
            let lu = LuFactors::factor(m, &dense_to_cols(m, &a), 1e-12).unwrap();
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut b: Vec<f64> = (0..m).map(|i| (0..m).map(|j| a[i * m + j] * x[j]).sum()).collect();
            lu.ftran(&mut b);
            for (p, q) in b.iter().zip(&x) {
                assert!((p - q).abs() < 1e-10);
            }
            let mut c: Vec<f64> = (0..m).map(|j| (0..m).map(|i| a[i * m + j] * x[i]).sum()).collect();
            lu.btran(&mut c);
            for (p, q) in c.iter().zip(&x) {
                assert!((p - q).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn permutation_needs_pivoting() {
        let cols = vec![vec![(1, 1.0)], vec![(0, 2.0)]];
        let lu = LuFactors::factor(2, &cols, 1e-12).unwrap();
        let mut v = vec![4.0, 3.0];
        lu.ftran(&mut v);
        assert_eq!(v, vec![3.0, 2.0]);
    }

    #[test]
    fn dependent_columns_are_singular() {
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]];
        assert!(LuFactors::factor(2, &cols, 1e-12).is_err());
    }
}
