//! Dense symmetric-indefinite linear algebra for the KKT systems.
//!
//! The factorization is Bunch-Kaufman LDL^T with partial pivoting
//! (LAPACK `sytf2`-style, lower triangle). Besides the solve it exposes
//! the inertia of the pivot blocks, which drives the solver's
//! regularization of non-convex KKT systems.

/// Dense square symmetric matrix, row-major full storage.
#[derive(Debug, Clone)]
pub struct SymMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> SymMat {
        SymMat { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
        if i != j {
            self.data[j * self.n + i] += v;
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }
}

/// Signs of D's eigenvalues: (positive, negative, zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, Copy)]
enum Pivot {
    /// 1x1 block at this row.
    Single,
    /// First row of a 2x2 block.
    PairHead,
    /// Second row of a 2x2 block.
    PairTail,
}

pub struct LdltFactor {
    n: usize,
    /// Unit lower triangle (strict part) and D blocks on/near the diagonal.
    a: Vec<f64>,
    perm: Vec<usize>,
    pivots: Vec<Pivot>,
    inertia: Inertia,
}

const ALPHA: f64 = 0.6403882032022076; // (1 + sqrt(17)) / 8
const PIVOT_TINY: f64 = 1e-13;

impl LdltFactor {
    /// Factor P A P^T = L D L^T. Never fails; rank deficiency shows up as
    /// zero entries in the inertia.
    pub fn factor(m: &SymMat) -> LdltFactor {
        let n = m.n;
        let mut a = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivots = Vec::with_capacity(n);
        let at = |a: &Vec<f64>, i: usize, j: usize| a[i * n + j];

        let mut k = 0;
        while k < n {
            // Largest off-diagonal magnitude in column k below the diagonal.
            let mut lambda = 0.0;
            let mut r = k;
            for i in (k + 1)..n {
                let v = at(&a, i, k).abs();
                if v > lambda {
                    lambda = v;
                    r = i;
                }
            }
            let akk = at(&a, k, k).abs();

            let mut use_two = false;
            let mut swap_with = None;
            if lambda > 0.0 && akk < ALPHA * lambda {
                // Largest off-diagonal magnitude in row/column r.
                let mut sigma = 0.0;
                for i in k..n {
                    if i != r {
                        let v = if i > r { at(&a, i, r) } else { at(&a, r, i) }.abs();
                        if v > sigma {
                            sigma = v;
                        }
                    }
                }
                if akk * sigma >= ALPHA * lambda * lambda {
                    // keep 1x1 pivot at k
                } else if at(&a, r, r).abs() >= ALPHA * sigma {
                    swap_with = Some(r); // 1x1 pivot at r
                } else {
                    use_two = true; // 2x2 pivot with rows (k, r)
                }
            }

            if let Some(r) = swap_with {
                swap_sym(&mut a, n, k, r);
                perm.swap(k, r);
            }

            // Only the lower triangle is maintained from here on; every
            // later read of the active submatrix stays at or below the
            // diagonal.
            if !use_two {
                let d = at(&a, k, k);
                pivots.push(Pivot::Single);
                if d.abs() > PIVOT_TINY {
                    // Snapshot the pivot column; the update overwrites it
                    // with L entries as it goes.
                    let col: Vec<f64> = ((k + 1)..n).map(|i| a[i * n + k]).collect();
                    for i in (k + 1)..n {
                        let lik = col[i - k - 1] / d;
                        if lik != 0.0 {
                            let row = &mut a[i * n + k + 1..i * n + i + 1];
                            for (aij, &cj) in row.iter_mut().zip(&col) {
                                *aij -= lik * cj;
                            }
                        }
                        a[i * n + k] = lik;
                    }
                }
                k += 1;
            } else {
                if r != k + 1 {
                    swap_sym(&mut a, n, k + 1, r);
                    perm.swap(k + 1, r);
                }
                // D block [[d11, d21], [d21, d22]]
                let d11 = at(&a, k, k);
                let d21 = at(&a, k + 1, k);
                let d22 = at(&a, k + 1, k + 1);
                let det = d11 * d22 - d21 * d21;
                let col1: Vec<f64> = ((k + 2)..n).map(|i| a[i * n + k]).collect();
                let col2: Vec<f64> = ((k + 2)..n).map(|i| a[i * n + k + 1]).collect();
                for i in (k + 2)..n {
                    let b1 = col1[i - k - 2];
                    let b2 = col2[i - k - 2];
                    // Solve [l1 l2] * D = [b1 b2]
                    let l1 = (b1 * d22 - b2 * d21) / det;
                    let l2 = (b2 * d11 - b1 * d21) / det;
                    let row = &mut a[i * n + k + 2..i * n + i + 1];
                    for ((aij, &c1), &c2) in row.iter_mut().zip(&col1).zip(&col2) {
                        *aij -= l1 * c1 + l2 * c2;
                    }
                    a[i * n + k] = l1;
                    a[i * n + k + 1] = l2;
                }
                pivots.push(Pivot::PairHead);
                pivots.push(Pivot::PairTail);
                k += 2;
            }
        }

        let inertia = compute_inertia(&a, n, &pivots);
        LdltFactor { n, a, perm, pivots, inertia }
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    pub fn is_singular(&self) -> bool {
        self.inertia.zero > 0
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let at = |i: usize, j: usize| self.a[i * n + j];

        // Apply permutation: w = P b
        let mut x: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();

        // Forward substitution with unit lower triangle, skipping D columns.
        let mut k = 0;
        while k < n {
            match self.pivots[k] {
                Pivot::Single => {
                    let xk = x[k];
                    for i in (k + 1)..n {
                        x[i] -= at(i, k) * xk;
                    }
                    k += 1;
                }
                _ => {
                    let (x1, x2) = (x[k], x[k + 1]);
                    for i in (k + 2)..n {
                        x[i] -= at(i, k) * x1 + at(i, k + 1) * x2;
                    }
                    k += 2;
                }
            }
        }

        // Block-diagonal solve.
        let mut k = 0;
        while k < n {
            match self.pivots[k] {
                Pivot::Single => {
                    let d = at(k, k);
                    x[k] = if d.abs() > PIVOT_TINY { x[k] / d } else { 0.0 };
                    k += 1;
                }
                _ => {
                    let d11 = at(k, k);
                    let d21 = at(k + 1, k);
                    let d22 = at(k + 1, k + 1);
                    let det = d11 * d22 - d21 * d21;
                    let (b1, b2) = (x[k], x[k + 1]);
                    x[k] = (b1 * d22 - b2 * d21) / det;
                    x[k + 1] = (b2 * d11 - b1 * d21) / det;
                    k += 2;
                }
            }
        }

        // Backward substitution with L^T.
        let mut k = n;
        while k > 0 {
            k -= 1;
            if matches!(self.pivots[k], Pivot::PairTail) {
                let head = k - 1;
                for i in (k + 1)..n {
                    x[head] -= at(i, head) * x[i];
                    x[k] -= at(i, k) * x[i];
                }
                k -= 1;
            } else {
                for i in (k + 1)..n {
                    x[k] -= at(i, k) * x[i];
                }
            }
        }

        // Undo permutation: x = P^T y
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[self.perm[i]] = x[i];
        }
        out
    }
}

fn compute_inertia(a: &[f64], n: usize, pivots: &[Pivot]) -> Inertia {
    let mut inertia = Inertia { pos: 0, neg: 0, zero: 0 };
    let mut k = 0;
    while k < n {
        match pivots[k] {
            Pivot::Single => {
                let d = a[k * n + k];
                if d > PIVOT_TINY {
                    inertia.pos += 1;
                } else if d < -PIVOT_TINY {
                    inertia.neg += 1;
                } else {
                    inertia.zero += 1;
                }
                k += 1;
            }
            _ => {
                // A Bunch-Kaufman 2x2 block always carries one positive
                // and one negative eigenvalue.
                inertia.pos += 1;
                inertia.neg += 1;
                k += 2;
            }
        }
    }
    inertia
}

/// Symmetric permutation i <-> j maintained on the lower triangle only.
fn swap_sym(a: &mut [f64], n: usize, i: usize, j: usize) {
    if i == j {
        return;
    }
    let (i, j) = (i.min(j), i.max(j));
    for c in 0..i {
        a.swap(i * n + c, j * n + c);
    }
    a.swap(i * n + i, j * n + j);
    for m in (i + 1)..j {
        a.swap(m * n + i, j * n + m);
    }
    for m in (j + 1)..n {
        a.swap(m * n + i, m * n + j);
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMat {
        let mut m = SymMat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-2.0..2.0);
                m.set(i, j, v);
            }
        }
        m
    }

    #[test]
    fn factorization_solves_random_indefinite_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = 1 + (trial % 12);
            let m = random_sym(n, &mut rng);
            let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = mat_vec(&m, &x_true);
            let f = LdltFactor::factor(&m);
            if f.is_singular() {
                continue;
            }
            let x = f.solve(&b);
            let resid = mat_vec(&m, &x)
                .iter()
                .zip(&b)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(resid < 1e-8, "trial {trial}: residual {resid}");
        }
    }

    #[test]
    fn inertia_matches_eigenvalue_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = 2 + (trial % 10);
            let m = random_sym(n, &mut rng);
            let f = LdltFactor::factor(&m);
            let dm = nalgebra::DMatrix::from_row_slice(n, n, &m.data);
            let eigs = dm.symmetric_eigenvalues();
            let pos = eigs.iter().filter(|&&e| e > 1e-9).count();
            let neg = eigs.iter().filter(|&&e| e < -1e-9).count();
            assert_eq!(
                (f.inertia().pos, f.inertia().neg),
                (pos, neg),
                "trial {trial}"
            );
        }
    }

    #[test]
    fn saddle_point_system_has_expected_inertia() {
        // [[I, A^T], [A, 0]] with full-rank A has inertia (n, m, 0).
        let (n, m_rows) = (4, 2);
        let mut k = SymMat::zeros(n + m_rows);
        for i in 0..n {
            k.set(i, i, 1.0);
        }
        let a = [[1.0, 0.0, 2.0, 0.0], [0.0, 1.0, 0.0, -1.0]];
        for (r, row) in a.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                k.set(n + r, c, v);
            }
        }
        let f = LdltFactor::factor(&k);
        assert_eq!(f.inertia(), Inertia { pos: n, neg: m_rows, zero: 0 });
    }

    fn mat_vec(m: &SymMat, v: &[f64]) -> Vec<f64> {
        (0..m.n)
            .map(|i| (0..m.n).map(|j| m.at(i, j) * v[j]).sum())
            .collect()
    }
}
