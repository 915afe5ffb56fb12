//! Real symmetric tridiagonal matrices: Sturm-sequence bisection, inverse
//! iteration, pivoted direct solves and the full eigendecomposition.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty() && off.len() + 1 == diag.len(), "bad tridiagonal shape");
        SymTridiag { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count of the `LDL^T` pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let prev = if q.abs() < tiny { -tiny } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        assert!(index < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        hi += 1e-12 * scale;
        lo -= 1e-12 * scale;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvalues in `[lo, hi)`, each refined by bisection.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let first = self.count_below(lo);
        let last = self.count_below(hi);
        (first..last).map(|k| self.eigenvalue(k)).collect()
    }

    /// Unit eigenvector for an eigenvalue approximation `lambda` by inverse iteration.
    pub fn inverse_iteration(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let (lo, hi) = self.gershgorin();
        let perturb = 1e-10 * (hi - lo).max(1.0);
        let lu = TridiagLu::factor(&self.diag, &self.off, &self.off, -(lambda - perturb))?;
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 1e-3 * ((i * 7919) % 101) as f64).collect();
        normalize(&mut x);
        for _ in 0..6 {
            x = lu.solve(&x);
            normalize(&mut x);
        }
        Ok(x)
    }

    /// Solve `(T + shift I) x = b` by LU with partial pivoting.
    pub fn solve_shifted(&self, shift: f64, b: &[f64]) -> Result<Vec<f64>> {
        let lu = TridiagLu::factor(&self.diag, &self.off, &self.off, shift)?;
        let mut x = lu.solve(b);
        // One step of iterative refinement.
        let ax = self.matvec(&x);
        let r: Vec<f64> = (0..b.len()).map(|i| b[i] - ax[i] - shift * x[i]).collect();
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        Ok(x)
    }

    /// Full eigendecomposition: ascending eigenvalues and orthonormal
    /// eigenvectors as the columns of the returned matrix.
    pub fn full_eigen(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.len();
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = self.diag[i];
            if i + 1 < n {
                dense[(i, i + 1)] = self.off[i];
                dense[(i + 1, i)] = self.off[i];
            }
        }
        let eig = SymmetricEigen::try_new(dense, f64::EPSILON, 0)
            .ok_or_else(|| Error::Spectrum("symmetric eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::<f64>::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(k).into_owned();
            // Deterministic sign: first significant component positive.
            let lead = v.iter().find(|x| x.abs() > 1e-8).copied().unwrap_or(1.0);
            if lead < 0.0 {
                v = -v;
            }
            vectors.set_column(col, &v);
        }
        Ok((values, vectors))
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
}

/// LU factorization with partial pivoting of a general tridiagonal matrix
/// plus a diagonal shift (the LAPACK `gttrf` scheme).
struct TridiagLu {
    /// multipliers
    l: Vec<f64>,
    /// U diagonal, first and second superdiagonals
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], lower: &[f64], upper: &[f64], shift: f64) -> Result<Self> {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v + shift).collect();
        let mut dl = lower.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    return Err(Error::Spectrum(format!("singular pivot at row {i}")));
                }
                let m = dl[i] / d[i];
                l[i] = m;
                d[i + 1] -= m * du[i];
            } else {
                let m = d[i] / dl[i];
                l[i] = m;
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - m * tmp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -m * du2[i];
                }
                du[i] = tmp;
                swapped[i] = true;
            }
            dl[i] = 0.0;
        }
        if d[n - 1] == 0.0 {
            return Err(Error::Spectrum("singular final pivot".into()));
        }
        Ok(TridiagLu {
            l,
            u0: d,
            u1: du,
            u2: du2,
            swapped,
        })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let tmp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = tmp - self.l[i] * x[i];
            } else {
                x[i + 1] -= self.l[i] * x[i];
            }
        }
        x[n - 1] /= self.u0[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.u1[n - 2] * x[n - 1]) / self.u0[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.u1[i] * x[i + 1] - self.u2[i] * x[i + 2]) / self.u0[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplace_1d(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn bisection_matches_closed_form() {
        let n = 50;
        let t = laplace_1d(n);
        for k in [0, 1, 17, 49] {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k) - exact).abs() < 1e-12);
        }
        assert_eq!(t.count_below(0.0), 0);
        assert_eq!(t.count_below(4.1), n);
    }

    #[test]
    fn inverse_iteration_residual() {
        let t = laplace_1d(200);
        let lam = t.eigenvalue(0);
        let v = t.inverse_iteration(lam).unwrap();
        let tv = t.matvec(&v);
        let res: f64 = tv.iter().zip(&v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        assert!(res < 1e-10, "{res}");
    }

    #[test]
    fn full_eigen_is_orthonormal() {
        let t = SymTridiag::new(
            (0..40).map(|i| 1.0 + (i as f64).sin()).collect(),
            (0..39).map(|i| 0.3 + 0.1 * (i as f64).cos()).collect(),
        );
        let (vals, vecs) = t.full_eigen().unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let gram = vecs.transpose() * &vecs;
        for i in 0..40 {
            for j in 0..40 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - e).abs() < 1e-12);
            }
        }
        for (k, &v) in vals.iter().enumerate() {
            assert!((v - t.eigenvalue(k)).abs() < 1e-11);
        }
    }

    proptest! {
        #[test]
        fn shifted_solve_round_trip(
            diag in prop::collection::vec(-3.0f64..3.0, 30),
            off in prop::collection::vec(-1.0f64..1.0, 29),
            x in prop::collection::vec(-1.0f64..1.0, 30),
            shift in -2.0f64..2.0,
        ) {
            let t = SymTridiag::new(diag, off);
            let near = t.eigenvalues_in(-shift - 1e-3, -shift + 1e-3);
            prop_assume!(near.is_empty());
            let mut b = t.matvec(&x);
            for (bi, xi) in b.iter_mut().zip(&x) {
                *bi += shift * xi;
            }
            let y = t.solve_shifted(shift, &b).unwrap();
            for (a, e) in y.iter().zip(&x) {
                prop_assert!((a - e).abs() < 1e-6 * (1.0 + e.abs()));
            }
        }
    }
}
