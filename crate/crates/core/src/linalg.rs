//! Small dense complex matrices and eigensolvers.
//!
//! The matrices here are tiny (one row per domain component), so we use a
//! self-contained cyclic Jacobi solver instead of pulling in a LAPACK
//! backend. Unitary matrices are diagonalized through their commuting
//! Hermitian and skew-Hermitian parts.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("eigendecomposition residual {residual:e} exceeds tolerance {tol:e}")]
    EigFailure { residual: f64, tol: f64 },
    #[error("matrix is not unitary: max |S*S - I| = {defect:e}")]
    NotUnitary { defect: f64 },
}

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMat { rows: r, cols: c, data }
    }

    /// Diagonal matrix from the given entries.
    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = CMat::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Entrywise max absolute value.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max |(S*S - I)_{ij}|; zero for a unitary matrix.
    pub fn unitarity_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let p = self.adjoint().mul(self);
        let mut defect: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                defect = defect.max((p[(i, j)] - target).norm());
            }
        }
        defect
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let (piv, _) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if a[(piv, k)].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if piv != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(piv, j)];
                    a[(piv, j)] = tmp;
                }
                det = -det;
            }
            det *= a[(k, k)];
            for i in k + 1..n {
                let factor = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    let sub = factor * a[(k, j)];
                    a[(i, j)] -= sub;
                }
            }
        }
        det
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns of a unitary matrix.
pub fn hermitian_eig(a: &CMat) -> (Vec<f64>, CMat) {
    assert_eq!(a.nrows(), a.ncols());
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = CMat::identity(n);
    let scale = a.max_abs().max(1.0);
    let tol = 1e-15 * scale;

    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= tol * 1e-2 {
                    continue;
                }
                // Phase that makes the off-diagonal entry real, then a
                // classical symmetric Jacobi rotation.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (app - aqq) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, -s*phase], [s*conj(phase), c]] acting on columns (p,q).
                let gpp = Complex64::new(c, 0.0);
                let gpq = -phase * s;
                let gqp = phase.conj() * s;
                let gqq = Complex64::new(c, 0.0);
                // A <- G^H A G
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * gpp + aiq * gqp;
                    a[(i, q)] = aip * gpq + aiq * gqq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = gpp.conj() * apj + gqp.conj() * aqj;
                    a[(q, j)] = gpq.conj() * apj + gqq.conj() * aqj;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * gpp + viq * gqp;
                    v[(i, q)] = vip * gpq + viq * gqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = CMat::zeros(n, n);
    for (newj, &oldj) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, newj)] = v[(i, oldj)];
        }
    }
    (vals, vecs)
}

/// Eigendecomposition of a unitary matrix.
///
/// Splits `S = H + iK` into its commuting Hermitian parts, diagonalizes
/// `H`, then resolves each near-degenerate block of `H` with `K`.
/// Eigenvalues are returned on the unit circle together with orthonormal
/// eigenvector columns, sorted by phase in `(-pi, pi]`.
pub fn unitary_eig(s: &CMat, residual_tol: f64) -> Result<(Vec<Complex64>, CMat), LinalgError> {
    assert_eq!(s.nrows(), s.ncols());
    let n = s.nrows();
    let defect = s.unitarity_defect();
    if defect > 1e-10 {
        return Err(LinalgError::NotUnitary { defect });
    }

    let sh = s.adjoint();
    let mut h = CMat::zeros(n, n);
    let mut k = CMat::zeros(n, n);
    let half = Complex64::new(0.5, 0.0);
    let half_over_i = Complex64::new(0.0, -0.5);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = (s[(i, j)] + sh[(i, j)]) * half;
            k[(i, j)] = (s[(i, j)] - sh[(i, j)]) * half_over_i;
        }
    }

    let (hvals, hvecs) = hermitian_eig(&h);

    // Group eigenvalues of H that are too close to trust the Jacobi
    // eigenvectors individually; K separates conjugate phases inside.
    let cluster_tol = 1e-6;
    let mut v = CMat::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (hvals[end] - hvals[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        let m = end - start;
        if m == 1 {
            for i in 0..n {
                v[(i, start)] = hvecs[(i, start)];
            }
        } else {
            let mut vc = CMat::zeros(n, m);
            for j in 0..m {
                for i in 0..n {
                    vc[(i, j)] = hvecs[(i, start + j)];
                }
            }
            let ksub = vc.adjoint().mul(&k).mul(&vc);
            let (_, w) = hermitian_eig(&ksub);
            let rotated = vc.mul(&w);
            for j in 0..m {
                for i in 0..n {
                    v[(i, start + j)] = rotated[(i, j)];
                }
            }
        }
        start = end;
    }

    // Rayleigh quotients, projected back to the unit circle.
    let mut pairs: Vec<(Complex64, Vec<Complex64>)> = Vec::with_capacity(n);
    let mut residual: f64 = 0.0;
    for j in 0..n {
        let col = v.column(j);
        let sv = s.matvec(&col);
        let mut mu = Complex64::new(0.0, 0.0);
        for i in 0..n {
            mu += col[i].conj() * sv[i];
        }
        let mu = mu / mu.norm();
        let res: f64 = (0..n)
            .map(|i| (sv[i] - mu * col[i]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(res);
        pairs.push((mu, col));
    }
    if residual > residual_tol {
        return Err(LinalgError::EigFailure {
            residual,
            tol: residual_tol,
        });
    }

    pairs.sort_by(|a, b| a.0.arg().total_cmp(&b.0.arg()));
    let vals: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let mut vecs = CMat::zeros(n, n);
    for (j, (_, col)) in pairs.iter().enumerate() {
        for i in 0..n {
            vecs[(i, j)] = col[i];
        }
    }
    Ok((vals, vecs))
}
