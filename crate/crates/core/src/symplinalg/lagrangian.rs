use super::group::{j0, SpMatrix};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Tolerance on `||C^T J0 C|| / ||C||^2` for Lagrangian frames.
pub const TOL_LAG: f64 = 1e-8;
/// Relative singular-value threshold used for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// A real `2n x n` frame spanning a Lagrangian subspace of `R^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    columns: DMatrix<f64>,
    n: usize,
}

impl LagrangianFrame {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let n = columns.ncols();
        if n == 0 || columns.nrows() != 2 * n {
            return Err(Error::validation(format!(
                "Lagrangian frame must be 2n x n, got {} x {}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        if !columns.iter().all(|v| v.is_finite()) {
            return Err(Error::validation("Lagrangian frame has non-finite entries"));
        }
        if numerical_rank(&columns) < n {
            return Err(Error::validation("Lagrangian frame is rank deficient"));
        }
        let scale = columns.norm_squared();
        let iso = (columns.transpose() * j0(n) * &columns).norm();
        if iso > TOL_LAG * scale {
            return Err(Error::validation(format!(
                "frame is not Lagrangian: ||C^T J0 C|| / ||C||^2 = {:.3e}",
                iso / scale
            )));
        }
        Ok(LagrangianFrame { columns, n })
    }

    pub(crate) fn from_trusted(columns: DMatrix<f64>) -> Self {
        let n = columns.ncols();
        LagrangianFrame { columns, n }
    }

    /// The real subspace spanned by the first n coordinate vectors.
    pub fn real(n: usize) -> Self {
        let mut c = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            c[(i, i)] = 1.0;
        }
        LagrangianFrame { columns: c, n }
    }

    /// The subspace spanned by the last n coordinate vectors.
    pub fn imaginary(n: usize) -> Self {
        let mut c = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            c[(n + i, i)] = 1.0;
        }
        LagrangianFrame { columns: c, n }
    }

    /// The graph `{(x, S x)}` of a symmetric matrix.
    pub fn graph(s: &DMatrix<f64>) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n || (s - s.transpose()).norm() > 1e-12 * (1.0 + s.norm()) {
            return Err(Error::validation("graph needs a symmetric square matrix"));
        }
        let mut c = DMatrix::zeros(2 * n, n);
        c.view_mut((0, 0), (n, n)).fill_with_identity();
        c.view_mut((n, 0), (n, n)).copy_from(s);
        Ok(LagrangianFrame { columns: c, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    /// Image under a symplectic matrix.
    pub fn transformed(&self, m: &SpMatrix) -> LagrangianFrame {
        LagrangianFrame::from_trusted(m.matrix() * &self.columns)
    }

    /// Columns as the complex `n x n` matrix `X + iY`. For a Lagrangian
    /// frame this is invertible, and it is unitary exactly when the frame
    /// is orthonormal for the Hermitian structure.
    pub fn complex_matrix(&self) -> Vec<Complex64> {
        complex_block(&self.columns, self.n)
    }

    /// Orthonormal basis for the Hermitian structure, by Gram-Schmidt on
    /// the complex columns.
    pub fn orthonormalized(&self) -> LagrangianFrame {
        let n = self.n;
        let mut cols: Vec<Vec<Complex64>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| Complex64::new(self.columns[(i, j)], self.columns[(n + i, j)]))
                    .collect()
            })
            .collect();
        for j in 0..n {
            for _ in 0..2 {
                for k in 0..j {
                    let proj: Complex64 =
                        (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                    for i in 0..n {
                        let v = cols[k][i];
                        cols[j][i] -= proj * v;
                    }
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in cols[j].iter_mut() {
                *z /= norm;
            }
        }
        let mut c = DMatrix::zeros(2 * n, n);
        for j in 0..n {
            for i in 0..n {
                c[(i, j)] = cols[j][i].re;
                c[(n + i, j)] = cols[j][i].im;
            }
        }
        LagrangianFrame::from_trusted(c)
    }
}

pub(crate) fn complex_block(frame: &DMatrix<f64>, n: usize) -> Vec<Complex64> {
    let mut z = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            z.push(Complex64::new(frame[(i, j)], frame[(n + i, j)]));
        }
    }
    z
}

/// Determinant of a row-major complex matrix by partial pivoting.
pub(crate) fn complex_det(n: usize, mut a: Vec<Complex64>) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for row in col + 1..n {
            let v = a[row * n + col].norm();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
        }
    }
    det
}

/// `(det Z / |det Z|)^2` for `Z = X + iY` built from a Lagrangian frame.
///
/// Changing the real basis multiplies `det Z` by a real number, so this
/// unit complex number depends only on the subspace.
pub(crate) fn det2_phase(frame: &DMatrix<f64>, n: usize) -> Complex64 {
    // columns scaled to unit length first so huge frames do not overflow
    let mut scaled = frame.clone();
    for mut c in scaled.column_iter_mut() {
        let norm = c.norm();
        if norm > 0.0 {
            c /= norm;
        }
    }
    let d = complex_det(n, complex_block(&scaled, n));
    let u = d / d.norm();
    u * u
}

/// `det^2_{L0}(L1) = det(U1)^2 * conj(det(U0))^2` with `U0, U1` unitary
/// representatives of the two frames.
pub fn lagrangian_det2(l0: &LagrangianFrame, l1: &LagrangianFrame) -> Result<Complex64> {
    if l0.n != l1.n {
        return Err(Error::validation(format!(
            "frames have different half-dimensions {} and {}",
            l0.n, l1.n
        )));
    }
    let n = l0.n;
    let u0 = complex_det(n, l0.orthonormalized().complex_matrix());
    let u1 = complex_det(n, l1.orthonormalized().complex_matrix());
    let d0 = u0 / u0.norm();
    let d1 = u1 / u1.norm();
    Ok(d1 * d1 * (d0 * d0).conj())
}

pub(crate) fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// Whether `L ∩ W = 0`, via the rank of `[L | W]`.
pub fn is_transverse(l: &LagrangianFrame, w: &LagrangianFrame) -> bool {
    let n = l.n;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (2 * n, n)).copy_from(&l.columns);
    m.view_mut((0, n), (2 * n, n)).copy_from(&w.columns);
    numerical_rank(&m) == 2 * n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplinalg::group::random_symplectic;
    use crate::numeric::stream_rng;

    fn line(theta: f64) -> LagrangianFrame {
        LagrangianFrame::new(DMatrix::from_row_slice(2, 1, &[theta.cos(), theta.sin()])).unwrap()
    }

    #[test]
    fn identity_and_line_values() {
        let r = LagrangianFrame::real(3);
        let d = lagrangian_det2(&r, &r).unwrap();
        assert!((d - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        for theta in [0.2, 1.0, 2.5, -0.7] {
            let d = lagrangian_det2(&line(0.0), &line(theta)).unwrap();
            // oracle: the 1x1 unitary is e^{i theta}
            let expect = Complex64::from_polar(1.0, 2.0 * theta);
            assert!((d - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_frames() {
        let bad = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(LagrangianFrame::new(bad).is_err());
        let deficient = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(LagrangianFrame::new(deficient).is_err());
        let d = lagrangian_det2(&LagrangianFrame::real(1), &LagrangianFrame::real(2));
        assert!(d.is_err());
    }

    #[test]
    fn basis_independent_and_matches_fast_phase() {
        let mut rng = stream_rng(3, 0);
        let n = 3;
        let m = random_symplectic(n, 0.6, &mut rng);
        let l = LagrangianFrame::real(n).transformed(&m);
        let change = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 1.0, -3.0, 1.0, 0.0, 0.5]);
        let l2 = LagrangianFrame::new(l.columns() * change).unwrap();
        let base = LagrangianFrame::real(n);
        let a = lagrangian_det2(&base, &l).unwrap();
        let b = lagrangian_det2(&base, &l2).unwrap();
        assert!((a - b).norm() < 1e-10);
        assert!((a - det2_phase(l.columns(), n)).norm() < 1e-10);
    }

    #[test]
    fn transversality_rank_test() {
        let r = LagrangianFrame::real(2);
        let i = LagrangianFrame::imaginary(2);
        assert!(is_transverse(&r, &i));
        assert!(!is_transverse(&r, &r));
    }
}
