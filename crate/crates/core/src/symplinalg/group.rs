use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Tolerance on `||M^T J0 M - J0||_F` for externally supplied matrices.
pub const TOL_SP: f64 = 1e-8;

/// The standard complex structure `[[0, -I], [I, 0]]` on `R^{2n}`.
pub fn j0(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// `||M^T J0 M - J0||_F`.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows() / 2;
    let j = j0(n);
    (m.transpose() * &j * m - j).norm()
}

/// An element of `Sp(2n, R)` in the basis `(x_1..x_n, y_1..y_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpMatrix {
    m: DMatrix<f64>,
    n: usize,
}

impl SpMatrix {
    /// Validates shape and the symplectic condition; never repairs.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
            return Err(Error::validation(format!(
                "symplectic matrix must be 2n x 2n, got {} x {}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = symplectic_defect(&m);
        if !(defect <= TOL_SP) {
            return Err(Error::validation(format!(
                "matrix is not symplectic: ||M^T J0 M - J0|| = {defect:.3e}"
            )));
        }
        let n = m.nrows() / 2;
        Ok(SpMatrix { m, n })
    }

    /// Wraps a product of validated matrices without re-checking.
    pub(crate) fn from_trusted(m: DMatrix<f64>) -> Self {
        let n = m.nrows() / 2;
        SpMatrix { m, n }
    }

    pub fn identity(n: usize) -> Self {
        SpMatrix {
            m: DMatrix::identity(2 * n, 2 * n),
            n,
        }
    }

    /// Rotation by `angle` in the first complex coordinate plane.
    pub fn rotation(n: usize, angle: f64) -> Self {
        let mut m = DMatrix::identity(2 * n, 2 * n);
        let (s, c) = angle.sin_cos();
        m[(0, 0)] = c;
        m[(0, n)] = -s;
        m[(n, 0)] = s;
        m[(n, n)] = c;
        SpMatrix { m, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn mul(&self, other: &SpMatrix) -> SpMatrix {
        SpMatrix::from_trusted(&self.m * &other.m)
    }

    /// Exact inverse `-J0 M^T J0`.
    pub fn inverse(&self) -> SpMatrix {
        let j = j0(self.n);
        SpMatrix::from_trusted(-(&j * self.m.transpose() * &j))
    }

    pub fn pow(&self, p: u64) -> SpMatrix {
        let mut acc = SpMatrix::identity(self.n);
        let mut base = self.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Square root by the Denman-Beavers iteration; principal unless the
    /// matrix has eigenvalues on the negative real axis, where it may fail.
    pub fn principal_sqrt(&self) -> Option<SpMatrix> {
        let dim = 2 * self.n;
        let mut y = self.m.clone();
        let mut z = DMatrix::<f64>::identity(dim, dim);
        for _ in 0..100 {
            let yi = y.clone().try_inverse()?;
            let zi = z.clone().try_inverse()?;
            let y_next = (&y + zi) * 0.5;
            let z_next = (&z + yi) * 0.5;
            let change = (&y_next - &y).norm() / y_next.norm().max(1.0);
            y = y_next;
            z = z_next;
            if !change.is_finite() {
                return None;
            }
            if change < 1e-14 {
                let err = (&y * &y - &self.m).norm() / self.m.norm().max(1.0);
                return (err < 1e-9).then(|| SpMatrix::from_trusted(y));
            }
        }
        None
    }
}

/// A random Hamiltonian generator `J0 S` with `S` symmetric Gaussian of
/// the given scale.
pub fn random_hamiltonian<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let dim = 2 * n;
    let mut s = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for k in i..dim {
            let v: f64 = rng.sample(StandardNormal);
            s[(i, k)] = scale * v;
            s[(k, i)] = scale * v;
        }
    }
    j0(n) * s
}

/// `exp(A)` for a Hamiltonian generator; the result is symplectic.
pub fn exp_hamiltonian(a: &DMatrix<f64>) -> SpMatrix {
    SpMatrix::from_trusted(a.clone().exp())
}

/// A random symplectic matrix `exp(J0 S)`.
pub fn random_symplectic<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> SpMatrix {
    exp_hamiltonian(&random_hamiltonian(n, scale, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::stream_rng;

    #[test]
    fn validation_rejects_non_symplectic() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(matches!(SpMatrix::new(m), Err(Error::Validation(_))));
        let m = DMatrix::from_row_slice(2, 3, &[1.0; 6]);
        assert!(SpMatrix::new(m).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert!(SpMatrix::new(m).is_ok());
    }

    #[test]
    fn random_symplectic_is_symplectic_and_inverse_is_exact() {
        let mut rng = stream_rng(1, 0);
        for n in 1..=3 {
            let m = random_symplectic(n, 0.5, &mut rng);
            assert!(symplectic_defect(m.matrix()) < 1e-10);
            let id = m.mul(&m.inverse());
            assert!((id.matrix() - DMatrix::identity(2 * n, 2 * n)).norm() < 1e-10);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = stream_rng(2, 0);
        let m = random_symplectic(2, 0.3, &mut rng);
        let r = m.principal_sqrt().unwrap();
        assert!((r.mul(&r).matrix() - m.matrix()).norm() < 1e-10);
        assert!(symplectic_defect(r.matrix()) < 1e-9);
    }

    #[test]
    fn pow_matches_repeated_product() {
        let r = SpMatrix::rotation(2, 0.3);
        let p = r.pow(5);
        let q = SpMatrix::rotation(2, 1.5);
        assert!((p.matrix() - q.matrix()).norm() < 1e-12);
    }
}
