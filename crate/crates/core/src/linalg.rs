//! Small dense complex linear algebra.
//!
//! Everything here is sized for the digital precoding stage: matrices are
//! K x K with K <= 64 (users, never antennas), so plain LU with partial
//! pivoting is both fast enough and accurate enough.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub type CVec = Vec<Complex64>;

/// Inner product a^H b.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
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

    /// Build from column vectors (all of equal length).
    pub fn from_columns(cols: &[CVec]) -> Self {
        let ncols = cols.len();
        let nrows = if ncols == 0 { 0 } else { cols[0].len() };
        let mut m = CMat::zeros(nrows, ncols);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), nrows, "ragged columns");
            for i in 0..nrows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> CVec {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn hermitian_transpose(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[Complex64]) -> CVec {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale_column(&mut self, j: usize, s: Complex64) {
        for i in 0..self.rows {
            self[(i, j)] *= s;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
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

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: CMat,
    pivots: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &CMat) -> Result<Lu> {
        if m.rows != m.cols {
            return Err(Error::Singular("LU needs a square matrix".into()));
        }
        let n = m.rows;
        let mut lu = m.clone();
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular(format!("zero pivot at column {k}")));
            }
            pivots[k] = p;
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let sub = f * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(Lu { lu, pivots })
    }

    pub fn solve(&self, b: &[Complex64]) -> CVec {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        // Row-oriented forward substitution with the pivot swap interleaved
        // before row i is used; rows <= i are never swapped afterwards, so
        // the stored (fully swapped) multipliers line up with x.
        for i in 0..n {
            let ip = self.pivots[i];
            let mut sum = x[ip];
            x[ip] = x[i];
            for j in 0..i {
                sum -= self.lu[(i, j)] * x[j];
            }
            x[i] = sum;
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> CMat {
        let n = self.lu.rows;
        let mut out = CMat::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
            e[j] = Complex64::new(0.0, 0.0);
        }
        out
    }
}

/// General square inverse with a 1-norm condition estimate gate.
pub fn invert(m: &CMat, max_condition: f64) -> Result<CMat> {
    let inv = Lu::factor(m)?.inverse();
    let cond = m.one_norm() * inv.one_norm();
    if !cond.is_finite() || cond > max_condition {
        return Err(Error::Singular(format!(
            "condition estimate {cond:.3e} exceeds {max_condition:.1e}"
        )));
    }
    Ok(inv)
}

/// Inverse of a Hermitian matrix (K <= 64).
///
/// Verifies Hermitian symmetry up front and refuses matrices whose condition
/// estimate exceeds 1e12, which in this codebase signals coincident user
/// locations or duplicate codewords upstream.
pub fn hermitian_inverse(m: &CMat) -> Result<CMat> {
    if m.rows != m.cols {
        return Err(Error::Singular("hermitian_inverse needs a square matrix".into()));
    }
    if m.rows > 64 {
        return Err(Error::Domain(format!(
            "hermitian_inverse sized for K <= 64, got {}",
            m.rows
        )));
    }
    let defect = m.max_hermitian_defect();
    if defect > 1e-12 * (1.0 + m.one_norm()) {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    invert(m, 1e12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian_pd(n: usize, seed: &mut u64) -> CMat {
        let mut next = || {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((*seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        // A^H A + n I is Hermitian positive definite.
        let mut a = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = c(next(), next());
            }
        }
        let mut m = a.hermitian_transpose().mul(&a);
        for i in 0..n {
            m[(i, i)] += c(n as f64, 0.0);
        }
        m
    }

    #[test]
    fn identity_inverts_to_identity() {
        let i4 = CMat::identity(4);
        let inv = hermitian_inverse(&i4).unwrap();
        assert!(inv.mul(&i4).frobenius_norm() - 2.0 < 1e-12);
        for k in 0..4 {
            assert!((inv[(k, k)] - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn diagonal_inverse() {
        let mut d = CMat::zeros(2, 2);
        d[(0, 0)] = c(2.0, 0.0);
        d[(1, 1)] = c(4.0, 0.0);
        let inv = hermitian_inverse(&d).unwrap();
        assert!((inv[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((inv[(1, 1)] - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn random_hermitian_residual() {
        let mut seed = 7u64;
        let m = random_hermitian_pd(8, &mut seed);
        let inv = hermitian_inverse(&m).unwrap();
        let mut resid = m.mul(&inv);
        for i in 0..8 {
            resid[(i, i)] -= c(1.0, 0.0);
        }
        assert!(resid.frobenius_norm() < 1e-8, "{}", resid.frobenius_norm());
    }

    #[test]
    fn double_inverse_round_trip() {
        let mut seed = 99u64;
        for n in [2usize, 5, 16] {
            let m = random_hermitian_pd(n, &mut seed);
            let back = hermitian_inverse(&hermitian_inverse(&m).unwrap()).unwrap();
            let mut diff = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    diff += (back[(i, j)] - m[(i, j)]).norm_sqr();
                }
            }
            assert!(diff.sqrt() < 1e-6 * m.frobenius_norm());
        }
    }

    #[test]
    fn pivoting_path_stays_exact() {
        // Hermitian tridiagonal with off-diagonal magnitude close to the
        // diagonal: elimination shrinks the pivot below the subdiagonal,
        // forcing row swaps.
        let delta = 0.65;
        let phase = 1.234;
        for n in [3usize, 6, 12] {
            let mut t = CMat::identity(n);
            for i in 0..n - 1 {
                t[(i + 1, i)] = Complex64::from_polar(delta, phase);
                t[(i, i + 1)] = Complex64::from_polar(delta, -phase);
            }
            let inv = invert(&t, 1e14).unwrap();
            let mut resid = t.mul(&inv);
            for i in 0..n {
                resid[(i, i)] -= c(1.0, 0.0);
            }
            assert!(
                resid.frobenius_norm() < 1e-10,
                "n={n}: residual {}",
                resid.frobenius_norm()
            );
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c(1.0, 0.0);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(1.0, 0.0);
        assert!(matches!(hermitian_inverse(&m), Err(Error::Singular(_))));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMat::identity(2);
        m[(0, 1)] = c(0.5, 0.25);
        m[(1, 0)] = c(0.5, 0.25); // should be the conjugate
        assert!(hermitian_inverse(&m).is_err());
    }

    #[test]
    fn lu_solve_matches_inverse() {
        let mut seed = 3u64;
        let m = random_hermitian_pd(6, &mut seed);
        let lu = Lu::factor(&m).unwrap();
        let b: CVec = (0..6).map(|i| c(i as f64 + 1.0, -(i as f64))).collect();
        let x = lu.solve(&b);
        let back = m.mul_vec(&x);
        for i in 0..6 {
            assert!((back[i] - b[i]).norm() < 1e-9);
        }
    }
}
