//! Dense small-matrix utilities.
//!
//! Matrices here are at most a few dozen rows (the block systems of an
//! `N`-player game with scalar state are `(N+1) x (N+1)`), so everything is
//! stored densely in row-major order and factorizations are plain LU with
//! partial pivoting.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Reciprocal condition number below which a matrix is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

/// Scaled-norm threshold for the Padé kernel of [`expm`].
const EXPM_THETA: f64 = 0.5;

/// Diagonal Padé(6,6) numerator coefficients for `exp`:
/// `c_k = (12-k)! 6! / (12! k! (6-k)!)`.
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Build from row-major entries, rejecting empty shapes and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Dimension {
                op: "Matrix::new",
                expected: alloc::format!("{rows}x{cols} (non-empty)"),
                got: alloc::format!("{} entries", data.len()),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Matrix::new"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix shape must be non-empty");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn scalar(v: f64) -> Self {
        Matrix {
            rows: 1,
            cols: 1,
            data: vec![v],
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Column vector from a slice.
    pub fn column(values: &[f64]) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    /// Panics on ragged input; intended for literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix::new(r, c, data).expect("finite literal matrix")
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s * other`, shapes must agree.
    pub fn axpy(&self, s: f64, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn try_add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape("add", other)?;
        Ok(self.axpy(1.0, other))
    }

    pub fn try_sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape("sub", other)?;
        Ok(self.axpy(-1.0, other))
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dims(
                "matmul",
                (self.cols, other.cols),
                other.shape(),
            ));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.cols != x.len() {
            return Err(Error::dims("mul_vec", (self.cols, 1), (x.len(), 1)));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    fn same_shape(&self, op: &'static str, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::dims(op, self.shape(), other.shape()));
        }
        Ok(())
    }

    pub fn require_square(&self, op: &'static str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::dims(op, (self.rows, self.rows), self.shape()));
        }
        Ok(())
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "block out of range"
        );
        Matrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        assert!(
            r0 + b.rows <= self.rows && c0 + b.cols <= self.cols,
            "block out of range"
        );
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Stack matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[Matrix]) -> Result<Matrix> {
        let cols = parts[0].cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return Err(Error::dims("vstack", (p.rows, cols), p.shape()));
            }
            rows += p.rows;
            data.extend_from_slice(&p.data);
        }
        Ok(Matrix { rows, cols, data })
    }

    /// `(M + Mᵀ)/2`.
    pub fn symmetrized(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::factor(self)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.lu()?.inverse()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operator sugar for internal use where shapes are known to agree; these panic
// on mismatch. Fallible `try_*` variants exist for user-facing paths.
impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.try_add(rhs).expect("matrix add shape mismatch")
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.try_sub(rhs).expect("matrix sub shape mismatch")
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matmul shape mismatch")
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: f64) -> Matrix {
        self.scale(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    rcond: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu> {
        a.require_square("lu")?;
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut exactly_singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                exactly_singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        let mut out = Lu {
            n,
            lu,
            perm,
            rcond: 0.0,
        };
        if !exactly_singular {
            let inv = out.solve_unchecked(&Matrix::identity(n));
            let denom = a.norm_1() * inv.norm_1();
            out.rcond = if denom.is_finite() && denom > 0.0 {
                1.0 / denom
            } else {
                0.0
            };
        }
        Ok(out)
    }

    /// Reciprocal 1-norm condition number, exact for these small sizes.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn is_singular(&self) -> bool {
        !(self.rcond >= SINGULAR_RCOND)
    }

    /// Fail with [`Error::Singular`] when the factor is numerically singular.
    pub fn require_regular(&self, what: &'static str) -> Result<&Self> {
        if self.is_singular() {
            return Err(Error::Singular {
                what,
                t: f64::NAN,
                rcond: self.rcond,
            });
        }
        Ok(self)
    }

    fn solve_unchecked(&self, b: &Matrix) -> Matrix {
        let n = self.n;
        let mut x = Matrix::zeros(n, b.cols);
        for c in 0..b.cols {
            let mut y: Vec<f64> = (0..n).map(|i| b[(self.perm[i], c)]).collect();
            for i in 0..n {
                let s: f64 = (0..i).map(|j| self.lu[i * n + j] * y[j]).sum();
                y[i] -= s;
            }
            for i in (0..n).rev() {
                let s: f64 = ((i + 1)..n).map(|j| self.lu[i * n + j] * y[j]).sum();
                y[i] = (y[i] - s) / self.lu[i * n + i];
            }
            for i in 0..n {
                x[(i, c)] = y[i];
            }
        }
        x
    }

    /// Solve `A X = B`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if b.rows != self.n {
            return Err(Error::dims("lu solve", (self.n, b.cols), b.shape()));
        }
        self.require_regular("matrix")?;
        Ok(self.solve_unchecked(b))
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.n))
    }
}

/// Matrix exponential by scaling and squaring around a degree-6 diagonal
/// Padé kernel.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2, the
/// Padé approximant of the scaled matrix is formed, and the result is squared
/// `s` times.
pub fn expm(m: &Matrix) -> Result<Matrix> {
    m.require_square("expm")?;
    if !m.is_finite() {
        return Err(Error::NonFinite("expm"));
    }
    let n = m.rows;
    if n == 1 {
        return Ok(Matrix::scalar(libm::exp(m[(0, 0)])));
    }
    let norm = m.norm_1();
    let mut s = 0u32;
    if norm > EXPM_THETA {
        s = libm::ceil(libm::log2(norm / EXPM_THETA)) as u32;
    }
    let x = m.scale(libm::ldexp(1.0, -(s as i32)));

    // Even/odd split: N = U + W, D = U - W with U the even and W the odd part.
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;
    let id = Matrix::identity(n);
    let even = id
        .scale(PADE6[0])
        .axpy(PADE6[2], &x2)
        .axpy(PADE6[4], &x4)
        .axpy(PADE6[6], &x6);
    let odd_inner = id.scale(PADE6[1]).axpy(PADE6[3], &x2).axpy(PADE6[5], &x4);
    let odd = &x * &odd_inner;
    let num = &even + &odd;
    let den = &even - &odd;
    let mut r = den
        .lu()?
        .solve(&num)
        .map_err(|_| Error::NonFinite("expm"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::NonFinite("expm result"));
    }
    Ok(r)
}

/// Second-order diagonal Padé (Cayley) map `(I - h/2 M)^{-1} (I + h/2 M)`.
pub fn pade2(m: &Matrix, h: f64) -> Result<Matrix> {
    m.require_square("pade2")?;
    let id = Matrix::identity(m.rows);
    let half = m.scale(0.5 * h);
    let lhs = &id - &half;
    let rhs = &id + &half;
    let lu = lhs.lu()?;
    if lu.is_singular() {
        return Err(Error::PadeSingular {
            h,
            rcond: lu.rcond(),
        });
    }
    lu.solve(&rhs)
}

/// `‖M - Mᵀ‖_∞`.
pub fn symmetry_defect(m: &Matrix) -> Result<f64> {
    m.require_square("symmetry_defect")?;
    Ok((m - &m.transpose()).norm_inf())
}

/// Smallest eigenvalue of a symmetric matrix (cyclic Jacobi).
///
/// The input is symmetrized first; an asymmetry larger than
/// `1e-8 * max(1, max|m_ij|)` is rejected.
pub fn min_eigenvalue_sym(m: &Matrix) -> Result<f64> {
    m.require_square("min_eigenvalue_sym")?;
    let scale = m.max_abs().max(1.0);
    if symmetry_defect(m)? > 1e-8 * scale {
        return Err(Error::Input(alloc::format!(
            "min_eigenvalue_sym: matrix not symmetric (defect {:e})",
            symmetry_defect(m)?
        )));
    }
    let eig = symmetric_eigenvalues(&m.symmetrized());
    Ok(eig.into_iter().fold(f64::INFINITY, f64::min))
}

/// All eigenvalues of a symmetric matrix, unordered.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.rows;
    let mut a = m.clone();
    let frob = |a: &Matrix| a.as_slice().iter().map(|v| v * v).sum::<f64>();
    let total = frob(&a);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off <= 1e-32 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Canonical skew matrix `J = [[0, I], [-I, 0]]` of size `2n`.
pub fn canonical_j(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// `‖Φᵀ J Φ - J‖_∞`; zero for symplectic `Φ`.
pub fn symplectic_defect(phi: &Matrix) -> Result<f64> {
    phi.require_square("symplectic_defect")?;
    if !phi.rows.is_multiple_of(2) {
        return Err(Error::dims(
            "symplectic_defect",
            (phi.rows + 1, phi.rows + 1),
            phi.shape(),
        ));
    }
    let j = canonical_j(phi.rows / 2);
    Ok((&(&(&phi.transpose() * &j) * phi) - &j).norm_inf())
}

/// `‖(J M)ᵀ - J M‖_∞`; zero for Hamiltonian `M`.
pub fn hamiltonian_defect(m: &Matrix) -> Result<f64> {
    m.require_square("hamiltonian_defect")?;
    if !m.rows.is_multiple_of(2) {
        return Err(Error::dims(
            "hamiltonian_defect",
            (m.rows + 1, m.rows + 1),
            m.shape(),
        ));
    }
    let jm = &canonical_j(m.rows / 2) * m;
    symmetry_defect(&jm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn expm_of_zero_is_identity() {
        assert_eq!(expm(&Matrix::zeros(3, 3)).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn expm_diagonal() {
        let e = expm(&Matrix::diag(&[1.0, -2.0])).unwrap();
        let expect = Matrix::diag(&[core::f64::consts::E, libm::exp(-2.0)]);
        assert!(close(&e, &expect, 1e-15));
    }

    #[test]
    fn expm_rejects_bad_input() {
        assert!(matches!(
            expm(&Matrix::zeros(2, 3)),
            Err(Error::Dimension { .. })
        ));
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(expm(&m), Err(Error::NonFinite(_))));
        assert!(Matrix::new(1, 1, alloc::vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn expm_nilpotent() {
        let m = Matrix::from_rows(&[&[0.0, 3.0], &[0.0, 0.0]]);
        let e = expm(&m).unwrap();
        assert!(close(
            &e,
            &Matrix::from_rows(&[&[1.0, 3.0], &[0.0, 1.0]]),
            1e-15
        ));
    }

    #[test]
    fn pade2_examples() {
        assert_eq!(
            pade2(&Matrix::scalar(4.0), 0.0).unwrap(),
            Matrix::identity(1)
        );
        let p = pade2(&Matrix::scalar(1.0), 0.1).unwrap();
        assert!((p[(0, 0)] - 1.05 / 0.95).abs() < 1e-15);
        assert!((p[(0, 0)] - 1.105_263_157_894_737).abs() < 1e-15);
    }

    #[test]
    fn pade2_singular_reports_h() {
        match pade2(&Matrix::scalar(2.0), 1.0) {
            Err(Error::PadeSingular { h, .. }) => assert_eq!(h, 1.0),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn symmetry_defect_examples() {
        let s = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 5.0]]);
        assert_eq!(symmetry_defect(&s).unwrap(), 0.0);
        let n = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(symmetry_defect(&n).unwrap(), 1.0);
        assert!(symmetry_defect(&Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!((min_eigenvalue_sym(&Matrix::diag(&[3.0, 1.0, 2.0])).unwrap() - 1.0).abs() < 1e-14);
        let m = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert!((min_eigenvalue_sym(&m).unwrap() - 1.0).abs() < 1e-14);
        let bad = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(min_eigenvalue_sym(&bad), Err(Error::Input(_))));
    }

    #[test]
    fn lu_solve_and_singular() {
        let a = Matrix::from_rows(&[&[4.0, 3.0], &[6.0, 3.0]]);
        let x = a
            .lu()
            .unwrap()
            .solve(&Matrix::column(&[10.0, 12.0]))
            .unwrap();
        assert!(close(&x, &Matrix::column(&[1.0, 2.0]), 1e-14));
        let s = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(s.inverse(), Err(Error::Singular { .. })));
    }

    #[test]
    fn hamiltonian_exponential_is_symplectic() {
        // [[A, -S], [-Q, -Aᵀ]] with symmetric S, Q.
        let k = Matrix::from_rows(&[
            &[0.3, -0.2, -0.5, -0.1],
            &[0.4, -0.7, -0.1, -0.2],
            &[-0.6, -0.3, -0.3, -0.4],
            &[-0.3, -0.9, 0.2, 0.7],
        ]);
        assert!(hamiltonian_defect(&k).unwrap() < 1e-15);
        assert!(symplectic_defect(&expm(&k).unwrap()).unwrap() < 1e-13);
        assert!(symplectic_defect(&pade2(&k, 0.3).unwrap()).unwrap() < 1e-13);
    }
}
