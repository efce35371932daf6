use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

/// Hermiticity tolerance applied when a matrix is required to be Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c, "ragged rows");
                row.iter().map(|&v| Complex64::new(v, 0.0))
            })
            .collect();
        Self::from_vec(r, c, data)
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `⟨u|M|v⟩`.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let mv = self.matvec(v);
        u.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum; bounds the spectral radius.
    pub fn row_sum_norm(&self) -> f64 {
        self.data
            .chunks_exact(self.cols.max(1))
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A[i][j] - conj(A[j][i])|`, or infinity for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Entries `(i, j, value)` whose magnitude is nonzero.
    pub fn nonzeros(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                if z != Complex64::new(0.0, 0.0) {
                    out.push((i, j, z));
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Sub<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        &self - rhs
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self - &rhs
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Kronecker product; entry `A[i][j]·B[k][l]` lands at `(i·rows_B + k, j·cols_B + l)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a sequence, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut iter = factors.iter();
    let first = (*iter.next().expect("at least one factor")).clone();
    iter.fold(first, |acc, f| kron(&acc, f))
}

/// Conjugate transpose.
pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.cols, a.rows);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_plus() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]])
    }

    #[test]
    fn kron_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_ladder_single_entry() {
        let k = kron(&sigma_plus(), &sigma_minus());
        let nz = k.nonzeros();
        assert_eq!(nz, vec![(1, 2, c(1.0, 0.0))]);
    }

    #[test]
    fn kron_diagonal_signs() {
        let z = ComplexMatrix::diag_real(&[1.0, -1.0]);
        assert_eq!(
            kron(&z, &z),
            ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0])
        );
    }

    #[test]
    fn kron_rectangular_shape() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(4, 1);
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (8, 3));
    }

    #[test]
    fn dagger_cases() {
        assert_eq!(
            dagger(&ComplexMatrix::identity(3)),
            ComplexMatrix::identity(3)
        );
        assert_eq!(dagger(&sigma_plus()), sigma_minus());
        let a = ComplexMatrix::from_vec(
            2,
            3,
            (0..6).map(|k| c(k as f64, -(k as f64) * 0.5)).collect(),
        );
        let d = dagger(&a);
        assert_eq!((d.rows(), d.cols()), (3, 2));
        assert_eq!(d[(2, 1)], a[(1, 2)].conj());
        assert_eq!(dagger(&d), a);
    }

    #[test]
    fn hermitian_defect_detects_asymmetry() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(0.0, 1.0);
        m[(1, 0)] = c(0.0, -1.0);
        assert_eq!(m.hermitian_defect(), 0.0);
        m[(1, 0)] = c(0.0, 1.0);
        assert!((m.hermitian_defect() - 2.0).abs() < 1e-15);
        assert!(ComplexMatrix::zeros(2, 3).hermitian_defect().is_infinite());
    }

    #[test]
    fn matmul_and_commutator() {
        let sp = sigma_plus();
        let sm = sigma_minus();
        let comm = sp.commutator(&sm);
        assert_eq!(comm, ComplexMatrix::diag_real(&[1.0, -1.0]));
    }
}
