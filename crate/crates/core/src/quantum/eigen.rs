//! Hermitian eigendecomposition for the small dense matrices used here.
//!
//! 2×2 matrices use the closed form. Everything else goes through cyclic
//! complex Jacobi sweeps, which converge quadratically and keep the
//! eigenvector matrix unitary to rounding.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues ascending, eigenvectors stored as the matching columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.rows())
            .map(|i| self.vectors[(i, k)])
            .collect()
    }

    /// `V·diag(f(λ))·V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let w = f(self.values[k]);
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| Complex64::new(l, 0.0))
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// Returns [`Error::NotHermitian`] if the Hermitian defect exceeds 1e-12.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(match a.rows() {
        0 => HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        },
        1 => HermitianEigen {
            values: vec![a[(0, 0)].re],
            vectors: ComplexMatrix::identity(1),
        },
        2 => eig_2x2(a),
        _ => eig_jacobi(a),
    })
}

fn eig_2x2(m: &ComplexMatrix) -> HermitianEigen {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let radius = half.hypot(b.norm());
    let lo = mean - radius;
    let hi = mean + radius;

    if b.norm() <= f64::EPSILON * (a.abs() + d.abs()).max(f64::MIN_POSITIVE) {
        let (values, vectors) = if a <= d {
            (vec![a, d], ComplexMatrix::identity(2))
        } else {
            (
                vec![d, a],
                ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
            )
        };
        return HermitianEigen { values, vectors };
    }

    // Two algebraically equivalent null vectors of (A - lo); take the
    // better conditioned one.
    let u = [b, Complex64::new(lo - a, 0.0)];
    let w = [Complex64::new(lo - d, 0.0), b.conj()];
    let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
    let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    let (v, n) = if nu >= nw { (u, nu) } else { (w, nw) };
    let v0 = v[0] / n;
    let v1 = v[1] / n;
    let vectors = ComplexMatrix::from_vec(2, 2, vec![v0, -v1.conj(), v1, v0.conj()]);
    HermitianEigen {
        values: vec![lo, hi],
        vectors,
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn eig_jacobi(input: &ComplexMatrix) -> HermitianEigen {
    let n = input.rows();
    let mut a = input.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = input
        .as_slice()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 1e-15 * scale || scale == 0.0 {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Phase e^{-iφ} on q makes the (p,q) entry real; a real
                // rotation then annihilates it.
                let phase = (apq / r).conj();
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                // Columns of the 2×2 unitary acting on (p, q).
                let u_pp = Complex64::new(c, 0.0);
                let u_qp = -phase * s;
                let u_pq = Complex64::new(s, 0.0);
                let u_qq = phase * c;

                // A <- A U
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                // A <- U† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                // V <- V U
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = v[(i, k)];
        }
    }
    HermitianEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::dagger;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.gen_range(-3.0..3.0), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn diagonal_sorted() {
        let e = eig_hermitian(&ComplexMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn sigma_x() {
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = eig_hermitian(&sx).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn two_by_two_diagonal_descending() {
        let e = eig_hermitian(&ComplexMatrix::diag_real(&[2.0, -1.0])).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0]);
        assert!((e.reconstruct() - &ComplexMatrix::diag_real(&[2.0, -1.0])).max_abs() < 1e-15);
    }

    #[test]
    fn degenerate_spectrum_orthonormal() {
        let m = ComplexMatrix::diag_real(&[1.0, 1.0, 1.0, -2.0]);
        let e = eig_hermitian(&m).unwrap();
        let vtv = &dagger(&e.vectors) * &e.vectors;
        assert!((vtv - ComplexMatrix::identity(4)).max_abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 3, 4, 7, 16] {
            for _ in 0..10 {
                let a = random_hermitian(n, &mut rng);
                let e = eig_hermitian(&a).unwrap();
                let scale = a.max_abs();
                assert!((e.reconstruct() - &a).max_abs() <= 1e-10 * scale);
                let vtv = &dagger(&e.vectors) * &e.vectors;
                assert!((vtv - ComplexMatrix::identity(n)).max_abs() <= 1e-10);
                for k in 0..n {
                    let v = e.vector(k);
                    let av = a.matvec(&v);
                    let res = av
                        .iter()
                        .zip(&v)
                        .map(|(x, y)| (x - y * e.values[k]).norm())
                        .fold(0.0, f64::max);
                    assert!(res <= 1e-10 * scale, "residual {res}");
                }
                assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
