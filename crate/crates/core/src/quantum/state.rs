use num_complex::Complex64;

use super::eigen::eig_hermitian;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Composite-index convention for state vectors.
///
/// `OscillatorSpins` orders as `i = 4n + 2·s1 + s2` with spin index 0 for
/// `|+⟩` (σ_z = +1) and 1 for `|−⟩`. `Spins` is the same without the
/// oscillator factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisLayout {
    OscillatorSpins { levels: usize },
    Spins,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    Oscillator,
    Spin1,
    Spin2,
}

impl BasisLayout {
    pub fn dims(&self) -> Vec<usize> {
        match *self {
            BasisLayout::OscillatorSpins { levels } => vec![levels, 2, 2],
            BasisLayout::Spins => vec![2, 2],
        }
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    fn factor_index(&self, which: Subsystem) -> Result<usize> {
        match (self, which) {
            (BasisLayout::OscillatorSpins { .. }, Subsystem::Oscillator) => Ok(0),
            (BasisLayout::OscillatorSpins { .. }, Subsystem::Spin1) => Ok(1),
            (BasisLayout::OscillatorSpins { .. }, Subsystem::Spin2) => Ok(2),
            (BasisLayout::Spins, Subsystem::Spin1) => Ok(0),
            (BasisLayout::Spins, Subsystem::Spin2) => Ok(1),
            (BasisLayout::Spins, Subsystem::Oscillator) => Err(Error::BadLayout(
                "two-spin layout has no oscillator factor".into(),
            )),
        }
    }

    /// Composite index for oscillator level `n` and spin indices `s1`, `s2`.
    /// `n` is ignored for the two-spin layout.
    pub fn index(&self, n: usize, s1: usize, s2: usize) -> usize {
        match self {
            BasisLayout::OscillatorSpins { .. } => 4 * n + 2 * s1 + s2,
            BasisLayout::Spins => 2 * s1 + s2,
        }
    }
}

/// Pure state vector with its layout.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
    layout: BasisLayout,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>, layout: BasisLayout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::BadLayout(format!(
                "{} amplitudes for a layout of dimension {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        Ok(Self { amplitudes, layout })
    }

    pub fn basis(layout: BasisLayout, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dim()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes, layout }
    }

    /// Two-spin product `|s1 s2⟩` with `true` meaning `|+⟩`.
    pub fn spin_product(first_up: bool, second_up: bool) -> Self {
        let s1 = usize::from(!first_up);
        let s2 = usize::from(!second_up);
        Self::basis(BasisLayout::Spins, BasisLayout::Spins.index(0, s1, s2))
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn layout(&self) -> BasisLayout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z / n).collect(),
            layout: self.layout,
        }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        op.sandwich(&self.amplitudes, &self.amplitudes)
    }

    /// Interleaved `[re0, im0, re1, im1, ...]`.
    pub fn to_real_vec(&self) -> Vec<f64> {
        self.amplitudes.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_real_slice(data: &[f64], layout: BasisLayout) -> Result<Self> {
        let amps = data
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        Self::new(amps, layout)
    }
}

/// Density matrix with validated Hermiticity, unit trace and a
/// non-negative spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const EIGEN_FLOOR: f64 = -1e-12;

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let eig = eig_hermitian(&matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::BadLayout(format!("density matrix trace {tr}")));
        }
        if let Some(&lo) = eig.values.first() {
            if lo < Self::EIGEN_FLOOR {
                return Err(Error::BadLayout(format!(
                    "density matrix has negative eigenvalue {lo:e}"
                )));
            }
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn from_pure(state: &QuantumState) -> Self {
        let amps = state.amplitudes();
        let n = amps.len();
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = amps[i] * amps[j].conj() / norm_sq;
            }
        }
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// Reduces `rho` to a single factor of `layout`.
pub fn partial_trace(
    rho: &DensityMatrix,
    layout: BasisLayout,
    keep: Subsystem,
) -> Result<DensityMatrix> {
    if rho.dim() != layout.dim() {
        return Err(Error::BadLayout(format!(
            "density matrix of dimension {} does not match layout dimension {}",
            rho.dim(),
            layout.dim()
        )));
    }
    let keep_idx = layout.factor_index(keep)?;
    let dims = layout.dims();
    Ok(DensityMatrix {
        matrix: reduce(rho.matrix(), &dims, &[keep_idx]),
    })
}

/// Keeps factors `keep` (ascending) of a tensor-product matrix with factor
/// dimensions `dims`, tracing out the rest.
pub(crate) fn reduce(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> ComplexMatrix {
    let n = m.rows();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);

    let digits = |mut idx: usize| {
        let mut d = vec![0; dims.len()];
        for f in (0..dims.len()).rev() {
            d[f] = idx % dims[f];
            idx /= dims[f];
        }
        d
    };
    let kept_index = |d: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + d[k]);

    for i in 0..n {
        let di = digits(i);
        for j in 0..n {
            let dj = digits(j);
            let traced_match = (0..dims.len())
                .filter(|f| !keep.contains(f))
                .all(|f| di[f] == dj[f]);
            if traced_match {
                out[(kept_index(&di), kept_index(&dj))] += m[(i, j)];
            }
        }
    }
    out
}

/// Cutoff below which eigenvalues contribute nothing to the entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// `−Σ λ ln λ` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let eig = match eig_hermitian(rho.matrix()) {
        Ok(e) => e,
        Err(_) => {
            // Round-off can push the defect just past 1e-12; symmetrize.
            let sym = (rho.matrix() + &super::matrix::dagger(rho.matrix())).scale_real(0.5);
            eig_hermitian(&sym).expect("symmetrized matrix is Hermitian")
        }
    };
    entropy_from_values(&eig.values)
}

pub(crate) fn entropy_from_values(values: &[f64]) -> f64 {
    let s: f64 = values
        .iter()
        .map(|&l| {
            if l.abs() <= -DensityMatrix::EIGEN_FLOOR {
                0.0
            } else {
                l
            }
        })
        .filter(|&l| l > ENTROPY_CUTOFF)
        .map(|l| -l * l.ln())
        .sum();
    s.max(0.0)
}
