//! Truncated oscillator and spin operators, and the Hamiltonians of the
//! three regimes.
//!
//! Units: ħ = 1. Spin basis order is `(|+⟩, |−⟩)` with `σ_z|+⟩ = +|+⟩`.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::quantum::{dagger, kron, kron_all, ComplexMatrix};

/// How the free oscillator term is represented after truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OscillatorForm {
    /// `ω(a†a + ½)`: exact ladder `{n + ½}ω` in the kept levels.
    #[default]
    NumberOperator,
    /// `p̂²/2m + mω²x̂²/2` assembled from truncated quadratures; differs
    /// from `NumberOperator` in the top level only.
    Quadrature,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub m: f64,
    pub omega: f64,
    pub omega_s: f64,
    pub g1: f64,
    pub g2: f64,
    pub lambda: f64,
    pub levels: usize,
    pub oscillator_form: OscillatorForm,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            omega: 1.0,
            omega_s: 0.0,
            g1: 0.0,
            g2: 0.0,
            lambda: 0.0,
            levels: 4,
            oscillator_form: OscillatorForm::NumberOperator,
        }
    }
}

impl ModelParams {
    /// Unit mass and frequency with symmetric coupling `g1 = g2 = g`.
    pub fn symmetric(omega_s: f64, g: f64, lambda: f64) -> Self {
        Self {
            omega_s,
            g1: g,
            g2: g,
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(invalid("m", "mass must be positive and finite"));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(invalid("omega", "frequency must be positive and finite"));
        }
        if self.levels < 2 {
            return Err(invalid("levels", "truncation needs at least 2 levels"));
        }
        for (key, v) in [
            ("omega_s", self.omega_s),
            ("g1", self.g1),
            ("g2", self.g2),
            ("lambda", self.lambda),
        ] {
            if !v.is_finite() {
                return Err(invalid(key, "must be finite"));
            }
        }
        Ok(())
    }

    /// `√(mω/2)`, the coefficient of x in `a`.
    pub fn alpha(&self) -> f64 {
        (0.5 * self.m * self.omega).sqrt()
    }

    /// `1/√(2mω)`, the coefficient of ip in `a`.
    pub fn beta(&self) -> f64 {
        1.0 / (2.0 * self.m * self.omega).sqrt()
    }

    /// Classical oscillator energy `p²/2m + mω²x²/2`.
    pub fn oscillator_energy(&self, x: f64, p: f64) -> f64 {
        0.5 * p * p / self.m + 0.5 * self.m * self.omega * self.omega * x * x
    }
}

/// Hamiltonian split into free oscillator, free spins, oscillator–spin
/// and spin–spin terms.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianParts {
    pub h_o: ComplexMatrix,
    pub h_s: ComplexMatrix,
    pub h_os: ComplexMatrix,
    pub h_ss: ComplexMatrix,
    pub total: ComplexMatrix,
}

impl HamiltonianParts {
    fn assemble(
        h_o: ComplexMatrix,
        h_s: ComplexMatrix,
        h_os: ComplexMatrix,
        h_ss: ComplexMatrix,
    ) -> Self {
        let total = &(&(&h_o + &h_s) + &h_os) + &h_ss;
        Self {
            h_o,
            h_s,
            h_os,
            h_ss,
            total,
        }
    }

    /// `h_s + h_os + h_ss`: the spin-subsystem part.
    pub fn spin_part(&self) -> ComplexMatrix {
        &(&self.h_s + &self.h_os) + &self.h_ss
    }
}

/// Truncated lowering operator: `A[n−1][n] = √n`.
pub fn annihilation_op(levels: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(levels, levels);
    for n in 1..levels {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `(σ_z, σ₊, σ₋)` in the `(|+⟩, |−⟩)` basis.
pub fn pauli_ops() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let sz = ComplexMatrix::diag_real(&[1.0, -1.0]);
    let sp = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let sm = dagger(&sp);
    (sz, sp, sm)
}

/// `a = x√(mω/2) + ip/√(2mω)` for classical `(x, p)`.
pub fn classical_a(x: f64, p: f64, m: f64, omega: f64) -> Complex64 {
    Complex64::new(x * (0.5 * m * omega).sqrt(), p / (2.0 * m * omega).sqrt())
}

fn truncated_oscillator(params: &ModelParams) -> ComplexMatrix {
    let n = params.levels;
    match params.oscillator_form {
        OscillatorForm::NumberOperator => ComplexMatrix::diag_real(
            &(0..n)
                .map(|k| params.omega * (k as f64 + 0.5))
                .collect::<Vec<_>>(),
        ),
        OscillatorForm::Quadrature => {
            let a = annihilation_op(n);
            let ad = dagger(&a);
            let x = (&a + &ad).scale_real(params.beta());
            // p = i√(mω/2)(a† − a)
            let p = (&ad - &a).scale(Complex64::new(0.0, params.alpha()));
            let kinetic = (&p * &p).scale_real(0.5 / params.m);
            let potential = (&x * &x).scale_real(0.5 * params.m * params.omega * params.omega);
            &kinetic + &potential
        }
    }
}

/// Two-spin operators shared by the semiclassical and background regimes:
/// `h_s + h_ss` and the coupling `K = Σ_j (g_j/2)σ₊^{(j)}`, so that
/// `h_os(a) = aK + a*K†`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOperators {
    pub h_s: ComplexMatrix,
    pub h_ss: ComplexMatrix,
    pub coupling: ComplexMatrix,
    coupling_dag: ComplexMatrix,
    static_part: ComplexMatrix,
}

impl SpinOperators {
    pub fn new(params: &ModelParams) -> Self {
        let (sz, sp, sm) = pauli_ops();
        let i2 = ComplexMatrix::identity(2);
        let h_s = (&kron(&sz, &i2) + &kron(&i2, &sz)).scale_real(0.5 * params.omega_s);
        let h_ss = (&kron(&sp, &sm) + &kron(&sm, &sp)).scale_real(0.5 * params.lambda);
        let coupling = &kron(&sp, &i2).scale_real(0.5 * params.g1)
            + &kron(&i2, &sp).scale_real(0.5 * params.g2);
        let coupling_dag = dagger(&coupling);
        let static_part = &h_s + &h_ss;
        Self {
            h_s,
            h_ss,
            coupling,
            coupling_dag,
            static_part,
        }
    }

    /// `aK + a*K†`.
    pub fn h_os(&self, a: Complex64) -> ComplexMatrix {
        &self.coupling.scale(a) + &self.coupling_dag.scale(a.conj())
    }

    /// Spin generator `h_s + h_os(a) + h_ss`.
    pub fn generator(&self, a: Complex64) -> ComplexMatrix {
        &self.static_part + &self.h_os(a)
    }

    /// Writes the generator into a flat 4×4 row-major buffer.
    pub(crate) fn generator_into(&self, a: Complex64, out: &mut [Complex64; 16]) {
        let s = self.static_part.as_slice();
        let k = self.coupling.as_slice();
        let kd = self.coupling_dag.as_slice();
        let ac = a.conj();
        for i in 0..16 {
            out[i] = s[i] + k[i] * a + kd[i] * ac;
        }
    }
}

/// Fully quantum Hamiltonian on `oscillator ⊗ spin1 ⊗ spin2`.
pub fn build_h_qq(params: &ModelParams) -> HamiltonianParts {
    let levels = params.levels;
    let (sz, sp, sm) = pauli_ops();
    let i2 = ComplexMatrix::identity(2);
    let i4 = ComplexMatrix::identity(4);
    let io = ComplexMatrix::identity(levels);
    let a = annihilation_op(levels);
    let ad = dagger(&a);

    let h_o = kron(&truncated_oscillator(params), &i4);
    let h_s = kron(
        &io,
        &(&kron(&sz, &i2) + &kron(&i2, &sz)).scale_real(0.5 * params.omega_s),
    );
    let os1 = &kron_all(&[&a, &sp, &i2]) + &kron_all(&[&ad, &sm, &i2]);
    let os2 = &kron_all(&[&a, &i2, &sp]) + &kron_all(&[&ad, &i2, &sm]);
    let h_os = &os1.scale_real(0.5 * params.g1) + &os2.scale_real(0.5 * params.g2);
    let h_ss = kron(
        &io,
        &(&kron(&sp, &sm) + &kron(&sm, &sp)).scale_real(0.5 * params.lambda),
    );
    HamiltonianParts::assemble(h_o, h_s, h_os, h_ss)
}

/// Semiclassical two-spin Hamiltonian at phase point `(x, p)`.
///
/// `h_o` holds the classical oscillator energy times the identity; it does
/// not enter the spin equation of motion.
pub fn build_h_spin_sc(x: f64, p: f64, params: &ModelParams) -> HamiltonianParts {
    let ops = SpinOperators::new(params);
    let a = classical_a(x, p, params.m, params.omega);
    let h_o = ComplexMatrix::identity(4).scale_real(params.oscillator_energy(x, p));
    HamiltonianParts::assemble(h_o, ops.h_s.clone(), ops.h_os(a), ops.h_ss.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{eig_hermitian, BasisLayout, QuantumState};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn annihilation_action() {
        let a = annihilation_op(4);
        let apply = |n: usize| {
            let mut v = vec![c(0.0, 0.0); 4];
            v[n] = c(1.0, 0.0);
            a.matvec(&v)
        };
        assert_eq!(
            apply(1),
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        let three = apply(3);
        assert!((three[2].re - 3f64.sqrt()).abs() < 1e-15);
        assert!(apply(0).iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn pauli_actions() {
        let (sz, sp, sm) = pauli_ops();
        let plus = [c(1.0, 0.0), c(0.0, 0.0)];
        let minus = [c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(sp.matvec(&minus), plus.to_vec());
        assert_eq!(sm.matvec(&plus), minus.to_vec());
        assert_eq!(sp.matvec(&plus), vec![c(0.0, 0.0); 2]);
        assert_eq!(sz.matvec(&plus), plus.to_vec());
    }

    #[test]
    fn classical_a_values() {
        assert_eq!(classical_a(0.0, 0.0, 1.0, 1.0), c(0.0, 0.0));
        let a = classical_a(0.1, 0.0, 1.0, 1.0);
        assert!((a.re - 0.070_710_678_118_654_76).abs() < 1e-15 && a.im == 0.0);
        let b = classical_a(0.0, 1.0, 1.0, 1.0);
        assert!(b.re == 0.0 && (b.im - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn decoupled_oscillator_spectrum() {
        let h = build_h_qq(&ModelParams::default());
        for i in 0..16 {
            assert!((h.total[(i, i)].re - ((i / 4) as f64 + 0.5)).abs() < 1e-15);
        }
        assert_eq!(h.total.nonzeros().len(), 16);
    }

    #[test]
    fn additive_diagonal() {
        let p = ModelParams {
            omega_s: 2.0,
            ..ModelParams::default()
        };
        let h = build_h_qq(&p);
        assert!((h.total[(0, 0)].re - 2.5).abs() < 1e-15);
    }

    #[test]
    fn parts_sum_and_hermitian() {
        let p = ModelParams {
            m: 1.3,
            omega: 0.7,
            omega_s: 0.9,
            g1: 0.4,
            g2: -1.1,
            lambda: 2.5,
            ..ModelParams::default()
        };
        let h = build_h_qq(&p);
        let sum = &(&(&h.h_o + &h.h_s) + &h.h_os) + &h.h_ss;
        assert!((sum - &h.total).max_abs() <= 1e-14);
        for part in [&h.h_o, &h.h_s, &h.h_os, &h.h_ss, &h.total] {
            assert!(part.is_hermitian(1e-12));
        }
    }

    #[test]
    fn uncoupled_block_diagonal_over_levels() {
        let p = ModelParams {
            omega_s: 1.0,
            lambda: 3.0,
            ..ModelParams::default()
        };
        let h = build_h_qq(&p);
        for (i, j, _) in h.total.nonzeros() {
            assert_eq!(i / 4, j / 4);
        }
    }

    #[test]
    fn spin_spin_commutes_with_total_sz() {
        let (sz, _, _) = pauli_ops();
        let i2 = ComplexMatrix::identity(2);
        let total_sz = &kron(&sz, &i2) + &kron(&i2, &sz);
        let ops = SpinOperators::new(&ModelParams::symmetric(0.0, 0.0, 1.7));
        assert!(ops.h_ss.commutator(&total_sz).max_abs() <= 1e-14);
    }

    #[test]
    fn sc_origin_spectrum() {
        let p = ModelParams::symmetric(1.0, 0.0, 0.0);
        let h = build_h_spin_sc(0.0, 0.0, &p);
        let e = eig_hermitian(&h.spin_part()).unwrap();
        let expect = [-1.0, 0.0, 0.0, 1.0];
        for (a, b) in e.values.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sc_real_symmetric_on_x_axis() {
        let p = ModelParams::symmetric(1.0, 0.5, 0.3);
        let h = build_h_spin_sc(0.1, 0.0, &p);
        assert!(h.total.as_slice().iter().all(|z| z.im == 0.0));
        assert!(h.total.is_hermitian(0.0));
        assert!((h.h_o[(0, 0)].re - 0.005).abs() < 1e-15);
    }

    #[test]
    fn ghz_energy_golden() {
        // ⟨GHZ|H|GHZ⟩ at ω_S = g = λ = 1: only diagonal entries survive
        // (h_os and h_ss change the excitation pattern of both components).
        // ½(0.5 + 1) + ½(1.5 − 1) = 1.0, confirmed by the loop below.
        let params = ModelParams::symmetric(1.0, 1.0, 1.0);
        let h = build_h_qq(&params);
        let layout = BasisLayout::OscillatorSpins { levels: 4 };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0, 0.0); 16];
        amps[layout.index(0, 0, 0)] = c(r, 0.0);
        amps[layout.index(1, 1, 1)] = c(r, 0.0);
        let psi = QuantumState::new(amps.clone(), layout).unwrap();
        let mut brute = c(0.0, 0.0);
        for i in 0..16 {
            for j in 0..16 {
                brute += amps[i].conj() * h.total[(i, j)] * amps[j];
            }
        }
        assert!((brute.re - 1.0).abs() < 1e-14);
        assert!((psi.expectation(&h.total) - brute).norm() < 1e-14);
    }

    #[test]
    fn quadrature_form_differs_only_at_top_level() {
        let number = build_h_qq(&ModelParams::default());
        let quad = build_h_qq(&ModelParams {
            oscillator_form: OscillatorForm::Quadrature,
            ..ModelParams::default()
        });
        let diff = &number.h_o - &quad.h_o;
        for (i, j, _) in diff.nonzeros().iter().filter(|(_, _, z)| z.norm() > 1e-12) {
            assert!(*i >= 8 && *j >= 8, "entry ({i},{j}) differs");
        }
        assert!(quad.h_o.is_hermitian(1e-12));
    }

    #[test]
    fn validation() {
        assert!(ModelParams::default().validate().is_ok());
        assert!(ModelParams {
            levels: 1,
            ..ModelParams::default()
        }
        .validate()
        .is_err());
        assert!(ModelParams {
            m: 0.0,
            ..ModelParams::default()
        }
        .validate()
        .is_err());
        assert!(ModelParams {
            omega: -1.0,
            ..ModelParams::default()
        }
        .validate()
        .is_err());
        assert!(ModelParams {
            g1: -0.5,
            ..ModelParams::default()
        }
        .validate()
        .is_ok());
    }
}
