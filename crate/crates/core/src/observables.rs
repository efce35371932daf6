//! Quantities recorded along trajectories: phase-space position, spin
//! entanglement entropy and the oscillator/spin energy split.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::model::{classical_a, HamiltonianParts, ModelParams, SpinOperators};
use crate::quantum::{
    eig_hermitian, partial_trace, reduce, von_neumann_entropy, BasisLayout, DensityMatrix,
    QuantumState, Subsystem,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Qq,
    Sc,
    Cb,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Qq, Regime::Sc, Regime::Cb];

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Qq => "qq",
            Regime::Sc => "sc",
            Regime::Cb => "cb",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qq" => Ok(Regime::Qq),
            "sc" => Ok(Regime::Sc),
            "cb" => Ok(Regime::Cb),
            other => Err(invalid("regimes", format!("unknown regime '{other}'"))),
        }
    }
}

/// Which reduced state the fully quantum entropy is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EntropyMeasure {
    /// Spin 1 after tracing out the oscillator and spin 2.
    #[default]
    SingleSpin,
    /// Both spins after tracing out the oscillator only.
    SpinPair,
}

impl EntropyMeasure {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntropyMeasure::SingleSpin => "single_spin",
            EntropyMeasure::SpinPair => "spin_pair",
        }
    }
}

impl std::str::FromStr for EntropyMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "single_spin" => Ok(EntropyMeasure::SingleSpin),
            "spin_pair" => Ok(EntropyMeasure::SpinPair),
            other => Err(invalid(
                "entropy",
                format!("unknown entropy measure '{other}'"),
            )),
        }
    }
}

/// One sampled row. `x_like`/`p_like` are `⟨x̂⟩, ⟨p̂⟩` for the quantum
/// oscillator and the classical coordinates otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub x_like: f64,
    pub p_like: f64,
    pub s_ent: f64,
    pub e_osc: f64,
    pub e_ss: f64,
    pub norm: f64,
    pub total_energy: f64,
}

/// `⟨a⟩` for a state on `oscillator ⊗ spin ⊗ spin`.
fn expect_a(psi: &QuantumState) -> Complex64 {
    let amps = psi.amplitudes();
    let levels = amps.len() / 4;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..levels {
        let sqrt_n = (n as f64).sqrt();
        for s in 0..4 {
            acc += amps[4 * (n - 1) + s].conj() * amps[4 * n + s] * sqrt_n;
        }
    }
    acc
}

/// `(⟨x̂⟩, ⟨p̂⟩)` with `x̂ = (a + a†)/√(2mω)` and `p̂ = −i√(mω/2)(a − a†)`.
pub fn expect_xp(psi: &QuantumState, m: f64, omega: f64) -> (f64, f64) {
    let a = expect_a(psi);
    let x = 2.0 * a.re / (2.0 * m * omega).sqrt();
    let p = (2.0 * m * omega).sqrt() * a.im;
    (x, p)
}

/// Spin entanglement entropy in nats. Fully quantum states use the
/// single-spin reduction; two-spin states trace out spin 2.
pub fn spin_entropy(state: &QuantumState, regime: Regime) -> f64 {
    spin_entropy_with(state, regime, EntropyMeasure::SingleSpin)
}

pub fn spin_entropy_with(state: &QuantumState, regime: Regime, measure: EntropyMeasure) -> f64 {
    let layout = state.layout();
    let rho = DensityMatrix::from_pure(state);
    match (regime, measure, layout) {
        (Regime::Qq, EntropyMeasure::SpinPair, BasisLayout::OscillatorSpins { levels }) => {
            let pair = reduce(rho.matrix(), &[levels, 2, 2], &[1, 2]);
            let eig = eig_hermitian(&pair).expect("reduced density matrix is Hermitian");
            crate::quantum::entropy_from_values(&eig.values)
        }
        _ => {
            let reduced = partial_trace(&rho, layout, Subsystem::Spin1)
                .expect("spin 1 exists in every layout");
            von_neumann_entropy(&reduced)
        }
    }
}

/// `(E_osc, E_ss)` for a fully quantum state: `E_ss = ⟨h_s + h_os + h_ss⟩`,
/// `E_osc = ⟨H⟩ − E_ss`.
pub fn subsystem_energies_qq(psi: &QuantumState, parts: &HamiltonianParts) -> (f64, f64) {
    let total = psi.expectation(&parts.total).re;
    let e_ss = psi.expectation(&parts.spin_part()).re;
    (total - e_ss, e_ss)
}

/// `(E_osc, E_ss)` with a classical oscillator at `(x, p)`.
pub fn subsystem_energies_classical(
    x: f64,
    p: f64,
    psi: &QuantumState,
    params: &ModelParams,
) -> (f64, f64) {
    let ops = SpinOperators::new(params);
    subsystem_energies_with(&ops, x, p, psi, params)
}

pub(crate) fn subsystem_energies_with(
    ops: &SpinOperators,
    x: f64,
    p: f64,
    psi: &QuantumState,
    params: &ModelParams,
) -> (f64, f64) {
    let a = classical_a(x, p, params.m, params.omega);
    let e_ss = psi.expectation(&ops.generator(a)).re;
    (params.oscillator_energy(x, p), e_ss)
}
