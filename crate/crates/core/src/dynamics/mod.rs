//! Time evolution in the three regimes.
//!
//! States are integrated as interleaved real vectors. The quantum part
//! always follows `i d|ψ⟩/dt = H|ψ⟩` with ħ = 1; the semiclassical
//! oscillator follows Hamilton's equations for `H_eff = ⟨Ψ|H|Ψ⟩`.

mod integrator;

use num_complex::Complex64;

pub use integrator::{propagate_rk4, rk4_step, IntegratorConfig, Method, OdeSystem};

use crate::error::{invalid, Result};
use crate::model::{build_h_qq, classical_a, ModelParams, SpinOperators};
use crate::observables::{
    expect_xp, spin_entropy_with, subsystem_energies_qq, subsystem_energies_with, EntropyMeasure,
    ObservableRecord, Regime,
};
use crate::quantum::{BasisLayout, ComplexMatrix, QuantumState};

/// Drift above which a run counts as meeting the conservation target.
pub const CONSERVATION_TARGET: f64 = 1e-8;
/// Drift above which a run is flagged as a conservation violation.
pub const CONSERVATION_VIOLATION: f64 = 1e-6;

/// Tolerance on the initial norm.
const INITIAL_NORM_TOL: f64 = 1e-8;

/// Classical oscillator coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.p)
    }
}

/// Free oscillator solution through `(x0, p0)` at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorBackground {
    pub x0: f64,
    pub p0: f64,
    pub m: f64,
    pub omega: f64,
}

impl OscillatorBackground {
    pub fn new(x0: f64, p0: f64, params: &ModelParams) -> Self {
        Self {
            x0,
            p0,
            m: params.m,
            omega: params.omega,
        }
    }

    pub fn eval(&self, t: f64) -> PhasePoint {
        let (s, c) = (self.omega * t).sin_cos();
        let mw = self.m * self.omega;
        PhasePoint {
            x: self.x0 * c + self.p0 / mw * s,
            p: self.p0 * c - mw * self.x0 * s,
        }
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.p0 * self.p0 / self.m
            + 0.5 * self.m * self.omega * self.omega * self.x0 * self.x0
    }
}

pub fn oscillator_background_eval(bg: &OscillatorBackground, t: f64) -> PhasePoint {
    bg.eval(t)
}

/// Semiclassical state: classical oscillator plus two-spin state.
#[derive(Clone, Debug, PartialEq)]
pub struct ScState {
    pub x: f64,
    pub p: f64,
    pub psi: QuantumState,
}

impl ScState {
    fn to_real_vec(&self) -> Vec<f64> {
        let mut y = vec![self.x, self.p];
        y.extend(self.psi.to_real_vec());
        y
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConservationReport {
    pub max_norm_drift: f64,
    /// `None` where no conserved energy exists (driven spins).
    pub max_energy_drift: Option<f64>,
    /// Set when integration stopped early, e.g. on a non-finite derivative.
    pub aborted: Option<String>,
}

impl ConservationReport {
    fn worst(&self) -> f64 {
        if self.aborted.is_some() {
            return f64::INFINITY;
        }
        let e = self.max_energy_drift.unwrap_or(0.0);
        if self.max_norm_drift.is_nan() || e.is_nan() {
            return f64::INFINITY;
        }
        self.max_norm_drift.max(e)
    }

    pub fn within_target(&self) -> bool {
        self.worst() <= CONSERVATION_TARGET
    }

    pub fn violated(&self) -> bool {
        self.worst() > CONSERVATION_VIOLATION
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub regime: Regime,
    pub records: Vec<ObservableRecord>,
    pub states: Vec<QuantumState>,
    pub conservation: ConservationReport,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn phase_points(&self) -> Vec<PhasePoint> {
        self.records
            .iter()
            .map(|r| PhasePoint::new(r.x_like, r.p_like))
            .collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.x_like.hypot(r.p_like))
            .fold(0.0, f64::max)
    }

    pub fn max_entropy(&self) -> f64 {
        self.records.iter().map(|r| r.s_ent).fold(0.0, f64::max)
    }

    pub fn min_entropy(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.s_ent)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn last_state(&self) -> Option<&QuantumState> {
        self.states.last()
    }

    fn from_records(
        regime: Regime,
        records: Vec<ObservableRecord>,
        states: Vec<QuantumState>,
        energy_conserved: bool,
        aborted: Option<String>,
    ) -> Self {
        let max_norm_drift = records
            .iter()
            .map(|r| (r.norm - 1.0).abs())
            .fold(0.0, f64::max);
        let max_energy_drift = energy_conserved.then(|| {
            let e0 = records.first().map_or(0.0, |r| r.total_energy);
            records
                .iter()
                .map(|r| (r.total_energy - e0).abs())
                .fold(0.0, f64::max)
        });
        Self {
            regime,
            records,
            states,
            conservation: ConservationReport {
                max_norm_drift,
                max_energy_drift,
                aborted,
            },
        }
    }
}

fn check_normalized(psi: &QuantumState, key: &str) -> Result<()> {
    let n = psi.norm();
    if (n - 1.0).abs() > INITIAL_NORM_TOL {
        return Err(invalid(key, format!("state norm {n} is not 1")));
    }
    Ok(())
}

/// `out = −i·H·ψ` on interleaved storage.
fn apply_minus_i(h: &[Complex64], dim: usize, psi: &[f64], out: &mut [f64]) {
    for i in 0..dim {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..dim {
            acc += h[i * dim + j] * Complex64::new(psi[2 * j], psi[2 * j + 1]);
        }
        out[2 * i] = acc.im;
        out[2 * i + 1] = -acc.re;
    }
}

/// Step cap `0.01/‖H‖` used when `auto_dt` is on.
fn step_cap(norm: f64) -> f64 {
    if norm > 0.0 {
        0.01 / norm
    } else {
        f64::INFINITY
    }
}

/// Fully quantum Schrödinger equation with a time-independent Hamiltonian.
pub struct QqSystem {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
    cap: f64,
}

impl QqSystem {
    pub fn new(hamiltonian: &ComplexMatrix) -> Self {
        Self {
            dim: hamiltonian.rows(),
            entries: hamiltonian.nonzeros(),
            cap: step_cap(hamiltonian.row_sum_norm()),
        }
    }
}

impl OdeSystem for QqSystem {
    fn dim(&self) -> usize {
        2 * self.dim
    }

    fn deriv(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        dy.fill(0.0);
        for &(i, j, h) in &self.entries {
            let (re, im) = (y[2 * j], y[2 * j + 1]);
            // −i·h·ψ_j
            dy[2 * i] += h.re * im + h.im * re;
            dy[2 * i + 1] -= h.re * re - h.im * im;
        }
    }

    fn max_step(&self, _t: f64, _y: &[f64]) -> f64 {
        self.cap
    }
}

/// Coupled spin TDSE and oscillator Hamilton equations; state layout
/// `[x, p, Re ψ0, Im ψ0, …, Re ψ3, Im ψ3]`.
pub struct ScSystem {
    params: ModelParams,
    ops: SpinOperators,
}

impl ScSystem {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            params: params.clone(),
            ops: SpinOperators::new(params),
        }
    }

    fn generator(&self, x: f64, p: f64) -> [Complex64; 16] {
        let mut h = [Complex64::new(0.0, 0.0); 16];
        let a = classical_a(x, p, self.params.m, self.params.omega);
        self.ops.generator_into(a, &mut h);
        h
    }
}

/// `⟨ψ|K|ψ⟩` with `K = Σ_j (g_j/2)σ₊^{(j)}`, on interleaved storage.
fn coupling_expectation(ops: &SpinOperators, psi: &[f64]) -> Complex64 {
    let k = ops.coupling.as_slice();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        let bra = Complex64::new(psi[2 * i], -psi[2 * i + 1]);
        for j in 0..4 {
            let kij = k[4 * i + j];
            if kij != Complex64::new(0.0, 0.0) {
                acc += bra * kij * Complex64::new(psi[2 * j], psi[2 * j + 1]);
            }
        }
    }
    acc
}

/// `(ẋ, ṗ)` from the coupling expectation `k = ⟨K⟩`, using
/// `⟨h_os⟩ = 2 Re(a k)` and linearity of `a` in `(x, p)`.
pub(crate) fn hamilton_rhs(params: &ModelParams, x: f64, p: f64, k: Complex64) -> (f64, f64) {
    let xdot = p / params.m - 2.0 * params.beta() * k.im;
    let pdot = -params.m * params.omega * params.omega * x - 2.0 * params.alpha() * k.re;
    (xdot, pdot)
}

impl OdeSystem for ScSystem {
    fn dim(&self) -> usize {
        10
    }

    fn deriv(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (x, p) = (y[0], y[1]);
        let psi = &y[2..10];
        let h = self.generator(x, p);
        apply_minus_i(&h, 4, psi, &mut dy[2..10]);
        let k = coupling_expectation(&self.ops, psi);
        let (xdot, pdot) = hamilton_rhs(&self.params, x, p, k);
        dy[0] = xdot;
        dy[1] = pdot;
    }

    fn max_step(&self, _t: f64, y: &[f64]) -> f64 {
        let h = self.generator(y[0], y[1]);
        let spin = ComplexMatrix::from_vec(4, 4, h.to_vec()).row_sum_norm();
        step_cap(spin.max(self.params.omega))
    }
}

/// Spin TDSE driven by a fixed free-oscillator background.
pub struct CbSystem {
    params: ModelParams,
    ops: SpinOperators,
    background: OscillatorBackground,
}

impl CbSystem {
    pub fn new(background: OscillatorBackground, params: &ModelParams) -> Self {
        Self {
            params: params.clone(),
            ops: SpinOperators::new(params),
            background,
        }
    }

    fn generator(&self, t: f64) -> [Complex64; 16] {
        let pt = self.background.eval(t);
        let mut h = [Complex64::new(0.0, 0.0); 16];
        let a = classical_a(pt.x, pt.p, self.params.m, self.params.omega);
        self.ops.generator_into(a, &mut h);
        h
    }
}

impl OdeSystem for CbSystem {
    fn dim(&self) -> usize {
        8
    }

    fn deriv(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let h = self.generator(t);
        apply_minus_i(&h, 4, y, dy);
    }

    fn max_step(&self, t: f64, _y: &[f64]) -> f64 {
        let h = self.generator(t);
        step_cap(ComplexMatrix::from_vec(4, 4, h.to_vec()).row_sum_norm())
    }
}

/// Time-dependent spin Hamiltonian on the background at time `t`.
pub fn build_h_cb(
    t: f64,
    background: &OscillatorBackground,
    params: &ModelParams,
) -> ComplexMatrix {
    let pt = background.eval(t);
    SpinOperators::new(params).generator(classical_a(pt.x, pt.p, params.m, params.omega))
}

/// `H_eff(x, p) = p²/2m + mω²x²/2 + ⟨ψ|h_s + h_os(x,p) + h_ss|ψ⟩`.
pub fn heff(x: f64, p: f64, psi: &QuantumState, params: &ModelParams) -> f64 {
    let ops = SpinOperators::new(params);
    let a = classical_a(x, p, params.m, params.omega);
    params.oscillator_energy(x, p) + psi.expectation(&ops.generator(a)).re
}

/// `(∂H_eff/∂p, −∂H_eff/∂x)`.
pub fn sc_force(x: f64, p: f64, psi: &QuantumState, params: &ModelParams) -> (f64, f64) {
    let ops = SpinOperators::new(params);
    let k = psi.expectation(&ops.coupling);
    hamilton_rhs(params, x, p, k)
}

pub fn evolve_qq(
    psi0: &QuantumState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    evolve_qq_with(psi0, params, cfg, EntropyMeasure::SingleSpin)
}

pub fn evolve_qq_with(
    psi0: &QuantumState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
    measure: EntropyMeasure,
) -> Result<Trajectory> {
    params.validate()?;
    cfg.validate()?;
    let layout = BasisLayout::OscillatorSpins {
        levels: params.levels,
    };
    if psi0.layout() != layout {
        return Err(invalid(
            "state",
            "fully quantum state must match the oscillator truncation",
        ));
    }
    check_normalized(psi0, "state")?;

    let parts = build_h_qq(params);
    let sys = QqSystem::new(&parts.total);
    let sampled = integrator::integrate(&sys, psi0.to_real_vec(), cfg);

    let mut records = Vec::with_capacity(sampled.times.len());
    let mut states = Vec::with_capacity(sampled.times.len());
    for (&t, y) in sampled.times.iter().zip(&sampled.states) {
        let psi = QuantumState::from_real_slice(y, layout)?;
        let (x_like, p_like) = expect_xp(&psi, params.m, params.omega);
        let (e_osc, e_ss) = subsystem_energies_qq(&psi, &parts);
        records.push(ObservableRecord {
            t,
            x_like,
            p_like,
            s_ent: spin_entropy_with(&psi, Regime::Qq, measure),
            e_osc,
            e_ss,
            norm: psi.norm(),
            total_energy: e_osc + e_ss,
        });
        states.push(psi);
    }
    Ok(Trajectory::from_records(
        Regime::Qq,
        records,
        states,
        true,
        sampled.aborted.map(|e| e.to_string()),
    ))
}

pub fn evolve_sc(
    init: &ScState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    params.validate()?;
    cfg.validate()?;
    if init.psi.layout() != BasisLayout::Spins {
        return Err(invalid("spin", "semiclassical spin state must be two-spin"));
    }
    if !(init.x.is_finite() && init.p.is_finite()) {
        return Err(invalid("x0", "initial phase point must be finite"));
    }
    check_normalized(&init.psi, "spin")?;

    let sys = ScSystem::new(params);
    let sampled = integrator::integrate(&sys, init.to_real_vec(), cfg);

    let mut records = Vec::with_capacity(sampled.times.len());
    let mut states = Vec::with_capacity(sampled.times.len());
    for (&t, y) in sampled.times.iter().zip(&sampled.states) {
        let (x, p) = (y[0], y[1]);
        let psi = QuantumState::from_real_slice(&y[2..], BasisLayout::Spins)?;
        let (e_osc, e_ss) = subsystem_energies_with(&sys.ops, x, p, &psi, params);
        records.push(ObservableRecord {
            t,
            x_like: x,
            p_like: p,
            s_ent: spin_entropy_with(&psi, Regime::Sc, EntropyMeasure::SingleSpin),
            e_osc,
            e_ss,
            norm: psi.norm(),
            total_energy: e_osc + e_ss,
        });
        states.push(psi);
    }
    Ok(Trajectory::from_records(
        Regime::Sc,
        records,
        states,
        true,
        sampled.aborted.map(|e| e.to_string()),
    ))
}

pub fn evolve_cb(
    bg: &OscillatorBackground,
    psi0: &QuantumState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    params.validate()?;
    cfg.validate()?;
    if psi0.layout() != BasisLayout::Spins {
        return Err(invalid(
            "spin",
            "background-driven spin state must be two-spin",
        ));
    }
    check_normalized(psi0, "spin")?;

    let sys = CbSystem::new(*bg, params);
    let sampled = integrator::integrate(&sys, psi0.to_real_vec(), cfg);

    let mut records = Vec::with_capacity(sampled.times.len());
    let mut states = Vec::with_capacity(sampled.times.len());
    for (&t, y) in sampled.times.iter().zip(&sampled.states) {
        let pt = bg.eval(t);
        let psi = QuantumState::from_real_slice(y, BasisLayout::Spins)?;
        let (e_osc, e_ss) = subsystem_energies_with(&sys.ops, pt.x, pt.p, &psi, params);
        records.push(ObservableRecord {
            t,
            x_like: pt.x,
            p_like: pt.p,
            s_ent: spin_entropy_with(&psi, Regime::Cb, EntropyMeasure::SingleSpin),
            e_osc,
            e_ss,
            norm: psi.norm(),
            total_energy: e_osc + e_ss,
        });
        states.push(psi);
    }
    Ok(Trajectory::from_records(
        Regime::Cb,
        records,
        states,
        false,
        sampled.aborted.map(|e| e.to_string()),
    ))
}

#[cfg(test)]
mod tests;
