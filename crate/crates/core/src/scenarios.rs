//! Initial-state matching across regimes, built-in experiments, and
//! comparison of trajectories on a shared sample grid.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{
    evolve_cb, evolve_qq_with, evolve_sc, IntegratorConfig, OscillatorBackground, ScState,
    Trajectory,
};
use crate::error::{invalid, Error, Result};
use crate::model::{classical_a, ModelParams};
use crate::observables::{EntropyMeasure, ObservableRecord, Regime};
use crate::quantum::{BasisLayout, QuantumState};

/// Observable names accepted in `outputs`, in CSV column order.
pub const OBSERVABLES: [&str; 8] = [
    "t",
    "x",
    "p",
    "s_ent",
    "e_osc",
    "e_ss",
    "norm",
    "total_energy",
];

pub const PRESET_NAMES: [&str; 7] = [
    "fig2_tl",
    "fig2_tr",
    "fig2_bl",
    "fig2_br",
    "fig3_g_small",
    "fig3_g_mid",
    "fig3_g_large",
];

/// Time tolerance when checking that two trajectories share a grid.
const GRID_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// Classical phase point and two-spin state; the quantum oscillator
    /// state is matched to it.
    Matched {
        x0: f64,
        p0: f64,
        spin: QuantumState,
    },
    /// Full oscillator-plus-spins state; usable for QQ only.
    Explicit(QuantumState),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticsSettings {
    pub branches: Vec<usize>,
    pub guesses: Vec<(f64, f64)>,
}

impl Default for StaticsSettings {
    fn default() -> Self {
        Self {
            branches: vec![0, 1, 2, 3],
            guesses: angular_guesses(&[1.0], 8),
        }
    }
}

/// `count` guesses evenly spaced in angle on each radius.
pub fn angular_guesses(radii: &[f64], count: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(radii.len() * count);
    for &r in radii {
        for k in 0..count {
            let th = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            out.push((r * th.cos(), r * th.sin()));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub label: String,
    pub regimes: Vec<Regime>,
    pub params: ModelParams,
    pub initial: InitialData,
    pub integrator: IntegratorConfig,
    pub outputs: Vec<String>,
    pub entropy: EntropyMeasure,
    pub statics: StaticsSettings,
}

impl ScenarioConfig {
    pub fn new(label: impl Into<String>, params: ModelParams, initial: InitialData) -> Self {
        Self {
            label: label.into(),
            regimes: Regime::ALL.to_vec(),
            params,
            initial,
            integrator: IntegratorConfig::default(),
            outputs: OBSERVABLES.iter().map(|s| s.to_string()).collect(),
            entropy: EntropyMeasure::default(),
            statics: StaticsSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.integrator.validate()?;
        if self.regimes.is_empty() {
            return Err(invalid("regimes", "at least one regime is required"));
        }
        for (i, r) in self.regimes.iter().enumerate() {
            if self.regimes[..i].contains(r) {
                return Err(invalid("regimes", format!("{r} listed twice")));
            }
        }
        match &self.initial {
            InitialData::Matched { x0, p0, spin } => {
                if spin.layout() != BasisLayout::Spins {
                    return Err(invalid("spin", "spin state must be two-spin"));
                }
                if !(x0.is_finite() && p0.is_finite()) {
                    return Err(invalid("x0", "initial phase point must be finite"));
                }
            }
            InitialData::Explicit(state) => {
                if self.regimes != [Regime::Qq] {
                    return Err(invalid(
                        "regimes",
                        "an explicit full state can only drive the fully quantum regime",
                    ));
                }
                if state.layout()
                    != (BasisLayout::OscillatorSpins {
                        levels: self.params.levels,
                    })
                {
                    return Err(invalid(
                        "state",
                        "explicit state must match the oscillator truncation",
                    ));
                }
            }
        }
        for name in &self.outputs {
            if !OBSERVABLES.contains(&name.as_str()) {
                return Err(invalid(
                    "observables",
                    format!("unknown observable {name:?}"),
                ));
            }
        }
        if self.statics.branches.iter().any(|&b| b > 3) {
            return Err(invalid("branches", "branches must be in 0..=3"));
        }
        Ok(())
    }
}

/// `(θ, φ)` with `⟨a⟩ = sin(θ)/2·e^{iφ}` equal to the classical `a(x0, p0)`.
pub fn matching_angles(x0: f64, p0: f64, m: f64, omega: f64) -> Result<(f64, f64)> {
    let a = classical_a(x0, p0, m, omega);
    let sin_theta = 2.0 * a.norm();
    if !(sin_theta <= 1.0 + 1e-12) {
        return Err(Error::Unrepresentable { x0, p0 });
    }
    let theta = sin_theta.min(1.0).asin();
    let phi = if a.norm() > 0.0 { a.arg() } else { 0.0 };
    Ok((theta, phi))
}

/// `(cos(θ/2)|0⟩ + sin(θ/2)e^{iφ}|1⟩) ⊗ spin`, with `θ ∈ [0, π/2]`.
pub fn match_initial_state_with_levels(
    x0: f64,
    p0: f64,
    spin: &QuantumState,
    m: f64,
    omega: f64,
    levels: usize,
) -> Result<QuantumState> {
    if spin.layout() != BasisLayout::Spins {
        return Err(invalid("spin", "spin state must be two-spin"));
    }
    if levels < 2 {
        return Err(invalid("levels", "truncation needs at least 2 levels"));
    }
    let (theta, phi) = matching_angles(x0, p0, m, omega)?;
    let osc = [
        Complex64::new((0.5 * theta).cos(), 0.0),
        Complex64::from_polar((0.5 * theta).sin(), phi),
    ];
    let layout = BasisLayout::OscillatorSpins { levels };
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
    for (n, c) in osc.iter().enumerate() {
        for (s, z) in spin.amplitudes().iter().enumerate() {
            amps[4 * n + s] = c * z;
        }
    }
    QuantumState::new(amps, layout)
}

/// Matched state in the default 4-level truncation.
pub fn match_initial_state(
    x0: f64,
    p0: f64,
    spin: &QuantumState,
    m: f64,
    omega: f64,
) -> Result<QuantumState> {
    match_initial_state_with_levels(x0, p0, spin, m, omega, 4)
}

/// `(|0,+,+⟩ + |1,−,−⟩)/√2` in the 4-level truncation.
pub fn build_ghz() -> QuantumState {
    build_ghz_with_levels(4)
}

pub fn build_ghz_with_levels(levels: usize) -> QuantumState {
    let layout = BasisLayout::OscillatorSpins { levels };
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
    amps[layout.index(0, 0, 0)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[layout.index(1, 1, 1)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    QuantumState::new(amps, layout).expect("GHZ amplitudes match the layout")
}

/// Sup-distances between two regimes on their common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PairDeviation {
    pub a: Regime,
    pub b: Regime,
    pub phase: f64,
    pub s_ent: f64,
    pub e_osc: f64,
    pub e_ss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub label: String,
    pub trajectories: Vec<Trajectory>,
    pub pairs: Vec<PairDeviation>,
}

impl ComparisonReport {
    pub fn trajectory(&self, regime: Regime) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.regime == regime)
    }

    pub fn pair(&self, a: Regime, b: Regime) -> Option<&PairDeviation> {
        self.pairs
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }

    pub fn conservation_violated(&self) -> bool {
        self.trajectories.iter().any(|t| t.conservation.violated())
    }
}

fn check_grid(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch);
    }
    let same = a
        .records
        .iter()
        .zip(&b.records)
        .all(|(ra, rb)| (ra.t - rb.t).abs() <= GRID_TOL * ra.t.abs().max(1.0));
    if same {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Sup over samples of the `(x, p)` distance.
pub fn trajectory_deviation(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_grid(a, b)?;
    Ok(a.records
        .iter()
        .zip(&b.records)
        .map(|(ra, rb)| (ra.x_like - rb.x_like).hypot(ra.p_like - rb.p_like))
        .fold(0.0, f64::max))
}

/// Sup over samples of `|f(a) − f(b)|`.
pub fn series_deviation(
    a: &Trajectory,
    b: &Trajectory,
    f: impl Fn(&ObservableRecord) -> f64,
) -> Result<f64> {
    check_grid(a, b)?;
    Ok(a.records
        .iter()
        .zip(&b.records)
        .map(|(ra, rb)| (f(ra) - f(rb)).abs())
        .fold(0.0, f64::max))
}

fn run_regime(cfg: &ScenarioConfig, regime: Regime) -> Result<Trajectory> {
    let p = &cfg.params;
    match (&cfg.initial, regime) {
        (InitialData::Explicit(state), Regime::Qq) => {
            evolve_qq_with(state, p, &cfg.integrator, cfg.entropy)
        }
        (InitialData::Explicit(_), _) => Err(invalid("regimes", "explicit state drives QQ only")),
        (InitialData::Matched { x0, p0, spin }, Regime::Qq) => {
            let psi = match_initial_state_with_levels(*x0, *p0, spin, p.m, p.omega, p.levels)?;
            evolve_qq_with(&psi, p, &cfg.integrator, cfg.entropy)
        }
        (InitialData::Matched { x0, p0, spin }, Regime::Sc) => {
            let init = ScState {
                x: *x0,
                p: *p0,
                psi: spin.clone(),
            };
            evolve_sc(&init, p, &cfg.integrator)
        }
        (InitialData::Matched { x0, p0, spin }, Regime::Cb) => {
            let bg = OscillatorBackground::new(*x0, *p0, p);
            evolve_cb(&bg, spin, p, &cfg.integrator)
        }
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    let trajectories = cfg
        .regimes
        .iter()
        .map(|&r| run_regime(cfg, r))
        .collect::<Result<Vec<_>>>()?;

    let mut pairs = Vec::new();
    for i in 0..trajectories.len() {
        for j in i + 1..trajectories.len() {
            let (a, b) = (&trajectories[i], &trajectories[j]);
            pairs.push(PairDeviation {
                a: a.regime,
                b: b.regime,
                phase: trajectory_deviation(a, b)?,
                s_ent: series_deviation(a, b, |r| r.s_ent)?,
                e_osc: series_deviation(a, b, |r| r.e_osc)?,
                e_ss: series_deviation(a, b, |r| r.e_ss)?,
            });
        }
    }
    Ok(ComparisonReport {
        label: cfg.label.clone(),
        trajectories,
        pairs,
    })
}

/// Runs every config, possibly in parallel; output order follows input.
pub fn sweep(grid: &[ScenarioConfig]) -> Vec<Result<ComparisonReport>> {
    grid.par_iter().map(run_scenario).collect()
}

fn fig2(label: &str, omega_s: f64, g: f64, lambda: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        label,
        ModelParams::symmetric(omega_s, g, lambda),
        InitialData::Explicit(build_ghz()),
    );
    cfg.regimes = vec![Regime::Qq];
    cfg.integrator.t_final = 20.0;
    cfg
}

fn fig3(label: &str, g: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        label,
        ModelParams::symmetric(2.0, g, 2.0),
        InitialData::Matched {
            x0: 0.1,
            p0: 0.0,
            spin: QuantumState::spin_product(true, true),
        },
    );
    cfg.integrator.t_final = 400.0;
    cfg
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    Ok(match name {
        "fig2_tl" => fig2(name, 1.0, 1.0, 1.0),
        "fig2_tr" => fig2(name, 1.0, 1.0, 100.0),
        "fig2_bl" => fig2(name, 0.5, 1.0, 100.0),
        "fig2_br" => fig2(name, 4.0, 0.1, 2000.0),
        "fig3_g_small" => fig3(name, 1e-4),
        "fig3_g_mid" => fig3(name, 0.1),
        "fig3_g_large" => fig3(name, 1.5),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    })
}
