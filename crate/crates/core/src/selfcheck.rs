//! Seeded invariant checks run by `hybridyn --seed-check`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{evolve_qq, heff, sc_force, IntegratorConfig};
use crate::model::ModelParams;
use crate::observables::{expect_xp, spin_entropy, Regime};
use crate::quantum::{eig_hermitian, BasisLayout, ComplexMatrix, QuantumState};
use crate::scenarios::match_initial_state;
use crate::statics::{branch_gradient, eigenbranch_energy};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error.
    pub worst: f64,
    pub tolerance: f64,
}

pub fn random_state(rng: &mut impl Rng, layout: BasisLayout) -> QuantumState {
    let amps: Vec<Complex64> = (0..layout.dim())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    QuantumState::new(amps, layout)
        .expect("layout-sized")
        .normalized()
}

pub fn random_params(rng: &mut impl Rng) -> ModelParams {
    ModelParams {
        m: rng.gen_range(0.5..2.0),
        omega: rng.gen_range(0.5..2.0),
        omega_s: rng.gen_range(-2.0..2.0),
        g1: rng.gen_range(-2.0..2.0),
        g2: rng.gen_range(-2.0..2.0),
        lambda: rng.gen_range(-2.0..2.0),
        ..ModelParams::default()
    }
}

fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

fn outcome(name: &'static str, worst: f64, tolerance: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tolerance,
        worst,
        tolerance,
    }
}

/// Worst gap between `sc_force` and central differences of `heff`.
pub fn force_gradient_error(rng: &mut impl Rng, draws: usize) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let params = random_params(rng);
        let psi = random_state(rng, BasisLayout::Spins);
        let (x, p) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let h = 1e-5;
        let dhdx = (heff(x + h, p, &psi, &params) - heff(x - h, p, &psi, &params)) / (2.0 * h);
        let dhdp = (heff(x, p + h, &psi, &params) - heff(x, p - h, &psi, &params)) / (2.0 * h);
        let (xdot, pdot) = sc_force(x, p, &psi, &params);
        worst = worst.max((xdot - dhdp).abs()).max((pdot + dhdx).abs());
    }
    worst
}

/// Worst gap between Hellmann–Feynman branch gradients and central
/// differences, skipping near-degenerate draws.
pub fn branch_gradient_error(rng: &mut impl Rng, draws: usize) -> f64 {
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < draws {
        let params = random_params(rng);
        let (x, p) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let branch = rng.gen_range(0..4);
        let h = 1e-5;
        let e = |x, p| eigenbranch_energy(x, p, branch, &params).map(|r| r.0);
        let probes = [e(x + h, p), e(x - h, p), e(x, p + h), e(x, p - h)];
        let Ok((gx, gp)) = branch_gradient(x, p, branch, &params) else {
            continue;
        };
        let [Ok(xp), Ok(xm), Ok(pp), Ok(pm)] = probes else {
            continue;
        };
        // A finite-difference stencil straddling a near-crossing is not a
        // fair oracle.
        let eig = eig_hermitian(
            &crate::model::SpinOperators::new(&params).generator(crate::model::classical_a(
                x,
                p,
                params.m,
                params.omega,
            )),
        )
        .expect("Hermitian");
        let gap = eig
            .values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if gap < 1e-2 {
            continue;
        }
        worst = worst
            .max((gx - (xp - xm) / (2.0 * h)).abs())
            .max((gp - (pp - pm) / (2.0 * h)).abs());
        done += 1;
    }
    worst
}

pub fn run_selfcheck(seed: u64, draws: usize) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..draws {
        let n = rng.gen_range(2..=16);
        let h = random_hermitian(&mut rng, n);
        let eig = eig_hermitian(&h).expect("Hermitian input");
        worst = worst.max((&eig.reconstruct() - &h).max_abs());
    }
    out.push(outcome(
        "eigendecomposition reconstructs input",
        worst,
        1e-10,
    ));

    let mut worst = 0.0f64;
    for _ in 0..draws {
        let psi = random_state(&mut rng, BasisLayout::OscillatorSpins { levels: 4 });
        let s = spin_entropy(&psi, Regime::Qq);
        worst = worst.max((-s).max(s - std::f64::consts::LN_2).max(0.0));
        let pair = random_state(&mut rng, BasisLayout::Spins);
        let s = spin_entropy(&pair, Regime::Sc);
        worst = worst.max((-s).max(s - std::f64::consts::LN_2).max(0.0));
    }
    out.push(outcome(
        "single-spin entropy within [0, ln 2]",
        worst,
        1e-12,
    ));

    out.push(outcome(
        "semiclassical force matches H_eff differences",
        force_gradient_error(&mut rng, draws),
        1e-6,
    ));
    out.push(outcome(
        "eigenvalue branch gradients match differences",
        branch_gradient_error(&mut rng, draws),
        1e-6,
    ));

    let mut worst = 0.0f64;
    for _ in 0..draws {
        let (m, w): (f64, f64) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let r: f64 = rng.gen_range(0.0..0.5);
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        // Inside the representable ellipse.
        let (x0, p0) = (
            r * th.cos() / (2.0 * m * w).sqrt(),
            r * th.sin() * (m * w / 2.0).sqrt(),
        );
        let spin = random_state(&mut rng, BasisLayout::Spins);
        let psi = match_initial_state(x0, p0, &spin, m, w).expect("representable");
        let (x, p) = expect_xp(&psi, m, w);
        worst = worst.max((x - x0).abs()).max((p - p0).abs());
    }
    out.push(outcome(
        "matched initial state reproduces (x0, p0)",
        worst,
        1e-9,
    ));

    let params = random_params(&mut rng);
    let psi = random_state(&mut rng, BasisLayout::OscillatorSpins { levels: 4 });
    let cfg = IntegratorConfig {
        t_final: 5.0,
        ..IntegratorConfig::default()
    };
    let worst = match evolve_qq(&psi, &params, &cfg) {
        Ok(t) => t
            .conservation
            .max_norm_drift
            .max(t.conservation.max_energy_drift.unwrap_or(0.0)),
        Err(_) => f64::INFINITY,
    };
    out.push(outcome(
        "fully quantum run conserves norm and energy",
        worst,
        1e-8,
    ));
    out
}
