use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::build_h_spin_sc;
use crate::quantum::eig_hermitian;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `Σ_k e^{−iE_k t}|k⟩⟨k|ψ⟩` from the eigendecomposition.
fn exact_propagate(h: &ComplexMatrix, psi: &QuantumState, t: f64) -> Vec<Complex64> {
    let u = eig_hermitian(h)
        .unwrap()
        .reconstruct_with(|e| Complex64::from_polar(1.0, -e * t));
    u.matvec(psi.amplitudes())
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn random_spin_state(rng: &mut ChaCha8Rng) -> QuantumState {
    let amps = (0..4)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    QuantumState::new(amps, BasisLayout::Spins)
        .unwrap()
        .normalized()
}

fn ghz() -> QuantumState {
    let layout = BasisLayout::OscillatorSpins { levels: 4 };
    let mut a = vec![c(0.0, 0.0); 16];
    a[layout.index(0, 0, 0)] = c(FRAC_1_SQRT_2, 0.0);
    a[layout.index(1, 1, 1)] = c(FRAC_1_SQRT_2, 0.0);
    QuantumState::new(a, layout).unwrap()
}

fn cfg(t_final: f64) -> IntegratorConfig {
    IntegratorConfig {
        t_final,
        ..IntegratorConfig::default()
    }
}

#[test]
fn background_closed_form() {
    let bg = OscillatorBackground {
        x0: 0.1,
        p0: 0.0,
        m: 1.0,
        omega: 1.0,
    };
    assert_eq!(bg.eval(0.0), PhasePoint::new(0.1, 0.0));
    let q = bg.eval(FRAC_PI_2);
    assert!(q.x.abs() < 1e-16 && (q.p + 0.1).abs() < 1e-16);

    let general = OscillatorBackground {
        x0: 0.3,
        p0: -0.7,
        m: 2.0,
        omega: 1.5,
    };
    let e = |pt: PhasePoint| 0.5 * pt.p * pt.p / 2.0 + 0.5 * 2.0 * 2.25 * pt.x * pt.x;
    assert!((e(general.eval(1.7)) - e(general.eval(0.0))).abs() < 1e-14);
    assert!((general.energy() - e(general.eval(0.0))).abs() < 1e-15);
}

#[test]
fn cb_hamiltonian_consistency() {
    let params = ModelParams::symmetric(2.0, 0.4, 1.3);
    let bg = OscillatorBackground::new(0.2, -0.1, &params);
    let h0 = build_h_cb(0.0, &bg, &params);
    assert!((&h0 - &build_h_spin_sc(0.2, -0.1, &params).spin_part()).max_abs() < 1e-15);
    let period = build_h_cb(2.0 * PI, &bg, &params);
    assert!((&period - &h0).max_abs() < 1e-12);

    let uncoupled = ModelParams::symmetric(2.0, 0.0, 1.3);
    let a = build_h_cb(0.0, &bg, &uncoupled);
    let b = build_h_cb(0.77, &bg, &uncoupled);
    assert_eq!(a, b);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let t = rng.gen_range(0.0..50.0);
        let pt = bg.eval(t);
        let direct = build_h_spin_sc(pt.x, pt.p, &params).spin_part();
        let cb = build_h_cb(t, &bg, &params);
        assert!((&direct - &cb).max_abs() <= 1e-12);
        assert!(cb.is_hermitian(1e-12));
    }
}

#[test]
fn heff_examples() {
    let params = ModelParams::symmetric(1.5, 0.8, 3.0);
    let up = QuantumState::spin_product(true, true);
    assert!((heff(0.0, 0.0, &up, &params) - 1.5).abs() < 1e-15);
    assert!((heff(0.1, 0.0, &up, &params) - (0.005 + 1.5)).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let p = ModelParams {
            m: rng.gen_range(0.5..2.0),
            omega: rng.gen_range(0.5..2.0),
            omega_s: rng.gen_range(-2.0..2.0),
            g1: rng.gen_range(-2.0..2.0),
            g2: rng.gen_range(-2.0..2.0),
            lambda: rng.gen_range(-2.0..2.0),
            ..ModelParams::default()
        };
        let (x, q) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let psi = random_spin_state(&mut rng);
        let parts = build_h_spin_sc(x, q, &p);
        // Dense ⟨ψ|H|ψ⟩ with the full operator including h_o·I.
        let amps = psi.amplitudes();
        let mut oracle = c(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                oracle += amps[i].conj() * parts.total[(i, j)] * amps[j];
            }
        }
        assert!(oracle.im.abs() < 1e-12);
        assert!((heff(x, q, &psi, &p) - oracle.re).abs() < 1e-12);
    }
}

fn fd_force(x: f64, p: f64, psi: &QuantumState, params: &ModelParams, h: f64) -> (f64, f64) {
    let dhdp = (heff(x, p + h, psi, params) - heff(x, p - h, psi, params)) / (2.0 * h);
    let dhdx = (heff(x + h, p, psi, params) - heff(x - h, p, psi, params)) / (2.0 * h);
    (dhdp, -dhdx)
}

#[test]
fn sc_force_examples() {
    let params = ModelParams::symmetric(1.0, 0.9, 0.4);
    let up = QuantumState::spin_product(true, true);
    assert_eq!(sc_force(0.3, -0.2, &up, &params), (-0.2, -0.3));

    // (|+⟩+|−⟩)/√2 ⊗ |+⟩ with g1 = 1, g2 = 0: ⟨σ₊⁽¹⁾⟩ = ½.
    let r = FRAC_1_SQRT_2;
    let psi = QuantumState::new(
        vec![c(r, 0.0), c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0)],
        BasisLayout::Spins,
    )
    .unwrap();
    let params = ModelParams {
        omega_s: 0.0,
        g1: 1.0,
        g2: 0.0,
        ..ModelParams::default()
    };
    let ops = SpinOperators::new(&params);
    assert!((psi.expectation(&ops.coupling) - c(0.25, 0.0)).norm() < 1e-15);
    let (xd, pd) = sc_force(0.0, 0.0, &psi, &params);
    let (fx, fp) = fd_force(0.0, 0.0, &psi, &params, 1e-6);
    assert!((xd - fx).abs() < 1e-8 && (pd - fp).abs() < 1e-8);
    // ⟨h_os⟩ = 2Re(a·¼) = x/(2√2), so ṗ = −1/(2√2) and ẋ = 0.
    assert!(xd.abs() < 1e-15);
    assert!((pd + 0.5 * FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn qq_eigenstate_only_rotates_phase() {
    let params = ModelParams::default();
    let psi0 = QuantumState::basis(BasisLayout::OscillatorSpins { levels: 4 }, 0);
    let traj = evolve_qq(&psi0, &params, &cfg(5.0)).unwrap();
    for (rec, psi) in traj.records.iter().zip(&traj.states) {
        let expected = Complex64::from_polar(1.0, -0.5 * rec.t);
        assert!((psi.amplitudes()[0] - expected).norm() < 1e-10);
        assert!(psi.amplitudes()[1..].iter().all(|z| z.norm() == 0.0));
    }
}

#[test]
fn qq_matches_exact_propagator() {
    let params = ModelParams::symmetric(1.0, 1.0, 1.0);
    let traj = evolve_qq(&ghz(), &params, &cfg(10.0)).unwrap();
    let exact = exact_propagate(&build_h_qq(&params).total, &ghz(), 10.0);
    let last = traj.last_state().unwrap();
    assert_eq!(traj.records.last().unwrap().t, 10.0);
    assert!(max_diff(last.amplitudes(), &exact) < 1e-6);
    assert!(traj.conservation.within_target(), "{:?}", traj.conservation);
}

#[test]
fn qq_time_reversal() {
    let params = ModelParams::symmetric(1.0, 1.0, 1.0);
    let sys = QqSystem::new(&build_h_qq(&params).total);
    let y0 = ghz().to_real_vec();
    let fwd = propagate_rk4(&sys, &y0, 0.0, 10.0, 1e-3).unwrap();
    let back = propagate_rk4(&sys, &fwd, 10.0, 0.0, 1e-3).unwrap();
    let err = y0
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn sc_time_reversal() {
    let params = ModelParams::symmetric(2.0, 0.7, 2.0);
    let sys = ScSystem::new(&params);
    let init = ScState {
        x: 0.4,
        p: -0.2,
        psi: QuantumState::spin_product(true, false),
    };
    let y0 = init.to_real_vec();
    let fwd = propagate_rk4(&sys, &y0, 0.0, 10.0, 1e-3).unwrap();
    let back = propagate_rk4(&sys, &fwd, 10.0, 0.0, 1e-3).unwrap();
    let err = y0
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn single_step_norm_defect_is_fifth_order_or_better() {
    // One RK4 step of a linear Schrödinger equation: compare the norm
    // defect at h and h/2 against the eigendecomposition propagator.
    let params = ModelParams::symmetric(1.0, 1.0, 1.0);
    let h = build_h_qq(&params).total;
    let sys = QqSystem::new(&h);
    let psi = ghz();
    let defect = |step: f64| {
        let y = rk4_step(
            |t, y: &[f64], dy: &mut [f64]| sys.deriv(t, y, dy),
            &psi.to_real_vec(),
            0.0,
            step,
        )
        .unwrap();
        let out = QuantumState::from_real_slice(&y, psi.layout()).unwrap();
        let exact = exact_propagate(&h, &psi, step);
        let norm_defect = (out.norm() - 1.0).abs();
        (norm_defect, max_diff(out.amplitudes(), &exact))
    };
    let (n1, e1) = defect(0.1);
    let (n2, e2) = defect(0.05);
    assert!(n1 < 1e-6 && n2 < n1 / 32.0, "{n1:e} {n2:e}");
    assert!(e2 < e1 / 24.0, "local error ratio {}", e1 / e2);
}

#[test]
fn sc_decoupled_follows_free_oscillator() {
    let params = ModelParams::symmetric(1.3, 0.0, 0.8);
    let init = ScState {
        x: 0.5,
        p: 0.2,
        psi: QuantumState::spin_product(true, false),
    };
    let traj = evolve_sc(&init, &params, &cfg(10.0)).unwrap();
    let bg = OscillatorBackground::new(0.5, 0.2, &params);
    for r in &traj.records {
        let pt = bg.eval(r.t);
        assert!((r.x_like - pt.x).abs() < 1e-10 && (r.p_like - pt.p).abs() < 1e-10);
    }
    assert!(traj.conservation.within_target());
}

#[test]
fn cb_uncoupled_matches_exact_propagator() {
    let params = ModelParams::symmetric(1.0, 0.0, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let psi0 = random_spin_state(&mut rng);
    let bg = OscillatorBackground::new(0.3, 0.1, &params);
    let traj = evolve_cb(&bg, &psi0, &params, &cfg(10.0)).unwrap();
    let exact = exact_propagate(&build_h_cb(0.0, &bg, &params), &psi0, 10.0);
    assert!(max_diff(traj.last_state().unwrap().amplitudes(), &exact) < 1e-6);
    assert!(traj.conservation.max_energy_drift.is_none());
    assert!(traj.conservation.max_norm_drift < 1e-8);
}

#[test]
fn cb_spin_up_stays_up_without_couplings() {
    let params = ModelParams::symmetric(1.0, 0.0, 0.0);
    let bg = OscillatorBackground::new(0.1, 0.0, &params);
    let up = QuantumState::spin_product(true, true);
    let traj = evolve_cb(&bg, &up, &params, &cfg(5.0)).unwrap();
    for psi in &traj.states {
        assert!((psi.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        assert!((psi.inner(&up).norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_background_equals_uncoupled_sc() {
    let params = ModelParams::symmetric(1.2, 0.9, 0.7);
    let uncoupled = ModelParams::symmetric(1.2, 0.0, 0.7);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let psi0 = random_spin_state(&mut rng);
    let bg = OscillatorBackground::new(0.0, 0.0, &params);
    let cb = evolve_cb(&bg, &psi0, &params, &cfg(3.0)).unwrap();
    let sc = evolve_sc(
        &ScState {
            x: 0.0,
            p: 0.0,
            psi: psi0.clone(),
        },
        &uncoupled,
        &cfg(3.0),
    )
    .unwrap();
    assert_eq!(cb.states, sc.states);
}

#[test]
fn coarse_step_on_stiff_problem_is_flagged() {
    let params = ModelParams::symmetric(4.0, 0.1, 2000.0);
    let cfg = IntegratorConfig {
        dt: 1e-2,
        t_final: 2.0,
        sample_every: 1,
        auto_dt: false,
        ..IntegratorConfig::default()
    };
    let traj = evolve_qq(&ghz(), &params, &cfg).unwrap();
    assert!(traj.conservation.violated());
}

#[test]
fn rejects_unnormalized_or_misshapen_input() {
    let params = ModelParams::default();
    let bad = QuantumState::new(
        vec![c(2.0, 0.0); 16],
        BasisLayout::OscillatorSpins { levels: 4 },
    )
    .unwrap();
    assert!(evolve_qq(&bad, &params, &cfg(1.0)).is_err());
    let spins = QuantumState::spin_product(true, true);
    assert!(evolve_qq(&spins, &params, &cfg(1.0)).is_err());
    let bad_cfg = IntegratorConfig {
        dt: -1.0,
        ..IntegratorConfig::default()
    };
    assert!(evolve_qq(&ghz(), &params, &bad_cfg).is_err());
}

#[test]
fn adaptive_method_tracks_exact_propagator() {
    let params = ModelParams::symmetric(1.0, 1.0, 1.0);
    let cfg = IntegratorConfig {
        t_final: 5.0,
        method: Method::Rk45,
        ..IntegratorConfig::default()
    };
    let traj = evolve_qq(&ghz(), &params, &cfg).unwrap();
    let exact = exact_propagate(&build_h_qq(&params).total, &ghz(), 5.0);
    assert!(max_diff(traj.last_state().unwrap().amplitudes(), &exact) < 1e-7);
}
