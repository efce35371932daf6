//! Static solutions of the semiclassical system: phase points `(x*, p*)`
//! where a spin eigenstate of `h_s + h_os(x,p) + h_ss` holds the
//! oscillator still.
//!
//! Gradients of eigenvalue branches come from Hellmann–Feynman,
//! `∂E_k/∂θ = ⟨v_k|∂H/∂θ|v_k⟩`, which is only valid away from crossings;
//! branches closer than [`DEGENERACY_GAP`] to a neighbour are refused.

use crate::dynamics::hamilton_rhs;
use crate::error::{Error, Result};
use crate::model::{classical_a, ModelParams, SpinOperators};
use crate::quantum::{eig_hermitian, BasisLayout, QuantumState};

pub const DEGENERACY_GAP: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 20;
const JACOBIAN_STEP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct StaticSolution {
    pub x: f64,
    pub p: f64,
    pub branch: usize,
    pub eigenstate: QuantumState,
    pub eigenvalue: f64,
    /// `max(|ẋ|, |ṗ|)` at the solution.
    pub residual: f64,
    pub iterations: usize,
}

/// Branch-th ascending eigenpair of the spin Hamiltonian at `(x, p)`.
pub fn eigenbranch_energy(
    x: f64,
    p: f64,
    branch: usize,
    params: &ModelParams,
) -> Result<(f64, QuantumState)> {
    let ops = SpinOperators::new(params);
    eigenbranch_with(&ops, x, p, branch, params)
}

fn eigenbranch_with(
    ops: &SpinOperators,
    x: f64,
    p: f64,
    branch: usize,
    params: &ModelParams,
) -> Result<(f64, QuantumState)> {
    if branch > 3 {
        return Err(crate::error::invalid("branch", "must be in 0..=3"));
    }
    let h = ops.generator(classical_a(x, p, params.m, params.omega));
    let eig = eig_hermitian(&h)?;
    let values = &eig.values;
    let mut gap = f64::INFINITY;
    if branch > 0 {
        gap = gap.min(values[branch] - values[branch - 1]);
    }
    if branch < 3 {
        gap = gap.min(values[branch + 1] - values[branch]);
    }
    if gap < DEGENERACY_GAP {
        return Err(Error::DegenerateBranch { branch, gap });
    }
    let v = QuantumState::new(eig.vector(branch), BasisLayout::Spins)?;
    Ok((values[branch], v))
}

/// `(∂E/∂x, ∂E/∂p)` for the branch by Hellmann–Feynman.
pub fn branch_gradient(x: f64, p: f64, branch: usize, params: &ModelParams) -> Result<(f64, f64)> {
    let (xdot, pdot) = static_residual(x, p, branch, params)?;
    let mw2 = params.m * params.omega * params.omega;
    Ok((-pdot - mw2 * x, xdot - p / params.m))
}

/// `(p/m + ∂E/∂p, −mω²x − ∂E/∂x)` on the given eigenvalue branch.
pub fn static_residual(x: f64, p: f64, branch: usize, params: &ModelParams) -> Result<(f64, f64)> {
    let ops = SpinOperators::new(params);
    residual_with(&ops, x, p, branch, params).map(|(r, _, _)| r)
}

fn residual_with(
    ops: &SpinOperators,
    x: f64,
    p: f64,
    branch: usize,
    params: &ModelParams,
) -> Result<((f64, f64), f64, QuantumState)> {
    let (e, v) = eigenbranch_with(ops, x, p, branch, params)?;
    let k = v.expectation(&ops.coupling);
    Ok((hamilton_rhs(params, x, p, k), e, v))
}

/// Radius² of the circle of static points for `λ = 0`, `g1 = g2 = g`,
/// `mω = 1`: `g²/2 − 2ω_s²/g²`.
pub fn lambda0_circle(omega_s: f64, g: f64, m: f64, omega: f64) -> Result<f64> {
    let mw = m * omega;
    if (mw - 1.0).abs() > 1e-12 {
        return Err(Error::MassFrequencyNotUnit(mw));
    }
    let radius_sq = 0.5 * g * g - 2.0 * omega_s * omega_s / (g * g);
    if !(radius_sq > 0.0) {
        return Err(Error::NoStaticCircle { radius_sq });
    }
    Ok(radius_sq)
}

/// Minimum-norm solution of `J δ = r` for a 2×2 real `J`, discarding
/// singular directions below `1e-6` of the largest singular value.
fn pinv_solve(j: [[f64; 2]; 2], r: [f64; 2]) -> [f64; 2] {
    let a = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let b = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let d = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    let mean = 0.5 * (a + d);
    let rad = (0.5 * (a - d)).hypot(b);
    let eigs = [mean + rad, mean - rad];
    let vecs = if b.abs() > 0.0 {
        let v1 = [b, eigs[0] - a];
        let n = v1[0].hypot(v1[1]);
        let v1 = if n > 0.0 {
            [v1[0] / n, v1[1] / n]
        } else {
            [1.0, 0.0]
        };
        [v1, [-v1[1], v1[0]]]
    } else if a >= d {
        [[1.0, 0.0], [0.0, 1.0]]
    } else {
        [[0.0, 1.0], [1.0, 0.0]]
    };
    // Jᵀ r
    let jt_r = [
        j[0][0] * r[0] + j[1][0] * r[1],
        j[0][1] * r[0] + j[1][1] * r[1],
    ];
    let mut out = [0.0, 0.0];
    for (s2, v) in eigs.iter().zip(vecs) {
        if *s2 <= 1e-12 * eigs[0] || *s2 <= 0.0 {
            continue;
        }
        let coef = (v[0] * jt_r[0] + v[1] * jt_r[1]) / s2;
        out[0] += coef * v[0];
        out[1] += coef * v[1];
    }
    out
}

/// Damped Newton iteration on [`static_residual`] with a central
/// finite-difference Jacobian.
pub fn find_static_solutions(
    params: &ModelParams,
    branch: usize,
    guess: (f64, f64),
) -> Result<StaticSolution> {
    params.validate()?;
    let ops = SpinOperators::new(params);
    let eval = |x: f64, p: f64| residual_with(&ops, x, p, branch, params);
    let size = |r: (f64, f64)| r.0.hypot(r.1);

    let (mut x, mut p) = guess;
    let (mut r, mut e, mut v) = eval(x, p)?;
    for iter in 0..=MAX_ITERATIONS {
        let residual = r.0.abs().max(r.1.abs());
        if residual <= RESIDUAL_TOL {
            return Ok(StaticSolution {
                x,
                p,
                branch,
                eigenstate: v,
                eigenvalue: e,
                residual,
                iterations: iter,
            });
        }
        if iter == MAX_ITERATIONS {
            break;
        }

        let hx = JACOBIAN_STEP * x.abs().max(1.0);
        let hp = JACOBIAN_STEP * p.abs().max(1.0);
        let (rxp, _, _) = eval(x + hx, p)?;
        let (rxm, _, _) = eval(x - hx, p)?;
        let (rpp, _, _) = eval(x, p + hp)?;
        let (rpm, _, _) = eval(x, p - hp)?;
        let jac = [
            [(rxp.0 - rxm.0) / (2.0 * hx), (rpp.0 - rpm.0) / (2.0 * hp)],
            [(rxp.1 - rxm.1) / (2.0 * hx), (rpp.1 - rpm.1) / (2.0 * hp)],
        ];
        let step = pinv_solve(jac, [-r.0, -r.1]);

        let current = size(r);
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let (nx, np) = (x + scale * step[0], p + scale * step[1]);
            if let Ok(candidate) = eval(nx, np) {
                if size(candidate.0) < current {
                    accepted = Some((nx, np, candidate));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((nx, np, (nr, ne, nv))) => {
                x = nx;
                p = np;
                r = nr;
                e = ne;
                v = nv;
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations: iter + 1,
                    residual,
                })
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: r.0.abs().max(r.1.abs()),
    })
}

/// Runs the Newton search from `guess` on every branch, keeping the
/// branches that converge.
pub fn search_all_branches(params: &ModelParams, guess: (f64, f64)) -> Vec<StaticSolution> {
    (0..4)
        .filter_map(|b| find_static_solutions(params, b, guess).ok())
        .collect()
}
