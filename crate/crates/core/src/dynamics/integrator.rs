//! Explicit Runge–Kutta integration on flat real state vectors.

use crate::error::{invalid, Error, Result};

/// A first-order system `dy/dt = f(t, y)` on a real vector.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn deriv(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Largest fixed step considered safe at `(t, y)`; used when the
    /// integrator is allowed to tighten `dt`.
    fn max_step(&self, _t: f64, _y: &[f64]) -> f64 {
        f64::INFINITY
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4,
    Rk45,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Rk45 => "rk45",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rk4" | "fixed-rk4" => Ok(Method::Rk4),
            "rk45" | "adaptive-rk45" | "dopri5" => Ok(Method::Rk45),
            other => Err(invalid("method", format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Integrator steps (of size `dt`) between recorded samples.
    pub sample_every: usize,
    pub method: Method,
    pub adaptive_tol: f64,
    /// Let the RK4 driver shrink `dt` to `0.01/‖H‖` for stiff generators.
    pub auto_dt: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 10.0,
            sample_every: 10,
            method: Method::Rk4,
            adaptive_tol: 1e-10,
            auto_dt: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive and finite"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid("t_final", "must be positive and finite"));
        }
        if self.sample_every == 0 {
            return Err(invalid("sample_every", "must be at least 1"));
        }
        if !(self.adaptive_tol > 0.0) {
            return Err(invalid("adaptive_tol", "must be positive"));
        }
        Ok(())
    }

    pub fn sample_interval(&self) -> f64 {
        self.dt * self.sample_every as f64
    }

    /// Sample times `k·Δ` up to `t_final`, plus `t_final` itself when it is
    /// off the grid.
    pub fn sample_times(&self) -> Vec<f64> {
        let interval = self.sample_interval();
        let count = (self.t_final / interval + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=count).map(|k| k as f64 * interval).collect();
        let last = count as f64 * interval;
        if self.t_final - last > 1e-9 * interval {
            times.push(self.t_final);
        }
        times
    }
}

struct Rk4Buffers {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn rk4_in_place<F>(deriv: &mut F, y: &mut [f64], t: f64, h: f64, b: &mut Rk4Buffers) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let nonfinite = |k: &[f64], t: f64| {
        if all_finite(k) {
            Ok(())
        } else {
            Err(Error::NonFinite { t })
        }
    };

    deriv(t, y, &mut b.k1);
    nonfinite(&b.k1, t)?;
    for i in 0..n {
        b.tmp[i] = y[i] + 0.5 * h * b.k1[i];
    }
    deriv(t + 0.5 * h, &b.tmp, &mut b.k2);
    nonfinite(&b.k2, t)?;
    for i in 0..n {
        b.tmp[i] = y[i] + 0.5 * h * b.k2[i];
    }
    deriv(t + 0.5 * h, &b.tmp, &mut b.k3);
    nonfinite(&b.k3, t)?;
    for i in 0..n {
        b.tmp[i] = y[i] + h * b.k3[i];
    }
    deriv(t + h, &b.tmp, &mut b.k4);
    nonfinite(&b.k4, t)?;
    for i in 0..n {
        y[i] += h / 6.0 * (b.k1[i] + 2.0 * b.k2[i] + 2.0 * b.k3[i] + b.k4[i]);
    }
    Ok(())
}

/// One classical fourth-order Runge–Kutta step. A negative `h` steps
/// backward in time.
pub fn rk4_step<F>(mut deriv: F, y: &[f64], t: f64, h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut out = y.to_vec();
    let mut buffers = Rk4Buffers::new(y.len());
    rk4_in_place(&mut deriv, &mut out, t, h, &mut buffers)?;
    Ok(out)
}

/// Fixed-step RK4 from `t0` to `t1` (either direction) with steps no
/// longer than `|dt|`.
pub fn propagate_rk4<S: OdeSystem>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    let span = t1 - t0;
    let mut y = y0.to_vec();
    if span == 0.0 {
        return Ok(y);
    }
    let steps = (span.abs() / dt.abs() - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut b = Rk4Buffers::new(y.len());
    let mut deriv = |t: f64, y: &[f64], dy: &mut [f64]| sys.deriv(t, y, dy);
    for k in 0..steps {
        rk4_in_place(&mut deriv, &mut y, t0 + k as f64 * h, h, &mut b)?;
    }
    Ok(y)
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of `y` across `[t0, t1]`, landing
/// exactly on `t1`. `h` carries the step-size guess between calls.
fn dopri5_span<S: OdeSystem>(
    sys: &S,
    y: &mut [f64],
    t0: f64,
    t1: f64,
    h: &mut f64,
    tol: f64,
) -> Result<()> {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut t = t0;
    let mut rejects = 0usize;

    while t1 - t > 1e-14 * t1.abs().max(1.0) {
        let step = h.min(t1 - t);
        sys.deriv(t, y, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += step * DP_A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            sys.deriv(t + DP_C[s] * step, &tmp, &mut k[s]);
        }
        let mut err = 0.0_f64;
        for i in 0..n {
            let mut hi = y[i];
            let mut lo = y[i];
            for s in 0..7 {
                hi += step * DP_B5[s] * k[s][i];
                lo += step * DP_B4[s] * k[s][i];
            }
            y5[i] = hi;
            let scale = tol + tol * y[i].abs().max(hi.abs());
            err = err.max(((hi - lo) / scale).abs());
        }
        if !all_finite(&y5) || !err.is_finite() {
            return Err(Error::NonFinite { t });
        }
        if err <= 1.0 {
            t += step;
            y.copy_from_slice(&y5);
            rejects = 0;
        } else {
            rejects += 1;
            if rejects > 50 {
                return Err(Error::NonFinite { t });
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        // Keep the previous size when the last step was clipped to the span end.
        if step == *h || err > 1.0 {
            *h = step * factor;
        } else {
            *h = h.max(step * factor);
        }
    }
    Ok(())
}

/// Samples produced by [`integrate`]; `aborted` holds the error that
/// stopped integration early, if any.
pub(crate) struct Sampled {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub aborted: Option<Error>,
}

pub(crate) fn integrate<S: OdeSystem>(sys: &S, y0: Vec<f64>, cfg: &IntegratorConfig) -> Sampled {
    let grid = cfg.sample_times();
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let mut y = y0;
    times.push(grid[0]);
    states.push(y.clone());

    let mut buffers = Rk4Buffers::new(y.len());
    let mut h_adapt = cfg.dt;
    let mut deriv = |t: f64, y: &[f64], dy: &mut [f64]| sys.deriv(t, y, dy);

    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let span = t1 - t0;
        let outcome = match cfg.method {
            Method::Rk4 => {
                let cap = if cfg.auto_dt {
                    cfg.dt.min(sys.max_step(t0, &y))
                } else {
                    cfg.dt
                };
                let steps = (span / cap - 1e-9).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                (0..steps).try_for_each(|k| {
                    rk4_in_place(&mut deriv, &mut y, t0 + k as f64 * h, h, &mut buffers)
                })
            }
            Method::Rk45 => dopri5_span(sys, &mut y, t0, t1, &mut h_adapt, cfg.adaptive_tol),
        };
        if let Err(e) = outcome {
            return Sampled {
                times,
                states,
                aborted: Some(e),
            };
        }
        times.push(t1);
        states.push(y.clone());
    }
    Sampled {
        times,
        states,
        aborted: None,
    }
}
