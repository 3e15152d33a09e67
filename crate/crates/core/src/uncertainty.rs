//! Disturbance reconstruction on the scalar plant `dx/dt = -x + u + δ`.
//!
//! Only `y = x + ξ` is measured. A differentiator driven by `y` yields
//! `x̂1 ≈ x` and `x̂2 ≈ dx/dt`, and the plant equation rearranges to
//! `δ̂ = x̂2 + x̂1 - u`.

use crate::dynamics::{DiffParams, DiffState};
use crate::error::{Result, TdError};
use crate::signals::{NoiseSpec, SignalSpec};
use crate::simulation::{rk4_step, run_sampled, SimConfig, TimeSeries, DIVERGENCE_LIMIT};

/// Channel names used by the plant experiment.
pub mod channel {
    pub const X: &str = "x";
    pub const Y: &str = "y";
    pub const U: &str = "u";
    pub const DELTA: &str = "delta_true";
    pub const X1_HAT: &str = "x1_hat";
    pub const X2_HAT: &str = "x2_hat";
    pub const DELTA_HAT: &str = "delta_hat";
}

/// Error metrics skip this leading interval.
pub const ESTIMATION_TRANSIENT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantConfig {
    pub u: SignalSpec,
    pub delta: SignalSpec,
    pub noise: Option<NoiseSpec>,
    pub x0: f64,
}

impl PlantConfig {
    /// `u = 0.1 sin t`, `δ = cos t`, `x(0) = 0`.
    pub fn reference(noise: Option<NoiseSpec>) -> Self {
        PlantConfig {
            u: SignalSpec::sine(0.1, 1.0),
            delta: SignalSpec::cosine(1.0, 1.0),
            noise,
            x0: 0.0,
        }
    }
}

/// Integrates the plant and records `x`, `y`, `u` and the true `δ`.
pub fn simulate_plant(cfg: &PlantConfig, sim: &SimConfig) -> Result<TimeSeries> {
    cfg.u.without_noise().validate()?;
    cfg.delta.without_noise().validate()?;
    let noisy = cfg.noise.map(|n| SignalSpec::zero().with_noise(n));
    sim.validate(noisy.as_ref())?;
    if !cfg.x0.is_finite() {
        return Err(TdError::InvalidArgument(
            "initial plant state must be finite".into(),
        ));
    }
    let n = sim.steps() + 1;
    let dt = sim.dt;
    let mut ts = TimeSeries::with_grid(dt, n);
    let (u, delta) = (&cfg.u, &cfg.delta);
    let mut xs = Vec::with_capacity(n);
    let mut x = cfg.x0;
    for i in 0..n {
        xs.push(x);
        if i + 1 < n {
            let t = i as f64 * dt;
            x = rk4_step(|tau, x: f64| -x + u.clean(tau) + delta.clean(tau), x, t, dt);
            if !x.is_finite() || x.abs() > DIVERGENCE_LIMIT {
                return Err(TdError::Instability { t: t + dt });
            }
        }
    }
    let y = ts
        .t()
        .iter()
        .zip(&xs)
        .map(|(&t, &x)| x + noisy.as_ref().map_or(0.0, |s| s.noise_at(t)))
        .collect();
    let us = ts.t().iter().map(|&t| u.clean(t)).collect();
    let ds = ts.t().iter().map(|&t| delta.clean(t)).collect();
    ts.set_channel(channel::X, xs)?;
    ts.set_channel(channel::Y, y)?;
    ts.set_channel(channel::U, us)?;
    ts.set_channel(channel::DELTA, ds)?;
    Ok(ts)
}

/// Runs `p` on the measured `y` channel and appends `x1_hat`, `x2_hat` and
/// `delta_hat = x2_hat + x1_hat - u`.
pub fn estimate_delta(ts: &TimeSeries, p: &DiffParams) -> Result<TimeSeries> {
    let y = ts.channel(channel::Y)?;
    let u = ts.channel(channel::U)?;
    let (x1, x2) = run_sampled(p, y, ts.dt(), DiffState::default())?;
    let delta_hat = x1
        .iter()
        .zip(&x2)
        .zip(u)
        .map(|((a, b), u)| b + a - u)
        .collect();
    let mut out = ts.clone();
    out.set_channel(channel::X1_HAT, x1)?;
    out.set_channel(channel::X2_HAT, x2)?;
    out.set_channel(channel::DELTA_HAT, delta_hat)?;
    Ok(out)
}
