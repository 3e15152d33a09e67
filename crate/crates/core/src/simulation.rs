//! Fixed-step integration of the differentiators and tracking metrics.

use std::ops::{Add, Mul};

use crate::describing::linearize;
use crate::dynamics::{hybrid_rhs, DiffParams, DiffState};
use crate::error::{Result, TdError};
use crate::signals::SignalSpec;

/// States beyond this magnitude count as a diverged integration.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

/// Channel names written by [`run`].
pub mod channel {
    pub const V: &str = "v";
    pub const X1: &str = "x1";
    pub const X2: &str = "x2";
    pub const V_CLEAN: &str = "v_clean";
    pub const DV_CLEAN: &str = "dv_clean";
}

/// One classical four-stage Runge-Kutta step of `dy/dt = rhs(t, y)`.
#[inline]
pub fn rk4_step<S, F>(rhs: F, state: S, t: f64, dt: f64) -> S
where
    S: Copy + Add<Output = S> + Mul<f64, Output = S>,
    F: Fn(f64, S) -> S,
{
    let half = 0.5 * dt;
    let k1 = rhs(t, state);
    let k2 = rhs(t + half, state + k1 * half);
    let k3 = rhs(t + half, state + k2 * half);
    let k4 = rhs(t + dt, state + k3 * dt);
    state + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub initial: DiffState,
    /// Leading interval excluded from steady-state metrics.
    pub transient_skip: f64,
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        SimConfig {
            dt,
            t_end,
            initial: DiffState::default(),
            transient_skip: 0.0,
        }
    }

    /// Default step `min(eps/20, Ts/10, 1e-3)` and default transient window
    /// `max(5/omega_n, 2 s)`.
    pub fn for_run(p: &DiffParams, spec: &SignalSpec, t_end: f64) -> Self {
        SimConfig {
            dt: default_dt(p, spec),
            t_end,
            initial: DiffState::default(),
            transient_skip: default_transient(p, spec.amplitude.abs()),
        }
    }

    pub fn with_transient_skip(self, transient_skip: f64) -> Self {
        SimConfig {
            transient_skip,
            ..self
        }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        SimConfig { dt, ..self }
    }

    pub fn with_initial(self, initial: DiffState) -> Self {
        SimConfig { initial, ..self }
    }

    /// Number of steps covering `[0, t_end]`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self, spec: Option<&SignalSpec>) -> Result<()> {
        let bad = |m: String| Err(TdError::InvalidArgument(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("step must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("end time must be positive, got {}", self.t_end));
        }
        if !(self.transient_skip >= 0.0 && self.transient_skip < self.t_end) {
            return bad(format!(
                "transient window {} must lie inside [0, {})",
                self.transient_skip, self.t_end
            ));
        }
        if !self.initial.is_finite() {
            return bad("initial state must be finite".into());
        }
        if let Some(noise) = spec.and_then(|s| s.noise) {
            if self.dt > noise.sample_time * (1.0 + 1e-12) {
                return bad(format!(
                    "step {} exceeds the noise sample time {}",
                    self.dt, noise.sample_time
                ));
            }
        }
        Ok(())
    }
}

pub fn default_dt(p: &DiffParams, spec: &SignalSpec) -> f64 {
    let mut dt = (p.eps / 20.0).min(1e-3);
    if let Some(n) = spec.noise {
        dt = dt.min(n.sample_time / 10.0);
    }
    dt
}

/// Natural frequency used for sizing transients; falls back to the
/// combined gains when the linearization is unavailable.
pub fn natural_frequency_estimate(p: &DiffParams, amplitude: f64) -> f64 {
    let amplitude = if amplitude > 0.0 { amplitude } else { 1.0 };
    linearize(p, amplitude)
        .map(|l| l.omega_n)
        .unwrap_or_else(|_| (p.a0 + p.a1).sqrt() / p.eps)
}

pub fn default_transient(p: &DiffParams, amplitude: f64) -> f64 {
    (5.0 / natural_frequency_estimate(p, amplitude)).max(2.0)
}

/// Uniformly sampled named channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    t: Vec<f64>,
    channels: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    /// `n` samples at `t_i = i * dt` and no channels.
    pub fn with_grid(dt: f64, n: usize) -> Self {
        TimeSeries {
            dt,
            t: (0..n).map(|i| i as f64 * dt).collect(),
            channels: Vec::new(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn t_end(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0)
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(n, _)| n.as_str())
    }

    pub fn channel(&self, name: &str) -> Result<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| TdError::MissingChannel(name.to_owned()))
    }

    /// Adds or replaces a channel of matching length.
    pub fn set_channel(&mut self, name: &str, data: Vec<f64>) -> Result<()> {
        if data.len() != self.t.len() {
            return Err(TdError::InvalidArgument(format!(
                "channel `{name}` has {} samples, expected {}",
                data.len(),
                self.t.len()
            )));
        }
        match self.channels.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = data,
            None => self.channels.push((name.to_owned(), data)),
        }
        Ok(())
    }

    /// Sample indices with `t` in `[t0, t1]`.
    pub fn window(&self, t0: f64, t1: f64) -> std::ops::Range<usize> {
        let tol = 1e-9 * self.dt;
        let lo = self.t.partition_point(|&t| t < t0 - tol);
        let hi = self.t.partition_point(|&t| t <= t1 + tol);
        lo..hi.max(lo)
    }
}

fn check_state(s: DiffState, t: f64) -> Result<()> {
    if s.is_finite() && s.max_abs() <= DIVERGENCE_LIMIT {
        Ok(())
    } else {
        Err(TdError::Instability { t })
    }
}

/// Simulates `p` driven by `spec` over `[0, cfg.t_end]`.
///
/// Within each step the noise keeps the value of the hold containing the
/// step start, while the clean signal is evaluated at every stage time.
pub fn run(p: &DiffParams, spec: &SignalSpec, cfg: &SimConfig) -> Result<TimeSeries> {
    p.validate()?;
    spec.validate()?;
    cfg.validate(Some(spec))?;
    let n = cfg.steps() + 1;
    let dt = cfg.dt;
    let mut ts = TimeSeries::with_grid(dt, n);
    let mut v = Vec::with_capacity(n);
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut state = cfg.initial;
    for i in 0..n {
        let t = i as f64 * dt;
        let xi = spec.noise_at(t);
        v.push(spec.clean(t) + xi);
        x1.push(state.x1);
        x2.push(state.x2);
        if i + 1 < n {
            state = rk4_step(
                |tau, s| hybrid_rhs(s, spec.clean(tau) + xi, p),
                state,
                t,
                dt,
            );
            check_state(state, t + dt)?;
        }
    }
    let v_clean = ts.t().iter().map(|&t| spec.clean(t)).collect();
    let dv_clean = ts.t().iter().map(|&t| spec.derivative(t)).collect();
    ts.set_channel(channel::V, v)?;
    ts.set_channel(channel::X1, x1)?;
    ts.set_channel(channel::X2, x2)?;
    ts.set_channel(channel::V_CLEAN, v_clean)?;
    ts.set_channel(channel::DV_CLEAN, dv_clean)?;
    Ok(ts)
}

/// Drives `p` with a pre-sampled input on a grid of spacing `dt`.
///
/// Stage inputs are linearly interpolated between consecutive samples, so
/// the differentiator only looks at samples up to the end of the current
/// step. Returns the `(x1, x2)` trajectories.
pub fn run_sampled(
    p: &DiffParams,
    input: &[f64],
    dt: f64,
    initial: DiffState,
) -> Result<(Vec<f64>, Vec<f64>)> {
    p.validate()?;
    if !(dt > 0.0) {
        return Err(TdError::InvalidArgument(format!(
            "step must be positive, got {dt}"
        )));
    }
    let n = input.len();
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut state = initial;
    for i in 0..n {
        x1.push(state.x1);
        x2.push(state.x2);
        if i + 1 < n {
            let (y0, y1) = (input[i], input[i + 1]);
            let t = i as f64 * dt;
            state = rk4_step(
                |tau, s| hybrid_rhs(s, y0 + (y1 - y0) * (tau - t) / dt, p),
                state,
                t,
                dt,
            );
            check_state(state, t + dt)?;
        }
    }
    Ok((x1, x2))
}

/// RMS of `channel - reference` over samples with `t` in `window`.
pub fn rms_error(
    ts: &TimeSeries,
    channel: &str,
    reference: &str,
    window: (f64, f64),
) -> Result<f64> {
    let (a, b) = (ts.channel(channel)?, ts.channel(reference)?);
    let range = ts.window(window.0, window.1);
    if range.is_empty() {
        return Err(TdError::InvalidArgument(format!(
            "window [{}, {}] contains no samples",
            window.0, window.1
        )));
    }
    let n = range.len() as f64;
    let ss: f64 = range.map(|i| (a[i] - b[i]).powi(2)).sum();
    Ok((ss / n).sqrt())
}

/// Fits the order `q` in `rms(x1 - v) ~ eps^q` across `family`.
///
/// Each member runs with `dt = min(cfg.dt, eps/20)` on the noise-free
/// `spec`; the error is measured over `[cfg.transient_skip, cfg.t_end]`.
pub fn convergence_order(family: &[DiffParams], spec: &SignalSpec, cfg: &SimConfig) -> Result<f64> {
    if spec.is_noisy() {
        return Err(TdError::InvalidArgument(
            "convergence order needs a noise-free input".into(),
        ));
    }
    if family.len() < 4 {
        return Err(TdError::InvalidArgument(format!(
            "need at least 4 eps values, got {}",
            family.len()
        )));
    }
    let (lo, hi) = family.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
        (lo.min(p.eps), hi.max(p.eps))
    });
    if hi < 8.0 * lo * (1.0 - 1e-12) {
        return Err(TdError::InvalidArgument(
            "eps values must span at least a factor of 8".into(),
        ));
    }
    let points = family
        .iter()
        .map(|p| {
            let c = cfg.with_dt(cfg.dt.min(p.eps / 20.0));
            let ts = run(p, spec, &c)?;
            let e = rms_error(
                &ts,
                channel::X1,
                channel::V_CLEAN,
                (c.transient_skip, c.t_end),
            )?;
            Ok((p.eps.ln(), e.ln()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(least_squares_slope(&points))
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
