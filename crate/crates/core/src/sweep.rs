//! Swept-sine identification of differentiator frequency characteristics.
//!
//! Each frequency gets its own simulation on a clean input `A sin(ωt)`. After
//! the transient, the fundamental of `x1` is compared with the input and the
//! fundamental of `x2` with the ideal derivative `Aω cos(ωt)`, so a perfect
//! differentiator reads 0 dB and 0° on both channels.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;

use crate::describing::{check_grid, linearize, FreqPoint};
use crate::dynamics::{DiffParams, DiffState};
use crate::error::{Result, TdError};
use crate::signals::SignalSpec;
use crate::simulation::{channel, natural_frequency_estimate, run, SimConfig, TimeSeries};

/// Amplitude and phase (degrees, relative to `sin ωt`) of a fundamental.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub amplitude: f64,
    pub phase_deg: f64,
}

/// Correlates `channel` with `sin ωt` and `cos ωt` over `periods` whole
/// periods beginning at `start`.
///
/// Uses the trapezoid rule on the sample grid, with the window ends
/// interpolated when they fall between samples.
pub fn fundamental_component(
    ts: &TimeSeries,
    channel: &str,
    omega: f64,
    start: f64,
    periods: usize,
) -> Result<Harmonic> {
    if !(omega > 0.0) {
        return Err(TdError::InvalidArgument(format!(
            "frequency must be positive, got {omega}"
        )));
    }
    if periods < 3 {
        return Err(TdError::InvalidArgument(format!(
            "correlation window needs at least 3 periods, got {periods}"
        )));
    }
    let y = ts.channel(channel)?;
    let span = periods as f64 * 2.0 * PI / omega;
    let end = start + span;
    let dt = ts.dt();
    if start < -1e-9 * dt || end > ts.t_end() + 1e-9 * dt || ts.len() < 2 {
        return Err(TdError::InvalidArgument(format!(
            "window [{start}, {end}] exceeds the record [0, {}]",
            ts.t_end()
        )));
    }
    let at = |t: f64| -> f64 {
        let x = (t / dt).clamp(0.0, (ts.len() - 1) as f64);
        let i = (x.floor() as usize).min(ts.len() - 2);
        let f = x - i as f64;
        y[i] + (y[i + 1] - y[i]) * f
    };
    let inner = ts.window(start, end);
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(inner.len() + 2);
    let snap = 1e-9 * dt;
    if inner.is_empty() || (ts.t()[inner.start] - start).abs() > snap {
        nodes.push((start, at(start)));
    }
    nodes.extend(inner.clone().map(|i| (ts.t()[i], y[i])));
    if inner.is_empty() || (ts.t()[inner.end - 1] - end).abs() > snap {
        nodes.push((end, at(end)));
    }
    let (mut a, mut b) = (0.0, 0.0);
    for w in nodes.windows(2) {
        let ((t0, y0), (t1, y1)) = (w[0], w[1]);
        let h = 0.5 * (t1 - t0);
        a += h * (y0 * (omega * t0).sin() + y1 * (omega * t1).sin());
        b += h * (y0 * (omega * t0).cos() + y1 * (omega * t1).cos());
    }
    let (a, b) = (2.0 * a / span, 2.0 * b / span);
    Ok(Harmonic {
        amplitude: a.hypot(b),
        phase_deg: b.atan2(a).to_degrees(),
    })
}

/// Wraps an angle in degrees into `(-180, 180]`.
pub fn wrap_deg(x: f64) -> f64 {
    let r = x.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredResponse {
    pub omega: f64,
    /// Fundamental of `x1` over the input amplitude.
    pub track_mag: f64,
    pub track_phase_deg: f64,
    /// Fundamental of `x2` over `A·ω`.
    pub deriv_mag: f64,
    /// Phase of `x2` relative to `Aω cos(ωt)`.
    pub deriv_phase_deg: f64,
}

impl MeasuredResponse {
    pub fn track(&self) -> FreqPoint {
        FreqPoint::new(self.omega, self.track_mag, self.track_phase_deg)
    }

    pub fn deriv(&self) -> FreqPoint {
        FreqPoint::new(self.omega, self.deriv_mag, self.deriv_phase_deg)
    }
}

/// How each frequency point is simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Upper bound for the step; the actual step also divides the period.
    pub max_dt: f64,
    pub min_samples_per_period: usize,
    /// Minimum number of periods discarded before measuring.
    pub settle_periods: usize,
    /// Whole periods correlated after settling.
    pub measure_periods: usize,
    pub initial: DiffState,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max_dt: 1e-3,
            min_samples_per_period: 64,
            settle_periods: 5,
            measure_periods: 5,
            initial: DiffState::default(),
        }
    }
}

/// Time for the equivalent linear system's envelope to decay by `e^-10`.
fn settle_time(p: &DiffParams, amplitude: f64) -> f64 {
    match linearize(p, amplitude) {
        Ok(lin) => 10.0 / (lin.zeta * lin.omega_n),
        Err(_) => 10.0 / natural_frequency_estimate(p, amplitude),
    }
}

/// Simulates one sinusoidal input and extracts both channel responses.
pub fn measure_point(
    p: &DiffParams,
    amplitude: f64,
    omega: f64,
    cfg: &SweepConfig,
) -> Result<MeasuredResponse> {
    if !(amplitude > 0.0) || !(omega > 0.0) {
        return Err(TdError::InvalidArgument(format!(
            "amplitude and frequency must be positive, got {amplitude} and {omega}"
        )));
    }
    if cfg.measure_periods < 3 {
        return Err(TdError::InvalidArgument(
            "at least 3 measured periods are required".into(),
        ));
    }
    let period = 2.0 * PI / omega;
    let base = (p.eps / 20.0)
        .min(cfg.max_dt)
        .min(period / cfg.min_samples_per_period.max(1) as f64);
    let dt = period / (period / base).ceil();
    let settle = settle_time(p, amplitude).max(cfg.settle_periods as f64 * period);
    let settle_periods = (settle / period).ceil();
    let t_end = (settle_periods + cfg.measure_periods as f64) * period;
    let start = settle_periods * period;
    let sim = SimConfig::new(dt, t_end)
        .with_transient_skip(start)
        .with_initial(cfg.initial);
    let ts = run(p, &SignalSpec::sine(amplitude, omega), &sim)?;
    let track = fundamental_component(&ts, channel::X1, omega, start, cfg.measure_periods)?;
    let deriv = fundamental_component(&ts, channel::X2, omega, start, cfg.measure_periods)?;
    Ok(MeasuredResponse {
        omega,
        track_mag: track.amplitude / amplitude,
        track_phase_deg: wrap_deg(track.phase_deg),
        deriv_mag: deriv.amplitude / (amplitude * omega),
        deriv_phase_deg: wrap_deg(deriv.phase_deg - 90.0),
    })
}

/// Measures every grid frequency; points run in parallel, results keep
/// grid order and phases are unwrapped along the grid.
pub fn sweep(
    p: &DiffParams,
    amplitude: f64,
    omegas: &[f64],
    cfg: &SweepConfig,
) -> Result<Vec<MeasuredResponse>> {
    check_grid(omegas)?;
    let mut out = omegas
        .par_iter()
        .map(|&omega| {
            measure_point(p, amplitude, omega, cfg).map_err(|e| TdError::SweepPoint {
                omega,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for i in 1..out.len() {
        let (prev_t, prev_d) = (out[i - 1].track_phase_deg, out[i - 1].deriv_phase_deg);
        let cur = &mut out[i];
        cur.track_phase_deg = prev_t + wrap_deg(cur.track_phase_deg - prev_t);
        cur.deriv_phase_deg = prev_d + wrap_deg(cur.deriv_phase_deg - prev_d);
    }
    Ok(out)
}

/// First frequency where `mags` falls below -3 dB, with log-linear
/// interpolation between the bracketing grid points.
pub fn bandwidth_3db(omegas: &[f64], mags: &[f64]) -> Option<f64> {
    let cut = FRAC_1_SQRT_2;
    let i = mags.iter().position(|&m| m < cut)?;
    if i == 0 {
        return None;
    }
    let (w0, w1) = (omegas[i - 1].ln(), omegas[i].ln());
    let (m0, m1) = (mags[i - 1].log10(), mags[i].log10());
    let f = (cut.log10() - m0) / (m1 - m0);
    Some((w0 + f * (w1 - w0)).exp())
}

/// -3 dB bandwidth of the tracking channel.
pub fn tracking_bandwidth(responses: &[MeasuredResponse]) -> Option<f64> {
    let omegas: Vec<f64> = responses.iter().map(|r| r.omega).collect();
    let mags: Vec<f64> = responses.iter().map(|r| r.track_mag).collect();
    bandwidth_3db(&omegas, &mags)
}
