//! Test inputs: offset sinusoids plus band-limited white noise.
//!
//! Noise follows the usual "band-limited white noise" block semantics: a
//! zero-order hold of independent Gaussian draws, one per `sample_time`, each
//! with variance `power / sample_time`.
//!
//! The draw for hold `k` comes from a ChaCha8 generator seeded with
//! `seed_from_u64(seed)` on stream `k`, sampled once through the ziggurat
//! standard normal of `rand_distr`. Any `(seed, k)` pair therefore maps to
//! one value regardless of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, TdError};

/// Seed used whenever the caller does not pick one.
pub const DEFAULT_SEED: u64 = 0x5EED_2009;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Noise power (height of the flat power spectral density).
    pub power: f64,
    /// Hold interval in seconds.
    pub sample_time: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(power: f64, sample_time: f64, seed: u64) -> Result<Self> {
        let spec = NoiseSpec {
            power,
            sample_time,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(TdError::InvalidArgument(format!(
                "noise power must be non-negative, got {}",
                self.power
            )));
        }
        if !(self.sample_time > 0.0 && self.sample_time.is_finite()) {
            return Err(TdError::InvalidArgument(format!(
                "noise sample time must be positive, got {}",
                self.sample_time
            )));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseSpec { seed, ..self }
    }

    /// Standard deviation of each held value.
    pub fn sigma(&self) -> f64 {
        (self.power / self.sample_time).sqrt()
    }

    /// Index of the hold interval containing `t`.
    ///
    /// Times within 1e-9 (relative to the hold length) of a boundary are
    /// snapped onto it so that `k * sample_time` lands in hold `k` despite
    /// rounding in the caller's time grid.
    pub fn hold_index(&self, t: f64) -> u64 {
        let x = t / self.sample_time;
        let r = x.round();
        let k = if (x - r).abs() < 1e-9 { r } else { x.floor() };
        k.max(0.0) as u64
    }

    /// Value held during interval `k`.
    pub fn hold_value(&self, k: u64) -> f64 {
        if self.power == 0.0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        let z: f64 = StandardNormal.sample(&mut rng);
        self.sigma() * z
    }
}

/// Band-limited white noise evaluated at time `t >= 0`.
pub fn bl_white_noise(spec: &NoiseSpec, t: f64) -> f64 {
    spec.hold_value(spec.hold_index(t))
}

/// `A sin(ωt)`.
#[inline]
pub fn sinusoid(amplitude: f64, omega: f64, t: f64) -> f64 {
    amplitude * (omega * t).sin()
}

/// `offset + A sin(ωt + phase)` with optional additive noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub amplitude: f64,
    pub omega: f64,
    /// Phase in radians.
    pub phase: f64,
    pub offset: f64,
    pub noise: Option<NoiseSpec>,
}

impl SignalSpec {
    pub fn sine(amplitude: f64, omega: f64) -> Self {
        SignalSpec {
            amplitude,
            omega,
            phase: 0.0,
            offset: 0.0,
            noise: None,
        }
    }

    pub fn cosine(amplitude: f64, omega: f64) -> Self {
        SignalSpec {
            phase: std::f64::consts::FRAC_PI_2,
            ..SignalSpec::sine(amplitude, omega)
        }
    }

    pub fn constant(value: f64) -> Self {
        SignalSpec {
            offset: value,
            ..SignalSpec::sine(0.0, 0.0)
        }
    }

    pub fn zero() -> Self {
        SignalSpec::constant(0.0)
    }

    pub fn with_noise(self, noise: NoiseSpec) -> Self {
        SignalSpec {
            noise: Some(noise),
            ..self
        }
    }

    pub fn without_noise(self) -> Self {
        SignalSpec {
            noise: None,
            ..self
        }
    }

    pub fn is_noisy(&self) -> bool {
        self.noise.is_some_and(|n| n.power > 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.phase.is_finite() && self.offset.is_finite()) {
            return Err(TdError::InvalidArgument(
                "signal terms must be finite".into(),
            ));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(TdError::InvalidArgument(format!(
                "signal frequency must be non-negative, got {}",
                self.omega
            )));
        }
        match &self.noise {
            Some(n) => n.validate(),
            None => Ok(()),
        }
    }

    /// Noise-free value.
    #[inline]
    pub fn clean(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (self.omega * t + self.phase).sin()
    }

    /// Exact time derivative of [`SignalSpec::clean`].
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        self.amplitude * self.omega * (self.omega * t + self.phase).cos()
    }

    pub fn noise_at(&self, t: f64) -> f64 {
        self.noise.as_ref().map_or(0.0, |n| bl_white_noise(n, t))
    }
}

/// Clean signal plus noise at `t`.
pub fn eval_signal(spec: &SignalSpec, t: f64) -> f64 {
    spec.clean(t) + spec.noise_at(t)
}
