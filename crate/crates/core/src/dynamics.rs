//! Right-hand sides of the differentiator family.
//!
//! Every differentiator has the state `(x1, x2)`: `x1` tracks the input `v`
//! and `x2` tracks `dv/dt`. The hybrid system
//!
//! ```text
//! dx1/dt      = x2
//! eps² dx2/dt = -a0 (x1 - v) - a1 sig(x1 - v)^α - b0 eps x2 - b1 sig(eps x2)^α
//! ```
//!
//! contains the linear differentiator (`a1 = b1 = 0`) and the nonlinear one
//! (`a0 = b0 = 0`).

use std::ops::{Add, Mul};

use crate::error::{Result, TdError};

/// Signed power `|y|^α · sgn(y)`.
///
/// Odd and strictly increasing for every `alpha > 0`; `sig_pow(y, 1) == y`.
#[inline]
pub fn sig_pow(y: f64, alpha: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else if alpha == 1.0 {
        y
    } else {
        y.abs().powf(alpha).copysign(y)
    }
}

/// Gains, perturbation parameter and exponent of a differentiator.
///
/// `eps` is often quoted through its inverse `R = 1/eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffParams {
    pub eps: f64,
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
    pub alpha: f64,
}

impl DiffParams {
    /// Linear differentiator: only the `a0`/`b0` gains.
    pub fn linear(eps: f64, a0: f64, b0: f64) -> Self {
        DiffParams {
            eps,
            a0,
            a1: 0.0,
            b0,
            b1: 0.0,
            alpha: 1.0,
        }
    }

    /// Nonlinear differentiator: only the signed-power gains.
    pub fn nonlinear(eps: f64, a1: f64, b1: f64, alpha: f64) -> Self {
        DiffParams {
            eps,
            a0: 0.0,
            a1,
            b0: 0.0,
            b1,
            alpha,
        }
    }

    pub fn hybrid(eps: f64, a0: f64, a1: f64, b0: f64, b1: f64, alpha: f64) -> Self {
        DiffParams {
            eps,
            a0,
            a1,
            b0,
            b1,
            alpha,
        }
    }

    /// `R = 1/eps`.
    pub fn r(&self) -> f64 {
        1.0 / self.eps
    }

    /// Same gains with `eps = 1/r`.
    pub fn with_r(self, r: f64) -> Self {
        DiffParams {
            eps: 1.0 / r,
            ..self
        }
    }

    pub fn with_eps(self, eps: f64) -> Self {
        DiffParams { eps, ..self }
    }

    /// No signed-power terms.
    pub fn is_linear(&self) -> bool {
        self.a1 == 0.0 && self.b1 == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TdError::InvalidParams(msg));
        let fields = [
            ("eps", self.eps),
            ("a0", self.a0),
            ("a1", self.a1),
            ("b0", self.b0),
            ("b1", self.b1),
            ("alpha", self.alpha),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{name} is not finite"));
        }
        if self.eps <= 0.0 {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if let Some((name, v)) = fields[1..5].iter().find(|(_, v)| *v < 0.0) {
            return bad(format!("{name} must be non-negative, got {v}"));
        }
        if self.a0 + self.a1 <= 0.0 {
            return bad("a0 + a1 must be positive".into());
        }
        if self.b0 + self.b1 <= 0.0 {
            return bad("b0 + b1 must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !self.is_linear() && self.alpha == 1.0 {
            return bad("alpha must be below 1 when a1 or b1 is non-zero".into());
        }
        Ok(())
    }
}

/// State of a differentiator in its native coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiffState {
    pub x1: f64,
    pub x2: f64,
}

impl DiffState {
    pub fn new(x1: f64, x2: f64) -> Self {
        DiffState { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.x1.abs().max(self.x2.abs())
    }
}

impl Add for DiffState {
    type Output = DiffState;
    fn add(self, rhs: DiffState) -> DiffState {
        DiffState::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl Mul<f64> for DiffState {
    type Output = DiffState;
    fn mul(self, k: f64) -> DiffState {
        DiffState::new(self.x1 * k, self.x2 * k)
    }
}

/// State of the linear differentiator in the high-gain observer chart.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HighGainState {
    pub w1: f64,
    pub w2: f64,
}

impl HighGainState {
    pub fn new(w1: f64, w2: f64) -> Self {
        HighGainState { w1, w2 }
    }
}

impl Add for HighGainState {
    type Output = HighGainState;
    fn add(self, rhs: HighGainState) -> HighGainState {
        HighGainState::new(self.w1 + rhs.w1, self.w2 + rhs.w2)
    }
}

impl Mul<f64> for HighGainState {
    type Output = HighGainState;
    fn mul(self, k: f64) -> HighGainState {
        HighGainState::new(self.w1 * k, self.w2 * k)
    }
}

/// Time derivative of the hybrid differentiator at `state` with input `v`.
#[inline]
pub fn hybrid_rhs(state: DiffState, v: f64, p: &DiffParams) -> DiffState {
    let e = state.x1 - v;
    let ex2 = p.eps * state.x2;
    let mut force = -p.a0 * e - p.b0 * ex2;
    if p.a1 != 0.0 {
        force -= p.a1 * sig_pow(e, p.alpha);
    }
    if p.b1 != 0.0 {
        force -= p.b1 * sig_pow(ex2, p.alpha);
    }
    DiffState::new(state.x2, force / (p.eps * p.eps))
}

/// The linear differentiator alone. `a1`, `b1` and `alpha` are ignored.
pub fn linear_rhs(state: DiffState, v: f64, p: &DiffParams) -> DiffState {
    let e = state.x1 - v;
    let force = -p.a0 * e - p.b0 * (p.eps * state.x2);
    DiffState::new(state.x2, force / (p.eps * p.eps))
}

/// The nonlinear differentiator alone. `a0` and `b0` are ignored.
pub fn nonlinear_rhs(state: DiffState, v: f64, p: &DiffParams) -> DiffState {
    let e = state.x1 - v;
    let force = -p.a1 * sig_pow(e, p.alpha) - p.b1 * sig_pow(p.eps * state.x2, p.alpha);
    DiffState::new(state.x2, force / (p.eps * p.eps))
}

fn require_linear(p: &DiffParams) -> Result<()> {
    if p.is_linear() {
        Ok(())
    } else {
        Err(TdError::InvalidParams(
            "the high-gain realization exists only for a1 = b1 = 0".into(),
        ))
    }
}

/// Linear differentiator written as a high-gain observer:
///
/// ```text
/// dw1/dt = w2 - b0 (w1 - v) / eps
/// dw2/dt = -a0 (w1 - v) / eps²
/// ```
///
/// Its `v -> w2` transfer function equals the `v -> x2` one of
/// [`linear_rhs`].
pub fn highgain_rhs(state: HighGainState, v: f64, p: &DiffParams) -> Result<HighGainState> {
    require_linear(p)?;
    let e = state.w1 - v;
    Ok(HighGainState::new(
        state.w2 - p.b0 * e / p.eps,
        -p.a0 * e / (p.eps * p.eps),
    ))
}

/// Change of coordinates `w1 = x1 + eps b0 x2 / a0`, `w2 = x2`.
pub fn w_of_x(state: DiffState, p: &DiffParams) -> Result<HighGainState> {
    require_linear(p)?;
    if p.a0 == 0.0 {
        return Err(TdError::InvalidParams(
            "coordinate change needs a0 > 0".into(),
        ));
    }
    Ok(HighGainState::new(
        state.x1 + p.eps * p.b0 * state.x2 / p.a0,
        state.x2,
    ))
}

/// Inverse of [`w_of_x`].
pub fn x_of_w(state: HighGainState, p: &DiffParams) -> Result<DiffState> {
    require_linear(p)?;
    if p.a0 == 0.0 {
        return Err(TdError::InvalidParams(
            "coordinate change needs a0 > 0".into(),
        ));
    }
    Ok(DiffState::new(
        state.w1 - p.eps * p.b0 * state.w2 / p.a0,
        state.w2,
    ))
}

/// Classical first-order low-pass filter with corner `sqrt(a0)/eps`.
#[inline]
pub fn first_order_filter_rhs(x: f64, v: f64, a0: f64, eps: f64) -> f64 {
    a0.sqrt() / eps * (v - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::rk4_step;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_3a() -> DiffParams {
        DiffParams::linear(1.0 / 45.0, 0.05, 0.3)
    }

    #[test]
    fn sig_pow_examples() {
        assert_eq!(sig_pow(0.0, 0.5), 0.0);
        assert_eq!(sig_pow(-4.0, 0.5), -2.0);
        assert_eq!(sig_pow(2.0, 1.0), 2.0);
    }

    #[test]
    fn hybrid_rhs_examples() {
        let p = paper_3a();
        let d = hybrid_rhs(DiffState::new(1.5, 0.0), 1.5, &p);
        assert_eq!(d, DiffState::new(0.0, 0.0));

        let d = hybrid_rhs(DiffState::new(0.0, 0.0), 1.0, &p);
        assert_eq!(d.x1, 0.0);
        assert_relative_eq!(d.x2, 101.25, max_relative = 1e-12);

        let p = DiffParams::nonlinear(1.0 / 45.0, 0.099, 0.0, 0.5);
        let d = hybrid_rhs(DiffState::new(1.0, 0.0), 0.0, &p);
        assert_relative_eq!(d.x2, -200.475, max_relative = 1e-12);
    }

    #[test]
    fn highgain_examples() {
        let p = paper_3a();
        let d = highgain_rhs(HighGainState::new(0.7, 0.0), 0.7, &p).unwrap();
        assert_eq!(d, HighGainState::new(0.0, 0.0));
        let d = highgain_rhs(HighGainState::new(0.0, 0.0), 1.0, &p).unwrap();
        assert_relative_eq!(d.w1, 13.5, max_relative = 1e-12);
        assert_relative_eq!(d.w2, 101.25, max_relative = 1e-12);

        let hybrid = DiffParams::hybrid(1.0 / 45.0, 0.05, 0.01, 0.3, 0.0, 0.5);
        assert!(highgain_rhs(HighGainState::default(), 0.0, &hybrid).is_err());
    }

    #[test]
    fn coordinate_change_examples() {
        let p = paper_3a();
        let w = w_of_x(DiffState::new(2.5, 0.0), &p).unwrap();
        assert_eq!(w, HighGainState::new(2.5, 0.0));
        let w = w_of_x(DiffState::new(0.0, 1.0), &p).unwrap();
        assert_relative_eq!(w.w1, 2.0 / 15.0, max_relative = 1e-12);
        assert_eq!(w.w2, 1.0);

        let no_a0 = DiffParams::linear(0.1, 0.0, 0.3);
        assert!(w_of_x(DiffState::default(), &no_a0).is_err());
        assert!(x_of_w(HighGainState::default(), &no_a0).is_err());
    }

    #[test]
    fn coordinate_round_trip_random_states() {
        use rand::{Rng, SeedableRng};
        let p = paper_3a();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let s = DiffState::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
            let back = x_of_w(w_of_x(s, &p).unwrap(), &p).unwrap();
            assert_relative_eq!(back.x1, s.x1, epsilon = 1e-12, max_relative = 1e-14);
            assert_eq!(back.x2, s.x2);
        }
    }

    #[test]
    fn first_order_filter_examples() {
        assert_eq!(first_order_filter_rhs(0.3, 0.3, 0.05, 1.0 / 45.0), 0.0);
        assert_relative_eq!(
            first_order_filter_rhs(0.0, 1.0, 0.05, 1.0 / 45.0),
            0.05f64.sqrt() * 45.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            first_order_filter_rhs(0.0, 1.0, 0.05, 1.0 / 45.0),
            10.0623,
            epsilon = 1e-4
        );
    }

    #[test]
    fn first_order_filter_step_has_unit_dc_gain() {
        let (a0, eps): (f64, f64) = (0.05, 1.0 / 45.0);
        let tau = eps / a0.sqrt();
        let dt = tau / 100.0;
        let mut x = 0.0;
        for i in 0..1000 {
            x = rk4_step(
                |_, s: f64| first_order_filter_rhs(s, 1.0, a0, eps),
                x,
                i as f64 * dt,
                dt,
            );
        }
        assert!((x - 1.0).abs() <= 1e-3, "x = {x}");
    }

    #[test]
    fn validation() {
        assert!(paper_3a().validate().is_ok());
        assert!(DiffParams::linear(0.0, 0.05, 0.3).validate().is_err());
        assert!(DiffParams::linear(0.1, 0.0, 0.3).validate().is_err());
        assert!(DiffParams::linear(0.1, 0.05, 0.0).validate().is_err());
        assert!(DiffParams::nonlinear(0.1, 0.05, 0.3, 1.0)
            .validate()
            .is_err());
        assert!(DiffParams::nonlinear(0.1, 0.05, 0.3, 0.0)
            .validate()
            .is_err());
        assert!(DiffParams::nonlinear(0.1, 0.05, 0.3, 0.6)
            .validate()
            .is_ok());
        assert!(DiffParams::hybrid(0.1, -1.0, 0.1, 0.3, 0.1, 0.6)
            .validate()
            .is_err());
        assert!(DiffParams::linear(f64::NAN, 0.05, 0.3).validate().is_err());
    }

    #[test]
    fn r_alias() {
        let p = paper_3a().with_r(100.0);
        assert_relative_eq!(p.eps, 0.01);
        assert_relative_eq!(p.r(), 100.0);
    }

    prop_compose! {
        fn any_params()(
            eps in 0.005f64..1.0,
            a0 in 0.0f64..2.0,
            a1 in 0.0f64..2.0,
            b0 in 0.0f64..2.0,
            b1 in 0.0f64..2.0,
            alpha in 0.05f64..0.99,
        ) -> DiffParams {
            DiffParams::hybrid(eps, a0 + 1e-3, a1, b0 + 1e-3, b1, alpha)
        }
    }

    proptest! {
        #[test]
        fn sig_pow_is_odd(y in -1e6f64..1e6, alpha in 0.01f64..1.0) {
            prop_assert_eq!(sig_pow(-y, alpha), -sig_pow(y, alpha));
        }

        #[test]
        fn sig_pow_identity_at_one(y in -1e6f64..1e6) {
            prop_assert_eq!(sig_pow(y, 1.0), y);
        }

        #[test]
        fn sig_pow_increasing(y in -100.0f64..100.0, dy in 1e-6f64..10.0, alpha in 0.01f64..1.0) {
            prop_assert!(sig_pow(y + dy, alpha) > sig_pow(y, alpha));
        }

        #[test]
        fn linear_rhs_is_homogeneous(
            p in any_params(),
            x1 in -10.0f64..10.0, x2 in -10.0f64..10.0, v in -10.0f64..10.0,
            lambda in -5.0f64..5.0,
        ) {
            let p = DiffParams::linear(p.eps, p.a0, p.b0);
            let base = hybrid_rhs(DiffState::new(x1, x2), v, &p) * lambda;
            let scaled = hybrid_rhs(DiffState::new(lambda * x1, lambda * x2), lambda * v, &p);
            let tol = 1e-12 * (1.0 + base.max_abs());
            prop_assert!((base.x1 - scaled.x1).abs() <= tol);
            prop_assert!((base.x2 - scaled.x2).abs() <= tol);
        }

        #[test]
        fn hybrid_reduces_to_linear_and_nonlinear(
            p in any_params(),
            x1 in -10.0f64..10.0, x2 in -10.0f64..10.0, v in -10.0f64..10.0,
        ) {
            let s = DiffState::new(x1, x2);
            let lin = DiffParams::linear(p.eps, p.a0, p.b0);
                        let (h, l) = (hybrid_rhs(s, v, &lin), linear_rhs(s, v, &lin));
            prop_assert_eq!(h.x1, l.x1);
            prop_assert_eq!(h.x2, l.x2);

            let non = DiffParams::nonlinear(p.eps, p.a1 + 1e-3, p.b1 + 1e-3, p.alpha);
            let (h, n) = (hybrid_rhs(s, v, &non), nonlinear_rhs(s, v, &non));
            prop_assert_eq!(h.x1, n.x1);
            prop_assert_eq!(h.x2, n.x2);
        }

        #[test]
        fn tracking_equilibrium(p in any_params(), v in -100.0f64..100.0) {
            prop_assert_eq!(hybrid_rhs(DiffState::new(v, 0.0), v, &p), DiffState::default());
        }
    }
}
