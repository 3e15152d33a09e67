//! Describing-function linearization and analytic frequency response.
//!
//! Under a sinusoidal error `A sin θ` the fundamental of `sig(·)^α` has gain
//! `N(A) = (2/π) Ω(α) A^(α-1)` with `Ω(α) = ∫₀^π |sin θ|^(α+1) dθ`. Replacing
//! each signed-power term by that gain turns every differentiator of the
//! family into the second-order low-pass
//!
//! ```text
//! G(s) = k_pos / (s² + k_vel s + k_pos)
//! ```
//!
//! whose natural frequency, damping, Bode curves and straight-line asymptotes
//! are computed here.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::dynamics::DiffParams;
use crate::error::{Result, TdError};

/// Adaptive Simpson recursion; `whole` is the Simpson estimate on `[a, b]`.
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    (a, fa): (f64, f64),
    (m, fm): (f64, f64),
    (b, fb): (f64, f64),
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth - 1)
        + simpson_step(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth - 1)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, (a, fa), (m, fm), (b, fb), whole, tol, 40)
}

/// `(2/π) Ω(α)`, the amplitude-independent factor of the describing gain.
///
/// Decreases from `4/π` at `alpha = 0` to exactly `1` at `alpha = 1`.
pub fn omega_factor(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(TdError::InvalidArgument(format!(
            "exponent must lie in [0, 1], got {alpha}"
        )));
    }
    // |sin θ|^(α+1) is symmetric about π/2.
    let half = adaptive_simpson(|th: f64| th.sin().powf(alpha + 1.0), 0.0, FRAC_PI_2, 1e-12);
    Ok(4.0 / PI * half)
}

/// `N(A)` of `sig(·)^α` for a sinusoid of amplitude `amplitude`.
pub fn describing_gain(amplitude: f64, alpha: f64) -> Result<f64> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(TdError::InvalidArgument(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(TdError::InvalidArgument(format!(
            "exponent must lie in (0, 1], got {alpha}"
        )));
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    Ok(omega_factor(alpha)? * amplitude.powf(alpha - 1.0))
}

/// Equivalent underdamped second-order system of a differentiator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentLinearization {
    pub omega_n: f64,
    pub zeta: f64,
    pub omega_d: f64,
    /// `omega_n²`, numerator and constant denominator coefficient.
    pub k_pos: f64,
    /// `2 zeta omega_n`, the `s` coefficient of the denominator.
    pub k_vel: f64,
}

impl EquivalentLinearization {
    /// Builds from natural frequency and damping; `zeta` must be in `(0, 1)`.
    pub fn from_omega_zeta(omega_n: f64, zeta: f64) -> Result<Self> {
        if !(omega_n > 0.0 && omega_n.is_finite()) {
            return Err(TdError::Degenerate(format!(
                "natural frequency {omega_n} is not positive"
            )));
        }
        if !(zeta > 0.0) {
            return Err(TdError::Degenerate(format!(
                "damping {zeta} is not positive"
            )));
        }
        if zeta >= 1.0 {
            return Err(TdError::Overdamped { zeta });
        }
        Ok(EquivalentLinearization {
            omega_n,
            zeta,
            omega_d: omega_n * (1.0 - zeta * zeta).sqrt(),
            k_pos: omega_n * omega_n,
            k_vel: 2.0 * zeta * omega_n,
        })
    }

    /// Numerator coefficients of `G(s)`, highest power first.
    pub fn numerator(&self) -> [f64; 1] {
        [self.k_pos]
    }

    /// Denominator coefficients of `G(s)`, highest power first.
    pub fn denominator(&self) -> [f64; 3] {
        [1.0, self.k_vel, self.k_pos]
    }

    /// Peak of `|G(jω)|` and the frequency where it occurs, if `zeta < 1/√2`.
    pub fn resonance(&self) -> Option<(f64, f64)> {
        let z2 = self.zeta * self.zeta;
        (2.0 * z2 < 1.0).then(|| {
            (
                self.omega_n * (1.0 - 2.0 * z2).sqrt(),
                1.0 / (2.0 * self.zeta * (1.0 - z2).sqrt()),
            )
        })
    }
}

/// Linearizes `p` about a sinusoidal error of amplitude `amplitude`.
///
/// Both signed-power terms use the same gain `N(A)`. For a linear `p` the
/// amplitude does not enter the result.
pub fn linearize(p: &DiffParams, amplitude: f64) -> Result<EquivalentLinearization> {
    p.validate()?;
    let n = if p.is_linear() {
        0.0
    } else {
        describing_gain(amplitude, p.alpha)?
    };
    let pos = p.a0 + p.a1 * n;
    let vel = p.b0 + p.b1 * n;
    if !(pos > 0.0) {
        return Err(TdError::Degenerate(
            "effective position gain is zero".into(),
        ));
    }
    if !(vel > 0.0) {
        return Err(TdError::Degenerate(
            "effective velocity gain is zero".into(),
        ));
    }
    let omega_n = pos.sqrt() / p.eps;
    let zeta = vel / (2.0 * pos.sqrt());
    EquivalentLinearization::from_omega_zeta(omega_n, zeta)
}

/// One point of a frequency response. Phase is in degrees, negative for lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqPoint {
    pub omega: f64,
    pub mag: f64,
    pub mag_db: f64,
    pub phase_deg: f64,
}

impl FreqPoint {
    pub fn new(omega: f64, mag: f64, phase_deg: f64) -> Self {
        FreqPoint {
            omega,
            mag,
            mag_db: 20.0 * mag.log10(),
            phase_deg,
        }
    }
}

/// Exact response of the equivalent system at `omega` rad/s.
pub fn freq_response(lin: &EquivalentLinearization, omega: f64) -> FreqPoint {
    let u = omega / lin.omega_n;
    let re = 1.0 - u * u;
    let im = 2.0 * lin.zeta * u;
    let mag = 1.0 / (re * re + im * im).sqrt();
    let phase = if u <= 1.0 {
        -(im / re).atan()
    } else {
        -(PI - (im / (u * u - 1.0)).atan())
    };
    // For u = 1 the first branch sees im / 0 = +inf and yields exactly -π/2.
    FreqPoint::new(omega, mag, phase.to_degrees())
}

/// Straight-line Bode asymptote: 0 dB below `omega_n`, -40 dB/decade above.
pub fn asymptote_db(lin: &EquivalentLinearization, omega: f64) -> f64 {
    if omega <= lin.omega_n {
        0.0
    } else {
        -40.0 * (omega / lin.omega_n).log10()
    }
}

/// Response of the first-order filter `(√a0/eps) / (s + √a0/eps)`.
pub fn first_order_response(a0: f64, eps: f64, omega: f64) -> FreqPoint {
    let x = omega * eps / a0.sqrt();
    FreqPoint::new(omega, 1.0 / (x * x + 1.0).sqrt(), -x.atan().to_degrees())
}

/// Tabulates [`freq_response`] over a strictly increasing grid.
pub fn bode_table(lin: &EquivalentLinearization, omegas: &[f64]) -> Result<Vec<FreqPoint>> {
    check_grid(omegas)?;
    Ok(omegas.iter().map(|&w| freq_response(lin, w)).collect())
}

/// Rejects grids that are not positive and strictly increasing.
pub fn check_grid(omegas: &[f64]) -> Result<()> {
    if let Some(&w) = omegas.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(TdError::InvalidArgument(format!(
            "frequencies must be positive, got {w}"
        )));
    }
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TdError::InvalidArgument(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn gamma_oracle(alpha: f64) -> f64 {
        use statrs::function::gamma::gamma;
        // ∫₀^π sin^(α+1) = √π Γ(α/2 + 1) / Γ(α/2 + 3/2)
        2.0 / PI * PI.sqrt() * gamma(alpha / 2.0 + 1.0) / gamma(alpha / 2.0 + 1.5)
    }

    /// Fundamental gain of sig(A sin θ)^α by a plain midpoint rule.
    fn fundamental_gain_midpoint(amplitude: f64, alpha: f64) -> f64 {
        let n = 200_000;
        let h = PI / n as f64;
        let sum: f64 = (0..n)
            .map(|i| {
                let th = (i as f64 + 0.5) * h;
                crate::sig_pow(amplitude * th.sin(), alpha) * th.sin()
            })
            .sum();
        2.0 / PI * sum * h / amplitude
    }

    #[test]
    fn omega_factor_examples() {
        assert!((omega_factor(1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((omega_factor(0.5).unwrap() - 1.1128).abs() < 5e-4);
        assert!((omega_factor(0.0).unwrap() - 4.0 / PI).abs() < 1e-6);
        assert!(omega_factor(-0.1).is_err());
        assert!(omega_factor(1.1).is_err());
    }

    #[test]
    fn omega_factor_matches_gamma_closed_form() {
        for i in 0..=20 {
            let alpha = i as f64 / 20.0;
            let q = omega_factor(alpha).unwrap();
            assert!((q - gamma_oracle(alpha)).abs() < 1e-8, "alpha {alpha}: {q}");
        }
    }

    #[test]
    fn describing_gain_examples() {
        assert!((describing_gain(1.0, 0.5).unwrap() - 1.1128).abs() < 5e-4);
        let n5 = describing_gain(5.0, 0.5).unwrap();
        assert!((n5 - 0.49766).abs() < 3e-4);
        assert!((n5 - fundamental_gain_midpoint(5.0, 0.5)).abs() < 1e-6);
        assert_eq!(describing_gain(17.3, 1.0).unwrap(), 1.0);
        assert!(describing_gain(0.0, 0.5).is_err());
        assert!(describing_gain(-1.0, 0.5).is_err());
    }

    #[test]
    fn linearize_paper_examples() {
        let lin = linearize(&DiffParams::linear(1.0 / 45.0, 0.05, 0.3), 1.0).unwrap();
        assert!((lin.omega_n - 10.062).abs() < 1e-3);
        assert!((lin.zeta - 0.67).abs() < 5e-3);

        let p = DiffParams::nonlinear(1.0 / 45.0, 0.099, 0.268, 0.5);
        let lin = linearize(&p, 5.0).unwrap();
        assert!((lin.omega_n - 10.0).abs() < 0.05, "{lin:?}");
        assert!((lin.zeta - 0.3).abs() < 0.005, "{lin:?}");

        let p = DiffParams::hybrid(1.0 / 45.0, 0.005, 0.005, 0.05, 0.005, 0.5);
        let lin = linearize(&p, 0.5).unwrap();
        assert!((lin.k_pos - 26.06).abs() < 0.05, "{lin:?}");
        assert!((lin.k_vel - 2.6).abs() < 0.01, "{lin:?}");
    }

    #[test]
    fn linearize_errors() {
        let err = linearize(&DiffParams::linear(1.0, 1.0, 2.0), 1.0).unwrap_err();
        assert!(matches!(err, TdError::Overdamped { .. }), "{err:?}");
        assert!(linearize(&DiffParams::linear(1.0, 0.0, 2.0), 1.0).is_err());
        let p = DiffParams::nonlinear(0.1, 1.0, 0.1, 0.5);
        assert!(linearize(&p, 0.0).is_err());
    }

    #[test]
    fn linearization_invariants() {
        let p = DiffParams::hybrid(0.01, 0.1, 0.015, 0.3, 0.015, 0.6);
        let lin = linearize(&p, 1.0).unwrap();
        assert_relative_eq!(lin.omega_d, lin.omega_n * (1.0 - lin.zeta.powi(2)).sqrt());
        assert_relative_eq!(lin.k_pos, lin.omega_n.powi(2));
        assert_relative_eq!(lin.k_vel, 2.0 * lin.zeta * lin.omega_n);
        assert_eq!(lin.denominator(), [1.0, lin.k_vel, lin.k_pos]);
    }

    #[test]
    fn freq_response_examples() {
        let lin = linearize(&DiffParams::linear(1.0 / 45.0, 0.05, 0.3), 1.0).unwrap();
        let low = freq_response(&lin, 1e-9);
        assert!((low.mag - 1.0).abs() < 1e-12 && low.phase_deg.abs() < 1e-6);

        let at = freq_response(&lin, lin.omega_n);
        assert_relative_eq!(at.mag, 1.0 / (2.0 * lin.zeta), max_relative = 1e-12);
        assert_eq!(at.phase_deg, -90.0);

        let two = freq_response(&lin, 2.0);
        assert!((two.mag - 1.0033).abs() < 1e-3, "{two:?}");
        assert!((two.phase_deg + 15.5).abs() < 0.1, "{two:?}");
    }

    #[test]
    fn asymptote_examples() {
        let lin = EquivalentLinearization::from_omega_zeta(10.0, 0.5).unwrap();
        assert_eq!(asymptote_db(&lin, 1.0), 0.0);
        assert_relative_eq!(asymptote_db(&lin, 100.0), -40.0);
        let exact = freq_response(&lin, 1000.0).mag_db;
        assert!((asymptote_db(&lin, 1000.0) - exact).abs() <= 1.0);
    }

    #[test]
    fn first_order_examples() {
        let (a0, eps) = (0.05, 1.0 / 45.0);
        let low = first_order_response(a0, eps, 1e-9);
        assert!((low.mag - 1.0).abs() < 1e-12 && low.phase_deg.abs() < 1e-6);
        let corner = a0.sqrt() / eps;
        let c = first_order_response(a0, eps, corner);
        assert_relative_eq!(c.mag, 0.5f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(c.phase_deg, -45.0, max_relative = 1e-12);

        let far = first_order_response(a0, eps, 100.0 * corner);
        assert!((far.mag_db + 40.0).abs() < 0.1, "{far:?}");
        // Second-order asymptote one hundred times above its corner.
        let lin = linearize(&DiffParams::linear(eps, a0, 0.3), 1.0).unwrap();
        let second = asymptote_db(&lin, 100.0 * lin.omega_n);
        assert!((second + 80.0).abs() < 0.5);
        assert!(freq_response(&lin, 100.0 * corner).mag_db < far.mag_db);
    }

    #[test]
    fn bode_table_shapes() {
        let lin = linearize(&DiffParams::linear(1.0 / 45.0, 0.05, 0.3), 1.0).unwrap();
        assert!(bode_table(&lin, &[]).unwrap().is_empty());
        let one = bode_table(&lin, &[lin.omega_n]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].phase_deg, -90.0);
        assert!(bode_table(&lin, &[2.0, 1.0]).is_err());
        assert!(bode_table(&lin, &[1.0, 1.0]).is_err());
        assert!(bode_table(&lin, &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn bode_resonance_peak() {
        let lin = linearize(&DiffParams::linear(1.0 / 45.0, 0.05, 0.3), 1.0).unwrap();
        let (w_peak, peak) = lin.resonance().unwrap();
        assert!((peak - 1.006).abs() < 1e-3);
        let grid = log_space(0.1 * lin.omega_n, 100.0 * lin.omega_n, 50);
        let table = bode_table(&lin, &grid).unwrap();
        let best = table
            .iter()
            .max_by(|a, b| a.mag.partial_cmp(&b.mag).unwrap())
            .unwrap();
        assert!((best.mag - peak).abs() < 1e-3, "{best:?} vs {peak}");
        assert!((best.omega / w_peak).ln().abs() < 0.15);
        for w in table.windows(2).filter(|w| w[0].omega >= lin.omega_n) {
            assert!(w[1].mag_db < w[0].mag_db);
        }
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(0.5, 30.0, 20);
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[19], 30.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_space(1.0, 2.0, 0).is_empty());
    }

    #[test]
    fn omega_factor_bounds_and_monotonicity() {
        let values: Vec<f64> = (0..=100)
            .map(|i| omega_factor(i as f64 / 100.0).unwrap())
            .collect();
        for q in &values[1..100] {
            assert!(*q > 1.0 && *q < 2.0);
        }
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn nonlinear_reduction_matches_closed_form() {
        let p = DiffParams::nonlinear(1.0 / 45.0, 0.099, 0.268, 0.5);
        for a in [0.1, 1.0, 5.0, 20.0] {
            let lin = linearize(&p, a).unwrap();
            let n = omega_factor(0.5).unwrap() * a.powf(-0.5);
            let omega_n = p.a1.sqrt() / p.eps * n.sqrt();
            let zeta = p.b1 * n.sqrt() / (2.0 * p.a1.sqrt());
            assert_relative_eq!(lin.omega_n, omega_n, max_relative = 1e-9);
            assert_relative_eq!(lin.zeta, zeta, max_relative = 1e-9);
        }
    }

    #[test]
    fn phase_continuous_at_corner() {
        let lin = EquivalentLinearization::from_omega_zeta(7.0, 0.4).unwrap();
        let below = freq_response(&lin, lin.omega_n * (1.0 - 1e-9)).phase_deg;
        let above = freq_response(&lin, lin.omega_n * (1.0 + 1e-9)).phase_deg;
        assert!((below + 90.0).abs() < 1e-6 && (above + 90.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn linear_linearization_ignores_amplitude(
            eps in 0.005f64..0.5, a0 in 0.01f64..1.0, zeta in 0.05f64..0.95, amp in 0.01f64..100.0,
        ) {
            let b0 = 2.0 * zeta * a0.sqrt();
            let p = DiffParams::linear(eps, a0, b0);
            prop_assert_eq!(linearize(&p, amp).unwrap(), linearize(&p, 1.0).unwrap());
        }

        #[test]
        fn amplitude_lowers_natural_frequency(
            a1 in 0.01f64..0.5, b1 in 0.001f64..0.05, alpha in 0.1f64..0.9,
            a in 0.05f64..10.0, ratio in 1.01f64..5.0, a0 in 0.0f64..0.2,
        ) {
            let p = DiffParams::hybrid(0.02, a0, a1, a0 + b1, b1, alpha);
            if let (Ok(small), Ok(big)) = (linearize(&p, a), linearize(&p, a * ratio)) {
                prop_assert!(big.omega_n < small.omega_n);
                prop_assert!(big.omega_n >= a0.sqrt() / p.eps);
            }
        }

        #[test]
        fn magnitude_matches_complex_evaluation(
            omega_n in 0.1f64..1000.0, zeta in 0.01f64..0.99, u in 1e-3f64..1e3,
        ) {
            let lin = EquivalentLinearization::from_omega_zeta(omega_n, zeta).unwrap();
            let fp = freq_response(&lin, u * omega_n);
            let g = Complex64::new(1.0, 0.0) / Complex64::new(1.0 - u * u, 2.0 * zeta * u);
            prop_assert!((fp.mag - g.norm()).abs() <= 1e-12 * g.norm());
            let arg = g.arg().to_degrees();
            prop_assert!((fp.phase_deg - arg).abs() < 1e-9, "{} vs {}", fp.phase_deg, arg);
            prop_assert!(fp.phase_deg <= 0.0 && fp.phase_deg > -180.0);
        }

        #[test]
        fn phase_decreasing(omega_n in 0.1f64..100.0, zeta in 0.01f64..0.99, u in 1e-3f64..1e2) {
            let lin = EquivalentLinearization::from_omega_zeta(omega_n, zeta).unwrap();
            let a = freq_response(&lin, u * omega_n).phase_deg;
            let b = freq_response(&lin, 1.01 * u * omega_n).phase_deg;
            prop_assert!(b < a);
        }
    }
}
