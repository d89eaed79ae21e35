//! Explicit stability constants for recovering `f` from `F_B f`, and numerical
//! checks of the inequalities they rest on.
//!
//! Large truncation (`B > ω`):
//! `‖f‖ ≤ (1 - ω²/B²)^{-1/2} ‖F_B f‖`.
//!
//! Small truncation (`B < B₀`, `B₀ ≥ √γ ω`):
//! `‖f‖ ≤ k ‖F_B f‖` with
//! `k = c (2B₀/(1-1/γ))^{1/w} e^{2L(1-w)/w}`, `c = (B^{1/4}/π^{1/4} + 2/√B)²`,
//! where `w` is the harmonic measure of the slit `[0,B]×{0}` in the deleted
//! half-strip evaluated at `B₀`, or its closed-form lower bound `η`.

mod checks;
mod harmonic;

pub use checks::{
    empirical_stability_check, eta_vs_measure_check, gn_inequality_check,
    two_constants_check, two_constants_witness, EmpiricalStabilityReport, EtaMeasureReport,
    GnReport, PointCheck, TwoConstantsReport, TwoConstantsWitness,
};
pub use harmonic::{
    default_truncation_length, solve_harmonic_measure, solve_harmonic_measure_with,
    HarmonicMeasureField, SolverOptions,
};

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::signals::FrequencyNumber;

/// `(L, B₀, B, γ)` plus an optional frequency number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityParams {
    half_strip_height: f64,
    reference_bandwidth: f64,
    bandwidth: f64,
    gamma: f64,
    omega: Option<FrequencyNumber>,
}

impl StabilityParams {
    /// Requires `L, B, B₀ > 0`, `B ≤ B₀` and `γ > 1`.
    pub fn new(half_strip_height: f64, reference_bandwidth: f64, bandwidth: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [
            ("L", half_strip_height),
            ("B0", reference_bandwidth),
            ("B", bandwidth),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if !(gamma.is_finite() && gamma > 1.0) {
            return invalid(format!("gamma must exceed 1, got {gamma}"));
        }
        if bandwidth > reference_bandwidth {
            return invalid(format!(
                "B = {bandwidth} must not exceed B0 = {reference_bandwidth}"
            ));
        }
        Ok(Self {
            half_strip_height,
            reference_bandwidth,
            bandwidth,
            gamma,
            omega: None,
        })
    }

    /// Attaches `ω`, enforcing `B₀ ≥ √γ ω`.
    pub fn with_omega(mut self, omega: FrequencyNumber) -> Result<Self> {
        let needed = self.gamma.sqrt() * omega.value();
        if self.reference_bandwidth < needed * (1.0 - 1e-12) {
            return invalid(format!(
                "B0 = {} is below sqrt(gamma) * omega = {needed}",
                self.reference_bandwidth
            ));
        }
        self.omega = Some(omega);
        Ok(self)
    }

    pub fn half_strip_height(&self) -> f64 {
        self.half_strip_height
    }

    pub fn reference_bandwidth(&self) -> f64 {
        self.reference_bandwidth
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega(&self) -> Option<FrequencyNumber> {
        self.omega
    }

    /// Same parameters with a different `B`.
    pub fn with_bandwidth(&self, bandwidth: f64) -> Result<Self> {
        let mut p = Self::new(
            self.half_strip_height,
            self.reference_bandwidth,
            bandwidth,
            self.gamma,
        )?;
        p.omega = self.omega;
        Ok(p)
    }
}

/// `(1 - ω²/B²)^{-1/2}`; only meaningful above the frequency number.
pub fn large_truncation_factor(omega: f64, bandwidth: f64) -> Result<f64> {
    if !(omega > 0.0 && bandwidth.is_finite()) {
        return invalid(format!("need omega > 0 and finite B (omega = {omega}, B = {bandwidth})"));
    }
    if bandwidth <= omega {
        return invalid(format!(
            "B = {bandwidth} does not exceed the frequency number {omega}; the large-truncation bound is vacuous"
        ));
    }
    let r = omega / bandwidth;
    Ok(1.0 / ((1.0 - r) * (1.0 + r)).sqrt())
}

/// `C_γ = (1 - 1/γ)^{-1/2}`, the factor at `B = √γ ω`.
pub fn gamma_constant(gamma: f64) -> Result<f64> {
    if !(gamma > 1.0) {
        return invalid(format!("gamma must exceed 1, got {gamma}"));
    }
    Ok(1.0 / (1.0 - 1.0 / gamma).sqrt())
}

/// `c = (B^{1/4}/π^{1/4} + 2/√B)²`.
pub fn interpolation_factor(bandwidth: f64) -> f64 {
    let t = (bandwidth / PI).powf(0.25) + 2.0 / bandwidth.sqrt();
    t * t
}

/// `ln(e^x - 1)` without overflow.
fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// The closed-form lower bound `η_{L,B₀,B}` of the harmonic measure.
///
/// Evaluated through `d = (π/2L)(ln(e^B-1) - ln(e^{B₀}-1))` as
/// `(2/π) atan(1/√(e^{-2d} - 1))`, so no power of `e^{B₀}` is formed.
/// Underflows to `0` once `η < ~1e-308`.
pub fn eta_value(half_strip_height: f64, reference_bandwidth: f64, bandwidth: f64) -> Result<f64> {
    if !(half_strip_height > 0.0 && bandwidth > 0.0) {
        return invalid("eta needs L > 0 and B > 0");
    }
    if bandwidth >= reference_bandwidth {
        return invalid(format!(
            "eta needs B < B0 (B = {bandwidth}, B0 = {reference_bandwidth})"
        ));
    }
    let d = PI / (2.0 * half_strip_height) * (ln_expm1(bandwidth) - ln_expm1(reference_bandwidth));
    let t = (-2.0 * d).exp_m1().sqrt();
    Ok(2.0 / PI * 1f64.atan2(t))
}

pub fn eta(params: &StabilityParams) -> Result<f64> {
    eta_value(
        params.half_strip_height,
        params.reference_bandwidth,
        params.bandwidth,
    )
}

/// A possibly astronomically large constant, carried in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityConstant {
    pub log_value: f64,
    /// `exp(log_value)`, or `+inf` when that overflows.
    pub value: f64,
    pub overflow: bool,
}

impl StabilityConstant {
    fn from_log(log_value: f64) -> Self {
        let overflow = !(log_value < f64::MAX.ln());
        Self {
            log_value,
            value: if overflow { f64::INFINITY } else { log_value.exp() },
            overflow,
        }
    }
}

/// `k = c (2B₀/(1-1/γ))^{1/e} e^{2L(1-e)/e}` for exponent `e ∈ (0, 1]`
/// (either the harmonic measure `w` or its lower bound `η`).
pub fn small_truncation_constant(params: &StabilityParams, exponent: f64) -> Result<StabilityConstant> {
    if !(exponent > 0.0 && exponent <= 1.0) {
        return invalid(format!("exponent must lie in (0, 1], got {exponent}"));
    }
    let l = params.half_strip_height;
    let base = 2.0 * params.reference_bandwidth / (1.0 - 1.0 / params.gamma);
    let log_k = interpolation_factor(params.bandwidth).ln()
        + base.ln() / exponent
        + 2.0 * l * (1.0 - exponent) / exponent;
    Ok(StabilityConstant::from_log(log_k))
}

/// `k` with exponent `η`. When `η` underflows to zero the constant is
/// reported as an overflow.
pub fn eta_stability_constant(params: &StabilityParams) -> Result<StabilityConstant> {
    let e = eta(params)?;
    if e <= 0.0 {
        return Ok(StabilityConstant::from_log(f64::INFINITY));
    }
    small_truncation_constant(params, e)
}

/// `lim_{B→B₀} k = (B₀^{1/4}/π^{1/4} + 2/√B₀)² · 2B₀/(1-1/γ)`.
pub fn small_truncation_limit(reference_bandwidth: f64, gamma: f64) -> f64 {
    interpolation_factor(reference_bandwidth) * 2.0 * reference_bandwidth / (1.0 - 1.0 / gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 60-digit mpmath evaluations of the arctan expression and of k.
    const ETA_1_2_1: f64 = 0.081_126_848_922_641_677_177_715_83;
    const ETA_05_3_2: f64 = 0.020_457_728_802_301_857_485_648_41;
    const ETA_12_10_95: f64 = 0.347_899_598_155_233_875_844_414_5;
    const ETA_1_2PI_PI: f64 = 0.004_284_155_340_538_025_127_181_667;
    const LN_K_1_2PI_PI: f64 = 1_218.927_622_183_638;
    const LIMIT_2PI_G2: f64 = 99.237_466_366_997_817_973_129_38;

    #[test]
    fn large_truncation_factor_limits() {
        let w = PI / 2.0;
        let f = large_truncation_factor(w, 1e9).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        let f = large_truncation_factor(w, 2f64.sqrt() * w).unwrap();
        assert!((f - 2f64.sqrt()).abs() < 1e-12);
        assert!((gamma_constant(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(large_truncation_factor(w, w).is_err());
        assert!(large_truncation_factor(w, 1.0).is_err());
        assert!(gamma_constant(1.0).is_err());
    }

    #[test]
    fn large_truncation_factor_strictly_decreasing() {
        let w = 3.0;
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let f = large_truncation_factor(w, w + 0.05 * i as f64).unwrap();
            assert!(f < prev && f >= 1.0);
            prev = f;
        }
    }

    #[test]
    fn eta_matches_high_precision() {
        for (l, b0, b, want) in [
            (1.0, 2.0, 1.0, ETA_1_2_1),
            (0.5, 3.0, 2.0, ETA_05_3_2),
            (1.2, 10.0, 9.5, ETA_12_10_95),
            (1.0, 2.0 * PI, PI, ETA_1_2PI_PI),
        ] {
            let got = eta_value(l, b0, b).unwrap();
            assert!((got - want).abs() <= 1e-12 * want, "{l} {b0} {b}: {got} vs {want}");
        }
    }

    #[test]
    fn eta_limits_and_errors() {
        let near_top = eta_value(1.0, 2.0, 2.0 - 1e-12).unwrap();
        assert!(near_top > 0.999 && near_top < 1.0);
        let near_zero = eta_value(1.0, 2.0, 1e-9).unwrap();
        assert!(near_zero < 1e-6);
        assert!(eta_value(1.0, 2.0, 2.0).is_err());
        assert!(eta_value(1.0, 2.0, 3.0).is_err());
        // Large B₀ must not overflow.
        let big = eta_value(1.0, 400.0, 399.0).unwrap();
        assert!(big.is_finite() && big > 0.0);
    }

    #[test]
    fn eta_increasing_in_bandwidth() {
        let mut prev = 0.0;
        for i in 1..400 {
            let b = 3.0 * i as f64 / 400.0;
            let e = eta_value(0.8, 3.0, b).unwrap();
            assert!(e > prev, "B = {b}");
            prev = e;
        }
    }

    #[test]
    fn small_truncation_constant_values() {
        let p = StabilityParams::new(1.0, 2.0 * PI, PI, 2.0).unwrap();
        let e = eta(&p).unwrap();
        let k = small_truncation_constant(&p, e).unwrap();
        assert!(k.overflow && k.value.is_infinite());
        assert!((k.log_value - LN_K_1_2PI_PI).abs() <= 1e-10 * LN_K_1_2PI_PI);

        let p = StabilityParams::new(1.0, 2.0 * PI, 2.0 * PI, 2.0).unwrap();
        let k = small_truncation_constant(&p, 1.0).unwrap();
        assert!(!k.overflow);
        assert!((k.value - LIMIT_2PI_G2).abs() <= 1e-12 * LIMIT_2PI_G2);
        assert!((small_truncation_limit(2.0 * PI, 2.0) - LIMIT_2PI_G2).abs() <= 1e-12 * LIMIT_2PI_G2);

        assert!(small_truncation_constant(&p, 1e-6).unwrap().overflow);
        assert!(small_truncation_constant(&p, 0.0).is_err());
        assert!(small_truncation_constant(&p, 1.5).is_err());
    }

    #[test]
    fn small_truncation_constant_decreasing_in_exponent() {
        let p = StabilityParams::new(0.7, 4.0, 1.0, 1.5).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..=100 {
            let k = small_truncation_constant(&p, i as f64 / 100.0).unwrap();
            assert!(k.log_value < prev);
            prev = k.log_value;
        }
    }

    #[test]
    fn eta_constant_underflow_is_overflow() {
        let p = StabilityParams::new(1.0, 800.0, 1.0, 2.0).unwrap();
        assert_eq!(eta(&p).unwrap(), 0.0);
        let k = eta_stability_constant(&p).unwrap();
        assert!(k.overflow && k.value.is_infinite());
        let p = StabilityParams::new(1.0, 2.0 * PI, PI, 2.0).unwrap();
        let k = eta_stability_constant(&p).unwrap();
        assert!((k.log_value - LN_K_1_2PI_PI).abs() <= 1e-10 * LN_K_1_2PI_PI);
    }

    #[test]
    fn params_validation() {
        assert!(StabilityParams::new(1.0, 2.0, 3.0, 2.0).is_err());
        assert!(StabilityParams::new(1.0, 2.0, 1.0, 1.0).is_err());
        assert!(StabilityParams::new(0.0, 2.0, 1.0, 2.0).is_err());
        let p = StabilityParams::new(1.0, 2.0, 1.0, 2.0).unwrap();
        assert!(p.with_omega(FrequencyNumber::new(PI / 2.0).unwrap()).is_err());
        let p = StabilityParams::new(1.0, 2.3, 1.0, 2.0).unwrap();
        assert!(p.with_omega(FrequencyNumber::new(PI / 2.0).unwrap()).is_ok());
    }
}
