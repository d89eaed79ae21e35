use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::harmonic::{default_truncation_length, solve_harmonic_measure, HarmonicMeasureField};
use super::{eta, eta_value, small_truncation_constant, StabilityParams};
use crate::error::{invalid, Result};
use crate::signals::{discrete_derivative, eval_eigenfunction, EigenfunctionSpec, Sample};
use crate::transform::{eigenfunction_transform, truncated_l2_norm};

/// Both sides of `‖u‖_∞ ≤ √2 ‖u‖^{1/2} ‖u'‖^{1/2} + (√8/√B) ‖u‖` on `[0, B]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GnReport {
    pub lhs: f64,
    pub rhs: f64,
    pub l2: f64,
    pub derivative_l2: f64,
    pub holds: bool,
}

fn trapezoid_l2<T: Sample>(values: &[T], spacing: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().map(|v| v.abs_sq()).sum();
    let ends = 0.5 * (values[0].abs_sq() + values[n - 1].abs_sq());
    (spacing * (inner + ends)).sqrt()
}

/// Checks the interpolation inequality for samples `u(0), u(h), ..., u(B)`,
/// with `B = (n - 1) h`. Norms use the trapezoid rule and the derivative the
/// second-order stencil from [`discrete_derivative`].
pub fn gn_inequality_check<T: Sample>(samples: &[T], spacing: f64) -> Result<GnReport> {
    if samples.len() < 3 {
        return invalid(format!("need at least 3 samples, got {}", samples.len()));
    }
    if !(spacing > 0.0) {
        return invalid(format!("spacing must be positive, got {spacing}"));
    }
    let length = spacing * (samples.len() - 1) as f64;
    let lhs = samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let l2 = trapezoid_l2(samples, spacing);
    let d = discrete_derivative(samples, spacing);
    let derivative_l2 = trapezoid_l2(&d, spacing);
    let rhs = 2f64.sqrt() * (l2 * derivative_l2).sqrt() + 8f64.sqrt() / length.sqrt() * l2;
    Ok(GnReport {
        lhs,
        rhs,
        l2,
        derivative_l2,
        holds: lhs <= rhs,
    })
}

/// `η` against the finite-difference harmonic measure at `z = B₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaMeasureReport {
    pub eta: f64,
    pub w: f64,
    /// Allowed discretization error, `5 · mesh`.
    pub budget: f64,
    pub eta_le_w: bool,
}

/// Requires `0 < L < π/2` and `0 < B < B₀`; `B` and `L` must be multiples of `mesh`.
pub fn eta_vs_measure_check(
    half_strip_height: f64,
    reference_bandwidth: f64,
    bandwidth: f64,
    mesh: f64,
) -> Result<EtaMeasureReport> {
    if !(half_strip_height > 0.0 && half_strip_height < PI / 2.0) {
        return invalid(format!("need 0 < L < π/2, got L = {half_strip_height}"));
    }
    let e = eta_value(half_strip_height, reference_bandwidth, bandwidth)?;
    let x = default_truncation_length(half_strip_height, bandwidth, reference_bandwidth, mesh);
    let field = solve_harmonic_measure(half_strip_height, bandwidth, x, mesh)?;
    let w = field.value_at(reference_bandwidth, 0.0)?;
    let budget = 5.0 * mesh;
    Ok(EtaMeasureReport {
        eta: e,
        w,
        budget,
        eta_le_w: e <= w + budget,
    })
}

/// Bounds for the two-constants inequality `|f̂(z)| ≤ m^w M^{1-w}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoConstantsWitness {
    /// `M ≥ sup |f̂|` on `|Im z| ≤ L`.
    pub sup_bound: f64,
    /// `m ≥ sup |f̂|` on the slit `[0, B]`.
    pub slit_bound: f64,
}

impl TwoConstantsWitness {
    pub fn new(sup_bound: f64, slit_bound: f64) -> Result<Self> {
        if !(slit_bound > 0.0 && slit_bound <= sup_bound) {
            return invalid(format!(
                "need 0 < m ≤ M, got m = {slit_bound}, M = {sup_bound}"
            ));
        }
        Ok(Self {
            sup_bound,
            slit_bound,
        })
    }

    /// `m^w M^{1-w}` for `w ∈ [0, 1]`.
    pub fn bound(&self, measure: f64) -> f64 {
        let w = measure.clamp(0.0, 1.0);
        (w * self.slit_bound.ln() + (1.0 - w) * self.sup_bound.ln()).exp()
    }
}

/// `sup_{ξ ∈ [a, b]} |f̂_k(ξ)|` by dense sampling plus golden-section refinement.
fn sup_on_interval(spec: EigenfunctionSpec, a: f64, b: f64) -> f64 {
    let g = |xi: f64| eigenfunction_transform(spec, Complex64::new(xi, 0.0)).norm();
    let n = 4000;
    let h = (b - a) / n as f64;
    let (best, _) = (0..=n)
        .map(|i| (i, g(a + i as f64 * h)))
        .fold((0, f64::MIN), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let (mut lo, mut hi) = ((a + (best as f64 - 1.0) * h).max(a), (a + (best as f64 + 1.0) * h).min(b));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = hi - phi * (hi - lo);
        let d = lo + phi * (hi - lo);
        if g(c) > g(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    g(a + best as f64 * h).max(g(0.5 * (lo + hi)))
}

/// Witness for `f_k`: `M = ‖f_k‖ e^L / √π` with `‖f_k‖ = 1`, and
/// `m = sup_{[0,B]} |f̂_k|`. Also returns whether the sup over `[0, B]`
/// equals the sup over `[-B, B]` (it does for real `f`).
pub fn two_constants_witness(
    spec: EigenfunctionSpec,
    half_strip_height: f64,
    bandwidth: f64,
) -> Result<(TwoConstantsWitness, bool)> {
    let big_m = half_strip_height.exp() / PI.sqrt();
    let m = sup_on_interval(spec, 0.0, bandwidth);
    let m_neg = sup_on_interval(spec, -bandwidth, 0.0);
    let symmetric = (m - m_neg).abs() <= 1e-12 * m.max(1e-300);
    Ok((TwoConstantsWitness::new(big_m, m)?, symmetric))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointCheck {
    pub re: f64,
    pub im: f64,
    pub abs_transform: f64,
    pub w: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoConstantsReport {
    pub witness: TwoConstantsWitness,
    pub budget: f64,
    pub points: Vec<PointCheck>,
    pub all_hold: bool,
}

/// Verifies `|f̂_k(z)| ≤ m^{w(z)} M^{1-w(z)}` at each point, with `w` from the
/// field lowered by `5 · mesh` to absorb discretization error.
pub fn two_constants_check(
    spec: EigenfunctionSpec,
    witness: TwoConstantsWitness,
    field: &HarmonicMeasureField,
    eval_points: &[Complex64],
) -> Result<TwoConstantsReport> {
    let budget = 5.0 * field.mesh();
    let mut points = Vec::with_capacity(eval_points.len());
    for &z in eval_points {
        let w = field.value_at(z.re, z.im)?;
        let abs_transform = eigenfunction_transform(spec, z).norm();
        let bound = witness.bound(w - budget);
        points.push(PointCheck {
            re: z.re,
            im: z.im,
            abs_transform,
            w,
            bound,
            holds: abs_transform <= bound * (1.0 + 1e-12),
        });
    }
    let all_hold = points.iter().all(|p| p.holds);
    Ok(TwoConstantsReport {
        witness,
        budget,
        points,
        all_hold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalStabilityReport {
    pub eta: f64,
    pub log_constant: f64,
    pub overflow: bool,
    /// `‖f_k‖` on the sample grid.
    pub lhs: f64,
    /// `k · ‖F_B f_k‖`; `+inf` when `k` overflows.
    pub rhs: f64,
    pub truncated_norm: f64,
    pub holds: bool,
}

/// Evaluates `‖f_k‖ ≤ k_{L,B₀,B} ‖F_B f_k‖` with `k` built from `η`, on
/// `n_space` spatial and `n_freq` spectral samples.
pub fn empirical_stability_check(
    spec: EigenfunctionSpec,
    params: &StabilityParams,
    n_space: usize,
    n_freq: usize,
) -> Result<EmpiricalStabilityReport> {
    let e = eta(params)?;
    if e <= 0.0 {
        // η underflowed: k is beyond any floating-point value.
        let signal = eval_eigenfunction(spec, n_space)?;
        return Ok(EmpiricalStabilityReport {
            eta: e,
            log_constant: f64::INFINITY,
            overflow: true,
            lhs: signal.l2_norm(),
            rhs: f64::INFINITY,
            truncated_norm: truncated_l2_norm(&signal, params.bandwidth(), n_freq)?,
            holds: true,
        });
    }
    let k = small_truncation_constant(params, e)?;
    let signal = eval_eigenfunction(spec, n_space)?;
    let lhs = signal.l2_norm();
    let truncated_norm = truncated_l2_norm(&signal, params.bandwidth(), n_freq)?;
    let rhs = if k.overflow {
        f64::INFINITY
    } else {
        k.value * truncated_norm
    };
    Ok(EmpiricalStabilityReport {
        eta: e,
        log_constant: k.log_value,
        overflow: k.overflow,
        lhs,
        rhs,
        truncated_norm,
        holds: lhs <= rhs,
    })
}
