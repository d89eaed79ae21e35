//! Truncated Fourier transform on `[-1, 1]`.
//!
//! Conventions used throughout the crate:
//!
//! * forward: `f̂(ξ) = (2π)^{-1/2} ∫ f(x) e^{-ixξ} dx`
//! * inverse: `f(x) = (2π)^{-1/2} ∫ f̂(ξ) e^{+ixξ} dξ`
//!
//! Measurements live on the grid `Ξ_{B,h} = (-B, -B+h, ..., B-h)` with
//! `M = 2B/h` samples.

mod frft;

pub use frft::{direct_inverse_oracle, fractional_dft, frft_inverse, inverse_at};

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::signals::{EigenfunctionSpec, GridSignal};

pub(crate) const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Relative tolerance when checking that `2B/h` is an integer.
const COUNT_TOLERANCE: f64 = 1e-9;

/// Uniform frequency grid `-B, -B+h, ..., B-h`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrequencyGrid {
    bandwidth: f64,
    spacing: f64,
    sample_count: usize,
}

impl FrequencyGrid {
    /// Builds `Ξ_{B,h}`; fails unless `2B/h` is a positive integer.
    pub fn new(bandwidth: f64, spacing: f64) -> Result<Self> {
        check_positive("bandwidth", bandwidth)?;
        check_positive("spacing", spacing)?;
        let ratio = 2.0 * bandwidth / spacing;
        let count = ratio.round();
        if count < 1.0 || (ratio - count).abs() > COUNT_TOLERANCE * ratio.max(1.0) {
            return Err(Error::NonIntegralSampleCount {
                bandwidth,
                spacing,
                ratio,
                nearest: nearest_valid_spacing(bandwidth, spacing),
            });
        }
        Self::with_count(bandwidth, count as usize)
    }

    /// `count` samples over `[-B, B)`, spacing `2B/count`.
    pub fn with_count(bandwidth: f64, count: usize) -> Result<Self> {
        check_positive("bandwidth", bandwidth)?;
        if count == 0 {
            return invalid("sample count must be positive");
        }
        Ok(Self {
            bandwidth,
            spacing: 2.0 * bandwidth / count as f64,
            sample_count: count,
        })
    }

    /// Constant sampling rate: `M = ceil(r B)`.
    pub fn from_sampling_rate(bandwidth: f64, rate: f64) -> Result<Self> {
        check_positive("bandwidth", bandwidth)?;
        check_positive("sampling rate", rate)?;
        let count = (rate * bandwidth).ceil().max(1.0) as usize;
        Self::with_count(bandwidth, count)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn node(&self, m: usize) -> f64 {
        -self.bandwidth + m as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.sample_count).map(move |m| self.node(m))
    }
}

/// Spacing closest to `spacing` for which `2B/h` is a positive integer.
pub fn nearest_valid_spacing(bandwidth: f64, spacing: f64) -> f64 {
    let count = (2.0 * bandwidth / spacing).round().max(1.0);
    2.0 * bandwidth / count
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return invalid(format!("{name} must be a positive finite number, got {v}"));
    }
    Ok(())
}

/// Complex samples of a spectrum on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSamples {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl SpectralSamples {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.sample_count() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.sample_count()
            )));
        }
        if let Some(m) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return invalid(format!("spectral sample {m} is not finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.sample_count()],
        }
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Left-point `∫_{-B}^{B} |g|^2 dξ`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV with header `xi,re,im`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(72 * self.len() + 10);
        out.push_str("xi,re,im\n");
        for (xi, v) in self.grid.nodes().zip(&self.values) {
            let _ = writeln!(out, "{xi:.16e},{:.16e},{:.16e}", v.re, v.im);
        }
        out
    }
}

/// The closed-form transform of `f_k` exactly as tabulated for the
/// eigenfunction family:
///
/// `(-e^{iξ}(-1)^k πk + πk e^{-iξ}) / (π(k²π² - 4ξ²))`
///
/// This expression equals `(1/2π) ∫ f_k(x) e^{+ixξ} dx`, i.e. it carries the
/// `+i` kernel and a full `1/2π` prefactor. Use [`eigenfunction_transform`]
/// for the crate's `(2π)^{-1/2}`, `e^{-ixξ}` convention.
pub fn closed_form_transform(spec: EigenfunctionSpec, xi: f64) -> Complex64 {
    closed_form_transform_complex(spec, Complex64::new(xi, 0.0))
}

/// [`closed_form_transform`] continued to complex arguments (it is entire).
pub fn closed_form_transform_complex(spec: EigenfunctionSpec, z: Complex64) -> Complex64 {
    let k = spec.k() as f64;
    let kpi = k * PI;
    let sign = if spec.k().is_multiple_of(2) { 1.0 } else { -1.0 };
    let iz = Complex64::i() * z;
    let (ep, em) = (iz.exp(), (-iz).exp());
    // Factored so the zero at ξ = ±kπ/2 is exact.
    let denom = PI * (kpi - 2.0 * z) * (kpi + 2.0 * z);
    let numer = kpi * (em - sign * ep);
    if denom == Complex64::new(0.0, 0.0) {
        // L'Hôpital: N'(z) / D'(z), D'(z) = -8πz.
        let dn = -Complex64::i() * kpi * (em + sign * ep);
        return dn / (-8.0 * PI * z);
    }
    if denom.norm() < 1e-3 * PI * kpi * kpi {
        return eigenfunction_integral(spec, z, 1.0) / (2.0 * PI);
    }
    numer / denom
}

/// `f̂_k(z) = (2π)^{-1/2} ∫ f_k(x) e^{-ixz} dx`, valid for complex `z`.
pub fn eigenfunction_transform(spec: EigenfunctionSpec, z: Complex64) -> Complex64 {
    // The tabulated form is (1/2π)∫ f e^{+ixz}; flip z and rescale by √(2π).
    closed_form_transform_complex(spec, -z) * (2.0 * PI).sqrt()
}

/// `∫_{-1}^{1} f_k(x) e^{i s x z} dx` by composite Gauss–Legendre.
fn eigenfunction_integral(spec: EigenfunctionSpec, z: Complex64, s: f64) -> Complex64 {
    let gl = GaussLegendre::new(24);
    let panels = 4 + (spec.k() as usize + z.norm() as usize) / 4;
    gl.composite(-1.0, 1.0, panels)
        .into_iter()
        .map(|(x, w)| (Complex64::i() * s * x * z).exp() * (w * spec.eval(x)))
        .sum()
}

/// Left-point forward transform of a grid signal sampled on `grid`:
/// `(2π)^{-1/2} (2/N) Σ_n f(x_n) e^{-i x_n ξ_m}`.
pub fn forward_truncated(signal: &GridSignal, grid: FrequencyGrid) -> SpectralSamples {
    let dx = signal.spacing();
    let values = grid
        .nodes()
        .map(|xi| {
            let acc: Complex64 = signal
                .nodes()
                .zip(signal.values())
                .filter(|(_, &f)| f != 0.0)
                .map(|(x, &f)| {
                    let (s, c) = (x * xi).sin_cos();
                    Complex64::new(f * c, -f * s)
                })
                .sum();
            acc * (INV_SQRT_2PI * dx)
        })
        .collect();
    SpectralSamples { grid, values }
}

/// `‖F_B f‖_{L²(-B,B)}` from the left-point forward transform of `signal`
/// on `n_freq` frequency samples.
pub fn truncated_l2_norm(signal: &GridSignal, bandwidth: f64, n_freq: usize) -> Result<f64> {
    let grid = FrequencyGrid::with_count(bandwidth, n_freq)?;
    Ok(forward_truncated(signal, grid).l2_norm_sq().sqrt())
}

/// `‖F_B f_k‖_{L²(-B,B)}` by Gauss–Legendre on the exact transform.
pub fn eigenfunction_truncated_l2_norm(spec: EigenfunctionSpec, bandwidth: f64) -> f64 {
    let gl = GaussLegendre::new(20);
    let panels = 8 + (4.0 * bandwidth).ceil() as usize;
    gl.composite(-bandwidth, bandwidth, panels)
        .into_iter()
        .map(|(xi, w)| w * eigenfunction_transform(spec, Complex64::new(xi, 0.0)).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::eval_eigenfunction;

    fn spec(k: u32) -> EigenfunctionSpec {
        EigenfunctionSpec::new(k).unwrap()
    }

    /// Composite Simpson of (1/2π)∫ f_k(x) e^{ixξ} dx; independent of the
    /// Gauss–Legendre path.
    fn simpson_oracle(k: u32, xi: f64) -> Complex64 {
        let n = 20_000;
        let h = 2.0 / n as f64;
        let f = |x: f64| (Complex64::i() * x * xi).exp() * spec(k).eval(x);
        let mut s = f(-1.0) + f(1.0);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            s += f(-1.0 + j as f64 * h) * w;
        }
        s * (h / 3.0) / (2.0 * PI)
    }

    #[test]
    fn grid_divisibility() {
        let g = FrequencyGrid::new(10.0, 0.1).unwrap();
        assert_eq!(g.sample_count(), 200);
        assert_eq!(g.node(0), -10.0);
        assert!((g.node(199) - 9.9).abs() < 1e-12);
        match FrequencyGrid::new(10.0, 0.3) {
            Err(Error::NonIntegralSampleCount { nearest, .. }) => {
                assert!((nearest - 20.0 / 67.0).abs() < 1e-15)
            }
            other => panic!("expected divisibility error, got {other:?}"),
        }
        assert!(FrequencyGrid::new(-1.0, 0.1).is_err());
        assert_eq!(
            FrequencyGrid::from_sampling_rate(4.2, 16.0)
                .unwrap()
                .sample_count(),
            68
        );
    }

    #[test]
    fn closed_form_values() {
        let v = closed_form_transform(spec(1), 0.0);
        assert!((v.re - 2.0 / (PI * PI)).abs() < 1e-15 && v.im.abs() < 1e-15);
        assert!(closed_form_transform(spec(2), 0.0).norm() < 1e-15);
        for (k, xi) in [(1, 0.3), (3, -2.0), (4, 7.5), (7, 0.0)] {
            let d = closed_form_transform(spec(k), xi) - simpson_oracle(k, xi);
            assert!(d.norm() < 1e-12, "k={k} xi={xi}: {d}");
        }
    }

    #[test]
    fn closed_form_removable_singularity() {
        for (k, xi) in [(1, PI / 2.0), (1, -PI / 2.0), (4, 2.0 * PI), (3, 1.5 * PI)] {
            let d = closed_form_transform(spec(k), xi) - simpson_oracle(k, xi);
            assert!(d.norm() < 1e-10, "k={k}: {d}");
            // Just off the singular point the quadrature fallback takes over.
            let d = closed_form_transform(spec(k), xi + 1e-7) - simpson_oracle(k, xi + 1e-7);
            assert!(d.norm() < 1e-10, "k={k} near: {d}");
        }
    }

    #[test]
    fn forward_matches_exact_transform() {
        let f = eval_eigenfunction(spec(3), 8192).unwrap();
        let grid = FrequencyGrid::new(8.0, 0.25).unwrap();
        let g = forward_truncated(&f, grid);
        for (xi, v) in grid.nodes().zip(g.values()) {
            let exact = eigenfunction_transform(spec(3), Complex64::new(xi, 0.0));
            assert!((v - exact).norm() < 1e-6, "xi={xi}");
        }
    }

    #[test]
    fn forward_hermitian_and_zero() {
        let f = GridSignal::from_fn(300, |x| (1.0 - x * x) * (3.0 * x).exp()).unwrap();
        let grid = FrequencyGrid::new(5.0, 0.5).unwrap();
        let g = forward_truncated(&f, grid);
        // ξ_m and ξ_{M-m} = -ξ_m for m = 1..M-1.
        let m = grid.sample_count();
        for j in 1..m {
            let d = g.values()[j] - g.values()[m - j].conj();
            assert!(d.norm() < 1e-12);
        }
        let zero = forward_truncated(&GridSignal::zeros(64).unwrap(), grid);
        assert!(zero.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn parseval_band_captures_almost_all_mass() {
        for k in 1..=4u32 {
            let f = eval_eigenfunction(spec(k), 2048).unwrap();
            let b = 4.0 * k as f64 * PI;
            let energy = truncated_l2_norm(&f, b, 4096).unwrap().powi(2);
            let ratio = energy / f.l2_norm().powi(2);
            assert!((0.98..=1.0).contains(&ratio), "k={k}: {ratio}");
        }
    }

    #[test]
    fn exact_truncated_norm_agrees_with_discrete() {
        let s = spec(5);
        let f = eval_eigenfunction(s, 4096).unwrap();
        let b = 9.0;
        let discrete = truncated_l2_norm(&f, b, 3000).unwrap();
        let exact = eigenfunction_truncated_l2_norm(s, b);
        assert!((discrete - exact).abs() < 1e-3, "{discrete} vs {exact}");
    }

    #[test]
    fn spectral_csv_layout() {
        let grid = FrequencyGrid::new(1.0, 0.5).unwrap();
        let g = SpectralSamples::zeros(grid);
        let csv = g.to_csv();
        assert!(csv.starts_with("xi,re,im\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
