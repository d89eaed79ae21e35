//! Matrix discretization of the truncated transform and its singular values.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::signals::GridSignal;
use crate::transform::INV_SQRT_2PI;

/// Which frequency band a bandwidth parameter `B` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// The band `[-B, B]` for the kernel `e^{-ixξ}`.
    #[default]
    Angular,
    /// The band `[-πB/2, πB/2]`, for which the time-bandwidth product of
    /// `[-1, 1]` is `B` and about `⌊B⌋` singular values sit near 1.
    Landau,
}

impl Normalization {
    pub fn half_band(self, bandwidth: f64) -> f64 {
        match self {
            Normalization::Angular => bandwidth,
            Normalization::Landau => PI * bandwidth / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// Uniform left-point nodes in both variables.
    #[default]
    LeftPoint,
    /// Gauss-Legendre nodes in both variables.
    GaussLegendre,
}

/// `A[m, n] = (1/√(2π)) e^{-i x_n ξ_m} √(w_n ω_m)`, so that the singular
/// values of `A` approximate those of the continuous operator.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    bandwidth: f64,
    normalization: Normalization,
    quadrature: Quadrature,
    space_nodes: Vec<f64>,
    space_weights: Vec<f64>,
    freq_nodes: Vec<f64>,
    entries: DMatrix<Complex64>,
}

fn nodes_and_weights(a: f64, b: f64, n: usize, q: Quadrature) -> (Vec<f64>, Vec<f64>) {
    match q {
        Quadrature::LeftPoint => {
            let h = (b - a) / n as f64;
            ((0..n).map(|i| a + i as f64 * h).collect(), vec![h; n])
        }
        Quadrature::GaussLegendre => {
            let rule = GaussLegendre::new(n);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let xs = rule.nodes().iter().map(|t| mid + half * t).collect();
            let ws = rule.weights().iter().map(|w| half * w).collect();
            (xs, ws)
        }
    }
}

pub fn build_operator(bandwidth: f64, n_space: usize, n_freq: usize) -> Result<OperatorMatrix> {
    build_operator_with(
        bandwidth,
        n_space,
        n_freq,
        Normalization::Angular,
        Quadrature::LeftPoint,
    )
}

pub fn build_operator_with(
    bandwidth: f64,
    n_space: usize,
    n_freq: usize,
    normalization: Normalization,
    quadrature: Quadrature,
) -> Result<OperatorMatrix> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return invalid(format!("bandwidth must be positive and finite, got {bandwidth}"));
    }
    if n_space < 4 || n_freq < 4 {
        return invalid(format!(
            "need at least 4 samples per axis, got n_space = {n_space}, n_freq = {n_freq}"
        ));
    }
    let omega = normalization.half_band(bandwidth);
    let (xs, wx) = nodes_and_weights(-1.0, 1.0, n_space, quadrature);
    let (xis, wxi) = nodes_and_weights(-omega, omega, n_freq, quadrature);
    let entries = DMatrix::from_fn(n_freq, n_space, |m, n| {
        let scale = INV_SQRT_2PI * (wx[n] * wxi[m]).sqrt();
        Complex64::from_polar(scale, -xs[n] * xis[m])
    });
    Ok(OperatorMatrix {
        bandwidth,
        normalization,
        quadrature,
        space_nodes: xs,
        space_weights: wx,
        freq_nodes: xis,
        entries,
    })
}

impl OperatorMatrix {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn space_nodes(&self) -> &[f64] {
        &self.space_nodes
    }

    pub fn freq_nodes(&self) -> &[f64] {
        &self.freq_nodes
    }

    /// Transform samples of `f` at the spatial nodes, returning `f̂` at the
    /// frequency nodes (the square-root weights are undone on output).
    pub fn apply(&self, signal: &GridSignal) -> Result<Vec<Complex64>> {
        if signal.len() != self.cols() || self.quadrature != Quadrature::LeftPoint {
            return Err(Error::GridMismatch(format!(
                "operator expects {} left-point samples, got {}",
                self.cols(),
                signal.len()
            )));
        }
        let wxi = self.freq_weight();
        let v = nalgebra::DVector::from_iterator(
            self.cols(),
            signal
                .values()
                .iter()
                .zip(&self.space_weights)
                .map(|(&f, w)| Complex64::new(f * w.sqrt(), 0.0)),
        );
        let out = &self.entries * v;
        Ok(out.iter().map(|z| z / wxi.sqrt()).collect())
    }

    fn freq_weight(&self) -> f64 {
        2.0 * self.normalization.half_band(self.bandwidth) / self.rows() as f64
    }
}

/// All singular values in descending order.
pub fn singular_values(op: &OperatorMatrix) -> Result<Vec<f64>> {
    matrix_singular_values(op.entries())
}

pub(crate) fn matrix_singular_values(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    const MAX_SWEEPS: usize = 10_000;
    let svd = a
        .clone()
        .try_svd(false, false, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::NoConvergence {
            method: "svd",
            iterations: MAX_SWEEPS,
            residual: f64::NAN,
        })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Values below this are treated as roundoff.
pub const NUMERICAL_FLOOR: f64 = 1e-10;
pub const PLATEAU_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayReport {
    pub plateau_count: usize,
    /// Least-squares slope of `ln σ_{⌊B⌋+k}` against `k` (1-indexed).
    pub decay_rate: f64,
    pub fitted_points: usize,
}

/// Plateau size and the post-plateau log-linear decay rate. The fit runs
/// over `σ_{⌊B⌋+k}`, `k ≥ 1`, until the first value at or below the floor;
/// at least `⌊B⌋ + 10` values must clear the floor.
pub fn decay_fit(sigmas: &[f64], bandwidth: f64) -> Result<DecayReport> {
    let base = bandwidth.floor() as usize;
    let plateau_count = sigmas.iter().filter(|&&s| s > PLATEAU_THRESHOLD).count();
    let pts: Vec<(f64, f64)> = (1..)
        .map(|k| (k, base + k))
        .take_while(|&(_, j)| j <= sigmas.len() && sigmas[j - 1] > NUMERICAL_FLOOR)
        .map(|(k, j)| (k as f64, sigmas[j - 1].ln()))
        .collect();
    let above = sigmas.iter().filter(|&&s| s > NUMERICAL_FLOOR).count();
    if above < base + 10 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs {} values above {NUMERICAL_FLOOR:e}, found {above}",
            base + 10
        )));
    }
    let (slope, _) = least_squares(&pts);
    Ok(DecayReport {
        plateau_count,
        decay_rate: slope,
        fitted_points: pts.len(),
    })
}

/// Ordinary least squares `y ≈ slope x + intercept`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn spectrum_csv(sigmas: &[f64]) -> String {
    let mut out = String::from("index,sigma\n");
    for (i, s) in sigmas.iter().enumerate() {
        out.push_str(&format!("{},{:.16e}\n", i + 1, s));
    }
    out
}
