use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::noise::{
    derive_seed, exact_measurement, generate_measurement_with_noise, reconstruct,
    reconstruction_error, NoiseModel,
};
use super::sweep::mean_and_stderr;
use crate::error::{invalid, Result};
use crate::quadrature::GaussLegendre;
use crate::signals::{ComplexGridSignal, EigenfunctionSpec};
use crate::transform::{
    eigenfunction_transform, inverse_at, FrequencyGrid, SpectralSamples, INV_SQRT_2PI,
};

/// Hard-bound and mean-error data at one bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBoundPoint {
    pub bandwidth: f64,
    pub noise_free_error: f64,
    pub mean_error: f64,
    pub std_error: f64,
    pub trials: usize,
    /// Trials satisfying `E ≤ E₀ + √8 B max_m |ε_m|`.
    pub hard_bound_holds: usize,
    /// Largest `E / (E₀ + √8 B max|ε|)` seen.
    pub worst_ratio: f64,
}

impl NoiseBoundPoint {
    pub fn all_hold(&self) -> bool {
        self.hard_bound_holds == self.trials
    }
}

/// Per-trial check of `E(g) ≤ E(f̂) + √8 B ‖ε‖_∞` at one bandwidth, with
/// `‖ε‖_∞` the largest sampled noise modulus.
pub fn noise_error_bound_check(
    spec: EigenfunctionSpec,
    bandwidth: f64,
    delta: f64,
    trials: usize,
    sampling_rate: f64,
    seed: u64,
) -> Result<NoiseBoundPoint> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let grid = FrequencyGrid::from_sampling_rate(bandwidth, sampling_rate)?;
    let clean = reconstruction_error(&reconstruct(&exact_measurement(spec, grid))?, spec)?;
    let noise = NoiseModel::new(delta, seed)?;
    let per_trial: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (meas, eps) = generate_measurement_with_noise(spec, grid, noise.with_stream(t as u64));
            let e = reconstruction_error(&reconstruct(&meas)?, spec)?;
            let sup = eps.iter().map(|z| z.norm()).fold(0.0, f64::max);
            Ok((e, clean + 8f64.sqrt() * bandwidth * sup))
        })
        .collect::<Result<_>>()?;
    let errs: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
    let (mean_error, std_error) = mean_and_stderr(&errs);
    let hard_bound_holds = per_trial
        .iter()
        .filter(|(e, bound)| *e <= bound * (1.0 + 1e-12))
        .count();
    let worst_ratio = per_trial
        .iter()
        .map(|(e, bound)| if *bound > 0.0 { e / bound } else if *e > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(NoiseBoundPoint {
        bandwidth,
        noise_free_error: clean,
        mean_error,
        std_error,
        trials,
        hard_bound_holds,
        worst_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseScalingReport {
    pub k: u32,
    pub delta: f64,
    pub sampling_rate: f64,
    pub points: Vec<NoiseBoundPoint>,
    /// Smallest `c` with `mean ≤ E₀ + c δ √B` at every point.
    pub c_envelope: f64,
    /// Least-squares `c` for `mean − E₀ ≈ c δ √B`.
    pub c_least_squares: f64,
}

impl NoiseScalingReport {
    pub fn all_hard_bounds_hold(&self) -> bool {
        self.points.iter().all(NoiseBoundPoint::all_hold)
    }

    /// Whether every mean lies below `E₀ + c δ √B`.
    pub fn below_overlay(&self, c: f64) -> bool {
        self.points.iter().all(|p| {
            p.mean_error <= p.noise_free_error + c * self.delta * p.bandwidth.sqrt() + 1e-15
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("B,noise_free,mean_err,stderr,overlay,hard_bound_holds,trials\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
                p.bandwidth,
                p.noise_free_error,
                p.mean_error,
                p.std_error,
                p.noise_free_error + self.c_envelope * self.delta * p.bandwidth.sqrt(),
                p.hard_bound_holds,
                p.trials
            ));
        }
        out
    }
}

/// [`noise_error_bound_check`] over several bandwidths, plus the `δ√B` fit.
pub fn noise_scaling_sweep(
    spec: EigenfunctionSpec,
    bandwidths: &[f64],
    delta: f64,
    trials: usize,
    sampling_rate: f64,
    seed: u64,
) -> Result<NoiseScalingReport> {
    if bandwidths.is_empty() {
        return invalid("need at least one bandwidth");
    }
    let points = bandwidths
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let s = derive_seed(seed, &[spec.k() as u64, i as u64]);
            noise_error_bound_check(spec, b, delta, trials, sampling_rate, s)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut c_envelope, mut num, mut den) = (0.0f64, 0.0, 0.0);
    if delta > 0.0 {
        for p in &points {
            let scale = delta * p.bandwidth.sqrt();
            let excess = p.mean_error - p.noise_free_error;
            c_envelope = c_envelope.max(excess / scale);
            num += excess * scale;
            den += scale * scale;
        }
    }
    Ok(NoiseScalingReport {
        k: spec.k(),
        delta,
        sampling_rate,
        points,
        c_envelope,
        c_least_squares: if den > 0.0 { num / den } else { 0.0 },
    })
}

/// Error budget of one reconstruction setting, measured in the continuous
/// `L²(-1, 1)` norm with a fine Gauss-Legendre rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorDecomposition {
    pub bandwidth: f64,
    pub spacing: f64,
    /// `‖f − F⁻¹ F_B f‖`.
    pub truncation: f64,
    /// `‖F⁻¹ F_B f − F_h⁻¹ F_B f‖`, the left-point sampling error.
    pub sampling: f64,
    /// Mean of `‖F_h⁻¹ ε‖` over trials.
    pub noise: f64,
    /// Mean discrete error `E^rec` over trials.
    pub discrete_error: f64,
    /// Mean of `|E^rec − ‖f − I_h f^rec‖|`, `I_h` the piecewise-linear interpolant.
    pub interpolation: f64,
    pub trials: usize,
}

/// Fine rule on `[-1, 1]`.
fn space_rule() -> Vec<(f64, f64)> {
    GaussLegendre::new(16).composite(-1.0, 1.0, 64)
}

/// Rule on `[-B, B]` resolving `e^{ixξ}` and the oscillation of `f̂_k`.
fn freq_rule(bandwidth: f64) -> Vec<(f64, f64)> {
    let panels = (2.0 * bandwidth).ceil().max(4.0) as usize;
    GaussLegendre::new(20).composite(-bandwidth, bandwidth, panels)
}

fn weighted_norm(rule: &[(f64, f64)], f: impl Fn(f64) -> Complex64) -> f64 {
    rule.iter().map(|&(x, w)| w * f(x).norm_sqr()).sum::<f64>().sqrt()
}

/// Piecewise-linear interpolant of `recon` on its nodes and `x = 1`, the
/// latter taken from the same quadrature sum.
fn linear_interpolant(recon: &ComplexGridSignal, right: Complex64) -> impl Fn(f64) -> Complex64 + '_ {
    let n = recon.len();
    let h = recon.spacing();
    move |x: f64| {
        let t = (x + 1.0) / h;
        let i = (t.floor() as usize).min(n - 1);
        let s = t - i as f64;
        let a = recon.values()[i];
        let b = if i + 1 < n { recon.values()[i + 1] } else { right };
        a * (1.0 - s) + b * s
    }
}

pub fn error_decomposition(
    spec: EigenfunctionSpec,
    bandwidth: f64,
    spacing: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<ErrorDecomposition> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let grid = FrequencyGrid::new(bandwidth, spacing)?;
    let xs = space_rule();
    let fr = freq_rule(bandwidth);
    let fhat: Vec<(f64, f64, Complex64)> = fr
        .iter()
        .map(|&(xi, w)| (xi, w, eigenfunction_transform(spec, Complex64::new(xi, 0.0))))
        .collect();
    let fine_inverse = |x: f64| -> Complex64 {
        fhat.iter()
            .map(|&(xi, w, g)| g * Complex64::from_polar(w, x * xi))
            .sum::<Complex64>()
            * INV_SQRT_2PI
    };
    let projected: Vec<Complex64> = xs.par_iter().map(|&(x, _)| fine_inverse(x)).collect();

    let truncation = xs
        .iter()
        .zip(&projected)
        .map(|(&(x, w), p)| w * (Complex64::new(spec.eval(x), 0.0) - p).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let clean = exact_measurement(spec, grid);
    let sampling = xs
        .iter()
        .zip(&projected)
        .map(|(&(x, w), p)| w * (p - inverse_at(&clean, x)).norm_sqr())
        .sum::<f64>()
        .sqrt();

    let noise = NoiseModel::new(delta, seed)?;
    let n_trials = if delta == 0.0 { 1 } else { trials };
    let per_trial: Vec<(f64, f64, f64)> = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let (meas, eps) = generate_measurement_with_noise(spec, grid, noise.with_stream(t as u64));
            let noise_only = SpectralSamples::new(grid, eps)?;
            let e_eps = weighted_norm(&xs, |x| inverse_at(&noise_only, x));
            let recon = reconstruct(&meas)?;
            let e_rec = reconstruction_error(&recon, spec)?;
            let interp = linear_interpolant(&recon, inverse_at(&meas, 1.0));
            let e_cont = weighted_norm(&xs, |x| interp(x) - spec.eval(x));
            Ok((e_eps, e_rec, (e_rec - e_cont).abs()))
        })
        .collect::<Result<_>>()?;
    let mean = |f: fn(&(f64, f64, f64)) -> f64| per_trial.iter().map(f).sum::<f64>() / n_trials as f64;
    Ok(ErrorDecomposition {
        bandwidth,
        spacing,
        truncation,
        sampling,
        noise: mean(|p| p.0),
        discrete_error: mean(|p| p.1),
        interpolation: mean(|p| p.2),
        trials,
    })
}
