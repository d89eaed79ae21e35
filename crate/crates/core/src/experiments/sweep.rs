use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{derive_seed, trial_error, NoiseModel};
use crate::error::{invalid, Error, Result};
use crate::signals::EigenfunctionSpec;
use crate::spectrum::least_squares;
use crate::transform::FrequencyGrid;

pub const DEFAULT_SAMPLING_RATE: f64 = 16.0;
pub const DEFAULT_TRIALS: usize = 1000;

/// `0.5, 1.0, ..., 40.0`.
pub fn default_bandwidth_grid() -> Vec<f64> {
    (1..=80).map(|i| 0.5 * i as f64).collect()
}

/// How a critical bandwidth must hold once the error falls below the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Persistence {
    /// Below the cutoff at every larger sampled bandwidth.
    #[default]
    ToEnd,
    /// Below the cutoff up to the bandwidth of the minimal mean error.
    UntilTurnUp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub k_list: Vec<u32>,
    pub bandwidths: Vec<f64>,
    pub deltas: Vec<f64>,
    pub sampling_rate: f64,
    pub trials: usize,
    pub seed: u64,
    pub e_cut: f64,
    pub persistence: Persistence,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k_list: vec![4],
            bandwidths: default_bandwidth_grid(),
            deltas: vec![0.0],
            sampling_rate: DEFAULT_SAMPLING_RATE,
            trials: DEFAULT_TRIALS,
            seed: 0,
            e_cut: 0.5,
            persistence: Persistence::ToEnd,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return invalid("k_list must be nonempty with entries ≥ 1");
        }
        if self.bandwidths.is_empty() {
            return invalid("bandwidths must be nonempty");
        }
        if self.bandwidths.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return invalid("bandwidths must be positive and finite");
        }
        if self.bandwidths.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("bandwidths must be strictly increasing");
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return invalid("deltas must be nonempty, finite and nonnegative");
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate.is_finite()) {
            return invalid(format!("sampling_rate must be positive, got {}", self.sampling_rate));
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if !(self.e_cut > 0.0) {
            return invalid(format!("e_cut must be positive, got {}", self.e_cut));
        }
        Ok(())
    }
}

/// Mean error of one `(k, B, δ)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub k: u32,
    pub bandwidth: f64,
    pub delta: f64,
    pub mean_error: f64,
    pub std_error: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub cells: Vec<SweepCell>,
}

impl ExperimentReport {
    /// `(B, mean error)` for one `(k, δ)`, in bandwidth order.
    pub fn curve(&self, k: u32, delta: f64) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.k == k && c.delta == delta)
            .map(|c| (c.bandwidth, c.mean_error))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,B,delta,mean_err,stderr,trials\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                c.k, c.bandwidth, c.delta, c.mean_error, c.std_error, c.trials
            ));
        }
        out
    }
}

/// Mean and standard error of the mean, summed in index order.
pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-trial errors for one cell. Trial `t` uses stream `t` of the cell's key.
pub fn cell_trial_errors(
    spec: EigenfunctionSpec,
    bandwidth: f64,
    delta: f64,
    sampling_rate: f64,
    trials: usize,
    cell_seed: u64,
) -> Result<Vec<f64>> {
    let grid = FrequencyGrid::from_sampling_rate(bandwidth, sampling_rate)?;
    let noise = NoiseModel::new(delta, cell_seed)?;
    if delta == 0.0 {
        // Every trial is the same computation.
        let e = trial_error(spec, grid, noise)?;
        return Ok(vec![e; trials]);
    }
    (0..trials)
        .into_par_iter()
        .map(|t| trial_error(spec, grid, noise.with_stream(t as u64)))
        .collect()
}

fn cell_seed(seed: u64, k: u32, b_index: usize, d_index: usize) -> u64 {
    derive_seed(seed, &[k as u64, b_index as u64, d_index as u64])
}

/// Mean reconstruction error on every `(k, B, δ)` of the config.
pub fn sweep_error_vs_bandwidth(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut jobs = Vec::new();
    for &k in &config.k_list {
        for (di, &delta) in config.deltas.iter().enumerate() {
            for (bi, &b) in config.bandwidths.iter().enumerate() {
                jobs.push((k, di, delta, bi, b));
            }
        }
    }
    let cells = jobs
        .into_par_iter()
        .map(|(k, di, delta, bi, b)| {
            let spec = EigenfunctionSpec::new(k)?;
            let errs = cell_trial_errors(
                spec,
                b,
                delta,
                config.sampling_rate,
                config.trials,
                cell_seed(config.seed, k, bi, di),
            )?;
            let (mean_error, std_error) = mean_and_stderr(&errs);
            Ok(SweepCell {
                k,
                bandwidth: b,
                delta,
                mean_error,
                std_error,
                trials: config.trials,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        cells,
    })
}

/// Smallest sampled bandwidth from which the mean error stays at or below
/// `e_cut`, or `+inf` when there is none.
pub fn critical_bandwidth_from_curve(curve: &[(f64, f64)], e_cut: f64, rule: Persistence) -> f64 {
    if curve.is_empty() {
        return f64::INFINITY;
    }
    let end = match rule {
        Persistence::ToEnd => curve.len() - 1,
        Persistence::UntilTurnUp => curve
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .unwrap_or(0),
    };
    if curve[end].1 > e_cut {
        return f64::INFINITY;
    }
    let mut start = end;
    while start > 0 && curve[start - 1].1 <= e_cut {
        start -= 1;
    }
    curve[start].0
}

/// Runs the sweep for a single `k` and `δ` and extracts the critical bandwidth.
pub fn critical_bandwidth(
    spec: EigenfunctionSpec,
    e_cut: f64,
    delta: f64,
    config: &ExperimentConfig,
) -> Result<f64> {
    let cfg = ExperimentConfig {
        k_list: vec![spec.k()],
        deltas: vec![delta],
        e_cut,
        ..config.clone()
    };
    let report = sweep_error_vs_bandwidth(&cfg)?;
    Ok(critical_bandwidth_from_curve(
        &report.curve(spec.k(), delta),
        e_cut,
        cfg.persistence,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    /// Slope `C`.
    pub slope: f64,
    /// Offset `C_{e_cut}`.
    pub offset: f64,
    pub points_used: usize,
}

/// Least-squares line `B₀ = C k + offset` through the finite points.
pub fn fit_critical_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let finite: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    if finite.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "line fit needs at least 3 finite points, got {}",
            finite.len()
        )));
    }
    if finite.iter().all(|p| p.0 == finite[0].0) {
        return Err(Error::InsufficientData("all points share one abscissa".into()));
    }
    let (slope, offset) = least_squares(&finite);
    Ok(LineFit {
        slope,
        offset,
        points_used: finite.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub k: u32,
    pub delta: f64,
    pub e_cut: f64,
    pub critical_bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalReport {
    pub points: Vec<CriticalPoint>,
    /// Per `(δ, e_cut)` fit, absent when fewer than 3 points are finite.
    pub fits: Vec<(f64, f64, Option<LineFit>)>,
}

impl CriticalReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,delta,e_cut,B0\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                p.k,
                p.delta,
                p.e_cut,
                format_bandwidth(p.critical_bandwidth)
            ));
        }
        out
    }

    pub fn fit(&self, delta: f64, e_cut: f64) -> Option<LineFit> {
        self.fits
            .iter()
            .find(|f| f.0 == delta && f.1 == e_cut)
            .and_then(|f| f.2)
    }
}

/// `inf` for an unreached cutoff, 17 significant digits otherwise.
pub fn format_bandwidth(b: f64) -> String {
    if b.is_infinite() {
        "inf".into()
    } else {
        format!("{b:.16e}")
    }
}

/// Critical bandwidths of every `(k, δ)` in a finished sweep for each cutoff.
pub fn critical_report(report: &ExperimentReport, e_cuts: &[f64]) -> CriticalReport {
    let cfg = &report.config;
    let mut points = Vec::new();
    let mut fits = Vec::new();
    for &delta in &cfg.deltas {
        for &e_cut in e_cuts {
            let pts: Vec<CriticalPoint> = cfg
                .k_list
                .iter()
                .map(|&k| CriticalPoint {
                    k,
                    delta,
                    e_cut,
                    critical_bandwidth: critical_bandwidth_from_curve(
                        &report.curve(k, delta),
                        e_cut,
                        cfg.persistence,
                    ),
                })
                .collect();
            let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.k as f64, p.critical_bandwidth)).collect();
            fits.push((delta, e_cut, fit_critical_line(&xy).ok()));
            points.extend(pts);
        }
    }
    CriticalReport { points, fits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            k_list: vec![4],
            bandwidths: vec![PI, 3.0 * PI],
            deltas: vec![0.0, 0.05],
            trials: 8,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn validation() {
        assert!(small_config().validate().is_ok());
        let bad = ExperimentConfig { bandwidths: vec![2.0, 1.0], ..small_config() };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig { trials: 0, ..small_config() };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig { deltas: vec![-1.0], ..small_config() };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig { k_list: vec![0], ..small_config() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_drops() {
        let a = sweep_error_vs_bandwidth(&small_config()).unwrap();
        let b = sweep_error_vs_bandwidth(&small_config()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 4);
        let c = a.curve(4, 0.0);
        assert!(c[0].1 >= 5.0 * c[1].1, "{c:?}");
        assert!(a.cells.iter().all(|c| c.mean_error.is_finite() && c.mean_error >= 0.0));
        assert_eq!(a.to_csv().lines().count(), 5);
        assert!(a.to_csv().starts_with("k,B,delta,mean_err,stderr,trials\n"));
    }

    #[test]
    fn critical_rules() {
        let curve = [(1.0, 0.9), (2.0, 0.4), (3.0, 0.6), (4.0, 0.3), (5.0, 0.35)];
        assert_eq!(critical_bandwidth_from_curve(&curve, 0.5, Persistence::ToEnd), 4.0);
        assert_eq!(critical_bandwidth_from_curve(&curve, 0.7, Persistence::ToEnd), 2.0);
        assert_eq!(critical_bandwidth_from_curve(&curve, 0.2, Persistence::ToEnd), f64::INFINITY);
        let up = [(1.0, 0.9), (2.0, 0.4), (3.0, 0.1), (4.0, 0.3), (5.0, 0.6)];
        assert_eq!(critical_bandwidth_from_curve(&up, 0.5, Persistence::UntilTurnUp), 2.0);
        assert_eq!(critical_bandwidth_from_curve(&up, 0.5, Persistence::ToEnd), f64::INFINITY);
    }

    #[test]
    fn exact_line_recovery() {
        let pts: Vec<(f64, f64)> = (2..8).map(|k| (k as f64, PI / 2.0 * k as f64 + 0.3)).collect();
        let fit = fit_critical_line(&pts).unwrap();
        assert!((fit.slope - PI / 2.0).abs() < 1e-12);
        assert!((fit.offset - 0.3).abs() < 1e-12);
        let few = [(1.0, 2.0), (2.0, f64::INFINITY), (3.0, 4.0)];
        assert!(fit_critical_line(&few).is_err());
    }

    #[test]
    fn critical_near_omega_for_k4() {
        let cfg = ExperimentConfig { trials: 1, ..Default::default() };
        let spec = EigenfunctionSpec::new(4).unwrap();
        let b0 = critical_bandwidth(spec, 0.5, 0.0, &cfg).unwrap();
        assert!((b0 - 2.0 * PI).abs() <= 0.5 + 1e-12, "{b0}");
        let looser = critical_bandwidth(spec, 0.7, 0.0, &cfg).unwrap();
        assert!(looser <= b0);
    }

    #[test]
    fn stderr_shrinks_with_trials() {
        let spec = EigenfunctionSpec::new(2).unwrap();
        let few = cell_trial_errors(spec, 8.0, 0.1, 16.0, 10, 11).unwrap();
        let many = cell_trial_errors(spec, 8.0, 0.1, 16.0, 400, 11).unwrap();
        let (m1, s1) = mean_and_stderr(&few);
        let (m2, s2) = mean_and_stderr(&many);
        assert!(s2 < s1);
        assert!((m1 - m2).abs() < 4.0 * s1);
        assert_eq!(few[..], many[..10]);
    }
}
