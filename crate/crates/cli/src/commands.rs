use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use truncft::experiments::{
    critical_report, exact_measurement, format_bandwidth, generate_measurement,
    noise_scaling_sweep, reconstruct as invert, reconstruction_error, sweep_error_vs_bandwidth, NoiseModel,
    DEFAULT_SAMPLING_RATE,
};
use truncft::plot::{LinePlot, Series};
use truncft::signals::EigenfunctionSpec;
use truncft::spectrum::{build_operator_with, Normalization, Quadrature, decay_fit, singular_values, spectrum_csv};
use truncft::stability::{
    default_truncation_length, eta, interpolation_factor, small_truncation_constant,
    solve_harmonic_measure, StabilityConstant, StabilityParams,
};
use truncft::transform::{forward_truncated, FrequencyGrid};

use crate::config::load_config;
use crate::output::{num, Output};
use crate::{
    CliError, ConfigArgs, HarmonicArgs, NoiseBoundArgs, ReconstructArgs, SpectrumArgs,
    StabilityArgs, TransformArgs,
};

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn spec(k: u32) -> Result<EigenfunctionSpec, CliError> {
    EigenfunctionSpec::new(k).map_err(CliError::from)
}

pub fn transform(a: TransformArgs, dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let started = Instant::now();
    let s = spec(a.k)?;
    let grid = FrequencyGrid::new(a.bandwidth, a.spacing)?;
    let samples = if a.closed_form {
        exact_measurement(s, grid)
    } else {
        let f = truncft::signals::eval_eigenfunction(s, a.n_space)?;
        forward_truncated(&f, grid)
    };
    let mut out = Output::new(dir)?;
    out.write("transform.csv", &samples.to_csv())?;
    let config = json!({
        "k": a.k,
        "bandwidth": a.bandwidth,
        "spacing": a.spacing,
        "closed_form": a.closed_form,
        "n_space": a.n_space,
        "sample_count": grid.sample_count(),
    });
    out.finish("transform", seed.unwrap_or(0), config, started)
}

fn reconstruction_grid(a: &ReconstructArgs) -> Result<FrequencyGrid, CliError> {
    Ok(match a.spacing {
        Some(h) => FrequencyGrid::new(a.bandwidth, h)?,
        None => FrequencyGrid::from_sampling_rate(a.bandwidth, a.rate.unwrap_or(DEFAULT_SAMPLING_RATE))?,
    })
}

pub fn reconstruct(a: ReconstructArgs, dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let started = Instant::now();
    let s = spec(a.k)?;
    let grid = reconstruction_grid(&a)?;
    let seed = seed.unwrap_or(0);
    let noise = NoiseModel::new(a.delta, seed)?;
    let meas = generate_measurement(s, grid, noise);
    let recon = invert(&meas)?;
    let err = reconstruction_error(&recon, s)?;

    let mut csv = String::from("x,re,im,exact\n");
    for (x, v) in recon.nodes().zip(recon.values()) {
        csv.push_str(&format!("{x:.16e},{:.16e},{:.16e},{:.16e}\n", v.re, v.im, s.eval(x)));
    }
    let mut out = Output::new(dir)?;
    out.write("reconstruction.csv", &csv)?;
    let plot = LinePlot::new(format!("Reconstruction of f_{}", a.k), "x", "value")
        .with_series(Series::new("Re reconstruction", recon.nodes().zip(recon.values()).map(|(x, v)| (x, v.re)).collect()))
        .with_series(Series::new("f_k", recon.nodes().map(|x| (x, s.eval(x))).collect()).dashed());
    out.write("reconstruction.svg", &plot.to_svg())?;
    let summary = json!({
        "k": a.k,
        "bandwidth": a.bandwidth,
        "spacing": grid.spacing(),
        "sample_count": grid.sample_count(),
        "delta": a.delta,
        "error": num(err),
    });
    print_json(&summary);
    out.finish("reconstruct", seed, summary, started)
}

fn constant_json(k: &StabilityConstant) -> Value {
    json!({ "value": num(k.value), "log_value": num(k.log_value), "overflow": k.overflow })
}

pub fn stability(a: StabilityArgs, dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let started = Instant::now();
    if a.b >= a.b0 {
        return Err(CliError::Validation(format!(
            "B must be strictly below B0 (B = {}, B0 = {})",
            a.b, a.b0
        )));
    }
    let params = StabilityParams::new(a.l, a.b0, a.b, a.gamma)?;
    let e = eta(&params)?;
    let x = default_truncation_length(a.l, a.b, a.b0, a.mesh);
    let field = solve_harmonic_measure(a.l, a.b, x, a.mesh)?;
    let w = field.value_at(a.b0, 0.0)?;

    let k_of = |exponent: f64| -> Result<StabilityConstant, CliError> {
        if exponent > 0.0 {
            Ok(small_truncation_constant(&params, exponent.min(1.0))?)
        } else {
            Ok(StabilityConstant {
                log_value: f64::INFINITY,
                value: f64::INFINITY,
                overflow: true,
            })
        }
    };
    let k_eta = k_of(e)?;
    let k_w = k_of(w)?;
    let report = json!({
        "L": a.l,
        "B0": a.b0,
        "B": a.b,
        "gamma": a.gamma,
        "mesh": a.mesh,
        "c": num(interpolation_factor(a.b)),
        "eta": num(e),
        "w_fd": num(w),
        "eta_le_w": e <= w + 5.0 * a.mesh,
        "k_eta": constant_json(&k_eta),
        "k_w": constant_json(&k_w),
        "overflow_eta": k_eta.overflow,
        "overflow_w": k_w.overflow,
        "solver": { "iterations": field.iterations(), "residual": field.residual(), "truncation_length": x },
    });
    print_json(&report);
    let mut out = Output::new(dir)?;
    out.write_json("stability.json", &report)?;
    out.finish("stability", seed.unwrap_or(0), report, started)
}

pub fn harmonic(a: HarmonicArgs, dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let started = Instant::now();
    let x = match a.x_max {
        Some(x) => x,
        None => default_truncation_length(a.l, a.b, a.at_x, a.mesh),
    };
    let field = solve_harmonic_measure(a.l, a.b, x, a.mesh)?;
    let value = field.value_at(a.at_x, a.at_y)?;
    let mut out = Output::new(dir)?;
    out.write("harmonic.csv", &field.to_csv())?;
    out.write("harmonic.svg", &field.to_svg(400))?;
    let summary = json!({
        "L": a.l,
        "B": a.b,
        "mesh": a.mesh,
        "truncation_length": x,
        "at": { "x": a.at_x, "y": a.at_y },
        "w": num(value),
        "iterations": field.iterations(),
        "residual": field.residual(),
    });
    print_json(&summary);
    out.finish("harmonic-measure", seed.unwrap_or(0), summary, started)
}

pub fn spectrum(a: SpectrumArgs, dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let started = Instant::now();
    let n_freq = a.n_freq.unwrap_or(a.n);
    let op = build_operator_with(a.bandwidth, a.n, n_freq, a.normalization.into(), a.quadrature.into())?;
    let sigmas = singular_values(&op)?;
    let fit = decay_fit(&sigmas, a.bandwidth);
    let mut out = Output::new(dir)?;
    out.write("spectrum.csv", &spectrum_csv(&sigmas))?;
    let shown = (4 * a.bandwidth.ceil() as usize + 20).min(sigmas.len());
    let plot = LinePlot::new(format!("Singular values, B = {}", a.bandwidth), "index", "sigma")
        .log_y()
        .with_series(Series::new(
            "sigma_j",
            sigmas[..shown].iter().enumerate().map(|(i, &s)| ((i + 1) as f64, s)).collect(),
        ));
    out.write("spectrum.svg", &plot.to_svg())?;
    let fit_json = match fit {
        Ok(f) => json!({
            "plateau_count": f.plateau_count,
            "decay_rate": num(f.decay_rate),
            "fitted_points": f.fitted_points,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let summary = json!({
        "bandwidth": a.bandwidth,
        "n_space": a.n,
        "n_freq": n_freq,
        "normalization": serde_json::to_value(Normalization::from(a.normalization)).expect("serializable"),
        "quadrature": serde_json::to_value(Quadrature::from(a.quadrature)).expect("serializable"),
        "sigma_max": num(sigmas[0]),
        "decay": fit_json,
    });
    print_json(&summary);
    out.finish("spectrum", seed.unwrap_or(0), summary, started)
}

fn config_json(cfg: &truncft::experiments::ExperimentConfig, e_cuts: &[f64]) -> Value {
    let mut v = serde_json::to_value(cfg).expect("serializable");
    v["e_cuts"] = json!(e_cuts);
    v
}

pub fn sweep(a: ConfigArgs, dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let started = Instant::now();
    let mut loaded = load_config(&a.config)?;
    if let Some(s) = seed {
        loaded.experiment.seed = s;
    }
    let cfg = &loaded.experiment;
    let report = sweep_error_vs_bandwidth(cfg)?;
    let mut out = Output::new(dir)?;
    out.write("sweep.csv", &report.to_csv())?;
    out.write_json("sweep.json", &report)?;
    let mut plot = LinePlot::new("Reconstruction error", "B", "mean error").log_y();
    for &k in &cfg.k_list {
        for &d in &cfg.deltas {
            plot = plot.with_series(Series::new(format!("k={k}, delta={d}"), report.curve(k, d)));
        }
    }
    out.write("sweep.svg", &plot.to_svg())?;
    println!("wrote {} cells", report.cells.len());
    out.finish("sweep", cfg.seed, config_json(cfg, &loaded.e_cuts), started)
}

pub fn critical(a: ConfigArgs, dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let started = Instant::now();
    let mut loaded = load_config(&a.config)?;
    if let Some(s) = seed {
        loaded.experiment.seed = s;
    }
    let cfg = &loaded.experiment;
    let report = sweep_error_vs_bandwidth(cfg)?;
    let crit = critical_report(&report, &loaded.e_cuts);
    for p in &crit.points {
        println!(
            "k={} delta={} e_cut={} B0={}",
            p.k,
            p.delta,
            p.e_cut,
            format_bandwidth(p.critical_bandwidth)
        );
    }
    let fits: Vec<Value> = crit
        .fits
        .iter()
        .map(|(d, e, f)| match f {
            Some(f) => {
                println!("delta={d} e_cut={e} C={} offset={}", f.slope, f.offset);
                json!({ "delta": d, "e_cut": e, "slope": num(f.slope), "offset": num(f.offset), "points_used": f.points_used })
            }
            None => json!({ "delta": d, "e_cut": e, "slope": null, "offset": null, "points_used": 0 }),
        })
        .collect();
    let points: Vec<Value> = crit
        .points
        .iter()
        .map(|p| json!({ "k": p.k, "delta": p.delta, "e_cut": p.e_cut, "B0": num(p.critical_bandwidth) }))
        .collect();
    let mut out = Output::new(dir)?;
    out.write("critical.csv", &crit.to_csv())?;
    out.write_json("critical.json", &json!({ "points": points, "fits": fits }))?;
    let mut plot = LinePlot::new("Critical bandwidth", "k", "B0");
    for (d, e, f) in &crit.fits {
        let pts: Vec<(f64, f64)> = crit
            .points
            .iter()
            .filter(|p| p.delta == *d && p.e_cut == *e)
            .map(|p| (p.k as f64, p.critical_bandwidth))
            .collect();
        plot = plot.with_series(Series::new(format!("e_cut={e}, delta={d}"), pts.clone()));
        if let Some(f) = f {
            let line = pts.iter().map(|&(k, _)| (k, f.slope * k + f.offset)).collect();
            plot = plot.with_series(Series::new(format!("fit C={:.3}", f.slope), line).dashed());
        }
    }
    out.write("critical.svg", &plot.to_svg())?;
    out.finish("critical", cfg.seed, config_json(cfg, &loaded.e_cuts), started)
}

pub fn noise_bound(a: NoiseBoundArgs, dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let started = Instant::now();
    let s = spec(a.k)?;
    let lo = a.b_min.unwrap_or(s.omega());
    let hi = a.b_max.unwrap_or(4.0 * s.omega());
    if !(lo > 0.0 && hi >= lo) || a.points == 0 {
        return Err(CliError::Validation(format!(
            "need 0 < b_min ≤ b_max and points ≥ 1 (b_min = {lo}, b_max = {hi}, points = {})",
            a.points
        )));
    }
    let bandwidths: Vec<f64> = if a.points == 1 {
        vec![lo]
    } else {
        (0..a.points)
            .map(|i| lo + (hi - lo) * i as f64 / (a.points - 1) as f64)
            .collect()
    };
    let seed = seed.unwrap_or(0);
    let report = noise_scaling_sweep(s, &bandwidths, a.delta, a.trials, a.rate, seed)?;
    let mut out = Output::new(dir)?;
    out.write("noise_bound.csv", &report.to_csv())?;
    out.write_json("noise_bound.json", &report)?;
    let plot = LinePlot::new(format!("Noise scaling, k = {}, delta = {}", a.k, a.delta), "B", "error")
        .log_y()
        .with_series(Series::new("mean error", report.points.iter().map(|p| (p.bandwidth, p.mean_error)).collect()))
        .with_series(Series::new("noise-free", report.points.iter().map(|p| (p.bandwidth, p.noise_free_error)).collect()))
        .with_series(
            Series::new(
                format!("noise-free + {:.2} delta sqrt(B)", report.c_envelope),
                report
                    .points
                    .iter()
                    .map(|p| (p.bandwidth, p.noise_free_error + report.c_envelope * a.delta * p.bandwidth.sqrt()))
                    .collect(),
            )
            .dashed(),
        );
    out.write("noise_bound.svg", &plot.to_svg())?;
    let summary = json!({
        "k": a.k,
        "delta": a.delta,
        "trials": a.trials,
        "sampling_rate": a.rate,
        "bandwidths": bandwidths,
        "c_envelope": num(report.c_envelope),
        "c_least_squares": num(report.c_least_squares),
        "hard_bound_all_hold": report.all_hard_bounds_hold(),
    });
    print_json(&summary);
    out.finish("noise-bound", seed, summary, started)
}
