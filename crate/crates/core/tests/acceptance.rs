//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use truncft::experiments::{
    critical_report, noise_scaling_sweep, sweep_error_vs_bandwidth, ExperimentConfig,
};
use truncft::signals::{eval_eigenfunction, frequency_number, EigenfunctionSpec};
use truncft::spectrum::{build_operator_with, decay_fit, singular_values, Normalization, Quadrature};
use truncft::stability::{
    default_truncation_length, eta_stability_constant, eta_vs_measure_check, gn_inequality_check,
    large_truncation_factor, small_truncation_constant, small_truncation_limit,
    solve_harmonic_measure, two_constants_check, two_constants_witness, StabilityParams,
};
use truncft::transform::{
    direct_inverse_oracle, frft_inverse, truncated_l2_norm, FrequencyGrid, SpectralSamples,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn spec(k: u32) -> EigenfunctionSpec {
    EigenfunctionSpec::new(k).unwrap()
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn frft_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for m in [16usize, 64, 256, 1024] {
        for _ in 0..5 {
            let b = rng.random_range(0.5..40.0);
            let grid = FrequencyGrid::with_count(b, m).unwrap();
            let vals = (0..m)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let meas = SpectralSamples::new(grid, vals).unwrap();
            let fast = frft_inverse(&meas, m).unwrap();
            let slow = direct_inverse_oracle(&meas, m).unwrap();
            worst = worst.max(rel_l2(fast.values(), slow.values()));
        }
    }
    outcome(worst <= 1e-10, format!("max relative L2 error {worst:.2e} (limit 1e-10)"))
}

fn large_truncation_bound() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for k in 1..=10 {
        let s = spec(k);
        let f = eval_eigenfunction(s, 4096).unwrap();
        let omega = frequency_number(&f).unwrap().value();
        for factor in [1.1, 1.5, 2.0, 4.0] {
            let b = factor * omega;
            let n_freq = ((32.0 * b).ceil() as usize).max(256);
            let rhs = large_truncation_factor(omega, b).unwrap() * truncated_l2_norm(&f, b, n_freq).unwrap();
            let ratio = f.l2_norm() / rhs;
            worst = worst.max(ratio);
            if ratio > 1.01 {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("max ||f||/(factor*||F_B f||) = {worst:.4} over 40 cases (limit 1.01)"),
    )
}

/// Shared by criteria 3 and 4.
fn critical_fits() -> (f64, [f64; 3], usize) {
    let cfg = ExperimentConfig {
        k_list: (2..=20).collect(),
        deltas: vec![0.0],
        trials: 100,
        seed: 2024,
        ..Default::default()
    };
    let report = sweep_error_vs_bandwidth(&cfg).unwrap();
    let cuts = [0.2, 0.5, 0.7];
    let crit = critical_report(&report, &cuts);
    let fits: Vec<_> = cuts.iter().map(|&e| crit.fit(0.0, e)).collect();
    let offsets = [0, 1, 2].map(|i| fits[i].map_or(f64::NAN, |f| f.offset));
    let slope = fits[1].map_or(f64::NAN, |f| f.slope);
    let used = fits[1].map_or(0, |f| f.points_used);
    (slope, offsets, used)
}

fn landau_facts() -> Outcome {
    let op = build_operator_with(10.0, 512, 512, Normalization::Landau, Quadrature::LeftPoint).unwrap();
    let s = singular_values(&op).unwrap();
    let fit = decay_fit(&s, 10.0).unwrap();
    let pass = s[8] > 0.4 && s[10] < 0.6 && (8..=12).contains(&fit.plateau_count) && fit.decay_rate < 0.0;
    outcome(
        pass,
        format!(
            "sigma_9 = {:.4}, sigma_11 = {:.4}, plateau {}, decay slope {:.3} (band [-5pi, 5pi])",
            s[8], s[10], fit.plateau_count, fit.decay_rate
        ),
    )
}

fn eta_vs_measure() -> Outcome {
    let mesh = 1.0 / 64.0;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let triples: Vec<(f64, f64, f64)> = (0..20)
        .map(|_| {
            let l = rng.random_range(8..=96) as f64 * mesh; // 0.125 ..= 1.5
            let b = rng.random_range(16..=192) as f64 * mesh; // 0.25 ..= 3
            let b0 = b + rng.random_range(0.1..3.0);
            (l, b0, b)
        })
        .collect();
    let reports: Vec<_> = triples
        .par_iter()
        .map(|&(l, b0, b)| eta_vs_measure_check(l, b0, b, mesh).unwrap())
        .collect();
    let held = reports.iter().filter(|r| r.eta_le_w).count();
    let slack = reports.iter().map(|r| r.w + r.budget - r.eta).fold(f64::INFINITY, f64::min);
    outcome(held == 20, format!("{held}/20 triples with eta <= w_fd + 5*mesh, min slack {slack:.4}"))
}

fn two_constants() -> Outcome {
    let (l, b, mesh) = (1.0, 2.0, 1.0 / 64.0);
    let x_max = default_truncation_length(l, b, 8.0, mesh);
    let field = solve_harmonic_measure(l, b, x_max, mesh).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut points = Vec::new();
    while points.len() < 100 {
        let z = Complex64::new(rng.random_range(0.0..8.0), rng.random_range(-0.999..0.999));
        let on_slit = z.im.abs() < 1e-9 && z.re <= b;
        if !on_slit {
            points.push(z);
        }
    }
    let mut failures = 0;
    let mut closest = 0.0f64;
    for k in [2, 4, 8] {
        let (witness, _) = two_constants_witness(spec(k), l, b).unwrap();
        let report = two_constants_check(spec(k), witness, &field, &points).unwrap();
        failures += report.points.iter().filter(|p| !p.holds).count();
        for p in &report.points {
            closest = closest.max(p.abs_transform / p.bound);
        }
    }
    outcome(
        failures == 0,
        format!("{} of 300 point checks hold, max |f^(z)|/bound = {closest:.4}", 300 - failures),
    )
}

fn gagliardo_nirenberg() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = 0;
    let mut worst = 0.0f64;
    let mut total = 0;
    for b in [0.5, 1.0, 4.0] {
        for _ in 0..1000 {
            let terms = rng.random_range(1..=6);
            let coeffs: Vec<(f64, f64, f64)> = (0..terms)
                .map(|_| {
                    (
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(0.0..20.0),
                    )
                })
                .collect();
            let n = 4001;
            let h = b / (n - 1) as f64;
            let u: Vec<f64> = (0..n)
                .map(|i| {
                    let x = i as f64 * h;
                    coeffs.iter().map(|(a, c, t)| a * (t * x).cos() + c * (t * x).sin()).sum()
                })
                .collect();
            let r = gn_inequality_check(&u, h).unwrap();
            total += 1;
            worst = worst.max(r.lhs / r.rhs);
            if !r.holds {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{}/{total} polynomials satisfy the bound, max lhs/rhs = {worst:.4}", total - failures),
    )
}

fn noise_scaling() -> Outcome {
    let s = spec(15);
    let w = s.omega();
    let bs: Vec<f64> = (0..13).map(|i| w + 3.0 * w * i as f64 / 12.0).collect();
    let r = noise_scaling_sweep(s, &bs, 0.05, 100, 16.0, 9).unwrap();
    let hard = r.points.iter().map(|p| p.hard_bound_holds).sum::<usize>();
    let total = r.points.iter().map(|p| p.trials).sum::<usize>();
    let pass = hard == total && r.c_envelope <= 3.0 && r.below_overlay(r.c_envelope);
    outcome(
        pass,
        format!(
            "c = {:.3} (least squares {:.3}, limit 3), hard bound {hard}/{total} trials",
            r.c_envelope, r.c_least_squares
        ),
    )
}

fn blow_up_direction() -> Outcome {
    let (l, gamma) = (1.0, 2.0);
    let b0 = 2f64.sqrt() * spec(4).omega();
    let limit = small_truncation_limit(b0, gamma);
    let at_b0 = small_truncation_constant(&StabilityParams::new(l, b0, b0, gamma).unwrap(), 1.0).unwrap();
    let limit_err = (at_b0.value - limit).abs() / limit;

    let mut prev = f64::INFINITY;
    let mut monotone = true;
    let mut finite = true;
    for i in 1..1000 {
        let b = b0 * i as f64 / 1000.0;
        let k = eta_stability_constant(&StabilityParams::new(l, b0, b, gamma).unwrap()).unwrap();
        // k itself may exceed f64 range; finiteness is judged on ln k.
        if b >= 0.25 * b0 {
            finite &= k.log_value.is_finite();
        }
        monotone &= k.log_value < prev;
        prev = k.log_value;
    }
    let near = eta_stability_constant(&StabilityParams::new(l, b0, b0 * (1.0 - 1e-12), gamma).unwrap()).unwrap();
    let approach = (near.value - limit) / limit;
    let tiny = eta_stability_constant(&StabilityParams::new(l, b0, 1e-3, gamma).unwrap()).unwrap();
    let pass = limit_err <= 1e-10 && monotone && finite && (0.0..1e-3).contains(&approach) && tiny.overflow;
    outcome(
        pass,
        format!(
            "limit match {limit_err:.1e}, ln k finite on [B0/4, B0) {finite}, decreasing {monotone}, k(B0(1-1e-12))/limit - 1 = {approach:.1e}, overflow at B=1e-3 {}",
            tiny.overflow
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome, Duration, Duration)> = Vec::new();
    let mut run = |id: u32, name: &'static str, budget: Duration, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let dt = t.elapsed();
        let o = if dt > budget {
            Outcome { pass: false, detail: format!("{} [over time budget]", o.detail) }
        } else {
            o
        };
        println!(
            "criterion {id:>2} {} {name}: {} ({:.2} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            dt.as_secs_f64()
        );
        results.push((id, name, o, dt, budget));
    };

    run(1, "FRFT matches direct sum", Duration::from_secs(5), &frft_vs_oracle);
    run(2, "large-truncation bound", Duration::from_secs(30), &large_truncation_bound);

    let t = Instant::now();
    let (slope, offsets, used) = critical_fits();
    let dt = t.elapsed();
    run(3, "critical-bandwidth slope", Duration::from_secs(600).saturating_sub(dt), &|| {
        outcome(
            (1.45..=1.70).contains(&slope),
            format!("C = {slope:.4} from {used} points (range [1.45, 1.70]), sweep {:.2} s", dt.as_secs_f64()),
        )
    });
    run(4, "offset ordering", Duration::from_secs(600), &|| {
        outcome(
            offsets[0] > offsets[1] && offsets[1] > offsets[2],
            format!("C_0.2 = {:.3}, C_0.5 = {:.3}, C_0.7 = {:.3}", offsets[0], offsets[1], offsets[2]),
        )
    });
    run(5, "plateau and decay", Duration::from_secs(60), &landau_facts);
    run(6, "eta below harmonic measure", Duration::from_secs(300), &eta_vs_measure);
    run(7, "two-constants bound", Duration::from_secs(300), &two_constants);
    run(8, "interpolation inequality", Duration::from_secs(300), &gagliardo_nirenberg);
    run(9, "noise scaling", Duration::from_secs(300), &noise_scaling);
    run(10, "blow-up direction", Duration::from_secs(60), &blow_up_direction);

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
