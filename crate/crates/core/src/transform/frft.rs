//! Fractional DFT via Bluestein's chirp-z factorization, and the inverse
//! truncated transform built on it.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{SpectralSamples, INV_SQRT_2PI};
use crate::error::{invalid, Result};
use crate::signals::{grid_node, ComplexGridSignal, GridSignal};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `G_k = Σ_{j=0}^{n-1} x_j e^{-2πi j k α}` for `k = 0..n_out`, in
/// `O((n + n_out) log(n + n_out))`.
///
/// Uses `jk = (j² + k² - (k-j)²)/2`, which turns the sum into a linear
/// convolution with the chirp `e^{πiα t²}`, evaluated with a power-of-two FFT.
pub fn fractional_dft(input: &[Complex64], alpha: f64, n_out: usize) -> Vec<Complex64> {
    let n = input.len();
    if n == 0 || n_out == 0 {
        return vec![Complex64::new(0.0, 0.0); n_out];
    }
    let size = (n + n_out - 1).next_power_of_two();
    let chirp = |t: usize| {
        let phase = PI * alpha * (t as f64) * (t as f64);
        Complex64::from_polar(1.0, phase)
    };

    let mut y = vec![Complex64::new(0.0, 0.0); size];
    for (j, &x) in input.iter().enumerate() {
        y[j] = x * chirp(j).conj();
    }
    let mut z = vec![Complex64::new(0.0, 0.0); size];
    for (t, slot) in z.iter_mut().enumerate().take(n_out) {
        *slot = chirp(t);
    }
    for t in 1..n {
        z[size - t] = chirp(t);
    }

    let (fwd, inv) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(size), p.plan_fft_inverse(size))
    });
    fwd.process(&mut y);
    fwd.process(&mut z);
    for (a, b) in y.iter_mut().zip(&z) {
        *a *= b;
    }
    inv.process(&mut y);

    let scale = 1.0 / size as f64;
    (0..n_out)
        .map(|k| y[k] * chirp(k).conj() * scale)
        .collect()
}

fn check_meas(meas: &SpectralSamples, n_out: usize) -> Result<()> {
    if meas.len() < 2 {
        return invalid(format!(
            "inversion needs at least 2 spectral samples, got {}",
            meas.len()
        ));
    }
    if n_out < 2 {
        return invalid(format!("n_out must be at least 2, got {n_out}"));
    }
    Ok(())
}

/// Left-point inverse quadrature
/// `f(x_j) ≈ (h/√(2π)) Σ_m g_m e^{i x_j ξ_m}` on the `n_out`-point grid
/// `x_j = -1 + 2j/n_out`, computed with [`fractional_dft`].
pub fn frft_inverse(meas: &SpectralSamples, n_out: usize) -> Result<ComplexGridSignal> {
    check_meas(meas, n_out)?;
    let grid = meas.grid();
    let (b, h) = (grid.bandwidth(), grid.spacing());
    let dx = 2.0 / n_out as f64;

    // x_j ξ_m = B - m h - j dx B + j m dx h.
    let pre: Vec<Complex64> = meas
        .values()
        .iter()
        .enumerate()
        .map(|(m, &g)| g * Complex64::from_polar(1.0, -(m as f64) * h))
        .collect();
    let alpha = -dx * h / (2.0 * PI);
    let sums = fractional_dft(&pre, alpha, n_out);
    let values = sums
        .into_iter()
        .enumerate()
        .map(|(j, s)| {
            let x = grid_node(j, n_out);
            s * Complex64::from_polar(h * INV_SQRT_2PI, -b * x)
        })
        .collect();
    GridSignal::new(values)
}

/// Direct `O(M n_out)` evaluation of the same sum as [`frft_inverse`].
pub fn direct_inverse_oracle(meas: &SpectralSamples, n_out: usize) -> Result<ComplexGridSignal> {
    check_meas(meas, n_out)?;
    GridSignal::from_fn(n_out, |x| inverse_at(meas, x))
}

/// The left-point inverse sum at a single point `x`.
pub fn inverse_at(meas: &SpectralSamples, x: f64) -> Complex64 {
    let grid = meas.grid();
    let acc: Complex64 = grid
        .nodes()
        .zip(meas.values())
        .map(|(xi, &g)| g * Complex64::from_polar(1.0, x * xi))
        .sum();
    acc * (grid.spacing() * INV_SQRT_2PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::FrequencyGrid;

    fn lcg_samples(n: usize, mut state: u64) -> Vec<Complex64> {
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn fractional_dft_reduces_to_dft() {
        let x = lcg_samples(12, 7);
        let alpha = 1.0 / 12.0;
        let g = fractional_dft(&x, alpha, 12);
        for (k, gk) in g.iter().enumerate() {
            let direct: Complex64 = x
                .iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 * alpha))
                .sum();
            assert!((gk - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn frft_matches_oracle_on_random_input() {
        for (m, b, n_out) in [(16, 3.0, 16), (256, 20.0, 256), (100, 7.5, 333)] {
            let grid = FrequencyGrid::with_count(b, m).unwrap();
            let meas = SpectralSamples::new(grid, lcg_samples(m, m as u64)).unwrap();
            let fast = frft_inverse(&meas, n_out).unwrap();
            let slow = direct_inverse_oracle(&meas, n_out).unwrap();
            let err = rel_l2(fast.values(), slow.values());
            assert!(err <= 1e-10, "M={m}: {err}");
        }
    }

    #[test]
    fn zero_and_dc_inputs() {
        let grid = FrequencyGrid::new(4.0, 0.5).unwrap();
        let zero = frft_inverse(&SpectralSamples::zeros(grid), 16).unwrap();
        assert!(zero.values().iter().all(|v| v.norm() == 0.0));

        // ξ_8 = 0 on this grid.
        let mut meas = SpectralSamples::zeros(grid);
        let c = Complex64::new(1.5, -0.5);
        meas.values_mut()[8] = c;
        let expected = c * 0.5 * INV_SQRT_2PI;
        for out in [direct_inverse_oracle(&meas, 10).unwrap(), frft_inverse(&meas, 10).unwrap()] {
            for v in out.values() {
                assert!((v - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn oracle_is_linear() {
        let grid = FrequencyGrid::with_count(6.0, 40).unwrap();
        let a = SpectralSamples::new(grid, lcg_samples(40, 1)).unwrap();
        let b = SpectralSamples::new(grid, lcg_samples(40, 2)).unwrap();
        let sum = SpectralSamples::new(
            grid,
            a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect(),
        )
        .unwrap();
        let ra = direct_inverse_oracle(&a, 30).unwrap();
        let rb = direct_inverse_oracle(&b, 30).unwrap();
        let rs = direct_inverse_oracle(&sum, 30).unwrap();
        for ((x, y), s) in ra.values().iter().zip(rb.values()).zip(rs.values()) {
            assert!((x + y - s).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_tiny_inputs() {
        let grid = FrequencyGrid::with_count(1.0, 1).unwrap();
        assert!(frft_inverse(&SpectralSamples::zeros(grid), 8).is_err());
        let grid = FrequencyGrid::with_count(1.0, 4).unwrap();
        assert!(frft_inverse(&SpectralSamples::zeros(grid), 1).is_err());
    }
}
