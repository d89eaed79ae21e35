//! Real and complex signals sampled on the left-point grid over `[-1, 1]`.
//!
//! A grid with `N` samples has nodes `x_m = -1 + 2m/N` for `m = 0..N`, so the
//! right endpoint `+1` is never a node. Every norm in this crate is the
//! matching left-point rule `(2/N) * sum |v_m|^2`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Sample types a [`GridSignal`] can hold.
pub trait Sample:
    Copy
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn abs_sq(self) -> f64;
    fn is_finite_sample(self) -> bool;

    fn abs(self) -> f64 {
        self.abs_sq().sqrt()
    }
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
    fn abs_sq(self) -> f64 {
        self * self
    }
    fn is_finite_sample(self) -> bool {
        self.is_finite()
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Sample for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn is_finite_sample(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn abs(self) -> f64 {
        self.norm()
    }
}

/// Node `m` of the `n`-point left-point grid on `[-1, 1]`.
#[inline]
pub fn grid_node(m: usize, n: usize) -> f64 {
    -1.0 + 2.0 * m as f64 / n as f64
}

/// Samples of a function on the left-point grid over `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal<T: Sample = f64> {
    values: Vec<T>,
}

/// Complex-valued samples, as produced by reconstruction.
pub type ComplexGridSignal = GridSignal<Complex64>;

impl<T: Sample> GridSignal<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return invalid(format!(
                "a grid signal needs at least 2 samples, got {}",
                values.len()
            ));
        }
        if let Some(m) = values.iter().position(|v| !v.is_finite_sample()) {
            return invalid(format!("sample {m} is not finite"));
        }
        Ok(Self { values })
    }

    /// Samples `f` at the `n` grid nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> T) -> Result<Self> {
        Self::new((0..n).map(|m| f(grid_node(m, n))).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![T::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn left(&self) -> f64 {
        -1.0
    }

    pub fn right(&self) -> f64 {
        1.0
    }

    pub fn spacing(&self) -> f64 {
        2.0 / self.values.len() as f64
    }

    pub fn node(&self, m: usize) -> f64 {
        grid_node(m, self.values.len())
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.values.len();
        (0..n).map(move |m| grid_node(m, n))
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// `self - other`, requiring identical grids.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples vs {} samples",
                self.len(),
                other.len()
            )));
        }
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }
}

impl GridSignal<Complex64> {
    pub fn real_part(&self) -> GridSignal<f64> {
        GridSignal {
            values: self.values.iter().map(|v| v.re).collect(),
        }
    }

    pub fn from_real(signal: &GridSignal<f64>) -> Self {
        GridSignal {
            values: signal
                .values
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect(),
        }
    }
}

impl GridSignal<f64> {
    /// CSV with header `x,value`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * self.len() + 8);
        out.push_str("x,value\n");
        for (x, v) in self.nodes().zip(&self.values) {
            let _ = writeln!(out, "{x:.16e},{v:.16e}");
        }
        out
    }
}

/// Left-point L² norm on `[-1, 1]`: `sqrt((2/N) * sum |v_m|^2)`.
pub fn l2_norm<T: Sample>(signal: &GridSignal<T>) -> f64 {
    let sum: f64 = signal.values.iter().map(|v| v.abs_sq()).sum();
    (signal.spacing() * sum).sqrt()
}

/// Mode index of the Dirichlet Laplacian eigenfunction
/// `f_k(x) = sin(k pi (x + 1) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct EigenfunctionSpec {
    k: u32,
}

impl EigenfunctionSpec {
    pub fn new(k: u32) -> Result<Self> {
        if k < 1 {
            return invalid("eigenfunction index k must be at least 1");
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.k as f64 * PI * (x + 1.0) / 2.0).sin()
    }

    /// Exact frequency number `k pi / 2`.
    pub fn omega(&self) -> f64 {
        self.k as f64 * PI / 2.0
    }
}

pub fn eval_eigenfunction(spec: EigenfunctionSpec, n_samples: usize) -> Result<GridSignal> {
    if n_samples < 2 {
        return invalid(format!("n_samples must be at least 2, got {n_samples}"));
    }
    GridSignal::from_fn(n_samples, |x| spec.eval(x))
}

/// Frequency number `omega = ||f'|| / ||f||`, in radians per unit length.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct FrequencyNumber(f64);

impl FrequencyNumber {
    /// Smallest frequency number admitted on H¹₀(-1, 1).
    pub const LOWER_BOUND: f64 = PI / 2.0;

    pub fn new(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return invalid(format!("frequency number must be positive, got {omega}"));
        }
        Ok(Self(omega))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Rayleigh quotient `omega^2`.
    pub fn lambda(self) -> f64 {
        self.0 * self.0
    }

    pub fn satisfies_lower_bound(self, slack: f64) -> bool {
        self.0 >= Self::LOWER_BOUND - slack
    }
}

/// Default relative endpoint tolerance for the H¹₀ check.
pub const ENDPOINT_RELATIVE_TOLERANCE: f64 = 1e-8;

/// Second-order finite-difference derivative: central in the interior,
/// three-point one-sided at both ends. Needs at least 3 samples.
pub fn discrete_derivative<T: Sample>(values: &[T], spacing: f64) -> Vec<T> {
    let n = values.len();
    assert!(n >= 3, "derivative needs at least 3 samples");
    let inv2h = 1.0 / (2.0 * spacing);
    let mut d = Vec::with_capacity(n);
    d.push((values[1] * 4.0 - values[0] * 3.0 - values[2]) * inv2h);
    for m in 1..n - 1 {
        d.push((values[m + 1] - values[m - 1]) * inv2h);
    }
    d.push((values[n - 1] * 3.0 - values[n - 2] * 4.0 + values[n - 3]) * inv2h);
    d
}

/// Checks `f(-1) = f(1) = 0` up to tolerance.
///
/// `x = -1` is the first node. `x = +1` sits one step past the last node, so its
/// value comes from quadratic extrapolation and the tolerance is widened by the
/// size of the trailing third difference (the extrapolation error scale).
pub fn check_vanishes_at_endpoints(signal: &GridSignal, rel_tol: f64) -> Result<()> {
    let v = signal.values();
    let n = v.len();
    if n < 4 {
        return invalid("endpoint check needs at least 4 samples");
    }
    let scale = signal.max_abs();
    let left = v[0].abs();
    let right = (3.0 * v[n - 1] - 3.0 * v[n - 2] + v[n - 3]).abs();
    let third_diff = (v[n - 1] - 3.0 * v[n - 2] + 3.0 * v[n - 3] - v[n - 4]).abs();
    let base = rel_tol * scale;
    if left > base || right > base + 2.0 * third_diff {
        return Err(Error::EndpointNotZero {
            left,
            right,
            tolerance: base + 2.0 * third_diff,
        });
    }
    Ok(())
}

pub fn frequency_number(signal: &GridSignal) -> Result<FrequencyNumber> {
    frequency_number_with_tolerance(signal, ENDPOINT_RELATIVE_TOLERANCE)
}

pub fn frequency_number_with_tolerance(
    signal: &GridSignal,
    rel_tol: f64,
) -> Result<FrequencyNumber> {
    let norm = l2_norm(signal);
    if norm == 0.0 {
        return invalid("frequency number of the zero signal is undefined");
    }
    check_vanishes_at_endpoints(signal, rel_tol)?;
    let d = discrete_derivative(signal.values(), signal.spacing());
    let dnorm = (signal.spacing() * d.iter().map(|v| v * v).sum::<f64>()).sqrt();
    FrequencyNumber::new(dnorm / norm)
}
