//! Finite-difference harmonic measure of the slit `[0,B]×{0}` in the deleted
//! half-strip `{Re z > 0, |Im z| < L} \ [0,B]×{0}`.
//!
//! The half-strip is cut at `Re z = X` with homogeneous Dirichlet data there.
//! Slit nodes carry the value 1 and act as a two-sided boundary: nodes just
//! above and below the slit see 1, never each other. The 5-point system is
//! solved with unpreconditioned conjugate gradients.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `max |b - A u| ≤ tolerance` for the unscaled `4u - Σ neighbours` stencil.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200_000,
        }
    }
}

/// Solved harmonic measure on the mesh `x = i h`, `y = (j - ny) h`.
#[derive(Debug, Clone)]
pub struct HarmonicMeasureField {
    half_strip_height: f64,
    slit_length: f64,
    truncation_length: f64,
    mesh: f64,
    nx: usize,
    ny: usize,
    slit_nodes: usize,
    values: Vec<f64>,
    iterations: usize,
    residual: f64,
}

/// Smallest conforming `X` with `X ≥ max(4B, 4L, 8, B₀ + 8L)`.
pub fn default_truncation_length(half_strip_height: f64, slit_length: f64, evaluation_x: f64, mesh: f64) -> f64 {
    let x = (4.0 * slit_length)
        .max(4.0 * half_strip_height)
        .max(8.0)
        .max(evaluation_x + 8.0 * half_strip_height);
    (x / mesh - 1e-9).ceil() * mesh
}

fn steps(what: &'static str, value: f64, mesh: f64) -> Result<usize> {
    let r = value / mesh;
    let n = r.round();
    if (r - n).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::NonConformingMesh { mesh, what, value });
    }
    Ok(n as usize)
}

pub fn solve_harmonic_measure(
    half_strip_height: f64,
    slit_length: f64,
    truncation_length: f64,
    mesh: f64,
) -> Result<HarmonicMeasureField> {
    solve_harmonic_measure_with(
        half_strip_height,
        slit_length,
        truncation_length,
        mesh,
        SolverOptions::default(),
    )
}

pub fn solve_harmonic_measure_with(
    half_strip_height: f64,
    slit_length: f64,
    truncation_length: f64,
    mesh: f64,
    options: SolverOptions,
) -> Result<HarmonicMeasureField> {
    if !(mesh > 0.0 && half_strip_height > 0.0 && slit_length >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need mesh > 0, L > 0, B ≥ 0 (mesh = {mesh}, L = {half_strip_height}, B = {slit_length})"
        )));
    }
    let min_x = (4.0 * slit_length).max(4.0 * half_strip_height).max(8.0);
    if truncation_length < min_x * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "truncation length {truncation_length} is below max(4B, 4L, 8) = {min_x}"
        )));
    }
    let ny = steps("L", half_strip_height, mesh)?;
    let slit_nodes = steps("B", slit_length, mesh)?;
    let nx = steps("truncation length", truncation_length, mesh)?;
    if ny < 1 || nx < 2 {
        return Err(Error::InvalidArgument("mesh too coarse for the domain".into()));
    }

    let rows = 2 * ny + 1;
    let idx = |i: usize, j: usize| i * rows + j;
    let len = (nx + 1) * rows;

    let mut unknown = vec![false; len];
    let mut boundary = vec![0.0; len];
    for i in 0..=nx {
        for j in 0..rows {
            let on_slit = j == ny && i <= slit_nodes;
            if on_slit {
                boundary[idx(i, j)] = 1.0;
            } else if i > 0 && i < nx && j > 0 && j + 1 < rows {
                unknown[idx(i, j)] = true;
            }
        }
    }

    // b = Dirichlet contributions of neighbours.
    let mut rhs = vec![0.0; len];
    for i in 1..nx {
        for j in 1..rows - 1 {
            let p = idx(i, j);
            if unknown[p] {
                rhs[p] = boundary[idx(i + 1, j)]
                    + boundary[idx(i - 1, j)]
                    + boundary[idx(i, j + 1)]
                    + boundary[idx(i, j - 1)];
            }
        }
    }

    let apply = |p_vec: &[f64], out: &mut [f64]| {
        for i in 1..nx {
            for j in 1..rows - 1 {
                let p = idx(i, j);
                out[p] = if unknown[p] {
                    let nb = |q: usize| if unknown[q] { p_vec[q] } else { 0.0 };
                    4.0 * p_vec[p]
                        - nb(idx(i + 1, j))
                        - nb(idx(i - 1, j))
                        - nb(idx(i, j + 1))
                        - nb(idx(i, j - 1))
                } else {
                    0.0
                };
            }
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let max_abs = |a: &[f64]| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut u = vec![0.0; len];
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; len];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    let mut residual = max_abs(&r);
    while residual > options.tolerance {
        if iterations >= options.max_iterations {
            return Err(Error::NoConvergence {
                method: "conjugate gradients",
                iterations,
                residual,
            });
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for q in 0..len {
            u[q] += alpha * p[q];
            r[q] -= alpha * ap[q];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for q in 0..len {
            p[q] = r[q] + beta * p[q];
        }
        rr = rr_new;
        iterations += 1;
        residual = max_abs(&r);
        if residual <= options.tolerance {
            // Confirm against the true residual; the recurrence drifts.
            apply(&u, &mut ap);
            let true_res = (0..len)
                .filter(|&q| unknown[q])
                .fold(0.0f64, |m, q| m.max((rhs[q] - ap[q]).abs()));
            if true_res > options.tolerance {
                for q in 0..len {
                    r[q] = if unknown[q] { rhs[q] - ap[q] } else { 0.0 };
                }
                p.copy_from_slice(&r);
                rr = dot(&r, &r);
            }
            residual = true_res;
        }
    }

    let values: Vec<f64> = (0..len)
        .map(|q| if unknown[q] { u[q] } else { boundary[q] })
        .collect();

    Ok(HarmonicMeasureField {
        half_strip_height,
        slit_length,
        truncation_length,
        mesh,
        nx,
        ny,
        slit_nodes,
        values,
        iterations,
        residual,
    })
}

impl HarmonicMeasureField {
    pub fn half_strip_height(&self) -> f64 {
        self.half_strip_height
    }

    pub fn slit_length(&self) -> f64 {
        self.slit_length
    }

    pub fn truncation_length(&self) -> f64 {
        self.truncation_length
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `(nx + 1, 2 ny + 1)` nodes along x and y.
    pub fn shape(&self) -> (usize, usize) {
        (self.nx + 1, 2 * self.ny + 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at node `(i, j)` with `x = i h`, `y = (j - ny) h`.
    pub fn node_value(&self, i: usize, j: usize) -> f64 {
        self.values[i * (2 * self.ny + 1) + j]
    }

    pub fn node_position(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.mesh, (j as f64 - self.ny as f64) * self.mesh)
    }

    pub fn is_slit_node(&self, i: usize, j: usize) -> bool {
        j == self.ny && i <= self.slit_nodes
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && x <= self.truncation_length && y.abs() <= self.half_strip_height
    }

    /// Bilinear interpolation of the field at `(x, y)`.
    pub fn value_at(&self, x: f64, y: f64) -> Result<f64> {
        if !self.contains(x, y) {
            return Err(Error::OutsideDomain { x, y });
        }
        let fx = (x / self.mesh).clamp(0.0, self.nx as f64);
        let fy = (y / self.mesh + self.ny as f64).clamp(0.0, (2 * self.ny) as f64);
        let i0 = (fx.floor() as usize).min(self.nx - 1);
        let j0 = (fy.floor() as usize).min(2 * self.ny - 1);
        let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
        let v = |i, j| self.node_value(i, j);
        Ok((1.0 - tx) * (1.0 - ty) * v(i0, j0)
            + tx * (1.0 - ty) * v(i0 + 1, j0)
            + (1.0 - tx) * ty * v(i0, j0 + 1)
            + tx * ty * v(i0 + 1, j0 + 1))
    }

    /// CSV with header `x,y,w`, one row per node.
    pub fn to_csv(&self) -> String {
        let (cols, rows) = self.shape();
        let mut out = String::with_capacity(cols * rows * 72 + 8);
        out.push_str("x,y,w\n");
        for i in 0..cols {
            for j in 0..rows {
                let (x, y) = self.node_position(i, j);
                let _ = writeln!(out, "{x:.16e},{y:.16e},{:.16e}", self.node_value(i, j));
            }
        }
        out
    }

    /// Grayscale heatmap (white = 1, black = 0), downsampled to at most
    /// `max_cells` cells along x.
    pub fn to_svg(&self, max_cells: usize) -> String {
        let (cols, rows) = self.shape();
        let stride = cols.div_ceil(max_cells.max(1)).max(1);
        let cell = 4.0;
        let nc = cols.div_ceil(stride);
        let nr = rows.div_ceil(stride);
        let (w, h) = (nc as f64 * cell, nr as f64 * cell);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{}" viewBox="0 0 {w} {}">"#,
            h + 24.0,
            h + 24.0
        );
        let _ = writeln!(
            out,
            r#"<text x="4" y="16" font-family="sans-serif" font-size="12">harmonic measure, L = {}, B = {}, X = {}, h = {}</text>"#,
            self.half_strip_height, self.slit_length, self.truncation_length, self.mesh
        );
        for ci in 0..nc {
            for cj in 0..nr {
                let v = self.node_value((ci * stride).min(cols - 1), (cj * stride).min(rows - 1));
                let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
                // Row 0 is y = -L; draw +L at the top.
                let top = 24.0 + (nr - 1 - cj) as f64 * cell;
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{top}" width="{cell}" height="{cell}" fill="rgb({g},{g},{g})"/>"#,
                    ci as f64 * cell
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}
