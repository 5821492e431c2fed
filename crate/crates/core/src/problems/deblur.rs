use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::space::{MonotoneMap, ResolventOp, Vector};

use super::Problem;

const POWER_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Pixels outside the image read as zero.
    #[default]
    ZeroPad,
    /// Pixels outside the image read as the nearest edge pixel.
    Replicate,
}

/// Square convolution kernel applied to a row-major `rows × cols` image.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurModel {
    kernel: Vec<f64>,
    size: usize,
    pub rows: usize,
    pub cols: usize,
    pub boundary: Boundary,
}

impl BlurModel {
    /// Normalized `size × size` Gaussian with standard deviation `sigma`.
    pub fn gaussian(size: usize, sigma: f64, rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        if size.is_multiple_of(2) || !(sigma > 0.0) {
            return Err(Error::usage(format!("kernel size must be odd and sigma positive (size={size}, sigma={sigma})")));
        }
        let c = (size / 2) as f64;
        let g: Vec<f64> = (0..size).map(|i| (-(i as f64 - c).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
        let kernel: Vec<f64> = (0..size * size).map(|k| g[k / size] * g[k % size]).collect();
        BlurModel::from_kernel(kernel, size, rows, cols, boundary)
    }

    /// Single unit tap at the center.
    pub fn identity(rows: usize, cols: usize) -> Self {
        BlurModel { kernel: vec![1.0], size: 1, rows, cols, boundary: Boundary::ZeroPad }
    }

    /// Normalizes `kernel` (row-major, `size × size`) to sum 1.
    pub fn from_kernel(kernel: Vec<f64>, size: usize, rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        if kernel.len() != size * size || size.is_multiple_of(2) {
            return Err(Error::usage(format!("kernel must be an odd square, got {} taps for size {size}", kernel.len())));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::usage("image dimensions must be positive"));
        }
        let sum: f64 = kernel.iter().sum();
        if kernel.iter().any(|k| !(*k >= 0.0)) || !(sum > 0.0) {
            return Err(Error::usage("kernel taps must be nonnegative with a positive sum"));
        }
        let kernel = kernel.into_iter().map(|k| k / sum).collect();
        Ok(BlurModel { kernel, size, rows, cols, boundary })
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn kernel_size(&self) -> usize {
        self.size
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    fn source(&self, i: usize, a: usize, n: usize) -> Option<usize> {
        let idx = i as isize + a as isize - (self.size / 2) as isize;
        match self.boundary {
            Boundary::ZeroPad => (0..n as isize).contains(&idx).then_some(idx as usize),
            Boundary::Replicate => Some(idx.clamp(0, n as isize - 1) as usize),
        }
    }

    /// `out[i, j] = Σ k[a, b]·x[i + a − c, j + b − c]`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.pixels()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let mut acc = 0.0;
                for a in 0..self.size {
                    let Some(si) = self.source(i, a, self.rows) else { continue };
                    for b in 0..self.size {
                        if let Some(sj) = self.source(j, b, self.cols) {
                            acc += self.kernel[a * self.size + b] * x[si * self.cols + sj];
                        }
                    }
                }
                out[i * self.cols + j] = acc;
            }
        }
        out
    }

    /// Exact adjoint of [`apply`](Self::apply), by scattering each output
    /// pixel back onto the sources it read.
    pub fn adjoint(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.pixels()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let ui = u[i * self.cols + j];
                for a in 0..self.size {
                    let Some(si) = self.source(i, a, self.rows) else { continue };
                    for b in 0..self.size {
                        if let Some(sj) = self.source(j, b, self.cols) {
                            out[si * self.cols + sj] += self.kernel[a * self.size + b] * ui;
                        }
                    }
                }
            }
        }
        out
    }

    /// `‖P‖²` by power iteration on `P′P`.
    pub fn operator_norm_sq(&self) -> f64 {
        let mut x = vec![1.0 / (self.pixels() as f64).sqrt(); self.pixels()];
        let mut lambda = 0.0;
        for _ in 0..POWER_ITERATIONS {
            let y = self.adjoint(&self.apply(&x));
            lambda = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if lambda == 0.0 {
                break;
            }
            x = y.into_iter().map(|v| v / lambda).collect();
        }
        lambda
    }
}

/// `min ‖Pw − e‖² + reg·‖w‖₁`: `T(w) = 2P′(Pw − e)`, `S = reg·∂‖·‖₁`.
/// Default initials are the all-zeros and all-ones images.
pub fn make_deblur_problem(model: &BlurModel, observed: &Vector, reg: f64) -> Result<Problem> {
    if observed.dim() != model.pixels() {
        return Err(Error::DimensionMismatch { expected: model.pixels(), actual: observed.dim() });
    }
    if !(reg > 0.0) {
        return Err(Error::usage(format!("regularization weight must be positive, got {reg}")));
    }
    let blur = Arc::new(model.clone());
    let e = observed.clone();
    let lipschitz = 2.0 * model.operator_norm_sq();
    let map = MonotoneMap::new(move |w: &Vector| {
        let mut r = blur.apply(w);
        for (ri, ei) in r.iter_mut().zip(e.iter()) {
            *ri -= ei;
        }
        Vector::from_raw(blur.adjoint(&r).into_iter().map(|v| 2.0 * v).collect())
    })
    .with_lipschitz(lipschitz);
    let n = model.pixels();
    Problem::new(
        format!("deblur-{}x{}", model.rows, model.cols),
        map,
        ResolventOp::soft_threshold(reg),
        (Vector::zeros(n), Vector::filled(n, 1.0)),
    )
}

/// `20·log₁₀(‖reference‖ / ‖reference − restored‖)` in dB; `+∞` when the
/// images coincide.
pub fn snr(reference: &Vector, restored: &Vector) -> Result<f64> {
    reference.check_dim(restored)?;
    let err = reference.dist(restored);
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (reference.norm() / err).log10())
}

/// Piecewise-constant test image on a 0–255 scale: background 30, a bright
/// rectangle (230) and an overlapping disk (150).
pub fn synthetic_phantom(rows: usize, cols: usize) -> Vector {
    let (r, c) = (rows as f64 / 32.0, cols as f64 / 32.0);
    let (cy, cx, rad) = (20.0 * r, 20.0 * c, 8.0 * r.min(c));
    let mut img = vec![30.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let (y, x) = (i as f64, j as f64);
            let v = &mut img[i * cols + j];
            if (y - cy).powi(2) + (x - cx).powi(2) < rad * rad {
                *v = 150.0;
            } else if y >= 6.0 * r && y < 20.0 * r && x >= 5.0 * c && x < 14.0 * c {
                *v = 230.0;
            }
        }
    }
    Vector::from_raw(img)
}

/// Adds i.i.d. `N(0, std²)` noise drawn from a seeded generator.
pub fn add_gaussian_noise(image: &Vector, std: f64, seed: u64) -> Result<Vector> {
    let normal = Normal::new(0.0, std).map_err(|e| Error::usage(format!("noise std {std}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Vector::from_raw(image.iter().map(|v| v + normal.sample(&mut rng)).collect()))
}
