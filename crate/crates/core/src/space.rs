//! Dense vectors and the two operator abstractions the solvers consume:
//! single-valued monotone maps (the forward part) and resolvents of maximal
//! monotone operators (the backward part).

use std::fmt;
use std::ops::{Deref, Index};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A point of a finite-dimensional real inner-product space.
///
/// Entries are finite on construction. Arithmetic produced inside the
/// solvers may overflow; the driver checks every new iterate and reports a
/// numerical failure instead of propagating NaN.
#[derive(Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::usage("vector must have dimension >= 1"));
        }
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::usage(format!("vector entry {i} is not finite")));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Vector(vec![value; dim])
    }

    /// Geometric sequence `first * ratio^i`, `i = 0..dim`.
    pub fn geometric(dim: usize, first: f64, ratio: f64) -> Self {
        let mut out = Vec::with_capacity(dim);
        let mut term = first;
        for _ in 0..dim {
            out.push(term);
            term *= ratio;
        }
        Vector(out)
    }

    /// Wraps computed entries without the finiteness check.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&x| f(x)).collect())
    }

    pub(crate) fn check_dim(&self, other: &Vector) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() })
        }
    }

    // Unchecked kernels used in the solver loops; callers guarantee equal dimensions.

    pub(crate) fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub(crate) fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub(crate) fn dist(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn scale(&self, s: f64) -> Vector {
        self.map(|x| s * x)
    }

    /// `self + s * other`.
    pub(crate) fn axpy(&self, s: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

/// `Σ aᵢ bᵢ`.
pub fn inner(a: &Vector, b: &Vector) -> Result<f64> {
    a.check_dim(b)?;
    Ok(a.dot(b))
}

pub fn norm(a: &Vector) -> f64 {
    a.norm()
}

/// Componentwise `sign(wᵢ)·max(|wᵢ| − δ, 0)`, the resolvent of `δ·∂‖·‖₁`.
pub fn soft_threshold(w: &Vector, delta: f64) -> Vector {
    w.map(|x| {
        let mag = (x.abs() - delta).max(0.0);
        if x < 0.0 {
            -mag
        } else {
            mag
        }
    })
}

/// Componentwise clamp onto `[lo, hi]`, the resolvent of the box normal
/// cone for every step size.
pub fn box_project(w: &Vector, lo: &Vector, hi: &Vector) -> Result<Vector> {
    w.check_dim(lo)?;
    w.check_dim(hi)?;
    if let Some(i) = (0..lo.dim()).find(|&i| lo[i] > hi[i]) {
        return Err(Error::usage(format!(
            "box bounds inverted at coordinate {i}: {} > {}",
            lo[i], hi[i]
        )));
    }
    Ok(clamp_unchecked(w, lo, hi))
}

fn clamp_unchecked(w: &Vector, lo: &Vector, hi: &Vector) -> Vector {
    Vector::from_raw(
        w.iter()
            .zip(lo.iter().zip(hi.iter()))
            .map(|(&x, (&l, &h))| x.max(l).min(h))
            .collect(),
    )
}

/// Exact resolvent of `S = slope·I`: `a / (1 + δ·slope)`.
pub fn scaled_identity_resolvent(a: &Vector, delta: f64, slope: f64) -> Vector {
    a.scale(1.0 / (1.0 + delta * slope))
}

type MapFn = dyn Fn(&Vector) -> Vector + Send + Sync;
type ResolveFn = dyn Fn(&Vector, f64) -> Vector + Send + Sync;

/// Single-valued monotone map `T`, optionally carrying a Lipschitz constant.
#[derive(Clone)]
pub struct MonotoneMap {
    eval: Arc<MapFn>,
    lipschitz: Option<f64>,
}

impl MonotoneMap {
    pub fn new(eval: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        MonotoneMap { eval: Arc::new(eval), lipschitz: None }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn eval(&self, w: &Vector) -> Vector {
        (self.eval)(w)
    }

    /// `T ≡ 0`.
    pub fn zero() -> Self {
        MonotoneMap::new(|w: &Vector| Vector::zeros(w.dim())).with_lipschitz(0.0)
    }

    /// `T(w) = slope·w + offset`.
    pub fn affine(slope: f64, offset: Vector) -> Self {
        let l = slope.abs();
        MonotoneMap::new(move |w: &Vector| w.scale(slope).axpy(1.0, &offset)).with_lipschitz(l)
    }
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneMap").field("lipschitz", &self.lipschitz).finish_non_exhaustive()
    }
}

/// Resolvent `J_δ = (I + δS)⁻¹` of a maximal monotone operator `S`.
#[derive(Clone)]
pub struct ResolventOp {
    resolve: Arc<ResolveFn>,
}

impl ResolventOp {
    pub fn new(resolve: impl Fn(&Vector, f64) -> Vector + Send + Sync + 'static) -> Self {
        ResolventOp { resolve: Arc::new(resolve) }
    }

    pub fn resolve(&self, a: &Vector, delta: f64) -> Vector {
        (self.resolve)(a, delta)
    }

    /// `S = weight·∂‖·‖₁`.
    pub fn soft_threshold(weight: f64) -> Self {
        ResolventOp::new(move |a: &Vector, delta| soft_threshold(a, delta * weight))
    }

    /// `S = N_C` for the box `C = [lo, hi]`.
    pub fn box_projection(lo: Vector, hi: Vector) -> Result<Self> {
        lo.check_dim(&hi)?;
        if let Some(i) = (0..lo.dim()).find(|&i| lo[i] > hi[i]) {
            return Err(Error::usage(format!("box bounds inverted at coordinate {i}")));
        }
        Ok(ResolventOp::new(move |a: &Vector, _| clamp_unchecked(a, &lo, &hi)))
    }

    /// `S = slope·I`.
    pub fn scaled_identity(slope: f64) -> Self {
        ResolventOp::new(move |a: &Vector, delta| scaled_identity_resolvent(a, delta, slope))
    }

    /// `S = 0`, whose resolvent is the identity.
    pub fn identity() -> Self {
        ResolventOp::new(|a: &Vector, _| a.clone())
    }
}

impl fmt::Debug for ResolventOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ResolventOp")
    }
}
