use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::space::{MonotoneMap, ResolventOp, Vector};

use super::{estimate_affine_lipschitz, Problem};

type MatrixFn = dyn Fn(f64) -> DMatrix<f64> + Send + Sync;
type GradFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type CostFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;

/// Inner product on the discretized control space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerProduct {
    /// `h·Σ zᵢyᵢ`, the L² pairing of piecewise-constant controls.
    #[default]
    MeshWeighted,
    Euclidean,
}

/// Linear dynamics `ẋ = P(t)x + Q(t)z` on `[0, horizon]` with terminal cost
/// `φ(x(horizon))` and box-constrained controls.
///
/// Controls are piecewise constant on `mesh` intervals and stored flat:
/// entry `j·l + c` is channel `c` on `[tⱼ, tⱼ₊₁)`.
#[derive(Clone)]
pub struct ControlProblem {
    pub state_matrix: Arc<MatrixFn>,
    pub control_matrix: Arc<MatrixFn>,
    pub horizon: f64,
    pub mesh: usize,
    pub x0: DVector<f64>,
    pub terminal_grad: Arc<GradFn>,
    pub terminal_cost: Arc<CostFn>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub inner_product: InnerProduct,
}

impl fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlProblem")
            .field("horizon", &self.horizon)
            .field("mesh", &self.mesh)
            .field("x0", &self.x0.as_slice())
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("inner_product", &self.inner_product)
            .finish_non_exhaustive()
    }
}

/// Controls and states of one run on the mesh, ready for tabulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSolution {
    /// `t₀ … t_K`.
    pub times: Vec<f64>,
    /// `K` rows of `l` channels.
    pub controls: Vec<Vec<f64>>,
    /// `K + 1` rows of `d` states.
    pub states: Vec<Vec<f64>>,
    pub objective: f64,
}

impl ControlSolution {
    /// Left end of the first interval where `channel` drops from positive to
    /// non-positive.
    pub fn switch_time(&self, channel: usize) -> Option<f64> {
        self.controls
            .windows(2)
            .position(|w| w[0][channel] > 0.0 && w[1][channel] <= 0.0)
            .map(|j| self.times[j + 1])
    }
}

impl ControlProblem {
    pub fn step(&self) -> f64 {
        self.horizon / self.mesh as f64
    }

    pub fn state_dim(&self) -> usize {
        self.x0.len()
    }

    pub fn channels(&self) -> usize {
        self.lower.len()
    }

    /// Length of the flat control vector, `K·l`.
    pub fn control_dim(&self) -> usize {
        self.mesh * self.channels()
    }

    pub fn mesh_times(&self) -> Vec<f64> {
        let h = self.step();
        (0..=self.mesh).map(|j| j as f64 * h).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh < 2 {
            return Err(Error::usage(format!("mesh must be at least 2, got {}", self.mesh)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::usage(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::usage("need one (lower, upper) bound per control channel"));
        }
        if let Some(c) = (0..self.lower.len()).find(|&c| !(self.lower[c] <= self.upper[c])) {
            return Err(Error::usage(format!("control bounds inverted on channel {c}")));
        }
        let (d, l) = (self.state_dim(), self.channels());
        let p = (self.state_matrix)(0.0);
        let q = (self.control_matrix)(0.0);
        if p.shape() != (d, d) || q.shape() != (d, l) {
            return Err(Error::usage(format!(
                "P must be {d}x{d} and Q {d}x{l}, got {:?} and {:?}",
                p.shape(),
                q.shape()
            )));
        }
        Ok(())
    }

    fn check_controls(&self, z: &[f64]) -> Result<()> {
        if z.len() == self.control_dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.control_dim(), actual: z.len() })
        }
    }

    /// Forward Euler: `xⱼ₊₁ = xⱼ + h(P(tⱼ)xⱼ + Q(tⱼ)zⱼ)`. Returns `K + 1` states.
    pub fn simulate(&self, z: &[f64]) -> Result<Vec<DVector<f64>>> {
        self.check_controls(z)?;
        Ok(self.sweep_states(z))
    }

    fn sweep_states(&self, z: &[f64]) -> Vec<DVector<f64>> {
        let h = self.step();
        let l = self.channels();
        let mut xs = Vec::with_capacity(self.mesh + 1);
        let mut x = self.x0.clone();
        xs.push(x.clone());
        for j in 0..self.mesh {
            let t = j as f64 * h;
            let zj = DVector::from_column_slice(&z[j * l..(j + 1) * l]);
            let dx = (self.state_matrix)(t) * &x + (self.control_matrix)(t) * zj;
            x += h * dx;
            xs.push(x.clone());
        }
        xs
    }

    /// `T(z)ⱼ = Q(tⱼ)′vⱼ₊₁` with the discrete costate `v_K = ∇φ(x_K)`,
    /// `vⱼ = vⱼ₊₁ + hP(tⱼ)′vⱼ₊₁`. This is the gradient of `z ↦ φ(x_K(z))` in
    /// the mesh-weighted inner product.
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let h = self.step();
        let l = self.channels();
        let xs = self.sweep_states(z);
        let mut v = (self.terminal_grad)(&xs[self.mesh]);
        let mut g = vec![0.0; self.control_dim()];
        for j in (0..self.mesh).rev() {
            let t = j as f64 * h;
            let qv = (self.control_matrix)(t).transpose() * &v;
            g[j * l..(j + 1) * l].copy_from_slice(qv.as_slice());
            v = &v + h * ((self.state_matrix)(t).transpose() * &v);
        }
        g
    }

    /// `φ(x_K(z))`.
    pub fn objective(&self, z: &[f64]) -> Result<f64> {
        let xs = self.simulate(z)?;
        Ok((self.terminal_cost)(&xs[self.mesh]))
    }

    pub fn solution(&self, z: &[f64]) -> Result<ControlSolution> {
        let xs = self.simulate(z)?;
        let l = self.channels();
        Ok(ControlSolution {
            times: self.mesh_times(),
            controls: z.chunks(l).map(<[f64]>::to_vec).collect(),
            states: xs.iter().map(|x| x.as_slice().to_vec()).collect(),
            objective: (self.terminal_cost)(&xs[self.mesh]),
        })
    }

    /// Flat control taking `upper` before `switch` and `lower` after, per channel.
    pub fn bang_bang(&self, switch: f64) -> Vec<f64> {
        let h = self.step();
        (0..self.mesh)
            .flat_map(|j| {
                let t = j as f64 * h;
                (0..self.channels()).map(move |c| if t < switch { self.upper[c] } else { self.lower[c] })
            })
            .collect()
    }
}

/// `ẋ₁ = x₂`, `ẋ₂ = z` on `[0, 2]`, `x(0) = 0`, minimize `−x₁(2) + x₂(2)²`
/// over `z ∈ [−1, 1]`. The optimal control is `1` on `[0, 1.2)` and `−1`
/// afterwards.
pub fn p57_control_problem(mesh: usize) -> ControlProblem {
    ControlProblem {
        state_matrix: Arc::new(|_| DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])),
        control_matrix: Arc::new(|_| DMatrix::from_column_slice(2, 1, &[0.0, 1.0])),
        horizon: 2.0,
        mesh,
        x0: DVector::zeros(2),
        terminal_grad: Arc::new(|x| DVector::from_column_slice(&[-1.0, 2.0 * x[1]])),
        terminal_cost: Arc::new(|x| -x[0] + x[1] * x[1]),
        lower: vec![-1.0],
        upper: vec![1.0],
        inner_product: InnerProduct::MeshWeighted,
    }
}

/// Wraps the control problem as an inclusion `0 ∈ T(z) + N_Z(z)` on the flat
/// control vector. Default initials are `z ≡ 0` twice; no known solution.
pub fn make_control_problem(spec: &ControlProblem) -> Result<Problem> {
    spec.validate()?;
    let dim = spec.control_dim();
    let l = spec.channels();
    let lo = Vector::from_raw((0..dim).map(|i| spec.lower[i % l]).collect());
    let hi = Vector::from_raw((0..dim).map(|i| spec.upper[i % l]).collect());
    let model = spec.clone();
    let map = MonotoneMap::new(move |z: &Vector| Vector::from_raw(model.gradient(z)));
    let lipschitz = estimate_affine_lipschitz(&map, dim);
    let weight = match spec.inner_product {
        InnerProduct::MeshWeighted => spec.step(),
        InnerProduct::Euclidean => 1.0,
    };
    let label = format!("control-k{}", spec.mesh);
    Problem::new(label, map.with_lipschitz(lipschitz), ResolventOp::box_projection(lo, hi)?, (Vector::zeros(dim), Vector::zeros(dim)))?
        .with_metric_weight(weight)
}
