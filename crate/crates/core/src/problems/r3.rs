use crate::space::{MonotoneMap, ResolventOp, Vector};

use super::Problem;

/// Starting pairs `(w₀, w₁)` for the ℓ1-regularized quadratic in R³.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R3Case {
    Ia,
    Ib,
}

impl R3Case {
    pub fn initials(self) -> (Vector, Vector) {
        let (a, b) = match self {
            R3Case::Ia => ([5.0, 1.0, -4.0], [20.0, 4.0, 7.0]),
            R3Case::Ib => ([-7.0, 10.0, 3.0], [90.0, -3.0, -4.0]),
        };
        (Vector::from_raw(a.to_vec()), Vector::from_raw(b.to_vec()))
    }

    pub fn label(self) -> &'static str {
        match self {
            R3Case::Ia => "Ia",
            R3Case::Ib => "Ib",
        }
    }
}

/// `min ‖w‖² + ⟨(−3, 1, −3), w⟩ + ‖w‖₁` over R³: `T(w) = 2w + (−3, 1, −3)`
/// with `L = 2`, `S = ∂‖·‖₁`, unique minimizer `(1, 0, 1)`.
pub fn make_r3_problem(case: R3Case) -> Problem {
    let offset = Vector::from_raw(vec![-3.0, 1.0, -3.0]);
    Problem::new(
        format!("r3-case-{}", case.label().to_lowercase()),
        MonotoneMap::affine(2.0, offset),
        ResolventOp::soft_threshold(1.0),
        case.initials(),
    )
    .and_then(|p| p.with_solution(Vector::from_raw(vec![1.0, 0.0, 1.0])))
    .expect("fixed data has consistent dimensions")
}
