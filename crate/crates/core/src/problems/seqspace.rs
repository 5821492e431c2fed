use crate::error::{Error, Result};
use crate::space::{MonotoneMap, ResolventOp, Vector};

use super::Problem;

pub const DEFAULT_TRUNC_DIM: usize = 64;

const MIN_TRUNC_DIM: usize = 8;
const TAIL_BOUND: f64 = 1e-10;

/// Geometric starting sequences for the ℓ2 problem, as `(first, ratio)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqCase {
    IIa,
    IIb,
    IIc,
    IId,
}

impl SeqCase {
    pub const ALL: [SeqCase; 4] = [SeqCase::IIa, SeqCase::IIb, SeqCase::IIc, SeqCase::IId];

    fn geometry(self) -> [(f64, f64); 2] {
        match self {
            SeqCase::IIa => [(2.0, -0.5), (2.0 / 3.0, 1.0 / 6.0)],
            SeqCase::IIb => [(4.0, 0.25), (9.0, 1.0 / 3f64.sqrt())],
            SeqCase::IIc => [(4.0 / 3.0, 1.0 / 3.0), (-2.0, -0.5)],
            SeqCase::IId => [(-4.0, -0.25), (20.0, -0.2)],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SeqCase::IIa => "IIa",
            SeqCase::IIb => "IIb",
            SeqCase::IIc => "IIc",
            SeqCase::IId => "IId",
        }
    }

    /// ℓ2 norm of the entries beyond `dim` of either starting sequence.
    pub fn tail_norm(self, dim: usize) -> f64 {
        self.geometry()
            .iter()
            .map(|&(a, r)| a.abs() * r.abs().powi(dim as i32) / (1.0 - r * r).sqrt())
            .fold(0.0, f64::max)
    }
}

/// The anchor used with this problem's benchmark runs: `(3/2)(−1/2)^{i−1}`.
pub fn l2_anchor(dim: usize) -> Vector {
    Vector::geometric(dim, 1.5, -0.5)
}

/// ℓ2 problem truncated to `trunc_dim` coordinates: `S = 2I`,
/// `T(a)ᵢ = (aᵢ + |aᵢ|)/2`, `L = 1`, unique zero at the origin.
pub fn make_l2_problem(case: SeqCase, trunc_dim: usize) -> Result<Problem> {
    if trunc_dim < MIN_TRUNC_DIM {
        return Err(Error::usage(format!("trunc_dim must be at least {MIN_TRUNC_DIM}, got {trunc_dim}")));
    }
    let tail = case.tail_norm(trunc_dim);
    if tail > TAIL_BOUND {
        return Err(Error::usage(format!(
            "trunc_dim {trunc_dim} leaves a tail of norm {tail:.3e} in case {}; need <= {TAIL_BOUND:e}",
            case.label()
        )));
    }
    let [(a0, r0), (a1, r1)] = case.geometry();
    let initials = (Vector::geometric(trunc_dim, a0, r0), Vector::geometric(trunc_dim, a1, r1));
    let map = MonotoneMap::new(|a: &Vector| a.map(|x| (x + x.abs()) / 2.0)).with_lipschitz(1.0);
    Problem::new(format!("l2-case-{}", case.label().to_lowercase()), map, ResolventOp::scaled_identity(2.0), initials)?
        .with_solution(Vector::zeros(trunc_dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_part_map() {
        let p = make_l2_problem(SeqCase::IIa, 8).unwrap_err();
        assert!(matches!(p, Error::Usage(_)));
        let p = make_l2_problem(SeqCase::IIa, DEFAULT_TRUNC_DIM).unwrap();
        let mut w = vec![0.0; DEFAULT_TRUNC_DIM];
        w[0] = -1.0;
        w[1] = 2.0;
        let tw = p.map.eval(&Vector::new(w).unwrap());
        assert_eq!(&tw.as_slice()[..3], &[0.0, 2.0, 0.0]);
    }

    #[test]
    fn case_iia_second_initial() {
        let p = make_l2_problem(SeqCase::IIa, DEFAULT_TRUNC_DIM).unwrap();
        let w1 = &p.default_initials.1;
        for (x, want) in w1.iter().zip([2.0 / 3.0, 1.0 / 9.0, 1.0 / 54.0, 1.0 / 324.0]) {
            assert!((x - want).abs() < 1e-15);
        }
        assert_eq!(&p.default_initials.0.as_slice()[..3], &[2.0, -1.0, 0.5]);
    }

    #[test]
    fn origin_is_the_zero() {
        // 2a + max(a, 0) = 0 forces a = 0 coordinatewise
        for case in SeqCase::ALL {
            let p = make_l2_problem(case, DEFAULT_TRUNC_DIM).unwrap();
            assert_eq!(p.residual(&Vector::zeros(DEFAULT_TRUNC_DIM)), 0.0);
        }
    }

    #[test]
    fn residual_hand_value() {
        let p = make_l2_problem(SeqCase::IIa, DEFAULT_TRUNC_DIM).unwrap();
        let mut w = vec![0.0; DEFAULT_TRUNC_DIM];
        w[0] = 2.0;
        // w − Tw = 0, J(0) = 0, residual = ½·4
        assert_eq!(p.residual(&Vector::new(w).unwrap()), 2.0);
    }

    #[test]
    fn tail_check_rejects_short_truncations() {
        // the slowest ratio is 1/√3 in case IIb
        assert!(make_l2_problem(SeqCase::IIb, 40).is_err());
        assert!(make_l2_problem(SeqCase::IIa, 40).is_ok());
        assert!(SeqCase::IIb.tail_norm(DEFAULT_TRUNC_DIM) < TAIL_BOUND);
    }
}
