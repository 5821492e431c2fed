//! Anchored forward-reflected-backward splitting for monotone inclusions
//! `0 ∈ (S + T)w`, where `T` is monotone and Lipschitz and `S` is maximal
//! monotone with a computable resolvent.
//!
//! The crate is layered bottom-up:
//!
//! - [`space`]: dense vectors, monotone maps and resolvents.
//! - [`stepsize`]: the self-adaptive step size and index sequences.
//! - [`solvers`]: the iteration schemes and the run driver.
//! - [`problems`]: benchmark problem constructors.
//! - [`harness`]: experiment specs, reports and CSV output used by the CLI.
//!
//! ```
//! use frab::problems::{make_r3_problem, R3Case};
//! use frab::solvers::{run, Algorithm, SolverConfig};
//! use frab::space::Vector;
//!
//! let problem = make_r3_problem(R3Case::Ia);
//! let mut cfg = SolverConfig::new(Algorithm::FrabAdaptive);
//! cfg.anchor = Some(Vector::new(vec![2.0, 1.0, -6.0]).unwrap());
//! cfg.tol = 1e-10;
//! let record = run(&problem, &cfg).unwrap();
//! assert!(record.final_iterate.iter().zip([1.0, 0.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-4));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod harness;
pub mod problems;
pub mod solvers;
pub mod space;
pub mod stepsize;

pub use error::{Error, Result};
