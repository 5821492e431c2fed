//! Self-adaptive step size shared by the adaptive solvers, the index
//! sequences (`σₙ`, `cₙ`, `θₙ`, `λₙ`) that parameterize them, and the
//! parameter-bound checks.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::space::Vector;

/// `‖Twₙ₊₁ − Twₙ‖` at or below this is treated as `Twₙ₊₁ = Twₙ`.
pub const EQUAL_IMAGE_EPS: f64 = 1e-30;

/// `(δₙ₋₁, δₙ)` at iteration `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizeState {
    pub delta_prev: f64,
    pub delta_curr: f64,
    pub n: usize,
}

impl StepSizeState {
    /// The state consumed by the first iteration: `(δ₀, δ₁)` at `n = 1`.
    pub fn new(delta0: f64, delta1: f64) -> Result<Self> {
        if !(delta0 > 0.0 && delta0.is_finite() && delta1 > 0.0 && delta1.is_finite()) {
            return Err(Error::usage(format!(
                "initial step sizes must be positive and finite (delta0={delta0}, delta1={delta1})"
            )));
        }
        Ok(StepSizeState { delta_prev: delta0, delta_curr: delta1, n: 1 })
    }

    /// Shift in `next` as `δₙ₊₁`.
    pub fn advance(self, next: f64) -> Self {
        StepSizeState { delta_prev: self.delta_curr, delta_curr: next, n: self.n + 1 }
    }
}

/// One adaptive step-size transition:
///
/// ```text
/// δₙ₊₁ = min{ r̄‖wₙ − wₙ₊₁‖ / ‖Twₙ − Twₙ₊₁‖, δₙ + cₙ }   if Twₙ ≠ Twₙ₊₁
///        δₙ + cₙ                                        otherwise
/// ```
pub fn update_step(
    state: StepSizeState,
    r_bar: f64,
    c_n: f64,
    w_curr: &Vector,
    w_next: &Vector,
    tw_curr: &Vector,
    tw_next: &Vector,
) -> Result<StepSizeState> {
    w_curr.check_dim(w_next)?;
    w_curr.check_dim(tw_curr)?;
    w_curr.check_dim(tw_next)?;
    let dw = w_curr.dist(w_next);
    let dtw = tw_curr.dist(tw_next);
    if !dw.is_finite() || !dtw.is_finite() {
        return Err(Error::NumericalFailure {
            iteration: state.n,
            detail: "non-finite norm in step-size update".into(),
        });
    }
    let capped = state.delta_curr + c_n;
    let next = if dtw <= EQUAL_IMAGE_EPS { capped } else { (r_bar * dw / dtw).min(capped) };
    if !(next.is_finite() && next > 0.0) {
        return Err(Error::NumericalFailure {
            iteration: state.n,
            detail: format!("step size became {next}"),
        });
    }
    Ok(state.advance(next))
}

/// A real sequence indexed by `n`, evaluated lazily.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSpec {
    /// `a / (b·n + c)`
    Rational { a: f64, b: f64, c: f64 },
    /// `(a·n + b) / (c·n + d)`
    Fractional { a: f64, b: f64, c: f64, d: f64 },
    /// `1 / (a·n + b)²`
    InverseSquare { a: f64, b: f64 },
    /// `1 / (a·n² + b)`
    InverseQuadratic { a: f64, b: f64 },
    Constant(f64),
    /// `values[n-1]` for `1 ≤ n ≤ len`, `values[0]` at `n = 0`, zero past the end.
    Table(Vec<f64>),
}

impl SequenceSpec {
    pub fn at(&self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            SequenceSpec::Rational { a, b, c } => a / (b * x + c),
            SequenceSpec::Fractional { a, b, c, d } => (a * x + b) / (c * x + d),
            SequenceSpec::InverseSquare { a, b } => {
                let q = a * x + b;
                1.0 / (q * q)
            }
            SequenceSpec::InverseQuadratic { a, b } => 1.0 / (a * x * x + b),
            SequenceSpec::Constant(v) => *v,
            SequenceSpec::Table(values) => match n {
                0 => values.first().copied().unwrap_or(0.0),
                n => values.get(n - 1).copied().unwrap_or(0.0),
            },
        }
    }

    /// Whether `Σ aₙ` is finite for this closed form.
    pub fn is_summable(&self) -> bool {
        match self {
            SequenceSpec::Rational { a, .. } => *a == 0.0,
            SequenceSpec::Fractional { a, b, .. } => *a == 0.0 && *b == 0.0,
            SequenceSpec::InverseSquare { a, .. } => *a != 0.0,
            SequenceSpec::InverseQuadratic { a, .. } => *a != 0.0,
            SequenceSpec::Constant(v) => *v == 0.0,
            SequenceSpec::Table(_) => true,
        }
    }

    fn first_n(&self, count: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (1..=count).map(move |n| (n, self.at(n)))
    }

    /// Checks `aₙ ∈ (0, 1)` on the first `probe` indices.
    pub(crate) fn check_open_unit(&self, name: &str, probe: usize, out: &mut Vec<String>) {
        if let Some((n, v)) = self.first_n(probe).find(|(_, v)| !(*v > 0.0 && *v < 1.0)) {
            out.push(format!("{name}_{n} = {v} must lie in (0, 1)"));
        }
    }

    /// Checks `aₙ ≥ 0` on the first `probe` indices and summability.
    pub(crate) fn check_summable_nonneg(&self, name: &str, probe: usize, out: &mut Vec<String>) {
        if let Some((n, v)) = self.first_n(probe).find(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
            out.push(format!("{name}_{n} = {v} must be nonnegative"));
        }
        if !self.is_summable() {
            out.push(format!("{name} = {self} is not summable"));
        }
    }

    pub(crate) fn check_positive(&self, name: &str, probe: usize, out: &mut Vec<String>) {
        if let Some((n, v)) = (0..=probe).map(|n| (n, self.at(n))).find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            out.push(format!("{name}_{n} = {v} must be positive"));
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Rational { a, b, c } => write!(f, "rational({a}, {b}, {c})"),
            SequenceSpec::Fractional { a, b, c, d } => write!(f, "fractional({a}, {b}, {c}, {d})"),
            SequenceSpec::InverseSquare { a, b } => write!(f, "inverse_square({a}, {b})"),
            SequenceSpec::InverseQuadratic { a, b } => write!(f, "inverse_quadratic({a}, {b})"),
            SequenceSpec::Constant(v) => write!(f, "constant({v})"),
            SequenceSpec::Table(values) => {
                f.write_str("table(")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses a real literal, accepting simple fractions such as `2/201`.
pub fn parse_real(text: &str) -> Result<f64> {
    let text = text.trim();
    let bad = || Error::usage(format!("not a number: {text:?}"));
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            num / den
        }
        None => text.parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Splits `name(a, b, ...)` into its name and argument list.
pub(crate) fn split_call(text: &str) -> Option<(&str, Vec<&str>)> {
    let text = text.trim();
    let open = text.find('(')?;
    let inner = text.strip_suffix(')')?.get(open + 1..)?;
    let args = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').map(str::trim).collect() };
    Some((text[..open].trim(), args))
}

impl FromStr for SequenceSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let Some((name, args)) = split_call(text) else {
            // a bare number is a constant sequence
            return parse_real(text).map(SequenceSpec::Constant);
        };
        let nums = args.iter().map(|a| parse_real(a)).collect::<Result<Vec<_>>>()?;
        let arity = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::usage(format!("{name} takes {k} arguments, got {}", nums.len())))
            }
        };
        match name {
            "rational" => arity(3).map(|_| SequenceSpec::Rational { a: nums[0], b: nums[1], c: nums[2] }),
            "fractional" => {
                arity(4).map(|_| SequenceSpec::Fractional { a: nums[0], b: nums[1], c: nums[2], d: nums[3] })
            }
            "inverse_square" => arity(2).map(|_| SequenceSpec::InverseSquare { a: nums[0], b: nums[1] }),
            "inverse_quadratic" => arity(2).map(|_| SequenceSpec::InverseQuadratic { a: nums[0], b: nums[1] }),
            "constant" => arity(1).map(|_| SequenceSpec::Constant(nums[0])),
            "table" if !nums.is_empty() => Ok(SequenceSpec::Table(nums)),
            _ => Err(Error::usage(format!("unknown sequence kind {name:?}"))),
        }
    }
}

/// Outcome of [`validate_parameters`]: one message per violated bound.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `β̄ ∈ (0, ¼)`, `r̄ ∈ (β̄, (1−2β̄)/2)`, `θ̄ ∈ [0, min{β̄/2, (½−r̄)/2})`
/// and `κ̄ ∈ [0, ½)`.
pub fn validate_parameters(r_bar: f64, beta_bar: f64, theta_bar: f64, kappa_bar: f64) -> ValidationReport {
    let mut violations = Vec::new();
    if !(beta_bar > 0.0 && beta_bar < 0.25) {
        violations.push(format!("beta_bar = {beta_bar} must lie in (0, 0.25)"));
    }
    let r_hi = (1.0 - 2.0 * beta_bar) / 2.0;
    if !(r_bar > beta_bar) {
        violations.push(format!("r_bar = {r_bar} must exceed beta_bar = {beta_bar}"));
    }
    if !(r_bar < r_hi) {
        violations.push(format!("r_bar = {r_bar} must be below (1 - 2*beta_bar)/2 = {r_hi}"));
    }
    let theta_hi = (beta_bar / 2.0).min((0.5 - r_bar) / 2.0);
    if !(theta_bar >= 0.0 && theta_bar < theta_hi) {
        violations.push(format!(
            "theta_bar = {theta_bar} must lie in [0, min(beta_bar/2, (1/2 - r_bar)/2)) = [0, {theta_hi})"
        ));
    }
    if !(0.0..0.5).contains(&kappa_bar) {
        violations.push(format!("kappa_bar = {kappa_bar} must lie in [0, 0.5)"));
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn equal_images_take_the_cap() {
        let s = StepSizeState::new(0.2, 0.3).unwrap();
        let tw = v(&[1.0, 1.0]);
        let next = update_step(s, 0.3, 0.1, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), &tw, &tw).unwrap();
        assert!((next.delta_curr - 0.4).abs() < 1e-15);
        assert_eq!(next.delta_prev, 0.3);
        assert_eq!(next.n, 2);
    }

    #[test]
    fn ratio_branch_wins() {
        // ‖Δw‖ = 1, ‖ΔTw‖ = 2
        let s = StepSizeState::new(0.2, 0.3).unwrap();
        let next =
            update_step(s, 0.3, 0.01, &v(&[0.0]), &v(&[1.0]), &v(&[0.0]), &v(&[2.0])).unwrap();
        assert!((next.delta_curr - 0.15).abs() < 1e-15);
    }

    #[test]
    fn cap_branch_wins() {
        // ‖Δw‖ = 10, ‖ΔTw‖ = 1
        let s = StepSizeState::new(0.2, 0.3).unwrap();
        let next =
            update_step(s, 0.3, 0.01, &v(&[0.0]), &v(&[10.0]), &v(&[0.0]), &v(&[1.0])).unwrap();
        assert!((next.delta_curr - 0.31).abs() < 1e-15);
    }

    #[test]
    fn non_finite_norm_is_a_numerical_failure() {
        let s = StepSizeState { delta_prev: 1.0, delta_curr: 1.0, n: 7 };
        let huge = Vector::from_raw(vec![f64::INFINITY]);
        let err = update_step(s, 0.3, 0.0, &v(&[0.0]), &huge, &v(&[0.0]), &v(&[1.0])).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure { iteration: 7, .. }));
    }

    #[test]
    fn rejects_nonpositive_initial_steps() {
        assert!(StepSizeState::new(0.0, 0.3).is_err());
        assert!(StepSizeState::new(0.1, -1.0).is_err());
    }

    #[test]
    fn parameter_bounds() {
        assert!(validate_parameters(0.25, 0.2, 0.04, 0.0).is_valid());
        let bad = validate_parameters(0.35, 0.2, 0.0, 0.0);
        assert_eq!(bad.violations.len(), 1);
        assert!(bad.violations[0].contains("r_bar"), "{:?}", bad.violations);
        for (r, b) in [(0.3, 0.1), (0.15, 0.1), (0.25, 0.2)] {
            assert!(validate_parameters(r, b, 0.0, 0.0).is_valid());
        }
        assert!(!validate_parameters(0.25, 0.2, 0.1, 0.0).is_valid());
        assert!(!validate_parameters(0.25, 0.2, 0.0, 0.5).is_valid());
        assert!(!validate_parameters(0.25, 0.3, 0.0, 0.0).is_valid());
    }

    #[test]
    fn sequences_evaluate_closed_forms() {
        let sigma: SequenceSpec = "rational(0.005, 3, 25000)".parse().unwrap();
        assert_eq!(sigma.at(1), 0.005 / 25003.0);
        let c: SequenceSpec = "inverse_quadratic(1, 1)".parse().unwrap();
        assert_eq!(c.at(3), 0.1);
        let c2: SequenceSpec = "inverse_square(10, 77)".parse().unwrap();
        assert_eq!(c2.at(1), 1.0 / (87.0 * 87.0));
        let lam: SequenceSpec = "fractional(1, 1, 15, 10)".parse().unwrap();
        assert_eq!(lam.at(0), 0.1);
        assert_eq!(lam.at(1), 2.0 / 25.0);
        assert_eq!("constant(2/201)".parse::<SequenceSpec>().unwrap().at(9), 2.0 / 201.0);
        assert_eq!("0.5".parse::<SequenceSpec>().unwrap(), SequenceSpec::Constant(0.5));
        let t: SequenceSpec = "table(0.1, 0.2)".parse().unwrap();
        assert_eq!((t.at(0), t.at(1), t.at(2), t.at(3)), (0.1, 0.1, 0.2, 0.0));
        assert!("bogus(1)".parse::<SequenceSpec>().is_err());
        assert!("rational(1, 2)".parse::<SequenceSpec>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in ["rational(0.005, 3, 25000)", "inverse_square(1, 100)", "table(0.1, 0.2)", "fractional(2, 1, 111, 100)"] {
            let s: SequenceSpec = text.parse().unwrap();
            assert_eq!(s.to_string().parse::<SequenceSpec>().unwrap(), s);
        }
    }

    #[test]
    fn summability_by_kind() {
        assert!(SequenceSpec::InverseSquare { a: 1.0, b: 100.0 }.is_summable());
        assert!(SequenceSpec::InverseQuadratic { a: 1.0, b: 1.0 }.is_summable());
        assert!(SequenceSpec::Constant(0.0).is_summable());
        assert!(!SequenceSpec::Constant(0.1).is_summable());
        assert!(!SequenceSpec::Rational { a: 1.0, b: 1.0, c: 1.0 }.is_summable());
        assert!(!SequenceSpec::Fractional { a: 1.0, b: 1.0, c: 15.0, d: 10.0 }.is_summable());
    }
}
