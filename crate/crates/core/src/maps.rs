//! The odd square-root Lorenz family `f(x) = sgn(x) (c |x|^{1/2} - 1)`.
//!
//! For `x > 0` the right branch is `c sqrt(x) - 1`, which runs from `-1`
//! (as `x -> 0+`) up to `c - 1` at `x = 1`; the left branch is its odd
//! reflection. The second iterate has a pair of fixed points `±a` with
//! `f(a) = -a`, and `b ∈ (0, a)` is the point with `f²(b) = -a`.

use crate::error::{domain, Error, Result};

/// Residual threshold for the closed-form constants.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// A one-dimensional map with a singularity at the origin.
///
/// The axiom validator is written against this trait so that it can be
/// pointed at maps other than the square-root family.
pub trait IntervalMap {
    fn eval(&self, x: f64) -> Result<f64>;
    fn derivative(&self, x: f64) -> Result<f64>;
    /// Claimed uniform lower bound for `f'` away from the origin.
    fn derivative_lower_bound(&self) -> f64;
}

/// The bare square-root branch formula, without derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtBranch {
    c: f64,
}

impl SqrtBranch {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 1.0 && c <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "branch coefficient c = {c} must lie in (1, 2]"
            )));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::Singularity);
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.c * x.sqrt() - 1.0
        } else {
            -(self.c * (-x).sqrt() - 1.0)
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::Singularity);
        }
        Ok(self.c / (2.0 * x.abs().sqrt()))
    }

    /// Inverse of the right branch: `((y + 1) / c)²` for `y ∈ (-1, c - 1]`.
    pub fn invert_right(&self, y: f64) -> Result<f64> {
        if !(y > -1.0 && y <= self.c - 1.0) {
            return Err(domain(
                "right-branch inverse",
                y,
                format!("(-1, {}]", self.c - 1.0),
            ));
        }
        Ok(self.invert_right_unchecked(y))
    }

    #[inline]
    pub(crate) fn invert_right_unchecked(&self, y: f64) -> f64 {
        let s = (y + 1.0) / self.c;
        s * s
    }

    pub fn alpha(&self) -> f64 {
        self.c / 2.0
    }
}

impl IntervalMap for SqrtBranch {
    fn eval(&self, x: f64) -> Result<f64> {
        SqrtBranch::eval(self, x)
    }
    fn derivative(&self, x: f64) -> Result<f64> {
        SqrtBranch::derivative(self, x)
    }
    fn derivative_lower_bound(&self) -> f64 {
        self.alpha()
    }
}

/// Closed-form `(a, b)` for coefficient `c`.
///
/// `a = t²` with `t` the positive root of `t² + c t - 1 = 0`, and
/// `b = s²` with `s = (1 - ((1 + a)/c)²) / c`. Fails when `b` does not
/// exist in `(0, a)`, which happens for `c <= 1 + a(c)` (about 1.2956).
pub fn derive_constants(c: f64) -> Result<(f64, f64)> {
    let branch = SqrtBranch::new(c)?;
    let t = 2.0 / (c + (c * c + 4.0).sqrt());
    let a = t * t;
    let u = (1.0 + a) / c;
    let s = (1.0 - u * u) / c;
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "c = {c}: no b in (0, a) with f²(b) = -a (needs c > 1 + a = {})",
            1.0 + a
        )));
    }
    let b = s * s;
    if !(b < a) {
        return Err(Error::InvalidParameter(format!(
            "c = {c}: b = {b} is not below a = {a}"
        )));
    }
    let fa = branch.eval_unchecked(a);
    let f2b = branch.eval_unchecked(branch.eval_unchecked(b));
    if (fa + a).abs() > RESIDUAL_TOL || (f2b + a).abs() > RESIDUAL_TOL {
        return Err(Error::InvalidParameter(format!(
            "c = {c}: constant residuals too large (f(a)+a = {:e}, f²(b)+a = {:e})",
            fa + a,
            f2b + a
        )));
    }
    Ok((a, b))
}

/// The square-root Lorenz map together with its derived constants.
///
/// Construction rejects coefficients for which `b` does not exist or for
/// which `f(1) > -f(b)` fails. `c = 2` is accepted even though `f(1) = 1`
/// sits on the boundary of the Lorenz axioms; see [`LorenzBranchMap::is_boundary_case`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzBranchMap {
    branch: SqrtBranch,
    a: f64,
    b: f64,
}

impl LorenzBranchMap {
    pub fn new(c: f64) -> Result<Self> {
        let branch = SqrtBranch::new(c)?;
        let (a, b) = derive_constants(c)?;
        let f1 = branch.eval_unchecked(1.0);
        let minus_fb = -branch.eval_unchecked(b);
        if !(f1 > minus_fb) {
            return Err(Error::InvalidParameter(format!(
                "c = {c}: f(1) = {f1} must exceed -f(b) = {minus_fb}"
            )));
        }
        Ok(Self { branch, a, b })
    }

    pub fn branch(&self) -> SqrtBranch {
        self.branch
    }
    pub fn c(&self) -> f64 {
        self.branch.c
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn alpha(&self) -> f64 {
        self.branch.alpha()
    }

    /// True for `c = 2`, where `f(1) = 1` violates the strict axiom `f(1) < 1`.
    pub fn is_boundary_case(&self) -> bool {
        self.branch.eval_unchecked(1.0) >= 1.0
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.branch.eval(x)
    }
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.branch.derivative(x)
    }
    pub fn invert_right(&self, y: f64) -> Result<f64> {
        self.branch.invert_right(y)
    }
}

impl IntervalMap for LorenzBranchMap {
    fn eval(&self, x: f64) -> Result<f64> {
        self.branch.eval(x)
    }
    fn derivative(&self, x: f64) -> Result<f64> {
        self.branch.derivative(x)
    }
    fn derivative_lower_bound(&self) -> f64 {
        self.alpha()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub pass: bool,
    /// Worst observed margin; negative means violated.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AxiomReport {
    pub grid_size: usize,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const LIMIT_PROBE: f64 = 1e-14;
const LIMIT_TOL: f64 = 1e-6;
const BLOWUP_PROBE: f64 = 1e-12;
const BLOWUP_MIN: f64 = 1e5;
const SYMMETRY_TOL: f64 = 1e-14;

/// Grid check of the Lorenz-map axioms: endpoint images inside the
/// interval, one-sided limits `∓1` at the origin, the uniform derivative
/// bound, derivative blow-up at the origin, odd symmetry and per-branch
/// monotonicity. Never fails; violations show up as negative margins.
pub fn validate_lorenz_axioms<M: IntervalMap + ?Sized>(map: &M, grid_size: usize) -> AxiomReport {
    let grid_size = grid_size.max(2);
    let grid: Vec<f64> = (1..=grid_size)
        .map(|j| j as f64 / grid_size as f64)
        .collect();
    let ev = |x: f64| map.eval(x).unwrap_or(f64::NAN);
    let der = |x: f64| map.derivative(x).unwrap_or(f64::NAN);

    let mut checks = Vec::with_capacity(7);
    let margin = 1.0 - ev(1.0);
    checks.push(AxiomCheck {
        name: "f(1) < 1",
        pass: margin > 0.0,
        margin,
    });
    let margin = ev(-1.0) + 1.0;
    checks.push(AxiomCheck {
        name: "f(-1) > -1",
        pass: margin > 0.0,
        margin,
    });

    let right = (ev(LIMIT_PROBE) + 1.0).abs();
    let left = (ev(-LIMIT_PROBE) - 1.0).abs();
    let margin = LIMIT_TOL - right.max(left);
    checks.push(AxiomCheck {
        name: "one-sided limits -/+1 at 0",
        pass: margin >= 0.0,
        margin,
    });

    let alpha = map.derivative_lower_bound();
    let margin = grid
        .iter()
        .flat_map(|&x| [der(x), der(-x)])
        .map(|d| d - alpha)
        .fold(f64::INFINITY, f64::min);
    checks.push(AxiomCheck {
        name: "f' >= alpha > 0",
        pass: alpha > 0.0 && margin >= 0.0,
        margin,
    });

    let blow = der(BLOWUP_PROBE).min(der(-BLOWUP_PROBE));
    let margin = blow - BLOWUP_MIN;
    checks.push(AxiomCheck {
        name: "f' -> +inf at 0",
        pass: margin > 0.0,
        margin,
    });

    let worst = grid
        .iter()
        .map(|&x| (ev(x) + ev(-x)).abs())
        .fold(0.0, f64::max);
    let margin = SYMMETRY_TOL - worst;
    checks.push(AxiomCheck {
        name: "odd symmetry",
        pass: margin >= 0.0,
        margin,
    });

    let values: Vec<f64> = grid.iter().map(|&x| ev(x)).collect();
    let mut margin = f64::INFINITY;
    for w in values.windows(2) {
        margin = margin.min(w[1] - w[0]);
    }
    let neg: Vec<f64> = grid.iter().rev().map(|&x| ev(-x)).collect();
    for w in neg.windows(2) {
        margin = margin.min(w[1] - w[0]);
    }
    checks.push(AxiomCheck {
        name: "strictly increasing per branch",
        pass: margin > 0.0,
        margin,
    });

    AxiomReport { grid_size, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_examples() {
        let two = SqrtBranch::new(2.0).unwrap();
        assert_eq!(two.eval(1.0).unwrap(), 1.0);
        assert_eq!(two.eval(0.25).unwrap(), 0.0);
        let m = SqrtBranch::new(1.8).unwrap();
        assert_abs_diff_eq!(m.eval(-1.0).unwrap(), -0.8, epsilon = 1e-15);
        assert_eq!(m.eval(0.0), Err(Error::Singularity));
    }

    #[test]
    fn derivative_examples() {
        let two = SqrtBranch::new(2.0).unwrap();
        assert_abs_diff_eq!(two.derivative(0.25).unwrap(), 2.0, epsilon = 1e-15);
        assert!(two.derivative(1e-12).unwrap() > 1e5);
        let m = SqrtBranch::new(1.8).unwrap();
        assert_abs_diff_eq!(m.derivative(1.0).unwrap(), 0.9, epsilon = 1e-15);
        assert!(m.derivative(0.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let two = SqrtBranch::new(2.0).unwrap();
        assert_eq!(two.invert_right(0.0).unwrap(), 0.25);
        assert_eq!(two.invert_right(1.0).unwrap(), 1.0);
        let m = SqrtBranch::new(1.8).unwrap();
        assert_abs_diff_eq!(
            m.invert_right(-0.8).unwrap(),
            (0.2f64 / 1.8).powi(2),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(m.invert_right(-0.8).unwrap(), 0.0123456790, epsilon = 1e-10);
        assert!(m.invert_right(-1.0).is_err());
        assert!(m.invert_right(0.81).is_err());
    }

    #[test]
    fn constants_c2() {
        let (a, b) = derive_constants(2.0).unwrap();
        assert_abs_diff_eq!(a, 3.0 - 2.0 * 2f64.sqrt(), epsilon = 1e-15);
        assert!(0.0 < b && b < a);
    }

    #[test]
    fn constants_c18() {
        let m = LorenzBranchMap::new(1.8).unwrap();
        assert_abs_diff_eq!(m.a(), 0.198345, epsilon = 5e-6);
        assert_abs_diff_eq!(m.b(), 0.095681, epsilon = 5e-6);
        let minus_fb = -m.eval(m.b()).unwrap();
        assert_abs_diff_eq!(minus_fb, ((1.0 + m.a()) / 1.8).powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(minus_fb, 0.443219, epsilon = 5e-6);
        assert!(m.eval(1.0).unwrap() > minus_fb);
        assert!(!m.is_boundary_case());
    }

    #[test]
    fn c2_is_boundary_but_accepted() {
        let m = LorenzBranchMap::new(2.0).unwrap();
        assert!(m.is_boundary_case());
    }

    #[test]
    fn rejected_coefficients() {
        // b does not exist
        assert!(matches!(
            derive_constants(1.2),
            Err(Error::InvalidParameter(_))
        ));
        // b exists but f(1) <= -f(b)
        assert!(derive_constants(1.5).is_ok());
        assert!(matches!(
            LorenzBranchMap::new(1.5),
            Err(Error::InvalidParameter(_))
        ));
        assert!(SqrtBranch::new(1.0).is_err());
        assert!(SqrtBranch::new(2.5).is_err());
    }

    #[test]
    fn axioms_c18_pass() {
        let m = LorenzBranchMap::new(1.8).unwrap();
        let report = validate_lorenz_axioms(&m, 10_000);
        assert!(report.all_pass(), "{report:#?}");
    }

    #[test]
    fn axioms_c2_flags_f1() {
        let m = LorenzBranchMap::new(2.0).unwrap();
        let report = validate_lorenz_axioms(&m, 1000);
        let f1 = report.check("f(1) < 1").unwrap();
        assert!(!f1.pass);
        assert_eq!(f1.margin, 0.0);
        assert_eq!(report.checks.iter().filter(|c| !c.pass).count(), 2); // f(1), f(-1)
    }

    #[test]
    fn axioms_small_c() {
        let m = SqrtBranch::new(1.0001).unwrap();
        assert_abs_diff_eq!(m.alpha(), 0.5, epsilon = 1e-4);
        assert!(validate_lorenz_axioms(&m, 1000).all_pass());
    }

    #[test]
    fn axioms_reject_non_expanding_map() {
        struct Flat;
        impl IntervalMap for Flat {
            fn eval(&self, x: f64) -> Result<f64> {
                Ok(0.5 * x)
            }
            fn derivative(&self, _: f64) -> Result<f64> {
                Ok(0.5)
            }
            fn derivative_lower_bound(&self) -> f64 {
                0.5
            }
        }
        let r = validate_lorenz_axioms(&Flat, 100);
        assert!(!r.check("one-sided limits -/+1 at 0").unwrap().pass);
        assert!(!r.check("f' -> +inf at 0").unwrap().pass);
        assert!(r.check("odd symmetry").unwrap().pass);
    }
}
