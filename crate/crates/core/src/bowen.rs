//! Surgery on the Lorenz map so that its second iterate is a fat-horseshoe
//! base map.
//!
//! The base map `B : I_0 = [b, a] -> [-a, a]` is built on the interval
//! tree by the address shift `I_{0w} -> I_w`. On the Cantor set it doubles
//! length; each source gap `I*_{0w}` (level `n + 1`) is carried onto the
//! target gap `I*_w` (level `n`) by a diffeo with derivative profile
//!
//! ```text
//! φ(t) = 2 + 2 (s_n - 2) sin²(π t),    s_n = 2 β_n / β_{n+1},
//! ```
//!
//! where `t ∈ [0, 1]` is the normalized source coordinate. The profile
//! equals 2 at both gap endpoints and averages to `s_n`.
//!
//! The modified Lorenz map keeps the analytic branches except on
//! `[f(b), -a]`, where it becomes `h = B ∘ (f|_{[b,a]})^{-1}`, and on
//! `[a, -f(b)]`, where it is the odd reflection `x ↦ -h(-x)`. Then
//! `f² = B` on `[b, a]` identically, and `f'(f(x)) f'(x) = B'(x)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cantor::{CantorConstruction, Interval, Word, MAX_DEPTH};
use crate::error::{domain, Error, Result};
use crate::maps::LorenzBranchMap;

/// Cell size below which `B` is evaluated by proportional interpolation.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Deepest gap level accepted by [`BowenSystem::verify_surgery`].
pub const MAX_SURGERY_LEVEL: usize = 14;
/// Grid size (per branch) for the continuity/monotonicity sweep.
pub const MONOTONE_GRID: usize = 100_000;

const DERIVATIVE_TOL: f64 = 1e-9;
pub const SPLICE_TOL: f64 = 1e-10;
const GAP_SAMPLES: usize = 16;
const SLOP: f64 = 1e-13;

/// The diffeo carrying a level-`n+1` source gap onto a level-`n` target gap,
/// in normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapDiffeo {
    /// Target level `n`.
    pub level: usize,
    /// Mean slope `s_n`.
    pub slope: f64,
}

impl GapDiffeo {
    pub fn new(cc: &CantorConstruction, level: usize) -> Self {
        Self {
            level,
            slope: cc.beta().doubling_slope(level),
        }
    }

    /// `φ(t)`, the derivative of the diffeo in original coordinates.
    pub fn profile(&self, t: f64) -> f64 {
        let s = (PI * t).sin();
        2.0 + 2.0 * (self.slope - 2.0) * s * s
    }

    /// Normalized image position `∫_0^t φ / s_n`, increasing from 0 to 1.
    pub fn cumulative(&self, t: f64) -> f64 {
        let integral = 2.0 * t + (self.slope - 2.0) * (t - (2.0 * PI * t).sin() / (2.0 * PI));
        integral / self.slope
    }

    /// Inverse of [`GapDiffeo::cumulative`] by safeguarded Newton.
    pub fn inverse_cumulative(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut t = u;
        for _ in 0..100 {
            let r = self.cumulative(t) - u;
            if r == 0.0 {
                return t;
            }
            if r > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            let step = r * self.slope / self.profile(t);
            let mut next = t - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-17 {
                return next;
            }
            t = next;
        }
        t
    }

    /// `sup |φ - 2| = 2 (s_n - 2)`.
    pub fn sup_deviation(&self) -> f64 {
        2.0 * (self.slope - 2.0)
    }
}

enum Hit {
    /// Point inside a source gap: normalized coordinate, target gap, diffeo.
    Gap {
        t: f64,
        target: Interval,
        diffeo: GapDiffeo,
    },
    /// Descent stopped on a small cell.
    Cell { source: Interval, target: Interval },
}

/// Base map, splice and modified Lorenz map.
#[derive(Debug, Clone)]
pub struct BowenSystem {
    map: LorenzBranchMap,
    cc: CantorConstruction,
    tol: f64,
    /// `f(b)` for the analytic branch (negative).
    fb: f64,
}

/// Pairs the Lorenz map with the Cantor construction built from its constants.
pub fn build_base_map(map: LorenzBranchMap, cc: CantorConstruction) -> Result<BowenSystem> {
    BowenSystem::new(map, cc, DEFAULT_TOL)
}

impl BowenSystem {
    pub fn new(map: LorenzBranchMap, cc: CantorConstruction, tol: f64) -> Result<Self> {
        if (cc.a() - map.a()).abs() > 1e-15 || (cc.b() - map.b()).abs() > 1e-15 {
            return Err(Error::InvalidParameter(
                "Cantor construction was built from different constants than the map".into(),
            ));
        }
        if !(tol >= 1e-12) {
            return Err(domain("base-map tolerance", tol, "[1e-12, inf)"));
        }
        let fb = map.branch().eval_unchecked(map.b());
        Ok(Self { map, cc, tol, fb })
    }

    pub fn map(&self) -> &LorenzBranchMap {
        &self.map
    }
    pub fn construction(&self) -> &CantorConstruction {
        &self.cc
    }
    pub fn a(&self) -> f64 {
        self.map.a()
    }
    pub fn b(&self) -> f64 {
        self.map.b()
    }
    /// Analytic `f(b)`.
    pub fn fb(&self) -> f64 {
        self.fb
    }
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn base_domain(&self) -> Interval {
        Interval::new(self.b(), self.a())
    }

    fn check_base_arg(&self, x: f64) -> Result<f64> {
        let (b, a) = (self.b(), self.a());
        if !(x >= b - SLOP && x <= a + SLOP) {
            return Err(domain("base map argument", x, format!("[{b}, {a}]")));
        }
        Ok(x.clamp(b, a))
    }

    fn descend(&self, x: f64, tol: f64) -> Hit {
        let cc = &self.cc;
        let mut target = cc.root();
        let mut source = cc.child(target, 0, 0);
        for level in 0..MAX_DEPTH {
            let gap = cc.gap_of(source, level + 1);
            if gap.contains(x) {
                let t = ((x - gap.lo) / gap.len()).clamp(0.0, 1.0);
                return Hit::Gap {
                    t,
                    target: cc.gap_of(target, level),
                    diffeo: GapDiffeo::new(cc, level),
                };
            }
            if source.len() < tol {
                break;
            }
            let letter = if x > gap.hi { 0 } else { 1 };
            source = cc.child(source, level + 1, letter);
            target = cc.child(target, level, letter);
        }
        Hit::Cell { source, target }
    }

    /// `B(x)` with the default tolerance.
    pub fn eval_base(&self, x: f64) -> Result<f64> {
        self.eval_base_tol(x, self.tol)
    }

    pub fn eval_base_tol(&self, x: f64, tol: f64) -> Result<f64> {
        let x = self.check_base_arg(x)?;
        let tol = tol.max(1e-12);
        Ok(match self.descend(x, tol) {
            Hit::Gap { t, target, diffeo } => target.lo + target.len() * diffeo.cumulative(t),
            Hit::Cell { source, target } => {
                target.lo + (x - source.lo) / source.len() * target.len()
            }
        })
    }

    /// `B'(x)`: the gap profile inside gaps, 2 on the Cantor set.
    pub fn eval_base_derivative(&self, x: f64) -> Result<f64> {
        self.eval_base_derivative_tol(x, self.tol)
    }

    pub fn eval_base_derivative_tol(&self, x: f64, tol: f64) -> Result<f64> {
        let x = self.check_base_arg(x)?;
        Ok(match self.descend(x, tol.max(1e-12)) {
            Hit::Gap { t, diffeo, .. } => diffeo.profile(t),
            Hit::Cell { .. } => 2.0,
        })
    }

    /// `B^{-1}(y)` for `y ∈ [-a, a]`.
    pub fn base_inverse(&self, y: f64) -> Result<f64> {
        let a = self.a();
        if !(y.abs() <= a + SLOP) {
            return Err(domain(
                "base-map inverse argument",
                y,
                format!("[-{a}, {a}]"),
            ));
        }
        let y = y.clamp(-a, a);
        let cc = &self.cc;
        let mut target = cc.root();
        let mut source = cc.child(target, 0, 0);
        for level in 0..MAX_DEPTH {
            let tgap = cc.gap_of(target, level);
            if tgap.contains(y) {
                let sgap = cc.gap_of(source, level + 1);
                let u = (y - tgap.lo) / tgap.len();
                let t = GapDiffeo::new(cc, level).inverse_cumulative(u);
                return Ok(sgap.lo + t * sgap.len());
            }
            if source.len() < self.tol {
                break;
            }
            let letter = if y > tgap.hi { 0 } else { 1 };
            source = cc.child(source, level + 1, letter);
            target = cc.child(target, level, letter);
        }
        Ok(source.lo + (y - target.lo) / target.len() * source.len())
    }

    #[inline]
    fn in_left_zone(&self, x: f64) -> bool {
        self.fb <= x && x <= -self.a()
    }

    #[inline]
    fn in_right_zone(&self, x: f64) -> bool {
        self.a() <= x && x <= -self.fb
    }

    /// `h(x) = B((f|_{[b,a]})^{-1}(x))` on `[f(b), -a]`.
    fn splice(&self, x: f64) -> f64 {
        let z = self
            .map
            .branch()
            .invert_right_unchecked(x)
            .clamp(self.b(), self.a());
        self.eval_base(z).expect("clamped into the base domain")
    }

    fn splice_derivative(&self, x: f64) -> f64 {
        let z = self
            .map
            .branch()
            .invert_right_unchecked(x)
            .clamp(self.b(), self.a());
        let db = self
            .eval_base_derivative(z)
            .expect("clamped into the base domain");
        db / self.map.branch().derivative(z).expect("z >= b > 0")
    }

    fn check_arg(&self, x: f64) -> Result<()> {
        if x == 0.0 {
            return Err(Error::Singularity);
        }
        if !(x.abs() <= 1.0) {
            return Err(domain("Lorenz map argument", x, "[-1, 1]"));
        }
        Ok(())
    }

    /// The spliced Lorenz map.
    pub fn eval_modified_f(&self, x: f64) -> Result<f64> {
        self.check_arg(x)?;
        Ok(if self.in_left_zone(x) {
            self.splice(x)
        } else if self.in_right_zone(x) {
            -self.splice(-x)
        } else {
            self.map.branch().eval_unchecked(x)
        })
    }

    /// Derivative of the spliced map. On the closed surgery zones the
    /// surgery formula is used, so at `±a` and `±f(b)` this is the one-sided
    /// derivative from inside the zone.
    pub fn modified_derivative(&self, x: f64) -> Result<f64> {
        self.check_arg(x)?;
        Ok(if self.in_left_zone(x) {
            self.splice_derivative(x)
        } else if self.in_right_zone(x) {
            self.splice_derivative(-x)
        } else {
            self.map.branch().derivative(x)?
        })
    }

    /// `f²` on `[-a, -b] ∪ [b, a]` via the base map and oddness.
    pub fn second_iterate(&self, x: f64) -> Result<f64> {
        if x >= 0.0 {
            self.eval_base(x)
        } else {
            Ok(-self.eval_base(-x)?)
        }
    }

    /// `(f²)'(x) = f'(f(x)) f'(x)` for `x ∈ [b, a]` (or its mirror), with the
    /// inner factor taken from the analytic branch on `[b, a]`.
    pub fn second_iterate_derivative(&self, x: f64) -> Result<f64> {
        let x = self.check_base_arg(x.abs())?;
        let branch = self.map.branch();
        let inner = branch.derivative(x)?;
        let fx = branch.eval_unchecked(x).clamp(self.fb, -self.a());
        Ok(self.splice_derivative(fx) * inner)
    }

    /// Right-branch inverse of the spliced map, `y ∈ (-1, f(1)]`.
    pub fn invert_right_branch_modified(&self, y: f64) -> Result<f64> {
        let branch = self.map.branch();
        let top = branch.eval_unchecked(1.0);
        if !(y > -1.0 && y <= top) {
            return Err(domain(
                "modified right-branch inverse",
                y,
                format!("(-1, {top}]"),
            ));
        }
        let a = self.a();
        Ok(if y.abs() <= a {
            // f(x) = -h(-x) = y  =>  -x = f(B^{-1}(-y))
            -branch.eval_unchecked(self.base_inverse(-y)?)
        } else {
            branch.invert_right_unchecked(y)
        })
    }

    /// Values of the analytic and surgery formulas at the four splice points.
    pub fn splice_checks(&self) -> Vec<SpliceCheck> {
        let branch = self.map.branch();
        let a = self.a();
        [self.fb, -a, a, -self.fb]
            .into_iter()
            .map(|x| {
                let analytic = branch.eval_unchecked(x);
                let surgery = if x < 0.0 {
                    self.splice(x)
                } else {
                    -self.splice(-x)
                };
                let jump = (analytic - surgery).abs();
                SpliceCheck {
                    x,
                    analytic,
                    surgery,
                    jump,
                    pass: jump <= SPLICE_TOL,
                }
            })
            .collect()
    }

    /// Derivative conditions of the surgery, gap by gap and at tree endpoints,
    /// plus continuity and per-branch monotonicity of the spliced map.
    pub fn verify_surgery(&self, max_level: usize) -> Result<SurgeryReport> {
        if max_level > MAX_SURGERY_LEVEL {
            return Err(Error::SizeGuard {
                what: "surgery level",
                requested: max_level,
                limit: MAX_SURGERY_LEVEL,
            });
        }
        let cc = &self.cc;
        let mut levels = Vec::with_capacity(max_level + 1);
        for n in 0..=max_level {
            let diffeo = GapDiffeo::new(cc, n);
            let mut sup: f64 = 0.0;
            for w in Word::all(n) {
                let gap = cc.gap_endpoints(w.prepend(0));
                for j in 0..=GAP_SAMPLES {
                    let x = gap.lo + gap.len() * (j as f64 / GAP_SAMPLES as f64);
                    let d = self.second_iterate_derivative(x)?;
                    sup = sup.max((2.0 - d).abs());
                }
            }
            let expected = diffeo.sup_deviation();
            levels.push(GapLevelRow {
                n,
                sup_deviation: sup,
                expected,
                pass: (sup - expected).abs() <= DERIVATIVE_TOL,
            });
        }
        let decreasing = levels
            .windows(2)
            .skip(1)
            .all(|w| w[1].sup_deviation < w[0].sup_deviation);

        let mut endpoint_count = 0;
        let mut endpoint_max_error: f64 = 0.0;
        for level in 1..=max_level.max(1) {
            for w in Word::all(level - 1) {
                let iv = cc.interval_endpoints(w.prepend(0));
                for x in [iv.lo, iv.hi] {
                    let d = self.second_iterate_derivative(x)?;
                    endpoint_max_error = endpoint_max_error.max((d - 2.0).abs());
                    endpoint_count += 1;
                }
            }
        }

        let splices = self.splice_checks();
        let monotone_min_step = self.monotone_margin(MONOTONE_GRID);

        let levels_pass = levels.iter().all(|r| r.pass);
        let endpoints_pass = endpoint_max_error <= DERIVATIVE_TOL;
        let continuity_pass = splices.iter().all(|s| s.pass);
        let monotone_pass = monotone_min_step > 0.0;
        Ok(SurgeryReport {
            max_level,
            levels,
            levels_pass,
            decreasing_pass: decreasing,
            endpoint_count,
            endpoint_max_error,
            endpoints_pass,
            splices,
            continuity_pass,
            monotone_grid: MONOTONE_GRID,
            monotone_min_step,
            monotone_pass,
            pass: levels_pass && decreasing && endpoints_pass && continuity_pass && monotone_pass,
        })
    }

    /// Smallest increment of the spliced map between consecutive points of a
    /// uniform grid on each branch (including the splice points themselves).
    pub fn monotone_margin(&self, grid: usize) -> f64 {
        let a = self.a();
        let mut xs: Vec<f64> = (1..=grid).map(|j| j as f64 / grid as f64).collect();
        xs.extend([a, -self.fb]);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let right: Vec<f64> = xs
            .iter()
            .map(|&x| self.eval_modified_f(x).unwrap())
            .collect();
        let left: Vec<f64> = xs
            .iter()
            .rev()
            .map(|&x| self.eval_modified_f(-x).unwrap())
            .collect();
        right
            .windows(2)
            .chain(left.windows(2))
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpliceCheck {
    pub x: f64,
    pub analytic: f64,
    pub surgery: f64,
    pub jump: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapLevelRow {
    /// Target level `n` (source gaps `I*_{0w}` with `ℓ(w) = n`).
    pub n: usize,
    pub sup_deviation: f64,
    pub expected: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurgeryReport {
    pub max_level: usize,
    pub levels: Vec<GapLevelRow>,
    pub levels_pass: bool,
    pub decreasing_pass: bool,
    pub endpoint_count: usize,
    pub endpoint_max_error: f64,
    pub endpoints_pass: bool,
    pub splices: Vec<SpliceCheck>,
    pub continuity_pass: bool,
    pub monotone_grid: usize,
    pub monotone_min_step: f64,
    pub monotone_pass: bool,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::make_construction;
    use approx::assert_abs_diff_eq;

    fn system() -> BowenSystem {
        let map = LorenzBranchMap::new(1.8).unwrap();
        let cc = make_construction(&map, 2.0).unwrap();
        build_base_map(map, cc).unwrap()
    }

    #[test]
    fn diffeo_profile() {
        let sys = system();
        let d = GapDiffeo::new(sys.construction(), 0);
        assert_abs_diff_eq!(d.slope, 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.profile(0.0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.profile(1.0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.cumulative(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.cumulative(0.5), 0.5, epsilon = 1e-15);
        for j in 0..=50 {
            let t = j as f64 / 50.0;
            assert_abs_diff_eq!(d.inverse_cumulative(d.cumulative(t)), t, epsilon = 1e-14);
        }
    }

    #[test]
    fn base_fixed_points() {
        let sys = system();
        assert_abs_diff_eq!(sys.eval_base(sys.a()).unwrap(), sys.a(), epsilon = 1e-15);
        assert_abs_diff_eq!(sys.eval_base(sys.b()).unwrap(), -sys.a(), epsilon = 1e-15);
        let g0 = sys.construction().gap_endpoints(Word::parse("0").unwrap());
        assert_abs_diff_eq!(sys.eval_base(g0.mid()).unwrap(), 0.0, epsilon = 1e-15);
        assert!(sys.eval_base(sys.b() - 1e-6).is_err());
    }

    #[test]
    fn base_address_shift_examples() {
        let sys = system();
        let cc = sys.construction();
        let i01 = cc.interval_endpoints(Word::parse("01").unwrap());
        assert_abs_diff_eq!(sys.eval_base(i01.hi).unwrap(), -sys.b(), epsilon = 1e-14);
        let g00 = cc.gap_endpoints(Word::parse("00").unwrap());
        let g0 = cc.gap_endpoints(Word::parse("0").unwrap());
        assert_abs_diff_eq!(sys.eval_base(g00.mid()).unwrap(), g0.mid(), epsilon = 1e-14);
    }

    #[test]
    fn base_derivative_examples() {
        let sys = system();
        let cc = sys.construction();
        assert_eq!(sys.eval_base_derivative(sys.a()).unwrap(), 2.0);
        assert_eq!(sys.eval_base_derivative(sys.b()).unwrap(), 2.0);
        // ℓ(w) = 3: the diffeo lands on a level-3 gap, s_3 = 2 (5/4)^2
        let g = cc.gap_endpoints(Word::parse("0101").unwrap());
        let s3 = 2.0 * (5.0f64 / 4.0).powi(2);
        assert_abs_diff_eq!(
            sys.eval_base_derivative(g.mid()).unwrap(),
            2.0 * s3 - 2.0,
            epsilon = 1e-12
        );
        // ℓ(w) = 4: s_4 = 2 (6/5)^2 = 2.88, φ(1/2) = 3.76
        let g = cc.gap_endpoints(Word::parse("01101").unwrap());
        assert_abs_diff_eq!(
            sys.eval_base_derivative(g.mid()).unwrap(),
            3.76,
            epsilon = 1e-12
        );
    }

    #[test]
    fn deep_gap_midpoints_approach_two() {
        let sys = system();
        let cc = sys.construction();
        let p = 2.0;
        let mut prev = f64::INFINITY;
        for n in [10usize, 20, 30] {
            let w = Word::all(n).nth(3).unwrap().prepend(0);
            let d = sys
                .eval_base_derivative_tol(cc.gap_endpoints(w).mid(), 1e-12)
                .unwrap();
            let first_order = 2.0 + 4.0 * p / (n as f64 + 1.0);
            assert!(
                (d - first_order).abs() < 40.0 / ((n + 1) * (n + 1)) as f64,
                "n={n} d={d}"
            );
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn base_inverse_round_trip() {
        let sys = system();
        for j in 0..=2000 {
            let y = -sys.a() + 2.0 * sys.a() * j as f64 / 2000.0;
            let x = sys.base_inverse(y).unwrap();
            assert!(sys.b() <= x && x <= sys.a());
            assert_abs_diff_eq!(sys.eval_base(x).unwrap(), y, epsilon = 1e-9);
        }
    }

    #[test]
    fn modified_map_examples() {
        let sys = system();
        let (a, fb) = (sys.a(), sys.fb());
        assert_abs_diff_eq!(sys.eval_modified_f(a).unwrap(), -a, epsilon = 1e-12);
        assert_abs_diff_eq!(-fb, 0.443219, epsilon = 5e-6);
        assert_abs_diff_eq!(sys.eval_modified_f(-fb).unwrap(), a, epsilon = 1e-12);
        assert_abs_diff_eq!(sys.eval_modified_f(1.0).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(sys.eval_modified_f(0.0), Err(Error::Singularity));
        for j in 1..100 {
            let x = j as f64 / 100.0;
            assert_eq!(
                sys.eval_modified_f(-x).unwrap(),
                -sys.eval_modified_f(x).unwrap()
            );
        }
    }

    #[test]
    fn modified_inverse_examples() {
        let sys = system();
        let (a, fb) = (sys.a(), sys.fb());
        assert_abs_diff_eq!(
            sys.invert_right_branch_modified(-a).unwrap(),
            a,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            sys.invert_right_branch_modified(a).unwrap(),
            -fb,
            epsilon = 1e-12
        );
        let x0 = sys.invert_right_branch_modified(0.0).unwrap();
        assert_abs_diff_eq!(x0, 0.309839, epsilon = 5e-6);
        assert_abs_diff_eq!(sys.base_inverse(0.0).unwrap(), 0.147013, epsilon = 5e-6);
        assert!(sys.invert_right_branch_modified(0.81).is_err());
        assert!(sys.invert_right_branch_modified(-1.0).is_err());
    }

    #[test]
    fn surgery_small() {
        let sys = system();
        let r = sys.verify_surgery(6).unwrap();
        assert!(r.pass, "{r:#?}");
        assert_abs_diff_eq!(r.levels[0].sup_deviation, 12.0, epsilon = 1e-9);
        assert!(sys.verify_surgery(15).is_err());
    }

    #[test]
    fn surgery_level_nine_formula() {
        let sys = system();
        let d = GapDiffeo::new(sys.construction(), 9);
        assert_abs_diff_eq!(d.sup_deviation(), 0.84, epsilon = 1e-12);
    }
}
