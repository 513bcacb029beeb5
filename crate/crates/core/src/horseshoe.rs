//! Poincaré map on `Σ = [-1, 1]²` and the fat horseshoe `H = K × K`.
//!
//! `F(x, y) = (f(x), g(x, y))` with `f` the spliced Lorenz map and, on the
//! strips `|x| >= b`, `|y| <= -f(b) + ε` (`ε = (f(1) + f(b))/2`),
//! `g(x, y) = sgn(x) f^{-1}(sgn(x) y)` using the right-branch inverse of
//! the spliced map. Elsewhere `g` continues affinely in `y` with a small
//! slope so that images stay inside `Σ`; nothing measure-related depends
//! on that extension.
//!
//! On `A = [-a, a]²` restricted to `|x| >= b`, the second iterate is the
//! skew product `F²(x, y) = (f²(x), ψ_{sgn x}(y))` with fiber maps
//! `ψ_+(y) = -B^{-1}(-y)` (onto `I_1`) and `ψ_-(y) = B^{-1}(y)` (onto `I_0`).
//! Composing `N` fiber maps carries `[-a, a]` onto a level-`N` tree
//! interval, which is the finite-level content of `H = K × K`.
//!
//! Membership in `H_N = ⋂_{|k| <= N} F^{2k}(A)` splits accordingly:
//! the backward condition (points of `F^{2N}(A)`) is that `y` lies in one
//! of the `2^N` fiber intervals; the forward condition is that the expanding
//! `x`-orbit of `f²` avoids the central gap `(-b, b)` for `N` steps. Both
//! reduce to "not in a closed gap of depth `< N`" for the respective
//! coordinate, with shared endpoints resolved toward the gap.

use rayon::prelude::*;
use serde::Serialize;

use crate::bowen::BowenSystem;
use crate::cantor::{Interval, Word};
use crate::error::{domain, Error, Result};
use crate::rng::SampleStream;

/// Depth cap for [`PoincareSystem::fiber_intervals`].
pub const MAX_FIBER_DEPTH: usize = 12;
/// Depth cap for [`PoincareSystem::horseshoe_measure`].
pub const MAX_MEASURE_DEPTH: usize = 10;
/// Finest grid accepted by [`PoincareSystem::horseshoe_measure`].
pub const MIN_RESOLUTION: f64 = 1e-5;
/// Deepest level searched for a vertical gap.
pub const MAX_WITNESS_DEPTH: usize = 40;

const MAX_EXTENSION_SLOPE: f64 = 0.25;

/// Sign of the branch, `+1` for `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
    /// Tree letter of the fiber image: `ψ_+` lands in `I_1`, `ψ_-` in `I_0`.
    pub fn letter(self) -> u8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoincareSystem {
    bowen: BowenSystem,
    epsilon: f64,
    strip_half_height: f64,
    extension_slope: f64,
}

impl PoincareSystem {
    pub fn new(bowen: BowenSystem) -> Result<Self> {
        let f1 = bowen.map().branch().eval_unchecked(1.0);
        let epsilon = 0.5 * (f1 + bowen.fb());
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "strip margin ε = (f(1) + f(b))/2 = {epsilon} must be positive"
            )));
        }
        let strip = -bowen.fb() + epsilon;
        let lo = bowen.invert_right_branch_modified(-strip)?;
        let hi = bowen.invert_right_branch_modified(strip)?;
        let room = 1.0 - strip;
        let extension_slope = MAX_EXTENSION_SLOPE
            .min(lo / (2.0 * room))
            .min((1.0 - hi) / (2.0 * room));
        Ok(Self {
            bowen,
            epsilon,
            strip_half_height: strip,
            extension_slope,
        })
    }

    pub fn bowen(&self) -> &BowenSystem {
        &self.bowen
    }
    pub fn a(&self) -> f64 {
        self.bowen.a()
    }
    pub fn b(&self) -> f64 {
        self.bowen.b()
    }
    /// `ε = (f(1) + f(b)) / 2`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    /// `-f(b) + ε`, the half-height of the strips where `g` is prescribed.
    pub fn strip_half_height(&self) -> f64 {
        self.strip_half_height
    }
    pub fn extension_slope(&self) -> f64 {
        self.extension_slope
    }

    /// Whether `(x, y)` lies in the strips where `g` is given by the inverse branch.
    pub fn in_strip(&self, x: f64, y: f64) -> bool {
        x.abs() >= self.b() && x.abs() <= 1.0 && y.abs() <= self.strip_half_height
    }

    fn fiber_map(&self, sign: f64, y: f64) -> f64 {
        let clamped = y.clamp(-self.strip_half_height, self.strip_half_height);
        let core = sign
            * self
                .bowen
                .invert_right_branch_modified(sign * clamped)
                .expect("strip lies inside the inverse-branch range");
        core + self.extension_slope * (y - clamped)
    }

    /// The Poincaré map `F`.
    pub fn poincare_f(&self, (x, y): (f64, f64)) -> Result<(f64, f64)> {
        if x == 0.0 {
            return Err(Error::Singularity);
        }
        if !(x.abs() <= 1.0 && y.abs() <= 1.0) {
            return Err(domain(
                "Poincaré map argument",
                if x.abs() > 1.0 { x } else { y },
                "[-1, 1]²",
            ));
        }
        let sign = Sign::of(x).value();
        Ok((self.bowen.eval_modified_f(x)?, self.fiber_map(sign, y)))
    }

    fn check_a(&self, x: f64, y: f64) -> Result<()> {
        let (a, b) = (self.a(), self.b());
        if !(x.abs() >= b && x.abs() <= a) {
            return Err(domain(
                "F² abscissa",
                x,
                format!("[-{a}, -{b}] ∪ [{b}, {a}]"),
            ));
        }
        if !(y.abs() <= a) {
            return Err(domain("F² ordinate", y, format!("[-{a}, {a}]")));
        }
        Ok(())
    }

    /// `F²(x, y) = (f²(x), -sgn(x) f^{-1}(-f^{-1}(sgn(x) y)))` on `A`.
    pub fn poincare_f2_on_a(&self, (x, y): (f64, f64)) -> Result<(f64, f64)> {
        self.check_a(x, y)?;
        let s = Sign::of(x).value();
        let inv = |v: f64| self.bowen.invert_right_branch_modified(v);
        let y2 = -s * inv(-inv(s * y)?)?;
        Ok((self.bowen.second_iterate(x)?, y2))
    }

    /// `y`-part of `F²` for branch `sign`.
    pub fn fiber_step(&self, sign: Sign, y: f64) -> Result<f64> {
        let s = sign.value();
        let inv = |v: f64| self.bowen.invert_right_branch_modified(v);
        Ok(-s * inv(-inv(s * y)?)?)
    }

    /// Images of `[-a, a]` under every composition of `N` fiber maps.
    pub fn fiber_intervals(&self, n: usize) -> Result<Vec<SignWordInterval>> {
        if n > MAX_FIBER_DEPTH {
            return Err(Error::SizeGuard {
                what: "fiber depth",
                requested: n,
                limit: MAX_FIBER_DEPTH,
            });
        }
        let a = self.a();
        (0..1usize << n)
            .into_par_iter()
            .map(|code| {
                let signs: Vec<Sign> = (0..n)
                    .map(|i| {
                        if (code >> i) & 1 == 1 {
                            Sign::Plus
                        } else {
                            Sign::Minus
                        }
                    })
                    .collect();
                let (mut lo, mut hi) = (-a, a);
                let mut word = Word::EMPTY;
                for &s in &signs {
                    lo = self.fiber_step(s, lo)?;
                    hi = self.fiber_step(s, hi)?;
                    word = word.prepend(s.letter());
                }
                Ok(SignWordInterval {
                    signs,
                    word,
                    interval: Interval::new(lo, hi),
                })
            })
            .collect()
    }

    /// The forward condition: `f^{2i}(x)` stays off the closed gap `[-b, b]`
    /// for `i < n`.
    pub fn forward_admissible(&self, x: f64, n: usize) -> bool {
        let (a, b) = (self.a(), self.b());
        let mut x = x;
        for _ in 0..n {
            if !(x.abs() > b && x.abs() <= a + 1e-12) {
                return false;
            }
            x = match self.bowen.second_iterate(x.clamp(-a, a)) {
                Ok(v) => v,
                Err(_) => return false,
            };
        }
        x.abs() <= a + 1e-12
    }

    /// The backward condition: `y` lies in one of the `2^n` fiber intervals.
    /// The fiber image containing `y` is peeled off one map at a time, the
    /// last sign being read from which half (`I_0` or `I_1`) holds `y`.
    pub fn backward_admissible(&self, y: f64, n: usize) -> bool {
        let (a, b) = (self.a(), self.b());
        let mut y = y;
        for _ in 0..n {
            if !(y.abs() > b && y.abs() <= a + 1e-12) {
                return false;
            }
            // ψ_-^{-1} = B on I_0, ψ_+^{-1}(y) = -B(-y) on I_1
            y = match self.bowen.second_iterate(y.clamp(-a, a)) {
                Ok(v) => v,
                Err(_) => return false,
            };
        }
        y.abs() <= a + 1e-12
    }

    /// Membership of `(x, y) ∈ A` in the depth-`n` approximation `H_n`.
    pub fn horseshoe_membership(&self, (x, y): (f64, f64), n: usize) -> bool {
        let a = self.a();
        if !(x.abs() <= a && y.abs() <= a) {
            return false;
        }
        self.forward_admissible(x, n) && self.backward_admissible(y, n)
    }

    /// Cell-center grid estimate of `Leb_2(H_n)` over `A`.
    pub fn horseshoe_measure(&self, n: usize, resolution: f64) -> Result<HorseshoeEstimate> {
        if n > MAX_MEASURE_DEPTH {
            return Err(Error::SizeGuard {
                what: "horseshoe depth",
                requested: n,
                limit: MAX_MEASURE_DEPTH,
            });
        }
        if !(resolution >= MIN_RESOLUTION) {
            return Err(domain(
                "grid resolution",
                resolution,
                format!("[{MIN_RESOLUTION}, inf)"),
            ));
        }
        let a = self.a();
        let cells = (2.0 * a / resolution).ceil().max(1.0) as usize;
        let h = 2.0 * a / cells as f64;
        let centers: Vec<f64> = (0..cells).map(|i| -a + (i as f64 + 0.5) * h).collect();

        // The expensive orbit tests depend on one coordinate each; the grid
        // count then runs over all cells.
        let columns: Vec<bool> = centers
            .par_iter()
            .map(|&x| self.forward_admissible(x, n))
            .collect();
        let rows: Vec<bool> = centers
            .par_iter()
            .map(|&y| self.backward_admissible(y, n))
            .collect();
        let member_cells: u64 = rows
            .par_iter()
            .map(|&row| columns.iter().filter(|&&col| col && row).count() as u64)
            .sum();

        let cc = self.bowen.construction();
        let level = cc.level_measure_closed_form(n);
        let exact = level * level;
        let estimate = member_cells as f64 * h * h;
        // Each of the 2^n level intervals is counted to within one cell per
        // axis; the product estimate inherits 2 L e + e².
        let axis_error = (1u64 << n) as f64 * h;
        let envelope = 2.0 * level * axis_error + axis_error * axis_error;
        let sign_word_intervals = if n <= MAX_FIBER_DEPTH {
            self.fiber_intervals(n)?
        } else {
            Vec::new()
        };
        Ok(HorseshoeEstimate {
            depth: n,
            resolution: h,
            cells_per_side: cells,
            member_cells,
            estimated_area: estimate,
            exact_level_area: exact,
            envelope,
            within_envelope: (estimate - exact).abs() <= envelope,
            sign_word_intervals,
        })
    }

    /// For sampled members of `H_depth`, finds a point on the same vertical
    /// line within `eps` that is not in `H`, so no vertical `eps`-segment
    /// through a sample lies in the horseshoe.
    pub fn no_stable_segment_witness(
        &self,
        sample_count: usize,
        eps: f64,
        depth: usize,
        seed: u64,
    ) -> Result<WitnessReport> {
        let b = self.b();
        if !(eps > 0.0 && eps < b) {
            return Err(domain("witness radius", eps, format!("(0, {b})")));
        }
        let a = self.a();
        let mut stream = SampleStream::new(seed);
        let mut samples = Vec::with_capacity(sample_count);
        let mut draws: u64 = 0;
        let draw_limit = 10_000 * sample_count.max(1) as u64;
        while samples.len() < sample_count {
            if draws >= draw_limit {
                return Err(Error::InvalidParameter(format!(
                    "no members of H_{depth} found in {draws} draws"
                )));
            }
            draws += 1;
            let x = stream.uniform(-a, a);
            let y = stream.uniform(-a, a);
            if self.horseshoe_membership((x, y), depth) {
                samples.push((x, y));
            }
        }

        let results: Vec<Option<Witness>> = samples
            .par_iter()
            .map(|&(x, y)| self.find_vertical_gap(x, y, eps))
            .collect();
        let mut witnesses = Vec::with_capacity(results.len());
        let mut failures = Vec::new();
        for (sample, found) in samples.iter().zip(results) {
            match found {
                Some(w) => witnesses.push(w),
                None => failures.push(*sample),
            }
        }
        let max_depth = witnesses.iter().map(|w| w.depth).max().unwrap_or(0);
        let max_distance = witnesses.iter().map(|w| w.distance).fold(0.0, f64::max);
        Ok(WitnessReport {
            depth,
            eps,
            seed,
            draws,
            samples: samples.len(),
            witnesses: witnesses.len(),
            max_witness_depth: max_depth,
            max_witness_distance: max_distance,
            failures,
            pass: witnesses.len() == samples.len(),
        })
    }

    /// Nearest gap center of the tree interval holding `y`, descending until
    /// it is within `eps`; confirmed as a non-member one level deeper.
    pub fn find_vertical_gap(&self, x: f64, y: f64, eps: f64) -> Option<Witness> {
        let cc = self.bowen.construction();
        let mut iv = cc.root();
        for level in 0..MAX_WITNESS_DEPTH {
            let gap = cc.gap_of(iv, level);
            let candidate = gap.mid();
            let distance = (candidate - y).abs();
            if distance < eps && !self.horseshoe_membership((x, candidate), level + 1) {
                return Some(Witness {
                    x,
                    y,
                    y_gap: candidate,
                    depth: level + 1,
                    distance,
                });
            }
            if gap.contains(y) {
                // y itself sits in a gap of this level
                return (!self.horseshoe_membership((x, y), level + 1)).then_some(Witness {
                    x,
                    y,
                    y_gap: y,
                    depth: level + 1,
                    distance: 0.0,
                });
            }
            iv = cc.child(iv, level, if y > gap.hi { 0 } else { 1 });
        }
        None
    }
}

/// Linear flow-box volume `δ · area` of the suspension `{X^t(p) : |t| <= δ, p ∈ H}`.
pub fn suspension_volume(area: f64, delta: f64) -> Result<f64> {
    if !(area >= 0.0) {
        return Err(domain("suspension area", area, "[0, inf)"));
    }
    if !(delta >= 0.0) {
        return Err(domain("suspension half-time", delta, "[0, inf)"));
    }
    Ok(delta * area)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignWordInterval {
    /// Branch signs in application order.
    pub signs: Vec<Sign>,
    /// Tree word of the image interval.
    pub word: Word,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorseshoeEstimate {
    pub depth: usize,
    /// Actual cell side used.
    pub resolution: f64,
    pub cells_per_side: usize,
    pub member_cells: u64,
    pub estimated_area: f64,
    /// `level_measure(depth)²`.
    pub exact_level_area: f64,
    pub envelope: f64,
    pub within_envelope: bool,
    #[serde(skip)]
    pub sign_word_intervals: Vec<SignWordInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub y_gap: f64,
    /// Depth at which `(x, y_gap)` drops out of `H_depth`.
    pub depth: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub depth: usize,
    pub eps: f64,
    pub seed: u64,
    pub draws: u64,
    pub samples: usize,
    pub witnesses: usize,
    pub max_witness_depth: usize,
    pub max_witness_distance: f64,
    pub failures: Vec<(f64, f64)>,
    pub pass: bool,
}
