//! The Cantor-cone sectional attractor of the skew map
//!
//! ```text
//! F_k(x, y) = (2 x^{1/2} - 1, (y x^{1/k} + 1) / 2)          x > 0
//! F_k(x, y) = (-2 |x|^{1/2} + 1, (y |x|^{1/k} - 1) / 2)     x < 0
//! ```
//!
//! on `Σ = [-1, 1]²` minus the line `Γ = {x = 0}`.
//!
//! The slice `C_n(a)` of `F_k^n(Σ \ Γ)` at abscissa `a` is a union of `2^n`
//! vertical intervals, one per level-`n` preimage of `a` under the base
//! map. Preimages are tracked in normalized form `r ∈ [-1, 1]`; the
//! classical integer numerators `a_{n,m}` over `b_n = 2^{2^{n+1}-2}`
//! overflow binary64 from `n = 4` on, while
//! `r_{n,m} = (-1)^m ((r_{n-1,⌈m/2⌉} + (-1)^m) / 2)²` stays bounded.
//!
//! Leaves are stored in the order `m = 1..=2^n`, so the parent of index `i`
//! (zero-based) is `i / 2`, and odd `m` (even `i`) carries the negative sign.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::maps::SqrtBranch;
use crate::numeric::{bisect_increasing, pairwise_sum};

/// Default depth for the bound table.
pub const DEFAULT_LEVEL: usize = 14;
/// Level cap for the leaf enumeration (2^24 leaves).
pub const MAX_LEVEL: usize = 24;
/// Level cap for the brute-force oracle.
pub const MAX_ORACLE_LEVEL: usize = 8;
/// Oracle grids coarser than this are flagged.
pub const ORACLE_MAX_RESOLUTION: f64 = 1e-3;

const BOUND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSystem {
    k: u32,
    base: SqrtBranch,
}

impl ConeSystem {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "cone exponent k = {k} must be >= 2"
            )));
        }
        Ok(Self {
            k,
            base: SqrtBranch::new(2.0)?,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn base(&self) -> SqrtBranch {
        self.base
    }

    /// Fiber contraction factor `|x|^{1/k} / 2` at abscissa `x`.
    #[inline]
    pub fn fiber_factor(&self, x: f64) -> f64 {
        0.5 * x.abs().powf(1.0 / self.k as f64)
    }

    /// One application of `F_k`.
    pub fn apply(&self, (x, y): (f64, f64)) -> Result<(f64, f64)> {
        if x == 0.0 {
            return Err(Error::Singularity);
        }
        if x.abs() > 1.0 || y.abs() > 1.0 {
            return Err(domain(
                "F_k argument",
                if x.abs() > 1.0 { x } else { y },
                "[-1, 1]²",
            ));
        }
        Ok(self.apply_unchecked(x, y))
    }

    #[inline]
    fn apply_unchecked(&self, x: f64, y: f64) -> (f64, f64) {
        let shift = if x > 0.0 { 1.0 } else { -1.0 };
        let y_next = 0.5 * (y * x.abs().powf(1.0 / self.k as f64) + shift);
        (self.base.eval_unchecked(x), y_next)
    }
}

fn check_abscissa(a: f64) -> Result<()> {
    if !(a.abs() < 1.0) {
        return Err(domain("slice abscissa", a, "(-1, 1)"));
    }
    Ok(())
}

fn check_level(n: usize) -> Result<()> {
    if n > MAX_LEVEL {
        return Err(Error::SizeGuard {
            what: "cone level",
            requested: n,
            limit: MAX_LEVEL,
        });
    }
    Ok(())
}

#[inline]
fn child_sign(index: usize) -> f64 {
    if index.is_multiple_of(2) {
        -1.0
    } else {
        1.0
    }
}

fn next_level(parents: &[f64]) -> Vec<f64> {
    (0..parents.len() * 2)
        .map(|i| {
            let s = child_sign(i);
            let h = 0.5 * (parents[i / 2] + s);
            s * h * h
        })
        .collect()
}

/// Normalized level-`n` preimages `r_{n,m} = a_{n,m} / b_n`, `m = 1..=2^n`.
pub fn preimage_level(a: f64, n: usize) -> Result<Vec<f64>> {
    check_abscissa(a)?;
    check_level(n)?;
    let mut level = vec![a];
    for _ in 0..n {
        level = next_level(&level);
    }
    Ok(level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceLeaf {
    /// Normalized preimage of the slice abscissa.
    pub r: f64,
    /// Length of the fiber interval `A_{n,m}`.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceDecomposition {
    pub a: f64,
    pub n: usize,
    pub leaves: Vec<SliceLeaf>,
    /// `Leb(C_n(a))`, pairwise-summed over the leaves.
    pub total: f64,
}

/// Widths of the `2^n` fiber intervals over abscissa `a` and their sum.
///
/// `width(n, m) = |r_{n,m}|^{1/k} / 2 · width(n-1, ⌈m/2⌉)` with
/// `width(0, 1) = 2`.
pub fn slice_measure(sys: &ConeSystem, a: f64, n: usize) -> Result<SliceDecomposition> {
    check_abscissa(a)?;
    check_level(n)?;
    let mut r = vec![a];
    let mut widths = vec![2.0];
    for _ in 0..n {
        let next_r = next_level(&r);
        let next_w: Vec<f64> = next_r
            .iter()
            .enumerate()
            .map(|(i, &ri)| sys.fiber_factor(ri) * widths[i / 2])
            .collect();
        r = next_r;
        widths = next_w;
    }
    let total = pairwise_sum(&widths);
    let leaves = r
        .into_iter()
        .zip(widths)
        .map(|(r, width)| SliceLeaf { r, width })
        .collect();
    Ok(SliceDecomposition {
        a,
        n,
        leaves,
        total,
    })
}

/// Positioned fiber intervals `[lo, hi]` at abscissa `a`, in leaf order.
/// Each leaf's vertical segment is pushed forward `n` times under `F_k`.
pub fn slice_intervals(sys: &ConeSystem, a: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let roots = preimage_level(a, n)?;
    Ok(roots
        .iter()
        .map(|&r0| push_segment(sys, r0, n, -1.0, 1.0))
        .collect())
}

fn push_segment(sys: &ConeSystem, x0: f64, n: usize, lo: f64, hi: f64) -> (f64, f64) {
    let (mut x, mut lo, mut hi) = (x0, lo, hi);
    for _ in 0..n {
        let (x1, l1) = sys.apply_unchecked(x, lo);
        let (_, h1) = sys.apply_unchecked(x, hi);
        x = x1;
        lo = l1;
        hi = h1;
    }
    (lo.min(hi), lo.max(hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeBoundRow {
    pub n: usize,
    pub total: f64,
    /// `2 / 4^{n/k}`.
    pub bound: f64,
    /// `total / bound`.
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeBoundReport {
    pub k: u32,
    pub a: f64,
    pub rows: Vec<ConeBoundRow>,
    pub pass: bool,
}

/// Table of `Leb(C_n(a))` against `2/4^{n/k}` for `n = 0..=n_max`, also
/// checking the one-step contraction `total(n) <= 2^{-2/k} total(n-1)`.
pub fn verify_cone_bound(sys: &ConeSystem, a: f64, n_max: usize) -> Result<ConeBoundReport> {
    check_abscissa(a)?;
    check_level(n_max)?;
    let k = sys.k() as f64;
    let step = 2f64.powf(-2.0 / k);
    let mut r = vec![a];
    let mut widths = vec![2.0];
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut previous: Option<f64> = None;
    for n in 0..=n_max {
        if n > 0 {
            let next_r = next_level(&r);
            widths = next_r
                .iter()
                .enumerate()
                .map(|(i, &ri)| sys.fiber_factor(ri) * widths[i / 2])
                .collect();
            r = next_r;
        }
        let total = pairwise_sum(&widths);
        let bound = 2.0 * 4f64.powf(-(n as f64) / k);
        let mut pass = total <= bound + BOUND_TOL;
        if let Some(prev) = previous {
            pass &= total <= prev * step * (1.0 + BOUND_TOL);
        }
        rows.push(ConeBoundRow {
            n,
            total,
            bound,
            ratio: total / bound,
            pass,
        });
        previous = Some(total);
    }
    let pass = rows.iter().all(|row| row.pass);
    Ok(ConeBoundReport {
        k: sys.k(),
        a,
        rows,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceEstimate {
    pub measure: f64,
    pub preimage_count: usize,
    pub grid_points: usize,
    /// Set when the requested resolution is coarser than the oracle is meant for.
    pub coarse_warning: bool,
}

/// Independent check of [`slice_measure`]: finds `f^{-n}(a)` by bisection
/// on each monotone branch, pushes a uniform `y`-grid on every preimage
/// line forward `n` times under `F_k`, and measures the union of the
/// resulting `y`-ranges.
pub fn brute_force_slice(
    sys: &ConeSystem,
    a: f64,
    n: usize,
    resolution: f64,
) -> Result<BruteForceEstimate> {
    check_abscissa(a)?;
    if n > MAX_ORACLE_LEVEL {
        return Err(Error::SizeGuard {
            what: "oracle level",
            requested: n,
            limit: MAX_ORACLE_LEVEL,
        });
    }
    if !(resolution > 0.0) {
        return Err(domain("oracle resolution", resolution, "(0, 1e-3]"));
    }
    let base = sys.base();
    let mut preimages = vec![a];
    for _ in 0..n {
        preimages = preimages
            .iter()
            .flat_map(|&t| {
                let right = bisect_increasing(|x| base.eval_unchecked(x), t, 0.0, 1.0);
                let left = bisect_increasing(|x| base.eval_unchecked(x), t, -1.0, 0.0);
                [left, right]
            })
            .collect();
    }

    let steps = (2.0 / resolution).ceil() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|j| (-1.0 + j as f64 * resolution).min(1.0))
        .collect();

    let mut ranges: Vec<(f64, f64)> = preimages
        .par_iter()
        .map(|&x0| {
            let mut x = x0;
            let mut ys = grid.clone();
            for _ in 0..n {
                for y in ys.iter_mut() {
                    *y = sys.apply_unchecked(x, *y).1;
                }
                x = base.eval_unchecked(x);
            }
            let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();

    ranges.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut pieces = Vec::with_capacity(ranges.len());
    let mut current = ranges[0];
    for &(lo, hi) in &ranges[1..] {
        if lo <= current.1 {
            current.1 = current.1.max(hi);
        } else {
            pieces.push(current.1 - current.0);
            current = (lo, hi);
        }
    }
    pieces.push(current.1 - current.0);

    Ok(BruteForceEstimate {
        measure: pairwise_sum(&pieces),
        preimage_count: preimages.len(),
        grid_points: grid.len(),
        coarse_warning: resolution > ORACLE_MAX_RESOLUTION,
    })
}
