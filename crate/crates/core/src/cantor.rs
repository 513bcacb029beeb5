//! Fat Cantor set `K ⊂ [-a, a]` with summable centered gaps.
//!
//! Starting from `I_∅ = [-a, a]`, every level-`n` interval `I_w` loses the
//! interior of its centered closed gap `I*_w` of length `β_n / 2^n`; the
//! remaining right piece is `I_{w0}` and the left piece is `I_{w1}`. All
//! level-`n` intervals therefore share the length
//! `(2a - Σ_{j<n} β_j) / 2^n`, and `Leb(K) = 2a - Σ β_n`.
//!
//! The gap sequence is `β_n = 2b / (n+1)^p` with `p > 1`, so `β_0 = 2b`,
//! `β_{n+1}/β_n -> 1` and `Σ β_n = 2b ζ(p)`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::maps::LorenzBranchMap;
use crate::numeric::zeta;

/// Deepest level with precomputed lengths; also the word capacity.
pub const MAX_DEPTH: usize = 62;
const TABLE_LEN: usize = MAX_DEPTH + 2;
/// Size guard for [`CantorConstruction::level_measure`].
pub const MAX_MEASURE_LEVEL: usize = 30;

/// A finite word over `{0, 1}`; letter `0` is the right child, `1` the left.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    bits: u64,
    len: u8,
}

impl Word {
    pub const EMPTY: Word = Word { bits: 0, len: 0 };

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Letter at position `i` (zero-based from the first letter).
    pub fn letter(&self, i: usize) -> u8 {
        assert!(
            i < self.len(),
            "letter index {i} out of range for word of length {}",
            self.len
        );
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    pub fn push(self, letter: u8) -> Word {
        assert!(self.len() < MAX_DEPTH, "word capacity exceeded");
        Word {
            bits: (self.bits << 1) | (letter & 1) as u64,
            len: self.len + 1,
        }
    }

    /// `letter · self`.
    pub fn prepend(self, letter: u8) -> Word {
        assert!(self.len() < MAX_DEPTH, "word capacity exceeded");
        Word {
            bits: self.bits | ((letter & 1) as u64) << self.len,
            len: self.len + 1,
        }
    }

    /// Drops the first letter (the shift).
    pub fn tail(self) -> Word {
        if self.len == 0 {
            return self;
        }
        Word {
            bits: self.bits & ((1u64 << (self.len - 1)) - 1),
            len: self.len - 1,
        }
    }

    /// Flips every letter.
    pub fn flip(self) -> Word {
        let mask = if self.len == 0 {
            0
        } else {
            u64::MAX >> (64 - self.len as u32)
        };
        Word {
            bits: self.bits ^ mask,
            len: self.len,
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |i| self.letter(i))
    }

    /// All `2^n` words of length `n`, ordered as integers (`00…0` first).
    pub fn all(n: usize) -> impl Iterator<Item = Word> {
        assert!(n < MAX_DEPTH);
        (0..1u64 << n).map(move |bits| Word { bits, len: n as u8 })
    }

    pub fn parse(s: &str) -> Result<Word> {
        if s.len() > MAX_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "word longer than {MAX_DEPTH}"
            )));
        }
        s.chars().try_fold(Word::EMPTY, |w, ch| match ch {
            '0' => Ok(w.push(0)),
            '1' => Ok(w.push(1)),
            _ => Err(Error::InvalidParameter(format!("'{s}' is not a 0/1 word"))),
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        for l in self.letters() {
            f.write_str(if l == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let text: String = self
            .letters()
            .map(|l| if l == 0 { '0' } else { '1' })
            .collect();
        s.serialize_str(&text)
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
    pub fn neg(&self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaSequence {
    b: f64,
    p: f64,
    tail_sum: f64,
}

impl BetaSequence {
    pub fn new(b: f64, p: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gap seed b = {b} must be positive"
            )));
        }
        let z = zeta(p).ok_or_else(|| {
            Error::Infeasible(format!(
                "exponent p = {p}: sum of (n+1)^-p diverges (need p > 1)"
            ))
        })?;
        Ok(Self {
            b,
            p,
            tail_sum: 2.0 * b * z,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `β_n = 2b / (n+1)^p`.
    pub fn get(&self, n: usize) -> f64 {
        2.0 * self.b / ((n + 1) as f64).powf(self.p)
    }

    /// `Σ_{n>=0} β_n = 2b ζ(p)`.
    pub fn total(&self) -> f64 {
        self.tail_sum
    }

    /// Mean gap-diffeo slope `s_n = 2 β_n / β_{n+1} = 2 ((n+2)/(n+1))^p`.
    pub fn doubling_slope(&self, n: usize) -> f64 {
        2.0 * ((n + 2) as f64 / (n + 1) as f64).powf(self.p)
    }
}

/// Which piece of the tree a point lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "word", rename_all = "lowercase")]
pub enum Address {
    /// In `I_w` with `ℓ(w)` equal to the requested depth.
    Interval(Word),
    /// In the closed gap `I*_w` (shallowest such gap).
    Gap(Word),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CantorConstruction {
    a: f64,
    b: f64,
    beta: BetaSequence,
    /// Closed-form level lengths `(2a - Σ_{j<n} β_j) / 2^n`.
    lengths: Vec<f64>,
    /// Level lengths from the recursion `L_{n+1} = (L_n - β_n/2^n) / 2`.
    recursive_lengths: Vec<f64>,
    /// Gap lengths `β_n / 2^n`.
    gaps: Vec<f64>,
    /// Partial sums `Σ_{j<n} β_j`.
    removed: Vec<f64>,
}

/// Builds the Cantor set from the Lorenz constants `(a, b)` of `map`.
pub fn make_construction(map: &LorenzBranchMap, p: f64) -> Result<CantorConstruction> {
    CantorConstruction::new(map.a(), map.b(), p)
}

impl CantorConstruction {
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        if !(0.0 < b && b < a) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < b < a, got a = {a}, b = {b}"
            )));
        }
        let beta = BetaSequence::new(b, p)?;
        if !(beta.total() < 2.0 * a) {
            return Err(Error::Infeasible(format!(
                "p = {p}: gap total 2b·ζ(p) = {:.6} is not below 2a = {:.6} (need ζ(p) < a/b = {:.6}, ζ(p) = {:.6})",
                beta.total(),
                2.0 * a,
                a / b,
                beta.total() / (2.0 * b)
            )));
        }
        let mut lengths = Vec::with_capacity(TABLE_LEN);
        let mut gaps = Vec::with_capacity(TABLE_LEN);
        let mut removed = Vec::with_capacity(TABLE_LEN);
        let mut recursive_lengths = Vec::with_capacity(TABLE_LEN);
        let mut sum = 0.0;
        let mut current = 2.0 * a;
        for n in 0..TABLE_LEN {
            let scale = 0.5f64.powi(n as i32);
            removed.push(sum);
            lengths.push((2.0 * a - sum) * scale);
            gaps.push(beta.get(n) * scale);
            recursive_lengths.push(current);
            current = 0.5 * (current - beta.get(n) * scale);
            sum += beta.get(n);
        }
        Ok(Self {
            a,
            b,
            beta,
            lengths,
            recursive_lengths,
            gaps,
            removed,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn beta(&self) -> &BetaSequence {
        &self.beta
    }

    /// `Leb(K) = 2a - 2b ζ(p)`.
    pub fn limit_measure(&self) -> f64 {
        2.0 * self.a - self.beta.total()
    }

    /// Closed-form length of a level-`n` interval.
    pub fn level_length(&self, n: usize) -> f64 {
        self.lengths[n]
    }

    /// Length `β_n / 2^n` of a level-`n` gap.
    pub fn gap_length(&self, n: usize) -> f64 {
        self.gaps[n]
    }

    /// Closed-form `2a - Σ_{j<n} β_j`.
    pub fn level_measure_closed_form(&self, n: usize) -> f64 {
        2.0 * self.a - self.removed[n]
    }

    pub fn root(&self) -> Interval {
        Interval::new(-self.a, self.a)
    }

    /// Gap of the level-`level` interval `iv`: what remains after cutting a
    /// child of the next level's length from each end.
    #[inline]
    pub fn gap_of(&self, iv: Interval, level: usize) -> Interval {
        let child = self.recursive_lengths[level + 1];
        Interval::new(iv.lo + child, iv.hi - child)
    }

    /// Child `letter` (`0` right, `1` left) of the level-`level` interval `iv`.
    #[inline]
    pub fn child(&self, iv: Interval, level: usize, letter: u8) -> Interval {
        let gap = self.gap_of(iv, level);
        if letter == 0 {
            Interval::new(gap.hi, iv.hi)
        } else {
            Interval::new(iv.lo, gap.lo)
        }
    }

    /// `I_w`, by recursive gap removal from `[-a, a]`.
    pub fn interval_endpoints(&self, w: Word) -> Interval {
        w.letters()
            .enumerate()
            .fold(self.root(), |iv, (level, letter)| {
                self.child(iv, level, letter)
            })
    }

    /// `I_w` rebuilt from the closed-form level lengths, without
    /// accumulating midpoints.
    pub fn interval_endpoints_compensated(&self, w: Word) -> Interval {
        let mut lo = -self.a;
        for (level, letter) in w.letters().enumerate() {
            if letter == 0 {
                lo += self.lengths[level + 1] + self.gaps[level];
            }
        }
        Interval::new(lo, lo + self.lengths[w.len()])
    }

    /// `I*_w`.
    pub fn gap_endpoints(&self, w: Word) -> Interval {
        self.gap_of(self.interval_endpoints(w), w.len())
    }

    /// Sum of the `2^n` recursively built level-`n` interval lengths.
    pub fn level_measure(&self, n: usize) -> Result<f64> {
        if n > MAX_MEASURE_LEVEL {
            return Err(Error::SizeGuard {
                what: "tree level",
                requested: n,
                limit: MAX_MEASURE_LEVEL,
            });
        }
        // Same recursion as `child`, with each endpoint carried as an
        // unevaluated sum (value, error) so that per-leaf rounding does not
        // accumulate over 2^n leaves.
        fn subtree(
            cc: &CantorConstruction,
            lo: (f64, f64),
            hi: (f64, f64),
            level: usize,
            target: usize,
        ) -> f64 {
            if level == target {
                let (s, e) = two_sum(hi.0, -lo.0);
                return s + (e + (hi.1 - lo.1));
            }
            let child = cc.recursive_lengths[level + 1];
            let left_hi = add_compensated(lo, child);
            let right_lo = add_compensated(hi, -child);
            subtree(cc, right_lo, hi, level + 1, target)
                + subtree(cc, lo, left_hi, level + 1, target)
        }
        Ok(subtree(self, (-self.a, 0.0), (self.a, 0.0), 0, n))
    }

    /// All level-`n` intervals, ordered by word value.
    pub fn level_intervals(&self, n: usize) -> Vec<(Word, Interval)> {
        let mut level = vec![(Word::EMPTY, self.root())];
        for d in 0..n {
            level = level
                .iter()
                .flat_map(|&(w, iv)| [0u8, 1].map(|l| (w.push(l), self.child(iv, d, l))))
                .collect();
        }
        level
    }

    /// Descends the tree from `[-a, a]`. Returns the first gap containing
    /// `x` (gaps are closed, so shared endpoints resolve to the gap), or
    /// the depth-`depth` interval containing it.
    pub fn locate(&self, x: f64, depth: usize) -> Result<Address> {
        if !(x.abs() <= self.a) {
            return Err(domain("locate", x, format!("[-{0}, {0}]", self.a)));
        }
        if depth > MAX_DEPTH {
            return Err(Error::SizeGuard {
                what: "locate depth",
                requested: depth,
                limit: MAX_DEPTH,
            });
        }
        let mut iv = self.root();
        let mut w = Word::EMPTY;
        for level in 0..depth {
            let gap = self.gap_of(iv, level);
            if gap.contains(x) {
                return Ok(Address::Gap(w));
            }
            let letter = if x > gap.hi { 0 } else { 1 };
            iv = self.child(iv, level, letter);
            w = w.push(letter);
        }
        Ok(Address::Interval(w))
    }

    /// Whether `x` lies in the union of level-`n` intervals.
    pub fn in_level_cover(&self, x: f64, n: usize) -> bool {
        matches!(self.locate(x, n), Ok(Address::Interval(_)))
    }

    pub fn tree_dump(&self, depth: usize) -> TreeDump {
        let mut nodes = Vec::new();
        for n in 0..=depth {
            for (word, interval) in self.level_intervals(n) {
                nodes.push(TreeNode {
                    word,
                    level: n,
                    interval,
                    gap: self.gap_of(interval, n),
                });
            }
        }
        TreeDump {
            a: self.a,
            b: self.b,
            p: self.beta.p(),
            depth,
            limit_measure: self.limit_measure(),
            nodes,
        }
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn add_compensated(x: (f64, f64), d: f64) -> (f64, f64) {
    let (s, e) = two_sum(x.0, d);
    let e = e + x.1;
    two_sum(s, e)
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeNode {
    pub word: Word,
    pub level: usize,
    pub interval: Interval,
    pub gap: Interval,
}

/// JSON-facing dump of the tree to a fixed depth.
#[derive(Debug, Clone, Serialize)]
pub struct TreeDump {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub depth: usize,
    pub limit_measure: f64,
    pub nodes: Vec<TreeNode>,
}
