//! Diagonal sequences with accumulation at `0` and `B`, and their threshold
//! statistics.
//!
//! A sequence is a finite multiset of explicit values in `[0, B]`, counts of
//! exact `0` and `B` entries (finite or infinite), and one symbolic tail on
//! each side. A geometric tail on the zero side holds the values
//! `first·ratioᵗ`; on the `B` side it holds `B − first·ratioᵗ`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Extended, Scalar};

/// Multiplicity of a value: a natural number or countably infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Count {
    #[default]
    Zero,
    Finite(u64),
    Infinite,
}

impl Count {
    pub fn from_u64(n: u64) -> Self {
        if n == 0 {
            Count::Zero
        } else {
            Count::Finite(n)
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Count::Zero => Some(0),
            Count::Finite(n) => Some(n),
            Count::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Count::Infinite)
    }

    fn plus(self, k: u64) -> Count {
        match self {
            Count::Infinite => Count::Infinite,
            c => Count::from_u64(c.finite().unwrap_or(0) + k),
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Infinite => f.write_str("inf"),
            c => write!(f, "{}", c.finite().unwrap_or(0)),
        }
    }
}

/// Symbolic tail accumulating at one end of `[0, B]`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Tail {
    #[default]
    Absent,
    /// Distances `first·ratioᵗ` (t = 0, 1, …) from the accumulation point.
    Geometric { first: Scalar, ratio: Scalar },
    /// Infinitely many entries whose distances from the end point have a
    /// divergent sum. No element values are carried.
    Divergent,
}

impl Tail {
    pub fn geometric(first: Scalar, ratio: Scalar) -> Self {
        Tail::Geometric { first, ratio }
    }

    pub fn is_present(&self) -> bool {
        !matches!(self, Tail::Absent)
    }

    /// Total of the distances, `first / (1 − ratio)`; zero when absent.
    pub fn mass(&self) -> Extended {
        match self {
            Tail::Absent => Extended::Finite(Scalar::zero()),
            Tail::Geometric { first, ratio } => Extended::Finite(first / (Scalar::one() - ratio)),
            Tail::Divergent => Extended::Infinite,
        }
    }

    /// Number of leading distances `first·ratioᵗ` that are `>= threshold`.
    /// Requires `threshold > 0` for geometric tails.
    pub fn count_at_least(&self, threshold: &Scalar) -> Option<usize> {
        match self {
            Tail::Absent => Some(0),
            Tail::Geometric { first, ratio } => {
                let mut n = 0;
                let mut x = first.clone();
                while &x >= threshold {
                    n += 1;
                    x = &x * ratio;
                }
                Some(n)
            }
            Tail::Divergent => None,
        }
    }

    fn validate(&self, b: &Scalar) -> Result<()> {
        if let Tail::Geometric { first, ratio } = self {
            if !(ratio.is_positive() && ratio < &Scalar::one()) {
                return Err(Error::domain(format!("tail ratio {ratio} must lie in (0,1)")));
            }
            if !(first.is_positive() && first < b) {
                return Err(Error::domain(format!("tail first term {first} must lie in (0,B)")));
            }
        }
        Ok(())
    }

    /// Splits off the leading distances `>= threshold`; returns them and the
    /// remaining tail.
    fn split_at_least(&self, threshold: &Scalar) -> (Vec<Scalar>, Tail) {
        match self {
            Tail::Geometric { first, ratio } => {
                let mut taken = Vec::new();
                let mut x = first.clone();
                while &x >= threshold {
                    let next = &x * ratio;
                    taken.push(x);
                    x = next;
                }
                (taken, Tail::Geometric { first: x, ratio: ratio.clone() })
            }
            other => (Vec::new(), other.clone()),
        }
    }

    /// Splits off the first `t` distances.
    pub fn split_first(&self, t: usize) -> (Vec<Scalar>, Tail) {
        match self {
            Tail::Geometric { first, ratio } => {
                let mut taken = Vec::with_capacity(t);
                let mut x = first.clone();
                for _ in 0..t {
                    let next = &x * ratio;
                    taken.push(x);
                    x = next;
                }
                (taken, Tail::Geometric { first: x, ratio: ratio.clone() })
            }
            other => (Vec::new(), other.clone()),
        }
    }

    fn scaled(&self, c: &Scalar) -> Tail {
        match self {
            Tail::Geometric { first, ratio } => Tail::Geometric { first: first * c, ratio: ratio.clone() },
            other => other.clone(),
        }
    }
}

/// The prescribed spectrum `0 = A_0 < A_1 < … < A_n < A_{n+1} = B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumSpec {
    points: Vec<Scalar>,
}

impl SpectrumSpec {
    pub fn new(points: Vec<Scalar>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("a spectrum needs at least the two points 0 and B"));
        }
        if !points[0].is_zero() {
            return Err(Error::domain(format!("spectrum must start at 0, got {}", points[0])));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!("spectrum not strictly increasing at {} >= {}", w[0], w[1])));
        }
        Ok(SpectrumSpec { points })
    }

    /// Parses a comma-separated list such as `0,1/4,1`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let points = s
            .split(',')
            .map(|t| t.parse::<Scalar>())
            .collect::<Result<Vec<_>>>()?;
        SpectrumSpec::new(points)
    }

    pub fn points(&self) -> &[Scalar] {
        &self.points
    }

    /// The upper end point `B`.
    pub fn b(&self) -> &Scalar {
        self.points.last().expect("nonempty")
    }

    /// Number of interior points `n`.
    pub fn n(&self) -> usize {
        self.points.len() - 2
    }

    /// Interior points `A_1, …, A_n`.
    pub fn interior(&self) -> &[Scalar] {
        &self.points[1..self.points.len() - 1]
    }

    /// `A_j` for `1 <= j <= n`.
    pub fn a(&self, j: usize) -> &Scalar {
        &self.points[j]
    }

    pub fn scale(&self, c: &Scalar) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::domain(format!("scale factor {c} must be positive")));
        }
        Ok(SpectrumSpec { points: self.points.iter().map(|p| p * c).collect() })
    }

    /// `{B − A_{n+1−j}}`, the spectrum of `B − E`.
    pub fn reflect(&self) -> Self {
        let b = self.b().clone();
        SpectrumSpec { points: self.points.iter().rev().map(|p| &b - p).collect() }
    }
}

impl fmt::Display for SpectrumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// A diagonal sequence in `[0, B]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalSequence {
    b: Scalar,
    explicit: Vec<Scalar>,
    zero_count: Count,
    b_count: Count,
    zero_tail: Tail,
    b_tail: Tail,
}

/// `C(α)` and `D(α)` at one threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdStats {
    pub alpha: Scalar,
    pub c: Extended,
    pub d: Extended,
}

impl ThresholdStats {
    /// Both statistics when finite.
    pub fn finite(&self) -> Option<(&Scalar, &Scalar)> {
        Some((self.c.finite()?, self.d.finite()?))
    }
}

/// Which of the four sums in the theorem's hypotheses diverge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DivergenceFlags {
    pub sum_d_infinite: bool,
    pub sum_b_minus_d_infinite: bool,
    pub c_half_infinite: bool,
    pub d_half_infinite: bool,
}

impl DiagonalSequence {
    /// A sequence with the given explicit entries and nothing else. Values are
    /// range-checked by [`normalize`](Self::normalize).
    pub fn new(b: Scalar, explicit: Vec<Scalar>) -> Result<Self> {
        if !b.is_positive() {
            return Err(Error::domain(format!("B = {b} must be positive")));
        }
        Ok(DiagonalSequence {
            b,
            explicit,
            zero_count: Count::Zero,
            b_count: Count::Zero,
            zero_tail: Tail::Absent,
            b_tail: Tail::Absent,
        })
    }

    pub fn with_zero_count(mut self, c: Count) -> Self {
        self.zero_count = c;
        self
    }

    pub fn with_b_count(mut self, c: Count) -> Self {
        self.b_count = c;
        self
    }

    pub fn with_zero_tail(mut self, tail: Tail) -> Result<Self> {
        tail.validate(&self.b)?;
        self.zero_tail = tail;
        Ok(self)
    }

    pub fn with_b_tail(mut self, tail: Tail) -> Result<Self> {
        tail.validate(&self.b)?;
        self.b_tail = tail;
        Ok(self)
    }

    /// `{…, 1/8, 1/4, 1/2, 3/4, 7/8, …}` on `[0, 1]`: dyadic accumulation at
    /// both ends around a single middle entry.
    pub fn two_sided_dyadic() -> Self {
        let half = Scalar::new(1, 2);
        let quarter = Scalar::new(1, 4);
        DiagonalSequence::new(Scalar::one(), vec![half.clone()])
            .and_then(|s| s.with_zero_tail(Tail::geometric(quarter.clone(), half.clone())))
            .and_then(|s| s.with_b_tail(Tail::geometric(quarter, half)))
            .expect("valid literal")
    }

    pub fn b(&self) -> &Scalar {
        &self.b
    }

    pub fn explicit(&self) -> &[Scalar] {
        &self.explicit
    }

    pub fn zero_count(&self) -> Count {
        self.zero_count
    }

    pub fn b_count(&self) -> Count {
        self.b_count
    }

    pub fn zero_tail(&self) -> &Tail {
        &self.zero_tail
    }

    pub fn b_tail(&self) -> &Tail {
        &self.b_tail
    }

    /// Folds explicit `0`s and `B`s into the counts and sorts the rest.
    pub fn normalize(&self) -> Result<Self> {
        let mut out = self.clone();
        let mut zeros = 0u64;
        let mut bs = 0u64;
        let mut kept = Vec::with_capacity(self.explicit.len());
        for v in &self.explicit {
            if v.is_negative() || v > &self.b {
                return Err(Error::domain(format!("entry {v} outside [0, {}]", self.b)));
            }
            if v.is_zero() {
                zeros += 1;
            } else if v == &self.b {
                bs += 1;
            } else {
                kept.push(v.clone());
            }
        }
        kept.sort();
        out.explicit = kept;
        out.zero_count = self.zero_count.plus(zeros);
        out.b_count = self.b_count.plus(bs);
        Ok(out)
    }

    /// Moves every zero-side tail entry `>= low` and every `B`-side tail entry
    /// `<= high` into the explicit list.
    pub fn materialize_tails(&self, low: &Scalar, high: &Scalar) -> Result<Self> {
        if !(low.is_positive() && low <= high && high < &self.b) {
            return Err(Error::domain(format!("materialization bounds need 0 < {low} <= {high} < {}", self.b)));
        }
        if matches!(self.zero_tail, Tail::Divergent) || matches!(self.b_tail, Tail::Divergent) {
            return Err(Error::unsupported("cannot materialize a divergent tail"));
        }
        Ok(self.materialize_unchecked(low, high))
    }

    /// Materialization that leaves divergent tails in place.
    fn materialize_unchecked(&self, low: &Scalar, high: &Scalar) -> Self {
        let mut out = self.clone();
        let (zs, zrest) = self.zero_tail.split_at_least(low);
        let (bs, brest) = self.b_tail.split_at_least(&(&self.b - high));
        if zs.is_empty() && bs.is_empty() {
            return out;
        }
        out.explicit.extend(zs);
        out.explicit.extend(bs.into_iter().map(|x| &self.b - x));
        out.explicit.sort();
        out.zero_tail = zrest;
        out.b_tail = brest;
        out
    }

    /// `C(α) = Σ_{d_i<α} d_i` and `D(α) = Σ_{d_i≥α} (B − d_i)`.
    ///
    /// Tails are materialized at `α` internally, so no tail straddles the
    /// threshold regardless of the caller's materialization.
    pub fn threshold_stats(&self, alpha: &Scalar) -> Result<ThresholdStats> {
        if !(alpha.is_positive() && alpha < &self.b) {
            return Err(Error::domain(format!("threshold {alpha} outside (0, {})", self.b)));
        }
        let m = self.materialize_unchecked(alpha, alpha);
        let c = match m.zero_tail.mass() {
            Extended::Infinite => Extended::Infinite,
            Extended::Finite(rest) => {
                Extended::Finite(rest + m.explicit.iter().filter(|v| *v < alpha).sum::<Scalar>())
            }
        };
        let d = match m.b_tail.mass() {
            Extended::Infinite => Extended::Infinite,
            Extended::Finite(rest) => Extended::Finite(
                rest + m.explicit.iter().filter(|v| *v >= alpha).map(|v| &self.b - v).sum::<Scalar>(),
            ),
        };
        Ok(ThresholdStats { alpha: alpha.clone(), c, d })
    }

    /// `|{i : a <= d_i < b}|`. Requires `0 <= a <= b <= B`.
    pub fn count_range(&self, a: &Scalar, b: &Scalar) -> Result<Count> {
        if a.is_negative() || a > b || b > &self.b {
            return Err(Error::domain(format!("range [{a}, {b}) outside [0, {}]", self.b)));
        }
        if a == b {
            return Ok(Count::Zero);
        }
        if a.is_zero() && (self.zero_count.is_infinite() || self.zero_tail.is_present()) {
            return Ok(Count::Infinite);
        }
        if b == &self.b && self.b_tail.is_present() {
            return Ok(Count::Infinite);
        }
        let zero_side = match (&self.zero_tail, a.is_zero()) {
            (Tail::Divergent, false) => {
                return Err(Error::unsupported("count of a divergent tail inside an interval"));
            }
            (_, true) => 0,
            (t, false) => {
                // distances in [a, b)
                let ge_a = t.count_at_least(a).unwrap_or(0);
                let ge_b = t.count_at_least(b).unwrap_or(0);
                ge_a - ge_b
            }
        };
        let b_side = match &self.b_tail {
            Tail::Divergent => return Err(Error::unsupported("count of a divergent tail inside an interval")),
            t => {
                // values B − x in [a, b)  <=>  x in (B − b, B − a]
                let hi = &self.b - a;
                let lo = &self.b - b;
                let gt_lo = count_greater(t, &lo);
                let gt_hi = count_greater(t, &hi);
                gt_lo - gt_hi
            }
        };
        let zeros = if a.is_zero() { self.zero_count.finite().unwrap_or(0) } else { 0 };
        let explicit = self.explicit.iter().filter(|v| *v >= a && *v < b).count() as u64;
        Ok(Count::from_u64(zeros + explicit + zero_side as u64 + b_side as u64))
    }

    /// `v ↦ B − v`; swaps the roles of the two ends.
    pub fn reflect(&self) -> Self {
        let mut explicit: Vec<Scalar> = self.explicit.iter().map(|v| &self.b - v).collect();
        explicit.sort();
        DiagonalSequence {
            b: self.b.clone(),
            explicit,
            zero_count: self.b_count,
            b_count: self.zero_count,
            zero_tail: self.b_tail.clone(),
            b_tail: self.zero_tail.clone(),
        }
    }

    /// Multiplies every value and `B` by `c > 0`.
    pub fn scale(&self, c: &Scalar) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::domain(format!("scale factor {c} must be positive")));
        }
        Ok(DiagonalSequence {
            b: &self.b * c,
            explicit: self.explicit.iter().map(|v| v * c).collect(),
            zero_count: self.zero_count,
            b_count: self.b_count,
            zero_tail: self.zero_tail.scaled(c),
            b_tail: self.b_tail.scaled(c),
        })
    }

    pub fn divergence_flags(&self) -> DivergenceFlags {
        DivergenceFlags {
            sum_d_infinite: self.b_count.is_infinite()
                || self.b_tail.is_present()
                || matches!(self.zero_tail, Tail::Divergent),
            sum_b_minus_d_infinite: self.zero_count.is_infinite()
                || self.zero_tail.is_present()
                || matches!(self.b_tail, Tail::Divergent),
            c_half_infinite: matches!(self.zero_tail, Tail::Divergent),
            d_half_infinite: matches!(self.b_tail, Tail::Divergent),
        }
    }

    /// Disjoint union of two sequences on the same `[0, B]`. Tails must not
    /// collide on the same side.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.b != other.b {
            return Err(Error::domain("union of sequences with different B"));
        }
        let pick = |x: &Tail, y: &Tail| -> Result<Tail> {
            match (x.is_present(), y.is_present()) {
                (true, true) => Err(Error::unsupported("union of two tails on the same side")),
                (true, false) => Ok(x.clone()),
                _ => Ok(y.clone()),
            }
        };
        let add = |x: Count, y: Count| match (x.finite(), y.finite()) {
            (Some(a), Some(b)) => Count::from_u64(a + b),
            _ => Count::Infinite,
        };
        let mut explicit = self.explicit.clone();
        explicit.extend(other.explicit.iter().cloned());
        explicit.sort();
        Ok(DiagonalSequence {
            b: self.b.clone(),
            explicit,
            zero_count: add(self.zero_count, other.zero_count),
            b_count: add(self.b_count, other.b_count),
            zero_tail: pick(&self.zero_tail, &other.zero_tail)?,
            b_tail: pick(&self.b_tail, &other.b_tail)?,
        })
    }
}

fn count_greater(t: &Tail, x: &Scalar) -> usize {
    match t {
        Tail::Geometric { first, ratio } => {
            let mut n = 0;
            let mut v = first.clone();
            while &v > x {
                n += 1;
                v = &v * ratio;
            }
            n
        }
        _ => 0,
    }
}
