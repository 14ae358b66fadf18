//! Majorization predicates, all evaluated exactly.
//!
//! * finite majorization and its finite-rank variants,
//! * Lebesgue interior majorization (threshold statistics and range counts),
//! * the equivalent trace/inequality form used by the decider,
//! * Riemann interior majorization over a ℤ-indexed nondecreasing layout.
//!
//! The Lebesgue and Riemann predicates are computed along independent routes
//! (threshold statistics versus layout partial sums) so that their agreement
//! is a meaningful cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequence::{Count, DiagonalSequence, SpectrumSpec, Tail};

/// Multiplicities `N_1, …, N_n` of the interior spectrum points and an integer
/// shift `k`.
///
/// The meaning of `k` depends on the predicate: for the trace condition at
/// `B/2` it is the coefficient of `B`; for [`riemann_check`] it is the index
/// of the last zero of the step sequence in the layout.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Witness {
    #[serde(rename = "N")]
    counts: Vec<u64>,
    k: i64,
}

impl Witness {
    pub fn new(counts: Vec<u64>, k: i64) -> Result<Self> {
        if let Some(j) = counts.iter().position(|&c| c == 0) {
            return Err(Error::domain(format!("multiplicity N_{} is zero; every interior point must occur", j + 1)));
        }
        Ok(Witness { counts, k })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn with_k(&self, k: i64) -> Self {
        Witness { counts: self.counts.clone(), k }
    }

    /// `σ_r = N_1 + … + N_r`.
    pub fn sigma(&self, r: usize) -> u64 {
        self.counts[..r].iter().sum()
    }

    /// `Σ_j A_j N_j`.
    pub fn weighted_sum(&self, spectrum: &SpectrumSpec) -> Scalar {
        self.counts
            .iter()
            .zip(spectrum.interior())
            .map(|(&n, a)| a * Scalar::from(n))
            .sum()
    }

    pub(crate) fn check_len(&self, spectrum: &SpectrumSpec) -> Result<()> {
        if self.counts.len() != spectrum.n() {
            return Err(Error::domain(format!(
                "witness has {} multiplicities, spectrum has {} interior points",
                self.counts.len(),
                spectrum.n()
            )));
        }
        Ok(())
    }
}

/// Prefix-sum majorization of `d` by `lambda` after sorting both nonincreasing.
pub fn check_finite_majorization(d: &[Scalar], lambda: &[Scalar]) -> Result<bool> {
    if d.len() != lambda.len() {
        return Err(Error::domain(format!("length mismatch: {} diagonal entries, {} eigenvalues", d.len(), lambda.len())));
    }
    if d.is_empty() {
        return Err(Error::domain("empty majorization input"));
    }
    let mut d = d.to_vec();
    let mut l = lambda.to_vec();
    d.sort_by(|a, b| b.cmp(a));
    l.sort_by(|a, b| b.cmp(a));
    let mut sd = Scalar::zero();
    let mut sl = Scalar::zero();
    for (x, y) in d.iter().zip(&l) {
        sd += x;
        sl += y;
        if sd > sl {
            return Ok(false);
        }
    }
    Ok(sd == sl)
}

/// Index direction for the finite-rank tail conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Eigenvalues nonincreasing, `Σ_{i≥n} d_i ≥ Σ_{i=n}^N λ_i` with equality at `n = 1`.
    Nonincreasing,
    /// Eigenvalues nondecreasing over `−ℕ ∪ {1..N}`, `Σ_{i≤n} d_i ≥ Σ_{i=1}^n λ_i`
    /// with equality at `n = N`.
    Nondecreasing,
}

/// Finite-rank majorization for a summable sequence (no mass at `B`).
///
/// Decides whether a positive rank-`N` operator with eigenvalues `lambda`
/// can have diagonal `seq`.
pub fn check_finite_rank_tail(seq: &DiagonalSequence, lambda: &[Scalar], orientation: Orientation) -> Result<bool> {
    if seq.b_count() != Count::Zero || seq.b_tail().is_present() {
        return Err(Error::domain("finite-rank check needs a sequence without mass at B"));
    }
    let total = match seq.zero_tail() {
        Tail::Divergent => return Err(Error::domain("sum of diagonal entries diverges")),
        t => t.mass().finite().cloned().unwrap_or_default(),
    } + seq.explicit().iter().sum::<Scalar>();
    if lambda.is_empty() || lambda.iter().any(|l| !l.is_positive()) {
        return Err(Error::domain("eigenvalues must be a nonempty list of positive values"));
    }
    let n = lambda.len();
    let top = largest_entries(seq, n);

    match orientation {
        Orientation::Nonincreasing => {
            let mut l = lambda.to_vec();
            l.sort_by(|a, b| b.cmp(a));
            let lam_total: Scalar = l.iter().sum();
            if total != lam_total {
                return Ok(false);
            }
            // Σ_{i≥m} d_i = total − Σ_{i<m} d_i over the nonincreasing arrangement
            let mut head_d = Scalar::zero();
            let mut head_l = Scalar::zero();
            for m in 1..=n {
                let tail_d = &total - &head_d;
                let tail_l = &lam_total - &head_l;
                if tail_d < tail_l {
                    return Ok(false);
                }
                head_d += &top[m - 1];
                head_l += &l[m - 1];
            }
            Ok(true)
        }
        Orientation::Nondecreasing => {
            let mut l = lambda.to_vec();
            l.sort();
            let mut asc = top;
            asc.reverse();
            // asc[0..n] are d_1 ≤ … ≤ d_N; everything else sits at indices ≤ 0
            let upper: Scalar = asc.iter().sum();
            let below = &total - &upper;
            let mut run_d = below;
            let mut run_l = Scalar::zero();
            for i in 0..n {
                run_d += &asc[i];
                run_l += &l[i];
                if run_d < run_l {
                    return Ok(false);
                }
            }
            Ok(run_d == run_l)
        }
    }
}

/// The `n` largest entries of a sequence without mass at `B`, nonincreasing,
/// padded with zeros.
fn largest_entries(seq: &DiagonalSequence, n: usize) -> Vec<Scalar> {
    let mut explicit: Vec<Scalar> = seq.explicit().iter().filter(|v| !v.is_zero()).cloned().collect();
    explicit.sort_by(|a, b| b.cmp(a));
    let (tail_vals, _) = seq.zero_tail().split_first(n);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, 0);
    while merged.len() < n {
        let next = match (explicit.get(i), tail_vals.get(j)) {
            (Some(x), Some(y)) if x >= y => {
                i += 1;
                x.clone()
            }
            (_, Some(y)) => {
                j += 1;
                y.clone()
            }
            (Some(x), None) => {
                i += 1;
                x.clone()
            }
            (None, None) => Scalar::zero(),
        };
        merged.push(next);
    }
    merged
}

/// The step sequence `λ_i` over ℤ determined by a witness: `0` for `i ≤ k`,
/// `A_r` on `k+σ_{r−1}+1 ..= k+σ_r`, and `B` for `i > k+σ_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepSequence {
    spectrum: SpectrumSpec,
    witness: Witness,
    sigmas: Vec<i64>,
}

pub fn lambda_from_witness(spectrum: &SpectrumSpec, witness: &Witness) -> Result<StepSequence> {
    if spectrum.n() == 0 {
        return Err(Error::domain("step sequence needs n >= 1"));
    }
    witness.check_len(spectrum)?;
    let sigmas = (0..=spectrum.n()).map(|r| witness.sigma(r) as i64).collect();
    Ok(StepSequence { spectrum: spectrum.clone(), witness: witness.clone(), sigmas })
}

impl StepSequence {
    pub fn witness(&self) -> &Witness {
        &self.witness
    }

    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spectrum
    }

    /// `σ_n`.
    pub fn rank(&self) -> i64 {
        *self.sigmas.last().expect("n >= 1")
    }

    pub fn value(&self, i: i64) -> Scalar {
        let k = self.witness.k;
        if i <= k {
            return Scalar::zero();
        }
        let pos = i - k;
        match self.sigmas.iter().position(|&s| pos <= s) {
            Some(r) => self.spectrum.a(r).clone(),
            None => self.spectrum.b().clone(),
        }
    }

    /// `Σ_{i ≤ m} λ_i`.
    pub fn partial_sum(&self, m: i64) -> Scalar {
        let k = self.witness.k;
        if m <= k {
            return Scalar::zero();
        }
        let pos = m - k;
        let mut acc = Scalar::zero();
        for r in 1..self.sigmas.len() {
            let lo = self.sigmas[r - 1];
            let hi = self.sigmas[r].min(pos);
            if hi > lo {
                acc += self.spectrum.a(r) * Scalar::from_int(hi - lo);
            }
        }
        if pos > self.rank() {
            acc += self.spectrum.b() * Scalar::from_int(pos - self.rank());
        }
        acc
    }
}

/// One end of a ℤ-indexed layout.
#[derive(Clone, Debug, PartialEq, Eq)]
enum End {
    /// Infinitely many copies of the end point (`0` on the left, `B` on the right).
    Constant,
    /// Distances `first·ratioᵗ` from the end point, approaching it outward.
    Geometric { first: Scalar, ratio: Scalar },
}

impl End {
    fn from_side(tail: &Tail, count: Count, side: &str) -> Result<End> {
        match tail {
            Tail::Geometric { first, ratio } => Ok(End::Geometric { first: first.clone(), ratio: ratio.clone() }),
            Tail::Divergent => Err(Error::unsupported(format!("divergent tail at {side} has no ℤ layout"))),
            Tail::Absent if count.is_infinite() => Ok(End::Constant),
            Tail::Absent => Err(Error::domain(format!(
                "not ℤ-indexable: only finitely many entries accumulate at {side}"
            ))),
        }
    }

    /// Distance from the end point of the `t`-th element counted outward.
    fn distance(&self, t: u64) -> Scalar {
        match self {
            End::Constant => Scalar::zero(),
            End::Geometric { first, ratio } => first * ratio.pow(t as u32),
        }
    }

    /// Sum of the distances of elements `t, t+1, …`.
    fn distance_from(&self, t: u64) -> Scalar {
        match self {
            End::Constant => Scalar::zero(),
            End::Geometric { first, ratio } => first * ratio.pow(t as u32) / (Scalar::one() - ratio),
        }
    }

    /// Sum of the distances of elements `0 .. u`.
    fn distance_head(&self, u: u64) -> Scalar {
        self.distance_from(0) - self.distance_from(u)
    }

    /// Number of leading elements with distance `>= x` (for `x > 0`).
    fn count_distance_at_least(&self, x: &Scalar) -> u64 {
        match self {
            End::Constant => 0,
            End::Geometric { first, ratio } => {
                Tail::geometric(first.clone(), ratio.clone()).count_at_least(x).unwrap_or(0) as u64
            }
        }
    }
}

/// A nondecreasing arrangement of a sequence over ℤ: the zero side at indices
/// `≤ 0` (largest at `0`), the explicit entries at `1..=L`, the `B` side at
/// indices `> L`.
///
/// Exact `0`s (resp. `B`s) are split off when a geometric tail occupies that
/// side; they do not affect any statistic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZLayout {
    b: Scalar,
    left: End,
    middle: Vec<Scalar>,
    right: End,
}

impl ZLayout {
    /// Materializes tails at `(low, high)` and checks that the resulting
    /// arrangement is nondecreasing.
    pub fn new(seq: &DiagonalSequence, low: &Scalar, high: &Scalar) -> Result<Self> {
        let seq = seq.normalize()?;
        let left = End::from_side(seq.zero_tail(), seq.zero_count(), "0")?;
        let right = End::from_side(seq.b_tail(), seq.b_count(), "B")?;
        let m = seq.materialize_tails(low, high)?;
        let b = seq.b().clone();
        let left = match (left, m.zero_tail()) {
            (End::Geometric { .. }, Tail::Geometric { first, ratio }) => {
                End::Geometric { first: first.clone(), ratio: ratio.clone() }
            }
            (l, _) => l,
        };
        let right = match (right, m.b_tail()) {
            (End::Geometric { .. }, Tail::Geometric { first, ratio }) => {
                End::Geometric { first: first.clone(), ratio: ratio.clone() }
            }
            (r, _) => r,
        };
        let layout = ZLayout { b, left, middle: m.explicit().to_vec(), right };
        if let (Some(lo), Some(hi)) = (layout.middle.first(), layout.middle.last()) {
            if &layout.left.distance(0) > lo || &(&layout.b - layout.right.distance(0)) < hi {
                return Err(Error::domain("alignment inconsistent with nondecreasing order"));
            }
        } else if layout.left.distance(0) > &layout.b - layout.right.distance(0) {
            return Err(Error::domain("alignment inconsistent with nondecreasing order"));
        }
        Ok(layout)
    }

    /// Layout materialized far enough that every spectrum point and `B/2`
    /// falls between the tail remnants.
    pub fn for_spectrum(seq: &DiagonalSequence, spectrum: &SpectrumSpec) -> Result<Self> {
        let seq = seq.normalize()?;
        let half = seq.b() / Scalar::from_int(2);
        let mut low = half.clone();
        let mut high = half;
        if spectrum.n() >= 1 {
            low = low.min(spectrum.a(1).clone());
            high = high.max(spectrum.a(spectrum.n()).clone());
        }
        // entries pulled out of one tail can land past the other tail's head
        loop {
            let m = seq.materialize_tails(&low, &high)?;
            let (lo, hi) = match (m.explicit().first(), m.explicit().last()) {
                (Some(lo), Some(hi)) => (lo.clone().min(low.clone()), hi.clone().max(high.clone())),
                _ => break,
            };
            if lo == low && hi == high {
                break;
            }
            low = lo;
            high = hi;
        }
        ZLayout::new(&seq, &low, &high)
    }

    pub fn b(&self) -> &Scalar {
        &self.b
    }

    /// Explicit entries at indices `1..=L`.
    pub fn middle(&self) -> &[Scalar] {
        &self.middle
    }

    fn len_middle(&self) -> i64 {
        self.middle.len() as i64
    }

    pub fn value(&self, i: i64) -> Scalar {
        let l = self.len_middle();
        if i <= 0 {
            self.left.distance((-i) as u64)
        } else if i <= l {
            self.middle[(i - 1) as usize].clone()
        } else {
            &self.b - self.right.distance((i - l - 1) as u64)
        }
    }

    /// `Σ_{i ≤ m} d_i`.
    pub fn prefix_sum(&self, m: i64) -> Scalar {
        if m <= 0 {
            return self.left.distance_from((-m) as u64);
        }
        let l = self.len_middle();
        let mut acc = self.left.distance_from(0);
        acc += self.middle[..m.min(l) as usize].iter().sum::<Scalar>();
        if m > l {
            let u = (m - l) as u64;
            acc += &self.b * Scalar::from(u) - self.right.distance_head(u);
        }
        acc
    }

    /// `Σ_{i > m} (B − d_i)`.
    pub fn co_suffix(&self, m: i64) -> Scalar {
        let l = self.len_middle();
        if m >= l {
            return self.right.distance_from((m - l) as u64);
        }
        let mut acc = self.right.distance_from(0);
        let from = m.max(0) as usize;
        acc += self.middle[from..].iter().map(|v| &self.b - v).sum::<Scalar>();
        if m < 0 {
            let u = (-m) as u64;
            acc += &self.b * Scalar::from(u) - self.left.distance_head(u);
        }
        acc
    }

    /// `max{i : d_i < x}` for `0 < x < B`.
    pub fn last_index_below(&self, x: &Scalar) -> i64 {
        let l = self.len_middle();
        let right_below = match &self.right {
            End::Constant => 0,
            // B − dist < x  <=>  dist > B − x
            End::Geometric { first, ratio } => {
                let mut n = 0i64;
                let mut v = first.clone();
                let gap = &self.b - x;
                while v > gap {
                    n += 1;
                    v = &v * ratio;
                }
                n
            }
        };
        if right_below > 0 {
            return l + right_below;
        }
        let mid = self.middle.iter().filter(|v| *v < x).count() as i64;
        if mid > 0 {
            return mid;
        }
        -(self.left.count_distance_at_least(x) as i64)
    }

    /// `δ_m = Σ_{i ≤ m} (d_i − λ_i)`.
    pub fn delta(&self, step: &StepSequence, m: i64) -> Scalar {
        self.prefix_sum(m) - step.partial_sum(m)
    }
}

/// Exact partial sums `δ_m` on the window where they can fail, plus the trace
/// residual deciding `δ_m → 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaProfile {
    pub checked_indices: Vec<(i64, Scalar)>,
    pub trace_residual: Scalar,
}

/// Riemann interior majorization of a layout by the step sequence of
/// `witness` (with `k` in layout coordinates).
///
/// `lim δ_m = 0` is decided by the trace residual
/// `C(A_n) − D(A_n) − Σ A_j N_j − B(m_n − σ_n − k)`. Nonnegativity is checked
/// only on `k ..= k+σ_n`: below `k` every increment is `d_i ≥ 0`, and above
/// `k+σ_n` every increment is `d_i − B ≤ 0` on the way to the limit `0`.
pub fn riemann_check(layout: &ZLayout, spectrum: &SpectrumSpec, witness: &Witness) -> Result<(bool, DeltaProfile)> {
    check_layout_spectrum(layout, spectrum)?;
    let step = lambda_from_witness(spectrum, witness)?;
    let a_n = spectrum.a(spectrum.n());
    let m_n = layout.last_index_below(a_n);
    let c = layout.prefix_sum(m_n);
    let d = layout.co_suffix(m_n);
    let shift = Scalar::from_int(m_n - step.rank() - witness.k());
    let trace_residual = c - d - witness.weighted_sum(spectrum) - layout.b() * shift;

    let k = witness.k();
    let checked_indices: Vec<(i64, Scalar)> =
        (k..=k + step.rank()).map(|m| (m, layout.delta(&step, m))).collect();
    let ok = trace_residual.is_zero() && checked_indices.iter().all(|(_, x)| !x.is_negative());
    Ok((ok, DeltaProfile { checked_indices, trace_residual }))
}

/// The unique `k` (in layout coordinates) for which `δ_m → 0`, if integral.
pub fn riemann_shift(layout: &ZLayout, spectrum: &SpectrumSpec, counts: &[u64]) -> Result<Option<i64>> {
    check_layout_spectrum(layout, spectrum)?;
    let w = Witness::new(counts.to_vec(), 0)?;
    w.check_len(spectrum)?;
    let a_n = spectrum.a(spectrum.n());
    let m_n = layout.last_index_below(a_n);
    let excess = layout.prefix_sum(m_n) - layout.co_suffix(m_n) - w.weighted_sum(spectrum);
    let k0 = excess / layout.b();
    Ok(k0.to_i64().map(|k0| m_n - w.sigma(spectrum.n()) as i64 - k0))
}

fn check_layout_spectrum(layout: &ZLayout, spectrum: &SpectrumSpec) -> Result<()> {
    if spectrum.n() == 0 {
        return Err(Error::domain("interior majorization needs n >= 1"));
    }
    if layout.b() != spectrum.b() {
        return Err(Error::domain("layout and spectrum disagree on B"));
    }
    Ok(())
}

/// `C(α)` and `D(α)`, failing on infinite values.
pub fn finite_stats(seq: &DiagonalSequence, alpha: &Scalar) -> Result<(Scalar, Scalar)> {
    let st = seq.threshold_stats(alpha)?;
    match st.finite() {
        Some((c, d)) => Ok((c.clone(), d.clone())),
        None => Err(Error::domain(format!("C or D infinite at threshold {alpha}"))),
    }
}

fn check_inputs(seq: &DiagonalSequence, spectrum: &SpectrumSpec, witness: &Witness) -> Result<()> {
    if spectrum.n() == 0 {
        return Err(Error::domain("interior majorization needs n >= 1"));
    }
    if seq.b() != spectrum.b() {
        return Err(Error::domain(format!("sequence B = {} but spectrum B = {}", seq.b(), spectrum.b())));
    }
    witness.check_len(spectrum)
}

/// Lebesgue interior majorization with the multiplicities of `witness`.
///
/// The shift `k_0` is derived from the trace identity at `A_n`; the witness's
/// own `k` is ignored.
pub fn lebesgue_check(seq: &DiagonalSequence, spectrum: &SpectrumSpec, witness: &Witness) -> Result<bool> {
    check_inputs(seq, spectrum, witness)?;
    let b = spectrum.b();
    finite_stats(seq, &(b / Scalar::from_int(2)))?;
    let n = spectrum.n();
    let a_n = spectrum.a(n);
    let (c_n, d_n) = finite_stats(seq, a_n)?;
    let k0 = (c_n - d_n - witness.weighted_sum(spectrum)) / b;
    if !k0.is_integer() {
        return Ok(false);
    }
    let counts = witness.counts();
    for r in 1..=n {
        let a_r = spectrum.a(r);
        let (c_r, _) = finite_stats(seq, a_r)?;
        let between = match seq.count_range(a_r, a_n)? {
            Count::Infinite => return Err(Error::domain("infinitely many entries between interior points")),
            c => c.finite().unwrap_or(0),
        };
        let head: Scalar = (1..=r).map(|j| spectrum.a(j) * Scalar::from(counts[j - 1])).sum();
        let rest: u64 = counts[r..].iter().sum();
        let bracket = &k0 - Scalar::from(between) + Scalar::from(rest);
        if c_r < head + a_r * bracket {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `k` with `C(B/2) − D(B/2) = Σ A_j N_j + kB`, if integral.
pub fn trace_shift(seq: &DiagonalSequence, spectrum: &SpectrumSpec, counts: &[u64]) -> Result<Option<i64>> {
    let b = spectrum.b();
    let (c, d) = finite_stats(seq, &(b / Scalar::from_int(2)))?;
    let weighted: Scalar = counts.iter().zip(spectrum.interior()).map(|(&n, a)| a * Scalar::from(n)).sum();
    Ok(((c - d - weighted) / b).to_i64())
}

/// `(B−A_r)C(A_r) + A_r D(A_r) ≥ (B−A_r) Σ_{j≤r} A_j N_j + A_r Σ_{j>r} (B−A_j) N_j`.
pub fn interior_inequality(spectrum: &SpectrumSpec, counts: &[u64], r: usize, c_r: &Scalar, d_r: &Scalar) -> bool {
    let b = spectrum.b();
    let a_r = spectrum.a(r);
    let lhs = (b - a_r) * c_r + a_r * d_r;
    let head: Scalar = (1..=r).map(|j| spectrum.a(j) * Scalar::from(counts[j - 1])).sum();
    let tail: Scalar = (r + 1..=spectrum.n()).map(|j| (b - spectrum.a(j)) * Scalar::from(counts[j - 1])).sum();
    lhs >= (b - a_r) * head + a_r * tail
}

/// Trace condition at `B/2` for some integer `k`, plus the interior
/// inequality at every `A_r`.
pub fn equivalent_form_check(seq: &DiagonalSequence, spectrum: &SpectrumSpec, witness: &Witness) -> Result<bool> {
    check_inputs(seq, spectrum, witness)?;
    if trace_shift(seq, spectrum, witness.counts())?.is_none() {
        return Ok(false);
    }
    for r in 1..=spectrum.n() {
        let (c_r, d_r) = finite_stats(seq, spectrum.a(r))?;
        if !interior_inequality(spectrum, witness.counts(), r, &c_r, &d_r) {
            return Ok(false);
        }
    }
    Ok(true)
}
