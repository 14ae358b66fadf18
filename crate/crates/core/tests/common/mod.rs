#![allow(dead_code)]

use fsdiag::{Count, DiagonalSequence, Extended, Scalar, SpectrumSpec, Tail};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn q(n: i64, d: i64) -> Scalar {
    Scalar::new(n, d)
}

/// `(first, ratio)` of a geometric tail, `first` relative to `B`.
pub type TailParams = Option<((i64, i64), (i64, i64))>;

/// Raw description of a sequence; every fraction is `(p, q)` with `0 < p < q`
/// and is taken relative to `B`.
#[derive(Clone, Debug)]
pub struct SeqParams {
    pub b: (i64, i64),
    pub explicit: Vec<(i64, i64)>,
    pub zeros: Option<u64>,
    pub bs: Option<u64>,
    pub zero_tail: TailParams,
    pub b_tail: TailParams,
}

const BS: [(i64, i64); 4] = [(1, 1), (2, 1), (3, 2), (5, 3)];
const RATIOS: [(i64, i64); 5] = [(1, 2), (1, 3), (2, 3), (1, 4), (3, 5)];

impl SeqParams {
    pub fn build(&self) -> DiagonalSequence {
        let b = q(self.b.0, self.b.1);
        let frac = |(p, d): (i64, i64)| &b * q(p, d);
        let tail = |t: &TailParams| match t {
            None => Tail::Absent,
            Some((f, r)) => Tail::geometric(frac(*f), q(r.0, r.1)),
        };
        let count = |c: Option<u64>| c.map(Count::from_u64).unwrap_or(Count::Infinite);
        DiagonalSequence::new(b.clone(), self.explicit.iter().map(|&f| frac(f)).collect())
            .unwrap()
            .with_zero_count(count(self.zeros))
            .with_b_count(count(self.bs))
            .with_zero_tail(tail(&self.zero_tail))
            .unwrap()
            .with_b_tail(tail(&self.b_tail))
            .unwrap()
    }

    /// Both sums `Σd` and `Σ(B−d)` diverge.
    pub fn both_infinite(&self) -> bool {
        (self.zeros.is_none() || self.zero_tail.is_some()) && (self.bs.is_none() || self.b_tail.is_some())
    }

    pub fn random<R: Rng>(rng: &mut R, max_explicit: usize, both_ends: bool) -> Self {
        let frac = |rng: &mut R, maxq: i64| {
            let d = rng.gen_range(2..=maxq);
            (rng.gen_range(1..d), d)
        };
        let len = rng.gen_range(0..=max_explicit);
        let explicit = (0..len).map(|_| frac(rng, 12)).collect();
        let side = |rng: &mut R| -> (Option<u64>, TailParams) {
            let count = if rng.gen_bool(0.3) { None } else { Some(rng.gen_range(0..3)) };
            let tail = if rng.gen_bool(0.7) {
                Some((frac(rng, 8), RATIOS[rng.gen_range(0..RATIOS.len())]))
            } else {
                None
            };
            if both_ends && count.is_some() && tail.is_none() {
                return (count, Some((frac(rng, 8), RATIOS[rng.gen_range(0..RATIOS.len())])));
            }
            (count, tail)
        };
        let (zeros, zero_tail) = side(rng);
        let (bs, b_tail) = side(rng);
        SeqParams { b: BS[rng.gen_range(0..BS.len())], explicit, zeros, bs, zero_tail, b_tail }
    }
}

fn frac_strategy(maxq: i64) -> impl Strategy<Value = (i64, i64)> {
    (2..=maxq).prop_flat_map(|d| (1..d, Just(d)))
}

fn tail_strategy() -> impl Strategy<Value = TailParams> {
    proptest::option::of((frac_strategy(8), proptest::sample::select(RATIOS.to_vec())))
}

pub fn seq_params(max_explicit: usize) -> impl Strategy<Value = SeqParams> {
    (
        proptest::sample::select(BS.to_vec()),
        proptest::collection::vec(frac_strategy(12), 0..=max_explicit),
        proptest::option::of(0u64..3),
        proptest::option::of(0u64..3),
        tail_strategy(),
        tail_strategy(),
    )
        .prop_map(|(b, explicit, zeros, bs, zero_tail, b_tail)| SeqParams { b, explicit, zeros, bs, zero_tail, b_tail })
}

/// Sequences with both ends carrying infinite mass.
pub fn two_sided_params(max_explicit: usize) -> impl Strategy<Value = SeqParams> {
    seq_params(max_explicit).prop_filter("both sums infinite", |p| p.both_infinite())
}

/// Distinct interior points as fractions of `B`, ascending.
pub fn interior_fracs(n: usize, maxq: i64) -> impl Strategy<Value = Vec<(i64, i64)>> {
    proptest::collection::btree_set(frac_strategy(maxq).prop_map(|(p, d)| (p * 720 / d, 720)), n)
        .prop_map(|s| s.into_iter().collect())
}

pub fn random_interior<R: Rng>(rng: &mut R, n: usize, maxq: i64) -> Vec<(i64, i64)> {
    let mut set = std::collections::BTreeSet::new();
    while set.len() < n {
        let d = rng.gen_range(2..=maxq);
        let p = rng.gen_range(1..d);
        set.insert(p * 720 / d);
    }
    set.into_iter().map(|p| (p, 720)).collect()
}

pub fn spectrum(b: &Scalar, interior: &[(i64, i64)]) -> SpectrumSpec {
    let mut pts = vec![Scalar::zero()];
    pts.extend(interior.iter().map(|&(p, d)| b * q(p, d)));
    pts.push(b.clone());
    SpectrumSpec::new(pts).unwrap()
}

pub fn shuffled<R: Rng>(rng: &mut R, v: &[Scalar]) -> Vec<Scalar> {
    let mut out = v.to_vec();
    out.shuffle(rng);
    out
}

/// `C(α)` and `D(α)` by walking the tails term by term until the remaining
/// terms are all on one side of `α`, then adding the geometric remainder.
pub fn naive_stats(p: &SeqParams, alpha: &Scalar) -> (Extended, Extended) {
    let b = q(p.b.0, p.b.1);
    let mut c = Scalar::zero();
    let mut d = Scalar::zero();
    for &(n, den) in &p.explicit {
        let v = &b * q(n, den);
        if &v < alpha {
            c += v;
        } else {
            d += &b - v;
        }
    }
    if let Some((f, r)) = p.zero_tail {
        let ratio = q(r.0, r.1);
        let mut v = &b * q(f.0, f.1);
        while &v >= alpha {
            d += &b - &v;
            v = &v * &ratio;
        }
        c += &v / (Scalar::one() - &ratio);
    }
    if let Some((f, r)) = p.b_tail {
        let ratio = q(r.0, r.1);
        let mut dist = &b * q(f.0, f.1);
        let gap = &b - alpha;
        while dist > gap {
            c += &b - &dist;
            dist = &dist * &ratio;
        }
        d += &dist / (Scalar::one() - &ratio);
    }
    (Extended::Finite(c), Extended::Finite(d))
}

/// Number of entries equal to `x` with `0 < x < B`, walking the tails.
pub fn naive_count_eq(p: &SeqParams, x: &Scalar) -> u64 {
    let b = q(p.b.0, p.b.1);
    let mut n = p.explicit.iter().filter(|&&(a, d)| &(&b * q(a, d)) == x).count() as u64;
    for (tail, target) in [(p.zero_tail, x.clone()), (p.b_tail, &b - x)] {
        if let Some((f, r)) = tail {
            let ratio = q(r.0, r.1);
            let mut v = &b * q(f.0, f.1);
            while v >= target {
                if v == target {
                    n += 1;
                }
                v = &v * &ratio;
            }
        }
    }
    n
}

/// Trace condition plus the interior inequality, written out directly.
pub fn naive_witness_ok(
    b: &Scalar,
    a: &[Scalar],
    stats: &[(Scalar, Scalar)],
    half: &(Scalar, Scalar),
    counts: &[u64],
) -> Option<i64> {
    let n = a.len();
    let weighted: Scalar = a.iter().zip(counts).map(|(x, &c)| x * Scalar::from(c)).sum();
    let k = (&half.0 - &half.1 - weighted) / b;
    if !k.is_integer() {
        return None;
    }
    for r in 0..n {
        let (c, d) = &stats[r];
        let lhs = (b - &a[r]) * c + &a[r] * d;
        let head: Scalar = (0..=r).map(|j| &a[j] * Scalar::from(counts[j])).sum();
        let tail: Scalar = (r + 1..n).map(|j| (b - &a[j]) * Scalar::from(counts[j])).sum();
        if lhs < (b - &a[r]) * head + &a[r] * tail {
            return None;
        }
    }
    k.to_i64()
}

pub fn finite(e: &Extended) -> Scalar {
    e.finite().expect("finite statistic").clone()
}

/// Brute-force witness list over the box `1 ≤ N_j ≤ bound_j`, where the
/// bound comes from the inequality at `r = j` alone. `None` when the box is
/// larger than `limit`.
pub fn naive_witnesses(p: &SeqParams, spec: &SpectrumSpec, limit: u64) -> Option<Vec<(Vec<u64>, i64)>> {
    let b = spec.b().clone();
    let a: Vec<Scalar> = spec.interior().to_vec();
    let stats: Vec<(Scalar, Scalar)> = a
        .iter()
        .map(|x| {
            let (c, d) = naive_stats(p, x);
            (finite(&c), finite(&d))
        })
        .collect();
    let (hc, hd) = naive_stats(p, &(&b / Scalar::from_int(2)));
    let half = (finite(&hc), finite(&hd));
    let bounds: Vec<u64> = a
        .iter()
        .zip(&stats)
        .map(|(x, (c, d))| {
            let v = ((&b - x) * c + x * d) / ((&b - x) * x);
            v.floor().try_into().unwrap_or(u64::MAX)
        })
        .collect();
    let size = bounds.iter().try_fold(1u64, |acc, &x| acc.checked_mul(x))?;
    if size > limit {
        return None;
    }
    let mut out = Vec::new();
    if bounds.contains(&0) {
        return Some(out);
    }
    let mut cur = vec![1u64; a.len()];
    loop {
        if let Some(k) = naive_witness_ok(&b, &a, &stats, &half, &cur) {
            out.push((cur.clone(), k));
        }
        let mut i = a.len();
        loop {
            if i == 0 {
                return Some(out);
            }
            i -= 1;
            if cur[i] < bounds[i] {
                cur[i] += 1;
                for c in cur.iter_mut().skip(i + 1) {
                    *c = 1;
                }
                break;
            }
        }
    }
}

/// `x ≺ y` for equal-length lists: sorted descending partial sums of `x`
/// never exceed those of `y`, with equal totals.
pub fn naive_majorized(x: &[Scalar], y: &[Scalar]) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(|a, b| b.cmp(a));
    ys.sort_by(|a, b| b.cmp(a));
    let (mut sx, mut sy) = (Scalar::zero(), Scalar::zero());
    for (a, b) in xs.iter().zip(&ys) {
        sx += a;
        sy += b;
        if sx > sy {
            return false;
        }
    }
    sx == sy
}

/// Eigenvalues by an external dense solver, ascending.
pub fn reference_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// A diagonal majorized by `lambda`: random pairwise averaging, then a shuffle.
pub fn averaged<R: Rng>(rng: &mut R, lambda: &[Scalar], steps: usize) -> Vec<Scalar> {
    let mut d = lambda.to_vec();
    let n = d.len();
    if n >= 2 {
        for _ in 0..steps {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            let t = q(rng.gen_range(0..=4), 4);
            let (x, y) = (d[i].clone(), d[j].clone());
            d[i] = &t * &x + (Scalar::one() - &t) * &y;
            d[j] = (Scalar::one() - &t) * &x + &t * &y;
        }
    }
    d.shuffle(rng);
    d
}
