//! Feasibility decisions for a diagonal sequence and a finite spectrum.
//!
//! Routing:
//! 1. `n = 0` is the projection problem, decided by the integrality of
//!    `(C(B/2) − D(B/2)) / B`.
//! 2. A summable side (`Σ d_i < ∞` or `Σ (B − d_i) < ∞`) is outside the
//!    infinite-dimensional characterization and is reported as such; finite
//!    lists go through [`decide_finite`].
//! 3. `C(B/2) = ∞` or `D(B/2) = ∞` is always feasible.
//! 4. Otherwise feasibility is the existence of a witness `(N, k)`, searched
//!    exhaustively inside a provable box.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::majorization::{check_finite_majorization, interior_inequality, Witness};
use crate::scalar::{Extended, Scalar};
use crate::sequence::{DiagonalSequence, SpectrumSpec, ThresholdStats};

/// Searches larger than this many multiplicity vectors are refused.
pub const MAX_SEARCH_BOX: u128 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// `C(B/2)` or `D(B/2)` is infinite.
    FeasibleCaseI,
    /// Finite statistics and at least one witness.
    FeasibleCaseII,
    Infeasible,
    /// One of `Σ d_i`, `Σ (B − d_i)` is finite.
    OutOfTheoremScope,
}

impl Verdict {
    pub fn is_feasible(self) -> bool {
        matches!(self, Verdict::FeasibleCaseI | Verdict::FeasibleCaseII)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    /// Statistics at `A_1, …, A_n` followed by `B/2`.
    pub stats: Vec<ThresholdStats>,
    pub bounds: Vec<u64>,
    pub note: Option<String>,
}

impl Decision {
    fn bare(verdict: Verdict, stats: Vec<ThresholdStats>, note: Option<String>) -> Self {
        Decision { verdict, witnesses: Vec::new(), stats, bounds: Vec::new(), note }
    }
}

struct StatsJson<'a>(&'a ThresholdStats);

impl Serialize for StatsJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ThresholdStats", 3)?;
        s.serialize_field("alpha", &self.0.alpha)?;
        s.serialize_field("C", &self.0.c)?;
        s.serialize_field("D", &self.0.d)?;
        s.end()
    }
}

impl Serialize for Decision {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let stats: Vec<StatsJson<'_>> = self.stats.iter().map(StatsJson).collect();
        let mut s = serializer.serialize_struct("Decision", 5)?;
        s.serialize_field("verdict", &self.verdict)?;
        s.serialize_field("witnesses", &self.witnesses)?;
        s.serialize_field("stats", &stats)?;
        s.serialize_field("bounds", &self.bounds)?;
        if let Some(note) = &self.note {
            s.serialize_field("note", note)?;
        }
        s.end()
    }
}

pub fn serialize_stats(stats: &[ThresholdStats]) -> serde_json::Value {
    let v: Vec<StatsJson<'_>> = stats.iter().map(StatsJson).collect();
    serde_json::to_value(v).expect("stats serialize")
}

fn check_b(seq: &DiagonalSequence, spectrum: &SpectrumSpec) -> Result<()> {
    if seq.b() != spectrum.b() {
        return Err(Error::domain(format!("sequence B = {} but spectrum B = {}", seq.b(), spectrum.b())));
    }
    Ok(())
}

fn half(b: &Scalar) -> Scalar {
    b / Scalar::from_int(2)
}

/// Statistics at `A_1, …, A_n` and then `B/2`.
fn collect_stats(seq: &DiagonalSequence, spectrum: &SpectrumSpec) -> Result<Vec<ThresholdStats>> {
    spectrum
        .interior()
        .iter()
        .chain(std::iter::once(&half(spectrum.b())))
        .map(|a| seq.threshold_stats(a))
        .collect()
}

pub fn decide(seq: &DiagonalSequence, spectrum: &SpectrumSpec) -> Result<Decision> {
    check_b(seq, spectrum)?;
    let seq = seq.normalize()?;
    if spectrum.n() == 0 {
        return decide_projection(&seq, spectrum.b());
    }
    let flags = seq.divergence_flags();
    let stats = collect_stats(&seq, spectrum)?;
    if !(flags.sum_d_infinite && flags.sum_b_minus_d_infinite) {
        return Ok(Decision::bare(
            Verdict::OutOfTheoremScope,
            stats,
            Some("summable side: use decide_finite for finite lists or check_finite_rank_tail for finite-rank spectra".into()),
        ));
    }
    if flags.c_half_infinite || flags.d_half_infinite {
        return Ok(Decision::bare(Verdict::FeasibleCaseI, stats, None));
    }
    let bounds = witness_bounds(&stats[..spectrum.n()], spectrum)?;
    let witnesses = search_witnesses(&stats, &bounds, spectrum)?;
    let verdict = if witnesses.is_empty() { Verdict::Infeasible } else { Verdict::FeasibleCaseII };
    Ok(Decision { verdict, witnesses, stats, bounds, note: None })
}

/// `bound_j = ⌊((B−A_j) C(A_j) + A_j D(A_j)) / ((B−A_j) A_j)⌋`.
///
/// The interior inequality at `r = j` has only nonnegative terms on its right
/// side, one of which is `(B−A_j) A_j N_j`, so `N_j ≤ bound_j`.
pub fn witness_bounds(stats: &[ThresholdStats], spectrum: &SpectrumSpec) -> Result<Vec<u64>> {
    if stats.len() != spectrum.n() {
        return Err(Error::domain("one statistic per interior point expected"));
    }
    let b = spectrum.b();
    stats
        .iter()
        .zip(spectrum.interior())
        .map(|(st, a)| {
            let (c, d) = st.finite().ok_or_else(|| Error::domain("bounds need finite statistics"))?;
            let gap = b - a;
            let x = (&gap * c + a * d) / (gap * a);
            x.floor().to_u64().ok_or_else(|| Error::domain(format!("witness bound {x} out of range")))
        })
        .collect()
}

/// Every witness `(N, k)` for the decision problem, sorted lexicographically
/// by `N`.
pub fn enumerate_witnesses(seq: &DiagonalSequence, spectrum: &SpectrumSpec) -> Result<Vec<Witness>> {
    check_b(seq, spectrum)?;
    if spectrum.n() == 0 {
        return Err(Error::domain("witness enumeration needs n >= 1"));
    }
    let stats = collect_stats(seq, spectrum)?;
    let bounds = witness_bounds(&stats[..spectrum.n()], spectrum)?;
    search_witnesses(&stats, &bounds, spectrum)
}

fn search_witnesses(stats: &[ThresholdStats], bounds: &[u64], spectrum: &SpectrumSpec) -> Result<Vec<Witness>> {
    let n = spectrum.n();
    if bounds.contains(&0) {
        return Ok(Vec::new());
    }
    let size: u128 = bounds.iter().map(|&b| b as u128).product();
    if size > MAX_SEARCH_BOX {
        return Err(Error::unsupported(format!("witness search box of {size} points exceeds {MAX_SEARCH_BOX}")));
    }
    let finite: Vec<(Scalar, Scalar)> = stats
        .iter()
        .map(|st| st.finite().map(|(c, d)| (c.clone(), d.clone())))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::domain("witness search needs finite statistics"))?;
    let (c_half, d_half) = &finite[n];
    let excess = c_half - d_half;
    let b = spectrum.b();

    let test = |counts: &[u64]| -> Option<Witness> {
        let weighted: Scalar = counts.iter().zip(spectrum.interior()).map(|(&c, a)| a * Scalar::from(c)).sum();
        let k = ((&excess - weighted) / b).to_i64()?;
        let ok = (1..=n).all(|r| interior_inequality(spectrum, counts, r, &finite[r - 1].0, &finite[r - 1].1));
        ok.then(|| Witness::new(counts.to_vec(), k).expect("counts are positive"))
    };

    // Partition on the first coordinate; each chunk walks the rest in
    // lexicographic order, so concatenation keeps the global order.
    let chunks: Vec<Vec<Witness>> = (1..=bounds[0])
        .into_par_iter()
        .map(|first| {
            let mut found = Vec::new();
            let mut counts = vec![1u64; n];
            counts[0] = first;
            loop {
                if let Some(w) = test(&counts) {
                    found.push(w);
                }
                // odometer over coordinates 1..n
                let mut j = n;
                loop {
                    if j == 1 {
                        return found;
                    }
                    j -= 1;
                    if counts[j] < bounds[j] {
                        counts[j] += 1;
                        break;
                    }
                    counts[j] = 1;
                }
            }
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// The projection case `σ = {0, B}`.
pub fn decide_projection(seq: &DiagonalSequence, b: &Scalar) -> Result<Decision> {
    if seq.b() != b {
        return Err(Error::domain(format!("sequence B = {} but projection scale is {b}", seq.b())));
    }
    let seq = seq.normalize()?;
    let st = seq.threshold_stats(&half(b))?;
    let (c, d) = match st.finite() {
        Some((c, d)) => (c.clone(), d.clone()),
        None => return Ok(Decision::bare(Verdict::FeasibleCaseI, vec![st], None)),
    };
    let ratio = (c - d) / b;
    match ratio.to_i64() {
        Some(k) if ratio.is_integer() => Ok(Decision {
            verdict: Verdict::FeasibleCaseII,
            witnesses: vec![Witness::new(Vec::new(), k)?],
            stats: vec![st],
            bounds: Vec::new(),
            note: None,
        }),
        _ => Ok(Decision::bare(Verdict::Infeasible, vec![st], None)),
    }
}

/// Finite feasibility: is there a multiplicity vector
/// `(M_0, …, M_{n+1})`, all `≥ 1`, summing to `d.len()`, whose eigenvalue
/// list majorizes `d`? Returns the lexicographically first one.
pub fn decide_finite(d: &[Scalar], spectrum: &SpectrumSpec) -> Result<(bool, Option<Vec<u64>>)> {
    let b = spectrum.b();
    if let Some(v) = d.iter().find(|v| v.is_negative() || *v > b) {
        return Err(Error::domain(format!("entry {v} outside [0, {b}]")));
    }
    let parts = spectrum.points().len();
    let len = d.len();
    if len < parts {
        return Ok((false, None));
    }
    let total: Scalar = d.iter().sum();
    // compositions of `len` into `parts` positive parts, lexicographic order
    let mut comp = vec![1u64; parts];
    comp[parts - 1] = (len - (parts - 1)) as u64;
    let mut first = true;
    loop {
        if !first && !next_composition(&mut comp) {
            return Ok((false, None));
        }
        first = false;
        let trace: Scalar = comp.iter().zip(spectrum.points()).map(|(&m, a)| a * Scalar::from(m)).sum();
        if trace != total {
            continue;
        }
        let lambda: Vec<Scalar> = comp
            .iter()
            .zip(spectrum.points())
            .flat_map(|(&m, a)| std::iter::repeat_n(a.clone(), m as usize))
            .collect();
        if check_finite_majorization(d, &lambda)? {
            return Ok((true, Some(comp)));
        }
    }
}

/// Advances a composition (positive parts, fixed sum) to its lexicographic
/// successor.
fn next_composition(comp: &mut [u64]) -> bool {
    let p = comp.len();
    if p < 2 {
        return false;
    }
    // rightmost i < p-1 with some later part > 1
    let mut i = p - 1;
    while i > 0 {
        i -= 1;
        let rest: u64 = comp[i + 1..].iter().sum();
        if rest > (p - 1 - i) as u64 {
            comp[i] += 1;
            let rest = rest - 1;
            for c in comp[i + 1..p - 1].iter_mut() {
                *c = 1;
            }
            comp[p - 1] = rest - (p - 2 - i) as u64;
            return true;
        }
    }
    false
}

/// Decides every sub-spectrum `{0} ∪ S ∪ {B}` with `S ⊆ {A_1, …, A_n}`,
/// i.e. the reading in which some `N_j` may vanish.
pub fn decide_subsets(seq: &DiagonalSequence, spectrum: &SpectrumSpec) -> Result<Vec<(SpectrumSpec, Decision)>> {
    let interior = spectrum.interior();
    let n = interior.len();
    if n > 16 {
        return Err(Error::unsupported("subset decisions limited to n <= 16"));
    }
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let mut pts = vec![Scalar::zero()];
        pts.extend((0..n).filter(|j| mask & (1 << j) != 0).map(|j| interior[j].clone()));
        pts.push(spectrum.b().clone());
        let sub = SpectrumSpec::new(pts)?;
        let dec = decide(seq, &sub)?;
        out.push((sub, dec));
    }
    Ok(out)
}

impl Decision {
    pub fn stat_at(&self, alpha: &Scalar) -> Option<&ThresholdStats> {
        self.stats.iter().find(|s| &s.alpha == alpha)
    }

    pub fn c_minus_d_at(&self, alpha: &Scalar) -> Option<Scalar> {
        let st = self.stat_at(alpha)?;
        match (&st.c, &st.d) {
            (Extended::Finite(c), Extended::Finite(d)) => Some(c - d),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorization::equivalent_form_check;
    use crate::scalar::q;
    use crate::sequence::{Count, Tail};

    fn sp(s: &str) -> SpectrumSpec {
        SpectrumSpec::parse_list(s).unwrap()
    }

    fn dy() -> DiagonalSequence {
        DiagonalSequence::two_sided_dyadic()
    }

    #[test]
    fn dyadic_routing() {
        assert_eq!(decide(&dy(), &sp("0,1/4,1")).unwrap().verdict, Verdict::FeasibleCaseII);
        assert_eq!(decide(&dy(), &sp("0,1/3,1")).unwrap().verdict, Verdict::Infeasible);
        let div = dy().with_zero_tail(Tail::Divergent).unwrap();
        for s in ["0,1/3,1", "0,1/5,2/5,1", "0,1/2,1"] {
            assert_eq!(decide(&div, &sp(s)).unwrap().verdict, Verdict::FeasibleCaseI);
        }
    }

    #[test]
    fn summable_is_out_of_scope() {
        let s = DiagonalSequence::new(q(1, 1), vec![q(1, 2)]).unwrap().with_zero_count(Count::Infinite);
        let d = decide(&s, &sp("0,1/2,1")).unwrap();
        assert_eq!(d.verdict, Verdict::OutOfTheoremScope);
        assert!(d.note.is_some());
    }

    #[test]
    fn bounds_examples() {
        let st = vec![dy().threshold_stats(&q(1, 2)).unwrap()];
        assert_eq!(witness_bounds(&st, &sp("0,1/2,1")).unwrap(), vec![3]);
        let zero = DiagonalSequence::new(q(1, 1), vec![])
            .unwrap()
            .with_zero_count(Count::Infinite)
            .with_b_count(Count::Infinite);
        let st = vec![zero.threshold_stats(&q(1, 2)).unwrap()];
        assert_eq!(witness_bounds(&st, &sp("0,1/2,1")).unwrap(), vec![0]);
        let c = q(7, 3);
        let scaled = dy().scale(&c).unwrap();
        let sps = sp("0,1/2,1").scale(&c).unwrap();
        let st = vec![scaled.threshold_stats(sps.a(1)).unwrap()];
        assert_eq!(witness_bounds(&st, &sps).unwrap(), vec![3]);
    }

    #[test]
    fn dyadic_witnesses() {
        let ws = enumerate_witnesses(&dy(), &sp("0,1/2,1")).unwrap();
        assert_eq!(ws, vec![Witness::new(vec![1], -1).unwrap(), Witness::new(vec![3], -2).unwrap()]);
        assert!(enumerate_witnesses(&dy(), &sp("0,1/3,1")).unwrap().is_empty());
        let zero = DiagonalSequence::new(q(1, 1), vec![])
            .unwrap()
            .with_zero_count(Count::Infinite)
            .with_b_count(Count::Infinite);
        assert!(enumerate_witnesses(&zero, &sp("0,1/2,1")).unwrap().is_empty());
    }

    #[test]
    fn witnesses_pass_independent_check() {
        for s in ["0,1/4,1/2,1", "0,1/8,3/4,1", "0,1/6,1/2,5/6,1"] {
            let spec = sp(s);
            for w in enumerate_witnesses(&dy(), &spec).unwrap() {
                assert!(equivalent_form_check(&dy(), &spec, &w).unwrap());
            }
        }
    }

    #[test]
    fn projection_examples() {
        let two = DiagonalSequence::new(q(1, 1), vec![q(1, 2), q(1, 2)]).unwrap().with_zero_count(Count::Infinite);
        let d = decide_projection(&two, &q(1, 1)).unwrap();
        assert_eq!(d.verdict, Verdict::FeasibleCaseII);
        assert_eq!(d.witnesses[0].k(), -1);
        let one = DiagonalSequence::new(q(1, 1), vec![q(1, 2)]).unwrap().with_zero_count(Count::Infinite);
        assert_eq!(decide_projection(&one, &q(1, 1)).unwrap().verdict, Verdict::Infeasible);
        let d = decide_projection(&dy(), &q(1, 1)).unwrap();
        assert_eq!(d.verdict, Verdict::Infeasible);
        assert_eq!(d.c_minus_d_at(&q(1, 2)), Some(q(-1, 2)));
        assert_eq!(decide(&dy(), &sp("0,1")).unwrap(), d);
    }

    #[test]
    fn finite_examples() {
        let (ok, m) = decide_finite(&[q(1, 1), q(1, 1)], &sp("0,2")).unwrap();
        assert!(ok);
        assert_eq!(m, Some(vec![1, 1]));
        let (ok, m) = decide_finite(&[q(2, 3), q(2, 3), q(2, 3)], &sp("0,1")).unwrap();
        assert!(ok);
        assert_eq!(m, Some(vec![1, 2]));
        let (ok, m) = decide_finite(&[q(1, 10), q(1, 10)], &sp("0,1")).unwrap();
        assert!(!ok);
        assert_eq!(m, None);
        assert_eq!(decide_finite(&[q(1, 2)], &sp("0,1")).unwrap(), (false, None));
    }

    #[test]
    fn composition_walk_is_complete() {
        let mut comp = vec![1, 1, 3];
        let mut seen = vec![comp.clone()];
        while next_composition(&mut comp) {
            seen.push(comp.clone());
        }
        assert_eq!(seen, vec![vec![1, 1, 3], vec![1, 2, 2], vec![1, 3, 1], vec![2, 1, 2], vec![2, 2, 1], vec![3, 1, 1]]);
    }

    #[test]
    fn subset_reading() {
        let all = decide_subsets(&dy(), &sp("0,1/3,1/2,1")).unwrap();
        assert_eq!(all.len(), 4);
        let only_half = all.iter().find(|(s, _)| s.points() == [q(0, 1), q(1, 2), q(1, 1)]).unwrap();
        assert_eq!(only_half.1.verdict, Verdict::FeasibleCaseII);
    }
}
