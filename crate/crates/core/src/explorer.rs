//! Feasible spectra of a fixed sequence: the exact set of 3-point spectra and
//! a sampled picture of the 4-point ones.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::decider::decide;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequence::{DiagonalSequence, SpectrumSpec, Tail};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegionSample {
    #[serde(rename = "A1")]
    pub a1: Scalar,
    #[serde(rename = "A2", skip_serializing_if = "Option::is_none")]
    pub a2: Option<Scalar>,
    pub feasible: bool,
    pub witness_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThreePointSpectra {
    /// `C(B/2)` or `D(B/2)` is infinite: every `A ∈ (0, B)` is feasible.
    All,
    Points {
        points: Vec<Scalar>,
        n_max: u64,
        /// The search used a caller bound below the proven one.
        bounded: bool,
    },
}

/// Upper bound on `N` for any feasible `{0, A, B}` with `A ≤ B/2`.
///
/// With tails split at `B/2`, `E` explicit entries in `(0, B/2)` and a zero
/// tail `f·rᵗ`: `C(A)/A ≤ E + 1/(1−r)` and
/// `D(A) ≤ D(B/2) + B·(E + #{t : f·rᵗ ≥ A})`. The trace equation gives
/// `A·N ≥ v`, the least positive value of `C(B/2) − D(B/2) − kB`. The
/// resulting bound on `N` grows like `log N`, so doubling finds a point past
/// which no `N` can satisfy it.
fn lower_half_bound(seq: &DiagonalSequence) -> Result<u64> {
    let b = seq.b().clone();
    let half = &b / Scalar::from_int(2);
    let s = seq.materialize_tails(&half, &half)?;
    let e = s.explicit().iter().filter(|x| x.is_positive() && **x < half).count() as f64;
    let st = s.threshold_stats(&half)?;
    let (c, d) = st.finite().ok_or_else(|| Error::domain("bound needs finite statistics at B/2"))?;
    let excess = c - d;
    let v = {
        let r = &excess - &b * Scalar::from_bigint((&excess / &b).floor());
        if r.is_zero() {
            b.clone()
        } else {
            r
        }
    };
    let bf = b.to_f64();
    let base = 3.0 * e + 2.0 * d.to_f64() / bf + 2.0;
    let (tail_mass, first, log_ratio) = match s.zero_tail() {
        Tail::Geometric { first, ratio } => {
            let r = ratio.to_f64();
            (1.0 / (1.0 - r), first.to_f64(), -r.ln())
        }
        _ => (0.0, 0.0, f64::INFINITY),
    };
    let vf = v.to_f64();
    let f = |n: f64| {
        let logs = if first > 0.0 { ((first * n / vf).ln() / log_ratio).max(0.0) } else { 0.0 };
        base + tail_mass + 2.0 * logs
    };
    let knee = if log_ratio.is_finite() { 2.0 / log_ratio } else { 0.0 };
    let mut n: u64 = 1;
    loop {
        let nf = n as f64;
        if nf > f(nf) + 1.0 && nf > knee + 1.0 {
            return Ok(n);
        }
        n = n.checked_mul(2).filter(|&n| n < 1 << 40).ok_or_else(|| Error::unsupported("witness bound search diverged"))?;
    }
}

/// A proven bound on `N` over all feasible 3-point spectra.
pub fn three_point_bound(seq: &DiagonalSequence) -> Result<u64> {
    Ok(lower_half_bound(seq)?.max(lower_half_bound(&seq.reflect())?))
}

/// Every `A ∈ (0, B)` for which `{0, A, B}` is feasible.
///
/// Candidates come from the trace equation, `A = (C(B/2) − D(B/2) − kB)/N`,
/// for `N ≤ N_max` and every `k` that puts `A` inside `(0, B)`; each is then
/// decided.
pub fn three_point_spectra(seq: &DiagonalSequence, n_max_override: Option<u64>) -> Result<ThreePointSpectra> {
    let seq = seq.normalize()?;
    let flags = seq.divergence_flags();
    if !(flags.sum_d_infinite && flags.sum_b_minus_d_infinite) {
        return Err(Error::domain("3-point exploration needs Σd = Σ(B−d) = ∞"));
    }
    if flags.c_half_infinite || flags.d_half_infinite {
        return Ok(ThreePointSpectra::All);
    }
    let b = seq.b().clone();
    let proven = three_point_bound(&seq)?;
    let n_max = n_max_override.unwrap_or(proven);
    let st = seq.threshold_stats(&(&b / Scalar::from_int(2)))?;
    let (c, d) = st.finite().expect("finite by the flags");
    let excess = c - d;
    let x = &excess / &b;

    let mut candidates = BTreeSet::new();
    for n in 1..=n_max {
        let nn = Scalar::from(n);
        // (x − k)/N ∈ (0, 1)  ⇔  x − N < k < x
        let k_lo: BigInt = (&x - &nn).floor() + 1;
        let k_hi: BigInt = x.ceil() - 1;
        let mut k = k_lo;
        while k <= k_hi {
            candidates.insert((&excess - &b * Scalar::from_bigint(k.clone())) / &nn);
            k += 1;
        }
    }
    let candidates: Vec<Scalar> = candidates.into_iter().collect();
    let verdicts: Vec<bool> = candidates
        .par_iter()
        .map(|a| {
            let spec = SpectrumSpec::new(vec![Scalar::zero(), a.clone(), b.clone()])?;
            Ok(decide(&seq, &spec)?.verdict.is_feasible())
        })
        .collect::<Result<_>>()?;
    let points = candidates.into_iter().zip(verdicts).filter_map(|(a, ok)| ok.then_some(a)).collect();
    Ok(ThreePointSpectra::Points { points, n_max, bounded: n_max < proven })
}

/// Decides `{0, A1, A2, B}` for `(A1, A2) = (p/q, r/q)·B`, `0 < p < r < q`,
/// in lexicographic order of `(p, r)`.
pub fn four_point_region(seq: &DiagonalSequence, q: u64) -> Result<Vec<RegionSample>> {
    if q < 3 {
        return Err(Error::domain(format!("grid denominator {q} leaves no interior pair")));
    }
    let b = seq.b().clone();
    let pairs: Vec<(u64, u64)> = (1..q).flat_map(|p| (p + 1..q).map(move |r| (p, r))).collect();
    let at = |p: u64| &b * Scalar::new(p as i64, q as i64);
    pairs
        .par_iter()
        .map(|&(p, r)| {
            let (a1, a2) = (at(p), at(r));
            let spec = SpectrumSpec::new(vec![Scalar::zero(), a1.clone(), a2.clone(), b.clone()])?;
            let dec = decide(seq, &spec)?;
            Ok(RegionSample { a1, a2: Some(a2), feasible: dec.verdict.is_feasible(), witness_count: dec.witnesses.len() })
        })
        .collect()
}

/// One feasible row per point of a 3-point set.
pub fn three_point_rows(points: &[Scalar]) -> Vec<RegionSample> {
    points.iter().map(|a| RegionSample { a1: a.clone(), a2: None, feasible: true, witness_count: 0 }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionFormat {
    Csv,
    /// Scatter plot; ticks at multiples of `1/grid`.
    Svg { grid: u64 },
}

pub fn emit_region(rows: &[RegionSample], b: &Scalar, format: RegionFormat) -> Vec<u8> {
    match format {
        RegionFormat::Csv => region_csv(rows).into_bytes(),
        RegionFormat::Svg { grid } => region_svg(rows, b, grid).into_bytes(),
    }
}

fn region_csv(rows: &[RegionSample]) -> String {
    let mut s = String::from("A1,A2,feasible\n");
    for r in rows {
        let a2 = r.a2.as_ref().map(Scalar::to_string).unwrap_or_default();
        let _ = writeln!(s, "{},{},{}", r.a1, a2, r.feasible);
    }
    s
}

const SIZE: f64 = 800.0;
const MARGIN: f64 = 60.0;

fn region_svg(rows: &[RegionSample], b: &Scalar, grid: u64) -> String {
    let span = SIZE - 2.0 * MARGIN;
    let bx = b.to_f64();
    let px = |u: f64| MARGIN + u * span;
    let py = |u: f64| SIZE - MARGIN - u * span;
    let one_dim = !rows.is_empty() && rows.iter().all(|r| r.a2.is_none());

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="800" viewBox="0 0 800 800">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="800" height="800" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    let ticks = grid.clamp(1, 64);
    for t in 0..=ticks {
        let u = t as f64 / ticks as f64;
        let label = if t == 0 || t == ticks { format!("{}", (u * bx)) } else { format!("{t}/{ticks}") };
        let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/>"#, px(u), py(0.0), py(0.0) + 6.0);
        if !one_dim {
            let _ = writeln!(s, r#"<line x1="{1:.2}" y1="{0:.2}" x2="{2:.2}" y2="{0:.2}" stroke="black"/>"#, py(u), px(0.0) - 6.0, px(0.0));
        }
        if t == 0 || t == ticks || ticks <= 16 {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{label}</text>"#,
                px(u),
                py(0.0) + 20.0
            );
        }
    }
    if one_dim {
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{2:.2}" x2="{:.2}" y2="{2:.2}" stroke="gray"/>"#, px(0.0), px(1.0), py(0.5));
    }
    for r in rows.iter().filter(|r| r.feasible) {
        let u = r.a1.to_f64() / bx;
        let v = r.a2.as_ref().map(|a| a.to_f64() / bx).unwrap_or(0.5);
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#, px(u), py(v));
    }
    s.push_str("</svg>\n");
    s
}

impl ThreePointSpectra {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ThreePointSpectra::All => serde_json::Value::String("all of (0,B)".into()),
            ThreePointSpectra::Points { points, .. } => serde_json::to_value(points).expect("scalars serialize"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;
    use crate::sequence::Count;

    fn dy() -> DiagonalSequence {
        DiagonalSequence::two_sided_dyadic()
    }

    #[test]
    fn dyadic_seven_points() {
        let got = three_point_spectra(&dy(), None).unwrap();
        let want = vec![q(1, 8), q(1, 6), q(1, 4), q(1, 2), q(3, 4), q(5, 6), q(7, 8)];
        match got {
            ThreePointSpectra::Points { points, bounded, .. } => {
                assert_eq!(points, want);
                assert!(!bounded);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn divergent_tail_gives_everything() {
        let s = dy().with_zero_tail(Tail::Divergent).unwrap();
        assert_eq!(three_point_spectra(&s, None).unwrap(), ThreePointSpectra::All);
        assert_eq!(ThreePointSpectra::All.to_json(), serde_json::json!("all of (0,B)"));
    }

    #[test]
    fn projection_feasible_sequence_includes_half() {
        let s = DiagonalSequence::new(q(1, 1), vec![q(1, 2), q(1, 2)])
            .unwrap()
            .with_zero_count(Count::Infinite)
            .with_b_count(Count::Infinite);
        // C − D = 1/2 − 1 = −1/2 at B/2: N = 2, k = −1 gives A = 1/2
        match three_point_spectra(&s, None).unwrap() {
            ThreePointSpectra::Points { points, .. } => {
                for a in &points {
                    let spec = SpectrumSpec::new(vec![q(0, 1), a.clone(), q(1, 1)]).unwrap();
                    assert!(decide(&s, &spec).unwrap().verdict.is_feasible());
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn override_below_bound_is_marked() {
        match three_point_spectra(&dy(), Some(2)).unwrap() {
            ThreePointSpectra::Points { points, bounded, n_max } => {
                assert!(bounded);
                assert_eq!(n_max, 2);
                assert_eq!(points, vec![q(1, 4), q(1, 2), q(3, 4)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_rows_are_strict_and_ordered() {
        let rows = four_point_region(&dy(), 6).unwrap();
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.a1 < *r.a2.as_ref().unwrap()));
        let keys: Vec<_> = rows.iter().map(|r| (r.a1.clone(), r.a2.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(four_point_region(&dy(), 2).is_err());
    }

    #[test]
    fn csv_and_svg() {
        let row = RegionSample { a1: q(1, 4), a2: Some(q(1, 2)), feasible: true, witness_count: 1 };
        let csv = String::from_utf8(emit_region(std::slice::from_ref(&row), &q(1, 1), RegionFormat::Csv)).unwrap();
        assert_eq!(csv, "A1,A2,feasible\n1/4,1/2,true\n");
        assert_eq!(String::from_utf8(emit_region(&[], &q(1, 1), RegionFormat::Csv)).unwrap(), "A1,A2,feasible\n");
        let svg = String::from_utf8(emit_region(&[row], &q(1, 1), RegionFormat::Svg { grid: 4 })).unwrap();
        assert!(svg.contains(r#"width="800""#) && svg.matches("<circle").count() == 1);
        let empty = String::from_utf8(emit_region(&[], &q(1, 1), RegionFormat::Svg { grid: 4 })).unwrap();
        assert_eq!(empty.matches("<circle").count(), 0);
        let line = String::from_utf8(emit_region(&three_point_rows(&[q(1, 2)]), &q(1, 1), RegionFormat::Svg { grid: 2 })).unwrap();
        assert!(line.contains(r#"cx="400.00" cy="400.00""#));
    }
}
