mod common;

use common::*;
use fsdiag::synthesis::{horn_construct, verify_realization};
use fsdiag::{decide_finite, Scalar};
use proptest::prelude::*;

/// Every multiplicity vector with positive parts summing to `len`, in
/// lexicographic order.
fn all_vectors(parts: usize, len: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return if len >= 1 { vec![vec![len as u64]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..len {
        for mut rest in all_vectors(parts - 1, len - first) {
            rest.insert(0, first as u64);
            out.push(rest);
        }
    }
    out
}

fn eigen_list(points: &[Scalar], mult: &[u64]) -> Vec<Scalar> {
    points.iter().zip(mult).flat_map(|(a, &m)| std::iter::repeat_n(a.clone(), m as usize)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn finite_decision_matches_exhaustive_search(
        d in proptest::collection::vec(0i64..=12, 1..=8),
        fr in interior_fracs(2, 6),
    ) {
        let d: Vec<Scalar> = d.into_iter().map(|x| q(x, 12)).collect();
        let spec = spectrum(&Scalar::one(), &fr);
        let expected = all_vectors(spec.points().len(), d.len())
            .into_iter()
            .find(|m| naive_majorized(&d, &eigen_list(spec.points(), m)));
        let (ok, got) = decide_finite(&d, &spec).unwrap();
        prop_assert_eq!(ok, expected.is_some());
        prop_assert_eq!(&got, &expected);
        if let Some(m) = got {
            let lambda = eigen_list(spec.points(), &m);
            let mat = horn_construct(&lambda, &d).unwrap();
            let report = verify_realization(&mat, &spec, &d, None, 1e-8);
            prop_assert!(report.passed());
            let mult: Vec<u64> = report.multiplicities.iter().map(|&x| x as u64).collect();
            prop_assert_eq!(mult, m);
        }
    }
}
