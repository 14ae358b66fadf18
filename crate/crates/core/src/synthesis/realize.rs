//! Finite truncations of the infinite realization.
//!
//! A truncation keeps every explicit entry and the first `T` entries of each
//! geometric tail. The rest of a tail is packed into a few equal entries
//! strictly inside the outer gaps (`< min(A_1, B/2)` on the zero side,
//! `> max(A_n, B/2)` on the `B` side), so `C` and `D` at every threshold the
//! witness uses are unchanged. Exact `0` and `B` entries then balance the
//! trace against `N` and `k`.
//!
//! The finite list, sorted nondecreasingly, faces the eigenvalue list
//! `0^Z, A_1^{N_1}, …, A_n^{N_n}, B^W`. The construction splits on where the
//! partial-sum excess `δ` is smallest across the interior window, exactly as
//! in the infinite argument, and glues `horn_construct` blocks.

use serde::Serialize;

use crate::decider::{decide, Verdict};
use crate::error::{Error, Result};
use crate::majorization::{check_finite_majorization, equivalent_form_check, Witness};
use crate::scalar::Scalar;
use crate::sequence::{Count, DiagonalSequence, SpectrumSpec, Tail};

use super::horn::horn_construct;
use super::matrix::SymmetricMatrix;
use super::movemass::{move_mass_entries, Transfer};

/// Largest matrix dimension a truncation may produce.
pub const MAX_DIM: usize = 2048;

/// How far past the requested truncation the search for an admissible one
/// goes before giving up.
const SEARCH_AHEAD: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SrimCase {
    /// No tails and finite counts: one `horn_construct` block.
    Finite,
    /// Minimum strictly inside the window: mass move and two blocks.
    Interior,
    /// Minimum at the upper end of the window.
    UpperEnd,
    /// Minimum at the lower end; the upper-end construction on the
    /// reflected problem.
    LowerEnd,
}

/// The finite problem behind a truncated realization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedProblem {
    pub b: Scalar,
    /// Nondecreasing.
    pub diagonal: Vec<Scalar>,
    /// Nondecreasing: `lower` zeros, `sigma` interior values, `upper` copies of `B`.
    pub eigenvalues: Vec<Scalar>,
    pub lower: usize,
    pub sigma: usize,
    pub upper: usize,
    pub truncation: usize,
    pub finite: bool,
}

enum Attempt {
    Ok(TruncatedProblem),
    TooSmall,
}

fn is_finite_list(seq: &DiagonalSequence) -> bool {
    !seq.zero_tail().is_present()
        && !seq.b_tail().is_present()
        && !seq.zero_count().is_infinite()
        && !seq.b_count().is_infinite()
}

/// `count` equal parts of `mass`, each at most `cap`.
fn pack(mass: &Scalar, cap: &Scalar) -> Vec<Scalar> {
    if mass.is_zero() {
        return Vec::new();
    }
    let count = (mass / cap).ceil();
    let count = Scalar::from_bigint(count);
    let part = mass / &count;
    let n = count.to_i64().expect("small count") as usize;
    vec![part; n]
}

fn attempt(seq: &DiagonalSequence, spectrum: &SpectrumSpec, witness: &Witness, t: usize) -> Result<Attempt> {
    let b = spectrum.b();
    let half = b / Scalar::from_int(2);
    let low = spectrum.a(1).clone().min(half.clone());
    let high = spectrum.a(spectrum.n()).clone().max(half.clone());

    let mut diag: Vec<Scalar> = seq.explicit().to_vec();
    let fixed_count = |c: Count| c.finite().unwrap_or(0) as usize;
    if fixed_count(seq.zero_count()) + fixed_count(seq.b_count()) + diag.len() > MAX_DIM {
        return Err(Error::unsupported(format!("truncation exceeds {MAX_DIM} entries")));
    }
    diag.extend(std::iter::repeat_n(Scalar::zero(), fixed_count(seq.zero_count())));
    diag.extend(std::iter::repeat_n(b.clone(), fixed_count(seq.b_count())));

    for (tail, zero_side) in [(seq.zero_tail(), true), (seq.b_tail(), false)] {
        let (taken, rest) = tail.split_first(t);
        let gap = if zero_side { low.clone() } else { b - &high };
        if let Tail::Geometric { first, .. } = &rest {
            if first >= &gap {
                return Ok(Attempt::TooSmall);
            }
        }
        let mass = rest.mass().finite().cloned().ok_or_else(|| Error::unsupported("divergent tail"))?;
        let packed = pack(&mass, &(&gap / Scalar::from_int(2)));
        if zero_side {
            diag.extend(taken);
            diag.extend(packed);
        } else {
            diag.extend(taken.into_iter().map(|x| b - x));
            diag.extend(packed.into_iter().map(|x| b - x));
        }
        if diag.len() > MAX_DIM {
            return Err(Error::unsupported(format!("truncation exceeds {MAX_DIM} entries")));
        }
    }

    // Σd − Σ A_j N_j = (k + #{d ≥ B/2})·B
    let big = diag.iter().filter(|x| **x >= half).count() as i64;
    let shift = witness.k() + big;
    let sigma: u64 = witness.counts().iter().sum();
    let sigma = sigma as usize;
    let (w, upper) = if shift >= 0 { (0usize, shift as usize) } else { ((-shift) as usize, 0usize) };
    let rest = diag.len() as i64 + w as i64 - upper as i64 - sigma as i64;
    let (z, lower) = if rest >= 0 { (0usize, rest as usize) } else { ((-rest) as usize, 0usize) };
    if diag.len() + z + w > MAX_DIM {
        return Err(Error::unsupported(format!("truncation exceeds {MAX_DIM} entries")));
    }
    diag.extend(std::iter::repeat_n(Scalar::zero(), z));
    diag.extend(std::iter::repeat_n(b.clone(), w));
    diag.sort();

    let mut eig = vec![Scalar::zero(); lower];
    for (a, &n) in spectrum.interior().iter().zip(witness.counts()) {
        eig.extend(std::iter::repeat_n(a.clone(), n as usize));
    }
    eig.extend(std::iter::repeat_n(b.clone(), upper));

    let dsum: Scalar = diag.iter().sum();
    let esum: Scalar = eig.iter().sum();
    if dsum != esum {
        return Err(Error::InfeasibleWitness(format!("trace mismatch {dsum} vs {esum} after balancing")));
    }
    if !check_finite_majorization(&diag, &eig)? {
        return Ok(Attempt::TooSmall);
    }
    Ok(Attempt::Ok(TruncatedProblem {
        b: b.clone(),
        diagonal: diag,
        eigenvalues: eig,
        lower,
        sigma,
        upper,
        truncation: t,
        finite: false,
    }))
}

/// Builds the finite diagonal and eigenvalue lists for truncation `t`.
///
/// Sequences with tails must be Case II feasible with this witness. Finite
/// lists skip that check; only the trace and finite majorization matter.
pub fn truncated_problem(
    seq: &DiagonalSequence,
    spectrum: &SpectrumSpec,
    witness: &Witness,
    t: usize,
) -> Result<TruncatedProblem> {
    if seq.b() != spectrum.b() {
        return Err(Error::domain(format!("sequence B = {} but spectrum B = {}", seq.b(), spectrum.b())));
    }
    if spectrum.n() == 0 {
        return Err(Error::unsupported("realization needs at least one interior eigenvalue"));
    }
    witness.check_len(spectrum)?;
    let seq = seq.normalize()?;
    if matches!(seq.zero_tail(), Tail::Divergent) || matches!(seq.b_tail(), Tail::Divergent) {
        return Err(Error::unsupported("realization needs geometric or absent tails"));
    }
    let finite = is_finite_list(&seq);
    if !finite {
        let verdict = decide(&seq, spectrum)?.verdict;
        if verdict != Verdict::FeasibleCaseII {
            return Err(Error::unsupported(format!("realization needs a Case II instance, decide says {verdict:?}")));
        }
        if !equivalent_form_check(&seq, spectrum, witness)? {
            return Err(Error::InfeasibleWitness(format!("N = {:?}, k = {} fails the interior majorization", witness.counts(), witness.k())));
        }
    }
    match attempt(&seq, spectrum, witness, t)? {
        Attempt::Ok(mut p) => {
            p.finite = finite;
            Ok(p)
        }
        Attempt::TooSmall if finite => {
            Err(Error::InfeasibleWitness("eigenvalue list does not majorize the finite diagonal".into()))
        }
        Attempt::TooSmall => {
            for next in t + 1..=t + SEARCH_AHEAD {
                if let Attempt::Ok(_) = attempt(&seq, spectrum, witness, next)? {
                    return Err(Error::TruncationTooSmall { requested: t, minimal: next });
                }
            }
            Err(Error::InfeasibleWitness(format!("no truncation up to {} is realizable", t + SEARCH_AHEAD)))
        }
    }
}

/// A matrix with spectrum in `σ`, every interior point present with
/// multiplicity `N_j`, and the truncated diagonal (nondecreasing) exactly
/// in rational tracking.
pub fn realize_truncated(
    seq: &DiagonalSequence,
    spectrum: &SpectrumSpec,
    witness: &Witness,
    t: usize,
) -> Result<SymmetricMatrix> {
    let p = truncated_problem(seq, spectrum, witness, t)?;
    Ok(realize_problem(&p)?.0)
}

/// `δ` at the window positions `lower + j`, `j = 0..=sigma`.
fn window_deltas(p: &TruncatedProblem) -> Vec<Scalar> {
    let mut acc = Scalar::zero();
    let mut out = Vec::with_capacity(p.sigma + 1);
    for i in 0..=p.lower + p.sigma {
        if i >= p.lower {
            out.push(acc.clone());
        }
        if i < p.diagonal.len() {
            acc += &p.diagonal[i] - &p.eigenvalues[i];
        }
    }
    out
}

pub fn realize_problem(p: &TruncatedProblem) -> Result<(SymmetricMatrix, SrimCase)> {
    if p.finite {
        return Ok((horn_construct(&p.eigenvalues, &p.diagonal)?, SrimCase::Finite));
    }
    let deltas = window_deltas(p);
    let (m0, min) = deltas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, v)| (i, v.clone()))
        .expect("window is nonempty");
    let (d0, ds) = (&deltas[0], &deltas[p.sigma]);
    if &min < d0 && &min < ds {
        Ok((interior_case(p, m0, &min)?, SrimCase::Interior))
    } else if &min == ds {
        Ok((upper_end_case(p)?, SrimCase::UpperEnd))
    } else {
        let r = reflect(p);
        let m = upper_end_case(&r)?.complement(&p.b);
        let dim = p.diagonal.len();
        let perm: Vec<usize> = (0..dim).rev().collect();
        Ok((m.permuted(&perm), SrimCase::LowerEnd))
    }
}

fn reflect(p: &TruncatedProblem) -> TruncatedProblem {
    let flip = |v: &[Scalar]| v.iter().rev().map(|x| &p.b - x).collect::<Vec<_>>();
    TruncatedProblem {
        b: p.b.clone(),
        diagonal: flip(&p.diagonal),
        eigenvalues: flip(&p.eigenvalues),
        lower: p.upper,
        sigma: p.sigma,
        upper: p.lower,
        truncation: p.truncation,
        finite: p.finite,
    }
}

/// Places blocks built on the given index lists into one matrix.
fn assemble(dim: usize, blocks: Vec<(Vec<usize>, SymmetricMatrix)>) -> SymmetricMatrix {
    let mut pos = vec![usize::MAX; dim];
    let mut k = 0;
    for (idx, _) in &blocks {
        for &i in idx {
            pos[i] = k;
            k += 1;
        }
    }
    debug_assert_eq!(k, dim);
    let mats: Vec<SymmetricMatrix> = blocks.into_iter().map(|(_, m)| m).collect();
    SymmetricMatrix::direct_sum(&mats).permuted(&pos)
}

fn block(d: &[Scalar], idx: &[usize], eig: Vec<Scalar>) -> Result<SymmetricMatrix> {
    let dd: Vec<Scalar> = idx.iter().map(|&i| d[i].clone()).collect();
    horn_construct(&eig, &dd)
}

/// Reverses the greedy transfers one 2×2 rotation at a time.
fn undo_transfers(m: &mut SymmetricMatrix, transfers: &[Transfer]) -> Result<()> {
    for tr in transfers.iter().rev() {
        let target = &m.exact_diagonal()[tr.from] + &tr.amount;
        m.rotate_to(tr.from, tr.to, &target)?;
    }
    Ok(())
}

fn interior_case(p: &TruncatedProblem, m0: usize, eta: &Scalar) -> Result<SymmetricMatrix> {
    let dim = p.diagonal.len();
    let cut = p.lower + m0;
    let i0: Vec<usize> = (0..p.lower).collect();
    let i1: Vec<usize> = (p.lower + p.sigma..dim).collect();
    let (moved, transfers) = move_mass_entries(&p.diagonal, &p.b, &i0, &i1, eta)?;

    let left: Vec<usize> = (0..cut).collect();
    let right: Vec<usize> = (cut..dim).collect();
    let e0 = block(&moved, &left, p.eigenvalues[..cut].to_vec())?;
    // upper block as B minus a block with the reflected data
    let comp_d: Vec<Scalar> = right.iter().map(|&i| &p.b - &moved[i]).collect();
    let comp_e: Vec<Scalar> = p.eigenvalues[cut..].iter().map(|x| &p.b - x).collect();
    let e1 = horn_construct(&comp_e, &comp_d)?.complement(&p.b);

    let mut m = assemble(dim, vec![(left, e0), (right, e1)]);
    undo_transfers(&mut m, &transfers)?;
    Ok(m)
}

fn upper_end_case(p: &TruncatedProblem) -> Result<SymmetricMatrix> {
    let dim = p.diagonal.len();
    let d = &p.diagonal;
    let interior = p.lower..p.lower + p.sigma;
    let need: Scalar = interior.clone().map(|i| &p.eigenvalues[i] - &d[i]).sum();

    // I0: lower entries from the top down until their mass covers `need`
    let mut i0 = Vec::new();
    let mut mass = Scalar::zero();
    let mut i = p.lower;
    while mass < need {
        if i == 0 {
            return Err(Error::precondition("lower mass cannot cover the interior deficit"));
        }
        i -= 1;
        mass += &d[i];
        i0.push(i);
    }
    i0.reverse();
    let eta = &mass - &need;

    // I1: upper entries from the bottom up until their room covers `eta`
    let mut i1 = Vec::new();
    let mut room = Scalar::zero();
    let mut j = p.lower + p.sigma;
    while room < eta {
        if j == dim {
            return Err(Error::precondition("upper room cannot absorb the excess"));
        }
        room += &p.b - &d[j];
        i1.push(j);
        j += 1;
    }
    let (moved, transfers) = move_mass_entries(d, &p.b, &i0, &i1, &eta)?;

    let e0_idx: Vec<usize> = i0.iter().copied().chain(interior.clone()).collect();
    let mut e0_eig = vec![Scalar::zero(); i0.len()];
    e0_eig.extend(p.eigenvalues[interior].iter().cloned());
    let e0 = block(&moved, &e0_idx, e0_eig)?;

    let proj_idx: Vec<usize> = (0..p.lower - i0.len()).chain(p.lower + p.sigma..dim).collect();
    let mut proj_eig = vec![Scalar::zero(); p.lower - i0.len()];
    proj_eig.extend(std::iter::repeat_n(p.b.clone(), p.upper));
    let proj = block(&moved, &proj_idx, proj_eig)?;

    let mut m = assemble(dim, vec![(proj_idx, proj), (e0_idx, e0)]);
    undo_transfers(&mut m, &transfers)?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;
    use crate::synthesis::eigen::symmetric_eigenvalues;

    fn sp(s: &str) -> SpectrumSpec {
        SpectrumSpec::parse_list(s).unwrap()
    }

    fn check(m: &SymmetricMatrix, p: &TruncatedProblem) {
        assert_eq!(m.exact_diagonal(), &p.diagonal[..]);
        for (x, y) in m.diagonal().iter().zip(&p.diagonal) {
            assert!((x - y.to_f64()).abs() < 1e-9);
        }
        let ev = symmetric_eigenvalues(m);
        for (x, y) in ev.iter().zip(&p.eigenvalues) {
            assert!((x - y.to_f64()).abs() < 1e-8, "{ev:?}");
        }
    }

    #[test]
    fn dyadic_half() {
        let seq = DiagonalSequence::two_sided_dyadic();
        let w = Witness::new(vec![1], -1).unwrap();
        let p = truncated_problem(&seq, &sp("0,1/2,1"), &w, 8).unwrap();
        for x in [q(1, 2), q(1, 4), q(1, 256), q(3, 4), q(255, 256)] {
            assert!(p.diagonal.contains(&x), "{x}");
        }
        let (m, _) = realize_problem(&p).unwrap();
        check(&m, &p);
        let w3 = Witness::new(vec![3], -2).unwrap();
        let p = truncated_problem(&seq, &sp("0,1/2,1"), &w3, 8).unwrap();
        check(&realize_problem(&p).unwrap().0, &p);
    }

    #[test]
    fn zeros_only_on_the_lower_side() {
        let seq = DiagonalSequence::new(q(1, 1), vec![])
            .unwrap()
            .with_zero_count(Count::Infinite)
            .with_b_tail(Tail::geometric(q(2, 3), q(2, 3)))
            .unwrap();
        let spec = sp("0,1/4,1/2,1");
        let dec = decide(&seq, &spec).unwrap();
        assert_eq!(dec.verdict, Verdict::FeasibleCaseII);
        for w in &dec.witnesses {
            let p = match truncated_problem(&seq, &spec, w, 0) {
                Err(Error::TruncationTooSmall { minimal, .. }) => truncated_problem(&seq, &spec, w, minimal).unwrap(),
                other => other.unwrap(),
            };
            check(&realize_problem(&p).unwrap().0, &p);
        }
    }

    #[test]
    fn all_three_construction_paths_occur() {
        let seq = DiagonalSequence::two_sided_dyadic();
        let mut seen = Vec::new();
        for s in ["0,1/2,1", "0,1/4,1", "0,3/4,1", "0,1/8,1", "0,7/8,1", "0,1/6,1", "0,5/6,1"] {
            let spec = sp(s);
            for w in crate::decider::enumerate_witnesses(&seq, &spec).unwrap() {
                let p = truncated_problem(&seq, &spec, &w, 10).unwrap();
                let (m, case) = realize_problem(&p).unwrap();
                check(&m, &p);
                seen.push(case);
            }
        }
        for case in [SrimCase::Interior, SrimCase::UpperEnd, SrimCase::LowerEnd] {
            assert!(seen.contains(&case), "{case:?} never exercised");
        }
    }

    #[test]
    fn finite_balanced_list() {
        let seq = DiagonalSequence::new(q(1, 1), vec![q(1, 4), q(1, 4), q(1, 2)]).unwrap();
        let w = Witness::new(vec![2], -1).unwrap();
        let p = truncated_problem(&seq, &sp("0,1/2,1"), &w, 0).unwrap();
        let (m, case) = realize_problem(&p).unwrap();
        assert_eq!(case, SrimCase::Finite);
        check(&m, &p);
    }

    #[test]
    fn straddling_tail_needs_longer_truncation() {
        let seq = DiagonalSequence::new(q(1, 1), vec![])
            .unwrap()
            .with_zero_tail(Tail::geometric(q(3, 4), q(1, 2)))
            .unwrap()
            .with_b_tail(Tail::geometric(q(1, 4), q(1, 2)))
            .unwrap();
        let spec = sp("0,1/2,1");
        let w = crate::decider::enumerate_witnesses(&seq, &spec).unwrap().remove(0);
        let err = truncated_problem(&seq, &spec, &w, 0).unwrap_err();
        assert!(matches!(err, Error::TruncationTooSmall { requested: 0, minimal } if minimal >= 1), "{err}");
    }

    #[test]
    fn rejects_bad_witness() {
        let seq = DiagonalSequence::two_sided_dyadic();
        let w = Witness::new(vec![2], -1).unwrap();
        assert!(matches!(truncated_problem(&seq, &sp("0,1/2,1"), &w, 8), Err(Error::InfeasibleWitness(_))));
    }
}
