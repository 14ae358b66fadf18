use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequence::DiagonalSequence;

/// One unit of the greedy transfer: `amount` leaves entry `from` and
/// arrives at entry `to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub amount: Scalar,
}

/// Moves mass `eta0` from the entries indexed by `i0` to those indexed by
/// `i1`, in a list with values in `[0, B]`.
///
/// Entries of `i0` are lowered smallest first, each to zero before the next
/// is touched; entries of `i1` are raised largest first, each to `B`. The
/// transfers pair the two streams in order.
pub fn move_mass_entries(
    d: &[Scalar],
    b: &Scalar,
    i0: &[usize],
    i1: &[usize],
    eta0: &Scalar,
) -> Result<(Vec<Scalar>, Vec<Transfer>)> {
    if let Some(&i) = i0.iter().chain(i1).find(|&&i| i >= d.len()) {
        return Err(Error::precondition(format!("index {i} out of range")));
    }
    if i0.iter().any(|i| i1.contains(i)) {
        return Err(Error::precondition("index sets must be disjoint"));
    }
    if eta0.is_negative() {
        return Err(Error::precondition("eta0 must be nonnegative"));
    }
    let max0 = i0.iter().map(|&i| &d[i]).max();
    let min1 = i1.iter().map(|&i| &d[i]).min();
    if let (Some(hi), Some(lo)) = (max0, min1) {
        if hi > lo {
            return Err(Error::precondition(format!("max over I0 is {hi} but min over I1 is {lo}")));
        }
    }
    let low_mass: Scalar = i0.iter().map(|&i| &d[i]).sum();
    let high_room: Scalar = i1.iter().map(|&i| b - &d[i]).sum();
    if eta0 > &low_mass || eta0 > &high_room {
        return Err(Error::precondition(format!(
            "eta0 = {eta0} exceeds min({low_mass}, {high_room})"
        )));
    }

    let mut order0: Vec<usize> = i0.to_vec();
    order0.sort_by(|&a, &c| d[a].cmp(&d[c]));
    let mut order1: Vec<usize> = i1.to_vec();
    order1.sort_by(|&a, &c| d[c].cmp(&d[a]));

    let mut out = d.to_vec();
    let mut transfers = Vec::new();
    let mut left = eta0.clone();
    let (mut p, mut q) = (0, 0);
    while left.is_positive() {
        let (src, dst) = (order0[p], order1[q]);
        let give = out[src].clone();
        let room = b - &out[dst];
        let amount = give.clone().min(room.clone()).min(left.clone());
        if amount.is_positive() {
            out[src] -= &amount;
            out[dst] += &amount;
            left -= &amount;
            transfers.push(Transfer { from: src, to: dst, amount: amount.clone() });
        }
        if amount == give {
            p += 1;
        }
        if amount == room {
            q += 1;
        }
    }
    Ok((out, transfers))
}

/// [`move_mass_entries`] on the explicit entries of a sequence; counts and
/// tails are carried over untouched.
pub fn move_mass(seq: &DiagonalSequence, i0: &[usize], i1: &[usize], eta0: &Scalar) -> Result<DiagonalSequence> {
    let (moved, _) = move_mass_entries(seq.explicit(), seq.b(), i0, i1, eta0)?;
    DiagonalSequence::new(seq.b().clone(), moved)?
        .with_zero_count(seq.zero_count())
        .with_b_count(seq.b_count())
        .with_zero_tail(seq.zero_tail().clone())?
        .with_b_tail(seq.b_tail().clone())
}
