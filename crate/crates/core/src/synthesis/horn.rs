use crate::error::{Error, Result};
use crate::majorization::check_finite_majorization;
use crate::scalar::Scalar;

use super::matrix::SymmetricMatrix;

/// Real symmetric matrix with eigenvalues `lambda` and diagonal `d`.
///
/// Starts from `diag(λ)` and fixes targets largest first. For target `t`,
/// the active slots are paired as `p` (smallest value `≥ t`) and `q` (largest
/// value `< t`); one rotation moves `p` to `t` and `p` is retired. The
/// remaining active values still majorize the remaining targets, so the
/// chain never stalls and uses at most `N − 1` rotations.
pub fn horn_construct(lambda: &[Scalar], d: &[Scalar]) -> Result<SymmetricMatrix> {
    if lambda.len() != d.len() {
        return Err(Error::precondition(format!("{} eigenvalues for {} diagonal entries", lambda.len(), d.len())));
    }
    if d.is_empty() {
        return Ok(SymmetricMatrix::from_diagonal(&[]));
    }
    if !check_finite_majorization(d, lambda)? {
        return Err(Error::precondition("eigenvalues do not majorize the diagonal"));
    }
    let n = d.len();
    let mut start = lambda.to_vec();
    start.sort_by(|a, b| b.cmp(a));
    let mut m = SymmetricMatrix::from_diagonal(&start);

    let mut targets: Vec<usize> = (0..n).collect();
    targets.sort_by(|&a, &b| d[b].cmp(&d[a]));

    // active slots, kept sorted by current value, largest first
    let mut active: Vec<usize> = (0..n).collect();
    let mut perm = vec![0; n];
    for &ti in &targets {
        let t = &d[ti];
        let value = |s: usize, m: &SymmetricMatrix| m.exact_diagonal()[s].clone();
        let pos = active
            .iter()
            .rposition(|&s| &value(s, &m) >= t)
            .ok_or_else(|| Error::precondition("no active eigenvalue above target"))?;
        let p = active[pos];
        if &value(p, &m) != t {
            let q = *active
                .get(pos + 1)
                .ok_or_else(|| Error::precondition("no active eigenvalue below target"))?;
            m.rotate_to(p, q, t)?;
        }
        active.remove(pos);
        perm[ti] = p;
        // q's new value lies between its old value and p's, so order holds
    }
    let out = m.permuted(&perm);
    debug_assert_eq!(out.exact_diagonal(), d);
    Ok(out)
}
