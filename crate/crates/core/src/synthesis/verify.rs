use serde::Serialize;

use crate::majorization::Witness;
use crate::scalar::Scalar;
use crate::sequence::SpectrumSpec;

use super::eigen::symmetric_eigenvalues;
use super::matrix::SymmetricMatrix;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationReport {
    /// The tracked rational diagonal equals the expected one.
    pub diagonal_exact_match: bool,
    /// Largest `|M_ii − d_i|` in binary64; infinite on a length mismatch.
    pub diagonal_max_error: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Largest distance from an eigenvalue to the nearest `A_j`.
    pub spectrum_distance: f64,
    /// Eigenvalue count per `A_0, …, A_{n+1}` after nearest-point rounding.
    pub multiplicities: Vec<usize>,
    /// Interior multiplicities equal `N`, when a witness was given.
    pub witness_match: Option<bool>,
    pub within_tolerance: bool,
}

impl RealizationReport {
    pub fn passed(&self) -> bool {
        self.diagonal_exact_match && self.within_tolerance && self.witness_match != Some(false)
    }
}

/// Checks a matrix against a spectrum and a diagonal. Failures are reported,
/// never raised.
pub fn verify_realization(
    m: &SymmetricMatrix,
    spectrum: &SpectrumSpec,
    expected_diagonal: &[Scalar],
    witness: Option<&Witness>,
    tol: f64,
) -> RealizationReport {
    let diagonal_exact_match = m.exact_diagonal() == expected_diagonal;
    let diagonal_max_error = if expected_diagonal.len() == m.dim() {
        m.diagonal().iter().zip(expected_diagonal).map(|(x, y)| (x - y.to_f64()).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let points: Vec<f64> = spectrum.points().iter().map(Scalar::to_f64).collect();
    let eigenvalues = symmetric_eigenvalues(m);
    let mut multiplicities = vec![0usize; points.len()];
    let mut spectrum_distance: f64 = 0.0;
    for &e in &eigenvalues {
        let (j, dist) = points
            .iter()
            .enumerate()
            .map(|(j, a)| (j, (e - a).abs()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("spectrum is nonempty");
        multiplicities[j] += 1;
        spectrum_distance = spectrum_distance.max(dist);
    }
    let witness_match = witness.map(|w| {
        let inner = &multiplicities[1..multiplicities.len() - 1];
        inner.len() == w.counts().len() && inner.iter().zip(w.counts()).all(|(&a, &b)| a as u64 == b)
    });
    RealizationReport {
        diagonal_exact_match,
        diagonal_max_error,
        eigenvalues,
        spectrum_distance,
        multiplicities,
        witness_match,
        within_tolerance: spectrum_distance <= tol,
    }
}
