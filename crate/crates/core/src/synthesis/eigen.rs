use super::matrix::SymmetricMatrix;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order, by cyclic Jacobi rotations on a dense
/// copy.
pub fn symmetric_eigenvalues(m: &SymmetricMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut a = m.rows();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_ones() {
        let m = SymmetricMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let ev = symmetric_eigenvalues(&m);
        assert!(ev[0].abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12, "{ev:?}");
    }

    #[test]
    fn tridiagonal_known_spectrum() {
        // path-graph Laplacian-like matrix 2 on the diagonal, -1 off it:
        // eigenvalues 2 − 2cos(kπ/(n+1))
        let n: usize = 6;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 2.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 }).collect())
            .collect();
        let ev = symmetric_eigenvalues(&SymmetricMatrix::from_rows(&rows).unwrap());
        for (k, e) in ev.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((e - want).abs() < 1e-12, "{e} vs {want}");
        }
    }
}
