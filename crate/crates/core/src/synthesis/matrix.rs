use std::fmt::Write as _;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A plane rotation applied as `M ← G M Gᵀ` in the `(i, j)` plane, where
/// row `i` becomes `cos·row_i + sin·row_j` and row `j` becomes
/// `−sin·row_i + cos·row_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rotation {
    pub i: usize,
    pub j: usize,
    pub cos: f64,
    pub sin: f64,
}

/// Dense real symmetric matrix. The upper triangle is stored once, so the
/// matrix is symmetric by construction. Alongside the binary64 entries the
/// intended diagonal is carried exactly.
#[derive(Clone, Debug)]
pub struct SymmetricMatrix {
    dim: usize,
    packed: Vec<f64>,
    exact_diag: Vec<Scalar>,
    provenance: Vec<Rotation>,
}

impl SymmetricMatrix {
    pub fn from_diagonal(diag: &[Scalar]) -> Self {
        let dim = diag.len();
        let mut m = SymmetricMatrix {
            dim,
            packed: vec![0.0; dim * (dim + 1) / 2],
            exact_diag: diag.to_vec(),
            provenance: Vec::new(),
        };
        for (i, x) in diag.iter().enumerate() {
            m.set(i, i, x.to_f64());
        }
        m
    }

    /// Builds from full rows; fails unless the rows are square and exactly
    /// symmetric. The exact diagonal is the binary64 diagonal read as
    /// rationals.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut exact_diag = Vec::with_capacity(dim);
        let mut m = SymmetricMatrix { dim, packed: vec![0.0; dim * (dim + 1) / 2], exact_diag: Vec::new(), provenance: Vec::new() };
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::parse(format!("row {i} has {} entries, expected {dim}", row.len())));
            }
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::parse(format!("entry ({i},{j}) is not finite")));
                }
                if j < i && rows[j][i] != x {
                    return Err(Error::parse(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
            for j in i..dim {
                m.set(i, j, row[j]);
            }
            exact_diag.push(Scalar::from_f64_exact(row[i]).expect("finite"));
        }
        m.exact_diag = exact_diag;
        Ok(m)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        r * self.dim - r * (r + 1) / 2 + c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[self.idx(i, j)]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, x: f64) {
        let k = self.idx(i, j);
        self.packed[k] = x;
    }

    pub fn exact_diagonal(&self) -> &[Scalar] {
        &self.exact_diag
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn provenance(&self) -> &[Rotation] {
        &self.provenance
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Applies the rotation numerically. The exact diagonal is the caller's
    /// responsibility.
    fn apply(&mut self, i: usize, j: usize, c: f64, s: f64) {
        let (aii, ajj, aij) = (self.get(i, i), self.get(j, j), self.get(i, j));
        for k in 0..self.dim {
            if k == i || k == j {
                continue;
            }
            let (xi, xj) = (self.get(i, k), self.get(j, k));
            self.set(i, k, c * xi + s * xj);
            self.set(j, k, -s * xi + c * xj);
        }
        self.set(i, i, c * c * aii + 2.0 * c * s * aij + s * s * ajj);
        self.set(j, j, s * s * aii - 2.0 * c * s * aij + c * c * ajj);
        self.set(i, j, (c * c - s * s) * aij + c * s * (ajj - aii));
        self.provenance.push(Rotation { i, j, cos: c, sin: s });
    }

    /// Rotates in the `(i, j)` plane so that entry `(i, i)` becomes `target`;
    /// `(j, j)` absorbs the difference, keeping the trace. `target` must lie
    /// between the two current diagonal values.
    pub(crate) fn rotate_to(&mut self, i: usize, j: usize, target: &Scalar) -> Result<()> {
        let (x, y) = (&self.exact_diag[i], &self.exact_diag[j]);
        let within = (x <= target && target <= y) || (y <= target && target <= x);
        if !within {
            return Err(Error::precondition(format!("rotation target {target} outside [{x}, {y}]")));
        }
        if target == x {
            return Ok(());
        }
        let rest = x + y - target;
        let (a, b, m, t) = (self.get(i, i), self.get(j, j), self.get(i, j), target.to_f64());
        let (c, s) = if m == 0.0 && a != b {
            // closed form for a diagonal block, c²a + s²b = t; the sign of s
            // makes the new off-diagonal entry take the sign of a − b
            let c2 = ((t - b) / (a - b)).clamp(0.0, 1.0);
            (c2.sqrt(), -(1.0 - c2).sqrt())
        } else {
            let h = (a - b) / 2.0;
            let r = h.hypot(m);
            if r == 0.0 {
                (1.0, 0.0)
            } else {
                let phi = m.atan2(h);
                let v = ((t - (a + b) / 2.0) / r).clamp(-1.0, 1.0);
                let theta = (phi + v.acos()) / 2.0;
                (theta.cos(), theta.sin())
            }
        };
        self.apply(i, j, c, s);
        self.exact_diag[i] = target.clone();
        self.exact_diag[j] = rest;
        Ok(())
    }

    /// Simultaneous row and column permutation: entry `(i, j)` of the result
    /// is entry `(perm[i], perm[j])` of `self`. Rotation indices are mapped
    /// to the new positions.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim);
        let mut inv = vec![0; self.dim];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut out = SymmetricMatrix {
            dim: self.dim,
            packed: vec![0.0; self.packed.len()],
            exact_diag: perm.iter().map(|&p| self.exact_diag[p].clone()).collect(),
            provenance: self.provenance.iter().map(|r| Rotation { i: inv[r.i], j: inv[r.j], ..*r }).collect(),
        };
        for i in 0..self.dim {
            for j in i..self.dim {
                out.set(i, j, self.get(perm[i], perm[j]));
            }
        }
        out
    }

    /// Block diagonal sum, blocks in order.
    pub fn direct_sum(blocks: &[SymmetricMatrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut out = SymmetricMatrix {
            dim,
            packed: vec![0.0; dim * (dim + 1) / 2],
            exact_diag: Vec::with_capacity(dim),
            provenance: Vec::new(),
        };
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in i..b.dim {
                    out.set(off + i, off + j, b.get(i, j));
                }
            }
            out.exact_diag.extend(b.exact_diag.iter().cloned());
            out.provenance.extend(b.provenance.iter().map(|r| Rotation { i: r.i + off, j: r.j + off, ..*r }));
            off += b.dim;
        }
        out
    }

    /// `c·I − M`.
    pub fn complement(&self, c: &Scalar) -> Self {
        let cf = c.to_f64();
        let mut out = self.clone();
        for x in out.packed.iter_mut() {
            *x = -*x;
        }
        for i in 0..self.dim {
            out.set(i, i, cf - self.get(i, i));
        }
        out.exact_diag = self.exact_diag.iter().map(|d| c - d).collect();
        out
    }

    /// `M + c·I`.
    pub fn shifted(&self, c: &Scalar) -> Self {
        let cf = c.to_f64();
        let mut out = self.clone();
        for i in 0..self.dim {
            out.set(i, i, self.get(i, i) + cf);
        }
        out.exact_diag = self.exact_diag.iter().map(|d| d + c).collect();
        out
    }

    /// Plain-text grid with aligned columns.
    pub fn to_grid(&self) -> String {
        let cells: Vec<Vec<String>> =
            self.rows().iter().map(|r| r.iter().map(|x| format!("{x:.6}")).collect()).collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
        let mut s = String::new();
        for row in &cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            let _ = writeln!(s, "{}", line.join("  "));
        }
        s
    }
}

impl PartialEq for SymmetricMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.packed == other.packed && self.exact_diag == other.exact_diag
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson { dim: self.dim, rows: self.rows() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymmetricMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        if raw.rows.len() != raw.dim {
            return Err(D::Error::custom(format!("dim is {} but {} rows given", raw.dim, raw.rows.len())));
        }
        SymmetricMatrix::from_rows(&raw.rows).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn packed_storage_mirrors() {
        let mut m = SymmetricMatrix::from_diagonal(&[q(1, 1), q(2, 1), q(3, 1)]);
        m.set(2, 0, 5.0);
        assert_eq!(m.get(0, 2), 5.0);
        assert_eq!(m.rows()[2][0], 5.0);
        assert_eq!(m.trace(), 6.0);
    }

    #[test]
    fn rotation_hits_target_and_keeps_trace() {
        let mut m = SymmetricMatrix::from_diagonal(&[q(2, 1), q(0, 1)]);
        m.rotate_to(0, 1, &q(1, 1)).unwrap();
        for (a, b) in m.rows().concat().iter().zip([1.0, 1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-15, "{a}");
        }
        assert_eq!(m.exact_diagonal(), &[q(1, 1), q(1, 1)]);
        assert_eq!(m.provenance().len(), 1);
        assert!(m.rotate_to(0, 1, &q(3, 1)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = SymmetricMatrix::from_diagonal(&[q(1, 2), q(1, 4)]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dim":2,"rows":[[0.5,0.0],[0.0,0.25]]}"#);
        let back: SymmetricMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SymmetricMatrix>(r#"{"dim":2,"rows":[[0,1],[2,0]]}"#).is_err());
    }

    #[test]
    fn permutation_and_direct_sum() {
        let a = SymmetricMatrix::from_diagonal(&[q(1, 1)]);
        let b = SymmetricMatrix::from_diagonal(&[q(2, 1), q(3, 1)]);
        let s = SymmetricMatrix::direct_sum(&[a, b]);
        let p = s.permuted(&[2, 0, 1]);
        assert_eq!(p.diagonal(), vec![3.0, 1.0, 2.0]);
        assert_eq!(p.complement(&q(3, 1)).exact_diagonal(), &[q(0, 1), q(2, 1), q(1, 1)]);
    }
}
