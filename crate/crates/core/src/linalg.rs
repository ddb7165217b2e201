//! Exact Gauss-Jordan elimination over ℚ(i) with deterministic pivoting:
//! columns are scanned in order, and the pivot is the first remaining row
//! (in original order) with a nonzero entry in that column.

use crate::error::{Error, Result};
use crate::scalar::GaussScalar;

/// A linear system `matrix · x = rhs` with labelled unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystemExact {
    pub matrix: Vec<Vec<GaussScalar>>,
    pub rhs: Vec<GaussScalar>,
    pub column_labels: Vec<String>,
}

/// Particular solution plus a nullspace basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub particular: Vec<GaussScalar>,
    pub nullspace: Vec<Vec<GaussScalar>>,
}

/// Reduced row echelon form of `[A | B]` for a block of right-hand sides.
#[derive(Clone, Debug)]
pub struct Echelon {
    /// Reduced rows of `A`; the first `pivots.len()` are the pivot rows.
    pub rows: Vec<Vec<GaussScalar>>,
    /// Transformed right-hand sides, one vector per row.
    pub rhs: Vec<Vec<GaussScalar>>,
    /// Pivot column of each pivot row.
    pub pivots: Vec<usize>,
    /// Original index of each row.
    pub origin: Vec<usize>,
    pub cols: usize,
}

impl Echelon {
    /// Gauss-Jordan on `matrix` with `rhs` carried along (`rhs[r]` has the
    /// same length for every row; pass empty vectors for a plain matrix).
    pub fn new(matrix: Vec<Vec<GaussScalar>>, rhs: Vec<Vec<GaussScalar>>, cols: usize) -> Echelon {
        assert_eq!(matrix.len(), rhs.len());
        let mut rows = matrix;
        let mut rhs = rhs;
        let mut origin: Vec<usize> = (0..rows.len()).collect();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..cols {
            if next == rows.len() {
                break;
            }
            let Some(found) = (next..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            // move the pivot row up while keeping the others in original order
            let row = rows.remove(found);
            rows.insert(next, row);
            let b = rhs.remove(found);
            rhs.insert(next, b);
            let o = origin.remove(found);
            origin.insert(next, o);

            let inv = rows[next][col].inv().expect("nonzero pivot");
            if !inv.is_one() {
                for v in rows[next].iter_mut().chain(rhs[next].iter_mut()) {
                    if !v.is_zero() {
                        *v = &*v * &inv;
                    }
                }
            }
            let support: Vec<usize> = (0..cols).filter(|&c| !rows[next][c].is_zero()).collect();
            let rhs_support: Vec<usize> = (0..rhs[next].len()).filter(|&c| !rhs[next][c].is_zero()).collect();
            let prow = rows[next].clone();
            let pb = rhs[next].clone();
            for r in 0..rows.len() {
                if r == next || rows[r][col].is_zero() {
                    continue;
                }
                let f = rows[r][col].clone();
                for &c in &support {
                    let delta = &f * &prow[c];
                    rows[r][c] -= &delta;
                }
                for &c in &rhs_support {
                    let delta = &f * &pb[c];
                    rhs[r][c] -= &delta;
                }
            }
            pivots.push(col);
            next += 1;
        }
        Echelon { rows, rhs, pivots, origin, cols }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Original index of the first non-pivot row whose right-hand side in
    /// column `k` is nonzero, i.e. the first row reducing to `0 = c ≠ 0`.
    pub fn inconsistent_row(&self, k: usize) -> Option<usize> {
        (self.rank()..self.rows.len()).filter(|&r| !self.rhs[r][k].is_zero()).map(|r| self.origin[r]).min()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols).filter(|&c| !is_pivot[c]).collect()
    }

    /// Particular solution for rhs column `k` with free unknowns set to zero.
    pub fn particular(&self, k: usize) -> Vec<GaussScalar> {
        let mut x = vec![GaussScalar::zero(); self.cols];
        for (r, &p) in self.pivots.iter().enumerate() {
            x[p] = self.rhs[r][k].clone();
        }
        x
    }

    /// One basis vector per free column, in column order.
    pub fn nullspace(&self) -> Vec<Vec<GaussScalar>> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut v = vec![GaussScalar::zero(); self.cols];
                v[f] = GaussScalar::one();
                for (r, &p) in self.pivots.iter().enumerate() {
                    if !self.rows[r][f].is_zero() {
                        v[p] = -&self.rows[r][f];
                    }
                }
                v
            })
            .collect()
    }
}

impl LinearSystemExact {
    pub fn new(matrix: Vec<Vec<GaussScalar>>, rhs: Vec<GaussScalar>, column_labels: Vec<String>) -> Result<Self> {
        let cols = column_labels.len();
        if matrix.len() != rhs.len() {
            return Err(Error::ShapeMismatch(format!("{} rows but {} right-hand sides", matrix.len(), rhs.len())));
        }
        if let Some(r) = matrix.iter().position(|row| row.len() != cols) {
            return Err(Error::ShapeMismatch(format!("row {} has {} entries, expected {}", r + 1, matrix[r].len(), cols)));
        }
        Ok(LinearSystemExact { matrix, rhs, column_labels })
    }

    /// Homogeneous system with unnamed columns `c0, c1, ...`.
    pub fn homogeneous(matrix: Vec<Vec<GaussScalar>>, cols: usize) -> Self {
        let rhs = vec![GaussScalar::zero(); matrix.len()];
        LinearSystemExact { matrix, rhs, column_labels: (0..cols).map(|c| format!("c{c}")).collect() }
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.column_labels.len()
    }

    pub fn echelon(&self) -> Echelon {
        let rhs = self.rhs.iter().map(|b| vec![b.clone()]).collect();
        Echelon::new(self.matrix.clone(), rhs, self.cols())
    }

    pub fn rank(&self) -> usize {
        Echelon::new(self.matrix.clone(), vec![vec![]; self.rows()], self.cols()).rank()
    }
}

/// Solves exactly. An inconsistent system reports the 1-based index of the
/// first row that reduces to `0 = c` with `c ≠ 0`.
pub fn solve_linear_exact(sys: &LinearSystemExact) -> Result<Solution> {
    let ech = sys.echelon();
    if let Some(row) = ech.inconsistent_row(0) {
        return Err(Error::Inconsistent { row: row + 1 });
    }
    Ok(Solution { particular: ech.particular(0), nullspace: ech.nullspace() })
}

/// Rank of a list of row vectors of common length `cols`.
pub fn rank(rows: &[Vec<GaussScalar>], cols: usize) -> usize {
    Echelon::new(rows.to_vec(), vec![vec![]; rows.len()], cols).rank()
}

/// True when the two row sets span the same subspace.
pub fn same_row_span(a: &[Vec<GaussScalar>], b: &[Vec<GaussScalar>], cols: usize) -> bool {
    let ra = rank(a, cols);
    let rb = rank(b, cols);
    if ra != rb {
        return false;
    }
    let mut both = a.to_vec();
    both.extend_from_slice(b);
    rank(&both, cols) == ra
}

pub fn mat_vec(matrix: &[Vec<GaussScalar>], x: &[GaussScalar]) -> Vec<GaussScalar> {
    matrix
        .iter()
        .map(|row| {
            let mut acc = GaussScalar::zero();
            for (a, b) in row.iter().zip(x) {
                if !a.is_zero() && !b.is_zero() {
                    acc += &(a * b);
                }
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<GaussScalar>> {
        rows.iter().map(|r| r.iter().map(|&v| GaussScalar::from(v)).collect()).collect()
    }

    fn sys(rows: &[&[i64]], rhs: Vec<GaussScalar>) -> LinearSystemExact {
        let m = ints(rows);
        let cols = m[0].len();
        LinearSystemExact::new(m, rhs, (0..cols).map(|c| format!("v{c}")).collect()).unwrap()
    }

    #[test]
    fn identity_with_complex_rhs() {
        let s = sys(&[&[1, 0], &[0, 1]], vec![GaussScalar::one(), GaussScalar::i()]);
        let sol = solve_linear_exact(&s).unwrap();
        assert_eq!(sol.particular, vec![GaussScalar::one(), GaussScalar::i()]);
        assert!(sol.nullspace.is_empty());
    }

    #[test]
    fn rank_deficient_system() {
        let s = sys(&[&[1, 1], &[2, 2]], vec![GaussScalar::from(3), GaussScalar::from(6)]);
        let sol = solve_linear_exact(&s).unwrap();
        assert_eq!(sol.particular, vec![GaussScalar::from(3), GaussScalar::zero()]);
        assert_eq!(sol.nullspace, vec![vec![GaussScalar::from(-1), GaussScalar::one()]]);
    }

    #[test]
    fn inconsistency_reports_row() {
        let s = sys(&[&[1, 1], &[2, 2]], vec![GaussScalar::from(3), GaussScalar::from(5)]);
        assert_eq!(solve_linear_exact(&s).unwrap_err(), Error::Inconsistent { row: 2 });
    }

    #[test]
    fn shape_checked() {
        let err = LinearSystemExact::new(ints(&[&[1, 2]]), vec![], vec!["a".into(), "b".into()]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn pivoting_is_column_ordered() {
        let s = sys(&[&[0, 1, 1], &[1, 0, 2], &[1, 1, 3]], vec![GaussScalar::zero(); 3]);
        let e = s.echelon();
        assert_eq!(e.pivots, vec![0, 1]);
        assert_eq!(e.origin[..2], [1, 0]);
        assert_eq!(e.nullspace(), vec![ints(&[&[-2, -1, 1]])[0].clone()]);
    }

    #[test]
    fn row_span_comparison() {
        let a = ints(&[&[1, 0, 1], &[0, 1, 1]]);
        let b = ints(&[&[1, 1, 2], &[1, -1, 0]]);
        let c = ints(&[&[1, 1, 0]]);
        assert!(same_row_span(&a, &b, 3));
        assert!(!same_row_span(&a, &c, 3));
    }
}
