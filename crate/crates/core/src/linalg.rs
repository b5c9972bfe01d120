//! Dense exact linear algebra over `Q`.
//!
//! Everything here is Gauss-Jordan elimination on `BigRational` entries; the
//! matrices that occur (a few dozen rows and columns) never justify anything
//! cleverer.

use num_traits::{One, Signed, Zero};

use crate::arith::Q;

/// Row-major rational matrix. The column count is stored explicitly so that
/// matrices without rows still know their width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    ncols: usize,
    rows: Vec<Vec<Q>>,
}

impl Matrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { ncols, rows: vec![vec![Q::zero(); ncols]; nrows] }
    }

    pub fn from_rows(ncols: usize, rows: Vec<Vec<Q>>) -> Self {
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged matrix");
        Self { ncols, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.rows[i][j] = v;
    }

    pub fn push_row(&mut self, row: Vec<Q>) {
        assert_eq!(row.len(), self.ncols, "row width mismatch");
        self.rows.push(row);
    }

    /// Stacks `other` below `self`.
    pub fn stack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.ncols, other.ncols);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Matrix { ncols: self.ncols, rows }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.ncols, self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t.rows[j][i] = v.clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.ncols);
        self.rows.iter().map(|row| dot(row, v)).collect()
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut a = self.rows.clone();
        let pivots = rref_in_place(&mut a, self.ncols);
        (Matrix { ncols: self.ncols, rows: a }, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of `{x : A x = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.ncols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Q::zero(); self.ncols];
            v[free] = Q::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r.rows[row][free].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Some `x` with `A x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(b.len(), self.nrows());
        let mut aug: Vec<Vec<Q>> = self
            .rows
            .iter()
            .zip(b)
            .map(|(row, bi)| {
                let mut r = row.clone();
                r.push(bi.clone());
                r
            })
            .collect();
        let pivots = rref_in_place(&mut aug, self.ncols + 1);
        if pivots.last() == Some(&self.ncols) {
            return None;
        }
        let mut x = vec![Q::zero(); self.ncols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = aug[row][self.ncols].clone();
        }
        Some(x)
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

fn rref_in_place(a: &mut [Vec<Q>], ncols: usize) -> Vec<usize> {
    let m = a.len();
    let mut pivots = Vec::new();
    let mut prow = 0;
    for col in 0..ncols {
        if prow >= m {
            break;
        }
        let Some(found) = (prow..m).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(prow, found);
        let inv = a[prow][col].recip();
        for v in a[prow].iter_mut().skip(col) {
            *v = &*v * &inv;
        }
        let pivot_row = a[prow].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == prow || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                if !p.is_zero() {
                    *v = &*v - &factor * p;
                }
            }
        }
        pivots.push(col);
        prow += 1;
    }
    pivots
}

/// Precomputed consistency test for `A x = b` with a fixed `A` and many right
/// hand sides: `b` is attainable iff it is orthogonal to the left kernel of `A`.
#[derive(Debug, Clone)]
pub struct ConsistencyTest {
    left_kernel: Vec<Vec<Q>>,
}

impl ConsistencyTest {
    pub fn new(a: &Matrix) -> Self {
        Self { left_kernel: a.transpose().nullspace() }
    }

    pub fn is_consistent(&self, b: &[Q]) -> bool {
        self.left_kernel.iter().all(|y| dot(y, b).is_zero())
    }

    pub fn left_kernel(&self) -> &[Vec<Q>] {
        &self.left_kernel
    }

    /// Codimension of the column space.
    pub fn corank(&self) -> usize {
        self.left_kernel.len()
    }
}

/// Searches for `x` with `A x = 0` and every coordinate `>= 1` (equivalently a
/// strictly positive kernel vector, after scaling). Exact two-phase simplex
/// with Bland's rule on `A s = -A 1`, `s >= 0`.
pub fn strictly_positive_kernel_vector(a: &Matrix) -> Option<Vec<Q>> {
    let n = a.ncols();
    let ones = vec![Q::one(); n];
    let rhs: Vec<Q> = a.mul_vec(&ones).into_iter().map(|v| -v).collect();
    let s = nonnegative_solution(a, &rhs)?;
    Some(s.into_iter().map(|v| v + Q::one()).collect())
}

/// Phase-one simplex: finds `x >= 0` with `A x = b` or proves none exists.
pub fn nonnegative_solution(a: &Matrix, b: &[Q]) -> Option<Vec<Q>> {
    let m = a.nrows();
    let n = a.ncols();
    if m == 0 {
        return Some(vec![Q::zero(); n]);
    }
    // Tableau columns: n structural, m artificial, then the right hand side.
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row = vec![Q::zero(); width];
        for (j, cell) in row.iter_mut().enumerate().take(n) {
            *cell = if flip { -a.get(i, j).clone() } else { a.get(i, j).clone() };
        }
        row[n + i] = Q::one();
        row[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(row);
    }
    // Objective: minimise the sum of artificials, written as reduced costs.
    let mut obj = vec![Q::zero(); width];
    for row in &t {
        for j in 0..n {
            obj[j] = &obj[j] - &row[j];
        }
        obj[width - 1] = &obj[width - 1] - &row[width - 1];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Bland: smallest index with negative reduced cost enters.
    while let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, Q)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[width - 1] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (pr, _) = leave.expect("phase-one objective is bounded below by zero");
        pivot(&mut t, &mut obj, pr, enter);
        basis[pr] = enter;
    }

    if !obj[width - 1].is_zero() {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][width - 1].clone();
        }
    }
    debug_assert_eq!(a.mul_vec(&x), b.to_vec());
    Some(x)
}

fn pivot(t: &mut [Vec<Q>], obj: &mut [Q], pr: usize, pc: usize) {
    let inv = t[pr][pc].recip();
    for v in t[pr].iter_mut() {
        *v = &*v * &inv;
    }
    let prow = t[pr].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == pr || row[pc].is_zero() {
            continue;
        }
        let f = row[pc].clone();
        for (v, p) in row.iter_mut().zip(&prow) {
            *v = &*v - &f * p;
        }
    }
    if !obj[pc].is_zero() {
        let f = obj[pc].clone();
        for (v, p) in obj.iter_mut().zip(&prow) {
            *v = &*v - &f * p;
        }
    }
}
