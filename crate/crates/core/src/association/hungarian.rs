//! Minimum-cost assignment with forbidden (gated) entries.
//!
//! Rectangular inputs are padded to square with zero-cost dummy rows or
//! columns; gated entries get a penalty larger than any achievable spread
//! of valid costs, so the solver first maximises the number of valid pairs
//! and then minimises their total cost. Pairs landing on a gated entry are
//! reported as unmatched.

use crate::costs::CostMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T> {
    /// `(row, col)` pairs in increasing row order.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
    pub total_cost: T,
}

impl<T: Real> Assignment<T> {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            pairs: Vec::new(),
            unmatched_rows: (0..rows).collect(),
            unmatched_cols: (0..cols).collect(),
            total_cost: T::zero(),
        }
    }

    /// Column matched to `row`, if any.
    pub fn col_of(&self, row: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == row).map(|p| p.1)
    }
}

/// O(n³) shortest-augmenting-path Hungarian algorithm.
///
/// Among optimal assignments the lexicographically smallest pair list is
/// returned: rows are fixed in increasing order, each to the smallest column
/// that still admits an optimal completion.
pub fn hungarian<T: Real>(costs: &CostMatrix<T>) -> Assignment<T> {
    let (rows, cols) = (costs.rows(), costs.cols());
    if rows == 0 || cols == 0 {
        return Assignment::empty(rows, cols);
    }
    let valid: Vec<T> = (0..rows).flat_map(|r| (0..cols).filter_map(move |c| costs.get(r, c))).collect();
    if valid.is_empty() {
        return Assignment::empty(rows, cols);
    }
    let lo = valid.iter().copied().fold(T::infinity(), T::min);
    let hi = valid.iter().copied().fold(T::neg_infinity(), T::max);

    let n = rows.max(cols);
    let n_t = T::from_usize(n).expect("matrix size fits in float");
    let penalty = n_t * (hi - lo) + T::one();
    let mut a = vec![vec![T::zero(); n]; n];
    for (r, row) in a.iter_mut().enumerate().take(rows) {
        for (c, v) in row.iter_mut().enumerate().take(cols) {
            *v = match costs.get(r, c) {
                Some(x) => x - lo,
                None => penalty,
            };
        }
    }

    let (row_of_col, u, v) = solve_square(&a);
    let eps = T::tolerance() * (T::one() + penalty);
    let tight: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| (a[i][j] - u[i + 1] - v[j + 1]).abs() <= eps).collect()).collect();
    let mut col_of_row = vec![usize::MAX; n];
    for (j, &i) in row_of_col.iter().enumerate() {
        col_of_row[i] = j;
    }
    lexicographic_refine(&tight, &mut col_of_row);

    let mut pairs = Vec::new();
    let mut used_cols = vec![false; cols];
    let mut unmatched_rows = Vec::new();
    let mut total = T::zero();
    for (r, &c) in col_of_row.iter().enumerate().take(rows) {
        match (c < cols).then(|| costs.get(r, c)).flatten() {
            Some(x) => {
                pairs.push((r, c));
                used_cols[c] = true;
                total = total + x;
            }
            None => unmatched_rows.push(r),
        }
    }
    let unmatched_cols = (0..cols).filter(|&c| !used_cols[c]).collect();
    Assignment { pairs, unmatched_rows, unmatched_cols, total_cost: total }
}

/// Assignment in which leaving a row or a column unmatched costs
/// `unmatched_cost` each, so a pair is used only when it is cheaper than
/// leaving both sides open. Solved as [`hungarian`] on the matrix
/// augmented with one private dummy partner per row and per column.
pub fn hungarian_with_unmatched<T: Real>(costs: &CostMatrix<T>, unmatched_cost: T) -> Assignment<T> {
    let (rows, cols) = (costs.rows(), costs.cols());
    if rows == 0 || cols == 0 {
        return Assignment::empty(rows, cols);
    }
    let n = rows + cols;
    let mut big = CostMatrix::gated(n, n);
    for r in 0..rows {
        for c in 0..cols {
            big.set(r, c, costs.get(r, c));
        }
        big.set(r, cols + r, Some(unmatched_cost));
    }
    for c in 0..cols {
        big.set(rows + c, c, Some(unmatched_cost));
        for d in 0..rows {
            big.set(rows + c, cols + d, Some(T::zero()));
        }
    }
    let full = hungarian(&big);
    let pairs: Vec<(usize, usize)> = full.pairs.into_iter().filter(|&(r, c)| r < rows && c < cols).collect();
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut total = T::zero();
    for &(r, c) in &pairs {
        row_used[r] = true;
        col_used[c] = true;
        total = total + costs.get(r, c).expect("pairs avoid gated entries");
    }
    Assignment {
        pairs,
        unmatched_rows: (0..rows).filter(|&r| !row_used[r]).collect(),
        unmatched_cols: (0..cols).filter(|&c| !col_used[c]).collect(),
        total_cost: total,
    }
}

/// Solves a square assignment. Returns the row assigned to each column and
/// the dual potentials `u` (rows) and `v` (columns), both 1-indexed.
fn solve_square<T: Real>(a: &[Vec<T>]) -> (Vec<usize>, Vec<T>, Vec<T>) {
    let n = a.len();
    let inf = T::infinity();
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    // p[j]: row (1-indexed) matched to column j; p[0] is the row being inserted
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = a[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let row_of_col = (1..=n).map(|j| p[j] - 1).collect();
    (row_of_col, u, v)
}

/// Rewrites a perfect matching on the tight-edge graph into the
/// lexicographically smallest one (by row, then column).
fn lexicographic_refine(tight: &[Vec<bool>], col_of_row: &mut [usize]) {
    let n = tight.len();
    let mut row_of_col = vec![usize::MAX; n];
    for (r, &c) in col_of_row.iter().enumerate() {
        row_of_col[c] = r;
    }
    for i in 0..n {
        let current = col_of_row[i];
        for j in 0..current {
            if !tight[i][j] {
                continue;
            }
            // hand j to row i and look for an alternating path that rehomes
            // its owner without touching rows 0..=i
            let displaced = row_of_col[j];
            if displaced < i {
                continue;
            }
            let saved_cols = col_of_row.to_vec();
            let saved_rows = row_of_col.clone();
            col_of_row[i] = j;
            row_of_col[j] = i;
            col_of_row[displaced] = usize::MAX;
            row_of_col[current] = usize::MAX;
            let mut visited = vec![false; n];
            if augment(displaced, i, tight, col_of_row, &mut row_of_col, &mut visited) {
                break;
            }
            col_of_row.copy_from_slice(&saved_cols);
            row_of_col = saved_rows;
        }
    }
}

/// Kuhn-style augmenting path from a free `row`, only moving rows after `fixed`.
fn augment(
    row: usize,
    fixed: usize,
    tight: &[Vec<bool>],
    col_of_row: &mut [usize],
    row_of_col: &mut [usize],
    visited: &mut [bool],
) -> bool {
    for j in 0..tight.len() {
        if !tight[row][j] || visited[j] {
            continue;
        }
        visited[j] = true;
        let owner = row_of_col[j];
        if owner == usize::MAX || (owner > fixed && augment(owner, fixed, tight, col_of_row, row_of_col, visited)) {
            col_of_row[row] = j;
            row_of_col[j] = row;
            return true;
        }
    }
    false
}
