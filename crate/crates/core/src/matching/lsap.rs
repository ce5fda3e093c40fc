//! Linear sum assignment by the shortest-augmenting-path Hungarian method.
//!
//! Costs are carried as a pair `(cost, tie)` ordered lexicographically. The
//! integer `tie` component of entry `(r, c)` is `c · n^(n-1-r)`, so the sum
//! of tie keys over an assignment is the assignment read as a base-`n`
//! number. Minimising the pair therefore returns, among all minimum-cost
//! assignments, the lexicographically smallest one in row-major order. The
//! Hungarian method only needs an ordered abelian group, so nothing else
//! changes.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use crate::error::{Error, Result};

/// Largest size for which tie keys fit in an `i128` with headroom for the
/// potential updates. Above it ties fall back to the solver's scan order.
const MAX_LEX_SIZE: usize = 24;

/// A square cost matrix, possibly padded with dummy rows/columns.
///
/// Rows `real_rows..n` and columns `real_cols..n` are padding; they exist to
/// make the problem square and represent assignment to the null element.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
    real_rows: usize,
    real_cols: usize,
}

impl CostMatrix {
    /// Square matrix from row-major entries; every entry must be finite.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::domain(format!(
                "cost matrix of size {n} needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::domain(format!(
                "cost matrix entry ({}, {}) is not finite",
                pos / n,
                pos % n
            )));
        }
        Ok(Self {
            n,
            entries,
            real_rows: n,
            real_cols: n,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().position(|row| row.len() != n) {
            return Err(Error::domain(format!(
                "cost matrix is not square: row {r} has {} entries, expected {n}",
                rows[r].len()
            )));
        }
        Self::new(n, rows.concat())
    }

    /// `rows × cols` costs from `cost(r, c)`, zero-padded to a square of side
    /// `max(rows, cols)`. The caller guarantees finite costs.
    pub fn padded(rows: usize, cols: usize, mut cost: impl FnMut(usize, usize) -> f64) -> Self {
        let n = rows.max(cols);
        let mut entries = vec![0.0; n * n];
        for r in 0..rows {
            for c in 0..cols {
                entries[r * n + c] = cost(r, c);
            }
        }
        debug_assert!(entries.iter().all(|x| x.is_finite()));
        Self {
            n,
            entries,
            real_rows: rows,
            real_cols: cols,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.n + c]
    }

    pub fn is_padding_row(&self, r: usize) -> bool {
        r >= self.real_rows
    }

    pub fn is_padding_col(&self, c: usize) -> bool {
        c >= self.real_cols
    }

    /// Cost of an assignment, summed in row order.
    pub fn assignment_cost(&self, row_to_col: &[usize]) -> f64 {
        row_to_col
            .iter()
            .enumerate()
            .fold(0.0, |acc, (r, &c)| acc + self.get(r, c))
    }
}

/// A perfect assignment of rows to columns and its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub row_to_col: Vec<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Lex {
    cost: f64,
    tie: i128,
}

impl Lex {
    const ZERO: Lex = Lex { cost: 0.0, tie: 0 };
    const INF: Lex = Lex {
        cost: f64::INFINITY,
        tie: 0,
    };
}

impl PartialOrd for Lex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.cost.partial_cmp(&other.cost)? {
            Ordering::Equal => Some(self.tie.cmp(&other.tie)),
            ord => Some(ord),
        }
    }
}

impl Add for Lex {
    type Output = Lex;
    fn add(self, o: Lex) -> Lex {
        Lex {
            cost: self.cost + o.cost,
            tie: self.tie + o.tie,
        }
    }
}

impl Sub for Lex {
    type Output = Lex;
    fn sub(self, o: Lex) -> Lex {
        Lex {
            cost: self.cost - o.cost,
            tie: self.tie - o.tie,
        }
    }
}

impl AddAssign for Lex {
    fn add_assign(&mut self, o: Lex) {
        *self = *self + o;
    }
}

impl SubAssign for Lex {
    fn sub_assign(&mut self, o: Lex) {
        *self = *self - o;
    }
}

/// Minimum-cost perfect assignment of a square matrix. Among co-optimal
/// assignments the lexicographically smallest `row_to_col` is returned
/// (exactly for `n ≤ 24`).
pub fn solve_lsap(matrix: &CostMatrix) -> Result<Assignment> {
    let n = matrix.n;
    if n == 0 {
        return Ok(Assignment {
            row_to_col: Vec::new(),
            cost: 0.0,
        });
    }
    // place values: weight[r] = n^(n-1-r)
    let weights: Vec<i128> = if n <= MAX_LEX_SIZE {
        let mut w = vec![1i128; n];
        for r in (0..n - 1).rev() {
            w[r] = w[r + 1] * n as i128;
        }
        w
    } else {
        vec![0; n]
    };
    let entry = |r: usize, c: usize| Lex {
        cost: matrix.get(r, c),
        tie: c as i128 * weights[r],
    };

    // 1-based: index 0 is the virtual source row/column
    let mut u = vec![Lex::ZERO; n + 1];
    let mut v = vec![Lex::ZERO; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![Lex::INF; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.fill(Lex::INF);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = Lex::INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = entry(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            debug_assert!(j1 != 0, "finite costs always leave a free column");
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
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

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    let cost = matrix.assignment_cost(&row_to_col);
    Ok(Assignment { row_to_col, cost })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(rows: &[Vec<f64>]) -> Assignment {
        solve_lsap(&CostMatrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn zero_diagonal_is_identity() {
        let a = solve(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(a.row_to_col, vec![0, 1]);
        assert_eq!(a.cost, 0.0);
    }

    #[test]
    fn anti_diagonal_optimum() {
        // brute force: identity costs 4+3=7, swap costs 1+2=3
        let a = solve(&[vec![4.0, 1.0], vec![2.0, 3.0]]);
        assert_eq!(a.row_to_col, vec![1, 0]);
        assert_eq!(a.cost, 3.0);
    }

    #[test]
    fn ties_resolve_to_lexicographic_minimum() {
        let a = solve(&vec![vec![0.0; 4]; 4]);
        assert_eq!(a.row_to_col, vec![0, 1, 2, 3]);
        // rows 0 and 1 may swap columns 2/3 at equal cost, row 2 prefers col 0
        let a = solve(&[
            vec![5.0, 5.0, 1.0, 1.0],
            vec![5.0, 5.0, 1.0, 1.0],
            vec![1.0, 1.0, 5.0, 5.0],
            vec![1.0, 1.0, 5.0, 5.0],
        ]);
        assert_eq!(a.row_to_col, vec![2, 3, 0, 1]);
        assert_eq!(a.cost, 4.0);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(CostMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(CostMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(CostMatrix::new(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn empty_matrix() {
        let a = solve_lsap(&CostMatrix::new(0, vec![]).unwrap()).unwrap();
        assert!(a.row_to_col.is_empty());
    }

    #[test]
    fn padding_marks() {
        let m = CostMatrix::padded(2, 3, |r, c| (r * 3 + c) as f64);
        assert_eq!(m.size(), 3);
        assert!(m.is_padding_row(2));
        assert!(!m.is_padding_col(2));
        assert_eq!(m.get(2, 1), 0.0);
        assert_eq!(m.get(1, 2), 5.0);
    }

    #[test]
    fn large_problem_still_optimal() {
        // beyond the tie-key limit: a permuted diagonal of zeros among ones
        let n = 30;
        let perm: Vec<usize> = (0..n).map(|i| (i * 7) % n).collect();
        let m = CostMatrix::padded(n, n, |r, c| if perm[r] == c { 0.0 } else { 1.0 });
        let a = solve_lsap(&m).unwrap();
        assert_eq!(a.row_to_col, perm);
        assert_eq!(a.cost, 0.0);
    }
}
