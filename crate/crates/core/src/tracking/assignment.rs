//! Minimum-cost rectangular assignment (Hungarian method).

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Dense row-major cost matrix; rows are tracks, columns detections.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::RaggedCost);
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::RaggedCost);
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CostMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

/// Result of an association: matched pairs plus the leftovers on each side.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    /// `(track index, detection index)`, sorted by track index.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

impl Assignment {
    pub fn total_cost(&self, cost: &CostMatrix) -> f64 {
        self.matches.iter().map(|&(i, j)| cost.get(i, j)).sum()
    }

    fn from_matches(rows: usize, cols: usize, matches: Vec<(usize, usize)>) -> Self {
        let mut row_used = vec![false; rows];
        let mut col_used = vec![false; cols];
        for &(i, j) in &matches {
            row_used[i] = true;
            col_used[j] = true;
        }
        Assignment {
            matches,
            unmatched_tracks: (0..rows).filter(|&i| !row_used[i]).collect(),
            unmatched_detections: (0..cols).filter(|&j| !col_used[j]).collect(),
        }
    }
}

/// Solves the rectangular assignment problem: `min(rows, cols)` pairs with
/// the smallest total cost. Among equal-cost optima the returned match set
/// is the lexicographically smallest by `(row, col)`.
pub fn solve_assignment(cost: &CostMatrix) -> Result<Assignment> {
    for i in 0..cost.rows {
        for j in 0..cost.cols {
            if !cost.get(i, j).is_finite() {
                return Err(Error::NonFiniteCost { row: i, col: j });
            }
        }
    }
    let (rows, cols) = (cost.rows, cost.cols);
    if rows == 0 || cols == 0 {
        return Ok(Assignment::from_matches(rows, cols, Vec::new()));
    }

    // Constant padding: every complete matching of the square matrix uses the
    // same number of padded cells, so the padding value cannot change which
    // real pairs are optimal. Zero keeps the potentials well scaled.
    let n = rows.max(cols);
    let padded = |i: usize, j: usize| {
        if i < rows && j < cols {
            cost.get(i, j)
        } else {
            0.0
        }
    };
    let scale = cost.data.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let tol = 1e-12 * scale * n as f64;

    let (mut row_to_col, u, v) = hungarian(n, &padded);
    let tight = |i: usize, j: usize| padded(i, j) - u[i] - v[j] <= tol;
    lexicographic_refine(n, &mut row_to_col, &tight);

    let matches = (0..rows)
        .filter_map(|i| {
            let j = row_to_col[i];
            (j < cols).then_some((i, j))
        })
        .collect();
    Ok(Assignment::from_matches(rows, cols, matches))
}

/// Shortest augmenting path Hungarian method on an `n x n` matrix. Returns
/// the row to column matching and the dual potentials `u`, `v` with
/// `c(i, j) - u[i] - v[j] >= 0` and equality on matched cells.
fn hungarian(n: usize, cost: &impl Fn(usize, usize) -> f64) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    // 1-based internally; index 0 is the virtual root.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        col_owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[col_owner[j] - 1] = j - 1;
    }
    (row_to_col, u[1..].to_vec(), v[1..].to_vec())
}

/// Every perfect matching inside the tight-edge subgraph is optimal. Walks
/// rows in order and moves each to the smallest tight column that still
/// admits a perfect matching of the unfixed rows, found as an alternating
/// path through the current matching.
fn lexicographic_refine(n: usize, row_to_col: &mut [usize], tight: &impl Fn(usize, usize) -> bool) {
    let mut col_to_row = vec![0usize; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_to_row[j] = i;
    }

    for i in 0..n {
        let freed = row_to_col[i];
        for target in 0..freed {
            let holder = col_to_row[target];
            if holder < i || !tight(i, target) {
                continue;
            }
            // BFS over rows > i: from `holder`, reach `freed` via tight edges,
            // never using `target`.
            let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[holder] = true;
            let mut queue = VecDeque::from([holder]);
            let mut end = None;
            'search: while let Some(r) = queue.pop_front() {
                for (c, &next) in col_to_row.iter().enumerate() {
                    if c == target || c == row_to_col[r] || !tight(r, c) {
                        continue;
                    }
                    if c == freed {
                        end = Some((r, c));
                        break 'search;
                    }
                    if next > i && !seen[next] {
                        seen[next] = true;
                        parent[next] = Some((r, c));
                        queue.push_back(next);
                    }
                }
            }
            let Some((mut r, mut c)) = end else { continue };
            // Each row on the path takes the column that led away from it.
            loop {
                let prev = parent[r];
                row_to_col[r] = c;
                col_to_row[c] = r;
                match prev {
                    Some((pr, pc)) => {
                        r = pr;
                        c = pc;
                    }
                    None => break,
                }
            }
            row_to_col[i] = target;
            col_to_row[target] = i;
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive search over injective row to column maps.
    pub(crate) fn brute_force_min(cost: &CostMatrix) -> f64 {
        fn go(cost: &CostMatrix, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            let (rows, cols) = (cost.rows(), cost.cols());
            if row == rows {
                *best = best.min(acc);
                return;
            }
            // When rows exceed columns some rows stay unmatched.
            let remaining_rows = rows - row;
            let free_cols = used.iter().filter(|u| !**u).count();
            if remaining_rows > free_cols {
                go(cost, row + 1, used, acc, best);
            }
            for j in 0..cols {
                if !used[j] {
                    used[j] = true;
                    go(cost, row + 1, used, acc + cost.get(row, j), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        go(cost, 0, &mut vec![false; cost.cols()], 0.0, &mut best);
        best
    }

    #[test]
    fn single_cell() {
        let c = CostMatrix::from_rows(&[vec![7.0]]).unwrap();
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.matches, vec![(0, 0)]);
        assert_eq!(a.total_cost(&c), 7.0);
    }

    #[test]
    fn two_by_two_examples() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.matches, vec![(0, 0), (1, 1)]);
        assert_eq!(a.total_cost(&c), brute_force_min(&c));
        assert_eq!(a.total_cost(&c), 2.0);

        let c = CostMatrix::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.matches, vec![(0, 1), (1, 0)]);
        assert_eq!(a.total_cost(&c), 3.0);
    }

    #[test]
    fn ties_prefer_lowest_indices() {
        let c = CostMatrix::from_fn(4, 4, |_, _| 1.0);
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.matches, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);

        let c = CostMatrix::from_rows(&[vec![5.0], vec![5.0], vec![5.0]]).unwrap();
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.matches, vec![(0, 0)]);
        assert_eq!(a.unmatched_tracks, vec![1, 2]);

        let c = CostMatrix::from_rows(&[vec![2.0, 2.0, 2.0]]).unwrap();
        assert_eq!(solve_assignment(&c).unwrap().matches, vec![(0, 0)]);

        let c = CostMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(solve_assignment(&c).unwrap().matches, vec![(0, 1), (1, 0)]);
        let c = CostMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(solve_assignment(&c).unwrap().matches, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn empty_and_rectangular() {
        let c = CostMatrix::new(0, 3, vec![]).unwrap();
        let a = solve_assignment(&c).unwrap();
        assert!(a.matches.is_empty());
        assert_eq!(a.unmatched_detections, vec![0, 1, 2]);

        let c = CostMatrix::from_rows(&[vec![9.0, 1.0, 5.0], vec![1.0, 9.0, 0.5]]).unwrap();
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.matches, vec![(0, 1), (1, 2)]);
        assert_eq!(a.unmatched_detections, vec![0]);
    }

    #[test]
    fn non_finite_rejected() {
        let c = CostMatrix::from_rows(&[vec![1.0, f64::NAN]]).unwrap();
        assert!(matches!(
            solve_assignment(&c),
            Err(Error::NonFiniteCost { row: 0, col: 1 })
        ));
        assert!(CostMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    fn arb_cost() -> impl Strategy<Value = CostMatrix> {
        (0usize..=6, 0usize..=6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0u8..20, r * c)
                .prop_map(move |v| CostMatrix::new(r, c, v.into_iter().map(f64::from).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn optimal_and_partitioning(c in arb_cost()) {
            let a = solve_assignment(&c).unwrap();
            prop_assert_eq!(a.matches.len(), c.rows().min(c.cols()));
            if !a.matches.is_empty() {
                prop_assert_eq!(a.total_cost(&c), brute_force_min(&c));
            }
            let mut rows: Vec<_> = a.matches.iter().map(|m| m.0).chain(a.unmatched_tracks.iter().copied()).collect();
            let mut cols: Vec<_> = a.matches.iter().map(|m| m.1).chain(a.unmatched_detections.iter().copied()).collect();
            rows.sort_unstable();
            cols.sort_unstable();
            prop_assert_eq!(rows, (0..c.rows()).collect::<Vec<_>>());
            prop_assert_eq!(cols, (0..c.cols()).collect::<Vec<_>>());
        }
    }
}
