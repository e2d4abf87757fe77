//! Small dense linear algebra for the low-dimensional problems in this crate.
//!
//! Everything here works on plain `f64` slices and a row-major [`Matrix`].
//! Dimensions are tiny (ambient dimension rarely above 5, a few dozen
//! constraints at most), so the routines favour clarity over blocking.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from a list of rows. Returns `None` when rows are ragged
    /// or the list is empty.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let cols = rows.first()?.len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Some(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Option<Self> {
        Some(Self::from_rows(columns)?.transpose())
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ * y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            axpy(yi, self.row(i), &mut out);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Numerical rank by Gaussian elimination with partial pivoting.
    pub fn rank(&self) -> usize {
        rank_of_rows(&self.to_rows(), self.cols)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

pub fn distance2(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Reduces `rows` (each of length `cols`) to row echelon form in place and
/// returns the pivot columns.
fn echelon(rows: &mut [Vec<f64>], cols: usize) -> Vec<usize> {
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let (best, best_abs) = (r..rows.len())
            .map(|i| (i, rows[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs <= eps {
            continue;
        }
        rows.swap(r, best);
        let piv = rows[r][c];
        for v in rows[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][c];
                if f != 0.0 {
                    let pivot_row = rows[r].clone();
                    axpy(-f, &pivot_row, &mut rows[i]);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_of_rows(rows: &[Vec<f64>], cols: usize) -> usize {
    let mut work = rows.to_vec();
    echelon(&mut work, cols).len()
}

/// A unit vector orthogonal to every row of `rows`, provided the rows span a
/// subspace of dimension exactly `cols - 1`. Returns `None` otherwise.
pub fn orthogonal_complement_line(rows: &[Vec<f64>], cols: usize) -> Option<Vec<f64>> {
    if cols == 1 {
        return if rows.iter().all(|r| r[0] == 0.0) {
            Some(vec![1.0])
        } else {
            None
        };
    }
    let mut work = rows.to_vec();
    let pivots = echelon(&mut work, cols);
    if pivots.len() != cols - 1 {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut x = vec![0.0; cols];
    x[free] = 1.0;
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = -work[r][free];
    }
    let n = norm2(&x);
    Some(scale(1.0 / n, &x))
}

/// Least squares `min ‖A s − b‖` where `A` is given by its columns.
/// Householder QR; returns `None` if the columns are numerically dependent.
pub fn least_squares(columns: &[&[f64]], b: &[f64]) -> Option<Vec<f64>> {
    let k = columns.len();
    let n = b.len();
    if k == 0 {
        return Some(Vec::new());
    }
    if k > n {
        return None;
    }
    // Work on column-major copy.
    let mut a: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let mut rhs = b.to_vec();
    let col_scale = a.iter().map(|c| norm2(c)).fold(0.0f64, f64::max);
    for j in 0..k {
        let alpha = {
            let tail = &a[j][j..];
            let nrm = norm2(tail);
            if nrm <= 1e-12 * col_scale.max(f64::MIN_POSITIVE) {
                return None;
            }
            if a[j][j] > 0.0 {
                -nrm
            } else {
                nrm
            }
        };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(j) {
            let f = 2.0 * dot(&v, &col[j..]) / vnorm2;
            axpy(-f, &v, &mut col[j..]);
        }
        let f = 2.0 * dot(&v, &rhs[j..]) / vnorm2;
        axpy(-f, &v, &mut rhs[j..]);
    }
    let mut s = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = rhs[i];
        for j in i + 1..k {
            acc -= a[j][i] * s[j];
        }
        let d = a[i][i];
        if d.abs() <= 1e-12 * col_scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        s[i] = acc / d;
    }
    Some(s)
}

/// Outcome of [`nnls`].
#[derive(Clone, Debug)]
pub struct NnlsSolution {
    pub coefficients: Vec<f64>,
    /// `‖A λ − b‖₂` at the returned coefficients.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nonnegative least squares `min ‖A λ − b‖₂ s.t. λ ≥ 0` by the
/// Lawson–Hanson active-set method. `A` is given by its columns.
pub fn nnls(columns: &[Vec<f64>], b: &[f64], max_iter: usize) -> NnlsSolution {
    let m = columns.len();
    let mut lambda = vec![0.0; m];
    let mut passive = vec![false; m];
    let col_scale = columns.iter().map(|c| norm2(c)).fold(0.0f64, f64::max);
    let wtol = 1e-13 * col_scale.max(1e-300) * norm2(b).max(1e-300);
    let residual_of = |lambda: &[f64]| {
        let mut r = b.to_vec();
        for (c, &l) in columns.iter().zip(lambda) {
            if l != 0.0 {
                axpy(-l, c, &mut r);
            }
        }
        r
    };
    let mut iterations = 0;
    let mut converged = false;
    let mut blocked = vec![false; m];
    'outer: while iterations < max_iter {
        iterations += 1;
        let r = residual_of(&lambda);
        let w: Vec<f64> = columns.iter().map(|c| dot(c, &r)).collect();
        let candidate = (0..m)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > wtol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(t) = candidate else {
            converged = true;
            break;
        };
        passive[t] = true;
        loop {
            iterations += 1;
            if iterations > max_iter {
                break 'outer;
            }
            let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            let cols: Vec<&[f64]> = idx.iter().map(|&j| columns[j].as_slice()).collect();
            let Some(s) = least_squares(&cols, b) else {
                // Column t is numerically dependent on the passive set.
                passive[t] = false;
                blocked[t] = true;
                continue 'outer;
            };
            if s.iter().all(|&v| v > 0.0) {
                for (&j, &v) in idx.iter().zip(&s) {
                    lambda[j] = v;
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&j, &v) in idx.iter().zip(&s) {
                if v <= 0.0 {
                    let denom = lambda[j] - v;
                    if denom > 0.0 {
                        alpha = alpha.min(lambda[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (&j, &v) in idx.iter().zip(&s) {
                lambda[j] += alpha * (v - lambda[j]);
                if lambda[j] <= 1e-15 * (1.0 + v.abs()) {
                    lambda[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !idx.iter().any(|&j| passive[j]) {
                break;
            }
        }
    }
    let residual = norm2(&residual_of(&lambda));
    NnlsSolution {
        coefficients: lambda,
        residual,
        iterations,
        converged,
    }
}

/// Result of [`lp_min_cover`].
#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    /// No nonnegative `x` satisfies the constraints.
    Infeasible,
    /// The pivot limit was reached.
    Stalled,
}

/// Solves `min wᵀx s.t. M x ≥ c, x ≥ 0` for `w ≥ 0`.
///
/// Runs the tableau simplex on the dual `max cᵀy s.t. Mᵀy ≤ w, y ≥ 0`,
/// which starts feasible at `y = 0` because `w ≥ 0`. The primal optimum is
/// read off the reduced costs of the dual slacks. Bland's rule prevents
/// cycling. An unbounded dual means the primal is infeasible.
pub fn lp_min_cover(m: &[Vec<f64>], c: &[f64], w: &[f64]) -> LpOutcome {
    let rows = m.len(); // dual variables
    let nvar = w.len(); // dual constraints
    debug_assert!(w.iter().all(|&v| v >= 0.0));
    // Tableau: nvar constraint rows, columns = rows (y) + nvar (slack) + 1 (rhs).
    let width = rows + nvar + 1;
    let mut t = vec![vec![0.0; width]; nvar + 1];
    for i in 0..nvar {
        for p in 0..rows {
            t[i][p] = m[p][i];
        }
        t[i][rows + i] = 1.0;
        t[i][width - 1] = w[i];
    }
    // Objective row holds -c for maximisation.
    for p in 0..rows {
        t[nvar][p] = -c[p];
    }
    let mut basis: Vec<usize> = (0..nvar).map(|i| rows + i).collect();
    let eps = 1e-12;
    let mut optimal = false;
    for _ in 0..10_000 {
        let Some(enter) = (0..width - 1).find(|&j| t[nvar][j] < -eps) else {
            optimal = true;
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..nvar {
            let a = t[i][enter];
            if a > eps {
                let ratio = t[i][width - 1] / a;
                let better = ratio < best - eps
                    || (ratio <= best + eps && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return LpOutcome::Infeasible;
        };
        let piv = t[leave][enter];
        for v in t[leave].iter_mut() {
            *v /= piv;
        }
        let pivot_row = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != leave {
                let f = row[enter];
                if f != 0.0 {
                    axpy(-f, &pivot_row, row);
                }
            }
        }
        basis[leave] = enter;
    }
    if !optimal {
        return LpOutcome::Stalled;
    }
    let x: Vec<f64> = (0..nvar).map(|i| t[nvar][rows + i].max(0.0)).collect();
    let objective = dot(w, &x);
    LpOutcome::Optimal { x, objective }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_detects_dependent_columns() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert_eq!(m.rank(), 1);
        assert_eq!(Matrix::identity(3).rank(), 3);
    }

    #[test]
    fn complement_line_is_orthogonal() {
        let rows = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let h = orthogonal_complement_line(&rows, 3).unwrap();
        for r in &rows {
            assert!(dot(r, &h).abs() < 1e-12);
        }
        assert!((norm2(&h) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_solves_square_system() {
        let c0 = [2.0, 0.0];
        let c1 = [1.0, 3.0];
        let s = least_squares(&[&c0, &c1], &[5.0, 6.0]).unwrap();
        assert!((s[0] - 1.5).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nnls_clamps_negative_direction() {
        // Columns (1,0) and (-1,2); target (1,-2) is best approximated by (1,0).
        let cols = vec![vec![1.0, 0.0], vec![-1.0, 2.0]];
        let sol = nnls(&cols, &[1.0, -2.0], 100);
        assert!(sol.converged);
        assert!((sol.coefficients[0] - 1.0).abs() < 1e-12);
        assert_eq!(sol.coefficients[1], 0.0);
        assert!((sol.residual - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nnls_exact_interior_fit() {
        let cols = vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 1.0]];
        let sol = nnls(&cols, &[3.0, 2.0, 1.0], 100);
        assert!(sol.residual < 1e-12);
        for (got, want) in sol.coefficients.iter().zip([1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lp_min_cover_small_instance() {
        // min x1 + x2 s.t. x1 + 2 x2 >= 2, 3 x1 + x2 >= 3  -> x = (0.8, 0.6), obj 1.4
        let m = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        match lp_min_cover(&m, &[2.0, 3.0], &[1.0, 1.0]) {
            LpOutcome::Optimal { x, objective } => {
                assert!((objective - 1.4).abs() < 1e-12);
                assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 0.6).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lp_min_cover_infeasible() {
        // 0 * x >= 1 is impossible.
        let m = vec![vec![0.0, 0.0]];
        assert_eq!(lp_min_cover(&m, &[1.0], &[1.0, 1.0]), LpOutcome::Infeasible);
    }
}
