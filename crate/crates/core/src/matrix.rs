//! Pivoted Cholesky for symmetric positive (semi)definite matrices.
//!
//! The arithmetic mirrors [`CholeskyState`](crate::cholesky::CholeskyState)
//! step for step, so a matrix viewed as a kernel on the index set `{1..m}`
//! factorises identically through either route.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;

use crate::cholesky::{pivot_argmax, BREAKDOWN_TOLERANCE, NEGATIVE_SLACK, TIE_TOLERANCE};
use crate::error::{Error, Result};

/// Largest order for which the spectrum is checked on construction.
pub const EIGEN_CHECK_LIMIT: usize = 2000;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const EIGEN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    a: DMatrix<f64>,
    min_eigenvalue: Option<f64>,
}

impl SpdMatrix {
    /// Validates symmetry and, for `m ≤ EIGEN_CHECK_LIMIT`, that the smallest
    /// eigenvalue is at least `−1e−10·trace`.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let mut out = Self::new_unchecked_spectrum(a)?;
        let m = out.order();
        if m <= EIGEN_CHECK_LIMIT {
            let min = out.a.clone().symmetric_eigenvalues().min();
            let trace = out.a.trace();
            if min < -EIGEN_TOLERANCE * trace.abs() {
                return Err(Error::arg(format!("matrix is not positive semidefinite: eigenvalue {min:e}")));
            }
            out.min_eigenvalue = Some(min);
        }
        Ok(out)
    }

    /// Checks shape, finiteness and symmetry only.
    pub fn new_unchecked_spectrum(a: DMatrix<f64>) -> Result<Self> {
        let m = a.nrows();
        if m == 0 || a.ncols() != m {
            return Err(Error::arg(format!("expected a nonempty square matrix, got {}x{}", m, a.ncols())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("matrix has non-finite entries".into()));
        }
        let scale = a.amax();
        for i in 0..m {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(Error::Argument(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        if (0..m).any(|i| a[(i, i)] < 0.0) {
            return Err(Error::Argument("matrix has a negative diagonal entry".into()));
        }
        Ok(SpdMatrix { a, min_eigenvalue: None })
    }

    pub fn from_fn(m: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(m, m, f))
    }

    /// `A_ij = min(i, j)/m` for `i, j ∈ {1..m}`.
    pub fn brownian(m: usize) -> Result<Self> {
        Self::from_fn(m, |i, j| (i.min(j) + 1) as f64 / m as f64)
    }

    /// `B Bᵀ/k + ridge·I` with `B` an `m×k` matrix of uniform entries in `[−1, 1]`.
    pub fn random<R: Rng>(m: usize, k: usize, ridge: f64, rng: &mut R) -> Result<Self> {
        let b = DMatrix::from_fn(m, k, |_, _| rng.random_range(-1.0..1.0));
        let mut a = &b * b.transpose() / k.max(1) as f64;
        for i in 0..m {
            a[(i, i)] += ridge;
        }
        let a = (&a + a.transpose()) * 0.5;
        Self::new(a)
    }

    /// Plain-text form: first line `m`, then `m` rows of `m` whitespace-separated numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let m: usize = header.parse().map_err(|_| Error::Parse(format!("bad matrix order '{header}'")))?;
        if m == 0 {
            return Err(Error::Parse("matrix order must be positive".into()));
        }
        let mut a = DMatrix::zeros(m, m);
        for i in 0..m {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("expected {m} rows, found {i}")))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("row {}: bad number '{t}'", i + 1))))
                .collect::<Result<_>>()?;
            if row.len() != m {
                return Err(Error::Parse(format!("row {} has {} entries, expected {m}", i + 1, row.len())));
            }
            for (j, v) in row.into_iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        if lines.next().is_some() {
            return Err(Error::Parse(format!("more than {m} rows")));
        }
        Self::new(a)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let m = self.order();
        let mut s = format!("{m}\n");
        for i in 0..m {
            let row: Vec<String> = (0..m).map(|j| format!("{:.16e}", self.a[(i, j)])).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Smallest eigenvalue, when the spectrum was checked.
    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.min_eigenvalue
    }

    /// Whether the checked spectrum is bounded away from zero.
    pub fn is_positive_definite(&self) -> Option<bool> {
        self.min_eigenvalue.map(|e| e > EIGEN_TOLERANCE * self.a.trace().abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.a.amax()
    }

    /// `P A Pᵀ`, i.e. entry `(i, j)` becomes `A[perm[i], perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.order();
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::arg("not a permutation of the matrix indices"));
        }
        Ok(SpdMatrix {
            a: DMatrix::from_fn(m, m, |i, j| self.a[(perm[i], perm[j])]),
            min_eigenvalue: self.min_eigenvalue,
        })
    }
}

/// `G_A = max_{i≠j} |A_ii − A_ij| / |i − j|` by exhaustive scan.
pub fn discrete_lipschitz(a: &SpdMatrix) -> Result<f64> {
    let m = a.order();
    if m < 2 {
        return Err(Error::arg("the discrete Lipschitz constant needs m >= 2"));
    }
    let mut g = 0.0f64;
    for i in 0..m {
        let aii = a.get(i, i);
        for j in 0..m {
            if i != j {
                g = g.max((aii - a.get(i, j)).abs() / i.abs_diff(j) as f64);
            }
        }
    }
    Ok(g)
}

/// `4(m − 1)G_A/(n − 1)`, defined for `n > 1`.
pub fn matrix_bound(m: usize, g_a: f64, n: usize) -> Option<f64> {
    (n > 1).then(|| 4.0 * (m - 1) as f64 * g_a / (n - 1) as f64)
}

/// Incremental complete-pivoting factorisation `A ≈ Σ c_k c_kᵀ`.
#[derive(Debug, Clone)]
pub struct MatrixFactorization {
    pivots: Vec<usize>,
    columns: Vec<Vec<f64>>,
    diag: Vec<f64>,
    max_diag0: f64,
}

impl MatrixFactorization {
    pub fn new(a: &SpdMatrix) -> Self {
        let diag: Vec<f64> = (0..a.order()).map(|i| a.get(i, i)).collect();
        let max_diag0 = diag.iter().copied().fold(0.0, f64::max);
        MatrixFactorization { pivots: Vec::new(), columns: Vec::new(), diag, max_diag0 }
    }

    pub fn breakdown_threshold(&self) -> f64 {
        BREAKDOWN_TOLERANCE * self.max_diag0
    }

    /// Lowest index within the tie tolerance of the largest residual diagonal.
    pub fn max_diag(&self) -> (usize, f64) {
        let i = pivot_argmax(&self.diag, TIE_TOLERANCE * self.max_diag0, self.breakdown_threshold()).unwrap_or(0);
        (i, self.diag[i])
    }

    pub fn step(&mut self, a: &SpdMatrix, pivot: usize) -> Result<()> {
        let m = self.diag.len();
        if pivot >= m || self.pivots.contains(&pivot) {
            return Err(Error::arg(format!("invalid pivot index {pivot}")));
        }
        let d = self.diag[pivot];
        let tolerance = self.breakdown_threshold();
        if d <= tolerance {
            return Err(Error::Breakdown { step: self.rank() + 1, value: d, tolerance });
        }
        let mut col: Vec<f64> = (0..m).map(|i| a.get(i, pivot)).collect();
        for cj in &self.columns {
            let cjz = cj[pivot];
            for (c, &v) in col.iter_mut().zip(cj) {
                *c -= cjz * v;
            }
        }
        let root = d.sqrt();
        let inv = 1.0 / root;
        for c in col.iter_mut() {
            *c *= inv;
        }
        col[pivot] = root;
        let floor = -NEGATIVE_SLACK * self.max_diag0;
        for (i, (r, &c)) in self.diag.iter_mut().zip(&col).enumerate() {
            *r -= c * c;
            if *r < 0.0 {
                if *r < floor {
                    return Err(Error::Numeric(format!("residual diagonal {r:e} at index {i} went negative")));
                }
                *r = 0.0;
            }
        }
        self.diag[pivot] = 0.0;
        self.columns.push(col);
        self.pivots.push(pivot);
        Ok(())
    }

    /// One complete-pivoting step; returns the chosen index.
    pub fn step_complete(&mut self, a: &SpdMatrix) -> Result<usize> {
        let (i, d) = self.max_diag();
        let tolerance = self.breakdown_threshold();
        if d <= tolerance {
            return Err(Error::Breakdown { step: self.rank() + 1, value: d, tolerance });
        }
        self.step(a, i)?;
        Ok(i)
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn diag_residual(&self) -> &[f64] {
        &self.diag
    }

    /// `A_n = Σ c_k c_kᵀ` as a dense matrix.
    pub fn approximation(&self) -> DMatrix<f64> {
        let m = self.diag.len();
        let mut out = DMatrix::zeros(m, m);
        for c in &self.columns {
            let v = nalgebra::DVector::from_column_slice(c);
            out.ger(1.0, &v, &v, 1.0);
        }
        out
    }
}

/// `n` steps of complete pivoting.
pub fn matrix_pivoted_cholesky(a: &SpdMatrix, n: usize) -> Result<MatrixFactorization> {
    if n == 0 || n > a.order() {
        return Err(Error::arg(format!("need 1 <= n <= {}, got {n}", a.order())));
    }
    let mut f = MatrixFactorization::new(a);
    for _ in 0..n {
        f.step_complete(a)?;
    }
    Ok(f)
}

/// `‖A − A_n‖_max`, computed densely.
pub fn residual_max_entry(f: &MatrixFactorization, a: &SpdMatrix) -> f64 {
    (a.as_matrix() - f.approximation()).amax()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRecord {
    pub n: usize,
    pub pivot: usize,
    pub residual_max: f64,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct MatrixRun {
    pub g_a: f64,
    pub records: Vec<MatrixRecord>,
    pub violations: usize,
    /// The residual vanished (to the breakdown tolerance) before `n_max` steps.
    pub exhausted: bool,
}

/// Complete pivoting for up to `n_max` steps, tracking `‖A − A_n‖_max`
/// densely and checking `4(m − 1)G_A/(n − 1)` with absolute slack `slack`.
pub fn matrix_convergence(a: &SpdMatrix, n_max: usize, slack: f64) -> Result<MatrixRun> {
    let m = a.order();
    let g_a = discrete_lipschitz(a)?;
    let mut f = MatrixFactorization::new(a);
    let mut residual = a.as_matrix().clone();
    let mut records = Vec::new();
    let mut violations = 0;
    let mut exhausted = false;
    for n in 1..=n_max.min(m) {
        if f.max_diag().1 <= f.breakdown_threshold() {
            exhausted = true;
            break;
        }
        let pivot = f.step_complete(a)?;
        let c = nalgebra::DVector::from_column_slice(&f.columns()[n - 1]);
        residual.ger(-1.0, &c, &c, 1.0);
        let residual_max = residual.amax();
        let bound = matrix_bound(m, g_a, n);
        if bound.is_some_and(|b| residual_max > b + slack) {
            violations += 1;
        }
        records.push(MatrixRecord { n, pivot, residual_max, bound });
    }
    Ok(MatrixRun { g_a, records, violations, exhausted })
}
