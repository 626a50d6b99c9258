//! Dense linear algebra on small-to-moderate real matrices.
//!
//! Everything here is row-major and allocation-happy: the matrices this crate
//! handles are at most a few thousand wide, and the selector is dominated by
//! characteristic-polynomial work rather than by copies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polynomial::RealPoly;
use crate::scalar::Scalar;

const MAX_JACOBI_SWEEPS: usize = 100;

/// A real `n_rows x n_cols` matrix stored row-major with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenseMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<T>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "dimensions must be positive, got {n_rows}x{n_cols}"
            )));
        }
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "{n_rows}x{n_cols} matrix needs {} entries, got {}",
                n_rows * n_cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / n_cols,
                pos % n_cols
            )));
        }
        Ok(Self { n_rows, n_cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), n_cols, rows.concat())
    }

    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        let n_rows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != n_rows) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        let n_cols = cols.len();
        let mut data = vec![T::zero(); n_rows * n_cols];
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                data[i * n_cols + j] = v;
            }
        }
        Self::new(n_rows, n_cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Self { n_rows: n, n_cols: n, data }
    }

    pub(crate) fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, data: vec![T::zero(); n_rows * n_cols] }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n_cols != other.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            let out_row = &mut out.data[i * other.n_cols..(i + 1) * other.n_cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(l)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.n_cols);
        (0..self.n_rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `Aᵀ v`.
    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.n_rows);
        let mut out = vec![T::zero(); self.n_cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        out
    }

    /// The column submatrix `A_S`, columns in the order given.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        check_subset(indices, self.n_cols)?;
        let cols: Vec<Vec<T>> = indices.iter().map(|&j| self.column(j)).collect();
        if cols.is_empty() {
            return Err(Error::InvalidMatrix("empty column selection".into()));
        }
        Self::from_columns(&cols)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn frobenius_norm_sq(&self) -> T {
        self.data.iter().map(|&v| v * v).sum()
    }

    pub fn cast<U: Scalar>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|&v| U::lit(v.as_f64())).collect(),
        }
    }
}

/// A symmetric `dim x dim` matrix, stored in full row-major form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    /// Validates symmetry to `1e-12 * (1 + max|entry|)` and then symmetrizes exactly.
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{dim}x{dim} matrix needs {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let mut m = Self { dim, data };
        let scale = T::one() + m.max_abs();
        let tol = T::floor_tol(1e-12, 16.0) * scale;
        let mut defect = T::zero();
        for i in 0..dim {
            for j in i + 1..dim {
                defect = defect.max((m.get(i, j) - m.get(j, i)).abs());
            }
        }
        if defect > tol {
            return Err(Error::NotSymmetric { defect: defect.as_f64() });
        }
        m.symmetrize();
        Ok(m)
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let dim = diag.len();
        let mut data = vec![T::zero(); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = d;
        }
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); dim])
    }

    /// Builds `(m + mᵀ)/2` from an arbitrary square buffer without validation.
    pub(crate) fn symmetrized_from(dim: usize, data: Vec<T>) -> Self {
        let mut m = Self { dim, data };
        m.symmetrize();
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `M <- (M + Mᵀ)/2`.
    pub fn symmetrize(&mut self) {
        let n = self.dim;
        let half = T::lit(0.5);
        for i in 0..n {
            for j in i + 1..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i]) * half;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|i| dot(self.row(i), v)).collect()
    }

    /// Principal submatrix `M(S)`.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Result<Self> {
        check_subset(indices, self.dim)?;
        if indices.is_empty() {
            return Err(Error::InvalidMatrix("empty principal submatrix".into()));
        }
        let m = indices.len();
        let mut data = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                data.push(self.get(i, j));
            }
        }
        Ok(Self { dim: m, data })
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }

    pub fn into_dense(self) -> DenseMatrix<T> {
        DenseMatrix { n_rows: self.dim, n_cols: self.dim, data: self.data }
    }

    /// `M − (u vᵀ + v uᵀ)·a + u uᵀ·b`, symmetrized.
    pub(crate) fn sym_rank2_update(&self, u: &[T], v: &[T], a: T, b: T) -> Self {
        let n = self.dim;
        let mut data = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] += b * u[i] * u[j] - a * (u[i] * v[j] + v[i] * u[j]);
            }
        }
        Self::symmetrized_from(n, data)
    }

    /// `M − w wᵀ / s`, symmetrized.
    pub(crate) fn rank1_downdate(&self, w: &[T], s: T) -> Self {
        let n = self.dim;
        let mut data = self.data.clone();
        for i in 0..n {
            let wi = w[i] / s;
            for j in 0..n {
                data[i * n + j] -= wi * w[j];
            }
        }
        Self::symmetrized_from(n, data)
    }
}

/// Orthogonal projector `Q_S = I − A_S A_S†` onto the complement of a selected span.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Projector<T> {
    matrix: SymMatrix<T>,
}

impl<T: Scalar> Projector<T> {
    pub fn identity(n: usize) -> Self {
        Self { matrix: SymMatrix::identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn matrix(&self) -> &SymMatrix<T> {
        &self.matrix
    }

    pub fn apply(&self, b: &[T]) -> Vec<T> {
        self.matrix.mul_vec(b)
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    /// `‖Q² − Q‖_F`.
    pub fn idempotency_defect(&self) -> T {
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                let qq: T = (0..n).map(|l| self.matrix.get(i, l) * self.matrix.get(l, j)).sum();
                let diff = qq - self.matrix.get(i, j);
                acc += diff * diff;
            }
        }
        acc.sqrt()
    }

    /// `Q − (Qb)(Qb)ᵀ/‖Qb‖²`; see [`projector_update`].
    pub fn update(&self, b: &[T], tol: T) -> Result<Self> {
        projector_update(self, b, tol)
    }

    /// Applies the update for a precomputed `u = Qb`, `s = ‖u‖²`.
    pub(crate) fn downdate(&self, u: &[T], s: T) -> Self {
        Self { matrix: self.matrix.rank1_downdate(u, s) }
    }
}

/// Which Gram product [`gram`] forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// `AᵀA`, `d x d`.
    Columns,
    /// `AAᵀ`, `n x n`.
    Rows,
}

/// `AᵀA` or `AAᵀ`, exactly symmetric.
pub fn gram<T: Scalar>(a: &DenseMatrix<T>, orientation: Orientation) -> SymMatrix<T> {
    let (n, d) = (a.n_rows, a.n_cols);
    match orientation {
        Orientation::Columns => {
            let mut data = vec![T::zero(); d * d];
            for i in 0..n {
                let r = a.row(i);
                for p in 0..d {
                    let rp = r[p];
                    if rp == T::zero() {
                        continue;
                    }
                    for q in p..d {
                        data[p * d + q] += rp * r[q];
                    }
                }
            }
            for p in 0..d {
                for q in 0..p {
                    data[p * d + q] = data[q * d + p];
                }
            }
            SymMatrix { dim: d, data }
        }
        Orientation::Rows => {
            let mut data = vec![T::zero(); n * n];
            for p in 0..n {
                for q in p..n {
                    let v = dot(a.row(p), a.row(q));
                    data[p * n + q] = v;
                    data[q * n + p] = v;
                }
            }
            SymMatrix { dim: n, data }
        }
    }
}

/// The Gram product of the smaller side: `AᵀA` when `d <= n`, else `AAᵀ`.
/// Both share the same nonzero spectrum.
pub fn compact_gram<T: Scalar>(a: &DenseMatrix<T>) -> SymMatrix<T> {
    if a.n_cols <= a.n_rows {
        gram(a, Orientation::Columns)
    } else {
        gram(a, Orientation::Rows)
    }
}

/// Rank-one projector update: returns `Q − (Qb)(Qb)ᵀ/‖Qb‖²`, the projector onto
/// the orthogonal complement of `range(I − Q) ∪ {b}`.
///
/// Fails with [`Error::DegenerateDirection`] when `‖Qb‖ <= tol`.
pub fn projector_update<T: Scalar>(q: &Projector<T>, b: &[T], tol: T) -> Result<Projector<T>> {
    if b.len() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for projector of size {}",
            b.len(),
            q.dim()
        )));
    }
    let u = q.apply(b);
    let s: T = dot(&u, &u);
    let norm = s.sqrt();
    if !(norm > tol) {
        return Err(Error::DegenerateDirection { norm: norm.as_f64(), tol: tol.as_f64() });
    }
    Ok(q.downdate(&u, s))
}

/// `τ = √(max(n, d) · ε) · ‖A‖₂`, the threshold below which `‖Qa‖` counts
/// as zero. `τ²` is the eigenvalue cutoff behind [`numerical_rank`], so a
/// direction is accepted exactly when it carries a non-negligible singular
/// value. (A cutoff linear in `ε` admits rounding noise once the span of `A`
/// is exhausted.)
pub fn rank_tolerance<T: Scalar>(n_rows: usize, n_cols: usize, spectral_norm: T) -> T {
    (T::from_count(n_rows.max(n_cols)) * T::epsilon()).sqrt() * spectral_norm
}

/// Eigenvalues of a symmetric matrix in descending order (cyclic Jacobi).
pub fn sym_eigenvalues<T: Scalar>(m: &SymMatrix<T>) -> Result<Vec<T>> {
    let n = m.dim;
    let mut a = m.data.clone();
    let fro2: T = a.iter().map(|&v| v * v).sum();
    let mut eig: Vec<T>;
    let done = |a: &[T]| -> bool {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        off <= T::epsilon() * T::epsilon() * fro2
    };
    let negligible = T::epsilon() * T::lit(1e-3) * fro2.sqrt();
    let mut converged = fro2 == T::zero() || done(&a);
    let mut sweep = 0;
    while !converged && sweep < MAX_JACOBI_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                if apq.abs() <= negligible {
                    a[p * n + q] = T::zero();
                    a[q * n + p] = T::zero();
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = if theta.abs() > T::lit(1e150) {
                    T::one() / (T::lit(2.0) * theta)
                } else {
                    let r = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -r
                    } else {
                        r
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
            }
        }
        sweep += 1;
        converged = done(&a);
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_JACOBI_SWEEPS });
    }
    eig = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    Ok(eig)
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns `(diagonal, off_diagonal)` with `off_diagonal.len() == dim − 1`.
pub fn tridiagonalize<T: Scalar>(m: &SymMatrix<T>) -> (Vec<T>, Vec<T>) {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let norm = (lo..n).map(|i| a[i * n + k] * a[i * n + k]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let x0 = a[lo * n + k];
        let alpha = if x0 >= T::zero() { -norm } else { norm };
        for i in lo..n {
            v[i] = a[i * n + k];
        }
        v[lo] -= alpha;
        let vnorm2: T = (lo..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let beta = T::lit(2.0) / vnorm2;
        for i in lo..n {
            p[i] = beta * (lo..n).map(|j| a[i * n + j] * v[j]).sum::<T>();
        }
        let kappa = T::lit(0.5) * beta * (lo..n).map(|i| v[i] * p[i]).sum::<T>();
        for i in lo..n {
            p[i] -= kappa * v[i];
        }
        for i in lo..n {
            for j in lo..n {
                a[i * n + j] -= v[i] * p[j] + p[i] * v[j];
            }
        }
        for i in lo..n {
            a[i * n + k] = T::zero();
            a[k * n + i] = T::zero();
        }
        a[lo * n + k] = alpha;
        a[k * n + lo] = alpha;
        off[k] = alpha;
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    (diag, off)
}

/// `det[x·I − M]` as a monic polynomial of nominal degree `dim`.
///
/// Tridiagonalizes first, then expands the leading principal minors
/// `p_j = (x − a_j)·p_{j−1} − b_{j−1}²·p_{j−2}`.
pub fn char_poly<T: Scalar>(m: &SymMatrix<T>) -> RealPoly<T> {
    let (diag, off) = tridiagonalize(m);
    let n = diag.len();
    let mut prev: Vec<T> = vec![T::one()];
    let mut cur: Vec<T> = vec![-diag[0], T::one()];
    for j in 1..n {
        let b2 = off[j - 1] * off[j - 1];
        let mut next = vec![T::zero(); j + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= diag[j] * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= b2 * c;
        }
        prev = cur;
        cur = next;
    }
    RealPoly::from_coeffs_unchecked(cur)
}

/// `λ_max(AᵀA) = ‖A‖₂²`.
pub fn spectral_norm_sq<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    Ok(sym_eigenvalues(&compact_gram(a))?[0].max(T::zero()))
}

/// Positive eigenvalues of `AᵀA` (descending), discarding those at or below
/// `max(n, d) · ε · ‖A‖₂²`.
pub fn positive_eigenvalues<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let eigs = sym_eigenvalues(&compact_gram(a))?;
    let threshold = eigenvalue_threshold(a.n_rows, a.n_cols, eigs[0]);
    Ok(eigs.into_iter().filter(|&l| l > threshold).collect())
}

pub(crate) fn eigenvalue_threshold<T: Scalar>(n: usize, d: usize, lambda_max: T) -> T {
    T::from_count(n.max(d)) * T::epsilon() * lambda_max.max(T::zero())
}

/// Numerical rank of `A` under the eigenvalue threshold of [`positive_eigenvalues`].
pub fn numerical_rank<T: Scalar>(a: &DenseMatrix<T>) -> Result<usize> {
    Ok(positive_eigenvalues(a)?.len())
}

/// `Q_S` built by successive rank-one updates; directions already in the
/// span are skipped. Also returns the product of the accepted `‖Q a_j‖²`
/// increments, which equals `det[A_SᵀA_S]` when nothing was skipped.
pub fn subset_projector<T: Scalar>(
    a: &DenseMatrix<T>,
    subset: &[usize],
    tol: T,
) -> Result<(Projector<T>, T, usize)> {
    check_subset(subset, a.n_cols)?;
    let mut q = Projector::identity(a.n_rows);
    let mut det = T::one();
    let mut accepted = 0;
    for &j in subset {
        let u = q.apply(&a.column(j));
        let s = dot(&u, &u);
        if s.sqrt() > tol {
            q = q.downdate(&u, s);
            det *= s;
            accepted += 1;
        } else {
            det = T::zero();
        }
    }
    Ok((q, det, accepted))
}

/// `Q·A`.
pub fn project_columns<T: Scalar>(q: &Projector<T>, a: &DenseMatrix<T>) -> DenseMatrix<T> {
    let qa = q.matrix.clone().into_dense();
    qa.matmul(a).expect("projector and matrix share the row dimension")
}

/// `‖A − A_S A_S† A‖₂²`, computed as `λ_max(AᵀQ_SA)`.
pub fn residual_spectral_sq<T: Scalar>(a: &DenseMatrix<T>, subset: &[usize]) -> Result<T> {
    let norm_sq = spectral_norm_sq(a)?;
    if subset.is_empty() {
        check_subset(subset, a.n_cols)?;
        return Ok(norm_sq);
    }
    let tol = rank_tolerance(a.n_rows, a.n_cols, norm_sq.sqrt());
    let (q, _, _) = subset_projector(a, subset, tol)?;
    let qa = project_columns(&q, a);
    Ok(sym_eigenvalues(&compact_gram(&qa))?[0].max(T::zero()))
}

/// `‖A − A_S A_S† A‖_F² = tr(AᵀQ_SA)`.
pub fn residual_frobenius_sq<T: Scalar>(a: &DenseMatrix<T>, subset: &[usize]) -> Result<T> {
    let norm_sq = spectral_norm_sq(a)?;
    let tol = rank_tolerance(a.n_rows, a.n_cols, norm_sq.sqrt());
    let (q, _, _) = subset_projector(a, subset, tol)?;
    Ok(project_columns(&q, a).frobenius_norm_sq())
}

/// Orthonormal basis of the column space of a full-column-rank `g` (`n >= t`),
/// via Householder QR with the diagonal of `R` made nonnegative.
pub fn orthonormal_frame<T: Scalar>(g: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let (n, t) = (g.n_rows, g.n_cols);
    if t > n {
        return Err(Error::DimensionMismatch(format!("cannot orthonormalize {n}x{t} with t > n")));
    }
    // Column-major working copy.
    let mut r: Vec<Vec<T>> = (0..t).map(|j| g.column(j)).collect();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(t);
    let mut signs = vec![T::one(); t];
    for j in 0..t {
        let norm = (j..n).map(|i| r[j][i] * r[j][i]).sum::<T>().sqrt();
        let mut v = vec![T::zero(); n];
        if norm == T::zero() {
            reflectors.push(v);
            continue;
        }
        let x0 = r[j][j];
        let alpha = if x0 >= T::zero() { -norm } else { norm };
        for i in j..n {
            v[i] = r[j][i];
        }
        v[j] -= alpha;
        let vn2: T = (j..n).map(|i| v[i] * v[i]).sum();
        if vn2 > T::zero() {
            for col in r.iter_mut().skip(j) {
                let f = T::lit(2.0) * (j..n).map(|i| v[i] * col[i]).sum::<T>() / vn2;
                for i in j..n {
                    col[i] -= f * v[i];
                }
            }
        }
        if alpha < T::zero() {
            signs[j] = -T::one();
        }
        reflectors.push(v);
    }
    // Q = H_0 ⋯ H_{t−1} [I_t; 0], then flip columns so diag(R) >= 0.
    let mut q = DenseMatrix::zeros(n, t);
    for c in 0..t {
        let mut e = vec![T::zero(); n];
        e[c] = T::one();
        for (j, v) in reflectors.iter().enumerate().rev() {
            let vn2: T = (j..n).map(|i| v[i] * v[i]).sum();
            if vn2 == T::zero() {
                continue;
            }
            let f = T::lit(2.0) * (j..n).map(|i| v[i] * e[i]).sum::<T>() / vn2;
            for i in j..n {
                e[i] -= f * v[i];
            }
        }
        for (i, &val) in e.iter().enumerate() {
            q.set(i, c, val * signs[c]);
        }
    }
    Ok(q)
}

/// Inverse of a nonsingular symmetric matrix (Gauss–Jordan, partial pivoting).
pub fn sym_inverse<T: Scalar>(m: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut inv = SymMatrix::<T>::identity(n).data;
    let scale = m.max_abs();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().partial_cmp(&a[y * n + col].abs()).unwrap())
            .unwrap();
        let pv = a[piv * n + col];
        if pv.abs() <= T::epsilon() * scale * T::from_count(n) {
            return Err(Error::InvalidMatrix("matrix is numerically singular".into()));
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        for j in 0..n {
            a[col * n + j] /= pv;
            inv[col * n + j] /= pv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f == T::zero() {
                continue;
            }
            for j in 0..n {
                let v = a[col * n + j];
                a[r * n + j] -= f * v;
                let v = inv[col * n + j];
                inv[r * n + j] -= f * v;
            }
        }
    }
    Ok(SymMatrix::symmetrized_from(n, inv))
}

/// Determinant via LU with partial pivoting.
pub fn determinant<T: Scalar>(m: &SymMatrix<T>) -> T {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut det = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().partial_cmp(&a[y * n + col].abs()).unwrap())
            .unwrap();
        let pv = a[piv * n + col];
        if pv == T::zero() {
            return T::zero();
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            det = -det;
        }
        det *= pv;
        for r in col + 1..n {
            let f = a[r * n + col] / pv;
            for j in col..n {
                let v = a[col * n + j];
                a[r * n + j] -= f * v;
            }
        }
    }
    det
}

#[inline]
pub(crate) fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

pub(crate) fn check_subset(indices: &[usize], n_cols: usize) -> Result<()> {
    let mut seen = vec![false; n_cols];
    for &j in indices {
        if j >= n_cols {
            return Err(Error::IndexOutOfRange { index: j, cols: n_cols });
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::DuplicateIndex(j));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::hard_instance;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    fn mat(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::InvalidMatrix(_))
        ));
        assert!(DenseMatrix::<f64>::new(0, 2, vec![]).is_err());
        assert!(matches!(
            SymMatrix::new(2, vec![1.0, 2.0, 2.1, 1.0]),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn gram_examples() {
        let i2 = DenseMatrix::<f64>::identity(2);
        assert_eq!(gram(&i2, Orientation::Columns), SymMatrix::identity(2));

        // [e1+e2, e1+e3]
        let a = DenseMatrix::from_columns(&[vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]]).unwrap();
        assert_eq!(gram(&a, Orientation::Columns).as_slice(), &[2.0, 1.0, 1.0, 2.0]);
        assert_eq!(gram(&a, Orientation::Rows).dim(), 3);

        let h = hard_instance::<f64>(2, 1.0).unwrap();
        assert_eq!(gram(&h, Orientation::Columns).as_slice(), &[2.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn projector_update_examples() {
        let q = Projector::<f64>::identity(2);
        let q1 = projector_update(&q, &[1.0, 0.0], 1e-12).unwrap();
        assert_eq!(q1.matrix().as_slice(), &[0.0, 0.0, 0.0, 1.0]);

        let q = Projector::<f64>::identity(3);
        let q1 = projector_update(&q, &[1.0, 1.0, 1.0], 1e-12).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 - 1.0 / 3.0 } else { -1.0 / 3.0 };
                assert!((q1.matrix().get(i, j) - expect).abs() < 1e-15);
            }
        }
        assert!((q1.trace() - 2.0).abs() < 1e-8);
        assert!(q1.idempotency_defect() < 1e-9 * 3.0);

        // b already in the selected span
        let err = projector_update(&q1.update(&[0.0, 1.0, -1.0], 1e-12).unwrap(), &[1.0, 1.0, 1.0], 1e-12);
        assert!(matches!(err, Err(Error::DegenerateDirection { .. })));
        let diag01 = Projector { matrix: SymMatrix::from_diagonal(&[0.0, 1.0]) };
        assert!(matches!(
            projector_update(&diag01, &[1.0, 0.0], 1e-12),
            Err(Error::DegenerateDirection { .. })
        ));
    }

    #[test]
    fn eigenvalue_examples() {
        let m = SymMatrix::from_diagonal(&[1.0, 3.0]);
        assert_eq!(sym_eigenvalues(&m).unwrap(), vec![3.0, 1.0]);

        let m = SymMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = sym_eigenvalues(&m).unwrap();
        assert!(close(e[0], 3.0, 1e-12) && close(e[1], 1.0, 1e-12));

        let h = hard_instance::<f64>(4, 1.0).unwrap();
        let e = sym_eigenvalues(&gram(&h, Orientation::Columns)).unwrap();
        for (got, want) in e.iter().zip([5.0, 1.0, 1.0, 1.0]) {
            assert!(close(*got, want, 1e-10), "{e:?}");
        }
    }

    #[test]
    fn char_poly_examples() {
        let p = char_poly(&SymMatrix::<f64>::identity(2));
        assert_eq!(p.coeffs(), &[1.0, -2.0, 1.0]);

        let p = char_poly(&SymMatrix::from_diagonal(&[3.0, 1.0]));
        assert_eq!(p.coeffs(), &[3.0, -4.0, 1.0]);

        // I + J_4 has eigenvalues 5, 1, 1, 1: (x−5)(x−1)³
        let mut data = vec![1.0f64; 16];
        for i in 0..4 {
            data[i * 4 + i] = 2.0;
        }
        let p = char_poly(&SymMatrix::new(4, data).unwrap());
        for (got, want) in p.coeffs().iter().zip([5.0, -16.0, 18.0, -8.0, 1.0]) {
            assert!((got - want).abs() <= 1e-8 * want.abs(), "{:?}", p.coeffs());
        }
    }

    #[test]
    fn char_poly_single_entry() {
        let p = char_poly(&SymMatrix::from_diagonal(&[2.5]));
        assert_eq!(p.coeffs(), &[-2.5, 1.0]);
    }

    #[test]
    fn residual_examples() {
        let i2 = DenseMatrix::<f64>::identity(2);
        assert!(close(residual_spectral_sq(&i2, &[0]).unwrap(), 1.0, 1e-12));

        let a = mat(&[&[3f64.sqrt(), 0.0], &[0.0, 1.0]]);
        assert!(close(residual_spectral_sq(&a, &[1]).unwrap(), 3.0, 1e-12));
        assert!(close(residual_spectral_sq(&a, &[]).unwrap(), 3.0, 1e-12));

        let h = hard_instance::<f64>(4, 1.0).unwrap();
        assert!(close(residual_spectral_sq(&h, &[0, 1]).unwrap(), 5.0 / 3.0, 1e-10));

        assert!(matches!(residual_spectral_sq(&a, &[0, 0]), Err(Error::DuplicateIndex(0))));
        assert!(matches!(residual_spectral_sq(&a, &[2]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn residual_skips_dependent_columns() {
        let a = DenseMatrix::from_columns(&[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])
            .unwrap();
        let r = residual_spectral_sq(&a, &[0, 1]).unwrap();
        assert!(close(r, 1.0, 1e-12));
    }

    #[test]
    fn orthonormal_frame_is_orthonormal() {
        let g = mat(&[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.25], &[-2.0, 1.0]]);
        let q = orthonormal_frame(&g).unwrap();
        let qtq = gram(&q, Orientation::Columns);
        assert!(qtq.distance(&SymMatrix::identity(2)) < 1e-14);
        // span check: first column parallel to first column of g with positive sign
        let c0 = q.column(0);
        let g0 = g.column(0);
        let n0 = dot(&g0, &g0).sqrt();
        for (a, b) in c0.iter().zip(&g0) {
            assert!((a - b / n0).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_and_determinant() {
        let m = SymMatrix::new(3, vec![4.0f64, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]).unwrap();
        let inv = sym_inverse(&m).unwrap();
        let prod = m.clone().into_dense().matmul(&inv.into_dense()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - e).abs() < 1e-14);
            }
        }
        let ev = sym_eigenvalues(&m).unwrap();
        assert!(close(determinant(&m), ev.iter().product(), 1e-13));
        assert!(sym_inverse(&SymMatrix::from_diagonal(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn single_precision_kernels() {
        let m = SymMatrix::<f32>::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = sym_eigenvalues(&m).unwrap();
        assert!((e[0] - 3.0).abs() < 1e-5 && (e[1] - 1.0).abs() < 1e-5);
        let p = char_poly(&m);
        assert!((p.coeffs()[0] - 3.0).abs() < 1e-5);
    }
}
