//! Exhaustive and identity-based checks for small instances.
//!
//! Subset enumeration is capped at [`ENUMERATION_CAP`] subsets. Gram
//! determinants are computed as products of successive `‖Q_Sa_i‖²`
//! increments and cross-checked against an LU determinant.

use std::collections::BTreeMap;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::linalg::{
    char_poly, check_subset, compact_gram, determinant, gram, numerical_rank, positive_eigenvalues,
    project_columns, rank_tolerance, spectral_norm_sq, subset_projector, sym_eigenvalues,
    sym_inverse, DenseMatrix, Orientation,
};
use crate::polynomial::{maxroot_eps, RealPoly};
use crate::scalar::Scalar;
use crate::selector;

pub const ENUMERATION_CAP: u128 = 1_000_000;

fn binomial_count(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn subsets(d: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    let count = binomial_count(d, k);
    if count > ENUMERATION_CAP {
        return Err(Error::TooManySubsets { count, cap: ENUMERATION_CAP });
    }
    Ok((0..d).combinations(k).collect())
}

/// Per-subset quantities shared by the enumerations.
struct SubsetEval<T> {
    residual_sq: T,
    frobenius_sq: T,
    det: T,
    poly: Option<RealPoly<T>>,
}

struct Ctx<'a, T> {
    a: &'a DenseMatrix<T>,
    tol: T,
}

impl<'a, T: Scalar> Ctx<'a, T> {
    fn new(a: &'a DenseMatrix<T>) -> Result<Self> {
        let norm = spectral_norm_sq(a)?.sqrt();
        Ok(Self { a, tol: rank_tolerance(a.n_rows(), a.n_cols(), norm) })
    }

    fn eval(&self, s: &[usize], with_poly: bool) -> Result<SubsetEval<T>> {
        let (q, det, _) = subset_projector(self.a, s, self.tol)?;
        let qa = project_columns(&q, self.a);
        let residual_sq = sym_eigenvalues(&compact_gram(&qa))?[0].max(T::zero());
        let poly = with_poly.then(|| char_poly(&gram(&qa, Orientation::Columns)));
        Ok(SubsetEval { residual_sq, frobenius_sq: qa.frobenius_norm_sq(), det, poly })
    }

    fn eval_all(&self, k: usize, with_poly: bool) -> Result<Vec<(Vec<usize>, SubsetEval<T>)>> {
        subsets(self.a.n_cols(), k)?
            .into_par_iter()
            .map(|s| self.eval(&s, with_poly).map(|e| (s, e)))
            .collect()
    }
}

/// Exact minimizer of `‖A − A_SA_S†A‖₂²` over all `k`-subsets. Residuals
/// within `1e−12·(1 + ‖A‖₂²)` of each other count as tied and the
/// lexicographically smallest subset wins.
pub fn brute_force_best<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<(Vec<usize>, T)> {
    let ctx = Ctx::new(a)?;
    let tie = T::floor_tol(1e-12, 16.0) * (T::one() + spectral_norm_sq(a)?);
    let mut best: Option<(Vec<usize>, T)> = None;
    for (s, e) in ctx.eval_all(k, false)? {
        if best.as_ref().is_none_or(|(_, v)| e.residual_sq < *v - tie) {
            best = Some((s, e.residual_sq));
        }
    }
    best.ok_or(Error::ZeroK)
}

/// `k! · Σ_{|S|=k} det[A_SᵀA_S] · det[x·I − AᵀQ_SA]`.
pub fn expected_poly_bruteforce<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<RealPoly<T>> {
    Ok(expected_poly_checked(a, k)?.0)
}

/// Also returns the largest relative gap between the factored determinant
/// and the LU determinant of `A_SᵀA_S`.
fn expected_poly_checked<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<(RealPoly<T>, T)> {
    let ctx = Ctx::new(a)?;
    let d = a.n_cols();
    let g = gram(a, Orientation::Columns);
    let floor = T::lit(1e-10) * spectral_norm_sq(a)?.powi(k as i32);
    let mut sum = RealPoly::zero(d);
    let mut det_err = T::zero();
    for (s, e) in ctx.eval_all(k, true)? {
        let lu = if s.is_empty() { T::one() } else { determinant(&g.principal_submatrix(&s)?) };
        det_err = det_err.max((e.det - lu).abs() / lu.abs().max(floor));
        sum.add_scaled(e.poly.as_ref().expect("requested"), e.det);
    }
    let k_fact = (1..=k).fold(T::one(), |acc, j| acc * T::from_count(j));
    Ok((sum.scaled(k_fact), det_err))
}

/// `e_k(values)`; `e_0 = 1`.
pub fn elementary_symmetric<T: Scalar>(values: &[T], k: usize) -> T {
    let mut e = vec![T::zero(); k + 1];
    e[0] = T::one();
    for &v in values {
        for j in (1..=k).rev() {
            let prev = e[j - 1];
            e[j] += v * prev;
        }
    }
    e[k]
}

/// `c_k(A) = e_k(λ(AᵀA))`.
pub fn c_k<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<T> {
    Ok(elementary_symmetric(&positive_eigenvalues(a)?, k))
}

/// `c_k(A) = Σ_{|S|=k} det[A_SᵀA_S]` by enumeration.
pub fn c_k_by_subsets<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<T> {
    let ctx = Ctx::new(a)?;
    Ok(ctx.eval_all(k, false)?.iter().map(|(_, e)| e.det).sum())
}

fn volume_average<T: Scalar>(
    a: &DenseMatrix<T>,
    k: usize,
    value: impl Fn(&SubsetEval<T>) -> T,
) -> Result<T> {
    let ctx = Ctx::new(a)?;
    let (mut num, mut den) = (T::zero(), T::zero());
    for (_, e) in ctx.eval_all(k, false)? {
        num += e.det * value(&e);
        den += e.det;
    }
    Ok(num / den)
}

/// Volume-sampling average of the squared spectral residual over
/// `(t−1)`-subsets, `t = rank(A)`.
pub fn alpha_as_expectation<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    let t = numerical_rank(a)?;
    if t == 0 {
        return Err(Error::EmptySpectrum);
    }
    volume_average(a, t - 1, |e| e.residual_sq)
}

/// `(k+1)·c_{k+1}/c_k`, the volume-sampling average of the squared
/// Frobenius residual over `k`-subsets.
pub fn frobenius_expectation<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<T> {
    let eigs = positive_eigenvalues(a)?;
    if k >= eigs.len() {
        return Err(Error::RankExceeded { k: k + 1, rank: eigs.len() });
    }
    Ok(T::from_count(k + 1) * elementary_symmetric(&eigs, k + 1) / elementary_symmetric(&eigs, k))
}

/// [`frobenius_expectation`] by direct enumeration.
pub fn frobenius_expectation_direct<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<T> {
    volume_average(a, k, |e| e.frobenius_sq)
}

fn root_eps<T: Scalar>(scale: T) -> T {
    T::floor_tol(1e-13, 64.0) * (T::one() + scale)
}

/// `(maxroot p_S, 1/σ²_min(B_{S^C}))` with `B = A(AᵀA)⁻¹`; requires full
/// column rank.
pub fn restricted_invertibility_check<T: Scalar>(a: &DenseMatrix<T>, s: &[usize]) -> Result<(T, T)> {
    let d = a.n_cols();
    let rank = numerical_rank(a)?;
    if rank < d {
        return Err(Error::NotFullColumnRank { rank, cols: d });
    }
    check_subset(s, d)?;
    if s.len() >= d {
        return Err(Error::InvalidMatrix("subset must leave at least one column out".into()));
    }
    let ctx = Ctx::new(a)?;
    let e = ctx.eval(s, true)?;
    let p = e.poly.expect("requested").with_zero_roots(s.len());
    let norm = spectral_norm_sq(a)?;
    let maxroot = maxroot_eps(&p, root_eps(norm))?.value;

    let g_inv = sym_inverse(&gram(a, Orientation::Columns))?.into_dense();
    let b = a.matmul(&g_inv)?;
    let rest: Vec<usize> = (0..d).filter(|i| !s.contains(i)).collect();
    let bc = b.select_columns(&rest)?;
    let sigma_min_sq = *sym_eigenvalues(&gram(&bc, Orientation::Columns))?.last().expect("nonempty");
    Ok((maxroot, sigma_min_sq.recip()))
}

fn rel_coeff_error<T: Scalar>(p: &RealPoly<T>, q: &RealPoly<T>) -> T {
    let scale = p.max_abs_coeff().max(q.max_abs_coeff()).max(T::min_positive_value());
    let mut diff = p.clone();
    diff.add_scaled(q, -T::one());
    diff.max_abs_coeff() / scale
}

/// Relative coefficient error of
/// `Σ_{i∉S} ‖Q_Sa_i‖² p_{S∪i} = (x²∂ₓ − d·x) p_S`.
pub fn single_step_identity<T: Scalar>(a: &DenseMatrix<T>, s: &[usize]) -> Result<T> {
    check_subset(s, a.n_cols())?;
    let ctx = Ctx::new(a)?;
    let (q, _, _) = subset_projector(a, s, ctx.tol)?;
    let lhs_terms: Vec<(T, RealPoly<T>)> = (0..a.n_cols())
        .filter(|i| !s.contains(i))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&i| {
            let u = q.apply(&a.column(i));
            let w: T = u.iter().map(|&x| x * x).sum();
            let mut si = s.to_vec();
            si.push(i);
            ctx.eval(&si, true).map(|e| (w, e.poly.expect("requested")))
        })
        .collect::<Result<_>>()?;
    let mut lhs = RealPoly::zero(a.n_cols());
    for (w, p) in &lhs_terms {
        lhs.add_scaled(p, *w);
    }
    let rhs = ctx.eval(s, true)?.poly.expect("requested").polar_step();
    Ok(rel_coeff_error(&lhs, &rhs))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(error: f64, tolerance: f64) -> Self {
        Self { error, tolerance, pass: error <= tolerance }
    }
}

/// Outcome of [`verify`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport<T> {
    pub k: usize,
    pub best_subset: Vec<usize>,
    pub best_residual_sq: T,
    pub select_subset: Vec<usize>,
    pub select_residual_sq: T,
    pub expected_poly: RealPoly<T>,
    pub ck: T,
    pub identity_errors: BTreeMap<String, IdentityCheck>,
}

impl<T> OracleReport<T> {
    pub fn passed(&self) -> bool {
        self.identity_errors.values().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.identity_errors.iter().filter(|(_, c)| !c.pass).map(|(n, _)| n.as_str()).collect()
    }
}

fn rel<T: Scalar>(x: T, want: T) -> f64 {
    ((x - want).abs() / want.abs().max(T::min_positive_value())).as_f64()
}

/// Runs every identity on `a` at subset size `k`, with the selector using
/// root accuracy `eps`.
///
/// | name | tolerance |
/// |---|---|
/// | `expected_polynomial` | 1e−7 |
/// | `determinant_factorization` | 1e−8 |
/// | `ck_two_ways` | 1e−8 |
/// | `alpha_expectation` | 1e−7 |
/// | `alpha_root` | 1e−7 |
/// | `frobenius_expectation` | 1e−7 (only when `k < t`) |
/// | `single_step` | 1e−7 |
/// | `restricted_invertibility` | 1e−6 (only with full column rank and `k < d`) |
/// | `sandwich` | 1e−9 (brute force ≤ select ≤ 2kε + bound) |
pub fn verify<T: Scalar>(a: &DenseMatrix<T>, k: usize, eps: T) -> Result<OracleReport<T>> {
    let t = numerical_rank(a)?;
    if k == 0 {
        return Err(Error::ZeroK);
    }
    if k > t {
        return Err(Error::RankExceeded { k, rank: t });
    }
    let tol_scale = |v: f64| v.max(T::epsilon().as_f64() * 1e4);
    let mut checks = BTreeMap::new();
    let norm = spectral_norm_sq(a)?;
    let g = gram(a, Orientation::Columns);
    let charpoly = char_poly(&g);

    let (expected_poly, det_err) = expected_poly_checked(a, k)?;
    checks.insert(
        "expected_polynomial".to_string(),
        IdentityCheck::new(rel_coeff_error(&expected_poly, &charpoly.op_dk(k)).as_f64(), tol_scale(1e-7)),
    );
    checks.insert("determinant_factorization".to_string(), IdentityCheck::new(det_err.as_f64(), tol_scale(1e-8)));

    let ck = c_k(a, k)?;
    checks.insert("ck_two_ways".to_string(), IdentityCheck::new(rel(c_k_by_subsets(a, k)?, ck), tol_scale(1e-8)));

    let info = bounds::spectrum_of(a)?;
    checks.insert(
        "alpha_expectation".to_string(),
        IdentityCheck::new(rel(alpha_as_expectation(a)?, info.alpha), tol_scale(1e-7)),
    );
    let deflated = charpoly.with_zero_roots(a.n_cols() - t).op_dk_normalized(t - 1);
    let alpha_root = maxroot_eps(&deflated, root_eps(norm))?.value;
    checks.insert("alpha_root".to_string(), IdentityCheck::new(rel(alpha_root, info.alpha), tol_scale(1e-7)));

    if k < t {
        let formula = frobenius_expectation(a, k)?;
        let direct = frobenius_expectation_direct(a, k)?;
        checks.insert("frobenius_expectation".to_string(), IdentityCheck::new(rel(direct, formula), tol_scale(1e-7)));
    }

    let (best_subset, best_residual_sq) = brute_force_best(a, k)?;
    checks.insert(
        "single_step".to_string(),
        IdentityCheck::new(single_step_identity(a, &best_subset[..k - 1])?.as_f64(), tol_scale(1e-7)),
    );

    if t == a.n_cols() && k < a.n_cols() {
        let (x, y) = restricted_invertibility_check(a, &best_subset)?;
        checks.insert("restricted_invertibility".to_string(), IdentityCheck::new(rel(x, y), tol_scale(1e-6)));
    }

    let sel = selector::select(a, k, eps)?;
    let bound = bounds::theorem_bound(&info, k);
    let ceiling = if bound.applicable { bound.bound } else { sel.expected_root.value };
    let ceiling = ceiling + T::lit(2.0) * T::from_count(k) * eps;
    let slack = T::one() + norm;
    let violation = (best_residual_sq - sel.residual_sq).max(sel.residual_sq - ceiling).max(T::zero()) / slack;
    checks.insert("sandwich".to_string(), IdentityCheck::new(violation.as_f64(), tol_scale(1e-9)));

    Ok(OracleReport {
        k,
        best_subset,
        best_residual_sq,
        select_subset: sel.subset,
        select_residual_sq: sel.residual_sq,
        expected_poly,
        ck,
        identity_errors: checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{hard_instance, random_gaussian};

    fn diag31() -> DenseMatrix<f64> {
        DenseMatrix::from_rows(&[vec![3f64.sqrt(), 0.0], vec![0.0, 1.0]]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn brute_force_examples() {
        let (s, r) = brute_force_best(&diag31(), 1).unwrap();
        assert_eq!(s, vec![0]);
        assert!(close(r, 1.0, 1e-12));
        let (s, r) = brute_force_best(&hard_instance::<f64>(4, 1.0).unwrap(), 2).unwrap();
        assert_eq!(s, vec![0, 1]);
        assert!(close(r, 5.0 / 3.0, 1e-12));
        let (s, r) = brute_force_best(&DenseMatrix::<f64>::identity(3), 3).unwrap();
        assert_eq!(s, vec![0, 1, 2]);
        assert!(r.abs() < 1e-14);
        assert!(matches!(
            brute_force_best(&random_gaussian::<f64>(2, 40, 0).unwrap(), 20),
            Err(Error::TooManySubsets { .. })
        ));
    }

    #[test]
    fn expected_poly_examples() {
        let p = expected_poly_bruteforce(&diag31(), 1).unwrap();
        let want = [0.0, -6.0, 4.0];
        assert!(p.coeffs().iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), "{p:?}");
        let routed = RealPoly::new(vec![3.0, -4.0, 1.0]).unwrap().op_dk(1);
        assert!(routed.coeffs().iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));

        let a = random_gaussian::<f64>(4, 3, 2).unwrap();
        let p0 = expected_poly_bruteforce(&a, 0).unwrap();
        let c = char_poly(&gram(&a, Orientation::Columns));
        assert!(rel_coeff_error(&p0, &c) < 1e-13);
    }

    #[test]
    fn ck_examples() {
        assert_eq!(elementary_symmetric(&[3.0, 1.0], 1), 4.0);
        assert_eq!(elementary_symmetric(&[3.0, 1.0], 2), 3.0);
        assert_eq!(elementary_symmetric(&[3.0, 1.0], 0), 1.0);
        assert!(close(c_k(&diag31(), 1).unwrap(), 4.0, 1e-13));
        assert!(close(c_k_by_subsets(&diag31(), 2).unwrap(), 3.0, 1e-13));
        let a = random_gaussian::<f64>(5, 5, 4).unwrap();
        assert_eq!(c_k_by_subsets(&a, 0).unwrap(), 1.0);
        for k in 1..=5 {
            assert!(close(c_k_by_subsets(&a, k).unwrap(), c_k(&a, k).unwrap(), 1e-8));
        }
    }

    #[test]
    fn alpha_examples() {
        assert!(close(alpha_as_expectation(&diag31()).unwrap(), 1.5, 1e-12));
        assert!(close(alpha_as_expectation(&hard_instance::<f64>(4, 1.0).unwrap()).unwrap(), 1.25, 1e-12));
        assert!(close(alpha_as_expectation(&DenseMatrix::<f64>::identity(3)).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn frobenius_examples() {
        assert!(close(frobenius_expectation(&diag31(), 1).unwrap(), 1.5, 1e-12));
        assert!(close(frobenius_expectation_direct(&diag31(), 1).unwrap(), 1.5, 1e-12));
        assert!(close(frobenius_expectation(&diag31(), 0).unwrap(), 4.0, 1e-12));
        let h = hard_instance::<f64>(4, 1.0).unwrap();
        assert!(close(frobenius_expectation(&h, 3).unwrap(), 1.25, 1e-12));
        assert!(close(frobenius_expectation_direct(&h, 3).unwrap(), 1.25, 1e-12));
    }

    #[test]
    fn restricted_invertibility_examples() {
        let (x, y) = restricted_invertibility_check(&diag31(), &[0]).unwrap();
        assert!(close(x, 1.0, 1e-10) && close(y, 1.0, 1e-10));
        let (x, y) = restricted_invertibility_check(&DenseMatrix::<f64>::identity(3), &[0, 1]).unwrap();
        assert!(close(x, 1.0, 1e-10) && close(y, 1.0, 1e-10));
        let a = random_gaussian::<f64>(4, 4, 8).unwrap();
        for s in (0..4).combinations(2) {
            let (x, y) = restricted_invertibility_check(&a, &s).unwrap();
            assert!(close(x, y, 1e-6), "{s:?}: {x} vs {y}");
        }
        let rank1 = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            restricted_invertibility_check(&rank1, &[0]),
            Err(Error::NotFullColumnRank { rank: 1, cols: 2 })
        ));
    }

    #[test]
    fn single_step_examples() {
        let a = random_gaussian::<f64>(5, 6, 1).unwrap();
        assert!(single_step_identity(&a, &[]).unwrap() < 1e-10);
        assert!(single_step_identity(&a, &[2, 4]).unwrap() < 1e-10);
    }

    #[test]
    fn verify_random_instance() {
        let a = random_gaussian::<f64>(6, 6, 1).unwrap();
        let r = verify(&a, 3, 1e-9).unwrap();
        assert!(r.passed(), "{:?}", r.identity_errors);
        assert_eq!(r.identity_errors.len(), 9);
        assert!(r.best_residual_sq <= r.select_residual_sq + 1e-12);
    }
}
