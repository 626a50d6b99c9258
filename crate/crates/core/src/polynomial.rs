//! Real univariate polynomials with a declared nominal degree.
//!
//! The nominal degree matters: the flip `x^d · p(1/x)` reverses coefficients
//! against it, so trailing (high-order) zeros are kept rather than trimmed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficients in ascending power order; `coeffs.len() == nominal_degree + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealPoly<T> {
    coeffs: Vec<T>,
}

/// An `epsilon`-approximation of a root: `|value − root| <= epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootApprox<T> {
    pub value: T,
    pub epsilon: T,
}

impl<T: Scalar> RootApprox<T> {
    pub fn map<U: Scalar>(self, f: impl Fn(T) -> U) -> RootApprox<U> {
        RootApprox { value: f(self.value), epsilon: f(self.epsilon) }
    }
}

impl<T: Scalar> RealPoly<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidMatrix("polynomial needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite polynomial coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub(crate) fn from_coeffs_unchecked(coeffs: Vec<T>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    /// The zero polynomial of the given nominal degree.
    pub fn zero(degree: usize) -> Self {
        Self { coeffs: vec![T::zero(); degree + 1] }
    }

    /// `∏ (x − r)`, nominal degree `roots.len()`.
    pub fn from_roots(roots: &[T]) -> Self {
        let mut coeffs = vec![T::one()];
        for &r in roots {
            let mut next = vec![T::zero(); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= r * c;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Horner evaluation.
    pub fn eval(&self, x: T) -> T {
        horner(&self.coeffs, x)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == T::zero())
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, &c| m.max(c.abs()))
    }

    /// Index of the highest nonzero coefficient.
    pub fn effective_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != T::zero())
    }

    /// Multiplicity of the root at zero, i.e. the number of exactly-zero
    /// low-order coefficients (the whole length for the zero polynomial).
    pub fn zero_root_multiplicity(&self) -> usize {
        self.coeffs.iter().position(|&c| c != T::zero()).unwrap_or(self.coeffs.len())
    }

    /// Sets the coefficients of `x^0 … x^{m−1}` to zero, i.e. declares a root
    /// of multiplicity `m` at the origin. Used once the number of positive
    /// roots is known from rank information and the low coefficients are
    /// rounding noise.
    pub fn with_zero_roots(&self, m: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        for c in coeffs.iter_mut().take(m) {
            *c = T::zero();
        }
        Self { coeffs }
    }

    /// Re-declares the nominal degree as `degree`, multiplying by
    /// `x^{degree − current}` or dividing out the lowest coefficients (which
    /// must be roots at zero) when shrinking.
    pub fn reframe(&self, degree: usize) -> Self {
        let cur = self.degree();
        if degree >= cur {
            let mut coeffs = vec![T::zero(); degree - cur];
            coeffs.extend_from_slice(&self.coeffs);
            Self { coeffs }
        } else {
            Self { coeffs: self.coeffs[cur - degree..].to_vec() }
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    /// `self += factor · other`, growing the nominal degree if needed.
    pub fn add_scaled(&mut self, other: &Self, factor: T) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), T::zero());
        }
        for (c, &o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += factor * o;
        }
    }

    /// `x^d · p(1/x)` against the nominal degree `d`.
    pub fn flip(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { coeffs }
    }

    /// k-th formal derivative; nominal degree drops by `k` (floor at 0).
    pub fn derivative(&self, k: usize) -> Self {
        self.derivative_with(k, falling_factorial)
    }

    /// `∂ᵏ p / k!`: same roots as [`Self::derivative`], but coefficients are
    /// multiplied by binomials instead of falling factorials so they stay in
    /// range for large `k`.
    pub fn derivative_normalized(&self, k: usize) -> Self {
        self.derivative_with(k, binomial)
    }

    fn derivative_with(&self, k: usize, factor: fn(usize, usize) -> T) -> Self {
        let d = self.degree();
        if k > d {
            return Self::zero(0);
        }
        let coeffs = (0..=d - k).map(|j| self.coeffs[j + k] * factor(j + k, k)).collect();
        Self { coeffs }
    }

    /// `(x²∂ₓ − d·x)ᵏ p` computed as `(−1)ᵏ · flip ∘ ∂ᵏ ∘ flip`, nominal degree `d`.
    pub fn op_dk(&self, k: usize) -> Self {
        let inner = self.flip().derivative(k);
        self.reembed_flipped(&inner, k)
    }

    /// [`Self::op_dk`] divided by `k!`. Identical roots, bounded coefficients.
    pub fn op_dk_normalized(&self, k: usize) -> Self {
        let inner = self.flip().derivative_normalized(k);
        self.reembed_flipped(&inner, k)
    }

    fn reembed_flipped(&self, inner: &Self, k: usize) -> Self {
        let d = self.degree();
        let mut out = Self::zero(d);
        if k > d {
            return out;
        }
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        for (j, &c) in inner.coeffs.iter().enumerate() {
            out.coeffs[d - j] = sign * c;
        }
        out
    }

    /// One direct application of `x²∂ₓ − d·x`; the `x^{d+1}` term cancels,
    /// so the result keeps nominal degree `d`.
    pub fn polar_step(&self) -> Self {
        let d = self.degree();
        let mut out = Self::zero(d);
        for m in 1..=d {
            let c = self.coeffs[m - 1];
            out.coeffs[m] = (T::from_count(m - 1) - T::from_count(d)) * c;
        }
        out
    }

    /// `1 + max |a_i / a_lead|` over the effective degree: every root has
    /// modulus below this.
    pub fn cauchy_bound(&self) -> Result<T> {
        let top = self.effective_degree().ok_or(Error::ZeroPolynomial)?;
        let lead = self.coeffs[top].abs();
        Ok(T::one() + self.coeffs[..top].iter().fold(T::zero(), |m, &c| m.max(c.abs() / lead)))
    }
}

pub fn flip<T: Scalar>(p: &RealPoly<T>) -> RealPoly<T> {
    p.flip()
}

pub fn derivative<T: Scalar>(p: &RealPoly<T>, k: usize) -> RealPoly<T> {
    p.derivative(k)
}

pub fn op_dk<T: Scalar>(p: &RealPoly<T>, k: usize) -> RealPoly<T> {
    p.op_dk(k)
}

fn falling_factorial<T: Scalar>(n: usize, k: usize) -> T {
    (n - k + 1..=n).fold(T::one(), |acc, v| acc * T::from_count(v))
}

fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    let k = k.min(n - k);
    (0..k).fold(T::one(), |acc, i| acc * T::from_count(n - i) / T::from_count(i + 1))
}

fn horner<T: Scalar>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Sturm chain of a polynomial without roots at the origin.
///
/// Built on the square-free part of the input. Every member is normalized
/// to unit max-|coefficient|. A remainder whose
/// coefficients are all below `η` times the running scale of the division is
/// treated as zero and ends the chain; leading coefficients under the same
/// threshold are dropped.
#[derive(Clone, Debug)]
pub struct SturmChain<T> {
    chain: Vec<Vec<T>>,
}

impl<T: Scalar> SturmChain<T> {
    pub fn new(p: &RealPoly<T>) -> Result<Self> {
        let top = p.effective_degree().ok_or(Error::ZeroPolynomial)?;
        let mut first = p.coeffs[..=top].to_vec();
        normalize(&mut first);
        let chain = Self::build(first);
        let gcd = chain.last().expect("nonempty");
        if gcd.len() > 1 {
            // Repeated roots: restart from the square-free part so that they
            // are located to full precision rather than to √ε.
            let mut reduced = quotient(&chain[0], gcd);
            normalize(&mut reduced);
            return Ok(Self { chain: Self::build(reduced) });
        }
        Ok(Self { chain })
    }

    fn build(first: Vec<T>) -> Vec<Vec<T>> {
        let eta = T::floor_tol(1e-12, 1e3);
        let top = first.len() - 1;
        let mut chain = vec![first];
        if top == 0 {
            return chain;
        }
        let mut second: Vec<T> =
            (1..=top).map(|i| chain[0][i] * T::from_count(i)).collect();
        normalize(&mut second);
        chain.push(second);
        loop {
            let n = chain.len();
            let (a, b) = (&chain[n - 2], &chain[n - 1]);
            if b.len() == 1 {
                break;
            }
            let (mut rem, scale) = remainder(a, b);
            let cutoff = eta * scale;
            while rem.last().is_some_and(|c| c.abs() <= cutoff) {
                rem.pop();
            }
            if rem.is_empty() {
                break;
            }
            for c in rem.iter_mut() {
                *c = -*c;
            }
            normalize(&mut rem);
            chain.push(rem);
        }
        chain
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    /// Number of sign changes of the chain evaluated at `x`, zeros skipped.
    pub fn variations(&self, x: T) -> usize {
        let mut count = 0;
        let mut last = T::zero();
        for poly in &self.chain {
            let v = horner(poly, x);
            if v == T::zero() {
                continue;
            }
            if last != T::zero() && (v < T::zero()) != (last < T::zero()) {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// Distinct real roots in `(lo, hi]`.
    pub fn count(&self, lo: T, hi: T) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }
}

fn normalize<T: Scalar>(p: &mut [T]) {
    let m = p.iter().fold(T::zero(), |m, &c| m.max(c.abs()));
    if m > T::zero() {
        for c in p.iter_mut() {
            *c /= m;
        }
    }
}

/// `a mod b` and the largest magnitude seen while forming it.
fn remainder<T: Scalar>(a: &[T], b: &[T]) -> (Vec<T>, T) {
    let db = b.len() - 1;
    let lead = b[db];
    let mut rem = a.to_vec();
    let mut scale = rem.iter().fold(T::zero(), |m, &c| m.max(c.abs()));
    if rem.len() < b.len() {
        return (rem, scale);
    }
    for i in (db..rem.len()).rev() {
        let q = rem[i] / lead;
        if q == T::zero() {
            continue;
        }
        for j in 0..db {
            let term = q * b[j];
            scale = scale.max(term.abs());
            rem[i - db + j] -= term;
        }
        rem[i] = T::zero();
    }
    rem.truncate(db);
    (rem, scale)
}

/// Quotient of `a / b`, remainder discarded.
fn quotient<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let db = b.len() - 1;
    let lead = b[db];
    let mut rem = a.to_vec();
    let mut q = vec![T::zero(); a.len() - db];
    for i in (db..rem.len()).rev() {
        let c = rem[i] / lead;
        q[i - db] = c;
        for j in 0..=db {
            rem[i - db + j] -= c * b[j];
        }
    }
    q
}

/// Splits `p = x^m · q` with `q(0) != 0`.
fn strip_zero_roots<T: Scalar>(p: &RealPoly<T>) -> (usize, RealPoly<T>) {
    let m = p.zero_root_multiplicity();
    if m >= p.coeffs.len() {
        return (m, p.clone());
    }
    (m, RealPoly { coeffs: p.coeffs[m..].to_vec() })
}

fn check_eps<T: Scalar>(eps: T) -> Result<()> {
    if eps > T::zero() && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(eps.as_f64()))
    }
}

/// Number of distinct real roots of `p` in `(lo, hi]`.
pub fn sturm_count<T: Scalar>(p: &RealPoly<T>, lo: T, hi: T) -> Result<usize> {
    if !(lo < hi) {
        return Err(Error::InvalidInterval { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (m, q) = strip_zero_roots(p);
    let chain = SturmChain::new(&q)?;
    let at_zero = usize::from(m > 0 && lo < T::zero() && T::zero() <= hi);
    Ok(chain.count(lo, hi) + at_zero)
}

/// Outcome of a bracketed largest-root search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bisection<T> {
    Root(RootApprox<T>),
    /// The bracket's lower end rose above `cutoff + 2·eps`; refinement stopped.
    Pruned { lower: T },
}

/// Largest root of a real-rooted `p` by Sturm bisection on `[lo, hi]`.
///
/// `hi` is only a hint: when roots lie above it the Cauchy bound is used
/// instead. The bracket is otherwise kept as given, so callers sharing a
/// dyadic bracket get bit-identical answers for identical root locations. With `cutoff = Some(c)` the search stops early once the largest
/// root is certainly above `c + 2·eps`.
pub fn maxroot_bracketed<T: Scalar>(
    p: &RealPoly<T>,
    lo: T,
    hi: T,
    eps: T,
    cutoff: Option<T>,
) -> Result<Bisection<T>> {
    check_eps(eps)?;
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (m, q) = strip_zero_roots(p);
    let zero_root = |lo: T| -> Result<Bisection<T>> {
        if m > 0 && lo <= T::zero() {
            Ok(Bisection::Root(RootApprox { value: T::zero(), epsilon: eps }))
        } else {
            Err(Error::NoRootInRange { lo: lo.as_f64(), hi: hi.as_f64() })
        }
    };
    if q.effective_degree() == Some(0) {
        return zero_root(lo);
    }
    let chain = SturmChain::new(&q)?;
    let cauchy = q.cauchy_bound()?;
    let mut hi = hi;
    if hi < cauchy && chain.count(hi, cauchy) > 0 {
        hi = cauchy;
    }
    if !(lo < hi) || chain.count(lo, hi) == 0 {
        return zero_root(lo);
    }
    let two = T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    while b - a > eps {
        let mid = (a + b) / two;
        if mid <= a || mid >= b {
            break;
        }
        if chain.count(mid, hi) > 0 {
            a = mid;
            if let Some(c) = cutoff {
                if a > c + two * eps {
                    return Ok(Bisection::Pruned { lower: a });
                }
            }
        } else {
            b = mid;
        }
    }
    Ok(Bisection::Root(RootApprox { value: (a + b) / two, epsilon: eps }))
}

/// `ε`-approximation of the largest root of a real-rooted polynomial with a
/// nonnegative largest root, by Sturm bisection on `[0, U]`, `U` the Cauchy bound.
pub fn maxroot_eps<T: Scalar>(p: &RealPoly<T>, eps: T) -> Result<RootApprox<T>> {
    check_eps(eps)?;
    let upper = if p.is_zero() { T::one() } else { p.cauchy_bound()? };
    match maxroot_bracketed(p, T::zero(), upper, eps, None)? {
        Bisection::Root(r) => Ok(r),
        Bisection::Pruned { .. } => unreachable!("no cutoff given"),
    }
}

/// `ε`-approximation of the smallest positive root.
pub fn minroot_eps<T: Scalar>(p: &RealPoly<T>, eps: T) -> Result<RootApprox<T>> {
    check_eps(eps)?;
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (_, q) = strip_zero_roots(p);
    let upper = q.cauchy_bound()?;
    if q.effective_degree() == Some(0) {
        return Err(Error::NoRootInRange { lo: 0.0, hi: upper.as_f64() });
    }
    let chain = SturmChain::new(&q)?;
    let zero = T::zero();
    if chain.count(zero, upper) == 0 {
        return Err(Error::NoRootInRange { lo: 0.0, hi: upper.as_f64() });
    }
    let two = T::lit(2.0);
    let (mut a, mut b) = (zero, upper);
    while b - a > eps {
        let mid = (a + b) / two;
        if mid <= a || mid >= b {
            break;
        }
        if chain.count(zero, mid) > 0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(RootApprox { value: (a + b) / two, epsilon: eps })
}
