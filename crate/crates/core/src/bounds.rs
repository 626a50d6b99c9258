//! Closed-form upper bounds on the spectral residual of a `k`-column subset.
//!
//! With `λ₁ ≥ … ≥ λ_t > 0` the nonzero eigenvalues of `AᵀA`:
//!
//! * `α = t / Σ λᵢ⁻¹` (harmonic mean),
//! * `β = (λ_t⁻¹ − α⁻¹) / (λ_t⁻¹ − λ₁⁻¹)`,
//! * `γ = (√(k/t) − √(β/(1−β) · (1 − k/t)))²` for `β·t ≤ k < t`,
//! * bound `= λ₁ / (1 + (λ₁/α − 1)·γ)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{positive_eigenvalues, DenseMatrix};
use crate::scalar::Scalar;

/// Spectrum summary feeding the bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumInfo<T> {
    pub t: usize,
    pub eigs: Vec<T>,
    pub alpha: T,
    pub beta: T,
    /// `λ₁ = λ_t`; `beta` is reported as 1.
    pub degenerate: bool,
}

impl<T: Scalar> SpectrumInfo<T> {
    pub fn lambda_max(&self) -> T {
        self.eigs[0]
    }

    pub fn lambda_min(&self) -> T {
        self.eigs[self.t - 1]
    }

    /// `β·t ≤ k < t` on a non-degenerate spectrum.
    pub fn in_regime(&self, k: usize) -> bool {
        !self.degenerate && k < self.t && regime_lower_ok(k, self.beta, self.t)
    }
}

/// Bound evaluation at a particular `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport<T> {
    pub k: usize,
    pub t: usize,
    pub lambda_max: T,
    pub alpha: T,
    pub beta: T,
    /// Zero outside the regime.
    pub gamma: T,
    /// Upper bound on the squared spectral residual. Falls back to `λ₁`
    /// (always valid) when the closed form does not apply.
    pub bound: T,
    pub applicable: bool,
    pub lower_bound_hard_instance: Option<T>,
}

// `k ≥ β·t` compared on reals. β is computed from eigenvalues that carry
// rounding error amplified by `1/(λ_t⁻¹ − α⁻¹)`, so the comparison allows a
// relative slack; boundary cases such as β = 1/d, k = 1 stay in regime.
fn regime_lower_ok<T: Scalar>(k: usize, gamma_like: T, t: usize) -> bool {
    let bt = gamma_like * T::from_count(t);
    T::from_count(k) >= bt * (T::one() - T::floor_tol(1e-10, 64.0))
}

pub fn spectrum_info<T: Scalar>(eigs: &[T]) -> Result<SpectrumInfo<T>> {
    if eigs.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    for (index, &v) in eigs.iter().enumerate() {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::NonPositiveEigenvalue { index, value: v.as_f64() });
        }
    }
    if let Some(i) = eigs.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::UnsortedSpectrum(i + 1));
    }
    let t = eigs.len();
    let inv_sum: T = eigs.iter().map(|&l| l.recip()).sum();
    let alpha = T::from_count(t) / inv_sum;
    let (l1, lt) = (eigs[0], eigs[t - 1]);
    let degenerate = l1 == lt;
    let beta = if degenerate {
        T::one()
    } else {
        let spread = lt.recip() - l1.recip();
        ((lt.recip() - alpha.recip()) / spread).max(T::zero()).min(T::one())
    };
    Ok(SpectrumInfo { t, eigs: eigs.to_vec(), alpha, beta, degenerate })
}

/// Spectrum info for `AᵀA`, discarding eigenvalues at or below the
/// numerical-rank threshold.
pub fn spectrum_of<T: Scalar>(a: &DenseMatrix<T>) -> Result<SpectrumInfo<T>> {
    spectrum_info(&positive_eigenvalues(a)?)
}

pub fn gamma<T: Scalar>(k: usize, info: &SpectrumInfo<T>) -> Result<T> {
    if !info.in_regime(k) {
        let t = T::from_count(info.t);
        return Err(Error::OutOfRegime {
            k,
            lo: (info.beta * t).as_f64(),
            hi: info.t as f64,
        });
    }
    let r = T::from_count(k) / T::from_count(info.t);
    let b = info.beta;
    let second = (b / (T::one() - b) * (T::one() - r)).max(T::zero());
    let g = r.sqrt() - second.sqrt();
    Ok(g * g)
}

pub fn theorem_bound<T: Scalar>(info: &SpectrumInfo<T>, k: usize) -> BoundReport<T> {
    let l1 = info.lambda_max();
    let mut report = BoundReport {
        k,
        t: info.t,
        lambda_max: l1,
        alpha: info.alpha,
        beta: info.beta,
        gamma: T::zero(),
        bound: l1,
        applicable: false,
        lower_bound_hard_instance: None,
    };
    if let Ok(g) = gamma(k, info) {
        report.gamma = g;
        report.bound = l1 / (T::one() + (l1 / info.alpha - T::one()) * g);
        report.applicable = true;
    }
    report
}

/// [`theorem_bound`] for the spectrum of `AᵀA`.
pub fn from_matrix<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<BoundReport<T>> {
    Ok(theorem_bound(&spectrum_of(a)?, k))
}

/// `(upper, lower)` for the `(d+1) x d` hard instance with parameter `δ`:
/// `upper = (d+δ²) / (1 + δ⁻²(√(k − k/d) − √(1 − k/d))²)`,
/// `lower = δ²(d+δ²) / (k+δ²)`.
pub fn hard_instance_bounds<T: Scalar>(d: usize, delta: T, k: usize) -> Result<(T, T)> {
    if k == 0 || k >= d {
        return Err(Error::OutOfRegime { k, lo: 1.0, hi: d as f64 });
    }
    let (dd, kk) = (T::from_count(d), T::from_count(k));
    let d2 = delta * delta;
    let r = kk / dd;
    let g = (kk - r).sqrt() - (T::one() - r).sqrt();
    let upper = (dd + d2) / (T::one() + g * g / d2);
    let lower = d2 * (dd + d2) / (kk + d2);
    Ok((upper, lower))
}

/// Barrier bound on `maxroot ∂ᵏ p` for `p` with `t` roots in `[0, 1]`:
/// `(√(γk/t) + √((1−γ)(1−k/t)))²`, `γ` the mean root.
pub fn barrier_root_bound<T: Scalar>(roots_in_unit: &[T], k: usize) -> Result<T> {
    let t = roots_in_unit.len();
    if t == 0 {
        return Err(Error::EmptySpectrum);
    }
    let g = roots_in_unit.iter().copied().sum::<T>() / T::from_count(t);
    if k > t || !regime_lower_ok(k, g, t) {
        return Err(Error::OutOfRegime { k, lo: (g * T::from_count(t)).as_f64(), hi: t as f64 });
    }
    let r = T::from_count(k) / T::from_count(t);
    let v = (g * r).max(T::zero()).sqrt() + ((T::one() - g) * (T::one() - r)).max(T::zero()).sqrt();
    Ok(v * v)
}

/// The bound rebuilt through the barrier argument:
/// `1 / (λ_t⁻¹ − (λ_t⁻¹ − λ₁⁻¹) · barrier(b, k))` with
/// `bᵢ = (λ_t⁻¹ − λᵢ⁻¹) / (λ_t⁻¹ − λ₁⁻¹)`.
pub fn theorem_bound_via_barrier<T: Scalar>(info: &SpectrumInfo<T>, k: usize) -> Result<T> {
    if !info.in_regime(k) {
        return Err(Error::OutOfRegime {
            k,
            lo: (info.beta * T::from_count(info.t)).as_f64(),
            hi: info.t as f64,
        });
    }
    let inv_t = info.lambda_min().recip();
    let spread = inv_t - info.lambda_max().recip();
    let b: Vec<T> = info.eigs.iter().map(|&l| (inv_t - l.recip()) / spread).collect();
    let m = barrier_root_bound(&b, k)?;
    Ok((inv_t - spread * m).recip())
}
