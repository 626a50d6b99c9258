//! Deterministic greedy column selection driven by expected-polynomial roots.
//!
//! At step `l` (with `S` the `l` columns chosen so far) every admissible
//! column `i` is scored by the largest root of
//! `(x²∂ₓ − d·x)^{k−l−1} det[x·I − AᵀQ_{S∪i}A]`, and the column with the
//! smallest score is appended. The final residual then satisfies
//! `‖A − A_SA_S†A‖₂² ≤ 2kε + maxroot (x²∂ₓ − d·x)ᵏ det[x·I − AᵀA]`.
//!
//! Implementation notes:
//!
//! * `A` is rescaled by a power of two so that `‖A‖₂² ∈ [1/2, 2]`; scores
//!   are mapped back exactly.
//! * Columns with `‖Q_Sa_i‖² ≤ max(n, d)·ε·‖A‖₂²` (the same threshold that
//!   defines the numerical rank `t`) are skipped.
//! * Candidate polynomials are deflated to their known rank `t − l − 1`
//!   before the operator is applied, which removes rounding noise from the
//!   low-order coefficients.
//! * All candidates are bisected on the same dyadic bracket, so two
//!   candidates with identical root locations get bit-identical scores and
//!   the smallest index wins ties.
//! * A candidate whose bracket lower end exceeds the best score so far plus
//!   `2ε` is abandoned. Bisection is deterministic, so this never changes
//!   the argmin, whatever the evaluation order.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    char_poly, dot, eigenvalue_threshold, gram, positive_eigenvalues, residual_spectral_sq,
    DenseMatrix, Orientation, Projector, SymMatrix,
};
use crate::polynomial::{maxroot_bracketed, Bisection, RealPoly, RootApprox};
use crate::scalar::Scalar;

/// Which cached form the candidate polynomials are computed from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `Tall` when `d < n`, `Wide` otherwise.
    #[default]
    Auto,
    /// `d x d` cache `AᵀQ_SA`.
    Tall,
    /// `n x n` cache `Q_SAAᵀQ_S`; `p = x^{d−n}·det[x·I_n − Q_SAAᵀQ_S]`.
    Wide,
}

impl Branch {
    fn resolve(self, n: usize, d: usize) -> Self {
        match self {
            Self::Auto if d < n => Self::Tall,
            Self::Auto => Self::Wide,
            b => b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectOptions<T> {
    pub eps: T,
    pub branch: Branch,
    /// Abandon bisection of candidates that cannot win.
    pub prune: bool,
}

impl<T: Scalar> SelectOptions<T> {
    pub fn new(eps: T) -> Self {
        Self { eps, branch: Branch::Auto, prune: true }
    }
}

/// Greedy loop state, in the internally rescaled units.
#[derive(Clone, Debug)]
pub struct SelectionState<T> {
    a: DenseMatrix<T>,
    chosen: Vec<usize>,
    q: Projector<T>,
    cache: SymMatrix<T>,
    branch: Branch,
    rank: usize,
    degenerate_sq: T,
    log4_scale: i32,
}

/// Output of [`select`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionResult<T> {
    /// Chosen columns, 0-based, in selection order.
    pub subset: Vec<usize>,
    /// `‖A − A_SA_S†A‖₂²`, recomputed from scratch on the input matrix.
    pub residual_sq: T,
    /// Winning score of each iteration; the last one is `maxroot p_S`.
    pub iteration_roots: Vec<RootApprox<T>>,
    /// `maxroot (x²∂ₓ − d·x)ᵏ det[x·I − AᵀA]`.
    pub expected_root: RootApprox<T>,
    pub eps: T,
    /// Numerical rank of `A`.
    pub rank: usize,
    pub branch: Branch,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl<T: Scalar> SelectionResult<T> {
    /// Largest violation of `root_l ≤ root_{l−1} + 2ε` (with
    /// `root_{−1} = expected_root`); nonpositive when the chain holds.
    pub fn chain_excess(&self) -> T {
        let two_eps = T::lit(2.0) * self.eps;
        let mut prev = self.expected_root.value;
        let mut worst = T::neg_infinity();
        for r in &self.iteration_roots {
            worst = worst.max(r.value - prev - two_eps);
            prev = r.value;
        }
        worst
    }
}

fn power_of_two_scale<T: Scalar>(lambda_max: T) -> i32 {
    if !(lambda_max > T::zero()) {
        return 0;
    }
    // λ·4^m ∈ [1/2, 2]
    (-lambda_max.as_f64().log2() / 2.0).round() as i32
}

fn bracket_hi<T: Scalar>() -> T {
    T::lit(4.0)
}

impl<T: Scalar> SelectionState<T> {
    /// Empty selection over `a`.
    pub fn new(a: &DenseMatrix<T>, branch: Branch) -> Result<Self> {
        let eigs = positive_eigenvalues(a)?;
        let rank = eigs.len();
        let lambda_max = eigs.first().copied().unwrap_or(T::zero());
        let m = power_of_two_scale(lambda_max);
        let scaled = a.scaled(T::lit(2f64.powi(m)));
        let lambda_scaled = lambda_max * T::lit(4f64.powi(m));
        let (n, d) = (a.n_rows(), a.n_cols());
        let branch = branch.resolve(n, d);
        let cache = match branch {
            Branch::Tall => gram(&scaled, Orientation::Columns),
            _ => gram(&scaled, Orientation::Rows),
        };
        Ok(Self {
            degenerate_sq: eigenvalue_threshold(n, d, lambda_scaled),
            a: scaled,
            chosen: Vec::new(),
            q: Projector::identity(n),
            cache,
            branch,
            rank,
            log4_scale: m,
        })
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn iteration(&self) -> usize {
        self.chosen.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn projector(&self) -> &Projector<T> {
        &self.q
    }

    fn to_scaled(&self, v: T) -> T {
        v * T::lit(4f64.powi(self.log4_scale))
    }

    fn from_scaled(&self, v: T) -> T {
        v * T::lit(4f64.powi(-self.log4_scale))
    }

    /// `Q_S a_i` and its squared norm, or `DegenerateDirection`.
    fn direction(&self, i: usize) -> Result<(Vec<T>, T)> {
        let u = self.q.apply(&self.a.column(i));
        let s = dot(&u, &u);
        if s <= self.degenerate_sq {
            return Err(Error::DegenerateDirection {
                norm: self.from_scaled(s).sqrt().as_f64(),
                tol: self.from_scaled(self.degenerate_sq).sqrt().as_f64(),
            });
        }
        Ok((u, s))
    }

    fn updated_cache(&self, u: &[T], s: T) -> SymMatrix<T> {
        match self.branch {
            Branch::Tall => self.cache.rank1_downdate(&self.a.tr_mul_vec(u), s),
            _ => {
                let c = self.cache.mul_vec(u);
                self.cache.sym_rank2_update(u, &c, s.recip(), dot(u, &c) / (s * s))
            }
        }
    }

    /// `det[x·I_d − AᵀQA]` from a cache, deflated to `positive` nonzero roots.
    fn poly_from_cache(&self, cache: &SymMatrix<T>, positive: usize) -> RealPoly<T> {
        let d = self.a.n_cols();
        char_poly(cache).reframe(d).with_zero_roots(d - positive)
    }

    /// Polynomial scored for column `i` when `k` columns are wanted.
    pub fn candidate_poly(&self, i: usize, k: usize) -> Result<RealPoly<T>> {
        let (u, s) = self.direction(i)?;
        let l = self.iteration();
        let p = self.poly_from_cache(&self.updated_cache(&u, s), self.rank - l - 1);
        Ok(p.op_dk_normalized(k - l - 1))
    }

    fn score_scaled(&self, i: usize, k: usize, eps_s: T, cutoff: Option<T>) -> Result<Bisection<T>> {
        let p = self.candidate_poly(i, k)?;
        maxroot_bracketed(&p, T::zero(), bracket_hi(), eps_s, cutoff)
    }

    /// `ε`-approximate score of column `i`, in the units of the input.
    pub fn candidate_score(&self, i: usize, k: usize, eps: T) -> Result<RootApprox<T>> {
        self.check_candidate(i, k)?;
        match self.score_scaled(i, k, self.to_scaled(eps), None)? {
            Bisection::Root(r) => Ok(RootApprox { value: self.from_scaled(r.value), epsilon: eps }),
            Bisection::Pruned { .. } => unreachable!("no cutoff given"),
        }
    }

    fn check_candidate(&self, i: usize, k: usize) -> Result<()> {
        if i >= self.a.n_cols() {
            return Err(Error::IndexOutOfRange { index: i, cols: self.a.n_cols() });
        }
        if self.chosen.contains(&i) {
            return Err(Error::DuplicateIndex(i));
        }
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if k > self.rank {
            return Err(Error::RankExceeded { k, rank: self.rank });
        }
        if self.iteration() >= k {
            return Err(Error::InvalidMatrix(format!("already selected {} >= k = {k} columns", self.iteration())));
        }
        Ok(())
    }

    /// `maxroot (x²∂ₓ − d·x)^{k−l} p_S` for the current `S`.
    pub fn current_root(&self, k: usize, eps: T) -> Result<RootApprox<T>> {
        let l = self.iteration();
        if k < l {
            return Err(Error::RankExceeded { k, rank: l });
        }
        let p = self.poly_from_cache(&self.cache, self.rank - l).op_dk_normalized(k - l);
        match maxroot_bracketed(&p, T::zero(), bracket_hi(), self.to_scaled(eps), None)? {
            Bisection::Root(r) => Ok(RootApprox { value: self.from_scaled(r.value), epsilon: eps }),
            Bisection::Pruned { .. } => unreachable!("no cutoff given"),
        }
    }

    /// Appends column `i`, updating the projector and cache.
    pub fn push(&mut self, i: usize) -> Result<()> {
        if self.chosen.contains(&i) {
            return Err(Error::DuplicateIndex(i));
        }
        let (u, s) = self.direction(i)?;
        self.cache = self.updated_cache(&u, s);
        self.q = self.q.downdate(&u, s);
        self.chosen.push(i);
        Ok(())
    }

    /// `‖cache − rebuilt‖_F`, the rebuild going from `Q_S` directly.
    pub fn rebuild_defect(&self) -> T {
        let qa = crate::linalg::project_columns(&self.q, &self.a);
        let fresh = match self.branch {
            Branch::Tall => gram(&qa, Orientation::Columns),
            _ => gram(&qa, Orientation::Rows),
        };
        self.from_scaled(self.cache.distance(&fresh))
    }

    /// Runs one greedy step; returns the chosen index and its score.
    pub fn step(&mut self, k: usize, opts: &SelectOptions<T>) -> Result<(usize, RootApprox<T>)> {
        let eps_s = self.to_scaled(opts.eps);
        let best_bits = AtomicU64::new(f64::INFINITY.to_bits());
        let candidates: Vec<usize> = (0..self.a.n_cols()).filter(|i| !self.chosen.contains(i)).collect();
        let state = &*self;
        let scored: Vec<(usize, Result<Bisection<T>>)> = candidates
            .par_iter()
            .map(|&i| {
                let cutoff = if opts.prune {
                    let b = f64::from_bits(best_bits.load(Ordering::Acquire));
                    b.is_finite().then(|| T::lit(b))
                } else {
                    None
                };
                let res = state.score_scaled(i, k, eps_s, cutoff);
                if let Ok(Bisection::Root(r)) = &res {
                    let v = r.value.as_f64();
                    best_bits.fetch_min_f64(v);
                }
                (i, res)
            })
            .collect();

        let mut best: Option<(usize, T)> = None;
        for (i, res) in scored {
            match res {
                Ok(Bisection::Root(r)) => {
                    if best.is_none_or(|(_, v)| r.value < v) {
                        best = Some((i, r.value));
                    }
                }
                Ok(Bisection::Pruned { .. }) | Err(Error::DegenerateDirection { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let (j, v) = best.ok_or(Error::AllCandidatesDegenerate { selected: self.iteration() })?;
        self.push(j)?;
        Ok((j, RootApprox { value: self.from_scaled(v), epsilon: opts.eps }))
    }
}

trait FetchMinF64 {
    fn fetch_min_f64(&self, v: f64);
}

impl FetchMinF64 for AtomicU64 {
    // Nonnegative finite f64 values order like their bit patterns.
    fn fetch_min_f64(&self, v: f64) {
        if v >= 0.0 {
            self.fetch_min(v.to_bits(), Ordering::AcqRel);
        } else {
            self.store(0f64.to_bits(), Ordering::Release);
        }
    }
}

/// Selects `k` columns of `a` with root accuracy `eps`.
pub fn select<T: Scalar>(a: &DenseMatrix<T>, k: usize, eps: T) -> Result<SelectionResult<T>> {
    select_with(a, k, &SelectOptions::new(eps))
}

pub fn select_with<T: Scalar>(
    a: &DenseMatrix<T>,
    k: usize,
    opts: &SelectOptions<T>,
) -> Result<SelectionResult<T>> {
    let start = Instant::now();
    if !(opts.eps > T::zero()) || !opts.eps.is_finite() {
        return Err(Error::InvalidTolerance(opts.eps.as_f64()));
    }
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let mut state = SelectionState::new(a, opts.branch)?;
    if k > state.rank {
        return Err(Error::RankExceeded { k, rank: state.rank });
    }
    let expected_root = state.current_root(k, opts.eps)?;
    let mut iteration_roots = Vec::with_capacity(k);
    for _ in 0..k {
        let (_, root) = state.step(k, opts)?;
        iteration_roots.push(root);
    }
    let subset = state.chosen.clone();
    let residual_sq = residual_spectral_sq(a, &subset)?;
    Ok(SelectionResult {
        subset,
        residual_sq,
        iteration_roots,
        expected_root,
        eps: opts.eps,
        rank: state.rank,
        branch: state.branch,
        elapsed: start.elapsed(),
    })
}
