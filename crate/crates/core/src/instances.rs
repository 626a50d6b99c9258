//! Deterministic test-matrix generators.
//!
//! Random draws come from ChaCha8 seeded with a `u64` (a counter-mode stream
//! cipher, so the stream is identical on every platform) and standard normals
//! from `rand_distr`'s ziggurat sampler. Entries are drawn in row-major order.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_frame, DenseMatrix};
use crate::scalar::Scalar;

/// Description of a generated input matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    Hard { d: usize, delta: f64 },
    PowerLaw { n: usize, d: usize, t: usize, s: f64, c: f64, seed: u64 },
    Random { n: usize, d: usize, seed: u64 },
}

impl InstanceSpec {
    pub fn build<T: Scalar>(&self) -> Result<DenseMatrix<T>> {
        match *self {
            Self::Hard { d, delta } => hard_instance(d, delta),
            Self::PowerLaw { n, d, t, s, c, seed } => power_law(n, d, t, s, c, seed),
            Self::Random { n, d, seed } => random_gaussian(n, d, seed),
        }
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hard { d, delta } => write!(f, "hard:d={d},delta={delta}"),
            Self::PowerLaw { n, d, t, s, c, seed } => {
                write!(f, "powerlaw:n={n},d={d},t={t},s={s},c={c},seed={seed}")
            }
            Self::Random { n, d, seed } => write!(f, "random:n={n},d={d},seed={seed}"),
        }
    }
}

/// Parses `hard:d=4,delta=1`, `powerlaw:n=64,d=64,t=64,s=2,c=1,seed=7`
/// and `random:n=6,d=6,seed=1`. Optional keys: `delta` (1), `t` (min(n,d)),
/// `s` (2), `c` (1), `seed` (0).
impl FromStr for InstanceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidInstance(msg);
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{part}`")))?;
            params.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        let take = |params: &mut std::collections::BTreeMap<String, String>, key: &str| {
            params.remove(key)
        };
        fn num<V: FromStr>(key: &str, raw: Option<String>) -> Result<Option<V>> {
            raw.map(|v| {
                v.parse::<V>()
                    .map_err(|_| Error::InvalidInstance(format!("bad value `{v}` for `{key}`")))
            })
            .transpose()
        }
        let required = |key: &str, v: Option<usize>| {
            v.ok_or_else(|| Error::InvalidInstance(format!("missing `{key}`")))
        };
        let spec = match kind.trim().to_ascii_lowercase().as_str() {
            "hard" => {
                let d = required("d", num("d", take(&mut params, "d"))?)?;
                let delta = num("delta", take(&mut params, "delta"))?.unwrap_or(1.0);
                Self::Hard { d, delta }
            }
            "powerlaw" | "power_law" | "power-law" => {
                let n = required("n", num("n", take(&mut params, "n"))?)?;
                let d = required("d", num("d", take(&mut params, "d"))?)?;
                let t = num("t", take(&mut params, "t"))?.unwrap_or(n.min(d));
                let s = num("s", take(&mut params, "s"))?.unwrap_or(2.0);
                let c = num("c", take(&mut params, "c"))?.unwrap_or(1.0);
                let seed = num("seed", take(&mut params, "seed"))?.unwrap_or(0);
                Self::PowerLaw { n, d, t, s, c, seed }
            }
            "random" | "gaussian" => {
                let n = required("n", num("n", take(&mut params, "n"))?)?;
                let d = required("d", num("d", take(&mut params, "d"))?)?;
                let seed = num("seed", take(&mut params, "seed"))?.unwrap_or(0);
                Self::Random { n, d, seed }
            }
            other => return Err(bad(format!("unknown instance kind `{other}`"))),
        };
        if let Some(key) = params.keys().next() {
            return Err(bad(format!("unknown key `{key}` for `{kind}`")));
        }
        Ok(spec)
    }
}

/// `[e₁ + δ·e₂, …, e₁ + δ·e_{d+1}]`, a `(d+1) x d` matrix with `AᵀA = δ²I + J`.
pub fn hard_instance<T: Scalar>(d: usize, delta: f64) -> Result<DenseMatrix<T>> {
    if d < 2 {
        return Err(Error::InvalidInstance(format!("hard instance needs d >= 2, got {d}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInstance(format!("delta must be positive, got {delta}")));
    }
    let mut data = vec![T::zero(); (d + 1) * d];
    for j in 0..d {
        data[j] = T::one();
        data[(j + 1) * d + j] = T::lit(delta);
    }
    DenseMatrix::new(d + 1, d, data)
}

/// `n x d` matrix of independent standard normals.
pub fn random_gaussian<T: Scalar>(n: usize, d: usize, seed: u64) -> Result<DenseMatrix<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = gaussian_entries(&mut rng, n * d);
    DenseMatrix::new(n, d, data)
}

fn gaussian_entries<T: Scalar>(rng: &mut ChaCha8Rng, len: usize) -> Vec<T> {
    (0..len)
        .map(|_| {
            let v: f64 = StandardNormal.sample(rng);
            T::lit(v)
        })
        .collect()
}

/// `A = U·Σ·Vᵀ` with `Σᵢᵢ = √(c / iˢ)` for `i = 1..t`; `U` (`n x t`) and
/// `V` (`d x t`) are orthonormal frames from QR of seeded Gaussian matrices,
/// `U` drawn first.
pub fn power_law<T: Scalar>(
    n: usize,
    d: usize,
    t: usize,
    s: f64,
    c: f64,
    seed: u64,
) -> Result<DenseMatrix<T>> {
    if t == 0 || t > n.min(d) {
        return Err(Error::InvalidInstance(format!("need 1 <= t <= min(n, d), got t={t}")));
    }
    if !(c > 0.0 && c.is_finite() && s.is_finite() && s >= 0.0) {
        return Err(Error::InvalidInstance(format!("need c > 0 and s >= 0, got c={c}, s={s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gu = DenseMatrix::<T>::new(n, t, gaussian_entries(&mut rng, n * t))?;
    let gv = DenseMatrix::<T>::new(d, t, gaussian_entries(&mut rng, d * t))?;
    let u = orthonormal_frame(&gu)?;
    let v = orthonormal_frame(&gv)?;
    let sigma: Vec<T> = (1..=t).map(|i| T::lit((c / (i as f64).powf(s)).sqrt())).collect();
    let mut data = vec![T::zero(); n * d];
    for i in 0..n {
        for j in 0..d {
            data[i * d + j] = (0..t).map(|l| u.get(i, l) * sigma[l] * v.get(j, l)).sum();
        }
    }
    DenseMatrix::new(n, d, data)
}

/// The eigenvalues `c / iˢ`, `i = 1..t`, that [`power_law`] realizes.
pub fn power_law_spectrum(t: usize, s: f64, c: f64) -> Vec<f64> {
    (1..=t).map(|i| c / (i as f64).powf(s)).collect()
}
