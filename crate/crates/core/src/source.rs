//! Signal sources.
//!
//! Each entry of a source vector is drawn from a mixture: with probability
//! `rho` from a continuous law, otherwise from a finite list of atoms. A
//! two-part signal concatenates `n−ℓ` entries of one mixture (the `y` part)
//! with `ℓ = ⌊λn⌋` entries of another (the `z` part). The clipping
//! construction produces structurally dependent pairs: `y` sparse
//! coefficients, `z` the residual a hard amplitude limit leaves on the
//! dictionary output.
//!
//! For mixtures whose discrete part sits entirely at 0, the number of
//! nonzero entries is an exact convolution of two binomials; `finite_rate`
//! turns its quantiles into the finite-n compression rate together with the
//! large-n limit `(1−λ)ρ₁ + λρ₂`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::LabError;
use crate::linalg::{largest_singular_value, smallest_singular_value};
use crate::operators::{matrix_from_rows, RANK_REL_TOL};
use crate::rng::{self, DOMAIN_SOURCE};
use crate::Result;

/// Continuous component of a mixture.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousLaw {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
}

impl ContinuousLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            ContinuousLaw::Uniform { lo, hi } if !(lo < hi) => Err(LabError::Config(format!(
                "uniform law needs lo < hi, got [{lo}, {hi}]"
            ))),
            ContinuousLaw::Gaussian { sd, .. } if !(sd > 0.0) => Err(LabError::Config(format!(
                "gaussian sd must be positive, got {sd}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            ContinuousLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            ContinuousLaw::Gaussian { mean, sd } => {
                Normal::new(mean, sd).expect("validated").sample(rng)
            }
        }
    }
}

/// Per-entry mixture: continuous with probability `rho`, otherwise an atom
/// drawn by weight. Atom values are compared to 0 exactly — the discrete
/// part is meant to place entries at exact grid values.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MixtureSpec {
    pub rho: f64,
    /// (value, weight) pairs; weights must sum to 1 within 1e-12.
    pub atoms: Vec<(f64, f64)>,
    pub law: ContinuousLaw,
}

impl MixtureSpec {
    /// Pure discrete mass at 0 with continuous weight `rho` on `law`.
    pub fn sparse(rho: f64, law: ContinuousLaw) -> Self {
        MixtureSpec { rho, atoms: vec![(0.0, 1.0)], law }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(LabError::Config(format!(
                "mixture weight rho must lie in [0,1], got {}",
                self.rho
            )));
        }
        self.law.validate()?;
        if self.rho < 1.0 {
            if self.atoms.is_empty() {
                return Err(LabError::Config(
                    "mixture with discrete mass needs at least one atom".into(),
                ));
            }
            if self.atoms.iter().any(|&(_, w)| w < 0.0) {
                return Err(LabError::Config("atom weights must be nonnegative".into()));
            }
            let total: f64 = self.atoms.iter().map(|&(_, w)| w).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(LabError::Config(format!(
                    "atom weights must sum to 1, got {total}"
                )));
            }
        }
        Ok(())
    }

    /// True when every atom sits exactly at 0.
    pub fn discrete_part_at_zero(&self) -> bool {
        self.rho >= 1.0 || self.atoms.iter().all(|&(v, _)| v == 0.0)
    }

    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if u < self.rho {
            return self.law.sample(rng);
        }
        let pick: f64 = rng.random();
        let mut acc = 0.0;
        for &(v, w) in &self.atoms {
            acc += w;
            if pick < acc {
                return v;
            }
        }
        self.atoms.last().map(|&(v, _)| v).unwrap_or(0.0)
    }
}

/// Two-part source: first `n−ℓ` entries from `spec_y`, last `ℓ = ⌊λn⌋` from
/// `spec_z`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConcatSpec {
    pub spec_y: MixtureSpec,
    pub spec_z: MixtureSpec,
    pub lambda: f64,
}

impl ConcatSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(LabError::Config(format!(
                "lambda must lie in [0,1], got {}",
                self.lambda
            )));
        }
        self.spec_y.validate()?;
        self.spec_z.validate()
    }

    /// ℓ = ⌊λn⌋, the length of the fixed-block part.
    pub fn split_len(&self, n: usize) -> usize {
        ((self.lambda * n as f64).floor() as usize).min(n)
    }
}

/// A drawn two-part signal. `split` is the length ℓ of the trailing `z`
/// part: `y = x[..n−ℓ]`, `z = x[n−ℓ..]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalSample {
    pub x: Vec<f64>,
    pub split: usize,
}

impl SignalSample {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.x[..self.x.len() - self.split]
    }

    pub fn z(&self) -> &[f64] {
        &self.x[self.x.len() - self.split..]
    }

    pub fn x_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.x)
    }
}

/// Draw a two-part signal with one derived stream per entry, so entries are
/// reproducible independently of evaluation order.
pub fn sample_concat(spec: &ConcatSpec, n: usize, seed: u64) -> Result<SignalSample> {
    spec.validate()?;
    if n == 0 {
        return Err(LabError::Config("sample length must be positive".into()));
    }
    let l = spec.split_len(n);
    let mut x = vec![0.0; n];
    for (i, slot) in x.iter_mut().enumerate() {
        let mut rng = rng::stream(seed, &[DOMAIN_SOURCE, i as u64]);
        let m = if i < n - l { &spec.spec_y } else { &spec.spec_z };
        *slot = m.sample_one(&mut rng);
    }
    Ok(SignalSample { x, split: l })
}

/// Entrywise hard limiter at amplitude `a > 0`.
pub fn clip(v: &DVector<f64>, a: f64) -> Result<DVector<f64>> {
    if !(a > 0.0) {
        return Err(LabError::Config(format!(
            "clip amplitude must be positive, got {a}"
        )));
    }
    Ok(v.map(|t| t.clamp(-a, a)))
}

/// Clipping-based dependent pair: `y` are dictionary coefficients, `z` the
/// clip residual of the dictionary output.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DeclipSpec {
    /// Dictionary rows (signal dim × coefficient dim), full column rank.
    pub dictionary: Vec<Vec<f64>>,
    /// Clip amplitude.
    pub amplitude: f64,
    /// Coefficient mixture; its discrete part must sit at 0.
    pub coeff_model: MixtureSpec,
}

impl DeclipSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0) {
            return Err(LabError::Config(format!(
                "clip amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        self.coeff_model.validate()?;
        if !self.coeff_model.discrete_part_at_zero() {
            return Err(LabError::UnsupportedModel(
                "declip coefficients need their discrete mass at 0".into(),
            ));
        }
        let d = self.dictionary_matrix()?;
        if d.ncols() > d.nrows() {
            return Err(LabError::Dimension(format!(
                "dictionary must be tall or square, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        let smax = largest_singular_value(&d);
        if smallest_singular_value(&d) <= RANK_REL_TOL * smax * d.nrows().max(d.ncols()) as f64 {
            return Err(LabError::Precondition(
                "dictionary must have full column rank".into(),
            ));
        }
        Ok(())
    }

    pub fn dictionary_matrix(&self) -> Result<DMatrix<f64>> {
        matrix_from_rows(&self.dictionary)
    }

    /// Signal dimension (dictionary rows) = length of the `z` part.
    pub fn signal_dim(&self) -> usize {
        self.dictionary.len()
    }

    /// Coefficient dimension (dictionary columns) = length of the `y` part.
    pub fn coeff_dim(&self) -> usize {
        self.dictionary.first().map(Vec::len).unwrap_or(0)
    }
}

/// Draw one declip pair: coefficients `y` from the mixture, residual
/// `z = clip(D·y, a) − D·y`. The concatenated sample is `x = [y; z]` with
/// `split` the signal dimension.
pub fn sample_declip(spec: &DeclipSpec, seed: u64) -> Result<SignalSample> {
    spec.validate()?;
    let d = spec.dictionary_matrix()?;
    let m = d.ncols();
    let mut y = DVector::zeros(m);
    for i in 0..m {
        let mut rng = rng::stream(seed, &[DOMAIN_SOURCE, i as u64]);
        y[i] = spec.coeff_model.sample_one(&mut rng);
    }
    let signal = &d * &y;
    let z = clip(&signal, spec.amplitude)? - &signal;
    let mut x = Vec::with_capacity(m + d.nrows());
    x.extend(y.iter());
    x.extend(z.iter());
    Ok(SignalSample { x, split: d.nrows() })
}

/// Finite-n and limiting compression rates of a two-part sparse source.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateEstimate {
    pub epsilon: f64,
    /// Smallest s with P[#nonzeros ≤ s] ≥ 1−ε.
    pub s_star: usize,
    /// s_star / n.
    pub rate: f64,
    /// Large-n limit (1−λ)ρ₁ + λρ₂.
    pub asymptote: f64,
}

/// Exact distribution of the nonzero count of a two-part draw whose discrete
/// parts sit at 0: convolution of Binomial(n−ℓ, ρ₁) and Binomial(ℓ, ρ₂).
///
/// (The continuous laws place no mass on single points, so an entry is
/// nonzero exactly when its continuous branch fires.)
pub fn nonzero_count_pmf(spec: &ConcatSpec, n: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(LabError::Config("sample length must be positive".into()));
    }
    if !spec.spec_y.discrete_part_at_zero() || !spec.spec_z.discrete_part_at_zero() {
        return Err(LabError::UnsupportedModel(
            "nonzero-count law requires both discrete parts at 0".into(),
        ));
    }
    let l = spec.split_len(n);
    let py = binomial_pmf(n - l, spec.spec_y.rho);
    let pz = binomial_pmf(l, spec.spec_z.rho);
    let mut out = vec![0.0; n + 1];
    for (i, &a) in py.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in pz.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    Ok(out)
}

/// Finite-n compression rate at failure budget `eps`, with its large-n
/// limit. Only defined for sources whose discrete parts sit at 0.
pub fn finite_rate(spec: &ConcatSpec, n: usize, eps: f64) -> Result<RateEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::Config(format!(
            "failure budget must lie in (0,1), got {eps}"
        )));
    }
    let pmf = nonzero_count_pmf(spec, n)?;
    let mut cdf = 0.0;
    let mut s_star = n;
    for (s, &p) in pmf.iter().enumerate() {
        cdf += p;
        if cdf >= 1.0 - eps {
            s_star = s;
            break;
        }
    }
    let asymptote =
        (1.0 - spec.lambda) * spec.spec_y.rho + spec.lambda * spec.spec_z.rho;
    Ok(RateEstimate {
        epsilon: eps,
        s_star,
        rate: s_star as f64 / n as f64,
        asymptote,
    })
}

/// Binomial(m, p) probability vector, exact at the endpoints and computed in
/// log space elsewhere.
pub fn binomial_pmf(m: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; m + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[m] = 1.0;
        return pmf;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let lg_m = ln_gamma(m as f64 + 1.0);
    for (k, slot) in pmf.iter_mut().enumerate() {
        let log_choose = lg_m - ln_gamma(k as f64 + 1.0) - ln_gamma((m - k) as f64 + 1.0);
        *slot = (log_choose + k as f64 * lp + (m - k) as f64 * lq).exp();
    }
    pmf
}
