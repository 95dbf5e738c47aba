//! Measurement operators `H = [A B]`.
//!
//! `B` is the fixed, structured block (k × ℓ, full column rank); `A` is the
//! randomized block (k × (n−ℓ)). Builders for the standard `B` choices,
//! samplers for `A`, mutual coherence between column families, and euclidean
//! ball volumes (the normalizing constant in the row model and in the
//! small-ball bounds) live here.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::LabError;
use crate::linalg::{largest_singular_value, smallest_singular_value};
use crate::rng::{self, DOMAIN_MATRIX};
use crate::Result;

/// Relative factor in the rank tolerance `τ = 1e-9 · σ_max · max(k, ℓ)`.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Fixed-block construction. The serialized names are the ones accepted in
/// config files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum BKind {
    /// ℓ×ℓ identity stacked on k−ℓ zero rows.
    IdentityEmbed,
    /// First ℓ columns of the k-point orthonormal DCT-II matrix.
    DctOrthonormal,
    /// First ℓ columns of the ±1/√k Sylvester–Hadamard matrix (k a power of
    /// two).
    HadamardScaled,
    /// Explicit matrix, validated for shape and full column rank.
    Custom { matrix: Vec<Vec<f64>> },
}

/// Orthonormal DCT-II matrix of size n×n: column j holds frequency j.
fn dct_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        let scale = if j == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        scale * (std::f64::consts::PI * (2.0 * i as f64 + 1.0) * j as f64 / (2.0 * n as f64)).cos()
    })
}

/// Sylvester–Hadamard matrix scaled to orthonormal columns; n must be a
/// power of two.
pub fn hadamard_matrix(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 || !n.is_power_of_two() {
        return Err(LabError::Config(format!(
            "hadamard_scaled needs a power-of-two size, got {n}"
        )));
    }
    let mut h = DMatrix::from_element(1, 1, 1.0);
    while h.nrows() < n {
        let m = h.nrows();
        let mut next = DMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                let v = h[(i, j)];
                next[(i, j)] = v;
                next[(i + m, j)] = v;
                next[(i, j + m)] = v;
                next[(i + m, j + m)] = -v;
            }
        }
        h = next;
    }
    Ok(h / (n as f64).sqrt())
}

/// Build the fixed block `B` (k × ℓ) for `kind`.
///
/// Requires `k ≥ ℓ`; `ℓ = 0` yields an empty block (the one-part special
/// case where the model degenerates to `w = A y`). The identity embedding is
/// ℓ orthonormal coordinate columns; the DCT/Hadamard kinds slice ℓ columns
/// out of an orthonormal k×k transform, so `BᵀB = I` up to rounding.
pub fn build_b(kind: &BKind, k: usize, l: usize) -> Result<DMatrix<f64>> {
    if l > k {
        return Err(LabError::Dimension(format!(
            "fixed block needs at least as many rows as columns, got k={k} < l={l}"
        )));
    }
    if l == 0 {
        return Ok(DMatrix::zeros(k, 0));
    }
    match kind {
        BKind::IdentityEmbed => {
            let mut b = DMatrix::zeros(k, l);
            for j in 0..l {
                b[(j, j)] = 1.0;
            }
            Ok(b)
        }
        BKind::DctOrthonormal => Ok(dct_matrix(k).columns(0, l).into_owned()),
        BKind::HadamardScaled => Ok(hadamard_matrix(k)?.columns(0, l).into_owned()),
        BKind::Custom { matrix } => {
            let b = matrix_from_rows(matrix)?;
            if b.nrows() != k || b.ncols() != l {
                return Err(LabError::Dimension(format!(
                    "custom block is {}x{}, expected {k}x{l}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            let smax = largest_singular_value(&b);
            if smallest_singular_value(&b) <= RANK_REL_TOL * smax * k.max(l) as f64 {
                return Err(LabError::Precondition(
                    "custom block must have full column rank".into(),
                ));
            }
            Ok(b)
        }
    }
}

/// Wide fixed block for measurement-scarce runs (k ≤ ℓ): the first k rows of
/// the ℓ-point orthonormal DCT-II matrix. Its columns sample k Chebyshev
/// polynomials at ℓ distinct nodes, so every k-subset of columns is linearly
/// independent — the property the support search needs when the fixed part
/// is observed through fewer than ℓ rows.
pub fn dct_rows(k: usize, l: usize) -> Result<DMatrix<f64>> {
    if k > l {
        return Err(LabError::Dimension(format!(
            "row slice needs k ≤ l, got k={k}, l={l}"
        )));
    }
    Ok(dct_matrix(l).rows(0, k).into_owned())
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(LabError::Dimension("empty matrix".into()));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(LabError::Dimension("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Row distribution for the random block.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum MatrixLaw {
    /// Rows uniform on the euclidean ball of radius `r`.
    UniformBall { r: f64 },
    /// I.i.d. centered gaussian entries with standard deviation `sd`.
    Gaussian { sd: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RandomMatrixSpec {
    pub law: MatrixLaw,
    pub seed: u64,
}

impl MatrixLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MatrixLaw::UniformBall { r } if !(r > 0.0) => Err(LabError::Config(format!(
                "ball radius must be positive, got {r}"
            ))),
            MatrixLaw::Gaussian { sd } if !(sd > 0.0) => Err(LabError::Config(format!(
                "gaussian sd must be positive, got {sd}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Draw the random block: k i.i.d. rows in R^m.
///
/// Uniform-ball rows use the standard construction — gaussian direction
/// normalized to the sphere, radius `r·u^(1/m)` with `u` uniform on [0,1) —
/// which is exact for every m. Each row gets its own derived stream, so the
/// draw is reproducible and order-independent.
pub fn sample_a(spec: &RandomMatrixSpec, k: usize, m: usize) -> Result<DMatrix<f64>> {
    spec.law.validate()?;
    let mut a = DMatrix::zeros(k, m);
    for i in 0..k {
        let mut rng = rng::stream(spec.seed, &[DOMAIN_MATRIX, i as u64]);
        match spec.law {
            MatrixLaw::UniformBall { r } => {
                if m == 0 {
                    continue;
                }
                let row = ball_point(&mut rng, m, r);
                for j in 0..m {
                    a[(i, j)] = row[j];
                }
            }
            MatrixLaw::Gaussian { sd } => {
                for j in 0..m {
                    let z: f64 = rng.sample(StandardNormal);
                    a[(i, j)] = sd * z;
                }
            }
        }
    }
    Ok(a)
}

/// One point uniform in the ball B^m(0, r).
pub(crate) fn ball_point<R: Rng>(rng: &mut R, m: usize, r: f64) -> DVector<f64> {
    loop {
        let mut v = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 0.0 {
            let u: f64 = rng.random();
            v *= r * u.powf(1.0 / m as f64) / n;
            return v;
        }
    }
}

/// Mutual coherence: largest |⟨aᵢ, bⱼ⟩| over column pairs. Both families
/// must already have unit-norm columns (within 1e-10).
pub fn coherence(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(LabError::Dimension(format!(
            "column families live in different spaces: {} vs {} rows",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.ncols() == 0 || b.ncols() == 0 {
        return Err(LabError::Precondition("coherence of an empty family".into()));
    }
    for (name, m) in [("first", a), ("second", b)] {
        for j in 0..m.ncols() {
            let n = m.column(j).norm();
            if (n - 1.0).abs() > 1e-10 {
                return Err(LabError::Precondition(format!(
                    "{name} family column {j} has norm {n}, expected unit columns"
                )));
            }
        }
    }
    let g = a.transpose() * b;
    Ok(g.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs())))
}

/// Volume of the euclidean ball B^n(0, r): πⁿᐟ² rⁿ / Γ(n/2 + 1).
pub fn ball_volume(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(LabError::Config("ball dimension must be at least 1".into()));
    }
    if !(r > 0.0) {
        return Err(LabError::Config(format!("ball radius must be positive, got {r}")));
    }
    let half = n as f64 / 2.0;
    let log_vol = half * std::f64::consts::PI.ln() + n as f64 * r.ln() - ln_gamma(half + 1.0);
    Ok(log_vol.exp())
}

/// A validated measurement operator `H = [A B]`.
///
/// The standard constructor enforces the regime the separation guarantees
/// are stated in: at least as many rows as fixed-block columns and a fixed
/// block of full column rank. `with_wide_b` admits the measurement-scarce
/// regime `k < ℓ` (used by the declip experiments), where only full row rank
/// of `B` can be required.
#[derive(Debug, Clone)]
pub struct MeasurementPair {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    h: DMatrix<f64>,
}

impl MeasurementPair {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if b.ncols() > a.nrows() {
            return Err(LabError::Dimension(format!(
                "need k ≥ ℓ, got k={} < ℓ={}",
                a.nrows(),
                b.ncols()
            )));
        }
        Self::assemble(a, b)
    }

    /// Variant admitting fewer rows than fixed-block columns.
    pub fn with_wide_b(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        Self::assemble(a, b)
    }

    fn assemble(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != b.nrows() {
            return Err(LabError::Dimension(format!(
                "blocks disagree on row count: {} vs {}",
                a.nrows(),
                b.nrows()
            )));
        }
        let k = a.nrows();
        let l = b.ncols();
        if k == 0 {
            return Err(LabError::Dimension("operator needs at least one row".into()));
        }
        if l > 0 {
            let smax = largest_singular_value(&b);
            let tau = RANK_REL_TOL * smax * k.max(l) as f64;
            let need = l.min(k);
            let smin = smallest_singular_value(&b);
            // For k ≥ ℓ this is full column rank; for k < ℓ full row rank.
            let effective = if k >= l { smin } else { wide_min_sv(&b) };
            if effective <= tau {
                return Err(LabError::Precondition(format!(
                    "fixed block must have rank {need}: smallest singular value {effective:.3e} ≤ τ={tau:.3e}"
                )));
            }
        }
        let mut h = DMatrix::zeros(k, a.ncols() + l);
        h.view_mut((0, 0), (k, a.ncols())).copy_from(&a);
        h.view_mut((0, a.ncols()), (k, l)).copy_from(&b);
        Ok(MeasurementPair { a, b, h })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// The concatenated operator `[A B]`.
    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Number of measurement rows.
    pub fn k(&self) -> usize {
        self.a.nrows()
    }

    /// Fixed-block width ℓ.
    pub fn l(&self) -> usize {
        self.b.ncols()
    }

    /// Ambient dimension n = (n−ℓ) + ℓ.
    pub fn n(&self) -> usize {
        self.a.ncols() + self.b.ncols()
    }
}

fn wide_min_sv(b: &DMatrix<f64>) -> f64 {
    // Smallest nonzero singular value ~ smallest singular value of Bᵀ taken
    // as a map onto its k-dimensional image.
    let sv = b.clone().singular_values();
    sv.iter().cloned().fold(f64::INFINITY, f64::min)
}
