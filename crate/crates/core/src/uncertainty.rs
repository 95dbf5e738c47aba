//! Concentration bounds and classical uncertainty principles.
//!
//! Three probes live here:
//!
//! * the explicit small-ball bound `(2r)^{k(n−1)} (2δ)^k / (α(n,r)^k ‖u‖^k)`
//!   for measurement rows drawn uniformly from the radius-`r` ball, together
//!   with a Monte Carlo estimator of the true probability `P[‖Au + v‖ < δ]`;
//! * the null-space margin `min ‖Hx‖/‖x‖` of an operator over a point cloud;
//! * exhaustive Donoho–Stark / Elad–Bruckstein checks for orthonormal pairs:
//!   no nonzero signal can be simultaneously sparse in both bases once the
//!   joint support sizes fall inside the forbidden region.

use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::combinatorics::{binomial, Combinations};
use crate::error::LabError;
use crate::linalg::{orthonormality_defect, smallest_singular_value, svd_min_norm};
use crate::operators::{coherence, sample_a, MatrixLaw, MeasurementPair, RandomMatrixSpec};
use crate::rng::{derive, stream, DOMAIN_MC};
use crate::Result;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Absolute smallest-singular-value threshold certifying a kernel vector.
pub const KERNEL_TOL: f64 = 1e-10;

/// Explicit bound on `P[‖Au + v‖ < δ]` for `A` with i.i.d. rows uniform in
/// the radius-`r` ball of `Rⁿ`:
/// `(2r)^{k(n−1)} · (2δ)^k / (α(n,r)^k · ‖u‖^k)` with `α(n,r)` the ball
/// volume. Returned unclamped — it is a bound, not a probability, and may
/// exceed 1; report emitters clamp for presentation.
pub fn concentration_bound(n: usize, k: usize, r: f64, delta: f64, u_norm: f64) -> Result<f64> {
    if n == 0 || k == 0 {
        return Err(LabError::Config(format!(
            "bound needs n ≥ 1 and k ≥ 1, got n={n}, k={k}"
        )));
    }
    if !(r > 0.0) {
        return Err(LabError::Config(format!("ball radius must be positive, got {r}")));
    }
    if !(delta >= 0.0) {
        return Err(LabError::Config(format!("delta must be nonnegative, got {delta}")));
    }
    if !(u_norm > 0.0) {
        return Err(LabError::Precondition(format!(
            "direction norm must be positive, got {u_norm}"
        )));
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let kf = k as f64;
    let ln_alpha = 0.5 * nf * std::f64::consts::PI.ln() + nf * r.ln() - ln_gamma(0.5 * nf + 1.0);
    let ln_bound = kf * (nf - 1.0) * (2.0 * r).ln() + kf * (2.0 * delta).ln()
        - kf * ln_alpha
        - kf * u_norm.ln();
    Ok(ln_bound.exp())
}

/// Monte Carlo estimate with a 99% normal-approximation half-width.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub ci_half_width: f64,
    pub hits: u64,
    pub trials: u64,
}

/// Estimate `P[‖Au + v‖ < δ]` over `trials` independent draws of the `k×n`
/// matrix `A` (rows i.i.d. uniform in the radius-`r` ball). The half-width
/// uses a half-count continuity guard at empirical 0 or 1 so it never
/// collapses to zero.
pub fn small_ball_mc(
    n: usize,
    k: usize,
    r: f64,
    u: &DVector<f64>,
    v: &DVector<f64>,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if u.len() != n {
        return Err(LabError::Dimension(format!(
            "direction has length {}, expected {n}",
            u.len()
        )));
    }
    if v.len() != k {
        return Err(LabError::Dimension(format!(
            "offset has length {}, expected {k}",
            v.len()
        )));
    }
    if !(u.norm() > 0.0) {
        return Err(LabError::Precondition("direction must be nonzero".into()));
    }
    if trials < 1000 {
        return Err(LabError::Config(format!(
            "at least 1000 trials required for the normal approximation, got {trials}"
        )));
    }
    if !(delta > 0.0) || !(r > 0.0) {
        return Err(LabError::Config(format!(
            "delta and radius must be positive, got delta={delta}, r={r}"
        )));
    }

    let mut hits = 0_u64;
    for t in 0..trials {
        let spec = RandomMatrixSpec {
            law: MatrixLaw::UniformBall { r },
            seed: derive(seed, &[DOMAIN_MC, t]),
        };
        let a = sample_a(&spec, k, n)?;
        if (a * u + v).norm() < delta {
            hits += 1;
        }
    }

    let tf = trials as f64;
    let p_hat = hits as f64 / tf;
    let p_var = if hits == 0 || hits == trials {
        (hits as f64 + 0.5) / (tf + 1.0)
    } else {
        p_hat
    };
    let ci_half_width = Z_99 * (p_var * (1.0 - p_var) / tf).sqrt();
    Ok(McEstimate { p_hat, ci_half_width, hits, trials })
}

/// One grid point of a bound-versus-empirical comparison.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub delta: f64,
    /// Unclamped theoretical bound.
    pub bound: f64,
    pub p_hat: f64,
    pub ci: f64,
}

/// Bound-versus-Monte-Carlo comparison over a delta grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub trials: u64,
    pub rows: Vec<ConcentrationRow>,
}

/// Run [`small_ball_mc`] on every grid delta and pair each estimate with the
/// theoretical bound. Each delta gets an independent substream of `seed`.
pub fn concentration_report(
    n: usize,
    k: usize,
    r: f64,
    u: &DVector<f64>,
    v: &DVector<f64>,
    deltas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<ConcentrationReport> {
    if deltas.is_empty() {
        return Err(LabError::Config("delta grid must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for (i, &delta) in deltas.iter().enumerate() {
        let bound = concentration_bound(n, k, r, delta, u.norm())?;
        let mc = small_ball_mc(n, k, r, u, v, delta, trials, derive(seed, &[i as u64]))?;
        rows.push(ConcentrationRow { delta, bound, p_hat: mc.p_hat, ci: mc.ci_half_width });
    }
    Ok(ConcentrationReport { n, k, r, trials, rows })
}

/// Smallest ratio `‖Hx‖/‖x‖` over the cloud. Every point must be bounded
/// away from the origin (norm > 1e-12).
pub fn nullspace_margin(pair: &MeasurementPair, cloud: &crate::dimension::PointCloud) -> Result<f64> {
    if cloud.dim() != pair.n() {
        return Err(LabError::Dimension(format!(
            "cloud dimension {} does not match operator width {}",
            cloud.dim(),
            pair.n()
        )));
    }
    let h = pair.h();
    let mut margin = f64::INFINITY;
    for p in cloud.points() {
        let nrm = p.norm();
        if nrm <= 1e-12 {
            return Err(LabError::Precondition(
                "cloud contains a point within 1e-12 of the origin".into(),
            ));
        }
        margin = margin.min((h * p).norm() / nrm);
    }
    Ok(margin)
}

/// Which classical sparsity bound to verify.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Principle {
    /// Forbidden region `2·n_p·n_q < n`.
    DonohoStark,
    /// Forbidden region `n_p + n_q < 2/μ` with `μ` the mutual coherence.
    EladBruckstein,
}

/// A support pair inside the forbidden region whose concatenated restricted
/// matrix `[A_T  −B_S]` has a kernel vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub support_y: Vec<usize>,
    pub support_z: Vec<usize>,
    /// Stacked kernel coefficients: first the `A`-side, then the `B`-side.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UncertaintyVerdict {
    pub principle: Principle,
    /// Mutual coherence; present when the principle uses it.
    pub mu: Option<f64>,
    pub checked_pairs: u64,
    pub violations: Vec<Violation>,
    /// True when support pairs were sampled instead of enumerated.
    pub sampled: bool,
}

impl UncertaintyVerdict {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify a classical uncertainty principle for a pair of orthonormal bases.
///
/// Every support pair `(T, S)` inside the principle's forbidden region is
/// tested: a violation is a nonzero kernel vector of the `n×(|T|+|S|)` matrix
/// `[A_T  −B_S]`, detected when its smallest singular value drops to
/// [`KERNEL_TOL`]. For `n ≤ 8` the enumeration is exhaustive and exceeding
/// `budget` pairs is an error; for larger `n`, `budget` support pairs are
/// sampled uniformly and the verdict is flagged as sampled.
pub fn classical_check(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    principle: Principle,
    budget: f64,
) -> Result<UncertaintyVerdict> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(LabError::Dimension(format!(
            "both bases must be square and same-sized, got {}×{} and {}×{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if orthonormality_defect(a) > 1e-10 || orthonormality_defect(b) > 1e-10 {
        return Err(LabError::Precondition(
            "both bases must be orthonormal within 1e-10".into(),
        ));
    }

    let mu = coherence(a, b)?;
    let forbidden: Vec<(usize, usize)> = {
        let mut cells = Vec::new();
        for np in 1..=n {
            for nq in 1..=n {
                let inside = match principle {
                    Principle::DonohoStark => 2 * np * nq < n,
                    Principle::EladBruckstein => (np + nq) as f64 / 2.0 < 1.0 / mu,
                };
                if inside {
                    cells.push((np, nq));
                }
            }
        }
        cells
    };

    let total: f64 = forbidden
        .iter()
        .map(|&(np, nq)| binomial(n, np) * binomial(n, nq))
        .sum();

    let mut violations = Vec::new();
    let mut checked = 0_u64;
    let sampled = n > 8;

    if !sampled {
        if total > budget {
            return Err(LabError::Capacity(format!(
                "{total:.3e} support pairs exceed the budget {budget:.3e}"
            )));
        }
        for &(np, nq) in &forbidden {
            let mut tp = Combinations::new(n, np);
            while tp.next() {
                let mut tq = Combinations::new(n, nq);
                while tq.next() {
                    checked += 1;
                    if let Some(v) = kernel_witness(a, b, tp.current(), tq.current()) {
                        violations.push(v);
                    }
                }
            }
        }
    } else {
        let samples = budget.min(1e7) as u64;
        if samples == 0 {
            return Err(LabError::Config("sampling budget must allow at least one pair".into()));
        }
        let weights: Vec<f64> = forbidden
            .iter()
            .map(|&(np, nq)| binomial(n, np) * binomial(n, nq))
            .collect();
        let total_w: f64 = weights.iter().sum();
        if total_w == 0.0 {
            return Ok(UncertaintyVerdict {
                principle,
                mu: principle_mu(principle, mu),
                checked_pairs: 0,
                violations,
                sampled,
            });
        }
        let mut rng = stream(derive(n as u64, &[DOMAIN_MC, principle_tag(principle)]), &[]);
        for _ in 0..samples {
            let cell = sample_weighted(&weights, total_w, &mut rng);
            let (np, nq) = forbidden[cell];
            let tp = random_subset(n, np, &mut rng);
            let tq = random_subset(n, nq, &mut rng);
            checked += 1;
            if let Some(v) = kernel_witness(a, b, &tp, &tq) {
                violations.push(v);
            }
        }
    }

    Ok(UncertaintyVerdict {
        principle,
        mu: principle_mu(principle, mu),
        checked_pairs: checked,
        violations,
        sampled,
    })
}

fn principle_mu(principle: Principle, mu: f64) -> Option<f64> {
    match principle {
        Principle::DonohoStark => None,
        Principle::EladBruckstein => Some(mu),
    }
}

fn principle_tag(principle: Principle) -> u64 {
    match principle {
        Principle::DonohoStark => 1,
        Principle::EladBruckstein => 2,
    }
}

fn sample_weighted(weights: &[f64], total: f64, rng: &mut impl rand::Rng) -> usize {
    let mut target = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        target -= w;
        if target <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

fn random_subset(n: usize, k: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut out = idx[..k].to_vec();
    out.sort_unstable();
    out
}

/// Look for a nonzero signal representable in both restricted bases, i.e. a
/// kernel vector of the stacked matrix `[A_T  −B_S]`. Returns the supports
/// and stacked coefficients when the smallest singular value falls to
/// [`KERNEL_TOL`], `None` when the restricted columns are independent.
pub fn kernel_witness(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    tp: &[usize],
    tq: &[usize],
) -> Option<Violation> {
    let n = a.nrows();
    let m = tp.len() + tq.len();
    let mut stacked = DMatrix::zeros(n, m);
    for (c, &j) in tp.iter().enumerate() {
        stacked.set_column(c, &a.column(j));
    }
    for (c, &j) in tq.iter().enumerate() {
        stacked.set_column(tp.len() + c, &(-b.column(j)));
    }

    if smallest_singular_value(&stacked) > KERNEL_TOL {
        return None;
    }

    let witness = if m <= n {
        let svd = stacked.clone().svd(false, true);
        let vt = svd.v_t.expect("requested Vᵀ");
        let mut min_i = 0;
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s < svd.singular_values[min_i] {
                min_i = i;
            }
        }
        DVector::from_iterator(m, vt.row(min_i).iter().cloned())
    } else {
        svd_min_norm(&stacked, &DVector::zeros(n), 1e-12)
            .kernel
            .expect("a wide matrix always has a kernel vector")
    };

    Some(Violation {
        support_y: tp.to_vec(),
        support_z: tq.to_vec(),
        witness: witness.iter().cloned().collect(),
    })
}
