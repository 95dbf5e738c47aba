//! Consistency-search separation.
//!
//! Given measurements `w = A y + B z` and a joint sparsity model
//! (`≤ s1` nonzeros in `y`, `≤ s2` in `z`), the separator enumerates every
//! admissible joint support — all sizes up to the caps, smaller supports
//! included so an inconsistent right-hand side is recognized as such — and
//! solves the restricted least-squares problem on each. A support is
//! *consistent* when its residual is at most `τ_fit · max(1, ‖w‖)` and the
//! restricted columns are linearly independent; a consistent support whose
//! columns are dependent carries a whole affine continuum of solutions and
//! is therefore an ambiguity by itself.
//!
//! Candidates from different supports are deduplicated entrywise within
//! `τ_distinct`. The outcome only distinguishes zero / one / several distinct
//! candidates, so the search stops as soon as two distinct consistent
//! candidates are known; `count` reports how many distinct candidates had
//! been found by then.
//!
//! The module also hosts the quantitative stability probes: the empirical
//! Hölder constant of the inverse map on a point cloud, and the excision
//! ladder that tests `min ‖Hx‖ ≥ δ_j` after removing the ball of radius
//! `δ_j^β` around the origin.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{subsets_up_to, Combinations};
use crate::error::LabError;
use crate::linalg::{svd_min_norm, ColumnLstsq, QrOutcome};
use crate::operators::MeasurementPair;
use crate::Result;

/// Sparsity caps of the joint support model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct SupportModel {
    /// Cap on nonzeros in the random-block part `y`.
    pub s1: usize,
    /// Cap on nonzeros in the fixed-block part `z`.
    pub s2: usize,
}

/// Fit, dedup and rank tolerances used throughout a separation run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Residual acceptance: consistent ⇔ residual ≤ τ_fit·max(1, ‖w‖).
    pub tau_fit: f64,
    /// Candidates agreeing entrywise within this are the same candidate.
    pub tau_distinct: f64,
    /// Relative rank cutoff for restricted systems.
    pub tau_rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tau_fit: 1e-9, tau_distinct: 1e-7, tau_rank: 1e-9 }
    }
}

/// Cap on the number of enumerated supports.
pub const DEFAULT_SUPPORT_BUDGET: f64 = 1e6;

/// Decoder outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SeparationResult {
    /// Exactly one consistent candidate.
    Unique {
        x_hat: Vec<f64>,
        residual: f64,
        /// Column indices of the support that produced the candidate.
        support: Vec<usize>,
    },
    /// At least `count ≥ 2` distinct consistent candidates; two witnesses.
    Ambiguous {
        count: usize,
        witness_a: Vec<f64>,
        witness_b: Vec<f64>,
    },
    /// No admissible support fits the measurements.
    NoneConsistent,
}

impl SeparationResult {
    pub fn is_unique(&self) -> bool {
        matches!(self, SeparationResult::Unique { .. })
    }

    pub fn is_ambiguous(&self) -> bool {
        matches!(self, SeparationResult::Ambiguous { .. })
    }
}

struct Candidate {
    x: DVector<f64>,
    residual: f64,
    support: Vec<usize>,
}

/// Separate with default dedup/rank tolerances and support budget.
pub fn separate(
    pair: &MeasurementPair,
    w: &DVector<f64>,
    model: &SupportModel,
    tau_fit: f64,
) -> Result<SeparationResult> {
    let tol = Tolerances { tau_fit, ..Tolerances::default() };
    separate_opts(pair, w, model, &tol, DEFAULT_SUPPORT_BUDGET)
}

/// Full-control separation.
pub fn separate_opts(
    pair: &MeasurementPair,
    w: &DVector<f64>,
    model: &SupportModel,
    tol: &Tolerances,
    budget: f64,
) -> Result<SeparationResult> {
    let k = pair.k();
    let l = pair.l();
    let ny = pair.n() - l;
    if w.len() != k {
        return Err(LabError::Dimension(format!(
            "measurement vector has length {}, operator has {k} rows",
            w.len()
        )));
    }
    if model.s1 > ny || model.s2 > l {
        return Err(LabError::Config(format!(
            "sparsity caps (s1={}, s2={}) exceed the part dimensions ({ny}, {l})",
            model.s1, model.s2
        )));
    }
    if !(tol.tau_fit > 0.0) {
        return Err(LabError::Config("fit tolerance must be positive".into()));
    }
    let support_count = subsets_up_to(ny, model.s1) * subsets_up_to(l, model.s2);
    if support_count > budget {
        return Err(LabError::Capacity(format!(
            "support enumeration needs {support_count:.3e} supports, budget is {budget:.3e}"
        )));
    }

    let threshold = tol.tau_fit * w.norm().max(1.0);
    let mut ws = ColumnLstsq::new(k, (model.s1 + model.s2).min(k));
    let mut cols: Vec<usize> = Vec::with_capacity(model.s1 + model.s2);
    let mut rep: Option<Candidate> = None;

    for sy in 0..=model.s1 {
        let mut ty = Combinations::new(ny, sy);
        while ty.next() {
            for sz in 0..=model.s2 {
                let mut tz = Combinations::new(l, sz);
                while tz.next() {
                    cols.clear();
                    cols.extend_from_slice(ty.current());
                    cols.extend(tz.current().iter().map(|&j| j + ny));

                    let cand = match fit_support(pair, w, &cols, threshold, tol, &mut ws) {
                        SupportFit::Inconsistent => continue,
                        SupportFit::Candidate(c) => c,
                        SupportFit::Continuum { base, kernel } => {
                            // A consistent affine line of solutions: report
                            // two points on it.
                            let a = embed(pair.n(), &cols, &base);
                            let b = embed(pair.n(), &cols, &(base + kernel));
                            return Ok(SeparationResult::Ambiguous {
                                count: 2,
                                witness_a: a.iter().cloned().collect(),
                                witness_b: b.iter().cloned().collect(),
                            });
                        }
                    };

                    match &rep {
                        None => rep = Some(cand),
                        Some(first) => {
                            if !same_candidate(&first.x, &cand.x, tol.tau_distinct) {
                                return Ok(SeparationResult::Ambiguous {
                                    count: 2,
                                    witness_a: first.x.iter().cloned().collect(),
                                    witness_b: cand.x.iter().cloned().collect(),
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(match rep {
        Some(c) => SeparationResult::Unique {
            x_hat: c.x.iter().cloned().collect(),
            residual: c.residual,
            support: c.support,
        },
        None => SeparationResult::NoneConsistent,
    })
}

enum SupportFit {
    Inconsistent,
    Candidate(Candidate),
    Continuum { base: DVector<f64>, kernel: DVector<f64> },
}

fn fit_support(
    pair: &MeasurementPair,
    w: &DVector<f64>,
    cols: &[usize],
    threshold: f64,
    tol: &Tolerances,
    ws: &mut ColumnLstsq,
) -> SupportFit {
    let k = pair.k();
    let n = pair.n();
    let m = cols.len();
    let h = pair.h();

    if m == 0 {
        let residual = w.norm();
        if residual <= threshold {
            return SupportFit::Candidate(Candidate {
                x: DVector::zeros(n),
                residual,
                support: Vec::new(),
            });
        }
        return SupportFit::Inconsistent;
    }

    if m <= k {
        if let QrOutcome::Solved { residual } = ws.solve(h, cols, w, tol.tau_rank) {
            if residual <= threshold {
                let coeffs = DVector::from_column_slice(ws.solution(m));
                return SupportFit::Candidate(Candidate {
                    x: embed(n, cols, &coeffs),
                    residual,
                    support: cols.to_vec(),
                });
            }
            return SupportFit::Inconsistent;
        }
        // Near-deficient: fall through to the SVD analysis.
    }

    let sub = h.select_columns(cols.iter());
    let s = svd_min_norm(&sub, w, tol.tau_rank);
    if s.residual > threshold {
        return SupportFit::Inconsistent;
    }
    if s.rank < m {
        let kernel = s
            .kernel
            .expect("rank-deficient restricted system has a kernel vector");
        return SupportFit::Continuum { base: s.solution, kernel };
    }
    SupportFit::Candidate(Candidate {
        x: embed(n, cols, &s.solution),
        residual: s.residual,
        support: cols.to_vec(),
    })
}

fn embed(n: usize, cols: &[usize], coeffs: &DVector<f64>) -> DVector<f64> {
    let mut x = DVector::zeros(n);
    for (c, &j) in cols.iter().enumerate() {
        x[j] = coeffs[c];
    }
    x
}

fn same_candidate(a: &DVector<f64>, b: &DVector<f64>, tau: f64) -> bool {
    a.iter().zip(b.iter()).all(|(&p, &q)| (p - q).abs() <= tau)
}

/// Empirical Hölder constant of the inverse map on a cloud: the smallest
/// `‖H(u−v)‖ / ‖u−v‖^(1/β)` over point pairs (the origin is adjoined when
/// absent). Pairs closer than 1e-12 are skipped.
pub fn holder_estimate(pair: &MeasurementPair, cloud: &crate::dimension::PointCloud, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(LabError::Config(format!(
            "hölder exponent must lie in (0, 1], got {beta}"
        )));
    }
    if cloud.dim() != pair.n() {
        return Err(LabError::Dimension(format!(
            "cloud dimension {} does not match operator width {}",
            cloud.dim(),
            pair.n()
        )));
    }
    let h = pair.h();
    let images: Vec<DVector<f64>> = cloud.points().iter().map(|p| h * p).collect();
    let inv_beta = 1.0 / beta;
    let mut best = f64::INFINITY;

    let pts = cloud.points();
    for i in 0..pts.len() {
        for jj in i + 1..pts.len() {
            let d = (&pts[i] - &pts[jj]).norm();
            if d <= 1e-12 {
                continue;
            }
            let gain = (&images[i] - &images[jj]).norm();
            best = best.min(gain / d.powf(inv_beta));
        }
    }
    if !pts.iter().any(|p| p.norm() <= 1e-12) {
        for (p, img) in pts.iter().zip(&images) {
            let d = p.norm();
            best = best.min(img.norm() / d.powf(inv_beta));
        }
    }

    if best.is_finite() {
        Ok(best)
    } else {
        Err(LabError::UndefinedEstimate(
            "no point pair further apart than 1e-12".into(),
        ))
    }
}

/// Dyadic excision schedule: scales `δ_j = 2⁻ʲ` for `j ∈ [j_min, j_max]`,
/// excision radius `δ_j^β`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExcisionLadder {
    pub beta: f64,
    pub j_min: u32,
    pub j_max: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExcisionRow {
    pub j: u32,
    pub delta: f64,
    pub excision_radius: f64,
    /// Smallest ‖Hx‖ over surviving points; absent when none survive.
    pub min_gain: Option<f64>,
    pub pass: bool,
    /// Pass by emptiness rather than by margin.
    pub vacuous: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExcisionReport {
    pub beta: f64,
    pub rows: Vec<ExcisionRow>,
    /// Smallest tested j from which every subsequent rung passes.
    pub j_observed: Option<u32>,
}

/// Evaluate `min ‖Hx‖ ≥ δ_j` over the cloud with the ball of radius
/// `δ_j^β` around the origin excised, rung by rung.
pub fn excision_check(
    pair: &MeasurementPair,
    cloud: &crate::dimension::PointCloud,
    ladder: &ExcisionLadder,
) -> Result<ExcisionReport> {
    if !(ladder.beta > 0.0 && ladder.beta <= 1.0) {
        return Err(LabError::Config(format!(
            "hölder exponent must lie in (0, 1], got {}",
            ladder.beta
        )));
    }
    if ladder.j_min > ladder.j_max {
        return Err(LabError::Config(format!(
            "excision ladder needs j_min ≤ j_max, got [{}, {}]",
            ladder.j_min, ladder.j_max
        )));
    }
    if cloud.dim() != pair.n() {
        return Err(LabError::Dimension(format!(
            "cloud dimension {} does not match operator width {}",
            cloud.dim(),
            pair.n()
        )));
    }
    let h = pair.h();
    let norms: Vec<f64> = cloud.points().iter().map(|p| p.norm()).collect();
    let gains: Vec<f64> = cloud.points().iter().map(|p| (h * p).norm()).collect();

    let mut rows = Vec::with_capacity((ladder.j_max - ladder.j_min + 1) as usize);
    for j in ladder.j_min..=ladder.j_max {
        let delta = 0.5_f64.powi(j as i32);
        let excision_radius = delta.powf(ladder.beta);
        let mut min_gain: Option<f64> = None;
        for (nrm, gain) in norms.iter().zip(&gains) {
            if *nrm > excision_radius {
                min_gain = Some(min_gain.map_or(*gain, |m: f64| m.min(*gain)));
            }
        }
        let (pass, vacuous) = match min_gain {
            Some(g) => (g >= delta, false),
            None => (true, true),
        };
        rows.push(ExcisionRow { j, delta, excision_radius, min_gain, pass, vacuous });
    }

    let mut j_observed = None;
    for row in rows.iter().rev() {
        if row.pass {
            j_observed = Some(row.j);
        } else {
            break;
        }
    }

    Ok(ExcisionReport { beta: ladder.beta, rows, j_observed })
}

/// Dimension-versus-rows admissibility of a Hölder exponent:
/// `1 − dim/k > β`.
pub fn holder_condition(dim_value: f64, k: usize, beta: f64) -> bool {
    debug_assert!(k >= 1);
    1.0 - dim_value / k as f64 > beta
}
