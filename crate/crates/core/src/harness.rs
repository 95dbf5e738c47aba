//! Configuration-driven experiment drivers.
//!
//! A single [`ExperimentConfig`] JSON document describes every run kind:
//! phase-transition sweeps and declipping runs read the top-level fields,
//! while the concentration / dimension / uncertainty drivers read their
//! optional sections. Determinism is part of the contract: all randomness
//! derives from the master seed (per-trial seeds are
//! `derive(master, [k, trial])`), so identical configs produce identical
//! reports byte for byte, regardless of execution order.

use nalgebra::DVector;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::dimension::{box_dim, union_sparse_cloud, DimFit, PointCloud};
use crate::error::LabError;
use crate::operators::{
    build_b, dct_rows, sample_a, BKind, MatrixLaw, MeasurementPair, RandomMatrixSpec,
};
use crate::rng::{derive, stream, DOMAIN_CLOUD, DOMAIN_MATRIX, DOMAIN_MC, DOMAIN_SOURCE, DOMAIN_SUPPORT, DOMAIN_TRIAL};
use crate::separator::{
    separate_opts, SeparationResult, SupportModel, Tolerances, DEFAULT_SUPPORT_BUDGET,
};
use crate::source::{binomial_pmf, sample_concat, sample_declip, ConcatSpec, ContinuousLaw, DeclipSpec};
use crate::uncertainty::{
    classical_check, concentration_report, ConcentrationReport, Principle, UncertaintyVerdict,
};
use crate::Result;

/// Two-sided 95% normal quantile (Wilson intervals).
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Recovery is a success when `‖x̂ − x‖ ≤ SUCCESS_TOL · max(1, ‖x‖)`.
pub const SUCCESS_TOL: f64 = 1e-6;

/// Signal source for sweep/declip runs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum SourceSpec {
    Concat(ConcatSpec),
    Declip(DeclipSpec),
}

/// Support model selection: explicit caps, or caps derived from the mixture
/// weights at a tail quantile (`epsilon`, widened by the config's `kappa`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SupportConfig {
    Exact { s1: usize, s2: usize },
    Quantile { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl Default for OutputFormat {
    fn default() -> Self {
        OutputFormat::Csv
    }
}

/// Monte Carlo section: bound-versus-empirical small-ball comparison.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConcentrationSection {
    pub k: usize,
    pub r: f64,
    pub deltas: Vec<f64>,
    pub trials: u64,
    /// Direction vector; defaults to the first basis vector of Rⁿ.
    #[serde(default)]
    pub u: Option<Vec<f64>>,
    /// Offset vector; defaults to 0 in Rᵏ.
    #[serde(default)]
    pub v: Option<Vec<f64>>,
}

/// Dimension section: estimate the box dimension of a cloud loaded from a
/// file or generated as a union of sparse coordinate sections.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DimensionSection {
    pub j_min: u32,
    pub j_max: u32,
    #[serde(default)]
    pub cloud_path: Option<String>,
    /// Generator: nonzeros per point.
    #[serde(default)]
    pub s: Option<usize>,
    /// Generator: number of points.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Generator: coordinate range radius.
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_radius() -> f64 {
    1.0
}

/// Classical uncertainty section: principle and pair-enumeration budget.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UncertaintySection {
    pub principle: Principle,
    #[serde(default = "default_pair_budget")]
    pub budget: f64,
    /// Second basis; the first is always the identity. Defaults to the
    /// scaled Hadamard basis.
    #[serde(default)]
    pub b_kind: Option<BKind>,
}

fn default_pair_budget() -> f64 {
    1e6
}

fn default_b_kind() -> BKind {
    BKind::DctOrthonormal
}

fn default_a_law() -> MatrixLaw {
    MatrixLaw::UniformBall { r: 1.0 }
}

fn default_trials() -> u64 {
    100
}

fn default_support_budget() -> f64 {
    DEFAULT_SUPPORT_BUDGET
}

/// One configuration document for every run kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Ambient signal dimension.
    pub n: usize,
    /// Fixed-part fraction; `ℓ = ⌊λn⌋`.
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub support: Option<SupportConfig>,
    #[serde(default = "default_b_kind")]
    pub b_kind: BKind,
    #[serde(default = "default_a_law")]
    pub a_law: MatrixLaw,
    #[serde(default)]
    pub k_values: Vec<usize>,
    /// Trials per measurement count.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Master seed; every stream in the run derives from it.
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Extra tail slack added to quantile-derived support caps.
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_support_budget")]
    pub support_budget: f64,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub concentration: Option<ConcentrationSection>,
    #[serde(default)]
    pub dimension: Option<DimensionSection>,
    #[serde(default)]
    pub uncertainty: Option<UncertaintySection>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LabError::Config("dimension n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(LabError::Config(format!(
                "lambda must lie in [0,1], got {}",
                self.lambda
            )));
        }
        if self.trials == 0 {
            return Err(LabError::Config("at least one trial required".into()));
        }
        if !(0.0..=0.1).contains(&self.kappa) {
            return Err(LabError::Config(format!(
                "kappa must lie in [0, 0.1], got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    /// `ℓ = ⌊λn⌋`.
    pub fn split(&self) -> usize {
        (self.lambda * self.n as f64).floor() as usize
    }
}

/// One sweep grid point. The CSV schema covers the first seven fields; the
/// outcome tallies ride along in JSON output only.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PhaseRow {
    pub k: usize,
    /// Compression rate k/n.
    pub rate: f64,
    pub successes: u64,
    pub trials: u64,
    pub success_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub ambiguous: u64,
    pub none_consistent: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhaseCurve {
    pub n: usize,
    pub lambda: f64,
    pub rows: Vec<PhaseRow>,
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // At the boundary tallies the score bound is 0 (resp. 1) analytically;
    // clamp away the cancellation residue so reports show the exact value.
    let lo = if successes == 0 { 0.0 } else { ((center - half) / denom).max(0.0) };
    let hi = if successes == trials { 1.0 } else { ((center + half) / denom).min(1.0) };
    (lo, hi)
}

/// Smallest count whose binomial CDF reaches `target`.
fn binomial_quantile(m: usize, p: f64, target: f64) -> usize {
    let pmf = binomial_pmf(m, p);
    let mut acc = 0.0;
    for (s, q) in pmf.iter().enumerate() {
        acc += q;
        if acc >= target {
            return s;
        }
    }
    m
}

/// Draw a value from the law, retrying a few times if it lands within
/// 1e-12 of zero, so exact-sparsity draws keep their nominal support size.
fn nonzero_value<R: Rng>(law: &ContinuousLaw, rng: &mut R) -> f64 {
    for _ in 0..64 {
        let v = law.sample(rng);
        if v.abs() > 1e-12 {
            return v;
        }
    }
    law.sample(rng)
}

/// Scatter `s` law-distributed values over a uniformly random support.
fn sparse_exact<R: Rng>(len: usize, s: usize, law: &ContinuousLaw, rng: &mut R) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..s {
        let j = rng.random_range(i..len);
        idx.swap(i, j);
    }
    let mut out = vec![0.0; len];
    for &j in &idx[..s] {
        out[j] = nonzero_value(law, rng);
    }
    out
}

fn annotate_k(err: LabError, k: usize) -> LabError {
    match err {
        LabError::Capacity(m) => LabError::Capacity(format!("k={k}: {m}")),
        other => other,
    }
}

struct TrialOutcome {
    success: bool,
    ambiguous: bool,
    none_consistent: bool,
}

fn judge(result: &SeparationResult, x: &DVector<f64>) -> TrialOutcome {
    match result {
        SeparationResult::Unique { x_hat, .. } => {
            let err = x_hat
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            TrialOutcome {
                success: err <= SUCCESS_TOL * x.norm().max(1.0),
                ambiguous: false,
                none_consistent: false,
            }
        }
        SeparationResult::Ambiguous { .. } => TrialOutcome {
            success: false,
            ambiguous: true,
            none_consistent: false,
        },
        SeparationResult::NoneConsistent => TrialOutcome {
            success: false,
            ambiguous: false,
            none_consistent: true,
        },
    }
}

/// Success-versus-measurement-count sweep.
///
/// Per `k` and trial: draw a signal (exactly sparse or straight from the
/// mixture, per the support config), draw a fresh `A`, build the fixed-kind
/// `B`, measure `w = Hx`, separate, and count a success when the unique
/// candidate matches the signal within [`SUCCESS_TOL`].
pub fn run_phase_sweep(config: &ExperimentConfig) -> Result<PhaseCurve> {
    config.validate()?;
    let concat = match &config.source {
        Some(SourceSpec::Concat(c)) => c,
        _ => {
            return Err(LabError::Config(
                "phase sweep needs a two-part mixture source".into(),
            ))
        }
    };
    concat.validate()?;
    if (concat.lambda - config.lambda).abs() > 1e-12 {
        return Err(LabError::Config(format!(
            "config lambda {} disagrees with source lambda {}",
            config.lambda, concat.lambda
        )));
    }
    if config.k_values.is_empty() {
        return Err(LabError::Config("k_values must be nonempty".into()));
    }
    let n = config.n;
    let l = config.split();
    let ny = n - l;

    let support = config.support.ok_or_else(|| {
        LabError::Config("phase sweep needs a support model (caps or quantile)".into())
    })?;
    let (model, exact_mode) = match support {
        SupportConfig::Exact { s1, s2 } => (SupportModel { s1, s2 }, true),
        SupportConfig::Quantile { epsilon } => {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(LabError::Config(format!(
                    "quantile epsilon must lie in (0,1), got {epsilon}"
                )));
            }
            if !concat.spec_y.discrete_part_at_zero() || !concat.spec_z.discrete_part_at_zero() {
                return Err(LabError::UnsupportedModel(
                    "quantile support caps need mixtures whose discrete mass sits at 0".into(),
                ));
            }
            // Split the ε+κ miss budget evenly across the two parts.
            let target = 1.0 - (epsilon + config.kappa) / 2.0;
            let s1 = binomial_quantile(ny, concat.spec_y.rho, target);
            let s2 = binomial_quantile(l, concat.spec_z.rho, target);
            (SupportModel { s1, s2 }, false)
        }
    };
    if model.s1 > ny || model.s2 > l {
        return Err(LabError::Config(format!(
            "support caps ({}, {}) exceed part dimensions ({ny}, {l})",
            model.s1, model.s2
        )));
    }

    let mut rows = Vec::with_capacity(config.k_values.len());
    for &k in &config.k_values {
        if k < l {
            return Err(LabError::Config(format!(
                "every k must be at least ℓ = {l}, got {k}"
            )));
        }
        let b = build_b(&config.b_kind, k, l).map_err(|e| annotate_k(e, k))?;
        let mut successes = 0_u64;
        let mut ambiguous = 0_u64;
        let mut none_consistent = 0_u64;
        for t in 0..config.trials {
            let trial_seed = derive(config.seed, &[k as u64, t]);
            let x = if exact_mode {
                let mut rng = stream(derive(trial_seed, &[DOMAIN_SOURCE]), &[DOMAIN_SUPPORT]);
                let mut vals = sparse_exact(ny, model.s1, &concat.spec_y.law, &mut rng);
                vals.extend(sparse_exact(l, model.s2, &concat.spec_z.law, &mut rng));
                DVector::from_vec(vals)
            } else {
                sample_concat(concat, n, derive(trial_seed, &[DOMAIN_SOURCE]))?.x_vector()
            };
            let a = sample_a(
                &RandomMatrixSpec {
                    law: config.a_law.clone(),
                    seed: derive(trial_seed, &[DOMAIN_MATRIX]),
                },
                k,
                ny,
            )?;
            let pair = MeasurementPair::new(a, b.clone())?;
            let w = pair.h() * &x;
            let result =
                separate_opts(&pair, &w, &model, &config.tolerances, config.support_budget)
                    .map_err(|e| annotate_k(e, k))?;
            let outcome = judge(&result, &x);
            successes += outcome.success as u64;
            ambiguous += outcome.ambiguous as u64;
            none_consistent += outcome.none_consistent as u64;
        }
        let (ci_lo, ci_hi) = wilson_interval(successes, config.trials);
        rows.push(PhaseRow {
            k,
            rate: k as f64 / n as f64,
            successes,
            trials: config.trials,
            success_rate: successes as f64 / config.trials as f64,
            ci_lo,
            ci_hi,
            ambiguous,
            none_consistent,
        });
    }
    Ok(PhaseCurve { n, lambda: config.lambda, rows })
}

/// Weighted total deviation of the success rates from their best isotonic
/// (nondecreasing in k) fit, normalized by the total trial mass. 0 means
/// perfectly monotone.
pub fn isotonic_violation_mass(curve: &PhaseCurve) -> f64 {
    let mut pts: Vec<(usize, f64, f64)> = curve
        .rows
        .iter()
        .map(|r| (r.k, r.success_rate, r.trials as f64))
        .collect();
    pts.sort_by_key(|&(k, _, _)| k);

    // Pool-adjacent-violators: merge blocks while means decrease.
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new(); // (weight, mean, count)
    for &(_, y, w) in &pts {
        blocks.push((w, y, 1));
        while blocks.len() >= 2 {
            let (w2, m2, c2) = blocks[blocks.len() - 1];
            let (w1, m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            blocks.pop();
            let w = w1 + w2;
            let m = if w > 0.0 { (w1 * m1 + w2 * m2) / w } else { 0.0 };
            blocks.push((w, m, c1 + c2));
        }
    }

    let mut fit = Vec::with_capacity(pts.len());
    for &(_, m, c) in &blocks {
        fit.extend(std::iter::repeat(m).take(c));
    }
    let total_w: f64 = pts.iter().map(|&(_, _, w)| w).sum();
    if total_w == 0.0 {
        return 0.0;
    }
    pts.iter()
        .zip(&fit)
        .map(|(&(_, y, w), &f)| w * (y - f).abs())
        .sum::<f64>()
        / total_w
}

/// Declipping run report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DeclipReport {
    pub n: usize,
    /// Continuous weight of the coefficient mixture.
    pub rho: f64,
    /// Critical compression rate ρ/2 implied by the half-and-half split.
    pub theoretical_rate: f64,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub ambiguous: u64,
    pub none_consistent: u64,
    /// 0.9 empirical quantile of per-trial clip counts.
    pub clip_q90: usize,
    /// Box-dimension estimate of a sampled signal cloud, per coordinate;
    /// comparable to `theoretical_rate`.
    pub box_dim_per_n: f64,
}

/// Declipping experiment: a sparse coefficient vector is synthesized through
/// the dictionary, clipped at the amplitude, and the concatenation of
/// coefficients and clipping error is recovered from `k = s_observed + 1`
/// measurements per trial (the fixed block shrinks to the first `k` rows of
/// the full DCT when `k` is below the part size).
pub fn run_declip(config: &ExperimentConfig) -> Result<DeclipReport> {
    config.validate()?;
    let spec = match &config.source {
        Some(SourceSpec::Declip(d)) => d,
        _ => return Err(LabError::Config("declip run needs a declip source".into())),
    };
    spec.validate()?;
    let ny = spec.coeff_dim();
    let l = spec.signal_dim();
    if ny != l {
        return Err(LabError::Config(format!(
            "declipping needs equally sized parts, got {ny} coefficients and {l} signal entries"
        )));
    }
    let n = ny + l;
    if config.n != n {
        return Err(LabError::Config(format!(
            "config n = {} disagrees with dictionary geometry n = {n}",
            config.n
        )));
    }
    if (config.lambda - 0.5).abs() > 1e-12 {
        return Err(LabError::Config(
            "declipping fixes lambda = 1/2 (equal parts)".into(),
        ));
    }

    let exact_s1 = match config.support {
        Some(SupportConfig::Exact { s1, .. }) => Some(s1),
        _ => None,
    };
    if let Some(s1) = exact_s1 {
        if s1 > ny {
            return Err(LabError::Config(format!(
                "coefficient cap {s1} exceeds dimension {ny}"
            )));
        }
    }
    let dict = spec.dictionary_matrix()?;

    let mut successes = 0_u64;
    let mut ambiguous = 0_u64;
    let mut none_consistent = 0_u64;
    let mut clip_counts: Vec<usize> = Vec::with_capacity(config.trials as usize);

    for t in 0..config.trials {
        let trial_seed = derive(config.seed, &[DOMAIN_TRIAL, t]);
        let x = draw_declip(spec, &dict, exact_s1, derive(trial_seed, &[DOMAIN_SOURCE]))?;
        let s1_obs = x.as_slice()[..ny].iter().filter(|v| v.abs() > 1e-12).count();
        let s2_obs = x.as_slice()[ny..].iter().filter(|v| v.abs() > 1e-12).count();
        clip_counts.push(s2_obs);

        let k = s1_obs + s2_obs + 1;
        let a = sample_a(
            &RandomMatrixSpec {
                law: config.a_law.clone(),
                seed: derive(trial_seed, &[DOMAIN_MATRIX]),
            },
            k,
            ny,
        )?;
        let b = if k <= l {
            dct_rows(k, l)?
        } else {
            build_b(&BKind::DctOrthonormal, k, l)?
        };
        let pair = if k < l {
            MeasurementPair::with_wide_b(a, b)?
        } else {
            MeasurementPair::new(a, b)?
        };
        let w = pair.h() * &x;
        let model = SupportModel { s1: s1_obs, s2: s2_obs };
        let result = separate_opts(&pair, &w, &model, &config.tolerances, config.support_budget)
            .map_err(|e| annotate_k(e, k))?;
        let outcome = judge(&result, &x);
        successes += outcome.success as u64;
        ambiguous += outcome.ambiguous as u64;
        none_consistent += outcome.none_consistent as u64;
    }

    clip_counts.sort_unstable();
    let q_idx = ((config.trials as f64 * 0.9).ceil() as usize)
        .saturating_sub(1)
        .min(clip_counts.len() - 1);
    let clip_q90 = clip_counts[q_idx];

    // Independent signal cloud for the geometry readout.
    let cloud_samples = 400;
    let mut pts = Vec::with_capacity(cloud_samples);
    for i in 0..cloud_samples {
        let seed = derive(config.seed, &[DOMAIN_CLOUD, i as u64]);
        pts.push(draw_declip(spec, &dict, exact_s1, seed)?);
    }
    let cloud = PointCloud::new(pts)?;
    let fit = box_dim(&cloud, 1, 5)?;

    let rho = spec.coeff_model.rho;
    let (ci_lo, ci_hi) = wilson_interval(successes, config.trials);
    Ok(DeclipReport {
        n,
        rho,
        theoretical_rate: rho / 2.0,
        trials: config.trials,
        successes,
        success_rate: successes as f64 / config.trials as f64,
        ci_lo,
        ci_hi,
        ambiguous,
        none_consistent,
        clip_q90,
        box_dim_per_n: fit.slope / n as f64,
    })
}

fn draw_declip(
    spec: &DeclipSpec,
    dict: &nalgebra::DMatrix<f64>,
    exact_s1: Option<usize>,
    seed: u64,
) -> Result<DVector<f64>> {
    match exact_s1 {
        None => Ok(sample_declip(spec, seed)?.x_vector()),
        Some(s1) => {
            let mut rng = stream(seed, &[DOMAIN_SUPPORT]);
            let y = DVector::from_vec(sparse_exact(
                dict.ncols(),
                s1,
                &spec.coeff_model.law,
                &mut rng,
            ));
            let dy = dict * &y;
            let clipped = crate::source::clip(&dy, spec.amplitude)?;
            let z = clipped - dy;
            let mut vals = Vec::with_capacity(y.len() + z.len());
            vals.extend(y.iter());
            vals.extend(z.iter());
            Ok(DVector::from_vec(vals))
        }
    }
}

/// Bound-versus-Monte-Carlo concentration run from the config's section.
pub fn run_concentration(config: &ExperimentConfig) -> Result<ConcentrationReport> {
    config.validate()?;
    let section = config
        .concentration
        .as_ref()
        .ok_or_else(|| LabError::Config("missing concentration section".into()))?;
    let n = config.n;
    let u = match &section.u {
        Some(v) => {
            if v.len() != n {
                return Err(LabError::Dimension(format!(
                    "direction has length {}, expected {n}",
                    v.len()
                )));
            }
            DVector::from_vec(v.clone())
        }
        None => {
            let mut e = DVector::zeros(n);
            e[0] = 1.0;
            e
        }
    };
    let v = match &section.v {
        Some(v) => {
            if v.len() != section.k {
                return Err(LabError::Dimension(format!(
                    "offset has length {}, expected {}",
                    v.len(),
                    section.k
                )));
            }
            DVector::from_vec(v.clone())
        }
        None => DVector::zeros(section.k),
    };
    concentration_report(
        n,
        section.k,
        section.r,
        &u,
        &v,
        &section.deltas,
        section.trials,
        derive(config.seed, &[DOMAIN_MC]),
    )
}

/// Box-dimension run from the config's section.
pub fn run_dimension(config: &ExperimentConfig) -> Result<DimFit> {
    config.validate()?;
    let section = config
        .dimension
        .as_ref()
        .ok_or_else(|| LabError::Config("missing dimension section".into()))?;
    let cloud = match &section.cloud_path {
        Some(path) => PointCloud::read_path(std::path::Path::new(path))?,
        None => {
            let s = section.s.ok_or_else(|| {
                LabError::Config("dimension section needs either cloud_path or s".into())
            })?;
            let samples = section.samples.ok_or_else(|| {
                LabError::Config("dimension section needs either cloud_path or samples".into())
            })?;
            union_sparse_cloud(
                config.n,
                s,
                samples,
                section.radius,
                derive(config.seed, &[DOMAIN_CLOUD]),
            )?
        }
    };
    box_dim(&cloud, section.j_min, section.j_max)
}

/// Classical uncertainty run from the config's section: identity versus the
/// configured orthonormal basis.
pub fn run_uncertainty(config: &ExperimentConfig) -> Result<UncertaintyVerdict> {
    config.validate()?;
    let section = config
        .uncertainty
        .as_ref()
        .ok_or_else(|| LabError::Config("missing uncertainty section".into()))?;
    let n = config.n;
    let a = nalgebra::DMatrix::identity(n, n);
    let kind = section.b_kind.clone().unwrap_or(BKind::HadamardScaled);
    let b = build_b(&kind, n, n)?;
    classical_check(&a, &b, section.principle, section.budget)
}
