//! Covering numbers and box-counting dimension of finite point clouds.
//!
//! Two covering counts are supported: centers restricted to the cloud
//! itself (`in_set`) and unrestricted centers (`free`). Exact minimum covers
//! are found by branch-and-bound set cover and are limited to small clouds;
//! the greedy solver scales further and carries the usual `ln(P)+1`
//! approximation factor. Unrestricted centers are approximated by adding all
//! pairwise midpoints to the candidate pool — a restriction of the center
//! continuum that can only overestimate the true free count, and that keeps
//! the sandwich `free(δ) ≤ in_set(δ) ≤ free(δ/2)` intact (any in-set center
//! is a candidate, and the in-set count is bounded by *any* valid free
//! cover's count at half the radius).
//!
//! Box dimension is estimated from dyadic grids anchored at the origin:
//! cells of side 2⁻ʲ for j in a ladder, least-squares slope of log₂(count)
//! against j.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DVector;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::rng::{self, DOMAIN_CLOUD};
use crate::Result;

/// Largest cloud the exact set-cover solver accepts.
pub const EXACT_COVER_MAX_POINTS: usize = 14;
/// Largest grid exponent `box_dim` accepts (keeps cell indices in i64).
pub const MAX_GRID_EXPONENT: u32 = 32;

/// A finite set of points in a common dimension.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<DVector<f64>>,
    dim: usize,
    bounding_radius: f64,
}

impl PointCloud {
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(LabError::Precondition("point cloud must be nonempty".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(LabError::Dimension("points must have at least one coordinate".into()));
        }
        let mut bounding_radius = 0.0_f64;
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(LabError::Dimension(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(LabError::Precondition(format!(
                    "point {i} has a non-finite coordinate"
                )));
            }
            bounding_radius = bounding_radius.max(p.norm());
        }
        Ok(PointCloud { points, dim, bounding_radius })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(DVector::from_vec).collect())
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest euclidean norm over the cloud.
    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    /// Read a cloud from a whitespace-delimited text file, one point per
    /// line; blank lines are skipped.
    pub fn read_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut rows = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            match row {
                Ok(r) => rows.push(r),
                Err(e) => {
                    return Err(LabError::Config(format!(
                        "bad point on line {}: {e}",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_rows(rows)
    }

    /// Write the cloud as whitespace-delimited text, one point per line.
    pub fn write_path(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for p in &self.points {
            let row: Vec<String> = p.iter().map(f64::to_string).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMode {
    /// Centers anywhere (approximated by cloud ∪ pairwise midpoints).
    Free,
    /// Centers restricted to cloud points.
    InSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverSolver {
    /// Branch-and-bound minimum set cover (small clouds only).
    Exact,
    /// Greedy cover with the ln(P)+1 guarantee.
    Greedy,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoverQuery {
    pub delta: f64,
    pub center_mode: CenterMode,
    pub solver: CoverSolver,
}

#[derive(Debug, Clone)]
pub struct CoverResult {
    pub count: usize,
    pub centers: Vec<DVector<f64>>,
    /// True when free centers were approximated by midpoint augmentation.
    pub midpoint_augmented: bool,
    /// Approximation factor of the greedy solver, `ln(P) + 1`.
    pub greedy_bound_factor: Option<f64>,
}

/// Number of open δ-balls needed to cover the cloud, with centers per
/// `query.center_mode`.
pub fn cover_count(cloud: &PointCloud, query: &CoverQuery) -> Result<CoverResult> {
    if !(query.delta > 0.0) {
        return Err(LabError::Config(format!(
            "covering radius must be positive, got {}",
            query.delta
        )));
    }
    let p = cloud.len();
    if query.solver == CoverSolver::Exact && p > EXACT_COVER_MAX_POINTS {
        return Err(LabError::Capacity(format!(
            "exact cover limited to {EXACT_COVER_MAX_POINTS} points, got {p}; use the greedy solver"
        )));
    }

    let mut candidates: Vec<DVector<f64>> = cloud.points.clone();
    let midpoint_augmented = query.center_mode == CenterMode::Free;
    if midpoint_augmented {
        for i in 0..p {
            for j in i + 1..p {
                candidates.push((&cloud.points[i] + &cloud.points[j]) * 0.5);
            }
        }
    }

    // Coverage of each candidate ball over the cloud, as bitmasks for the
    // exact solver and index lists for greedy.
    let coverage: Vec<Vec<usize>> = candidates
        .iter()
        .map(|c| {
            (0..p)
                .filter(|&i| (&cloud.points[i] - c).norm() < query.delta)
                .collect()
        })
        .collect();

    let chosen = match query.solver {
        CoverSolver::Exact => {
            let masks: Vec<u64> = coverage
                .iter()
                .map(|cov| cov.iter().fold(0u64, |m, &i| m | (1 << i)))
                .collect();
            exact_min_cover(&masks, p)
        }
        CoverSolver::Greedy => greedy_cover(&coverage, p),
    };

    Ok(CoverResult {
        count: chosen.len(),
        centers: chosen.iter().map(|&c| candidates[c].clone()).collect(),
        midpoint_augmented,
        greedy_bound_factor: (query.solver == CoverSolver::Greedy)
            .then(|| (p as f64).ln() + 1.0),
    })
}

fn greedy_cover(coverage: &[Vec<usize>], p: usize) -> Vec<usize> {
    let mut covered = vec![false; p];
    let mut remaining = p;
    let mut chosen = Vec::new();
    while remaining > 0 {
        let (best, gain) = coverage
            .iter()
            .enumerate()
            .map(|(c, cov)| (c, cov.iter().filter(|&&i| !covered[i]).count()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty candidate pool");
        debug_assert!(gain > 0, "every point is coverable by its own ball");
        chosen.push(best);
        for &i in &coverage[best] {
            if !covered[i] {
                covered[i] = true;
                remaining -= 1;
            }
        }
    }
    chosen
}

/// Exact minimum set cover over ≤ 64 elements by branch and bound.
fn exact_min_cover(masks: &[u64], p: usize) -> Vec<usize> {
    let full: u64 = if p == 64 { !0 } else { (1 << p) - 1 };

    // Deduplicate and drop dominated candidates (masks contained in another).
    let mut order: Vec<usize> = (0..masks.len()).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(masks[c].count_ones()));
    let mut kept: Vec<usize> = Vec::new();
    for &c in &order {
        if !kept.iter().any(|&k| masks[c] & !masks[k] == 0) {
            kept.push(c);
        }
    }

    // Greedy warm start for the upper bound.
    let mut best: Vec<usize> = {
        let mut covered = 0u64;
        let mut pick = Vec::new();
        while covered != full {
            let &c = kept
                .iter()
                .max_by_key(|&&c| (masks[c] & !covered).count_ones())
                .expect("cover exists");
            pick.push(c);
            covered |= masks[c];
        }
        pick
    };

    // Branch on the uncovered element with the fewest covering candidates;
    // prune with ceil(uncovered / widest remaining gain).
    fn recurse(
        kept: &[usize],
        masks: &[u64],
        covered: u64,
        full: u64,
        chosen: &mut Vec<usize>,
        best: &mut Vec<usize>,
    ) {
        if covered == full {
            if chosen.len() < best.len() {
                *best = chosen.clone();
            }
            return;
        }
        let uncovered = full & !covered;
        let widest = kept
            .iter()
            .map(|&c| (masks[c] & uncovered).count_ones())
            .max()
            .unwrap_or(0);
        if widest == 0 {
            return;
        }
        let lb = uncovered.count_ones().div_ceil(widest);
        if chosen.len() as u32 + lb >= best.len() as u32 {
            return;
        }

        let elem = (0..64)
            .filter(|&e| uncovered & (1 << e) != 0)
            .min_by_key(|&e| kept.iter().filter(|&&c| masks[c] & (1 << e) != 0).count())
            .expect("some element uncovered");
        let mut options: Vec<usize> = kept
            .iter()
            .cloned()
            .filter(|&c| masks[c] & (1 << elem) != 0)
            .collect();
        options.sort_by_key(|&c| std::cmp::Reverse((masks[c] & uncovered).count_ones()));
        for c in options {
            chosen.push(c);
            recurse(kept, masks, covered | masks[c], full, chosen, best);
            chosen.pop();
        }
    }

    let mut chosen = Vec::new();
    recurse(&kept, masks, 0, full, &mut chosen, &mut best);
    best
}

/// One rung of the box-counting ladder.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LadderRow {
    pub j: u32,
    pub delta: f64,
    pub count: usize,
    pub log2_count: f64,
}

/// Least-squares fit of log₂(occupied cells) against the grid exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// All counts equal — the ladder carries no scale information.
    pub degenerate: bool,
    pub ladder: Vec<LadderRow>,
}

/// Box-counting dimension fit over dyadic grids 2⁻ʲ, j in
/// `[j_min, j_max]`, anchored at the origin.
pub fn box_dim(cloud: &PointCloud, j_min: u32, j_max: u32) -> Result<DimFit> {
    if j_min > j_max {
        return Err(LabError::Config(format!(
            "grid ladder needs j_min ≤ j_max, got [{j_min}, {j_max}]"
        )));
    }
    if j_max > MAX_GRID_EXPONENT {
        return Err(LabError::Config(format!(
            "grid exponent {j_max} exceeds the supported maximum {MAX_GRID_EXPONENT}"
        )));
    }
    if cloud.bounding_radius * (1u64 << j_max) as f64 >= i64::MAX as f64 / 4.0 {
        return Err(LabError::Capacity(
            "cloud coordinates too large for the requested grid resolution".into(),
        ));
    }

    let mut ladder = Vec::with_capacity((j_max - j_min + 1) as usize);
    let mut prev = 0usize;
    for j in j_min..=j_max {
        let scale = (1u64 << j) as f64; // 1/δ
        let mut cells: HashSet<Vec<i64>> = HashSet::new();
        for pnt in &cloud.points {
            let key: Vec<i64> = pnt.iter().map(|&v| (v * scale).floor() as i64).collect();
            cells.insert(key);
        }
        let count = cells.len();
        assert!(
            count >= prev,
            "occupied-cell count must be nondecreasing as the grid refines"
        );
        prev = count;
        ladder.push(LadderRow {
            j,
            delta: 1.0 / scale,
            count,
            log2_count: (count as f64).log2(),
        });
    }

    let m = ladder.len() as f64;
    let xbar = ladder.iter().map(|r| r.j as f64).sum::<f64>() / m;
    let ybar = ladder.iter().map(|r| r.log2_count).sum::<f64>() / m;
    let sxx: f64 = ladder.iter().map(|r| (r.j as f64 - xbar).powi(2)).sum();
    let sxy: f64 = ladder
        .iter()
        .map(|r| (r.j as f64 - xbar) * (r.log2_count - ybar))
        .sum();
    let degenerate = ladder.windows(2).all(|w| w[0].count == w[1].count);
    let slope = if degenerate || sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = ybar - slope * xbar;
    let ss_tot: f64 = ladder.iter().map(|r| (r.log2_count - ybar).powi(2)).sum();
    let ss_res: f64 = ladder
        .iter()
        .map(|r| (r.log2_count - (intercept + slope * r.j as f64)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };

    Ok(DimFit { slope, intercept, r_squared, degenerate, ladder })
}

/// Sample points with exactly `s` nonzero coordinates: support uniform over
/// the `C(n,s)` possibilities, values uniform on `[−radius, radius]` with
/// exact zeros rejected.
pub fn union_sparse_cloud(
    n: usize,
    s: usize,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<PointCloud> {
    if s == 0 || s > n {
        return Err(LabError::Config(format!(
            "sparsity must satisfy 1 ≤ s ≤ n, got s={s}, n={n}"
        )));
    }
    if samples == 0 {
        return Err(LabError::Config("need at least one sample".into()));
    }
    if !(radius > 0.0) {
        return Err(LabError::Config(format!("radius must be positive, got {radius}")));
    }
    let mut points = Vec::with_capacity(samples);
    let mut scratch: Vec<usize> = (0..n).collect();
    for t in 0..samples {
        let mut rng = rng::stream(seed, &[DOMAIN_CLOUD, t as u64]);
        // Partial Fisher-Yates: the first s entries become the support.
        for i in 0..s {
            let j = i + rng.random_range(0..n - i);
            scratch.swap(i, j);
        }
        let mut p = DVector::zeros(n);
        for &idx in &scratch[..s] {
            p[idx] = loop {
                let v = radius * (2.0 * rng.random::<f64>() - 1.0);
                if v != 0.0 {
                    break v;
                }
            };
        }
        points.push(p);
        scratch.sort_unstable();
    }
    PointCloud::new(points)
}
