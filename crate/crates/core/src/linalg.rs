//! Small dense linear-algebra helpers.
//!
//! The separator solves millions of tiny least-squares systems (k ≤ ~30 rows,
//! a handful of columns gathered from a wider matrix), so the hot path is a
//! hand-rolled in-place Householder QR over a reusable workspace — no
//! per-support allocation. Anything that needs rank decisions beyond the QR's
//! cheap diagnostic (minimum-norm solutions, kernel vectors, smallest singular
//! values) goes through nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

/// Outcome of the fast QR path on a gathered column subset.
#[derive(Debug, Clone, Copy)]
pub enum QrOutcome {
    /// Full column rank within tolerance; solution available, residual is
    /// `‖H_T c − w‖`.
    Solved { residual: f64 },
    /// The triangular factor looked numerically rank-deficient; the caller
    /// should fall back to an SVD-based analysis.
    NearDeficient,
}

/// Reusable workspace for least squares on column subsets of a fixed matrix.
///
/// `solve` gathers columns `cols` of `h` into an internal buffer, factors it
/// by Householder QR and back-substitutes. Only valid for `cols.len() <= k`.
pub struct ColumnLstsq {
    k: usize,
    cap: usize,
    /// k × m scratch, column-major; holds R and the Householder vectors.
    mat: Vec<f64>,
    /// Rotated right-hand side Qᵀw.
    qtw: Vec<f64>,
    rdiag: Vec<f64>,
    sol: Vec<f64>,
}

impl ColumnLstsq {
    pub fn new(k: usize, max_cols: usize) -> Self {
        let cap = max_cols.min(k);
        ColumnLstsq {
            k,
            cap,
            mat: vec![0.0; k * cap],
            qtw: vec![0.0; k],
            rdiag: vec![0.0; cap],
            sol: vec![0.0; cap],
        }
    }

    /// Solution coefficients of the last successful `solve`, one per column
    /// in the order of `cols`.
    pub fn solution(&self, m: usize) -> &[f64] {
        &self.sol[..m]
    }

    /// Least squares `min_c ‖h[:, cols] c − w‖` with a cheap rank diagnostic:
    /// the factorization bails out as `NearDeficient` whenever a pivot of R
    /// falls below `rank_rel_tol` times the largest pivot.
    pub fn solve(
        &mut self,
        h: &DMatrix<f64>,
        cols: &[usize],
        w: &DVector<f64>,
        rank_rel_tol: f64,
    ) -> QrOutcome {
        let k = self.k;
        let m = cols.len();
        debug_assert!(m <= self.cap && m <= k);
        debug_assert_eq!(h.nrows(), k);
        debug_assert_eq!(w.len(), k);

        for (c, &j) in cols.iter().enumerate() {
            let col = h.column(j);
            let dst = &mut self.mat[c * k..(c + 1) * k];
            for i in 0..k {
                dst[i] = col[i];
            }
        }
        for i in 0..k {
            self.qtw[i] = w[i];
        }

        let mut max_pivot = 0.0_f64;
        let mut min_pivot = f64::INFINITY;
        for c in 0..m {
            // Householder reflector annihilating mat[c+1.., c].
            let (head, tail) = self.mat.split_at_mut((c + 1) * k);
            let colc = &mut head[c * k..];
            let mut nrm2 = 0.0;
            for i in c..k {
                nrm2 += colc[i] * colc[i];
            }
            let nrm = nrm2.sqrt();
            let alpha = if colc[c] >= 0.0 { -nrm } else { nrm };
            let pivot = nrm;
            max_pivot = max_pivot.max(pivot);
            min_pivot = min_pivot.min(pivot);
            if pivot <= rank_rel_tol * max_pivot {
                return QrOutcome::NearDeficient;
            }

            // v = x − α e₁, normalized so the reflector is I − 2 vvᵀ/‖v‖².
            colc[c] -= alpha;
            let mut vnrm2 = 0.0;
            for i in c..k {
                vnrm2 += colc[i] * colc[i];
            }
            if vnrm2 > 0.0 {
                let inv = 2.0 / vnrm2;
                // Apply to the remaining columns.
                for rest in tail.chunks_exact_mut(k).take(m - c - 1) {
                    let mut dot = 0.0;
                    for i in c..k {
                        dot += colc[i] * rest[i];
                    }
                    let s = dot * inv;
                    for i in c..k {
                        rest[i] -= s * colc[i];
                    }
                }
                // And to the right-hand side.
                let mut dot = 0.0;
                for i in c..k {
                    dot += colc[i] * self.qtw[i];
                }
                let s = dot * inv;
                for i in c..k {
                    self.qtw[i] -= s * colc[i];
                }
            }
            self.rdiag[c] = alpha;
        }

        if m > 0 && min_pivot <= rank_rel_tol * max_pivot {
            return QrOutcome::NearDeficient;
        }

        // Back-substitution: R is upper triangular with diagonal rdiag and
        // strict upper part stored in mat.
        for c in (0..m).rev() {
            let mut s = self.qtw[c];
            for j in c + 1..m {
                s -= self.mat[j * k + c] * self.sol[j];
            }
            self.sol[c] = s / self.rdiag[c];
        }

        let mut res2 = 0.0;
        for i in m..k {
            res2 += self.qtw[i] * self.qtw[i];
        }
        QrOutcome::Solved { residual: res2.sqrt() }
    }
}

/// SVD-based minimum-norm least squares with rank and kernel information.
pub struct SvdSolve {
    pub solution: DVector<f64>,
    pub residual: f64,
    pub rank: usize,
    pub min_singular: f64,
    /// A unit vector in the kernel, when the matrix is column-rank-deficient.
    pub kernel: Option<DVector<f64>>,
}

/// Minimum-norm least squares via SVD; singular values below
/// `rel_tol · σ_max` are treated as zero.
pub fn svd_min_norm(a: &DMatrix<f64>, w: &DVector<f64>, rel_tol: f64) -> SvdSolve {
    let m = a.ncols();
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = if smax > 0.0 { rel_tol * smax } else { f64::MAX };
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let solution = svd
        .solve(w, cutoff)
        .unwrap_or_else(|_| DVector::zeros(m));
    let residual = (a * &solution - w).norm();
    let min_singular = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .min(if m > a.nrows() { 0.0 } else { f64::INFINITY });

    let kernel = if rank < m {
        let vt = svd.v_t.as_ref().expect("svd computed with V");
        if vt.nrows() == m {
            // Tall/square case: V is complete, kernel vectors are the rows of
            // Vᵀ whose singular values vanished.
            let mut kv = None;
            for (i, &s) in svd.singular_values.iter().enumerate() {
                if s <= cutoff {
                    kv = Some(DVector::from_iterator(m, vt.row(i).iter().cloned()));
                    break;
                }
            }
            // All retained rows can be above cutoff when m > #singular values.
            kv.or_else(|| complement_vector(vt, m))
        } else {
            // Wide case: thin Vᵀ spans only the row space; project a basis
            // vector onto its complement.
            complement_vector(vt, m)
        }
    } else {
        None
    };

    SvdSolve { solution, residual, rank, min_singular, kernel }
}

/// Unit vector orthogonal to all rows of `vt` (an r × m matrix with r < m).
fn complement_vector(vt: &DMatrix<f64>, m: usize) -> Option<DVector<f64>> {
    let mut best: Option<DVector<f64>> = None;
    let mut best_norm = 0.0;
    for i in 0..m {
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        // v ← v − Vᵀ(V v) restricted to the available rows.
        let coeffs = vt * &v;
        v -= vt.transpose() * coeffs;
        let n = v.norm();
        if n > best_norm {
            best_norm = n;
            best = Some(v / n);
        }
    }
    if best_norm > 1e-8 { best } else { None }
}

/// Smallest singular value.
pub fn smallest_singular_value(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Largest singular value (0 for empty matrices).
pub fn largest_singular_value(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
}

/// Numerical rank with singular values below `rel_tol · σ_max` zeroed.
pub fn rank_with_tol(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Largest entry of |MᵀM − I|; zero for perfectly orthonormal columns.
pub fn orthonormality_defect(m: &DMatrix<f64>) -> f64 {
    let g = m.transpose() * m;
    let mut worst = 0.0_f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}
