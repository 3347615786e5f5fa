//! Dense linear-algebra helpers on top of nalgebra: full SVD with rank and
//! gap diagnostics, orthonormal bases of kernels and images, random bases.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Relative threshold for counting a singular value.
pub const RANK_EPS: f64 = 1e-9;

/// A rank decision with less separation than this between the smallest kept
/// and the largest discarded singular value raises a warning.
pub const GAP_WARN: f64 = 1e2;

/// Rank decision for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDecision {
    pub rank: usize,
    /// Singular values in descending order (`min(m, n)` of them).
    pub singular_values: Vec<f64>,
    /// Smallest kept over largest discarded singular value (infinite when
    /// nothing nonzero was discarded).
    pub gap: f64,
    pub ill_conditioned: bool,
}

/// Singular values counted against `RANK_EPS · max(σ_max, 1)`.
///
/// The floor of one keeps a globally tiny matrix (e.g. a connection a hair
/// away from a central one) from being counted at full rank.
pub fn decide_rank(singular_values: &[f64]) -> RankDecision {
    let mut sv = singular_values.to_vec();
    sv.sort_by(|a, b| b.total_cmp(a));
    let scale = sv.first().copied().unwrap_or(0.0).max(1.0);
    let cut = RANK_EPS * scale;
    let rank = sv.iter().filter(|&&s| s > cut).count();
    let largest_dropped = sv.get(rank).copied().unwrap_or(0.0);
    let smallest_kept = if rank > 0 { sv[rank - 1] } else { scale };
    let gap = if largest_dropped > 0.0 {
        smallest_kept / largest_dropped
    } else {
        f64::INFINITY
    };
    RankDecision {
        rank,
        singular_values: sv,
        gap,
        ill_conditioned: gap < GAP_WARN,
    }
}

/// Full singular value decomposition `A = U Σ Vᵀ` with square `U` (m×m)
/// and `V` (n×n), columns ordered by descending singular value.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub decision: RankDecision,
}

impl FullSvd {
    /// Backed by faer. nalgebra 0.35 returns inconsistent factors for some
    /// rank-deficient inputs (the product `UΣVᵀ` misses `A` at the 1e-2
    /// level); debug builds check the factors.
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return FullSvd {
                u: DMatrix::identity(m, m),
                v: DMatrix::identity(n, n),
                decision: decide_rank(&[]),
            };
        }
        let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
        let svd = fa.svd().expect("svd converges");
        let (fu, fv, fs) = (svd.U(), svd.V(), svd.S().column_vector());
        let u = DMatrix::from_fn(m, m, |i, j| fu[(i, j)]);
        let v = DMatrix::from_fn(n, n, |i, j| fv[(i, j)]);
        let sv: Vec<f64> = (0..m.min(n)).map(|i| fs[i]).collect();
        let out = FullSvd {
            u,
            v,
            decision: decide_rank(&sv),
        };
        debug_assert!(out.reconstruction_error(a) <= 1e-12 * a.amax().max(1.0), "inconsistent svd");
        out
    }

    /// `max |UΣVᵀ − A|`.
    pub fn reconstruction_error(&self, a: &DMatrix<f64>) -> f64 {
        let (m, n) = a.shape();
        let sv = &self.decision.singular_values;
        let mut s = DMatrix::zeros(m, n);
        for (i, &x) in sv.iter().enumerate() {
            s[(i, i)] = x;
        }
        (&self.u * s * self.v.transpose() - a).amax()
    }

    /// Minimum-norm least-squares solution of `A x = b`, using the counted
    /// singular values only.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut c = self.image().transpose() * b;
        for (i, x) in c.iter_mut().enumerate() {
            *x /= self.decision.singular_values[i];
        }
        self.coimage() * c
    }

    pub fn rank(&self) -> usize {
        self.decision.rank
    }

    /// Orthonormal basis of `ker A` (columns).
    pub fn kernel(&self) -> DMatrix<f64> {
        let n = self.v.ncols();
        self.v.columns(self.rank(), n - self.rank()).into_owned()
    }

    /// Orthonormal basis of `(ker A)^⊥` (columns).
    pub fn coimage(&self) -> DMatrix<f64> {
        self.v.columns(0, self.rank()).into_owned()
    }

    /// Orthonormal basis of `im A` (columns).
    pub fn image(&self) -> DMatrix<f64> {
        self.u.columns(0, self.rank()).into_owned()
    }

    /// Orthonormal basis of `(im A)^⊥` (columns).
    pub fn cokernel(&self) -> DMatrix<f64> {
        let m = self.u.ncols();
        self.u.columns(self.rank(), m - self.rank()).into_owned()
    }

    /// Product of the counted singular values.
    pub fn pseudo_determinant(&self) -> f64 {
        self.decision.singular_values[..self.rank()].iter().product()
    }
}

/// Haar-random orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    q
}

/// Random invertible matrix with singular values in `[0.5, 2]`.
pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = random_orthogonal(n, rng);
    let b = random_orthogonal(n, rng);
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { rng.random_range(0.5..2.0) } else { 0.0 });
    a * d * b
}

/// Determinant of the square matrix whose columns are the given blocks.
pub fn det_of_columns(blocks: &[&DMatrix<f64>]) -> f64 {
    let refs: Vec<_> = blocks.iter().flat_map(|b| b.column_iter()).collect();
    if refs.is_empty() {
        return 1.0;
    }
    let m = DMatrix::from_columns(&refs);
    assert!(m.is_square(), "change-of-basis matrix must be square, got {:?}", m.shape());
    m.determinant()
}

/// Product of column norms, the Hadamard bound on `|det|`.
pub fn hadamard_bound(blocks: &[&DMatrix<f64>]) -> f64 {
    blocks
        .iter()
        .flat_map(|b| b.column_iter().map(|c| c.norm()).collect::<Vec<_>>())
        .product()
}
