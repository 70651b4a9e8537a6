//! Dense factorizations with equilibration and a pseudo-inverse fallback.

use nalgebra::Dyn;
use nalgebra::{DMatrix, DVector, LU, SVD};

/// LU is treated as singular below this ratio of smallest to largest pivot.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-10;
/// Relative singular-value threshold for ranks and pseudo-inverses.
pub const RANK_TOL: f64 = 1e-10;

/// Row and column scale factors (powers of two) with `diag(rows)·M·diag(cols)`
/// having entries of magnitude at most about one in every nonzero row and column.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibration {
    pub rows: DVector<f64>,
    pub cols: DVector<f64>,
}

fn pow2(x: f64) -> f64 {
    if x.is_finite() && x > 0.0 {
        2f64.powi(x.log2().round() as i32)
    } else {
        1.0
    }
}

/// Ruiz iteration: alternately scales rows and columns by the inverse square
/// root of their largest entry.
pub fn equilibrate(m: &DMatrix<f64>) -> Equilibration {
    let (nr, nc) = m.shape();
    let mut rows = DVector::from_element(nr, 1.0);
    let mut cols = DVector::from_element(nc, 1.0);
    let mut s = m.clone();
    for _ in 0..20 {
        let mut dr = DVector::from_element(nr, 1.0);
        for i in 0..nr {
            let mx = s.row(i).amax();
            if mx > 0.0 {
                dr[i] = pow2(1.0 / mx.sqrt());
            }
        }
        let mut dc = DVector::from_element(nc, 1.0);
        for j in 0..nc {
            let mx = s.column(j).amax();
            if mx > 0.0 {
                dc[j] = pow2(1.0 / mx.sqrt());
            }
        }
        for i in 0..nr {
            s.row_mut(i).scale_mut(dr[i]);
        }
        for j in 0..nc {
            s.column_mut(j).scale_mut(dc[j]);
        }
        rows.component_mul_assign(&dr);
        cols.component_mul_assign(&dc);
        if dr.iter().chain(dc.iter()).all(|&f| f == 1.0) {
            break;
        }
    }
    Equilibration { rows, cols }
}

impl Equilibration {
    pub fn apply(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut s = m.clone();
        for i in 0..s.nrows() {
            s.row_mut(i).scale_mut(self.rows[i]);
        }
        for j in 0..s.ncols() {
            s.column_mut(j).scale_mut(self.cols[j]);
        }
        s
    }
}

/// Square-matrix solver: LU with partial pivoting, replaced by an SVD
/// pseudo-inverse when the pivots reveal (near) singularity.
pub struct Solver {
    n: usize,
    matrix: DMatrix<f64>,
    lu: Option<LU<f64, Dyn, Dyn>>,
    svd: Option<SVD<f64, Dyn, Dyn>>,
    pivot_ratio: f64,
}

impl Solver {
    pub fn new(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "solver needs a square matrix");
        let n = m.nrows();
        if n == 0 {
            return Solver {
                n,
                matrix: m.clone(),
                lu: None,
                svd: None,
                pivot_ratio: 1.0,
            };
        }
        let lu = m.clone().lu();
        let u = lu.u();
        let diag = u.diagonal().abs();
        let (lo, hi) = (diag.min(), diag.max());
        let pivot_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        if pivot_ratio >= SINGULAR_PIVOT_RATIO && pivot_ratio.is_finite() {
            Solver {
                n,
                matrix: m.clone(),
                lu: Some(lu),
                svd: None,
                pivot_ratio,
            }
        } else {
            Solver {
                n,
                matrix: m.clone(),
                lu: None,
                svd: Some(m.clone().svd(true, true)),
                pivot_ratio,
            }
        }
    }

    pub fn is_singular(&self) -> bool {
        self.svd.is_some()
    }

    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    fn threshold(svd: &SVD<f64, Dyn, Dyn>) -> f64 {
        RANK_TOL * svd.singular_values.max()
    }

    pub fn rank(&self) -> usize {
        match &self.svd {
            Some(svd) => {
                let tol = Self::threshold(svd);
                svd.singular_values.iter().filter(|&&s| s > tol).count()
            }
            None => self.n,
        }
    }

    /// Ratio of extreme singular values, or of extreme pivots when no SVD was
    /// needed (a cheap lower-quality estimate).
    pub fn condition_estimate(&self) -> f64 {
        match &self.svd {
            Some(svd) => svd.singular_values.max() / svd.singular_values.min(),
            None => 1.0 / self.pivot_ratio,
        }
    }

    /// `M⁻¹·rhs`, or the minimum-norm least-squares solution when singular.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        if self.n == 0 {
            return DMatrix::zeros(0, rhs.ncols());
        }
        if let Some(lu) = &self.lu {
            // iterative refinement with compensated residuals recovers
            // accuracy lost to widely spread stiffness magnitudes
            let mut x = lu.solve(rhs).expect("nonsingular by pivot check");
            for _ in 0..3 {
                let dx = lu
                    .solve(&compensated_residual(&self.matrix, &x, rhs))
                    .expect("nonsingular by pivot check");
                x += &dx;
                if dx.amax() <= f64::EPSILON * x.amax() {
                    break;
                }
            }
            return x;
        }
        let svd = self.svd.as_ref().expect("singular branch keeps the SVD");
        let tol = Self::threshold(svd);
        let u = svd.u.as_ref().expect("u computed");
        let vt = svd.v_t.as_ref().expect("v computed");
        let mut utb = u.transpose() * rhs;
        for (i, &s) in svd.singular_values.iter().enumerate() {
            let f = if s > tol { 1.0 / s } else { 0.0 };
            utb.row_mut(i).scale_mut(f);
        }
        vt.transpose() * utb
    }

    pub fn solve_vector(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let m = DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice());
        DVector::from_column_slice(self.solve(&m).as_slice())
    }

    /// Orthonormal basis of the left null space (columns); empty when regular.
    pub fn left_null_basis(&self) -> DMatrix<f64> {
        match &self.svd {
            Some(svd) => {
                let tol = Self::threshold(svd);
                let u = svd.u.as_ref().expect("u computed");
                let idx: Vec<usize> = (0..self.n).filter(|&i| svd.singular_values[i] <= tol).collect();
                u.select_columns(&idx)
            }
            None => DMatrix::zeros(self.n, 0),
        }
    }

    /// Orthonormal basis of the null space (columns); empty when regular.
    pub fn null_basis(&self) -> DMatrix<f64> {
        match &self.svd {
            Some(svd) => {
                let tol = Self::threshold(svd);
                let v = svd.v_t.as_ref().expect("v computed").transpose();
                let idx: Vec<usize> = (0..self.n).filter(|&i| svd.singular_values[i] <= tol).collect();
                v.select_columns(&idx)
            }
            None => DMatrix::zeros(self.n, 0),
        }
    }
}

/// `a + b` as a rounded sum and its exact rounding error.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `rhs − m·x` evaluated in about twice the working precision.
pub fn compensated_residual(m: &DMatrix<f64>, x: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(rhs.nrows(), rhs.ncols());
    for c in 0..rhs.ncols() {
        for i in 0..m.nrows() {
            let (mut s, mut err) = (rhs[(i, c)], 0.0);
            for j in 0..m.ncols() {
                let a = m[(i, j)];
                if a == 0.0 {
                    continue;
                }
                let p = -a * x[(j, c)];
                let ep = (-a).mul_add(x[(j, c)], -p);
                let (t, es) = two_sum(s, p);
                s = t;
                err += es + ep;
            }
            r[(i, c)] = s + err;
        }
    }
    r
}

/// Numerical rank with singular values above `tol·σ_max`.
pub fn rank_with_tol(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let cut = tol * sv.max();
    sv.iter().filter(|&&s| s > cut).count()
}

/// Numerical rank of the equilibrated matrix.
pub fn rank(m: &DMatrix<f64>) -> usize {
    rank_with_tol(&equilibrate(m).apply(m), RANK_TOL)
}
