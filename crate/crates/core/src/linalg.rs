//! Dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute floor below which residuals and singular values count as zero.
pub const ABS_FLOOR: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_slice(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    thin_svd(m).0.into_iter().fold(0.0_f64, f64::max)
}

fn to_faer(a: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `a = U diag(s) V†` with `min(rows, cols)` singular triples in
/// descending order.
///
/// Backed by faer: nalgebra's complex SVD returns inaccurate factors when
/// singular values cluster, which the algebras here produce routinely.
pub fn thin_svd(a: &CMatrix) -> (Vec<f64>, CMatrix, CMatrix) {
    let (rows, cols) = a.shape();
    let p = rows.min(cols);
    if p == 0 {
        return (Vec::new(), CMatrix::zeros(rows, 0), CMatrix::zeros(cols, 0));
    }
    let svd = to_faer(a).thin_svd().expect("SVD converges on finite input");
    let s = svd.S().column_vector();
    let sv = (0..p).map(|k| s[k].re).collect();
    (sv, from_faer(svd.U()), from_faer(svd.V()))
}

/// Scales `v` so that its first entry of (numerically) maximal modulus is
/// real and positive.
fn fix_phase(v: &mut CVector) {
    let top = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if top == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() >= top * (1.0 - 1e-9)).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted in
/// descending order and eigenvectors phase-normalized.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let herm = (m + m.adjoint()) * c64(0.5, 0.0);
    let eig = to_faer(&herm)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigensolver converges on finite input");
    let s = eig.S().column_vector();
    let eigenvalues: Vec<f64> = (0..n).map(|k| s[k].re).collect();
    let eigenvectors = from_faer(eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let values = order.iter().map(|&k| eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: CVector = eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Full SVD of `a` padded with zero rows to be at least square, so that the
/// returned right factor spans the whole domain.
fn full_right_svd(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (rows, cols) = a.shape();
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let (sv, _, v) = thin_svd(&padded);
    (sv, v)
}

/// Orthonormal basis (columns) of the kernel of `a`. Singular values below
/// `max(rel_tol * sigma_max, ABS_FLOOR)` count as zero.
pub fn null_space(a: &CMatrix, rel_tol: f64) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMatrix::identity(cols, cols);
    }
    let (sv, v) = full_right_svd(a);
    let smax = sv.iter().fold(0.0_f64, |acc, &s| acc.max(s));
    let thresh = (rel_tol * smax).max(ABS_FLOOR);
    let keep: Vec<usize> = (0..cols).filter(|&k| sv[k] <= thresh).collect();
    let mut out = CMatrix::zeros(cols, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        let mut col: CVector = v.column(k).into_owned();
        fix_phase(&mut col);
        out.set_column(dst, &col);
    }
    out
}

/// Orthonormal basis (columns) of the column span of `a`.
pub fn range_basis(a: &CMatrix, rel_tol: f64) -> CMatrix {
    let rows = a.nrows();
    if a.ncols() == 0 || rows == 0 {
        return CMatrix::zeros(rows, 0);
    }
    // Column span of `a` is the orthogonal complement of ker(a^H).
    let (sv, u) = full_right_svd(&a.adjoint());
    let smax = sv.iter().fold(0.0_f64, |acc, &s| acc.max(s));
    let thresh = (rel_tol * smax).max(ABS_FLOOR);
    let keep: Vec<usize> = (0..rows).filter(|&k| sv.get(k).copied().unwrap_or(0.0) > thresh).collect();
    let mut out = CMatrix::zeros(rows, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        let mut col: CVector = u.column(k).into_owned();
        fix_phase(&mut col);
        out.set_column(dst, &col);
    }
    out
}

/// Matrix whose columns are the given vectors.
pub fn columns(vectors: &[Vec<Complex64>], dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        for (i, z) in v.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    m
}

pub fn column_vecs(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.ncols())
        .map(|j| m.column(j).iter().copied().collect())
        .collect()
}

/// Sine of the largest principal angle between the column spans of two
/// orthonormal bases; 1.0 when the dimensions differ.
pub fn subspace_distance(q1: &CMatrix, q2: &CMatrix) -> f64 {
    if q1.ncols() != q2.ncols() {
        return 1.0;
    }
    if q1.ncols() == 0 {
        return 0.0;
    }
    let r12 = q2 - q1 * (q1.adjoint() * q2);
    let r21 = q1 - q2 * (q2.adjoint() * q1);
    spectral_norm(&r12).max(spectral_norm(&r21))
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &CMatrix, b: &CMatrix, rel_tol: f64) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, b.ncols());
    }
    if a.nrows() == 0 {
        return CMatrix::zeros(cols, b.ncols());
    }
    let (sv, u, v) = thin_svd(a);
    let smax = sv.iter().fold(0.0_f64, |acc, &s| acc.max(s));
    let thresh = (rel_tol * smax).max(ABS_FLOOR);
    let mut x = CMatrix::zeros(cols, b.ncols());
    let utb = u.adjoint() * b;
    for (k, &s) in sv.iter().enumerate() {
        if s > thresh {
            let row = utb.row(k) / c64(s, 0.0);
            x += v.column(k) * row;
        }
    }
    x
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|x| x * s).collect()
}
