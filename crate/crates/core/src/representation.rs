//! Kolmogorov factorization of the Gram form, the GNS left action, and the
//! fundamental quadruple / triangular-matrix representation.

use num_complex::Complex64;

use crate::algebra::{Element, ItoAlgebraSpec};
use crate::error::{ItoError, Result};
use crate::linalg::{self, c64, CMatrix, CVector, ZERO};

/// Relative eigenvalue cutoff for the rank of the Gram matrix.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Relative tie-break window when picking Gram–Schmidt pivots.
const PIVOT_TIE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct FundamentalRep {
    spec: ItoAlgebraSpec,
    gram: CMatrix,
    eigenvalues: Vec<f64>,
    rank: usize,
    kolmogorov: CMatrix,
    kolmogorov_pinv: CMatrix,
    gns: Vec<CMatrix>,
    rank_cutoff: f64,
    gns_residual: f64,
}

/// Orthonormal basis of `range(proj)` chosen by pivoted Gram–Schmidt on the
/// projected coordinate axes `proj e_j`. Makes `K` reproducible inside
/// degenerate eigenspaces and aligns it with the coordinate basis whenever
/// the range is spanned by coordinate axes.
fn pivoted_range_basis(proj: &CMatrix, rank: usize) -> CMatrix {
    let n = proj.nrows();
    let mut residuals: Vec<CVector> = (0..n).map(|j| proj.column(j).into_owned()).collect();
    let mut q = CMatrix::zeros(n, rank);
    let mut used = vec![false; n];
    for k in 0..rank {
        let norms: Vec<f64> = residuals.iter().map(|v| v.norm()).collect();
        let best = (0..n)
            .filter(|&j| !used[j])
            .fold(0.0_f64, |acc, j| acc.max(norms[j]));
        let pick = (0..n)
            .find(|&j| !used[j] && norms[j] >= best * (1.0 - PIVOT_TIE))
            .expect("rank exceeds projector range");
        used[pick] = true;
        let mut v = residuals[pick].clone() / c64(norms[pick], 0.0);
        // re-orthogonalize against earlier columns for stability
        for m in 0..k {
            let qm = q.column(m).into_owned();
            let proj_m = qm.dotc(&v);
            v -= qm * proj_m;
        }
        let nv = v.norm();
        v /= c64(nv, 0.0);
        // fix phase so the pivot coordinate is real positive
        let phase = v[pick];
        if phase.norm() > 0.0 {
            v *= phase.conj() / phase.norm();
        }
        for r in residuals.iter_mut() {
            let c = v.dotc(r);
            *r -= &v * c;
        }
        q.set_column(k, &v);
    }
    q
}

impl FundamentalRep {
    pub fn spec(&self) -> &ItoAlgebraSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// Eigenvalues of the Gram matrix in descending order.
    pub fn gram_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `r × n` factor with `K†K = G`; column `j` is `k(a_j)`.
    pub fn kolmogorov(&self) -> &CMatrix {
        &self.kolmogorov
    }

    pub fn gns(&self) -> &[CMatrix] {
        &self.gns
    }

    /// Relative eigenvalue threshold that decided the rank.
    pub fn rank_cutoff(&self) -> f64 {
        self.rank_cutoff
    }

    /// Largest residual of `i(a_j) K = K L_j` over the basis.
    pub fn gns_residual(&self) -> f64 {
        self.gns_residual
    }

    fn check(&self, a: &Element) -> Result<()> {
        if a.spec_id() != self.spec.id() {
            return Err(ItoError::SpecMismatch);
        }
        Ok(())
    }

    /// `k(a) = K a`.
    pub fn ket_of(&self, coords: &[Complex64]) -> CVector {
        &self.kolmogorov * CVector::from_column_slice(coords)
    }

    /// `k*(a) = k(a★)†` as a row of coefficients (no further conjugation
    /// when contracted with a ket).
    pub fn bra_of(&self, coords: &[Complex64]) -> CVector {
        self.ket_of(&self.spec.involve_coords(coords)).map(|z| z.conj())
    }

    /// `i(a) = Σ a_j i(a_j)`.
    pub fn op_of(&self, coords: &[Complex64]) -> CMatrix {
        let r = self.rank;
        let mut op = CMatrix::zeros(r, r);
        for (a, m) in coords.iter().zip(&self.gns) {
            if *a != ZERO {
                op += m * *a;
            }
        }
        op
    }

    pub fn quadruple_of(&self, coords: &[Complex64]) -> Quadruple {
        Quadruple {
            alpha: self.spec.functional_coords(coords),
            ket: self.ket_of(coords),
            bra: self.bra_of(coords),
            op: self.op_of(coords),
        }
    }

    /// Largest defect of `i(a_j★) = i(a_j)†` over the basis.
    pub fn star_residual(&self) -> f64 {
        (0..self.dim())
            .map(|j| {
                let star = self.spec.involve_coords(&crate::algebra::unit(self.dim(), j));
                linalg::max_abs(&(self.op_of(&star) - self.gns[j].adjoint()))
            })
            .fold(0.0, f64::max)
    }

    /// Coordinates of some preimage under `a ↦ K a` (minimal norm).
    pub fn ket_preimage(&self, ket: &CVector) -> CVector {
        &self.kolmogorov_pinv * ket
    }
}

/// Builds the Kolmogorov factor and GNS matrices of a validated spec.
pub fn build_rep(spec: &ItoAlgebraSpec) -> Result<FundamentalRep> {
    let n = spec.dim();
    let gram = spec.gram_matrix();
    let (eig, vecs) = linalg::hermitian_eigen(&gram);
    let lmax = eig.first().copied().unwrap_or(0.0).max(0.0);
    let lmin = eig.last().copied().unwrap_or(0.0);
    if lmin < -spec.threshold(lmax) {
        return Err(ItoError::GramNotPsd {
            min_eigenvalue: lmin,
            max_eigenvalue: lmax,
        });
    }
    let cut = (RANK_CUTOFF * lmax).max(linalg::ABS_FLOOR);
    let rank = eig.iter().filter(|&&l| l > cut).count();

    let mut sqrt_g = CMatrix::zeros(n, n);
    let mut proj = CMatrix::zeros(n, n);
    for k in 0..rank {
        let v = vecs.column(k);
        let outer = v * v.adjoint();
        sqrt_g += &outer * c64(eig[k].sqrt(), 0.0);
        proj += outer;
    }
    let q = pivoted_range_basis(&proj, rank);
    let kolmogorov = q.adjoint() * &sqrt_g;
    let kolmogorov_pinv = if rank == 0 {
        CMatrix::zeros(n, 0)
    } else {
        let kkt = &kolmogorov * kolmogorov.adjoint();
        let inv = kkt
            .try_inverse()
            .ok_or(ItoError::GramNotPsd { min_eigenvalue: lmin, max_eigenvalue: lmax })?;
        kolmogorov.adjoint() * inv
    };

    let mut gns = Vec::with_capacity(n);
    let mut gns_residual: f64 = 0.0;
    for i in 0..n {
        let kl = &kolmogorov * spec.left_mult_matrix(i);
        let op = &kl * &kolmogorov_pinv;
        let res = linalg::max_abs(&(&op * &kolmogorov - &kl));
        let scale = linalg::max_abs(&kl).max(linalg::max_abs(&kolmogorov)).max(1.0);
        if res > spec.threshold(scale) {
            return Err(ItoError::GnsInconsistent { index: i, residual: res });
        }
        gns_residual = gns_residual.max(res);
        gns.push(op);
    }

    Ok(FundamentalRep {
        spec: spec.clone(),
        gram,
        eigenvalues: eig,
        rank,
        kolmogorov,
        kolmogorov_pinv,
        gns,
        rank_cutoff: RANK_CUTOFF,
        gns_residual,
    })
}

/// The four blocks `(l(a), k(a), k*(a), i(a))` of the fundamental
/// representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadruple {
    pub alpha: Complex64,
    pub ket: CVector,
    /// Row covector; `bra · ket = Σ bra_k ket_k`.
    pub bra: CVector,
    pub op: CMatrix,
}

impl Quadruple {
    pub fn rank(&self) -> usize {
        self.ket.len()
    }

    pub fn zero(rank: usize) -> Self {
        Quadruple {
            alpha: ZERO,
            ket: CVector::zeros(rank),
            bra: CVector::zeros(rank),
            op: CMatrix::zeros(rank, rank),
        }
    }

    /// Largest entrywise difference over all four blocks.
    pub fn distance(&self, other: &Quadruple) -> f64 {
        let d_ket = linalg::max_abs_slice((&self.ket - &other.ket).as_slice());
        let d_bra = linalg::max_abs_slice((&self.bra - &other.bra).as_slice());
        let d_op = linalg::max_abs(&(&self.op - &other.op));
        (self.alpha - other.alpha).norm().max(d_ket).max(d_bra).max(d_op)
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha
            .norm()
            .max(linalg::max_abs_slice(self.ket.as_slice()))
            .max(linalg::max_abs_slice(self.bra.as_slice()))
            .max(linalg::max_abs(&self.op))
    }
}

pub fn quadruple(rep: &FundamentalRep, a: &Element) -> Result<Quadruple> {
    rep.check(a)?;
    Ok(rep.quadruple_of(a.coords()))
}

/// Product of quadruples, contracting over the middle index only.
pub fn convolve(q1: &Quadruple, q2: &Quadruple) -> Result<Quadruple> {
    if q1.rank() != q2.rank() {
        return Err(ItoError::RankMismatch {
            left: q1.rank(),
            right: q2.rank(),
        });
    }
    Ok(Quadruple {
        alpha: q1.bra.iter().zip(q2.ket.iter()).map(|(a, b)| a * b).sum(),
        ket: &q1.op * &q2.ket,
        bra: q2.op.transpose() * &q1.bra,
        op: &q1.op * &q2.op,
    })
}

/// `(r+2) × (r+2)` matrix indexed by `(−, •₁..•ᵣ, +)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularMatrix {
    pub mat: CMatrix,
}

impl TriangularMatrix {
    pub fn rank(&self) -> usize {
        self.mat.nrows() - 2
    }

    pub fn mul(&self, other: &TriangularMatrix) -> TriangularMatrix {
        TriangularMatrix { mat: &self.mat * &other.mat }
    }

    pub fn distance(&self, other: &TriangularMatrix) -> f64 {
        linalg::max_abs(&(&self.mat - &other.mat))
    }

    pub fn to_quadruple(&self) -> Quadruple {
        let r = self.rank();
        Quadruple {
            alpha: self.mat[(0, r + 1)],
            ket: self.mat.view((1, r + 1), (r, 1)).column(0).into_owned(),
            bra: self.mat.view((0, 1), (1, r)).row(0).transpose(),
            op: self.mat.view((1, 1), (r, r)).into_owned(),
        }
    }
}

pub fn to_matrix(q: &Quadruple) -> TriangularMatrix {
    let r = q.rank();
    let mut mat = CMatrix::zeros(r + 2, r + 2);
    mat[(0, r + 1)] = q.alpha;
    for k in 0..r {
        mat[(0, 1 + k)] = q.bra[k];
        mat[(1 + k, r + 1)] = q.ket[k];
    }
    mat.view_mut((1, 1), (r, r)).copy_from(&q.op);
    TriangularMatrix { mat }
}

/// `g A† g` with `g` exchanging the `−` and `+` indices.
pub fn metric_adjoint(t: &TriangularMatrix) -> TriangularMatrix {
    let size = t.mat.nrows();
    let mut g = CMatrix::identity(size, size);
    if size >= 2 {
        let last = size - 1;
        g[(0, 0)] = ZERO;
        g[(last, last)] = ZERO;
        g[(0, last)] = c64(1.0, 0.0);
        g[(last, 0)] = c64(1.0, 0.0);
    }
    TriangularMatrix { mat: &g * t.mat.adjoint() * &g }
}
