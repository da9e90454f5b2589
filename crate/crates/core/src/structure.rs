//! Null ideals, the supporting idempotent, and the splitting of an algebra
//! into Newton, Brownian and Lévy components.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{Element, ItoAlgebraSpec};
use crate::builders::{matrix_from_data, Provenance};
use crate::error::{ItoError, Result};
use crate::linalg::{self, c64, CMatrix, CVector, ZERO};
use crate::representation::{build_rep, FundamentalRep};

/// Threshold on the sine of the largest principal angle for subspace
/// equality.
pub const SUBSPACE_TOL: f64 = 1e-8;

/// Relative singular-value cutoff for kernels of exactly-rank-deficient maps.
const KERNEL_TOL: f64 = 1e-9;

/// Orthonormal coordinate bases (columns) of the null ideals and their
/// orthogonal complements.
#[derive(Debug, Clone)]
pub struct IdealData {
    /// `n₊ = {c : l(c★c) = 0}`, the kernel of `k`.
    pub n_plus: CMatrix,
    /// `n⁻ = {b : l(bb★) = 0}`.
    pub n_minus: CMatrix,
    /// Kernel of the GNS map `a ↦ i(a)`.
    pub n_op: CMatrix,
    /// `{a : ⟨a|b⟩₊ = 0 ∀ b ∈ n⁻}` with `⟨a|b⟩₊ = l(a★b)`.
    pub k_minus: CMatrix,
    /// Right orthogonal complement of `n₊`: `{a : l(a c★) = 0 ∀ c ∈ n₊}`.
    pub k_plus: CMatrix,
}

fn rows_of(vectors: &[CVector], n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(vectors.len(), n);
    for (i, v) in vectors.iter().enumerate() {
        for j in 0..n {
            m[(i, j)] = v[j];
        }
    }
    m
}

/// Matrix of `a ↦ K a★` composed with conjugation, so its kernel is `n⁻`.
fn bra_map(rep: &FundamentalRep) -> CMatrix {
    let s = rep.spec().involution_matrix();
    (rep.kolmogorov() * s.transpose()).map(|z| z.conj())
}

/// Matrix of `a ↦ vec(i(a))`.
fn op_map(rep: &FundamentalRep) -> CMatrix {
    let r = rep.rank();
    let n = rep.dim();
    let mut m = CMatrix::zeros(r * r, n);
    for (j, op) in rep.gns().iter().enumerate() {
        for (k, z) in op.iter().enumerate() {
            m[(k, j)] = *z;
        }
    }
    m
}

pub fn null_ideals(spec: &ItoAlgebraSpec, rep: &FundamentalRep) -> IdealData {
    let n = spec.dim();
    let n_plus = linalg::null_space(rep.kolmogorov(), KERNEL_TOL);
    let n_minus = linalg::null_space(&bra_map(rep), KERNEL_TOL);
    let n_op = linalg::null_space(&op_map(rep), KERNEL_TOL);

    let g = rep.gram();
    let k_minus = if n_minus.ncols() == 0 {
        CMatrix::identity(n, n)
    } else {
        linalg::null_space(&(n_minus.adjoint() * g), KERNEL_TOL)
    };

    // l(a c★) = aᵀ H c★ with H[i][j] = l(a_i a_j)
    let h = CMatrix::from_fn(n, n, |i, j| spec.functional_coords(spec.basis_product(i, j)));
    let constraints: Vec<CVector> = linalg::column_vecs(&n_plus)
        .iter()
        .map(|c| &h * CVector::from_vec(spec.involve_coords(c)))
        .collect();
    let k_plus = if constraints.is_empty() {
        CMatrix::identity(n, n)
    } else {
        linalg::null_space(&rows_of(&constraints, n), KERNEL_TOL)
    };

    IdealData {
        n_plus,
        n_minus,
        n_op,
        k_minus,
        k_plus,
    }
}

/// Orthonormal basis of the involution image of a subspace.
pub fn involve_subspace(spec: &ItoAlgebraSpec, basis: &CMatrix) -> CMatrix {
    let images: Vec<Vec<Complex64>> = linalg::column_vecs(basis)
        .iter()
        .map(|v| spec.involve_coords(v))
        .collect();
    linalg::range_basis(&linalg::columns(&images, spec.dim()), KERNEL_TOL)
}

pub fn same_subspace(a: &CMatrix, b: &CMatrix) -> bool {
    linalg::subspace_distance(a, b) < SUBSPACE_TOL
}

/// Vacuum characterization: the right orthogonal complement of `n₊`
/// coincides with `n⁻`.
pub fn is_vacuum(_spec: &ItoAlgebraSpec, ideals: &IdealData) -> bool {
    same_subspace(&ideals.k_plus, &ideals.n_minus)
}

fn theta_line(spec: &ItoAlgebraSpec) -> CMatrix {
    linalg::range_basis(&linalg::columns(&[spec.death().to_vec()], spec.dim()), KERNEL_TOL)
}

/// Thermal characterization: `n₊ = ℂθ = n⁻`.
pub fn is_thermal(spec: &ItoAlgebraSpec, ideals: &IdealData) -> bool {
    let line = theta_line(spec);
    same_subspace(&ideals.n_plus, &line) && same_subspace(&ideals.n_minus, &line)
}

/// The supporting idempotent together with the data that produced it.
#[derive(Debug, Clone)]
pub struct Idempotent {
    /// Self-adjoint preimage of the unit `E` of the operator algebra.
    pub e0: Vec<Complex64>,
    /// `f = e₀² + (l(e₀³) − l(e₀²))θ`.
    pub f: Element,
    /// `l(e₀³) − l(e₀²)`.
    pub correction: Complex64,
    pub unit_residual: f64,
    pub idempotent_residual: f64,
}

/// Completes a self-adjoint preimage `e0` of the unit into an exact
/// idempotent and checks `f² = f`, `f★ = f`.
pub fn idempotent_from_preimage(spec: &ItoAlgebraSpec, e0: &[Complex64]) -> Result<Idempotent> {
    let e2 = spec.mul_coords(e0, e0);
    let e3 = spec.mul_coords(&e2, e0);
    let correction = spec.functional_coords(&e3) - spec.functional_coords(&e2);
    let f = linalg::vec_add(&e2, &linalg::vec_scale(spec.death(), correction));
    let ff = spec.mul_coords(&f, &f);
    let fstar = spec.involve_coords(&f);
    let residual = linalg::max_abs_slice(&linalg::vec_sub(&ff, &f))
        .max(linalg::max_abs_slice(&linalg::vec_sub(&fstar, &f)));
    let scale = linalg::max_abs_slice(&f).max(1.0);
    if residual > spec.threshold(scale) {
        return Err(ItoError::NotIdempotent { residual });
    }
    Ok(Idempotent {
        e0: e0.to_vec(),
        f: spec.element(f)?,
        correction,
        unit_residual: 0.0,
        idempotent_residual: residual,
    })
}

/// Idempotent lifting `e ↦ 3e² − 2e³`. The least-squares preimage is only
/// accurate to a few ulps; since `e² − e` lies in a nil ideal the iteration
/// lands on an exact float fixed point after a few steps.
fn purify(spec: &ItoAlgebraSpec, mut e: Vec<Complex64>) -> Vec<Complex64> {
    let mut last = f64::INFINITY;
    for _ in 0..8 {
        let e2 = spec.mul_coords(&e, &e);
        let e3 = spec.mul_coords(&e2, &e);
        let next = linalg::vec_sub(&linalg::vec_scale(&e2, c64(3.0, 0.0)), &linalg::vec_scale(&e3, c64(2.0, 0.0)));
        let step = linalg::max_abs_slice(&linalg::vec_sub(&next, &e));
        // stop at a fixed point, or if rounding starts to dominate
        if step >= last {
            break;
        }
        e = next;
        if step == 0.0 {
            break;
        }
        last = step;
    }
    e
}

/// Solves `E i(a_k) = i(a_k) = i(a_k) E` for `E = i(e₀)` in the span of the
/// GNS image and corrects `e₀` to an idempotent.
pub fn supporting_idempotent_detail(spec: &ItoAlgebraSpec, rep: &FundamentalRep) -> Result<Idempotent> {
    let n = spec.dim();
    let r = rep.rank();
    let gns = rep.gns();
    let block = r * r;
    let mut system = CMatrix::zeros(2 * n * block, n);
    let mut rhs = CMatrix::zeros(2 * n * block, 1);
    for k in 0..n {
        for j in 0..n {
            let left = &gns[j] * &gns[k];
            let right = &gns[k] * &gns[j];
            for (idx, z) in left.iter().enumerate() {
                system[(2 * k * block + idx, j)] = *z;
            }
            for (idx, z) in right.iter().enumerate() {
                system[((2 * k + 1) * block + idx, j)] = *z;
            }
        }
        for (idx, z) in gns[k].iter().enumerate() {
            rhs[(2 * k * block + idx, 0)] = *z;
            rhs[((2 * k + 1) * block + idx, 0)] = *z;
        }
    }
    let t = linalg::lstsq(&system, &rhs, 1e-12);
    let unit_residual = linalg::max_abs(&(&system * &t - &rhs));
    let scale = linalg::max_abs(&rhs).max(1.0);
    if unit_residual > spec.threshold(scale) {
        return Err(ItoError::NoUnit { residual: unit_residual });
    }
    let t: Vec<Complex64> = t.iter().copied().collect();
    let t_star = spec.involve_coords(&t);
    let e0 = linalg::vec_scale(&linalg::vec_add(&t, &t_star), c64(0.5, 0.0));
    let mut out = idempotent_from_preimage(spec, &purify(spec, e0.clone()))?;
    out.e0 = e0;
    out.unit_residual = unit_residual;
    Ok(out)
}

pub fn supporting_idempotent(
    spec: &ItoAlgebraSpec,
    rep: &FundamentalRep,
    _ideals: &IdealData,
) -> Result<Element> {
    Ok(supporting_idempotent_detail(spec, rep)?.f)
}

/// Splitting of every basis element as `a_i = α_i θ + b_i + c_i`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub idempotent: Element,
    pub newton_coeff: Vec<Complex64>,
    pub brownian_part: Vec<Element>,
    pub levy_part: Vec<Element>,
    /// Orthonormal coordinate basis of the Brownian component.
    pub brownian_basis: CMatrix,
    /// Orthonormal coordinate basis of the Lévy component (closed under
    /// products).
    pub levy_basis: CMatrix,
}

/// Span of `vectors` closed under pairwise products.
pub fn product_closure(spec: &ItoAlgebraSpec, vectors: &[Vec<Complex64>]) -> CMatrix {
    let n = spec.dim();
    let mut basis = linalg::range_basis(&linalg::columns(vectors, n), KERNEL_TOL);
    for _ in 0..=n {
        let cols = linalg::column_vecs(&basis);
        let mut all = cols.clone();
        for a in &cols {
            for b in &cols {
                all.push(spec.mul_coords(a, b));
            }
        }
        let next = linalg::range_basis(&linalg::columns(&all, n), KERNEL_TOL);
        if next.ncols() == basis.ncols() {
            return basis;
        }
        basis = next;
    }
    basis
}

fn assemble(
    spec: &ItoAlgebraSpec,
    idempotent: Element,
    newton_coeff: Vec<Complex64>,
    brownian: Vec<Vec<Complex64>>,
    levy: Vec<Vec<Complex64>>,
) -> Result<Decomposition> {
    let n = spec.dim();
    let brownian_basis = linalg::range_basis(&linalg::columns(&brownian, n), KERNEL_TOL);
    let levy_basis = product_closure(spec, &levy);
    Ok(Decomposition {
        idempotent,
        newton_coeff,
        brownian_part: brownian.into_iter().map(|v| spec.element(v)).collect::<Result<_>>()?,
        levy_part: levy.into_iter().map(|v| spec.element(v)).collect::<Result<_>>()?,
        brownian_basis,
        levy_basis,
    })
}

/// `c = af + fa − faf`, `b = a − c − l(a − c)θ` for every basis element.
pub fn decompose_with(spec: &ItoAlgebraSpec, f: &Element) -> Result<Decomposition> {
    let n = spec.dim();
    let fc = f.coords();
    let mut newton = Vec::with_capacity(n);
    let mut brownian = Vec::with_capacity(n);
    let mut levy = Vec::with_capacity(n);
    for i in 0..n {
        let a = crate::algebra::unit(n, i);
        let af = spec.mul_coords(&a, fc);
        let fa = spec.mul_coords(fc, &a);
        let faf = spec.mul_coords(fc, &af);
        let c = linalg::vec_sub(&linalg::vec_add(&af, &fa), &faf);
        let b_prime = linalg::vec_sub(&a, &c);
        let alpha = spec.functional_coords(&b_prime);
        let b = linalg::vec_sub(&b_prime, &linalg::vec_scale(spec.death(), alpha));
        newton.push(alpha);
        brownian.push(b);
        levy.push(c);
    }
    assemble(spec, f.clone(), newton, brownian, levy)
}

pub fn decompose(spec: &ItoAlgebraSpec) -> Result<Decomposition> {
    let rep = build_rep(spec)?;
    let idem = supporting_idempotent_detail(spec, &rep)?;
    decompose_with(spec, &idem.f)
}

/// Orthogonal projector onto the joint kernel of all `A` and `A†`.
pub fn vacuum_kernel_projector(m: usize, algebra: &[CMatrix]) -> CMatrix {
    if algebra.is_empty() {
        return CMatrix::identity(m, m);
    }
    let mut stacked = CMatrix::zeros(2 * algebra.len() * m, m);
    for (a, op) in algebra.iter().enumerate() {
        stacked.view_mut((2 * a * m, 0), (m, m)).copy_from(op);
        stacked.view_mut(((2 * a + 1) * m, 0), (m, m)).copy_from(&op.adjoint());
    }
    let ker = linalg::null_space(&stacked, KERNEL_TOL);
    &ker * ker.adjoint()
}

/// Decomposition of a vacuum-builder algebra via the projector `P` onto the
/// joint kernel of the operator algebra: kets and bras are split as
/// `Px ⊕ yP` (Brownian) plus the rest (Lévy), operators are Lévy.
pub fn decompose_vacuum(spec: &ItoAlgebraSpec) -> Result<Decomposition> {
    let Provenance::Vacuum { m, algebra } = spec.provenance() else {
        return Err(ItoError::NotVacuumBuilder);
    };
    let m = *m;
    let ops: Vec<CMatrix> = algebra.iter().map(matrix_from_data).collect::<Result<_>>()?;
    let q = ops.len();
    let n = spec.dim();
    if n != 1 + 2 * m + q {
        return Err(ItoError::NotVacuumBuilder);
    }
    let p = vacuum_kernel_projector(m, &ops);

    // unit of the operator algebra is I − P; express it in the A-basis
    let mut stacked = CMatrix::zeros(m * m, q);
    for (j, a) in ops.iter().enumerate() {
        for (k, z) in a.iter().enumerate() {
            stacked[(k, j)] = *z;
        }
    }
    let unit = CMatrix::identity(m, m) - &p;
    let target = CMatrix::from_iterator(m * m, 1, unit.iter().copied());
    let t = linalg::lstsq(&stacked, &target, 1e-12);
    let residual = linalg::max_abs(&(&stacked * &t - &target));
    if residual > spec.threshold(1.0) {
        return Err(ItoError::NoUnit { residual });
    }
    let mut f = vec![ZERO; n];
    for (j, z) in t.iter().enumerate() {
        f[1 + 2 * m + j] = *z;
    }

    let mut newton = Vec::with_capacity(n);
    let mut brownian = Vec::with_capacity(n);
    let mut levy = Vec::with_capacity(n);
    for i in 0..n {
        let a = crate::algebra::unit(n, i);
        let alpha = spec.functional_coords(&a);
        let mut b = vec![ZERO; n];
        for r in 0..m {
            for s in 0..m {
                // ket: (Px)_r, bra: (yP)_s
                b[1 + r] += p[(r, s)] * a[1 + s];
                b[1 + m + s] += a[1 + m + r] * p[(r, s)];
            }
        }
        let rest = linalg::vec_sub(&linalg::vec_sub(&a, &b), &linalg::vec_scale(spec.death(), alpha));
        newton.push(alpha);
        brownian.push(b);
        levy.push(rest);
    }
    assemble(spec, spec.element(f)?, newton, brownian, levy)
}

/// Decomposition of a thermal-type algebra (θ at index 0, `n₊ = ℂθ`):
/// `𝒢 = {ξ : ξ𝒟 ⊆ ℂθ}` and the Brownian part of `ξ` is its
/// `⟨·|·⟩₊`-orthogonal projection onto `𝒢`.
pub fn decompose_thermal(spec: &ItoAlgebraSpec) -> Result<Decomposition> {
    if !spec.provenance().is_thermal_family() || spec.death_index() != Some(0) {
        return Err(ItoError::NotThermalBuilder);
    }
    let n = spec.dim();
    let d = n - 1;
    let gram = spec.gram_matrix();
    let g_d = gram.view((1, 1), (d, d)).into_owned();

    // ξ ↦ non-θ coordinates of ξζ_j for every ζ_j
    let mut map = CMatrix::zeros(d * d, d.max(1));
    for j in 1..n {
        for i in 1..n {
            let prod = spec.basis_product(i, j);
            for k in 1..n {
                map[((j - 1) * d + (k - 1), i - 1)] = prod[k];
            }
        }
    }
    let g_basis = if d == 0 {
        CMatrix::zeros(0, 0)
    } else {
        linalg::null_space(&map, KERNEL_TOL)
    };
    let proj = if g_basis.ncols() == 0 {
        CMatrix::zeros(d, d)
    } else {
        let inner = g_basis.adjoint() * &g_d * &g_basis;
        let inv = inner
            .try_inverse()
            .ok_or(ItoError::NotThermalBuilder)?;
        &g_basis * inv * g_basis.adjoint() * &g_d
    };

    let mut newton = Vec::with_capacity(n);
    let mut brownian = Vec::with_capacity(n);
    let mut levy = Vec::with_capacity(n);
    for i in 0..n {
        let a = crate::algebra::unit(n, i);
        let alpha = spec.functional_coords(&a);
        let xi = CVector::from_iterator(d, a[1..].iter().copied());
        let eta = &proj * &xi;
        let mut b = vec![ZERO; n];
        let mut c = vec![ZERO; n];
        for k in 0..d {
            b[1 + k] = eta[k];
            c[1 + k] = xi[k] - eta[k];
        }
        newton.push(alpha);
        brownian.push(b);
        levy.push(c);
    }
    let rep = build_rep(spec)?;
    let f = supporting_idempotent_detail(spec, &rep)?.f;
    assemble(spec, f, newton, brownian, levy)
}

/// Principal-angle distances between two decompositions of the same spec.
/// Lévy parts are compared modulo `ℂθ`, since the constructions differ in
/// whether `l(c)θ` is booked to the Newton or to the Lévy part.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComponentAgreement {
    pub brownian: f64,
    pub levy_mod_theta: f64,
}

impl ComponentAgreement {
    pub fn agrees(&self) -> bool {
        self.brownian < SUBSPACE_TOL && self.levy_mod_theta < SUBSPACE_TOL
    }
}

pub fn span_with_theta(spec: &ItoAlgebraSpec, basis: &CMatrix) -> CMatrix {
    let mut cols = linalg::column_vecs(basis);
    cols.push(spec.death().to_vec());
    linalg::range_basis(&linalg::columns(&cols, spec.dim()), KERNEL_TOL)
}

pub fn compare_decompositions(spec: &ItoAlgebraSpec, a: &Decomposition, b: &Decomposition) -> ComponentAgreement {
    ComponentAgreement {
        brownian: linalg::subspace_distance(&a.brownian_basis, &b.brownian_basis),
        levy_mod_theta: linalg::subspace_distance(
            &span_with_theta(spec, &a.levy_basis),
            &span_with_theta(spec, &b.levy_basis),
        ),
    }
}

impl Decomposition {
    /// Largest defect of `a_i = α_i θ + b_i + c_i` over the basis.
    pub fn reconstruction_residual(&self, spec: &ItoAlgebraSpec) -> f64 {
        let n = spec.dim();
        (0..n)
            .map(|i| {
                let sum = linalg::vec_add(
                    &linalg::vec_add(
                        &linalg::vec_scale(spec.death(), self.newton_coeff[i]),
                        self.brownian_part[i].coords(),
                    ),
                    self.levy_part[i].coords(),
                );
                linalg::max_abs_slice(&linalg::vec_sub(&sum, &crate::algebra::unit(n, i)))
            })
            .fold(0.0, f64::max)
    }

    /// Largest coordinate of `bc` or `cb` over the two component bases.
    pub fn orthogonality_residual(&self, spec: &ItoAlgebraSpec) -> f64 {
        let bs = linalg::column_vecs(&self.brownian_basis);
        let cs = linalg::column_vecs(&self.levy_basis);
        let mut worst: f64 = 0.0;
        for b in &bs {
            for c in &cs {
                worst = worst
                    .max(linalg::max_abs_slice(&spec.mul_coords(b, c)))
                    .max(linalg::max_abs_slice(&spec.mul_coords(c, b)));
            }
        }
        worst
    }

    /// Largest component of `bb'` outside `ℂθ`.
    pub fn brownian_closure_residual(&self, spec: &ItoAlgebraSpec) -> f64 {
        let bs = linalg::column_vecs(&self.brownian_basis);
        let theta = CVector::from_column_slice(spec.death());
        let tn = theta.norm_squared();
        let mut worst: f64 = 0.0;
        for b in &bs {
            for b2 in &bs {
                let p = CVector::from_vec(spec.mul_coords(b, b2));
                let off = &p - &theta * (theta.dotc(&p) / tn);
                worst = worst.max(linalg::max_abs_slice(off.as_slice()));
            }
        }
        worst
    }

    /// Largest coordinate of `f² − f`.
    pub fn idempotent_residual(&self, spec: &ItoAlgebraSpec) -> f64 {
        let f = self.idempotent.coords();
        linalg::max_abs_slice(&linalg::vec_sub(&spec.mul_coords(f, f), f))
    }

    /// Largest coordinate of `bf` or `fb` over the Brownian basis.
    pub fn brownian_annihilation_residual(&self, spec: &ItoAlgebraSpec) -> f64 {
        let f = self.idempotent.coords();
        linalg::column_vecs(&self.brownian_basis)
            .iter()
            .map(|b| {
                linalg::max_abs_slice(&spec.mul_coords(b, f)).max(linalg::max_abs_slice(&spec.mul_coords(f, b)))
            })
            .fold(0.0, f64::max)
    }

    /// Dimension of the Lévy component not counting `θ`.
    pub fn levy_dim_mod_theta(&self, spec: &ItoAlgebraSpec) -> usize {
        span_with_theta(spec, &self.levy_basis).ncols() - 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub is_newton: bool,
    pub is_wiener_type: bool,
    pub is_poisson_type: bool,
    pub is_mixed: bool,
    pub is_vacuum: bool,
    pub is_thermal: bool,
    pub is_commutative: bool,
    pub rank: usize,
    pub brownian_dim: usize,
    pub levy_dim: usize,
}

pub fn classify(spec: &ItoAlgebraSpec) -> Result<ClassificationReport> {
    let rep = build_rep(spec)?;
    let ideals = null_ideals(spec, &rep);
    let dec = decompose(spec)?;
    Ok(classify_from(spec, &rep, &ideals, &dec))
}

pub fn classify_from(
    spec: &ItoAlgebraSpec,
    rep: &FundamentalRep,
    ideals: &IdealData,
    dec: &Decomposition,
) -> ClassificationReport {
    let is_newton = spec.dim() == 1;
    let brownian_dim = dec.brownian_basis.ncols();
    let levy_dim = dec.levy_dim_mod_theta(spec);
    let (b, c) = (brownian_dim > 0, levy_dim > 0);
    ClassificationReport {
        is_newton,
        is_wiener_type: !is_newton && b && !c,
        is_poisson_type: !is_newton && c && !b,
        is_mixed: !is_newton && b && c,
        is_vacuum: is_vacuum(spec, ideals),
        is_thermal: is_thermal(spec, ideals),
        is_commutative: spec.is_commutative(),
        rank: rep.rank(),
        brownian_dim,
        levy_dim,
    }
}
