//! Canonical example algebras: Newton, Wiener, Poisson, vacuum (HP-type) and
//! thermal algebras, orthogonal sums, and seeded random instances.
//!
//! Every builder places θ at basis index 0 and sets `l = (1, 0, ..., 0)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{ItoAlgebraSpec, DEFAULT_TOL};
use crate::error::{ItoError, Result};
use crate::linalg::{self, c64, CMatrix, CVector, ONE, ZERO};

/// Row-major complex matrix as nested `[re, im]` pairs.
pub type MatrixData = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_data(m: &CMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_data(d: &MatrixData) -> Result<CMatrix> {
    let rows = d.len();
    let cols = d.first().map_or(0, |r| r.len());
    if d.iter().any(|r| r.len() != cols) {
        return Err(ItoError::Shape("ragged matrix".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| c64(d[i][j][0], d[i][j][1])))
}

/// Which builder produced a spec. Structure-specific decompositions rely on
/// the builder's basis layout, so any change of basis resets this to
/// `Custom`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Custom,
    Newton,
    Wiener { d: usize },
    Poisson { d: usize },
    Vacuum { m: usize, algebra: Vec<MatrixData> },
    Thermal { k: usize, rho: MatrixData },
    Sum { parts: Vec<Provenance> },
}

impl Provenance {
    /// Builders whose algebras have trivial null ideals (`n₊ = ℂθ = n⁻`).
    pub fn is_thermal_family(&self) -> bool {
        match self {
            Provenance::Newton
            | Provenance::Wiener { .. }
            | Provenance::Poisson { .. }
            | Provenance::Thermal { .. } => true,
            Provenance::Sum { parts } => parts.iter().all(Provenance::is_thermal_family),
            Provenance::Custom | Provenance::Vacuum { .. } => false,
        }
    }
}

/// Input of the vacuum builder: a ★-closed operator algebra on `ℂ^m`.
#[derive(Debug, Clone)]
pub struct VacuumInput {
    pub m: usize,
    pub algebra_basis: Vec<CMatrix>,
}

/// Input of the thermal builder: a faithful density matrix on `ℂ^k`.
#[derive(Debug, Clone)]
pub struct ThermalInput {
    pub k: usize,
    pub rho: CMatrix,
}

fn tensor(n: usize) -> Vec<Complex64> {
    vec![ZERO; n * n * n]
}

fn set(t: &mut [Complex64], n: usize, i: usize, j: usize, k: usize, v: Complex64) {
    t[(i * n + j) * n + k] += v;
}

fn unit_functional(n: usize) -> Vec<Complex64> {
    let mut l = vec![ZERO; n];
    l[0] = ONE;
    l
}

/// `ℂθ` with `θθ = 0`.
pub fn newton() -> ItoAlgebraSpec {
    ItoAlgebraSpec::new(
        vec!["theta".into()],
        tensor(1),
        CMatrix::identity(1, 1),
        vec![ONE],
        vec![ONE],
        DEFAULT_TOL,
    )
    .expect("newton algebra shape")
    .with_provenance(Provenance::Newton)
}

/// Algebra of `d` independent Wiener differentials: `w_i w_j = δ_ij θ`.
pub fn wiener(d: usize) -> ItoAlgebraSpec {
    assert!(d >= 1, "wiener algebra needs d >= 1");
    let n = d + 1;
    let mut t = tensor(n);
    for i in 1..n {
        set(&mut t, n, i, i, 0, ONE);
    }
    let mut labels = vec!["theta".to_string()];
    labels.extend((1..=d).map(|i| format!("w{i}")));
    ItoAlgebraSpec::new(
        labels,
        t,
        CMatrix::identity(n, n),
        unit_functional(n),
        unit_functional(n),
        DEFAULT_TOL,
    )
    .expect("wiener algebra shape")
    .with_provenance(Provenance::Wiener { d })
}

/// Algebra of `d` compensated Poisson differentials:
/// `p_i p_j = δ_ij (θ + p_i)`.
pub fn poisson(d: usize) -> ItoAlgebraSpec {
    assert!(d >= 1, "poisson algebra needs d >= 1");
    let n = d + 1;
    let mut t = tensor(n);
    for i in 1..n {
        set(&mut t, n, i, i, 0, ONE);
        set(&mut t, n, i, i, i, ONE);
    }
    let mut labels = vec!["theta".to_string()];
    labels.extend((1..=d).map(|i| format!("p{i}")));
    ItoAlgebraSpec::new(
        labels,
        t,
        CMatrix::identity(n, n),
        unit_functional(n),
        unit_functional(n),
        DEFAULT_TOL,
    )
    .expect("poisson algebra shape")
    .with_provenance(Provenance::Poisson { d })
}

fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().copied())
}

/// Coordinates of `target` in the span of `basis` (columns of `stacked`),
/// failing when the residual exceeds tolerance.
fn span_coords(stacked: &CMatrix, target: &CMatrix, what: &str) -> Result<Vec<Complex64>> {
    let q = stacked.ncols();
    let b = vectorize(target);
    if q == 0 {
        return if linalg::max_abs_slice(b.as_slice()) <= linalg::ABS_FLOOR {
            Ok(Vec::new())
        } else {
            Err(ItoError::NotAnAlgebra(format!("{what} leaves the zero algebra")))
        };
    }
    let bm = CMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let x = linalg::lstsq(stacked, &bm, 1e-12);
    let res = linalg::max_abs(&(stacked * &x - &bm));
    let scale = linalg::max_abs(&bm).max(1.0);
    if res > (DEFAULT_TOL * scale).max(linalg::ABS_FLOOR) {
        return Err(ItoError::NotAnAlgebra(format!(
            "{what} is not in the span (residual {res:e})"
        )));
    }
    Ok(x.iter().copied().collect())
}

/// Vacuum (Hudson–Parthasarathy type) algebra over `ℂ ⊕ (𝔥 ⊕ 𝔥*) ⊕ 𝒜`.
///
/// Basis order: θ, kets `x_1..x_m`, bras `y_1..y_m`, then the operator
/// basis. The product is the quadruple convolution
/// `(α, x, y, A)(β, x', y', B) = (y x', A x', y B, A B)` and the involution
/// swaps kets and bras and takes adjoints.
pub fn vacuum(inp: &VacuumInput) -> Result<ItoAlgebraSpec> {
    let m = inp.m;
    if m == 0 {
        return Err(ItoError::InvalidParameter("vacuum algebra needs m >= 1".into()));
    }
    let q = inp.algebra_basis.len();
    for a in &inp.algebra_basis {
        if a.shape() != (m, m) {
            return Err(ItoError::Shape(format!(
                "operator basis element is {:?}, expected {m}x{m}",
                a.shape()
            )));
        }
    }
    let mut stacked = CMatrix::zeros(m * m, q);
    for (j, a) in inp.algebra_basis.iter().enumerate() {
        stacked.set_column(j, &vectorize(a));
    }
    if q > 0 && linalg::range_basis(&stacked, 1e-10).ncols() != q {
        return Err(ItoError::NotAnAlgebra("operator basis is linearly dependent".into()));
    }

    let n = 1 + 2 * m + q;
    let ket = |i: usize| 1 + i;
    let bra = |i: usize| 1 + m + i;
    let op = |a: usize| 1 + 2 * m + a;
    let mut t = tensor(n);
    let mut s = CMatrix::zeros(n, n);
    s[(0, 0)] = ONE;

    for i in 0..m {
        // y_i x_i = θ
        set(&mut t, n, bra(i), ket(i), 0, ONE);
        s[(ket(i), bra(i))] = ONE;
        s[(bra(i), ket(i))] = ONE;
    }
    for (a, amat) in inp.algebra_basis.iter().enumerate() {
        for j in 0..m {
            for i in 0..m {
                let v = amat[(i, j)];
                if v != ZERO {
                    // A e_j = Σ_i A[i][j] e_i and e_i^T A = Σ_j A[i][j] e_j^T
                    set(&mut t, n, op(a), ket(j), ket(i), v);
                    set(&mut t, n, bra(i), op(a), bra(j), v);
                }
            }
        }
        for (b, bmat) in inp.algebra_basis.iter().enumerate() {
            let coords = span_coords(&stacked, &(amat * bmat), &format!("product A{} A{}", a + 1, b + 1))?;
            for (c, v) in coords.into_iter().enumerate() {
                set(&mut t, n, op(a), op(b), op(c), v);
            }
        }
        let adj = span_coords(&stacked, &amat.adjoint(), &format!("adjoint of A{}", a + 1))?;
        for (c, v) in adj.into_iter().enumerate() {
            s[(op(a), op(c))] = v;
        }
    }

    let mut labels = vec!["theta".to_string()];
    labels.extend((1..=m).map(|i| format!("x{i}")));
    labels.extend((1..=m).map(|i| format!("y{i}")));
    labels.extend((1..=q).map(|a| format!("A{a}")));
    Ok(ItoAlgebraSpec::new(labels, t, s, unit_functional(n), unit_functional(n), DEFAULT_TOL)?
        .with_provenance(Provenance::Vacuum {
            m,
            algebra: inp.algebra_basis.iter().map(matrix_to_data).collect(),
        }))
}

/// Thermal algebra `ℂ ⊕ M_k` of a faithful state `ρ`.
///
/// Basis order: θ, then matrix units `E_ab` at index `1 + a k + b`. The
/// product is `E_ab E_cd = δ_bc (E_ad + ρ_da θ)`, so that
/// `l(ξ★ζ) = tr(ρ ξ†ζ)` and `l(ξξ★) = tr(ρ ξξ†)`.
pub fn thermal(inp: &ThermalInput) -> Result<ItoAlgebraSpec> {
    let k = inp.k;
    if k == 0 {
        return Err(ItoError::InvalidParameter("thermal algebra needs k >= 1".into()));
    }
    if inp.rho.shape() != (k, k) {
        return Err(ItoError::Shape(format!("rho is {:?}, expected {k}x{k}", inp.rho.shape())));
    }
    let herm_defect = linalg::max_abs(&(&inp.rho - inp.rho.adjoint()));
    if herm_defect > DEFAULT_TOL {
        return Err(ItoError::InvalidParameter(format!(
            "rho is not Hermitian (defect {herm_defect:e})"
        )));
    }
    let trace = inp.rho.trace();
    if (trace - ONE).norm() > DEFAULT_TOL {
        return Err(ItoError::InvalidParameter(format!("rho has trace {trace}, expected 1")));
    }
    let (eig, _) = linalg::hermitian_eigen(&inp.rho);
    let min_eig = eig.last().copied().unwrap_or(0.0);
    if min_eig <= DEFAULT_TOL {
        return Err(ItoError::StateNotFaithful { min_eigenvalue: min_eig });
    }

    let n = 1 + k * k;
    let unit = |a: usize, b: usize| 1 + a * k + b;
    let mut t = tensor(n);
    let mut s = CMatrix::zeros(n, n);
    s[(0, 0)] = ONE;
    for a in 0..k {
        for b in 0..k {
            s[(unit(a, b), unit(b, a))] = ONE;
            for d in 0..k {
                set(&mut t, n, unit(a, b), unit(b, d), unit(a, d), ONE);
                set(&mut t, n, unit(a, b), unit(b, d), 0, inp.rho[(d, a)]);
            }
        }
    }
    let mut labels = vec!["theta".to_string()];
    for a in 0..k {
        for b in 0..k {
            labels.push(format!("E{}{}", a + 1, b + 1));
        }
    }
    Ok(ItoAlgebraSpec::new(labels, t, s, unit_functional(n), unit_functional(n), DEFAULT_TOL)?
        .with_provenance(Provenance::Thermal {
            k,
            rho: matrix_to_data(&inp.rho),
        }))
}

/// Re-expresses a spec so that θ is basis vector 0.
pub fn with_death_first(spec: &ItoAlgebraSpec) -> Result<ItoAlgebraSpec> {
    let n = spec.dim();
    if spec.death_index() == Some(0) {
        return Ok(spec.clone());
    }
    let theta = spec.death();
    let pivot = (0..n)
        .max_by(|&a, &b| theta[a].norm().total_cmp(&theta[b].norm()))
        .filter(|&t| theta[t].norm() > linalg::ABS_FLOOR)
        .ok_or_else(|| ItoError::InvalidParameter("death element is zero".into()))?;
    let mut basis = CMatrix::zeros(n, n);
    for (i, z) in theta.iter().enumerate() {
        basis[(i, 0)] = *z;
    }
    let mut labels = vec![spec.labels()[pivot].clone()];
    let mut col = 1;
    for j in (0..n).filter(|&j| j != pivot) {
        basis[(j, col)] = ONE;
        labels.push(spec.labels()[j].clone());
        col += 1;
    }
    spec.change_basis(&basis, Some(labels))
}

/// Orthogonal sum sharing θ: non-θ elements of the two summands annihilate
/// each other. Dimension is `dim1 + dim2 - 1`.
pub fn orthogonal_sum(s1: &ItoAlgebraSpec, s2: &ItoAlgebraSpec) -> Result<ItoAlgebraSpec> {
    let a = with_death_first(s1)?;
    let b = with_death_first(s2)?;
    let (n1, n2) = (a.dim(), b.dim());
    let n = n1 + n2 - 1;
    // summand index -> sum index
    let map_a = |i: usize| i;
    let map_b = |i: usize| if i == 0 { 0 } else { n1 + i - 1 };

    let mut t = tensor(n);
    let mut s = CMatrix::zeros(n, n);
    let mut l = vec![ZERO; n];
    for (spec, map) in [(&a, &map_a as &dyn Fn(usize) -> usize), (&b, &map_b)] {
        let m = spec.dim();
        for i in 1..m {
            for j in 1..m {
                for (k, v) in spec.basis_product(i, j).iter().enumerate() {
                    if *v != ZERO {
                        set(&mut t, n, map(i), map(j), map(k), *v);
                    }
                }
            }
            for j in 0..m {
                s[(map(i), map(j))] = spec.involution_matrix()[(i, j)];
            }
            l[map(i)] = spec.functional_values()[i];
        }
    }
    s[(0, 0)] = a.involution_matrix()[(0, 0)];
    l[0] = a.functional_values()[0];

    let mut labels: Vec<String> = a.labels().to_vec();
    for label in &b.labels()[1..] {
        let mut candidate = label.clone();
        while labels.contains(&candidate) {
            candidate.push('\'');
        }
        labels.push(candidate);
    }
    let mut death = vec![ZERO; n];
    death[0] = ONE;
    let provenance = match (a.provenance(), b.provenance()) {
        (Provenance::Newton, p) | (p, Provenance::Newton) => p.clone(),
        (p, q) => {
            let mut parts = Vec::new();
            for x in [p, q] {
                match x {
                    Provenance::Sum { parts: inner } => parts.extend(inner.iter().cloned()),
                    other => parts.push(other.clone()),
                }
            }
            Provenance::Sum { parts }
        }
    };
    Ok(ItoAlgebraSpec::new(labels, t, s, death, l, a.tol().min(b.tol()))?.with_provenance(provenance))
}

/// Family and sizes for [`random_algebra`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RandomKind {
    Vacuum { m: usize },
    Thermal { k: usize },
    /// Orthogonal sum of a random vacuum, a random thermal and a Wiener part.
    Mixed { m: usize, k: usize, d: usize },
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_unitary(rng: &mut ChaCha8Rng, m: usize) -> CMatrix {
    let g = DMatrix::from_fn(m, m, |_, _| complex_gaussian(rng));
    g.qr().q()
}

/// Random ★-closed operator algebra on `ℂ^m`: the space is split by a random
/// unitary into blocks, each block contributing nothing, its projection, or
/// all of its matrix units.
pub fn random_vacuum_input(rng: &mut ChaCha8Rng, m: usize) -> VacuumInput {
    let u = random_unitary(rng, m);
    let mut algebra_basis = Vec::new();
    let mut start = 0;
    while start < m {
        let size = rng.random_range(1..=(m - start));
        let block: Vec<usize> = (start..start + size).collect();
        match rng.random_range(0..3u8) {
            0 => {}
            1 => {
                let mut p = CMatrix::zeros(m, m);
                for &c in &block {
                    let col = u.column(c);
                    p += &col * col.adjoint();
                }
                algebra_basis.push(p);
            }
            _ => {
                for &a in &block {
                    for &b in &block {
                        algebra_basis.push(u.column(a) * u.column(b).adjoint());
                    }
                }
            }
        }
        start += size;
    }
    VacuumInput { m, algebra_basis }
}

pub fn random_thermal_input(rng: &mut ChaCha8Rng, k: usize) -> ThermalInput {
    let w = DMatrix::from_fn(k, k, |_, _| complex_gaussian(rng));
    let mut rho = &w * w.adjoint() + CMatrix::identity(k, k) * c64(0.25 * k as f64, 0.0);
    let tr = rho.trace();
    rho /= tr;
    rho = (&rho + rho.adjoint()) * c64(0.5, 0.0);
    ThermalInput { k, rho }
}

/// Deterministic random Itô algebra; always passes validation.
pub fn random_algebra(seed: u64, kind: RandomKind) -> Result<ItoAlgebraSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        RandomKind::Vacuum { m } => {
            if m == 0 {
                return Err(ItoError::InvalidParameter("m must be >= 1".into()));
            }
            vacuum(&random_vacuum_input(&mut rng, m))
        }
        RandomKind::Thermal { k } => {
            if k == 0 {
                return Err(ItoError::InvalidParameter("k must be >= 1".into()));
            }
            thermal(&random_thermal_input(&mut rng, k))
        }
        RandomKind::Mixed { m, k, d } => {
            if m == 0 || k == 0 {
                return Err(ItoError::InvalidParameter("m and k must be >= 1".into()));
            }
            let v = vacuum(&random_vacuum_input(&mut rng, m))?;
            let t = thermal(&random_thermal_input(&mut rng, k))?;
            let mut s = orthogonal_sum(&v, &t)?;
            if d > 0 {
                s = orthogonal_sum(&s, &wiener(d))?;
            }
            Ok(s)
        }
    }
}

/// Named operator algebras on `ℂ^m` accepted by the builder syntax.
pub fn named_vacuum_algebra(name: &str, m: usize) -> Result<Vec<CMatrix>> {
    let unit = |a: usize, b: usize| {
        let mut e = CMatrix::zeros(m, m);
        e[(a, b)] = ONE;
        e
    };
    match name {
        "zero" => Ok(Vec::new()),
        "scalar" => Ok(vec![CMatrix::identity(m, m)]),
        "diagonal" => Ok((0..m).map(|a| unit(a, a)).collect()),
        "corner" => Ok(vec![unit(0, 0)]),
        "full" => Ok((0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| unit(a, b)).collect()),
        other => Err(ItoError::InvalidParameter(format!(
            "unknown vacuum algebra '{other}' (expected full|zero|diagonal|scalar|corner)"
        ))),
    }
}
