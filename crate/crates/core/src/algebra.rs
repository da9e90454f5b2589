//! Finite-dimensional Itô ★-algebras given by structure constants.
//!
//! An algebra of dimension `n` is described in a fixed basis `a_0..a_{n-1}`
//! by a dense structure tensor (`a_i a_j = Σ_k c[i][j][k] a_k`), a matrix
//! `S` for the conjugate-linear involution (`a_i★ = Σ_j S[i][j] a_j`), the
//! coordinates of the death element θ and the values `ℓ[i] = l(a_i)` of the
//! mean-value functional.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::Serialize;

use crate::builders::Provenance;
use crate::error::{ItoError, Result};
use crate::linalg::{self, CMatrix, ABS_FLOOR, ONE, ZERO};

/// Default relative tolerance for algebraic residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

static NEXT_SPEC_ID: AtomicU64 = AtomicU64::new(1);

/// Identity of a spec instance; elements of different specs never combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpecId(u64);

impl SpecId {
    fn fresh() -> Self {
        SpecId(NEXT_SPEC_ID.fetch_add(1, Ordering::Relaxed))
    }
}

/// Full description of a finite-dimensional Itô ★-algebra.
#[derive(Debug, Clone)]
pub struct ItoAlgebraSpec {
    id: SpecId,
    dim: usize,
    labels: Vec<String>,
    structure: Vec<Complex64>,
    involution: CMatrix,
    death: Vec<Complex64>,
    functional: Vec<Complex64>,
    tol: f64,
    provenance: Provenance,
}

/// Coordinate vector of an algebra element, tagged with its owning spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    spec: SpecId,
    coords: Vec<Complex64>,
}

impl Element {
    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.coords
    }

    pub fn spec_id(&self) -> SpecId {
        self.spec
    }

    pub fn scale(&self, s: Complex64) -> Element {
        Element {
            spec: self.spec,
            coords: linalg::vec_scale(&self.coords, s),
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        if self.spec != other.spec {
            return Err(ItoError::SpecMismatch);
        }
        Ok(Element {
            spec: self.spec,
            coords: linalg::vec_add(&self.coords, &other.coords),
        })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.scale(-ONE))
    }

    /// Largest coordinate distance to `other`.
    pub fn distance(&self, other: &Element) -> f64 {
        linalg::max_abs_slice(&linalg::vec_sub(&self.coords, &other.coords))
    }
}

/// Named axiom of an Itô ★-algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Axiom {
    Associativity,
    InvolutionInvolutive,
    InvolutionAntiMultiplicative,
    DeathAnnihilates,
    DeathSelfAdjoint,
    FunctionalHermitian,
    Normalization,
    GramHermitian,
    GramPositivity,
}

impl Axiom {
    /// Diagnostic name used by the command-line front end.
    pub fn violation_name(self) -> String {
        format!("{self:?}Violation")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    /// Basis indices witnessing the violation (triple, pair or single index).
    pub witness: Vec<usize>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort_by(|a, b| a.axiom.cmp(&b.axiom).then_with(|| a.witness.cmp(&b.witness)));
        ValidationReport {
            passed: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

fn check_finite(name: &str, values: &[Complex64]) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(ItoError::Shape(format!("{name} contains non-finite entries")))
    }
}

impl ItoAlgebraSpec {
    /// Builds a spec from dense parts. `structure` is indexed as
    /// `(i * n + j) * n + k`.
    pub fn new(
        labels: Vec<String>,
        structure: Vec<Complex64>,
        involution: CMatrix,
        death: Vec<Complex64>,
        functional: Vec<Complex64>,
        tol: f64,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(ItoError::Shape("dimension must be positive".into()));
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != n {
            return Err(ItoError::Shape("labels must be distinct".into()));
        }
        if structure.len() != n * n * n {
            return Err(ItoError::Shape(format!(
                "structure tensor has {} entries, expected {}",
                structure.len(),
                n * n * n
            )));
        }
        if involution.shape() != (n, n) {
            return Err(ItoError::Shape(format!(
                "involution is {:?}, expected {n}x{n}",
                involution.shape()
            )));
        }
        if death.len() != n || functional.len() != n {
            return Err(ItoError::Shape(format!(
                "death/functional lengths {}/{} differ from dimension {n}",
                death.len(),
                functional.len()
            )));
        }
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(ItoError::Shape(format!("tolerance {tol} is not a non-negative real")));
        }
        check_finite("structure", &structure)?;
        check_finite("involution", involution.as_slice())?;
        check_finite("death", &death)?;
        check_finite("functional", &functional)?;
        Ok(ItoAlgebraSpec {
            id: SpecId::fresh(),
            dim: n,
            labels,
            structure,
            involution,
            death,
            functional,
            tol,
            provenance: Provenance::Custom,
        })
    }

    pub fn id(&self) -> SpecId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Threshold for an absolute residual of a quantity of magnitude `scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        (self.tol * scale).max(ABS_FLOOR)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn structure_coeff(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let n = self.dim;
        self.structure[(i * n + j) * n + k]
    }

    /// Coordinates of the basis product `a_i a_j`.
    pub fn basis_product(&self, i: usize, j: usize) -> &[Complex64] {
        let n = self.dim;
        &self.structure[(i * n + j) * n..(i * n + j + 1) * n]
    }

    pub fn structure_dense(&self) -> &[Complex64] {
        &self.structure
    }

    pub fn involution_matrix(&self) -> &CMatrix {
        &self.involution
    }

    pub fn death(&self) -> &[Complex64] {
        &self.death
    }

    pub fn functional_values(&self) -> &[Complex64] {
        &self.functional
    }

    /// Same algebra with a different residual tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Copy with one structure constant replaced (a different algebra).
    pub fn with_structure_entry(&self, i: usize, j: usize, k: usize, value: Complex64) -> Self {
        let mut out = self.clone();
        let n = self.dim;
        out.structure[(i * n + j) * n + k] = value;
        out.id = SpecId::fresh();
        out.provenance = Provenance::Custom;
        out
    }

    /// Copy with one functional value replaced (a different algebra).
    pub fn with_functional_entry(&self, i: usize, value: Complex64) -> Self {
        let mut out = self.clone();
        out.functional[i] = value;
        out.id = SpecId::fresh();
        out.provenance = Provenance::Custom;
        out
    }

    pub fn max_structure_entry(&self) -> f64 {
        linalg::max_abs_slice(&self.structure)
    }

    // ---- elements ----

    pub fn element(&self, coords: Vec<Complex64>) -> Result<Element> {
        if coords.len() != self.dim {
            return Err(ItoError::Shape(format!(
                "element has {} coordinates, expected {}",
                coords.len(),
                self.dim
            )));
        }
        Ok(Element {
            spec: self.id,
            coords,
        })
    }

    pub fn zero(&self) -> Element {
        Element {
            spec: self.id,
            coords: vec![ZERO; self.dim],
        }
    }

    pub fn basis(&self, i: usize) -> Element {
        let mut coords = vec![ZERO; self.dim];
        coords[i] = ONE;
        Element {
            spec: self.id,
            coords,
        }
    }

    pub fn theta(&self) -> Element {
        Element {
            spec: self.id,
            coords: self.death.clone(),
        }
    }

    /// Index of the basis vector carrying θ when θ is a basis unit vector.
    pub fn death_index(&self) -> Option<usize> {
        let idx = (0..self.dim).find(|&i| (self.death[i] - ONE).norm() <= ABS_FLOOR)?;
        let others_zero = self
            .death
            .iter()
            .enumerate()
            .all(|(i, z)| i == idx || z.norm() <= ABS_FLOOR);
        others_zero.then_some(idx)
    }

    fn check(&self, a: &Element) -> Result<()> {
        if a.spec != self.id {
            return Err(ItoError::SpecMismatch);
        }
        Ok(())
    }

    // ---- raw coordinate kernels ----

    pub fn mul_coords(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for (i, ai) in a.iter().enumerate() {
            if *ai == ZERO {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if *bj == ZERO {
                    continue;
                }
                let w = ai * bj;
                let row = &self.structure[(i * n + j) * n..(i * n + j + 1) * n];
                for (o, c) in out.iter_mut().zip(row) {
                    *o += w * c;
                }
            }
        }
        out
    }

    pub fn involve_coords(&self, a: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for (i, ai) in a.iter().enumerate() {
            if *ai == ZERO {
                continue;
            }
            let c = ai.conj();
            for (j, o) in out.iter_mut().enumerate() {
                *o += c * self.involution[(i, j)];
            }
        }
        out
    }

    pub fn functional_coords(&self, a: &[Complex64]) -> Complex64 {
        a.iter().zip(&self.functional).map(|(x, l)| x * l).sum()
    }

    // ---- element operations ----

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(Element {
            spec: self.id,
            coords: self.mul_coords(&a.coords, &b.coords),
        })
    }

    pub fn involve(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        Ok(Element {
            spec: self.id,
            coords: self.involve_coords(&a.coords),
        })
    }

    pub fn functional(&self, a: &Element) -> Result<Complex64> {
        self.check(a)?;
        Ok(self.functional_coords(&a.coords))
    }

    /// Matrix of left multiplication by `a_i` on coordinates:
    /// `L[k][j] = c[i][j][k]`.
    pub fn left_mult_matrix(&self, i: usize) -> CMatrix {
        let n = self.dim;
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            for (k, c) in self.basis_product(i, j).iter().enumerate() {
                l[(k, j)] = *c;
            }
        }
        l
    }

    /// Left multiplication matrix of an arbitrary element.
    pub fn left_mult_matrix_of(&self, a: &[Complex64]) -> CMatrix {
        let n = self.dim;
        let mut l = CMatrix::zeros(n, n);
        for (i, ai) in a.iter().enumerate() {
            if *ai == ZERO {
                continue;
            }
            for j in 0..n {
                for (k, c) in self.basis_product(i, j).iter().enumerate() {
                    l[(k, j)] += ai * c;
                }
            }
        }
        l
    }

    /// `G[i][j] = l(a_i★ a_j)`.
    pub fn gram_matrix(&self) -> CMatrix {
        let n = self.dim;
        let mut g = CMatrix::zeros(n, n);
        for i in 0..n {
            let star: Vec<Complex64> = (0..n).map(|m| self.involution[(i, m)]).collect();
            for j in 0..n {
                let mut acc = ZERO;
                for (m, s) in star.iter().enumerate() {
                    if *s == ZERO {
                        continue;
                    }
                    acc += s * self.functional_coords(self.basis_product(m, j));
                }
                g[(i, j)] = acc;
            }
        }
        g
    }

    /// First basis pair whose products do not commute within tolerance.
    pub fn commutativity_defect(&self) -> Option<(usize, usize, f64)> {
        let scale = self.max_structure_entry();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let d = linalg::max_abs_slice(&linalg::vec_sub(
                    self.basis_product(i, j),
                    self.basis_product(j, i),
                ));
                if d > self.threshold(scale) {
                    return Some((i, j, d));
                }
            }
        }
        None
    }

    pub fn is_commutative(&self) -> bool {
        self.commutativity_defect().is_none()
    }

    /// Re-expresses the algebra in the basis `b_j = Σ_i basis[(i, j)] a_i`.
    pub fn change_basis(&self, basis: &CMatrix, labels: Option<Vec<String>>) -> Result<Self> {
        let n = self.dim;
        if basis.shape() != (n, n) {
            return Err(ItoError::Shape("basis change must be square".into()));
        }
        let inv = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| ItoError::InvalidParameter("basis change is singular".into()))?;
        let col = |j: usize| -> Vec<Complex64> { basis.column(j).iter().copied().collect() };
        let to_new = |v: &[Complex64]| -> Vec<Complex64> {
            let x = &inv * linalg::CVector::from_column_slice(v);
            x.iter().copied().collect()
        };
        let mut structure = vec![ZERO; n * n * n];
        for i in 0..n {
            let bi = col(i);
            for j in 0..n {
                let p = to_new(&self.mul_coords(&bi, &col(j)));
                structure[(i * n + j) * n..(i * n + j + 1) * n].copy_from_slice(&p);
            }
        }
        let mut involution = CMatrix::zeros(n, n);
        for i in 0..n {
            let s = to_new(&self.involve_coords(&col(i)));
            for (j, z) in s.into_iter().enumerate() {
                involution[(i, j)] = z;
            }
        }
        let functional = (0..n).map(|i| self.functional_coords(&col(i))).collect();
        let death = to_new(&self.death);
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| format!("b{i}")).collect());
        ItoAlgebraSpec::new(labels, structure, involution, death, functional, self.tol)
    }

    // ---- validation ----

    /// Checks every axiom of an Itô ★-algebra and lists concrete witnesses.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim;
        let mut out = Vec::new();
        let cmax = self.max_structure_entry();
        let smax = linalg::max_abs(&self.involution);
        let lmax = linalg::max_abs_slice(&self.functional);
        let tmax = linalg::max_abs_slice(&self.death);

        // (a_i a_j) a_k = a_i (a_j a_k)
        let lefts: Vec<CMatrix> = (0..n).map(|i| self.left_mult_matrix(i)).collect();
        for i in 0..n {
            for j in 0..n {
                let ij = self.basis_product(i, j);
                for k in 0..n {
                    let lhs = self.mul_coords(ij, &unit(n, k));
                    let jk = self.basis_product(j, k);
                    let rhs = &lefts[i] * linalg::CVector::from_column_slice(jk);
                    let res = lhs
                        .iter()
                        .zip(rhs.iter())
                        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()));
                    if res > self.threshold(cmax * cmax) {
                        out.push(Violation {
                            axiom: Axiom::Associativity,
                            witness: vec![i, j, k],
                            residual: res,
                        });
                    }
                }
            }
        }

        // (a★)★ = a  <=>  conj(S) S = 1
        let ss = self.involution.map(|z| z.conj()) * &self.involution;
        for i in 0..n {
            let res = (0..n).fold(0.0_f64, |acc, j| {
                let target = if i == j { ONE } else { ZERO };
                acc.max((ss[(i, j)] - target).norm())
            });
            if res > self.threshold(smax * smax) {
                out.push(Violation {
                    axiom: Axiom::InvolutionInvolutive,
                    witness: vec![i],
                    residual: res,
                });
            }
        }

        // (a_i a_j)★ = a_j★ a_i★
        let stars: Vec<Vec<Complex64>> = (0..n).map(|i| self.involve_coords(&unit(n, i))).collect();
        for i in 0..n {
            for j in 0..n {
                let lhs = self.involve_coords(self.basis_product(i, j));
                let rhs = self.mul_coords(&stars[j], &stars[i]);
                let res = linalg::max_abs_slice(&linalg::vec_sub(&lhs, &rhs));
                if res > self.threshold(cmax * smax.max(smax * smax)) {
                    out.push(Violation {
                        axiom: Axiom::InvolutionAntiMultiplicative,
                        witness: vec![i, j],
                        residual: res,
                    });
                }
            }
        }

        // θ a = 0 = a θ
        for i in 0..n {
            let e = unit(n, i);
            let res = linalg::max_abs_slice(&self.mul_coords(&self.death, &e))
                .max(linalg::max_abs_slice(&self.mul_coords(&e, &self.death)));
            if res > self.threshold(cmax * tmax) {
                out.push(Violation {
                    axiom: Axiom::DeathAnnihilates,
                    witness: vec![i],
                    residual: res,
                });
            }
        }
        let res = linalg::max_abs_slice(&linalg::vec_sub(&self.involve_coords(&self.death), &self.death));
        if res > self.threshold(tmax * smax.max(1.0)) {
            out.push(Violation {
                axiom: Axiom::DeathSelfAdjoint,
                witness: vec![],
                residual: res,
            });
        }

        // l(a★) = conj(l(a)), l(θ) = 1
        for (i, star) in stars.iter().enumerate() {
            let res = (self.functional_coords(star) - self.functional[i].conj()).norm();
            if res > self.threshold(lmax * smax.max(1.0)) {
                out.push(Violation {
                    axiom: Axiom::FunctionalHermitian,
                    witness: vec![i],
                    residual: res,
                });
            }
        }
        let res = (self.functional_coords(&self.death) - ONE).norm();
        if res > self.threshold(1.0) {
            out.push(Violation {
                axiom: Axiom::Normalization,
                witness: vec![],
                residual: res,
            });
        }

        // Gram matrix Hermitian PSD
        let g = self.gram_matrix();
        let gmax = linalg::max_abs(&g);
        for i in 0..n {
            for j in i..n {
                let res = (g[(i, j)] - g[(j, i)].conj()).norm();
                if res > self.threshold(gmax) {
                    out.push(Violation {
                        axiom: Axiom::GramHermitian,
                        witness: vec![i, j],
                        residual: res,
                    });
                }
            }
        }
        let (vals, vecs) = linalg::hermitian_eigen(&g);
        let lmax_eig = vals.first().copied().unwrap_or(0.0).abs();
        let lmin = vals.last().copied().unwrap_or(0.0);
        let gnorm = vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(lmax_eig);
        if lmin < -self.threshold(gnorm) {
            let last = vecs.column(n - 1);
            let witness = (0..n)
                .max_by(|&a, &b| last[a].norm().total_cmp(&last[b].norm()))
                .into_iter()
                .collect();
            out.push(Violation {
                axiom: Axiom::GramPositivity,
                witness,
                residual: -lmin,
            });
        }

        ValidationReport::from_violations(out)
    }
}

pub(crate) fn unit(n: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; n];
    v[i] = ONE;
    v
}
