//! The four seminorms `‖a‖, ‖a‖₊, ‖a‖⁻, ‖a‖₊⁻` and checks of the B*-algebra
//! axioms they satisfy.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Element, ItoAlgebraSpec};
use crate::error::{ItoError, Result};
use crate::linalg::{self, c64, CMatrix, CVector};
use crate::representation::FundamentalRep;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Seminorms {
    /// Spectral norm of the GNS operator.
    pub op: f64,
    /// `√l(a★a)`.
    pub plus: f64,
    /// `√l(aa★)`.
    pub minus: f64,
    /// `|l(a)|`.
    pub plus_minus: f64,
}

pub fn seminorms_of(rep: &FundamentalRep, coords: &[Complex64]) -> Seminorms {
    Seminorms {
        op: linalg::spectral_norm(&rep.op_of(coords)),
        plus: rep.ket_of(coords).norm(),
        minus: rep.bra_of(coords).norm(),
        plus_minus: rep.spec().functional_coords(coords).norm(),
    }
}

pub fn seminorms(rep: &FundamentalRep, a: &Element) -> Result<Seminorms> {
    if a.spec_id() != rep.spec().id() {
        return Err(ItoError::SpecMismatch);
    }
    Ok(seminorms_of(rep, a.coords()))
}

/// Largest relative violations of the seminorm axioms over a sample.
#[derive(Debug, Clone, Serialize)]
pub struct SeminormReport {
    pub samples: usize,
    /// `‖b★‖ = ‖b‖`, `‖b★‖₊ = ‖b‖⁻`, `‖b★‖₊⁻ = ‖b‖₊⁻`.
    pub star_residual: f64,
    /// `‖ac‖ ≤ ‖a‖‖c‖`, `‖ac‖₊ ≤ ‖a‖‖c‖₊`, `‖ac‖⁻ ≤ ‖a‖⁻‖c‖`,
    /// `‖ac‖₊⁻ ≤ ‖a‖⁻‖c‖₊`.
    pub product_residual: f64,
    /// `‖a★a‖ = ‖a★‖‖a‖` and `‖a★a‖₊⁻ = ‖a★‖⁻‖a‖₊`.
    pub bstar_residual: f64,
    pub values: Vec<Seminorms>,
}

impl SeminormReport {
    pub fn max_violation(&self) -> f64 {
        self.star_residual.max(self.product_residual).max(self.bstar_residual)
    }
}

fn rel_eq(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1.0)
}

fn rel_le(x: f64, y: f64) -> f64 {
    (x - y).max(0.0) / x.abs().max(y.abs()).max(1.0)
}

/// Checks the star equalities, the product inequalities (on consecutive
/// sample pairs, cyclically) and the B*-equalities.
pub fn check_axioms(rep: &FundamentalRep, sample: &[Element]) -> Result<SeminormReport> {
    let spec = rep.spec();
    for a in sample {
        if a.spec_id() != spec.id() {
            return Err(ItoError::SpecMismatch);
        }
    }
    let values: Vec<Seminorms> = sample.par_iter().map(|a| seminorms_of(rep, a.coords())).collect();
    let count = sample.len();
    let per_element: Vec<(f64, f64, f64)> = (0..count)
        .into_par_iter()
        .map(|k| {
            let a = sample[k].coords();
            let c = sample[(k + 1) % count].coords();
            let na = values[k];
            let nc = values[(k + 1) % count];
            let star = spec.involve_coords(a);
            let ns = seminorms_of(rep, &star);
            let star_res = rel_eq(ns.op, na.op)
                .max(rel_eq(ns.plus, na.minus))
                .max(rel_eq(ns.plus_minus, na.plus_minus));

            let nac = seminorms_of(rep, &spec.mul_coords(a, c));
            let prod_res = rel_le(nac.op, na.op * nc.op)
                .max(rel_le(nac.plus, na.op * nc.plus))
                .max(rel_le(nac.minus, na.minus * nc.op))
                .max(rel_le(nac.plus_minus, na.minus * nc.plus));

            let nsa = seminorms_of(rep, &spec.mul_coords(&star, a));
            let b_res = rel_eq(nsa.op, ns.op * na.op).max(rel_eq(nsa.plus_minus, ns.minus * na.plus));
            (star_res, prod_res, b_res)
        })
        .collect();
    let fold = |f: fn(&(f64, f64, f64)) -> f64| per_element.iter().map(f).fold(0.0, f64::max);
    Ok(SeminormReport {
        samples: count,
        star_residual: fold(|t| t.0),
        product_residual: fold(|t| t.1),
        bstar_residual: fold(|t| t.2),
        values,
    })
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c64(re, im)
        })
        .collect()
}

/// Complex-Gaussian random elements, deterministic in `seed`.
pub fn random_elements(spec: &ItoAlgebraSpec, count: usize, seed: u64) -> Vec<Element> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| spec.element(gaussian_vec(&mut rng, spec.dim())).expect("dimension matches"))
        .collect()
}

/// Quadratic and bilinear forms for `|l(c′ac)| / (‖c′‖⁻‖c‖₊)`.
struct RatioForms {
    /// `M[j][k] = l(a_j a a_k)`.
    m: CMatrix,
    /// `‖c‖₊² = c†Gc`.
    g: CMatrix,
    /// `‖c′‖⁻² = c′ᵀ H conj(c′)`, `H[i][j] = l(a_i a_j★)`.
    h: CMatrix,
}

impl RatioForms {
    fn new(spec: &ItoAlgebraSpec, a: &[Complex64]) -> Self {
        let n = spec.dim();
        let unit = |i: usize| crate::algebra::unit(n, i);
        let m = CMatrix::from_fn(n, n, |j, k| {
            let ja = spec.mul_coords(&unit(j), a);
            spec.functional_coords(&spec.mul_coords(&ja, &unit(k)))
        });
        let h = CMatrix::from_fn(n, n, |i, j| {
            let star = spec.involve_coords(&unit(j));
            spec.functional_coords(&spec.mul_coords(&unit(i), &star))
        });
        RatioForms {
            m,
            g: spec.gram_matrix(),
            h,
        }
    }

    fn ratio(&self, cp: &CVector, c: &CVector) -> f64 {
        let num = (cp.transpose() * &self.m * c)[(0, 0)].norm();
        let plus2 = (c.adjoint() * &self.g * c)[(0, 0)].re;
        let minus2 = (cp.transpose() * &self.h * cp.map(|z| z.conj()))[(0, 0)].re;
        let denom = (plus2.max(0.0) * minus2.max(0.0)).sqrt();
        // guard against rounding noise divided by a vanishing denominator
        if denom <= 1e-8 * cp.norm() * c.norm() {
            return 0.0;
        }
        num / denom
    }
}

const CHAINS: usize = 8;

/// Stochastic maximization of `|l(c′ac)| / (‖c′‖⁻‖c‖₊)` over `c, c′`, a lower
/// bound for `‖a‖`. Uses independent hill-climbing chains seeded from
/// random complex-Gaussian pairs; `trials` counts ratio evaluations.
pub fn boundedness_lower_bound(rep: &FundamentalRep, a: &Element, trials: usize, seed: u64) -> Result<f64> {
    let spec = rep.spec();
    if a.spec_id() != spec.id() {
        return Err(ItoError::SpecMismatch);
    }
    let n = spec.dim();
    let forms = RatioForms::new(spec, a.coords());
    let per_chain = (trials / CHAINS).max(1);
    let best = (0..CHAINS as u64)
        .into_par_iter()
        .map(|chain| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chain);
            let draw = |rng: &mut ChaCha8Rng| CVector::from_vec(gaussian_vec(rng, n));
            let warmup = (per_chain / 10).max(1);
            let (mut bp, mut bc) = (draw(&mut rng), draw(&mut rng));
            let mut best = forms.ratio(&bp, &bc);
            for _ in 1..warmup {
                let (p, c) = (draw(&mut rng), draw(&mut rng));
                let r = forms.ratio(&p, &c);
                if r > best {
                    (bp, bc, best) = (p, c, r);
                }
            }
            let mut step = 0.5;
            for _ in warmup..per_chain {
                let p = &bp + draw(&mut rng) * c64(step * bp.norm() / (n as f64).sqrt(), 0.0);
                let c = &bc + draw(&mut rng) * c64(step * bc.norm() / (n as f64).sqrt(), 0.0);
                let r = forms.ratio(&p, &c);
                if r > best {
                    let (pn, cn) = (p.norm(), c.norm());
                    (bp, bc, best) = (p / c64(pn, 0.0), c / c64(cn, 0.0), r);
                    step = (step * 1.5).min(2.0);
                } else {
                    step = (step * 0.95).max(1e-6);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// Dimension of the joint kernel of all four seminorms (zero when they
/// separate points).
pub fn separation_defect(rep: &FundamentalRep) -> usize {
    let spec = rep.spec();
    let n = spec.dim();
    let r = rep.rank();
    let k = rep.kolmogorov();
    let bra = (k * spec.involution_matrix().transpose()).map(|z| z.conj());
    let mut stacked = CMatrix::zeros(r * r + 2 * r + 1, n);
    for (j, op) in rep.gns().iter().enumerate() {
        for (idx, z) in op.iter().enumerate() {
            stacked[(idx, j)] = *z;
        }
        for row in 0..r {
            stacked[(r * r + row, j)] = k[(row, j)];
            stacked[(r * r + r + row, j)] = bra[(row, j)];
        }
        stacked[(r * r + 2 * r, j)] = spec.functional_values()[j];
    }
    linalg::null_space(&stacked, 1e-9).ncols()
}
