//! Path simulation of the classical noise realized by a commutative Itô
//! algebra: independent Wiener directions plus compensated Poisson
//! directions, and empirical checks of the Itô multiplication table.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Element, ItoAlgebraSpec, SpecId};
use crate::error::{ItoError, Result};
use crate::linalg::{self, c64, CMatrix, CVector, ZERO};
use crate::representation::build_rep;
use crate::structure::Decomposition;

/// Fixed seed for the random combination used in joint diagonalization.
const DIAG_SEED: u64 = 0x5eed_d1a6;

/// A compensated Poisson direction `λ(a) (N_t − ν t)`.
#[derive(Debug, Clone, Serialize)]
pub struct PoissonDirection {
    /// Jump size `λ(a_i)` contributed by each basis element.
    pub jumps: Vec<Complex64>,
    /// Intensity `ν` of the counting process.
    pub rate: f64,
}

/// A standard Wiener direction with loadings `η(a_i)`.
#[derive(Debug, Clone, Serialize)]
pub struct WienerDirection {
    pub loadings: Vec<Complex64>,
}

/// Lévy–Khinchin data of a commutative algebra:
/// `Λ(t, a) = drift(a) t + Σ_j η_j(a) w_j(t) + Σ_k λ_k(a) N_k(t)`
/// with `drift(a) = l(a) − Σ_k ν_k λ_k(a)`.
#[derive(Debug, Clone, Serialize)]
pub struct CanonicalForm {
    #[serde(skip)]
    spec_id: Option<SpecId>,
    pub labels: Vec<String>,
    /// `l(a_i)`.
    pub mean: Vec<Complex64>,
    /// Coefficient of `t` in `Λ(t, a_i)`.
    pub drift: Vec<Complex64>,
    pub wiener: Vec<WienerDirection>,
    pub poisson: Vec<PoissonDirection>,
    /// Largest off-diagonal entry left by the joint diagonalization.
    pub diagonalization_residual: f64,
    /// Largest coordinate error when the structure tensor is rebuilt from
    /// the form.
    pub reconstruction_residual: f64,
}

fn dot(coeffs: &[Complex64], coords: &[Complex64]) -> Complex64 {
    coeffs.iter().zip(coords).map(|(x, a)| x * a).sum()
}

impl CanonicalForm {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn drift_of(&self, a: &[Complex64]) -> Complex64 {
        dot(&self.drift, a)
    }

    pub fn wiener_loadings(&self, a: &[Complex64]) -> Vec<Complex64> {
        self.wiener.iter().map(|w| dot(&w.loadings, a)).collect()
    }

    pub fn jump_sizes(&self, a: &[Complex64]) -> Vec<Complex64> {
        self.poisson.iter().map(|p| dot(&p.jumps, a)).collect()
    }

    /// Feature vector `(l(a), η(a), λ(a))`, injective on a separated
    /// commutative algebra.
    fn features(&self, a: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![dot(&self.mean, a)];
        out.extend(self.wiener_loadings(a));
        out.extend(self.jump_sizes(a));
        out
    }

    /// Features of `ab` predicted by the Itô table:
    /// `l(ab) = Σ η_j(a)η_j(b) + Σ ν_k λ_k(a)λ_k(b)`, `η(ab) = 0`,
    /// `λ(ab) = λ(a)λ(b)`.
    fn product_features(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let (ea, eb) = (self.wiener_loadings(a), self.wiener_loadings(b));
        let (la, lb) = (self.jump_sizes(a), self.jump_sizes(b));
        let mean: Complex64 = ea.iter().zip(&eb).map(|(x, y)| x * y).sum::<Complex64>()
            + la.iter()
                .zip(&lb)
                .zip(&self.poisson)
                .map(|((x, y), p)| x * y * p.rate)
                .sum::<Complex64>();
        let mut out = vec![mean];
        out.extend(std::iter::repeat_n(ZERO, self.wiener.len()));
        out.extend(la.iter().zip(&lb).map(|(x, y)| x * y));
        out
    }
}

/// Jointly diagonalizes a commuting family of normal matrices; returns the
/// unitary and the largest off-diagonal residual.
fn joint_diagonalize(family: &[CMatrix]) -> (CMatrix, f64) {
    let size = family.first().map_or(0, |m| m.nrows());
    let mut rng = ChaCha8Rng::seed_from_u64(DIAG_SEED);
    let mut h = CMatrix::zeros(size, size);
    for m in family {
        let herm = (m + m.adjoint()) * c64(0.5, 0.0);
        let anti = (m - m.adjoint()) * c64(0.0, -0.5);
        let (x, y): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        h += herm * c64(x, 0.0) + anti * c64(y, 0.0);
    }
    let (_, v) = linalg::hermitian_eigen(&h);
    let mut residual: f64 = 0.0;
    for m in family {
        let d = v.adjoint() * m * &v;
        for i in 0..size {
            for j in 0..size {
                if i != j {
                    residual = residual.max(d[(i, j)].norm());
                }
            }
        }
    }
    (v, residual)
}

pub fn canonical_form(spec: &ItoAlgebraSpec, dec: &Decomposition) -> Result<CanonicalForm> {
    if let Some((i, j, residual)) = spec.commutativity_defect() {
        return Err(ItoError::NotCommutative { i, j, residual });
    }
    let n = spec.dim();
    let rep = build_rep(spec)?;
    let f = dec.idempotent.coords();

    // Poisson directions: eigenvectors of the GNS image restricted to range(E)
    let e = rep.op_of(f);
    let range = linalg::range_basis(&e, 1e-9);
    let restricted: Vec<CMatrix> = rep.gns().iter().map(|m| range.adjoint() * m * &range).collect();
    let (v, diag_res) = joint_diagonalize(&restricted);
    let scale = restricted.iter().map(linalg::max_abs).fold(1.0, f64::max);
    if diag_res > spec.threshold(scale) {
        return Err(ItoError::DiagonalizationFailed { residual: diag_res });
    }
    let kf = rep.ket_of(f);
    let mut poisson = Vec::new();
    for k in 0..range.ncols() {
        let u: CVector = &range * v.column(k);
        let jumps = rep
            .gns()
            .iter()
            .map(|m| (u.adjoint() * m * &u)[(0, 0)])
            .collect();
        let rate = u.dotc(&kf).norm_sqr();
        poisson.push(PoissonDirection { jumps, rate });
    }

    // Wiener directions: l-orthonormal self-adjoint basis of the Brownian part
    let mut herm: Vec<Vec<Complex64>> = Vec::new();
    for b in linalg::column_vecs(&dec.brownian_basis) {
        let bs = spec.involve_coords(&b);
        herm.push(linalg::vec_scale(&linalg::vec_add(&b, &bs), c64(0.5, 0.0)));
        herm.push(linalg::vec_scale(&linalg::vec_sub(&b, &bs), c64(0.0, -0.5)));
    }
    let m = herm.len();
    let gamma = DMatrix::<f64>::from_fn(m, m, |p, q| spec.functional_coords(&spec.mul_coords(&herm[p], &herm[q])).re);
    let mut wiener = Vec::new();
    if m > 0 {
        let eig = gamma.clone().symmetric_eigen();
        let top = eig.eigenvalues.iter().fold(0.0_f64, |acc, &x| acc.max(x));
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for &k in &order {
            let lam = eig.eigenvalues[k];
            if lam <= (1e-10 * top).max(linalg::ABS_FLOOR) {
                continue;
            }
            let mut d = vec![ZERO; n];
            for p in 0..m {
                let w = eig.eigenvectors[(p, k)] / lam.sqrt();
                for (di, hi) in d.iter_mut().zip(&herm[p]) {
                    *di += hi * w;
                }
            }
            let loadings = dec
                .brownian_part
                .iter()
                .map(|b| spec.functional_coords(&spec.mul_coords(&d, b.coords())))
                .collect();
            wiener.push(WienerDirection { loadings });
        }
    }

    let mean: Vec<Complex64> = spec.functional_values().to_vec();
    let drift = (0..n)
        .map(|i| mean[i] - poisson.iter().map(|p| p.jumps[i] * p.rate).sum::<Complex64>())
        .collect();
    let mut form = CanonicalForm {
        spec_id: Some(spec.id()),
        labels: spec.labels().to_vec(),
        mean,
        drift,
        wiener,
        poisson,
        diagonalization_residual: diag_res,
        reconstruction_residual: 0.0,
    };
    form.reconstruction_residual = reconstruction_residual(spec, &form);
    Ok(form)
}

/// Rebuilds every basis product from the form's features and compares with
/// the structure tensor.
fn reconstruction_residual(spec: &ItoAlgebraSpec, form: &CanonicalForm) -> f64 {
    let n = spec.dim();
    let unit = |i: usize| crate::algebra::unit(n, i);
    let feats: Vec<Vec<Complex64>> = (0..n).map(|i| form.features(&unit(i))).collect();
    let rows = feats[0].len();
    let phi = CMatrix::from_fn(rows, n, |r, i| feats[i][r]);
    let mut targets = CMatrix::zeros(rows, n * n);
    for i in 0..n {
        for j in 0..n {
            let p = form.product_features(&unit(i), &unit(j));
            for (r, z) in p.into_iter().enumerate() {
                targets[(r, i * n + j)] = z;
            }
        }
    }
    let coords = linalg::lstsq(&phi, &targets, 1e-12);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for (k, c) in spec.basis_product(i, j).iter().enumerate() {
                worst = worst.max((coords[(k, i * n + j)] - c).norm());
            }
        }
    }
    worst
}

/// One simulated path: Wiener increments on a uniform grid and event-driven
/// Poisson jump times. Element paths are evaluated on demand.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub form: Arc<CanonicalForm>,
    pub seed: u64,
    pub path_index: u64,
    pub horizon: f64,
    pub mesh: f64,
    /// `wiener_increments[j][m] = w_j(t_{m+1}) − w_j(t_m)`.
    pub wiener_increments: Vec<Vec<f64>>,
    /// Sorted jump times in `(0, T]` for each Poisson direction.
    pub jump_times: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub mesh: f64,
    pub paths: usize,
    pub seed: u64,
}

impl SimConfig {
    /// Number of grid steps; the mesh is adjusted to divide the horizon.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.mesh).round() as usize).max(1)
    }
}

fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample_path(form: &Arc<CanonicalForm>, cfg: &SimConfig, index: u64) -> PathBundle {
    let steps = cfg.steps();
    let mesh = cfg.horizon / steps as f64;
    let sd = mesh.sqrt();
    let mut rng = path_rng(cfg.seed, index);
    let wiener_increments = form
        .wiener
        .iter()
        .map(|_| {
            (0..steps)
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let jump_times = form
        .poisson
        .iter()
        .map(|p| {
            let mut times = Vec::new();
            if p.rate > 0.0 {
                let clock = Exp::new(p.rate).expect("positive rate");
                let mut t = 0.0;
                loop {
                    t += rng.sample::<f64, _>(clock);
                    if t > cfg.horizon {
                        break;
                    }
                    times.push(t);
                }
            }
            times
        })
        .collect();
    PathBundle {
        form: Arc::clone(form),
        seed: cfg.seed,
        path_index: index,
        horizon: cfg.horizon,
        mesh,
        wiener_increments,
        jump_times,
    }
}

/// Independent paths, deterministic in `(seed, path index)` regardless of
/// the thread schedule.
pub fn sample_paths(form: &Arc<CanonicalForm>, cfg: &SimConfig) -> Result<Vec<PathBundle>> {
    if !(cfg.horizon > 0.0 && cfg.horizon.is_finite()) || !(cfg.mesh > 0.0 && cfg.mesh.is_finite()) {
        return Err(ItoError::InvalidParameter("horizon and mesh must be positive".into()));
    }
    if cfg.paths == 0 {
        return Err(ItoError::InvalidParameter("need at least one path".into()));
    }
    Ok((0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| sample_path(form, cfg, i))
        .collect())
}

impl PathBundle {
    pub fn steps(&self) -> usize {
        self.wiener_increments
            .first()
            .map_or_else(|| (self.horizon / self.mesh).round() as usize, |w| w.len())
    }

    pub fn jump_count(&self, k: usize) -> usize {
        self.jump_times[k].len()
    }

    /// `Λ(T, a)`.
    pub fn terminal_value(&self, a: &[Complex64]) -> Complex64 {
        let form = &self.form;
        let mut v = form.drift_of(a) * self.horizon;
        for (eta, inc) in form.wiener_loadings(a).iter().zip(&self.wiener_increments) {
            v += eta * inc.iter().sum::<f64>();
        }
        for (lam, times) in form.jump_sizes(a).iter().zip(&self.jump_times) {
            v += lam * times.len() as f64;
        }
        v
    }

    /// `Λ(t_m, a)` on the grid `t_m = m Δ`, `m = 0..=steps`.
    pub fn path(&self, a: &[Complex64]) -> Vec<Complex64> {
        let form = &self.form;
        let steps = self.steps();
        let drift = form.drift_of(a);
        let eta = form.wiener_loadings(a);
        let lam = form.jump_sizes(a);
        let mut out = Vec::with_capacity(steps + 1);
        let mut w = vec![0.0; eta.len()];
        let mut cursor = vec![0usize; lam.len()];
        for m in 0..=steps {
            let t = if m == steps { self.horizon } else { m as f64 * self.mesh };
            if m > 0 {
                for (wj, inc) in w.iter_mut().zip(&self.wiener_increments) {
                    *wj += inc[m - 1];
                }
            }
            let mut v = drift * t;
            for (e, wj) in eta.iter().zip(&w) {
                v += e * wj;
            }
            for (k, l) in lam.iter().enumerate() {
                while cursor[k] < self.jump_times[k].len() && self.jump_times[k][cursor[k]] <= t {
                    cursor[k] += 1;
                }
                v += l * cursor[k] as f64;
            }
            out.push(v);
        }
        out
    }

    /// Martingale part of the realized covariation of `Λ(a)` and `Λ(b)`:
    /// Wiener increments summed over the grid and Poisson jumps summed
    /// exactly over events. Finite-variation contributions vanish in the
    /// mesh limit and are left out.
    pub fn realized_covariation(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let form = &self.form;
        let (ea, eb) = (form.wiener_loadings(a), form.wiener_loadings(b));
        let mut qv = ZERO;
        for m in 0..self.steps() {
            let (mut da, mut db) = (ZERO, ZERO);
            for (j, inc) in self.wiener_increments.iter().enumerate() {
                da += ea[j] * inc[m];
                db += eb[j] * inc[m];
            }
            qv += da * db;
        }
        let (la, lb) = (form.jump_sizes(a), form.jump_sizes(b));
        for k in 0..self.jump_times.len() {
            qv += la[k] * lb[k] * self.jump_count(k) as f64;
        }
        qv
    }

    /// Same path on a grid of twice the mesh.
    pub fn coarsen(&self) -> Result<PathBundle> {
        if self.steps() % 2 != 0 {
            return Err(ItoError::InvalidParameter("odd number of steps cannot be coarsened".into()));
        }
        Ok(PathBundle {
            wiener_increments: self
                .wiener_increments
                .iter()
                .map(|inc| inc.chunks(2).map(|c| c[0] + c[1]).collect())
                .collect(),
            mesh: self.mesh * 2.0,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ItoTableCheck {
    pub pair: (String, String),
    pub paths: usize,
    /// Realized covariation per path.
    pub realized: Vec<Complex64>,
    /// `Λ(T, ab)` per path.
    pub predicted: Vec<Complex64>,
    pub max_abs_error: f64,
    pub rms_error: f64,
    /// Cross-path mean and standard error of the realized covariation,
    /// to compare with `l(ab) T`.
    pub mean_realized: Complex64,
    pub stderr: f64,
    pub expected_mean: Complex64,
}

fn check_bundles(spec: &ItoAlgebraSpec, bundles: &[PathBundle]) -> Result<()> {
    let first = bundles
        .first()
        .ok_or_else(|| ItoError::MismatchedBundle("no paths".into()))?;
    if first.form.spec_id != Some(spec.id()) {
        return Err(ItoError::MismatchedBundle("paths were generated from another spec".into()));
    }
    if bundles
        .iter()
        .any(|b| !Arc::ptr_eq(&b.form, &first.form) || b.steps() != first.steps() || b.horizon != first.horizon)
    {
        return Err(ItoError::MismatchedBundle("paths use different forms or grids".into()));
    }
    Ok(())
}

fn mean_and_stderr(values: &[Complex64]) -> (Complex64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn ito_table_check(spec: &ItoAlgebraSpec, bundles: &[PathBundle], a: &Element, b: &Element) -> Result<ItoTableCheck> {
    check_bundles(spec, bundles)?;
    let ab = spec.multiply(a, b)?;
    let (ac, bc, abc) = (a.coords(), b.coords(), ab.coords());
    let pairs: Vec<(Complex64, Complex64)> = bundles
        .par_iter()
        .map(|p| (p.realized_covariation(ac, bc), p.terminal_value(abc)))
        .collect();
    let realized: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let predicted: Vec<Complex64> = pairs.iter().map(|p| p.1).collect();
    let errors: Vec<f64> = pairs.iter().map(|(r, p)| (r - p).norm()).collect();
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    let rms_error = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
    let (mean_realized, stderr) = mean_and_stderr(&realized);
    let label = |x: &Element| describe(spec, x.coords());
    Ok(ItoTableCheck {
        pair: (label(a), label(b)),
        paths: bundles.len(),
        realized,
        predicted,
        max_abs_error,
        rms_error,
        mean_realized,
        stderr,
        expected_mean: spec.functional_coords(abc) * bundles[0].horizon,
    })
}

fn describe(spec: &ItoAlgebraSpec, coords: &[Complex64]) -> String {
    let nonzero: Vec<usize> = (0..coords.len()).filter(|&i| coords[i] != ZERO).collect();
    match nonzero.as_slice() {
        [i] if coords[*i] == c64(1.0, 0.0) => spec.labels()[*i].clone(),
        _ => "element".into(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanIncrementCheck {
    pub label: String,
    pub mean: Complex64,
    pub stderr: f64,
    pub expected: Complex64,
    pub passed: bool,
}

/// Compares the cross-path mean of `Λ(T, a)` with `l(a) T`, passing when
/// the gap is within three standard errors.
pub fn mean_increment_check(spec: &ItoAlgebraSpec, bundles: &[PathBundle], a: &Element) -> Result<MeanIncrementCheck> {
    check_bundles(spec, bundles)?;
    let values: Vec<Complex64> = bundles.par_iter().map(|p| p.terminal_value(a.coords())).collect();
    let (mean, stderr) = mean_and_stderr(&values);
    let expected = spec.functional(a)? * bundles[0].horizon;
    Ok(MeanIncrementCheck {
        label: describe(spec, a.coords()),
        mean,
        stderr,
        expected,
        passed: (mean - expected).norm() <= 3.0 * stderr + 1e-12,
    })
}
