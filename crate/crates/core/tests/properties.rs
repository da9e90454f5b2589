//! Invariants of Itô ★-algebras and of every derived object, checked on
//! generated algebras and elements.

mod common;

use std::sync::Arc;

use ito_core::linalg::{self, c64, CMatrix};
use ito_core::representation::{build_rep, convolve, metric_adjoint, to_matrix};
use ito_core::seminorms::{check_axioms, random_elements};
use ito_core::simulate::{canonical_form, sample_path, SimConfig};
use ito_core::structure::{decompose, null_ideals};
use ito_core::{poisson, random_algebra, wiener, ItoAlgebraSpec, RandomKind};
use num_complex::Complex64;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn algebra() -> impl Strategy<Value = ItoAlgebraSpec> {
    prop_oneof![
        (1usize..=3).prop_map(wiener),
        (1usize..=3).prop_map(poisson),
        (0u64..10_000, 1usize..=3).prop_map(|(s, m)| random_algebra(s, RandomKind::Vacuum { m }).unwrap()),
        (0u64..10_000, 1usize..=3).prop_map(|(s, k)| random_algebra(s, RandomKind::Thermal { k }).unwrap()),
        (0u64..10_000).prop_map(|s| random_algebra(s, RandomKind::Mixed { m: 2, k: 2, d: 1 }).unwrap()),
    ]
}

fn scalar() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| c64(re, im))
}

fn vector(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(scalar(), n)
}

/// An algebra with three elements and a scalar.
fn setup() -> impl Strategy<Value = (ItoAlgebraSpec, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Complex64)> {
    algebra().prop_flat_map(|spec| {
        let n = spec.dim();
        (Just(spec), vector(n), vector(n), vector(n), scalar())
    })
}

fn gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    linalg::max_abs_slice(&linalg::vec_sub(a, b))
}

fn scale_of(vs: &[&[Complex64]]) -> f64 {
    vs.iter().map(|v| linalg::max_abs_slice(v)).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn product_is_bilinear((spec, a, b, c, s) in setup()) {
        let sa_b = linalg::vec_add(&linalg::vec_scale(&a, s), &b);
        let lhs = spec.mul_coords(&sa_b, &c);
        let rhs = linalg::vec_add(&linalg::vec_scale(&spec.mul_coords(&a, &c), s), &spec.mul_coords(&b, &c));
        prop_assert!(gap(&lhs, &rhs) <= TOL * scale_of(&[&a, &b, &c]).powi(2) * (1.0 + s.norm()) * spec.max_structure_entry().max(1.0));
        let lhs = spec.mul_coords(&c, &sa_b);
        let rhs = linalg::vec_add(&linalg::vec_scale(&spec.mul_coords(&c, &a), s), &spec.mul_coords(&c, &b));
        prop_assert!(gap(&lhs, &rhs) <= TOL * scale_of(&[&a, &b, &c]).powi(2) * (1.0 + s.norm()) * spec.max_structure_entry().max(1.0));
    }

    #[test]
    fn product_is_associative((spec, a, b, c, _s) in setup()) {
        let lhs = spec.mul_coords(&spec.mul_coords(&a, &b), &c);
        let rhs = spec.mul_coords(&a, &spec.mul_coords(&b, &c));
        let scale = scale_of(&[&a, &b, &c]).powi(3) * spec.max_structure_entry().max(1.0).powi(2);
        prop_assert!(gap(&lhs, &rhs) <= TOL * scale);
    }

    #[test]
    fn involution_is_an_antilinear_antimultiplicative_involution((spec, a, b, _c, s) in setup()) {
        let twice = spec.involve_coords(&spec.involve_coords(&a));
        prop_assert!(gap(&twice, &a) <= TOL * scale_of(&[&a]));

        let scaled = spec.involve_coords(&linalg::vec_scale(&a, s));
        let expected = linalg::vec_scale(&spec.involve_coords(&a), s.conj());
        prop_assert!(gap(&scaled, &expected) <= TOL * scale_of(&[&a]) * (1.0 + s.norm()));

        let lhs = spec.involve_coords(&spec.mul_coords(&a, &b));
        let rhs = spec.mul_coords(&spec.involve_coords(&b), &spec.involve_coords(&a));
        prop_assert!(gap(&lhs, &rhs) <= TOL * scale_of(&[&a, &b]).powi(2) * spec.max_structure_entry().max(1.0));
    }

    #[test]
    fn death_annihilates_and_state_is_positive((spec, a, _b, _c, _s) in setup()) {
        let theta = spec.death().to_vec();
        prop_assert!(linalg::max_abs_slice(&spec.mul_coords(&theta, &a)) <= TOL * scale_of(&[&a]));
        prop_assert!(linalg::max_abs_slice(&spec.mul_coords(&a, &theta)) <= TOL * scale_of(&[&a]));
        prop_assert!((spec.functional_coords(&theta) - c64(1.0, 0.0)).norm() <= TOL);
        let q = spec.functional_coords(&spec.mul_coords(&spec.involve_coords(&a), &a));
        let scale = scale_of(&[&a]).powi(2) * spec.max_structure_entry().max(1.0);
        prop_assert!(q.re >= -TOL * scale);
        prop_assert!(q.im.abs() <= TOL * scale);
    }

    #[test]
    fn representation_is_a_star_homomorphism((spec, a, b, _c, _s) in setup()) {
        let rep = build_rep(&spec).unwrap();
        let (qa, qb) = (rep.quadruple_of(&a), rep.quadruple_of(&b));
        let qab = rep.quadruple_of(&spec.mul_coords(&a, &b));
        let scale = qab.max_abs().max(qa.max_abs() * qb.max_abs()).max(1.0);
        prop_assert!(convolve(&qa, &qb).unwrap().distance(&qab) <= 1e-10 * scale);
        prop_assert!(to_matrix(&qa).mul(&to_matrix(&qb)).distance(&to_matrix(&qab)) <= 1e-10 * scale);

        let qs = rep.quadruple_of(&spec.involve_coords(&a));
        prop_assert!(metric_adjoint(&to_matrix(&qa)).distance(&to_matrix(&qs)) <= 1e-10 * qa.max_abs().max(1.0));
    }

    #[test]
    fn kets_realize_the_state((spec, a, b, _c, _s) in setup()) {
        let rep = build_rep(&spec).unwrap();
        let inner = rep.ket_of(&a).dotc(&rep.ket_of(&b));
        let expected = spec.functional_coords(&spec.mul_coords(&spec.involve_coords(&a), &b));
        let scale = scale_of(&[&a, &b]).powi(2) * spec.max_structure_entry().max(1.0);
        prop_assert!((inner - expected).norm() <= TOL * scale);
    }

    #[test]
    fn null_ideal_is_invisible_to_the_representation((spec, a, _b, _c, _s) in setup()) {
        let rep = build_rep(&spec).unwrap();
        let ideals = null_ideals(&spec, &rep);
        for v in linalg::column_vecs(&ideals.n_plus) {
            prop_assert!(rep.ket_of(&v).norm() <= TOL);
            // left ideal
            let av = spec.mul_coords(&a, &v);
            prop_assert!(rep.ket_of(&av).norm() <= TOL * scale_of(&[&a]) * spec.max_structure_entry().max(1.0));
        }
        prop_assert_eq!(ideals.n_plus.ncols() + rep.rank(), spec.dim());
    }

    #[test]
    fn rank_is_invariant_under_change_of_basis(spec in algebra(), seed in any::<u64>()) {
        let n = spec.dim();
        let rand = random_elements(&spec, n, seed);
        let mut basis = CMatrix::from_fn(n, n, |i, j| rand[j].coords()[i]);
        basis += CMatrix::identity(n, n) * c64(3.0, 0.0);
        prop_assume!(basis.clone().try_inverse().is_some());
        let moved = spec.change_basis(&basis, None).unwrap();
        prop_assert_eq!(build_rep(&moved).unwrap().rank(), build_rep(&spec).unwrap().rank());
    }

    #[test]
    fn seminorm_axioms_hold(spec in algebra(), seed in any::<u64>()) {
        let rep = build_rep(&spec).unwrap();
        let sample = random_elements(&spec, 24, seed);
        prop_assert!(check_axioms(&rep, &sample).unwrap().max_violation() <= TOL);
    }

    #[test]
    fn decomposition_invariants_hold(spec in algebra()) {
        let d = decompose(&spec).unwrap();
        prop_assert!(d.reconstruction_residual(&spec) <= 1e-12);
        prop_assert!(d.orthogonality_residual(&spec) <= 1e-10);
        prop_assert!(d.brownian_closure_residual(&spec) <= 1e-10);
        prop_assert!(d.idempotent_residual(&spec) <= 1e-10);
    }

    #[test]
    fn pipeline_is_deterministic(spec in algebra(), seed in any::<u64>(), index in 0u64..1000) {
        let (d1, d2) = (decompose(&spec).unwrap(), decompose(&spec).unwrap());
        prop_assert_eq!(d1.idempotent.coords(), d2.idempotent.coords());
        if spec.is_commutative() {
            let form = Arc::new(canonical_form(&spec, &d1).unwrap());
            let cfg = SimConfig { horizon: 1.0, mesh: 1.0 / 64.0, paths: 1, seed };
            let (p1, p2) = (sample_path(&form, &cfg, index), sample_path(&form, &cfg, index));
            prop_assert_eq!(&p1.wiener_increments, &p2.wiener_increments);
            prop_assert_eq!(&p1.jump_times, &p2.jump_times);
        }
    }

    #[test]
    fn rank_survives_gram_perturbations_below_the_cutoff(index in 0usize..64, seed in any::<u64>()) {
        let fixtures = common::builder_fixtures();
        let (_, spec) = &fixtures[index % fixtures.len()];
        let rep = build_rep(spec).unwrap();
        let n = spec.dim();
        // l enters G linearly through the structure tensor, so a change of
        // size δ in l moves G entries by at most δ·max|c|·n
        let delta = rep.rank_cutoff() / 10.0 / (spec.max_structure_entry().max(1.0) * n as f64);
        let noise = random_elements(spec, 1, seed).remove(0);
        let scale = linalg::max_abs_slice(noise.coords()).max(1e-300);
        let mut moved = spec.clone();
        for i in 0..n {
            let v = spec.functional_values()[i] + noise.coords()[i] * (delta / scale);
            moved = moved.with_functional_entry(i, v);
        }
        prop_assert!(linalg::max_abs(&(moved.gram_matrix() - spec.gram_matrix())) < rep.rank_cutoff() / 10.0);
        prop_assert_eq!(build_rep(&moved).unwrap().rank(), rep.rank());
    }
}
