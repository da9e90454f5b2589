#![allow(dead_code)]
pub mod oracle;

use ito_core::builders::{
    named_vacuum_algebra, newton, orthogonal_sum, poisson, random_algebra, thermal, vacuum, wiener, RandomKind,
    ThermalInput, VacuumInput,
};
use ito_core::linalg::{c64, CMatrix, CVector};
use ito_core::ItoAlgebraSpec;

pub fn vac(m: usize, name: &str) -> ItoAlgebraSpec {
    vacuum(&VacuumInput {
        m,
        algebra_basis: named_vacuum_algebra(name, m).unwrap(),
    })
    .unwrap()
}

pub fn thermal_diag(d: &[f64]) -> ItoAlgebraSpec {
    let rho = CMatrix::from_diagonal(&CVector::from_iterator(d.len(), d.iter().map(|&x| c64(x, 0.0))));
    thermal(&ThermalInput { k: d.len(), rho }).unwrap()
}

pub fn thermal_complex() -> ItoAlgebraSpec {
    let rho = CMatrix::from_row_slice(
        2,
        2,
        &[c64(0.6, 0.0), c64(0.1, 0.2), c64(0.1, -0.2), c64(0.4, 0.0)],
    );
    thermal(&ThermalInput { k: 2, rho }).unwrap()
}

pub fn mixed() -> ItoAlgebraSpec {
    orthogonal_sum(&wiener(1), &poisson(1)).unwrap()
}

/// Named outputs of every builder, including orthogonal sums.
pub fn builder_fixtures() -> Vec<(String, ItoAlgebraSpec)> {
    let mut out: Vec<(String, ItoAlgebraSpec)> = vec![("newton".into(), newton())];
    for d in 1..=3 {
        out.push((format!("wiener({d})"), wiener(d)));
        out.push((format!("poisson({d})"), poisson(d)));
    }
    for (m, name) in [(1, "zero"), (1, "scalar"), (2, "zero"), (2, "diagonal"), (2, "corner"), (2, "full"), (3, "diagonal")] {
        out.push((format!("vacuum(m={m},{name})"), vac(m, name)));
    }
    out.push(("thermal(1/2,1/2)".into(), thermal_diag(&[0.5, 0.5])));
    out.push(("thermal(3/4,1/4)".into(), thermal_diag(&[0.75, 0.25])));
    out.push(("thermal(complex)".into(), thermal_complex()));
    out.push(("thermal(k=1)".into(), thermal_diag(&[1.0])));
    out.push(("wiener(1)+poisson(1)".into(), mixed()));
    out.push((
        "wiener(1)+thermal".into(),
        orthogonal_sum(&wiener(1), &thermal_diag(&[0.75, 0.25])).unwrap(),
    ));
    out.push((
        "vacuum(corner)+poisson(1)".into(),
        orthogonal_sum(&vac(2, "corner"), &poisson(1)).unwrap(),
    ));
    out.push((
        "wiener(2)+poisson(2)".into(),
        orthogonal_sum(&wiener(2), &poisson(2)).unwrap(),
    ));
    out
}

pub fn random_kind(seed: u64) -> RandomKind {
    match seed % 3 {
        0 => RandomKind::Vacuum { m: 2 },
        1 => RandomKind::Thermal { k: 2 },
        _ => RandomKind::Mixed { m: 2, k: 2, d: 1 },
    }
}

pub fn random_fixtures() -> Vec<(String, ItoAlgebraSpec)> {
    (0..20)
        .map(|seed| {
            let kind = random_kind(seed);
            (format!("random({seed},{kind:?})"), random_algebra(seed, kind).unwrap())
        })
        .collect()
}

pub fn all_fixtures() -> Vec<(String, ItoAlgebraSpec)> {
    let mut out = builder_fixtures();
    out.extend(random_fixtures());
    out
}
