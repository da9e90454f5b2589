//! JSON interchange: the sparse spec format and the builder syntax.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{ItoAlgebraSpec, DEFAULT_TOL};
use crate::builders::{self, Provenance, RandomKind, ThermalInput, VacuumInput};
use crate::error::{ItoError, Result};
use crate::linalg::{c64, CMatrix, ZERO};

/// A complex number written either as a bare real or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonScalar {
    Real(f64),
    Complex([f64; 2]),
}

impl JsonScalar {
    pub fn value(self) -> Complex64 {
        match self {
            JsonScalar::Real(x) => c64(x, 0.0),
            JsonScalar::Complex([re, im]) => c64(re, im),
        }
    }
}

pub type JsonMatrix = Vec<Vec<JsonScalar>>;

fn matrix_from_json(m: &JsonMatrix, rows: usize, what: &str) -> Result<CMatrix> {
    if m.len() != rows || m.iter().any(|r| r.len() != rows) {
        return Err(ItoError::Shape(format!("{what} must be {rows}x{rows}")));
    }
    Ok(CMatrix::from_fn(rows, rows, |i, j| m[i][j].value()))
}

/// Wire format of a spec; `structure` and `involution` are sparse lists
/// `[i, j, k, re, im]` and `[i, j, re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub death: Vec<JsonScalar>,
    pub functional: Vec<JsonScalar>,
    pub structure: Vec<Vec<f64>>,
    pub involution: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn index(x: f64, n: usize, what: &str) -> Result<usize> {
    if x.fract() != 0.0 || x < 0.0 || x >= n as f64 {
        return Err(ItoError::Shape(format!("{what} index {x} out of range 0..{n}")));
    }
    Ok(x as usize)
}

impl SpecJson {
    pub fn from_spec(spec: &ItoAlgebraSpec) -> Self {
        let n = spec.dim();
        let pair = |z: Complex64| JsonScalar::Complex([z.re, z.im]);
        let mut structure = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for (k, z) in spec.basis_product(i, j).iter().enumerate() {
                    if *z != ZERO {
                        structure.push(vec![i as f64, j as f64, k as f64, z.re, z.im]);
                    }
                }
            }
        }
        let s = spec.involution_matrix();
        let mut involution = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let z = s[(i, j)];
                if z != ZERO {
                    involution.push(vec![i as f64, j as f64, z.re, z.im]);
                }
            }
        }
        SpecJson {
            dim: n,
            labels: Some(spec.labels().to_vec()),
            death: spec.death().iter().copied().map(pair).collect(),
            functional: spec.functional_values().iter().copied().map(pair).collect(),
            structure,
            involution,
            tol: Some(spec.tol()),
            provenance: match spec.provenance() {
                Provenance::Custom => None,
                p => Some(p.clone()),
            },
        }
    }

    pub fn to_spec(&self) -> Result<ItoAlgebraSpec> {
        let n = self.dim;
        if n == 0 {
            return Err(ItoError::Shape("dim must be positive".into()));
        }
        let mut tensor = vec![ZERO; n * n * n];
        for entry in &self.structure {
            if entry.len() != 4 && entry.len() != 5 {
                return Err(ItoError::Shape("structure entries are [i, j, k, re, im]".into()));
            }
            let (i, j, k) = (
                index(entry[0], n, "structure")?,
                index(entry[1], n, "structure")?,
                index(entry[2], n, "structure")?,
            );
            tensor[(i * n + j) * n + k] += c64(entry[3], entry.get(4).copied().unwrap_or(0.0));
        }
        let mut inv = CMatrix::zeros(n, n);
        for entry in &self.involution {
            if entry.len() != 3 && entry.len() != 4 {
                return Err(ItoError::Shape("involution entries are [i, j, re, im]".into()));
            }
            let (i, j) = (index(entry[0], n, "involution")?, index(entry[1], n, "involution")?);
            inv[(i, j)] += c64(entry[2], entry.get(3).copied().unwrap_or(0.0));
        }
        let labels = self
            .labels
            .clone()
            .unwrap_or_else(|| (0..n).map(|i| format!("a{i}")).collect());
        let spec = ItoAlgebraSpec::new(
            labels,
            tensor,
            inv,
            self.death.iter().map(|z| z.value()).collect(),
            self.functional.iter().map(|z| z.value()).collect(),
            self.tol.unwrap_or(DEFAULT_TOL),
        )?;
        Ok(match &self.provenance {
            Some(p) => spec.with_provenance(p.clone()),
            None => spec,
        })
    }
}

pub fn spec_from_json(text: &str) -> Result<ItoAlgebraSpec> {
    let wire: SpecJson = serde_json::from_str(text)?;
    wire.to_spec()
}

pub fn spec_to_json(spec: &ItoAlgebraSpec) -> String {
    serde_json::to_string_pretty(&SpecJson::from_spec(spec)).expect("spec serializes")
}

/// Operator algebra of a vacuum builder: a named family or explicit
/// matrices spanning it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraChoice {
    Named(String),
    Matrices(Vec<JsonMatrix>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomFamily {
    Vacuum,
    Thermal,
    Mixed,
}

/// Builder syntax, e.g. `{"builder":"wiener","d":2}` or
/// `{"builder":"sum","parts":[...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuilderConfig {
    Newton,
    Wiener {
        d: usize,
    },
    Poisson {
        d: usize,
    },
    Vacuum {
        m: usize,
        algebra: AlgebraChoice,
    },
    Thermal {
        k: usize,
        #[serde(default)]
        rho: Option<JsonMatrix>,
    },
    Sum {
        parts: Vec<BuilderConfig>,
    },
    Random {
        seed: u64,
        kind: RandomFamily,
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        k: Option<usize>,
        #[serde(default)]
        d: Option<usize>,
    },
}

impl BuilderConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<ItoAlgebraSpec> {
        let positive = |x: usize, name: &str| {
            if x == 0 {
                Err(ItoError::InvalidParameter(format!("{name} must be >= 1")))
            } else {
                Ok(x)
            }
        };
        match self {
            BuilderConfig::Newton => Ok(builders::newton()),
            BuilderConfig::Wiener { d } => Ok(builders::wiener(positive(*d, "d")?)),
            BuilderConfig::Poisson { d } => Ok(builders::poisson(positive(*d, "d")?)),
            BuilderConfig::Vacuum { m, algebra } => {
                let m = positive(*m, "m")?;
                let algebra_basis = match algebra {
                    AlgebraChoice::Named(name) => builders::named_vacuum_algebra(name, m)?,
                    AlgebraChoice::Matrices(ms) => ms
                        .iter()
                        .map(|a| matrix_from_json(a, m, "operator basis element"))
                        .collect::<Result<_>>()?,
                };
                builders::vacuum(&VacuumInput { m, algebra_basis })
            }
            BuilderConfig::Thermal { k, rho } => {
                let k = positive(*k, "k")?;
                let rho = match rho {
                    Some(r) => matrix_from_json(r, k, "rho")?,
                    None => CMatrix::identity(k, k) / c64(k as f64, 0.0),
                };
                builders::thermal(&ThermalInput { k, rho })
            }
            BuilderConfig::Sum { parts } => {
                let mut iter = parts.iter();
                let first = iter
                    .next()
                    .ok_or_else(|| ItoError::InvalidParameter("sum needs at least one part".into()))?
                    .build()?;
                iter.try_fold(first, |acc, p| builders::orthogonal_sum(&acc, &p.build()?))
            }
            BuilderConfig::Random { seed, kind, m, k, d } => {
                let kind = match kind {
                    RandomFamily::Vacuum => RandomKind::Vacuum { m: m.unwrap_or(2) },
                    RandomFamily::Thermal => RandomKind::Thermal { k: k.unwrap_or(2) },
                    RandomFamily::Mixed => RandomKind::Mixed {
                        m: m.unwrap_or(2),
                        k: k.unwrap_or(2),
                        d: d.unwrap_or(1),
                    },
                };
                builders::random_algebra(*seed, kind)
            }
        }
    }
}
