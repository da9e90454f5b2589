//! Finite-dimensional Itô ★-algebras: axiom validation, the fundamental
//! quadruple representation, Newton/Brownian/Lévy decomposition, the four
//! seminorms, and path simulation of commutative algebras.

pub mod algebra;
pub mod builders;
pub mod error;
pub mod io;
pub mod linalg;
pub mod representation;
pub mod seminorms;
pub mod simulate;
pub mod structure;

pub use algebra::{Axiom, Element, ItoAlgebraSpec, ValidationReport, Violation, DEFAULT_TOL};
pub use builders::{
    newton, orthogonal_sum, poisson, random_algebra, thermal, vacuum, wiener, Provenance, RandomKind,
    ThermalInput, VacuumInput,
};
pub use error::{ItoError, Result};
pub use representation::{build_rep, convolve, metric_adjoint, quadruple, to_matrix, FundamentalRep, Quadruple, TriangularMatrix};
pub use structure::{
    classify, decompose, decompose_thermal, decompose_vacuum, is_vacuum, null_ideals, supporting_idempotent,
    ClassificationReport, Decomposition, IdealData,
};
pub use seminorms::{boundedness_lower_bound, check_axioms, seminorms, SeminormReport, Seminorms};
pub use simulate::{
    canonical_form, ito_table_check, mean_increment_check, sample_paths, CanonicalForm, ItoTableCheck, PathBundle,
    SimConfig,
};
pub use io::{spec_from_json, spec_to_json, BuilderConfig, SpecJson};
