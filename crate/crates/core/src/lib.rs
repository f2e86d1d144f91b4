//! Which measurement statistics can occur between a preparation `psi` and a
//! postselection onto `phi`.
//!
//! A scenario is a triple `(T, S, P)`: the transition probability
//! `T = |<phi|psi>|^2` without an intermediate measurement, the success
//! probability `S` of postselecting onto `phi` after the measurement, and the
//! outcome distribution `P` of the measurement on the postselected ensemble.
//!
//! The crate is organized as:
//!
//! - [`stats`]: domain types and the forward map witness -> scenario, plus
//!   Renyi diversity indices.
//! - [`feasibility`]: analytic predicates deciding which scenarios a projective
//!   or generalized measurement can realize.
//! - [`construct`]: explicit witnesses for feasible scenarios.
//! - [`oracle`]: randomized sampling and local search that confront the
//!   analytic predicates.
//! - [`regions`]: feasibility regions on grids, for plotting.
//! - [`io`]: the JSON witness file format, CSV and SVG writers.

pub mod construct;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod regions;
pub mod stats;

pub use construct::{
    close_polygon, construct_generalized, construct_projective, factor_amplitudes, ClosedPolygon,
};
pub use error::{Error, Result};
pub use feasibility::{
    check_dichotomic, check_generalized, check_projective_chain, check_projective_raw,
    check_ternary_disk, check_ts_region, cone_decompose, witness_distribution, ConeDecomposition,
    Constraint, FeasibilityVerdict, EPS_FEAS,
};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64;
pub use stats::{
    evaluate_witness, AmplitudeVector, DiversityProfile, GeneralizedWitness, OutcomeDistribution,
    ProjectiveWitness, ScenarioTriple, Witness, EPS_PROB, EPS_UNIT,
};
