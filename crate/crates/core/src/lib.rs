//! Exact decision procedures for relative noncontextuality of
//! prepare-and-measure data tables.
//!
//! The entry point is [`decide_rnc`]: given a [`DataTable`], a [`Scenario`]
//! and a [`Reference`] it either returns an ontological model certificate or
//! an exact proof that none exists.

pub mod cache;
pub mod cone;
pub mod decision;
pub mod graph;
pub mod indist;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod quantum;
pub mod random;
pub mod rational;

pub use indist::{
    are_indistinguishable, is_faithful, kernels, preorder_leq, Density, KernelPair, Side,
};
pub use linalg::{RationalMatrix, SubspaceBasis};
pub use model::{
    check_outcome_complete, prob, validate_reference, validate_scenario, validate_table,
    DataTable, EffectDensity, EffectKey, EffectRef, Measurement, ModelError, PrepDensity,
    Reference, Scenario, Violation,
};
pub use rational::{format_rational, parse_rational, Rational};
pub use decision::{
    decide_rnc, decide_rnc_with, farkas_to_inequality, verify_model, Decision, DecisionConfig,
    DecisionError, OntModelCertificate, Verdict,
};
pub use graph::{
    build_graph, check_monotonicity, emit_dot, emit_json, enumerate_references, NcGraph,
    ReferencePolicy, ReferenceSource,
};
pub use quantum::{
    cross_check_equivalence, diagonal_model, projection_indist_check, validate_quantum_model,
    QuantumModel,
};
