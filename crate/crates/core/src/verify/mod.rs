//! Checks of the drift conditions: exact mask enumeration, Monte Carlo
//! estimates, runtime bounds and weight-sum inequalities.

pub mod bounds;
pub mod exact;
pub mod feasibility;
pub mod lemmas;
pub mod monte_carlo;

pub use bounds::{
    check_definition_conditions, check_partition_polynomiality, piecewise_bound, theorem_bound, theorem_bound_ln,
    DefinitionReport, PartPolynomiality, PiecewiseBound, TheoremBound,
};
pub use exact::{
    exact_drift_factor, exact_expected_phi_next, mask_probability_total, CompensatedSum, DriftEstimate, ExactOracle,
    Method, EXHAUSTIVE_CAP, MASK_CAP,
};
pub use feasibility::{sample_states, verify_feasibility, FeasibilityReport, VerifyMode, VerifyOptions};
pub use lemmas::{check_weight_lemmas, LemmaCheck, LemmaKind, LemmaReport, LEMMA_TOL};
pub use monte_carlo::{mc_drift_estimate, Z_99};
