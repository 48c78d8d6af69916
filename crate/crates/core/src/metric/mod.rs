//! Power boundedness, invariant metrics, Douglas factorization and the
//! structure of power bounded matrices.

mod decomposition;
mod douglas;
mod pf;
mod power;
mod similarity;

pub use decomposition::{c0_c1_decompose, wold_decompose, C01Decomposition};
pub use douglas::{douglas_factor, douglas_mu, DouglasFactor};
pub use pf::{
    ascent_bound_check, pf_property_check, pf_property_check_seeded, verify_prop_isometric, AscentContract,
    AscentReport, PfCounterexample, PfReport, PropIsometricReport, PF_SEED,
};
pub(crate) use power::require_power_bounded;
pub use power::{
    certify_power_bounded, frame_bounds, FrameBounds, PowerBoundCriterion, PowerBoundReport, PowerBoundWitness,
    WitnessKind, DEFAULT_HORIZON,
};
pub use similarity::{
    canonical_left_m_inverse, certify_similarity, extract_isometry, invariant_metric, invariant_metric_solution,
    similar_to_unitary, MetricSolution, SimilarityCertificate, UnitarySimilarity,
};
