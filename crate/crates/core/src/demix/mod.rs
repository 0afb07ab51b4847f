//! Demixing algorithms: exact recovery from noiseless oracles and
//! approximate recovery of Mallows mixtures from samples.

pub mod mallows;
pub mod noiseless;

pub use mallows::{
    demix_mallows, estimate_weights, log_eta, log_zeta, simulate_oracle, sub_order, CandidateClass, DemixConfig,
    DemixOutcome, DemixReport, Mode, SimulatedOracle, WeightConfig, WeightEstimate,
};
pub use noiseless::{
    demix_strong, find_signature, find_tuple, hard_instance, indistinguishable, insertion_demixing, min_group_size,
    HardInstance,
};
