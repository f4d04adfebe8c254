//! Stable-throughput and delay analysis of an energy-harvesting cognitive
//! radio sharing a slotted channel with a primary user.
//!
//! - [`channel`]: reception probabilities over Rayleigh-fading links.
//! - [`rates`]: closed-form service rates, chains and delays.
//! - [`solver`]: optimal sensing and access probabilities, stability regions.
//! - [`sim`]: slot-level Monte Carlo simulator.
//! - [`validation`]: acceptance suite against independent oracles.

pub mod channel;
pub mod presets;
pub mod rates;
pub mod sim;
pub mod solver;
pub mod validation;

pub use channel::{
    derive_success_probs, fit_link, success_alone, success_interfered, ChannelError, LinkFit,
    LinkModel, Node, SuccessProbs,
};
pub use presets::Preset;
pub use rates::{
    conventional_rates, delay_s1, delay_sf1, energy_rate, feedback_chain, primary_chain, s1_rates,
    s2_rates, sf1_rates, sf1_secondary_rate, AccessPolicy, DelayReport, FeedbackChain,
    PrimaryChainDist, RateError, ServiceRates, Traffic,
};
pub use sim::{
    estimate_boundary, run, BoundaryAxis, BoundaryEstimate, Dominance, EnergyModel, SimConfig,
    SimReport,
};
pub use solver::{
    bisect_quasiconcave, check_quasiconcavity, closed_form_s1_ps0, closed_form_sf_ps0,
    feasibility_s2, optimize_s1, optimize_s1_delay, optimize_sf1, optimize_sf_delay,
    stability_region, FractionalProgram, RegionCurve, RegionPoint, SolveResult, SolverError,
    SolverOptions, SystemTag,
};
