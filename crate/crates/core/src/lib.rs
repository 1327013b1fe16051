pub mod adversary;
pub mod analysis;
pub mod baselines;
pub mod bits;
pub mod channel;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod execution;
pub mod expand;
pub mod montecarlo;
pub mod protocol;
pub mod transcript;
pub mod treegen;
pub mod types;
