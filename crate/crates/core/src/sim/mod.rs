//! Monte-Carlo harness: deterministic seeded streams, channel and
//! noise generation, BER sweeps, and measured flop/memory accounting.

pub mod channel;
pub mod metrics;
pub mod rng;
pub mod sweep;

pub use channel::{gen_channel, gen_noise, snr_to_sigma2, ChannelInstance};
pub use metrics::{count_flops, report_memory, FlopCounter, FlopProfile, MemoryReport, MetricsError};
pub use rng::trial_rng;
pub use sweep::{run_sweep, run_trial, BerRecord, SweepConfig, TrialOutcome};
