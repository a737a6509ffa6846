//! Throughput analysis of random-access WLANs whose receiver can decode up to
//! `M` simultaneous packets (multipacket reception, MPR).
//!
//! * [`throughput`]: saturation throughput for finite and infinite
//!   populations, its optimum over the attempt rate, the SIMO baseline.
//! * [`backoff`]: exponential-backoff steady state and the optimal backoff
//!   factor.
//! * [`sim`]: slot-level Monte-Carlo simulator of saturated stations.
//! * [`phy`]: multiuser detection, source counting and finite-alphabet blind
//!   separation.

pub mod attempts;
pub mod backoff;
pub mod error;
pub mod params;
pub mod phy;
pub mod search;
pub mod sim;
pub mod success;
pub mod throughput;

pub use attempts::AttemptModel;
pub use backoff::{BackoffOptimum, BackoffParams, FixedPoint};
pub use error::{Error, Result};
pub use params::{slot_durations, AccessMode, MacTimingParams, NetworkParams, SlotDurations};
pub use success::SuccessModel;
