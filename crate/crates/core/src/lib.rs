//! Deterministic discrete-event simulator of GSM location management.
//!
//! Two schemes are implemented over the same HLR/VLR network model:
//!
//! - the standard registration and call-delivery procedures, where every
//!   inter-MSC arrival fetches the subscriber profile from the HLR, and
//! - an intelligent scheme where each VLR keeps a second tier that caches
//!   the profiles of frequent visitors (classified through piecewise-linear
//!   membership functions over visit counts) so that a returning commuter
//!   re-registers without an HLR profile fetch.
//!
//! The simulator replays mobility/call traces under either scheme, logs
//! every signaling message, and aggregates counters so the two schemes can
//! be compared on identical input.

pub mod config;
pub mod fuzzy;
pub mod message;
pub mod metrics;
pub mod network;
pub mod protocol;
pub mod sim;
pub mod tiered;
pub mod topology;
pub mod trace;
