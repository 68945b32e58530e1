//! Signaling counters, per-day breakdowns, and the CSV metrics format.

use std::collections::BTreeMap;
use std::ops::Sub;

use crate::message::{Message, MessageLog};
use crate::topology::MscId;

/// The aggregated signaling counters for one run (or one slice of a run).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub hlr_profile_requests: u64,
    pub hlr_location_requests: u64,
    pub hlr_pointer_updates: u64,
    pub vlr_lookups: u64,
    pub cancellations: u64,
    pub registrations_full: u64,
    pub registrations_tier1_hit: u64,
    pub registrations_tier2_hit: u64,
    pub calls_delivered: u64,
    pub calls_failed: u64,
    pub tier2_evictions: u64,
}

pub const COUNTER_NAMES: [&str; 11] = [
    "hlr_profile_requests",
    "hlr_location_requests",
    "hlr_pointer_updates",
    "vlr_lookups",
    "cancellations",
    "registrations_full",
    "registrations_tier1_hit",
    "registrations_tier2_hit",
    "calls_delivered",
    "calls_failed",
    "tier2_evictions",
];

impl Counters {
    pub fn as_array(&self) -> [u64; 11] {
        [
            self.hlr_profile_requests,
            self.hlr_location_requests,
            self.hlr_pointer_updates,
            self.vlr_lookups,
            self.cancellations,
            self.registrations_full,
            self.registrations_tier1_hit,
            self.registrations_tier2_hit,
            self.calls_delivered,
            self.calls_failed,
            self.tier2_evictions,
        ]
    }
}

impl Sub for Counters {
    type Output = Counters;

    fn sub(self, rhs: Counters) -> Counters {
        let a = self.as_array();
        let b = rhs.as_array();
        let d: Vec<u64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
        Counters {
            hlr_profile_requests: d[0],
            hlr_location_requests: d[1],
            hlr_pointer_updates: d[2],
            vlr_lookups: d[3],
            cancellations: d[4],
            registrations_full: d[5],
            registrations_tier1_hit: d[6],
            registrations_tier2_hit: d[7],
            calls_delivered: d[8],
            calls_failed: d[9],
            tier2_evictions: d[10],
        }
    }
}

/// HLR-facing counters attributed to a single MSC.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MscCounters {
    /// Profile fetches this MSC issued to the HLR.
    pub hlr_profile_requests: u64,
    /// Location queries this MSC issued to the HLR.
    pub hlr_location_requests: u64,
    /// HLR pointer writes naming this MSC as the new serving VLR.
    pub hlr_pointer_updates: u64,
}

/// Counter totals plus per-day and per-MSC breakdowns for one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    pub total: Counters,
    /// One row per completed simulated day, in day order.
    pub per_day: Vec<(u64, Counters)>,
    pub per_msc: BTreeMap<MscId, MscCounters>,
}

impl Metrics {
    pub fn msc(&self, msc: &MscId) -> MscCounters {
        self.per_msc.get(msc).copied().unwrap_or_default()
    }

    /// Renders the metrics CSV: a header of counter names, the run totals,
    /// one row per day, and one row per MSC for the HLR-facing counters.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scope,key");
        for name in COUNTER_NAMES {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        let row = |out: &mut String, scope: &str, key: &str, values: &[u64]| {
            out.push_str(scope);
            out.push(',');
            out.push_str(key);
            for v in values {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        };
        row(&mut out, "total", "", &self.total.as_array());
        for (day, c) in &self.per_day {
            row(&mut out, "day", &day.to_string(), &c.as_array());
        }
        for (msc, c) in &self.per_msc {
            let mut values = [0u64; 11];
            values[0] = c.hlr_profile_requests;
            values[1] = c.hlr_location_requests;
            values[2] = c.hlr_pointer_updates;
            row(&mut out, "msc", msc.as_str(), &values);
        }
        out
    }
}

/// Mutable sink the procedures write into: the ordered message log plus
/// the running counters.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    pub log: MessageLog,
    pub counters: Counters,
    pub per_msc: BTreeMap<MscId, MscCounters>,
}

impl Recorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn log(&mut self, msg: Message) {
        self.log.append(msg);
    }

    pub fn profile_request(&mut self, from: &MscId) {
        self.counters.hlr_profile_requests += 1;
        self.per_msc
            .entry(from.clone())
            .or_default()
            .hlr_profile_requests += 1;
    }

    pub fn location_request(&mut self, from: &MscId) {
        self.counters.hlr_location_requests += 1;
        self.per_msc
            .entry(from.clone())
            .or_default()
            .hlr_location_requests += 1;
    }

    pub fn pointer_update(&mut self, new_serving: &MscId) {
        self.counters.hlr_pointer_updates += 1;
        self.per_msc
            .entry(new_serving.clone())
            .or_default()
            .hlr_pointer_updates += 1;
    }
}
