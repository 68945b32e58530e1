//! Deterministic event loop: replays a trace under one scheme, sweeps
//! expiry at day boundaries, and aggregates metrics; plus the side-by-side
//! scheme comparison.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::fuzzy::ClassifyThresholds;
use crate::message::{MessageKind, MessageLog, NodeId};
use crate::metrics::{Metrics, Recorder, COUNTER_NAMES};
use crate::network::Network;
use crate::protocol::{
    self, IntelligentCtx, ProtocolError,
};
use crate::tiered::{TtlConfig, SECONDS_PER_DAY};
use crate::topology::{Imsi, MscId, NetworkTopology};
use crate::trace::{EventKind, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Baseline,
    Intelligent,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::Intelligent => "intelligent",
        }
    }
}

/// Whether tier-2 retention past a window end requires common-MS status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissionMode {
    /// Only visitors seen on every day of the window stay cached across
    /// the window boundary.
    CommonMsGated,
    /// Every visitor stays cached, subject to TTL alone.
    CacheAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub ttl: TtlConfig,
    pub window_days: u64,
    pub admission: AdmissionMode,
    pub refresh_billing: bool,
    pub thresholds: ClassifyThresholds,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            ttl: TtlConfig::default(),
            window_days: 7,
            admission: AdmissionMode::CommonMsGated,
            refresh_billing: false,
            thresholds: ClassifyThresholds::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("event {index} at t={time} precedes the previous event at t={prev}")]
    TraceOutOfOrder { index: usize, time: u64, prev: u64 },
    #[error("event {index}: {what}")]
    UnresolvableId { index: usize, what: String },
    #[error("event {index}: {source}")]
    Protocol {
        index: usize,
        source: ProtocolError,
    },
}

/// A delivered call as seen in the message log; the unit of routing
/// equivalence between schemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliveredCall {
    pub time: u64,
    pub callee: Imsi,
    pub calling_msc: MscId,
    pub called_msc: MscId,
}

pub fn delivered_calls(log: &MessageLog) -> Vec<DeliveredCall> {
    log.entries()
        .iter()
        .filter(|m| m.kind == MessageKind::CallSetup)
        .map(|m| {
            let msc_of = |n: &NodeId| match n {
                NodeId::Msc(m) => m.clone(),
                _ => unreachable!("call setup runs between MSCs"),
            };
            DeliveredCall {
                time: m.time,
                callee: m.imsi.clone(),
                calling_msc: msc_of(&m.from),
                called_msc: msc_of(&m.to),
            }
        })
        .collect()
}

struct DayTracker {
    current_day: u64,
    last_snapshot: crate::metrics::Counters,
}

/// Replays the trace under the given scheme. Same inputs produce
/// bit-identical outputs: all state lives in ordered maps and the only
/// event ordering is (time, trace position).
pub fn run_simulation(
    topology: &NetworkTopology,
    trace: &[TraceEvent],
    scheme: Scheme,
    config: &SimConfig,
) -> Result<(Metrics, MessageLog), SimError> {
    // Validate ordering and resolvability up front.
    let mut prev_time = 0u64;
    let mut population: BTreeSet<Imsi> = BTreeSet::new();
    for (index, ev) in trace.iter().enumerate() {
        if ev.time < prev_time {
            return Err(SimError::TraceOutOfOrder {
                index,
                time: ev.time,
                prev: prev_time,
            });
        }
        prev_time = ev.time;
        population.insert(ev.imsi.clone());
        match &ev.kind {
            EventKind::MoveToCell(c) | EventKind::PowerOn(c) => {
                if topology.locate(c).is_err() {
                    return Err(SimError::UnresolvableId {
                        index,
                        what: format!("unknown cell {c}"),
                    });
                }
            }
            EventKind::CallTo(callee) => {
                population.insert(callee.clone());
            }
            EventKind::PowerOff => {}
        }
    }

    let mut net = Network::new(topology.clone(), config.window_days as usize);
    for imsi in &population {
        net.provision(imsi.clone());
    }

    let mut rec = Recorder::new();
    let mut metrics = Metrics::default();
    let mut tracker = DayTracker {
        current_day: 0,
        last_snapshot: Default::default(),
    };
    let mut window_start_day = 0u64;

    let advance_day = |net: &mut Network,
                           rec: &mut Recorder,
                           metrics: &mut Metrics,
                           tracker: &mut DayTracker,
                           window_start_day: &mut u64| {
        let completed = tracker.current_day;
        metrics
            .per_day
            .push((completed, rec.counters - tracker.last_snapshot));
        tracker.current_day += 1;
        let now = tracker.current_day * SECONDS_PER_DAY;
        if scheme == Scheme::Intelligent {
            let mscs: Vec<MscId> = net.vlrs.keys().cloned().collect();
            for msc in &mscs {
                let evicted = net.vlr_mut(msc).expire_records(now, &config.ttl);
                rec.counters.tier2_evictions += evicted.len() as u64;
            }
            if tracker.current_day % config.window_days == 0 {
                let gated = config.admission == AdmissionMode::CommonMsGated;
                for msc in &mscs {
                    let dropped = net.vlr_mut(msc).end_window(gated);
                    rec.counters.tier2_evictions += dropped.len() as u64;
                }
                *window_start_day = tracker.current_day;
            }
        } else if tracker.current_day % config.window_days == 0 {
            *window_start_day = tracker.current_day;
        }
        tracker.last_snapshot = rec.counters;
    };

    for (index, ev) in trace.iter().enumerate() {
        while ev.time >= (tracker.current_day + 1) * SECONDS_PER_DAY {
            advance_day(
                &mut net,
                &mut rec,
                &mut metrics,
                &mut tracker,
                &mut window_start_day,
            );
        }
        let day_index = (tracker.current_day - window_start_day) as usize;
        let now = ev.time;
        let imsi = &ev.imsi;
        let protoerr = |source| SimError::Protocol { index, source };

        match &ev.kind {
            EventKind::MoveToCell(cell) | EventKind::PowerOn(cell) => {
                let (la, msc) = net.topology.locate(cell).expect("validated above");
                let serving = net
                    .hlr
                    .lookup(imsi)
                    .expect("population provisioned")
                    .serving_vlr
                    .clone();
                let same_la = serving.as_ref() == Some(&msc)
                    && net.vlr(&msc).lookup(imsi).is_some_and(|r| r.la == la);
                if same_la {
                    protocol::intra_la_move(&mut net, imsi, cell).map_err(protoerr)?;
                } else {
                    match scheme {
                        Scheme::Baseline => {
                            protocol::register_arrival(&mut net, imsi, cell, now, &mut rec)
                                .map_err(protoerr)?;
                        }
                        Scheme::Intelligent => {
                            let ctx = IntelligentCtx {
                                ttl: &config.ttl,
                                thresholds: &config.thresholds,
                                refresh_billing: config.refresh_billing,
                                day_index,
                            };
                            protocol::intelligent_register(&mut net, imsi, cell, now, &mut rec, ctx)
                                .map_err(protoerr)?;
                        }
                    }
                }
            }
            EventKind::CallTo(callee) => {
                let result = match scheme {
                    Scheme::Baseline => {
                        protocol::deliver_call(&mut net, imsi, callee, now, &mut rec)
                    }
                    Scheme::Intelligent => {
                        protocol::intelligent_deliver(&mut net, imsi, callee, now, &mut rec)
                    }
                };
                match result {
                    Ok(route) => {
                        rec.counters.calls_delivered += 1;
                        // Instantaneous calls: teardown releases the TLDN.
                        protocol::release_tldn(&mut net, &route.tldn);
                    }
                    Err(ProtocolError::CalleeDetached(_))
                    | Err(ProtocolError::CallerDetached(_)) => {
                        rec.counters.calls_failed += 1;
                    }
                    Err(other) => return Err(protoerr(other)),
                }
            }
            EventKind::PowerOff => {
                let prev = net.hlr.detach(imsi).expect("population provisioned");
                if let Some(msc) = prev {
                    match scheme {
                        Scheme::Baseline => {
                            net.vlr_mut(&msc).delete(imsi);
                        }
                        Scheme::Intelligent => {
                            // Detach keeps the visit statistics around.
                            net.vlr_mut(&msc).demote(
                                imsi,
                                now,
                                &config.ttl,
                                &config.thresholds,
                            );
                        }
                    }
                }
            }
        }
    }

    if !trace.is_empty() {
        // One final boundary so the last day's sweep and row happen.
        advance_day(
            &mut net,
            &mut rec,
            &mut metrics,
            &mut tracker,
            &mut window_start_day,
        );
    }

    metrics.total = rec.counters;
    metrics.per_msc = rec.per_msc;
    Ok((metrics, rec.log))
}

/// Both schemes run on the identical trace, with per-counter deltas and
/// the two cross-scheme assertions.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub baseline: Metrics,
    pub intelligent: Metrics,
    pub baseline_log: MessageLog,
    pub intelligent_log: MessageLog,
    /// Intelligent HLR profile+location queries never exceed baseline's.
    pub dominance_holds: bool,
    /// Same delivered calls, same called MSC per call.
    pub routing_equivalent: bool,
}

impl Comparison {
    pub fn hlr_queries(m: &Metrics) -> u64 {
        m.total.hlr_profile_requests + m.total.hlr_location_requests
    }

    /// Plain-text table plus the same data as CSV.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<28} {:>12} {:>12} {:>12}\n",
            "counter", "baseline", "intelligent", "delta"
        ));
        let b = self.baseline.total.as_array();
        let i = self.intelligent.total.as_array();
        for (idx, name) in COUNTER_NAMES.iter().enumerate() {
            out.push_str(&format!(
                "{:<28} {:>12} {:>12} {:>12}\n",
                name,
                b[idx],
                i[idx],
                b[idx] as i64 - i[idx] as i64
            ));
        }
        out.push_str(&format!(
            "\ndominance (hlr profile+location queries): {}\n",
            if self.dominance_holds { "holds" } else { "VIOLATED" }
        ));
        out.push_str(&format!(
            "routing equivalence: {}\n",
            if self.routing_equivalent { "holds" } else { "VIOLATED" }
        ));
        out.push_str("\ncounter,baseline,intelligent,delta\n");
        for (idx, name) in COUNTER_NAMES.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                name,
                b[idx],
                i[idx],
                b[idx] as i64 - i[idx] as i64
            ));
        }
        out
    }
}

pub fn compare_schemes(
    topology: &NetworkTopology,
    trace: &[TraceEvent],
    config: &SimConfig,
) -> Result<Comparison, SimError> {
    let (baseline, baseline_log) = run_simulation(topology, trace, Scheme::Baseline, config)?;
    let (intelligent, intelligent_log) =
        run_simulation(topology, trace, Scheme::Intelligent, config)?;
    let dominance_holds = intelligent.total.hlr_profile_requests
        + intelligent.total.hlr_location_requests
        <= baseline.total.hlr_profile_requests + baseline.total.hlr_location_requests;
    let routing_equivalent = delivered_calls(&baseline_log) == delivered_calls(&intelligent_log);
    Ok(Comparison {
        baseline,
        intelligent,
        baseline_log,
        intelligent_log,
        dominance_holds,
        routing_equivalent,
    })
}
