//! The registration and call-delivery procedures, in both the standard
//! form (every inter-MSC arrival goes through the HLR) and the intelligent
//! form (the tier-2 cache answers for returning frequent visitors).

use thiserror::Error;

use crate::fuzzy::ClassifyThresholds;
use crate::message::{Message, MessageKind, NodeId, StepLabel};
use crate::metrics::Recorder;
use crate::network::Network;
use crate::tiered::TtlConfig;
use crate::topology::{CellId, Imsi, LaId, MscId, SubscriberStatus, TopologyError, VlrRecord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("IMSI {0} was never provisioned")]
    UnknownImsi(Imsi),
    #[error("unknown cell {0}")]
    UnknownCell(CellId),
    #[error("cell {cell} is in LA {actual}, not the subscriber's current LA {expected}")]
    LaMismatch {
        cell: CellId,
        actual: LaId,
        expected: LaId,
    },
    #[error("IMSI {0} holds no active record at this MSC")]
    NotRegisteredHere(Imsi),
    #[error("callee {0} is detached")]
    CalleeDetached(Imsi),
    #[error("caller {0} is detached")]
    CallerDetached(Imsi),
}

impl From<TopologyError> for ProtocolError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::UnknownCell(c) => ProtocolError::UnknownCell(c),
            other => panic!("unexpected topology error during lookup: {other}"),
        }
    }
}

/// Outcome of the standard registration procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegistrationOutcome {
    /// Step-1 hit: the serving VLR already held the record.
    AlreadyKnown,
    /// Steps 1-5 ran and the profile was fetched from the HLR.
    RegisteredFresh,
}

/// Outcome of the intelligent registration procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntelligentOutcome {
    Tier1Hit,
    Tier2HitPromoted,
    MissFullProcedure,
}

/// Temporary routing number assigned by the called MSC for one call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tldn {
    pub value: u64,
    pub owner_msc: MscId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallRoute {
    pub caller: Imsi,
    pub callee: Imsi,
    pub calling_msc: MscId,
    pub called_msc: MscId,
    pub tldn: Tldn,
}

/// What the old VLR does with its record when the HLR cancels it.
#[derive(Debug, Clone, Copy)]
pub enum CancelPolicy<'a> {
    /// Standard behavior: the record is deleted.
    Delete,
    /// Intelligent behavior: the record drops to tier 2 with its
    /// statistics intact.
    Demote(&'a TtlConfig, &'a ClassifyThresholds),
}

fn msg(
    time: u64,
    step: StepLabel,
    kind: MessageKind,
    from: NodeId,
    to: NodeId,
    imsi: &Imsi,
) -> Message {
    Message {
        time,
        step,
        kind,
        from,
        to,
        imsi: imsi.clone(),
    }
}

fn apply_cancel(net: &mut Network, old_msc: &MscId, imsi: &Imsi, now: u64, policy: CancelPolicy) {
    let vlr = net.vlr_mut(old_msc);
    match policy {
        CancelPolicy::Delete => {
            vlr.delete(imsi);
        }
        CancelPolicy::Demote(ttl, thresholds) => {
            vlr.demote(imsi, now, ttl, thresholds);
        }
    }
}

/// Steps 2-5 of the registration procedure: profile fetch, HLR pointer
/// update, cancel of the old VLR (fire-and-forget, only when one existed),
/// and the local store.
fn full_registration(
    net: &mut Network,
    imsi: &Imsi,
    la: &LaId,
    msc: &MscId,
    cell: &CellId,
    now: u64,
    rec: &mut Recorder,
    policy: CancelPolicy,
) -> Result<(), ProtocolError> {
    rec.log(msg(
        now,
        StepLabel::Registration(2),
        MessageKind::ProfileRequest,
        NodeId::Msc(msc.clone()),
        NodeId::Hlr,
        imsi,
    ));
    rec.profile_request(msc);

    let prev = net
        .hlr
        .update_location(imsi, msc.clone(), la.clone())
        .map_err(|_| ProtocolError::UnknownImsi(imsi.clone()))?;
    rec.log(msg(
        now,
        StepLabel::Registration(3),
        MessageKind::ProfileResponseAndHlrUpdate,
        NodeId::Hlr,
        NodeId::Msc(msc.clone()),
        imsi,
    ));
    rec.pointer_update(msc);

    if let Some(old) = prev {
        rec.log(msg(
            now,
            StepLabel::Registration(4),
            MessageKind::CancelOld,
            NodeId::Hlr,
            NodeId::Msc(old.clone()),
            imsi,
        ));
        rec.counters.cancellations += 1;
        apply_cancel(net, &old, imsi, now, policy);
    }

    let profile = net.hlr.lookup(imsi).expect("checked above").profile.clone();
    net.vlr_mut(msc).insert(VlrRecord {
        profile,
        la: la.clone(),
        cell: cell.clone(),
        status: SubscriberStatus::Idle,
    });
    rec.log(msg(
        now,
        StepLabel::Registration(5),
        MessageKind::VlrStore,
        NodeId::Msc(msc.clone()),
        NodeId::Msc(msc.clone()),
        imsi,
    ));
    Ok(())
}

/// Standard registration on arrival at `new_cell`: step 1 checks the local
/// VLR; on a miss steps 2-5 fetch the profile from the HLR, update the
/// pointer, cancel the old VLR, and store locally.
pub fn register_arrival(
    net: &mut Network,
    imsi: &Imsi,
    new_cell: &CellId,
    now: u64,
    rec: &mut Recorder,
) -> Result<RegistrationOutcome, ProtocolError> {
    let (la, msc) = net.topology.locate(new_cell)?;
    if !net.hlr.contains(imsi) {
        return Err(ProtocolError::UnknownImsi(imsi.clone()));
    }

    rec.log(msg(
        now,
        StepLabel::Registration(1),
        MessageKind::VlrCheck,
        NodeId::Msc(msc.clone()),
        NodeId::Msc(msc.clone()),
        imsi,
    ));
    rec.counters.vlr_lookups += 1;

    if let Some(record) = net.vlr_mut(&msc).lookup_mut(imsi) {
        record.la = la;
        record.cell = new_cell.clone();
        rec.counters.registrations_tier1_hit += 1;
        return Ok(RegistrationOutcome::AlreadyKnown);
    }

    full_registration(net, imsi, &la, &msc, new_cell, now, rec, CancelPolicy::Delete)?;
    rec.counters.registrations_full += 1;
    Ok(RegistrationOutcome::RegisteredFresh)
}

/// Cell change inside the current LA: the exact location is updated in the
/// serving VLR and nothing is signaled.
pub fn intra_la_move(
    net: &mut Network,
    imsi: &Imsi,
    new_cell: &CellId,
) -> Result<(), ProtocolError> {
    let (la, msc) = net.topology.locate(new_cell)?;
    let serving = net
        .hlr
        .lookup(imsi)
        .map_err(|_| ProtocolError::UnknownImsi(imsi.clone()))?
        .serving_vlr
        .clone()
        .ok_or_else(|| ProtocolError::NotRegisteredHere(imsi.clone()))?;
    if serving != msc {
        return Err(ProtocolError::NotRegisteredHere(imsi.clone()));
    }
    let record = net
        .vlr_mut(&msc)
        .lookup_mut(imsi)
        .ok_or_else(|| ProtocolError::NotRegisteredHere(imsi.clone()))?;
    if record.la != la {
        return Err(ProtocolError::LaMismatch {
            cell: new_cell.clone(),
            actual: la,
            expected: record.la.clone(),
        });
    }
    record.cell = new_cell.clone();
    Ok(())
}

/// Assigns a fresh TLDN at this MSC for a subscriber with an active
/// record here.
pub fn assign_tldn(net: &mut Network, msc: &MscId, imsi: &Imsi) -> Result<Tldn, ProtocolError> {
    let vlr = net.vlr_mut(msc);
    if vlr.lookup(imsi).is_none() {
        return Err(ProtocolError::NotRegisteredHere(imsi.clone()));
    }
    Ok(Tldn {
        value: vlr.allocate_tldn(),
        owner_msc: msc.clone(),
    })
}

/// Releases the routing number at call teardown so its value can be
/// reused.
pub fn release_tldn(net: &mut Network, tldn: &Tldn) {
    net.vlr_mut(&tldn.owner_msc).release_tldn(tldn.value);
}

fn calling_msc_of(net: &Network, caller: &Imsi) -> Result<MscId, ProtocolError> {
    let rec = net
        .hlr
        .lookup(caller)
        .map_err(|_| ProtocolError::UnknownImsi(caller.clone()))?;
    rec.serving_vlr
        .clone()
        .ok_or_else(|| ProtocolError::CallerDetached(caller.clone()))
}

/// Steps 2-6 of call delivery: location request to the callee's HLR, route
/// request to the serving MSC, TLDN assignment, TLDN forwarding, and the
/// call setup.
fn deliver_via_hlr(
    net: &mut Network,
    caller: &Imsi,
    callee: &Imsi,
    calling_msc: &MscId,
    now: u64,
    rec: &mut Recorder,
) -> Result<CallRoute, ProtocolError> {
    rec.log(msg(
        now,
        StepLabel::CallDelivery(2),
        MessageKind::LocationRequest,
        NodeId::Msc(calling_msc.clone()),
        NodeId::Hlr,
        callee,
    ));
    rec.location_request(calling_msc);

    let hlr_rec = net
        .hlr
        .lookup(callee)
        .map_err(|_| ProtocolError::UnknownImsi(callee.clone()))?;
    let called_msc = hlr_rec
        .serving_vlr
        .clone()
        .ok_or_else(|| ProtocolError::CalleeDetached(callee.clone()))?;

    rec.log(msg(
        now,
        StepLabel::CallDelivery(3),
        MessageKind::RouteRequest,
        NodeId::Hlr,
        NodeId::Msc(called_msc.clone()),
        callee,
    ));

    // The called MSC determines the cell location and assigns the TLDN.
    rec.counters.vlr_lookups += 1;
    let tldn = assign_tldn(net, &called_msc, callee)?;
    rec.log(msg(
        now,
        StepLabel::CallDelivery(4),
        MessageKind::TldnResponse,
        NodeId::Msc(called_msc.clone()),
        NodeId::Hlr,
        callee,
    ));

    rec.log(msg(
        now,
        StepLabel::CallDelivery(5),
        MessageKind::TldnForward,
        NodeId::Hlr,
        NodeId::Msc(calling_msc.clone()),
        callee,
    ));

    rec.log(msg(
        now,
        StepLabel::CallDelivery(6),
        MessageKind::CallSetup,
        NodeId::Msc(calling_msc.clone()),
        NodeId::Msc(called_msc.clone()),
        callee,
    ));

    Ok(CallRoute {
        caller: caller.clone(),
        callee: callee.clone(),
        calling_msc: calling_msc.clone(),
        called_msc,
        tldn,
    })
}

/// Standard call delivery: the six-step procedure through the HLR, with no
/// local short-circuit even when both parties share an MSC.
pub fn deliver_call(
    net: &mut Network,
    caller: &Imsi,
    callee: &Imsi,
    now: u64,
    rec: &mut Recorder,
) -> Result<CallRoute, ProtocolError> {
    if !net.hlr.contains(callee) {
        return Err(ProtocolError::UnknownImsi(callee.clone()));
    }
    let calling_msc = calling_msc_of(net, caller)?;
    rec.log(msg(
        now,
        StepLabel::CallDelivery(1),
        MessageKind::CallInit,
        NodeId::Mobile(caller.clone()),
        NodeId::Msc(calling_msc.clone()),
        callee,
    ));
    deliver_via_hlr(net, caller, callee, &calling_msc, now, rec)
}

/// Knobs of the intelligent scheme that the procedures need per event.
#[derive(Debug, Clone, Copy)]
pub struct IntelligentCtx<'a> {
    pub ttl: &'a TtlConfig,
    pub thresholds: &'a ClassifyThresholds,
    /// When set, a tier-2 hit also refreshes billing/service-validity
    /// fields from the HLR, at the cost of one profile query per hit.
    pub refresh_billing: bool,
    /// Day offset inside the current observation window.
    pub day_index: usize,
}

/// Intelligent registration: tier 1 first, then tier 2. A live tier-2
/// record is promoted back to tier 1 with no HLR profile fetch — only an
/// asynchronous pointer update keeps the HLR routable. A double miss runs
/// the standard procedure and seeds the tier-2 statistics.
pub fn intelligent_register(
    net: &mut Network,
    imsi: &Imsi,
    new_cell: &CellId,
    now: u64,
    rec: &mut Recorder,
    ctx: IntelligentCtx,
) -> Result<IntelligentOutcome, ProtocolError> {
    let (la, msc) = net.topology.locate(new_cell)?;
    if !net.hlr.contains(imsi) {
        return Err(ProtocolError::UnknownImsi(imsi.clone()));
    }

    rec.log(msg(
        now,
        StepLabel::Registration(1),
        MessageKind::VlrCheck,
        NodeId::Msc(msc.clone()),
        NodeId::Msc(msc.clone()),
        imsi,
    ));
    rec.counters.vlr_lookups += 1;

    if let Some(record) = net.vlr_mut(&msc).lookup_mut(imsi) {
        record.la = la;
        record.cell = new_cell.clone();
        rec.counters.registrations_tier1_hit += 1;
        return Ok(IntelligentOutcome::Tier1Hit);
    }

    rec.counters.vlr_lookups += 1;
    if net.vlr(&msc).tier2_live(imsi, now) {
        // Promotion: the cached profile serves, the HLR only learns the
        // new serving VLR.
        let prev = net
            .hlr
            .update_location(imsi, msc.clone(), la.clone())
            .map_err(|_| ProtocolError::UnknownImsi(imsi.clone()))?;
        rec.log(msg(
            now,
            StepLabel::Sync,
            MessageKind::PointerUpdate,
            NodeId::Msc(msc.clone()),
            NodeId::Hlr,
            imsi,
        ));
        rec.pointer_update(&msc);

        if ctx.refresh_billing {
            rec.log(msg(
                now,
                StepLabel::Sync,
                MessageKind::ProfileRequest,
                NodeId::Msc(msc.clone()),
                NodeId::Hlr,
                imsi,
            ));
            rec.profile_request(&msc);
        }

        if let Some(old) = prev.filter(|old| *old != msc) {
            rec.log(msg(
                now,
                StepLabel::Registration(4),
                MessageKind::CancelOld,
                NodeId::Hlr,
                NodeId::Msc(old.clone()),
                imsi,
            ));
            rec.counters.cancellations += 1;
            apply_cancel(
                net,
                &old,
                imsi,
                now,
                CancelPolicy::Demote(ctx.ttl, ctx.thresholds),
            );
        }

        let profile = net.hlr.lookup(imsi).expect("checked above").profile.clone();
        net.vlr_mut(&msc).insert(VlrRecord {
            profile: profile.clone(),
            la: la.clone(),
            cell: new_cell.clone(),
            status: SubscriberStatus::Idle,
        });
        net.vlr_mut(&msc)
            .record_visit(&profile, ctx.day_index, &la, now, ctx.ttl, ctx.thresholds)
            .expect("day index validated by the event loop");
        rec.counters.registrations_tier2_hit += 1;
        return Ok(IntelligentOutcome::Tier2HitPromoted);
    }

    // An expired tier-2 entry is a miss, not an error; drop the stale copy.
    net.vlr_mut(&msc).tier2_remove(imsi);

    full_registration(
        net,
        imsi,
        &la,
        &msc,
        new_cell,
        now,
        rec,
        CancelPolicy::Demote(ctx.ttl, ctx.thresholds),
    )?;
    let profile = net.hlr.lookup(imsi).expect("checked above").profile.clone();
    net.vlr_mut(&msc)
        .record_visit(&profile, ctx.day_index, &la, now, ctx.ttl, ctx.thresholds)
        .expect("day index validated by the event loop");
    rec.counters.registrations_full += 1;
    Ok(IntelligentOutcome::MissFullProcedure)
}

/// Intelligent call delivery: when the callee is actively served by the
/// caller's own MSC the HLR is not consulted and the TLDN is assigned
/// locally; otherwise the standard six-step procedure runs.
pub fn intelligent_deliver(
    net: &mut Network,
    caller: &Imsi,
    callee: &Imsi,
    now: u64,
    rec: &mut Recorder,
) -> Result<CallRoute, ProtocolError> {
    if !net.hlr.contains(callee) {
        return Err(ProtocolError::UnknownImsi(callee.clone()));
    }
    let calling_msc = calling_msc_of(net, caller)?;
    rec.log(msg(
        now,
        StepLabel::CallDelivery(1),
        MessageKind::CallInit,
        NodeId::Mobile(caller.clone()),
        NodeId::Msc(calling_msc.clone()),
        callee,
    ));

    // Check the local tiers before involving the HLR. Only an active
    // tier-1 record proves the callee is still in this area; a tier-2
    // record alone means the callee has departed and must be located
    // through the HLR.
    rec.counters.vlr_lookups += 1;
    if net.vlr(&calling_msc).lookup(callee).is_some() {
        let tldn = assign_tldn(net, &calling_msc, callee)?;
        rec.log(msg(
            now,
            StepLabel::CallDelivery(4),
            MessageKind::TldnResponse,
            NodeId::Msc(calling_msc.clone()),
            NodeId::Msc(calling_msc.clone()),
            callee,
        ));
        rec.log(msg(
            now,
            StepLabel::CallDelivery(6),
            MessageKind::CallSetup,
            NodeId::Msc(calling_msc.clone()),
            NodeId::Msc(calling_msc.clone()),
            callee,
        ));
        return Ok(CallRoute {
            caller: caller.clone(),
            callee: callee.clone(),
            calling_msc: calling_msc.clone(),
            called_msc: calling_msc,
            tldn,
        });
    }

    deliver_via_hlr(net, caller, callee, &calling_msc, now, rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message::MessageKind as K;
    use crate::topology::{NetworkTopology, TopologyEntry};

    fn two_msc_net() -> Network {
        let entries = [
            ("C1", "LA1", "MSC1"),
            ("C2", "LA1", "MSC1"),
            ("C3", "LA2", "MSC1"),
            ("C4", "LA3", "MSC2"),
        ]
        .map(|(c, l, m)| TopologyEntry {
            cell: CellId::new(c),
            la: LaId::new(l),
            msc: MscId::new(m),
        });
        let mut net = Network::new(NetworkTopology::build(&entries).unwrap(), 7);
        net.provision(Imsi::new("A"));
        net.provision(Imsi::new("B"));
        net
    }

    #[test]
    fn first_registration_logs_four_steps() {
        let mut net = two_msc_net();
        let mut rec = Recorder::new();
        let out = register_arrival(&mut net, &Imsi::new("A"), &CellId::new("C1"), 0, &mut rec)
            .unwrap();
        assert_eq!(out, RegistrationOutcome::RegisteredFresh);
        // No step 4: no old VLR existed.
        assert_eq!(
            rec.log.kinds(),
            vec![K::VlrCheck, K::ProfileRequest, K::ProfileResponseAndHlrUpdate, K::VlrStore]
        );
        assert_eq!(rec.counters.hlr_profile_requests, 1);
        assert_eq!(rec.counters.cancellations, 0);
    }

    #[test]
    fn roam_logs_all_five_steps_and_deletes_old_record() {
        let mut net = two_msc_net();
        let a = Imsi::new("A");
        let mut rec = Recorder::new();
        register_arrival(&mut net, &a, &CellId::new("C1"), 0, &mut rec).unwrap();
        let mut rec = Recorder::new();
        let out = register_arrival(&mut net, &a, &CellId::new("C4"), 100, &mut rec).unwrap();
        assert_eq!(out, RegistrationOutcome::RegisteredFresh);
        assert_eq!(
            rec.log.kinds(),
            vec![
                K::VlrCheck,
                K::ProfileRequest,
                K::ProfileResponseAndHlrUpdate,
                K::CancelOld,
                K::VlrStore
            ]
        );
        assert!(net.vlr(&MscId::new("MSC1")).lookup(&a).is_none());
        assert_eq!(
            net.hlr.lookup(&a).unwrap().serving_vlr,
            Some(MscId::new("MSC2"))
        );
    }

    #[test]
    fn step1_hit_logs_nothing_but_the_check() {
        let mut net = two_msc_net();
        let a = Imsi::new("A");
        let mut rec = Recorder::new();
        register_arrival(&mut net, &a, &CellId::new("C1"), 0, &mut rec).unwrap();
        let mut rec = Recorder::new();
        // C3 is a different LA of the same MSC: the VLR still holds the record.
        let out = register_arrival(&mut net, &a, &CellId::new("C3"), 50, &mut rec).unwrap();
        assert_eq!(out, RegistrationOutcome::AlreadyKnown);
        assert_eq!(rec.log.kinds(), vec![K::VlrCheck]);
        assert_eq!(rec.counters.hlr_profile_requests, 0);
    }

    #[test]
    fn intra_la_move_is_silent_and_checks_la() {
        let mut net = two_msc_net();
        let a = Imsi::new("A");
        let mut rec = Recorder::new();
        register_arrival(&mut net, &a, &CellId::new("C1"), 0, &mut rec).unwrap();
        let before = rec.log.len();
        intra_la_move(&mut net, &a, &CellId::new("C2")).unwrap();
        assert_eq!(rec.log.len(), before);
        assert_eq!(
            net.vlr(&MscId::new("MSC1")).lookup(&a).unwrap().cell,
            CellId::new("C2")
        );
        // C3 is another LA of the same MSC: caller must use register_arrival.
        assert!(matches!(
            intra_la_move(&mut net, &a, &CellId::new("C3")),
            Err(ProtocolError::LaMismatch { .. })
        ));
        // C4 is another MSC entirely.
        assert!(matches!(
            intra_la_move(&mut net, &a, &CellId::new("C4")),
            Err(ProtocolError::NotRegisteredHere(_))
        ));
    }

    #[test]
    fn deliver_call_logs_six_steps() {
        let mut net = two_msc_net();
        let (a, b) = (Imsi::new("A"), Imsi::new("B"));
        let mut rec = Recorder::new();
        register_arrival(&mut net, &a, &CellId::new("C1"), 0, &mut rec).unwrap();
        register_arrival(&mut net, &b, &CellId::new("C4"), 0, &mut rec).unwrap();
        let mut rec = Recorder::new();
        let route = deliver_call(&mut net, &a, &b, 10, &mut rec).unwrap();
        assert_eq!(
            rec.log.kinds(),
            vec![
                K::CallInit,
                K::LocationRequest,
                K::RouteRequest,
                K::TldnResponse,
                K::TldnForward,
                K::CallSetup
            ]
        );
        assert_eq!(route.called_msc, MscId::new("MSC2"));
        assert_eq!(route.tldn.owner_msc, MscId::new("MSC2"));
    }

    #[test]
    fn same_msc_call_still_runs_six_steps() {
        let mut net = two_msc_net();
        let (a, b) = (Imsi::new("A"), Imsi::new("B"));
        let mut rec = Recorder::new();
        register_arrival(&mut net, &a, &CellId::new("C1"), 0, &mut rec).unwrap();
        register_arrival(&mut net, &b, &CellId::new("C2"), 0, &mut rec).unwrap();
        let mut rec = Recorder::new();
        let route = deliver_call(&mut net, &a, &b, 10, &mut rec).unwrap();
        assert_eq!(rec.log.len(), 6);
        assert_eq!(route.called_msc, MscId::new("MSC1"));
    }

    #[test]
    fn detached_callee_stops_after_step_two() {
        let mut net = two_msc_net();
        let (a, b) = (Imsi::new("A"), Imsi::new("B"));
        let mut rec = Recorder::new();
        register_arrival(&mut net, &a, &CellId::new("C1"), 0, &mut rec).unwrap();
        let mut rec = Recorder::new();
        let err = deliver_call(&mut net, &a, &b, 10, &mut rec).unwrap_err();
        assert_eq!(err, ProtocolError::CalleeDetached(b));
        assert_eq!(rec.log.kinds(), vec![K::CallInit, K::LocationRequest]);
    }

    #[test]
    fn concurrent_calls_get_distinct_tldns() {
        let mut net = two_msc_net();
        let b = Imsi::new("B");
        let mut rec = Recorder::new();
        register_arrival(&mut net, &b, &CellId::new("C4"), 0, &mut rec).unwrap();
        let msc2 = MscId::new("MSC2");
        let t1 = assign_tldn(&mut net, &msc2, &b).unwrap();
        let t2 = assign_tldn(&mut net, &msc2, &b).unwrap();
        assert_ne!(t1.value, t2.value);
        release_tldn(&mut net, &t1);
        let t3 = assign_tldn(&mut net, &msc2, &b).unwrap();
        assert_eq!(t3.value, t1.value);
        // Not registered at MSC1.
        assert!(matches!(
            assign_tldn(&mut net, &MscId::new("MSC1"), &b),
            Err(ProtocolError::NotRegisteredHere(_))
        ));
    }

    #[test]
    fn unknown_imsi_and_unknown_cell() {
        let mut net = two_msc_net();
        let mut rec = Recorder::new();
        assert!(matches!(
            register_arrival(&mut net, &Imsi::new("Z"), &CellId::new("C1"), 0, &mut rec),
            Err(ProtocolError::UnknownImsi(_))
        ));
        assert!(matches!(
            register_arrival(&mut net, &Imsi::new("A"), &CellId::new("C9"), 0, &mut rec),
            Err(ProtocolError::UnknownCell(_))
        ));
    }

    fn ctx<'a>(ttl: &'a TtlConfig, th: &'a ClassifyThresholds, day: usize) -> IntelligentCtx<'a> {
        IntelligentCtx {
            ttl,
            thresholds: th,
            refresh_billing: false,
            day_index: day,
        }
    }

    #[test]
    fn intelligent_first_arrival_matches_baseline_log() {
        let ttl = TtlConfig::default();
        let th = ClassifyThresholds::default();
        let mut net = two_msc_net();
        let mut rec = Recorder::new();
        let out = intelligent_register(
            &mut net,
            &Imsi::new("A"),
            &CellId::new("C1"),
            0,
            &mut rec,
            ctx(&ttl, &th, 0),
        )
        .unwrap();
        assert_eq!(out, IntelligentOutcome::MissFullProcedure);

        let mut base_net = two_msc_net();
        let mut base_rec = Recorder::new();
        register_arrival(&mut base_net, &Imsi::new("A"), &CellId::new("C1"), 0, &mut base_rec)
            .unwrap();
        assert_eq!(rec.log, base_rec.log);
    }

    #[test]
    fn second_arrival_within_ttl_is_a_promotion_without_profile_fetch() {
        let ttl = TtlConfig::default();
        let th = ClassifyThresholds::default();
        let mut net = two_msc_net();
        let a = Imsi::new("A");
        let mut rec = Recorder::new();
        // Arrive at MSC1, roam to MSC2 (record at MSC1 is demoted), return.
        intelligent_register(&mut net, &a, &CellId::new("C1"), 0, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        intelligent_register(&mut net, &a, &CellId::new("C4"), 100, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        let mut rec = Recorder::new();
        let out = intelligent_register(
            &mut net,
            &a,
            &CellId::new("C1"),
            200,
            &mut rec,
            ctx(&ttl, &th, 0),
        )
        .unwrap();
        assert_eq!(out, IntelligentOutcome::Tier2HitPromoted);
        assert_eq!(rec.counters.hlr_profile_requests, 0);
        assert_eq!(rec.counters.hlr_pointer_updates, 1);
        assert_eq!(
            rec.log.kinds(),
            vec![K::VlrCheck, K::PointerUpdate, K::CancelOld]
        );
        // The promoted record is active again and the HLR routes here.
        assert!(net.vlr(&MscId::new("MSC1")).lookup(&a).is_some());
        assert_eq!(
            net.hlr.lookup(&a).unwrap().serving_vlr,
            Some(MscId::new("MSC1"))
        );
    }

    #[test]
    fn expired_tier2_record_is_a_miss() {
        let ttl = TtlConfig {
            low: 50,
            medium: 50,
            high: 50,
        };
        let th = ClassifyThresholds::default();
        let mut net = two_msc_net();
        let a = Imsi::new("A");
        let mut rec = Recorder::new();
        intelligent_register(&mut net, &a, &CellId::new("C1"), 0, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        intelligent_register(&mut net, &a, &CellId::new("C4"), 10, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        // Return after the TTL has lapsed.
        let mut rec = Recorder::new();
        let out = intelligent_register(
            &mut net,
            &a,
            &CellId::new("C1"),
            500,
            &mut rec,
            ctx(&ttl, &th, 0),
        )
        .unwrap();
        assert_eq!(out, IntelligentOutcome::MissFullProcedure);
        assert_eq!(rec.counters.hlr_profile_requests, 1);
    }

    #[test]
    fn refresh_billing_adds_one_profile_query_per_hit() {
        let ttl = TtlConfig::default();
        let th = ClassifyThresholds::default();
        let mut net = two_msc_net();
        let a = Imsi::new("A");
        let mut rec = Recorder::new();
        intelligent_register(&mut net, &a, &CellId::new("C1"), 0, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        intelligent_register(&mut net, &a, &CellId::new("C4"), 10, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        let mut rec = Recorder::new();
        let c = IntelligentCtx {
            refresh_billing: true,
            ..ctx(&ttl, &th, 0)
        };
        intelligent_register(&mut net, &a, &CellId::new("C1"), 20, &mut rec, c).unwrap();
        assert_eq!(rec.counters.registrations_tier2_hit, 1);
        assert_eq!(rec.counters.hlr_profile_requests, 1);
    }

    #[test]
    fn cached_callee_delivered_without_hlr() {
        let ttl = TtlConfig::default();
        let th = ClassifyThresholds::default();
        let mut net = two_msc_net();
        let (a, b) = (Imsi::new("A"), Imsi::new("B"));
        let mut rec = Recorder::new();
        intelligent_register(&mut net, &a, &CellId::new("C1"), 0, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        intelligent_register(&mut net, &b, &CellId::new("C2"), 0, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        let mut rec = Recorder::new();
        let route = intelligent_deliver(&mut net, &a, &b, 10, &mut rec).unwrap();
        assert!(!rec.log.kinds().contains(&K::LocationRequest));
        assert_eq!(rec.counters.hlr_location_requests, 0);
        assert_eq!(route.called_msc, MscId::new("MSC1"));
    }

    #[test]
    fn unknown_callee_falls_back_to_full_procedure() {
        let ttl = TtlConfig::default();
        let th = ClassifyThresholds::default();
        let mut net = two_msc_net();
        let (a, b) = (Imsi::new("A"), Imsi::new("B"));
        let mut rec = Recorder::new();
        intelligent_register(&mut net, &a, &CellId::new("C1"), 0, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        intelligent_register(&mut net, &b, &CellId::new("C4"), 0, &mut rec, ctx(&ttl, &th, 0))
            .unwrap();
        let mut rec = Recorder::new();
        let route = intelligent_deliver(&mut net, &a, &b, 10, &mut rec).unwrap();
        assert_eq!(rec.log.len(), 6);
        assert_eq!(rec.counters.hlr_location_requests, 1);
        assert_eq!(route.called_msc, MscId::new("MSC2"));
    }
}
