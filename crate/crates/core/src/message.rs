//! Signaling messages and the append-only, time-ordered message log.

use std::fmt;

use crate::topology::{Imsi, MscId};

/// A node that can appear as the endpoint of a signaling message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeId {
    Mobile(Imsi),
    Msc(MscId),
    Hlr,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Mobile(i) => write!(f, "MS({i})"),
            NodeId::Msc(m) => write!(f, "{m}"),
            NodeId::Hlr => f.write_str("HLR"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    /// Registration step 1: serving VLR checks its own database.
    VlrCheck,
    /// Registration step 2: VLR asks the HLR for the profile copy.
    ProfileRequest,
    /// Registration step 3: HLR returns the profile and updates its pointer.
    ProfileResponseAndHlrUpdate,
    /// Registration step 4: HLR instructs the old VLR to drop its record.
    CancelOld,
    /// Registration step 5: VLR stores the record with location and status.
    VlrStore,
    /// Call delivery step 1: calling mobile signals its MSC.
    CallInit,
    /// Call delivery step 2: calling MSC queries the callee's HLR.
    LocationRequest,
    /// Call delivery step 3: HLR routes the request to the serving MSC.
    RouteRequest,
    /// Call delivery step 4: called MSC returns the assigned TLDN.
    TldnResponse,
    /// Call delivery step 5: HLR forwards the TLDN to the calling MSC.
    TldnForward,
    /// Call delivery step 6: calling MSC sets the call up to the called MSC.
    CallSetup,
    /// Asynchronous serving-pointer update sent on a tier-2 cache hit.
    PointerUpdate,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MessageKind::VlrCheck => "vlr_check",
            MessageKind::ProfileRequest => "profile_request",
            MessageKind::ProfileResponseAndHlrUpdate => "profile_response_and_hlr_update",
            MessageKind::CancelOld => "cancel_old",
            MessageKind::VlrStore => "vlr_store",
            MessageKind::CallInit => "call_init",
            MessageKind::LocationRequest => "location_request",
            MessageKind::RouteRequest => "route_request",
            MessageKind::TldnResponse => "tldn_response",
            MessageKind::TldnForward => "tldn_forward",
            MessageKind::CallSetup => "call_setup",
            MessageKind::PointerUpdate => "pointer_update",
        };
        f.write_str(s)
    }
}

/// Which step of which procedure a message belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepLabel {
    Registration(u8),
    CallDelivery(u8),
    /// Out-of-procedure pointer synchronization.
    Sync,
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepLabel::Registration(n) => write!(f, "reg{n}"),
            StepLabel::CallDelivery(n) => write!(f, "call{n}"),
            StepLabel::Sync => f.write_str("sync"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub time: u64,
    pub step: StepLabel,
    pub kind: MessageKind,
    pub from: NodeId,
    pub to: NodeId,
    /// Subscriber the procedure is about.
    pub imsi: Imsi,
}

/// Append-only log ordered by simulated time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageLog {
    entries: Vec<Message>,
}

impl MessageLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&mut self, msg: Message) {
        debug_assert!(self.entries.last().map_or(true, |m| m.time <= msg.time));
        self.entries.push(msg);
    }

    pub fn entries(&self) -> &[Message] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn kinds(&self) -> Vec<MessageKind> {
        self.entries.iter().map(|m| m.kind).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for m in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                m.time, m.step, m.kind, m.from, m.to, m.imsi
            ));
        }
        out
    }
}
