//! Mobility/call traces: the event model, the line-oriented file format,
//! and the commuter trace generator.

use thiserror::Error;

use crate::tiered::SECONDS_PER_DAY;
use crate::topology::{CellId, Imsi, LaId, NetworkTopology};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    MoveToCell(CellId),
    CallTo(Imsi),
    PowerOn(CellId),
    PowerOff,
}

impl EventKind {
    /// The cell this event places the subscriber in, when it has one.
    pub fn cell(&self) -> Option<&CellId> {
        match self {
            EventKind::MoveToCell(c) | EventKind::PowerOn(c) => Some(c),
            EventKind::CallTo(_) | EventKind::PowerOff => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    /// Seconds from epoch; one simulated day is 86 400 s.
    pub time: u64,
    pub imsi: Imsi,
    pub kind: EventKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceParseError {
    #[error("line {line}: expected `time_s, imsi, kind, arg`, got {got:?}")]
    Malformed { line: usize, got: String },
    #[error("line {line}: bad timestamp {got:?}")]
    BadTime { line: usize, got: String },
    #[error("line {line}: unknown event kind {got:?} (expected move|call|on|off)")]
    BadKind { line: usize, got: String },
    #[error("line {line}: event kind {kind} requires an argument")]
    MissingArg { line: usize, kind: String },
}

/// Parses the trace file format: one `time_s, imsi, kind, arg` event per
/// line, kind in {move, call, on, off}; `#` comments and blank lines are
/// skipped.
pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>, TraceParseError> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let fields: Vec<&str> = stripped.split(',').map(str::trim).collect();
        if !(3..=4).contains(&fields.len()) || fields[0].is_empty() || fields[1].is_empty() {
            return Err(TraceParseError::Malformed {
                line,
                got: raw.to_string(),
            });
        }
        let time = fields[0].parse::<u64>().map_err(|_| TraceParseError::BadTime {
            line,
            got: fields[0].to_string(),
        })?;
        let imsi = Imsi::new(fields[1]);
        let arg = fields.get(3).copied().unwrap_or("");
        let need_arg = |kind: &str| {
            if arg.is_empty() {
                Err(TraceParseError::MissingArg {
                    line,
                    kind: kind.to_string(),
                })
            } else {
                Ok(())
            }
        };
        let kind = match fields[2] {
            "move" => {
                need_arg("move")?;
                EventKind::MoveToCell(CellId::new(arg))
            }
            "call" => {
                need_arg("call")?;
                EventKind::CallTo(Imsi::new(arg))
            }
            "on" => {
                need_arg("on")?;
                EventKind::PowerOn(CellId::new(arg))
            }
            "off" => EventKind::PowerOff,
            other => {
                return Err(TraceParseError::BadKind {
                    line,
                    got: other.to_string(),
                })
            }
        };
        events.push(TraceEvent { time, imsi, kind });
    }
    Ok(events)
}

pub fn write_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        let (kind, arg) = match &e.kind {
            EventKind::MoveToCell(c) => ("move", c.as_str().to_string()),
            EventKind::CallTo(i) => ("call", i.as_str().to_string()),
            EventKind::PowerOn(c) => ("on", c.as_str().to_string()),
            EventKind::PowerOff => ("off", String::new()),
        };
        out.push_str(&format!("{},{},{},{}\n", e.time, e.imsi, kind, arg));
    }
    out
}

/// Default multiplier/increment for the trace jitter generator
/// (Knuth's MMIX constants). Both are overridable from the config file so
/// any implementation can reproduce identical traces.
pub const DEFAULT_LCG_MUL: u64 = 6364136223846793005;
pub const DEFAULT_LCG_INC: u64 = 1442695040888963407;

/// Seeded linear congruential generator; the only randomness source in
/// trace generation.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
    mul: u64,
    inc: u64,
}

impl Lcg {
    pub fn new(seed: u64, mul: u64, inc: u64) -> Self {
        Self {
            state: seed,
            mul,
            inc,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(self.mul).wrapping_add(self.inc);
        self.state
    }

    /// Uniform-ish value in [0, bound]; returns 0 for bound 0.
    pub fn below(&mut self, bound: u64) -> u64 {
        if bound == 0 {
            0
        } else {
            (self.next_u64() >> 16) % (bound + 1)
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceGenError {
    #[error("LA {0} does not exist in the topology")]
    UnknownLa(LaId),
    #[error("invalid commuter parameters: {0}")]
    InvalidParams(String),
}

/// Daily commuter pattern: leave home in the morning, pass through the
/// transit LAs, work all day, return home in the evening.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommuterParams {
    pub home_la: LaId,
    pub work_la: LaId,
    pub transit_las: Vec<LaId>,
    /// Seconds after midnight.
    pub leave_time: u64,
    pub return_time: u64,
    /// Dwell in each transit LA, seconds.
    pub transit_dwell: u64,
    /// Travel time from home to the first transit LA, seconds.
    pub travel: u64,
    pub days: u64,
    pub population: u32,
    pub seed: u64,
    /// Maximum per-day schedule jitter, seconds; 0 keeps exact times.
    pub jitter: u64,
    pub lcg_mul: u64,
    pub lcg_inc: u64,
}

impl CommuterParams {
    pub fn new(home_la: LaId, work_la: LaId, transit_las: Vec<LaId>) -> Self {
        Self {
            home_la,
            work_la,
            transit_las,
            leave_time: 8 * 3600,
            return_time: 20 * 3600,
            transit_dwell: 600,
            travel: 1800,
            days: 7,
            population: 1,
            seed: 0,
            jitter: 0,
            lcg_mul: DEFAULT_LCG_MUL,
            lcg_inc: DEFAULT_LCG_INC,
        }
    }
}

/// Generates a deterministic trace of `population` commuters over `days`
/// days. Each day a commuter leaves `home_la` at `leave_time`, enters the
/// first transit LA after `travel` seconds, dwells `transit_dwell` in each
/// transit LA, enters `work_la`, and re-enters `home_la` at `return_time`.
pub fn generate_commuter_trace(
    params: &CommuterParams,
    topology: &NetworkTopology,
) -> Result<Vec<TraceEvent>, TraceGenError> {
    if params.leave_time >= params.return_time {
        return Err(TraceGenError::InvalidParams(
            "leave_time must precede return_time".to_string(),
        ));
    }
    if params.transit_dwell == 0 {
        return Err(TraceGenError::InvalidParams(
            "transit_dwell must be positive".to_string(),
        ));
    }
    let n_transit = params.transit_las.len() as u64;
    let work_arrival = params.leave_time + params.travel + n_transit * params.transit_dwell;
    if work_arrival >= params.return_time {
        return Err(TraceGenError::InvalidParams(
            "morning leg would end after return_time".to_string(),
        ));
    }
    if params.return_time >= SECONDS_PER_DAY {
        return Err(TraceGenError::InvalidParams(
            "return_time must fall within the day".to_string(),
        ));
    }

    // Lexicographically smallest cell of an LA stands in for "somewhere in
    // that LA".
    let cell_of = |la: &LaId| -> Result<CellId, TraceGenError> {
        if !topology.contains_la(la) {
            return Err(TraceGenError::UnknownLa(la.clone()));
        }
        topology
            .cells_of_la(la)
            .next()
            .cloned()
            .ok_or_else(|| TraceGenError::UnknownLa(la.clone()))
    };
    let home_cell = cell_of(&params.home_la)?;
    let work_cell = cell_of(&params.work_la)?;
    let transit_cells: Vec<CellId> = params
        .transit_las
        .iter()
        .map(cell_of)
        .collect::<Result<_, _>>()?;

    let mut events = Vec::new();
    if params.days == 0 {
        return Ok(events);
    }
    let mut rng = Lcg::new(params.seed, params.lcg_mul, params.lcg_inc);
    for subscriber in 0..params.population {
        let imsi = Imsi::new(format!("SUB{subscriber:04}"));
        // First appearance: powered on at home at the very start.
        events.push(TraceEvent {
            time: 0,
            imsi: imsi.clone(),
            kind: EventKind::PowerOn(home_cell.clone()),
        });
        for day in 0..params.days {
            let base = day * SECONDS_PER_DAY;
            let jitter = rng.below(params.jitter);
            let mut t = base + params.leave_time + jitter + params.travel;
            for cell in &transit_cells {
                events.push(TraceEvent {
                    time: t,
                    imsi: imsi.clone(),
                    kind: EventKind::MoveToCell(cell.clone()),
                });
                t += params.transit_dwell;
            }
            events.push(TraceEvent {
                time: t,
                imsi: imsi.clone(),
                kind: EventKind::MoveToCell(work_cell.clone()),
            });
            events.push(TraceEvent {
                time: base + params.return_time + jitter,
                imsi: imsi.clone(),
                kind: EventKind::MoveToCell(home_cell.clone()),
            });
        }
    }
    // Stable sort: simultaneous events keep their generation order.
    events.sort_by_key(|e| e.time);
    Ok(events)
}
