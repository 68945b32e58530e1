//! Static network topology (cells, location areas, MSCs) and the home
//! location register.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                Self(value.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

id_type!(
    /// Permanent unique subscriber identity; keys every database record.
    Imsi
);
id_type!(CellId);
id_type!(LaId);
id_type!(MscId);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("line {line}: cell {cell} listed more than once")]
    DuplicateCell { line: usize, cell: CellId },
    #[error("line {line}: LA {la} assigned to both MSC {msc_a} and MSC {msc_b}")]
    OrphanLa {
        line: usize,
        la: LaId,
        msc_a: MscId,
        msc_b: MscId,
    },
    #[error("topology has no cells")]
    EmptyTopology,
    #[error("line {line}: expected `cell_id, la_id, msc_id`, got {got:?}")]
    MalformedRecord { line: usize, got: String },
    #[error("unknown cell {0}")]
    UnknownCell(CellId),
}

/// One record of a topology description: a cell with its LA and MSC
/// assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyEntry {
    pub cell: CellId,
    pub la: LaId,
    pub msc: MscId,
}

/// Static map of the coverage area: every cell belongs to exactly one LA,
/// every LA to exactly one MSC, one VLR per MSC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    cells: BTreeMap<CellId, LaId>,
    las: BTreeMap<LaId, MscId>,
    mscs: BTreeSet<MscId>,
}

impl NetworkTopology {
    /// Validates a list of cell records into a topology.
    pub fn build(entries: &[TopologyEntry]) -> Result<Self, TopologyError> {
        if entries.is_empty() {
            return Err(TopologyError::EmptyTopology);
        }
        let mut cells = BTreeMap::new();
        let mut las: BTreeMap<LaId, MscId> = BTreeMap::new();
        let mut mscs = BTreeSet::new();
        for (i, e) in entries.iter().enumerate() {
            let line = i + 1;
            if cells.contains_key(&e.cell) {
                return Err(TopologyError::DuplicateCell {
                    line,
                    cell: e.cell.clone(),
                });
            }
            if let Some(prev) = las.get(&e.la) {
                if *prev != e.msc {
                    return Err(TopologyError::OrphanLa {
                        line,
                        la: e.la.clone(),
                        msc_a: prev.clone(),
                        msc_b: e.msc.clone(),
                    });
                }
            }
            cells.insert(e.cell.clone(), e.la.clone());
            las.insert(e.la.clone(), e.msc.clone());
            mscs.insert(e.msc.clone());
        }
        Ok(Self { cells, las, mscs })
    }

    /// Parses the topology spec file format: one `cell_id, la_id, msc_id`
    /// record per line; `#` comments and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, TopologyError> {
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        let mut las: BTreeMap<LaId, (MscId, usize)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let fields: Vec<&str> = stripped.split(',').map(str::trim).collect();
            if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                return Err(TopologyError::MalformedRecord {
                    line,
                    got: raw.to_string(),
                });
            }
            let entry = TopologyEntry {
                cell: CellId::new(fields[0]),
                la: LaId::new(fields[1]),
                msc: MscId::new(fields[2]),
            };
            if !seen.insert(entry.cell.clone()) {
                return Err(TopologyError::DuplicateCell {
                    line,
                    cell: entry.cell,
                });
            }
            if let Some((msc, _)) = las.get(&entry.la) {
                if *msc != entry.msc {
                    return Err(TopologyError::OrphanLa {
                        line,
                        la: entry.la,
                        msc_a: msc.clone(),
                        msc_b: entry.msc,
                    });
                }
            } else {
                las.insert(entry.la.clone(), (entry.msc.clone(), line));
            }
            entries.push(entry);
        }
        Self::build(&entries)
    }

    /// Resolves a cell to its (LA, MSC) pair.
    pub fn locate(&self, cell: &CellId) -> Result<(LaId, MscId), TopologyError> {
        let la = self
            .cells
            .get(cell)
            .ok_or_else(|| TopologyError::UnknownCell(cell.clone()))?;
        let msc = self.las.get(la).expect("every LA maps to an MSC");
        Ok((la.clone(), msc.clone()))
    }

    pub fn mscs(&self) -> impl Iterator<Item = &MscId> {
        self.mscs.iter()
    }

    pub fn msc_count(&self) -> usize {
        self.mscs.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn contains_msc(&self, msc: &MscId) -> bool {
        self.mscs.contains(msc)
    }

    pub fn la_of_cell(&self, cell: &CellId) -> Option<&LaId> {
        self.cells.get(cell)
    }

    /// Cells of one LA, in id order.
    pub fn cells_of_la<'a>(&'a self, la: &'a LaId) -> impl Iterator<Item = &'a CellId> + 'a {
        self.cells
            .iter()
            .filter(move |(_, l)| *l == la)
            .map(|(c, _)| c)
    }

    pub fn contains_la(&self, la: &LaId) -> bool {
        self.las.contains_key(la)
    }
}

/// Enumerated service class carried in the subscriber profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServiceType {
    Voice,
    Data,
    VoiceAndData,
}

/// Master subscriber record. Fields the procedures never operate on
/// (ciphering keys, billing, GPRS access point) are carried as inert
/// strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubscriberProfile {
    pub imsi: Imsi,
    pub msisdn: String,
    pub tmsi: String,
    pub msrn: String,
    pub service_type: ServiceType,
    pub hlr_address: String,
    pub ciphering_keys: String,
    pub billing_info: String,
    pub gprs_access_point: String,
}

impl SubscriberProfile {
    /// Deterministic profile for a provisioned IMSI; every derived field
    /// is a pure function of the identity so runs reproduce bit-identically.
    pub fn provision(imsi: Imsi) -> Self {
        let s = imsi.as_str().to_string();
        Self {
            msisdn: format!("MSISDN-{s}"),
            tmsi: format!("TMSI-{s}-0"),
            msrn: format!("MSRN-{s}"),
            service_type: ServiceType::VoiceAndData,
            hlr_address: "HLR-1".to_string(),
            ciphering_keys: format!("KC-{s}"),
            billing_info: format!("BILL-{s}"),
            gprs_access_point: format!("APN-{s}"),
            imsi,
        }
    }
}

/// Idle/busy status held in the serving VLR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubscriberStatus {
    Idle,
    Busy,
}

/// Profile copy held by the serving VLR together with the exact location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VlrRecord {
    pub profile: SubscriberProfile,
    pub la: LaId,
    pub cell: CellId,
    pub status: SubscriberStatus,
}

/// HLR view of one subscriber: profile plus the pointer to the VLR
/// currently serving them. `serving_vlr` empty means detached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HlrRecord {
    pub profile: SubscriberProfile,
    pub serving_vlr: Option<MscId>,
    pub current_la: Option<LaId>,
    pub registration_count: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HlrError {
    #[error("IMSI {0} was never provisioned")]
    UnknownImsi(Imsi),
}

/// The home location register: one master record per provisioned IMSI.
#[derive(Debug, Clone, Default)]
pub struct Hlr {
    records: BTreeMap<Imsi, HlrRecord>,
}

impl Hlr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn provision(&mut self, profile: SubscriberProfile) {
        self.records.insert(
            profile.imsi.clone(),
            HlrRecord {
                profile,
                serving_vlr: None,
                current_la: None,
                registration_count: 0,
            },
        );
    }

    pub fn lookup(&self, imsi: &Imsi) -> Result<&HlrRecord, HlrError> {
        self.records
            .get(imsi)
            .ok_or_else(|| HlrError::UnknownImsi(imsi.clone()))
    }

    pub fn contains(&self, imsi: &Imsi) -> bool {
        self.records.contains_key(imsi)
    }

    /// Points the subscriber at a new serving VLR and returns the previous
    /// pointer so the caller can cancel the old VLR.
    pub fn update_location(
        &mut self,
        imsi: &Imsi,
        new_vlr: MscId,
        new_la: LaId,
    ) -> Result<Option<MscId>, HlrError> {
        let rec = self
            .records
            .get_mut(imsi)
            .ok_or_else(|| HlrError::UnknownImsi(imsi.clone()))?;
        let prev = rec.serving_vlr.replace(new_vlr);
        rec.current_la = Some(new_la);
        rec.registration_count += 1;
        rec.profile.tmsi = format!("TMSI-{}-{}", imsi.as_str(), rec.registration_count);
        Ok(prev)
    }

    /// Clears the serving pointer (power-off). Returns the VLR that was
    /// serving the subscriber, if any.
    pub fn detach(&mut self, imsi: &Imsi) -> Result<Option<MscId>, HlrError> {
        let rec = self
            .records
            .get_mut(imsi)
            .ok_or_else(|| HlrError::UnknownImsi(imsi.clone()))?;
        rec.current_la = None;
        Ok(rec.serving_vlr.take())
    }

    pub fn imsis(&self) -> impl Iterator<Item = &Imsi> {
        self.records.keys()
    }
}
