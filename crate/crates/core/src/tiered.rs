//! The two-tier VLR: tier 1 holds active visitors, tier 2 retains the
//! profiles and visit statistics of frequent visitors with a TTL.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fuzzy::{classify_visits, ClassifyThresholds, LinguisticLabel, VisitStats};
use crate::topology::{Imsi, LaId, MscId, SubscriberProfile, VlrRecord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TieredError {
    #[error("observation window has zero days")]
    EmptyWindow,
    #[error("day index {index} outside the {window}-day window")]
    DayOutOfWindow { index: usize, window: usize },
}

/// Retention time per linguistic label, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TtlConfig {
    pub low: u64,
    pub medium: u64,
    pub high: u64,
}

pub const SECONDS_PER_DAY: u64 = 86_400;

impl Default for TtlConfig {
    fn default() -> Self {
        // One 7-day window for every label.
        let week = 7 * SECONDS_PER_DAY;
        Self {
            low: week,
            medium: week,
            high: week,
        }
    }
}

impl TtlConfig {
    pub fn for_label(&self, label: LinguisticLabel) -> u64 {
        match label {
            LinguisticLabel::Low => self.low,
            LinguisticLabel::Medium => self.medium,
            LinguisticLabel::High => self.high,
        }
    }
}

/// Tier-2 entry: profile copy plus the visit statistics that drive
/// retention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzyVlrRecord {
    pub profile: SubscriberProfile,
    pub stats: VisitStats,
    pub label: LinguisticLabel,
    /// Instant after which the entry is eligible for eviction.
    pub expiry: u64,
    /// LA of the most recent visit to this MSC; advisory only.
    pub last_la: LaId,
}

/// Which IMSIs were seen in the MSC area on each day of the observation
/// window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationWindow {
    daily_sets: Vec<BTreeSet<Imsi>>,
}

impl ObservationWindow {
    pub fn new(days: usize) -> Self {
        Self {
            daily_sets: vec![BTreeSet::new(); days],
        }
    }

    pub fn from_sets(daily_sets: Vec<BTreeSet<Imsi>>) -> Self {
        Self { daily_sets }
    }

    pub fn days(&self) -> usize {
        self.daily_sets.len()
    }

    pub fn note(&mut self, day_index: usize, imsi: Imsi) -> Result<(), TieredError> {
        let window = self.daily_sets.len();
        self.daily_sets
            .get_mut(day_index)
            .ok_or(TieredError::DayOutOfWindow {
                index: day_index,
                window,
            })?
            .insert(imsi);
        Ok(())
    }

    pub fn daily_sets(&self) -> &[BTreeSet<Imsi>] {
        &self.daily_sets
    }

    pub fn reset(&mut self) {
        for set in &mut self.daily_sets {
            set.clear();
        }
    }
}

/// IMSIs present in the MSC area on every day of the window (the common
/// mobile stations).
pub fn get_common_ms(window: &ObservationWindow) -> Result<BTreeSet<Imsi>, TieredError> {
    let sets = window.daily_sets();
    let (first, rest) = sets.split_first().ok_or(TieredError::EmptyWindow)?;
    let mut common = first.clone();
    for set in rest {
        common.retain(|imsi| set.contains(imsi));
    }
    Ok(common)
}

/// Per-MSC location store with an active tier and a fuzzy retention tier,
/// plus the TLDN allocator for calls terminating here.
#[derive(Debug, Clone)]
pub struct TieredVlr {
    pub msc: MscId,
    tier1: BTreeMap<Imsi, VlrRecord>,
    tier2: BTreeMap<Imsi, FuzzyVlrRecord>,
    pub window: ObservationWindow,
    tldn_next: u64,
    tldn_free: Vec<u64>,
    tldn_live: BTreeSet<u64>,
}

impl TieredVlr {
    pub fn new(msc: MscId, window_days: usize) -> Self {
        Self {
            msc,
            tier1: BTreeMap::new(),
            tier2: BTreeMap::new(),
            window: ObservationWindow::new(window_days),
            tldn_next: 0,
            tldn_free: Vec::new(),
            tldn_live: BTreeSet::new(),
        }
    }

    // -- tier-1 keyed-store operations --

    pub fn insert(&mut self, record: VlrRecord) {
        self.tier1.insert(record.profile.imsi.clone(), record);
    }

    pub fn lookup(&self, imsi: &Imsi) -> Option<&VlrRecord> {
        self.tier1.get(imsi)
    }

    pub fn lookup_mut(&mut self, imsi: &Imsi) -> Option<&mut VlrRecord> {
        self.tier1.get_mut(imsi)
    }

    pub fn delete(&mut self, imsi: &Imsi) -> bool {
        self.tier1.remove(imsi).is_some()
    }

    pub fn tier1_imsis(&self) -> impl Iterator<Item = &Imsi> {
        self.tier1.keys()
    }

    pub fn tier1_len(&self) -> usize {
        self.tier1.len()
    }

    // -- tier-2 operations --

    pub fn tier2_get(&self, imsi: &Imsi) -> Option<&FuzzyVlrRecord> {
        self.tier2.get(imsi)
    }

    pub fn tier2_remove(&mut self, imsi: &Imsi) -> Option<FuzzyVlrRecord> {
        self.tier2.remove(imsi)
    }

    pub fn tier2_len(&self) -> usize {
        self.tier2.len()
    }

    pub fn tier2_is_empty(&self) -> bool {
        self.tier2.is_empty()
    }

    /// True when the tier-2 entry exists and has not yet expired at `now`.
    pub fn tier2_live(&self, imsi: &Imsi, now: u64) -> bool {
        self.tier2.get(imsi).is_some_and(|r| r.expiry > now)
    }

    /// Records one arrival into the MSC area: bumps the per-day tally,
    /// recomputes the total, the label, and the expiry, and notes the IMSI
    /// in the observation window. Creates the tier-2 entry on first visit.
    pub fn record_visit(
        &mut self,
        profile: &SubscriberProfile,
        day_index: usize,
        la: &LaId,
        now: u64,
        ttl: &TtlConfig,
        thresholds: &ClassifyThresholds,
    ) -> Result<&VisitStats, TieredError> {
        let window_days = self.window.days();
        if day_index >= window_days {
            return Err(TieredError::DayOutOfWindow {
                index: day_index,
                window: window_days,
            });
        }
        let imsi = profile.imsi.clone();
        self.window.note(day_index, imsi.clone())?;
        let entry = self
            .tier2
            .entry(imsi.clone())
            .or_insert_with(|| FuzzyVlrRecord {
                profile: profile.clone(),
                stats: VisitStats::new(imsi, window_days),
                label: LinguisticLabel::Low,
                expiry: now,
                last_la: la.clone(),
            });
        entry.profile = profile.clone();
        entry.stats.per_day_visits[day_index] += 1;
        entry.stats.total_visits += 1;
        entry.label = classify_visits(&entry.stats, thresholds);
        entry.expiry = now + ttl.for_label(entry.label);
        entry.last_la = la.clone();
        Ok(&entry.stats)
    }

    /// Moves a departing subscriber's tier-1 record down to tier 2,
    /// keeping accumulated statistics. Used when a cancel arrives from the
    /// HLR instead of deleting the record outright.
    pub fn demote(&mut self, imsi: &Imsi, now: u64, ttl: &TtlConfig, thresholds: &ClassifyThresholds) {
        if let Some(rec) = self.tier1.remove(imsi) {
            let window_days = self.window.days();
            let entry = self
                .tier2
                .entry(imsi.clone())
                .or_insert_with(|| FuzzyVlrRecord {
                    profile: rec.profile.clone(),
                    stats: VisitStats::new(imsi.clone(), window_days),
                    label: LinguisticLabel::Low,
                    expiry: now + ttl.for_label(LinguisticLabel::Low),
                    last_la: rec.la.clone(),
                });
            entry.profile = rec.profile;
            entry.label = classify_visits(&entry.stats, thresholds);
            entry.last_la = rec.la;
        }
    }

    /// Evicts every expired tier-2 record of a subscriber no longer in
    /// tier 1, and returns the evicted IMSIs in sorted order. An expired
    /// entry whose subscriber is still actively served here is refreshed
    /// instead, since the subscriber has not left the area.
    pub fn expire_records(&mut self, now: u64, ttl: &TtlConfig) -> Vec<Imsi> {
        let mut evicted = Vec::new();
        let mut refresh = Vec::new();
        for (imsi, rec) in &self.tier2 {
            if rec.expiry <= now {
                if self.tier1.contains_key(imsi) {
                    refresh.push(imsi.clone());
                } else {
                    evicted.push(imsi.clone());
                }
            }
        }
        for imsi in &evicted {
            self.tier2.remove(imsi);
            self.tier1.remove(imsi);
        }
        for imsi in refresh {
            let rec = self.tier2.get_mut(&imsi).expect("present");
            rec.expiry = now + ttl.for_label(rec.label);
        }
        evicted
    }

    /// Ends the observation window: in gated mode drops cached entries of
    /// visitors that were not common mobile stations (unless still actively
    /// served), then zeroes all remaining statistics and the daily sets.
    /// Returns the IMSIs dropped by the gate.
    pub fn end_window(&mut self, gated: bool) -> Vec<Imsi> {
        let mut dropped = Vec::new();
        if gated {
            let common = get_common_ms(&self.window).unwrap_or_default();
            let keep_active: BTreeSet<Imsi> = self.tier1.keys().cloned().collect();
            let to_drop: Vec<Imsi> = self
                .tier2
                .keys()
                .filter(|i| !common.contains(*i) && !keep_active.contains(*i))
                .cloned()
                .collect();
            for imsi in to_drop {
                self.tier2.remove(&imsi);
                dropped.push(imsi);
            }
        }
        for rec in self.tier2.values_mut() {
            rec.stats.per_day_visits.iter_mut().for_each(|v| *v = 0);
            rec.stats.total_visits = 0;
        }
        self.window.reset();
        dropped
    }

    // -- TLDN allocation --

    /// Hands out a routing-number value unique among the outstanding ones;
    /// released values are reused.
    pub fn allocate_tldn(&mut self) -> u64 {
        let value = match self.tldn_free.pop() {
            Some(v) => v,
            None => {
                let v = self.tldn_next;
                self.tldn_next += 1;
                v
            }
        };
        self.tldn_live.insert(value);
        value
    }

    pub fn release_tldn(&mut self, value: u64) {
        if self.tldn_live.remove(&value) {
            self.tldn_free.push(value);
        }
    }

    pub fn outstanding_tldns(&self) -> usize {
        self.tldn_live.len()
    }
}
