//! Whole-network state: the topology, the HLR, and one tiered VLR per MSC.

use std::collections::BTreeMap;

use crate::tiered::TieredVlr;
use crate::topology::{Hlr, Imsi, MscId, NetworkTopology, SubscriberProfile};

#[derive(Debug, Clone)]
pub struct Network {
    pub topology: NetworkTopology,
    pub hlr: Hlr,
    pub vlrs: BTreeMap<MscId, TieredVlr>,
}

impl Network {
    pub fn new(topology: NetworkTopology, window_days: usize) -> Self {
        let vlrs = topology
            .mscs()
            .map(|m| (m.clone(), TieredVlr::new(m.clone(), window_days)))
            .collect();
        Self {
            topology,
            hlr: Hlr::new(),
            vlrs,
        }
    }

    pub fn provision(&mut self, imsi: Imsi) {
        self.hlr.provision(SubscriberProfile::provision(imsi));
    }

    pub fn vlr(&self, msc: &MscId) -> &TieredVlr {
        self.vlrs.get(msc).expect("one VLR per MSC in the topology")
    }

    pub fn vlr_mut(&mut self, msc: &MscId) -> &mut TieredVlr {
        self.vlrs
            .get_mut(msc)
            .expect("one VLR per MSC in the topology")
    }
}
