//! The base-station Controller: a beacon-fed registry of available vehicles
//! and the ECFirst / VCCFirst dispatch rules.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compute::EdgeState;
use crate::scenario::VehicleId;

pub const BEACON_PERIOD: f64 = 0.1;
pub const REGISTRY_TIMEOUT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Destination {
    Cloud,
    Edge,
    Vehicle(VehicleId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispatch {
    pub destination: Destination,
    pub decided_at: f64,
}

/// Vehicles the Controller believes are idle, keyed by id, with the time
/// their last beacon was processed.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    entries: BTreeMap<VehicleId, f64>,
    pub timeout: f64,
    pub beacon_period: f64,
}

impl Default for Registry {
    fn default() -> Self {
        Self::new(REGISTRY_TIMEOUT, BEACON_PERIOD)
    }
}

impl Registry {
    pub fn new(timeout: f64, beacon_period: f64) -> Self {
        Self { entries: BTreeMap::new(), timeout, beacon_period }
    }

    pub fn on_beacon(&mut self, vehicle: VehicleId, t: f64) {
        self.entries.insert(vehicle, t);
    }

    pub fn expire_stale(&mut self, t: f64) {
        let cutoff = t - self.timeout;
        self.entries.retain(|_, &mut last| last >= cutoff);
    }

    /// Uniform choice among registered vehicles; the chosen one leaves the
    /// registry. Falls back to the Cloud when nothing is registered.
    pub fn select_vccfirst<R: Rng + ?Sized>(&mut self, rng: &mut R, t: f64) -> Dispatch {
        let destination = if self.entries.is_empty() {
            Destination::Cloud
        } else {
            let pick = rng.random_range(0..self.entries.len());
            let id = *self.entries.keys().nth(pick).expect("index within registry");
            self.entries.remove(&id);
            Destination::Vehicle(id)
        };
        Dispatch { destination, decided_at: t }
    }

    pub fn contains(&self, vehicle: VehicleId) -> bool {
        self.entries.contains_key(&vehicle)
    }

    pub fn last_beacon(&self, vehicle: VehicleId) -> Option<f64> {
        self.entries.get(&vehicle).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VehicleId, f64)> + '_ {
        self.entries.iter().map(|(&id, &t)| (id, t))
    }
}

/// Edge unless its queue is saturated at `arrival_at_edge`.
pub fn select_ecfirst(edge: &mut EdgeState, decided_at: f64, arrival_at_edge: f64) -> Dispatch {
    let destination = if edge.would_overflow(arrival_at_edge) { Destination::Cloud } else { Destination::Edge };
    Dispatch { destination, decided_at }
}

/// Beacon times of a vehicle that became idle at `idle_since` and stays idle
/// until `until`: one aperiodic beacon on the transition, then one every
/// `period`.
pub fn vehicle_beacon_schedule(idle_since: f64, period: f64, until: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut k = 0u64;
    loop {
        let t = idle_since + k as f64 * period;
        if t > until {
            break;
        }
        times.push(t);
        k += 1;
    }
    times
}

/// First periodic beacon of a vehicle whose beacon clock has phase `phase`
/// (in `[0, period)`), at or after `t`.
pub fn next_periodic_beacon(t: f64, phase: f64, period: f64) -> f64 {
    if t <= phase {
        return phase;
    }
    // a beacon within 1e-9 periods of `t` counts as being at `t`
    let k = ((t - phase) / period - 1e-9).ceil();
    phase + k * period
}
