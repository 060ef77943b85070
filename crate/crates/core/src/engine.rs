//! Discrete-event core: workload generation, the offloading lifecycle of
//! every task, and per-task records.
//!
//! Events are ordered by `(time, sequence number)`, the sequence number being
//! assigned when the event is scheduled, so a run is a pure function of its
//! configuration. Randomness comes from independent ChaCha streams derived
//! from the run seed: fleet placement, arrival phases, beacon phases, channel
//! losses and vehicle selection each own one.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{leg_outcome, LegOutcome, LinkClass, LinkLoad, LossReason};
use crate::compute::{elaboration_time, vehicle_offer, EdgeOffer, EdgeState, Task, TaskId, UserId, VehicleOffer};
use crate::config::{RunConfig, Strategy};
use crate::controller::{select_ecfirst, Destination, Registry};
use crate::scenario::{build_scenario, in_coverage, kmh_to_ms, position_at, VehicleId, VehicleState};
use crate::stats::percentile_sorted;
use crate::Error;

const STREAM_ARRIVALS: u64 = 1;
const STREAM_BEACONS: u64 = 2;
const STREAM_CHANNEL: u64 = 3;
const STREAM_SELECTION: u64 = 4;

/// Latency class thresholds, seconds.
pub const LATENCY_CLASSES: [f64; 3] = [0.016, 0.100, 0.500];

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureLeg {
    UserToGnb,
    GnbToVcc,
    Rejection,
    VccToGnb,
    GnbToUser,
}

impl FailureLeg {
    pub const ALL: [FailureLeg; 5] =
        [FailureLeg::UserToGnb, FailureLeg::GnbToVcc, FailureLeg::Rejection, FailureLeg::VccToGnb, FailureLeg::GnbToUser];

    pub fn name(self) -> &'static str {
        match self {
            FailureLeg::UserToGnb => "user_to_gnb",
            FailureLeg::GnbToVcc => "gnb_to_vcc",
            FailureLeg::Rejection => "rejection",
            FailureLeg::VccToGnb => "vcc_to_gnb",
            FailureLeg::GnbToUser => "gnb_to_user",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failed(FailureLeg),
    /// still travelling when the run ended
    InFlight,
}

/// Per-task outcome and time decomposition. Legs that do not apply to the
/// destination, or that were never reached, are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloadRecord {
    pub task_id: TaskId,
    pub user: UserId,
    pub created_at: f64,
    pub destination: Option<Destination>,
    pub dispatched_at: Option<f64>,
    /// Edge queue length seen by an ECFirst decision
    pub edge_queue_at_dispatch: Option<usize>,
    pub t_up_access: f64,
    pub t_up_cn: f64,
    pub t_up_internet: f64,
    pub t_gnb_to_vue: f64,
    pub t_queue: f64,
    pub t_elab: f64,
    pub t_vue_to_gnb: f64,
    pub t_down_internet: f64,
    pub t_down_cn: f64,
    pub t_down_access: f64,
    pub total: f64,
    /// event-clock time the result reached the user
    pub completed_at: Option<f64>,
    pub outcome: Outcome,
    pub loss: Option<LossReason>,
}

impl OffloadRecord {
    fn new(task: &Task) -> Self {
        Self {
            task_id: task.id,
            user: task.origin_user,
            created_at: task.created_at,
            destination: None,
            dispatched_at: None,
            edge_queue_at_dispatch: None,
            t_up_access: 0.0,
            t_up_cn: 0.0,
            t_up_internet: 0.0,
            t_gnb_to_vue: 0.0,
            t_queue: 0.0,
            t_elab: 0.0,
            t_vue_to_gnb: 0.0,
            t_down_internet: 0.0,
            t_down_cn: 0.0,
            t_down_access: 0.0,
            total: 0.0,
            completed_at: None,
            outcome: Outcome::InFlight,
            loss: None,
        }
    }

    /// Sum of the legs that make up the offloading time of this task's
    /// destination, in round-trip order.
    pub fn leg_sum(&self) -> f64 {
        match self.destination {
            Some(Destination::Cloud) => {
                self.t_up_access
                    + self.t_up_cn
                    + self.t_up_internet
                    + self.t_elab
                    + self.t_down_internet
                    + self.t_down_cn
                    + self.t_down_access
            }
            Some(Destination::Edge) => self.t_up_access + self.t_up_cn + self.t_queue + self.t_elab + self.t_down_cn + self.t_down_access,
            Some(Destination::Vehicle(_)) => self.t_up_access + self.t_gnb_to_vue + self.t_elab + self.t_vue_to_gnb + self.t_down_access,
            None => self.t_up_access,
        }
    }

    pub fn uplink(&self) -> f64 {
        self.t_up_access + self.t_up_cn + self.t_up_internet + self.t_gnb_to_vue
    }

    pub fn downlink(&self) -> f64 {
        self.t_vue_to_gnb + self.t_down_internet + self.t_down_cn + self.t_down_access
    }

    /// Vehicle and busy interval, for tasks a vehicle accepted.
    pub fn vehicle_service(&self) -> Option<(VehicleId, f64, f64)> {
        let Some(Destination::Vehicle(v)) = self.destination else { return None };
        let accepted =
            matches!(self.outcome, Outcome::Success | Outcome::Failed(FailureLeg::VccToGnb) | Outcome::Failed(FailureLeg::GnbToUser))
                || (self.outcome == Outcome::InFlight && self.t_elab > 0.0);
        if !accepted {
            return None;
        }
        let start = self.dispatched_at? + self.t_gnb_to_vue;
        Some((v, start, start + self.t_elab))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrival {
    pub t: f64,
    pub user: UserId,
}

/// Each user requests every `1 / rate` seconds starting at its phase. The
/// stream is sorted by time, ties broken by user.
pub fn periodic_arrivals(phases: &[f64], rate: f64, duration: f64) -> Vec<Arrival> {
    let period = 1.0 / rate;
    let mut out = Vec::new();
    for (user, &phase) in phases.iter().enumerate() {
        let mut k = 0u64;
        loop {
            let t = phase + k as f64 * period;
            if t >= duration {
                break;
            }
            out.push(Arrival { t, user: user as UserId });
            k += 1;
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.user.cmp(&b.user)));
    out
}

/// Task stream of a run: one uniform phase in `[0, 1/rate)` per user.
pub fn generate_arrivals<R: Rng + ?Sized>(cfg: &RunConfig, rng: &mut R) -> Vec<Task> {
    let period = 1.0 / cfg.request_rate;
    let phases: Vec<f64> = (0..cfg.users).map(|_| rng.random::<f64>() * period).collect();
    periodic_arrivals(&phases, cfg.request_rate, cfg.duration)
        .into_iter()
        .enumerate()
        .map(|(i, a)| Task {
            id: i as TaskId,
            workload: cfg.task.workload,
            size: cfg.task.size,
            result_size: cfg.task.result_size,
            created_at: a.t,
            origin_user: a.user,
        })
        .collect()
}

/// Vehicles of a run, exactly as the engine places them.
pub fn fleet(cfg: &RunConfig) -> Result<Vec<VehicleState>, Error> {
    build_scenario(
        &cfg.scenario.geometry,
        cfg.scenario.vehicles,
        kmh_to_ms(cfg.scenario.speed_kmh),
        cfg.compute.vehicle_capacity(),
        cfg.seed,
    )
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Arrival(usize),
    AtGnb(usize),
    VehicleReceive(usize, VehicleId),
    VehicleDone(usize, VehicleId),
    ResultAtGnb(usize),
    Complete(usize),
    BeaconEmit(VehicleId, u64),
    BeaconRx(VehicleId),
}

struct Scheduled {
    time: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // min-heap on (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

struct Sim<'a> {
    cfg: &'a RunConfig,
    now: f64,
    seq: u64,
    events: BinaryHeap<Scheduled>,
    tasks: Vec<Task>,
    records: Vec<OffloadRecord>,
    vehicles: Vec<VehicleState>,
    beacon_gen: Vec<u64>,
    registry: Registry,
    edge: EdgeState,
    load: LinkLoad,
    channel_rng: ChaCha8Rng,
    selection_rng: ChaCha8Rng,
    beacon_delay: f64,
}

impl<'a> Sim<'a> {
    fn schedule(&mut self, time: f64, event: Event) {
        self.events.push(Scheduled { time, seq: self.seq, event });
        self.seq += 1;
    }

    fn covered(&self, v: VehicleId, t: f64) -> bool {
        let geometry = &self.cfg.scenario.geometry;
        in_coverage(position_at(&self.vehicles[v as usize], t, geometry), geometry)
    }

    fn fail(&mut self, i: usize, leg: FailureLeg, loss: Option<LossReason>) {
        let rec = &mut self.records[i];
        rec.outcome = Outcome::Failed(leg);
        rec.loss = loss;
        rec.total = rec.leg_sum();
    }

    /// Starts a radio leg and returns its latency, or `None` after recording
    /// the failure.
    fn radio_leg(&mut self, i: usize, link: LinkClass, size: u64, speed: f64, covered: bool, leg: FailureLeg) -> Option<f64> {
        let latency = self.load.begin(link, size, self.now, &self.cfg.channel);
        match leg_outcome(&mut self.channel_rng, link, speed, true, covered, latency, &self.cfg.channel) {
            LegOutcome::Delivered(latency) => Some(latency),
            LegOutcome::Lost(reason) => {
                self.fail(i, leg, Some(reason));
                None
            }
        }
    }

    fn link_latency(&self, link: LinkClass) -> f64 {
        self.cfg.channel.link(link).base_latency
    }

    fn handle(&mut self, event: Event) -> Result<(), Error> {
        match event {
            Event::Arrival(i) => {
                let size = self.tasks[i].size;
                if let Some(lat) = self.radio_leg(i, LinkClass::PueUp, size, 0.0, true, FailureLeg::UserToGnb) {
                    self.records[i].t_up_access = lat;
                    self.schedule(self.now + lat, Event::AtGnb(i));
                }
            }
            Event::AtGnb(i) => {
                self.records[i].dispatched_at = Some(self.now);
                match self.cfg.strategy {
                    Strategy::EcFirst => self.dispatch_ecfirst(i)?,
                    Strategy::VccFirst => {
                        self.registry.expire_stale(self.now);
                        let dispatch = self.registry.select_vccfirst(&mut self.selection_rng, self.now);
                        match dispatch.destination {
                            Destination::Vehicle(v) => self.send_to_vehicle(i, v),
                            _ => self.send_to_cloud(i)?,
                        }
                    }
                }
            }
            Event::VehicleReceive(i, v) => {
                let task = &self.tasks[i];
                match vehicle_offer(&mut self.vehicles[v as usize], task, self.now)? {
                    VehicleOffer::Rejected => self.fail(i, FailureLeg::Rejection, None),
                    VehicleOffer::Accepted { done_at } => {
                        self.beacon_gen[v as usize] += 1;
                        self.records[i].t_elab = elaboration_time(task.workload, self.vehicles[v as usize].capacity)?;
                        self.schedule(done_at, Event::VehicleDone(i, v));
                    }
                }
            }
            Event::VehicleDone(i, v) => {
                let generation = self.beacon_gen[v as usize] + 1;
                self.beacon_gen[v as usize] = generation;
                // aperiodic beacon on becoming idle
                self.schedule(self.now, Event::BeaconEmit(v, generation));

                let size = self.tasks[i].result_size;
                let speed = self.vehicles[v as usize].speed;
                let lat = crate::channel::transfer_time(size, LinkClass::VueUp, 1, &self.cfg.channel);
                let covered = self.covered(v, self.now) && self.covered(v, self.now + lat);
                if let Some(lat) = self.radio_leg(i, LinkClass::VueUp, size, speed, covered, FailureLeg::VccToGnb) {
                    self.records[i].t_vue_to_gnb = lat;
                    self.schedule(self.now + lat, Event::ResultAtGnb(i));
                }
            }
            Event::ResultAtGnb(i) => {
                let size = self.tasks[i].result_size;
                if let Some(lat) = self.radio_leg(i, LinkClass::PueDown, size, 0.0, true, FailureLeg::GnbToUser) {
                    self.records[i].t_down_access = lat;
                    self.schedule(self.now + lat, Event::Complete(i));
                }
            }
            Event::Complete(i) => {
                let rec = &mut self.records[i];
                rec.outcome = Outcome::Success;
                rec.total = rec.leg_sum();
                rec.completed_at = Some(self.now);
            }
            Event::BeaconEmit(v, generation) => {
                if generation != self.beacon_gen[v as usize] {
                    return Ok(());
                }
                // out-of-cell beacons are never heard
                if self.covered(v, self.now) {
                    self.schedule(self.now + self.beacon_delay, Event::BeaconRx(v));
                }
                let next = self.now + self.cfg.controller.beacon_period;
                if next <= self.cfg.duration {
                    self.schedule(next, Event::BeaconEmit(v, generation));
                }
            }
            Event::BeaconRx(v) => self.registry.on_beacon(v, self.now),
        }
        Ok(())
    }

    fn dispatch_ecfirst(&mut self, i: usize) -> Result<(), Error> {
        let cn_up = self.link_latency(LinkClass::CnUp);
        let at_edge = self.now + cn_up;
        self.records[i].edge_queue_at_dispatch = Some(self.edge.queue_len(at_edge));
        let dispatch = select_ecfirst(&mut self.edge, self.now, at_edge);
        if dispatch.destination == Destination::Cloud {
            return self.send_to_cloud(i);
        }
        match self.edge.ec_offer(&self.tasks[i], at_edge)? {
            EdgeOffer::Overflow => self.send_to_cloud(i),
            EdgeOffer::Accepted { finish, t_queue, .. } => {
                let cn_down = self.link_latency(LinkClass::CnDown);
                let elab = elaboration_time(self.tasks[i].workload, self.cfg.compute.edge_mips)?;
                let rec = &mut self.records[i];
                rec.destination = Some(Destination::Edge);
                rec.t_up_cn = cn_up;
                rec.t_queue = t_queue;
                rec.t_elab = elab;
                rec.t_down_cn = cn_down;
                self.schedule(finish + cn_down, Event::ResultAtGnb(i));
                Ok(())
            }
        }
    }

    fn send_to_cloud(&mut self, i: usize) -> Result<(), Error> {
        let elab = elaboration_time(self.tasks[i].workload, self.cfg.compute.cloud_mips)?;
        let up_cn = self.link_latency(LinkClass::CnUp);
        let up_inet = self.link_latency(LinkClass::InternetUp);
        let down_inet = self.link_latency(LinkClass::InternetDown);
        let down_cn = self.link_latency(LinkClass::CnDown);
        let rec = &mut self.records[i];
        rec.destination = Some(Destination::Cloud);
        rec.t_up_cn = up_cn;
        rec.t_up_internet = up_inet;
        rec.t_elab = elab;
        rec.t_down_internet = down_inet;
        rec.t_down_cn = down_cn;
        let back = self.now + up_cn + up_inet + elab + down_inet + down_cn;
        self.schedule(back, Event::ResultAtGnb(i));
        Ok(())
    }

    fn send_to_vehicle(&mut self, i: usize, v: VehicleId) {
        self.records[i].destination = Some(Destination::Vehicle(v));
        let size = self.tasks[i].size;
        let speed = self.vehicles[v as usize].speed;
        let lat = crate::channel::transfer_time(size, LinkClass::VueDown, 1, &self.cfg.channel);
        // a vehicle that left the cell, or leaves it before the request
        // lands, never receives it
        let covered = self.covered(v, self.now) && self.covered(v, self.now + lat);
        if let Some(lat) = self.radio_leg(i, LinkClass::VueDown, size, speed, covered, FailureLeg::GnbToVcc) {
            self.records[i].t_gnb_to_vue = lat;
            self.schedule(self.now + lat, Event::VehicleReceive(i, v));
        }
    }
}

/// Runs one simulation and returns one record per generated task, in task
/// order.
pub fn run(cfg: &RunConfig) -> Result<Vec<OffloadRecord>, Error> {
    cfg.validate()?;
    let tasks = generate_arrivals(cfg, &mut rng_stream(cfg.seed, STREAM_ARRIVALS));
    let records = tasks.iter().map(OffloadRecord::new).collect();
    let vehicles = match cfg.strategy {
        Strategy::VccFirst => fleet(cfg)?,
        Strategy::EcFirst => Vec::new(),
    };
    let vue_up = cfg.channel.link(LinkClass::VueUp);
    let beacon_delay = vue_up.base_latency
        + match (cfg.controller.beacon_bytes, vue_up.rate) {
            (0, _) | (_, None) => 0.0,
            (bytes, Some(rate)) => bytes as f64 * 8.0 / rate,
        };
    let mut sim = Sim {
        cfg,
        now: 0.0,
        seq: 0,
        events: BinaryHeap::with_capacity(tasks.len() + vehicles.len()),
        records,
        beacon_gen: vec![0; vehicles.len()],
        vehicles,
        registry: Registry::new(cfg.controller.timeout, cfg.controller.beacon_period),
        edge: EdgeState::new(cfg.compute.edge_mips, cfg.compute.edge_max_queue),
        load: LinkLoad::new(),
        channel_rng: rng_stream(cfg.seed, STREAM_CHANNEL),
        selection_rng: rng_stream(cfg.seed, STREAM_SELECTION),
        beacon_delay,
        tasks,
    };
    for i in 0..sim.tasks.len() {
        let t = sim.tasks[i].created_at;
        sim.schedule(t, Event::Arrival(i));
    }
    let mut beacon_rng = rng_stream(cfg.seed, STREAM_BEACONS);
    for v in 0..sim.vehicles.len() {
        let phase = beacon_rng.random::<f64>() * cfg.controller.beacon_period;
        sim.schedule(phase, Event::BeaconEmit(v as VehicleId, 0));
    }
    while let Some(next) = sim.events.pop() {
        if next.time > cfg.duration {
            break;
        }
        sim.now = next.time;
        sim.handle(next.event)?;
    }
    Ok(sim.records)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub requests: usize,
    /// tasks that reached the Controller and got a destination
    pub decided: usize,
    pub successes: usize,
    pub in_flight: usize,
    pub to_cloud: usize,
    pub to_edge: usize,
    pub to_vehicle: usize,
    /// indexed like [`FailureLeg::ALL`]
    pub failures: [usize; 5],
    /// seconds, over successful tasks
    pub mean_total: Option<f64>,
    pub p90: Option<f64>,
    pub p95: Option<f64>,
    pub p99: Option<f64>,
    pub max: Option<f64>,
    pub cc_share_pct: f64,
    /// Uplink / elaboration / downlink shares of the offloading time over
    /// successful vehicle tasks.
    pub vcc_uplink_pct: Option<f64>,
    pub vcc_elaboration_pct: Option<f64>,
    pub vcc_downlink_pct: Option<f64>,
    /// indexed like [`FailureLeg::ALL`], percent of all requests
    pub failure_pct: [f64; 5],
    pub total_failure_pct: f64,
    pub vehicles_used: usize,
    /// percent of successes within each of [`LATENCY_CLASSES`]
    pub class_pct: [f64; 3],
}

pub fn summarize(records: &[OffloadRecord]) -> Aggregates {
    let mut agg = Aggregates { requests: records.len(), ..Aggregates::default() };
    let mut totals = Vec::new();
    let mut vehicles = BTreeSet::new();
    let (mut up, mut elab, mut down) = (0.0, 0.0, 0.0);
    for r in records {
        match r.destination {
            Some(Destination::Cloud) => agg.to_cloud += 1,
            Some(Destination::Edge) => agg.to_edge += 1,
            Some(Destination::Vehicle(v)) => {
                agg.to_vehicle += 1;
                vehicles.insert(v);
            }
            None => {}
        }
        match r.outcome {
            Outcome::Success => {
                agg.successes += 1;
                totals.push(r.total);
                if matches!(r.destination, Some(Destination::Vehicle(_))) {
                    up += r.uplink();
                    elab += r.t_elab;
                    down += r.downlink();
                }
            }
            Outcome::Failed(leg) => agg.failures[leg as usize] += 1,
            Outcome::InFlight => agg.in_flight += 1,
        }
    }
    agg.decided = agg.to_cloud + agg.to_edge + agg.to_vehicle;
    agg.vehicles_used = vehicles.len();
    if agg.decided > 0 {
        agg.cc_share_pct = 100.0 * agg.to_cloud as f64 / agg.decided as f64;
    }
    if agg.requests > 0 {
        let n = agg.requests as f64;
        for (pct, count) in agg.failure_pct.iter_mut().zip(agg.failures) {
            *pct = 100.0 * count as f64 / n;
        }
        agg.total_failure_pct = 100.0 * agg.failures.iter().sum::<usize>() as f64 / n;
    }
    if !totals.is_empty() {
        totals.sort_by(f64::total_cmp);
        let n = totals.len() as f64;
        agg.mean_total = Some(totals.iter().sum::<f64>() / n);
        agg.p90 = percentile_sorted(&totals, 90.0).ok();
        agg.p95 = percentile_sorted(&totals, 95.0).ok();
        agg.p99 = percentile_sorted(&totals, 99.0).ok();
        agg.max = totals.last().copied();
        for (pct, limit) in agg.class_pct.iter_mut().zip(LATENCY_CLASSES) {
            *pct = 100.0 * totals.iter().filter(|&&t| t <= limit).count() as f64 / n;
        }
    }
    let vcc_total = up + elab + down;
    if vcc_total > 0.0 {
        agg.vcc_uplink_pct = Some(100.0 * up / vcc_total);
        agg.vcc_elaboration_pct = Some(100.0 * elab / vcc_total);
        agg.vcc_downlink_pct = Some(100.0 * down / vcc_total);
    }
    agg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelConfig, ChannelPreset};

    fn lossless(strategy: Strategy) -> RunConfig {
        let mut cfg = RunConfig::defaults(strategy);
        cfg.channel = ChannelConfig::preset(ChannelPreset::Ideal);
        cfg
    }

    #[test]
    fn periodic_schedule() {
        let a = periodic_arrivals(&[0.0], 5.0, 1.0);
        let times: Vec<f64> = a.iter().map(|x| x.t).collect();
        assert_eq!(times.len(), 5);
        for (k, t) in times.iter().enumerate() {
            assert!((t - 0.2 * k as f64).abs() < 1e-12);
        }
        assert!(periodic_arrivals(&[0.0, 0.1], 5.0, 0.0).is_empty());
    }

    #[test]
    fn ties_break_by_user() {
        let a = periodic_arrivals(&[0.05, 0.05, 0.0], 10.0, 0.2);
        let order: Vec<_> = a.iter().map(|x| (x.user, x.t)).collect();
        assert_eq!(order[0], (2, 0.0));
        assert_eq!((order[1].0, order[2].0), (0, 1));
    }

    #[test]
    fn default_workload_count() {
        let cfg = RunConfig::defaults(Strategy::EcFirst);
        let tasks = generate_arrivals(&cfg, &mut rng_stream(3, STREAM_ARRIVALS));
        assert_eq!(tasks.len(), 4800);
        assert!(tasks.windows(2).all(|w| w[0].created_at <= w[1].created_at));
    }

    #[test]
    fn empty_fleet_sends_everything_to_cloud() {
        let mut cfg = lossless(Strategy::VccFirst);
        cfg.scenario.vehicles = 0;
        cfg.duration = 10.0;
        let records = run(&cfg).unwrap();
        let fixed = 0.074 + 500.0 / 2_356_230.0;
        for r in records.iter().filter(|r| r.outcome != Outcome::InFlight) {
            assert_eq!(r.destination, Some(Destination::Cloud));
            assert_eq!(r.outcome, Outcome::Success);
            let expected = r.t_up_access + fixed + r.t_down_access;
            assert!((r.total - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn lone_user_never_queues_at_edge() {
        let mut cfg = lossless(Strategy::EcFirst);
        cfg.users = 1;
        cfg.task.workload = 50.0;
        let records = run(&cfg).unwrap();
        assert!(records.iter().all(|r| r.t_queue == 0.0));
        assert!(records.iter().filter(|r| r.outcome == Outcome::Success).count() >= 599);
    }

    #[test]
    fn runs_are_reproducible() {
        let mut cfg = RunConfig::defaults(Strategy::VccFirst);
        cfg.duration = 20.0;
        cfg.seed = 6;
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn inapplicable_legs_are_zero() {
        for strategy in [Strategy::EcFirst, Strategy::VccFirst] {
            let mut cfg = RunConfig::defaults(strategy);
            cfg.duration = 20.0;
            for r in run(&cfg).unwrap() {
                match r.destination {
                    Some(Destination::Cloud) => assert_eq!(r.t_queue + r.t_gnb_to_vue + r.t_vue_to_gnb, 0.0),
                    Some(Destination::Edge) => assert_eq!(r.t_up_internet + r.t_down_internet + r.t_gnb_to_vue + r.t_vue_to_gnb, 0.0),
                    Some(Destination::Vehicle(_)) => {
                        assert_eq!(r.t_queue + r.t_up_cn + r.t_down_cn + r.t_up_internet + r.t_down_internet, 0.0)
                    }
                    None => assert!(matches!(r.outcome, Outcome::Failed(FailureLeg::UserToGnb))),
                }
            }
        }
    }

    #[test]
    fn summary_of_cloud_only_records() {
        let mut cfg = lossless(Strategy::VccFirst);
        cfg.scenario.vehicles = 0;
        cfg.duration = 5.0;
        let agg = summarize(&run(&cfg).unwrap());
        assert_eq!(agg.cc_share_pct, 100.0);
        assert_eq!(agg.vcc_elaboration_pct, None);
        assert_eq!(agg.class_pct[0], 0.0);
        assert_eq!(agg.requests, agg.successes + agg.in_flight + agg.failures.iter().sum::<usize>());
    }

    #[test]
    fn percentiles_of_summary_use_nearest_rank() {
        let base = OffloadRecord::new(&Task { id: 0, workload: 0.0, size: 0, result_size: 0, created_at: 0.0, origin_user: 0 });
        let records: Vec<OffloadRecord> =
            (1..=100).map(|ms| OffloadRecord { total: ms as f64 / 1000.0, outcome: Outcome::Success, ..base.clone() }).collect();
        let agg = summarize(&records);
        assert_eq!(agg.p90, Some(0.090));
        assert_eq!(agg.p99, Some(0.099));
        assert_eq!(agg.max, Some(0.1));
    }
}
