//! Computation tiers: an infinite-server Cloud, one FIFO-queued Edge
//! processor, and vehicles that hold at most one task at a time.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelConfig, LinkClass};
use crate::scenario::VehicleState;
use crate::Error;

pub const CLOUD_MIPS: f64 = 2_356_230.0;
pub const EDGE_MIPS: f64 = 749_070.0;
pub const VEHICLE_MIPS: f64 = 71_120.0;
pub const EDGE_MAX_QUEUE: usize = 100;

pub type TaskId = u64;
pub type UserId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    /// million instructions
    pub workload: f64,
    /// request payload, bytes
    pub size: u64,
    /// result payload, bytes
    pub result_size: u64,
    pub created_at: f64,
    pub origin_user: UserId,
}

/// `W / C` seconds.
pub fn elaboration_time(workload: f64, capacity: f64) -> Result<f64, Error> {
    if !(capacity > 0.0) {
        return Err(Error::invalid("compute", "capacity must be positive"));
    }
    if !(workload >= 0.0) {
        return Err(Error::invalid("compute", "workload must be non-negative"));
    }
    Ok(workload / capacity)
}

/// Fixed wired part of a Cloud round trip: core network and Internet, both
/// directions.
pub fn cloud_fixed_roundtrip(cfg: &ChannelConfig) -> f64 {
    [LinkClass::CnUp, LinkClass::InternetUp, LinkClass::InternetDown, LinkClass::CnDown].into_iter().map(|l| cfg.link(l).base_latency).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudState {
    pub capacity: f64,
}

impl CloudState {
    pub fn new(capacity: f64) -> Self {
        Self { capacity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Queued {
    task: TaskId,
    enqueued_at: f64,
    start: f64,
    finish: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeOffer {
    Accepted { start: f64, finish: f64, t_queue: f64 },
    Overflow,
}

/// Single-processor FIFO server. Offers must arrive in nondecreasing time
/// order; service times are known on arrival, so each accepted task gets its
/// start and finish immediately.
#[derive(Debug, Clone)]
pub struct EdgeState {
    pub capacity: f64,
    pub max_queue: usize,
    waiting: VecDeque<Queued>,
    tail_finish: f64,
    last_started_finish: f64,
    accepted: u64,
    started: u64,
}

impl EdgeState {
    pub fn new(capacity: f64, max_queue: usize) -> Self {
        Self {
            capacity,
            max_queue,
            waiting: VecDeque::new(),
            tail_finish: f64::NEG_INFINITY,
            last_started_finish: f64::NEG_INFINITY,
            accepted: 0,
            started: 0,
        }
    }

    fn advance(&mut self, now: f64) {
        while let Some(front) = self.waiting.front() {
            if front.start > now {
                break;
            }
            self.last_started_finish = front.finish;
            self.started += 1;
            self.waiting.pop_front();
        }
    }

    /// Tasks waiting for the processor at `now`, excluding the one in service.
    pub fn queue_len(&mut self, now: f64) -> usize {
        self.advance(now);
        self.waiting.len()
    }

    pub fn busy(&mut self, now: f64) -> bool {
        self.advance(now);
        self.last_started_finish > now
    }

    pub fn would_overflow(&mut self, now: f64) -> bool {
        let queued = self.queue_len(now);
        queued >= self.max_queue && (self.busy(now) || queued > 0)
    }

    pub fn ec_offer(&mut self, task: &Task, now: f64) -> Result<EdgeOffer, Error> {
        if self.would_overflow(now) {
            return Ok(EdgeOffer::Overflow);
        }
        let start = now.max(self.tail_finish);
        let finish = start + elaboration_time(task.workload, self.capacity)?;
        self.tail_finish = finish;
        self.accepted += 1;
        let entry = Queued { task: task.id, enqueued_at: now, start, finish };
        if start <= now {
            self.last_started_finish = finish;
            self.started += 1;
        } else {
            self.waiting.push_back(entry);
        }
        Ok(EdgeOffer::Accepted { start, finish, t_queue: start - now })
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    /// (completed, in service, queued) at `now`.
    pub fn occupancy(&mut self, now: f64) -> (u64, u64, u64) {
        self.advance(now);
        let in_service = u64::from(self.started > 0 && self.last_started_finish > now);
        (self.started - in_service, in_service, self.waiting.len() as u64)
    }

    pub fn queued_ids(&self) -> impl Iterator<Item = (TaskId, f64)> + '_ {
        self.waiting.iter().map(|q| (q.task, q.enqueued_at))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VehicleOffer {
    Accepted { done_at: f64 },
    Rejected,
}

pub fn vehicle_offer(v: &mut VehicleState, task: &Task, now: f64) -> Result<VehicleOffer, Error> {
    if v.busy_until.is_some_and(|until| until > now) {
        return Ok(VehicleOffer::Rejected);
    }
    let done_at = now + elaboration_time(task.workload, v.capacity)?;
    v.busy_until = Some(done_at);
    Ok(VehicleOffer::Accepted { done_at })
}
