//! Parameter sweeps: one run per (axis value, seed), executed in parallel and
//! merged in `(value, seed)` order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::costmodel::{cost_breakdown, BreakdownRow, CostParams};
use crate::engine::{run, summarize, Aggregates};
use crate::Error;

/// The nine mobility seeds.
pub const DEFAULT_SEEDS: [u64; 9] = [0, 1, 2, 3, 4, 6, 7, 8, 9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Users,
    Workload,
    Vehicles,
    VehicleCapacityFraction,
    Speed,
    Beta,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] =
        [SweepAxis::Users, SweepAxis::Workload, SweepAxis::Vehicles, SweepAxis::VehicleCapacityFraction, SweepAxis::Speed, SweepAxis::Beta];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Users => "users",
            SweepAxis::Workload => "workload",
            SweepAxis::Vehicles => "vehicles",
            SweepAxis::VehicleCapacityFraction => "vehicle_capacity_fraction",
            SweepAxis::Speed => "speed",
            SweepAxis::Beta => "beta",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name.trim())
    }

    /// Whether the axis drives the cost model rather than the simulator.
    pub fn is_cost(self) -> bool {
        self == SweepAxis::Beta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// runs per value, taking the first `replications` seeds
    pub replications: usize,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Self {
        Self { axis, values, replications: DEFAULT_SEEDS.len(), seeds: DEFAULT_SEEDS.to_vec() }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.values.is_empty() {
            return Err(Error::invalid("sweep", "no values"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sweep", "values must be finite"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("sweep", "replications must be at least 1"));
        }
        if self.replications > self.seeds.len() {
            return Err(Error::invalid("sweep", format!("{} replications but only {} seeds", self.replications, self.seeds.len())));
        }
        Ok(())
    }

    pub fn used_seeds(&self) -> &[u64] {
        &self.seeds[..self.replications.min(self.seeds.len())]
    }

    /// Values in ascending order, duplicates removed.
    fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Applies one axis value to a run configuration.
pub fn apply_axis(base: &RunConfig, axis: SweepAxis, value: f64) -> Result<RunConfig, Error> {
    let count = |what: &'static str| -> Result<usize, Error> {
        if value >= 0.0 && value.fract() == 0.0 {
            Ok(value as usize)
        } else {
            Err(Error::invalid(what, format!("`{value}` is not a count")))
        }
    };
    let mut cfg = base.clone();
    match axis {
        SweepAxis::Users => cfg.users = count("users")?,
        SweepAxis::Workload => cfg.task.workload = value,
        SweepAxis::Vehicles => cfg.scenario.vehicles = count("vehicles")?,
        SweepAxis::VehicleCapacityFraction => cfg.compute.vehicle_capacity_fraction = value,
        SweepAxis::Speed => cfg.scenario.speed_kmh = value,
        SweepAxis::Beta => return Err(Error::invalid("sweep", "the beta axis sweeps the cost model")),
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    /// `None` on the per-value mean row
    pub seed: Option<u64>,
    pub agg: Aggregates,
}

/// Runs the simulator for every (value, seed) pair. Each value yields one
/// row per seed followed by a row averaging those runs.
pub fn run_sweep(spec: &SweepSpec, base: &RunConfig) -> Result<Vec<SweepRow>, Error> {
    spec.validate()?;
    let values = spec.sorted_values();
    let mut jobs = Vec::new();
    for &value in &values {
        let cfg = apply_axis(base, spec.axis, value)?;
        for &seed in spec.used_seeds() {
            jobs.push((value, seed, RunConfig { seed, ..cfg.clone() }));
        }
    }
    let results: Vec<Result<Aggregates, Error>> = jobs.par_iter().map(|(_, _, cfg)| run(cfg).map(|records| summarize(&records))).collect();

    let mut rows = Vec::with_capacity(jobs.len() + values.len());
    let mut it = jobs.iter().zip(results);
    for &value in &values {
        let mut group = Vec::with_capacity(spec.replications);
        for _ in spec.used_seeds() {
            let ((_, seed, _), agg) = it.next().expect("one result per job");
            let agg = agg?;
            rows.push(SweepRow { axis: spec.axis, value, seed: Some(*seed), agg: agg.clone() });
            group.push(agg);
        }
        rows.push(SweepRow { axis: spec.axis, value, seed: None, agg: mean_aggregates(&group) });
    }
    Ok(rows)
}

/// Cost rows for the beta axis, one per (years, beta).
pub fn cost_sweep(spec: &SweepSpec, base: &CostParams, years: &[f64], request_scale: f64) -> Result<Vec<BreakdownRow>, Error> {
    spec.validate()?;
    if !spec.axis.is_cost() {
        return Err(Error::invalid("sweep", format!("axis `{}` needs the simulator", spec.axis.name())));
    }
    cost_breakdown(base, &spec.sorted_values(), years, request_scale)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn mean_opt(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = xs.flatten().collect();
    (!present.is_empty()).then(|| mean(present.into_iter()))
}

fn mean_count(xs: impl Iterator<Item = usize>) -> usize {
    mean(xs.map(|x| x as f64)).round() as usize
}

/// Replication means: counts are rounded means, latencies and shares are
/// plain means over the runs that have them.
pub fn mean_aggregates(group: &[Aggregates]) -> Aggregates {
    let mut failures = [0; 5];
    let mut failure_pct = [0.0; 5];
    for k in 0..5 {
        failures[k] = mean_count(group.iter().map(|a| a.failures[k]));
        failure_pct[k] = mean(group.iter().map(|a| a.failure_pct[k]));
    }
    let mut class_pct = [0.0; 3];
    for (k, pct) in class_pct.iter_mut().enumerate() {
        *pct = mean(group.iter().map(|a| a.class_pct[k]));
    }
    Aggregates {
        requests: mean_count(group.iter().map(|a| a.requests)),
        decided: mean_count(group.iter().map(|a| a.decided)),
        successes: mean_count(group.iter().map(|a| a.successes)),
        in_flight: mean_count(group.iter().map(|a| a.in_flight)),
        to_cloud: mean_count(group.iter().map(|a| a.to_cloud)),
        to_edge: mean_count(group.iter().map(|a| a.to_edge)),
        to_vehicle: mean_count(group.iter().map(|a| a.to_vehicle)),
        failures,
        mean_total: mean_opt(group.iter().map(|a| a.mean_total)),
        p90: mean_opt(group.iter().map(|a| a.p90)),
        p95: mean_opt(group.iter().map(|a| a.p95)),
        p99: mean_opt(group.iter().map(|a| a.p99)),
        max: mean_opt(group.iter().map(|a| a.max)),
        cc_share_pct: mean(group.iter().map(|a| a.cc_share_pct)),
        vcc_uplink_pct: mean_opt(group.iter().map(|a| a.vcc_uplink_pct)),
        vcc_elaboration_pct: mean_opt(group.iter().map(|a| a.vcc_elaboration_pct)),
        vcc_downlink_pct: mean_opt(group.iter().map(|a| a.vcc_downlink_pct)),
        failure_pct,
        total_failure_pct: mean(group.iter().map(|a| a.total_failure_pct)),
        vehicles_used: mean_count(group.iter().map(|a| a.vehicles_used)),
        class_pct,
    }
}
