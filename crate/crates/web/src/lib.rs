//! Browser bindings: a short simulation, the cost breakdown, and vehicle
//! positions for drawing the loop. Every entry point takes and returns JSON.

use serde::{Deserialize, Serialize};
use vccsim::config::{RunConfig, ScenarioConfig, Strategy};
use vccsim::costmodel::{cost_breakdown, vcc_bonus, BreakdownRow, CostParams};
use vccsim::engine::fleet;
use vccsim::scenario::{in_coverage, position_at, Preset};
use vccsim::{run, summarize, Aggregates};
use wasm_bindgen::prelude::*;

/// Largest simulated horizon accepted from the page, seconds.
const MAX_DURATION: f64 = 60.0;

#[derive(Debug, Deserialize)]
#[serde(default)]
pub struct SimRequest {
    pub strategy: String,
    pub users: usize,
    pub vehicles: usize,
    pub speed_kmh: f64,
    pub workload: f64,
    pub capacity_fraction: f64,
    pub duration: f64,
    pub partial_coverage: bool,
    pub seed: u64,
}

impl Default for SimRequest {
    fn default() -> Self {
        let d = RunConfig::defaults(Strategy::VccFirst);
        Self {
            strategy: "vcc_first".into(),
            users: d.users,
            vehicles: d.scenario.vehicles,
            speed_kmh: d.scenario.speed_kmh,
            workload: d.task.workload,
            capacity_fraction: 1.0,
            duration: 20.0,
            partial_coverage: false,
            seed: 0,
        }
    }
}

impl SimRequest {
    fn config(&self) -> Result<RunConfig, String> {
        let strategy = Strategy::from_name(&self.strategy).ok_or_else(|| format!("unknown strategy `{}`", self.strategy))?;
        if !(self.duration > 0.0 && self.duration <= MAX_DURATION) {
            return Err(format!("duration must be in (0, {MAX_DURATION}] s"));
        }
        let mut cfg = RunConfig::defaults(strategy);
        if self.partial_coverage {
            cfg.scenario = ScenarioConfig::preset(Preset::PartialCoverage);
        }
        cfg.users = self.users;
        cfg.scenario.vehicles = self.vehicles;
        cfg.scenario.speed_kmh = self.speed_kmh;
        cfg.task.workload = self.workload;
        cfg.compute.vehicle_capacity_fraction = self.capacity_fraction;
        cfg.duration = self.duration;
        cfg.seed = self.seed;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Debug, Serialize)]
pub struct SimResponse {
    pub summary: Aggregates,
    /// successful offloading times, ms, in task order
    pub latencies_ms: Vec<f64>,
}

pub fn simulate_json(request: &str) -> Result<String, String> {
    let req: SimRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let records = run(&req.config()?).map_err(|e| e.to_string())?;
    let latencies_ms = records.iter().filter(|r| r.outcome == vccsim::Outcome::Success).map(|r| r.total * 1e3).collect();
    let resp = SimResponse { summary: summarize(&records), latencies_ms };
    serde_json::to_string(&resp).map_err(|e| e.to_string())
}

#[derive(Debug, Deserialize)]
#[serde(default)]
pub struct CostRequest {
    pub betas: Vec<f64>,
    pub years: Vec<f64>,
    pub request_scale: f64,
    pub users: f64,
}

impl Default for CostRequest {
    fn default() -> Self {
        Self { betas: vec![0.0, 1e-6, 2e-6], years: vec![1.0, 3.0, 5.0], request_scale: 1.0, users: CostParams::default().users }
    }
}

#[derive(Debug, Serialize)]
pub struct CostResponse {
    pub rows: Vec<BreakdownRow>,
    pub vcc_bonus: f64,
}

pub fn cost_json(request: &str) -> Result<String, String> {
    let req: CostRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let params = CostParams { users: req.users, ..CostParams::default() };
    let rows = cost_breakdown(&params, &req.betas, &req.years, req.request_scale).map_err(|e| e.to_string())?;
    let bonus = vcc_bonus(&CostParams { request_rate: params.request_rate * req.request_scale, ..params });
    serde_json::to_string(&CostResponse { rows, vcc_bonus: bonus }).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct Frame {
    pub t: f64,
    /// `[x, y, covered]` per vehicle
    pub vehicles: Vec<(f64, f64, bool)>,
}

#[derive(Debug, Serialize)]
pub struct Trajectory {
    pub loop_length: f64,
    pub loop_width: f64,
    pub bs: (f64, f64),
    pub coverage_radius: Option<f64>,
    pub frames: Vec<Frame>,
}

/// Vehicle positions every `step` seconds over the request's duration.
pub fn trajectory_json(request: &str, step: f64) -> Result<String, String> {
    let req: SimRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let cfg = req.config()?;
    if step.is_nan() || step <= 0.0 || cfg.duration / step > 10_000.0 {
        return Err("step too small".into());
    }
    let fleet = fleet(&cfg).map_err(|e| e.to_string())?;
    let g = &cfg.scenario.geometry;
    let frames = (0..=(cfg.duration / step) as usize)
        .map(|k| {
            let t = k as f64 * step;
            let vehicles = fleet
                .iter()
                .map(|v| {
                    let p = position_at(v, t, g);
                    (p.0, p.1, in_coverage(p, g))
                })
                .collect();
            Frame { t, vehicles }
        })
        .collect();
    let traj = Trajectory {
        loop_length: g.loop_length_x,
        loop_width: g.loop_width_y,
        bs: (g.bs_position.x, g.bs_position.y),
        coverage_radius: g.coverage_radius,
        frames,
    };
    serde_json::to_string(&traj).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn simulate(request: &str) -> Result<String, JsValue> {
    simulate_json(request).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn costs(request: &str) -> Result<String, JsValue> {
    cost_json(request).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn trajectory(request: &str, step: f64) -> Result<String, JsValue> {
    trajectory_json(request, step).map_err(|e| JsValue::from_str(&e))
}
