//! Run, cost and sweep configuration, and the `key = value` file format.
//!
//! One setting per line, `#` starts a comment, nested settings use dotted
//! keys (`scenario.vehicles = 40`). Numbers may be written as fractions
//! (`1/128`). Omitted keys take the documented defaults; unknown keys,
//! duplicates, and out-of-range values are errors naming the key and line.
//! Presets (`scenario.preset`, `channel.preset`) are applied before any
//! explicit override, whatever the line order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelConfig, ChannelPreset, LinkClass, Sharing};
use crate::compute::{CLOUD_MIPS, EDGE_MAX_QUEUE, EDGE_MIPS, VEHICLE_MIPS};
use crate::controller::{BEACON_PERIOD, REGISTRY_TIMEOUT};
use crate::costmodel::CostParams;
use crate::scenario::{Preset, ScenarioGeometry};
use crate::sweep::{SweepAxis, SweepSpec, DEFAULT_SEEDS};
use crate::Error;

/// Cell radius of the partial-coverage preset, meters.
pub const PARTIAL_COVERAGE_RADIUS: f64 = 450.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    EcFirst,
    VccFirst,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::EcFirst => "ec_first",
            Strategy::VccFirst => "vcc_first",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace('_', "").as_str() {
            "ecfirst" => Some(Strategy::EcFirst),
            "vccfirst" => Some(Strategy::VccFirst),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTemplate {
    /// million instructions
    pub workload: f64,
    /// bytes
    pub size: u64,
    /// bytes
    pub result_size: u64,
}

impl Default for TaskTemplate {
    fn default() -> Self {
        Self { workload: 500.0, size: 4000, result_size: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub preset: Preset,
    pub geometry: ScenarioGeometry,
    pub vehicles: usize,
    pub speed_kmh: f64,
}

impl ScenarioConfig {
    pub fn preset(preset: Preset) -> Self {
        let geometry = match preset {
            Preset::TotalCoverage => ScenarioGeometry::total_coverage(),
            Preset::PartialCoverage => ScenarioGeometry::partial_coverage(PARTIAL_COVERAGE_RADIUS),
        };
        Self { preset, geometry, vehicles: 40, speed_kmh: 13.1 }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::preset(Preset::TotalCoverage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeConfig {
    pub cloud_mips: f64,
    pub edge_mips: f64,
    pub vehicle_mips: f64,
    pub vehicle_capacity_fraction: f64,
    pub edge_max_queue: usize,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            cloud_mips: CLOUD_MIPS,
            edge_mips: EDGE_MIPS,
            vehicle_mips: VEHICLE_MIPS,
            vehicle_capacity_fraction: 1.0,
            edge_max_queue: EDGE_MAX_QUEUE,
        }
    }
}

impl ComputeConfig {
    pub fn vehicle_capacity(&self) -> f64 {
        self.vehicle_mips * self.vehicle_capacity_fraction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub beacon_period: f64,
    pub timeout: f64,
    /// Beacon payload; zero makes beacons free apart from the access latency.
    pub beacon_bytes: u64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self { beacon_period: BEACON_PERIOD, timeout: REGISTRY_TIMEOUT, beacon_bytes: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub strategy: Strategy,
    pub users: usize,
    /// requests per second per user
    pub request_rate: f64,
    /// seconds
    pub duration: f64,
    pub task: TaskTemplate,
    pub scenario: ScenarioConfig,
    pub channel: ChannelConfig,
    pub compute: ComputeConfig,
    pub controller: ControllerConfig,
    pub seed: u64,
}

impl RunConfig {
    /// Defaults for every field with the given strategy.
    pub fn defaults(strategy: Strategy) -> Self {
        Self {
            strategy,
            users: 8,
            request_rate: 5.0,
            duration: 120.0,
            task: TaskTemplate::default(),
            scenario: ScenarioConfig::default(),
            channel: ChannelConfig::default(),
            compute: ComputeConfig::default(),
            controller: ControllerConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.duration > 0.0) {
            return Err(Error::invalid("run", "duration must be positive"));
        }
        if !(self.request_rate > 0.0) {
            return Err(Error::invalid("run", "request rate must be positive"));
        }
        if !(self.task.workload >= 0.0) {
            return Err(Error::invalid("task", "workload must be non-negative"));
        }
        if !(self.scenario.speed_kmh >= 0.0) {
            return Err(Error::invalid("scenario", "speed must be non-negative"));
        }
        self.scenario.geometry.validate()?;
        self.channel.validate()?;
        let c = &self.compute;
        if !(c.cloud_mips > 0.0 && c.edge_mips > 0.0 && c.vehicle_capacity() > 0.0) {
            return Err(Error::invalid("compute", "capacities must be positive"));
        }
        let ctl = &self.controller;
        if !(ctl.beacon_period > 0.0 && ctl.timeout >= 0.0) {
            return Err(Error::invalid("controller", "beacon period must be positive, timeout non-negative"));
        }
        Ok(())
    }
}

/// Everything one config file can hold.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    /// `None` when the file does not name a strategy; simulation commands
    /// then refuse it.
    pub strategy: Option<Strategy>,
    /// Run settings; `run.strategy` mirrors `strategy` when it is set.
    pub run: RunConfig,
    pub cost: CostParams,
    pub sweep: Option<SweepSpec>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self { strategy: None, run: RunConfig::defaults(Strategy::VccFirst), cost: CostParams::default(), sweep: None }
    }
}

impl ConfigFile {
    pub fn run_config(&self) -> Result<RunConfig, Error> {
        match self.strategy {
            Some(_) => Ok(self.run.clone()),
            None => Err(Error::Config { key: "strategy".into(), line: 0, msg: "missing mandatory key".into() }),
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, Error> {
        self.sweep.clone().ok_or_else(|| Error::Config { key: "sweep.axis".into(), line: 0, msg: "no sweep defined".into() })
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Reader {
    entries: BTreeMap<String, Entry>,
}

fn config_err(key: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), line, msg: msg.into() }
}

/// A decimal number or a `num/den` fraction.
pub fn parse_number(text: &str) -> Option<f64> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            if den == 0.0 {
                return None;
            }
            num / den
        }
        None => text.parse().ok()?,
    };
    value.is_finite().then_some(value)
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn f64(&mut self, key: &str, target: &mut f64) -> Result<(), Error> {
        if let Some(e) = self.take(key) {
            *target = parse_number(&e.value).ok_or_else(|| config_err(key, e.line, format!("expected a number, got `{}`", e.value)))?;
        }
        Ok(())
    }

    fn f64_min(&mut self, key: &str, target: &mut f64, min: f64, inclusive: bool) -> Result<(), Error> {
        let line = self.entries.get(key).map(|e| e.line);
        self.f64(key, target)?;
        if let Some(line) = line {
            let ok = if inclusive { *target >= min } else { *target > min };
            if !ok {
                let op = if inclusive { ">=" } else { ">" };
                return Err(config_err(key, line, format!("must be {op} {min}")));
            }
        }
        Ok(())
    }

    fn opt_f64(&mut self, key: &str, target: &mut Option<f64>) -> Result<(), Error> {
        if let Some(e) = self.take(key) {
            if e.value == "unbounded" {
                *target = None;
            } else {
                let v = parse_number(&e.value)
                    .ok_or_else(|| config_err(key, e.line, format!("expected a number or `unbounded`, got `{}`", e.value)))?;
                if v < 0.0 {
                    return Err(config_err(key, e.line, "must be >= 0"));
                }
                *target = Some(v);
            }
        }
        Ok(())
    }

    fn integer<T: TryFrom<u64>>(&mut self, key: &str, target: &mut T) -> Result<(), Error> {
        if let Some(e) = self.take(key) {
            let v: u64 =
                e.value.parse().map_err(|_| config_err(key, e.line, format!("expected a non-negative integer, got `{}`", e.value)))?;
            *target = T::try_from(v).map_err(|_| config_err(key, e.line, "integer out of range"))?;
        }
        Ok(())
    }

    fn boolean(&mut self, key: &str, target: &mut bool) -> Result<(), Error> {
        if let Some(e) = self.take(key) {
            *target = match e.value.as_str() {
                "true" => true,
                "false" => false,
                other => return Err(config_err(key, e.line, format!("expected true or false, got `{other}`"))),
            };
        }
        Ok(())
    }

    fn list_f64(&mut self, key: &str) -> Result<Option<(Vec<f64>, usize)>, Error> {
        let Some(e) = self.take(key) else { return Ok(None) };
        let values = e
            .value
            .split(',')
            .map(|item| parse_number(item).ok_or_else(|| config_err(key, e.line, format!("bad list item `{}`", item.trim()))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some((values, e.line)))
    }
}

pub fn parse_config(text: &str) -> Result<ConfigFile, Error> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(config_err(content, line, "expected `key = value`"));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(config_err(key, line, "empty key"));
        }
        let entry = Entry { value: value.trim().to_string(), line };
        if let Some(prev) = entries.insert(key.to_string(), entry) {
            return Err(config_err(key, line, format!("duplicate key, first set on line {}", prev.line)));
        }
    }
    let mut r = Reader { entries };
    let mut cfg = ConfigFile::default();

    if let Some(e) = r.take("strategy") {
        if e.value.is_empty() {
            return Err(config_err("strategy", e.line, "mandatory value is empty"));
        }
        let s = Strategy::from_name(&e.value)
            .ok_or_else(|| config_err("strategy", e.line, format!("expected ec_first or vcc_first, got `{}`", e.value)))?;
        cfg.strategy = Some(s);
        cfg.run.strategy = s;
    }
    let run = &mut cfg.run;
    r.integer("seed", &mut run.seed)?;
    r.integer("users", &mut run.users)?;
    r.f64_min("request_rate", &mut run.request_rate, 0.0, false)?;
    r.f64_min("duration", &mut run.duration, 0.0, false)?;

    r.f64_min("task.workload", &mut run.task.workload, 0.0, true)?;
    r.integer("task.size", &mut run.task.size)?;
    r.integer("task.result_size", &mut run.task.result_size)?;

    if let Some(e) = r.take("scenario.preset") {
        let preset =
            Preset::from_name(&e.value).ok_or_else(|| config_err("scenario.preset", e.line, format!("unknown preset `{}`", e.value)))?;
        run.scenario = ScenarioConfig::preset(preset);
    }
    let sc = &mut run.scenario;
    r.integer("scenario.vehicles", &mut sc.vehicles)?;
    r.f64_min("scenario.speed_kmh", &mut sc.speed_kmh, 0.0, true)?;
    r.f64_min("scenario.loop_length", &mut sc.geometry.loop_length_x, 0.0, false)?;
    r.f64_min("scenario.loop_width", &mut sc.geometry.loop_width_y, 0.0, false)?;
    r.f64("scenario.bs_x", &mut sc.geometry.bs_position.x)?;
    r.f64("scenario.bs_y", &mut sc.geometry.bs_position.y)?;
    r.f64_min("scenario.bs_z", &mut sc.geometry.bs_position.z, 0.0, false)?;
    r.f64_min("scenario.ue_height", &mut sc.geometry.ue_height, 0.0, true)?;
    r.opt_f64("scenario.coverage_radius", &mut sc.geometry.coverage_radius)?;

    let cp = &mut run.compute;
    r.f64_min("compute.cloud_mips", &mut cp.cloud_mips, 0.0, false)?;
    r.f64_min("compute.edge_mips", &mut cp.edge_mips, 0.0, false)?;
    r.f64_min("compute.vehicle_mips", &mut cp.vehicle_mips, 0.0, false)?;
    r.f64_min("compute.vehicle_capacity_fraction", &mut cp.vehicle_capacity_fraction, 0.0, false)?;
    r.integer("compute.edge_max_queue", &mut cp.edge_max_queue)?;

    let ctl = &mut run.controller;
    r.f64_min("controller.beacon_period", &mut ctl.beacon_period, 0.0, false)?;
    r.f64_min("controller.timeout", &mut ctl.timeout, 0.0, true)?;
    r.integer("controller.beacon_bytes", &mut ctl.beacon_bytes)?;

    if let Some(e) = r.take("channel.preset") {
        let preset = ChannelPreset::from_name(&e.value)
            .ok_or_else(|| config_err("channel.preset", e.line, format!("unknown preset `{}`", e.value)))?;
        run.channel = ChannelConfig::preset(preset);
    }
    if let Some(e) = r.take("channel.sharing") {
        run.channel.sharing = match e.value.as_str() {
            "processor_sharing" => Sharing::ProcessorSharing,
            "none" => Sharing::None,
            other => return Err(config_err("channel.sharing", e.line, format!("expected processor_sharing or none, got `{other}`"))),
        };
    }
    for link in LinkClass::ALL {
        let prefix = format!("channel.{}", link.name());
        let lines: Vec<(String, usize)> = ["p_base", "k_speed"]
            .iter()
            .filter_map(|f| {
                let key = format!("{prefix}.{f}");
                r.entries.get(&key).map(|e| (key, e.line))
            })
            .collect();
        let rate_key = format!("{prefix}.rate");
        let rate_line = r.entries.get(&rate_key).map_or(0, |e| e.line);
        let p = run.channel.link_mut(link);
        r.f64_min(&format!("{prefix}.base_latency"), &mut p.base_latency, 0.0, true)?;
        r.opt_f64(&rate_key, &mut p.rate)?;
        if p.rate == Some(0.0) {
            return Err(config_err(&rate_key, rate_line, "must be > 0"));
        }
        r.f64_min(&format!("{prefix}.p_base"), &mut p.p_base, 0.0, true)?;
        r.f64_min(&format!("{prefix}.k_speed"), &mut p.k_speed, 0.0, true)?;
        if p.p_base > 1.0 {
            let line = lines.iter().find(|(k, _)| k.ends_with("p_base")).map_or(0, |(_, l)| *l);
            return Err(config_err(&format!("{prefix}.p_base"), line, "must be <= 1"));
        }
        if !link.is_radio() && (p.p_base != 0.0 || p.k_speed != 0.0) {
            let (key, line) = lines.first().cloned().unwrap_or_default();
            return Err(config_err(&key, line, "wired legs are lossless"));
        }
    }

    let cost = &mut cfg.cost;
    r.f64_min("cost.cpu_price", &mut cost.cpu_price, 0.0, true)?;
    r.f64_min("cost.cpu_lifespan", &mut cost.cpu_lifespan, 0.0, false)?;
    r.f64_min("cost.years", &mut cost.years, 0.0, false)?;
    r.f64_min("cost.maintenance", &mut cost.maintenance, 0.0, true)?;
    r.f64_min("cost.ec_request", &mut cost.ec_request, 0.0, true)?;
    if r.entries.contains_key("cost.vcc_request") {
        let mut v = 0.0;
        r.f64_min("cost.vcc_request", &mut v, 0.0, true)?;
        cost.vcc_request = Some(v);
    }
    r.f64_min("cost.request_rate", &mut cost.request_rate, 0.0, true)?;
    r.f64_min("cost.users", &mut cost.users, 0.0, true)?;
    r.f64_min("cost.active_seconds", &mut cost.active_seconds, 0.0, true)?;
    r.f64_min("cost.beta", &mut cost.beta, 0.0, true)?;
    r.f64_min("cost.capex_overhead", &mut cost.capex_overhead, 1.0, true)?;
    if r.entries.contains_key("cost.table_interpretation") {
        let mut flag = false;
        r.boolean("cost.table_interpretation", &mut flag)?;
        cost.table_interpretation = Some(flag);
    }

    if let Some(e) = r.take("sweep.axis") {
        let axis = SweepAxis::from_name(&e.value).ok_or_else(|| config_err("sweep.axis", e.line, format!("unknown axis `{}`", e.value)))?;
        let (values, _) =
            r.list_f64("sweep.values")?.ok_or_else(|| config_err("sweep.values", e.line, "sweep.axis requires sweep.values"))?;
        let mut seeds = DEFAULT_SEEDS.to_vec();
        if let Some(se) = r.take("sweep.seeds") {
            seeds = se
                .value
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|_| config_err("sweep.seeds", se.line, format!("bad seed `{}`", s.trim()))))
                .collect::<Result<_, _>>()?;
        }
        let mut replications = seeds.len();
        let rep_line = r.entries.get("sweep.replications").map(|e| e.line);
        r.integer("sweep.replications", &mut replications)?;
        let spec = SweepSpec { axis, values, replications, seeds };
        spec.validate().map_err(|err| config_err("sweep.replications", rep_line.unwrap_or(e.line), err.to_string()))?;
        cfg.sweep = Some(spec);
    }

    if let Some((key, e)) = r.entries.iter().next() {
        return Err(config_err(key, e.line, "unknown key"));
    }
    Ok(cfg)
}

fn opt_to_text(v: Option<f64>) -> String {
    v.map_or_else(|| "unbounded".to_string(), |x| x.to_string())
}

/// Writes every setting explicitly, so the text re-parses to the same
/// configuration.
pub fn to_config_text(cfg: &ConfigFile) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    let run = &cfg.run;
    if let Some(s) = cfg.strategy {
        kv("strategy", s.name().into());
    }
    kv("seed", run.seed.to_string());
    kv("users", run.users.to_string());
    kv("request_rate", run.request_rate.to_string());
    kv("duration", run.duration.to_string());
    kv("task.workload", run.task.workload.to_string());
    kv("task.size", run.task.size.to_string());
    kv("task.result_size", run.task.result_size.to_string());
    let sc = &run.scenario;
    kv("scenario.preset", sc.preset.name().into());
    kv("scenario.vehicles", sc.vehicles.to_string());
    kv("scenario.speed_kmh", sc.speed_kmh.to_string());
    kv("scenario.loop_length", sc.geometry.loop_length_x.to_string());
    kv("scenario.loop_width", sc.geometry.loop_width_y.to_string());
    kv("scenario.bs_x", sc.geometry.bs_position.x.to_string());
    kv("scenario.bs_y", sc.geometry.bs_position.y.to_string());
    kv("scenario.bs_z", sc.geometry.bs_position.z.to_string());
    kv("scenario.ue_height", sc.geometry.ue_height.to_string());
    kv("scenario.coverage_radius", opt_to_text(sc.geometry.coverage_radius));
    let cp = &run.compute;
    kv("compute.cloud_mips", cp.cloud_mips.to_string());
    kv("compute.edge_mips", cp.edge_mips.to_string());
    kv("compute.vehicle_mips", cp.vehicle_mips.to_string());
    kv("compute.vehicle_capacity_fraction", cp.vehicle_capacity_fraction.to_string());
    kv("compute.edge_max_queue", cp.edge_max_queue.to_string());
    let ctl = &run.controller;
    kv("controller.beacon_period", ctl.beacon_period.to_string());
    kv("controller.timeout", ctl.timeout.to_string());
    kv("controller.beacon_bytes", ctl.beacon_bytes.to_string());
    kv("channel.preset", run.channel.preset.name().into());
    kv("channel.sharing", run.channel.sharing.name().into());
    for link in LinkClass::ALL {
        let p = run.channel.link(link);
        let n = link.name();
        kv(&format!("channel.{n}.base_latency"), p.base_latency.to_string());
        kv(&format!("channel.{n}.rate"), opt_to_text(p.rate));
        kv(&format!("channel.{n}.p_base"), p.p_base.to_string());
        kv(&format!("channel.{n}.k_speed"), p.k_speed.to_string());
    }
    let c = &cfg.cost;
    kv("cost.cpu_price", c.cpu_price.to_string());
    kv("cost.cpu_lifespan", c.cpu_lifespan.to_string());
    kv("cost.years", c.years.to_string());
    kv("cost.maintenance", c.maintenance.to_string());
    kv("cost.ec_request", c.ec_request.to_string());
    if let Some(v) = c.vcc_request {
        kv("cost.vcc_request", v.to_string());
    }
    kv("cost.request_rate", c.request_rate.to_string());
    kv("cost.users", c.users.to_string());
    kv("cost.active_seconds", c.active_seconds.to_string());
    kv("cost.beta", c.beta.to_string());
    kv("cost.capex_overhead", c.capex_overhead.to_string());
    if let Some(flag) = c.table_interpretation {
        kv("cost.table_interpretation", flag.to_string());
    }
    if let Some(s) = &cfg.sweep {
        kv("sweep.axis", s.axis.name().into());
        kv("sweep.values", s.values.iter().map(f64::to_string).collect::<Vec<_>>().join(", "));
        kv("sweep.replications", s.replications.to_string());
        kv("sweep.seeds", s.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", "));
    }
    out
}
