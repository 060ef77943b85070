//! Parameterized radio and wired-path model.
//!
//! Every leg of an offloading round trip is a [`LinkClass`]. A leg costs a
//! fixed base latency plus the serialization time of its payload at the link
//! rate, optionally shared among concurrent transfers of the same class.
//! Radio legs can be lost, either because an endpoint is outside the cell or
//! through a speed-dependent Bernoulli channel error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkClass {
    PueUp,
    PueDown,
    VueUp,
    VueDown,
    CnUp,
    CnDown,
    InternetUp,
    InternetDown,
}

impl LinkClass {
    pub const ALL: [LinkClass; 8] = [
        LinkClass::PueUp,
        LinkClass::PueDown,
        LinkClass::VueUp,
        LinkClass::VueDown,
        LinkClass::CnUp,
        LinkClass::CnDown,
        LinkClass::InternetUp,
        LinkClass::InternetDown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_radio(self) -> bool {
        matches!(self, LinkClass::PueUp | LinkClass::PueDown | LinkClass::VueUp | LinkClass::VueDown)
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkClass::PueUp => "pue_up",
            LinkClass::PueDown => "pue_down",
            LinkClass::VueUp => "vue_up",
            LinkClass::VueDown => "vue_down",
            LinkClass::CnUp => "cn_up",
            LinkClass::CnDown => "cn_down",
            LinkClass::InternetUp => "internet_up",
            LinkClass::InternetDown => "internet_down",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// seconds
    pub base_latency: f64,
    /// bits per second; `None` for fixed-latency wired legs
    pub rate: Option<f64>,
    pub p_base: f64,
    /// loss probability added per m/s of vehicle speed
    pub k_speed: f64,
}

impl LinkParams {
    pub const fn wired(base_latency: f64) -> Self {
        Self { base_latency, rate: None, p_base: 0.0, k_speed: 0.0 }
    }

    pub fn loss_probability(&self, speed: f64) -> f64 {
        (self.p_base + self.k_speed * speed).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sharing {
    ProcessorSharing,
    None,
}

impl Sharing {
    pub fn name(self) -> &'static str {
        match self {
            Sharing::ProcessorSharing => "processor_sharing",
            Sharing::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelPreset {
    /// Access latencies fitted to the reported Edge and Vehicular Cloud
    /// means, with a small speed-dependent loss on radio legs.
    LenaCalibrated,
    /// Same latencies as `LenaCalibrated`, no losses.
    Ideal,
}

impl ChannelPreset {
    pub fn name(self) -> &'static str {
        match self {
            ChannelPreset::LenaCalibrated => "lena_calibrated",
            ChannelPreset::Ideal => "ideal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "lena_calibrated" => Some(ChannelPreset::LenaCalibrated),
            "ideal" => Some(ChannelPreset::Ideal),
            _ => None,
        }
    }
}

pub const CN_LATENCY: f64 = 0.002;
pub const INTERNET_LATENCY: f64 = 0.035;
pub const PUE_LATENCY: f64 = 0.0027;
pub const VUE_LATENCY: f64 = 0.008;
pub const RADIO_RATE: f64 = 100e6;
pub const RADIO_P_BASE: f64 = 0.001;
pub const RADIO_K_SPEED: f64 = 5e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub preset: ChannelPreset,
    pub links: [LinkParams; 8],
    pub sharing: Sharing,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self::preset(ChannelPreset::LenaCalibrated)
    }
}

impl ChannelConfig {
    pub fn preset(preset: ChannelPreset) -> Self {
        let (p_base, k_speed) = match preset {
            ChannelPreset::LenaCalibrated => (RADIO_P_BASE, RADIO_K_SPEED),
            ChannelPreset::Ideal => (0.0, 0.0),
        };
        let radio = |base_latency| LinkParams { base_latency, rate: Some(RADIO_RATE), p_base, k_speed };
        Self {
            preset,
            links: [
                radio(PUE_LATENCY),
                radio(PUE_LATENCY),
                radio(VUE_LATENCY),
                radio(VUE_LATENCY),
                LinkParams::wired(CN_LATENCY),
                LinkParams::wired(CN_LATENCY),
                LinkParams::wired(INTERNET_LATENCY),
                LinkParams::wired(INTERNET_LATENCY),
            ],
            sharing: Sharing::ProcessorSharing,
        }
    }

    pub fn link(&self, link: LinkClass) -> &LinkParams {
        &self.links[link.index()]
    }

    pub fn link_mut(&mut self, link: LinkClass) -> &mut LinkParams {
        &mut self.links[link.index()]
    }

    pub fn validate(&self) -> Result<(), Error> {
        for link in LinkClass::ALL {
            let p = self.link(link);
            let name = link.name();
            if !(p.base_latency >= 0.0) {
                return Err(Error::invalid("channel", format!("{name}: base latency must be >= 0")));
            }
            if let Some(rate) = p.rate {
                if !(rate > 0.0) {
                    return Err(Error::invalid("channel", format!("{name}: rate must be > 0")));
                }
            }
            if !(0.0..=1.0).contains(&p.p_base) || !(p.k_speed >= 0.0) {
                return Err(Error::invalid("channel", format!("{name}: loss parameters out of range")));
            }
            if !link.is_radio() && (p.p_base != 0.0 || p.k_speed != 0.0) {
                return Err(Error::invalid("channel", format!("{name}: wired legs are lossless")));
            }
        }
        Ok(())
    }
}

/// Latency of one transfer of `size` bytes over `link` while `concurrent`
/// transfers (this one included) share the link.
pub fn transfer_time(size: u64, link: LinkClass, concurrent: usize, cfg: &ChannelConfig) -> f64 {
    let p = cfg.link(link);
    match p.rate {
        None => p.base_latency,
        Some(rate) => {
            let share = match cfg.sharing {
                Sharing::ProcessorSharing => rate / concurrent.max(1) as f64,
                Sharing::None => rate,
            };
            p.base_latency + (size as f64 * 8.0) / share
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossReason {
    OutOfCoverage,
    ChannelError,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LegOutcome {
    Delivered(f64),
    Lost(LossReason),
}

/// Decides whether a leg arrives. Coverage is checked first and consumes no
/// randomness; a covered radio leg always draws exactly one uniform variate.
pub fn leg_outcome<R: Rng + ?Sized>(
    rng: &mut R,
    link: LinkClass,
    speed: f64,
    src_covered: bool,
    dst_covered: bool,
    latency: f64,
    cfg: &ChannelConfig,
) -> LegOutcome {
    if !link.is_radio() {
        return LegOutcome::Delivered(latency);
    }
    if !(src_covered && dst_covered) {
        return LegOutcome::Lost(LossReason::OutOfCoverage);
    }
    let p = cfg.link(link).loss_probability(speed);
    if rng.random::<f64>() < p {
        LegOutcome::Lost(LossReason::ChannelError)
    } else {
        LegOutcome::Delivered(latency)
    }
}

/// Tracks in-progress transfers per link class so each new transfer sees the
/// number of transfers it shares the link with.
#[derive(Debug, Default, Clone)]
pub struct LinkLoad {
    active: [Vec<f64>; 8],
}

impl LinkLoad {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a transfer at `now` and returns its latency.
    pub fn begin(&mut self, link: LinkClass, size: u64, now: f64, cfg: &ChannelConfig) -> f64 {
        let ends = &mut self.active[link.index()];
        ends.retain(|&end| end > now);
        let latency = transfer_time(size, link, ends.len() + 1, cfg);
        ends.push(now + latency);
        latency
    }

    pub fn active(&self, link: LinkClass, now: f64) -> usize {
        self.active[link.index()].iter().filter(|&&end| end > now).count()
    }
}
