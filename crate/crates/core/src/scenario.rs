//! Vehicle kinematics on a rectangular loop and base-station coverage.
//!
//! The road is the boundary of the rectangle `[0, L] x [0, W]`. A perimeter
//! offset `s` is measured from the corner `(0, 0)` along the `+x` edge, then up
//! the `x = L` edge, back along `y = W` and down `x = 0`. Clockwise travel
//! increases the offset; counterclockwise travel decreases it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Antenna height used for every UE, pedestrian or vehicle, in meters.
pub const UE_HEIGHT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    TotalCoverage,
    PartialCoverage,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::TotalCoverage => "total_coverage",
            Preset::PartialCoverage => "partial_coverage",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "total_coverage" => Some(Preset::TotalCoverage),
            "partial_coverage" => Some(Preset::PartialCoverage),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGeometry {
    pub loop_length_x: f64,
    pub loop_width_y: f64,
    pub bs_position: Point3,
    /// `None` means the cell covers the whole road.
    pub coverage_radius: Option<f64>,
    pub ue_height: f64,
}

impl ScenarioGeometry {
    /// 600 m x 50 m loop with the gNB at its center and unbounded coverage.
    pub fn total_coverage() -> Self {
        Self {
            loop_length_x: 600.0,
            loop_width_y: 50.0,
            bs_position: Point3 { x: 300.0, y: 25.0, z: 30.0 },
            coverage_radius: None,
            ue_height: UE_HEIGHT,
        }
    }

    /// 1200 m x 50 m loop, gNB at the center, finite cell radius.
    pub fn partial_coverage(radius: f64) -> Self {
        Self {
            loop_length_x: 1200.0,
            loop_width_y: 50.0,
            bs_position: Point3 { x: 600.0, y: 25.0, z: 30.0 },
            coverage_radius: Some(radius),
            ue_height: UE_HEIGHT,
        }
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.loop_length_x + self.loop_width_y)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.loop_length_x > 0.0 && self.loop_width_y > 0.0) {
            return Err(Error::invalid("scenario", "loop dimensions must be positive"));
        }
        if !(self.bs_position.z > 0.0) {
            return Err(Error::invalid("scenario", "base station height must be positive"));
        }
        if let Some(r) = self.coverage_radius {
            if !(r >= 0.0) {
                return Err(Error::invalid("scenario", "coverage radius must be non-negative"));
            }
        }
        Ok(())
    }

    /// Maps a perimeter offset onto the rectangle boundary.
    pub fn point_at_offset(&self, offset: f64) -> (f64, f64) {
        let (l, w) = (self.loop_length_x, self.loop_width_y);
        let s = offset.rem_euclid(self.perimeter());
        if s < l {
            (s, 0.0)
        } else if s < l + w {
            (l, s - l)
        } else if s < 2.0 * l + w {
            (l - (s - l - w), w)
        } else {
            (0.0, w - (s - 2.0 * l - w))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Clockwise,
    Counterclockwise,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Clockwise => 1.0,
            Direction::Counterclockwise => -1.0,
        }
    }
}

pub type VehicleId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: VehicleId,
    pub loop_offset_at_t0: f64,
    pub direction: Direction,
    /// m/s
    pub speed: f64,
    /// MIPS
    pub capacity: f64,
    pub busy_until: Option<f64>,
}

/// Places `n_vehicles` uniformly at random on the loop. Even ids drive
/// clockwise, odd ids counterclockwise.
pub fn build_scenario(
    geometry: &ScenarioGeometry,
    n_vehicles: usize,
    speed: f64,
    capacity: f64,
    seed: u64,
) -> Result<Vec<VehicleState>, Error> {
    geometry.validate()?;
    if speed < 0.0 || speed.is_nan() {
        return Err(Error::invalid("scenario", "vehicle speed must be non-negative"));
    }
    if n_vehicles > 0 && !(capacity > 0.0) {
        return Err(Error::invalid("scenario", "vehicle capacity must be positive"));
    }
    let perimeter = geometry.perimeter();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vehicles = (0..n_vehicles)
        .map(|i| VehicleState {
            id: i as VehicleId,
            loop_offset_at_t0: rng.random_range(0.0..perimeter),
            direction: if i % 2 == 0 { Direction::Clockwise } else { Direction::Counterclockwise },
            speed,
            capacity,
            busy_until: None,
        })
        .collect();
    Ok(vehicles)
}

pub fn position_at(v: &VehicleState, t: f64, geometry: &ScenarioGeometry) -> (f64, f64) {
    let travelled = v.direction.sign() * v.speed * t;
    geometry.point_at_offset(v.loop_offset_at_t0 + travelled)
}

pub fn in_coverage(p: (f64, f64), geometry: &ScenarioGeometry) -> bool {
    match geometry.coverage_radius {
        None => true,
        Some(radius) => {
            let bs = geometry.bs_position;
            let dx = p.0 - bs.x;
            let dy = p.1 - bs.y;
            let dz = geometry.ue_height - bs.z;
            (dx * dx + dy * dy + dz * dz).sqrt() <= radius
        }
    }
}

pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}
