//! CAPEX / OPEX comparison between an Edge deployment and Vehicular Cloud
//! offloading, from the network operator's side.
//!
//! The Edge pays for CPUs (renewed every `cpu_lifespan` years), yearly
//! maintenance, and a per-request cost. The Vehicular Cloud has no CAPEX and
//! pays only per request. All amounts are dollars; rounding happens only when
//! rows are printed.

use serde::{Deserialize, Serialize};

use crate::Error;

/// 15 h of activity per day over a year, in seconds.
pub const ACTIVE_SECONDS_PER_YEAR: f64 = 15.0 * 3600.0 * 365.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// $ per Edge CPU
    pub cpu_price: f64,
    /// years
    pub cpu_lifespan: f64,
    /// investment horizon, years
    pub years: f64,
    /// $ per Edge node per year
    pub maintenance: f64,
    /// $ per request processed at the Edge
    pub ec_request: f64,
    /// $ per request processed by a vehicle; `None` means `ec_request + beta`
    pub vcc_request: Option<f64>,
    /// requests per second per user
    pub request_rate: f64,
    pub users: f64,
    /// seconds per year during which users offload
    pub active_seconds: f64,
    /// $ per request premium paid to vehicles
    pub beta: f64,
    /// multiplier >= 1 on CPU cost for RAM, disk and the rest
    pub capex_overhead: f64,
    /// Adds `beta` to the Edge per-request cost. Unset means off for
    /// [`opex_ec`] and [`savings`] and on for [`cost_breakdown`].
    pub table_interpretation: Option<bool>,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            cpu_price: 700.0,
            cpu_lifespan: 3.0,
            years: 1.0,
            maintenance: 68_423.0 / 50.0,
            ec_request: 2e-5,
            vcc_request: None,
            request_rate: 5.0,
            users: 100.0,
            active_seconds: ACTIVE_SECONDS_PER_YEAR,
            beta: 0.0,
            capex_overhead: 1.0,
            table_interpretation: None,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), Error> {
        let non_negative = [
            self.cpu_price,
            self.maintenance,
            self.ec_request,
            self.vcc_request.unwrap_or(0.0),
            self.request_rate,
            self.users,
            self.active_seconds,
            self.beta,
        ];
        if non_negative.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("cost", "costs, rates and counts must be non-negative"));
        }
        if !(self.cpu_lifespan > 0.0 && self.years > 0.0) {
            return Err(Error::invalid("cost", "lifespan and investment duration must be positive"));
        }
        if !(self.capex_overhead >= 1.0) {
            return Err(Error::invalid("cost", "capex overhead must be >= 1"));
        }
        Ok(())
    }

    pub fn vcc_request_cost(&self) -> f64 {
        self.vcc_request.unwrap_or(self.ec_request + self.beta)
    }

    /// Requests offloaded over the whole horizon.
    pub fn request_volume(&self) -> f64 {
        self.request_rate * self.users * self.years * self.active_seconds
    }

    fn cpu_renewals(&self) -> f64 {
        (self.years / self.cpu_lifespan).ceil()
    }

    fn ec_request_cost(&self, beta_in_ec: bool) -> f64 {
        if beta_in_ec {
            self.ec_request + self.beta
        } else {
            self.ec_request
        }
    }
}

pub fn capex_ec(p: &CostParams) -> f64 {
    p.cpu_price * p.cpu_renewals() * p.capex_overhead
}

pub fn opex_ec(p: &CostParams) -> f64 {
    opex_ec_with(p, p.table_interpretation.unwrap_or(false))
}

fn opex_ec_with(p: &CostParams, beta_in_ec: bool) -> f64 {
    p.ec_request_cost(beta_in_ec) * p.request_volume() + p.maintenance * p.years
}

pub fn opex_vcc(p: &CostParams) -> f64 {
    p.vcc_request_cost() * p.request_volume()
}

/// Largest per-request premium over the Edge request cost at which the
/// Vehicular Cloud is still no more expensive than the Edge.
pub fn vcc_bonus(p: &CostParams) -> f64 {
    (capex_ec(p) / p.years + p.maintenance) / (p.request_rate * p.users * p.active_seconds)
}

/// Edge total minus Vehicular Cloud total over the horizon. The request
/// terms are differenced before scaling, so equal per-request costs cancel
/// exactly.
pub fn savings(p: &CostParams) -> f64 {
    let per_request = p.ec_request_cost(p.table_interpretation.unwrap_or(false)) - p.vcc_request_cost();
    capex_ec(p) + p.maintenance * p.years + per_request * p.request_volume()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub beta: f64,
    pub years: f64,
    pub request_scale: f64,
    pub capex_pct: f64,
    pub maintenance_pct: f64,
    pub ec_requests_pct: f64,
    pub vcc_requests_pct: f64,
    pub ec_total: f64,
    pub vcc_total: f64,
}

/// Share of each Edge cost component, and of the single Vehicular Cloud
/// component, for every (beta, years) pair. `request_scale` multiplies the
/// offered load.
pub fn cost_breakdown(p: &CostParams, betas: &[f64], years: &[f64], request_scale: f64) -> Result<Vec<BreakdownRow>, Error> {
    if !(request_scale >= 0.0) {
        return Err(Error::invalid("cost", "request scale must be non-negative"));
    }
    let beta_in_ec = p.table_interpretation.unwrap_or(true);
    let mut rows = Vec::with_capacity(betas.len() * years.len());
    for &y in years {
        for &beta in betas {
            let q = CostParams { beta, years: y, request_rate: p.request_rate * request_scale, ..p.clone() };
            q.validate()?;
            let capex = capex_ec(&q);
            let maintenance = q.maintenance * q.years;
            let requests = q.ec_request_cost(beta_in_ec) * q.request_volume();
            let ec_total = capex + maintenance + requests;
            let vcc_total = opex_vcc(&q);
            let pct = |part: f64, total: f64| if total > 0.0 { 100.0 * part / total } else { 0.0 };
            rows.push(BreakdownRow {
                beta,
                years: y,
                request_scale,
                capex_pct: pct(capex, ec_total),
                maintenance_pct: pct(maintenance, ec_total),
                ec_requests_pct: pct(requests, ec_total),
                vcc_requests_pct: if vcc_total > 0.0 { 100.0 } else { 0.0 },
                ec_total,
                vcc_total,
            });
        }
    }
    Ok(rows)
}
