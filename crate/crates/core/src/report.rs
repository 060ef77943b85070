//! CSV and text output. Every writer emits a fixed header row; missing values
//! are empty fields.

use std::io::{Read, Write};

use crate::config::RunConfig;
use crate::controller::Destination;
use crate::costmodel::BreakdownRow;
use crate::engine::{Aggregates, FailureLeg, OffloadRecord, Outcome};
use crate::stats::AnovaResult;
use crate::sweep::SweepRow;
use crate::Error;

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn ms(x: Option<f64>) -> String {
    opt(x.map(|s| s * 1e3))
}

pub const RECORD_HEADER: [&str; 22] = [
    "task_id",
    "user",
    "created_at",
    "destination",
    "vehicle",
    "dispatched_at",
    "edge_queue",
    "t_up_access",
    "t_up_cn",
    "t_up_internet",
    "t_gnb_to_vue",
    "t_queue",
    "t_elab",
    "t_vue_to_gnb",
    "t_down_internet",
    "t_down_cn",
    "t_down_access",
    "total",
    "completed_at",
    "outcome",
    "failed_leg",
    "loss",
];

/// One row per task, times in seconds.
pub fn write_records<W: Write>(records: &[OffloadRecord], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        let (dest, vehicle) = match r.destination {
            Some(Destination::Cloud) => ("cloud", String::new()),
            Some(Destination::Edge) => ("edge", String::new()),
            Some(Destination::Vehicle(v)) => ("vehicle", v.to_string()),
            None => ("", String::new()),
        };
        let (outcome, leg) = match r.outcome {
            Outcome::Success => ("success", ""),
            Outcome::Failed(leg) => ("failed", leg.name()),
            Outcome::InFlight => ("in_flight", ""),
        };
        let loss = match r.loss {
            Some(reason) => format!("{reason:?}").to_ascii_lowercase(),
            None => String::new(),
        };
        w.write_record([
            r.task_id.to_string(),
            r.user.to_string(),
            r.created_at.to_string(),
            dest.to_string(),
            vehicle,
            opt(r.dispatched_at),
            r.edge_queue_at_dispatch.map(|q| q.to_string()).unwrap_or_default(),
            r.t_up_access.to_string(),
            r.t_up_cn.to_string(),
            r.t_up_internet.to_string(),
            r.t_gnb_to_vue.to_string(),
            r.t_queue.to_string(),
            r.t_elab.to_string(),
            r.t_vue_to_gnb.to_string(),
            r.t_down_internet.to_string(),
            r.t_down_cn.to_string(),
            r.t_down_access.to_string(),
            r.total.to_string(),
            opt(r.completed_at),
            outcome.to_string(),
            leg.to_string(),
            loss,
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn aggregate_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "requests",
        "successes",
        "in_flight",
        "to_cloud",
        "to_edge",
        "to_vehicle",
        "mean_ms",
        "p90_ms",
        "p95_ms",
        "p99_ms",
        "max_ms",
        "cc_share_pct",
        "uplink_pct",
        "elaboration_pct",
        "downlink_pct",
    ]
    .map(String::from)
    .to_vec();
    h.extend(FailureLeg::ALL.iter().map(|l| format!("fail_{}_pct", l.name())));
    h.extend(["fail_total_pct", "vehicles_used", "ll_pp_pct", "ll_p_pct", "ll_pct"].map(String::from));
    h
}

fn aggregate_fields(a: &Aggregates) -> Vec<String> {
    let mut f = vec![
        a.requests.to_string(),
        a.successes.to_string(),
        a.in_flight.to_string(),
        a.to_cloud.to_string(),
        a.to_edge.to_string(),
        a.to_vehicle.to_string(),
        ms(a.mean_total),
        ms(a.p90),
        ms(a.p95),
        ms(a.p99),
        ms(a.max),
        a.cc_share_pct.to_string(),
        opt(a.vcc_uplink_pct),
        opt(a.vcc_elaboration_pct),
        opt(a.vcc_downlink_pct),
    ];
    f.extend(a.failure_pct.iter().map(f64::to_string));
    f.push(a.total_failure_pct.to_string());
    f.push(a.vehicles_used.to_string());
    f.extend(a.class_pct.iter().map(f64::to_string));
    f
}

/// Single-row summary of one run, prefixed by strategy and seed.
pub fn write_summary<W: Write>(cfg: &RunConfig, agg: &Aggregates, out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["strategy".to_string(), "seed".to_string()];
    header.extend(aggregate_header());
    w.write_record(&header)?;
    let mut row = vec![cfg.strategy.name().to_string(), cfg.seed.to_string()];
    row.extend(aggregate_fields(agg));
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

/// Sweep rows; the per-value mean row has `mean` in the seed column.
pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["axis".to_string(), "value".to_string(), "seed".to_string()];
    header.extend(aggregate_header());
    w.write_record(&header)?;
    for r in rows {
        let mut row = vec![r.axis.name().to_string(), r.value.to_string(), r.seed.map(|s| s.to_string()).unwrap_or_else(|| "mean".into())];
        row.extend(aggregate_fields(&r.agg));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub const COST_HEADER: [&str; 9] = [
    "beta",
    "years",
    "request_scale",
    "c_capex_ec_pct",
    "c_ec_main_pct",
    "c_opex_ec_req_pct",
    "c_opex_vcc_req_pct",
    "ec_total",
    "vcc_total",
];

fn cost_fields(r: &BreakdownRow) -> [String; 9] {
    [
        format!("{:e}", r.beta),
        r.years.to_string(),
        r.request_scale.to_string(),
        format!("{:.2}", r.capex_pct),
        format!("{:.2}", r.maintenance_pct),
        format!("{:.2}", r.ec_requests_pct),
        format!("{:.2}", r.vcc_requests_pct),
        format!("{:.2}", r.ec_total),
        format!("{:.2}", r.vcc_total),
    ]
}

/// Percentages and dollar totals at two decimals.
pub fn write_cost<W: Write>(rows: &[BreakdownRow], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COST_HEADER)?;
    for r in rows {
        w.write_record(cost_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

/// The same rows as [`write_cost`], right-aligned.
pub fn cost_table(rows: &[BreakdownRow]) -> String {
    let body: Vec<[String; 9]> = rows.iter().map(cost_fields).collect();
    let mut widths = COST_HEADER.map(str::len);
    for row in &body {
        for (w, f) in widths.iter_mut().zip(row) {
            *w = (*w).max(f.len());
        }
    }
    let mut out = String::new();
    let mut line = |fields: &mut dyn Iterator<Item = &str>| {
        let cells: Vec<String> = fields.zip(widths).map(|(f, w)| format!("{f:>w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut COST_HEADER.iter().copied());
    for row in &body {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

/// Reads `group,value` rows (header required) into groups in order of first
/// appearance.
pub fn read_groups<R: Read>(input: R) -> Result<Vec<(String, Vec<f64>)>, Error> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::invalid("anova input", "expected columns `group,value`"));
    }
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let (Some(name), Some(value)) = (rec.get(0), rec.get(1)) else {
            return Err(Error::invalid("anova input", format!("line {line}: expected two fields")));
        };
        let value: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::invalid("anova input", format!("line {line}: bad value `{value}`")))?;
        match groups.iter_mut().find(|(g, _)| g == name) {
            Some((_, vals)) => vals.push(value),
            None => groups.push((name.to_string(), vec![value])),
        }
    }
    Ok(groups)
}

pub const ANOVA_HEADER: [&str; 5] = ["", "sum_sq", "df", "F", "PR(>F)"];

/// Factor and residual rows in the usual ANOVA table layout.
pub fn write_anova<W: Write>(factor: &str, a: &AnovaResult, out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ANOVA_HEADER)?;
    w.write_record([format!("C({factor})"), a.sum_sq_factor.to_string(), a.df_factor.to_string(), a.f.to_string(), a.p.to_string()])?;
    w.write_record(["Residual".to_string(), a.sum_sq_resid.to_string(), a.df_resid.to_string(), String::new(), String::new()])?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Strategy;
    use crate::costmodel::{cost_breakdown, CostParams};
    use crate::engine::{run, summarize};
    use crate::stats::anova_oneway;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<(), Error>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn record_rows_have_fixed_width() {
        let mut cfg = RunConfig::defaults(Strategy::VccFirst);
        cfg.duration = 2.0;
        let records = run(&cfg).unwrap();
        let out = text(|b| write_records(&records, b));
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap(), RECORD_HEADER.join(","));
        let n = lines.map(|l| assert_eq!(l.split(',').count(), RECORD_HEADER.len())).count();
        assert_eq!(n, records.len());
        let summary = text(|b| write_summary(&cfg, &summarize(&records), b));
        let rows: Vec<&str> = summary.lines().collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].split(',').count(), rows[1].split(',').count());
    }

    #[test]
    fn cost_rows_print_table_values() {
        let rows = cost_breakdown(&CostParams::default(), &[0.0], &[1.0], 1.0).unwrap();
        let out = text(|b| write_cost(&rows, b));
        assert_eq!(out.lines().nth(1).unwrap().split(',').skip(3).take(4).collect::<Vec<_>>(), ["0.35", "0.69", "98.96", "100.00"]);
        let table = cost_table(&rows);
        assert_eq!(table.lines().count(), 2);
        assert!(table.lines().nth(1).unwrap().contains("98.96"));
    }

    #[test]
    fn groups_keep_first_appearance_order() {
        let groups = read_groups("group,value\nb, 1\na,2\nb,3\n".as_bytes()).unwrap();
        assert_eq!(groups, vec![("b".to_string(), vec![1.0, 3.0]), ("a".to_string(), vec![2.0])]);
        assert!(read_groups("group,value\na,x\n".as_bytes()).is_err());
        assert!(read_groups("group,value\na,NaN\n".as_bytes()).is_err());
    }

    #[test]
    fn anova_layout() {
        let a = anova_oneway(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let out = text(|b| write_anova("Users", &a, b));
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], ",sum_sq,df,F,PR(>F)");
        assert!(lines[1].starts_with("C(Users),13.5,1,13.5,"));
        assert_eq!(lines[2], "Residual,4,4,,");
    }
}
