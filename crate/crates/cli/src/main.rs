use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use vccsim::config::{parse_config, parse_number};
use vccsim::costmodel::cost_breakdown;
use vccsim::report;
use vccsim::stats::anova_oneway;
use vccsim::sweep::{cost_sweep, run_sweep, SweepAxis};
use vccsim::{run, summarize, ConfigFile, Strategy};

/// Vehicular / Edge / Cloud offloading simulator and cost model.
#[derive(Parser)]
#[command(name = "vccsim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one run and print its summary row.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// overrides `strategy`
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// summary CSV destination, stdout if omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// per-task CSV
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Run the sweep declared in the config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        strategy: Option<String>,
        /// overrides `sweep.axis`
        #[arg(long)]
        axis: Option<String>,
        /// comma-separated, overrides `sweep.values`
        #[arg(long, value_delimiter = ',', value_parser = number)]
        values: Option<Vec<f64>>,
        /// comma-separated replication seeds
        #[arg(long, value_delimiter = ',')]
        seed_list: Option<Vec<u64>>,
        #[arg(long)]
        replications: Option<usize>,
        /// years for the beta axis
        #[arg(long, value_delimiter = ',', default_value = "1")]
        years: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost breakdown rows and EC / VCC totals.
    Cost {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0,1e-6,2e-6")]
        betas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        years: Vec<f64>,
        /// request-rate multipliers, one block of rows each
        #[arg(long, value_delimiter = ',', default_value = "1")]
        scales: Vec<f64>,
        /// add beta to the Edge per-request cost (default on)
        #[arg(long)]
        table_interpretation: Option<bool>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-way ANOVA over a `group,value` CSV.
    Anova {
        #[arg(long)]
        input: PathBuf,
        /// label for the factor row
        #[arg(long, default_value = "Group")]
        factor: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn number(text: &str) -> Result<f64, String> {
    parse_number(text).ok_or_else(|| format!("`{text}` is not a number or fraction"))
}

fn load(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn apply_strategy(cfg: &mut ConfigFile, strategy: Option<&str>) -> Result<()> {
    if let Some(name) = strategy {
        let Some(s) = Strategy::from_name(name) else { bail!("unknown strategy `{name}`") };
        cfg.strategy = Some(s);
        cfg.run.strategy = s;
    }
    Ok(())
}

fn ms(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{:.2} ms", v * 1e3))
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run { config, strategy, seed, out, records } => {
            let mut file = load(&config)?;
            apply_strategy(&mut file, strategy.as_deref())?;
            let mut cfg = file.run_config()?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let recs = run(&cfg)?;
            let agg = summarize(&recs);
            if let Some(path) = records {
                let mut w = output(Some(&path))?;
                report::write_records(&recs, &mut w)?;
                w.flush()?;
            }
            let mut w = output(out.as_deref())?;
            report::write_summary(&cfg, &agg, &mut w)?;
            w.flush()?;
            eprintln!(
                "{} seed {}: {} requests, {} ok, mean {}, p99 {}, cloud {:.2}%, failures {:.2}%",
                cfg.strategy.name(),
                cfg.seed,
                agg.requests,
                agg.successes,
                ms(agg.mean_total),
                ms(agg.p99),
                agg.cc_share_pct,
                agg.total_failure_pct
            );
        }
        Cmd::Sweep { config, strategy, axis, values, seed_list, replications, years, out } => {
            let mut file = load(&config)?;
            apply_strategy(&mut file, strategy.as_deref())?;
            let mut spec = match (file.sweep.clone(), &axis) {
                (_, Some(name)) => {
                    let Some(a) = SweepAxis::from_name(name) else { bail!("unknown sweep axis `{name}`") };
                    let mut s = file.sweep.clone().unwrap_or_else(|| vccsim::sweep::SweepSpec::new(a, Vec::new()));
                    s.axis = a;
                    s
                }
                (Some(s), None) => s,
                (None, None) => file.sweep_spec()?,
            };
            if let Some(v) = values {
                spec.values = v;
            }
            if let Some(seeds) = seed_list {
                spec.replications = seeds.len();
                spec.seeds = seeds;
            }
            if let Some(r) = replications {
                spec.replications = r;
            }
            let mut w = output(out.as_deref())?;
            if spec.axis.is_cost() {
                let rows = cost_sweep(&spec, &file.cost, &years, 1.0)?;
                report::write_cost(&rows, &mut w)?;
                eprint!("{}", report::cost_table(&rows));
            } else {
                let rows = run_sweep(&spec, &file.run_config()?)?;
                report::write_sweep(&rows, &mut w)?;
                for r in rows.iter().filter(|r| r.seed.is_none()) {
                    eprintln!(
                        "{} = {}: mean {}, p90 {}, cloud {:.2}%, failures {:.2}%",
                        spec.axis.name(),
                        r.value,
                        ms(r.agg.mean_total),
                        ms(r.agg.p90),
                        r.agg.cc_share_pct,
                        r.agg.total_failure_pct
                    );
                }
            }
            w.flush()?;
        }
        Cmd::Cost { config, betas, years, scales, table_interpretation, out } => {
            let mut params = match config {
                Some(path) => load(&path)?.cost,
                None => Default::default(),
            };
            if table_interpretation.is_some() {
                params.table_interpretation = table_interpretation;
            }
            let mut rows = Vec::new();
            for scale in scales {
                rows.extend(cost_breakdown(&params, &betas, &years, scale)?);
            }
            let mut w = output(out.as_deref())?;
            report::write_cost(&rows, &mut w)?;
            w.flush()?;
            eprint!("{}", report::cost_table(&rows));
        }
        Cmd::Anova { input, factor, out } => {
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let groups = report::read_groups(file)?;
            let values: Vec<&[f64]> = groups.iter().map(|(_, v)| v.as_slice()).collect();
            let result = anova_oneway(&values)?;
            let mut w = output(out.as_deref())?;
            report::write_anova(&factor, &result, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
