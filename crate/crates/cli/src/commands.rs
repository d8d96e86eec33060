//! Subcommands and the shared output path.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use gridcap_core::auction::golden::{recompute_tables, worked_cases};
use gridcap_core::auction::{
    check_gross_substitutes, efficiency_gap, run_saa, verify_ce, AuctionError, Valuation,
};
use gridcap_core::capacity::{solve_firm, solve_flex, CapacityError};
use gridcap_core::risk::RiskLevel;
use gridcap_core::sweep::{firm_total_sweep, flex_total_sweep, SweepSummary};

use crate::io::{parse_auction, parse_network, parse_scenarios, read_input, InputFile};
use crate::manifest::{manifest_path, RunManifest};
use crate::report::{
    to_json, AuctionReport, FlexReport, GsClass, GsSuiteReport, RoundLimitReport, SweepReport, TableCase,
    TablesReport,
};
use crate::{CliError, EXIT_INPUT, EXIT_OK, EXIT_ROUND_LIMIT, EXIT_VERIFY};

#[derive(Debug, Parser)]
#[command(name = "gridcap", version, about = "Hosting capacity on radial grids and capacity auctions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Firm capacity robust to every load in the network's box
    Firm {
        network: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flexible capacity under CVaR limits over load scenarios
    Flex {
        network: PathBuf,
        scenarios: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the ascending auction and check the outcome
    Auction {
        config: PathBuf,
        /// Recorded in the manifest; bidding itself is deterministic
        #[arg(long, env = "GRIDCAP_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in verification suite
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Instances for sweeps, trials per valuation for gs
        #[arg(long)]
        seeds: Option<usize>,
        /// First seed of the sweep
        #[arg(long, env = "GRIDCAP_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Firm QP total against the total-capacity LP
    #[value(name = "theorem1")]
    FirmTotals,
    /// Flexible QP total against its LP, plus monotonicity in risk
    #[value(name = "prop2")]
    FlexTotals,
    /// Gross-substitutes checks on additive, symmetric concave and
    /// complementary valuations
    #[value(name = "gs")]
    Gs,
    /// Recompute the worked surplus tables
    #[value(name = "appendixF")]
    Tables,
}

/// A completed command: the report to emit and the exit status.
#[derive(Debug)]
pub struct Finished {
    pub report: String,
    pub code: i32,
    /// Printed to stderr.
    pub note: Option<String>,
}

impl Finished {
    fn ok(report: String) -> Self {
        Finished {
            report,
            code: EXIT_OK,
            note: None,
        }
    }
}

/// Per-run context; the manifest starts once inputs are read.
pub struct Session {
    argv: Vec<String>,
    seed: Option<u64>,
    manifest: Option<RunManifest>,
}

impl Session {
    pub fn new(argv: Vec<String>) -> Self {
        Session {
            argv,
            seed: None,
            manifest: None,
        }
    }

    fn record(&mut self, inputs: &[&InputFile]) {
        self.manifest = Some(RunManifest::begin(self.argv.clone(), inputs, self.seed));
    }
}

fn capacity_error(e: CapacityError) -> CliError {
    match e {
        CapacityError::Infeasible { violating } if violating.is_empty() => {
            CliError::Infeasible("no capacity vector meets the limits".into())
        }
        CapacityError::Infeasible { violating } => CliError::Infeasible(format!("violated rows: {}", violating.join(", "))),
        other => CliError::Input(other.to_string()),
    }
}

pub fn firm(s: &mut Session, network: &Path) -> Result<Finished, CliError> {
    let file = read_input(network)?;
    s.record(&[&file]);
    let input = parse_network(&file)?;
    let bounds = input.bounds.ok_or_else(|| {
        CliError::Input(format!("{}: firm capacity needs \"load_lower\" and \"load_upper\"", file.path))
    })?;
    let sol = solve_firm(&input.network, &bounds, None).map_err(capacity_error)?;
    Ok(Finished::ok(to_json(&sol)?))
}

pub fn flex(s: &mut Session, network: &Path, scenarios: &Path, alpha: f64) -> Result<Finished, CliError> {
    let net_file = read_input(network)?;
    let sc_file = read_input(scenarios)?;
    s.record(&[&net_file, &sc_file]);
    let input = parse_network(&net_file)?;
    let sc = parse_scenarios(&sc_file, input.network.n_buses())?;
    let level = RiskLevel::new(alpha).map_err(|e| CliError::Input(e.to_string()))?;
    let sol = solve_flex(&input.network, &sc, level, None).map_err(capacity_error)?;
    let mut note = None;
    let (c_incremental, firm_total) = match &input.bounds {
        None => (None, None),
        Some(b) => match solve_firm(&input.network, b, None) {
            Ok(f) => (Some(sol.incremental_over(&f)), Some(f.total)),
            Err(CapacityError::Infeasible { .. }) => {
                note = Some("firm model is infeasible on the box; c_incremental omitted".to_string());
                (None, None)
            }
            Err(e) => return Err(capacity_error(e)),
        },
    };
    let report = FlexReport {
        solution: sol,
        c_incremental,
        firm_total,
    };
    Ok(Finished {
        report: to_json(&report)?,
        code: EXIT_OK,
        note,
    })
}

pub fn auction(s: &mut Session, config: &Path) -> Result<Finished, CliError> {
    let file = read_input(config)?;
    s.record(&[&file]);
    let cfg = parse_auction(&file)?;
    let out = match run_saa(&cfg) {
        Ok(out) => out,
        Err(AuctionError::RoundLimitExceeded(state)) => {
            let note = format!("no quiet round within {} rounds; partial state written", cfg.max_rounds);
            return Ok(Finished {
                report: to_json(&RoundLimitReport {
                    max_rounds: cfg.max_rounds,
                    state: *state,
                })?,
                code: EXIT_ROUND_LIMIT,
                note: Some(note),
            });
        }
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    let input_err = |e: AuctionError| CliError::Input(e.to_string());
    let ce = verify_ce(&cfg.items, &cfg.bidders, &out.final_prices, &out.allocation, Some(cfg.epsilon))
        .map_err(input_err)?;
    let mut note = None;
    let efficiency = match efficiency_gap(&cfg.items, &cfg.bidders, &out.allocation) {
        Ok(r) => Some(r),
        Err(e @ AuctionError::TooLarge { .. }) => {
            note = Some(format!("efficiency not computed: {e}"));
            None
        }
        Err(e) => return Err(input_err(e)),
    };
    let holds = ce.holds;
    if !holds {
        note = Some(format!("outcome is not a modified equilibrium: {}", ce.violations.join("; ")));
    }
    let report = AuctionReport {
        epsilon: cfg.epsilon,
        outcome: out,
        ce_modified_holds: holds,
        ce,
        efficiency_gap: efficiency.as_ref().map(|r| r.gap),
        efficiency,
    };
    Ok(Finished {
        report: to_json(&report)?,
        code: if holds { EXIT_OK } else { EXIT_VERIFY },
        note,
    })
}

fn sweep_report(suite: &str, base_seed: u64, instances: usize, sum: &SweepSummary) -> SweepReport {
    SweepReport {
        suite: suite.into(),
        base_seed,
        instances,
        solves: sum.records.len(),
        scarce: sum.scarce(),
        max_scarce_gap: sum.max_scarce_gap(),
        passed: sum.passed(),
        failures: sum.failures().into_iter().cloned().collect(),
        errors: sum.errors.clone(),
        monotonicity_violations: sum.monotonicity_violations.clone(),
    }
}

fn sweep_note(r: &SweepReport) -> Option<String> {
    if r.passed {
        return None;
    }
    let mut parts = Vec::new();
    if let Some(f) = r.failures.first() {
        parts.push(format!(
            "seed {}: QP total {} vs LP total {} (gap {:e})",
            f.seed, f.report.qp_total, f.report.lp_total, f.report.gap
        ));
    }
    if let Some((seed, e)) = r.errors.first() {
        parts.push(format!("seed {seed}: {e}"));
    }
    if let Some(seed) = r.monotonicity_violations.first() {
        parts.push(format!("seed {seed}: total shrank as risk grew"));
    }
    Some(parts.join("; "))
}

fn gs_suite(seed: u64, trials: usize) -> Result<GsSuiteReport, CliError> {
    let cases = worked_cases();
    let mut entries: Vec<(String, Valuation, bool)> = Vec::new();
    for case in &cases {
        for (b, v) in case.bidders.iter().enumerate() {
            entries.push((format!("{} bidder {}", case.name, b + 1), v.clone(), true));
        }
    }
    let complements = Valuation::table(2, vec![0.0, 0.0, 0.0, 10.0]).map_err(|e| CliError::Input(e.to_string()))?;
    entries.push(("complements".into(), complements, false));
    let mut classes = Vec::new();
    for (i, (name, val, expect_pass)) in entries.into_iter().enumerate() {
        let report = check_gross_substitutes(&val, trials, 40.0, seed.wrapping_add(i as u64))
            .map_err(|e| CliError::Input(e.to_string()))?;
        classes.push(GsClass {
            name,
            expect_pass,
            report,
        });
    }
    Ok(GsSuiteReport {
        suite: "gs".into(),
        seed,
        trials,
        passed: classes.iter().all(|c| c.report.passes == c.expect_pass),
        classes,
    })
}

fn tables_suite() -> Result<TablesReport, CliError> {
    let mut cases = Vec::new();
    for case in worked_cases() {
        let mismatches = recompute_tables(&case).map_err(|e| CliError::Input(e.to_string()))?;
        let ce = verify_ce(&case.items(), &case.bidders, &case.prices, &case.allocation, Some(case.epsilon))
            .map_err(|e| CliError::Input(e.to_string()))?;
        cases.push(TableCase {
            name: case.name.clone(),
            rows_per_table: case.tables.iter().map(|t| t.rows.len()).collect(),
            ce_holds: ce.holds,
            mismatches,
        });
    }
    Ok(TablesReport {
        suite: "appendixF".into(),
        rows_checked: cases.iter().flat_map(|c| &c.rows_per_table).sum(),
        passed: cases.iter().all(|c| c.ce_holds && c.mismatches.is_empty()),
        cases,
    })
}

pub fn verify(s: &mut Session, suite: Suite, seeds: Option<usize>) -> Result<Finished, CliError> {
    s.record(&[]);
    let seed = s.seed.unwrap_or(0);
    let (report, passed, note) = match suite {
        Suite::FirmTotals => {
            let n = seeds.unwrap_or(200);
            let r = sweep_report("theorem1", seed, n, &firm_total_sweep(seed, n, 10));
            (to_json(&r)?, r.passed, sweep_note(&r))
        }
        Suite::FlexTotals => {
            let n = seeds.unwrap_or(100);
            let r = sweep_report("prop2", seed, n, &flex_total_sweep(seed, n, 8, 40));
            (to_json(&r)?, r.passed, sweep_note(&r))
        }
        Suite::Gs => {
            let r = gs_suite(seed, seeds.unwrap_or(500))?;
            let note = r
                .classes
                .iter()
                .find(|c| c.report.passes != c.expect_pass)
                .map(|c| match &c.report.counterexample {
                    Some(cx) => format!(
                        "{}: demand lost when prices rose from {:?} to {:?} (bundle {})",
                        c.name, cx.prices, cx.raised_prices, cx.bundle
                    ),
                    None => format!("{}: expected a violation, none found", c.name),
                });
            (to_json(&r)?, r.passed, note)
        }
        Suite::Tables => {
            let r = tables_suite()?;
            let note = r.cases.iter().find_map(|c| {
                if let Some(m) = c.mismatches.first() {
                    Some(format!(
                        "{} bidder {} bundle {}: listed {:?}, recomputed {:?}",
                        c.name,
                        m.bidder + 1,
                        m.listed.bundle,
                        m.listed,
                        m.recomputed
                    ))
                } else if !c.ce_holds {
                    Some(format!("{}: listed outcome is not an equilibrium", c.name))
                } else {
                    None
                }
            });
            (to_json(&r)?, r.passed, note)
        }
    };
    Ok(Finished {
        report,
        code: if passed { EXIT_OK } else { EXIT_VERIFY },
        note,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// Parses arguments, runs the command, writes the report and manifest, and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let mut session = Session::new(args.iter().map(|a| a.to_string_lossy().into_owned()).collect());
    let (result, out) = match &cli.command {
        Command::Firm { network, out } => (firm(&mut session, network), out),
        Command::Flex {
            network,
            scenarios,
            alpha,
            out,
        } => (flex(&mut session, network, scenarios, *alpha), out),
        Command::Auction { config, seed, out } => {
            session.seed = *seed;
            (auction(&mut session, config), out)
        }
        Command::Verify { suite, seeds, seed, out } => {
            session.seed = *seed;
            (verify(&mut session, *suite, *seeds), out)
        }
    };
    match result.and_then(|fin| emit(&mut session, out.as_deref(), fin)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(session: &mut Session, out: Option<&Path>, fin: Finished) -> Result<i32, CliError> {
    match out {
        Some(path) => {
            write_file(path, &fin.report)?;
            if let Some(m) = session.manifest.as_mut() {
                m.finish(&fin.report, fin.code);
                let text = serde_json::to_string_pretty(m).map_err(|e| CliError::Output(e.to_string()))?;
                write_file(&manifest_path(path), &(text + "\n"))?;
            }
        }
        None => print!("{}", fin.report),
    }
    if let Some(note) = &fin.note {
        eprintln!("{note}");
    }
    Ok(fin.code)
}
