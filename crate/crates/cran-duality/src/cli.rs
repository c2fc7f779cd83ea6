//! Command-line interface: one subcommand per capability.
//!
//! Exit status contract (stable for scripting): 0 on success or a passing
//! verification, 2 for an infeasible/indeterminate solve or a failing
//! verification, 1 for errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::model::{Direction, PerformanceReport};
use crate::optimizer::{
    fixed_point_solve, solve_downlink_min_power, RateTargets, SolveResult, SolverOptions,
};
use crate::report::{Report, ReportFormat};
use crate::scenario::{
    emit_scenario, generate_scenario, parse_scenario, Scenario, ScenarioDesign,
};
use crate::verify::{
    interference_function_properties, sample_rate_region, validate_duality, GENERATOR_ID,
};
use crate::{duality, model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cran-duality",
    version,
    about = "Evaluate, transform, and optimize compression-based C-RAN designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Ul,
    Dl,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Ul => Direction::Uplink,
            DirectionArg::Dl => Direction::Downlink,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Table,
    Records,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => ReportFormat::Table,
            FormatArg::Records => ReportFormat::Records,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize uplink sum power for the scenario's rate targets.
    SolveUl {
        #[arg(long)]
        scenario: PathBuf,
        /// Relative power-update tolerance of the fixed-point iteration.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Minimize downlink sum power via the uplink solution and the duality
    /// transform.
    SolveDl {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Map the scenario's explicit design to the other link direction.
    Transform {
        #[arg(long)]
        scenario: PathBuf,
        /// Destination direction.
        #[arg(long, value_enum)]
        to: DirectionArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Check that the duality transform of the scenario's design preserves
    /// rates, fronthaul rates and sum power.
    VerifyDuality {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Check the standard-interference-function axioms of the power-control
    /// map on random power vectors.
    VerifyProperties {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Sample achievable rate tuples from random feasible designs.
    Region {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Generate a seeded random scenario and print it as TOML.
    Gen {
        #[arg(long)]
        rrhs: usize,
        #[arg(long)]
        users: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        noise_power: f64,
        /// One value (broadcast to all RRHs) or a comma-separated list.
        #[arg(long, value_delimiter = ',', default_value = "3.0")]
        caps: Vec<f64>,
        /// Sum-power budget; omit for unbounded.
        #[arg(long)]
        budget: Option<f64>,
        /// Optional rate targets: one value (broadcast) or a list.
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<f64>>,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse `args` (including the program name) and run; the output goes to
/// `out`. Returns the process exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path as well.
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Entry point used by the binary: real process arguments, stdout.
pub fn run() -> i32 {
    let mut stdout = std::io::stdout();
    run_from(std::env::args_os(), &mut stdout)
}

fn header(report: &mut Report, command: &str, scenario: &Path) {
    report
        .text("tool", format!("cran-duality/{}", env!("CARGO_PKG_VERSION")))
        .text("generator", GENERATOR_ID)
        .text("command", command)
        .text("scenario", scenario.display().to_string());
}

fn require_targets(s: &Scenario) -> Result<&RateTargets> {
    s.targets.as_ref().ok_or_else(|| {
        Error::Scenario("this command needs a [targets] section in the scenario".into())
    })
}

fn require_design(s: &Scenario) -> Result<&ScenarioDesign> {
    s.design.as_ref().ok_or_else(|| {
        Error::Scenario("this command needs a [design] section in the scenario".into())
    })
}

fn push_solve_fields<D>(
    report: &mut Report,
    result: &SolveResult<D>,
    targets: &RateTargets,
    caps: &[f64],
) {
    let status = if result.converged {
        "converged"
    } else if result.infeasible {
        "infeasible"
    } else {
        "indeterminate"
    };
    report
        .text("status", status)
        .bool("converged", result.converged)
        .bool("infeasible", result.infeasible)
        .int("iterations", result.iterations as u64);
    if let Some(diag) = &result.diagnostic {
        report.text("diagnostic", diag.clone());
    }
    if let Some(perf) = &result.report {
        push_performance(report, perf);
        report.float_series("rate_target", &targets.targets);
        report.float_series("fronthaul_cap", caps);
    }
}

fn push_performance(report: &mut Report, perf: &PerformanceReport) {
    report
        .text("direction", perf.direction.to_string())
        .float("sum_power", perf.sum_power)
        .float_series("user_rate", &perf.user_rates)
        .float_series("fronthaul_rate", &perf.fronthaul_rates);
}

fn push_design_fields(report: &mut Report, powers: &[f64], quant_noise: &[f64]) {
    report.float_series("user_power", powers);
    report.float_series("quant_noise", quant_noise);
}

fn dispatch(command: Command, out: &mut dyn std::io::Write) -> Result<i32> {
    match command {
        Command::SolveUl {
            scenario,
            tol,
            max_iters,
            format,
        } => {
            let s = parse_scenario(&scenario)?;
            let targets = require_targets(&s)?;
            let opts = SolverOptions {
                tolerance: tol,
                max_iters,
                divergence_power: None,
            };
            let result = fixed_point_solve(
                &s.channel,
                targets,
                &s.params.fronthaul_caps,
                s.params.noise_power,
                &opts,
            )?;
            let mut report = Report::new("uplink sum-power minimization");
            header(&mut report, "solve-ul", &scenario);
            push_solve_fields(&mut report, &result, targets, &s.params.fronthaul_caps);
            if let Some(d) = &result.design {
                push_design_fields(&mut report, &d.powers, &d.quant_noise);
            }
            write_out(out, &report, format)?;
            Ok(if result.converged { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::SolveDl {
            scenario,
            tol,
            max_iters,
            format,
        } => {
            let s = parse_scenario(&scenario)?;
            let targets = require_targets(&s)?;
            let opts = SolverOptions {
                tolerance: tol,
                max_iters,
                divergence_power: None,
            };
            let result = solve_downlink_min_power(
                &s.channel,
                targets,
                &s.params.fronthaul_caps,
                s.params.noise_power,
                &opts,
            )?;
            let mut report = Report::new("downlink sum-power minimization");
            header(&mut report, "solve-dl", &scenario);
            push_solve_fields(&mut report, &result, targets, &s.params.fronthaul_caps);
            if let Some(d) = &result.design {
                push_design_fields(&mut report, &d.powers, &d.quant_noise);
            }
            write_out(out, &report, format)?;
            Ok(if result.converged { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Transform {
            scenario,
            to,
            format,
        } => {
            let s = parse_scenario(&scenario)?;
            let design = require_design(&s)?;
            let noise = s.params.noise_power;
            let mut report = Report::new("duality transform");
            header(&mut report, "transform", &scenario);
            match (design, to) {
                (ScenarioDesign::Uplink(d), DirectionArg::Dl) => {
                    let dual = duality::ul_to_dl(&s.channel, noise, d)?;
                    let perf = model::evaluate_downlink(&s.channel, &dual, noise)?;
                    report.text("to", "dl");
                    push_performance(&mut report, &perf);
                    push_design_fields(&mut report, &dual.powers, &dual.quant_noise);
                }
                (ScenarioDesign::Downlink(d), DirectionArg::Ul) => {
                    let dual = duality::dl_to_ul(&s.channel, noise, d)?;
                    let perf = model::evaluate_uplink(&s.channel, &dual, noise)?;
                    report.text("to", "ul");
                    push_performance(&mut report, &perf);
                    push_design_fields(&mut report, &dual.powers, &dual.quant_noise);
                }
                (ScenarioDesign::Uplink(_), DirectionArg::Ul) => {
                    return Err(Error::Scenario(
                        "the scenario design is already an uplink design; use --to dl".into(),
                    ));
                }
                (ScenarioDesign::Downlink(_), DirectionArg::Dl) => {
                    return Err(Error::Scenario(
                        "the scenario design is already a downlink design; use --to ul".into(),
                    ));
                }
            }
            write_out(out, &report, format)?;
            Ok(EXIT_OK)
        }
        Command::VerifyDuality {
            scenario,
            tol,
            format,
        } => {
            let s = parse_scenario(&scenario)?;
            let design = require_design(&s)?;
            let design_ref = match design {
                ScenarioDesign::Uplink(d) => model::DesignRef::Uplink(d),
                ScenarioDesign::Downlink(d) => model::DesignRef::Downlink(d),
            };
            let verdict = validate_duality(&s.channel, s.params.noise_power, design_ref, tol)?;
            let mut report = Report::new("duality preservation check");
            header(&mut report, "verify-duality", &scenario);
            report
                .text("direction", design_ref.direction().to_string())
                .float("tol", tol)
                .bool("pass", verdict.pass)
                .float("max_rate_gap", verdict.max_rate_gap)
                .float("max_fronthaul_gap", verdict.max_fronthaul_gap)
                .float("power_gap", verdict.power_gap);
            write_out(out, &report, format)?;
            Ok(if verdict.pass { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::VerifyProperties {
            scenario,
            n,
            seed,
            format,
        } => {
            let s = parse_scenario(&scenario)?;
            let targets = require_targets(&s)?;
            let verdict = interference_function_properties(
                &s.channel,
                targets,
                &s.params.fronthaul_caps,
                s.params.noise_power,
                n,
                seed,
            )?;
            let mut report = Report::new("interference-function axioms");
            header(&mut report, "verify-properties", &scenario);
            report
                .int("seed", seed)
                .int("samples", verdict.samples as u64)
                .bool("pass", verdict.holds);
            if let Some(ce) = &verdict.counterexample {
                report.text("counterexample", ce.clone());
            }
            write_out(out, &report, format)?;
            Ok(if verdict.holds { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Region {
            scenario,
            direction,
            n,
            seed,
            format,
        } => {
            let s = parse_scenario(&scenario)?;
            let sample =
                sample_rate_region(&s.channel, &s.params, Direction::from(direction), n, seed)?;
            let mut report = Report::new("achievable rate region sample");
            header(&mut report, "region", &scenario);
            report
                .text("direction", sample.direction.to_string())
                .int("seed", sample.seed)
                .int("count", sample.count as u64);
            for (i, tuple) in sample.tuples.iter().enumerate() {
                report.float_series(&format!("rate.{}", i + 1), tuple);
            }
            write_out(out, &report, format)?;
            Ok(EXIT_OK)
        }
        Command::Gen {
            rrhs,
            users,
            seed,
            noise_power,
            caps,
            budget,
            targets,
            out: out_path,
        } => {
            let scenario =
                generate_scenario(rrhs, users, seed, noise_power, &caps, budget, targets)?;
            let text = emit_scenario(&scenario);
            match out_path {
                Some(path) => std::fs::write(&path, text).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?,
                None => {
                    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
                        path: "<stdout>".into(),
                        source,
                    })?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn write_out(out: &mut dyn std::io::Write, report: &Report, format: FormatArg) -> Result<()> {
    out.write_all(report.render(format.into()).as_bytes())
        .map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        })
}
