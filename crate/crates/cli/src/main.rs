//! Command-line front end for risk-averse route planning and failure
//! simulation over priced-timed-automaton manufacturing layouts.
//!
//! Exit codes: 0 success (a plan exists / at least one controller finished),
//! 2 unsatisfiable, 3 unreadable or unparsable input, 4 schema error,
//! 5 validation error, 64 command-line usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pta_mpc_core::analysis;
use pta_mpc_core::controller::WorkingLayout;
use pta_mpc_core::io::{
    self, emit_comparison, load_fixture, load_scenario, render_rational, render_rational_exact,
    IoError, ReportFormat,
};
use pta_mpc_core::model::partition;
use pta_mpc_core::optimizer::{argmin_plan, enumerate_paths, ControllerKind, Objective};
use pta_mpc_core::sim::{simulate, RunStatus, SimError};
use pta_mpc_core::{Rational, StateId};

const EXIT_UNSAT: u8 = 2;
const EXIT_VALIDATION: u8 = 5;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "pta-mpc",
    version,
    about = "Risk-averse route planning and failure simulation for manufacturing layouts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a fixture's structural invariants and redundant layout.
    Validate {
        /// Automaton fixture file.
        fixture: PathBuf,
    },
    /// Print the commitment risk profile of a concrete path.
    Analyze {
        /// Automaton fixture file.
        fixture: PathBuf,
        /// Path through the layout as comma-separated state ids.
        #[arg(long, value_name = "q1,q2,...")]
        path: String,
        /// Emit a machine-readable JSON record instead of aligned text.
        #[arg(long)]
        json: bool,
    },
    /// Select the objective-minimizing route on the current layout.
    Plan {
        /// Automaton fixture file.
        fixture: PathBuf,
        /// Start state; defaults to the fixture's initial state.
        #[arg(long, value_name = "STATE")]
        start: Option<String>,
        /// Objective: plain, cb (centrality-based), or pcm (commitment-based).
        #[arg(long, value_parser = parse_controller)]
        controller: ControllerKind,
        /// Risk-aversion weight, a non-negative integer, fraction, or decimal.
        #[arg(long, default_value = "1", value_parser = parse_beta)]
        beta: Rational,
    },
    /// Run the controllers listed in a scenario file and compare them.
    Simulate {
        /// Scenario file.
        scenario: PathBuf,
        #[arg(long, default_value = "text", value_parser = parse_format)]
        format: ReportFormat,
    },
    /// Run all three controllers on a scenario, regardless of its list.
    Compare {
        /// Scenario file.
        scenario: PathBuf,
        #[arg(long, default_value = "text", value_parser = parse_format)]
        format: ReportFormat,
    },
}

fn parse_controller(text: &str) -> Result<ControllerKind, String> {
    ControllerKind::parse(text)
        .ok_or_else(|| format!("unknown controller {text:?}; expected plain, cb, or pcm"))
}

fn parse_beta(text: &str) -> Result<Rational, String> {
    let beta = io::parse_rational(text)?;
    if beta < Rational::from_integer(0.into()) {
        return Err("risk-aversion weight must be non-negative".to_string());
    }
    Ok(beta)
}

fn parse_format(text: &str) -> Result<ReportFormat, String> {
    ReportFormat::parse(text).ok_or_else(|| format!("unknown format {text:?}; expected text or csv"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap's default failure exit code collides with the UNSAT code,
            // so usage errors get the conventional 64 instead.
            use clap::error::ErrorKind;
            let ok = matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = err.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_USAGE) };
        }
    };
    match cli.command {
        Command::Validate { fixture } => validate_command(&fixture),
        Command::Analyze { fixture, path, json } => analyze_command(&fixture, &path, json),
        Command::Plan { fixture, start, controller, beta } => {
            plan_command(&fixture, start.as_deref(), controller, beta)
        }
        Command::Simulate { scenario, format } => scenario_command(&scenario, format, false),
        Command::Compare { scenario, format } => scenario_command(&scenario, format, true),
    }
}

fn io_failure(err: &IoError) -> ExitCode {
    eprintln!("{err}");
    ExitCode::from(err.exit_code() as u8)
}

fn validate_command(fixture: &Path) -> ExitCode {
    // Loading performs full validation including the layout partition.
    let automaton = match load_fixture(fixture) {
        Ok(automaton) => automaton,
        Err(err) => return io_failure(&err),
    };
    let layout = partition(&automaton).expect("loaded fixtures have valid layouts");
    println!(
        "valid: {} states, {} edges, {} redundant chains",
        automaton.states().len(),
        automaton.edges().len(),
        layout.k
    );
    ExitCode::SUCCESS
}

fn parse_path_argument(text: &str) -> Vec<StateId> {
    text.split(',').map(str::trim).filter(|p| !p.is_empty()).map(StateId::from).collect()
}

fn analyze_command(fixture: &Path, path_arg: &str, json: bool) -> ExitCode {
    let automaton = match load_fixture(fixture) {
        Ok(automaton) => automaton,
        Err(err) => return io_failure(&err),
    };
    let layout = partition(&automaton).expect("loaded fixtures have valid layouts");
    let path = parse_path_argument(path_arg);
    let profile = match analysis::risk_profile(&automaton, &layout, &path) {
        Ok(profile) => profile,
        Err(err) => {
            eprintln!("cannot analyze path: {err}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    if json {
        let record = serde_record(&profile);
        println!("{record}");
    } else {
        let branch = profile
            .branch_states
            .iter()
            .map(StateId::as_str)
            .collect::<Vec<_>>()
            .join(", ");
        println!("path:             {}", join_path(&profile.path));
        println!("length:           {}", profile.length);
        println!("branch states:    {}", if branch.is_empty() { "-".to_string() } else { branch });
        println!("gamma:            {}", profile.gamma_centrality);
        if profile.csp_list.is_empty() {
            println!("committed:        none");
        } else {
            for segment in &profile.csp_list {
                println!("committed:        {segment} (length {})", segment.length());
            }
        }
        println!(
            "committed total:  {} over {} segment(s)",
            profile.csp_total_length, profile.csp_count
        );
        println!("active escapes:   {}", profile.active_redundant_count);
        println!("kappa:            {}", render_value(&profile.kappa));
    }
    ExitCode::SUCCESS
}

fn serde_record(profile: &analysis::PathRiskProfile) -> String {
    // Hand-rolled object keeps field order and number rendering fixed.
    let path = profile
        .path
        .iter()
        .map(|id| format!("{:?}", id.as_str()))
        .collect::<Vec<_>>()
        .join(",");
    let branches = profile
        .branch_states
        .iter()
        .map(|id| format!("{:?}", id.as_str()))
        .collect::<Vec<_>>()
        .join(",");
    let segments = profile
        .csp_list
        .iter()
        .map(|s| {
            format!(
                "[{}]",
                s.states.iter().map(|id| format!("{:?}", id.as_str())).collect::<Vec<_>>().join(",")
            )
        })
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "{{\"path\":[{path}],\"length\":{},\"branch_states\":[{branches}],\"gamma\":{},\
         \"segments\":[{segments}],\"segment_count\":{},\"segment_total_length\":{},\
         \"active_redundant\":{},\"kappa\":\"{}\",\"kappa_decimal\":\"{}\"}}",
        profile.length,
        profile.gamma_centrality,
        profile.csp_count,
        profile.csp_total_length,
        profile.active_redundant_count,
        render_rational_exact(&profile.kappa),
        render_rational(&profile.kappa),
    )
}

fn join_path(path: &[StateId]) -> String {
    path.iter().map(StateId::as_str).collect::<Vec<_>>().join(" -> ")
}

fn render_value(value: &Rational) -> String {
    if value.is_integer() {
        render_rational(value)
    } else {
        format!("{} ({})", render_rational(value), render_rational_exact(value))
    }
}

fn plan_command(
    fixture: &Path,
    start: Option<&str>,
    controller: ControllerKind,
    beta: Rational,
) -> ExitCode {
    let automaton = match load_fixture(fixture) {
        Ok(automaton) => automaton,
        Err(err) => return io_failure(&err),
    };
    let start: StateId = match start {
        Some(id) => id.into(),
        None => automaton.initial.clone(),
    };
    if !automaton.contains_state(&start) {
        eprintln!("unknown start state {start}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    let working = WorkingLayout::new(&automaton).expect("loaded fixtures have valid layouts");
    let objective = Objective::new(controller, beta).expect("weight checked at parse time");
    let planning = working.planning_automaton();
    let candidates = enumerate_paths(
        &planning,
        &start,
        &automaton.desired_sequence,
        planning.states().len(),
    );
    let plan = argmin_plan(&working.analysis_automaton(), working.partition(), &candidates, &objective)
        .expect("planning candidates are analyzable");
    match plan {
        Some(plan) => {
            println!("controller: {}", plan.controller);
            println!("path:       {}", join_path(&plan.path));
            println!("cost:       {}", render_value(&plan.cost_sum));
            println!("risk:       {}", render_value(&plan.kappa_used));
            println!("V:          {}", render_value(&plan.objective_value));
            ExitCode::SUCCESS
        }
        None => {
            println!("UNSAT");
            ExitCode::from(EXIT_UNSAT)
        }
    }
}

fn scenario_command(path: &Path, format: ReportFormat, all_controllers: bool) -> ExitCode {
    let mut scenario = match load_scenario(path) {
        Ok(scenario) => scenario,
        Err(err) => return io_failure(&err),
    };
    if all_controllers {
        scenario.controllers = ControllerKind::ALL.to_vec();
    }
    let report = match simulate(&scenario) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("{err}");
            return match err {
                SimError::Run(_) => ExitCode::FAILURE,
                _ => ExitCode::from(EXIT_VALIDATION),
            };
        }
    };
    print!("{}", emit_comparison(&report, format));
    if report.results.iter().any(|r| r.status == RunStatus::Finished) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_UNSAT)
    }
}
