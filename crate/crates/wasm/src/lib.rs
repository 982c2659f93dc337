//! Browser bindings for the manufacturing-line MPC toolkit.
//!
//! The demo page (`demo/index.html` at the repository root) is a single
//! static page that loads this crate through `wasm-bindgen` and offers three
//! interactive operations on the bundled paint-shop layout: path risk
//! analysis, failure-aware route planning, and controller comparisons for
//! the two bundled disruption scenarios.
//!
//! Building the browser package needs the `wasm32-unknown-unknown` target
//! and `wasm-pack`:
//!
//! ```text
//! rustup target add wasm32-unknown-unknown
//! wasm-pack build crates/wasm --target web --out-dir ../../demo/pkg
//! ```
//!
//! Each export is a thin wrapper over an implementation returning
//! `Result<String, String>`, so the logic is unit-tested on the host
//! toolchain without the wasm target installed.

use wasm_bindgen::prelude::*;

use pta_mpc_core::analysis::risk_profile;
use pta_mpc_core::controller::WorkingLayout;
use pta_mpc_core::io::{
    emit_comparison, parse_fixture, parse_rational, parse_scenario_with, render_rational,
    render_rational_exact, IoError, ReportFormat,
};
use pta_mpc_core::model::partition;
use pta_mpc_core::optimizer::{argmin_plan, enumerate_paths, ControllerKind, Objective};
use pta_mpc_core::sim::simulate;
use pta_mpc_core::{Automaton, Rational, StateId};

const BUNDLED_FIXTURE: &str = include_str!("../../../fixtures/paintshop.json");
const BUNDLED_SCENARIOS: [(&str, &str); 2] = [
    ("scenario1", include_str!("../../../fixtures/scenario1.json")),
    ("scenario2", include_str!("../../../fixtures/scenario2.json")),
];

fn bundled_automaton() -> Result<Automaton, String> {
    parse_fixture(BUNDLED_FIXTURE).map_err(|e| e.to_string())
}

fn parse_id_list(text: &str) -> Vec<StateId> {
    text.split(',').map(str::trim).filter(|t| !t.is_empty()).map(StateId::from).collect()
}

fn join_path(path: &[StateId]) -> String {
    path.iter().map(StateId::as_str).collect::<Vec<_>>().join(" -> ")
}

fn render_value(value: &Rational) -> String {
    let decimal = render_rational(value);
    let exact = render_rational_exact(value);
    if decimal == exact { decimal } else { format!("{decimal} ({exact})") }
}

fn analyze_path_impl(path_text: &str) -> Result<String, String> {
    let automaton = bundled_automaton()?;
    let layout = partition(&automaton).map_err(|e| e.to_string())?;
    let path = parse_id_list(path_text);
    if path.is_empty() {
        return Err("enter a comma-separated list of state ids, e.g. q1,q2,q3".into());
    }
    let profile = risk_profile(&automaton, &layout, &path).map_err(|e| e.to_string())?;
    let branch = profile.branch_states.iter().map(StateId::as_str).collect::<Vec<_>>().join(", ");
    let mut out = String::new();
    out.push_str(&format!("path:             {}\n", join_path(&profile.path)));
    out.push_str(&format!("length:           {}\n", profile.length));
    out.push_str(&format!(
        "branch states:    {}\n",
        if branch.is_empty() { "-".to_string() } else { branch }
    ));
    out.push_str(&format!("gamma:            {}\n", profile.gamma_centrality));
    if profile.csp_list.is_empty() {
        out.push_str("committed:        none\n");
    } else {
        for segment in &profile.csp_list {
            out.push_str(&format!("committed:        {segment} (length {})\n", segment.length()));
        }
    }
    out.push_str(&format!(
        "committed total:  {} over {} segment(s)\n",
        profile.csp_total_length, profile.csp_count
    ));
    out.push_str(&format!("active escapes:   {}\n", profile.active_redundant_count));
    out.push_str(&format!("kappa:            {}\n", render_value(&profile.kappa)));
    Ok(out)
}

fn plan_route_impl(controller: &str, beta_text: &str, failed_text: &str) -> Result<String, String> {
    let kind = ControllerKind::parse(controller)
        .ok_or_else(|| format!("unknown controller {controller:?}; expected plain, cb, or pcm"))?;
    let beta_text = beta_text.trim();
    let beta = parse_rational(if beta_text.is_empty() { "1" } else { beta_text })?;
    let objective = Objective::new(kind, beta).map_err(|e| e.to_string())?;

    let mut automaton = bundled_automaton()?;
    let failed = parse_id_list(failed_text);
    for id in &failed {
        if !automaton.contains_state(id) {
            return Err(format!("unknown state {id}"));
        }
        if *id == automaton.initial {
            return Err("the entry station cannot be marked failed".into());
        }
        automaton.set_failed(id, true);
    }
    let working = WorkingLayout::new(&automaton).map_err(|e| e.to_string())?;
    let planning = working.planning_automaton();
    let candidates = enumerate_paths(
        &planning,
        &automaton.initial,
        &automaton.desired_sequence,
        planning.states().len(),
    );
    let analysis_view = working.analysis_automaton();
    let plan = argmin_plan(&analysis_view, working.partition(), &candidates, &objective)
        .map_err(|e| e.to_string())?;

    let mut out = String::new();
    out.push_str(&format!("controller: {kind}\n"));
    if !failed.is_empty() {
        out.push_str(&format!(
            "failed:     {}\n",
            failed.iter().map(StateId::as_str).collect::<Vec<_>>().join(", ")
        ));
    }
    match plan {
        None => out.push_str("UNSAT: no legal route to the goal under the marked failures\n"),
        Some(plan) => {
            out.push_str(&format!("path:       {}\n", join_path(&plan.path)));
            out.push_str(&format!("cost:       {}\n", render_value(&plan.cost_sum)));
            out.push_str(&format!("risk:       {}\n", render_value(&plan.kappa_used)));
            out.push_str(&format!("V:          {}\n", render_value(&plan.objective_value)));
        }
    }
    Ok(out)
}

fn run_scenario_impl(which: &str, format_text: &str) -> Result<String, String> {
    let which = which.trim();
    let text = BUNDLED_SCENARIOS
        .iter()
        .find(|(name, _)| *name == which)
        .map(|(_, text)| *text)
        .ok_or_else(|| format!("unknown scenario {which:?}; choose scenario1 or scenario2"))?;
    let format_text = format_text.trim();
    let format = if format_text.is_empty() {
        ReportFormat::Text
    } else {
        ReportFormat::parse(format_text).ok_or("format must be text or csv")?
    };
    let scenario = parse_scenario_with(text, which, |name| {
        if name == "paintshop.json" {
            parse_fixture(BUNDLED_FIXTURE)
        } else {
            Err(IoError::Parse {
                path: name.to_string(),
                message: "only the bundled layout is available in the browser".into(),
            })
        }
    })
    .map_err(|e| e.to_string())?;
    let report = simulate(&scenario).map_err(|e| e.to_string())?;
    Ok(emit_comparison(&report, format))
}

/// The bundled layout document, for display beside the controls.
#[wasm_bindgen]
pub fn bundled_layout() -> String {
    BUNDLED_FIXTURE.to_string()
}

/// Risk profile of a comma-separated state path on the bundled layout.
#[wasm_bindgen]
pub fn analyze_path(path: &str) -> Result<String, JsValue> {
    analyze_path_impl(path).map_err(|e| JsValue::from_str(&e))
}

/// One-shot route selection on the bundled layout with optional failures.
#[wasm_bindgen]
pub fn plan_route(controller: &str, beta: &str, failed: &str) -> Result<String, JsValue> {
    plan_route_impl(controller, beta, failed).map_err(|e| JsValue::from_str(&e))
}

/// Full closed-loop comparison for a bundled scenario (`scenario1` or
/// `scenario2`), rendered as `text` or `csv`.
#[wasm_bindgen]
pub fn run_scenario(which: &str, format: &str) -> Result<String, JsValue> {
    run_scenario_impl(which, format).map_err(|e| JsValue::from_str(&e))
}
