//! Fixture and scenario files, plus deterministic report rendering.
//!
//! Automata and scenarios travel as JSON documents. Numeric fields accept
//! integers directly and arbitrary rationals as strings, either
//! `"numerator/denominator"` or a decimal such as `"0.25"` (converted
//! exactly). Bare non-integral JSON numbers are rejected rather than
//! silently converted, because their binary expansions would poison the
//! exact arithmetic used everywhere else.
//!
//! Failures are reported in three classes with distinct process exit codes:
//! unreadable or malformed text ([`IoError::Parse`], also used for plain I/O
//! failures), structurally well-formed documents with unusable content
//! ([`IoError::Schema`]), and schema-conformant models that violate automaton
//! invariants ([`IoError::Validation`]).

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{partition, validate, Automaton, Edge, EdgeKind, Rational, State, StateId};
use crate::optimizer::ControllerKind;
use crate::sim::{ComparisonReport, FailureTrigger, RunStatus, Scenario, TriggerCondition};

/// Colon-separated list of directories searched for fixture files referenced
/// by scenario documents.
pub const FIXTURE_PATH_ENV: &str = "PTA_MPC_FIXTURE_PATH";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("schema error in {path}: {message}")]
    Schema { path: String, message: String },
    #[error("validation error in {path}: {message}")]
    Validation { path: String, message: String },
}

impl IoError {
    /// Process exit code conventionally associated with this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Io { .. } | IoError::Parse { .. } => 3,
            IoError::Schema { .. } => 4,
            IoError::Validation { .. } => 5,
        }
    }
}

fn classify(origin: &str, error: serde_json::Error) -> IoError {
    match error.classify() {
        serde_json::error::Category::Data => {
            IoError::Schema { path: origin.to_string(), message: error.to_string() }
        }
        _ => IoError::Parse { path: origin.to_string(), message: error.to_string() },
    }
}

// ---------------------------------------------------------------------------
// Document shapes
// ---------------------------------------------------------------------------

/// A rational number in a document: a JSON integer, or a string holding a
/// fraction (`"a/b"`), an integer, or a decimal.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RationalDoc {
    Number(serde_json::Number),
    Text(String),
}

impl RationalDoc {
    fn to_rational(&self) -> Result<Rational, String> {
        match self {
            RationalDoc::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Rational::from_integer(i.into()))
                } else if let Some(u) = n.as_u64() {
                    Ok(Rational::from_integer(u.into()))
                } else {
                    Err(format!("non-integral number {n}; write exact fractions as \"a/b\""))
                }
            }
            RationalDoc::Text(t) => parse_rational(t),
        }
    }

    fn from_rational(value: &Rational) -> Self {
        if value.is_integer() {
            if let Some(i) = value.numer().to_i64() {
                return RationalDoc::Number(i.into());
            }
        }
        RationalDoc::Text(value.to_string())
    }
}

/// Parses a rational CLI argument or document string: an integer (`"18"`),
/// a fraction (`"5/21"`), or a decimal (`"0.25"`), each with an optional
/// sign. Decimals convert exactly, so `"0.1"` becomes one tenth.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let trimmed = text.trim();
    let unsigned = trimmed.strip_prefix(['+', '-']).unwrap_or(trimmed);
    if let Some((whole, frac)) = unsigned.split_once('.') {
        let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(frac) || !(whole.is_empty() || all_digits(whole)) {
            return Err(format!("cannot parse {text:?} as a decimal"));
        }
        let digits: BigInt = format!("{whole}{frac}")
            .parse()
            .map_err(|e| format!("cannot parse {text:?} as a decimal: {e}"))?;
        let numer = if trimmed.starts_with('-') { -digits } else { digits };
        return Ok(Rational::new(numer, pow10(frac.len() as u32)));
    }
    trimmed
        .parse::<Rational>()
        .map_err(|e| format!("cannot parse {text:?} as a rational: {e}"))
}

fn is_false(flag: &bool) -> bool {
    !*flag
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    id: String,
    cost: RationalDoc,
    risk_factor: RationalDoc,
    location: String,
    #[serde(default, skip_serializing_if = "is_false")]
    failed: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Original,
    Redundant,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    src: String,
    dst: String,
    cost: RationalDoc,
    kind: KindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    reset: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureDoc {
    states: Vec<StateDoc>,
    edges: Vec<EdgeDoc>,
    initial: String,
    desired_sequence: Vec<String>,
    #[serde(default)]
    clocks: Vec<String>,
}

impl FixtureDoc {
    fn into_automaton(self) -> Result<Automaton, String> {
        let mut states = Vec::with_capacity(self.states.len());
        for s in self.states {
            let cost = s.cost.to_rational().map_err(|e| format!("state {}: cost: {e}", s.id))?;
            let risk_factor = s
                .risk_factor
                .to_rational()
                .map_err(|e| format!("state {}: risk_factor: {e}", s.id))?;
            let mut state = State::new(s.id, cost, risk_factor, s.location);
            state.failed = s.failed;
            states.push(state);
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            let cost = e
                .cost
                .to_rational()
                .map_err(|err| format!("edge {} -> {}: cost: {err}", e.src, e.dst))?;
            let kind = match e.kind {
                KindDoc::Original => EdgeKind::Original,
                KindDoc::Redundant => EdgeKind::Redundant,
            };
            let mut edge = Edge::new(e.src, e.dst, cost, kind);
            edge.guard = e.guard;
            edge.reset = e.reset;
            edges.push(edge);
        }
        let desired = self.desired_sequence.into_iter().map(StateId::from).collect();
        Ok(Automaton::new(states, edges, self.initial, desired, self.clocks))
    }

    fn from_automaton(automaton: &Automaton) -> Self {
        FixtureDoc {
            states: automaton
                .states()
                .iter()
                .map(|s| StateDoc {
                    id: s.id.to_string(),
                    cost: RationalDoc::from_rational(&s.cost),
                    risk_factor: RationalDoc::from_rational(&s.risk_factor),
                    location: s.location.clone(),
                    failed: s.failed,
                })
                .collect(),
            edges: automaton
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    src: e.src.to_string(),
                    dst: e.dst.to_string(),
                    cost: RationalDoc::from_rational(&e.cost),
                    kind: match e.kind {
                        EdgeKind::Original => KindDoc::Original,
                        EdgeKind::Redundant => KindDoc::Redundant,
                    },
                    guard: e.guard.clone(),
                    reset: e.reset.clone(),
                })
                .collect(),
            initial: automaton.initial.to_string(),
            desired_sequence: automaton.desired_sequence.iter().map(|d| d.to_string()).collect(),
            clocks: automaton.clocks.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    name: String,
    fixture: String,
    beta: RationalDoc,
    controllers: Vec<String>,
    #[serde(default)]
    failures: Vec<FailureDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FailureDoc {
    target: String,
    when: WhenDoc,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum WhenDoc {
    AtStart,
    AfterExit { state: String },
    AfterEntry { state: String },
    Window { after_exit: String, before_entry: String },
}

// ---------------------------------------------------------------------------
// Loading and saving
// ---------------------------------------------------------------------------

fn parse_fixture_at(text: &str, origin: &str) -> Result<Automaton, IoError> {
    let doc: FixtureDoc = serde_json::from_str(text).map_err(|e| classify(origin, e))?;
    let automaton = doc
        .into_automaton()
        .map_err(|message| IoError::Schema { path: origin.to_string(), message })?;
    let report = validate(&automaton);
    if !report.is_valid() {
        return Err(IoError::Validation { path: origin.to_string(), message: report.to_string() });
    }
    // A usable fixture must also have a well-formed redundant layout.
    partition(&automaton)
        .map_err(|e| IoError::Validation { path: origin.to_string(), message: e.to_string() })?;
    Ok(automaton)
}

/// Parses and fully validates an automaton document.
pub fn parse_fixture(text: &str) -> Result<Automaton, IoError> {
    parse_fixture_at(text, "<fixture>")
}

/// Loads and fully validates an automaton fixture file.
pub fn load_fixture(path: &Path) -> Result<Automaton, IoError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::Io { path: origin.clone(), source })?;
    parse_fixture_at(&text, &origin)
}

/// Serializes an automaton as a fixture document; `parse_fixture` of the
/// output reproduces the automaton exactly.
pub fn save_fixture(automaton: &Automaton) -> String {
    let doc = FixtureDoc::from_automaton(automaton);
    let mut text = serde_json::to_string_pretty(&doc).expect("fixture documents serialize");
    text.push('\n');
    text
}

/// Parses a scenario document, delegating fixture resolution to `load`, so
/// callers without a filesystem can substitute bundled fixtures.
pub fn parse_scenario_with(
    text: &str,
    origin: &str,
    load: impl FnOnce(&str) -> Result<Automaton, IoError>,
) -> Result<Scenario, IoError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| classify(origin, e))?;
    let beta = doc
        .beta
        .to_rational()
        .map_err(|e| IoError::Schema { path: origin.to_string(), message: format!("beta: {e}") })?;
    let mut controllers = Vec::with_capacity(doc.controllers.len());
    for name in &doc.controllers {
        let kind = ControllerKind::parse(name).ok_or_else(|| IoError::Schema {
            path: origin.to_string(),
            message: format!("unknown controller {name:?}; expected plain, cb, or pcm"),
        })?;
        controllers.push(kind);
    }
    let failures = doc
        .failures
        .into_iter()
        .map(|f| FailureTrigger {
            target: f.target.into(),
            when: match f.when {
                WhenDoc::AtStart => TriggerCondition::AtStart,
                WhenDoc::AfterExit { state } => {
                    TriggerCondition::AfterExit { state: state.into() }
                }
                WhenDoc::AfterEntry { state } => {
                    TriggerCondition::AfterEntry { state: state.into() }
                }
                WhenDoc::Window { after_exit, before_entry } => TriggerCondition::Window {
                    after_exit: after_exit.into(),
                    before_entry: before_entry.into(),
                },
            },
        })
        .collect();
    let automaton = load(&doc.fixture)?;
    Ok(Scenario { name: doc.name, automaton, beta, controllers, failures })
}

fn resolve_fixture(reference: &str, scenario_dir: Option<&Path>) -> Result<PathBuf, IoError> {
    let direct = PathBuf::from(reference);
    if direct.is_file() {
        return Ok(direct);
    }
    if let Ok(dirs) = std::env::var(FIXTURE_PATH_ENV) {
        for dir in dirs.split(':').filter(|d| !d.is_empty()) {
            let candidate = Path::new(dir).join(reference);
            if candidate.is_file() {
                return Ok(candidate);
            }
        }
    }
    if let Some(dir) = scenario_dir {
        let candidate = dir.join(reference);
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    Err(IoError::Io {
        path: reference.to_string(),
        source: std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("fixture not found as given, on {FIXTURE_PATH_ENV}, or next to the scenario"),
        ),
    })
}

/// Loads a scenario file. The referenced fixture is looked up as given, then
/// in each directory on [`FIXTURE_PATH_ENV`], then next to the scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, IoError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::Io { path: origin.clone(), source })?;
    let scenario_dir = path.parent().map(Path::to_path_buf);
    parse_scenario_with(&text, &origin, |reference| {
        let resolved = resolve_fixture(reference, scenario_dir.as_deref())?;
        load_fixture(&resolved)
    })
}

// ---------------------------------------------------------------------------
// Number rendering
// ---------------------------------------------------------------------------

fn pow10(exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), exp as usize)
}

/// Renders a rational exactly: integers plainly, everything else as `a/b`.
pub fn render_rational_exact(value: &Rational) -> String {
    value.to_string()
}

/// Renders a rational in decimal with six significant digits, computed in
/// integer arithmetic with round-half-up, trailing zeros stripped. Integers
/// render exactly regardless of magnitude.
pub fn render_rational(value: &Rational) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let magnitude = value.abs();
    let numer = magnitude.numer();
    let denom = magnitude.denom();
    let body = if denom.is_one() {
        numer.to_string()
    } else {
        // Exponent of the leading significant digit: 10^e <= |value| < 10^(e+1).
        let mut e = numer.to_string().len() as i64 - denom.to_string().len() as i64;
        let at_least = |e: i64| {
            if e >= 0 {
                *numer >= denom * pow10(e as u32)
            } else {
                numer * pow10((-e) as u32) >= *denom
            }
        };
        if !at_least(e) {
            e -= 1;
        }
        if at_least(e + 1) {
            e += 1;
        }
        // Scale so the six kept digits are the integer part, round half up.
        let shift = 5 - e;
        let (scaled_numer, scaled_denom) = if shift >= 0 {
            (numer * pow10(shift as u32), denom.clone())
        } else {
            (numer.clone(), denom * pow10((-shift) as u32))
        };
        let mut six = (scaled_numer * 2 + &scaled_denom) / (scaled_denom * 2);
        if six >= pow10(6) {
            six = pow10(5);
            e += 1;
        }
        let digits = six.to_string();
        debug_assert_eq!(digits.len(), 6);
        if e >= 5 {
            format!("{digits}{}", "0".repeat((e - 5) as usize))
        } else if e >= 0 {
            let (int_part, frac_part) = digits.split_at((e + 1) as usize);
            let frac = frac_part.trim_end_matches('0');
            if frac.is_empty() {
                int_part.to_string()
            } else {
                format!("{int_part}.{frac}")
            }
        } else {
            let with_leading = format!("{}{digits}", "0".repeat((-e - 1) as usize));
            format!("0.{}", with_leading.trim_end_matches('0'))
        }
    };
    if value.is_negative() {
        format!("-{body}")
    } else {
        body
    }
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

/// What the controller did on one tick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceAction {
    Move(StateId),
    Finished,
    Unsat,
}

/// One tick of one controller's run, flattened for plotting. Ticks are
/// contiguous from 0; the record after the last move carries the terminal
/// status, with the reported objective value for finished runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub tick: usize,
    pub controller: ControllerKind,
    pub current: StateId,
    pub planned_path: Vec<StateId>,
    pub planned_v: Option<Rational>,
    pub fired_failures: Vec<StateId>,
    pub action: TraceAction,
}

/// Flattens a comparison report into per-tick records, controllers in report
/// order.
pub fn trace_records(report: &ComparisonReport) -> Vec<TraceRecord> {
    let mut records = Vec::new();
    for result in &report.results {
        let fired_at: BTreeMap<usize, &Vec<StateId>> =
            result.fired_events.iter().map(|(tick, states)| (*tick, states)).collect();
        let fired = |tick: usize| fired_at.get(&tick).map(|s| (*s).clone()).unwrap_or_default();
        let mut tick = 0;
        for plan in &result.per_step_plans {
            // A length-one plan closes the run in place and yields no move row.
            if plan.path.len() < 2 {
                continue;
            }
            records.push(TraceRecord {
                tick,
                controller: result.controller,
                current: plan.path[0].clone(),
                planned_path: plan.path.clone(),
                planned_v: Some(plan.objective_value.clone()),
                fired_failures: fired(tick),
                action: TraceAction::Move(plan.path[1].clone()),
            });
            tick += 1;
        }
        records.push(TraceRecord {
            tick,
            controller: result.controller,
            current: result.executed.last().expect("runs execute at least the initial state").clone(),
            planned_path: Vec::new(),
            planned_v: match result.status {
                RunStatus::Finished => result.reported_v.clone(),
                RunStatus::Unsat(_) => None,
            },
            fired_failures: fired(tick),
            action: match result.status {
                RunStatus::Finished => TraceAction::Finished,
                RunStatus::Unsat(_) => TraceAction::Unsat,
            },
        });
    }
    records
}

/// Output format for comparison reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

impl ReportFormat {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "text" => Some(ReportFormat::Text),
            "csv" => Some(ReportFormat::Csv),
            _ => None,
        }
    }
}

fn csv_field(value: &str) -> Cow<'_, str> {
    if value.contains([',', '"', '\n']) {
        Cow::Owned(format!("\"{}\"", value.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(value)
    }
}

fn join_path(path: &[StateId]) -> String {
    path.iter().map(StateId::as_str).collect::<Vec<_>>().join(" -> ")
}

fn render_value(value: &Rational) -> String {
    let decimal = render_rational(value);
    if value.is_integer() {
        decimal
    } else {
        format!("{decimal} ({})", render_rational_exact(value))
    }
}

/// Renders a comparison report. The CSV form has the fixed header
/// `tick,controller,current,action,planned_V,fired_failures` and is
/// byte-identical for identical inputs.
pub fn emit_comparison(report: &ComparisonReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from("tick,controller,current,action,planned_V,fired_failures\n");
            for record in trace_records(report) {
                let action = match &record.action {
                    TraceAction::Move(next) => format!("move:{next}"),
                    TraceAction::Finished => "finished".to_string(),
                    TraceAction::Unsat => "unsat".to_string(),
                };
                let value = record.planned_v.as_ref().map(render_rational).unwrap_or_default();
                let fired = record
                    .fired_failures
                    .iter()
                    .map(StateId::as_str)
                    .collect::<Vec<_>>()
                    .join(";");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    record.tick,
                    csv_field(&record.controller.to_string()),
                    csv_field(record.current.as_str()),
                    csv_field(&action),
                    csv_field(&value),
                    csv_field(&fired),
                );
            }
            out
        }
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "scenario: {}", report.scenario_name);
            let _ = writeln!(out, "beta: {}", render_rational_exact(&report.beta));
            for result in &report.results {
                match &result.status {
                    RunStatus::Finished => {
                        let value = result
                            .reported_v
                            .as_ref()
                            .map(render_value)
                            .unwrap_or_default();
                        let _ = writeln!(out, "{}: FINISHED, V = {value}", result.controller);
                    }
                    RunStatus::Unsat(_) => {
                        let (tick, state) = result
                            .unsat_at
                            .as_ref()
                            .expect("unsatisfiable runs carry a position");
                        let _ =
                            writeln!(out, "{}: UNSAT at {state} (tick {tick})", result.controller);
                    }
                }
                let _ = writeln!(out, "  executed: {}", join_path(&result.executed));
                if !result.fired_events.is_empty() {
                    let events = result
                        .fired_events
                        .iter()
                        .map(|(tick, states)| {
                            format!(
                                "{} at tick {tick}",
                                states.iter().map(StateId::as_str).collect::<Vec<_>>().join(";")
                            )
                        })
                        .collect::<Vec<_>>()
                        .join(", ");
                    let _ = writeln!(out, "  failures: {events}");
                }
            }
            match &report.winner {
                Some(kind) => {
                    let _ = writeln!(out, "winner: {kind}");
                }
                None => {
                    let _ = writeln!(out, "winner: none");
                }
            }
            out
        }
    }
}
