//! Discrete-event simulation of workstation failures during a run.
//!
//! A scenario fixes an automaton, a risk-aversion weight, a list of
//! controllers, and a failure schedule. Each controller is simulated
//! independently against the same schedule; because triggers are phrased over
//! the run's own movement history ("after exiting q1", "once q15 is
//! entered"), different controllers can experience the same schedule at
//! different ticks or not at all. The comparison report collects every run
//! and names the cheapest finished one.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::controller::{run, RunError, UnsatCause};
use crate::model::{validate, Automaton, Rational, StateId, ValidationReport};
use crate::optimizer::{ControllerKind, Objective, Plan};

/// When a scheduled failure fires, phrased over the run's event history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TriggerCondition {
    /// Fires on the very first tick, before any transition.
    AtStart,
    /// Fires once the state has been exited, i.e. a successor was entered.
    AfterExit { state: StateId },
    /// Fires as soon as the state has been entered (possibly the same tick).
    AfterEntry { state: StateId },
    /// Fires after `after_exit` was exited while `before_entry` has not been
    /// entered; if the run reaches `before_entry` first, the failure never
    /// happens.
    Window { after_exit: StateId, before_entry: StateId },
}

/// A scheduled workstation failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureTrigger {
    pub target: StateId,
    pub when: TriggerCondition,
}

/// Evaluates the schedule against the executed history. `executed` includes
/// the just-entered state; a state counts as exited once any successor was
/// entered after it. Returns the indices that fire this tick (excluding
/// `already_fired` — each trigger fires at most once per run) together with
/// the union of their target states.
pub fn evaluate_triggers(
    schedule: &[FailureTrigger],
    executed: &[StateId],
    already_fired: &BTreeSet<usize>,
) -> (BTreeSet<usize>, BTreeSet<StateId>) {
    let tick = executed.len().saturating_sub(1);
    let entered: BTreeSet<&StateId> = executed.iter().collect();
    let exited: BTreeSet<&StateId> =
        executed[..executed.len().saturating_sub(1)].iter().collect();
    let mut indices = BTreeSet::new();
    let mut targets = BTreeSet::new();
    for (index, trigger) in schedule.iter().enumerate() {
        if already_fired.contains(&index) {
            continue;
        }
        let fires = match &trigger.when {
            TriggerCondition::AtStart => tick == 0,
            TriggerCondition::AfterExit { state } => exited.contains(state),
            TriggerCondition::AfterEntry { state } => entered.contains(state),
            TriggerCondition::Window { after_exit, before_entry } => {
                exited.contains(after_exit) && !entered.contains(before_entry)
            }
        };
        if fires {
            indices.insert(index);
            targets.insert(trigger.target.clone());
        }
    }
    (indices, targets)
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Finished,
    Unsat(UnsatCause),
}

/// Everything observable about one controller's run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub controller: ControllerKind,
    pub status: RunStatus,
    /// The executed path, starting at the initial state.
    pub executed: Vec<StateId>,
    /// First-entry tick per visited state.
    pub entry_times: BTreeMap<StateId, usize>,
    /// Commitment-weighted value of the executed path under the final
    /// layout; present exactly for finished runs.
    pub reported_v: Option<Rational>,
    /// Tick and occupied state at the moment the run became unsatisfiable.
    pub unsat_at: Option<(usize, StateId)>,
    /// The winning plan of every planning tick, in order.
    pub per_step_plans: Vec<Plan>,
    /// Failure targets by the tick their triggers fired, ticks ascending.
    pub fired_events: Vec<(usize, Vec<StateId>)>,
}

/// A complete simulation input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub automaton: Automaton,
    pub beta: Rational,
    pub controllers: Vec<ControllerKind>,
    pub failures: Vec<FailureTrigger>,
}

/// Outcome of simulating every requested controller.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonReport {
    pub scenario_name: String,
    pub beta: Rational,
    /// One entry per requested controller, in scenario order.
    pub results: Vec<RunResult>,
    /// Controller with the smallest reported value among finished runs;
    /// ties go to the earlier list position.
    pub winner: Option<ControllerKind>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid model: {0}")]
    InvalidModel(ValidationReport),
    #[error("risk-aversion weight must be non-negative, got {0}")]
    NegativeBeta(Rational),
    #[error("a scenario needs at least one controller")]
    NoControllers,
    #[error("controller {0} is listed more than once")]
    DuplicateController(ControllerKind),
    #[error("failure schedule references unknown state {0}")]
    UnknownScheduleState(StateId),
    #[error("{controller}: the schedule failed the occupied state {state} at tick {tick}")]
    ScheduleFailsOccupiedState { controller: ControllerKind, tick: usize, state: StateId },
    #[error(transparent)]
    Run(#[from] RunError),
}

fn check_schedule(automaton: &Automaton, schedule: &[FailureTrigger]) -> Result<(), SimError> {
    let mut referenced: Vec<&StateId> = Vec::new();
    for trigger in schedule {
        referenced.push(&trigger.target);
        match &trigger.when {
            TriggerCondition::AtStart => {}
            TriggerCondition::AfterExit { state } | TriggerCondition::AfterEntry { state } => {
                referenced.push(state)
            }
            TriggerCondition::Window { after_exit, before_entry } => {
                referenced.push(after_exit);
                referenced.push(before_entry);
            }
        }
    }
    for id in referenced {
        if !automaton.contains_state(id) {
            return Err(SimError::UnknownScheduleState(id.clone()));
        }
    }
    Ok(())
}

/// Runs every requested controller against the scenario and compares the
/// outcomes. A schedule that fails the state a controller is standing on is
/// rejected as a scenario error rather than scored as a loss.
pub fn simulate(scenario: &Scenario) -> Result<ComparisonReport, SimError> {
    let report = validate(&scenario.automaton);
    if !report.is_valid() {
        return Err(SimError::InvalidModel(report));
    }
    if scenario.beta < Rational::from_integer(0.into()) {
        return Err(SimError::NegativeBeta(scenario.beta.clone()));
    }
    if scenario.controllers.is_empty() {
        return Err(SimError::NoControllers);
    }
    let mut seen = BTreeSet::new();
    for kind in &scenario.controllers {
        if !seen.insert(*kind) {
            return Err(SimError::DuplicateController(*kind));
        }
    }
    check_schedule(&scenario.automaton, &scenario.failures)?;

    let mut results = Vec::new();
    for kind in &scenario.controllers {
        let objective =
            Objective::new(*kind, scenario.beta.clone()).expect("weight checked above");
        let result = run(&scenario.automaton, &objective, &scenario.failures)?;
        if result.status == RunStatus::Unsat(UnsatCause::CurrentStateFailed) {
            let (tick, state) = result.unsat_at.clone().expect("unsat runs carry a position");
            return Err(SimError::ScheduleFailsOccupiedState { controller: *kind, tick, state });
        }
        results.push(result);
    }

    let winner = results
        .iter()
        .filter(|r| r.status == RunStatus::Finished)
        .min_by(|a, b| a.reported_v.cmp(&b.reported_v))
        .map(|r| r.controller);

    Ok(ComparisonReport {
        scenario_name: scenario.name.clone(),
        beta: scenario.beta.clone(),
        results,
        winner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io;
    use crate::model::rational;

    fn paintshop() -> Automaton {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/paintshop.json");
        io::load_fixture(std::path::Path::new(path)).expect("bundled fixture loads")
    }

    fn ids(names: &[&str]) -> Vec<StateId> {
        names.iter().map(|n| StateId::from(*n)).collect()
    }

    fn disruption_schedule(third: TriggerCondition) -> Vec<FailureTrigger> {
        vec![
            FailureTrigger {
                target: "q10".into(),
                when: TriggerCondition::AfterExit { state: "q1".into() },
            },
            FailureTrigger {
                target: "q5".into(),
                when: TriggerCondition::Window {
                    after_exit: "q2".into(),
                    before_entry: "q4".into(),
                },
            },
            FailureTrigger { target: "q17".into(), when: third },
        ]
    }

    fn scenario(third: TriggerCondition) -> Scenario {
        Scenario {
            name: "test".into(),
            automaton: paintshop(),
            beta: rational(1, 1),
            controllers: ControllerKind::ALL.to_vec(),
            failures: disruption_schedule(third),
        }
    }

    fn result_of(report: &ComparisonReport, kind: ControllerKind) -> &RunResult {
        report.results.iter().find(|r| r.controller == kind).unwrap()
    }

    #[test]
    fn window_fires_between_exit_and_entry() {
        let schedule = disruption_schedule(TriggerCondition::AtStart);
        let fired = BTreeSet::new();
        // q2 not exited yet: nothing (index 2 is AtStart but tick is 2 here).
        let (idx, _) = evaluate_triggers(&schedule, &ids(&["q1", "q2", "q3"]), &fired);
        assert!(idx.contains(&1), "q2 exited, q4 not entered: window fires");
        let (idx, _) = evaluate_triggers(&schedule, &ids(&["q1", "q2"]), &fired);
        assert!(!idx.contains(&1), "q2 entered but not exited");
        let (idx, _) = evaluate_triggers(&schedule, &ids(&["q1", "q2", "q3", "q4"]), &fired);
        assert!(!idx.contains(&1), "q4 entered: the window has closed");
    }

    #[test]
    fn entry_triggers_fire_on_the_entering_tick() {
        let schedule = disruption_schedule(TriggerCondition::AfterEntry { state: "q15".into() });
        let (idx, targets) = evaluate_triggers(&schedule, &ids(&["q1", "q14", "q15"]), &BTreeSet::new());
        assert!(idx.contains(&2));
        assert!(targets.contains(&"q17".into()));
        // The exit-based variant waits one more tick.
        let schedule = disruption_schedule(TriggerCondition::AfterExit { state: "q15".into() });
        let (idx, _) = evaluate_triggers(&schedule, &ids(&["q1", "q14", "q15"]), &BTreeSet::new());
        assert!(!idx.contains(&2));
        let (idx, _) =
            evaluate_triggers(&schedule, &ids(&["q1", "q14", "q15", "q16"]), &BTreeSet::new());
        assert!(idx.contains(&2));
    }

    #[test]
    fn triggers_fire_at_most_once() {
        let schedule =
            vec![FailureTrigger { target: "q10".into(), when: TriggerCondition::AtStart }];
        let (first, _) = evaluate_triggers(&schedule, &ids(&["q1"]), &BTreeSet::new());
        assert_eq!(first, BTreeSet::from([0]));
        let (again, _) = evaluate_triggers(&schedule, &ids(&["q1"]), &first);
        assert!(again.is_empty());
        // And never on later ticks.
        let (later, _) = evaluate_triggers(&schedule, &ids(&["q1", "q2"]), &BTreeSet::new());
        assert!(later.is_empty());
    }

    #[test]
    fn avoided_states_never_trigger() {
        let schedule = disruption_schedule(TriggerCondition::AfterExit { state: "q15".into() });
        let line_two = ids(&["q1", "q9", "q10", "q11", "q12", "q13", "q8"]);
        for end in 1..=line_two.len() {
            let (idx, _) = evaluate_triggers(&schedule, &line_two[..end], &BTreeSet::new());
            assert!(!idx.contains(&2), "q15 is never visited on line two");
        }
    }

    #[test]
    fn exit_disruption_scenario_only_the_risk_aware_controller_finishes() {
        let report =
            simulate(&scenario(TriggerCondition::AfterExit { state: "q15".into() })).unwrap();

        let plain = result_of(&report, ControllerKind::Plain);
        assert_eq!(plain.status, RunStatus::Unsat(UnsatCause::NoLegalPath));
        assert_eq!(plain.executed, ids(&["q1", "q9"]));
        assert_eq!(plain.unsat_at, Some((1, "q9".into())));

        let cb = result_of(&report, ControllerKind::Cb);
        assert_eq!(cb.status, RunStatus::Unsat(UnsatCause::NoLegalPath));
        assert_eq!(cb.executed, ids(&["q1", "q14", "q15", "q16"]));
        assert_eq!(cb.unsat_at, Some((3, "q16".into())));

        let pcm = result_of(&report, ControllerKind::Pcm);
        assert_eq!(pcm.status, RunStatus::Finished);
        assert_eq!(
            pcm.executed,
            ids(&["q1", "q2", "q3", "q4", "q21", "q11", "q12", "q13", "q8"])
        );
        assert_eq!(pcm.reported_v, Some(rational(18, 1)));
        assert_eq!(
            pcm.fired_events,
            vec![(1, ids(&["q10"])), (2, ids(&["q5"]))],
            "the third failure never fires: q15 is avoided"
        );

        assert_eq!(report.winner, Some(ControllerKind::Pcm));
    }

    #[test]
    fn entry_disruption_scenario_both_risk_aware_controllers_finish() {
        let report =
            simulate(&scenario(TriggerCondition::AfterEntry { state: "q15".into() })).unwrap();

        let plain = result_of(&report, ControllerKind::Plain);
        assert_eq!(plain.status, RunStatus::Unsat(UnsatCause::NoLegalPath));

        let cb = result_of(&report, ControllerKind::Cb);
        assert_eq!(cb.status, RunStatus::Finished);
        assert_eq!(cb.executed, ids(&["q1", "q14", "q15", "q24", "q11", "q12", "q13", "q8"]));
        assert_eq!(cb.reported_v, Some(rational(16, 1)));
        assert_eq!(cb.fired_events, vec![(1, ids(&["q10"])), (2, ids(&["q17"]))]);

        let pcm = result_of(&report, ControllerKind::Pcm);
        assert_eq!(pcm.status, RunStatus::Finished);
        assert_eq!(pcm.reported_v, Some(rational(18, 1)));

        assert_eq!(report.winner, Some(ControllerKind::Cb), "16 beats 18");
    }

    #[test]
    fn undisturbed_comparison_prefers_the_commitment_objective() {
        let mut scenario = scenario(TriggerCondition::AtStart);
        scenario.failures.clear();
        let report = simulate(&scenario).unwrap();
        assert_eq!(report.winner, Some(ControllerKind::Pcm));
        let plain = result_of(&report, ControllerKind::Plain);
        assert_eq!(plain.reported_v, Some(rational(14, 1)));
        let cb = result_of(&report, ControllerKind::Cb);
        assert_eq!(cb.reported_v, Some(rational(76, 7)));
        let pcm = result_of(&report, ControllerKind::Pcm);
        assert_eq!(pcm.reported_v, Some(rational(208, 21)));
    }

    #[test]
    fn failing_the_occupied_state_is_a_scenario_error() {
        let mut bad = scenario(TriggerCondition::AtStart);
        bad.failures =
            vec![FailureTrigger { target: "q1".into(), when: TriggerCondition::AtStart }];
        let err = simulate(&bad).unwrap_err();
        assert_eq!(
            err,
            SimError::ScheduleFailsOccupiedState {
                controller: ControllerKind::Plain,
                tick: 0,
                state: "q1".into(),
            }
        );
    }

    #[test]
    fn malformed_scenarios_are_rejected() {
        let mut no_controllers = scenario(TriggerCondition::AtStart);
        no_controllers.controllers.clear();
        assert_eq!(simulate(&no_controllers).unwrap_err(), SimError::NoControllers);

        let mut negative = scenario(TriggerCondition::AtStart);
        negative.beta = rational(-1, 2);
        assert!(matches!(simulate(&negative).unwrap_err(), SimError::NegativeBeta(_)));

        let mut doubled = scenario(TriggerCondition::AtStart);
        doubled.controllers = vec![ControllerKind::Plain, ControllerKind::Plain];
        assert_eq!(
            simulate(&doubled).unwrap_err(),
            SimError::DuplicateController(ControllerKind::Plain)
        );

        let mut unknown = scenario(TriggerCondition::AtStart);
        unknown.failures =
            vec![FailureTrigger { target: "q99".into(), when: TriggerCondition::AtStart }];
        assert_eq!(
            simulate(&unknown).unwrap_err(),
            SimError::UnknownScheduleState("q99".into())
        );
    }
}
