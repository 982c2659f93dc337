//! The receding-horizon control loop: sense failures, update the working
//! layout, re-optimize, execute exactly one transition, repeat.
//!
//! One tick is one state transition, and entry times are tick indices. Plans
//! are recomputed from scratch every tick; at the scale of a manufacturing
//! line, correctness and reproducibility beat caching.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{partition, Automaton, EdgeKind, LayoutPartition, ModelError, StateId};
use crate::optimizer::{
    argmin_plan, enumerate_paths, objective_pcm, Objective, OptimizerError, Plan,
};
use crate::sim::{evaluate_triggers, FailureTrigger, RunResult, RunStatus};

/// The automaton as the controller currently believes it to be: the immutable
/// base plus the accumulated failures and the enablement of the redundant
/// chains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkingLayout {
    base: Automaton,
    layout: LayoutPartition,
    failed_states: BTreeSet<StateId>,
    /// Indices into the partition's redundant chains.
    enabled_redundant: BTreeSet<usize>,
}

impl WorkingLayout {
    pub fn new(automaton: &Automaton) -> Result<Self, ModelError> {
        let layout = partition(automaton)?;
        let failed_states: BTreeSet<StateId> =
            automaton.states().iter().filter(|s| s.failed).map(|s| s.id.clone()).collect();
        let enabled_redundant = if failed_states.is_empty() {
            BTreeSet::new()
        } else {
            (0..layout.k).collect()
        };
        Ok(WorkingLayout { base: automaton.clone(), layout, failed_states, enabled_redundant })
    }

    pub fn partition(&self) -> &LayoutPartition {
        &self.layout
    }

    pub fn failed_states(&self) -> &BTreeSet<StateId> {
        &self.failed_states
    }

    pub fn enabled_redundant(&self) -> &BTreeSet<usize> {
        &self.enabled_redundant
    }

    pub fn is_failed(&self, id: &StateId) -> bool {
        self.failed_states.contains(id)
    }

    /// View for path enumeration: failures flagged, disabled conveyor edges
    /// removed entirely.
    pub fn planning_automaton(&self) -> Automaton {
        let mut view = self.analysis_automaton();
        let layout = &self.layout;
        let enabled = &self.enabled_redundant;
        view.retain_edges(|e| match e.kind {
            EdgeKind::Original => true,
            EdgeKind::Redundant => layout
                .chain_of_edge(&e.src, &e.dst)
                .is_some_and(|chain| enabled.contains(&chain)),
        });
        view
    }

    /// View for risk analytics: failures flagged, but the full wiring kept,
    /// since centrality describes the layout rather than current usability.
    pub fn analysis_automaton(&self) -> Automaton {
        let mut view = self.base.clone();
        for id in &self.failed_states {
            view.set_failed(id, true);
        }
        view
    }
}

/// Applies sensory feedback: marks the sensed states failed and, as soon as
/// any failure exists, enables every redundant chain — the planner then picks
/// whichever escape is worth taking. Idempotent for identical feedback.
pub fn update_operator(
    layout: &WorkingLayout,
    sensed_failures: &BTreeSet<StateId>,
) -> Result<WorkingLayout, ModelError> {
    for id in sensed_failures {
        if !layout.base.contains_state(id) {
            return Err(ModelError::UnknownState(id.clone()));
        }
    }
    let mut updated = layout.clone();
    updated.failed_states.extend(sensed_failures.iter().cloned());
    if !updated.failed_states.is_empty() {
        updated.enabled_redundant = (0..updated.layout.k).collect();
    }
    Ok(updated)
}

/// The controller's memory across ticks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControllerMemory {
    /// Executed path so far; starts as just the initial state.
    pub executed: Vec<StateId>,
    /// The currently occupied state, always the last executed entry.
    pub current: StateId,
    /// Desired states not yet reached, in required order.
    pub remaining_desired: Vec<StateId>,
    /// Event tick, equal to the number of executed transitions.
    pub step_index: usize,
}

impl ControllerMemory {
    pub fn new(automaton: &Automaton) -> Self {
        let current = automaton.initial.clone();
        let mut remaining_desired = automaton.desired_sequence.clone();
        // Starting on the next desired state already satisfies it.
        while remaining_desired.first() == Some(&current) {
            remaining_desired.remove(0);
        }
        ControllerMemory { executed: vec![current.clone()], current, remaining_desired, step_index: 0 }
    }
}

/// Why a step could not be completed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnsatCause {
    /// No legal path through the remaining desired states exists.
    NoLegalPath,
    /// The occupied state itself failed; distinct so the simulator can
    /// reject schedules that do this.
    CurrentStateFailed,
}

/// Outcome of one controller tick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    /// Executed the first transition of the winning plan.
    Moved { plan: Plan, executed_state: StateId },
    /// The remaining desired set is empty (after the final transition, or
    /// without one when already at the goal).
    Finished { plan: Option<Plan>, executed_state: Option<StateId> },
    Unsat { cause: UnsatCause },
}

/// One tick of the receding-horizon loop: enumerate legal routes from the
/// current state through the remaining desired states, pick the
/// objective-minimizing plan, and execute exactly its first transition.
pub fn mpc_step(
    memory: &ControllerMemory,
    layout: &WorkingLayout,
    objective: &Objective,
) -> (StepOutcome, ControllerMemory) {
    if layout.is_failed(&memory.current) {
        return (StepOutcome::Unsat { cause: UnsatCause::CurrentStateFailed }, memory.clone());
    }
    if memory.remaining_desired.is_empty() {
        return (StepOutcome::Finished { plan: None, executed_state: None }, memory.clone());
    }

    let planning = layout.planning_automaton();
    let candidates =
        enumerate_paths(&planning, &memory.current, &memory.remaining_desired, planning.states().len());
    let analysis_view = layout.analysis_automaton();
    let plan = argmin_plan(&analysis_view, layout.partition(), &candidates, objective)
        .expect("paths from the planning view are analyzable");
    let Some(plan) = plan else {
        return (StepOutcome::Unsat { cause: UnsatCause::NoLegalPath }, memory.clone());
    };

    let mut next = memory.clone();
    if plan.path.len() == 1 {
        // Already at the sole remaining goal: close out without moving.
        next.remaining_desired.clear();
        return (StepOutcome::Finished { plan: Some(plan), executed_state: None }, next);
    }

    let target = plan.path[1].clone();
    next.executed.push(target.clone());
    next.current = target.clone();
    next.step_index += 1;
    if next.remaining_desired.first() == Some(&target) {
        next.remaining_desired.remove(0);
    } else {
        debug_assert!(
            !next.remaining_desired.contains(&target),
            "an order-satisfying plan can only enter a desired state when it is the next goal"
        );
    }

    if next.remaining_desired.is_empty() {
        (StepOutcome::Finished { plan: Some(plan), executed_state: Some(target) }, next)
    } else {
        (StepOutcome::Moved { plan, executed_state: target }, next)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("controller did not terminate within {steps} steps")]
    NonTermination { steps: usize },
}

/// Runs the full receding-horizon loop on `automaton` until the desired
/// sequence is exhausted or no legal route remains.
///
/// Each tick first evaluates the failure schedule against the run's own
/// event history and feeds newly fired failures through the update operator,
/// then plans and moves. The reported objective of a finished run is always
/// the commitment-weighted value of the executed path under the final
/// layout, whatever objective steered the run, so reported values are
/// comparable across controllers.
pub fn run(
    automaton: &Automaton,
    objective: &Objective,
    schedule: &[FailureTrigger],
) -> Result<RunResult, RunError> {
    let mut layout = WorkingLayout::new(automaton)?;
    let mut memory = ControllerMemory::new(automaton);
    let mut fired: BTreeSet<usize> = BTreeSet::new();
    let mut fired_events: Vec<(usize, Vec<StateId>)> = Vec::new();
    let mut per_step_plans: Vec<Plan> = Vec::new();
    let step_bound = 2 * automaton.states().len();

    let (status, unsat_at) = loop {
        let tick = memory.step_index;
        let (new_indices, new_targets) = evaluate_triggers(schedule, &memory.executed, &fired);
        if !new_indices.is_empty() {
            fired.extend(new_indices);
            fired_events.push((tick, new_targets.iter().cloned().collect()));
            layout = update_operator(&layout, &new_targets)?;
        }
        if layout.is_failed(&memory.current) {
            break (
                RunStatus::Unsat(UnsatCause::CurrentStateFailed),
                Some((tick, memory.current.clone())),
            );
        }
        if memory.remaining_desired.is_empty() {
            break (RunStatus::Finished, None);
        }
        let (outcome, next_memory) = mpc_step(&memory, &layout, objective);
        memory = next_memory;
        match outcome {
            StepOutcome::Moved { plan, .. } => per_step_plans.push(plan),
            StepOutcome::Finished { plan, .. } => {
                per_step_plans.extend(plan);
                break (RunStatus::Finished, None);
            }
            StepOutcome::Unsat { cause } => {
                break (RunStatus::Unsat(cause), Some((tick, memory.current.clone())))
            }
        }
        if memory.step_index > step_bound {
            return Err(RunError::NonTermination { steps: memory.step_index });
        }
    };

    let reported_v = match status {
        RunStatus::Finished => Some(objective_pcm(
            &layout.analysis_automaton(),
            layout.partition(),
            &memory.executed,
            &objective.beta,
        )?),
        RunStatus::Unsat(_) => None,
    };
    let mut entry_times = std::collections::BTreeMap::new();
    for (tick, id) in memory.executed.iter().enumerate() {
        entry_times.entry(id.clone()).or_insert(tick);
    }
    Ok(RunResult {
        controller: objective.kind,
        status,
        executed: memory.executed,
        entry_times,
        reported_v,
        unsat_at,
        per_step_plans,
        fired_events,
    })
}
