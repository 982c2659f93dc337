//! Path enumeration under the desired-state ordering constraint, the three
//! planning objectives, and objective-minimizing plan selection.
//!
//! Enumeration only produces simple paths: all bundled layouts have strictly
//! positive state costs, so revisiting a state is never optimal, and the
//! restriction keeps the search space finite.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::model::{Automaton, LayoutPartition, Rational, StateId};

/// Which planning objective a controller minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ControllerKind {
    /// Pure cumulative cost.
    Plain,
    /// Cost inflated by the centrality-based risk ratio.
    Cb,
    /// Cost inflated by the path commitment measure.
    Pcm,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [ControllerKind::Plain, ControllerKind::Cb, ControllerKind::Pcm];

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "plain" => Some(ControllerKind::Plain),
            "cb" => Some(ControllerKind::Cb),
            "pcm" => Some(ControllerKind::Pcm),
            _ => None,
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControllerKind::Plain => "plain",
            ControllerKind::Cb => "cb",
            ControllerKind::Pcm => "pcm",
        })
    }
}

/// A controller objective: the kind plus the risk significance factor beta.
///
/// Beta only scales the risk term, so the plain objective ignores it. Any
/// non-negative beta is accepted; there is no meaningful upper bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub kind: ControllerKind,
    pub beta: Rational,
}

impl Objective {
    pub fn new(kind: ControllerKind, beta: Rational) -> Result<Self, OptimizerError> {
        if beta < Rational::zero() {
            return Err(OptimizerError::NegativeBeta);
        }
        Ok(Objective { kind, beta })
    }
}

/// The outcome of one optimization call: a route and its scores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub path: Vec<StateId>,
    /// Value of the controller's own objective on `path`.
    pub objective_value: Rational,
    /// Plain cumulative cost of `path` (states plus traversed edges).
    pub cost_sum: Rational,
    /// The risk multiplier the controller actually used: kappa for the
    /// commitment objective, the centrality ratio for the centrality
    /// objective, zero for plain cost.
    pub kappa_used: Rational,
    pub controller: ControllerKind,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OptimizerError {
    #[error("beta must be non-negative")]
    NegativeBeta,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// True iff every desired state occurs in `path` and their first occurrences
/// respect the desired order.
pub fn order_satisfied(path: &[StateId], desired: &[StateId]) -> bool {
    let mut last = None;
    for goal in desired {
        let Some(pos) = path.iter().position(|id| id == goal) else {
            return false;
        };
        if let Some(prev) = last {
            if pos <= prev {
                return false;
            }
        }
        last = Some(pos);
    }
    true
}

/// All simple paths from `start` that end at the last desired state, visit
/// the desired states in order, use only healthy states and present edges,
/// and take at most `max_hops` transitions. Results come in lexicographic
/// order.
///
/// The automaton passed here is the *planning view*: failed states are
/// flagged and disabled conveyor edges have been removed. An empty result is
/// not an error — it is how unsatisfiability surfaces.
pub fn enumerate_paths(
    automaton: &Automaton,
    start: &StateId,
    desired: &[StateId],
    max_hops: usize,
) -> Vec<Vec<StateId>> {
    if !automaton.contains_state(start) || automaton.is_failed(start) {
        return Vec::new();
    }
    let Some(goal) = desired.last() else {
        return vec![vec![start.clone()]];
    };

    let mut found = Vec::new();
    let mut trail = vec![start.clone()];
    dfs(automaton, goal, desired, max_hops, &mut trail, &mut found);
    found.sort();
    found
}

fn dfs(
    automaton: &Automaton,
    goal: &StateId,
    desired: &[StateId],
    max_hops: usize,
    trail: &mut Vec<StateId>,
    found: &mut Vec<Vec<StateId>>,
) {
    let current = trail.last().expect("trail is never empty").clone();
    if current == *goal {
        // A candidate must end at the goal, and a simple path cannot come
        // back, so there is nothing to explore past it.
        if order_satisfied(trail, desired) {
            found.push(trail.clone());
        }
        return;
    }
    if trail.len() > max_hops {
        return; // hop budget spent without reaching the goal
    }
    for edge in automaton.out_edges(&current) {
        if automaton.is_failed(&edge.dst) || trail.contains(&edge.dst) {
            continue;
        }
        trail.push(edge.dst.clone());
        dfs(automaton, goal, desired, max_hops, trail, found);
        trail.pop();
    }
}

/// Plain cumulative cost of a path: every state's cost plus every traversed
/// edge's cost.
pub fn path_cost(automaton: &Automaton, path: &[StateId]) -> Result<Rational, OptimizerError> {
    let mut total = Rational::zero();
    for id in path {
        let state = automaton
            .state(id)
            .ok_or_else(|| AnalysisError::UnknownState(id.clone()))?;
        total += state.cost.clone();
    }
    for pair in path.windows(2) {
        let edge = automaton.edge(&pair[0], &pair[1]).ok_or_else(|| AnalysisError::IllegalPath {
            from: pair[0].clone(),
            to: pair[1].clone(),
        })?;
        total += edge.cost.clone();
    }
    Ok(total)
}

/// Commitment-weighted objective: `(1 + beta * kappa) * cost`.
pub fn objective_pcm(
    automaton: &Automaton,
    layout: &LayoutPartition,
    path: &[StateId],
    beta: &Rational,
) -> Result<Rational, OptimizerError> {
    let kappa = analysis::pcm(automaton, layout, path)?;
    Ok((Rational::one() + beta.clone() * kappa) * path_cost(automaton, path)?)
}

/// Centrality ratio of a path: state count over the summed out-degree
/// centralities of its states, the sum clamped to at least one so that a
/// pure run of sinks cannot divide by zero.
pub fn cb_ratio(automaton: &Automaton, path: &[StateId]) -> Result<Rational, OptimizerError> {
    if path.is_empty() {
        return Err(AnalysisError::EmptyPath.into());
    }
    let mut degree_sum = 0usize;
    for id in path {
        degree_sum += analysis::out_degree(automaton, id)?;
    }
    Ok(Rational::from_integer(path.len().into()) / Rational::from_integer(degree_sum.max(1).into()))
}

/// Centrality-weighted baseline objective: `(1 + beta * ratio) * cost`. A
/// stand-in for centrality-based risk costing, calibrated to prefer the
/// best-connected production line.
pub fn objective_cb(
    automaton: &Automaton,
    path: &[StateId],
    beta: &Rational,
) -> Result<Rational, OptimizerError> {
    let ratio = cb_ratio(automaton, path)?;
    Ok((Rational::one() + beta.clone() * ratio) * path_cost(automaton, path)?)
}

/// Selects the objective-minimizing plan from `paths`, or `None` when the
/// candidate set is empty (unsatisfiable). Ties go to the cheaper path, then
/// to the lexicographically smaller state sequence.
pub fn argmin_plan(
    automaton: &Automaton,
    layout: &LayoutPartition,
    paths: &[Vec<StateId>],
    objective: &Objective,
) -> Result<Option<Plan>, OptimizerError> {
    let mut best: Option<Plan> = None;
    for path in paths {
        let cost = path_cost(automaton, path)?;
        let (value, multiplier) = match objective.kind {
            ControllerKind::Plain => (cost.clone(), Rational::zero()),
            ControllerKind::Cb => {
                let ratio = cb_ratio(automaton, path)?;
                ((Rational::one() + objective.beta.clone() * ratio.clone()) * cost.clone(), ratio)
            }
            ControllerKind::Pcm => {
                let kappa = analysis::pcm(automaton, layout, path)?;
                ((Rational::one() + objective.beta.clone() * kappa.clone()) * cost.clone(), kappa)
            }
        };
        let candidate = Plan {
            path: path.clone(),
            objective_value: value,
            cost_sum: cost,
            kappa_used: multiplier,
            controller: objective.kind,
        };
        let better = match &best {
            None => true,
            Some(current) => {
                (&candidate.objective_value, &candidate.cost_sum, &candidate.path)
                    < (&current.objective_value, &current.cost_sum, &current.path)
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best)
}
