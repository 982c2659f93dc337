//! Path risk analytics: out-degree centrality, branch states, committed
//! sub-paths, and the path commitment measure (kappa).
//!
//! Centrality is always computed over the *total* layout — original and
//! redundant edges alike, enabled or not — because it describes how a station
//! is wired, not what is currently usable. Path length is the edge count, so
//! a path of `n + 1` states has length `n`, and a committed segment's length
//! is likewise its edge count.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{
    is_active_redundant, Automaton, LayoutPartition, ModelError, Rational, StateId,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("no edge between consecutive path states {from} and {to}")]
    IllegalPath { from: StateId, to: StateId },
    #[error("empty path")]
    EmptyPath,
    #[error("zero-length path cannot carry committed segments")]
    ZeroLengthPath,
}

impl From<ModelError> for AnalysisError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::UnknownState(id) => AnalysisError::UnknownState(id),
            // Only raised for foreign chains, which this module never builds.
            other => unreachable!("unexpected model error during analysis: {other}"),
        }
    }
}

/// One committed sub-path: a stretch of the analyzed path bracketed by two
/// branch states with no escape in between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspSegment {
    /// The segment's states, from opening to closing branch state.
    pub states: Vec<StateId>,
}

impl CspSegment {
    /// Segment length: its edge count.
    pub fn length(&self) -> usize {
        self.states.len() - 1
    }
}

impl fmt::Display for CspSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.states.iter().enumerate() {
            if i > 0 {
                write!(f, " -> ")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

/// Aggregated risk analytics of one path, produced by [`risk_profile`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathRiskProfile {
    pub path: Vec<StateId>,
    /// Path length, i.e. edge count.
    pub length: usize,
    /// Path states with out-degree centrality of at least two.
    pub branch_states: BTreeSet<StateId>,
    /// Sum of the branch states' out-degree centralities.
    pub gamma_centrality: usize,
    pub csp_list: Vec<CspSegment>,
    pub csp_count: usize,
    /// Total length of all committed segments.
    pub csp_total_length: usize,
    /// Path commitment measure, in `[0, 1]`.
    pub kappa: Rational,
    /// Escape routes counted for the commitment fallback: redundant chains
    /// entered from this path, not traversed by it, and currently active.
    pub active_redundant_count: usize,
}

fn require_path(automaton: &Automaton, path: &[StateId]) -> Result<(), AnalysisError> {
    if path.is_empty() {
        return Err(AnalysisError::EmptyPath);
    }
    for id in path {
        if !automaton.contains_state(id) {
            return Err(AnalysisError::UnknownState(id.clone()));
        }
    }
    for pair in path.windows(2) {
        if !automaton.has_edge(&pair[0], &pair[1]) {
            return Err(AnalysisError::IllegalPath { from: pair[0].clone(), to: pair[1].clone() });
        }
    }
    Ok(())
}

/// Out-degree centrality of `state` over the total layout.
pub fn out_degree(automaton: &Automaton, state: &StateId) -> Result<usize, AnalysisError> {
    if !automaton.contains_state(state) {
        return Err(AnalysisError::UnknownState(state.clone()));
    }
    Ok(automaton.out_edges(state).count())
}

/// The path's states whose out-degree centrality is at least two.
pub fn branch_states(
    automaton: &Automaton,
    path: &[StateId],
) -> Result<BTreeSet<StateId>, AnalysisError> {
    require_path(automaton, path)?;
    let mut branches = BTreeSet::new();
    for id in path {
        if out_degree(automaton, id)? >= 2 {
            branches.insert(id.clone());
        }
    }
    Ok(branches)
}

/// All committed sub-paths of `path`, in path order.
///
/// Every stretch between two consecutive branch states is committed: its
/// interior states, if any, necessarily have out-degree one along the path,
/// so adjacent branch states bracket a committed segment of length one. A
/// path consisting solely of branch states has an escape at every station
/// and therefore carries no committed segment at all.
pub fn committed_subpaths(
    automaton: &Automaton,
    path: &[StateId],
) -> Result<Vec<CspSegment>, AnalysisError> {
    require_path(automaton, path)?;
    let mut branch_positions = Vec::new();
    for (pos, id) in path.iter().enumerate() {
        if out_degree(automaton, id)? >= 2 {
            branch_positions.push(pos);
        }
    }
    if branch_positions.len() == path.len() {
        return Ok(Vec::new());
    }
    Ok(branch_positions
        .windows(2)
        .map(|pair| CspSegment { states: path[pair[0]..=pair[1]].to_vec() })
        .collect())
}

/// Indices (into `layout.redundant_paths`) of the chains that count as escape
/// routes for `path`: entered from the path, not traversed by it, and active
/// under the current failures.
pub fn active_redundant_on_path(
    automaton: &Automaton,
    layout: &LayoutPartition,
    path: &[StateId],
) -> Result<Vec<usize>, AnalysisError> {
    let on_path: BTreeSet<&StateId> = path.iter().collect();
    let mut active = Vec::new();
    for (index, rp) in layout.redundant_paths.iter().enumerate() {
        if !on_path.contains(&rp.entry) {
            continue;
        }
        if rp.interior().iter().any(|id| on_path.contains(id)) {
            continue; // the path rides this chain instead of keeping it in reserve
        }
        if is_active_redundant(automaton, layout, rp, path)? {
            active.push(index);
        }
    }
    Ok(active)
}

/// Path commitment measure of `path`: the average committed-stretch fraction,
/// `total-csp-length / (csp-count * path-length)`.
///
/// A path with fewer than two active escape routes is fully committed
/// (`kappa = 1`); a path with escapes but no committed segment is fully
/// uncommitted (`kappa = 0`).
pub fn pcm(
    automaton: &Automaton,
    layout: &LayoutPartition,
    path: &[StateId],
) -> Result<Rational, AnalysisError> {
    require_path(automaton, path)?;
    if active_redundant_on_path(automaton, layout, path)?.len() < 2 {
        return Ok(Rational::one());
    }
    let segments = committed_subpaths(automaton, path)?;
    if segments.is_empty() {
        return Ok(Rational::zero());
    }
    let length = path.len() - 1;
    if length == 0 {
        // Unreachable: a committed segment needs two branch positions.
        return Err(AnalysisError::ZeroLengthPath);
    }
    let gamma: usize = segments.iter().map(CspSegment::length).sum();
    Ok(rational_usize(gamma) / (rational_usize(segments.len()) * rational_usize(length)))
}

fn rational_usize(n: usize) -> Rational {
    Rational::from_integer(n.into())
}

/// All per-path analytics in one record.
pub fn risk_profile(
    automaton: &Automaton,
    layout: &LayoutPartition,
    path: &[StateId],
) -> Result<PathRiskProfile, AnalysisError> {
    require_path(automaton, path)?;
    let branches = branch_states(automaton, path)?;
    let gamma_centrality = branches
        .iter()
        .map(|id| out_degree(automaton, id))
        .sum::<Result<usize, _>>()?;
    let csp_list = committed_subpaths(automaton, path)?;
    let csp_total_length = csp_list.iter().map(CspSegment::length).sum();
    let kappa = pcm(automaton, layout, path)?;
    let active = active_redundant_on_path(automaton, layout, path)?;
    Ok(PathRiskProfile {
        path: path.to_vec(),
        length: path.len() - 1,
        branch_states: branches,
        gamma_centrality,
        csp_count: csp_list.len(),
        csp_total_length,
        csp_list,
        kappa,
        active_redundant_count: active.len(),
    })
}
