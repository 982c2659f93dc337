//! Automaton data model: states, edges, validation, and the partition of the
//! total layout into the original lines and the redundant conveyor chains.
//!
//! Clocks, guards, and resets are carried for completeness but never
//! evaluated; every scenario in this crate works on pure state/edge costs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

/// Exact rational number used for all costs, risk values, and objectives.
pub type Rational = num_rational::BigRational;

/// Shorthand for an exact rational constant.
pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Identifier of an automaton state, e.g. `"q15"`.
///
/// Identifiers compare lexicographically (`"q15" < "q2"`); every ordering in
/// this crate only relies on the comparison being total and stable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(String);

impl StateId {
    pub fn new(id: impl Into<String>) -> Self {
        StateId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for StateId {
    fn from(id: &str) -> Self {
        StateId(id.to_owned())
    }
}

impl From<String> for StateId {
    fn from(id: String) -> Self {
        StateId(id)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A workstation: a priced automaton state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub id: StateId,
    /// Execution price of the state, in time units.
    pub cost: Rational,
    /// Dimensionless failure-proneness weight of the station.
    pub risk_factor: Rational,
    /// Free-text station label, e.g. `"Turning Center 1"`.
    pub location: String,
    /// Runtime status flag; fixtures always start healthy.
    pub failed: bool,
}

impl State {
    pub fn new(id: impl Into<StateId>, cost: Rational, risk_factor: Rational, location: impl Into<String>) -> Self {
        State { id: id.into(), cost, risk_factor, location: location.into(), failed: false }
    }
}

/// Whether an edge belongs to the original lines or to a redundant conveyor
/// chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Original,
    Redundant,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Original => "original",
            EdgeKind::Redundant => "redundant",
        })
    }
}

/// A material move between two stations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: StateId,
    pub dst: StateId,
    /// Traversal price of the move; the bundled layouts price only states.
    pub cost: Rational,
    pub kind: EdgeKind,
    /// Clock guard, carried but treated as always satisfied.
    pub guard: Option<String>,
    /// Clock resets, carried but never applied.
    pub reset: Vec<String>,
}

impl Edge {
    pub fn new(src: impl Into<StateId>, dst: impl Into<StateId>, cost: Rational, kind: EdgeKind) -> Self {
        Edge { src: src.into(), dst: dst.into(), cost, kind, guard: None, reset: Vec::new() }
    }
}

/// A priced timed automaton over a manufacturing layout.
///
/// States and edges are kept sorted by identifier so that every traversal of
/// the automaton is deterministic. Duplicates survive construction and are
/// reported by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    states: Vec<State>,
    edges: Vec<Edge>,
    pub initial: StateId,
    /// Ordered set of desired states the product must visit.
    pub desired_sequence: Vec<StateId>,
    /// Declared clock names; inert.
    pub clocks: Vec<String>,
}

impl Automaton {
    pub fn new(
        mut states: Vec<State>,
        mut edges: Vec<Edge>,
        initial: impl Into<StateId>,
        desired_sequence: Vec<StateId>,
        clocks: Vec<String>,
    ) -> Self {
        states.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| (&a.src, &a.dst, a.kind).cmp(&(&b.src, &b.dst, b.kind)));
        Automaton { states, edges, initial: initial.into(), desired_sequence, clocks }
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn state(&self, id: &StateId) -> Option<&State> {
        self.states.binary_search_by(|s| s.id.cmp(id)).ok().map(|i| &self.states[i])
    }

    pub fn contains_state(&self, id: &StateId) -> bool {
        self.state(id).is_some()
    }

    pub fn is_failed(&self, id: &StateId) -> bool {
        self.state(id).is_some_and(|s| s.failed)
    }

    /// All edges leaving `id`, in (dst, kind) order.
    pub fn out_edges(&self, id: &StateId) -> impl Iterator<Item = &Edge> {
        let lo = self.edges.partition_point(|e| e.src < *id);
        let id = id.clone();
        self.edges[lo..].iter().take_while(move |e| e.src == id)
    }

    /// All edges incident to `id`, outgoing or incoming.
    pub fn incident_edges<'a>(&'a self, id: &'a StateId) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.src == *id || e.dst == *id)
    }

    /// The cheapest edge from `src` to `dst`, preferring original over
    /// redundant when both exist.
    pub fn edge(&self, src: &StateId, dst: &StateId) -> Option<&Edge> {
        self.out_edges(src).filter(|e| e.dst == *dst).min_by_key(|e| e.kind)
    }

    pub fn has_edge(&self, src: &StateId, dst: &StateId) -> bool {
        self.edge(src, dst).is_some()
    }

    pub fn set_failed(&mut self, id: &StateId, failed: bool) {
        if let Ok(i) = self.states.binary_search_by(|s| s.id.cmp(id)) {
            self.states[i].failed = failed;
        }
    }

    /// Drops every edge for which `keep` returns false. Used to build the
    /// planning view in which disabled conveyor chains do not exist.
    pub fn retain_edges(&mut self, keep: impl FnMut(&Edge) -> bool) {
        self.edges.retain(keep);
    }
}

/// One invariant violation found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyStateId,
    DuplicateState(StateId),
    NegativeStateCost(StateId),
    NegativeRiskFactor(StateId),
    UnknownInitial(StateId),
    UnknownDesired(StateId),
    DuplicateDesired(StateId),
    UnknownEdgeEndpoint { src: StateId, dst: StateId, missing: StateId },
    SelfLoop(StateId),
    NegativeEdgeCost { src: StateId, dst: StateId },
    DuplicateEdge { src: StateId, dst: StateId, kind: EdgeKind },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyStateId => write!(f, "state with empty identifier"),
            Violation::DuplicateState(id) => write!(f, "duplicate state {id}"),
            Violation::NegativeStateCost(id) => write!(f, "state {id} has negative cost"),
            Violation::NegativeRiskFactor(id) => write!(f, "state {id} has negative risk factor"),
            Violation::UnknownInitial(id) => write!(f, "initial state {id} is not declared"),
            Violation::UnknownDesired(id) => write!(f, "desired state {id} is not declared"),
            Violation::DuplicateDesired(id) => write!(f, "desired state {id} listed more than once"),
            Violation::UnknownEdgeEndpoint { src, dst, missing } => {
                write!(f, "edge {src} -> {dst} references undeclared state {missing}")
            }
            Violation::SelfLoop(id) => write!(f, "self-loop on state {id}"),
            Violation::NegativeEdgeCost { src, dst } => write!(f, "edge {src} -> {dst} has negative cost"),
            Violation::DuplicateEdge { src, dst, kind } => {
                write!(f, "duplicate {kind} edge {src} -> {dst}")
            }
        }
    }
}

/// Result of [`validate`]: empty means the automaton is well-formed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of `automaton` and reports all
/// violations; an empty report means the automaton is usable everywhere else
/// in this crate.
pub fn validate(automaton: &Automaton) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen_states: BTreeSet<&StateId> = BTreeSet::new();
    for state in automaton.states() {
        if state.id.as_str().is_empty() {
            violations.push(Violation::EmptyStateId);
        }
        if !seen_states.insert(&state.id) {
            violations.push(Violation::DuplicateState(state.id.clone()));
        }
        if state.cost < Rational::zero() {
            violations.push(Violation::NegativeStateCost(state.id.clone()));
        }
        if state.risk_factor < Rational::zero() {
            violations.push(Violation::NegativeRiskFactor(state.id.clone()));
        }
    }
    if !automaton.contains_state(&automaton.initial) {
        violations.push(Violation::UnknownInitial(automaton.initial.clone()));
    }
    let mut seen_desired: BTreeSet<&StateId> = BTreeSet::new();
    for id in &automaton.desired_sequence {
        if !automaton.contains_state(id) {
            violations.push(Violation::UnknownDesired(id.clone()));
        }
        if !seen_desired.insert(id) {
            violations.push(Violation::DuplicateDesired(id.clone()));
        }
    }
    let mut seen_edges: BTreeSet<(&StateId, &StateId, EdgeKind)> = BTreeSet::new();
    for edge in automaton.edges() {
        for endpoint in [&edge.src, &edge.dst] {
            if !automaton.contains_state(endpoint) {
                violations.push(Violation::UnknownEdgeEndpoint {
                    src: edge.src.clone(),
                    dst: edge.dst.clone(),
                    missing: endpoint.clone(),
                });
            }
        }
        if edge.src == edge.dst {
            violations.push(Violation::SelfLoop(edge.src.clone()));
        }
        if edge.cost < Rational::zero() {
            violations.push(Violation::NegativeEdgeCost { src: edge.src.clone(), dst: edge.dst.clone() });
        }
        if !seen_edges.insert((&edge.src, &edge.dst, edge.kind)) {
            violations.push(Violation::DuplicateEdge {
                src: edge.src.clone(),
                dst: edge.dst.clone(),
                kind: edge.kind,
            });
        }
    }
    ValidationReport { violations }
}

/// One maximal redundant conveyor chain: entry and exit live in the original
/// layout, every interior state belongs only to the redundant layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedundantPath {
    /// Full chain `entry, interior..., exit`; at least two states.
    pub sequence: Vec<StateId>,
    pub entry: StateId,
    pub exit: StateId,
    /// Chains start disabled and only become usable once the update operator
    /// reacts to a sensed failure.
    pub enabled: bool,
}

impl RedundantPath {
    /// Interior states, i.e. the sequence without entry and exit.
    pub fn interior(&self) -> &[StateId] {
        &self.sequence[1..self.sequence.len() - 1]
    }
}

/// Split of the total layout into the original automaton and the redundant
/// chains, produced by [`partition`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutPartition {
    /// The manufacturing lines without the conveyor shortcuts.
    pub original: Automaton,
    /// Maximal redundant chains, sorted by sequence.
    pub redundant_paths: Vec<RedundantPath>,
    /// Number of redundant chains, `redundant_paths.len()`.
    pub k: usize,
    /// Owning chain of each redundant edge, keyed by (src, dst).
    edge_owner: BTreeMap<(StateId, StateId), usize>,
}

impl LayoutPartition {
    fn new(original: Automaton, redundant_paths: Vec<RedundantPath>) -> Self {
        let mut edge_owner = BTreeMap::new();
        for (index, rp) in redundant_paths.iter().enumerate() {
            for pair in rp.sequence.windows(2) {
                edge_owner.insert((pair[0].clone(), pair[1].clone()), index);
            }
        }
        let k = redundant_paths.len();
        LayoutPartition { original, redundant_paths, k, edge_owner }
    }

    /// Index of the chain that owns the redundant edge `src -> dst`.
    pub fn chain_of_edge(&self, src: &StateId, dst: &StateId) -> Option<usize> {
        self.edge_owner.get(&(src.clone(), dst.clone())).copied()
    }

    /// States of the original layout that no original edge leaves; the ends
    /// of the production lines.
    pub fn original_sinks(&self) -> BTreeSet<&StateId> {
        self.original
            .states()
            .iter()
            .map(|s| &s.id)
            .filter(|id| self.original.out_edges(id).next().is_none())
            .collect()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("redundant path not part of this layout")]
    UnknownRedundantPath,
    #[error("malformed redundant chain: {0}")]
    MalformedRedundantChain(String),
}

/// Splits `total` into the original automaton and the maximal redundant
/// chains.
///
/// A state is interior to the redundant layout when every edge touching it is
/// redundant; all other states stay in the original automaton, which keeps
/// only the original edges. Each redundant chain is walked from its entry
/// (a non-interior source of a redundant edge) through interior states to its
/// exit; anything that is not such a clean chain — a dangling or branching
/// interior, or a redundant cycle that no entry reaches — is rejected.
pub fn partition(total: &Automaton) -> Result<LayoutPartition, ModelError> {
    let interior: BTreeSet<&StateId> = total
        .states()
        .iter()
        .map(|s| &s.id)
        .filter(|id| {
            let mut edges = total.incident_edges(id).peekable();
            edges.peek().is_some() && total.incident_edges(id).all(|e| e.kind == EdgeKind::Redundant)
        })
        .collect();

    let original = Automaton::new(
        total.states().iter().filter(|s| !interior.contains(&s.id)).cloned().collect(),
        total.edges().iter().filter(|e| e.kind == EdgeKind::Original).cloned().collect(),
        total.initial.clone(),
        total.desired_sequence.clone(),
        total.clocks.clone(),
    );

    let redundant_out = |id: &StateId| -> Vec<&Edge> {
        total.out_edges(id).filter(|e| e.kind == EdgeKind::Redundant).collect()
    };

    let mut chains = Vec::new();
    let mut visited: BTreeSet<(&StateId, &StateId)> = BTreeSet::new();
    for edge in total.edges().iter().filter(|e| e.kind == EdgeKind::Redundant) {
        if interior.contains(&edge.src) {
            continue; // reached from its entry, or left over for the check below
        }
        if !visited.insert((&edge.src, &edge.dst)) {
            return Err(ModelError::MalformedRedundantChain(format!(
                "redundant edge {} -> {} belongs to more than one chain",
                edge.src, edge.dst
            )));
        }
        let mut sequence = vec![edge.src.clone(), edge.dst.clone()];
        let mut last = &edge.dst;
        while interior.contains(last) {
            let next = redundant_out(last);
            match next.as_slice() {
                [only] => {
                    if !visited.insert((&only.src, &only.dst)) {
                        return Err(ModelError::MalformedRedundantChain(format!(
                            "interior state {last} is shared between chains"
                        )));
                    }
                    sequence.push(only.dst.clone());
                    last = &only.dst;
                }
                [] => {
                    return Err(ModelError::MalformedRedundantChain(format!(
                        "chain dangles at interior state {last}"
                    )))
                }
                _ => {
                    return Err(ModelError::MalformedRedundantChain(format!(
                        "interior state {last} branches"
                    )))
                }
            }
        }
        let entry = sequence.first().expect("chain has an entry").clone();
        let exit = sequence.last().expect("chain has an exit").clone();
        chains.push(RedundantPath { sequence, entry, exit, enabled: false });
    }

    let unvisited = total
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Redundant)
        .find(|e| !visited.contains(&(&e.src, &e.dst)));
    if let Some(edge) = unvisited {
        return Err(ModelError::MalformedRedundantChain(format!(
            "redundant edge {} -> {} is not reachable from any entry state",
            edge.src, edge.dst
        )));
    }

    chains.sort_by(|a, b| a.sequence.cmp(&b.sequence));
    Ok(LayoutPartition::new(original, chains))
}

/// Decides whether `rp` is an *active* escape route with respect to
/// `path_context`.
///
/// Active means both halves of a detour through `rp` are traversable: the
/// prefix of `path_context` up to the chain's entry is a legal path over
/// healthy states, and from the chain's exit some production line can still
/// be completed, i.e. a healthy original-edge route reaches an end-of-line
/// state. The chain's own states must be healthy as well. Enablement is
/// deliberately ignored — activity is a structural property of the layout
/// under the current failures.
pub fn is_active_redundant(
    automaton: &Automaton,
    layout: &LayoutPartition,
    rp: &RedundantPath,
    path_context: &[StateId],
) -> Result<bool, ModelError> {
    if !layout.redundant_paths.contains(rp) {
        return Err(ModelError::UnknownRedundantPath);
    }
    if rp.sequence.iter().any(|id| automaton.is_failed(id)) {
        return Ok(false);
    }

    let Some(entry_pos) = path_context.iter().position(|id| *id == rp.entry) else {
        return Ok(false);
    };
    let prefix = &path_context[..=entry_pos];
    for id in prefix {
        if !automaton.contains_state(id) {
            return Err(ModelError::UnknownState(id.clone()));
        }
        if automaton.is_failed(id) {
            return Ok(false);
        }
    }
    if prefix.windows(2).any(|pair| !automaton.has_edge(&pair[0], &pair[1])) {
        return Ok(false);
    }

    // Suffix legality: breadth-first search over healthy original edges from
    // the chain's exit towards any end-of-line state.
    let sinks = layout.original_sinks();
    let mut frontier = vec![&rp.exit];
    let mut seen: BTreeSet<&StateId> = frontier.iter().copied().collect();
    while let Some(id) = frontier.pop() {
        if sinks.contains(id) {
            return Ok(true);
        }
        for edge in layout.original.out_edges(id) {
            if !automaton.is_failed(&edge.dst) && seen.insert(&edge.dst) {
                frontier.push(&edge.dst);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io;

    fn paintshop() -> Automaton {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/paintshop.json");
        io::load_fixture(std::path::Path::new(path)).expect("bundled fixture loads")
    }

    fn ids(names: &[&str]) -> Vec<StateId> {
        names.iter().map(|n| StateId::from(*n)).collect()
    }

    #[test]
    fn paintshop_fixture_is_valid() {
        let report = validate(&paintshop());
        assert!(report.is_valid(), "unexpected violations: {report}");
    }

    #[test]
    fn missing_initial_is_reported() {
        let automaton = Automaton::new(
            vec![State::new("a", rational(1, 1), rational(1, 1), "x")],
            vec![],
            "ghost",
            vec![],
            vec![],
        );
        let report = validate(&automaton);
        assert_eq!(report.violations, vec![Violation::UnknownInitial("ghost".into())]);
    }

    #[test]
    fn duplicate_edge_is_reported() {
        let states = vec![
            State::new("q1", rational(1, 1), rational(1, 1), "x"),
            State::new("q2", rational(1, 1), rational(1, 1), "x"),
        ];
        let edge = Edge::new("q1", "q2", rational(0, 1), EdgeKind::Original);
        let automaton = Automaton::new(states, vec![edge.clone(), edge], "q1", vec![], vec![]);
        let report = validate(&automaton);
        assert_eq!(
            report.violations,
            vec![Violation::DuplicateEdge { src: "q1".into(), dst: "q2".into(), kind: EdgeKind::Original }]
        );
    }

    #[test]
    fn paintshop_partitions_into_seven_chains() {
        let automaton = paintshop();
        let layout = partition(&automaton).unwrap();
        assert_eq!(layout.k, 7);
        let interiors: Vec<&str> = layout
            .redundant_paths
            .iter()
            .flat_map(|rp| rp.interior())
            .map(StateId::as_str)
            .collect();
        let mut sorted = interiors.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, ["q20", "q21", "q22", "q23", "q24", "q25", "q26"]);
        assert!(layout.redundant_paths.iter().all(|rp| !rp.enabled));
        assert!(layout.original.edges().iter().all(|e| e.kind == EdgeKind::Original));
        for rp in &layout.redundant_paths {
            assert!(layout.original.contains_state(&rp.entry));
            assert!(layout.original.contains_state(&rp.exit));
        }
    }

    #[test]
    fn partition_without_redundant_edges_is_identity() {
        let states = vec![
            State::new("a", rational(1, 1), rational(1, 1), "x"),
            State::new("b", rational(1, 1), rational(1, 1), "x"),
        ];
        let edges = vec![Edge::new("a", "b", rational(0, 1), EdgeKind::Original)];
        let automaton = Automaton::new(states, edges, "a", ids(&["b"]), vec![]);
        let layout = partition(&automaton).unwrap();
        assert_eq!(layout.k, 0);
        assert_eq!(layout.original, automaton);
    }

    #[test]
    fn two_interior_states_form_one_chain() {
        let states = ["q2", "q9", "q20", "q20b"]
            .map(|id| State::new(id, rational(1, 1), rational(1, 1), "x"))
            .to_vec();
        let edges = vec![
            Edge::new("q2", "q9", rational(0, 1), EdgeKind::Original),
            Edge::new("q2", "q20", rational(0, 1), EdgeKind::Redundant),
            Edge::new("q20", "q20b", rational(0, 1), EdgeKind::Redundant),
            Edge::new("q20b", "q9", rational(0, 1), EdgeKind::Redundant),
        ];
        let automaton = Automaton::new(states, edges, "q2", ids(&["q9"]), vec![]);
        let layout = partition(&automaton).unwrap();
        assert_eq!(layout.k, 1);
        assert_eq!(layout.redundant_paths[0].sequence, ids(&["q2", "q20", "q20b", "q9"]));
    }

    #[test]
    fn dangling_interior_is_rejected() {
        let states = ["q2", "q9", "q20"]
            .map(|id| State::new(id, rational(1, 1), rational(1, 1), "x"))
            .to_vec();
        let edges = vec![
            Edge::new("q2", "q9", rational(0, 1), EdgeKind::Original),
            Edge::new("q2", "q20", rational(0, 1), EdgeKind::Redundant),
        ];
        let automaton = Automaton::new(states, edges, "q2", ids(&["q9"]), vec![]);
        assert!(matches!(partition(&automaton), Err(ModelError::MalformedRedundantChain(_))));
    }

    #[test]
    fn partition_is_lossless_and_deterministic() {
        let automaton = paintshop();
        let layout = partition(&automaton).unwrap();
        assert_eq!(layout, partition(&automaton).unwrap());

        // Every state is either original or interior to exactly one chain.
        let mut interior_ids: Vec<&StateId> =
            layout.redundant_paths.iter().flat_map(|rp| rp.interior()).collect();
        interior_ids.sort_unstable();
        interior_ids.dedup();
        assert_eq!(
            interior_ids.len(),
            layout.redundant_paths.iter().map(|rp| rp.interior().len()).sum::<usize>(),
            "interior states must not be shared"
        );
        for state in automaton.states() {
            let in_original = layout.original.contains_state(&state.id);
            let in_interior = interior_ids.binary_search(&&state.id).is_ok();
            assert!(in_original ^ in_interior, "state {} must appear exactly once", state.id);
        }

        // Every edge is either an original edge or a consecutive chain pair.
        for edge in automaton.edges() {
            match edge.kind {
                EdgeKind::Original => assert!(layout.original.has_edge(&edge.src, &edge.dst)),
                EdgeKind::Redundant => {
                    assert!(layout.chain_of_edge(&edge.src, &edge.dst).is_some())
                }
            }
        }
        let chain_pairs: usize = layout.redundant_paths.iter().map(|rp| rp.sequence.len() - 1).sum();
        let redundant_edges =
            automaton.edges().iter().filter(|e| e.kind == EdgeKind::Redundant).count();
        assert_eq!(chain_pairs, redundant_edges);
    }

    #[test]
    fn interior_states_have_one_predecessor_and_one_successor() {
        let automaton = paintshop();
        let layout = partition(&automaton).unwrap();
        for rp in &layout.redundant_paths {
            for id in rp.interior() {
                let incoming = automaton.incident_edges(id).filter(|e| e.dst == *id).count();
                let outgoing = automaton.incident_edges(id).filter(|e| e.src == *id).count();
                assert_eq!((incoming, outgoing), (1, 1), "interior {id}");
            }
        }
    }

    #[test]
    fn conveyor_to_line_two_is_active_on_line_three_context() {
        let automaton = paintshop();
        let layout = partition(&automaton).unwrap();
        let rp = layout.redundant_paths.iter().find(|rp| rp.sequence == ids(&["q2", "q20", "q9"])).unwrap();
        let context = ids(&["q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8"]);
        assert!(is_active_redundant(&automaton, &layout, rp, &context).unwrap());
    }

    #[test]
    fn broken_suffix_makes_chain_passive() {
        let mut automaton = paintshop();
        automaton.set_failed(&"q13".into(), true);
        let layout = partition(&automaton).unwrap();
        let rp = layout.redundant_paths.iter().find(|rp| rp.sequence == ids(&["q2", "q20", "q9"])).unwrap();
        let context = ids(&["q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8"]);
        assert!(!is_active_redundant(&automaton, &layout, rp, &context).unwrap());
    }

    #[test]
    fn entry_off_context_makes_chain_passive() {
        let automaton = paintshop();
        let layout = partition(&automaton).unwrap();
        let rp = layout.redundant_paths.iter().find(|rp| rp.sequence == ids(&["q2", "q20", "q9"])).unwrap();
        let context = ids(&["q1", "q14", "q15", "q16"]);
        assert!(!is_active_redundant(&automaton, &layout, rp, &context).unwrap());
    }

    #[test]
    fn foreign_redundant_path_is_rejected() {
        let automaton = paintshop();
        let layout = partition(&automaton).unwrap();
        let foreign = RedundantPath {
            sequence: ids(&["q1", "q99", "q8"]),
            entry: "q1".into(),
            exit: "q8".into(),
            enabled: false,
        };
        let context = ids(&["q1", "q2"]);
        assert_eq!(
            is_active_redundant(&automaton, &layout, &foreign, &context),
            Err(ModelError::UnknownRedundantPath)
        );
    }
}
