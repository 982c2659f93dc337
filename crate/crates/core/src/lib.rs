//! Risk-averse route planning and simulation for priced timed automata (PTA)
//! models of flexible manufacturing lines.
//!
//! A manufacturing layout is modeled as a PTA whose states are workstations
//! and whose edges are material moves. The layout splits into an *original*
//! part (the production lines) and *redundant* conveyor shortcuts that are
//! disabled until a workstation failure is sensed. Route risk is quantified
//! by the *path commitment measure* (kappa): the average fraction of a route
//! spent inside committed stretches with no escape branch. A receding-horizon
//! controller re-plans after every transition, weighing cost against risk,
//! and a discrete-event simulator injects workstation failures to compare
//! controller variants.
//!
//! The crate is organized along those seams:
//!
//! - [`model`]: automaton data types, validation, and the original/redundant
//!   layout partition.
//! - [`analysis`]: out-degree centrality, branch states, committed sub-paths,
//!   and the path commitment measure.
//! - [`optimizer`]: ordered-goal path enumeration and objective-minimizing
//!   plan selection (plain, centrality-based, and commitment-based objectives).
//! - [`controller`]: the receding-horizon loop with its sense-and-update
//!   operator.
//! - [`sim`]: failure triggers keyed to a run's own event history, and
//!   multi-controller scenario comparison.
//! - [`io`]: fixture/scenario files, text and CSV report rendering.
//!
//! All quantities that feed decisions (costs, kappa, objective values) use
//! exact rational arithmetic, and every collection with observable order is
//! kept sorted, so identical inputs always produce byte-identical reports.
//!
//! ```
//! use pta_mpc_core::{analysis, model};
//!
//! let fixture = r#"{
//!     "states": [
//!         { "id": "a", "cost": 1, "risk_factor": 1, "location": "depot" },
//!         { "id": "b", "cost": 1, "risk_factor": 1, "location": "mill" },
//!         { "id": "c", "cost": 1, "risk_factor": 1, "location": "storage" },
//!         { "id": "r", "cost": 1, "risk_factor": 1, "location": "conveyor" }
//!     ],
//!     "edges": [
//!         { "src": "a", "dst": "b", "cost": 0, "kind": "original" },
//!         { "src": "b", "dst": "c", "cost": 0, "kind": "original" },
//!         { "src": "a", "dst": "r", "cost": 0, "kind": "redundant" },
//!         { "src": "r", "dst": "c", "cost": 0, "kind": "redundant" }
//!     ],
//!     "initial": "a",
//!     "desired_sequence": ["c"],
//!     "clocks": []
//! }"#;
//! let automaton = pta_mpc_core::io::parse_fixture(fixture).unwrap();
//! let layout = model::partition(&automaton).unwrap();
//! assert_eq!(layout.k, 1);
//!
//! // A lone escape branch is not enough: the route stays fully committed.
//! let path: Vec<_> = ["a", "b", "c"].map(Into::into).into();
//! let kappa = analysis::pcm(&automaton, &layout, &path).unwrap();
//! assert_eq!(kappa, model::rational(1, 1));
//! ```

pub mod analysis;
pub mod controller;
pub mod io;
pub mod model;
pub mod optimizer;
pub mod sim;

pub use model::{Automaton, Rational, StateId};
