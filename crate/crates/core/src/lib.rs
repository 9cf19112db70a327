//! Finite-state abstractions of nondeterministic machines with inputs and
//! outputs. Two families are provided: machines whose states are windows of
//! recent and upcoming external letters, and quotients that merge states with
//! equal sets of future output windows. Both are tied back to the original
//! machine through canonical relations that can be checked for simulation.

pub mod behavior;
pub mod error;
pub mod fuzz;
pub mod machine;
pub mod qba;
pub mod relations;
pub mod report;
pub mod salca;
pub mod window;

pub use behavior::{
    behavior_equal, behavior_included, dominoes, external_strings, saturation_check, Horizon, InclusionVerdict,
    IntervalSpec, PrefixAutomaton, SaturationVerdict,
};
pub use error::{Error, Result};
pub use machine::{ExternalMode, StateId, StateMachine, Transition, ValidationReport};
pub use qba::{
    build_quotient_machine, initial_partition, is_domino_consistent, is_fixed_point, partition_at, refine,
    refinement_fixpoint, Partition,
};
pub use relations::{
    bisimilar, canonical_relation, control_compatibility, greatest_bisimulation, greatest_simulation, simulates,
    verify_simulation, CanonicalKind, ControlReport, Relation, SimulationVerdict,
};
pub use salca::{build_abstract_machine, is_async_l_complete, AbstractMachine, AbstractState, Verdict};
pub use window::{DominoSet, ExternalAlphabet, Letter, Window};
