//! Small machines on which the expected correspondences between predicates
//! and relations break down. The assertions pin the observed behavior.

use domino_core::behavior::Horizon;
use domino_core::qba::{future_partition, is_fixed_point, partition_at};
use domino_core::relations::{canonical_relation, verify_simulation, CanonicalKind};
use domino_core::salca::{dominoes_determined_by_prefix, future_unique, sbalc};
use domino_core::{ExternalMode, IntervalSpec, StateMachine};

const Y: ExternalMode = ExternalMode::Outputs;

/// x1 reaches both x2 and x0 on the same output; x2 reaches only x0.
/// Their sets of future output windows of length two coincide, yet x1 has a
/// successor with output set {y0} and x2 does not.
fn merged_futures() -> StateMachine {
    StateMachine::from_names(
        &["x0", "x1", "x2"],
        &["u0", "u1"],
        &["y0", "y1"],
        &["x1"],
        &[
            ["x0", "u1", "y0", "x2"],
            ["x0", "u1", "y1", "x2"],
            ["x1", "u0", "y0", "x2"],
            ["x1", "u1", "y0", "x0"],
            ["x2", "u1", "y0", "x0"],
        ],
    )
    .unwrap()
}

/// Two initial states, each entering its own loop on a distinct output.
fn two_loops() -> StateMachine {
    StateMachine::from_names(
        &["x0", "x1", "x2", "x3"],
        &["u0"],
        &["y1", "y2"],
        &["x1", "x2"],
        &[
            ["x0", "u0", "y1", "x0"],
            ["x1", "u0", "y2", "x3"],
            ["x2", "u0", "y1", "x0"],
            ["x3", "u0", "y2", "x3"],
        ],
    )
    .unwrap()
}

#[test]
fn refinement_separates_states_with_equal_future_windows() {
    let q = merged_futures();
    assert!(q.validate().accepted);
    let refined = partition_at(&q, 2).unwrap();
    let fibers = future_partition(&q, 2).unwrap();
    assert_eq!(refined.len(), 3);
    assert_eq!(fibers.len(), 2);
    assert_ne!(refined, fibers);
    assert!(refined.refines(&fibers, q.num_states()));
}

#[test]
fn stable_partition_without_inverse_quotient_simulation() {
    let q = merged_futures();
    assert!(is_fixed_point(&q, &partition_at(&q, 2).unwrap()).unwrap().is_none());
    let c = canonical_relation(CanonicalKind::StateToQuotient, &q, Y, 2, 2).unwrap();
    assert!(verify_simulation(&c.left, &c.right, Y, &c.relation, false).unwrap().valid);
    let inverse = c.relation.inverse();
    assert!(!verify_simulation(&c.right, &c.left, Y, &inverse, false).unwrap().valid);
}

#[test]
fn padded_dominoes_share_a_prefix_despite_unique_futures() {
    let q = two_loops();
    assert!(q.validate().accepted);
    let (l, m) = (2, 1);
    assert!(future_unique(&q, Y, IntervalSpec::new(l, m + 1).unwrap()).unwrap().holds);
    assert!(sbalc(&q, Y, IntervalSpec::new(l, m).unwrap()).unwrap().holds);
    let h = Horizon::new(&q, Y).unwrap();
    let v = dominoes_determined_by_prefix(&h, l);
    assert!(!v.holds);
    let c = canonical_relation(CanonicalKind::MStep, &q, Y, l, m).unwrap();
    let inverse = c.relation.inverse();
    assert!(verify_simulation(&c.right, &c.left, Y, &inverse, false).unwrap().valid);
}
