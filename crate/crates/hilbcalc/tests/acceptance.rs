//! Acceptance battery: one test per advertised guarantee of the engine.
//!
//! Each test drives the corresponding verification suite from
//! [`hilbcalc::verify`] over the builtin surface models and prints a single
//! `PASS`/`FAIL` line (visible with `cargo test -- --nocapture`).  All
//! comparisons inside the suites are exact rational equalities — there are no
//! tolerances anywhere in this battery.

use std::sync::OnceLock;

use hilbcalc::verify::{run_suite, VerifyCtx};

static CTX: OnceLock<VerifyCtx> = OnceLock::new();

fn ctx() -> &'static VerifyCtx {
    // No cache store: every test recomputes from scratch, sharing only the
    // in-memory engines.  Keeps the battery hermetic.
    CTX.get_or_init(|| VerifyCtx::builtins(None))
}

/// Runs one suite, prints the one-line verdict, and fails the test with the
/// collected counterexamples if any check was violated.
fn check(label: &str, suite: &str) {
    let report = run_suite(ctx(), suite).expect("suite is registered");
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    println!("{verdict}: {label} [{} checks]", report.checks);
    if !report.passed() {
        for failure in &report.failures {
            eprintln!("  {}: {}", failure.check, failure.detail);
        }
        panic!(
            "{label}: {} of {} checks failed",
            report.failures.len(),
            report.checks
        );
    }
}

#[test]
fn heisenberg_commutation_relations_hold_on_all_builtin_models() {
    check(
        "Heisenberg commutators match the intersection pairing on every builtin model",
        "heisenberg",
    );
}

#[test]
fn virasoro_operators_satisfy_their_commutation_and_derivative_identities() {
    check(
        "Virasoro operators: commutators with creation/annihilation letters and the \
         boundary-derivative identity",
        "virasoro",
    );
}

#[test]
fn chern_operator_commutators_collapse_and_vanish_as_predicted() {
    check(
        "Iterated commutators of Chern operators with Heisenberg letters",
        "chern-commutators",
    );
}

#[test]
fn diagonal_pushforward_identities_hold_on_each_builtin_model() {
    check(
        "Diagonal pushforward: absorption, contraction, and Euler-class identities",
        "pushforward",
    );
}

#[test]
fn leading_terms_of_chern_products_carry_the_universal_coefficients() {
    check(
        "Leading coefficients of Chern-operator products and of the reverse expansion",
        "leading-terms",
    );
}

#[test]
fn basis_conversions_round_trip_exactly() {
    check(
        "Heisenberg-basis and Chern-basis conversions invert each other",
        "round-trips",
    );
}

#[test]
fn cup_product_satisfies_graded_ring_axioms() {
    check(
        "Cup product: graded commutativity, associativity, unit, and n = 1 reduction",
        "ring-axioms",
    );
}

#[test]
fn structure_constants_are_stable_in_n() {
    check(
        "Structure constants are independent of n and carry the expected top coefficient",
        "stability",
    );
}

#[test]
fn chern_products_match_their_universal_shape() {
    check(
        "Products of Chern classes expand with n-independent universal coefficients",
        "shape",
    );
}

#[test]
fn generator_transition_matrix_is_unitriangular_and_invertible() {
    check(
        "Transition between the monomial basis and the Chern-generator basis",
        "transition",
    );
}

#[test]
fn structure_constants_transport_along_model_isomorphisms() {
    check(
        "Multiplicative isomorphisms of surface models transport structure constants",
        "transport",
    );
}

#[test]
fn graded_dimensions_match_the_generating_function() {
    check(
        "Graded dimensions of the Fock space match the product generating function",
        "dimensions",
    );
}

#[test]
fn worked_example_constants_are_reproduced_exactly() {
    check(
        "Pinned worked examples: a square of a divisor class and a boundary image",
        "worked-constants",
    );
}
