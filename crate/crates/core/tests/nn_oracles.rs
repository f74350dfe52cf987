//! Oracle tests for the network primitives: finite-difference gradient
//! checks and forward agreement with 64-bit nested-loop references.

mod common;

/// Relative-error budget for every gradient check.
const GRAD_TOL: f64 = 1e-4;

#[test]
fn conv_backward_matches_finite_differences() {
    let worst = common::check_conv_gradients(25, 101);
    assert!(worst < GRAD_TOL, "worst relative error {worst}");
}

#[test]
fn dense_backward_matches_finite_differences() {
    let worst = common::check_dense_gradients(50, 102);
    assert!(worst < GRAD_TOL, "worst relative error {worst}");
}

#[test]
fn relu_backward_matches_finite_differences() {
    let worst = common::check_relu_gradients(50, 103);
    assert!(worst < GRAD_TOL, "worst relative error {worst}");
}

#[test]
fn maxpool_backward_matches_finite_differences() {
    let worst = common::check_maxpool_gradients(50, 104);
    assert!(worst < GRAD_TOL, "worst relative error {worst}");
}

#[test]
fn tansig_backward_matches_finite_differences() {
    let worst = common::check_tansig_gradients(50, 105);
    assert!(worst < GRAD_TOL, "worst relative error {worst}");
}

#[test]
fn softmax_cross_entropy_gradient_matches_finite_differences() {
    let worst = common::check_softmax_ce_gradients(50, 106);
    assert!(worst < GRAD_TOL, "worst relative error {worst}");
}

#[test]
fn conv_forward_matches_the_oracle_within_f32_tolerance() {
    let gap = common::conv_forward_oracle_gap(30, 107);
    assert!(gap < 1e-5, "max abs diff {gap}");
}

#[test]
fn conv_forward_is_exact_on_integer_inputs() {
    assert!(common::conv_forward_exact_on_integers(20, 108));
}

#[test]
fn elementwise_forwards_match_their_references() {
    let gap = common::forward_reference_gap(30, 109);
    assert!(gap < 1e-5, "max abs diff {gap}");
}
