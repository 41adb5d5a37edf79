"""Dual families: verification, canonical construction, perturbation,
combination, and transport along co-isometries and isometries."""

import numpy as np
import pytest

import kgframes as kg
from kgframes.generators import (
    clamped_square,
    draw_spec,
    generate,
    orthonormal_rows_operator,
)
from helpers import column_member, pinned_example, single_block_shape, square_op


# -- verification and canonical construction --------------------------------


def test_coordinate_frame_canonical_dual_is_reference_composition():
    # For the coordinate frame the frame operator is the identity, so the
    # canonical dual members are exactly reference-then-coordinate-slice.
    shape = single_block_shape()
    basis = kg.canonical_basis(shape, 2, (1, 1))
    frame = kg.GFrame([basis.member(0), basis.member(1)])
    k_op = square_op(shape, [[1.0, 0.5], [0.25, 2.0]])
    result = kg.canonical_k_dual(frame, k_op)
    hand = kg.GFrame([k_op.then(basis.member(0)), k_op.then(basis.member(1))])
    assert kg.frame_distance(result.frame, hand) <= 1e-14
    assert result.certificate.is_dual
    assert result.certificate.residual <= 1e-14
    assert result.certificate.construction == "canonical"
    assert not result.conditioning_warning


def test_pinned_example_canonical_dual():
    _, frame, k_op = pinned_example()
    result = kg.canonical_k_dual(frame, k_op)
    assert result.certificate.is_dual
    assert result.certificate.residual <= 1e-12
    # invertible frame operator: members match frame-inverse composition
    s_inv = frame.frame_operator().inverse()
    direct = kg.GFrame([k_op.then(s_inv).then(m) for m in frame.members])
    assert kg.frame_distance(result.frame, direct) <= 1e-12
    # independent verification agrees
    cert = kg.verify_k_dual(frame, result.frame, k_op)
    assert cert.is_dual and cert.residual <= 1e-12


def test_verify_k_dual_measures_the_defect():
    shape = single_block_shape()
    basis = kg.canonical_basis(shape, 2, (1, 1))
    frame = kg.GFrame([basis.member(0), basis.member(1)])
    k_op = square_op(shape, [[1, 0], [0, 1]])
    xi = kg.GFrame([basis.member(0), basis.member(1)])
    good = kg.verify_k_dual(frame, xi, k_op)
    assert good.is_dual and good.residual <= 1e-14
    bad = kg.verify_k_dual(frame, xi, k_op.scale(1.5))
    assert not bad.is_dual
    assert bad.residual == pytest.approx(0.5, rel=1e-12)


def test_canonical_dual_refuses_outside_range():
    shape = single_block_shape()
    frame = kg.GFrame([column_member(shape, 1, 0)])
    with pytest.raises(kg.DualityError):
        kg.canonical_k_dual(frame, kg.ModuleOperator.identity(shape, 2))


def test_dual_via_square_operators_matches_member_sum():
    inst = generate(draw_spec("generic", 60, basis_compatible=True, rich=True))
    rng = np.random.default_rng(61)
    q0 = clamped_square(rng, inst.shape, inst.frame.domain_rank)
    frame = kg.reconstruct_from_g_operator(q0, inst.basis)
    k_op = clamped_square(rng, inst.shape, inst.frame.domain_rank)
    xi = kg.canonical_k_dual(frame, k_op).frame
    assert kg.dual_via_g_operators(frame, xi, inst.basis, k_op)
    assert not kg.dual_via_g_operators(frame, xi, inst.basis, k_op.scale(1.01))


# -- zero-overlap perturbations ----------------------------------------------


def _overlap_fixture():
    shape = single_block_shape()
    basis = kg.canonical_basis(shape, 2, (1, 1))
    gamma = kg.GFrame([column_member(shape, 1, 0), column_member(shape, 1, 0)])
    k_op = square_op(shape, [[1, 0], [0, 0]])
    dual = kg.canonical_k_dual(gamma, k_op).frame
    return shape, basis, gamma, k_op, dual


def test_zero_overlap_perturbation_preserves_duality():
    shape, basis, gamma, k_op, dual = _overlap_fixture()
    pert = kg.GFrame([column_member(shape, 0, 1), column_member(shape, 0, -1)])
    report = kg.zero_overlap_perturbation(gamma, dual, pert, basis, k_op)
    assert report.predicate
    assert report.overlap_norm <= 1e-14
    assert report.is_dual
    assert report.agree


def test_nonzero_overlap_breaks_duality_by_the_same_amount():
    shape, basis, gamma, k_op, dual = _overlap_fixture()
    pert = kg.GFrame([column_member(shape, 0, 1), column_member(shape, 0, 1)])
    report = kg.zero_overlap_perturbation(gamma, dual, pert, basis, k_op)
    assert not report.predicate
    assert report.overlap_norm == pytest.approx(2.0, rel=1e-12)
    assert not report.is_dual
    # the overlap operator *is* the duality defect
    assert report.certificate.residual == pytest.approx(
        report.overlap_norm, rel=1e-12
    )
    assert report.agree


def test_perturbation_requires_a_dual_to_start_from():
    shape, basis, gamma, k_op, dual = _overlap_fixture()
    not_dual = kg.GFrame([m.scale(3.0) for m in dual.members])
    pert = kg.GFrame([column_member(shape, 0, 1), column_member(shape, 0, -1)])
    with pytest.raises(kg.DualityError):
        kg.zero_overlap_perturbation(gamma, not_dual, pert, basis, k_op)


# -- combinations of duals ----------------------------------------------------


def _combination_fixture(seed):
    inst = generate(draw_spec("generic", seed, basis_compatible=True, rich=True))
    rng = np.random.default_rng(seed + 1000)
    q0 = clamped_square(rng, inst.shape, inst.frame.domain_rank)
    frame = kg.reconstruct_from_g_operator(q0, inst.basis)
    k_op = clamped_square(rng, inst.shape, inst.frame.domain_rank)
    xi = kg.canonical_k_dual(frame, k_op).frame
    return rng, inst.shape, frame, k_op, xi


def test_midpoint_combination_is_dual():
    rng, shape, frame, k_op, xi = _combination_fixture(62)
    d = frame.domain_rank
    half = kg.ModuleOperator.identity(shape, d).scale(0.5)
    combined = kg.combine_duals(frame, xi, xi, k_op, half, half)
    assert combined.certificate.is_dual
    assert combined.certificate.residual <= 1e-10
    assert combined.certificate.construction == "combined"
    assert kg.frame_distance(combined.frame, xi) <= 1e-12


def test_random_identity_split_combination_is_dual():
    rng, shape, frame, k_op, xi = _combination_fixture(63)
    d = frame.domain_rank
    t1 = clamped_square(rng, shape, d).scale(0.5)
    t2 = kg.ModuleOperator.identity(shape, d) - t1
    combined = kg.combine_duals(frame, xi, xi, k_op, t1, t2)
    assert combined.certificate.is_dual
    assert combined.certificate.residual <= 1e-8


def test_weights_missing_identity_break_duality():
    rng, shape, frame, k_op, xi = _combination_fixture(64)
    d = frame.domain_rank
    t1 = clamped_square(rng, shape, d).scale(0.5)
    t2 = kg.ModuleOperator.identity(shape, d) - t1
    gap = clamped_square(rng, shape, d).scale(1e-3)
    combined = kg.combine_duals(frame, xi, xi, k_op, t1, t2 + gap)
    assert not combined.certificate.is_dual
    assert combined.certificate.residual >= 1e-4


def test_combination_rejects_non_dual_inputs():
    rng, shape, frame, k_op, xi = _combination_fixture(65)
    d = frame.domain_rank
    half = kg.ModuleOperator.identity(shape, d).scale(0.5)
    broken = kg.GFrame([xi.member(0).scale(1.5)] + list(xi.members[1:]))
    with pytest.raises(kg.DualityError):
        kg.combine_duals(frame, broken, xi, k_op, half, half)


# -- transport along a co-isometry ---------------------------------------------


def test_coisometry_transport_conjugates_the_reference():
    inst = generate(draw_spec("coisometry", 70, basis_compatible=True))
    w = inst.extras["w"]
    xi = kg.canonical_k_dual(inst.frame, inst.k_op).frame
    moved = kg.coisometry_transport(inst.frame, xi, inst.k_op, w)
    assert moved.certificate.is_dual
    assert moved.certificate.construction == "transported"
    # the new pair lives on the smaller module and the reference is conjugated
    conjugated = w.adjoint().then(inst.k_op).then(w)
    assert kg.operator_distance(moved.k_op, conjugated) <= 1e-13
    for old, new in zip(inst.frame.members, moved.gamma.members):
        assert kg.operator_distance(new, w.adjoint().then(old)) <= 1e-13
    for old, new in zip(xi.members, moved.xi.members):
        assert kg.operator_distance(new, w.adjoint().then(old)) <= 1e-13
    # transport can only help: the moved residual stays near the base one
    assert moved.certificate.residual <= moved.base_certificate.residual + 1e-12


def test_transport_rejects_non_coisometry():
    inst = generate(draw_spec("coisometry", 71, basis_compatible=True))
    w = inst.extras["w"]
    xi = kg.canonical_k_dual(inst.frame, inst.k_op).frame
    with pytest.raises(kg.IsometryError):
        kg.coisometry_transport(inst.frame, xi, inst.k_op, w.scale(1.2))


# -- transform by a commuting operator ------------------------------------------


def test_commuting_transform_diagonal_oracle():
    shape = single_block_shape()
    basis = kg.canonical_basis(shape, 2, (1, 1))
    frame = kg.GFrame([basis.member(0), basis.member(1)])  # frame operator = identity
    k_op = kg.ModuleOperator.identity(shape, 2)
    q_op = square_op(shape, [[2, 0], [0, 1]])
    report = kg.transform_by_q(frame, k_op, q_op)
    assert report.sandwich_ok
    assert report.sandwich_residual <= 1e-12
    assert report.measured_lower == pytest.approx(1.0, abs=1e-9)
    assert report.measured_upper == pytest.approx(4.0, abs=1e-9)
    assert report.within_envelope


def test_commuting_transform_generated_pairs():
    for seed in range(3):
        inst = generate(draw_spec("commuting_pair", seed, rich=True))
        report = kg.transform_by_q(inst.frame, inst.k_op, inst.extras["q"])
        assert report.sandwich_ok
        assert report.within_envelope
        assert report.envelope_lower <= report.measured_lower + 1e-8
        assert report.measured_upper <= report.envelope_upper + 1e-8


def test_transform_rejects_non_commuting_operator():
    shape = single_block_shape()
    basis = kg.canonical_basis(shape, 2, (1, 1))
    frame = kg.GFrame([basis.member(0), basis.member(1)])
    k_op = square_op(shape, [[1, 0], [0, 2]])
    swap = square_op(shape, [[0, 1], [1, 0]])
    with pytest.raises(kg.CommutationError):
        kg.transform_by_q(frame, k_op, swap)


# -- transform by isometries on the codomain side --------------------------------


def test_isometry_transform_preserves_bounds():
    inst = generate(draw_spec("isometry", 72))
    rng = np.random.default_rng(73)
    c = inst.frame.codomain_ranks[0]
    w = orthonormal_rows_operator(rng, inst.shape, c, c + 2)
    report = kg.isometry_left_transform(inst.frame, inst.k_op, w)
    assert report.max_bound_deviation <= 1e-8
    assert report.lower_after == pytest.approx(report.lower_before, abs=1e-8)
    assert report.upper_after == pytest.approx(report.upper_before, abs=1e-8)
    # members are post-composed with the isometry
    for old, new in zip(inst.frame.members, report.frame.members):
        assert kg.operator_distance(new, old.then(w)) <= 1e-13


def test_isometry_transform_per_member_list():
    inst = generate(draw_spec("isometry", 74))
    rng = np.random.default_rng(75)
    ws = [
        orthonormal_rows_operator(rng, inst.shape, c, c + 1)
        for c in inst.frame.codomain_ranks
    ]
    report = kg.isometry_left_transform(inst.frame, inst.k_op, ws)
    assert report.max_bound_deviation <= 1e-8


def test_isometry_transform_rejects_non_isometry():
    inst = generate(draw_spec("isometry", 76))
    rng = np.random.default_rng(77)
    c = inst.frame.codomain_ranks[0]
    w = orthonormal_rows_operator(rng, inst.shape, c, c + 2)
    with pytest.raises(kg.IsometryError):
        kg.isometry_left_transform(inst.frame, inst.k_op, w.scale(1.2))
