"""Instance documents: serialization round-trips and field-path errors."""

import json

import numpy as np
import pytest

import kgframes as kg
from kgframes.generators import draw_spec, generate
from helpers import pinned_example


def _document_text(seed=17):
    inst = generate(draw_spec("generic", seed, basis_compatible=True))
    doc = kg.build_document(
        inst.shape, inst.frame.domain_rank, inst.frame, {"reference": inst.k_op}
    )
    return inst, kg.document_to_json(doc)


def test_round_trip_is_bitwise():
    inst, text = _document_text()
    parsed = kg.document_from_json(text)
    assert parsed.shape.sizes == inst.shape.sizes
    assert parsed.module_rank == inst.frame.domain_rank
    assert parsed.frame.codomain_ranks == inst.frame.codomain_ranks
    for mine, theirs in zip(inst.frame.members, parsed.frame.members):
        for a, b in zip(mine.blocks, theirs.blocks):
            assert np.array_equal(a, b)
    for a, b in zip(inst.k_op.blocks, parsed.operators["reference"].blocks):
        assert np.array_equal(a, b)


def test_serialization_is_deterministic():
    _, first = _document_text()
    _, second = _document_text()
    assert first == second
    assert first.endswith("\n")


def test_document_version_is_checked():
    _, text = _document_text()
    payload = json.loads(text)
    payload["version"] = "2"
    with pytest.raises(kg.DocumentError, match=r"^\$\.version"):
        kg.parse_document(payload)


def test_pinned_example_documents_cleanly():
    shape, frame, k_op = pinned_example()
    doc = kg.build_document(shape, 2, frame, {"reference": k_op})
    parsed = kg.document_from_json(kg.document_to_json(doc))
    report = kg.is_kg_frame(parsed.frame, parsed.operators["reference"])
    assert report.lower_c == pytest.approx(1.5, abs=1e-9)


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda p: p["algebra"].update(blocks=[]), r"\$\.algebra\.blocks"),
        (lambda p: p["algebra"].update(blocks=[2, -1]), r"\$\.algebra\.blocks\[1\]"),
        (lambda p: p.update(module_rank=0), r"\$\.module_rank"),
        (lambda p: p.update(module_rank="three"), r"\$\.module_rank"),
        (lambda p: p.update(frame=[]), r"\$\.frame"),
        (lambda p: p.pop("algebra"), r"\$\.algebra"),
        (
            lambda p: p["frame"][0].update(codomain_rank=0),
            r"\$\.frame\[0\]\.codomain_rank",
        ),
        (
            lambda p: p["operators"]["reference"].update(domain_rank=-2),
            r"\$\.operators\.reference\.domain_rank",
        ),
    ],
)
def test_field_errors_carry_their_path(mutate, path):
    _, text = _document_text()
    payload = json.loads(text)
    mutate(payload)
    with pytest.raises(kg.DocumentError, match=rf"^{path}"):
        kg.parse_document(payload)


def test_coefficient_errors_point_into_the_nested_payload():
    _, text = _document_text()
    payload = json.loads(text)
    payload["frame"][0]["coeffs"][0][0][0] = "not-a-matrix-row-list"
    with pytest.raises(kg.DocumentError, match=r"^\$\.frame\[0\]\.coeffs\[0\]\[0\]\[0\]"):
        kg.parse_document(payload)


def test_non_finite_and_boolean_numbers_are_rejected():
    _, text = _document_text()
    payload = json.loads(text)
    pair = payload["frame"][0]["coeffs"][0][0][0][0][0]
    pair[0] = float("inf")
    with pytest.raises(kg.DocumentError, match=r"coeffs"):
        kg.parse_document(payload)

    payload = json.loads(text)
    pair = payload["frame"][0]["coeffs"][0][0][0][0][0]
    pair[0] = True
    with pytest.raises(kg.DocumentError, match=r"coeffs"):
        kg.parse_document(payload)


def test_scalar_entries_must_be_pairs():
    _, text = _document_text()
    payload = json.loads(text)
    payload["frame"][0]["coeffs"][0][0][0][0][0] = [1.0, 2.0, 3.0]
    with pytest.raises(kg.DocumentError, match=r"coeffs"):
        kg.parse_document(payload)


def test_invalid_json_is_a_document_error():
    with pytest.raises(kg.DocumentError, match=r"^\$: not valid JSON"):
        kg.document_from_json("{nope")
    with pytest.raises(kg.DocumentError):
        kg.parse_document(["not", "a", "mapping"])


def test_documents_may_hold_rectangular_operators():
    inst, _ = _document_text()
    rect = inst.frame.members[0]
    doc = kg.build_document(
        inst.shape, inst.frame.domain_rank, inst.frame, {"slice": rect}
    )
    parsed = kg.document_from_json(kg.document_to_json(doc))
    assert parsed.operators["slice"].codomain_rank == rect.codomain_rank
    assert parsed.operators["slice"].domain_rank == rect.domain_rank


def test_build_document_orders_operators_by_name():
    inst, _ = _document_text()
    doc = kg.build_document(
        inst.shape,
        inst.frame.domain_rank,
        inst.frame,
        {"zeta": inst.k_op, "alpha": inst.k_op},
    )
    assert list(doc["operators"].keys()) == ["alpha", "zeta"]
