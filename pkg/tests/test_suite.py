"""Randomized verification suite: registry, determinism, failure records."""

import dataclasses
import json

import numpy as np
import pytest

import kgframes as kg

EXPECTED_CHECK_IDS = (
    "synthesis_bound",
    "psd_frame_criterion",
    "completeness_span",
    "g_operator_roundtrip",
    "range_inclusion_criterion",
    "coisometric_parseval",
    "dual_product_criterion",
    "canonical_dual_residual",
    "zero_overlap",
    "dual_combination",
    "operator_order_chain",
    "sqrt_factor",
    "commuting_transform",
    "isometry_transform",
    "tightness_scaling",
    "identity_resolution",
    "quotient_criterion",
    "quotient_transform_criterion",
    "dual_transport",
)


def test_registry_lists_every_check():
    assert kg.list_check_ids() == EXPECTED_CHECK_IDS


def test_run_check_is_deterministic():
    for check_id in ("canonical_dual_residual", "tightness_scaling", "zero_overlap"):
        cfg = kg.SuiteConfig(seed=9)
        first = kg.run_check(cfg, check_id, 3)
        second = kg.run_check(cfg, check_id, 3)
        assert first.ok and second.ok
        assert first.measured == second.measured
        assert first.specs == second.specs


def test_small_suite_passes_and_documents_itself():
    cfg = kg.SuiteConfig(trials=2, seed=5)
    result = kg.run_theorem_suite(cfg)
    assert result.all_passed
    assert result.audited_total == 0
    assert len(result.reports) == len(EXPECTED_CHECK_IDS)
    doc = kg.result_to_document(result)
    assert doc["format_version"] == "1"
    assert doc["tool"]["name"] == "kgframes"
    assert doc["seed"] == 5 and doc["trials_per_check"] == 2
    assert doc["generator"]
    assert doc["all_passed"] is True
    assert doc["audited_counterexample_total"] == 0
    assert set(doc["tolerances"]) == {"tol_eq", "tol_psd", "tol_rank"}
    by_id = {c["id"]: c for c in doc["checks"]}
    assert set(by_id) == set(EXPECTED_CHECK_IDS)
    for check in doc["checks"]:
        assert check["trials"] == 2
        assert check["passes"] == 2
        assert check["failures"] == []
    assert by_id["identity_resolution"]["audited"] is True
    assert by_id["identity_resolution"]["audited_counterexamples"] == []


def test_document_bytes_are_deterministic():
    cfg = kg.SuiteConfig(trials=2, seed=7)
    first = kg.document_json(kg.run_theorem_suite(cfg))
    second = kg.document_json(kg.run_theorem_suite(cfg))
    assert first == second
    assert first.endswith("\n")
    payload = json.loads(first)
    assert payload["seed"] == 7


def test_seed_changes_the_draws():
    a = kg.run_check(kg.SuiteConfig(seed=1), "canonical_dual_residual", 0)
    b = kg.run_check(kg.SuiteConfig(seed=2), "canonical_dual_residual", 0)
    assert a.specs != b.specs


def test_check_subset_selection():
    cfg = kg.SuiteConfig(trials=1, seed=0, check_ids=("sqrt_factor", "zero_overlap"))
    result = kg.run_theorem_suite(cfg)
    assert tuple(r.check_id for r in result.reports) == ("sqrt_factor", "zero_overlap")


def test_unknown_check_id_rejected():
    with pytest.raises(ValueError, match="unknown check id 'no_such_check'"):
        kg.run_theorem_suite(kg.SuiteConfig(check_ids=("no_such_check",)))


def test_nonpositive_trials_rejected():
    with pytest.raises(ValueError, match="at least 1"):
        kg.run_theorem_suite(kg.SuiteConfig(trials=0))


def _tightness_fault(check_id, trial, inst):
    if check_id == "tightness_scaling" and trial == 0:
        return dataclasses.replace(inst, k_op=inst.k_op.scale(3.0))
    return inst


def test_fault_injection_is_caught_and_recorded():
    cfg = kg.SuiteConfig(
        trials=2,
        seed=1,
        check_ids=("tightness_scaling",),
        fault_injection=_tightness_fault,
    )
    result = kg.run_theorem_suite(cfg)
    assert not result.all_passed
    report = result.reports[0]
    assert report.passes == 1
    assert len(report.failures) == 1
    record = report.failures[0]
    assert record.check_id == "tightness_scaling"
    assert record.trial == 0
    assert record.message
    assert record.specs and record.measured


def test_revalidation_reproduces_recorded_failures():
    cfg = kg.SuiteConfig(
        trials=2,
        seed=1,
        check_ids=("tightness_scaling",),
        fault_injection=_tightness_fault,
    )
    record = kg.run_theorem_suite(cfg).reports[0].failures[0]

    outcome = kg.revalidate(record, cfg)
    assert outcome["ok"] and outcome["still_fails"] and outcome["reproduced"]
    assert all(dev <= 1e-10 for dev in outcome["deviations"].values())

    # without the fault the failure disappears, and revalidation says so
    clean = kg.SuiteConfig(trials=2, seed=1, check_ids=("tightness_scaling",))
    vanished = kg.revalidate(record, clean)
    assert not vanished["still_fails"]
    assert not vanished["reproduced"]

    # tampered measurements are flagged as non-reproducible
    tampered = dict(record.measured)
    for key, value in tampered.items():
        if isinstance(value, float) and np.isfinite(value):
            tampered[key] = value + 1.0
            break
    bad_record = dataclasses.replace(record, measured=tampered)
    checked = kg.revalidate(bad_record, cfg)
    assert not checked["reproduced"]
    assert max(checked["deviations"].values()) >= 0.5


def test_failure_records_serialize_into_the_document():
    cfg = kg.SuiteConfig(
        trials=1,
        seed=1,
        check_ids=("tightness_scaling",),
        fault_injection=_tightness_fault,
    )
    doc = kg.result_to_document(kg.run_theorem_suite(cfg))
    assert doc["all_passed"] is False
    entry = doc["checks"][0]["failures"][0]
    assert entry["trial"] == 0
    assert entry["specs"][0]["kind"] == "tight"
    # the document must stay valid JSON even with non-finite measurements
    text = kg.document_json(kg.run_theorem_suite(cfg))
    json.loads(text)


def test_statements_describe_each_check():
    cfg = kg.SuiteConfig(trials=1, seed=3)
    doc = kg.result_to_document(kg.run_theorem_suite(cfg))
    for check in doc["checks"]:
        assert isinstance(check["statement"], str)
        assert len(check["statement"]) > 10
