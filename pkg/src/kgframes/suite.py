"""Randomized verification suite with re-checkable failure records.

Every registered check states one verifiable property of the library's
constructions and decides it on freshly generated instances.  A check is
a pure function of (config, trial): the instance seeds are derived by
hashing, so any failure can be regenerated and re-measured bit for bit.

One check (``identity_resolution``) is an audit rather than an
assertion: its conclusion is expected but not forced, and a disproving
instance is recorded as a counterexample after its inequality values
re-evaluate identically through an independent arithmetic path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import TOL_PSD, TOL_RANK
from .duality import (
    canonical_k_dual,
    coisometry_transport,
    combine_duals,
    dual_via_g_operators,
    isometry_left_transform,
    transform_by_q,
    verify_k_dual,
    zero_overlap_perturbation,
)
from .errors import CommutationError, IsometryError, KGFrameError
from .generators import (
    GENERATOR_NAME,
    TIGHT_SCALES,
    Caps,
    Instance,
    clamped_square,
    draw_spec,
    generate,
    module_projector,
    orthonormal_rows_operator,
    random_vector,
    spec_to_dict,
    sub_seed,
)
from .gframes import (
    GFrame,
    frame_distance,
    g_operator,
    is_g_complete,
    optimal_g_bounds,
    reconstruct_from_g_operator,
)
from .kganalysis import (
    is_kg_frame,
    kg_via_range,
    quotient_bounded,
    resolution_check,
    sqrt_factor_check,
    tightness_check,
)
from .modules import max_vector_seminorm
from .operators import TOL_EQ, ModuleOperator, operator_distance
from .version import __version__

FORMAT_VERSION = "1"

REVALIDATION_TOL = 1e-10


@dataclass(frozen=True)
class SuiteConfig:
    """Immutable run parameters; two equal configs give equal documents."""

    trials: int = 50
    seed: int = 0
    check_ids: tuple[str, ...] | None = None
    caps: Caps = field(default_factory=Caps)
    tol_eq: float = TOL_EQ
    tol_psd: float = TOL_PSD
    rel_tol: float = TOL_RANK
    fault_injection: Callable[[str, int, Instance], Instance] | None = None


@dataclass(frozen=True)
class TrialOutcome:
    ok: bool
    measured: dict
    specs: tuple[dict, ...]
    message: str = ""
    audited: dict | None = None


@dataclass(frozen=True)
class FailureRecord:
    """Everything needed to regenerate and re-measure a failed trial."""

    check_id: str
    trial: int
    specs: tuple[dict, ...]
    measured: dict
    message: str


@dataclass(frozen=True)
class TheoremReport:
    check_id: str
    statement: str
    trials: int
    passes: int
    failures: tuple[FailureRecord, ...]
    audited_counterexamples: tuple[dict, ...]


@dataclass(frozen=True)
class SuiteResult:
    config: SuiteConfig
    reports: tuple[TheoremReport, ...]

    @property
    def all_passed(self) -> bool:
        return all(r.passes == r.trials for r in self.reports)

    @property
    def audited_total(self) -> int:
        return sum(len(r.audited_counterexamples) for r in self.reports)


# -- helpers --------------------------------------------------------------


def _f(x) -> float:
    return float(x)


def _rng_for(config: SuiteConfig, check_id: str, trial: int, tag: str):
    return np.random.Generator(
        np.random.PCG64(sub_seed(config.seed, f"{check_id}#{tag}", trial))
    )


def _make(
    config: SuiteConfig, check_id: str, trial: int, kind: str, **draw_kwargs
) -> Instance:
    spec = draw_spec(
        kind, sub_seed(config.seed, check_id, trial), config.caps, **draw_kwargs
    )
    inst = generate(spec, config.caps)
    if config.fault_injection is not None:
        injected = config.fault_injection(check_id, trial, inst)
        if injected is not None:
            inst = injected
    return inst


def _abs_square(op: ModuleOperator) -> ModuleOperator:
    return op.adjoint().then(op)


# -- checks ---------------------------------------------------------------


def _check_synthesis_bound(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "synthesis_bound", trial, "generic")
    frame = inst.frame
    ana = frame.analysis_operator()
    syn = frame.synthesis_operator()
    syn_norm = syn.uniform_norm()
    adjoint_res = operator_distance(syn, ana.adjoint())
    s_res = operator_distance(ana.then(syn), frame.frame_operator())
    upper = optimal_g_bounds(frame).upper
    bessel_dev = abs(syn_norm**2 - upper)
    rng = _rng_for(config, "synthesis_bound", trial, "probe")
    bound_margin = 0.0
    for _ in range(3):
        g_vec = random_vector(rng, inst.shape, frame.total_codomain_rank)
        out = max_vector_seminorm(syn.apply(g_vec))
        cap = syn_norm * max_vector_seminorm(g_vec)
        bound_margin = max(bound_margin, out - cap)
    ok = (
        adjoint_res <= 1e-12 * (1.0 + syn_norm)
        and s_res <= 1e-10 * (1.0 + upper)
        and bessel_dev <= config.tol_eq * (1.0 + upper)
        and bound_margin <= 1e-9 * (1.0 + syn_norm)
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "adjoint_residual": _f(adjoint_res),
            "frame_operator_residual": _f(s_res),
            "bessel_deviation": _f(bessel_dev),
            "sampled_bound_margin": _f(bound_margin),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "synthesis operator identities violated",
    )


def _psd_agreement(frame: GFrame, k_op: ModuleOperator, config: SuiteConfig) -> dict:
    rep = is_kg_frame(frame, k_op, rel_tol=config.rel_tol)
    abs_sq = _abs_square(k_op)
    s_op = frame.frame_operator()
    out = {
        "verdict": rep.is_k_g_frame,
        "lower_c": _f(rep.lower_c) if np.isfinite(rep.lower_c) else np.inf,
        "ok": True,
    }
    if rep.is_k_g_frame and np.isfinite(rep.lower_c) and rep.lower_c > 0:
        at_optimum = s_op - abs_sq.scale(rep.lower_c * (1.0 - 1e-9))
        verdict_at = at_optimum.positivity()
        out["min_eig_at_optimum"] = _f(verdict_at.min_eigenvalue)
        out["ok"] = bool(verdict_at.is_positive)
        if rep.lower_c > 1e-5:
            above = s_op - abs_sq.scale(rep.lower_c * 2.0)
            verdict_above = above.positivity()
            out["min_eig_above_optimum"] = _f(verdict_above.min_eigenvalue)
            out["ok"] = out["ok"] and not verdict_above.is_positive
    elif not rep.is_k_g_frame:
        probe = (
            1e-3
            * (1.0 + s_op.uniform_norm())
            / (1.0 + abs_sq.uniform_norm())
        )
        verdict_probe = (s_op - abs_sq.scale(probe)).positivity()
        out["min_eig_at_probe"] = _f(verdict_probe.min_eigenvalue)
        out["ok"] = not verdict_probe.is_positive
    return out


def _check_psd_frame_criterion(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst_a = _make(config, "psd_frame_criterion", trial, "generic", rich=True)
    inst_b = _make(
        config,
        "psd_frame_criterion",
        trial,
        "rank_deficient_K",
        k_inside=(trial % 2 == 0),
    )
    part_a = _psd_agreement(inst_a.frame, inst_a.k_op, config)
    part_b = _psd_agreement(inst_b.frame, inst_b.k_op, config)
    ok = part_a["ok"] and part_b["ok"]
    measured = {
        "generic_lower_c": part_a["lower_c"],
        "generic_verdict": part_a["verdict"],
        "deficient_lower_c": part_b["lower_c"],
        "deficient_verdict": part_b["verdict"],
    }
    for key in ("min_eig_at_optimum", "min_eig_above_optimum", "min_eig_at_probe"):
        if key in part_a:
            measured[f"generic_{key}"] = part_a[key]
        if key in part_b:
            measured[f"deficient_{key}"] = part_b[key]
    return TrialOutcome(
        ok=ok,
        measured=measured,
        specs=(spec_to_dict(inst_a.spec), spec_to_dict(inst_b.spec)),
        message="" if ok else "positivity verdicts disagree with the optimal scale",
    )


def _check_completeness_span(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "completeness_span", trial, "generic")
    frame = inst.frame
    complete = is_g_complete(frame, rel_tol=config.rel_tol)
    bounds = optimal_g_bounds(frame)
    framey = bounds.is_frame(config.rel_tol)
    proj = module_projector(inst.shape, frame.domain_rank, 0)
    killed = GFrame([proj.then(mem) for mem in frame.members])
    killed_complete = is_g_complete(killed, rel_tol=config.rel_tol)
    killed_bounds = optimal_g_bounds(killed)
    ok = (
        complete == framey
        and not killed_complete
        and not killed_bounds.is_frame(config.rel_tol)
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "complete": complete,
            "has_positive_lower_bound": framey,
            "lower_bound": _f(bounds.lower),
            "killed_lower_bound": _f(killed_bounds.lower),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "completeness and frame verdicts disagree",
    )


def _check_g_operator_roundtrip(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "g_operator_roundtrip", trial, "generic", basis_compatible=True)
    rng = _rng_for(config, "g_operator_roundtrip", trial, "square")
    q0 = clamped_square(rng, inst.shape, inst.spec.module_rank)
    frame = reconstruct_from_g_operator(q0, inst.basis)
    q_back = g_operator(frame, inst.basis)
    q_dist = operator_distance(q_back, q0)
    s_op = frame.frame_operator()
    product_res = operator_distance(q_back.adjoint().then(q_back), s_op)
    recon_dev = 0.0
    for _ in range(2):
        x_vec = random_vector(rng, inst.shape, inst.spec.module_rank)
        lhs = q_back.apply(x_vec)
        rhs = None
        for mem, e_mem in zip(frame.members, inst.basis.members):
            term = mem.adjoint().apply(e_mem.apply(x_vec))
            rhs = term if rhs is None else rhs + term
        recon_dev = max(
            recon_dev,
            max_vector_seminorm(lhs - rhs) / (1.0 + max_vector_seminorm(lhs)),
        )
    ok = (
        q_dist <= 1e-10
        and product_res <= 1e-10 * (1.0 + s_op.uniform_norm())
        and recon_dev <= 1e-12
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "extraction_distance": _f(q_dist),
            "product_residual": _f(product_res),
            "reconstruction_deviation": _f(recon_dev),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "square-operator extraction failed to round-trip",
    )


_RANGE_VARIANTS = (
    ("generic", {"basis_compatible": True}),
    ("rank_deficient_K", {"basis_compatible": True, "k_inside": True}),
    ("rank_deficient_K", {"basis_compatible": True, "k_inside": False}),
)


def _check_range_inclusion(config: SuiteConfig, trial: int) -> TrialOutcome:
    kind, kwargs = _RANGE_VARIANTS[trial % 3]
    inst = _make(config, "range_inclusion_criterion", trial, kind, **kwargs)
    rep = is_kg_frame(inst.frame, inst.k_op, rel_tol=config.rel_tol)
    via_range = kg_via_range(
        inst.frame, inst.k_op, inst.basis, tol_eq=config.tol_eq, rel_tol=config.rel_tol
    )
    ok = rep.is_k_g_frame == via_range
    return TrialOutcome(
        ok=ok,
        measured={
            "pencil_verdict": rep.is_k_g_frame,
            "range_verdict": via_range,
            "lower_c": _f(rep.lower_c) if np.isfinite(rep.lower_c) else np.inf,
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "pencil and range routes disagree",
    )


def _parseval_signature(
    base: GFrame, k_op: ModuleOperator, config: SuiteConfig
) -> tuple[bool, float, float]:
    """Tightness verdict and scale of {member after adjoint(K)} against K."""
    weighted = GFrame([k_op.adjoint().then(mem) for mem in base.members])
    rep = tightness_check(weighted, k_op, tol_eq=config.tol_eq, rel_tol=config.rel_tol)
    parseval = rep.tight and abs(rep.scale - 1.0) <= 1e-8
    return parseval, rep.scale, rep.residual


def _check_coisometric_parseval(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(
        config, "coisometric_parseval", trial, "coisometry", basis_compatible=True
    )
    q_uni = inst.extras["q_unitary"]
    k_op = inst.k_op
    ident = ModuleOperator.identity(inst.shape, inst.spec.module_rank)

    frame_pos = reconstruct_from_g_operator(q_uni, inst.basis)
    defect_pos = operator_distance(q_uni.adjoint().then(q_uni), ident)
    parseval_pos, scale_pos, residual_pos = _parseval_signature(frame_pos, k_op, config)

    q_scaled = q_uni.scale(1.3)
    frame_scaled = reconstruct_from_g_operator(q_scaled, inst.basis)
    defect_scaled = operator_distance(q_scaled.adjoint().then(q_scaled), ident)
    parseval_scaled, scale_scaled, _ = _parseval_signature(frame_scaled, k_op, config)

    rng = _rng_for(config, "coisometric_parseval", trial, "skew")
    q_generic = clamped_square(rng, inst.shape, inst.spec.module_rank)
    frame_generic = reconstruct_from_g_operator(q_generic, inst.basis)
    defect_generic = operator_distance(q_generic.adjoint().then(q_generic), ident)
    parseval_generic, _, _ = _parseval_signature(frame_generic, k_op, config)

    ok = (
        defect_pos <= 1e-10
        and parseval_pos
        and defect_scaled > 1e-6
        and not parseval_scaled
        and (parseval_generic == (defect_generic <= 1e-10))
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "unitary_defect": _f(defect_pos),
            "parseval_scale": _f(scale_pos),
            "parseval_residual": _f(residual_pos),
            "scaled_defect": _f(defect_scaled),
            "scaled_scale": _f(scale_scaled),
            "generic_defect": _f(defect_generic),
            "generic_parseval": parseval_generic,
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "co-isometry and unit-scale tightness disagree",
    )


def _check_dual_product(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "dual_product_criterion", trial, "generic", basis_compatible=True)
    rng = _rng_for(config, "dual_product_criterion", trial, "pair")
    d = inst.spec.module_rank
    q0 = clamped_square(rng, inst.shape, d)
    p0 = clamped_square(rng, inst.shape, d)
    gamma = reconstruct_from_g_operator(q0, inst.basis)
    xi = reconstruct_from_g_operator(p0, inst.basis)
    k_op = p0.adjoint().then(q0)
    cert = verify_k_dual(gamma, xi, k_op, tol_eq=config.tol_eq)
    via = dual_via_g_operators(gamma, xi, inst.basis, k_op, tol_eq=config.tol_eq)
    k_bad = k_op.scale(1.01)
    cert_bad = verify_k_dual(gamma, xi, k_bad, tol_eq=config.tol_eq)
    via_bad = dual_via_g_operators(gamma, xi, inst.basis, k_bad, tol_eq=config.tol_eq)
    ok = (
        cert.is_dual
        and via
        and not cert_bad.is_dual
        and not via_bad
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "residual": _f(cert.residual),
            "product_route": via,
            "off_target_residual": _f(cert_bad.residual),
            "off_target_product_route": via_bad,
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "duality and operator-product routes disagree",
    )


def _check_canonical_dual(config: SuiteConfig, trial: int) -> TrialOutcome:
    if trial % 2 == 0:
        inst = _make(
            config, "canonical_dual_residual", trial, "generic", basis_compatible=True
        )
        rng = _rng_for(config, "canonical_dual_residual", trial, "square")
        q0 = clamped_square(rng, inst.shape, inst.spec.module_rank)
        frame = reconstruct_from_g_operator(q0, inst.basis)
        k_op = inst.k_op
        result = canonical_k_dual(frame, k_op, tol_eq=config.tol_eq, rel_tol=config.rel_tol)
        s_inv = frame.frame_operator().inverse(rel_tol=config.rel_tol)
        prefix = k_op.then(s_inv)
        direct = GFrame([prefix.then(mem) for mem in frame.members])
        direct_dist = frame_distance(result.frame, direct)
        ok = (
            result.certificate.is_dual
            and result.certificate.residual
            <= config.tol_eq * (1.0 + k_op.uniform_norm())
            and direct_dist <= 1e-9
        )
        measured = {
            "residual": _f(result.certificate.residual),
            "plain_inverse_distance": _f(direct_dist),
            "retained_ratio": _f(result.smallest_retained_ratio),
        }
        specs = (spec_to_dict(inst.spec),)
    else:
        inst = _make(
            config,
            "canonical_dual_residual",
            trial,
            "rank_deficient_K",
            k_inside=True,
            rich=True,
        )
        result = canonical_k_dual(
            inst.frame, inst.k_op, tol_eq=config.tol_eq, rel_tol=config.rel_tol
        )
        ok = (
            result.certificate.is_dual
            and result.certificate.residual
            <= config.tol_eq * (1.0 + inst.k_op.uniform_norm())
        )
        measured = {
            "residual": _f(result.certificate.residual),
            "retained_ratio": _f(result.smallest_retained_ratio),
            "conditioning_warning": result.conditioning_warning,
        }
        specs = (spec_to_dict(inst.spec),)
    return TrialOutcome(
        ok=ok,
        measured=measured,
        specs=specs,
        message="" if ok else "canonical dual construction failed verification",
    )


def _orthogonal_complement_square(
    q_op: ModuleOperator, rng, rel_tol: float
) -> ModuleOperator:
    """Square operator whose realization columns live in the orthogonal
    complement of the realization columns of q_op (zero where full rank)."""
    blocks = []
    for blk in q_op.blocks:
        dim = blk.shape[0]
        u, svals, _ = np.linalg.svd(blk)
        top = float(svals[0]) if svals.size else 0.0
        rank = int(np.sum(svals > rel_tol * max(top, 1e-300)))
        null_basis = u[:, rank:]
        if null_basis.shape[1] == 0:
            blocks.append(np.zeros((dim, dim), dtype=complex))
            continue
        mix = (
            rng.standard_normal((null_basis.shape[1], dim))
            + 1j * rng.standard_normal((null_basis.shape[1], dim))
        ) / np.sqrt(dim)
        blocks.append(null_basis @ mix)
    return ModuleOperator(q_op.shape, q_op.domain_rank, q_op.codomain_rank, blocks)


def _check_zero_overlap(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(
        config,
        "zero_overlap",
        trial,
        "rank_deficient_K",
        basis_compatible=True,
        k_inside=True,
    )
    frame, k_op, basis = inst.frame, inst.k_op, inst.basis
    v_dual = canonical_k_dual(
        frame, k_op, tol_eq=config.tol_eq, rel_tol=config.rel_tol
    ).frame
    q_op = g_operator(frame, basis)
    rng = _rng_for(config, "zero_overlap", trial, "complement")
    p_op = _orthogonal_complement_square(q_op, rng, config.rel_tol)
    xi = reconstruct_from_g_operator(p_op, basis)
    rep_pos = zero_overlap_perturbation(
        frame, v_dual, xi, basis, k_op, tol_eq=config.tol_eq
    )
    xi_bad = GFrame(
        [x_mem + f_mem for x_mem, f_mem in zip(xi.members, frame.members)]
    )
    rep_neg = zero_overlap_perturbation(
        frame, v_dual, xi_bad, basis, k_op, tol_eq=config.tol_eq
    )
    ok = (
        rep_pos.predicate
        and rep_pos.is_dual
        and rep_pos.agree
        and not rep_neg.predicate
        and not rep_neg.is_dual
        and rep_neg.agree
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "overlap": _f(rep_pos.overlap_norm),
            "residual": _f(rep_pos.certificate.residual),
            "bad_overlap": _f(rep_neg.overlap_norm),
            "bad_residual": _f(rep_neg.certificate.residual),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "overlap predicate disagrees with the duality verdict",
    )


def _check_dual_combination(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "dual_combination", trial, "generic", basis_compatible=True)
    rng = _rng_for(config, "dual_combination", trial, "weights")
    d = inst.spec.module_rank
    q0 = clamped_square(rng, inst.shape, d)
    frame = reconstruct_from_g_operator(q0, inst.basis)
    k_op = inst.k_op
    xi = canonical_k_dual(
        frame, k_op, tol_eq=config.tol_eq, rel_tol=config.rel_tol
    ).frame
    ident = ModuleOperator.identity(inst.shape, d)
    half = ident.scale(0.5)
    mid = combine_duals(frame, xi, xi, k_op, half, half, tol_eq=config.tol_eq)
    t1 = clamped_square(rng, inst.shape, d).scale(0.5)
    t2 = ident - t1
    rand = combine_duals(frame, xi, xi, k_op, t1, t2, tol_eq=config.tol_eq)
    gap_dir = clamped_square(rng, inst.shape, d)
    t2_bad = t2 + gap_dir.scale(1e-3)
    bad = combine_duals(frame, xi, xi, k_op, t1, t2_bad, tol_eq=config.tol_eq)
    ok = (
        mid.certificate.is_dual
        and rand.certificate.is_dual
        and not bad.certificate.is_dual
        and bad.certificate.residual >= 1e-4
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "midpoint_residual": _f(mid.certificate.residual),
            "random_residual": _f(rand.certificate.residual),
            "gap_residual": _f(bad.certificate.residual),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "weight-mixing of duals behaved unexpectedly",
    )


def _check_order_chain(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "operator_order_chain", trial, "generic", rich=True)
    frame, k_op = inst.frame, inst.k_op
    rep = is_kg_frame(frame, k_op, rel_tol=config.rel_tol)
    bounds = optimal_g_bounds(frame)
    s_op = frame.frame_operator()
    abs_sq = _abs_square(k_op)
    ident = ModuleOperator.identity(inst.shape, frame.domain_rank)
    ok = True
    measured = {
        "lower_c": _f(rep.lower_c) if np.isfinite(rep.lower_c) else np.inf,
        "upper_d": _f(bounds.upper),
    }
    if rep.is_k_g_frame and np.isfinite(rep.lower_c) and rep.lower_c > 0:
        lower_diff = (s_op - abs_sq.scale(rep.lower_c * (1.0 - 1e-9))).positivity()
        measured["lower_min_eig"] = _f(lower_diff.min_eigenvalue)
        ok = ok and lower_diff.is_positive
        if rep.lower_c > 1e-5:
            over = (s_op - abs_sq.scale(rep.lower_c * 2.0)).positivity()
            measured["lower_overshoot_min_eig"] = _f(over.min_eigenvalue)
            ok = ok and not over.is_positive
    upper_diff = (ident.scale(bounds.upper) - s_op).positivity()
    measured["upper_min_eig"] = _f(upper_diff.min_eigenvalue)
    ok = ok and upper_diff.is_positive
    if bounds.upper > 1e-6:
        under = (ident.scale(bounds.upper * 0.99) - s_op).positivity()
        measured["upper_undershoot_min_eig"] = _f(under.min_eigenvalue)
        ok = ok and not under.is_positive
    return TrialOutcome(
        ok=ok,
        measured=measured,
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "operator order chain violated at the optimal constants",
    )


_SQRT_VARIANTS = (
    ("generic", {"rich": True}),
    ("rank_deficient_K", {"k_inside": True, "rich": True}),
    ("rank_deficient_K", {"k_inside": False}),
)


def _check_sqrt_factor(config: SuiteConfig, trial: int) -> TrialOutcome:
    kind, kwargs = _SQRT_VARIANTS[trial % 3]
    inst = _make(config, "sqrt_factor", trial, kind, **kwargs)
    rep = sqrt_factor_check(
        inst.frame, inst.k_op, tol_eq=config.tol_eq, rel_tol=config.rel_tol
    )
    measured = {
        "residual": _f(rep.residual),
        "verdict": rep.kg_report.is_k_g_frame,
    }
    if rep.kg_report.is_k_g_frame:
        factor_norm_sq = rep.factor.uniform_norm() ** 2
        ceiling = np.inf
        if np.isfinite(rep.kg_report.lower_c) and rep.kg_report.lower_c > 0:
            ceiling = 1.0 / rep.kg_report.lower_c
        measured["factor_norm_squared"] = _f(factor_norm_sq)
        measured["norm_ceiling"] = _f(ceiling) if np.isfinite(ceiling) else np.inf
        ok = (
            rep.ok
            and rep.residual <= config.tol_eq * (1.0 + inst.k_op.uniform_norm())
            and factor_norm_sq <= ceiling * (1.0 + 1e-6) + 1e-8
        )
    else:
        diag = rep.diagnostics
        measured["diag_included"] = diag.range_included if diag else True
        ok = (
            not rep.ok
            and diag is not None
            and not diag.range_included
            and diag.conditions_agree()
        )
    return TrialOutcome(
        ok=ok,
        measured=measured,
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "square-root factorization verdict incoherent",
    )


def _check_commuting_transform(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "commuting_transform", trial, "commuting_pair", rich=True)
    q_op = inst.extras["q"]
    rep = transform_by_q(
        inst.frame,
        inst.k_op,
        q_op,
        tol_eq=config.tol_eq,
        rel_tol=config.rel_tol,
    )
    rng = _rng_for(config, "commuting_transform", trial, "noncommuting")
    stray = clamped_square(rng, inst.shape, inst.spec.module_rank)
    commutator = (
        inst.k_op.then(stray) - stray.then(inst.k_op)
    ).uniform_norm()
    rejected = False
    if commutator > 1e-6:
        try:
            transform_by_q(inst.frame, inst.k_op, stray, tol_eq=config.tol_eq)
        except CommutationError:
            rejected = True
    else:  # freak commuting draw: nothing to reject
        rejected = True
    ok = rep.sandwich_ok and rep.within_envelope and rejected
    return TrialOutcome(
        ok=ok,
        measured={
            "sandwich_residual": _f(rep.sandwich_residual),
            "measured_lower": _f(rep.measured_lower)
            if np.isfinite(rep.measured_lower)
            else np.inf,
            "measured_upper": _f(rep.measured_upper),
            "envelope_lower": _f(rep.envelope_lower)
            if np.isfinite(rep.envelope_lower)
            else np.inf,
            "envelope_upper": _f(rep.envelope_upper),
            "stray_commutator": _f(commutator),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "commuting transform left the predicted envelope",
    )


def _check_isometry_transform(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "isometry_transform", trial, "isometry")
    w_op = inst.extras["w"]
    rep_shared = isometry_left_transform(
        inst.frame, inst.k_op, w_op, rel_tol=config.rel_tol
    )
    rng = _rng_for(config, "isometry_transform", trial, "per_member")
    c = inst.spec.codomain_ranks[0]
    per_member = [
        orthonormal_rows_operator(rng, inst.shape, c, c + 2)
        for _ in inst.frame.members
    ]
    rep_list = isometry_left_transform(
        inst.frame, inst.k_op, per_member, rel_tol=config.rel_tol
    )
    rejected = False
    try:
        isometry_left_transform(inst.frame, inst.k_op, w_op.scale(1.2))
    except IsometryError:
        rejected = True
    ok = (
        rep_shared.max_bound_deviation <= 1e-8
        and rep_list.max_bound_deviation <= 1e-8
        and rejected
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "shared_deviation": _f(rep_shared.max_bound_deviation),
            "per_member_deviation": _f(rep_list.max_bound_deviation),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "isometry post-composition moved the optimal bounds",
    )


def _check_tightness_scaling(config: SuiteConfig, trial: int) -> TrialOutcome:
    scale_choice = TIGHT_SCALES[trial % len(TIGHT_SCALES)]
    inst = _make(
        config, "tightness_scaling", trial, "tight", tight_scale=scale_choice
    )
    rep = tightness_check(
        inst.frame, inst.k_op, tol_eq=config.tol_eq, rel_tol=config.rel_tol
    )
    neg = _make(config, "tightness_scaling", trial, "generic", rich=True)
    rep_neg = tightness_check(
        neg.frame, neg.k_op, tol_eq=config.tol_eq, rel_tol=config.rel_tol
    )
    ok = (
        rep.tight
        and abs(rep.scale - scale_choice) <= 1e-8
        and rep.ranges_match
        and not rep_neg.tight
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "target_scale": _f(scale_choice),
            "recovered_scale": _f(rep.scale),
            "residual": _f(rep.residual),
            "ranges_match": rep.ranges_match,
            "generic_residual": _f(rep_neg.residual),
        },
        specs=(spec_to_dict(inst.spec), spec_to_dict(neg.spec)),
        message="" if ok else "tightness scale recovery failed",
    )


def _check_identity_resolution(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "identity_resolution", trial, "resolution")
    rep = resolution_check(inst.frame, inst.k_op, rel_tol=config.rel_tol)
    ok = rep.sums_to_identity and rep.consistent
    audited = None
    if rep.sums_to_identity and rep.conclusion_holds is False and rep.consistent:
        audited = {
            "trial": trial,
            "spec": spec_to_dict(inst.spec),
            "lower_c": _f(rep.kg_report.lower_c)
            if rep.kg_report and np.isfinite(rep.kg_report.lower_c)
            else np.inf,
            "reevaluation": {
                key: _f(val) for key, val in (rep.reevaluation or {}).items()
            },
        }
    lower = np.inf
    if rep.kg_report is not None and np.isfinite(rep.kg_report.lower_c):
        lower = _f(rep.kg_report.lower_c)
    return TrialOutcome(
        ok=ok,
        measured={
            "sum_residual": _f(rep.sum_residual),
            "conclusion_holds": bool(rep.conclusion_holds),
            "lower_c": lower,
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "resolution audit found an unexplained outcome",
        audited=audited,
    )


def _check_quotient_criterion(config: SuiteConfig, trial: int) -> TrialOutcome:
    kind, kwargs = _SQRT_VARIANTS[trial % 3]
    inst = _make(config, "quotient_criterion", trial, kind, **kwargs)
    sqrt_op = inst.frame.frame_operator().hermitian_sqrt()
    qrep = quotient_bounded(inst.k_op.adjoint(), sqrt_op, rel_tol=config.rel_tol)
    kg = is_kg_frame(inst.frame, inst.k_op, rel_tol=config.rel_tol)
    quotient_verdict = qrep.well_defined and qrep.bounded
    ok = quotient_verdict == kg.is_k_g_frame
    ratio_dev = 0.0
    if quotient_verdict and kg.is_k_g_frame and np.isfinite(kg.lower_c):
        recovered = 1.0 / qrep.beta**2 if qrep.beta > 0 else np.inf
        if np.isfinite(recovered):
            ratio_dev = abs(recovered - kg.lower_c) / max(kg.lower_c, 1e-300)
            ok = ok and ratio_dev <= 1e-6
    return TrialOutcome(
        ok=ok,
        measured={
            "quotient_verdict": quotient_verdict,
            "pencil_verdict": kg.is_k_g_frame,
            "beta": _f(qrep.beta) if np.isfinite(qrep.beta) else np.inf,
            "ratio_deviation": _f(ratio_dev),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "quotient-boundedness route disagrees with the pencil",
    )


def _check_quotient_transform(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "quotient_transform_criterion", trial, "generic", rich=True)
    rng = _rng_for(config, "quotient_transform_criterion", trial, "square")
    q_op = clamped_square(rng, inst.shape, inst.spec.module_rank)
    moved = GFrame([q_op.then(mem) for mem in inst.frame.members])
    kg_moved = is_kg_frame(moved, inst.k_op, rel_tol=config.rel_tol)
    top = q_op.then(inst.frame.frame_operator().hermitian_sqrt())
    qrep = quotient_bounded(inst.k_op.adjoint(), top, rel_tol=config.rel_tol)
    quotient_verdict = qrep.well_defined and qrep.bounded
    kg_base = is_kg_frame(inst.frame, inst.k_op, rel_tol=config.rel_tol)
    ok = (
        quotient_verdict == kg_moved.is_k_g_frame
        and kg_moved.is_k_g_frame == kg_base.is_k_g_frame
    )
    ratio_dev = 0.0
    if quotient_verdict and np.isfinite(kg_moved.lower_c) and kg_moved.lower_c > 0:
        recovered = 1.0 / qrep.beta**2 if qrep.beta > 0 else np.inf
        if np.isfinite(recovered):
            ratio_dev = abs(recovered - kg_moved.lower_c) / kg_moved.lower_c
            ok = ok and ratio_dev <= 1e-6
    return TrialOutcome(
        ok=ok,
        measured={
            "quotient_verdict": quotient_verdict,
            "moved_verdict": kg_moved.is_k_g_frame,
            "base_verdict": kg_base.is_k_g_frame,
            "ratio_deviation": _f(ratio_dev),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "transformed quotient route disagrees with the pencil",
    )


def _check_dual_transport(config: SuiteConfig, trial: int) -> TrialOutcome:
    inst = _make(config, "dual_transport", trial, "coisometry", basis_compatible=True)
    rng = _rng_for(config, "dual_transport", trial, "square")
    q0 = clamped_square(rng, inst.shape, inst.spec.module_rank)
    frame = reconstruct_from_g_operator(q0, inst.basis)
    k_op = inst.k_op
    xi = canonical_k_dual(
        frame, k_op, tol_eq=config.tol_eq, rel_tol=config.rel_tol
    ).frame
    w_op = inst.extras["w"]
    rep = coisometry_transport(frame, xi, k_op, w_op, tol_eq=config.tol_eq)
    rejected = False
    try:
        coisometry_transport(frame, xi, k_op, w_op.scale(1.2), tol_eq=config.tol_eq)
    except IsometryError:
        rejected = True
    ok = (
        rep.certificate.is_dual
        and rep.certificate.residual <= rep.base_certificate.residual + 1e-12
        and rejected
    )
    return TrialOutcome(
        ok=ok,
        measured={
            "base_residual": _f(rep.base_certificate.residual),
            "transported_residual": _f(rep.certificate.residual),
        },
        specs=(spec_to_dict(inst.spec),),
        message="" if ok else "transported pair lost the duality identity",
    )


@dataclass(frozen=True)
class CheckDef:
    statement: str
    fn: Callable[[SuiteConfig, int], TrialOutcome]


CHECKS: dict[str, CheckDef] = {
    "synthesis_bound": CheckDef(
        "the coefficient-summing operator is the adjoint of analysis, "
        "composes with analysis to the frame operator, and its norm squared "
        "is the optimal upper bound",
        _check_synthesis_bound,
    ),
    "psd_frame_criterion": CheckDef(
        "the frame verdict relative to K matches positivity of the frame "
        "operator minus the scaled absolute square of K at, and only up to, "
        "the optimal scale",
        _check_psd_frame_criterion,
    ),
    "completeness_span": CheckDef(
        "analysis has full rank exactly when the optimal lower bound is "
        "positive, and killing a module direction destroys both",
        _check_completeness_span,
    ),
    "g_operator_roundtrip": CheckDef(
        "extracting the square operator against an orthonormal family "
        "inverts the member construction, reconstructs vectors, and its "
        "absolute square is the frame operator",
        _check_g_operator_roundtrip,
    ),
    "range_inclusion_criterion": CheckDef(
        "the pencil verdict equals range inclusion of K inside the "
        "extracted square operator",
        _check_range_inclusion,
    ),
    "coisometric_parseval": CheckDef(
        "the K-weighted family is unit-scale tight exactly when the "
        "generating square operator composed with its adjoint is the "
        "identity",
        _check_coisometric_parseval,
    ),
    "dual_product_criterion": CheckDef(
        "two families are a K-dual pair exactly when K is the composite of "
        "one extracted square operator after the adjoint of the other",
        _check_dual_product,
    ),
    "canonical_dual_residual": CheckDef(
        "the pseudoinverse dual construction always verifies, and reduces "
        "to the plain-inverse formula when the frame operator is "
        "nonsingular",
        _check_canonical_dual,
    ),
    "zero_overlap": CheckDef(
        "adding a family preserves duality exactly when the two extracted "
        "square operators have vanishing adjoint-product",
        _check_zero_overlap,
    ),
    "dual_combination": CheckDef(
        "weights summing to the identity mix two duals into a dual; a "
        "weight-sum gap forces a proportional residual for invertible K",
        _check_dual_combination,
    ),
    "operator_order_chain": CheckDef(
        "the frame operator sits between the optimally scaled absolute "
        "square of K and the optimally scaled identity in positive order",
        _check_order_chain,
    ),
    "sqrt_factor": CheckDef(
        "K factors through the square root of the frame operator with "
        "norm governed by the optimal lower scale, and refusal is "
        "certified by range diagnostics",
        _check_sqrt_factor,
    ),
    "commuting_transform": CheckDef(
        "pre-composing with the adjoint of a commuting invertible operator "
        "conjugates the frame operator and keeps the measured bounds in "
        "the predicted envelope",
        _check_commuting_transform,
    ),
    "isometry_transform": CheckDef(
        "post-composing members with isometries leaves both optimal "
        "bounds unchanged",
        _check_isometry_transform,
    ),
    "tightness_scaling": CheckDef(
        "constructed tight families report tight with the planted scale, "
        "generic families do not",
        _check_tightness_scaling,
    ),
    "identity_resolution": CheckDef(
        "families of square members summing to the identity are audited: "
        "the frame conclusion holds or a counterexample re-evaluates "
        "identically through coefficient arithmetic",
        _check_identity_resolution,
    ),
    "quotient_criterion": CheckDef(
        "boundedness of the map sending root-frame-operator images to "
        "adjoint-K images decides the frame property with matching "
        "optimal constant",
        _check_quotient_criterion,
    ),
    "quotient_transform_criterion": CheckDef(
        "the quotient route applied through an invertible square operator "
        "decides the frame property of the transformed family",
        _check_quotient_transform,
    ),
    "dual_transport": CheckDef(
        "conjugating a dual pair by an operator with orthonormal "
        "realization columns preserves duality without growing the "
        "residual",
        _check_dual_transport,
    ),
}

AUDITED_CHECKS = frozenset({"identity_resolution"})


def list_check_ids() -> tuple[str, ...]:
    return tuple(CHECKS)


def run_check(config: SuiteConfig, check_id: str, trial: int) -> TrialOutcome:
    """Run one trial of one check; pure in (config, check_id, trial)."""
    if check_id not in CHECKS:
        raise ValueError(
            f"unknown check id {check_id!r}; known: {', '.join(CHECKS)}"
        )
    try:
        return CHECKS[check_id].fn(config, trial)
    except (KGFrameError, np.linalg.LinAlgError) as exc:
        return TrialOutcome(
            ok=False,
            measured={},
            specs=(),
            message=f"unexpected error: {type(exc).__name__}: {exc}",
        )


def run_theorem_suite(config: SuiteConfig) -> SuiteResult:
    """Run every selected check for the configured number of trials."""
    if config.trials < 1:
        raise ValueError("trials must be at least 1")
    selected = config.check_ids if config.check_ids is not None else list_check_ids()
    for check_id in selected:
        if check_id not in CHECKS:
            raise ValueError(
                f"unknown check id {check_id!r}; known: {', '.join(CHECKS)}"
            )
    reports = []
    for check_id in selected:
        passes = 0
        failures: list[FailureRecord] = []
        audited: list[dict] = []
        for trial in range(config.trials):
            outcome = run_check(config, check_id, trial)
            if outcome.ok:
                passes += 1
            else:
                failures.append(
                    FailureRecord(
                        check_id=check_id,
                        trial=trial,
                        specs=outcome.specs,
                        measured=outcome.measured,
                        message=outcome.message,
                    )
                )
            if outcome.audited is not None:
                audited.append(outcome.audited)
        reports.append(
            TheoremReport(
                check_id=check_id,
                statement=CHECKS[check_id].statement,
                trials=config.trials,
                passes=passes,
                failures=tuple(failures),
                audited_counterexamples=tuple(audited),
            )
        )
    return SuiteResult(config=config, reports=tuple(reports))


def revalidate(
    record: FailureRecord, config: SuiteConfig, tol: float = REVALIDATION_TOL
) -> dict:
    """Re-run a failed trial and compare every measured value.

    Returns reproduction deviations; `ok` means every recorded number was
    reproduced within tolerance and the trial still fails.
    """
    outcome = run_check(config, record.check_id, record.trial)
    deviations: dict[str, float] = {}
    reproduced = True
    for key, val in record.measured.items():
        if key not in outcome.measured:
            reproduced = False
            continue
        new = outcome.measured[key]
        if isinstance(val, bool) or isinstance(new, bool):
            deviations[key] = 0.0 if val == new else 1.0
            reproduced = reproduced and val == new
        else:
            old_f, new_f = float(val), float(new)
            if np.isinf(old_f) or np.isinf(new_f):
                same = old_f == new_f
                deviations[key] = 0.0 if same else np.inf
                reproduced = reproduced and same
            else:
                dev = abs(old_f - new_f)
                deviations[key] = dev
                reproduced = reproduced and dev <= tol * (1.0 + abs(old_f))
    return {
        "ok": reproduced and not outcome.ok,
        "still_fails": not outcome.ok,
        "reproduced": reproduced,
        "deviations": deviations,
        "measured": outcome.measured,
    }


# -- deterministic document ------------------------------------------------


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if np.isnan(f):
            return "NaN"
        if np.isinf(f):
            return "Infinity" if f > 0 else "-Infinity"
        return f
    return value


def result_to_document(result: SuiteResult) -> dict:
    config = result.config
    caps = config.caps
    doc = {
        "format_version": FORMAT_VERSION,
        "tool": {"name": "kgframes", "version": __version__},
        "generator": GENERATOR_NAME,
        "seed": config.seed,
        "trials_per_check": config.trials,
        "tolerances": {
            "tol_eq": config.tol_eq,
            "tol_psd": config.tol_psd,
            "tol_rank": config.rel_tol,
        },
        "caps": {
            "max_blocks": caps.max_blocks,
            "max_block_dim": caps.max_block_dim,
            "max_module_rank": caps.max_module_rank,
            "max_members": caps.max_members,
            "max_codomain_rank": caps.max_codomain_rank,
        },
        "checks": [
            {
                "id": rep.check_id,
                "statement": rep.statement,
                "audited": rep.check_id in AUDITED_CHECKS,
                "trials": rep.trials,
                "passes": rep.passes,
                "failures": [
                    {
                        "trial": f.trial,
                        "specs": list(f.specs),
                        "measured": f.measured,
                        "message": f.message,
                    }
                    for f in rep.failures
                ],
                "audited_counterexamples": list(rep.audited_counterexamples),
            }
            for rep in result.reports
        ],
        "all_passed": result.all_passed,
        "audited_counterexample_total": result.audited_total,
    }
    return _jsonable(doc)


def document_json(result: SuiteResult) -> str:
    return json.dumps(result_to_document(result), sort_keys=True, indent=2) + "\n"
