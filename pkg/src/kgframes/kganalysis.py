"""Frame recognition relative to a reference operator K.

The lower inequality C * <K'x, K'x> <= sum_i <F_i x, F_i x> (K' the
adjoint of K) holds for some C > 0 exactly when the absolute square of K
is majorized by the frame operator S.  The optimal C is the reciprocal
of the largest quotient of the PSD pencil (KK', S) over the range of S;
directions outside that range admit no positive C and yield an explicit
counterexample vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import TOL_RANK
from .errors import ShapeMismatch
from .gframes import GFrame, embed_direction, g_operator, optimal_g_bounds
from .modules import ModuleVector, inner
from .operators import (
    TOL_EQ,
    DouglasCertificate,
    ModuleOperator,
    PencilResult,
    _hermitize,
    douglas,
    largest_lower_scale,
    psd_quotient_max,
)


def _absolute_square_blocks(op: ModuleOperator) -> list[np.ndarray]:
    """Realization of the composite (apply adjoint(op), then op)."""
    return [_hermitize(b.conj().T @ b) for b in op.blocks]


def _check_square_on_domain(frame: GFrame, k_op: ModuleOperator) -> None:
    if k_op.shape.sizes != frame.shape.sizes:
        raise ShapeMismatch("frame and operator live over different algebras")
    if not (k_op.domain_rank == k_op.codomain_rank == frame.domain_rank):
        raise ShapeMismatch(
            "reference operator must be square on the frame domain: "
            f"got {k_op.domain_rank}->{k_op.codomain_rank} over domain rank "
            f"{frame.domain_rank}"
        )


@dataclass(frozen=True, eq=False)
class CounterexampleCertificate:
    """Witness vector on which the lower frame inequality fails.

    lhs_seminorm / rhs_seminorm are the block-`block` seminorms of the
    two sides of the inequality at scale one; admissible_ceiling =
    rhs/lhs bounds every scale the witness tolerates, so a ceiling at or
    below the rank tolerance proves no positive scale works.
    """

    vector: ModuleVector
    block: int
    lhs_seminorm: float
    rhs_seminorm: float
    margin: float
    admissible_ceiling: float


def _certificate_from_direction(
    frame: GFrame, k_op: ModuleOperator, block: int, direction: np.ndarray
) -> CounterexampleCertificate:
    x = embed_direction(frame.shape, frame.domain_rank, block, direction)
    k_image = k_op.adjoint().apply(x)
    lhs = inner(k_image, k_image).seminorm(block)
    rhs = 0.0
    acc = None
    for mem in frame.members:
        image = mem.apply(x)
        val = inner(image, image)
        acc = val if acc is None else acc + val
    rhs = acc.seminorm(block)
    big = np.inf if lhs <= 0 else rhs / lhs
    return CounterexampleCertificate(
        vector=x,
        block=block,
        lhs_seminorm=lhs,
        rhs_seminorm=rhs,
        margin=lhs - rhs,
        admissible_ceiling=big,
    )


def reevaluate_counterexample(
    frame: GFrame, k_op: ModuleOperator, cert: CounterexampleCertificate
) -> dict:
    """Recompute a certificate's inequality values through coefficient
    arithmetic (no realization products) and report the deviations."""
    x = cert.vector
    k_image = k_op.adjoint().apply_componentwise(x)
    lhs = inner(k_image, k_image).seminorm(cert.block)
    acc = None
    for mem in frame.members:
        image = mem.apply_componentwise(x)
        val = inner(image, image)
        acc = val if acc is None else acc + val
    rhs = acc.seminorm(cert.block)
    margin = lhs - rhs
    return {
        "lhs_seminorm": lhs,
        "rhs_seminorm": rhs,
        "margin": margin,
        "lhs_deviation": abs(lhs - cert.lhs_seminorm),
        "rhs_deviation": abs(rhs - cert.rhs_seminorm),
        "margin_deviation": abs(margin - cert.margin),
    }


@dataclass(frozen=True, eq=False)
class KGFrameReport:
    """Verdict and optimal constants of the K-weighted frame inequality."""

    is_k_g_frame: bool
    lower_c: float
    upper_d: float
    route: str
    degenerate_zero_k: bool
    pencil: PencilResult
    counterexample: CounterexampleCertificate | None


def optimal_kg_lower_bound(
    frame: GFrame, k_op: ModuleOperator, rel_tol: float = TOL_RANK
) -> float:
    """Largest C with C times the absolute square of K below the frame
    operator; 0 when no positive C exists, +inf when K vanishes."""
    _check_square_on_domain(frame, k_op)
    s_blocks = frame.frame_operator().blocks
    m_blocks = _absolute_square_blocks(k_op)
    scale, _ = largest_lower_scale(s_blocks, m_blocks, rel_tol=rel_tol)
    return scale


def is_kg_frame(
    frame: GFrame,
    k_op: ModuleOperator,
    rel_tol: float = TOL_RANK,
) -> KGFrameReport:
    """Decide the frame property relative to K with certificates.

    The verdict is true exactly when some C above the rank tolerance
    satisfies the majorization; a false verdict carries a witness vector
    whose inequality values demonstrate the failure.
    """
    _check_square_on_domain(frame, k_op)
    s_op = frame.frame_operator()
    m_blocks = _absolute_square_blocks(k_op)
    scale, pencil = largest_lower_scale(s_op.blocks, m_blocks, rel_tol=rel_tol)
    upper = optimal_g_bounds(frame).upper
    degenerate = k_op.uniform_norm() == 0.0
    verdict = bool(scale > rel_tol) or degenerate
    counterexample = None
    if not verdict:
        if not pencil.included:
            proj = s_op.range_projection(rel_tol=rel_tol)
            best_val = -1.0
            best_block = 0
            best_vec = None
            for k, (p_blk, m_blk) in enumerate(zip(proj.blocks, m_blocks)):
                comp = np.eye(p_blk.shape[0]) - p_blk
                leak = _hermitize(comp @ m_blk @ comp)
                lam, vecs = np.linalg.eigh(leak)
                if float(lam[-1]) > best_val:
                    best_val = float(lam[-1])
                    best_block = k
                    best_vec = vecs[:, -1]
            counterexample = _certificate_from_direction(
                frame, k_op, best_block, best_vec
            )
        elif pencil.direction is not None:
            counterexample = _certificate_from_direction(
                frame, k_op, pencil.block, pencil.direction
            )
    return KGFrameReport(
        is_k_g_frame=verdict,
        lower_c=scale,
        upper_d=upper,
        route="pencil",
        degenerate_zero_k=degenerate,
        pencil=pencil,
        counterexample=counterexample,
    )


def kg_via_range(
    frame: GFrame,
    k_op: ModuleOperator,
    basis: GFrame,
    tol_eq: float = TOL_EQ,
    rel_tol: float = TOL_RANK,
) -> bool:
    """Range route: K factors through the frame's generating operator.

    True exactly when the range of K sits inside the range of the square
    operator extracted against the basis; agrees with the pencil route.
    """
    _check_square_on_domain(frame, k_op)
    q_op = g_operator(frame, basis)
    cert = douglas(k_op, q_op, tol_eq=tol_eq, rel_tol=rel_tol)
    return cert.range_included


@dataclass(frozen=True)
class TightnessReport:
    """Whether one positive scale equates KK' with the frame operator.

    `ranges_match` reports the separate two-sided range-inclusion test
    between K and the synthesis operator; equal ranges do not by
    themselves imply tightness.
    """

    tight: bool
    scale: float
    residual: float
    ranges_match: bool


def tightness_check(
    frame: GFrame,
    k_op: ModuleOperator,
    tol_eq: float = TOL_EQ,
    rel_tol: float = TOL_RANK,
) -> TightnessReport:
    """Best single scale A with A*KK' = S, plus the range comparison."""
    _check_square_on_domain(frame, k_op)
    s_op = frame.frame_operator()
    m_blocks = _absolute_square_blocks(k_op)
    num = 0.0
    den = 0.0
    for m_blk, s_blk in zip(m_blocks, s_op.blocks):
        num += float(np.real(np.sum(m_blk.conj() * s_blk)))
        den += float(np.sum(np.abs(m_blk) ** 2))
    s_norm = s_op.uniform_norm()
    if den == 0.0:
        scale = 1.0
        residual = s_norm
    else:
        scale = max(num / den, 0.0)
        residual = max(
            float(np.linalg.norm(scale * m_blk - s_blk, 2))
            for m_blk, s_blk in zip(m_blocks, s_op.blocks)
        )
    synthesis = frame.synthesis_operator()
    forward = douglas(k_op, synthesis, tol_eq=tol_eq, rel_tol=rel_tol)
    backward = douglas(synthesis, k_op, tol_eq=tol_eq, rel_tol=rel_tol)
    return TightnessReport(
        tight=bool(residual <= tol_eq * (1.0 + s_norm) and scale > 0.0),
        scale=scale,
        residual=residual,
        ranges_match=forward.range_included and backward.range_included,
    )


@dataclass(frozen=True, eq=False)
class FactorReport:
    """Factorization of K through the square root of the frame operator."""

    ok: bool
    factor: ModuleOperator
    residual: float
    sqrt_op: ModuleOperator
    kg_report: KGFrameReport
    diagnostics: DouglasCertificate | None


def sqrt_factor_check(
    frame: GFrame,
    k_op: ModuleOperator,
    tol_eq: float = TOL_EQ,
    rel_tol: float = TOL_RANK,
) -> FactorReport:
    """Express K as (apply factor, then sqrt(S)); refuse when K is not
    majorized by the frame operator."""
    kg = is_kg_frame(frame, k_op, rel_tol=rel_tol)
    sqrt_op = frame.frame_operator().hermitian_sqrt()
    factor = k_op.then(sqrt_op.pinv(rel_tol=rel_tol))
    residual = (factor.then(sqrt_op) - k_op).uniform_norm()
    ok = kg.is_k_g_frame and residual <= tol_eq * (1.0 + k_op.uniform_norm())
    diagnostics = None
    if not ok:
        diagnostics = douglas(k_op, sqrt_op, tol_eq=tol_eq, rel_tol=rel_tol)
    return FactorReport(
        ok=ok,
        factor=factor,
        residual=residual,
        sqrt_op=sqrt_op,
        kg_report=kg,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True, eq=False)
class QuotientReport:
    """Well-definedness and boundedness of the map T x -> F x."""

    well_defined: bool
    bounded: bool
    beta: float
    pencil: PencilResult


def quotient_bounded(
    f_op: ModuleOperator, t_op: ModuleOperator, rel_tol: float = TOL_RANK
) -> QuotientReport:
    """Decide whether sending T x to F x is a bounded operator.

    Well-defined exactly when every vector annihilated by T is
    annihilated by F (checked by a rank test on stacked realizations);
    bounded with the smallest beta satisfying the absolute-square
    majorization, read off the PSD pencil.
    """
    if f_op.shape.sizes != t_op.shape.sizes:
        raise ShapeMismatch("operators live over different algebras")
    if f_op.domain_rank != t_op.domain_rank:
        raise ShapeMismatch(
            f"domain ranks differ: {f_op.domain_rank} vs {t_op.domain_rank}"
        )
    well = True
    for f_blk, t_blk in zip(f_op.blocks, t_op.blocks):
        stacked = np.hstack([t_blk, f_blk])
        svals_t = np.linalg.svd(t_blk, compute_uv=False)
        svals_s = np.linalg.svd(stacked, compute_uv=False)
        top = max(float(svals_s[0]) if svals_s.size else 0.0, 1e-300)
        rank_t = int(np.sum(svals_t > rel_tol * top))
        rank_s = int(np.sum(svals_s > rel_tol * top))
        if rank_s != rank_t:
            well = False
    ff = [_hermitize(b @ b.conj().T) for b in f_op.blocks]
    tt = [_hermitize(b @ b.conj().T) for b in t_op.blocks]
    pencil = psd_quotient_max(ff, tt, rel_tol=rel_tol)
    bounded = pencil.included
    beta = float(np.sqrt(pencil.quotient)) if bounded else np.inf
    return QuotientReport(well_defined=well, bounded=bounded, beta=beta, pencil=pencil)


@dataclass(frozen=True, eq=False)
class ResolutionReport:
    """Audit of a family of square operators summing to the identity.

    The frame conclusion is evaluated empirically: either it holds, or
    the counterexample's inequality values re-evaluate identically
    through coefficient arithmetic.  `consistent` is false only for an
    unexplained outcome.
    """

    sums_to_identity: bool
    sum_residual: float
    bessel_upper: float | None
    kg_report: KGFrameReport | None
    conclusion_holds: bool | None
    reevaluation: dict | None
    consistent: bool


def resolution_check(
    psi: GFrame,
    k_op: ModuleOperator,
    sum_tol: float = 1e-10,
    reeval_tol: float = 1e-10,
    rel_tol: float = TOL_RANK,
) -> ResolutionReport:
    """Gate on the identity sum, then audit the frame conclusion."""
    for mem in psi.members:
        if mem.codomain_rank != mem.domain_rank:
            raise ShapeMismatch("resolution members must be square")
    _check_square_on_domain(psi, k_op)
    ident = ModuleOperator.identity(psi.shape, psi.domain_rank)
    total = psi.members[0]
    for mem in psi.members[1:]:
        total = total + mem
    sum_residual = (total - ident).uniform_norm()
    if sum_residual > sum_tol:
        return ResolutionReport(
            sums_to_identity=False,
            sum_residual=sum_residual,
            bessel_upper=None,
            kg_report=None,
            conclusion_holds=None,
            reevaluation=None,
            consistent=True,
        )
    bessel_upper = optimal_g_bounds(psi).upper
    kg = is_kg_frame(psi, k_op, rel_tol=rel_tol)
    if kg.is_k_g_frame:
        return ResolutionReport(
            sums_to_identity=True,
            sum_residual=sum_residual,
            bessel_upper=bessel_upper,
            kg_report=kg,
            conclusion_holds=True,
            reevaluation=None,
            consistent=True,
        )
    reeval = None
    consistent = False
    if kg.counterexample is not None:
        reeval = reevaluate_counterexample(psi, k_op, kg.counterexample)
        consistent = (
            reeval["lhs_deviation"] <= reeval_tol
            and reeval["rhs_deviation"] <= reeval_tol
            and reeval["margin"] > 0
        )
    return ResolutionReport(
        sums_to_identity=True,
        sum_residual=sum_residual,
        bessel_upper=bessel_upper,
        kg_report=kg,
        conclusion_holds=False,
        reevaluation=reeval,
        consistent=consistent,
    )
