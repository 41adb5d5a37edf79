"""Adjointable operators between free modules, as per-block realizations.

An operator from rank d to rank c is a d x c array of algebra
coefficients.  Per block k the coefficients tile one complex matrix of
shape (n_k d, n_k c), the realization.  Applying the operator multiplies
a vector's row stack by the realization on the right, so composition in
application order is the matrix product of realizations in the same
order, and the adjoint is the blockwise conjugate transpose.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    TOL_PSD,
    TOL_HERM,
    TOL_RANK,
    AlgebraElement,
    AlgebraShape,
    PositivityVerdict,
    _check_same_shape,
    _freeze,
    leq,
    psd_verdict,
)
from .errors import InvertibilityError, ShapeMismatch
from .modules import ModuleVector, inner

TOL_EQ = 1e-8

_TINY = 1e-300


def _hermitize(mat: np.ndarray) -> np.ndarray:
    return (mat + mat.conj().T) / 2.0


class ModuleOperator:
    """Adjointable module map held as one realization matrix per block."""

    __slots__ = ("shape", "domain_rank", "codomain_rank", "blocks")

    def __init__(
        self,
        shape: AlgebraShape,
        domain_rank: int,
        codomain_rank: int,
        blocks: Iterable[np.ndarray],
    ):
        domain_rank = int(domain_rank)
        codomain_rank = int(codomain_rank)
        if domain_rank < 1 or codomain_rank < 1:
            raise ShapeMismatch("operator ranks must be positive")
        blocks = tuple(_freeze(b) for b in blocks)
        if len(blocks) != shape.block_count:
            raise ShapeMismatch(
                f"expected {shape.block_count} realization blocks, got {len(blocks)}"
            )
        for n, blk in zip(shape, blocks):
            want = (n * domain_rank, n * codomain_rank)
            if blk.shape != want:
                raise ShapeMismatch(f"realization shaped {blk.shape}, expected {want}")
        self.shape = shape
        self.domain_rank = domain_rank
        self.codomain_rank = codomain_rank
        self.blocks = blocks

    # -- constructors -------------------------------------------------

    @classmethod
    def from_coeffs(
        cls, coeffs: Sequence[Sequence[AlgebraElement]]
    ) -> "ModuleOperator":
        """Build from a d x c nested list of algebra coefficients."""
        if not coeffs or not coeffs[0]:
            raise ShapeMismatch("coefficient array must be non-empty")
        d = len(coeffs)
        c = len(coeffs[0])
        shape = coeffs[0][0].shape
        for row in coeffs:
            if len(row) != c:
                raise ShapeMismatch("ragged coefficient array")
            for entry in row:
                _check_same_shape(shape, entry.shape)
        blocks = []
        for k, n in enumerate(shape):
            blk = np.zeros((n * d, n * c), dtype=complex)
            for i in range(d):
                for j in range(c):
                    blk[i * n : (i + 1) * n, j * n : (j + 1) * n] = coeffs[i][j].blocks[k]
            blocks.append(blk)
        return cls(shape, d, c, blocks)

    @classmethod
    def identity(cls, shape: AlgebraShape, rank: int) -> "ModuleOperator":
        return cls(shape, rank, rank, [np.eye(n * rank, dtype=complex) for n in shape])

    @classmethod
    def zero(cls, shape: AlgebraShape, domain_rank: int, codomain_rank: int) -> "ModuleOperator":
        return cls(
            shape,
            domain_rank,
            codomain_rank,
            [np.zeros((n * domain_rank, n * codomain_rank), dtype=complex) for n in shape],
        )

    # -- structure ----------------------------------------------------

    def coeff(self, i: int, j: int) -> AlgebraElement:
        if not (0 <= i < self.domain_rank and 0 <= j < self.codomain_rank):
            raise ShapeMismatch(f"coefficient index ({i}, {j}) out of range")
        blocks = []
        for n, blk in zip(self.shape, self.blocks):
            blocks.append(blk[i * n : (i + 1) * n, j * n : (j + 1) * n])
        return AlgebraElement(self.shape, blocks)

    def coeffs(self) -> list[list[AlgebraElement]]:
        return [
            [self.coeff(i, j) for j in range(self.codomain_rank)]
            for i in range(self.domain_rank)
        ]

    def adjoint(self) -> "ModuleOperator":
        """Conjugate transpose of every realization block, exactly."""
        return ModuleOperator(
            self.shape,
            self.codomain_rank,
            self.domain_rank,
            [b.conj().T for b in self.blocks],
        )

    # -- action and composition ---------------------------------------

    def apply(self, x: ModuleVector) -> ModuleVector:
        _check_same_shape(self.shape, x.shape)
        if x.rank != self.domain_rank:
            raise ShapeMismatch(
                f"vector rank {x.rank} does not match domain rank {self.domain_rank}"
            )
        return ModuleVector(
            self.shape,
            self.codomain_rank,
            [s @ b for s, b in zip(x.stacks, self.blocks)],
        )

    def apply_componentwise(self, x: ModuleVector) -> ModuleVector:
        """Apply through coefficient products only, bypassing realizations.

        Slow path kept as an independent evaluation route for audits.
        """
        comps = x.components()
        out = []
        for j in range(self.codomain_rank):
            acc = AlgebraElement.zero(self.shape)
            for i in range(self.domain_rank):
                acc = acc + comps[i] * self.coeff(i, j)
            out.append(acc)
        return ModuleVector.from_components(out)

    def then(self, other: "ModuleOperator") -> "ModuleOperator":
        """Composite that applies self first and other second."""
        _check_same_shape(self.shape, other.shape)
        if self.codomain_rank != other.domain_rank:
            raise ShapeMismatch(
                f"cannot chain codomain rank {self.codomain_rank} "
                f"into domain rank {other.domain_rank}"
            )
        return ModuleOperator(
            self.shape,
            self.domain_rank,
            other.codomain_rank,
            [a @ b for a, b in zip(self.blocks, other.blocks)],
        )

    def __add__(self, other: "ModuleOperator") -> "ModuleOperator":
        self._check_same_dims(other)
        return ModuleOperator(
            self.shape,
            self.domain_rank,
            self.codomain_rank,
            [a + b for a, b in zip(self.blocks, other.blocks)],
        )

    def __sub__(self, other: "ModuleOperator") -> "ModuleOperator":
        self._check_same_dims(other)
        return ModuleOperator(
            self.shape,
            self.domain_rank,
            self.codomain_rank,
            [a - b for a, b in zip(self.blocks, other.blocks)],
        )

    def scale(self, c: complex) -> "ModuleOperator":
        return ModuleOperator(
            self.shape,
            self.domain_rank,
            self.codomain_rank,
            [c * b for b in self.blocks],
        )

    def _check_same_dims(self, other: "ModuleOperator") -> None:
        _check_same_shape(self.shape, other.shape)
        if (self.domain_rank, self.codomain_rank) != (
            other.domain_rank,
            other.codomain_rank,
        ):
            raise ShapeMismatch("operator dimensions differ")

    # -- norms and spectral operations ----------------------------------

    def uniform_norm(self) -> float:
        """Largest spectral norm over the realization blocks."""
        return max(float(np.linalg.norm(b, 2)) for b in self.blocks)

    def pinv(self, rel_tol: float = TOL_RANK) -> "ModuleOperator":
        """Blockwise Moore-Penrose pseudoinverse.

        Singular values below rel_tol times the largest one are dropped.
        """
        return ModuleOperator(
            self.shape,
            self.codomain_rank,
            self.domain_rank,
            [np.linalg.pinv(b, rcond=rel_tol) for b in self.blocks],
        )

    def inverse(self, rel_tol: float = TOL_RANK) -> "ModuleOperator":
        """Blockwise inverse; raises when any block is numerically singular."""
        if self.domain_rank != self.codomain_rank:
            raise InvertibilityError("only square operators can be inverted")
        for k, blk in enumerate(self.blocks):
            svals = np.linalg.svd(blk, compute_uv=False)
            if svals[-1] <= rel_tol * max(svals[0], _TINY):
                raise InvertibilityError(f"block {k} is numerically singular")
        return ModuleOperator(
            self.shape,
            self.domain_rank,
            self.codomain_rank,
            [np.linalg.inv(b) for b in self.blocks],
        )

    def range_projection(self, rel_tol: float = TOL_RANK) -> "ModuleOperator":
        """Self-adjoint idempotent projecting onto the range of this operator.

        Per block this is the orthogonal projector onto the row space of
        the realization, acting on the codomain module.
        """
        blocks = []
        for blk in self.blocks:
            _, svals, vh = np.linalg.svd(blk, full_matrices=False)
            keep = svals > rel_tol * max(float(svals[0]) if svals.size else 0.0, _TINY)
            vr = vh[keep].conj().T
            blocks.append(_hermitize(vr @ vr.conj().T))
        return ModuleOperator(self.shape, self.codomain_rank, self.codomain_rank, blocks)

    def rank_profile(self, rel_tol: float = TOL_RANK) -> tuple[int, ...]:
        """Numerical rank of each realization block."""
        out = []
        for blk in self.blocks:
            svals = np.linalg.svd(blk, compute_uv=False)
            cutoff = rel_tol * max(float(svals[0]) if svals.size else 0.0, _TINY)
            out.append(int(np.sum(svals > cutoff)))
        return tuple(out)

    def smallest_singular_value(self) -> float:
        return min(float(np.linalg.svd(b, compute_uv=False)[-1]) for b in self.blocks)

    def hermitian_sqrt(self) -> "ModuleOperator":
        """Square root of a positive semidefinite square operator."""
        if self.domain_rank != self.codomain_rank:
            raise ShapeMismatch("square root needs a square operator")
        blocks = []
        for blk in self.blocks:
            lam, vecs = np.linalg.eigh(_hermitize(blk))
            lam = np.clip(lam, 0.0, None)
            blocks.append(_hermitize((vecs * np.sqrt(lam)) @ vecs.conj().T))
        return ModuleOperator(self.shape, self.domain_rank, self.codomain_rank, blocks)

    def positivity(
        self, tol_psd: float = TOL_PSD, tol_herm: float = TOL_HERM
    ) -> PositivityVerdict:
        """Positivity as an operator: every realization block PSD."""
        if self.domain_rank != self.codomain_rank:
            raise ShapeMismatch("positivity needs a square operator")
        return psd_verdict(self.blocks, tol_psd=tol_psd, tol_herm=tol_herm)

    def allclose(self, other: "ModuleOperator", tol: float = 1e-12) -> bool:
        self._check_same_dims(other)
        return all(
            np.allclose(a, b, rtol=0.0, atol=tol)
            for a, b in zip(self.blocks, other.blocks)
        )

    def __repr__(self) -> str:
        return (
            f"ModuleOperator(shape={self.shape.sizes}, "
            f"{self.domain_rank}->{self.codomain_rank})"
        )


def operator_distance(a: ModuleOperator, b: ModuleOperator) -> float:
    return (a - b).uniform_norm()


# -- positive pencils ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class PencilResult:
    """Extremal quotient of two PSD forms over the range of the second.

    `direction` is a unit vector in the range of N (on block `block`)
    attaining the extremal quotient, or None when N vanishes everywhere.
    """

    quotient: float
    included: bool
    gap_ratio: float
    block: int
    direction: np.ndarray | None


def psd_quotient_max(
    m_blocks: Sequence[np.ndarray],
    n_blocks: Sequence[np.ndarray],
    rel_tol: float = TOL_RANK,
    inclusion_tol: float = 1e-12,
) -> PencilResult:
    """Largest value of (x* M x) / (x* N x) over the range of N, per block.

    M and N are Hermitian PSD.  `included` reports whether the range of M
    sits inside the range of N on every block; when it does, the returned
    quotient is the smallest t with M <= t N (callers take reciprocals
    as needed).
    """
    worst_quot = -1.0
    worst_block = 0
    worst_direction: np.ndarray | None = None
    included = True
    gap_ratio = np.inf
    for k, (m_raw, n_raw) in enumerate(zip(m_blocks, n_blocks)):
        m = _hermitize(m_raw)
        n = _hermitize(n_raw)
        m_scale = float(np.linalg.norm(m, 2))
        lam, vecs = np.linalg.eigh(n)
        lam_top = max(float(lam[-1]), 0.0)
        keep = lam > rel_tol * max(lam_top, _TINY)
        if keep.any():
            dropped = lam[~keep]
            largest_dropped = float(np.abs(dropped).max()) if dropped.size else 0.0
            if largest_dropped > 0:
                gap_ratio = min(gap_ratio, float(lam[keep].min()) / largest_dropped)
        if not keep.any():
            # N vanishes on this block; only M = 0 is compatible
            if m_scale > inclusion_tol:
                included = False
            continue
        vr = vecs[:, keep]
        compressed = vr.conj().T @ m @ vr
        leak = m - vr @ compressed @ vr.conj().T
        if float(np.linalg.norm(leak, 2)) > inclusion_tol * (1.0 + m_scale):
            included = False
        inv_sqrt = 1.0 / np.sqrt(lam[keep])
        g = _hermitize((inv_sqrt[:, None] * compressed) * inv_sqrt[None, :])
        g_lam, g_vecs = np.linalg.eigh(g)
        quot = max(float(g_lam[-1]), 0.0)
        if quot > worst_quot:
            worst_quot = quot
            worst_block = k
            pulled = vr @ (inv_sqrt * g_vecs[:, -1])
            norm = float(np.linalg.norm(pulled))
            worst_direction = pulled / norm if norm > 0 else None
    return PencilResult(
        quotient=max(worst_quot, 0.0),
        included=included,
        gap_ratio=gap_ratio,
        block=worst_block,
        direction=worst_direction,
    )


def largest_lower_scale(
    n_blocks: Sequence[np.ndarray],
    m_blocks: Sequence[np.ndarray],
    rel_tol: float = TOL_RANK,
) -> tuple[float, PencilResult]:
    """Largest s >= 0 with s M <= N for PSD pencils, blockwise.

    Returns 0 when the range of M escapes the range of N (no positive s
    exists) and +inf when M vanishes (the constraint is vacuous).
    """
    pencil = psd_quotient_max(m_blocks, n_blocks, rel_tol=rel_tol)
    if not pencil.included:
        return 0.0, pencil
    if pencil.quotient <= 0.0:
        return np.inf, pencil
    return 1.0 / pencil.quotient, pencil


# -- majorization / range inclusion certificate -------------------------


@dataclass(frozen=True)
class DouglasCertificate:
    """Joint verdict of the three equivalent range-majorization conditions.

    range_included: projector route, range of T inside range of Z.
    alpha_min: smallest a with T T* <= a^2 Z Z* (inf when infeasible).
    factor: operator U with T = (apply U, then Z); residual is the
    uniform norm of the factorization defect.
    """

    range_included: bool
    pencil_included: bool
    alpha_min: float
    factor: "ModuleOperator"
    residual: float
    factor_ok: bool
    gap_ratio: float

    def conditions_agree(self) -> bool:
        finite = np.isfinite(self.alpha_min)
        return self.range_included == self.pencil_included == self.factor_ok and (
            finite == self.range_included
        )


def douglas(
    t_op: ModuleOperator,
    z_op: ModuleOperator,
    tol_eq: float = TOL_EQ,
    rel_tol: float = TOL_RANK,
) -> DouglasCertificate:
    """Decide range inclusion of t_op inside z_op three independent ways."""
    _check_same_shape(t_op.shape, z_op.shape)
    if t_op.codomain_rank != z_op.codomain_rank:
        raise ShapeMismatch("operators must share their codomain")
    t_norm = t_op.uniform_norm()
    slack = tol_eq * (1.0 + t_norm)

    # route 1: orthogonal projector onto the range of z_op
    proj = z_op.range_projection(rel_tol=rel_tol)
    complement = ModuleOperator.identity(t_op.shape, t_op.codomain_rank) - proj
    range_included = t_op.then(complement).uniform_norm() <= slack

    # route 2: PSD pencil of the two absolute squares
    tt = [_hermitize(b.conj().T @ b) for b in t_op.blocks]
    zz = [_hermitize(b.conj().T @ b) for b in z_op.blocks]
    pencil = psd_quotient_max(tt, zz, rel_tol=rel_tol)
    alpha_min = float(np.sqrt(pencil.quotient)) if pencil.included else np.inf

    # route 3: explicit factor through the pseudoinverse
    factor = t_op.then(z_op.pinv(rel_tol=rel_tol))
    residual = operator_distance(factor.then(z_op), t_op)
    factor_ok = residual <= slack

    return DouglasCertificate(
        range_included=range_included,
        pencil_included=pencil.included,
        alpha_min=alpha_min,
        factor=factor,
        residual=residual,
        factor_ok=factor_ok,
        gap_ratio=pencil.gap_ratio,
    )


# -- invertible sandwich check ------------------------------------------


@dataclass(frozen=True)
class EnvelopeReport:
    ok: bool
    lower_ok: bool
    upper_ok: bool
    lower_scale: float
    upper_scale: float


def norm_envelope_check(
    f_op: ModuleOperator,
    eta: ModuleVector,
    tol_psd: float = TOL_PSD,
    rel_tol: float = TOL_RANK,
) -> EnvelopeReport:
    """Check the two-sided norm envelope for an invertible operator.

    For invertible F the inner product of F eta with itself is squeezed
    between the inner product of eta scaled by the inverse norm and by
    the norm of F.
    """
    inv = f_op.inverse(rel_tol=rel_tol)  # raises when not invertible
    upper_scale = f_op.uniform_norm() ** 2
    lower_scale = 1.0 / (inv.uniform_norm() ** 2)
    image = f_op.apply(eta)
    base = inner(eta, eta)
    lifted = inner(image, image)
    lower_ok = leq(base.scale(lower_scale), lifted, tol_psd=tol_psd)
    upper_ok = leq(lifted, base.scale(upper_scale), tol_psd=tol_psd)
    return EnvelopeReport(
        ok=lower_ok and upper_ok,
        lower_ok=lower_ok,
        upper_ok=upper_ok,
        lower_scale=lower_scale,
        upper_scale=upper_scale,
    )
