"""Finite operator families over a free module: frames and coordinate bases.

A family {F_i : A^d -> A^{c_i}} is stored with its offset table embedding
the direct sum of the codomains into A^{sum c_i}.  The analysis operator
concatenates the member images at those offsets; its adjoint is the
synthesis operator; their composite is the frame operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .algebra import TOL_RANK, AlgebraShape, _check_same_shape
from .errors import BasisError, PartitionError, ShapeMismatch
from .modules import ModuleVector, vector_seminorm
from .operators import ModuleOperator, _hermitize

BASIS_TOL = 1e-10


def embed_direction(
    shape: AlgebraShape, rank: int, block: int, direction: np.ndarray
) -> ModuleVector:
    """Module vector whose self inner product reproduces a quadratic form.

    The returned vector has, on the chosen block, the conjugate of
    `direction` as the first row of its stack and zeros elsewhere, so for
    any operator realization R on that block the (0,0) entry of the
    quadratic expression of the vector against R equals v* R v.
    """
    direction = np.asarray(direction, dtype=complex).reshape(-1)
    n = shape.sizes[block]
    if direction.size != n * rank:
        raise ShapeMismatch(
            f"direction has length {direction.size}, expected {n * rank}"
        )
    stacks = [np.zeros((m, m * rank), dtype=complex) for m in shape]
    stacks[block][0, :] = direction.conj()
    return ModuleVector(shape, rank, stacks)


class GFrame:
    """Indexed family of operators out of one common domain module."""

    __slots__ = ("shape", "domain_rank", "members", "offsets", "_analysis", "_frame_op")

    def __init__(self, members: Iterable[ModuleOperator]):
        members = tuple(members)
        if not members:
            raise ShapeMismatch("a frame needs at least one member")
        shape = members[0].shape
        domain_rank = members[0].domain_rank
        for mem in members[1:]:
            _check_same_shape(shape, mem.shape)
            if mem.domain_rank != domain_rank:
                raise ShapeMismatch("frame members must share their domain rank")
        offsets = [0]
        for mem in members:
            offsets.append(offsets[-1] + mem.codomain_rank)
        self.shape = shape
        self.domain_rank = domain_rank
        self.members = members
        self.offsets = tuple(offsets)
        self._analysis: ModuleOperator | None = None
        self._frame_op: ModuleOperator | None = None

    # -- structure ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def member(self, i: int) -> ModuleOperator:
        return self.members[i]

    @property
    def codomain_ranks(self) -> tuple[int, ...]:
        return tuple(m.codomain_rank for m in self.members)

    @property
    def total_codomain_rank(self) -> int:
        return self.offsets[-1]

    def __repr__(self) -> str:
        return (
            f"GFrame(shape={self.shape.sizes}, domain_rank={self.domain_rank}, "
            f"members={len(self.members)})"
        )

    # -- derived operators ---------------------------------------------

    def analysis_operator(self) -> ModuleOperator:
        """Stacks all member images: A^d -> A^{sum c_i}."""
        if self._analysis is None:
            blocks = [
                np.hstack([mem.blocks[k] for mem in self.members])
                for k in range(self.shape.block_count)
            ]
            self._analysis = ModuleOperator(
                self.shape, self.domain_rank, self.total_codomain_rank, blocks
            )
        return self._analysis

    def synthesis_operator(self) -> ModuleOperator:
        """Adjoint of the analysis operator: A^{sum c_i} -> A^d."""
        return self.analysis_operator().adjoint()

    def frame_operator(self) -> ModuleOperator:
        """Sum of adjoint(F_i) after F_i; Hermitian PSD by construction."""
        if self._frame_op is None:
            analysis = self.analysis_operator()
            self._frame_op = ModuleOperator(
                self.shape,
                self.domain_rank,
                self.domain_rank,
                [_hermitize(b @ b.conj().T) for b in analysis.blocks],
            )
        return self._frame_op

    def analysis(self, x: ModuleVector) -> ModuleVector:
        return self.analysis_operator().apply(x)

    def synthesis(self, g: ModuleVector) -> ModuleVector:
        return self.synthesis_operator().apply(g)

    def piece(self, g: ModuleVector, i: int) -> ModuleVector:
        """Slice the i-th codomain summand out of a stacked vector."""
        if g.rank != self.total_codomain_rank:
            raise ShapeMismatch(
                f"stacked vector rank {g.rank} != {self.total_codomain_rank}"
            )
        lo, hi = self.offsets[i], self.offsets[i + 1]
        stacks = [s[:, n * lo : n * hi] for n, s in zip(self.shape, g.stacks)]
        return ModuleVector(self.shape, hi - lo, stacks)


def frame_distance(a: GFrame, b: GFrame) -> float:
    """Largest member-wise uniform-norm difference."""
    if len(a) != len(b) or a.codomain_ranks != b.codomain_ranks:
        raise ShapeMismatch("frames have different index structure")
    return max((x - y).uniform_norm() for x, y in zip(a.members, b.members))


@dataclass(frozen=True, eq=False)
class FrameBounds:
    """Optimal two-sided constants of the frame inequality.

    `lower` and `upper` are the extreme eigenvalues of the frame operator
    realizations over all blocks; the witnesses attain them.
    """

    lower: float
    upper: float
    tight: bool
    witness_low: ModuleVector
    witness_high: ModuleVector
    lower_block: int
    upper_block: int

    def is_frame(self, rel_tol: float = TOL_RANK) -> bool:
        return self.lower > rel_tol * max(self.upper, 1e-300)


def optimal_g_bounds(frame: GFrame, tight_tol: float = 1e-8) -> FrameBounds:
    """Extreme eigenvalues of the frame operator with witness vectors."""
    s_op = frame.frame_operator()
    lower = np.inf
    upper = -np.inf
    lo_block = hi_block = 0
    lo_vec = hi_vec = None
    for k, blk in enumerate(s_op.blocks):
        lam, vecs = np.linalg.eigh(blk)
        if float(lam[0]) < lower:
            lower = float(lam[0])
            lo_block = k
            lo_vec = vecs[:, 0]
        if float(lam[-1]) > upper:
            upper = float(lam[-1])
            hi_block = k
            hi_vec = vecs[:, -1]
    lower = max(lower, 0.0)
    witness_low = embed_direction(frame.shape, frame.domain_rank, lo_block, lo_vec)
    witness_high = embed_direction(frame.shape, frame.domain_rank, hi_block, hi_vec)
    return FrameBounds(
        lower=lower,
        upper=upper,
        tight=(upper - lower) <= tight_tol * upper,
        witness_low=witness_low,
        witness_high=witness_high,
        lower_block=lo_block,
        upper_block=hi_block,
    )


def is_g_complete(frame: GFrame, rel_tol: float = TOL_RANK) -> bool:
    """No nonzero vector is annihilated by every member.

    Equivalent to the analysis realization having full rank on each
    block, and to the frame operator being positive definite.
    """
    analysis = frame.analysis_operator()
    ranks = analysis.rank_profile(rel_tol=rel_tol)
    return all(
        r == n * frame.domain_rank for r, n in zip(ranks, frame.shape)
    )


# -- coordinate bases ----------------------------------------------------


def canonical_basis(
    shape: AlgebraShape, rank: int, partition: Sequence[int]
) -> GFrame:
    """Coordinate-slice family splitting A^rank along a partition.

    Member i selects the components in its partition window; the family
    satisfies the delta condition and algebra-valued completeness
    exactly.
    """
    partition = tuple(int(c) for c in partition)
    if not partition or any(c < 1 for c in partition):
        raise PartitionError(f"partition parts must be positive, got {partition}")
    if sum(partition) != rank:
        raise PartitionError(
            f"partition {partition} sums to {sum(partition)}, expected {rank}"
        )
    members = []
    offset = 0
    for c in partition:
        blocks = [
            np.eye(n * rank, dtype=complex)[:, n * offset : n * (offset + c)]
            for n in shape
        ]
        members.append(ModuleOperator(shape, rank, c, blocks))
        offset += c
    return GFrame(members)


@dataclass(frozen=True)
class BasisAxiomReport:
    """Separate verdicts for each orthonormal-basis axiom.

    delta_ok: pairwise slices compose to delta_ij times the identity.
    parseval_ok: the members' absolute squares sum to the identity.
    seminorm_additive_ok: the scalar seminorm Pythagoras identity holds
    on the probe vectors; this axiom genuinely fails over matrix blocks,
    so it is reported but never required.
    """

    delta_ok: bool
    delta_violation: float
    parseval_ok: bool
    parseval_violation: float
    seminorm_additive_ok: bool
    seminorm_violation: float
    probe_count: int


def _default_probes(shape: AlgebraShape, rank: int) -> list[ModuleVector]:
    probes = [
        ModuleVector.basis_vector(shape, rank, i) for i in range(min(rank, 2))
    ]
    stacks = []
    for n in shape:
        grid = np.arange(n * n * rank, dtype=float).reshape(n, n * rank)
        stacks.append((1.0 + grid + 1j * (grid % 3)) / (1.0 + n * rank))
    probes.append(ModuleVector(shape, rank, stacks))
    return probes


def basis_axiom_report(
    basis: GFrame,
    probes: Sequence[ModuleVector] | None = None,
    tol: float = BASIS_TOL,
) -> BasisAxiomReport:
    """Test each orthonormal-basis axiom separately on a candidate family."""
    shape = basis.shape
    delta_violation = 0.0
    for i, ei in enumerate(basis.members):
        for j, ej in enumerate(basis.members):
            # realization of: apply adjoint(E_i), then E_j
            for k, n in enumerate(shape):
                got = ei.blocks[k].conj().T @ ej.blocks[k]
                want = (
                    np.eye(n * ei.codomain_rank, dtype=complex)
                    if i == j
                    else np.zeros_like(got)
                )
                delta_violation = max(
                    delta_violation, float(np.linalg.norm(got - want, 2))
                )
    parseval_violation = 0.0
    for k, n in enumerate(shape):
        acc = np.zeros((n * basis.domain_rank,) * 2, dtype=complex)
        for mem in basis.members:
            acc = acc + mem.blocks[k] @ mem.blocks[k].conj().T
        parseval_violation = max(
            parseval_violation,
            float(np.linalg.norm(acc - np.eye(acc.shape[0]), 2)),
        )
    if probes is None:
        probes = _default_probes(shape, basis.domain_rank)
    seminorm_violation = 0.0
    for x in probes:
        images = [mem.apply(x) for mem in basis.members]
        for k in range(shape.block_count):
            total = sum(vector_seminorm(img, k) ** 2 for img in images)
            base = vector_seminorm(x, k) ** 2
            seminorm_violation = max(
                seminorm_violation, abs(total - base) / (1.0 + base)
            )
    return BasisAxiomReport(
        delta_ok=delta_violation <= tol,
        delta_violation=delta_violation,
        parseval_ok=parseval_violation <= tol,
        parseval_violation=parseval_violation,
        seminorm_additive_ok=seminorm_violation <= tol,
        seminorm_violation=seminorm_violation,
        probe_count=len(probes),
    )


def validate_basis(basis: GFrame, tol: float = BASIS_TOL) -> BasisAxiomReport:
    """Require the two adopted axioms (delta + completeness); report all."""
    report = basis_axiom_report(basis, probes=(), tol=tol)
    if not (report.delta_ok and report.parseval_ok):
        raise BasisError(
            "candidate family fails the orthonormal-basis axioms: "
            f"delta violation {report.delta_violation:.3e}, "
            f"completeness violation {report.parseval_violation:.3e}"
        )
    return report


def _check_index_compatible(frame: GFrame, basis: GFrame) -> None:
    _check_same_shape(frame.shape, basis.shape)
    if frame.domain_rank != basis.domain_rank:
        raise BasisError(
            f"domain ranks differ: frame {frame.domain_rank}, basis {basis.domain_rank}"
        )
    if frame.codomain_ranks != basis.codomain_ranks:
        raise BasisError(
            f"codomain ranks differ: frame {frame.codomain_ranks}, "
            f"basis {basis.codomain_ranks}"
        )


def g_operator(frame: GFrame, basis: GFrame) -> ModuleOperator:
    """Unique square operator Q with every member F_i = (apply adjoint(Q), then E_i).

    Built as the sum over i of (apply E_i, then adjoint(F_i)); composing
    Q after its own adjoint reproduces the frame operator.
    """
    _check_index_compatible(frame, basis)
    validate_basis(basis)
    shape = frame.shape
    d = frame.domain_rank
    blocks = []
    for k, n in enumerate(shape):
        acc = np.zeros((n * d, n * d), dtype=complex)
        for mem, e in zip(frame.members, basis.members):
            acc = acc + e.blocks[k] @ mem.blocks[k].conj().T
        blocks.append(acc)
    return ModuleOperator(shape, d, d, blocks)


def reconstruct_from_g_operator(q_op: ModuleOperator, basis: GFrame) -> GFrame:
    """Frame with members (apply adjoint(q_op), then E_i)."""
    if q_op.domain_rank != q_op.codomain_rank:
        raise ShapeMismatch("the generating operator must be square")
    if q_op.domain_rank != basis.domain_rank:
        raise BasisError(
            f"operator rank {q_op.domain_rank} != basis rank {basis.domain_rank}"
        )
    adj = q_op.adjoint()
    return GFrame([adj.then(e) for e in basis.members])
