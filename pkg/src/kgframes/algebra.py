"""Finite direct sums of complex matrix blocks and their C*-seminorms.

An algebra element is one square complex matrix per block.  The k-th
seminorm is the spectral norm of the k-th block; positivity and the
induced order are decided blockwise with relative tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeMismatch

TOL_PSD = 1e-9
TOL_HERM = 1e-10
TOL_RANK = 1e-10


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex, copy=True, order="C")
    out.flags.writeable = False
    return out


def _product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # einsum keeps one fixed reduction order, so (a*b)* == b* a* holds bitwise
    return np.einsum("ik,kj->ij", a, b)


@dataclass(frozen=True)
class AlgebraShape:
    """Block sizes of the algebra, one entry per matrix block."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if not sizes:
            raise ShapeMismatch("algebra needs at least one block")
        if any(n < 1 for n in sizes):
            raise ShapeMismatch(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def block_count(self) -> int:
        return len(self.sizes)

    def __iter__(self):
        return iter(self.sizes)

    def __len__(self) -> int:
        return len(self.sizes)


def _check_same_shape(a: AlgebraShape, b: AlgebraShape) -> None:
    if a != b:
        raise ShapeMismatch(f"algebra shapes differ: {a.sizes} vs {b.sizes}")


@dataclass(frozen=True)
class PositivityVerdict:
    """Outcome of a blockwise positivity test.

    min_eigenvalue is taken at worst_block on the Hermitian part;
    hermitian_ok records whether every block passed the Hermitian test.
    """

    is_positive: bool
    worst_block: int
    min_eigenvalue: float
    hermitian_ok: bool


def psd_verdict(
    blocks: Sequence[np.ndarray],
    tol_psd: float = TOL_PSD,
    tol_herm: float = TOL_HERM,
) -> PositivityVerdict:
    """Decide blockwise positive semidefiniteness with relative slack."""
    herm_ok = True
    worst = 0
    worst_margin = np.inf
    worst_eig = np.inf
    positive = True
    for k, blk in enumerate(blocks):
        norm = float(np.linalg.norm(blk, 2)) if blk.size else 0.0
        herm_gap = float(np.linalg.norm(blk - blk.conj().T, 2))
        blk_herm_ok = herm_gap <= tol_herm * (1.0 + norm)
        herm = (blk + blk.conj().T) / 2.0
        lam_min = float(np.linalg.eigvalsh(herm)[0]) if blk.size else 0.0
        margin = lam_min + tol_psd * (1.0 + norm)
        if not blk_herm_ok:
            herm_ok = False
            positive = False
            margin = -np.inf
        elif margin < 0:
            positive = False
        if margin < worst_margin:
            worst_margin = margin
            worst = k
            worst_eig = lam_min
    return PositivityVerdict(
        is_positive=positive,
        worst_block=worst,
        min_eigenvalue=worst_eig,
        hermitian_ok=herm_ok,
    )


class AlgebraElement:
    """One square complex matrix per block, immutable."""

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: AlgebraShape, blocks: Iterable[np.ndarray]):
        blocks = tuple(_freeze(b) for b in blocks)
        if len(blocks) != shape.block_count:
            raise ShapeMismatch(
                f"expected {shape.block_count} blocks, got {len(blocks)}"
            )
        for n, blk in zip(shape, blocks):
            if blk.shape != (n, n):
                raise ShapeMismatch(f"block shaped {blk.shape}, expected ({n}, {n})")
        self.shape = shape
        self.blocks = blocks

    @classmethod
    def zero(cls, shape: AlgebraShape) -> "AlgebraElement":
        return cls(shape, [np.zeros((n, n), dtype=complex) for n in shape])

    @classmethod
    def identity(cls, shape: AlgebraShape) -> "AlgebraElement":
        return cls(shape, [np.eye(n, dtype=complex) for n in shape])

    def block(self, k: int) -> np.ndarray:
        return self.blocks[k]

    def star(self) -> "AlgebraElement":
        """Blockwise conjugate transpose (the algebra involution)."""
        return AlgebraElement(self.shape, [b.conj().T for b in self.blocks])

    def seminorm(self, k: int) -> float:
        """Spectral norm of block k."""
        return float(np.linalg.norm(self.blocks[k], 2))

    def seminorms(self) -> tuple[float, ...]:
        return tuple(self.seminorm(k) for k in range(self.shape.block_count))

    def max_seminorm(self) -> float:
        return max(self.seminorms())

    def is_positive(
        self, tol_psd: float = TOL_PSD, tol_herm: float = TOL_HERM
    ) -> PositivityVerdict:
        return psd_verdict(self.blocks, tol_psd=tol_psd, tol_herm=tol_herm)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_same_shape(self.shape, other.shape)
        return AlgebraElement(
            self.shape, [a + b for a, b in zip(self.blocks, other.blocks)]
        )

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_same_shape(self.shape, other.shape)
        return AlgebraElement(
            self.shape, [a - b for a, b in zip(self.blocks, other.blocks)]
        )

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [-b for b in self.blocks])

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            _check_same_shape(self.shape, other.shape)
            return AlgebraElement(
                self.shape,
                [_product(a, b) for a, b in zip(self.blocks, other.blocks)],
            )
        if isinstance(other, Number):
            return self.scale(complex(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.scale(complex(other))
        return NotImplemented

    def scale(self, c: complex) -> "AlgebraElement":
        return AlgebraElement(self.shape, [c * b for b in self.blocks])

    def allclose(self, other: "AlgebraElement", tol: float = 1e-12) -> bool:
        _check_same_shape(self.shape, other.shape)
        return all(
            np.allclose(a, b, rtol=0.0, atol=tol)
            for a, b in zip(self.blocks, other.blocks)
        )

    def __repr__(self) -> str:
        return f"AlgebraElement(shape={self.shape.sizes})"


def leq(
    a: AlgebraElement,
    b: AlgebraElement,
    tol_psd: float = TOL_PSD,
    tol_herm: float = TOL_HERM,
) -> bool:
    """Order relation: a <= b iff b - a is positive."""
    return (b - a).is_positive(tol_psd=tol_psd, tol_herm=tol_herm).is_positive
