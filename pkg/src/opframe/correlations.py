"""Swap-operator identities and maximally entangled correlations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import FrameError, IncompleteFrameError, OperatorFrame, span_rank
from .hilbert import (
    DEFAULT_TOL,
    Tolerance,
    frobenius_distance,
    partial_transpose,
    projector,
)


@dataclass(frozen=True)
class SwapIdentityReport:
    frame_id: str
    residual: float | None
    fill_residual: float | None = None
    rank: int | None = None
    tolerance: float = DEFAULT_TOL.absolute

    @property
    def passed(self) -> tuple[bool | None, bool | None]:
        def ok(r):
            return None if r is None else bool(r <= self.tolerance)

        return ok(self.residual), ok(self.fill_residual)

    def to_dict(self) -> dict:
        swap_ok, fill_ok = self.passed
        return {
            "frame": self.frame_id,
            "residual": self.residual,
            "fill_residual": self.fill_residual,
            "rank": self.rank,
            "passed": {"swap": swap_ok, "fill": fill_ok},
        }


def swap_operator(d: int) -> np.ndarray:
    """``U|m, n> = |n, m>`` on ``C^d ⊗ C^d``."""
    u = np.zeros((d * d, d * d), dtype=complex)
    for m in range(d):
        for n in range(d):
            u[n * d + m, m * d + n] = 1.0
    return u


def symmetric_projector(d: int) -> np.ndarray:
    return 0.5 * (swap_operator(d) + np.eye(d * d))


def frame_swap_sum(frame: OperatorFrame) -> np.ndarray:
    """``sum_i R(i) ⊗ Lambda(i)``."""
    frame = frame.with_duals()
    d = frame.dim
    return np.einsum("iab,icd->acbd", frame.duals, frame.elements).reshape(d * d, d * d)


def _rank_of(frame: OperatorFrame) -> int:
    return frame.rank if frame.rank is not None else span_rank(frame.elements)


def _frame_id(frame: OperatorFrame) -> str:
    return f"{frame.name}/d={frame.dim}"


def verify_swap_identity(frame: OperatorFrame, tol: Tolerance = DEFAULT_TOL) -> SwapIdentityReport:
    frame = frame.with_duals()
    rank = _rank_of(frame)
    if rank < frame.dim**2:
        return SwapIdentityReport(_frame_id(frame), residual=None, rank=rank, tolerance=tol.absolute)
    residual = frobenius_distance(frame_swap_sum(frame), swap_operator(frame.dim))
    return SwapIdentityReport(_frame_id(frame), residual=residual, rank=rank, tolerance=tol.absolute)


def verify_fill_identity(frame: OperatorFrame, tol: Tolerance = DEFAULT_TOL) -> SwapIdentityReport:
    """Check ``sum_i (R(i) + I) ⊗ Lambda(i) = U_SWAP + I ⊗ I``.

    Needs ``sum_i Lambda(i) = I``. The reported ``fill_residual`` is the larger
    of the identity residual and the deviation of ``(U_SWAP + I)/2`` from being
    a projector.
    """
    frame = frame.with_duals()
    d = frame.dim
    rank = _rank_of(frame)
    if rank < d * d:
        raise IncompleteFrameError(rank, d * d, "fill identity")
    total = frame.elements.sum(axis=0)
    if frobenius_distance(total, np.eye(d)) > tol.absolute:
        raise FrameError(f"frame {frame.name} elements do not sum to the identity")
    shifted = np.einsum("iab,icd->acbd", frame.duals + np.eye(d), frame.elements).reshape(d * d, d * d)
    target = swap_operator(d) + np.eye(d * d)
    fill = frobenius_distance(shifted, target)
    sym = symmetric_projector(d)
    fill = max(fill, frobenius_distance(2 * sym, target), frobenius_distance(sym @ sym, sym))
    swap_res = frobenius_distance(frame_swap_sum(frame), swap_operator(d))
    return SwapIdentityReport(_frame_id(frame), residual=swap_res, fill_residual=fill,
                              rank=rank, tolerance=tol.absolute)


def max_entangled(d: int) -> np.ndarray:
    """``(1/sqrt d) sum_n |n, n>``."""
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0
    return v / np.sqrt(d)


def verify_pt_swap(d: int) -> float:
    """Frobenius distance between the partial transpose of ``|E><E|`` and ``U_SWAP / d``."""
    pt = partial_transpose(projector(max_entangled(d)), 2)
    return frobenius_distance(pt, swap_operator(d) / d)


def entangled_expansion_sum(frame: OperatorFrame) -> np.ndarray:
    """``(1/d) sum_i lambda_i R(i) ⊗ R*(i)``, conjugating in the computational basis."""
    frame = frame.with_duals()
    if frame.weights is None:
        raise FrameError(f"frame {frame.name} is not orthogonal, so it carries no weights")
    d = frame.dim
    out = np.einsum("i,iab,icd->acbd", frame.weights, frame.duals, frame.duals.conj())
    return out.reshape(d * d, d * d) / d


def entangled_expansion(frame: OperatorFrame) -> float:
    frame = frame.with_duals()
    rank = _rank_of(frame)
    if rank < frame.dim**2:
        raise IncompleteFrameError(rank, frame.dim**2, "entangled expansion")
    return frobenius_distance(entangled_expansion_sum(frame), projector(max_entangled(frame.dim)))


def conjugate_correlation_test(d: int, basis=None) -> np.ndarray:
    """Joint outcome table for basis ``{|a_k>}`` on system 1 and ``{|a_k*>}`` on system 2 of ``|E>``.

    ``basis`` defaults to the computational basis; the returned ``table[k, l]``
    should equal ``delta_kl / d``.
    """
    if basis is None:
        basis = np.eye(d, dtype=complex)
    else:
        basis = np.column_stack([np.asarray(v, dtype=complex).ravel() for v in basis])
    e = max_entangled(d)
    table = np.empty((d, d))
    for k in range(d):
        for l in range(d):
            amp = np.vdot(np.kron(basis[:, k], basis[:, l].conj()), e)
            table[k, l] = abs(amp) ** 2
    return table
