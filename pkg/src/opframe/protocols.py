"""Teleportation and optimal 1 -> 2 cloning, simulated exactly with dense operators.

Teleportation uses three systems in the order A (input), R (reference half
of the resource), B (remote half). The resource ``|E>`` sits on R, B.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correlations import max_entangled, swap_operator
from .frames import (
    FrameError,
    IncompleteFrameError,
    OperatorFrame,
    phase_point_frame,
    span_rank,
)
from .hilbert import (
    DEFAULT_TOL,
    Tolerance,
    as_operator,
    frobenius_distance,
    operator_to_json,
    partial_trace,
    projector,
    weyl_operator,
)


def _is_odd_prime(d: int) -> bool:
    return d > 2 and d % 2 == 1 and all(d % k for k in range(3, int(d**0.5) + 1, 2))


def _require_complete(frame: OperatorFrame, what: str) -> OperatorFrame:
    frame = frame.with_duals()
    rank = frame.rank if frame.rank is not None else span_rank(frame.elements)
    if rank < frame.dim**2:
        raise IncompleteFrameError(rank, frame.dim**2, what)
    return frame


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    A pure ``rho`` uses ``<psi|sigma|psi>`` directly, which avoids square roots
    of round-off eigenvalues.
    """
    rho, sigma = as_operator(rho), as_operator(sigma)
    vals, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if abs(vals[-1] - 1) <= 1e-12:
        psi = vecs[:, -1]
        return float(np.vdot(psi, sigma @ psi).real)
    root = (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T
    inner = root @ sigma @ root
    ev = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2)


# --- teleportation ----------------------------------------------------------


def bell_labels(d: int) -> list[tuple[int, int]]:
    return [(q, p) for q in range(d) for p in range(d)]


def bell_basis(d: int) -> dict[tuple[int, int], np.ndarray]:
    """Generalized Bell states ``(I ⊗ W(q, p)*)|E>`` keyed by ``(q, p)``."""
    e = max_entangled(d)
    return {
        (q, p): np.kron(np.eye(d), weyl_operator(d, q, p).conj()) @ e
        for q, p in bell_labels(d)
    }


def bell_expansion_operator(frame: OperatorFrame, shift) -> np.ndarray:
    """``(1/d) sum_i lambda_i R(i) ⊗ R*(i + shift)`` on systems A, R.

    The prefactor ``1/d`` makes the zero shift equal ``|E><E|`` and the whole
    family sum to the identity.
    """
    frame = frame.with_duals()
    if frame.weights is None:
        raise FrameError(f"frame {frame.name} carries no orthogonality weights")
    d = frame.dim
    shifted = np.stack([frame.duals[frame.shifted_index(i, shift)] for i in range(frame.size)])
    out = np.einsum("i,iab,icd->acbd", frame.weights, frame.duals, shifted.conj())
    return out.reshape(d * d, d * d) / d


@dataclass
class BellExpansionReport:
    dim: int
    worst_residual: float
    matching: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    max_second_eigenvalue: float = 0.0
    min_top_eigenvalue: float = 1.0
    completeness_residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "worst_residual": self.worst_residual,
            "matching": {f"{m[0]},{m[1]}": list(k) for m, k in sorted(self.matching.items())},
            "max_second_eigenvalue": self.max_second_eigenvalue,
            "min_top_eigenvalue": self.min_top_eigenvalue,
            "completeness_residual": self.completeness_residual,
        }


def verify_bellm_expansion(d: int) -> BellExpansionReport:
    """Match every shifted phase-point expansion to a Bell projector."""
    if not _is_odd_prime(d):
        raise FrameError(f"the shift expansion needs an odd prime dimension, got {d}")
    frame = phase_point_frame(d)
    bells = {k: projector(v) for k, v in bell_basis(d).items()}
    report = BellExpansionReport(dim=d, worst_residual=0.0)
    total = np.zeros((d * d, d * d), dtype=complex)
    for m in bell_labels(d):
        op = bell_expansion_operator(frame, m)
        total += op
        label = min(bells, key=lambda k: frobenius_distance(op, bells[k]))
        res = frobenius_distance(op, bells[label])
        report.matching[m] = label
        report.residuals[m] = res
        report.worst_residual = max(report.worst_residual, res)
        ev = np.linalg.eigvalsh(0.5 * (op + op.conj().T))
        report.min_top_eigenvalue = min(report.min_top_eigenvalue, float(ev[-1]))
        report.max_second_eigenvalue = max(report.max_second_eigenvalue, float(np.max(np.abs(ev[:-1]))))
    report.completeness_residual = frobenius_distance(total, np.eye(d * d))
    return report


@dataclass(frozen=True, eq=False)
class TeleportationOutcome:
    outcome_m: tuple[int, int]
    probability: float
    conditional_remote: np.ndarray
    correction: np.ndarray
    fidelity_after_correction: float
    frame_sum_residual: float | None = None

    def to_dict(self) -> dict:
        return {
            "outcome": list(self.outcome_m),
            "probability": self.probability,
            "conditional_remote": operator_to_json(self.conditional_remote),
            "fidelity_after_correction": self.fidelity_after_correction,
            "frame_sum_residual": self.frame_sum_residual,
        }


def conditional_remote_by_projection(rho, m) -> tuple[np.ndarray, float]:
    """Project A, R onto Bell state ``m`` and trace them out; returns ``(state of B, probability)``."""
    rho = as_operator(rho)
    d = rho.shape[0]
    bell = bell_basis(d)[tuple(m)]
    joint = np.kron(rho, projector(max_entangled(d)))
    proj = np.kron(projector(bell), np.eye(d))
    unnorm = partial_trace(proj @ joint @ proj, keep=2, dims=(d * d, d))
    prob = float(np.trace(unnorm).real)
    return unnorm / prob, prob


def conditional_remote_by_frame(rho, m, frame: OperatorFrame | None = None) -> np.ndarray:
    """``sum_i lambda_i Tr(R(i) rho) R(i + m)`` with the phase-point frame."""
    rho = as_operator(rho)
    d = rho.shape[0]
    frame = phase_point_frame(d) if frame is None else frame.with_duals()
    if frame.weights is None:
        raise FrameError(f"frame {frame.name} carries no orthogonality weights")
    coeffs = frame.weights * np.einsum("iab,ba->i", frame.duals, rho)
    shifted = np.stack([frame.duals[frame.shifted_index(i, m)] for i in range(frame.size)])
    return np.einsum("i,iab->ab", coeffs, shifted)


def teleport(rho, m, d: int | None = None) -> TeleportationOutcome:
    """Conditional remote state, probability and Weyl correction for outcome ``m``.

    For odd prime ``d`` the projected state is cross-checked against the
    phase-point frame sum and the residual is stored.
    """
    rho = as_operator(rho)
    if d is not None and rho.shape[0] != d:
        raise ValueError(f"input has dimension {rho.shape[0]}, expected {d}")
    d = rho.shape[0]
    m = tuple(int(x) for x in m)
    if len(m) != 2 or not all(0 <= x < d for x in m):
        raise ValueError(f"outcome index must be (q, p) with entries in 0..{d - 1}, got {m}")
    remote, prob = conditional_remote_by_projection(rho, m)
    frame_res = None
    if _is_odd_prime(d):
        frame_res = frobenius_distance(remote, conditional_remote_by_frame(rho, m))
    correction = weyl_operator(d, *m).conj().T
    corrected = correction @ remote @ correction.conj().T
    return TeleportationOutcome(
        outcome_m=m,
        probability=prob,
        conditional_remote=remote,
        correction=correction,
        fidelity_after_correction=fidelity(rho, corrected),
        frame_sum_residual=frame_res,
    )


def teleport_all(rho) -> list[TeleportationOutcome]:
    d = as_operator(rho).shape[0]
    return [teleport(rho, m) for m in bell_labels(d)]


# --- cloning ----------------------------------------------------------------


def _unit_trace(rho, tol: Tolerance) -> np.ndarray:
    rho = as_operator(rho)
    tr = np.trace(rho)
    if abs(tr - 1) > tol.absolute:
        raise ValueError(f"input must have unit trace, got {tr:.6g}")
    return rho


def clone_map(rho, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Optimal universal cloner: ``(U + 1)(1 ⊗ rho)(U + 1) / (2(d + 1))``."""
    rho = _unit_trace(rho, tol)
    d = rho.shape[0]
    sym = swap_operator(d) + np.eye(d * d)
    return sym @ np.kron(np.eye(d), rho) @ sym / (2 * (d + 1))


def ideal_copy_component(rho) -> np.ndarray:
    """``(U (1 ⊗ rho) + (1 ⊗ rho) U) / (2d)``; its trace is ``1/d``."""
    rho = as_operator(rho)
    d = rho.shape[0]
    u = swap_operator(d)
    right = np.kron(np.eye(d), rho)
    return (u @ right + right @ u) / (2 * d)


def ideal_copy_component_swapped(rho) -> np.ndarray:
    """Same operator written with ``rho ⊗ 1`` on the other side of the swap."""
    rho = as_operator(rho)
    d = rho.shape[0]
    u = swap_operator(d)
    left = np.kron(rho, np.eye(d))
    return (left @ u + u @ left) / (2 * d)


def ideal_copy_lines(frame: OperatorFrame, rho) -> tuple[np.ndarray, np.ndarray]:
    """Both frame expansions of the ideal copy: ``R ⊗ sym(Lambda, rho)`` and the mirrored order."""
    frame = _require_complete(frame, "ideal-copy expansion")
    rho = as_operator(rho)
    d = frame.dim
    sym = 0.5 * (np.einsum("iab,bc->iac", frame.elements, rho)
                 + np.einsum("ab,ibc->iac", rho, frame.elements))
    first = np.einsum("iab,icd->acbd", frame.duals, sym).reshape(d * d, d * d) / d
    second = np.einsum("iab,icd->acbd", sym, frame.duals).reshape(d * d, d * d) / d
    return first, second


def ideal_copy_expansion(frame: OperatorFrame, rho) -> float:
    """Largest distance of either frame expansion from :func:`ideal_copy_component`.

    Holds for every complete frame; orthogonality is not needed.
    """
    first, second = ideal_copy_lines(frame, rho)
    target = ideal_copy_component(rho)
    return max(frobenius_distance(first, target), frobenius_distance(second, target))


def discrepancy_state(frame: OperatorFrame, i: int, rho) -> np.ndarray:
    frame = frame.with_duals()
    if not 0 <= i < frame.size:
        raise IndexError(f"index {i} out of range for {frame.size} elements")
    lam, r = frame.elements[i], frame.duals[i]
    rho = as_operator(rho)
    return 0.5 * (lam @ rho + rho @ lam) - np.trace(lam @ rho) * r


def discrepancy_elements(frame: OperatorFrame, i: int, j: int) -> np.ndarray:
    frame = frame.with_duals()
    for k in (i, j):
        if not 0 <= k < frame.size:
            raise IndexError(f"index {k} out of range for {frame.size} elements")
    lam, r = frame.elements[j], frame.duals[i]
    return 0.5 * (lam @ r + r @ lam) - (1.0 if i == j else 0.0) * r


def max_element_discrepancy(frame: OperatorFrame) -> float:
    frame = frame.with_duals()
    lam, r = frame.elements, frame.duals
    # prods[j, i] = Lambda(j) R(i)
    prods = np.einsum("jab,ibc->jiac", lam, r)
    sym = 0.5 * (prods + np.einsum("iab,jbc->jiac", r, lam))
    idx = np.arange(frame.size)
    sym[idx, idx] -= r
    return float(np.max(np.linalg.norm(sym, axis=(2, 3))))


def all_discrepancies_zero(frame: OperatorFrame, tol: Tolerance = DEFAULT_TOL) -> bool:
    return max_element_discrepancy(frame) <= tol.absolute


def joint_ideal_statistics(e1, e2, rho, frame: OperatorFrame) -> tuple[complex, float]:
    """Joint statistics of the normalized ideal copy, evaluated two ways.

    Returns ``(frame_sum, closed_form)`` with
    ``frame_sum = sum_i Tr(E1 R(i)) * Tr(E2 (Lambda(i) rho + rho Lambda(i)) / 2)``
    and ``closed_form = Re Tr(E1 E2 rho)``. For Hermitian elements the second
    factor of the sum is ``Re Tr(Lambda(i) E2 rho)``. Values can be negative.
    """
    frame = _require_complete(frame, "joint ideal statistics")
    e1, e2, rho = as_operator(e1), as_operator(e2), as_operator(rho)
    left = np.einsum("ab,iba->i", e1, frame.duals)
    sym = 0.5 * (np.einsum("ab,ibc,ca->i", e2, frame.elements, rho)
                 + np.einsum("ab,bc,ica->i", e2, rho, frame.elements))
    frame_sum = complex(left @ sym)
    closed = float(np.trace(e1 @ e2 @ rho).real)
    return frame_sum, closed


@dataclass(frozen=True, eq=False)
class CloneReport:
    input: np.ndarray
    output_pair: np.ndarray
    ideal_component: np.ndarray
    marginal_1: np.ndarray
    marginal_2: np.ndarray
    clone_fidelity: float | None
    ideal_trace: float
    ideal_marginal_residual: float
    expansion_residual: float | None
    discrepancy_norms: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "output_pair": operator_to_json(self.output_pair, [self.input.shape[0]] * 2),
            "output_trace": float(np.trace(self.output_pair).real),
            "output_min_eigenvalue": float(np.linalg.eigvalsh(self.output_pair)[0]),
            "marginal_1": operator_to_json(self.marginal_1),
            "marginal_2": operator_to_json(self.marginal_2),
            "clone_fidelity": self.clone_fidelity,
            "ideal_trace": self.ideal_trace,
            "ideal_marginal_residual": self.ideal_marginal_residual,
            "expansion_residual": self.expansion_residual,
            "discrepancy_norms": list(self.discrepancy_norms),
        }


def _pure_vector(rho, tol: Tolerance) -> np.ndarray | None:
    vals, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if abs(vals[-1] - 1) <= tol.absolute:
        return vecs[:, -1]
    return None


def clone_report(rho, frame: OperatorFrame | None = None, tol: Tolerance = DEFAULT_TOL) -> CloneReport:
    """Clone output, ideal-copy bookkeeping and per-element discrepancy norms."""
    rho = _unit_trace(rho, tol)
    d = rho.shape[0]
    out = clone_map(rho, tol)
    m1 = partial_trace(out, keep=1)
    m2 = partial_trace(out, keep=2)
    psi = _pure_vector(rho, tol)
    clone_fid = None if psi is None else float(np.vdot(psi, m1 @ psi).real)
    ideal = ideal_copy_component(rho)
    ideal_tr = float(np.trace(ideal).real)
    ideal_res = max(frobenius_distance(partial_trace(ideal, keep=k) / ideal_tr, rho) for k in (1, 2))
    expansion = None
    norms: tuple[float, ...] = ()
    if frame is not None:
        frame = frame.with_duals()
        if frame.rank == d * d:
            expansion = ideal_copy_expansion(frame, rho)
        norms = tuple(float(np.linalg.norm(discrepancy_state(frame, i, rho)))
                      for i in range(frame.size))
    return CloneReport(
        input=rho,
        output_pair=out,
        ideal_component=ideal,
        marginal_1=m1,
        marginal_2=m2,
        clone_fidelity=clone_fid,
        ideal_trace=ideal_tr,
        ideal_marginal_residual=ideal_res,
        expansion_residual=expansion,
        discrepancy_norms=norms,
    )
