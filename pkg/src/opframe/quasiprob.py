"""Quasi-probabilities, state reconstruction, and simulated linear-inversion tomography."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import IncompleteFrameError, FrameError, OperatorFrame, span_rank
from .hilbert import DEFAULT_TOL, Tolerance, as_operator, hermiticity_defect, trace_distance


@dataclass(frozen=True, eq=False)
class QuasiDistribution:
    """Coefficients ``P(i) = Tr(Lambda(i) rho)`` aligned with a frame's labels."""

    frame: OperatorFrame
    values: np.ndarray

    @property
    def frame_id(self) -> str:
        return f"{self.frame.name}/d={self.frame.dim}"

    @property
    def total(self) -> complex:
        return complex(np.sum(self.values))

    @property
    def labels(self) -> tuple:
        return self.frame.labels

    def __getitem__(self, label) -> complex:
        return complex(self.values[self.frame.index_of(label)])


@dataclass(frozen=True, eq=False)
class TomographyRun:
    frame_id: str
    true_state: np.ndarray
    shots: int
    counts: np.ndarray
    estimate: np.ndarray
    trace_distance: float
    min_eigenvalue: float
    seed: int | None

    def to_dict(self) -> dict:
        from .hilbert import operator_to_json

        return {
            "frame": self.frame_id,
            "shots": self.shots,
            "seed": self.seed,
            "counts": [int(c) for c in self.counts],
            "estimate": operator_to_json(self.estimate),
            "trace_distance": self.trace_distance,
            "min_eigenvalue": self.min_eigenvalue,
        }


def _require_complete(frame: OperatorFrame, what: str) -> OperatorFrame:
    frame = frame.with_duals()
    rank = frame.rank if frame.rank is not None else span_rank(frame.elements)
    if rank < frame.dim**2:
        raise IncompleteFrameError(rank, frame.dim**2, what)
    return frame


def _check_dim(frame: OperatorFrame, op: np.ndarray, what: str = "state"):
    if op.shape != (frame.dim, frame.dim):
        raise ValueError(f"{what} has shape {op.shape}, frame {frame.name} needs d = {frame.dim}")


def quasi_distribution(frame: OperatorFrame, rho) -> QuasiDistribution:
    rho = as_operator(rho)
    _check_dim(frame, rho)
    values = np.einsum("iab,ba->i", frame.elements, rho)
    return QuasiDistribution(frame=frame, values=values)


def reconstruct_state(frame: OperatorFrame, q) -> np.ndarray:
    """``sum_i P(i) R(i)``; ``q`` may be a :class:`QuasiDistribution` or a plain sequence."""
    frame = _require_complete(frame, "reconstruction")
    values = q.values if isinstance(q, QuasiDistribution) else np.asarray(q, dtype=complex)
    if values.shape != (frame.size,):
        raise ValueError(f"expected {frame.size} coefficients, got {values.shape}")
    return np.einsum("i,iab->ab", values, frame.duals)


def _check_effect(effect: np.ndarray, tol: Tolerance):
    defect = hermiticity_defect(effect)
    if defect > tol.absolute:
        raise ValueError(f"effect is not Hermitian (defect {defect:.3e})")
    vals = np.linalg.eigvalsh(0.5 * (effect + effect.conj().T))
    if vals[0] < -tol.absolute or vals[-1] > 1 + tol.absolute:
        raise ValueError(f"effect eigenvalues [{vals[0]:.3g}, {vals[-1]:.3g}] leave [0, 1]")


def predict_probability(frame: OperatorFrame, rho, effect, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Outcome probability assembled from elements: ``sum_i Tr(E R(i)) Tr(Lambda(i) rho)``."""
    frame = _require_complete(frame, "probability prediction")
    rho, effect = as_operator(rho), as_operator(effect)
    _check_dim(frame, rho)
    _check_dim(frame, effect, "effect")
    _check_effect(effect, tol)
    given_i = np.einsum("ab,iba->i", effect, frame.duals)
    weights = np.einsum("iab,ba->i", frame.elements, rho)
    return complex(given_i @ weights)


def marginals_kd(q: QuasiDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Sum a Kirkwood-Dirac distribution over ``b`` and over ``a``.

    Returns the real parts; both are Born probabilities in the respective bases.
    """
    frame = q.frame
    if frame.name != "kd" or frame.index_scheme != "pair":
        raise FrameError(f"KD marginals need a kd frame with pair labels, got {frame.name}")
    d = frame.dim
    table = np.zeros((d, d), dtype=complex)
    for (a, b), v in zip(frame.labels, q.values):
        table[a, b] = v
    return table.sum(axis=1).real, table.sum(axis=0).real


def negativity_parts(q) -> tuple[float, float]:
    """``(sum of negative real parts, sum of |imaginary parts|)`` as magnitudes."""
    values = q.values if isinstance(q, QuasiDistribution) else np.asarray(q, dtype=complex)
    return float(np.sum(np.maximum(0.0, -values.real))), float(np.sum(np.abs(values.imag)))


def negativity(q) -> float:
    neg, imag = negativity_parts(q)
    return neg + imag


@dataclass(frozen=True)
class DualNegativity:
    min_eigenvalue: float
    index: int | None
    non_hermitian: tuple[int, ...]


def reconstruction_negativity(frame: OperatorFrame, tol: Tolerance = DEFAULT_TOL) -> DualNegativity:
    """Smallest eigenvalue over the Hermitian duals; non-Hermitian duals are listed apart."""
    frame = frame.with_duals()
    best, best_i, skipped = np.inf, None, []
    for i, r in enumerate(frame.duals):
        if hermiticity_defect(r) > tol.absolute:
            skipped.append(i)
            continue
        lo = float(np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0])
        if lo < best:
            best, best_i = lo, i
    return DualNegativity(min_eigenvalue=float(best), index=best_i, non_hermitian=tuple(skipped))


def sample_counts(probabilities, shots: int, rng) -> np.ndarray:
    """Multinomial counts by inverse-CDF lookup of uniform draws."""
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    draws = rng.random(shots)
    outcomes = np.searchsorted(cdf, draws, side="right")
    outcomes = np.minimum(outcomes, len(p) - 1)
    return np.bincount(outcomes, minlength=len(p))


def linear_inversion(frame: OperatorFrame, frequencies) -> np.ndarray:
    return reconstruct_state(frame, np.asarray(frequencies, dtype=complex))


def simulate_tomography(frame: OperatorFrame, rho, shots: int, seed=None,
                        exact: bool = False, tol: Tolerance = DEFAULT_TOL) -> TomographyRun:
    """Sample a POVM on ``rho`` and invert the frequencies with the dual frame.

    No positivity projection is applied, so the estimate may have negative
    eigenvalues. With ``exact=True`` the exact outcome probabilities replace
    sampled frequencies (the infinite-shot limit).
    """
    if frame.flavor != "povm":
        raise FrameError(f"tomography needs a POVM frame, got flavor {frame.flavor!r}")
    frame = _require_complete(frame, "tomography")
    rho = as_operator(rho)
    _check_dim(frame, rho)
    probs = quasi_distribution(frame, rho).values.real
    if shots <= 0:
        raise ValueError("shots must be positive")
    if exact:
        counts = np.zeros(frame.size, dtype=int)
        freqs = probs
    else:
        counts = sample_counts(probs, shots, np.random.default_rng(seed))
        freqs = counts / shots
    estimate = linear_inversion(frame, freqs)
    return TomographyRun(
        frame_id=f"{frame.name}/d={frame.dim}",
        true_state=rho,
        shots=shots,
        counts=counts,
        estimate=estimate,
        trace_distance=trace_distance(estimate, rho),
        min_eigenvalue=float(np.linalg.eigvalsh(0.5 * (estimate + estimate.conj().T))[0]),
        seed=seed,
    )
