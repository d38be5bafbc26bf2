"""Dense complex linear algebra on finite-dimensional Hilbert spaces.

Operators are plain ``numpy`` complex arrays. Bipartite operators use the
Kronecker layout in which factor 1 is the slow (most significant) index, so
``|m, n>`` sits at row ``m * d2 + n``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair used by every verdict."""

    absolute: float = 1e-9
    relative: float = 1e-9

    def __post_init__(self):
        if self.absolute < 0 or self.relative < 0:
            raise ValueError("tolerances must be non-negative")

    def close(self, value: float, target: float = 0.0) -> bool:
        return abs(value - target) <= self.absolute + self.relative * abs(target)


DEFAULT_TOL = Tolerance()


class HermitianError(ValueError):
    """Raised when an operator that must be Hermitian is not."""

    def __init__(self, asymmetry: float):
        super().__init__(f"operator is not Hermitian (max |A - A^dagger| = {asymmetry:.3e})")
        self.asymmetry = asymmetry


def as_operator(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
    return m


def ket(d: int, n: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[n % d] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` with ``a`` on the slow index."""
    return np.kron(as_operator(a), as_operator(b))


def _split_dims(x: np.ndarray, dims) -> tuple[int, int]:
    if dims is None:
        d = int(round(np.sqrt(x.shape[0])))
        if d * d != x.shape[0]:
            raise ValueError(
                f"cannot infer two equal factors for a {x.shape[0]}-dimensional operator"
            )
        return d, d
    dims = tuple(int(k) for k in dims)
    if len(dims) != 2:
        raise ValueError(f"expected a bipartite operator, got factors {dims}")
    if dims[0] * dims[1] != x.shape[0]:
        raise ValueError(f"factors {dims} do not match operator side {x.shape[0]}")
    return dims


def partial_trace(x, keep: int, dims: Sequence[int] | None = None) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    x : array_like
        Operator on ``H1 ⊗ H2``.
    keep : {1, 2}
        The subsystem to keep.
    dims : pair of int, optional
        Subsystem dimensions; two equal factors are assumed when omitted.
    """
    x = as_operator(x)
    d1, d2 = _split_dims(x, dims)
    t = x.reshape(d1, d2, d1, d2)
    if keep == 1:
        return np.einsum("ajbj->ab", t)
    if keep == 2:
        return np.einsum("iaib->ab", t)
    raise ValueError(f"keep must be 1 or 2, got {keep!r}")


def partial_transpose(x, subsystem: int = 2, dims: Sequence[int] | None = None) -> np.ndarray:
    x = as_operator(x)
    d1, d2 = _split_dims(x, dims)
    t = x.reshape(d1, d2, d1, d2)
    if subsystem == 1:
        t = t.transpose(2, 1, 0, 3)
    elif subsystem == 2:
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"subsystem must be 1 or 2, got {subsystem!r}")
    return t.reshape(d1 * d2, d1 * d2)


def hermiticity_defect(a) -> float:
    a = as_operator(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(a, tol: Tolerance = DEFAULT_TOL) -> bool:
    return hermiticity_defect(a) <= tol.absolute


def _normalize_phase(v: np.ndarray, atol: float) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > atol)
    if nz.size == 0:
        return v
    first = v[nz[0]]
    return v * (abs(first) / first)


def hermitian_eig(a, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian operator with a reproducible ordering.

    Eigenvalues come back in descending order. Each eigenvector has its first
    non-negligible entry made real positive, and eigenvectors sharing an
    eigenvalue (within ``tol.absolute``) are ordered lexicographically by
    their ``(re, im)`` entries, largest first.

    Returns
    -------
    values : ndarray of float, shape (d,)
    vectors : ndarray of complex, shape (d, d)
        ``vectors[:, k]`` is the eigenvector of ``values[k]``.

    Raises
    ------
    HermitianError
        If ``a`` deviates from its adjoint by more than ``tol.absolute``.
    """
    a = as_operator(a)
    defect = hermiticity_defect(a)
    if defect > tol.absolute:
        raise HermitianError(defect)
    herm = 0.5 * (a + a.conj().T)
    values, vectors = np.linalg.eigh(herm)
    vectors = np.column_stack(
        [_normalize_phase(vectors[:, k], 1e-12) for k in range(vectors.shape[1])]
    )

    def entry_key(k):
        v = np.round(vectors[:, k], 12)
        return tuple(x for z in v for x in (-z.real, -z.imag))

    order = list(np.argsort(-values, kind="stable"))
    # group near-degenerate eigenvalues, then order each group by entries
    groups: list[list[int]] = []
    for k in order:
        if groups and abs(values[groups[-1][0]] - values[k]) <= tol.absolute:
            groups[-1].append(k)
        else:
            groups.append([k])
    final = [k for g in groups for k in sorted(g, key=entry_key)]
    return values[final], vectors[:, final]


def min_eigenvalue(a) -> float:
    a = as_operator(a)
    return float(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0])


def haar_random_pure(d: int, seed) -> np.ndarray:
    """Haar-distributed pure state from a seeded PCG64 generator.

    ``seed`` may also be an existing ``numpy.random.Generator``.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def random_density(d: int, seed, rank: int | None = None) -> np.ndarray:
    """Random mixed state ``G G^dagger / Tr`` with Ginibre ``G`` of given rank."""
    rng = np.random.default_rng(seed)
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(d: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_effect(d: int, seed) -> np.ndarray:
    """Random Hermitian effect ``0 <= E <= I`` with uniform eigenvalues in a Haar-random basis."""
    rng = np.random.default_rng(seed)
    u = random_unitary(d, rng)
    return (u * rng.random(d)) @ u.conj().T


def shift_operator(d: int) -> np.ndarray:
    """``X|n> = |n+1 mod d>``."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def clock_operator(d: int) -> np.ndarray:
    """``Z|n> = omega^n |n>`` with ``omega = exp(2 pi i / d)``."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def weyl_operator(d: int, q: int, p: int) -> np.ndarray:
    """Displacement ``W(q, p) = X^q Z^p``."""
    x = np.linalg.matrix_power(shift_operator(d), q % d)
    z = np.linalg.matrix_power(clock_operator(d), p % d)
    return x @ z


def frobenius_distance(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def trace_distance(a, b) -> float:
    diff = as_operator(a) - as_operator(b)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def fourier_basis(d: int) -> list[np.ndarray]:
    """Columns of the discrete Fourier transform, mutually unbiased with the computational basis."""
    n = np.arange(d)
    f = np.exp(2j * np.pi * np.outer(n, n) / d) / np.sqrt(d)
    return [f[:, k] for k in range(d)]


def computational_basis(d: int) -> list[np.ndarray]:
    return [ket(d, n) for n in range(d)]


# --- JSON interchange -------------------------------------------------------


def operator_to_json(x, factors: Sequence[int] | None = None) -> dict:
    x = as_operator(x)
    if factors is None:
        factors = [x.shape[0]]
    return {
        "factors": [int(f) for f in factors],
        "re": x.real.tolist(),
        "im": x.imag.tolist(),
    }


def operator_from_json(obj: dict | str) -> tuple[np.ndarray, tuple[int, ...]]:
    """Parse ``{"factors": [...], "re": [[...]], "im": [[...]]}``.

    ``im`` may be omitted for real operators.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "re" not in obj:
        raise ValueError("operator JSON needs at least an 're' field")
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.ndim != 2 or re.shape[0] != re.shape[1]:
        raise ValueError(f"operator must be square, got 're' shape {re.shape}")
    if im.shape != re.shape:
        raise ValueError(f"'re' shape {re.shape} does not match 'im' shape {im.shape}")
    factors = tuple(int(f) for f in obj.get("factors", [re.shape[0]]))
    if int(np.prod(factors)) != re.shape[0]:
        raise ValueError(f"factors {list(factors)} do not multiply to side {re.shape[0]}")
    return re + 1j * im, factors
