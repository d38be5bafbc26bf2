"""Operator frames, their duals, and the positivity/orthogonality/completeness checks.

A frame is an indexed family of ``d x d`` operators ``Lambda(i)``. Its dual
family ``R(i)`` satisfies ``Tr(Lambda(i) R(j)) = delta_ij`` on the span, so
that any operator in the span expands as ``X = sum_i Tr(Lambda(i) X) R(i)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any

import numpy as np

from .hilbert import (
    DEFAULT_TOL,
    Tolerance,
    computational_basis,
    fourier_basis,
    hermiticity_defect,
    operator_from_json,
    operator_to_json,
    weyl_operator,
)

FLAVORS = ("orthogonal_basis", "quasi_probability", "povm", "general")
INDEX_SCHEMES = ("single", "pair", "phase_point")

# relative singular-value cutoff for the pseudo-inverse and for rank decisions
PINV_RCOND = 1e-12


class FrameError(ValueError):
    """A frame cannot be built or used as requested."""


class IncompleteFrameError(FrameError):
    def __init__(self, rank: int, target: int, what: str = "operation"):
        super().__init__(f"{what} needs a complete frame: span rank {rank} < {target}")
        self.rank = rank
        self.target = target


class NoGoViolation(RuntimeError):
    """All three conditions reported true; this signals a numerical bug."""


@dataclass(frozen=True, eq=False)
class OperatorFrame:
    """Indexed operator family with optional duals and orthogonality weights.

    ``elements`` and ``duals`` are stacked as arrays of shape ``(m, d, d)``.
    ``weights`` is only present when ``Lambda(i) = weights[i] * R(i)^dagger``
    holds for every ``i``.
    """

    name: str
    dim: int
    elements: np.ndarray
    labels: tuple
    index_scheme: str = "single"
    flavor: str = "general"
    duals: np.ndarray | None = None
    weights: np.ndarray | None = None
    gram_condition: float | None = None
    rank: int | None = None

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=complex)
        if els.ndim != 3 or els.shape[1:] != (self.dim, self.dim):
            raise FrameError(f"elements must have shape (m, {self.dim}, {self.dim}), got {els.shape}")
        if len(self.labels) != els.shape[0]:
            raise FrameError("one label per element required")
        if self.flavor not in FLAVORS:
            raise FrameError(f"unknown flavor {self.flavor!r}")
        if self.index_scheme not in INDEX_SCHEMES:
            raise FrameError(f"unknown index scheme {self.index_scheme!r}")
        if self.duals is not None and np.shape(self.duals) != els.shape:
            raise FrameError("duals must match elements in shape")
        els.setflags(write=False)
        object.__setattr__(self, "elements", els)
        if self.duals is not None:
            duals = np.asarray(self.duals, dtype=complex)
            duals.setflags(write=False)
            object.__setattr__(self, "duals", duals)

    def __len__(self):
        return self.elements.shape[0]

    @property
    def size(self) -> int:
        return self.elements.shape[0]

    def index_of(self, label) -> int:
        try:
            return self.labels.index(tuple(label) if isinstance(label, (list, tuple)) else label)
        except ValueError:
            raise FrameError(f"label {label!r} not in frame {self.name}") from None

    def shifted_index(self, i: int, shift) -> int:
        """Index of ``label(i) + shift`` under phase-space addition mod d."""
        if self.index_scheme != "phase_point":
            raise FrameError("index arithmetic is only defined for phase-point frames")
        q, p = self.labels[i]
        dq, dp = shift
        return self.index_of(((q + dq) % self.dim, (p + dp) % self.dim))

    def with_duals(self) -> "OperatorFrame":
        return self if self.duals is not None else dual_frame(self)


def _check_orthonormal(basis, tol: Tolerance, what: str = "basis") -> np.ndarray:
    b = np.column_stack([np.asarray(v, dtype=complex).ravel() for v in basis])
    d = b.shape[0]
    if b.shape[1] != d:
        raise FrameError(f"{what} needs {d} vectors, got {b.shape[1]}")
    defect = float(np.max(np.abs(b.conj().T @ b - np.eye(d))))
    if defect > tol.absolute:
        raise FrameError(f"{what} is not orthonormal (max Gram deviation {defect:.3e})")
    return b


# --- constructions ----------------------------------------------------------


def projective_frame(basis=None, dim: int | None = None, tol: Tolerance = DEFAULT_TOL) -> OperatorFrame:
    """Rank-one projectors onto an orthonormal basis (computational by default)."""
    if basis is None:
        if dim is None:
            raise FrameError("give either a basis or a dimension")
        basis = computational_basis(dim)
    b = _check_orthonormal(basis, tol)
    d = b.shape[0]
    elements = np.stack([np.outer(b[:, n], b[:, n].conj()) for n in range(d)])
    return OperatorFrame(
        name="projective",
        dim=d,
        elements=elements,
        labels=tuple(range(d)),
        index_scheme="single",
        flavor="povm",
        duals=elements.copy(),
        weights=np.ones(d, dtype=complex),
        rank=d,
    )


def matrix_unit_frame(d: int) -> OperatorFrame:
    """All ``|n><n'|``; the dual of ``|n><n'|`` is ``|n'><n|``."""
    labels = tuple((n, k) for n in range(d) for k in range(d))
    elements = np.zeros((d * d, d, d), dtype=complex)
    for i, (n, k) in enumerate(labels):
        elements[i, n, k] = 1.0
    duals = elements.transpose(0, 2, 1).copy()
    return OperatorFrame(
        name="matrix-unit",
        dim=d,
        elements=elements,
        labels=labels,
        index_scheme="pair",
        flavor="orthogonal_basis",
        duals=duals,
        weights=np.ones(d * d, dtype=complex),
        gram_condition=1.0,
        rank=d * d,
    )


def kd_frame(basis_a=None, basis_b=None, dim: int | None = None,
             tol: Tolerance = DEFAULT_TOL) -> OperatorFrame:
    """Kirkwood-Dirac frame ``Lambda(a, b) = |b><b|a><a|``.

    Defaults to the computational basis paired with the Fourier basis. Duals
    use the closed form ``Lambda^dagger / Tr(Lambda^dagger)``.
    """
    if basis_a is None or basis_b is None:
        if dim is None:
            raise FrameError("give both bases or a dimension")
        basis_a = computational_basis(dim) if basis_a is None else basis_a
        basis_b = fourier_basis(dim) if basis_b is None else basis_b
    a = _check_orthonormal(basis_a, tol, "basis_a")
    b = _check_orthonormal(basis_b, tol, "basis_b")
    d = a.shape[0]
    if b.shape[0] != d:
        raise FrameError("bases have different dimensions")
    overlaps = b.conj().T @ a  # overlaps[j, k] = <b_j|a_k>
    labels = tuple((k, j) for k in range(d) for j in range(d))
    elements, duals, weights = [], [], []
    for k, j in labels:
        if abs(overlaps[j, k]) <= tol.absolute:
            raise FrameError(f"<a={k}|b={j}> = 0: duals undefined for pair (a={k}, b={j})")
        lam = np.outer(b[:, j], a[:, k].conj()) * overlaps[j, k]
        adj = lam.conj().T
        elements.append(lam)
        duals.append(adj / np.trace(adj))
        weights.append(np.trace(adj))
    return OperatorFrame(
        name="kd",
        dim=d,
        elements=np.stack(elements),
        labels=labels,
        index_scheme="pair",
        flavor="quasi_probability",
        duals=np.stack(duals),
        weights=np.asarray(weights, dtype=complex),
        rank=d * d,
    )


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, int(n**0.5) + 1))


def parity_operator(d: int) -> np.ndarray:
    """``|n> -> |-n mod d>``."""
    p = np.zeros((d, d), dtype=complex)
    for n in range(d):
        p[(-n) % d, n] = 1.0
    return p


def phase_point_operators(d: int) -> np.ndarray:
    """Displaced parity operators ``A(q, p) = W(q, p) A(0, 0) W(q, p)^dagger``, indexed ``[q, p]``."""
    if d % 2 == 0 or not _is_prime(d):
        raise FrameError(f"phase-point frames need an odd prime dimension, got {d}")
    parity = parity_operator(d)
    ops = np.empty((d, d, d, d), dtype=complex)
    for q in range(d):
        for p in range(d):
            w = weyl_operator(d, q, p)
            ops[q, p] = w @ parity @ w.conj().T
    return ops


def phase_point_frame(d: int) -> OperatorFrame:
    """Discrete Wigner frame: elements ``A(q, p)/d``, duals ``A(q, p)``."""
    ops = phase_point_operators(d)
    labels = tuple((q, p) for q in range(d) for p in range(d))
    duals = np.stack([ops[q, p] for q, p in labels])
    return OperatorFrame(
        name="phase-point",
        dim=d,
        elements=duals / d,
        labels=labels,
        index_scheme="phase_point",
        flavor="quasi_probability",
        duals=duals,
        weights=np.full(d * d, 1.0 / d, dtype=complex),
        gram_condition=1.0,
        rank=d * d,
    )


_PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def tetrahedron_directions() -> np.ndarray:
    s = 2 * np.sqrt(2) / 3
    dirs = [(0.0, 0.0, 1.0)]
    for k in range(3):
        phi = 2 * np.pi * k / 3
        dirs.append((s * np.cos(phi), s * np.sin(phi), -1.0 / 3))
    return np.array(dirs)


def sic_frame_qubit() -> OperatorFrame:
    """Tetrahedral qubit POVM ``(I + n_i . sigma)/4``; duals via :func:`dual_frame`."""
    elements = np.stack(
        [(np.eye(2) + np.einsum("k,kab->ab", n, _PAULI)) / 4 for n in tetrahedron_directions()]
    )
    frame = OperatorFrame(
        name="sic2", dim=2, elements=elements, labels=tuple(range(4)),
        index_scheme="single", flavor="povm",
    )
    return dual_frame(frame)


def deformed_frame(base: OperatorFrame, seed) -> OperatorFrame:
    """Random invertible linear recombination ``Lambda'(i) = sum_j M_ij Lambda(j)``."""
    rng = np.random.default_rng(seed)
    m = base.size
    mix = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    elements = np.einsum("ij,jab->iab", mix, base.elements)
    frame = OperatorFrame(
        name=f"{base.name}-deformed", dim=base.dim, elements=elements,
        labels=base.labels, index_scheme=base.index_scheme, flavor="general",
    )
    return dual_frame(frame)


BUILTIN_FRAMES = ("projective", "matrix-unit", "kd", "phase-point", "sic2")


def builtin_frame(name: str, dim: int = 2) -> OperatorFrame:
    if name == "projective":
        return projective_frame(dim=dim)
    if name == "matrix-unit":
        return matrix_unit_frame(dim)
    if name == "kd":
        return kd_frame(dim=dim)
    if name == "phase-point":
        return phase_point_frame(dim)
    if name == "sic2":
        if dim != 2:
            raise FrameError("the SIC frame is only available for d = 2")
        return sic_frame_qubit()
    raise FrameError(f"unknown frame {name!r}; choose from {', '.join(BUILTIN_FRAMES)}")


# --- duals ------------------------------------------------------------------


def _element_rows(elements: np.ndarray) -> np.ndarray:
    # row i is vec(Lambda(i)); then Tr(Lambda(i) R) = row_i . vec(R^T)
    return elements.reshape(elements.shape[0], -1)


def span_rank(elements: np.ndarray) -> int:
    s = np.linalg.svd(_element_rows(np.asarray(elements, dtype=complex)), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > PINV_RCOND * s[0]))


def dual_frame(frame: OperatorFrame, tol: Tolerance = DEFAULT_TOL) -> OperatorFrame:
    """Canonical dual via the pseudo-inverse of the element matrix.

    For linearly independent elements the result is the unique biorthogonal
    set; for overcomplete frames spanning the full operator space it is the
    canonical (minimum-norm) dual. Weights are attached when every element is
    proportional to the adjoint of its dual.
    """
    m, d = frame.size, frame.dim
    rows = _element_rows(frame.elements)
    rank = span_rank(frame.elements)
    if rank < min(m, d * d):
        raise FrameError(f"elements are linearly dependent without spanning: rank {rank}")
    gram = rows @ rows.conj().T
    sv = np.linalg.svd(gram, compute_uv=False)
    kept = sv[sv > PINV_RCOND * sv[0]]
    cond = float(kept[0] / kept[-1])
    cols = np.linalg.pinv(rows, rcond=PINV_RCOND)  # (d*d, m); column j = vec(R_j^T)
    duals = cols.T.reshape(m, d, d).transpose(0, 2, 1)
    weights = _orthogonality_weights(frame.elements, duals, tol)
    return dataclasses.replace(
        frame, duals=duals, weights=weights, gram_condition=cond, rank=rank
    )


def _orthogonality_weights(elements, duals, tol: Tolerance):
    weights = []
    for lam, r in zip(elements, duals):
        radj = r.conj().T
        norm2 = np.vdot(radj, radj).real
        w = np.vdot(radj, lam) / norm2
        if np.linalg.norm(lam - w * radj) > tol.absolute * max(1.0, np.linalg.norm(lam)):
            return None
        weights.append(w)
    return np.asarray(weights, dtype=complex)


# --- condition checks -------------------------------------------------------


@dataclass(frozen=True)
class ConditionReport:
    """Verdicts and raw witnesses for the three conditions."""

    positivity: bool
    orthogonality: bool
    completeness: bool
    min_eigenvalue: float
    min_eigenvalue_index: int
    max_hermiticity_defect: float
    max_overlap: float
    max_overlap_pair: tuple
    biorthogonality_defect: float
    rank: int
    target_rank: int

    @property
    def satisfied_count(self) -> int:
        return int(self.positivity) + int(self.orthogonality) + int(self.completeness)

    @property
    def verdicts(self) -> tuple[bool, bool, bool]:
        return (self.positivity, self.orthogonality, self.completeness)

    def to_dict(self) -> dict[str, Any]:
        return {
            "positivity": {
                "satisfied": self.positivity,
                "min_eigenvalue": self.min_eigenvalue,
                "index": self.min_eigenvalue_index,
                "max_hermiticity_defect": self.max_hermiticity_defect,
            },
            "orthogonality": {
                "satisfied": self.orthogonality,
                "max_overlap": self.max_overlap,
                "pair": list(self.max_overlap_pair),
                "biorthogonality_defect": self.biorthogonality_defect,
            },
            "completeness": {
                "satisfied": self.completeness,
                "rank": self.rank,
                "target": self.target_rank,
            },
            "satisfied_count": self.satisfied_count,
        }


def check_conditions(frame: OperatorFrame, tol: Tolerance = DEFAULT_TOL) -> ConditionReport:
    """Evaluate positivity, orthogonality and completeness of a frame.

    Positivity needs every element Hermitian with no eigenvalue below
    ``-tol.absolute``. Orthogonality needs vanishing Hilbert-Schmidt overlap
    ``Tr(Lambda(i) Lambda(j)^dagger)`` between distinct elements, which for a
    frame with duals is the same as ``Lambda(i)`` being proportional to
    ``R(i)^dagger``. Completeness needs the elements to span all ``d^2``
    operator dimensions.
    """
    frame = frame.with_duals()
    els = frame.elements
    m, d = frame.size, frame.dim

    defects = np.array([hermiticity_defect(e) for e in els])
    mins = np.array([np.linalg.eigvalsh(0.5 * (e + e.conj().T))[0] for e in els])
    imin = int(np.argmin(mins))
    positivity = bool(np.all(defects <= tol.absolute) and mins[imin] >= -tol.absolute)

    overlaps = np.abs(np.einsum("iab,jab->ij", els, els.conj()))
    np.fill_diagonal(overlaps, 0.0)
    if m > 1:
        pair = np.unravel_index(int(np.argmax(overlaps)), overlaps.shape)
        max_overlap = float(overlaps[pair])
    else:
        pair, max_overlap = (0, 0), 0.0
    orthogonality = max_overlap <= tol.absolute

    bio = np.einsum("iab,jba->ij", els, frame.duals)
    bio_defect = float(np.max(np.abs(bio - np.eye(m))))

    rank = frame.rank if frame.rank is not None else span_rank(els)
    return ConditionReport(
        positivity=positivity,
        orthogonality=bool(orthogonality),
        completeness=rank == d * d,
        min_eigenvalue=float(mins[imin]),
        min_eigenvalue_index=imin,
        max_hermiticity_defect=float(defects.max()),
        max_overlap=max_overlap,
        max_overlap_pair=(int(pair[0]), int(pair[1])),
        biorthogonality_defect=bio_defect,
        rank=int(rank),
        target_rank=d * d,
    )


@dataclass(frozen=True)
class NoGoCertificate:
    report: ConditionReport
    failed: tuple[str, ...]
    rank_deficit: int
    # (kind, index, value, eigenvector or None) showing a non-positive element or dual
    nonpositive_witness: tuple | None
    overlap_witness: tuple | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"failed": list(self.failed), "rank_deficit": self.rank_deficit}
        if self.nonpositive_witness is not None:
            kind, idx, value, vec = self.nonpositive_witness
            out["nonpositive_witness"] = {"kind": kind, "index": idx, "value": value}
            if vec is not None:
                out["nonpositive_witness"]["eigenvector"] = [[z.real, z.imag] for z in vec]
        if self.overlap_witness is not None:
            out["overlap_witness"] = {"pair": list(self.overlap_witness[0]),
                                      "overlap": self.overlap_witness[1]}
        return out


def _nonpositive_witness(frame: OperatorFrame, tol: Tolerance):
    candidates = []
    for kind, ops in (("element", frame.elements), ("dual", frame.duals)):
        for i, op in enumerate(ops):
            defect = hermiticity_defect(op)
            if defect > tol.absolute:
                return (f"non_hermitian_{kind}", i, defect, None)
            vals, vecs = np.linalg.eigh(0.5 * (op + op.conj().T))
            if vals[0] < -tol.absolute:
                candidates.append((f"negative_{kind}", i, float(vals[0]), vecs[:, 0]))
    if not candidates:
        return None
    return min(candidates, key=lambda c: c[2])


def no_go_certificate(frame: OperatorFrame, tol: Tolerance = DEFAULT_TOL) -> NoGoCertificate:
    """Exhibit why a frame cannot satisfy all three conditions at once.

    Complete frames always contain a non-Hermitian or non-positive element or
    dual, since ``sum_i R(i) ⊗ Lambda(i)`` equals the swap operator, which has
    eigenvalue ``-1``. Incomplete frames report their rank deficit.
    """
    frame = frame.with_duals()
    report = check_conditions(frame, tol)
    if report.satisfied_count == 3:
        raise NoGoViolation(
            f"frame {frame.name} reported positivity, orthogonality and completeness together"
        )
    names = ("positivity", "orthogonality", "completeness")
    failed = tuple(n for n, ok in zip(names, report.verdicts) if not ok)
    witness = _nonpositive_witness(frame, tol)
    overlap = None
    if not report.orthogonality:
        overlap = (report.max_overlap_pair, report.max_overlap)
    return NoGoCertificate(
        report=report,
        failed=failed,
        rank_deficit=report.target_rank - report.rank,
        nonpositive_witness=witness,
        overlap_witness=overlap,
    )


# --- serialization ----------------------------------------------------------


def frame_to_json(frame: OperatorFrame) -> dict[str, Any]:
    out: dict[str, Any] = {
        "name": frame.name,
        "dim": frame.dim,
        "index_scheme": frame.index_scheme,
        "flavor": frame.flavor,
        "labels": [list(l) if isinstance(l, tuple) else l for l in frame.labels],
        "elements": [operator_to_json(e) for e in frame.elements],
    }
    if frame.duals is not None:
        out["duals"] = [operator_to_json(r) for r in frame.duals]
    if frame.weights is not None:
        out["weights"] = [[w.real, w.imag] for w in frame.weights]
    return out


def frame_from_json(obj: dict[str, Any]) -> OperatorFrame:
    elements = np.stack([operator_from_json(e)[0] for e in obj["elements"]])
    labels = tuple(tuple(l) if isinstance(l, list) else l
                   for l in obj.get("labels", range(len(elements))))
    duals = None
    if "duals" in obj:
        duals = np.stack([operator_from_json(r)[0] for r in obj["duals"]])
    weights = None
    if "weights" in obj:
        weights = np.array([complex(re, im) for re, im in obj["weights"]])
    frame = OperatorFrame(
        name=obj.get("name", "custom"),
        dim=elements.shape[1],
        elements=elements,
        labels=labels,
        index_scheme=obj.get("index_scheme", "single"),
        flavor=obj.get("flavor", "general"),
        duals=duals,
        weights=weights,
    )
    return frame if duals is not None else dual_frame(frame)
