"""Named numerical checks of every identity, run by ``opframe verify``.

Each check returns a list of rows ``{"case", "residual", "passed"}``. ``tol``
only judges residuals; generated inputs are validated at the default
tolerance. Tags are grouped by module so a selector may name either a tag or
a module.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import correlations as corr
from . import frames as fr
from . import protocols as proto
from . import quasiprob as qp
from .hilbert import (
    Tolerance,
    frobenius_distance,
    haar_random_pure,
    partial_transpose,
    projector,
    random_density,
    random_effect,
    tensor,
    weyl_operator,
)


def _is_odd_prime(d: int) -> bool:
    return proto._is_odd_prime(d)


def complete_builtins(d: int) -> list[fr.OperatorFrame]:
    frames = [fr.matrix_unit_frame(d), fr.kd_frame(dim=d)]
    if _is_odd_prime(d):
        frames.append(fr.phase_point_frame(d))
    if d == 2:
        frames.append(fr.sic_frame_qubit())
    return frames


def all_builtins(d: int) -> list[fr.OperatorFrame]:
    return [fr.projective_frame(dim=d)] + complete_builtins(d)


def _row(case: str, residual: float, tol: Tolerance, passed: bool | None = None) -> dict:
    residual = float(residual)
    ok = residual <= tol.absolute if passed is None else passed
    return {"case": case, "residual": residual, "passed": bool(ok)}


def _fid(frame: fr.OperatorFrame) -> str:
    return f"{frame.name}/d={frame.dim}"


def check_hilbert(dims, tol, seed, **_):
    rows = []
    rng = np.random.default_rng(seed)
    for d in dims:
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        rows.append(_row(f"tensor-trace/d={d}", abs(np.trace(tensor(a, b)) - np.trace(a) * np.trace(b)), tol))
        worst = 0.0
        omega = np.exp(2j * np.pi / d)
        for q, p, q2, p2 in np.ndindex(d, d, d, d):
            lhs = weyl_operator(d, q, p) @ weyl_operator(d, q2, p2)
            rhs = omega ** (p * q2) * weyl_operator(d, q + q2, p + p2)
            worst = max(worst, frobenius_distance(lhs, rhs))
        rows.append(_row(f"weyl-composition/d={d}", worst, tol))
    return rows


def check_nogo(dims, tol, seed, **_):
    rows = []
    for d in dims:
        frames = all_builtins(d) + [fr.deformed_frame(fr.matrix_unit_frame(d), seed + k) for k in range(10)]
        for f in frames:
            count = fr.check_conditions(f, tol).satisfied_count
            rows.append({"case": _fid(f), "residual": float(count), "passed": count <= 2})
    return rows


def check_reconstruct(dims, tol, seed, **_):
    rows = []
    for d in dims:
        for f in complete_builtins(d):
            worst = 0.0
            for k in range(10):
                rho = projector(haar_random_pure(d, seed + k))
                est = qp.reconstruct_state(f, qp.quasi_distribution(f, rho))
                worst = max(worst, frobenius_distance(est, rho))
            rows.append(_row(_fid(f), worst, tol))
    return rows


def check_causality(dims, tol, seed, **_):
    rows = []
    for d in dims:
        for f in complete_builtins(d):
            worst = 0.0
            for k in range(10):
                rho = random_density(d, seed + 2 * k)
                e = random_effect(d, seed + 2 * k + 1)
                worst = max(worst, abs(qp.predict_probability(f, rho, e) - np.trace(e @ rho)))
            rows.append(_row(_fid(f), worst, tol))
    return rows


def check_kd_marginals(dims, tol, seed, **_):
    rows = []
    for d in dims:
        f = fr.kd_frame(dim=d)
        b = np.column_stack(fr.fourier_basis(d))
        worst = 0.0
        for k in range(10):
            rho = random_density(d, seed + k)
            over_a, over_b = qp.marginals_kd(qp.quasi_distribution(f, rho))
            born_a = np.diag(rho).real
            born_b = np.einsum("kb,kl,lb->b", b.conj(), rho, b).real
            worst = max(worst, np.max(np.abs(over_a - born_a)), np.max(np.abs(over_b - born_b)))
        rows.append(_row(f"kd/d={d}", worst, tol))
    return rows


def check_tomo_exact(dims, tol, seed, **_):
    f = fr.sic_frame_qubit()
    worst = 0.0
    for k in range(10):
        rho = random_density(2, seed + k)
        run = qp.simulate_tomography(f, rho, shots=1, exact=True)
        worst = max(worst, frobenius_distance(run.estimate, rho))
    neg = qp.reconstruction_negativity(f).min_eigenvalue
    return [_row("sic2/exact-inversion", worst, tol),
            {"case": "sic2/dual-min-eigenvalue", "residual": neg, "passed": neg < 0}]


def check_swap(dims, tol, seed, frame=None, dim=None, **_):
    if frame is not None:
        frames = [fr.builtin_frame(frame, dim if dim is not None else dims[0])]
    else:
        frames = [f for d in dims for f in complete_builtins(d)]
    rows = []
    for f in frames:
        rep = corr.verify_swap_identity(f, tol)
        if rep.residual is None:
            rows.append({"case": _fid(f), "residual": float(f.dim**2 - rep.rank), "passed": False})
        else:
            rows.append(_row(_fid(f), rep.residual, tol))
    return rows


def check_fill(dims, tol, seed, **_):
    rows = [_row("sic2", corr.verify_fill_identity(fr.sic_frame_qubit(), tol).fill_residual, tol)]
    for d in dims:
        sym = corr.symmetric_projector(d)
        rank = int(np.linalg.matrix_rank(sym))
        rows.append(_row(f"sym-idempotent/d={d}", frobenius_distance(sym @ sym, sym), tol,
                         passed=frobenius_distance(sym @ sym, sym) <= tol.absolute
                         and rank == d * (d + 1) // 2))
    return rows


def check_pt(dims, tol, seed, **_):
    rows = []
    for d in dims:
        rows.append(_row(f"pt-swap/d={d}", corr.verify_pt_swap(d), tol))
        pt = partial_transpose(projector(corr.max_entangled(d)))
        rows.append(_row(f"pt-min-eigenvalue/d={d}", abs(np.linalg.eigvalsh(pt)[0] + 1 / d), tol))
    return rows


def check_entangled(dims, tol, seed, **_):
    rows = []
    for d in dims:
        for f in complete_builtins(d):
            if f.weights is not None:
                rows.append(_row(_fid(f), corr.entangled_expansion(f), tol))
    return rows


def check_bellm(dims, tol, seed, **_):
    primes = [d for d in dims if _is_odd_prime(d)] or [3]
    rows = []
    for d in primes:
        rep = proto.verify_bellm_expansion(d)
        rows.append(_row(f"bell-match/d={d}", rep.worst_residual, tol))
        rows.append(_row(f"bell-completeness/d={d}", rep.completeness_residual, tol))
        rows.append(_row(f"bell-rank-one/d={d}", max(rep.max_second_eigenvalue, abs(1 - rep.min_top_eigenvalue)), tol))
    return rows


def check_teleport(dims, tol, seed, **_):
    rows = []
    for d in dims:
        fid_err, prob_err, frame_err = 0.0, 0.0, 0.0
        for k in range(5):
            for o in proto.teleport_all(projector(haar_random_pure(d, seed + k))):
                fid_err = max(fid_err, abs(o.fidelity_after_correction - 1))
                prob_err = max(prob_err, abs(o.probability - 1 / d**2))
                if o.frame_sum_residual is not None:
                    frame_err = max(frame_err, o.frame_sum_residual)
        rows.append(_row(f"fidelity/d={d}", fid_err, tol))
        rows.append(_row(f"uniform-outcomes/d={d}", prob_err, tol))
        if _is_odd_prime(d):
            rows.append(_row(f"frame-sum/d={d}", frame_err, tol))
    return rows


def check_clone(dims, tol, seed, **_):
    rows = []
    for d in dims:
        rho = projector(haar_random_pure(d, seed))
        rep = proto.clone_report(rho)
        rows.append(_row(f"marginal-fidelity/d={d}", abs(rep.clone_fidelity - (d + 3) / (2 * (d + 1))), tol))
        out = rep.output_pair
        u = corr.swap_operator(d)
        rows.append(_row(f"swap-symmetric/d={d}", frobenius_distance(u @ out @ u, out), tol))
        rows.append(_row(f"unit-trace/d={d}", abs(np.trace(out) - 1), tol))
    return rows


def check_ideal_copy(dims, tol, seed, **_):
    rows = []
    for d in dims:
        rho = random_density(d, seed)
        rep = proto.clone_report(rho)
        rows.append(_row(f"marginals/d={d}", rep.ideal_marginal_residual, tol))
        for f in complete_builtins(d):
            if f.weights is not None:
                rows.append(_row(f"expansion/{_fid(f)}", proto.ideal_copy_expansion(f, rho), tol))
    return rows


def check_discrepancy(dims, tol, seed, **_):
    rows = []
    for d in dims:
        rho = random_density(d, seed)
        for f in all_builtins(d):
            # Tr D_i = Tr(Lambda(i) rho) (1 - Tr R(i)); zero needs unit-trace duals
            tr = max(abs(np.trace(proto.discrepancy_state(f, i, rho))
                         - np.trace(f.elements[i] @ rho) * (1 - np.trace(f.duals[i])))
                     for i in range(f.size))
            rows.append(_row(f"trace/{_fid(f)}", tr, tol))
            zero = proto.all_discrepancies_zero(f, tol)
            expected = f.name == "projective"
            rows.append({"case": f"elements-zero/{_fid(f)}",
                         "residual": proto.max_element_discrepancy(f), "passed": zero == expected})
    return rows


def check_joint_ideal(dims, tol, seed, **_):
    rows = []
    for d in dims:
        for f in complete_builtins(d):
            worst = 0.0
            for k in range(10):
                e1 = random_effect(d, seed + 3 * k)
                e2 = random_effect(d, seed + 3 * k + 1)
                rho = random_density(d, seed + 3 * k + 2)
                fs, closed = proto.joint_ideal_statistics(e1, e2, rho, f)
                worst = max(worst, abs(fs - closed))
            rows.append(_row(_fid(f), worst, tol))
    return rows


CHECKS: dict[str, Callable] = {
    "eq-bellm": check_bellm,
    "eq-causality": check_causality,
    "eq-clone": check_clone,
    "eq-discrepancy": check_discrepancy,
    "eq-entangled-expansion": check_entangled,
    "eq-fill": check_fill,
    "eq-ideal-copy": check_ideal_copy,
    "eq-joint-ideal": check_joint_ideal,
    "eq-kd-marginals": check_kd_marginals,
    "eq-nogo": check_nogo,
    "eq-pt": check_pt,
    "eq-reconstruct": check_reconstruct,
    "eq-swap": check_swap,
    "eq-teleport": check_teleport,
    "eq-tomo": check_tomo_exact,
    "hilbert": check_hilbert,
}

MODULES = {
    "hilbert_core": ["hilbert"],
    "frames": ["eq-nogo"],
    "quasiprob": ["eq-causality", "eq-kd-marginals", "eq-reconstruct", "eq-tomo"],
    "correlations": ["eq-entangled-expansion", "eq-fill", "eq-pt", "eq-swap"],
    "protocols": ["eq-bellm", "eq-clone", "eq-discrepancy", "eq-ideal-copy",
                  "eq-joint-ideal", "eq-teleport"],
}


class UnknownSelector(KeyError):
    pass


def resolve(selector: str) -> list[str]:
    if selector == "all":
        return sorted(CHECKS)
    if selector in MODULES:
        return sorted(MODULES[selector])
    if selector in CHECKS:
        return [selector]
    raise UnknownSelector(selector)


def selectors() -> list[str]:
    return ["all"] + sorted(MODULES) + sorted(CHECKS)


def run_suite(selector: str, dims=(2, 3), tol: Tolerance = Tolerance(), seed: int = 0,
              frame: str | None = None, dim: int | None = None, workers: int = 4) -> dict:
    """Run the selected checks; the result is ordered by tag regardless of scheduling."""
    tags = resolve(selector)
    if dim is not None:
        dims = (dim,)
    kwargs = dict(dims=tuple(dims), tol=tol, seed=seed, frame=frame, dim=dim)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {tag: pool.submit(CHECKS[tag], **kwargs) for tag in tags}
        results = {tag: futures[tag].result() for tag in tags}
    checks = {tag: {"passed": all(r["passed"] for r in rows), "rows": rows}
              for tag, rows in sorted(results.items())}
    return {"checks": checks, "passed": all(c["passed"] for c in checks.values())}
