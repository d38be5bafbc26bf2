"""Command-line entry point.

Exit status: 0 when every selected check passes, 1 when a check fails,
2 for usage, parse or validation errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import correlations as corr
from . import frames as fr
from . import protocols as proto
from . import quasiprob as qp
from . import suite
from .hilbert import Tolerance, operator_from_json, partial_transpose, projector

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

FRAME_ALIASES = {
    "kd": "kd",
    "phase-point": "phase-point",
    "matrix-unit": "matrix-unit",
    "projective": "projective",
    "sic2": "sic2",
    "sic": "sic2",
}


class UsageError(Exception):
    pass


# --- input ------------------------------------------------------------------


def load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def parse_state(obj, tol: Tolerance) -> np.ndarray:
    """Density matrix from operator JSON, or a pure state from ``{"re": [...], "im": [...]}`` vectors."""
    if not isinstance(obj, dict) or "re" not in obj:
        raise UsageError("state JSON needs an 're' field")
    re = np.asarray(obj["re"], dtype=float)
    if re.ndim == 1:
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if im.shape != re.shape:
            raise UsageError(f"'re' shape {re.shape} does not match 'im' shape {im.shape}")
        psi = re + 1j * im
        norm = np.linalg.norm(psi)
        if abs(norm - 1) > tol.absolute:
            raise UsageError(f"state vector norm is {norm:.6g}, expected 1")
        rho = projector(psi)
    else:
        try:
            rho, _ = operator_from_json(obj)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    problems = state_violations(rho, tol)
    if problems:
        raise UsageError("non-physical state: " + "; ".join(problems))
    return rho


def state_violations(rho: np.ndarray, tol: Tolerance) -> list[str]:
    problems = []
    defect = float(np.max(np.abs(rho - rho.conj().T)))
    if defect > tol.absolute:
        problems.append(f"not Hermitian (defect {defect:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol.absolute:
        problems.append(f"trace {tr.real:.6g} != 1")
    lo = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if lo < -tol.absolute:
        problems.append(f"negative eigenvalue {lo:.3e}")
    return problems


def default_tol() -> float:
    env = os.environ.get("OPFRAME_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            raise UsageError(f"OPFRAME_TOL must be a number, got {env!r}") from None
    return Tolerance().absolute


def frame_for(name: str, dim: int) -> fr.OperatorFrame:
    key = FRAME_ALIASES.get(name)
    if key is None:
        raise UsageError(f"unknown frame {name!r}; choose from {', '.join(sorted(FRAME_ALIASES))}")
    try:
        return fr.builtin_frame(key, dim)
    except fr.FrameError as exc:
        raise UsageError(str(exc)) from None


# --- output -----------------------------------------------------------------


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v} in report")
        return v
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(x.real), _clean(x.imag)]
    return x


def report(command: str, parameters: dict, results: dict, tol: Tolerance,
           seed: int | None, started: float) -> dict:
    return _clean({
        "command": command,
        "parameters": parameters,
        "results": results,
        "tolerance_used": asdict(tol),
        "seed": seed,
        "wall_time_ms": int((time.perf_counter() - started) * 1000),
    })


def emit(rep: dict, out: str | None):
    text = json.dumps(rep, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


# --- commands ---------------------------------------------------------------


def cmd_verify(args, tol, started):
    dims = tuple(int(x) for x in args.dims.split(",")) if args.dims else (2, 3)
    try:
        result = suite.run_suite(args.selector, dims=dims, tol=tol, seed=args.seed or 0,
                                 frame=args.frame, dim=args.dim)
    except suite.UnknownSelector:
        raise UsageError(f"unknown selector {args.selector!r}; valid: {', '.join(suite.selectors())}") from None
    except fr.FrameError as exc:
        raise UsageError(str(exc)) from None
    params = {"selector": args.selector, "dims": list(dims), "frame": args.frame, "dim": args.dim}
    emit(report("verify", params, result, tol, args.seed, started), args.out)
    return EXIT_OK if result["passed"] else EXIT_FAIL


def describe_frame(frame: fr.OperatorFrame, tol: Tolerance) -> dict:
    rep = fr.check_conditions(frame, tol)
    neg = qp.reconstruction_negativity(frame, tol)
    return {
        "frame": frame.name,
        "dim": frame.dim,
        "size": frame.size,
        "flavor": frame.flavor,
        "index_scheme": frame.index_scheme,
        "has_weights": frame.weights is not None,
        "gram_condition": frame.gram_condition,
        "conditions": rep.to_dict(),
        "dual_min_eigenvalue": None if neg.index is None else neg.min_eigenvalue,
        "non_hermitian_duals": len(neg.non_hermitian),
        "certificate": fr.no_go_certificate(frame, tol).to_dict(),
    }


def describe_state(rho: np.ndarray) -> dict:
    vals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[::-1]
    return {
        "dim": rho.shape[0],
        "trace": float(np.trace(rho).real),
        "purity": float(np.trace(rho @ rho).real),
        "spectrum": [float(v) for v in vals],
    }


def cmd_describe(args, tol, started):
    if args.entity == "frame":
        if not args.builtin:
            raise UsageError("describe frame needs --builtin")
        results = describe_frame(frame_for(args.builtin, args.dim or 2), tol)
    elif args.entity == "state":
        if not args.file:
            raise UsageError("describe state needs --file")
        results = describe_state(parse_state(load_json(args.file), tol))
    else:
        if not args.file:
            raise UsageError("describe report needs --file")
        obj = load_json(args.file)
        if not isinstance(obj, dict) or "command" not in obj:
            raise UsageError("not a run report: missing 'command'")
        results = {"command": obj["command"], "keys": sorted(obj.get("results", {}))}
    emit(report(f"describe {args.entity}", {"builtin": args.builtin, "file": args.file, "dim": args.dim},
                results, tol, None, started), args.out)
    return EXIT_OK


def cmd_frame_describe(args, tol, started):
    results = describe_frame(frame_for(args.name, args.dim), tol)
    emit(report("frame describe", {"name": args.name, "dim": args.dim}, results, tol, None, started), args.out)
    return EXIT_OK


def _state_arg(args, tol) -> np.ndarray:
    rho = parse_state(load_json(args.state), tol)
    if args.dim is not None and rho.shape[0] != args.dim:
        raise UsageError(f"state has dimension {rho.shape[0]}, --dim says {args.dim}")
    return rho


def cmd_qp_dist(args, tol, started):
    rho = _state_arg(args, tol)
    frame = frame_for(args.frame, rho.shape[0])
    q = qp.quasi_distribution(frame, rho)
    neg_real, imag = qp.negativity_parts(q)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "re", "im"])
            for label, v in zip(frame.labels, q.values):
                lab = ";".join(map(str, label)) if isinstance(label, tuple) else str(label)
                w.writerow([lab, repr(float(v.real)), repr(float(v.imag))])
    results = {
        "labels": [list(l) if isinstance(l, tuple) else l for l in frame.labels],
        "values": [[float(v.real), float(v.imag)] for v in q.values],
        "total": [q.total.real, q.total.imag],
        "negativity": neg_real + imag,
        "negative_real_part": neg_real,
        "imaginary_part": imag,
    }
    if frame.name == "kd":
        a, b = qp.marginals_kd(q)
        results["marginals"] = {"over_a": a.tolist(), "over_b": b.tolist()}
    emit(report("qp dist", {"frame": args.frame, "dim": rho.shape[0], "state": args.state},
                results, tol, None, started), None)
    return EXIT_OK


def cmd_qp_tomo(args, tol, started):
    rho = _state_arg(args, tol)
    frame = frame_for(args.frame, rho.shape[0])
    try:
        run = qp.simulate_tomography(frame, rho, args.shots, seed=args.seed)
    except fr.FrameError as exc:
        raise UsageError(str(exc)) from None
    emit(report("qp tomo", {"frame": args.frame, "shots": args.shots, "state": args.state},
                run.to_dict(), tol, args.seed, started), args.out)
    return EXIT_OK


def cmd_corr_swap(args, tol, started):
    frame = frame_for(args.frame, args.dim)
    rep = corr.verify_swap_identity(frame, tol)
    results = rep.to_dict()
    passed = rep.passed[0]
    if frame.flavor == "povm" and rep.residual is not None:
        fill = corr.verify_fill_identity(frame, tol)
        results = fill.to_dict()
        passed = all(fill.passed)
    emit(report("corr swap-check", {"frame": args.frame, "dim": args.dim}, results, tol, None, started), args.out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_corr_pt(args, tol, started):
    d = args.dim
    residual = corr.verify_pt_swap(d)
    pt = partial_transpose(projector(corr.max_entangled(d)))
    lo = float(np.linalg.eigvalsh(pt)[0])
    passed = residual <= tol.absolute and abs(lo + 1 / d) <= tol.absolute
    results = {"residual": residual, "min_eigenvalue": lo, "expected_min": -1 / d, "passed": passed}
    emit(report("corr pt-check", {"dim": d}, results, tol, None, started), args.out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_proto_teleport(args, tol, started):
    rho = _state_arg(args, tol)
    d = rho.shape[0]
    if args.all_outcomes:
        outcomes = proto.teleport_all(rho)
    elif args.sample:
        rng = np.random.default_rng(args.seed)
        labels = proto.bell_labels(d)
        probs = [proto.conditional_remote_by_projection(rho, m)[1] for m in labels]
        pick = qp.sample_counts(probs, 1, rng).argmax()
        outcomes = [proto.teleport(rho, labels[pick])]
    else:
        try:
            m = tuple(int(x) for x in (args.outcome or "0,0").split(","))
            outcomes = [proto.teleport(rho, m)]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    total = sum(o.probability for o in outcomes)
    worst = max(abs(o.fidelity_after_correction - 1) for o in outcomes)
    passed = worst <= tol.absolute
    results = {"outcomes": [o.to_dict() for o in outcomes], "probability_total": total,
               "worst_fidelity_error": worst, "passed": passed}
    emit(report("proto teleport", {"dim": d, "state": args.state, "all_outcomes": args.all_outcomes,
                                   "outcome": args.outcome, "sample": args.sample},
                results, tol, args.seed, started), args.out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_proto_clone(args, tol, started):
    rho = _state_arg(args, tol)
    frame = frame_for(args.frame, rho.shape[0]) if args.frame else None
    rep = proto.clone_report(rho, frame, tol)
    results = rep.to_dict()
    d = rho.shape[0]
    if rep.clone_fidelity is not None:
        results["optimal_fidelity"] = (d + 3) / (2 * (d + 1))
    emit(report("proto clone", {"dim": d, "state": args.state, "frame": args.frame},
                results, tol, None, started), args.out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="absolute tolerance (env OPFRAME_TOL)")
    common.add_argument("--out", default=None, help="write the output to this path")
    common.add_argument("--seed", type=int, default=None)

    p = argparse.ArgumentParser(prog="opframe", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run identity checks")
    v.add_argument("selector", help="all, a module name, or an equation tag")
    v.add_argument("--dims", default=None, help="comma-separated dimensions (default 2,3)")
    v.add_argument("--dim", type=int, default=None)
    v.add_argument("--frame", default=None)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("describe", parents=[common], help="describe a frame, state or report")
    d.add_argument("entity", choices=["frame", "state", "report"])
    d.add_argument("--builtin", default=None)
    d.add_argument("--file", default=None)
    d.add_argument("--dim", type=int, default=None)
    d.set_defaults(func=cmd_describe)

    f = sub.add_parser("frame", help="frame utilities")
    fsub = f.add_subparsers(dest="action", required=True)
    fd = fsub.add_parser("describe", parents=[common])
    fd.add_argument("--name", required=True)
    fd.add_argument("--dim", type=int, default=2)
    fd.set_defaults(func=cmd_frame_describe)

    q = sub.add_parser("qp", help="quasi-probabilities and tomography")
    qsub = q.add_subparsers(dest="action", required=True)
    qd = qsub.add_parser("dist", parents=[common])
    qd.add_argument("--frame", required=True)
    qd.add_argument("--dim", type=int, default=None)
    qd.add_argument("--state", required=True)
    qd.set_defaults(func=cmd_qp_dist)
    qt = qsub.add_parser("tomo", parents=[common])
    qt.add_argument("--frame", default="sic2")
    qt.add_argument("--dim", type=int, default=None)
    qt.add_argument("--state", required=True)
    qt.add_argument("--shots", type=int, required=True)
    qt.set_defaults(func=cmd_qp_tomo)

    c = sub.add_parser("corr", help="swap and partial-transpose identities")
    csub = c.add_subparsers(dest="action", required=True)
    cs = csub.add_parser("swap-check", parents=[common])
    cs.add_argument("--frame", required=True)
    cs.add_argument("--dim", type=int, default=2)
    cs.set_defaults(func=cmd_corr_swap)
    cp = csub.add_parser("pt-check", parents=[common])
    cp.add_argument("--dim", type=int, required=True)
    cp.set_defaults(func=cmd_corr_pt)

    pr = sub.add_parser("proto", help="teleportation and cloning")
    psub = pr.add_subparsers(dest="action", required=True)
    pt = psub.add_parser("teleport", parents=[common])
    pt.add_argument("--dim", type=int, default=None)
    pt.add_argument("--state", required=True)
    pt.add_argument("--all-outcomes", action="store_true")
    pt.add_argument("--outcome", default=None, help="q,p")
    pt.add_argument("--sample", action="store_true", help="draw one outcome with --seed")
    pt.set_defaults(func=cmd_proto_teleport)
    pc = psub.add_parser("clone", parents=[common])
    pc.add_argument("--dim", type=int, default=None)
    pc.add_argument("--state", required=True)
    pc.add_argument("--frame", default=None)
    pc.set_defaults(func=cmd_proto_clone)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        tol = Tolerance(absolute=args.tol if args.tol is not None else default_tol())
        return args.func(args, tol, started)
    except UsageError as exc:
        print(f"opframe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
