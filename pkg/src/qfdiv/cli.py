"""``qfdiv`` command line: compute, verify, recover, falsify.

Exit codes: 0 when the outcome is the expected one, 1 when it is not, 2 on
usage errors and unreadable or invalid input.  ``--format json`` prints a
report whose bytes depend only on the arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import divergence as dv
from . import preserver as pv
from .errors import NotAConjugationError, QfdivError
from .extreal import ExtendedReal
from .generator import GeneratorFunction, parse_generator
from .matrix_io import MatrixFormatError, load_matrix, matrix_to_dict

SEED_MAX = 2**64 - 1
ROUTES = {
    "spectral": dv.divergence_spectral,
    "superop": dv.divergence_superoperator,
    "limit": None,
}
RECOVER_ACTION_TOL = 1e-8


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    generator: GeneratorFunction | None = None
    a_path: str | None = None
    b_path: str | None = None
    route: str = "spectral"
    breakdown: bool = False
    transform: str | None = None
    dim: int | None = None
    seed: int = pv.DEFAULT_SEED
    trials: int = 100
    tol: float = 1e-9
    budget: int = 1000
    threshold: float = 1e-3
    workers: int = 1
    output: str = "text"


def _num(x):
    if isinstance(x, ExtendedReal):
        if x.is_inf:
            return "inf"
        x = x.value
    x = float(x)
    if math.isinf(x) and x > 0:
        return "inf"
    return float(f"{x:.12g}")


def _seed(text: str) -> int:
    try:
        s = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= s <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return s


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=pv.DEFAULT_SEED,
                        help=f"RNG seed (default {pv.DEFAULT_SEED})")
    common.add_argument("--format", dest="output", choices=("text", "json"), default="text")

    p = argparse.ArgumentParser(prog="qfdiv", description="Quantum f-divergences and their preservers.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="evaluate S_f(A || B) from two JSON matrices")
    c.add_argument("--f", required=True, help="generator label")
    c.add_argument("--a", required=True, dest="a_path")
    c.add_argument("--b", required=True, dest="b_path")
    c.add_argument("--route", choices=tuple(ROUTES), default="spectral")
    c.add_argument("--breakdown", action="store_true", help="print per-term CSV (spectral route)")

    v = sub.add_parser("verify", parents=[common], help="check that a map preserves S_f")
    v.add_argument("--f", required=True)
    v.add_argument("--transform", required=True)
    v.add_argument("--dim", type=_positive_int, required=True)
    v.add_argument("--trials", type=_positive_int, default=100)
    v.add_argument("--tol", type=_positive_float, default=1e-9)
    v.add_argument("--workers", type=_positive_int, default=1)

    r = sub.add_parser("recover", parents=[common], help="reconstruct U from a conjugation")
    r.add_argument("--phi", required=True, dest="transform")
    r.add_argument("--dim", type=_positive_int, required=True)

    fz = sub.add_parser("falsify", parents=[common], help="search for a pair whose divergence changes")
    fz.add_argument("--f", required=True)
    fz.add_argument("--transform", required=True)
    fz.add_argument("--dim", type=_positive_int, required=True)
    fz.add_argument("--budget", type=_positive_int, default=1000)
    fz.add_argument("--threshold", type=_positive_float, default=1e-3)
    fz.add_argument("--workers", type=_positive_int, default=1)
    return p


def parse_args(argv=None) -> RunConfig:
    """Parse ``argv``; exits with status 2 and a message on bad usage."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig(command=ns.command, seed=ns.seed, output=ns.output)
    try:
        if hasattr(ns, "f"):
            cfg.generator = parse_generator(ns.f)
        if ns.command == "compute":
            cfg.a_path, cfg.b_path = ns.a_path, ns.b_path
            cfg.route, cfg.breakdown = ns.route, ns.breakdown
            if cfg.breakdown and cfg.route != "spectral":
                raise UsageError("--breakdown is only available with --route spectral")
        else:
            cfg.transform, cfg.dim = ns.transform, ns.dim
            pv.transform_from_label(cfg.transform, cfg.dim)
        if ns.command == "verify":
            cfg.trials, cfg.tol, cfg.workers = ns.trials, ns.tol, ns.workers
        if ns.command == "falsify":
            cfg.budget, cfg.threshold, cfg.workers = ns.budget, ns.threshold, ns.workers
    except (QfdivError, UsageError) as exc:
        parser.error(str(exc))
    return cfg


# -- commands ----------------------------------------------------------------


def _base(cfg: RunConfig) -> dict:
    rep = {"command": cfg.command, "seed": cfg.seed}
    if cfg.generator is not None:
        rep["generator"] = {k: _num(v) if isinstance(v, float) else v for k, v in cfg.generator.describe().items()}
    return rep


def _compute(cfg: RunConfig) -> tuple[int, dict]:
    A = load_matrix(cfg.a_path)
    B = load_matrix(cfg.b_path)
    rep = _base(cfg)
    if cfg.route == "limit":
        res, lim = dv.divergence_limit(A, B, cfg.generator)
        rep["limit"] = {"verdict": lim.verdict, "method": lim.method,
                        "schedule": [_num(e) for e in lim.schedule], "values": [_num(x) for x in lim.values]}
    else:
        res = ROUTES[cfg.route](A, B, cfg.generator, **({"breakdown": True} if cfg.breakdown else {}))
    rep["value"] = _num(res.value)
    rep["route"] = res.route
    rep["support_violated"] = res.support_violated
    if cfg.breakdown:
        rep["terms"] = [{"a": _num(t.a), "b": _num(t.b), "weight": _num(t.weight),
                         "contribution": _num(t.contribution)} for t in res.terms]
    return 0, rep


def _preserving(T) -> bool:
    # transpose is the antiunitary conjugation with U = I
    return T.is_conjugation or T.name == "transpose"


def _verify(cfg: RunConfig) -> tuple[int, dict]:
    T = pv.transform_from_label(cfg.transform, cfg.dim)
    r = pv.check_preservation(T, cfg.generator, cfg.dim, cfg.trials, cfg.seed, cfg.tol, cfg.workers)
    rep = _base(cfg)
    rep.update({
        "transform": cfg.transform, "dim": cfg.dim, "trials": r.trials, "tol": _num(r.tol),
        "deviation": _num(r.max_scaled_deviation),
        "max_abs_deviation": _num(r.max_abs_deviation),
        "infinite_mismatches": r.infinite_mismatches,
        "residuals": {"trace": _num(r.max_trace_deviation)},
        "worst_trial": None if r.worst_pair is None else {"trial": r.worst_pair[0], "category": r.worst_pair[1]},
        "preserved": r.passed,
    })
    return (0 if r.passed == _preserving(T) else 1), rep


def _falsify(cfg: RunConfig) -> tuple[int, dict]:
    T = pv.transform_from_label(cfg.transform, cfg.dim)
    w = pv.falsify(T, cfg.generator, cfg.dim, cfg.budget, cfg.threshold, cfg.seed, cfg.workers)
    rep = _base(cfg)
    rep.update({"transform": cfg.transform, "dim": cfg.dim, "budget": cfg.budget,
                "threshold": _num(cfg.threshold)})
    if w is None:
        rep["witness"] = None
    else:
        rep["witness"] = {
            "trial": w.trial, "category": w.category,
            "before": _num(w.before), "after": _num(w.after), "deviation": _num(w.deviation),
            "A": _rounded(matrix_to_dict(w.A)), "B": _rounded(matrix_to_dict(w.B)),
        }
    found = w is not None
    return (0 if found != _preserving(T) else 1), rep


def _rounded(d: dict) -> dict:
    for key in ("re", "im"):
        if key in d:
            d[key] = [[_num(x) for x in row] for row in d[key]]
    return d


def _recover(cfg: RunConfig) -> tuple[int, dict]:
    T = pv.transform_from_label(cfg.transform, cfg.dim)
    rep = _base(cfg)
    rep.update({"phi": cfg.transform, "dim": cfg.dim})
    if T.is_conjugation:
        expected_kind, U_true = T.kind, T.U
    elif T.name == "transpose":
        expected_kind, U_true = "antiunitary", np.eye(cfg.dim)
    else:
        expected_kind, U_true = None, None
    try:
        r = pv.recover_operator(lambda X: pv.apply(T, X), cfg.dim, seed=cfg.seed)
    except NotAConjugationError as exc:
        rep["error"] = str(exc)
        return (0 if expected_kind is None else 1), rep
    rep["kind"] = r.kind_hat
    rep["residuals"] = {"unitarity": _num(r.unitarity_residual), "action": _num(r.action_residual),
                        "phase_aligned_distance": _num(pv.phase_aligned_distance(r.U_hat, U_true))
                        if U_true is not None else None}
    rep["U_hat"] = _rounded(matrix_to_dict(r.U_hat))
    ok = r.kind_hat == expected_kind and r.action_residual <= RECOVER_ACTION_TOL
    return (0 if ok else 1), rep


COMMANDS = {"compute": _compute, "verify": _verify, "falsify": _falsify, "recover": _recover}


# -- output --------------------------------------------------------------------


def _terms_csv(terms) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "weight", "contribution"])
    for t in terms:
        w.writerow([t["a"], t["b"], t["weight"], t["contribution"]])
    return buf.getvalue()


def _flat(value) -> str:
    if isinstance(value, dict):
        return ", ".join(f"{k}={_flat(v)}" for k, v in value.items())
    if isinstance(value, list):
        return json.dumps(value)
    if value is None:
        return "-"
    return str(value)


def render_text(rep: dict) -> str:
    lines = []
    if rep["command"] == "compute":
        lines.append(str(rep["value"]))
    width = max(len(k) for k in rep)
    for k, v in rep.items():
        if k in ("terms", "U_hat") or (k == "witness" and v):
            continue
        lines.append(f"{k:<{width}}  {_flat(v)}")
    if rep.get("witness"):
        w = rep["witness"]
        lines.append("witness:")
        for k in ("trial", "category", "before", "after", "deviation"):
            lines.append(f"  {k:<10}{w[k]}")
    if "U_hat" in rep:
        lines.append("U_hat:")
        U = np.array(rep["U_hat"]["re"]) + 1j * np.array(rep["U_hat"].get("im", 0.0))
        for row in U:
            lines.append("  " + "  ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row))
    text = "\n".join(lines) + "\n"
    if "terms" in rep:
        text += _terms_csv(rep["terms"])
    return text


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        code, rep = COMMANDS[cfg.command](cfg)
    except FileNotFoundError as exc:
        print(f"qfdiv: file not found: {exc.filename}", file=err)
        return 2
    except (MatrixFormatError, QfdivError) as exc:
        print(f"qfdiv: {type(exc).__name__}: {exc}", file=err)
        return 2
    if cfg.output == "json":
        out.write(json.dumps(rep, indent=2) + "\n")
    else:
        out.write(render_text(rep))
    return code


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
