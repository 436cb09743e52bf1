"""Command-line front end.

Every command writes machine-readable output (CSV or JSON) to stdout or
``--out``. Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import bm, extremal, flux, verify
from .errors import BackflowError, ConvergenceFailure, NoInteriorMax
from .lattice import ChainParams, positive_momentum_window

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def to_json(obj: Any) -> str:
    """JSON with sorted keys and 17-significant-digit floats."""
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {to_json(obj[k])}" for k in sorted(obj))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite value {obj} in output")
        return fmt_float(obj)
    if isinstance(obj, np.integer):
        return str(int(obj))
    return json.dumps(obj)


def to_csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            fmt_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    return "\n".join(lines) + "\n"


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    out: Optional[Path] = None
    fmt: str = "json"

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        skip = {"command", "out", "format", "handler"}
        params = {k: v for k, v in vars(ns).items() if k not in skip}
        return cls(ns.command, params, Path(ns.out) if ns.out else None, ns.format)

    def chain(self) -> ChainParams:
        p = self.params
        n = p.get("n") if p.get("chain") == "ring" else None
        return ChainParams(epsilon=p.get("epsilon", 0.0), tau=p.get("tau", 1.0),
                           hbar=p.get("hbar", 1.0), n_sites=n)

    def emit(self, text: str) -> None:
        if not text.endswith("\n"):
            text += "\n"
        if self.out is None:
            sys.stdout.write(text)
        else:
            with open(self.out, "w", newline="\n") as fh:
                fh.write(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# ------------------------------------------------------------------ commands


def cmd_bounds(cfg: RunConfig) -> int:
    p = cfg.chain()
    b = extremal.bounds(p)
    w = b.window
    report = {
        "chain": "ring" if p.is_ring else "infinite",
        "epsilon": float(p.epsilon),
        "lambda_plus": b.lambda_plus,
        "lambda_minus": b.lambda_minus,
        "eta1": w.eta1 if p.is_ring else None,
        "eta2": w.eta2 if p.is_ring else None,
        "xi": p.xi,
    }
    if p.is_ring:
        report["n"] = p.n_sites
    if cfg.fmt == "csv":
        cfg.emit(to_csv(list(report), [list(report.values())]))
    else:
        cfg.emit(to_json(report))
    return EXIT_OK


def cmd_flux_series(cfg: RunConfig) -> int:
    a = cfg.params
    p = cfg.chain()
    sites = a["sites"] if a["sites"] is not None else [a["jprime"] - 1, a["jprime"], a["jprime"] + 1]
    if not sites:
        raise UsageError("site list is empty")
    if not a["t_max"] > a["t_min"] or a["t_steps"] < 2:
        raise UsageError("need t-max > t-min and t-steps >= 2")
    times = np.linspace(a["t_min"], a["t_max"], a["t_steps"])
    rule = None if p.is_ring else extremal.default_rule(p, a["nodes"])
    st = extremal.optimal_state(p, a["jprime"], a["tprime"], a["branch"], rule)
    cols = {j: np.atleast_1d(flux.general_flux(st, j, times)) for j in sites}
    rows = [(float(t), j, float(cols[j][i])) for i, t in enumerate(times) for j in sites]
    if cfg.fmt == "json":
        b = extremal.bounds(p)
        cfg.emit(to_json({"lambda_plus": b.lambda_plus, "lambda_minus": b.lambda_minus,
                          "rows": [{"t": t, "site": j, "flux": v} for t, j, v in rows]}))
    else:
        cfg.emit(to_csv(["t", "site", "flux"], rows))
    return EXIT_OK


def cmd_two_state(cfg: RunConfig) -> int:
    p = cfg.chain()
    if not p.is_ring:
        raise UsageError("two-state analysis needs --chain ring")
    res = flux.two_state_min(p, cfg.params["m1"], cfg.params["m2"])
    report = {"j_min": res.j_min, "theta_star": res.theta_star,
              "m1": cfg.params["m1"], "m2": cfg.params["m2"],
              "n": p.n_sites, "epsilon": float(p.epsilon)}
    if cfg.fmt == "csv":
        cfg.emit(to_csv(list(report), [list(report.values())]))
    else:
        cfg.emit(to_json(report))
    return EXIT_OK


def cmd_bm_curve(cfg: RunConfig) -> int:
    a = cfg.params
    p = cfg.chain()
    lo, hi = bm.default_nu_range(p)
    lo = a["nu_min"] if a["nu_min"] is not None else lo
    hi = a["nu_max"] if a["nu_max"] is not None else hi
    if not 0 < lo < hi:
        raise UsageError("need 0 < nu-min < nu-max")
    if a["nu_steps"] < 16:
        raise UsageError("nu-steps must be >= 16")
    if p.is_ring:
        f = lambda nu: bm.lambda_p_ring(p, nu).eigenvalue  # noqa: E731
    else:
        if a["nodes"] < 8:
            raise UsageError("nodes must be >= 8")
        rule = bm.bm_rule(p, a["nodes"])
        f = lambda nu: bm.lambda_p_infinite(p, nu, rule=rule).eigenvalue  # noqa: E731
    pk = bm.maximize_over_nu(f, lo, hi, a["nu_steps"], threads=a["threads"])
    peak = {"nu_star": pk.nu_star, "lambda_star": pk.lambda_star,
            "epsilon": float(p.epsilon), "chain": "ring" if p.is_ring else "infinite",
            "n": p.n_sites, "nodes": None if p.is_ring else a["nodes"]}
    if cfg.fmt == "json":
        peak["points"] = [{"nu": float(x), "lambda_p": float(y)} for x, y in zip(pk.grid, pk.values)]
        cfg.emit(to_json(peak))
        return EXIT_OK
    cfg.emit(to_csv(["nu", "lambda_p"], zip(map(float, pk.grid), map(float, pk.values))))
    if cfg.out is None:
        sys.stderr.write(to_json(peak) + "\n")
    else:
        sidecar_path(cfg.out).write_text(to_json(peak) + "\n")
    return EXIT_OK


def sidecar_path(out: Path) -> Path:
    return out.with_suffix(".peak.json")


def cmd_scaling(cfg: RunConfig) -> int:
    ns = cfg.params["n_list"]
    if len(ns) < 3:
        raise UsageError("scaling fit needs at least 3 ring sizes")
    try:
        study = bm.ring_scaling_study(ns, cfg.params["epsilon"], threads=cfg.params["threads"])
    except ValueError as exc:
        raise UsageError(str(exc))
    report = {"exponent_gap": study.exponent_gap, "exponent_nu": study.exponent_nu,
              "epsilon": float(cfg.params["epsilon"]), "c_cont": bm.C_CONT_RING,
              "table": [{"n": r.n, "c_tb": r.c_tb, "nu_star": r.nu_star} for r in study.table]}
    if cfg.fmt == "csv":
        cfg.emit(to_csv(["n", "c_tb", "nu_star"], [(r.n, r.c_tb, r.nu_star) for r in study.table]))
    else:
        cfg.emit(to_json(report))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    groups = cfg.params["filter"] or None
    try:
        results = verify.run_checks(groups, cfg.params["seed"])
    except ValueError as exc:
        raise UsageError(str(exc))
    table = verify.format_table(results)
    if cfg.out is not None:
        cfg.emit(table)
    print(table)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# ------------------------------------------------------------------ parser


def _add_chain(sp, *, chain="ring", epsilon=0.0, n=9):
    sp.add_argument("--chain", choices=("infinite", "ring"), default=chain)
    sp.add_argument("--n", type=int, default=n, help="ring size N")
    sp.add_argument("--epsilon", type=float, default=epsilon)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--hbar", type=float, default=1.0)


def _add_io(sp, fmt):
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default=fmt)
    sp.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tbbackflow",
                                 description="Backflow bounds for biased tight-binding chains.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bounds", help="extremal flux bounds lambda+-")
    _add_chain(sp)
    _add_io(sp, "json")
    sp.set_defaults(handler=cmd_bounds)

    sp = sub.add_parser("flux-series", help="flux of an optimal state versus time")
    _add_chain(sp, epsilon=1.0)
    sp.add_argument("--jprime", type=int, default=3)
    sp.add_argument("--tprime", type=float, default=3.0)
    sp.add_argument("--branch", choices=("plus", "minus"), default="minus")
    sp.add_argument("--sites", type=_int_list, default=None,
                    help="comma-separated sites (default j'-1, j', j'+1)")
    sp.add_argument("--t-min", type=float, default=0.0)
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--t-steps", type=int, default=1001)
    sp.add_argument("--nodes", type=int, default=200, help="quadrature nodes (infinite chain)")
    _add_io(sp, "csv")
    sp.set_defaults(handler=cmd_flux_series)

    sp = sub.add_parser("two-state", help="minimal flux of a two-mode superposition")
    _add_chain(sp, n=4)
    sp.add_argument("--m1", type=int, default=0)
    sp.add_argument("--m2", type=int, default=1)
    _add_io(sp, "json")
    sp.set_defaults(handler=cmd_two_state)

    sp = sub.add_parser("bm-curve", help="lambda_p versus nu and its peak")
    _add_chain(sp)
    sp.add_argument("--nu-min", type=float, default=None)
    sp.add_argument("--nu-max", type=float, default=None)
    sp.add_argument("--nu-steps", type=int, default=200)
    sp.add_argument("--nodes", type=int, default=bm.DEFAULT_NODES)
    _add_io(sp, "csv")
    sp.set_defaults(handler=cmd_bm_curve)

    sp = sub.add_parser("scaling", help="peak backflow versus ring size with power-law fits")
    sp.add_argument("--n-list", type=_int_list, default=list(bm.DEFAULT_SCALING_NS))
    sp.add_argument("--epsilon", type=float, default=0.0)
    _add_io(sp, "json")
    sp.set_defaults(handler=cmd_scaling)

    sp = sub.add_parser("verify", help="run the invariant suite")
    sp.add_argument("--filter", action="append", default=[],
                    choices=sorted(verify.GROUPS), help="run only this group (repeatable)")
    sp.add_argument("--seed", type=lambda s: int(s, 0), default=verify.DEFAULT_SEED)
    _add_io(sp, "csv")
    sp.set_defaults(handler=cmd_verify)
    return ap


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(to_json({"error": kind, "message": message}) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig.from_namespace(ns)
    try:
        if cfg.params.get("threads", 1) < 1:
            raise UsageError("threads must be >= 1")
        return ns.handler(cfg)
    except UsageError as exc:
        return _fail("UsageError", str(exc), EXIT_USAGE)
    except (ConvergenceFailure, NoInteriorMax) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERIC)
    except (BackflowError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_USAGE)
    except ArithmeticError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERIC)


if __name__ == "__main__":
    sys.exit(main())
