"""Command-line front end.

Exit codes: 0 Member / inequality holds, 1 NonMemberEvidence / violation,
2 usage error, 3 Inconclusive or a computation error (reported as a
structured error object).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .classes import Verdict, qb_constant
from .errors import HardyWeightsError, HypothesisViolated, NotMember
from .extrapolation import (HypothesisPanel, default_conclusion_panel,
                            default_hypothesis_panel, openended_epsilon, parse_phi,
                            random_quasi_pair, run_extrapolation_check)
from .lemmas import run_oracle_suite
from .operators import PsiWeight
from .sequences import TruncationPolicy, parse_weight
from .verifier import hardy_sandwich

COMMANDS = ("check-weight", "verify-hardy", "epsilon", "extrapolate", "oracle-suite")
DEFAULT_NMAX = 10 ** 5
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def default_horizon() -> int:
    raw = os.environ.get("HW_DEFAULT_NMAX")
    if raw is None:
        return DEFAULT_NMAX
    try:
        return int(float(raw))
    except ValueError:
        raise SystemExit(f"HW_DEFAULT_NMAX must be an integer, got {raw!r}")


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output_format: str = "json"
    horizon: int = DEFAULT_NMAX
    seed: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.horizon < 10:
            raise ValueError("horizon must be >= 10")
        if self.output_format not in ("json", "csv"):
            raise ValueError("format must be json or csv")

    def to_argv(self) -> list[str]:
        argv = [self.command]
        for key, val in self.parameters.items():
            flag = "--" + key.replace("_", "-")
            if val is None:
                continue
            if isinstance(val, list):
                if key == "eps_grid":
                    argv += [flag, ",".join(repr(float(v)) for v in val)]
                else:
                    for item in val:
                        argv += [flag, str(item)]
            else:
                argv += [flag, repr(val) if isinstance(val, float) else str(val)]
        argv += ["--n-max", str(self.horizon), "--format", self.output_format]
        if self.seed is not None:
            argv += ["--seed", str(self.seed)]
        return argv


def _positive(text: str) -> float:
    val = float(text)
    if not val > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return val


def _eps_grid(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon grid {text!r}")
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("epsilon grid needs positive values")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardyweights", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--n-max", type=int, default=None, help="truncation horizon")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("check-weight", help="QB_{beta,p} membership and constant bracket")
    p.add_argument("--weight", required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--p", type=_positive, required=True)
    common(p)

    p = sub.add_parser("verify-hardy", help="lower/upper constants of the generalized Hardy inequality")
    p.add_argument("--weight", required=True, help="the weight v")
    p.add_argument("--psi", default="power:alpha=0")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--p", type=_positive, required=True)
    common(p)

    p = sub.add_parser("epsilon", help="exponent drop preserving class membership")
    p.add_argument("--weight", required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--p", type=_positive, required=True)
    common(p)

    p = sub.add_parser("extrapolate", help="randomised end-to-end extrapolation run")
    p.add_argument("--p0", type=_positive, default=2.0)
    p.add_argument("--p", type=_positive, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--phi", default="id")
    p.add_argument("--eps-grid", type=_eps_grid, default=[0.25, 0.5, 0.75, 1.0])
    p.add_argument("--weight", action="append", default=None,
                   help="conclusion weight (repeatable); default panel otherwise")
    p.add_argument("--cases", type=int, default=100)
    common(p, seed=True)

    p = sub.add_parser("oracle-suite", help="randomised checks of the auxiliary inequalities")
    p.add_argument("--cases", type=int, default=1000)
    common(p, seed=True)
    return parser


def parse_args(argv: list[str] | None = None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    horizon = ns.n_max if ns.n_max is not None else default_horizon()
    if horizon < 10:
        parser.error(f"--n-max must be >= 10, got {horizon}")
    if getattr(ns, "cases", 1) < 1:
        parser.error("--cases must be >= 1")
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "n_max", "format", "seed")}
    for key in ("weight", "psi"):
        val = params.get(key)
        for text in (val if isinstance(val, list) else [val]):
            if text is None:
                continue
            try:
                parse_weight(text)
            except (ValueError, OSError, HardyWeightsError) as exc:
                parser.error(f"--{key}: {exc}")
    if "phi" in params:
        try:
            parse_phi(params["phi"])
        except (ValueError, OSError) as exc:
            parser.error(f"--phi: {exc}")
    if ns.command == "extrapolate" and not params["p"] >= params["p0"] >= 2:
        parser.error("--p and --p0 need p >= p0 >= 2")
    return RunConfig(ns.command, params, ns.format, horizon, getattr(ns, "seed", None))


# ----------------------------------------------------------------------
# execution
# ----------------------------------------------------------------------

def _verdict_exit(verdict: Verdict) -> int:
    return {Verdict.MEMBER: EXIT_OK, Verdict.NON_MEMBER: EXIT_VIOLATION,
            Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}[verdict]


def _check_weight(cfg: RunConfig, policy):
    P = cfg.parameters
    est = qb_constant(parse_weight(P["weight"]), P["beta"], P["p"], policy)
    report = est.to_dict("QB", P["beta"], P["p"])
    report["weight"] = P["weight"]
    rows = [("n", "ratio_lo", "ratio_hi")] + est.trace_rows()
    return _verdict_exit(est.verdict), report, rows


def _verify_hardy(cfg: RunConfig, policy):
    P = cfg.parameters
    v = parse_weight(P["weight"])
    psi = PsiWeight(parse_weight(P["psi"]))
    rep = hardy_sandwich(psi, v, P["beta"], P["p"], policy)
    report = rep.to_dict(P["beta"], P["p"])
    report.update(weight=P["weight"], psi=P["psi"])
    if rep.holds is True:
        code = EXIT_OK
    elif rep.holds is False or rep.condition.verdict is Verdict.NON_MEMBER:
        code = EXIT_VIOLATION
    else:
        code = EXIT_INCONCLUSIVE
    cond = rep.condition
    rows = [("n", "extremizer_ratio", "condition_lo", "condition_hi")]
    lo_trace = rep.lower.trace_lo
    for i in range(len(lo_trace)):
        rows.append((i + 1, float(lo_trace[i]), float(cond.trace_lo[i]), float(cond.trace_hi[i])))
    return code, report, rows


def _epsilon(cfg: RunConfig, policy):
    P = cfg.parameters
    try:
        res = openended_epsilon(parse_weight(P["weight"]), P["beta"], P["p"], policy)
    except NotMember as exc:
        return EXIT_VIOLATION, _error_object(exc), None
    return EXIT_OK, res.to_dict(P["beta"], P["p"]), None


def _extrapolate(cfg: RunConfig, policy):
    P = cfg.parameters
    phi = parse_phi(P["phi"])
    p0, p, beta = P["p0"], P["p"], P["beta"]
    weights = ([parse_weight(t) for t in P["weight"]] if P.get("weight")
               else default_conclusion_panel(beta, p))
    rng = np.random.default_rng(cfg.seed)
    max_len = 32
    panel = HypothesisPanel(default_hypothesis_panel(beta, p0, max_len), beta, p0, phi,
                            max_len, policy)
    runs, rejected, violations = [], 0, 0
    while len(runs) < P["cases"]:
        f, g = random_quasi_pair(rng, beta, max_len)
        try:
            rep = run_extrapolation_check(f, g, phi, p0, p, beta, weights, policy,
                                          eps_grid=P["eps_grid"], panel=panel)
        except HypothesisViolated:
            rejected += 1
            if rejected > 100 * P["cases"]:
                raise
            continue
        violations += not rep.holds
        runs.append(rep)
    report = {"p0": p0, "p": p, "beta": beta, "phi": P["phi"], "cases": len(runs),
              "rejected_by_hypothesis": rejected, "violations": violations,
              "max_ratio_over_tilde_phi": max(o.ratio / o.tilde_phi.value
                                              for r in runs for o in r.outcomes),
              "weights": [o.to_dict() for o in runs[0].outcomes]}
    rows = [("case", "weight", "ratio", "tilde_phi", "holds")]
    for i, r in enumerate(runs):
        rows += [(i, o.weight, o.ratio, o.tilde_phi.value, o.holds) for o in r.outcomes]
    return (EXIT_OK if violations == 0 else EXIT_VIOLATION), report, rows


def _oracle_suite(cfg: RunConfig, policy):
    summ = run_oracle_suite(cfg.seed or 0, cfg.parameters["cases"])
    rows = [("check", "passed", "total")] + [(k, v[0], v[1]) for k, v in summ.counts.items()]
    return (EXIT_OK if summ.passed else EXIT_VIOLATION), summ.to_dict(), rows


HANDLERS = {"check-weight": _check_weight, "verify-hardy": _verify_hardy,
            "epsilon": _epsilon, "extrapolate": _extrapolate, "oracle-suite": _oracle_suite}


def _error_object(exc: BaseException) -> dict:
    err = {"type": type(exc).__name__, "message": str(exc)}
    if getattr(exc, "index", None) is not None:
        err["index"] = exc.index
    return {"error": err}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows += _flatten(v, key + ".")
        elif isinstance(v, list):
            rows.append((key, json.dumps(_jsonable(v))))
        else:
            rows.append((key, v))
    return rows


def render(report: dict, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=2)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows if rows else [("key", "value")] + _flatten(report))
    return buf.getvalue()


def execute(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    policy = TruncationPolicy(N=cfg.horizon)
    try:
        code, report, rows = HANDLERS[cfg.command](cfg, policy)
    except (HardyWeightsError, ValueError, ArithmeticError, OSError) as exc:
        code, report, rows = EXIT_INCONCLUSIVE, _error_object(exc), None
    if "error" in report:
        rows = None
    text = render(report, rows, cfg.output_format)
    stream.write(text if text.endswith("\n") else text + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    cfg = parse_args(argv)
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
