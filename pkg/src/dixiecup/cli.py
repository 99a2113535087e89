"""Command-line front end: ``dixiecup {analyze,limits,oracle,simulate,classify}``.

Every report is a JSON document with a fixed field order that embeds the
full run specification, so a report alone is enough to reproduce it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import asymptotics as asy
from . import limitdist as ld
from . import moments as mo
from . import simulate as sim
from .errors import DixieError, InvalidParameter
from .seqmodel import Case, CouponModel, Kind, SequenceFamily, build_model, classify

SCHEMA = "dixiecup/1"
COMMANDS = ("analyze", "limits", "oracle", "simulate", "classify")
FAMILIES = ("constant", "power", "zipf", "exp-growth", "exp-decay", "logpower", "explicit")
DEFAULT_Y_GRID = (-2.0, -1.0, 0.0, 1.0, 2.0, 3.0)
DEFAULT_S_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
DEFAULT_Z_GRID = (1.5, 2.0, 4.0)
# quadrature integrands cost O(N) per point unless all probabilities are equal
MAX_QUADRATURE_N = 100_000


@dataclass(frozen=True)
class RunSpec:
    command: str
    family: SequenceFamily | None
    probs: tuple[float, ...] | None
    n: int | None
    m: int
    tol: float
    samples: int
    seed: int
    shards: int
    output: str | None
    format: str
    y_grid: tuple[float, ...] | None = None
    s_grid: tuple[float, ...] | None = None
    simulate: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidParameter(f"unknown command {self.command!r}")
        if self.m < 1:
            raise InvalidParameter("--m must be >= 1")
        if self.n is not None and self.n < 1:
            raise InvalidParameter("--n must be >= 1")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise InvalidParameter("--tol must be a positive finite number")
        if self.samples < 1:
            raise InvalidParameter("--samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter("--seed must fit in an unsigned 64-bit integer")
        if self.shards < 1:
            raise InvalidParameter("--shards must be >= 1")
        if self.format not in ("json", "csv"):
            raise InvalidParameter("--format must be json or csv")
        if self.family is None and self.probs is None:
            raise InvalidParameter("give --family or --probs")

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "family": None if self.family is None else self.family.to_dict(),
            "probs": None if self.probs is None else list(self.probs),
            "n": self.n,
            "m": self.m,
            "tol": self.tol,
            "samples": self.samples,
            "seed": self.seed,
            "shards": self.shards,
            "output": self.output,
            "format": self.format,
            "y_grid": None if self.y_grid is None else list(self.y_grid),
            "s_grid": None if self.s_grid is None else list(self.s_grid),
            "simulate": self.simulate,
        }


# ---------------------------------------------------------------------------
# helpers


def _model(spec: RunSpec) -> CouponModel:
    if spec.family is None:
        if spec.n is not None and spec.n != len(spec.probs):
            raise InvalidParameter(f"--n {spec.n} does not match {len(spec.probs)} probabilities")
        return CouponModel.from_probs(spec.probs)
    n = spec.n
    if n is None and spec.family.kind is Kind.EXPLICIT:
        n = len(spec.family.values)
    if n is None:
        raise InvalidParameter(f"--n is required for {spec.command} with a parametric family")
    return build_model(spec.family, n)


def _quadrature_model(spec: RunSpec) -> CouponModel:
    model = _model(spec)
    if model.n > MAX_QUADRATURE_N and not model.is_equal:
        raise InvalidParameter(
            f"quadrature is capped at N <= {MAX_QUADRATURE_N} for unequal probabilities (got {model.n})"
        )
    return model


def _gap(approx: float, exact: float) -> float:
    return approx / exact - 1.0 if exact != 0 else math.nan


def _clean(obj):
    """Non-finite floats become null; numpy scalars become Python numbers."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, allow_nan=False)


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(spec: RunSpec) -> dict:
    model = _quadrature_model(spec)
    m, tol = spec.m, spec.tol
    e1 = mo.expectation(model, m, tol)
    e2 = mo.second_rising(model, m, tol)
    var = mo.variance(model, m, tol)
    quad = {"expectation": e1.to_dict(), "second_rising": e2.to_dict(), "variance": var.to_dict()}
    expansion = None
    gap = {}
    fam = spec.family
    if fam is not None and fam.kind is not Kind.EXPLICIT:
        label = classify(fam)
        n = model.n
        if label.value is Case.CASE_I:
            L1 = mo.limit_constant(fam, m, 1, tol)
            L2 = mo.limit_constant(fam, m, 2, tol)
            mean = asy.expectation_expansion_case1(fam, m, n, tol)
            v = asy.variance_case1(fam, m, n, tol)
            expansion = {
                "case": label.value.value,
                "A_N": model.a_sum,
                "L1": L1.to_dict(),
                "L2": L2.to_dict(),
                "expectation": mean.to_dict(),
                "variance": v.to_dict(),
            }
            gap = {"expectation": _gap(mean.value, e1.value), "variance": _gap(v.value, var.value)}
        else:
            rep = asy.case2_expansion(fam, m, n)
            expansion = {"case": label.value.value, **rep.to_dict()}
            if fam.kind is Kind.CONSTANT:
                expansion["C_m"] = rep.extras["C_m"]
            gap = {"expectation": _gap(rep.total, e1.value)}
            if fam.kind is Kind.ZIPF:
                sr = asy.second_rising_expansion_case2(fam, m, n)
                expansion["second_rising"] = sr.to_dict()
                gap["second_rising"] = _gap(sr.total, e2.value)
            vl = asy.variance_leading_case2(fam, m, n)
            expansion["variance_leading"] = vl.to_dict()
            gap["variance_ratio_minus_1"] = _gap(var.value, vl.value)
    return {"quadrature": quad, "expansion": expansion, "gap": gap}


def _ks(samples, cdf, reference):
    r = sim.ks_statistic(samples, cdf, reference)
    return {"statistic": r.statistic, "n": r.n, "reference": r.reference}


def cmd_limits(spec: RunSpec) -> dict:
    fam = spec.family
    if fam is None:
        raise InvalidParameter("limits needs --family")
    label = classify(fam)
    m = spec.m
    if label.value is Case.CASE_I:
        s = np.asarray(spec.s_grid or DEFAULT_S_GRID, dtype=float)
        cdf = ld.case1_limit_cdf(fam, m, s)
        out = {
            "case": label.value.value,
            "law": ld.LawKind.CASE_I_FIXED_POINT.value,
            "grid": [{"s": float(a), "cdf": float(b)} for a, b in zip(s, cdf)],
        }
        if spec.simulate:
            model = _model(spec)
            dist = sim.run_mc(model, m, spec.samples, spec.seed, spec.shards)
            x = np.sort(dist.sorted_samples / model.a_sum)
            out["simulation"] = dist.to_dict()
            out["ks"] = _ks(x, lambda v: ld.case1_limit_cdf(fam, m, v), "case1_limit_cdf of T/A_N")
        return out
    if spec.n is None:
        raise InvalidParameter("--n is required for limits of a decaying family")
    norm = ld.gumbel_normalization(fam, m, spec.n)
    model = _model(spec)
    y = np.asarray(spec.y_grid or DEFAULT_Y_GRID, dtype=float)
    F = ld.limit_cdf(norm.law, y)
    rows = []
    for yi, Fi in zip(y, F):
        lam = None
        if norm.b_n + yi * norm.k_n > 0:
            lam = float(ld.lambda_functional(model, m, norm.b_n, norm.k_n, float(yi)))
        rows.append({
            "y": float(yi),
            "limit_cdf": float(Fi),
            "lambda": lam,
            "lambda_target": math.exp(-yi - math.lgamma(m)),
        })
    out = {"case": label.value.value, "normalization": norm.to_dict(), "grid": rows}
    if spec.simulate:
        dist = sim.run_mc(model, m, spec.samples, spec.seed, spec.shards)
        x = sim.normalized_samples(dist, norm)
        out["simulation"] = dist.to_dict()
        out["ks"] = _ks(x, lambda v: ld.limit_cdf(norm.law, v), norm.law.kind.value)
        if norm.law.kind is ld.LawKind.SLOW_DECAY_GUMBEL:
            out["ks_standard_gumbel"] = _ks(x, lambda v: ld.limit_cdf(ld.Law.gumbel(m), v), "gumbel")
    return out


def cmd_oracle(spec: RunSpec) -> dict:
    model = _model(spec)
    m, tol = spec.m, spec.tol
    ex = sim.exact_small(model, m)
    model = _quadrature_model(spec)
    e1 = mo.expectation(model, m, tol)
    e2 = mo.second_rising(model, m, tol)
    var = mo.variance(model, m, tol)
    pgf = []
    for z in DEFAULT_Z_GRID:
        exact = ex.pgf_at(z)
        q = mo.mgf(model, m, z, tol)
        pgf.append({"z": z, "exact": exact, "quadrature": q.value, "abs_gap": abs(exact - q.value)})
    return {
        "exact": {"expectation": ex.expectation, "second_rising": ex.second_rising, "variance": ex.variance},
        "quadrature": {"expectation": e1.to_dict(), "second_rising": e2.to_dict(), "variance": var.to_dict()},
        "abs_gap": {
            "expectation": abs(ex.expectation - e1.value),
            "second_rising": abs(ex.second_rising - e2.value),
            "variance": abs(ex.variance - var.value),
        },
        "pgf": pgf,
    }


def cmd_simulate(spec: RunSpec) -> dict:
    model = _model(spec)
    dist = sim.run_mc(model, spec.m, spec.samples, spec.seed, spec.shards)
    return {"simulation": dist.to_dict()}


def cmd_classify(spec: RunSpec) -> dict:
    fam = spec.family
    if fam is None:
        raise InvalidParameter("classify needs --family")
    label = classify(fam)
    return {
        "case": label.value.value,
        "justification": label.justification,
        "advisory": label.advisory,
        "c1_violations": asy.c1_violations(fam) if label.value is Case.CASE_II else [],
    }


_DISPATCH = {
    "analyze": cmd_analyze,
    "limits": cmd_limits,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "classify": cmd_classify,
}


def run(spec: RunSpec) -> dict:
    spec.validate()
    result = _DISPATCH[spec.command](spec)
    return {"schema": SCHEMA, "run": spec.to_dict(), "result": result}


# ---------------------------------------------------------------------------
# CSV


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and all(isinstance(v, dict) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def to_csv(report: dict) -> str:
    """Grid reports: one row per grid point.  Others: key,value rows."""
    report = _clean(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    result = report["result"]
    grid = result.get("grid") if isinstance(result, dict) else None
    if grid:
        scalars = [(k, v) for k, v in _flatten({kk: vv for kk, vv in result.items() if kk != "grid"})
                   if not isinstance(v, list)]
        cols = list(grid[0].keys())
        w.writerow(cols + [k for k, _ in scalars])
        for row in grid:
            w.writerow([row[c] for c in cols] + [v for _, v in scalars])
    else:
        w.writerow(["key", "value"])
        for k, v in _flatten(result):
            w.writerow([k, json.dumps(v) if isinstance(v, list) else v])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dixiecup", description="Moments and limit laws of T_m(N).")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=FAMILIES)
    common.add_argument("--p", "--exponent", dest="p", type=float)
    common.add_argument("--probs", "--weights", dest="probs", type=_floats,
                        help="probability vector, or raw weights for --family explicit")
    common.add_argument("--tail", choices=("grows", "decays-subexponential", "decays-exponential"),
                        help="tail hint for --family explicit")
    common.add_argument("--n", "--coupons", dest="n", type=int)
    common.add_argument("--m", "--sets", dest="m", type=int, default=1)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--samples", type=lambda s: int(float(s)), default=10_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--shards", type=int, default=os.cpu_count() or 1)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "limits":
            p.add_argument("--y-grid", type=_floats)
            p.add_argument("--s-grid", type=_floats)
            p.add_argument("--simulate", action="store_true")
    return parser


def spec_from_args(args) -> RunSpec:
    family = None
    probs = args.probs
    if args.family == "explicit":
        if not probs:
            raise InvalidParameter("--family explicit needs --probs with the weights")
        family = SequenceFamily.explicit(probs, args.tail)
        probs = None
    elif args.family is not None:
        family = SequenceFamily.from_dict({"kind": args.family, "p": args.p})
    return RunSpec(
        command=args.command,
        family=family,
        probs=probs,
        n=args.n,
        m=args.m,
        tol=args.tol,
        samples=args.samples,
        seed=args.seed,
        shards=args.shards,
        output=args.out,
        format=args.format,
        y_grid=getattr(args, "y_grid", None),
        s_grid=getattr(args, "s_grid", None),
        simulate=getattr(args, "simulate", False),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        report = run(spec)
    except (DixieError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = dumps(report) if spec.format == "json" else to_csv(report)
    if spec.output:
        with open(spec.output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
