"""Command-line front end.

Every command prints one JSON object (``config``, ``results``,
``diagnostics``) or CSV.  Exit status: 2 on invalid input, 1 when a
tolerance check fails, 0 otherwise.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .asymptotics import (
    InsufficientRangeError,
    check_table_row,
    parallel_map,
)
from .checks import ROUTE_TOL, route_equivalence
from .exact import (
    DegenerateObservableError,
    ZeroPostselectionError,
    expectation_closed_form,
    expectation_orthogonal,
)
from .model import ObservableA, OrthogonalSelectionError, ValidationError, first_order_shifts, make_selection, weak_value
from .probe import (
    DEFAULT_POINTS,
    MultiplicationBy,
    P,
    Q,
    DecayConditionError,
    GaussianProbe,
    GridProbe,
    UnresolvedDerivativeError,
    default_overlap_grid,
    derivative_integrals,
    load_probe_csv,
    overlaps,
    pointer_observable,
)
from .series import SeriesDegenerateError, identity_residuals, orthogonal_p_series, orthogonal_q_series, symmetry_shortcut

# Labels for the evaluation routes, stable across versions.
ROUTE_LABELS = {
    "closed_form": "Eq23",
    "orthogonal": "Eq26",
    "series": "Eq49",
    "oracle": "oracle",
}
IDENTITY_TOL = 1e-8

INPUT_ERRORS = (ValidationError, ZeroPostselectionError, DegenerateObservableError, DecayConditionError,
                UnresolvedDerivativeError, OrthogonalSelectionError, SeriesDegenerateError,
                InsufficientRangeError, ValueError, OSError)


def _optional_float(text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return float(text)


# name -> (type, default, commands or None for all, help)
OPTIONS = {
    "a1": (float, 1.0, None, "eigenvalue a1"),
    "a2": (float, -1.0, None, "eigenvalue a2"),
    "g": (float, 0.1, None, "coupling strength"),
    "x": (float, 1 / math.sqrt(2), None, "<a1|psi_i>"),
    "theta": (float, 0.0, None, "relative phase in [0, 2 pi)"),
    "alpha": (float, 0.1, None, "fidelity |<psi_f|psi_i>|"),
    "probe": (str, "gaussian:mean=0,sigma=1,kick=0", None, "gaussian:mean=..,sigma=..,kick=.. or file:path.csv"),
    "observable": (str, "q", None, "pointer observable: q, p or file:path.csv (columns q,f)"),
    "output": (str, "json", None, "csv or json"),
    "n": (int, DEFAULT_POINTS, None, "grid points when a Gaussian probe is sampled"),
    "q_min": (_optional_float, None, None, "grid lower edge when a Gaussian probe is sampled"),
    "q_max": (_optional_float, None, None, "grid upper edge when a Gaussian probe is sampled"),
    "seed": (int, 0, None, "random seed"),
    "n_max": (int, {"orthogonal": 20, "identities": 4}, ("orthogonal", "identities"),
              "highest derivative-integral index"),
    "count": (int, 100, ("oracle-check",), "number of random tuples"),
    "tol": (float, {"oracle-check": ROUTE_TOL, "asymptote": 0.05, "identities": IDENTITY_TOL},
            ("oracle-check", "asymptote", "identities"), "pass/fail tolerance"),
    "param": (str, "alpha", ("sweep",), "alpha, x, theta or g"),
    "start": (float, 0.1, ("sweep",), "first grid value"),
    "stop": (float, 0.9, ("sweep",), "last grid value"),
    "num": (int, 9, ("sweep",), "number of grid values"),
    "scale": (str, "linear", ("sweep",), "linear or geometric"),
    "s": (_optional_float, None, ("asymptote",), "competition exponent; omit for fixed x"),
    "beta_max": (_optional_float, None, ("asymptote",), "largest beta on the path"),
    "beta_min": (_optional_float, None, ("asymptote",), "smallest beta on the path"),
    "points": (int, 12, ("asymptote",), "number of beta values"),
}
COMMANDS = ("expectation", "orthogonal", "weak-value", "oracle-check", "sweep", "asymptote", "identities")


@dataclass(frozen=True)
class RunConfig:
    command: str
    a1: float
    a2: float
    g: float
    x: float
    theta: float
    alpha: float
    probe: str
    observable: str
    output: str
    n: int
    q_min: float | None
    q_max: float | None
    seed: int
    extra: dict

    def metadata(self) -> dict:
        out = asdict(self)
        out.update(out.pop("extra"))
        return out


def _default(default, command):
    """Option defaults may differ per command."""
    return default[command] if isinstance(default, dict) else default


def read_config_file(path) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError("config", f"line {lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in OPTIONS:
                raise ValidationError("config", f"line {lineno}: unknown key {key!r}")
            out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orthoweak", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="file of key=value lines; flags take precedence")
        for name, (typ, default, only, text) in OPTIONS.items():
            if only is not None and cmd not in only:
                continue
            sp.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None,
                            help=f"{text} (default {_default(default, cmd)})")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags > config file > defaults."""
    from_file = read_config_file(args.config) if args.config else {}
    values = {}
    for name, (typ, default, only, _) in OPTIONS.items():
        if only is not None and args.command not in only:
            continue
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
        elif name in from_file:
            try:
                values[name] = typ(from_file[name])
            except ValueError as exc:
                raise ValidationError(name, f"bad config value {from_file[name]!r}") from exc
        else:
            values[name] = _default(default, args.command)
    if values["output"] not in ("csv", "json"):
        raise ValidationError("output", f"expected csv or json, got {values['output']!r}")
    base = {k: values.pop(k) for k in ("a1", "a2", "g", "x", "theta", "alpha", "probe", "observable",
                                       "output", "n", "q_min", "q_max", "seed")}
    return RunConfig(command=args.command, extra=values, **base)


def parse_probe(spec: str):
    kind, _, rest = spec.partition(":")
    if kind == "file":
        return load_probe_csv(rest)
    if kind != "gaussian":
        raise ValidationError("probe", f"expected gaussian:... or file:..., got {spec!r}")
    keys = {"mean": 0.0, "sigma": 1.0, "kick": 0.0}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq or key.strip() not in keys:
            raise ValidationError("probe", f"bad gaussian parameter {item!r}")
        keys[key.strip()] = float(value)
    return GaussianProbe(keys["mean"], keys["sigma"], keys["kick"])


class Context:
    """Parsed objects derived from a RunConfig."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.obs = ObservableA(cfg.a1, cfg.a2)
        self.probe = parse_probe(cfg.probe)
        self.m_op = pointer_observable(cfg.observable)
        if (cfg.q_min is None) != (cfg.q_max is None):
            raise ValidationError("q_min", "give both q_min and q_max or neither")

    def grid(self, g: float):
        """Grid version of the probe (file probes are used as loaded)."""
        if isinstance(self.probe, GridProbe):
            return self.probe
        if self.cfg.q_min is not None:
            return self.probe.to_grid(self.cfg.n, (self.cfg.q_min, self.cfg.q_max))
        return default_overlap_grid(self.probe, g, self.obs, self.cfg.n)

    def overlaps(self, g: float):
        analytic = isinstance(self.probe, GaussianProbe) and not isinstance(self.m_op, MultiplicationBy)
        return overlaps(self.probe if analytic else self.grid(g), g, self.obs, self.m_op)

    def selection(self, **override):
        c = self.cfg
        return make_selection(override.get("x", c.x), override.get("theta", c.theta), override.get("alpha", c.alpha))


# -- commands ----------------------------------------------------------------

def cmd_expectation(ctx: Context):
    res = expectation_closed_form(ctx.selection(), ctx.overlaps(ctx.cfg.g))
    return ({"expectation": res.expectation, "postselection_probability": res.postselection_probability,
             "route": ROUTE_LABELS["closed_form"]},
            {"routes": [ROUTE_LABELS["closed_form"]], **res.diagnostics}, True)


def cmd_orthogonal(ctx: Context):
    cfg = ctx.cfg
    g = cfg.g
    closed = expectation_orthogonal(ctx.overlaps(g), cfg.x)
    results = {"expectation": closed.expectation, "route": ROUTE_LABELS["orthogonal"],
               "postselection_probability": closed.postselection_probability}
    diag = {"routes": [ROUTE_LABELS["orthogonal"], ROUTE_LABELS["series"]], **closed.diagnostics}
    if ctx.m_op in (Q, P):
        table = derivative_integrals(ctx.probe, cfg.extra["n_max"])
        fn = orthogonal_q_series if ctx.m_op is Q else orthogonal_p_series
        ser = fn(table, g, ctx.obs)
        results.update({"series_expectation": ser.value,
                        "difference": ser.value - closed.expectation})
        diag.update({"series_terms": ser.terms_used, "series_converged": ser.converged,
                     "series_last_term_ratio": ser.last_term_ratio})
    else:
        results.update({"series_expectation": None, "difference": None})
        diag["series_note"] = "series route covers q and p only"
    diag["parity"] = symmetry_shortcut(ctx.probe).value
    return results, diag, True


def cmd_weak_value(ctx: Context):
    cfg = ctx.cfg
    sel = ctx.selection()
    aw = weak_value(sel, ctx.obs)
    q_f, p_f = first_order_shifts(aw, cfg.g, ctx.probe.moments())
    exact_q = expectation_closed_form(sel, overlaps(ctx.probe, cfg.g, ctx.obs, Q)).expectation
    exact_p = expectation_closed_form(sel, overlaps(ctx.probe, cfg.g, ctx.obs, P)).expectation
    return ({"weak_value_re": aw.real, "weak_value_im": aw.imag,
             "first_order_q": q_f, "first_order_p": p_f,
             "exact_q": exact_q, "exact_p": exact_p},
            {"routes": [ROUTE_LABELS["closed_form"]], "probe_moments": list(ctx.probe.moments())}, True)


def cmd_oracle_check(ctx: Context):
    cfg = ctx.cfg
    tol = cfg.extra["tol"]
    rows = route_equivalence(cfg.seed, cfg.extra["count"])
    worst = max(rows, key=lambda r: r.scaled_error)
    failures = sum(r.scaled_error > tol for r in rows)
    return ({"comparisons": len(rows), "failures": failures, "max_scaled_error": worst.scaled_error,
             "passed": failures == 0},
            {"routes": [ROUTE_LABELS["closed_form"], ROUTE_LABELS["oracle"]],
             "worst_case": {**asdict(worst.tuple), "observable": worst.observable},
             "min_postselection_probability": min(r.probability for r in rows)},
            failures == 0)


def sweep_grid(start: float, stop: float, num: int, scale: str) -> np.ndarray:
    if num < 1:
        raise ValidationError("num", "must be >= 1")
    if scale == "linear":
        return np.linspace(start, stop, num)
    if scale == "geometric":
        if start <= 0 or stop <= 0:
            raise ValidationError("scale", "geometric grid needs positive start and stop")
        return np.geomspace(start, stop, num)
    raise ValidationError("scale", f"expected linear or geometric, got {scale!r}")


def cmd_sweep(ctx: Context):
    extra = ctx.cfg.extra
    param = extra["param"]
    if param not in ("alpha", "x", "theta", "g"):
        raise ValidationError("param", f"expected alpha, x, theta or g, got {param!r}")
    values = sweep_grid(extra["start"], extra["stop"], extra["num"], extra["scale"])
    fixed_ov = None if param == "g" else ctx.overlaps(ctx.cfg.g)

    def point(v):
        v = float(v)
        if param == "g":
            res = expectation_closed_form(ctx.selection(), ctx.overlaps(v))
        else:
            res = expectation_closed_form(ctx.selection(**{param: v}), fixed_ov)
        return {"param": v, "expectation": res.expectation,
                "postselection_probability": res.postselection_probability}

    rows = parallel_map(point, values)
    return rows, {"routes": [ROUTE_LABELS["closed_form"]], "param": param}, True


def cmd_asymptote(ctx: Context):
    cfg, extra = ctx.cfg, ctx.cfg.extra
    ov = ctx.overlaps(cfg.g)
    s = extra["s"]
    x = cfg.x if s is None else None
    check = check_table_row(s, ov, cfg.theta, x, extra["points"], extra["beta_max"], extra["beta_min"],
                            tol=extra["tol"])
    rep = check.report
    results = {"regime": rep.regime.value, "prediction": rep.table_label,
               "predicted_exponent": rep.leading_exponent, "predicted_limit": rep.predicted_limit,
               "fitted_exponent": check.fitted, "passed": check.passed,
               "samples": [{"beta": b, "expectation": v} for b, v in check.samples]}
    diag = {"routes": [ROUTE_LABELS["closed_form"]], "r_squared": check.r_squared, **check.detail}
    return results, diag, check.passed


def cmd_identities(ctx: Context):
    cfg = ctx.cfg
    res = identity_residuals(ctx.grid(cfg.g), cfg.extra["n_max"])
    worst = max(res.values())
    ok = worst <= cfg.extra["tol"]
    return {"max_residual": worst, "passed": ok}, {"residuals": res}, ok


DISPATCH = {
    "expectation": cmd_expectation,
    "orthogonal": cmd_orthogonal,
    "weak-value": cmd_weak_value,
    "oracle-check": cmd_oracle_check,
    "sweep": cmd_sweep,
    "asymptote": cmd_asymptote,
    "identities": cmd_identities,
}


# -- emission ----------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    """JSON text with floats printed to 17 significant digits."""
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return format(f, ".17g") if math.isfinite(f) else json.dumps(str(f))
    return json.dumps(str(v))


def emit(cfg: RunConfig, results, diagnostics, out) -> None:
    if cfg.output == "json":
        out.write(_json_value({"config": cfg.metadata(), "results": results, "diagnostics": diagnostics}) + "\n")
        return
    buf = io.StringIO()
    if isinstance(results, list):
        keys = list(results[0]) if results else ["param", "expectation", "postselection_probability"]
        buf.write(",".join(keys) + "\n")
        for row in results:
            buf.write(",".join(_fmt(row[k]) for k in keys) + "\n")
    elif "samples" in results:
        buf.write("beta,expectation\n")
        for row in results["samples"]:
            buf.write(f"{_fmt(row['beta'])},{_fmt(row['expectation'])}\n")
    else:
        buf.write("key,value\n")
        for k, v in results.items():
            buf.write(f"{k},{_fmt(v)}\n")
    out.write(buf.getvalue())


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        results, diagnostics, ok = DISPATCH[cfg.command](Context(cfg))
    except INPUT_ERRORS as exc:
        err.write(f"orthoweak: error: {exc}\n")
        return 2
    emit(cfg, results, diagnostics, out)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
