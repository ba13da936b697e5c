"""Command-line front end: ``scenario``, ``sample`` and ``verify``.

Exit codes: 0 success, 1 a contract or property check failed, 2 invalid input.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import scenarios as sc
from .algebra import synthesize
from .conditional import conditional_expectation, optimality_report, posterior_expectation
from .errors import ContractViolation, PredictionError
from .operators import EXACT_TOL, expectation
from .sampler import MeasurementPlan, run_experiment, scenario_plan
from .verify import run_verify

KINDS = ("double-slit", "cat", "epr")
OBSERVE = {
    "double-slit": ("none", "plus", "minus"),
    "cat": ("none", "photon", "no-photon"),
    "epr": ("none", "minus", "plus"),
}
DEFAULTS = {
    "mode": "particle",
    "t": 1.0,
    "energy": 1.0,
    "x_detect": [0.0, 0.0, 0.0],
    "x_plus": [0.0, 0.0, 1.0],
    "x_minus": [0.0, 0.0, -1.0],
}


class UsageError(Exception):
    pass


def fmt(x):
    return f"{x:.12g}"


def _round12(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _pair(z):
    return [float(z.real), float(z.imag)]


# -- configuration -----------------------------------------------------------


def load_config(args):
    """Merge an optional config file with command-line flags (flags win)."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    if args.kind:
        cfg["kind"] = args.kind
    kind = cfg.get("kind")
    if kind not in KINDS:
        raise UsageError(f"kind must be one of {', '.join(KINDS)}")

    if args.a2 is not None:
        if not 0.0 <= args.a2 <= 1.0:
            raise UsageError("--a2 must lie in [0, 1]")
        cfg["a"] = [math.sqrt(args.a2), 0.0]
        cfg["b"] = [math.sqrt(1.0 - args.a2), 0.0]
    else:
        a, b = cfg.get("a"), cfg.get("b")
        parts = (args.a_re, args.a_im, args.b_re, args.b_im)
        if any(p is not None for p in parts):
            a = [args.a_re or 0.0, args.a_im or 0.0]
            b = [args.b_re or 0.0, args.b_im or 0.0]
        cfg["a"] = a if a is not None else [1 / math.sqrt(2), 0.0]
        cfg["b"] = b if b is not None else [1 / math.sqrt(2), 0.0]

    if kind == "double-slit":
        for key, default in DEFAULTS.items():
            flag = getattr(args, key, None)
            if flag is not None:
                cfg[key] = list(flag) if isinstance(flag, (list, tuple)) else flag
            cfg.setdefault(key, default)
    if getattr(args, "observe", None) is not None:
        cfg["observe"] = args.observe
    cfg.setdefault("observe", "none")
    if cfg["observe"] not in OBSERVE[kind]:
        raise UsageError(f"observe must be one of {', '.join(OBSERVE[kind])} for {kind}")
    return cfg


def _amplitudes(cfg):
    try:
        a = complex(*cfg["a"])
        b = complex(*cfg["b"])
    except (TypeError, ValueError) as exc:
        raise UsageError("amplitudes must be [re, im] pairs") from exc
    return a, b


def _two_source_config(cfg):
    a, b = _amplitudes(cfg)
    return sc.TwoSourceConfig(
        a=a,
        b=b,
        x_detect=cfg["x_detect"],
        x_plus=cfg["x_plus"],
        x_minus=cfg["x_minus"],
        mode=cfg["mode"],
        t=float(cfg["t"]),
        energy=float(cfg["energy"]),
    )


# -- analytic reports ---------------------------------------------------------


class Checks:
    """Collects named contract checks; a failing one raises after reporting."""

    def __init__(self):
        self.items = []

    def close(self, name, got, want, tol=EXACT_TOL):
        dev = abs(got - want)
        self.items.append({"check": name, "deviation": float(dev), "tol": tol, "ok": bool(dev <= tol)})

    def small(self, name, value, tol=EXACT_TOL):
        self.close(name, value, 0.0, tol)

    @property
    def ok(self):
        return all(item["ok"] for item in self.items)


def analyze_double_slit(cfg):
    ts = _two_source_config(cfg)
    setup = sc.build_two_source(ts)
    checks = Checks()
    v_plus, v_minus = setup.amplitudes
    unconditional = sc.unconditional_intensity(ts)
    checks.close("unconditional == tr(W A)", unconditional, expectation(setup.state, setup.detector).real)
    ce = conditional_expectation(setup.state, setup.detector, setup.family)
    closed = np.where(ce.weight_mask, [abs(v_plus) ** 2, abs(v_minus) ** 2], 0.0)
    for j, label in enumerate(setup.family.labels):
        checks.close(f"predictor[{label}] == |v|^2", ce.coeffs[j], closed[j])
    averaged = sc.averaged_predictor_expectation(ts)
    checks.close("averaged == w(E[A|B])", averaged, expectation(setup.state, ce.operator()).real)
    interference = sc.interference_term(ts)
    checks.close("interference gap", unconditional - averaged, interference, 1e-10)
    values = {
        "amplitudes": {"plus": _pair(v_plus), "minus": _pair(v_minus)},
        "branch_probabilities": [float(w) for w in ce.weights],
        "unconditional_intensity": unconditional,
        "conditioned_coefficients": [float(c) for c in ce.coeffs],
        "averaged_predictor_expectation": averaged,
        "interference_term": interference,
    }
    observe = cfg["observe"]
    if observe != "none":
        j = 0 if observe == "plus" else 1
        values["observed"] = {
            "branch": observe,
            "posterior_intensity": posterior_expectation(setup.state, setup.detector, setup.family, j),
        }
        checks.close(f"posterior[{observe}] == predictor", values["observed"]["posterior_intensity"], ce.coeffs[j])
    if ce.weight_mask.all():
        values["optimality"] = optimality_report(setup.state, setup.detector, setup.family).to_dict()
    return values, checks


def analyze_composite(cfg):
    a, b = _amplitudes(cfg)
    kind = cfg["kind"]
    scn = sc.build_cat(a, b) if kind == "cat" else sc.build_epr(a, b)
    checks = Checks()
    checks.small("charge eigenvalue residual", scn.charge_residual())
    probs = [expectation(scn.state, p).real for p in scn.family.projectors]
    partner_probs = [expectation(scn.state, p).real for p in scn.partner.projectors]
    table = sc.branch_table(scn)
    values = {
        "observed_family": list(scn.family.labels),
        "observed_probabilities": probs,
        "partner_family": list(scn.partner.labels),
        "partner_probabilities": partner_probs,
        "conditional_table": table,
        "charge_residual": scn.charge_residual(),
    }
    if kind == "cat":
        checks.close("P(photon) == |b|^2", probs[1], abs(scn.b) ** 2)
        checks.close("P(ground) == |b|^2", partner_probs[0], abs(scn.b) ** 2)
        certain = {0: 1, 1: 0}  # no-photon -> excited, photon -> ground
    else:
        checks.close("P(second=-1) == |a|^2", probs[1], abs(scn.a) ** 2)
        checks.close("P(second=+1) == |b|^2", probs[0], abs(scn.b) ** 2)
        certain = {0: 1, 1: 0}  # second +1 -> first -1, second -1 -> first +1
    for j, k in certain.items():
        if table[j] is not None:
            checks.close(f"P({scn.partner.labels[k]} | {scn.family.labels[j]}) == 1", table[j][k], 1.0)

    ground_like = scn.partner[0]
    ce = conditional_expectation(scn.state, ground_like, scn.family)
    values["predictor_of_" + scn.partner.labels[0]] = [float(c) for c in ce.coeffs]
    checks.small(
        "w(E[P|B]) == w(P)",
        abs(expectation(scn.state, synthesize(scn.family, ce.coeffs)) - expectation(scn.state, ground_like)),
    )

    observe = cfg["observe"]
    if observe != "none":
        j = {"photon": 1, "no-photon": 0, "minus": 1, "plus": 0}[observe]
        if table[j] is None:
            raise UsageError(f"observed branch {observe!r} has probability zero for these amplitudes")
        values["observed"] = {
            "branch": scn.family.labels[j],
            "partner_probabilities": dict(zip(scn.partner.labels, table[j])),
        }
    return values, checks


def analyze(cfg):
    if cfg["kind"] == "double-slit":
        return analyze_double_slit(cfg)
    return analyze_composite(cfg)


def _state_and_plan(cfg):
    if cfg["kind"] == "double-slit":
        setup = sc.build_two_source(_two_source_config(cfg))
        return setup.state, MeasurementPlan(setup.family)
    a, b = _amplitudes(cfg)
    scn = sc.build_cat(a, b) if cfg["kind"] == "cat" else sc.build_epr(a, b)
    return scn.state, scenario_plan(scn)


# -- rendering ----------------------------------------------------------------


def _flatten(prefix, obj, rows):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, rows)
    elif isinstance(obj, list) and obj and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
        rows.append((prefix, "  ".join(fmt(v) for v in obj)))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    elif isinstance(obj, float):
        rows.append((prefix, fmt(obj)))
    else:
        rows.append((prefix, "-" if obj is None else str(obj)))


def render(report, style):
    if style == "machine":
        return json.dumps(_round12(report), indent=2, sort_keys=True)
    rows = []
    for section in ("analytic", "sample"):
        if section in report:
            _flatten(section, report[section], rows)
    for item in report.get("checks", []):
        status = "ok" if item["ok"] else "FAIL"
        rows.append((f"check: {item['check']}", f"{status} (deviation {fmt(item['deviation'])})"))
    width = max(len(name) for name, _ in rows)
    header = f"scenario {report['config']['kind']}"
    return "\n".join([header] + [f"  {name:<{width}}  {value}" for name, value in rows])


def _emit(report, args):
    text = render(report, args.format)
    print(text)
    if args.out:
        Path(args.out).write_text(json.dumps(_round12(report), indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- subcommands --------------------------------------------------------------


def cmd_scenario(args):
    cfg = load_config(args)
    values, checks = analyze(cfg)
    report = {"config": cfg, "analytic": values, "checks": checks.items}
    _emit(report, args)
    if not checks.ok:
        raise ContractViolation("contract check failed")
    return 0


def cmd_sample(args):
    if args.shots < 1:
        raise UsageError("--shots must be at least 1")
    cfg = load_config(args)
    values, checks = analyze(cfg)
    state, plan = _state_and_plan(cfg)
    sample = run_experiment(state, plan, args.shots, args.seed, name=cfg["kind"], workers=args.workers)
    report = {
        "config": cfg,
        "analytic": values,
        "checks": checks.items,
        "sample": sample.to_dict(),
    }
    _emit(report, args)
    if not checks.ok:
        raise ContractViolation("contract check failed")
    if not sample.within_bound:
        raise ContractViolation("empirical frequencies outside the binomial bound")
    return 0


def cmd_verify(args):
    dims = tuple(args.dims)
    if any(d < 2 or d > 16 for d in dims):
        raise UsageError("--dims must lie in 2..16")
    if args.trials < 1 or args.tol < 0:
        raise UsageError("--trials must be positive and --tol non-negative")
    results = run_verify(dims=dims, trials=args.trials, seed=args.seed, tol=args.tol)
    rows = [{"property": r.name, "worst": float(fmt(r.worst)), "bound": r.bound, "passed": r.passed} for r in results]
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    if args.format == "machine":
        print(json.dumps(rows, indent=2))
    else:
        for r in results:
            print(r.line())
    failed = [r for r in results if not r.passed]
    if failed:
        raise ContractViolation(f"property failed: {failed[0].name}")
    return 0


def _add_config_flags(p):
    p.add_argument("kind", nargs="?", choices=KINDS, help="scenario kind (or give --config)")
    p.add_argument("--config", help="JSON scenario config file")
    p.add_argument("--a-re", type=float)
    p.add_argument("--a-im", type=float)
    p.add_argument("--b-re", type=float)
    p.add_argument("--b-im", type=float)
    p.add_argument("--a2", type=float, help="|a|^2; sets b = sqrt(1 - |a|^2) real")
    p.add_argument("--mode", choices=("particle", "wave"))
    p.add_argument("--t", type=float)
    p.add_argument("--energy", type=float)
    p.add_argument("--x-detect", type=float, nargs=3, metavar=("X", "Y", "Z"))
    p.add_argument("--x-plus", type=float, nargs=3, metavar=("X", "Y", "Z"))
    p.add_argument("--x-minus", type=float, nargs=3, metavar=("X", "Y", "Z"))
    p.add_argument("--observe", help="branch to condition on (plus, minus, photon, no-photon, none)")
    _add_output_flags(p)


def _add_output_flags(p):
    p.add_argument("--format", choices=("table", "machine"), default="table")
    p.add_argument("--out", help="also write the machine report to this path")


def build_parser():
    parser = argparse.ArgumentParser(prog="ncpredict", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", help="analytic predictions for one scenario")
    _add_config_flags(p)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("sample", help="Monte Carlo measurement run against the analytic values")
    _add_config_flags(p)
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="randomized property suites")
    p.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12)
    _add_output_flags(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, PredictionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
