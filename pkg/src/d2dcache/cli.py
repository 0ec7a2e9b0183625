"""Command-line surface: simulate, sweep, fit, solve-gamma-c, predict.

Exit codes: 0 success, 2 configuration/usage error, 3 out-of-regime warning
(results are still printed). All randomized outputs carry the seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from itertools import product
from pathlib import Path
from typing import Sequence

from .caching import EPSILON_MAX, eta, solve_gamma_c, theory_params
from .errors import (
    InvalidParameterError,
    InvalidRangeError,
    NoSolutionError,
    OutOfRegimeWarning,
    OutOfValidityError,
    UnsupportedExponentError,
)
from .harness import (
    METRICS,
    POLICY_TOPK,
    POLICY_ZIPF,
    M_SCHEDULE_LOG,
    R_AUTO,
    MetricStats,
    SimConfig,
    SweepRow,
    estimate,
    fit_powerlaw,
)
from .theory import Regime, classify, predicted_el, predicted_r_opt

CSV_COLUMNS = (
    "config_digest,n,m,gamma_r,gamma_c,policy,r,trials,seed,"
    "potential_mean,potential_se,self_served_mean,"
    "L_greedy_mean,L_greedy_se,L_exact_mean,L_exact_se,"
    "L_cluster_mean,L_cluster_se,G_mean,G_se"
).split(",")

_CONFIG_FIELDS = {
    "n",
    "m",
    "gamma_r",
    "policy",
    "gamma_c",
    "r",
    "r_constant",
    "epsilon",
    "trials",
    "exact_cutoff",
}

USAGE_ERROR = 2
REGIME_WARNING = 3


class _UsageError(Exception):
    pass


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row_line(row: SweepRow) -> list[str]:
    s = row.stats
    return [
        row.digest,
        _fmt(row.n),
        _fmt(row.m),
        _fmt(float(row.gamma_r)),
        _fmt(float(row.gamma_c)) if row.gamma_c is not None else "",
        row.policy,
        _fmt(float(row.r)),
        _fmt(row.trials),
        _fmt(row.seed),
        _fmt(s["potential"].mean),
        _fmt(s["potential"].se),
        _fmt(s["self_served"].mean),
        _fmt(s["L_greedy"].mean),
        _fmt(s["L_greedy"].se),
        _fmt(s["L_exact"].mean),
        _fmt(s["L_exact"].se),
        _fmt(s["L_cluster"].mean),
        _fmt(s["L_cluster"].se),
        _fmt(s["G"].mean),
        _fmt(s["G"].se),
    ]


def write_rows_csv(path: Path, rows: Sequence[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(_row_line(row))


def _row_payload(row: SweepRow) -> dict:
    stats = {
        name: {"mean": st.mean, "se": st.se, "count": st.count}
        for name, st in row.stats.items()
    }
    return {
        "config_digest": row.digest,
        "n": row.n,
        "m": row.m,
        "gamma_r": row.gamma_r,
        "gamma_c": row.gamma_c,
        "policy": row.policy,
        "r": row.r,
        "trials": row.trials,
        "seed": row.seed,
        "metrics": stats,
    }


def _parse_m(text: str):
    if text == M_SCHEDULE_LOG:
        return text
    try:
        return int(text)
    except ValueError:
        raise _UsageError(f"m must be an integer or {M_SCHEDULE_LOG!r}, got {text!r}")


def _parse_r(text: str):
    if text == R_AUTO:
        return text
    try:
        return float(text)
    except ValueError:
        raise _UsageError(f"r must be a real or {R_AUTO!r}, got {text!r}")


def _config_from_args(args: argparse.Namespace) -> SimConfig:
    return SimConfig(
        n=args.n,
        gamma_r=args.gamma_r,
        m=_parse_m(args.m),
        policy=args.policy,
        gamma_c=args.gamma_c,
        r=_parse_r(args.r),
        r_constant=args.r_constant,
        epsilon=args.epsilon,
        seed=args.seed,
        trials=args.trials,
        exact_cutoff=args.exact_cutoff,
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    cfg.validate()
    row = estimate(cfg)
    payload = {"command": "simulate", "seed": cfg.seed, **_row_payload(row)}
    text = json.dumps(payload, indent=2)
    print(text)
    if args.json_out:
        Path(args.json_out).write_text(text + "\n")
    return 0


def _descriptor_configs(descriptor: dict, seed: int) -> tuple[list[SimConfig], Path]:
    if "output" not in descriptor:
        raise _UsageError("descriptor is missing field 'output'")
    base = descriptor.get("base")
    if not isinstance(base, dict):
        raise _UsageError("descriptor is missing object field 'base'")
    unknown = set(base) - _CONFIG_FIELDS
    if unknown:
        raise _UsageError(f"descriptor field 'base' has unknown keys: {sorted(unknown)}")
    axes = descriptor.get("axes", [])
    if not isinstance(axes, list):
        raise _UsageError("descriptor field 'axes' must be a list")
    names, levels = [], []
    for axis in axes:
        if not isinstance(axis, dict) or "param" not in axis or "values" not in axis:
            raise _UsageError("each axis needs fields 'param' and 'values'")
        param, values = axis["param"], axis["values"]
        if param not in _CONFIG_FIELDS:
            raise _UsageError(f"axis field 'param' names unknown parameter {param!r}")
        if not isinstance(values, list) or not values:
            raise _UsageError(f"axis 'values' for {param!r} must be a non-empty list")
        if len(set(map(str, values))) != len(values):
            raise _UsageError(f"axis 'values' for {param!r} contains duplicates")
        names.append(param)
        levels.append(values)
    configs = []
    for combo in product(*levels) if levels else [()]:
        fields = dict(base)
        fields.update(dict(zip(names, combo)))
        fields["seed"] = seed
        try:
            cfg = SimConfig(**fields)
            cfg.validate()
        except TypeError as exc:
            raise _UsageError(f"descriptor 'base': {exc}")
        configs.append(cfg)
    return configs, Path(descriptor["output"])


def _read_raw_rows(path: Path) -> dict[str, list[str]]:
    rows: dict[str, list[str]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_COLUMNS:
            raise _UsageError(f"existing output {path} has field mismatch in header")
        for line in reader:
            rows[line[0]] = line
    return rows


def _parse_raw_row(line: list[str]) -> SweepRow:
    def opt_float(s: str) -> float | None:
        return float(s) if s else None

    stats: dict[str, MetricStats] = {}
    idx = {name: i for i, name in enumerate(CSV_COLUMNS)}
    for metric in METRICS:
        mean = opt_float(line[idx[f"{metric}_mean"]]) if f"{metric}_mean" in idx else None
        se_key = f"{metric}_se"
        se = opt_float(line[idx[se_key]]) if se_key in idx else None
        stats[metric] = MetricStats(mean, se, 0 if mean is None else int(line[idx["trials"]]))
    return SweepRow(
        digest=line[idx["config_digest"]],
        n=int(line[idx["n"]]),
        m=int(line[idx["m"]]),
        gamma_r=float(line[idx["gamma_r"]]),
        gamma_c=opt_float(line[idx["gamma_c"]]),
        policy=line[idx["policy"]],
        r=float(line[idx["r"]]),
        trials=int(line[idx["trials"]]),
        seed=int(line[idx["seed"]]),
        stats=stats,
    )


def _cmd_sweep(args: argparse.Namespace) -> int:
    path = Path(args.descriptor)
    try:
        descriptor = json.loads(path.read_text())
    except FileNotFoundError:
        raise _UsageError(f"descriptor file not found: {path}")
    except json.JSONDecodeError as exc:
        raise _UsageError(f"descriptor is not valid JSON: {exc}")
    configs, out_path = _descriptor_configs(descriptor, args.seed)
    digests = [cfg.digest() for cfg in configs]
    if len(set(digests)) != len(digests):
        raise _UsageError("sweep grid contains duplicate configurations")
    done: dict[str, list[str]] = {}
    if args.resume and out_path.exists():
        done = _read_raw_rows(out_path)
    lines = []
    computed = 0
    for cfg, dg in zip(configs, digests):
        if dg in done:
            lines.append(done[dg])
        else:
            lines.append(_row_line(estimate(cfg)))
            computed += 1
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(lines)
    json_path = out_path.with_suffix(".json")
    rows = [_row_payload(_parse_raw_row(line)) for line in lines]
    json_path.write_text(json.dumps({"seed": args.seed, "rows": rows}, indent=2) + "\n")
    print(
        json.dumps(
            {
                "command": "sweep",
                "seed": args.seed,
                "rows": len(lines),
                "computed": computed,
                "reused": len(lines) - computed,
                "csv": str(out_path),
                "json": str(json_path),
            }
        )
    )
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    path = Path(args.csv)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            records = list(reader)
    except FileNotFoundError:
        raise _UsageError(f"csv file not found: {path}")
    for col in (args.x, args.y):
        if not records or col not in records[0]:
            raise _UsageError(f"csv is missing column {col!r}")
    try:
        xs = [float(rec[args.x]) for rec in records]
        ys = [float(rec[args.y]) for rec in records]
    except ValueError:
        raise _UsageError(f"columns {args.x!r}/{args.y!r} contain non-numeric entries")
    result = fit_powerlaw(xs, ys)
    print(
        json.dumps(
            {
                "command": "fit",
                "x": args.x,
                "y": args.y,
                "rows": len(xs),
                "slope": result.slope,
                "intercept": result.intercept,
                "stderr": result.stderr,
            },
            indent=2,
        )
    )
    return 0


def _cmd_solve_gamma_c(args: argparse.Namespace) -> int:
    base = eta(args.gamma_r)
    payload = {
        "command": "solve-gamma-c",
        "gamma_r": args.gamma_r,
        "epsilon": args.epsilon,
        "eta": base,
        "eta1": base + args.epsilon,
    }
    try:
        gamma_c = solve_gamma_c(args.gamma_r, base + args.epsilon)
    except NoSolutionError as exc:
        if args.epsilon < EPSILON_MAX:
            raise
        # epsilon outside the guaranteed band dominates: soft failure, not usage error
        warnings.warn(str(exc), OutOfRegimeWarning, stacklevel=2)
        payload.update({"gamma_c": None, "q_exponent": None, "q_formula": None})
        print(json.dumps(payload, indent=2))
        return 0
    exponent = (base + args.epsilon) / gamma_c
    payload.update(
        {
            "gamma_c": gamma_c,
            "q_exponent": exponent,
            "q_formula": f"ceil(m^{exponent:.6g})",
        }
    )
    if args.m is not None:
        payload["q"] = theory_params(args.gamma_r, args.epsilon, args.m).q
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    regime = classify(args.gamma_r)
    eta1 = None
    if regime is Regime.LOW_REUSE:
        eta1 = eta(args.gamma_r) + args.epsilon
    r_opt = predicted_r_opt(regime, args.n, args.m, args.constant, eta1)
    el = predicted_el(regime, args.n, args.m, eta1)
    print(
        json.dumps(
            {
                "command": "predict",
                "regime": regime.value,
                "n": args.n,
                "m": args.m,
                "constant": args.constant,
                "eta1": eta1,
                "r_opt": r_opt,
                "predicted_el": el,
            },
            indent=2,
        )
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="d2dsim",
        description="Monte Carlo simulator for device-to-device caching networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="estimate metrics for one configuration")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--gamma-r", dest="gamma_r", type=float, required=True)
    sim.add_argument("--m", default=M_SCHEDULE_LOG)
    sim.add_argument("--policy", choices=(POLICY_ZIPF, POLICY_TOPK), default=POLICY_ZIPF)
    sim.add_argument("--gamma-c", dest="gamma_c", type=float, default=None)
    sim.add_argument("--r", default=R_AUTO)
    sim.add_argument("--r-constant", dest="r_constant", type=float, default=1.5)
    sim.add_argument("--epsilon", type=float, default=0.05)
    sim.add_argument("--trials", type=int, default=1)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--exact-cutoff", dest="exact_cutoff", type=int, default=40)
    sim.add_argument("--json-out", dest="json_out", default=None)
    sim.set_defaults(func=_cmd_simulate)

    swp = sub.add_parser("sweep", help="run a sweep descriptor to CSV + JSON")
    swp.add_argument("descriptor")
    swp.add_argument("--seed", type=int, required=True)
    swp.add_argument("--resume", action="store_true")
    swp.set_defaults(func=_cmd_sweep)

    fit = sub.add_parser("fit", help="log-log slope of one CSV column against another")
    fit.add_argument("csv")
    fit.add_argument("--x", default="n")
    fit.add_argument("--y", default="L_greedy_mean")
    fit.set_defaults(func=_cmd_fit)

    sgc = sub.add_parser("solve-gamma-c", help="caching exponent for the low-reuse regime")
    sgc.add_argument("--gamma-r", dest="gamma_r", type=float, required=True)
    sgc.add_argument("--epsilon", type=float, required=True)
    sgc.add_argument("--m", type=int, default=None)
    sgc.set_defaults(func=_cmd_solve_gamma_c)

    prd = sub.add_parser("predict", help="regime forms for r_opt and expected links")
    prd.add_argument("--gamma-r", dest="gamma_r", type=float, required=True)
    prd.add_argument("--n", type=int, required=True)
    prd.add_argument("--m", type=int, required=True)
    prd.add_argument("--constant", type=float, default=1.5)
    prd.add_argument("--epsilon", type=float, default=0.05)
    prd.set_defaults(func=_cmd_predict)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", OutOfRegimeWarning)
            code = args.func(args)
        regime_flags = [w for w in caught if issubclass(w.category, OutOfRegimeWarning)]
        if regime_flags:
            for w in regime_flags:
                print(f"warning: {w.message}", file=sys.stderr)
            return REGIME_WARNING
        return code
    except (
        _UsageError,
        InvalidParameterError,
        InvalidRangeError,
        UnsupportedExponentError,
        NoSolutionError,
        OutOfValidityError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
