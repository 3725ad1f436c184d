"""Command-line front end.

Every command prints a report ``{"schema", "manifest", "result"}``. The
manifest records the fully resolved configuration, so ``dispersion rerun
REPORT.json`` reproduces ``result`` byte for byte; only ``timestamp`` and
``elapsed_seconds`` may differ.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import sys
import time
from importlib import resources
from typing import Any, Callable

from . import __version__, experiments
from .bounds import expected_dispersion_bounds, minimal_dispersion_bounds
from .cover import GridCoverConfig, disp_certified, disp_certified_periodic
from .geometry import AxisBox, box_is_empty, periodic_box_is_empty
from .pointsio import PointFileError, read_points, write_points
from .rng import check_seed, replicate_rng
from .solvers import (DEFAULT_BUDGET, WorkBudgetExceeded, disp_brute_force, disp_exact,
                      disp_exact_1d_periodic)

SCHEMA = "report_schema_v1"
EXIT_ERROR = 1
EXIT_VERDICT = 3


class CommandError(Exception):
    """A command could not run with the given inputs."""


# --------------------------------------------------------------------------
# commands: each takes the resolved config dict and returns the result payload


def _file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def cmd_compute(cfg: dict[str, Any]) -> dict[str, Any]:
    try:
        p = read_points(cfg["input"])
    except OSError as exc:
        raise CommandError(f"cannot read {cfg['input']}: {exc.strerror}") from exc
    method, periodic = cfg["method"], cfg["periodic"]
    out: dict[str, Any] = {"method": method, "periodic": periodic, "n": len(p), "d": p.dim,
                           "input_sha256": _file_digest(cfg["input"])}
    if method == "cover":
        if cfg["delta"] is None:
            raise CommandError("--method cover requires --delta")
        gc = GridCoverConfig(cfg["delta"], p.dim, periodic)
        cv = disp_certified_periodic(p, gc, cfg["budget"]) if periodic else disp_certified(p, gc, cfg["budget"])
        out.update(lower=cv.lower, upper=cv.upper, width=cv.width, delta=gc.delta,
                   resolution=gc.m, certificate_width=gc.width)
        witness = cv.witness
    else:
        if periodic:
            if method != "exact" or p.dim != 1:
                raise CommandError("exact periodic dispersion is only available for d = 1 (use --method cover)")
            res = disp_exact_1d_periodic(p)
        elif method == "brute":
            res = disp_brute_force(p, cfg["budget"])
        else:
            res = disp_exact(p, cfg["budget"])
        out["value"] = res.value
        witness = res.witness
    assert witness is not None
    empty = box_is_empty(witness, p) if isinstance(witness, AxisBox) else periodic_box_is_empty(witness, p)
    out["witness"] = {"kind": "axis" if isinstance(witness, AxisBox) else "periodic",
                      "intervals": witness.as_list(), "volume": witness.volume, "empty": empty}
    return out


def _sim_config(cfg: dict[str, Any], n: int) -> experiments.SimConfig:
    return experiments.SimConfig(
        n=n, d=cfg["d"], reps=cfg["reps"], seed=cfg["seed"], method=cfg["method"],
        delta=cfg["delta"], periodic=cfg["periodic"], confidence=cfg["confidence"],
        workers=cfg["workers"], budget=cfg["budget"])


def cmd_estimate(cfg: dict[str, Any]) -> dict[str, Any]:
    return experiments.estimate_expected_dispersion(_sim_config(cfg, cfg["n"])).to_dict()


def cmd_inverse(cfg: dict[str, Any]) -> dict[str, Any]:
    return experiments.estimate_inverse(cfg["eps"], cfg["d"], _sim_config(cfg, 1), cfg["max_n"]).to_dict()


def cmd_bounds(cfg: dict[str, Any]) -> dict[str, Any]:
    if (cfg["n"] is None) == (cfg["eps"] is None):
        raise CommandError("give exactly one of --n or --eps")
    if cfg["n"] is not None:
        return expected_dispersion_bounds(cfg["n"], cfg["d"]).to_dict()
    return minimal_dispersion_bounds(cfg["eps"], cfg["d"]).to_dict()


def cmd_simulate(cfg: dict[str, Any]) -> dict[str, Any]:
    kind = cfg["kind"]
    common = dict(reps=cfg["reps"], seed=cfg["seed"], confidence=cfg["confidence"], workers=cfg["workers"])
    if kind == "coupon":
        return experiments.simulate_coupon(cfg["ell"], cfg["n"], **common)
    if kind == "anchored":
        return experiments.simulate_anchored_box(cfg["ell"], cfg["d"], **common)
    if kind == "gaps":
        return experiments.simulate_circle_gaps(cfg["n"], **common)
    if kind == "split":
        return experiments.simulate_split_lower_bound(cfg["n"], cfg["d"], **common)
    raise CommandError(f"unknown simulation {kind!r}")


def cmd_gen(cfg: dict[str, Any]) -> dict[str, Any]:
    if cfg["n"] < 0 or cfg["d"] < 1:
        raise CommandError("need n >= 0 and d >= 1")
    pts = replicate_rng(check_seed(cfg["seed"]), 0).random((cfg["n"], cfg["d"]))
    try:
        write_points(cfg["output"], pts)
    except OSError as exc:
        raise CommandError(f"cannot write {cfg['output']}: {exc.strerror}") from exc
    return {"path": cfg["output"], "n": cfg["n"], "d": cfg["d"], "sha256": _file_digest(cfg["output"])}


COMMANDS: dict[str, Callable[[dict[str, Any]], dict[str, Any]]] = {
    "compute": cmd_compute,
    "estimate": cmd_estimate,
    "inverse": cmd_inverse,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "gen": cmd_gen,
}

# argparse bookkeeping that is not part of a command's configuration
_NON_CONFIG = {"command", "format", "strict", "out", "manifest", "override_workers"}


# --------------------------------------------------------------------------
# reports


def run_command(name: str, cfg: dict[str, Any]) -> dict[str, Any]:
    start = time.perf_counter()
    result = COMMANDS[name](cfg)
    elapsed = time.perf_counter() - start
    manifest = {
        "subcommand": name,
        "config": dict(cfg),
        "tool_version": __version__,
        "seed": cfg.get("seed"),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "elapsed_seconds": elapsed,
        "schema": SCHEMA,
    }
    return {"schema": SCHEMA, "manifest": manifest, "result": result}


def load_schema() -> dict[str, Any]:
    """The published JSON schema for reports."""
    return json.loads(resources.files(__package__).joinpath(f"schemas/{SCHEMA}.json").read_text())


def to_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False, indent=2)


def payload_bytes(report: dict[str, Any]) -> bytes:
    """Canonical bytes of the reproducible part of a report."""
    return json.dumps(report["result"], sort_keys=True, allow_nan=False).encode()


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(obj, dict):
        rows: list[tuple[str, Any]] = []
        for k in sorted(obj):
            rows.extend(_flatten(obj[k], f"{prefix}.{k}" if prefix else str(k)))
        return rows
    if isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        rows = []
        for i, v in enumerate(obj):
            rows.extend(_flatten(v, f"{prefix}.{i}"))
        return rows
    if isinstance(obj, list):
        return [(prefix, "; ".join(str(v) for v in obj))]
    return [(prefix, obj)]


def to_csv(report: dict[str, Any]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    result = report["result"]
    if report["manifest"]["subcommand"] == "bounds":
        cols = ["name", "kind", "value", "log10", "log_space", "valid", "note"]
        writer.writerow(cols)
        for e in result["entries"]:
            writer.writerow(["" if e[c] is None else e[c] for c in cols])
    else:
        writer.writerow(["key", "value"])
        for key, value in _flatten(result):
            writer.writerow([key, "" if value is None else value])
    return buf.getvalue()


def verdict_failures(obj: Any, prefix: str = "") -> list[str]:
    """Paths of every verdict field (``ok`` or ``*_ok``) that is False."""
    out: list[str] = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            path = f"{prefix}.{k}" if prefix else k
            v = obj[k]
            if (k == "ok" or k.endswith("_ok")) and v is False:
                out.append(path)
            else:
                out.extend(verdict_failures(v, path))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out.extend(verdict_failures(v, f"{prefix}.{i}"))
    return out


# --------------------------------------------------------------------------
# argument parsing


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="also write the JSON report to this path")
    p.add_argument("--strict", action="store_true", help="exit nonzero when a bound verdict fails")


def _add_mc(p: argparse.ArgumentParser, seed_required: bool = True) -> None:
    p.add_argument("--reps", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--workers", type=_positive_int, default=1)


def _add_method(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=experiments.METHODS, default="exact")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dispersion", description="Dispersion of point sets in the unit cube.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="dispersion of a CSV point set")
    p.add_argument("input")
    p.add_argument("--method", choices=("exact", "brute", "cover"), default="exact")
    p.add_argument("--delta", type=float, default=None, help="certificate width for --method cover")
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET)
    _add_output(p)

    p = sub.add_parser("estimate", help="Monte Carlo estimate of the expected dispersion")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--d", type=_positive_int, required=True)
    _add_mc(p)
    _add_method(p)
    _add_output(p)

    p = sub.add_parser("inverse", help="smallest n with estimated expected dispersion <= eps")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--d", type=_positive_int, required=True)
    p.add_argument("--max-n", dest="max_n", type=_positive_int, default=1 << 16)
    _add_mc(p)
    _add_method(p)
    _add_output(p)

    p = sub.add_parser("bounds", help="closed-form bound table")
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--eps", type=float)
    p.add_argument("--d", type=_positive_int, required=True)
    _add_output(p)

    p = sub.add_parser("simulate", help="auxiliary random experiments")
    kinds = p.add_subparsers(dest="kind", required=True)
    k = kinds.add_parser("coupon")
    k.add_argument("--ell", type=_positive_int, required=True)
    k.add_argument("--n", type=int, required=True)
    _add_mc(k)
    _add_output(k)
    k = kinds.add_parser("anchored")
    k.add_argument("--ell", type=_positive_int, required=True)
    k.add_argument("--d", type=_positive_int, required=True)
    _add_mc(k)
    _add_output(k)
    k = kinds.add_parser("gaps")
    k.add_argument("--n", type=_positive_int, required=True)
    _add_mc(k)
    _add_output(k)
    k = kinds.add_parser("split")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--d", type=_positive_int, default=1)
    _add_mc(k)
    _add_output(k)

    p = sub.add_parser("gen", help="write a seeded uniform point set as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", "-o", required=True)
    _add_output(p)

    p = sub.add_parser("rerun", help="re-run the command recorded in a report or manifest")
    p.add_argument("manifest")
    p.add_argument("--workers", dest="override_workers", type=_positive_int, default=None,
                   help="worker threads for the re-run (results do not depend on it)")
    _add_output(p)
    return parser


def _load_manifest(path: str) -> tuple[str, dict[str, Any]]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CommandError(f"cannot load manifest {path}: {exc}") from exc
    manifest = data.get("manifest", data)
    if manifest.get("schema") != SCHEMA or "subcommand" not in manifest or "config" not in manifest:
        raise CommandError(f"{path} is not a {SCHEMA} report or manifest")
    if manifest["subcommand"] not in COMMANDS:
        raise CommandError(f"unknown subcommand {manifest['subcommand']!r} in manifest")
    return manifest["subcommand"], dict(manifest["config"])


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            name, cfg = _load_manifest(args.manifest)
            if args.override_workers is not None and "workers" in cfg:
                cfg["workers"] = args.override_workers
        else:
            name = args.command
            cfg = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}
        report = run_command(name, cfg)
    except (CommandError, PointFileError, WorkBudgetExceeded, ValueError, RuntimeError) as exc:
        print(f"dispersion: error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    text = to_json(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    sys.stdout.write(to_csv(report) if args.format == "csv" else text + "\n")
    if args.strict:
        failed = verdict_failures(report["result"])
        if failed:
            print(f"dispersion: verdict failures: {', '.join(failed)}", file=sys.stderr)
            return EXIT_VERDICT
    return 0
