"""Command-line front end: ``unildpc {basis,design,threshold,de,simulate,validate}``.

Every command takes ``--seed`` and ``--config FILE`` (a JSON object keyed by
option name, underscores or dashes); explicit flags override the file.
Output files carry their parameters: JSON under ``"_meta"``, CSV as leading
``#`` lines.  Nothing time- or host-dependent is written, so reruns are
byte-identical.

Exit codes: 0 success, 2 input error, 3 infeasible design, 4 precondition failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

from . import __version__
from .errors import (
    DesignInfeasibleError,
    MisuseError,
    ThresholdNotFoundError,
    UniLDPCError,
)

log = logging.getLogger("unildpc")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_PRECONDITION = 0, 2, 3, 4


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _read_json(text_or_path: str):
    """Parse a JSON literal, or load it from a file when the argument names one."""
    s = text_or_path.strip()
    if s[:1] in "[{":
        try:
            return json.loads(s)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from exc
    if not os.path.exists(text_or_path):
        raise InputError(f"file not found: {text_or_path}")
    with open(text_or_path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {text_or_path}: {exc}") from exc


def load_code(name: str):
    from .ensemble import REFERENCE_CODES, DegreeDistribution

    if name in REFERENCE_CODES:
        return REFERENCE_CODES[name]
    obj = _read_json(name)
    if isinstance(obj, dict) and "dd" in obj:
        obj = obj["dd"]
    return DegreeDistribution.from_json(obj)


def load_channel(text: str):
    from .density import channel_from_json, validate_channel

    spec = channel_from_json(_read_json(text))
    validate_channel(spec)
    return spec


def _grid(params):
    from .density import Grid

    return Grid(float(params["grid_range"]), int(params["grid_bins"]))


def _recorded(params):
    # output paths do not change results; leaving them out keeps reruns byte-identical
    return {k: v for k, v in params.items() if k != "out" and not k.endswith("_out")}


def _meta(command, params):
    return {"tool": "unildpc", "version": __version__, "command": command, "params": _recorded(params)}


def _csv_meta(command, params):
    return [f"tool=unildpc version={__version__} command={command}",
            "params=" + json.dumps(_recorded(params), sort_keys=True)]


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _positive(name, value, integer=False, allow_zero=False):
    ok = value >= 0 if allow_zero else value > 0
    if not ok or (integer and int(value) != value) or (isinstance(value, float) and math.isnan(value)):
        raise InputError(f"--{name.replace('_', '-')} must be a {'non-negative' if allow_zero else 'positive'} "
                         f"{'integer' if integer else 'number'}, got {value}")


# ---------------------------------------------------------------------------
# commands


def cmd_basis(p):
    from .decomposition import make_basis

    basis = make_basis(p["capacity"], p["levels_left"], p["levels_right"], placement=p["placement"])
    out = basis.to_json()
    out["_meta"] = _meta("basis", p)
    _write(p["out"], _dump(out))
    log.info("basis: %d x %d channels", *basis.shape)


def cmd_design(p):
    from .decomposition import default_levels, make_basis
    from .design import DesignProblem, sweep_rho
    from .threshold import basis_densities

    _positive("max_var_degree", p["max_var_degree"], integer=True)
    lo, hi = (float(v) for v in str(p["rho_mean_range"]).split(","))
    if not 2 <= lo <= hi:
        raise InputError("--rho-mean-range must be 'lo,hi' with 2 <= lo <= hi")
    basis = make_basis(p["capacity"], *default_levels(p["capacity"], int(p["levels"])))
    problem = DesignProblem(tuple(basis_densities(basis, _grid(p))), int(p["max_var_degree"]),
                            max_iter=int(p["max_iter"]))
    # rho = f x^(k-1) + (1-f) x^k has mean degree in [k, k+1]
    k_range = range(int(math.floor(lo)), int(math.floor(hi)) + 1)
    res = sweep_rho(problem, k_range, log=log.info)
    dd_out = res.dd.to_json()
    dd_out["_meta"] = _meta("design", p)
    _write(p["out"], _dump(dd_out))
    full = res.to_json()
    full["_meta"] = _meta("design", p)
    if p["result_out"]:
        _write(p["result_out"], _dump(full))
    log.info("design: rate %.6f", res.rate)


def cmd_threshold(p):
    from .threshold import universal_threshold

    dd = load_code(p["code"])
    if not p["tol"] >= 1e-4:
        raise InputError("--tol must be at least 1e-4")
    res = universal_threshold(dd, int(p["resolution"]), float(p["tol"]), grid=_grid(p), refine=bool(p["refine"]),
                              max_iter=int(p["max_iter"]), log=log.info)
    out = res.to_json()
    out["_meta"] = _meta("threshold", p)
    _write(p["out"], _dump(out))
    if p["csv_out"]:
        _write(p["csv_out"], res.evaluations_csv(_csv_meta("threshold", p)))


def cmd_de(p):
    from .density import make_density
    from .evolution import converges

    dd = load_code(p["code"])
    spec = load_channel(p["channel"])
    _positive("max_iter", p["max_iter"], integer=True)
    rep = converges(make_density(spec, _grid(p)), dd, int(p["max_iter"]), float(p["target"]))
    meta = _csv_meta("de", p) + [f"converged={str(rep.converged).lower()} iterations={rep.iterations_used} "
                                 f"reason={rep.reason}"]
    _write(p["out"], rep.to_csv(meta))
    log.info("de: converged=%s after %d iterations", rep.converged, rep.iterations_used)


def cmd_simulate(p):
    from .decoder import ber_csv, build_graph, measure_ber

    dd = load_code(p["code"])
    raw = _read_json(p["channels_file"])
    if not isinstance(raw, list):
        raise InputError("channels file must hold a JSON list of channel objects")
    from .density import channel_from_json, validate_channel

    channels = [channel_from_json(c) for c in raw]
    for c in channels:
        validate_channel(c)
    _positive("n", p["n"], integer=True)
    _positive("trials", p["trials"], integer=True, allow_zero=True)
    import numpy as np

    ss = np.random.SeedSequence(p["seed"])
    graph = build_graph(dd, int(p["n"]), np.random.default_rng(ss.spawn(1)[0]))
    if p["adjacency_out"]:
        _write(p["adjacency_out"], graph.to_adjacency())
    points = measure_ber(dd, int(p["n"]), channels, int(p["trials"]), p["seed"], int(p["max_iter"]), graph=graph,
                         log=log.info)
    _write(p["out"], ber_csv(points, _csv_meta("simulate", p)))


def cmd_validate(p):
    from .threshold import validate_conjecture

    dd = load_code(p["code"])
    _positive("count", p["count"], integer=True, allow_zero=True)
    _positive("mix_points", p["mix_points"], integer=True, allow_zero=True)
    rep = validate_conjecture(dd, float(p["capacity"]), int(p["count"]), int(p["mix_points"]), p["seed"],
                              int(p["resolution"]), _grid(p), int(p["max_iter"]), log=log.info)
    out = rep.to_json()
    out["_meta"] = _meta("validate", p)
    _write(p["out"], _dump(out))
    log.info("validate: %d tested, %d counterexamples", rep.tested, len(rep.counterexamples))


# ---------------------------------------------------------------------------
# argument handling

COMMANDS = {
    "basis": (cmd_basis, "write the equal-capacity basis set as JSON", {
        "capacity": (float, None, "channel capacity C in (0, 1)"),
        "levels_left": (int, None, "points in [0, xi) (default: 6-bit split)"),
        "levels_right": (int, None, "points in (xi, 1/2] (default: 6-bit split)"),
        "placement": (str, "p", "point spacing: 'p' (uniform error probability) or 'llr'"),
    }),
    "design": (cmd_design, "optimize lambda over the basis at one capacity", {
        "capacity": (float, None, "design capacity C"),
        "max_var_degree": (int, 50, "largest variable degree"),
        "rho_mean_range": (str, "12,13", "check mean-degree range 'lo,hi'"),
        "levels": (int, 63, "basis points (left + right)"),
        "max_iter": (int, 2000, "DE iteration cap"),
        "grid_bins": (int, 1023, "DE grid bins (odd)"),
        "grid_range": (float, 30.0, "DE grid half range in LLR units"),
        "result_out": (str, None, "also write the full design result JSON here"),
    }),
    "threshold": (cmd_threshold, "binary-search the universal threshold of a code", {
        "code": (str, None, "reference code name or degree-distribution JSON file"),
        "tol": (float, 0.01, "final bracket width"),
        "resolution": (int, 63, "basis points (left + right)"),
        "refine": (bool, False, "recheck the bracket with a 127-point basis"),
        "max_iter": (int, 2000, "DE iteration cap"),
        "grid_bins": (int, 1023, "DE grid bins (odd)"),
        "grid_range": (float, 30.0, "DE grid half range in LLR units"),
        "csv_out": (str, None, "evaluations CSV path"),
    }),
    "de": (cmd_de, "run density evolution of a code on one channel", {
        "code": (str, None, "reference code name or degree-distribution JSON file"),
        "channel": (str, None, "channel JSON literal or file"),
        "max_iter": (int, 2000, "iteration cap"),
        "target": (float, 1e-9, "error-probability target"),
        "grid_bins": (int, 2047, "grid bins (odd)"),
        "grid_range": (float, 30.0, "grid half range in LLR units"),
    }),
    "simulate": (cmd_simulate, "Monte Carlo BER of a code on a list of channels", {
        "code": (str, None, "reference code name or degree-distribution JSON file"),
        "channels_file": (str, None, "JSON list of channel objects"),
        "n": (int, 20000, "block length"),
        "trials": (int, 10, "frames per channel"),
        "max_iter": (int, 200, "decoder iteration cap"),
        "adjacency_out": (str, None, "write the Tanner graph adjacency here"),
    }),
    "validate": (cmd_validate, "test convergence on random channels and mixtures", {
        "code": (str, None, "reference code name or degree-distribution JSON file"),
        "capacity": (float, None, "capacity C"),
        "count": (int, 100, "random channels"),
        "mix_points": (int, 0, "random endpoint pairs, each mixed at gamma = 0.1 .. 0.9"),
        "resolution": (int, 63, "basis points (left + right)"),
        "max_iter": (int, 2000, "DE iteration cap"),
        "grid_bins": (int, 1023, "DE grid bins (odd)"),
        "grid_range": (float, 30.0, "DE grid half range in LLR units"),
    }),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="unildpc", description="Universal LDPC code design toolkit.")
    parser.add_argument("--version", action="version", version=f"unildpc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext, opts) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", help="JSON file of option values")
        sp.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        sp.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
        for opt, (typ, _default, h) in opts.items():
            flag = "--" + opt.replace("_", "-")
            if typ is bool:
                sp.add_argument(flag, action="store_const", const=True, default=None, help=h)
            else:
                sp.add_argument(flag, type=typ, default=None, help=h)
    return parser


def resolve(command, args, config):
    """Merge defaults < config file < explicit flags."""
    opts = COMMANDS[command][2]
    params = {k: d for k, (_, d, _) in opts.items()}
    params.update({"seed": 0, "out": None})
    for key, value in (config or {}).items():
        key = key.replace("-", "_")
        if key not in params:
            raise InputError(f"unknown config key {key!r} for {command}")
        typ = opts[key][0] if key in opts else (int if key == "seed" else str)
        try:
            params[key] = typ(value) if value is not None else None
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad value for {key}: {value!r}") from exc
    for key in params:
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    missing = [k for k, (_, d, _) in opts.items() if d is None and params[k] is None
               and k in ("capacity", "code", "channel", "channels_file")]
    if missing:
        raise InputError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return params


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(message)s")
    func = COMMANDS[args.command][0]
    try:
        config = _read_json(args.config) if args.config else None
        if config is not None and not isinstance(config, dict):
            raise InputError("config file must hold a JSON object")
        params = resolve(args.command, args, config)
        func(params)
    except DesignInfeasibleError as exc:
        print(f"error: design infeasible: {exc}", file=sys.stderr)
        if getattr(exc, "diagnostics", None):
            print(json.dumps(exc.diagnostics, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MisuseError, ThresholdNotFoundError) as exc:
        print(f"error: precondition failed: {exc}", file=sys.stderr)
        detail = getattr(exc, "detail", None)
        if detail:
            print(json.dumps(detail, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_PRECONDITION
    except (InputError, UniLDPCError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
