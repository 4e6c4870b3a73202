"""Command line runner: one experiment per invocation, reported as JSON or CSV.

    twistlab norm --param vector='{"3": 1, "4": 1, "5": 1}' --param space=T
    twistlab run --config experiment.json --out report.json

Exit status: 0 on success, 1 when a run flags a violation, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from datetime import datetime, timezone
from fractions import Fraction
from importlib import metadata

import jsonschema
import numpy as np
import scipy

from . import centralizer as cz
from . import jl, params, twisted
from .coeff import EXACT, CoeffVector, as_dense
from .tsirelson import DEFAULT_CAP, dual_Tp_certificate, norm_T, norm_Tp

KINDS = ("norm", "dual", "centralizer", "delta", "duality", "dn", "growth", "commutator", "jl", "lsd")
CACHE_ENV = "TWISTLAB_CACHE_DIR"
CACHE_VERSION = 1

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(KINDS)},
        "parameters": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "outputPath": {"type": ["string", "null"]},
        "format": {"enum": ["json", "csv"]},
        "capDim": {"type": "integer", "minimum": 1},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
    },
}

# keys every row of a kind carries besides ``kind`` and ``seed``
ROW_KEYS = {
    "norm": ["space", "value"],
    "dual": ["p", "value", "lower", "upper"],
    "centralizer": ["omega", "value", "rho"],
    "delta": ["omega", "dim", "samples", "value", "rho"],
    "duality": ["check", "value", "bound", "violated"],
    "dn": ["parameter", "n", "estimate", "witnessId", "budget"],
    "growth": ["omega", "n", "value"],
    "commutator": ["n", "gap", "bound", "violated"],
    "jl": ["n", "M", "targetDim", "distortion", "headDim", "distortionE2"],
    "lsd": ["n", "m", "dimF", "limit", "violated"],
}

ROW_SCHEMA = {
    "type": "object",
    "required": ["kind", "seed"],
    "properties": {"kind": {"enum": list(KINDS)}, "seed": {"type": "integer"}},
    "allOf": [
        {"if": {"properties": {"kind": {"const": k}}},
         "then": {"required": keys}}
        for k, keys in ROW_KEYS.items()
    ],
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parameter parsing


def _need(p: dict, key: str, kind: str):
    if key not in p:
        raise UsageError(f"parameters.{key}: required for kind '{kind}'")
    return p[key]


def _int(p: dict, key: str, default=None, lo: int | None = None, hi: int | None = None) -> int:
    v = p.get(key, default)
    if v is None:
        raise UsageError(f"parameters.{key}: required")
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise UsageError(f"parameters.{key}: expected an integer, got {v!r}")
    v = int(v)
    if lo is not None and v < lo:
        raise UsageError(f"parameters.{key}: must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise UsageError(f"parameters.{key}: must be <= {hi}, got {v}")
    return v


def _p(p: dict, key: str = "p", default: float = 2.0) -> float:
    v = p.get(key, default)
    if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 1:
        raise UsageError(f"parameters.{key}: expected a number >= 1, got {v!r}")
    return float(v)


def _vector(p: dict, key: str = "vector") -> CoeffVector:
    v = _need(p, key, "this")
    try:
        if isinstance(v, dict):
            return CoeffVector.from_json(v)
        if isinstance(v, list):
            if all(isinstance(a, (int, str)) and not isinstance(a, bool) for a in v):
                return CoeffVector({j + 1: a for j, a in enumerate(v)}, EXACT)
            return CoeffVector.from_dense(np.asarray(v, dtype=float))
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise UsageError(f"parameters.{key}: {e}") from e
    raise UsageError(f"parameters.{key}: expected a {{index: value}} map or a list")


def _omega(p: dict, key: str = "omega") -> cz.CentralizerSpec:
    spec = p.get(key, "zero")
    aliases = {"zero": {"kind": "zero"}, "kalton-peck": {"kind": "kalton-peck"},
               "kalton-peck-id": {"kind": "kalton-peck"},
               "factorization": {"kind": "factorization", "p": 2.0}}
    if isinstance(spec, str):
        if spec not in aliases:
            raise UsageError(f"parameters.{key}: unknown centralizer {spec!r}; "
                             f"use one of {sorted(aliases)} or an object")
        spec = aliases[spec]
    try:
        return cz.CentralizerSpec.from_json(spec)
    except (TypeError, ValueError, KeyError) as e:
        raise UsageError(f"parameters.{key}: {e}") from e


def _check_dim(x: CoeffVector, cap: int, what: str = "vector"):
    if x.max_index > cap:
        raise UsageError(f"parameters.{what}: support reaches {x.max_index}, above the cap {cap}")


# ---------------------------------------------------------------------------
# cache of exact Tsirelson norms


def _cache_path() -> str | None:
    d = os.environ.get(CACHE_ENV)
    return os.path.join(d, f"tsirelson-v{CACHE_VERSION}.json") if d else None


def _cache_key(x: CoeffVector) -> str:
    text = json.dumps(x.to_json(), sort_keys=True)
    supp = x.support
    return f"{supp[0]}-{supp[-1]}:{hashlib.sha256(text.encode()).hexdigest()[:16]}"


def cached_norm_T(x: CoeffVector) -> Fraction:
    """Exact ``||x||_T`` memoized in ``$TWISTLAB_CACHE_DIR`` when it is set."""
    path = _cache_path()
    if path is None or x.is_zero():
        return norm_T(x)
    table = {"version": CACHE_VERSION, "entries": {}}
    if os.path.exists(path):
        with open(path) as f:
            loaded = json.load(f)
        if loaded.get("version") == CACHE_VERSION:
            table = loaded
    key = _cache_key(x)
    if key in table["entries"]:
        return Fraction(table["entries"][key])
    value = norm_T(x)
    table["entries"][key] = str(value)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    atomic_write(path, json.dumps(table, sort_keys=True))
    return value


# ---------------------------------------------------------------------------
# runners; each returns (rows, flagged)


def run_norm(p, seed, cap, tol):
    x = _vector(p)
    space = p.get("space", "T")
    if space == "T":
        value = cached_norm_T(x) if x.mode == EXACT else norm_T(x)
        exact = str(value) if isinstance(value, Fraction) else None
        return [{"space": "T", "value": float(value), "exact": exact}], False
    if space in ("T2", "Tp"):
        pp = 2.0 if space == "T2" else _p(p)
        return [{"space": space, "p": pp, "value": float(norm_Tp(x.to_float(), pp))}], False
    if space == "l2":
        return [{"space": "l2", "value": float(np.linalg.norm(as_dense(x)))}], False
    raise UsageError(f"parameters.space: unknown space {space!r}; use T, T2, Tp or l2")


def run_dual(p, seed, cap, tol):
    x = _vector(p)
    _check_dim(x, cap)
    pp = _p(p)
    c = dual_Tp_certificate(as_dense(x), pp, cap=cap, tol=tol)
    return [{"p": pp, "value": float(c.value), "lower": float(c.lower), "upper": float(c.upper)}], False


def run_centralizer(p, seed, cap, tol):
    x = _vector(p)
    om = _omega(p)
    val, rho = om.evaluate(as_dense(x))
    out = CoeffVector.from_dense(val).to_json()
    return [{"omega": om.to_json(), "value": out, "rho": float(rho)}], False


def run_delta(p, seed, cap, tol):
    om = _omega(p)
    dim = _int(p, "dim", 8, 1, cap)
    samples = _int(p, "samples", 1000, 1)
    r = cz.estimate_delta_report(om, dim, samples, seed)
    return [{"omega": om.to_json(), "dim": dim, "samples": samples, "value": r.value, "rho": r.rho,
             "worstA": r.a.tolist(), "worstX": r.x.tolist()}], False


def run_duality(p, seed, cap, tol):
    om = _omega(p)
    dim = _int(p, "dim", 8, 1, cap)
    samples = _int(p, "samples", 1000, 1)
    slack = float(p.get("slack", 0.05))
    if "deltaHat" in p:
        dh = float(p["deltaHat"])
    else:
        dh = cz.estimate_delta(om, dim, _int(p, "deltaSamples", samples, 1), seed)
    rep = twisted.duality_upper_check(om, dim, samples, dh, seed, slack)
    rows = [{"check": "upper", "value": rep.max_ratio, "bound": rep.bound, "violated": rep.violated,
             "deltaHat": dh, "message": rep.message}]
    flagged = rep.violated
    witnesses = _int(p, "witnesses", 0, 0)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
    for _ in range(witnesses):
        x, y = rng.normal(size=dim), rng.normal(size=dim)
        _, pairing, det = twisted.duality_witness((x, y), om, dh)
        bad = not det.certified or det.norm_w > 8 * dh + 2 + 1e-6
        flagged |= bad
        rows.append({"check": "witness", "value": pairing, "bound": det.norm_v, "violated": bad,
                     "normW": det.norm_w})
    return rows, flagged


_SPACES = {"l2": lambda p, cap: params.l2_space(),
           "T2": lambda p, cap: params.tp_space(2.0),
           "Tp": lambda p, cap: params.tp_space(_p(p)),
           "T2*": lambda p, cap: params.tp_dual_space(2.0, cap=None),
           "Z": lambda p, cap: params.twisted_space(_omega(p))}


def run_dn(p, seed, cap, tol):
    name = p.get("space", "l2")
    if name not in _SPACES:
        raise UsageError(f"parameters.space: unknown space {name!r}; use one of {sorted(_SPACES)}")
    space = _SPACES[name](p, cap)
    ns = p.get("n", 1)
    ns = ns if isinstance(ns, list) else [ns]
    b = p.get("budget", {})
    if not isinstance(b, dict):
        raise UsageError("parameters.budget: expected an object")
    try:
        budget = params.DnBudget(**{k: v for k, v in b.items()})
    except TypeError as e:
        raise UsageError(f"parameters.budget: {e}") from e
    rows = []
    for n in ns:
        n = _int({"n": n}, "n", lo=1)
        r = params.estimate_Dn(space, n, budget, seed)
        row = params.report_row(f"D_n[{space.name}]", n, r.lower, r.witness, budget, seed)
        row["saturated"] = r.saturated
        row["status"] = r.status
        rows.append(row)
    return rows, False


def run_growth(p, seed, cap, tol):
    om = _omega(p)
    ns = _need(p, "ns", "growth")
    if not isinstance(ns, list) or not ns:
        raise UsageError("parameters.ns: expected a nonempty list of integers")
    try:
        table = params.omega_growth_probe(om, ns)
    except ValueError as e:
        raise UsageError(f"parameters.ns: {e}") from e
    return [{"omega": om.to_json(), **r} for r in table], False


def run_commutator(p, seed, cap, tol):
    om = _omega(p)
    raw = _need(p, "blocks", "commutator")
    if not isinstance(raw, list) or not raw:
        raise UsageError("parameters.blocks: expected a nonempty list of vectors")
    blocks = [_vector({"b": b}, "b").to_float() for b in raw]
    try:
        seq = params.BlockSequence(tuple(blocks))
    except ValueError as e:
        raise UsageError(f"parameters.blocks: {e}") from e
    slack = float(p.get("slack", 2.0))
    budget = params.DnBudget(**p.get("budget", {"placements": 4, "restarts": 1, "sweeps": 2, "max_evals": 300}))
    g = params.commutator_gap(seq, om, budget, seed)
    bad = not g.within(slack)
    return [{"n": g.n, "gap": g.gap, "bound": g.bound, "slack": slack, "violated": bad,
             "D": g.D, "Ddual": g.D_dual}], bad


def run_jl(p, seed, cap, tol):
    om = _omega(p)
    n = _int(p, "n", 32, 2)
    M = _int(p, "M", 64, 1)
    seeds = _int(p, "seeds", 1, 1)
    c = float(p.get("c", jl.DEFAULT_C))
    rows = []
    for s in range(seed, seed + seeds):
        cloud = jl.random_cloud(n, M, s, y_part=bool(p.get("yPart", True)))
        sp = jl.log_split(cloud, om, _int(p, "samples", 200, 1), s)
        td = p.get("targetDim")
        td = jl.floor_dim(n, sp.head_dim, c) if td is None else _int(p, "targetDim", lo=1)
        try:
            comp = jl.jl_compress(cloud, sp, td, s, om, c)
        except ValueError as e:
            raise UsageError(f"parameters.targetDim: {e}") from e
        rows.append({"n": n, "M": M, "targetDim": td, "seed": s, "distortion": comp.distortion,
                     "headDim": sp.head_dim, "distortionE2": sp.distortion_E2, "logBase": "e"})
    return rows, False


def run_lsd(p, seed, cap, tol):
    n = _int(p, "n", lo=1)
    m = _int(p, "m", 1, 1)
    N = _int(p, "N", 2 * n + 8, n)
    count = _int(p, "subspaces", 1, 1)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    rows, flagged = [], False
    for _ in range(count):
        B = rng.normal(size=(N, n))
        E = [twisted.TwistedVector.from_coefficients(c) for c in B.T]
        F = twisted.build_F_m(E, m, N=N)
        limit = F.n + twisted.iterated_log(F.n, m) if not F.john_regime else F.n
        bad = F.dim > limit or not twisted.contains(F.basis, B)
        flagged |= bad
        rows.append({"n": F.n, "m": m, "dimF": F.dim, "limit": limit, "violated": bad,
                     "head": F.head, "johnRegime": F.john_regime, "dimE2": F.dim_E2})
    return rows, flagged


RUNNERS = {"norm": run_norm, "dual": run_dual, "centralizer": run_centralizer, "delta": run_delta,
           "duality": run_duality, "dn": run_dn, "growth": run_growth, "commutator": run_commutator,
           "jl": run_jl, "lsd": run_lsd}


# ---------------------------------------------------------------------------
# reports


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def run(config: dict) -> tuple[dict, bool]:
    """Validate ``config``, dispatch, and build the report; returns ``(report, flagged)``."""
    validate_config(config)
    kind = config["kind"]
    seed = int(config.get("seed", 0))
    cap = int(config.get("capDim", DEFAULT_CAP))
    tol = float(config.get("tolerance", 1e-9))
    start = time.perf_counter()
    rows, flagged = RUNNERS[kind](dict(config.get("parameters", {})), seed, cap, tol)
    rows = [_clean({"kind": kind, "seed": seed, **r}) for r in rows]
    validator = jsonschema.Draft202012Validator(ROW_SCHEMA)
    for r in rows:
        validator.validate(r)
    report = {
        "config": _clean(config),
        "rows": rows,
        "provenance": {
            "engine": {"artifact": _version(), "numpy": np.__version__, "scipy": scipy.__version__},
            "tolerances": {"tolerance": tol, "capDim": cap},
            "flagged": bool(flagged),
            # the only fields that change between identical runs
            "volatile": {"timestamp": datetime.now(timezone.utc).isoformat(),
                         "runtimeSeconds": time.perf_counter() - start},
        },
    }
    return report, bool(flagged)


def validate_config(config) -> None:
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(config), key=str)
    if errors:
        lines = []
        for e in errors:
            where = ".".join(str(s) for s in e.absolute_path) or "<config>"
            lines.append(f"{where}: {e.message}")
        raise UsageError("invalid config:\n  " + "\n  ".join(lines))


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    rows = report["rows"]
    cols = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for r in rows:
        w.writerow(["" if r.get(c) is None else
                    json.dumps(r[c], sort_keys=True) if isinstance(r.get(c), (dict, list)) else r[c]
                    for c in cols])
    return buf.getvalue()


def atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# argument handling


def _param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k, json.loads(v)
    except json.JSONDecodeError:
        return k, v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistlab", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (stdout when omitted)")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--cap-dim", type=int, dest="cap_dim")
    common.add_argument("--tolerance", type=float)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run the experiment described by --config")
    for kind in KINDS:
        sp = sub.add_parser(kind, parents=[common], help=f"run a '{kind}' experiment")
        sp.add_argument("--param", "-p", action="append", type=_param, default=[],
                        metavar="KEY=VALUE", help="parameter; VALUE is parsed as JSON when possible")
    return parser


def _load_config(args) -> dict:
    config: dict = {}
    if args.config:
        try:
            with open(args.config) as f:
                config = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object")
    if args.command != "run":
        if config.get("kind", args.command) != args.command:
            raise UsageError(f"config kind {config['kind']!r} does not match subcommand {args.command!r}")
        config["kind"] = args.command
        if args.param:
            config["parameters"] = {**config.get("parameters", {}), **dict(args.param)}
    elif not args.config:
        raise UsageError("run needs --config")
    for flag, key in (("seed", "seed"), ("out", "outputPath"), ("format", "format"),
                      ("cap_dim", "capDim"), ("tolerance", "tolerance")):
        v = getattr(args, flag)
        if v is not None:
            config[key] = v
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        report, flagged = run(config)
    except UsageError as e:
        print(f"twistlab: error: {e}", file=sys.stderr)
        return 2
    text = render(report, config.get("format", "json"))
    out = config.get("outputPath")
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)
    if flagged:
        print("twistlab: violation flagged; see the report rows", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
