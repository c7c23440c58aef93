"""Command-line front end: ``cflimit {dim,pressure,construct,check,sample,experiment}``.

Every command prints (or writes) one JSON document carrying a schema
version, the full configuration and the result.  Exit codes: 0 ok,
2 usage or parse error, 3 computation failure, 4 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import os
import sys
from importlib import resources
from typing import Optional

import numpy as np

SCHEMA_VERSION = 1
DEFAULT_SEED = 0
WORKERS_ENV = "CFLIMIT_WORKERS"

EXIT_OK, EXIT_USAGE, EXIT_FAILURE, EXIT_INCONCLUSIVE = 0, 2, 3, 4


class UsageError(ValueError):
    pass


class ComputationError(RuntimeError):
    pass


# -- alphabets --------------------------------------------------------------------


def build_alphabet(spec: str):
    """``parse_set`` specs plus the constructions ``idelta:D[:NMAX]``,
    ``liouville:D:STAGES`` and ``R:D:NMAX``.  Returns ``(IndexSet, audit or None)``."""
    from .indexsets import build_I_delta, build_liouville_set, build_R, parse_set

    spec = spec.strip()
    head, _, rest = spec.partition(":")
    args = rest.split(":") if rest else []
    try:
        if head == "idelta":
            n_max = int(args[1]) if len(args) > 1 else 1 << 14
            res = build_I_delta(float(args[0]), n_max)
            return res.set, res.log
        if head == "liouville":
            res = build_liouville_set(float(args[0]), int(args[1]))
            return res.set, res.log
        if head == "R":
            res = build_R(float(args[0]), int(args[1]))
            return res.set, res.log
        return parse_set(spec), None
    except (IndexError, ValueError) as e:
        raise UsageError(f"cannot parse alphabet {spec!r}: {e}") from e


def _alphabet_spec(a) -> str:
    if a.file:
        return f"file:{a.file}"
    spec = a.set or a.family
    if not spec:
        raise UsageError("give an alphabet with --set, --family or --file")
    return spec


def _seed(v) -> int:
    s = int(v)
    if not 0 <= s < 2 ** 64:
        raise UsageError("seed must be a 64-bit unsigned value")
    return s


def _positive(name, v):
    if v is not None and not v > 0:
        raise UsageError(f"{name} must be positive")
    return v


# -- output -----------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, int) and not isinstance(x, bool) and abs(x) >= 2 ** 63:
        from .indexsets.constructions import describe_int
        return describe_int(x)
    return x


def document(command: str, config: dict, result: dict, timestamp: bool = True) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "config": config, "result": result}
    if timestamp:
        doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return _jsonable(doc)


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        keys = list(rows[0])
        w = csv.DictWriter(buf, keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _jsonable(r.get(k)) for k in keys})
    return buf.getvalue()


def emit(a, doc: dict, rows: Optional[list] = None) -> None:
    if a.format == "csv":
        text = f"# schema_version={SCHEMA_VERSION}\n" + _rows_csv(rows if rows is not None else [doc["result"]])
    else:
        text = json.dumps(doc, sort_keys=True, indent=None if a.compact else 2) + "\n"
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------------


def cmd_dim(a) -> int:
    from .pressure import bowen_dimension

    _positive("tol", a.tol)
    _positive("budget", a.budget)
    spec = _alphabet_spec(a)
    I, _ = build_alphabet(spec)
    if a.truncate:
        I = I.truncate(a.truncate)
    res = bowen_dimension(I, tol=a.tol, budget=a.budget)
    config = {"alphabet": spec, "truncate": a.truncate, "tol": a.tol, "budget": a.budget}
    out = {"lo": res.bracket.lo_float, "hi": res.bracket.hi_float, "width": res.bracket.hi_float - res.bracket.lo_float,
           "depth_used": res.evaluations, "converged": res.converged, "certified": True,
           "history": [list(h) for h in res.history]}
    emit(a, document("dim", config, out, not a.no_timestamp), [{k: out[k] for k in ("lo", "hi", "depth_used", "converged")}])
    return EXIT_OK if res.converged else EXIT_FAILURE


def cmd_pressure(a) -> int:
    from .pressure import lambda_bracket

    spec = _alphabet_spec(a)
    I, _ = build_alphabet(spec)
    rows = []
    for t in a.t:
        if t < 0:
            raise UsageError("t must be >= 0")
        lam = lambda_bracket(I, t, target_width=a.width)
        p = lam.log()
        rows.append({"t": t, "lambda_lo": lam.lo_float, "lambda_hi": lam.hi_float,
                     "pressure_lo": p.lo_float, "pressure_hi": p.hi_float})
    config = {"alphabet": spec, "t": a.t, "width": a.width}
    emit(a, document("pressure", config, {"rows": rows}, not a.no_timestamp), rows)
    return EXIT_OK


def cmd_construct(a) -> int:
    from .indexsets import (build_I_delta, build_liouville_set, build_R, check_stage_inequalities, make_geometric,
                            make_i0, write_alphabet_file)
    from .indexsets.constructions import ConstructionError, describe_int

    config = {"kind": a.kind, "delta": a.delta, "a": a.a, "stages": a.stages, "n_max": a.n_max, "count": a.count}
    extra: dict = {}
    log = None
    try:
        if a.kind == "i0":
            I = make_i0(_need(a.delta, "--delta"))
        elif a.kind == "geometric":
            I = make_geometric(int(_need(a.a, "--a")))
        elif a.kind == "R":
            res = build_R(_need(a.delta, "--delta"), _need(a.n_max, "--n-max"))
            I, log = res.set, res.log
            extra["lambda"] = [res.lam.lo_float, res.lam.hi_float]
        elif a.kind == "idelta":
            res = build_I_delta(_need(a.delta, "--delta"), a.n_max or 1 << 14)
            I, log = res.set, res.log
            extra.update({"n1": res.n1, "n2": res.n2, "lambda": [res.lam.lo_float, res.lam.hi_float],
                          "admitted_plus": res.admitted_plus, "rejected": res.rejected})
        else:
            res = build_liouville_set(_need(a.delta, "--delta"), int(_need(a.stages, "--stages")))
            I, log = res.set, res.log
            extra["stages"] = [{"n": s.n, "m": describe_int(s.m), "length": describe_int(s.length),
                                "last": describe_int(s.last), "lambda": [s.lam.lo_float, s.lam.hi_float],
                                "window": list(s.window)} for s in res.stages]
            extra["stage_checks"] = check_stage_inequalities(res)
    except ValueError as e:
        raise UsageError(str(e)) from e
    except ConstructionError as e:
        raise ComputationError(str(e)) from e
    elems = [describe_int(v) for v in leading_elements(I, a.count)]
    out = {"set": I.tag, "elements": elems, **extra}
    if log is not None:
        if a.audit:
            log.write(a.audit)
            out["audit_path"] = a.audit
        else:
            out["audit"] = log.records
    if a.alphabet_out:
        if not I.is_finite or I.blocks:
            raise UsageError("--alphabet-out needs a finite set without blocks")
        write_alphabet_file(a.alphabet_out, I, header=I.tag)
    emit(a, document("construct", config, out, not a.no_timestamp), [{"index": k, "element": v} for k, v in enumerate(elems)])
    return EXIT_OK


def leading_elements(I, count: int) -> list[int]:
    """The ``count`` smallest elements without expanding long blocks."""
    if not I.blocks:
        return [int(v) for v in I.first(count)]
    cand = [int(v) for v in I.explicit[:count]]
    for b in I.blocks:
        cand.extend(b.start + k for k in range(min(b.length, count)))
    if I.lazy is not None:
        cand.extend(v for v in I.first(count) if v not in cand)
    return sorted(set(cand))[:count]


def _need(v, flag):
    if v is None:
        raise UsageError(f"{flag} is required for this construction")
    return v


def cmd_check(a) -> int:
    from .indexsets import regularity_report

    spec = _alphabet_spec(a)
    I, _ = build_alphabet(spec)
    crit = [c.strip() for c in a.criteria.split(",") if c.strip()]
    rep = regularity_report(I, a.h, horizon=a.horizon, tolerance=a.tolerance, criteria=crit)
    config = {"alphabet": spec, "h": a.h, "criteria": crit, "horizon": a.horizon, "tolerance": a.tolerance}
    emit(a, document("check", config, rep.as_dict(), not a.no_timestamp),
         [{"criterion": k, "verdict": c.verdict, "lo": c.lo, "hi": c.hi} for k, c in rep.checks.items()])
    verdicts = [c.verdict for c in rep.checks.values()]
    return EXIT_INCONCLUSIVE if "inconclusive" in verdicts else EXIT_OK


def _context(spec: str, h, seed: int, tol: float):
    from .measure import ConformalContext

    I, _ = build_alphabet(spec)
    return ConformalContext.build(I, h=h, seed=seed, tol=tol)


def cmd_sample(a) -> int:
    from .measure import sample_batch

    _positive("depth", a.depth)
    _positive("samples", a.samples)
    spec = _alphabet_spec(a)
    ctx = _context(spec, a.h, _seed(a.seed), a.tol)
    b = sample_batch(ctx, a.depth, a.samples, burn_in=a.burn_in, stream=a.stream)
    config = {"alphabet": spec, "h": ctx.h, "h_given": a.h, "tol": a.tol, "seed": ctx.seed, "stream": a.stream,
              "depth": a.depth, "samples": a.samples, "burn_in": a.burn_in}
    if a.format == "csv":
        target = a.out or "/dev/stdout"
        b.to_csv(target, header=f"# schema_version={SCHEMA_VERSION}")
        return EXIT_OK
    lq = b.log_q()
    eta = b.eta()
    out = {"samples": [{"digits": [_jsonable(int(d)) if not hasattr(d, "log") else f"~e^{d.log:.9g}"
                                   for d in b.digits_of(r)],
                        "log_q": float(lq[r, -1]), "eta_sum": float(eta[r].sum()), "state": float(b.states[r])}
                       for r in range(b.n_samples)],
           "rejections": b.rejections, "bias_events": b.bias_events}
    emit(a, document("sample", config, out, not a.no_timestamp))
    return EXIT_OK


# -- experiments ------------------------------------------------------------------

EXPERIMENTS = ("khinchine", "extremality", "lyapunov", "liouville")

_EXPERIMENT_DEFAULTS = {
    "set": None, "h": None, "tol": 1e-4, "seed": DEFAULT_SEED, "stream": 0, "burn_in": 1000,
    "psi": ["log:h"], "K": 1.0, "depth": 10000, "samples": 1000, "prefix": None,
    "c_grid": [1.0], "steps": 10 ** 6, "replicas": 1000, "series_T": None,
}


def list_presets() -> list[str]:
    root = resources.files("cflimit") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    root = resources.files("cflimit") / "presets"
    p = root / f"{name}.json"
    if not p.is_file():
        raise UsageError(f"unknown preset {name!r}; available: {list_presets()}")
    return json.loads(p.read_text(encoding="utf-8"))


def _experiment_config(a) -> dict:
    cfg = dict(_EXPERIMENT_DEFAULTS)
    if a.preset:
        cfg.update(load_preset(a.preset))
    if a.config:
        with open(a.config, encoding="utf-8") as fh:
            cfg.update(json.load(fh))
    for k in _EXPERIMENT_DEFAULTS:
        v = getattr(a, k, None)
        if v is not None:
            cfg[k] = v
    if a.kind:
        cfg["experiment"] = a.kind
    if cfg.get("experiment") not in EXPERIMENTS:
        raise UsageError(f"experiment must be one of {EXPERIMENTS}")
    if not cfg.get("set"):
        raise UsageError("experiment needs an alphabet (--set or a preset)")
    if isinstance(cfg["psi"], str):
        cfg["psi"] = [cfg["psi"]]
    cfg["seed"] = _seed(cfg["seed"])
    for k in ("depth", "samples", "steps", "replicas", "K", "tol"):
        _positive(k, cfg[k])
    return cfg


def _psi(text: str, h: float):
    from .diophantine import ApproxFn

    name, _, arg = text.partition(":")
    if arg == "h":
        return ApproxFn(name, float(h))
    try:
        return ApproxFn.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from e


def run_experiment(cfg: dict) -> tuple[dict, list]:
    from . import diophantine as dio
    from .measure import lyapunov_estimate, sample_batch

    ctx = _context(cfg["set"], cfg["h"], cfg["seed"], cfg["tol"])
    cfg["h_used"] = ctx.h
    if ctx.h_bracket is not None:
        cfg["h_bracket"] = [ctx.h_bracket.lo_float, ctx.h_bracket.hi_float]
    kind = cfg["experiment"]
    if kind == "lyapunov":
        r = lyapunov_estimate(ctx, cfg["steps"], replicas=cfg["replicas"], burn_in=cfg["burn_in"],
                              stream=cfg["stream"], series_T=cfg["series_T"])
        return r.as_dict(), [r.as_dict()]
    batch = sample_batch(ctx, cfg["depth"], cfg["samples"], burn_in=cfg["burn_in"], stream=cfg["stream"])
    if kind == "extremality":
        r = dio.extremality_experiment(ctx, cfg["c_grid"], 0, 0, prefix=cfg["prefix"], batch=batch,
                                       stream=cfg["stream"])
        return r.as_dict(), [{"c": c, "fraction": f} for c, f in r.fractions.items()]
    if kind == "liouville":
        out, rows = {}, []
        for c in cfg["c_grid"]:
            f, _ = dio.liouville_fraction(batch, c)
            out[repr(float(c))] = f
            rows.append({"c": c, "fraction": f})
        return {"fractions": out, "depth": batch.depth, "n_samples": batch.n_samples}, rows
    results, rows = {}, []
    for text in cfg["psi"]:
        k = dio.khinchine_experiment(ctx, _psi(text, ctx.h), cfg["K"], 0, 0, prefix=cfg["prefix"], batch=batch,
                                     stream=cfg["stream"])
        d = k.as_dict()
        ok, trend = dio.trend_majorized(k.survival, k.bound, k.n_samples)
        d["trend_majorized"] = ok
        d["trend"] = trend
        results[text] = d
        for n in range(k.depth + 1):
            rows.append({"psi": text, "n": n, "survival": float(k.survival[n]), "bound": float(k.bound[n])})
    return {"psi": results}, rows


def cmd_experiment(a) -> int:
    if a.list_presets:
        sys.stdout.write("\n".join(list_presets()) + "\n")
        return EXIT_OK
    cfg = _experiment_config(a)
    result, rows = run_experiment(cfg)
    emit(a, document("experiment", cfg, result, not a.no_timestamp), rows)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def _add_common(p, alphabet: bool = True):
    if alphabet:
        g = p.add_argument_group("alphabet")
        g.add_argument("--set", help="full | 1,2,5 | 1-10 | geometric:A | i0:D | idelta:D[:NMAX] | "
                                     "liouville:D:STAGES | R:D:NMAX | file:PATH")
        g.add_argument("--family", help="alias of --set for tagged families, e.g. geometric:2")
        g.add_argument("--file", help="alphabet file: one integer per line, ascending, '#' comments")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--compact", action="store_true", help="single-line JSON")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker count for level sums (default ${WORKERS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cflimit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", help="certified bracket for the Hausdorff dimension of J_I")
    _add_common(p)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--budget", type=int, default=80, help="maximum number of pressure evaluations")
    p.add_argument("--truncate", type=int, help="use I cap [1, N]")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("pressure", help="certified brackets for lambda_t and P_I(t)")
    _add_common(p)
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--width", type=float, default=1e-6, help="target bracket width")
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("construct", help="build a named index set and its audit log")
    _add_common(p, alphabet=False)
    p.add_argument("kind", choices=("i0", "geometric", "R", "idelta", "liouville"))
    p.add_argument("--delta", type=float)
    p.add_argument("--a", type=int)
    p.add_argument("--stages", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--count", type=int, default=16, help="number of leading elements to list")
    p.add_argument("--audit", help="write the audit log as JSON lines here")
    p.add_argument("--alphabet-out", help="write a finite result as an alphabet file")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("check", help="regularity checkers (c1, c2, c3, lower_b, upper_b)")
    _add_common(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--criteria", default="c1,c2,c3,lower_b,upper_b")
    p.add_argument("--horizon", type=int)
    p.add_argument("--tolerance", type=float, default=64.0, help="largest accepted max/min ratio")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sample", help="sample points from mu_I")
    _add_common(p)
    p.add_argument("--h", type=float, help="exponent (default: solve for the dimension)")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--depth", type=int, default=32)
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=1000)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("experiment", help="Khinchine, extremality, Liouville and Lyapunov experiments")
    _add_common(p)
    p.add_argument("kind", nargs="?", choices=EXPERIMENTS)
    p.add_argument("--preset", help="shipped configuration (see --list-presets)")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--list-presets", action="store_true")
    p.add_argument("--h", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--stream", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--psi", nargs="+", help="power:C | scaled:EPS | log:ALPHA | log:h")
    p.add_argument("--K", type=float)
    p.add_argument("--depth", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--prefix", type=int, help="stabilization prefix (default depth // 10)")
    p.add_argument("--c-grid", dest="c_grid", type=float, nargs="+")
    p.add_argument("--steps", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--series-T", dest="series_T", type=int)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    if a.command == "experiment" and not a.list_presets and a.set is None and a.family:
        a.set = a.family
    if getattr(a, "command", None) == "experiment" and a.file:
        a.set = f"file:{a.file}"
    if a.workers is not None:
        if a.workers < 1:
            print("cflimit: --workers must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        os.environ[WORKERS_ENV] = str(a.workers)
    from .diophantine import HypothesisError
    from .measure import SamplerError
    try:
        return a.func(a)
    except UsageError as e:
        print(f"cflimit: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ComputationError, SamplerError, HypothesisError, ArithmeticError, RuntimeError) as e:
        print(f"cflimit: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except (ValueError, OSError) as e:
        print(f"cflimit: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
