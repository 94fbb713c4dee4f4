"""``mmi`` command line: compute, sweep, verify, levy, generate.

Exit codes: 0 success, 1 inconsistency found, 2 invalid input,
3 exact-solver cap exceeded, 4 monotonicity violation in a sweep.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from mmi import caps
from mmi.core import FiniteMMSpace, as_exact, check_alpha, validate_space
from mmi.diameters import (
    diam_doubleprime,
    multi_partial_diameter,
    partial_diameter,
    partial_diameter_upper,
    underline_diam,
)
from mmi.errors import MMError, MonotonicityViolation, SizeLimitExceeded
from mmi.harness import SUITES, levy_rows, run_suite
from mmi.metrics import box_bounds, box_exact_tiny, prokhorov
from mmi.obsdiam import (
    obsdiam_aggregate_detail,
    obsdiam_doubleprime,
    obsdiam_exact,
    obsdiam_lower,
    underline_obsdiam,
)
from mmi.spaces import GeneratorSpec

EXIT_OK, EXIT_INCONSISTENT, EXIT_INVALID, EXIT_CAP, EXIT_MONOTONE = 0, 1, 2, 3, 4

SINGLE = ("partial-diameter", "obsdiam")
MULTI = ("multi-partial-diameter", "underline-diam", "diam-doubleprime", "underline-obsdiam", "obsdiam-doubleprime")
PAIR = ("prokhorov", "box")
INVARIANTS = SINGLE + MULTI + PAIR + ("obsdiam-aggregate", "diameter")


class InputError(ValueError):
    pass


@dataclass
class RunManifest:
    command: str
    input_digest: str | None
    seed: int | None
    mode: str
    caps_hit: list = field(default_factory=list)
    certified: bool = True
    wall_time: float | None = None


def _fmt(v) -> str:
    v = float(v)
    return "inf" if math.isinf(v) else f"{v:.12g}"


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# input


def _read(path: str) -> tuple[bytes, dict]:
    try:
        raw = sys.stdin.buffer.read() if path == "-" else open(path, "rb").read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    return raw, doc


def load_space(doc: dict, mode: str) -> FiniteMMSpace:
    if "generator" in doc:
        try:
            spec = GeneratorSpec.from_dict(doc["generator"])
        except TypeError as exc:
            raise InputError(f"bad generator spec: {exc}") from None
        return spec.build()
    if mode == "rational":
        bad = [w for w in doc.get("weights", []) if isinstance(w, float)]
        if bad:
            raise InputError("rational mode needs weights as decimal strings, got JSON numbers")
    return validate_space(doc)


def _scalar(text: str, mode: str):
    if mode == "rational":
        v = as_exact(text)
        if v is None:
            raise InputError(f"not an exact number: {text!r}")
        return v
    try:
        return float(text)
    except ValueError:
        raise InputError(f"not a number: {text!r}") from None


def _vector(text: str, mode: str) -> tuple:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise InputError("--abar needs a comma list")
    return tuple(_scalar(s, mode) for s in items)


def _digest(*blobs: bytes) -> str:
    h = hashlib.sha256()
    for b in blobs:
        h.update(b)
    return h.hexdigest()


def _manifest(args, command: str, digest: str | None, start: float, hits: list) -> dict:
    m = RunManifest(command, digest, getattr(args, "seed", None), args.mode, sorted(set(hits)), caps.certified(),
                    None if args.mode == "rational" else round(time.perf_counter() - start, 6))
    return asdict(m)


# ---------------------------------------------------------------------------
# evaluation


def evaluate(space: FiniteMMSpace, name: str, mode: str, alpha=None, abar=None, other=None, seed: int = 0,
             hits: list | None = None):
    """Return ``(value, result_mode, witness)`` for one invariant."""
    hits = hits if hits is not None else []
    heuristic = mode == "heuristic"
    if name in SINGLE and alpha is None:
        raise InputError(f"{name} needs --alpha")
    if name in MULTI and abar is None:
        raise InputError(f"{name} needs --abar")
    if name in PAIR and other is None:
        raise InputError(f"{name} needs --other")
    if alpha is not None:
        alpha = check_alpha(alpha)

    def guarded(exact_fn, fallback):
        try:
            return exact_fn()
        except SizeLimitExceeded as exc:
            hits.append(exc.what)
            if not heuristic or fallback is None:
                raise
            return fallback()

    if name == "diameter":
        return space.support_diameter(), "exact", None
    if name == "partial-diameter":
        if heuristic:
            return partial_diameter_upper(space, alpha, 50), "upper_bound", None
        return partial_diameter(space, alpha), "exact", None
    if name == "obsdiam":
        if heuristic:
            r = obsdiam_lower(space, alpha, seed=seed)
        else:
            r = obsdiam_exact(space, alpha)
        return r.value, r.mode, None if r.witness is None else list(map(float, r.witness.values))
    if name == "multi-partial-diameter":
        return multi_partial_diameter(space, abar), "exact", None
    if name == "underline-diam":
        return underline_diam(space, abar), "exact", None
    if name == "diam-doubleprime":
        return diam_doubleprime(space, abar), "exact", None
    if name in ("underline-obsdiam", "obsdiam-doubleprime"):
        fn = underline_obsdiam if name == "underline-obsdiam" else obsdiam_doubleprime
        r = guarded(lambda: fn(space, abar, mode="heuristic" if heuristic else "exact", seed=seed),
                    lambda: fn(space, abar, mode="heuristic", seed=seed))
        return r.value, r.mode, None if r.witness is None else list(map(float, r.witness.values))
    if name == "obsdiam-aggregate":
        v, m = obsdiam_aggregate_detail(space)
        if m != "exact":
            hits.append("obsdiam_exact")
            if not heuristic:
                raise SizeLimitExceeded("obsdiam_exact", len(space.support), caps.cap("obsdiam_exact"))
        return v, m, None
    if name == "prokhorov":
        if space.size != other.size or space.labels != other.labels:
            raise InputError("prokhorov needs two measures on the same labeled metric")
        return prokhorov(space.dist, space.weights, other.weights), "exact", None
    if name == "box":
        est = guarded(lambda: box_exact_tiny(space, other), lambda: box_bounds(space, other))
        if est.mode == "exact":
            return est.upper, "exact", None
        return est.upper, "upper_bound", {"lower": est.lower, "upper": est.upper}
    raise InputError(f"unknown invariant {name!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_compute(args) -> int:
    start, hits = time.perf_counter(), []
    raw, doc = _read(args.input)
    blobs = [raw]
    space = load_space(doc, args.mode)
    other = None
    if args.other:
        raw2, doc2 = _read(args.other)
        blobs.append(raw2)
        other = load_space(doc2, args.mode)
    alpha = _scalar(args.alpha, args.mode) if args.alpha is not None else None
    abar = _vector(args.abar, args.mode) if args.abar is not None else None
    value, rmode, witness = evaluate(space, args.invariant, args.mode, alpha, abar, other, args.seed, hits)
    print(_fmt(value))
    if args.out:
        payload = {"invariant": args.invariant, "alpha": None if alpha is None else str(alpha),
                   "abar": None if abar is None else [str(a) for a in abar], "value": _fmt(value),
                   "result_mode": rmode, "witness": witness,
                   "manifest": _manifest(args, "compute", _digest(*blobs), start, hits)}
        _emit(_dump(payload), args.out)
    return EXIT_OK


def _grid(spec: str, space: FiniteMMSpace, mode: str) -> list:
    if spec == "breakpoints":
        masses = sorted((space.weights[i] for i in space.support), reverse=True)
        out, acc = [], 0
        for m in masses:
            acc = acc + m
            out.append(min(acc, 1) if not isinstance(acc, float) else min(round(acc, 12), 1.0))
        return out
    parts = spec.split(":")
    if len(parts) != 3:
        raise InputError("grid must be start:stop:step or 'breakpoints'")
    start, stop, step = (as_exact(p) if mode == "rational" else float(p) for p in parts)
    if start is None or stop is None or step is None or not step > 0:
        raise InputError(f"bad grid {spec!r}")
    out, k = [], 0
    while True:
        a = start + k * step
        if a > stop + (0 if mode == "rational" else 1e-12):
            break
        out.append(a if mode == "rational" else round(a, 12))
        k += 1
    return out


def cmd_sweep(args) -> int:
    start, hits = time.perf_counter(), []
    raw, doc = _read(args.input)
    space = load_space(doc, args.mode)
    if args.invariant not in SINGLE:
        raise InputError(f"sweep supports {', '.join(SINGLE)}")
    grid = _grid(args.grid, space, args.mode)
    rows, prev = [], None
    for a in grid:
        value, rmode, _ = evaluate(space, args.invariant, args.mode, a, seed=args.seed, hits=hits)
        if rmode == "exact" and prev is not None and value < prev - 1e-9:
            raise MonotonicityViolation(f"value dropped from {prev} to {value} at alpha={a}")
        if rmode == "exact":
            prev = value
        rows.append((_fmt(a), _fmt(value), rmode))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "value", "mode"])
    w.writerows(rows)
    buf.write("# manifest: " + json.dumps(_manifest(args, "sweep", _digest(raw), start, hits), sort_keys=True) + "\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    start = time.perf_counter()
    rep = run_suite(args.suite, args.count, args.seed)
    payload = rep.to_dict()
    payload["manifest"] = _manifest(args, f"verify {args.suite}", None, start, [])
    if args.out:
        _emit(_dump(payload), args.out)
    status = "ok" if rep.ok else "INCONSISTENT"
    print(f"{args.suite}: {rep.count} instances, {rep.checks} checks, {len(rep.failures)} inconsistencies ({status})")
    if not rep.ok:
        sys.stderr.write(_dump(rep.failures[:5]))
    return EXIT_OK if rep.ok else EXIT_INCONSISTENT


def cmd_levy(args) -> int:
    start = time.perf_counter()
    try:
        ns = [int(s) for s in args.ns.split(",") if s.strip()]
    except ValueError:
        raise InputError("--ns must be a comma list of integers") from None
    alpha = _scalar(args.alpha, args.mode)
    rows = levy_rows(ns, args.rule, alpha, args.samples, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "obsdiam_lower", "partial_estimate"])
    for r in rows:
        w.writerow([r["n"], _fmt(r["obsdiam_lower"]), _fmt(r["partial_estimate"])])
    buf.write("# manifest: " + json.dumps(_manifest(args, f"levy {args.rule}", None, start, []), sort_keys=True) + "\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    start = time.perf_counter()
    if args.spec:
        try:
            spec = GeneratorSpec.from_dict(json.loads(args.spec))
        except (json.JSONDecodeError, TypeError) as exc:
            raise InputError(f"bad --spec: {exc}") from None
    else:
        spec = GeneratorSpec(kind=args.kind, n=args.n, r=args.r, N=args.N, m=args.m, k=args.k, seed=args.seed,
                             atomic_bias=args.atomic_bias)
    space = spec.build()
    doc = space.to_document()
    doc["spec"] = spec.to_dict()
    doc["manifest"] = _manifest(args, "generate", _digest(json.dumps(spec.to_dict(), sort_keys=True).encode()),
                                start, [])
    _emit(_dump(doc), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmi", description="Invariants of finite metric measure spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=0):
        sp.add_argument("--mode", choices=("exact", "heuristic", "rational"), default="exact")
        sp.add_argument("--seed", type=int, default=seed)
        sp.add_argument("--out", default=None, help="output file (stdout if omitted)")

    c = sub.add_parser("compute", help="evaluate one invariant")
    c.add_argument("--input", required=True, help="space document or generator spec (JSON, '-' for stdin)")
    c.add_argument("--invariant", required=True, choices=INVARIANTS)
    c.add_argument("--alpha")
    c.add_argument("--abar", help="comma list")
    c.add_argument("--other", help="second space for prokhorov/box")
    common(c)
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("sweep", help="alpha curve as CSV")
    s.add_argument("--input", required=True)
    s.add_argument("--invariant", required=True, choices=SINGLE)
    s.add_argument("--grid", default="breakpoints", help="start:stop:step or 'breakpoints'")
    common(s)
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="seeded verification campaign")
    v.add_argument("--suite", required=True, choices=SUITES)
    v.add_argument("--count", type=int, default=100)
    common(v)
    v.set_defaults(func=cmd_verify)

    lv = sub.add_parser("levy", help="sphere family sweep as CSV")
    lv.add_argument("--ns", default="2,4,8,16,32")
    lv.add_argument("--rule", choices=("one", "sqrt"), default="one")
    lv.add_argument("--alpha", default="0.5")
    lv.add_argument("--samples", type=int, default=400)
    common(lv)
    lv.set_defaults(func=cmd_levy)

    g = sub.add_parser("generate", help="emit a space document")
    g.add_argument("--spec", help="GeneratorSpec as JSON (overrides the flags below)")
    g.add_argument("--kind", choices=("sphere", "grid", "random_discrete"), default="random_discrete")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--r", type=float, default=1.0)
    g.add_argument("--N", type=int, default=8)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--atomic-bias", type=float, default=0.0)
    common(g)
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except SizeLimitExceeded as exc:
        sys.stderr.write(f"cap exceeded: {exc} (retry with --mode heuristic or MMI_CAP_OVERRIDE)\n")
        return EXIT_CAP
    except MonotonicityViolation as exc:
        sys.stderr.write(f"monotonicity violation: {exc}\n")
        return EXIT_MONOTONE
    except (InputError, MMError, ValueError, KeyError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
