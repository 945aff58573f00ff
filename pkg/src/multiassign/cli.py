"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 infeasible program, 3 node budget
exhausted, 4 verification failure or refused reconstruction.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import crypto, maps, scheme
from .access import (
    RampAccessStructure,
    classify_participants,
    structure_from_dict,
)
from .exceptions import (
    BudgetExceeded,
    CapacityError,
    MultiAssignError,
    ReconstructionRefused,
)
from .ilp import AVG, WORST, IpSolution, build_for, classify_by_ip, solution_to_map, solve_structure, to_lp_text
from .lp import Status

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_BUDGET = 3
EXIT_VERIFY = 4


class InputError(Exception):
    pass


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_structure_arg(path):
    doc = _read_json(path)
    try:
        return structure_from_dict(doc)
    except MultiAssignError as exc:
        raise InputError(f"{path}: {exc}") from None


def load_map_arg(path):
    doc = _read_json(path)
    try:
        return maps.AssignmentMap.from_dict(doc)
    except MultiAssignError as exc:
        raise InputError(f"{path}: {exc}") from None


def frac_text(f, decimals=False):
    text = str(f)
    if decimals and f.denominator != 1:
        text += f" (~{float(f):.3f})"
    return text


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _write_map(path, amap):
    Path(path).write_text(json.dumps(amap.to_dict(), indent=2) + "\n")


def _map_payload(amap):
    r = maps.rates(amap)
    return {"map": amap.to_dict(), "rates": r.to_dict()}


def _map_text(amap, names=None):
    r = maps.rates(amap)
    return (f"{amap.format(names)}\naverage rate {frac_text(r.average, True)}, "
            f"worst rate {frac_text(r.worst, True)}")


# solve ----------------------------------------------------------------------

def cmd_solve(args):
    s = load_structure_arg(args.structure)
    mode = args.mode if isinstance(s, RampAccessStructure) else None
    if args.lp_text:
        Path(args.lp_text).write_text(to_lp_text(build_for(s, args.objective, mode)) + "\n")
    sol = solve_structure(s, args.objective, mode, budget=args.budget)
    payload = {"status": sol.status.value, "objective": sol.objective, "nodes": sol.node_count}
    if sol.status == Status.INFEASIBLE:
        _emit(args, payload, "infeasible: no assignment map satisfies the program")
        return EXIT_INFEASIBLE
    if sol.status == Status.BUDGET:
        _emit(args, payload, f"budget exceeded after {sol.node_count} nodes; no optimality proof")
        return EXIT_BUDGET
    amap = solution_to_map(s, sol)
    if args.out:
        _write_map(args.out, amap)
    payload.update(_map_payload(amap))
    _emit(args, payload, f"optimal objective {sol.objective} ({sol.node_count} nodes)\n"
                         + _map_text(amap, s.names))
    return EXIT_OK


# construct --------------------------------------------------------------------

CONSTRUCTIONS = ("cumulative", "modified", "ramp-cumulative", "construction2")


def _construct(s, method, per_level, budget):
    if method == "construction2":
        if not isinstance(s, RampAccessStructure):
            raise InputError("construction2 needs a ramp structure")
        return maps.construction2_ramp(s, per_level, budget=budget)
    if method == "ramp-cumulative":
        if not isinstance(s, RampAccessStructure):
            raise InputError("ramp-cumulative needs a ramp structure")
        return maps.ramp_cumulative_map(s)
    if isinstance(s, RampAccessStructure):
        raise InputError(f"{method} needs a perfect structure")
    if method == "cumulative":
        return maps.cumulative_map(s)
    return maps.modified_cumulative_map(s)


def cmd_construct(args):
    s = load_structure_arg(args.structure)
    out = _construct(s, args.method, args.per_level, args.budget)
    if isinstance(out, maps.RampRecipe):
        payload = {"levels": [m.to_dict() for m in out.maps], "rates": out.rates.to_dict()}
        if args.out:
            Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
        _emit(args, payload, out.format())
        return EXIT_OK
    if args.out:
        _write_map(args.out, out)
    _emit(args, _map_payload(out), _map_text(out, s.names))
    return EXIT_OK


# compare ----------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    construction: str
    t: int | None
    L: int
    m: int | None
    average: Fraction | None
    worst: Fraction | None
    status: str
    seconds: float

    CSV_FIELDS = ("construction", "t", "L", "m", "average_num", "average_den",
                  "worst_num", "worst_den", "status", "seconds")

    def to_csv(self):
        def part(f, which):
            if f is None:
                return ""
            return str(f.numerator if which == 0 else f.denominator)
        return {
            "construction": self.construction,
            "t": "" if self.t is None else str(self.t),
            "L": str(self.L),
            "m": "" if self.m is None else str(self.m),
            "average_num": part(self.average, 0),
            "average_den": part(self.average, 1),
            "worst_num": part(self.worst, 0),
            "worst_den": part(self.worst, 1),
            "status": self.status,
            "seconds": f"{self.seconds:.6f}",
        }

    @classmethod
    def from_csv(cls, rec):
        def opt_int(v):
            return int(v) if v != "" else None

        def opt_frac(n, d):
            return Fraction(int(n), int(d)) if n != "" else None
        return cls(rec["construction"], opt_int(rec["t"]), int(rec["L"]), opt_int(rec["m"]),
                   opt_frac(rec["average_num"], rec["average_den"]),
                   opt_frac(rec["worst_num"], rec["worst_den"]),
                   rec["status"], float(rec["seconds"]))

    def to_json(self):
        rec = self.to_csv()
        rec["average"] = None if self.average is None else str(self.average)
        rec["worst"] = None if self.worst is None else str(self.worst)
        return rec


def _row_from_map(name, amap, seconds, status="ok"):
    r = maps.rates(amap)
    return ComparisonRow(name, amap.t, amap.L, amap.m, r.average, r.worst, status, seconds)


def compare_rows(s, budget=None):
    """One row per construction that applies to ``s``."""
    rows = []

    def timed(name, fn):
        start = time.perf_counter()
        try:
            out = fn()
        except BudgetExceeded:
            return ComparisonRow(name, None, getattr(s, "L", 1), None, None, None,
                                 Status.BUDGET.value, time.perf_counter() - start)
        except MultiAssignError as exc:
            return ComparisonRow(name, None, getattr(s, "L", 1), None, None, None,
                                 f"error: {exc}", time.perf_counter() - start)
        elapsed = time.perf_counter() - start
        if isinstance(out, maps.RampRecipe):
            return ComparisonRow(name, None, out.L, sum(m.m for m in out.maps),
                                 out.rates.average, out.rates.worst, "ok", elapsed)
        if isinstance(out, IpSolution):
            sol = out
            if not sol.optimal:
                return ComparisonRow(name, None, sol.program.L, None, None, None,
                                     sol.status.value, elapsed)
            return _row_from_map(name, solution_to_map(s, sol), elapsed, sol.status.value)
        return _row_from_map(name, out, elapsed)

    def ip(kind, mode=None):
        return lambda: solve_structure(s, kind, mode, budget=budget)

    if isinstance(s, RampAccessStructure):
        rows.append(timed("ramp-cumulative", lambda: maps.ramp_cumulative_map(s)))
        rows.append(timed("construction2", lambda: maps.construction2_ramp(s, maps.CUMULATIVE, budget)))
        rows.append(timed("construction2-ip", lambda: maps.construction2_ramp(s, maps.IP_WORST, budget)))
        rows.append(timed("ip-ramp-exact", ip(AVG, maps.EXACT)))
        rows.append(timed("ip-ramp-relaxed", ip(AVG, maps.RELAXED)))
    else:
        rows.append(timed("cumulative", lambda: maps.cumulative_map(s)))
        if s.complete:
            rows.append(timed("modified", lambda: maps.modified_cumulative_map(s)))
        rows.append(timed("ip-avg", ip(AVG)))
        rows.append(timed("ip-worst", ip(WORST)))
    return rows


def write_comparison_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=ComparisonRow.CSV_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow(row.to_csv())


def read_comparison_csv(path):
    with open(path, newline="") as fh:
        return [ComparisonRow.from_csv(rec) for rec in csv.DictReader(fh)]


def format_table(rows):
    head = ("construction", "t", "L", "m", "avg rate", "worst rate", "status", "seconds")
    body = []
    for r in rows:
        body.append((
            r.construction,
            "" if r.t is None else str(r.t),
            str(r.L),
            "" if r.m is None else str(r.m),
            "" if r.average is None else frac_text(r.average, True),
            "" if r.worst is None else frac_text(r.worst, True),
            r.status,
            f"{r.seconds:.3f}",
        ))
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(x.ljust(w) for x, w in zip(head, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in body]
    return "\n".join(lines)


def cmd_compare(args):
    s = load_structure_arg(args.structure)
    rows = compare_rows(s, args.budget)
    if args.csv:
        write_comparison_csv(rows, args.csv)
    _emit(args, [r.to_json() for r in rows], format_table(rows))
    return EXIT_OK


# split / combine ----------------------------------------------------------------

def cmd_split(args):
    amap = load_map_arg(args.map)
    s = load_structure_arg(args.structure) if args.structure else None
    try:
        secret = Path(args.secret).read_bytes()
    except OSError as exc:
        raise InputError(f"{args.secret}: {exc.strerror}") from None
    rng = random.Random(args.seed) if args.seed is not None else None
    bundles = scheme.distribute(secret, amap, s, args.prime, rng, args.mode)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for b in bundles:
        path = outdir / f"V{b.participant + 1}.share"
        path.write_bytes(scheme.serialize_bundle(b))
        written.append(str(path))
    _emit(args, {"bundles": written}, "\n".join(written))
    return EXIT_OK


def cmd_combine(args):
    bundles = []
    for path in args.bundles:
        try:
            bundles.append(scheme.deserialize_bundle(Path(path).read_bytes()))
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror}") from None
        except MultiAssignError as exc:
            raise InputError(f"{path}: {exc}") from None
    amap = load_map_arg(args.map) if args.map else None
    try:
        secret = scheme.reconstruct(bundles, amap)
    except ReconstructionRefused as exc:
        _emit(args, {"status": "refused", "have": exc.have, "need": exc.need}, str(exc))
        return EXIT_VERIFY
    if args.out:
        Path(args.out).write_bytes(secret)
        _emit(args, {"status": "ok", "bytes": len(secret), "out": args.out},
              f"wrote {len(secret)} bytes to {args.out}")
    else:
        if args.json:
            _emit(args, {"status": "ok", "secret_hex": secret.hex()}, "")
        else:
            sys.stdout.buffer.write(secret)
            sys.stdout.flush()
    return EXIT_OK


# verify / classify / ideal-check --------------------------------------------------

def cmd_verify(args):
    amap = load_map_arg(args.map)
    s = load_structure_arg(args.structure)
    if args.oracle:
        rep = scheme.verify_scheme(amap, s, args.mode, args.oracle_budget, args.prime)
    else:
        rep = maps.verify(amap, s, args.mode)
    _emit(args, {"ok": rep.ok, "violations": rep.violations, "notes": rep.notes}, str(rep))
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_classify(args):
    s = load_structure_arg(args.structure)
    labels = classify_participants(s)
    payload = {"labels": list(labels)}
    lines = [f"V{i + 1}: {lab}" for i, lab in enumerate(labels)]
    if args.by_ip:
        if isinstance(s, RampAccessStructure):
            raise InputError("--by-ip applies to perfect structures")
        ip_labels = classify_by_ip(s, args.budget)
        payload["ip_labels"] = list(ip_labels)
        payload["agree"] = tuple(ip_labels) == tuple(labels)
        if payload["agree"]:
            lines.append("solver agrees")
        else:
            lines.append("solver labels differ: " + ", ".join(ip_labels))
            if not s.complete:
                lines.append("(incomplete structure: unlisted sets may force shares onto a participant"
                             " that no listed forbidden set makes significant)")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_ideal_check(args):
    s = load_structure_arg(args.structure)
    if isinstance(s, RampAccessStructure):
        raise InputError("ideal-check applies to perfect structures")
    res = maps.ideal_partition(s, args.budget)
    payload = {"ideal": res.ideal, "worst": str(res.worst)}
    if res.ideal:
        payload["t"] = res.t
        payload["blocks"] = [[i for i in range(s.n) if b >> i & 1] for b in res.blocks]
    _emit(args, payload, res.format(s.names))
    return EXIT_OK


# parser ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget", type=int, default=None,
                        help="branch-and-bound node budget (default from MULTIASSIGN_NODE_BUDGET or 10^7)")

    p = argparse.ArgumentParser(prog="multiassign", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", parents=[common], help="optimal map from the integer program")
    sp.add_argument("structure")
    sp.add_argument("--objective", choices=(AVG, WORST), default=AVG)
    sp.add_argument("--mode", choices=(maps.EXACT, maps.RELAXED), default=maps.EXACT,
                    help="ramp structures only")
    sp.add_argument("--out", help="write the map JSON here")
    sp.add_argument("--lp-text", help="also dump the program in LP format")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("construct", parents=[common], help="run an explicit construction")
    sp.add_argument("structure")
    sp.add_argument("--method", choices=CONSTRUCTIONS, default="cumulative")
    sp.add_argument("--per-level", choices=(maps.CUMULATIVE, maps.MODIFIED, maps.IP_AVG, maps.IP_WORST),
                    default=maps.CUMULATIVE, help="map used at each level by construction2")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("compare", parents=[common], help="rate table across constructions")
    sp.add_argument("structure")
    sp.add_argument("--csv", help="also write the table as CSV")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("split", parents=[common], help="split a secret file into share bundles")
    sp.add_argument("secret")
    sp.add_argument("map")
    sp.add_argument("--structure", help="verify the map against this structure first")
    sp.add_argument("--mode", choices=(maps.EXACT, maps.RELAXED), default=maps.EXACT)
    sp.add_argument("--seed", type=int, help="deterministic randomness (testing only)")
    sp.add_argument("--prime", type=int, default=crypto.DEFAULT_PRIME)
    sp.add_argument("--outdir", default=".")
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("combine", parents=[common], help="recover a secret from bundles")
    sp.add_argument("bundles", nargs="+")
    sp.add_argument("--map", help="check the bundles were made for this map")
    sp.add_argument("--out", help="write the secret here instead of stdout")
    sp.set_defaults(func=cmd_combine)

    sp = sub.add_parser("verify", parents=[common], help="check a map against a structure")
    sp.add_argument("map")
    sp.add_argument("structure")
    sp.add_argument("--mode", choices=(maps.EXACT, maps.RELAXED), default=maps.EXACT)
    sp.add_argument("--oracle", action="store_true", help="add exhaustive small-field entropy checks")
    sp.add_argument("--prime", type=int, default=None, help="field for the oracle")
    sp.add_argument("--oracle-budget", type=int, default=crypto.ORACLE_BUDGET)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("classify", parents=[common], help="significant / vacuous / common participants")
    sp.add_argument("structure")
    sp.add_argument("--by-ip", action="store_true", help="cross-check with the optimal map")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("ideal-check", parents=[common], help="is the structure ideal via a partition?")
    sp.add_argument("structure")
    sp.set_defaults(func=cmd_ideal_check)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MultiAssignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
