"""conelab command line.

Exit codes: 0 success, 1 usage or parse error, 2 verification disagreement.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

from . import __version__
from .baselocus import NotEffectiveError, base_locus_table
from .cones import facets_effective, facets_movable, is_effective, is_effective_system, is_movable, rays
from .core import InvalidSystemError, LinearSystemSpec
from .cremona import (
    clamp,
    cremona_c,
    cremona_reduce,
    cremona_transform,
    is_cremona_reduced,
    largest_pivot,
    reduce_fully,
)
from .formulas import DEFAULT_TRUNC_BUDGET, dim_report, predicted_dim, sldim, vdim, ldim
from .oracle import OracleConfig, multiplicity_probes, oracle_dim

EXIT_OK, EXIT_USAGE, EXIT_DISAGREE = 0, 1, 2

SWEEP_COLUMNS = [
    "system", "vdim", "ldim", "sldim", "predicted_dim", "oracle_dim",
    "effective_formula", "effective_oracle", "agree", "seed", "prime",
]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# system syntax


def parse_spec(text: str) -> LinearSystemSpec:
    """Parse ``n=4 d=3 m=2,2,2,2,2,2,2`` or ``{"n": 4, "d": 3, "m": [2, 2, ...]}``.

    Entries may be negative so that the same syntax names divisor classes.
    """
    text = text.strip()
    try:
        if text.startswith("{"):
            obj = json.loads(text)
            n, d, m = int(obj["n"]), int(obj["d"]), [int(v) for v in obj.get("m", [])]
        else:
            fields = {}
            for tok in text.replace(";", " ").split():
                key, sep, val = tok.partition("=")
                if not sep or key not in ("n", "d", "m") or key in fields:
                    raise UsageError(f"bad token {tok!r}")
                fields[key] = val
            if "n" not in fields or "d" not in fields:
                raise UsageError("n= and d= are required")
            n, d = int(fields["n"]), int(fields["d"])
            m = [int(v) for v in fields.get("m", "").split(",") if v.strip()]
        return LinearSystemSpec(n, d, m)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot parse system {text!r}: {exc}") from exc


def format_spec(L: LinearSystemSpec) -> str:
    return f"n={L.n} d={L.d} m={','.join(map(str, L.mults))}"


# ---------------------------------------------------------------------------
# output helpers


def _oracle_cfg(args) -> OracleConfig:
    return OracleConfig.from_env(
        prime=args.prime, samples=args.samples, seed=args.seed, parallelism=args.parallelism
    )


def _meta(cfg: OracleConfig | None) -> dict:
    if cfg is None:
        return {"seed": None, "prime": None, "samples": None, "version": __version__}
    return {"seed": cfg.seed, "prime": cfg.prime, "samples": cfg.samples, "version": __version__}


def _emit_json(system, results, cfg: OracleConfig | None, out=None) -> None:
    out = out or sys.stdout
    json.dump({"system": system, "results": results, "meta": _meta(cfg)}, out, indent=2)
    out.write("\n")


def _budget(args) -> int | None:
    return None if args.exhaustive_trunc else args.trunc_budget


# ---------------------------------------------------------------------------
# commands


def cmd_dim(args) -> int:
    L = parse_spec(" ".join(args.system))
    L.require_system()
    budget = _budget(args)
    rep = dim_report(L, budget).as_dict()
    rep["predicted_dim"] = predicted_dim(L, budget)
    cfg = None
    status = EXIT_OK
    if args.oracle or args.check:
        cfg = _oracle_cfg(args)
        res = oracle_dim(L, cfg)
        rep["oracle_dim"] = res.dim
        rep["oracle_agreed"] = res.agreed
        rep["oracle_samples"] = [list(s) for s in res.per_sample]
        if args.check and res.dim != rep["predicted_dim"]:
            status = EXIT_DISAGREE
    if args.json:
        _emit_json(format_spec(L), rep, cfg)
    else:
        print(f"system        {L}")
        for key in ("vdim", "edim", "lvdim", "ldim", "slvdim", "sldim", "k_C", "predicted_dim"):
            print(f"{key:<13} {rep[key]}")
        print(f"truncation    {rep['truncation']}")
        if "oracle_dim" in rep:
            tag = "" if rep["oracle_agreed"] else "  (samples disagree)"
            print(f"oracle_dim    {rep['oracle_dim']}{tag}  [prime={cfg.prime} seed={cfg.seed} samples={cfg.samples}]")
    if status == EXIT_DISAGREE:
        print("check failed: predicted_dim != oracle_dim", file=sys.stderr)
    return status


def cmd_cones(args) -> int:
    if args.cones_cmd == "check":
        L = parse_spec(" ".join(args.system))
        if L.n < 2:
            raise UsageError("cone membership needs n >= 2")
        D = L.as_divisor()
        eff, ve = is_effective(D)
        mov, vm = is_movable(D)
        if args.json:
            _emit_json(format_spec(L), {
                "effective": eff, "movable": mov,
                "violated_effective": [f.label for f in ve],
                "violated_movable": [f.label for f in vm],
            }, None)
            return EXIT_OK
        print(f"class      {D}")
        print(f"effective: {'yes' if eff else 'no'}" + (f" ({', '.join(f.label for f in ve)} violated)" if ve else ""))
        print(f"movable:   {'yes' if mov else 'no'}" + (f" ({', '.join(f.label for f in vm)} violated)" if vm else ""))
        return EXIT_OK
    n = args.n
    if n < 2:
        raise UsageError("n must be >= 2")
    if args.cones_cmd == "facets":
        facets = facets_effective(n) if args.kind == "effective" else facets_movable(n)
        rows = [{"label": f.label, "coeffs": list(f.coeffs)} for f in facets]
        if args.json:
            _emit_json(None, rows, None)
        else:
            print(f"# {len(rows)} {args.kind} facets of the blow-up of P^{n} at {n + 3} points; row (c_d; c_1..c_{n + 3}) means c_d*d + sum c_i*m_i <= 0")
            for r in rows:
                print(f"{r['label']:<24} {r['coeffs']}")
        return EXIT_OK
    rs = rays(n)
    if args.json:
        _emit_json(None, [{"t": r.t, "I": list(r.I), "d": r.cls.d, "m": list(r.cls.m)} for r in rs], None)
    else:
        print(f"# {len(rs)} rays")
        for r in rs:
            print(f"{r.label:<24} {r.cls}")
    return EXIT_OK


def cmd_baselocus(args) -> int:
    L = parse_spec(" ".join(args.system))
    try:
        rows = base_locus_table(L, include_points=args.include_points)
    except NotEffectiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    probed: dict = {}
    cfg = None
    if args.probe and rows:
        cfg = _oracle_cfg(args)
        probed = multiplicity_probes(L, [e.cycle for e in rows], cfg)
    status = EXIT_OK
    if any(probed.get(e.cycle, e.k) != e.k for e in rows):
        status = EXIT_DISAGREE
    if args.json:
        out = []
        for e in rows:
            row = {"cycle": e.cycle.label(), "t": e.cycle.t, "I": list(e.cycle.I), "size": len(e.cycle.I),
                   "count": e.count, "k": e.k, "r": e.r, "divisorial": e.divisorial}
            if probed:
                row["probe"] = probed[e.cycle]
            out.append(row)
        _emit_json(format_spec(L), out, cfg)
        return status
    if not rows:
        print("base locus empty")
        return status
    head = f"{'cycle':<22}{'t':>3}{'|I|':>5}{'count':>7}{'k':>5}{'r':>4}  divisorial"
    print(head + ("  probe" if probed else ""))
    for e in rows:
        line = (f"{e.cycle.label():<22}{e.cycle.t:>3}{len(e.cycle.I):>5}{e.count:>7}{e.k:>5}{e.r:>4}  "
                f"{'yes' if e.divisorial else 'no':<10}")
        if probed:
            line += f"  {probed[e.cycle]}"
        print(line)
    return status


def cmd_cremona(args) -> int:
    L = parse_spec(" ".join(args.system))
    L.require_system()
    if args.reduce:
        red = reduce_fully(L) if args.cones else cremona_reduce(L)
        if not red.steps:
            print(f"{L} already reduced (c = {cremona_c(L, largest_pivot(L))})")
            return EXIT_OK
        for s in red.steps:
            print(s.describe())
        final = red.system
        print(f"final: {final}" + ("  (negative degree: empty system)" if red.empty else ""))
        print("dimension is preserved by every step")
        return EXIT_OK
    if args.pivot in (None, "auto"):
        J = largest_pivot(L)
    else:
        try:
            J = tuple(int(v) for v in args.pivot.split(","))
        except ValueError as exc:
            raise UsageError(f"bad pivot {args.pivot!r}") from exc
    if len(set(J)) != L.n + 1:
        raise UsageError(f"pivot needs n+1 = {L.n + 1} distinct points, got {len(set(J))}")
    try:
        c = cremona_c(L, J)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.pivot in (None, "auto") and is_cremona_reduced(L):
        print(f"{L} already reduced (c = {c})")
        return EXIT_OK
    raw = cremona_transform(L, J)
    print(f"cremona at {{{','.join(map(str, sorted(J)))}}} c={c}: {L} -> {raw}")
    if any(v < 0 for v in raw.mults):
        raw = clamp(raw)
        print(f"clamp negative multiplicities -> {raw}")
    print(f"final: {raw}" + ("  (negative degree: empty system)" if raw.d < 0 else ""))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepRow:
    system: str
    vdim: int
    ldim: int
    sldim: int
    predicted_dim: int
    oracle_dim: int
    effective_formula: bool
    effective_oracle: bool
    agree: bool
    seed: int
    prime: int

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in SWEEP_COLUMNS}


def sweep_row(L: LinearSystemSpec, cfg: OracleConfig, budget: int | None = DEFAULT_TRUNC_BUDGET) -> SweepRow:
    eff = is_effective_system(L)
    pred = predicted_dim(L, budget)
    od = oracle_dim(L, cfg).dim
    effo = od >= 1
    return SweepRow(str(L), vdim(L), ldim(L, budget), sldim(L, budget), pred, od, eff, effo,
                    pred == od and eff == effo, cfg.seed, cfg.prime)


def family_secant(t_max: int, a_max: int) -> list[LinearSystemSpec]:
    return [LinearSystemSpec(2 * t, a * (t + 1), (a * t,) * (2 * t + 3))
            for t in range(1, t_max + 1) for a in range(1, a_max + 1)]


def family_homog(n_max: int, b_max: int, d_max: int | None = None) -> list[LinearSystemSpec]:
    out = [LinearSystemSpec(n, b * (n + 2), (b * n,) * (n + 3))
           for n in range(2, n_max + 1) for b in range(1, b_max + 1)]
    if d_max:
        out += [LinearSystemSpec(n, d, (n,) * (n + 3)) for n in range(2, n_max + 1) for d in range(1, d_max + 1)]
    return out


def family_grid(ns: Sequence[int], d_max: int, m_max: int | None, limit: int | None, seed: int,
                effective_only: bool = False) -> list[LinearSystemSpec]:
    """Sorted multiplicity vectors 0 <= m_i <= min(d, m_max) for every n and d <= d_max.

    General points make the order irrelevant, so only non-increasing vectors
    are listed.  ``limit`` keeps a seeded random subset of that size.
    """
    out = []
    for n in ns:
        for d in range(0, d_max + 1):
            top = d if m_max is None else min(d, m_max)
            for m in combinations_with_replacement(range(top, -1, -1), n + 3):
                L = LinearSystemSpec(n, d, m)
                if effective_only and not is_effective_system(L):
                    continue
                out.append(L)
    if limit is not None and len(out) > limit:
        rng = random.Random(seed)
        out = [out[i] for i in sorted(rng.sample(range(len(out)), limit))]
    return out


def read_specs(path: str) -> list[LinearSystemSpec]:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return [parse_spec(json.dumps(obj)) for obj in json.loads(text)]
    return [parse_spec(line) for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]


def run_sweep(systems: Iterable[LinearSystemSpec], cfg: OracleConfig, budget: int | None) -> list[SweepRow]:
    systems = list(systems)
    if cfg.parallelism > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            return list(pool.map(lambda L: sweep_row(L, cfg, budget), systems))
    return [sweep_row(L, cfg, budget) for L in systems]


def write_csv(rows: Sequence[SweepRow], out) -> None:
    w = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS)
    w.writeheader()
    for r in rows:
        w.writerow(r.as_dict())


def cmd_verify(args) -> int:
    cfg = _oracle_cfg(args)
    fam = args.family
    if fam == "secant":
        systems = family_secant(args.t_max, args.a_max)
    elif fam == "homog":
        systems = family_homog(args.n_max, args.b_max, args.d_max)
    elif fam == "grid":
        systems = family_grid(args.n, args.d_max, args.m_max, args.limit, cfg.seed)
    elif fam == "file":
        if not args.file:
            raise UsageError("verify file needs --file PATH")
        systems = read_specs(args.file)
    else:
        raise UsageError(f"unknown family {fam!r}")
    for L in systems:
        L.require_system()
    rows = run_sweep(systems, cfg, _budget(args))
    bad = [r for r in rows if not r.agree]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            write_csv(rows, fh)
    if args.json:
        _emit_json(fam, [r.as_dict() for r in rows], cfg)
    elif not args.csv or args.verbose:
        buf = io.StringIO()
        write_csv(rows, buf)
        sys.stdout.write(buf.getvalue())
    print(f"{len(rows)} systems, {len(bad)} disagreements", file=sys.stderr)
    for r in bad:
        print(f"disagree: {r.system} predicted={r.predicted_dim} oracle={r.oracle_dim} "
              f"eff_formula={r.effective_formula} eff_oracle={r.effective_oracle} seed={r.seed} prime={r.prime}",
              file=sys.stderr)
    return EXIT_DISAGREE if bad else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_oracle_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("oracle (defaults from CONELAB_PRIME / CONELAB_SAMPLES / CONELAB_SEED)")
    g.add_argument("--prime", type=int, default=None, help="field characteristic (default 67108859)")
    g.add_argument("--samples", type=int, default=None, help="random point configurations per system (default 3)")
    g.add_argument("--seed", type=int, default=None, help="base seed; sample k uses seed+k")
    g.add_argument("--parallelism", type=int, default=None, help="worker threads")


def _add_trunc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trunc-budget", type=int, default=DEFAULT_TRUNC_BUDGET,
                   help="containing systems searched for ldim/sldim: total multiplicity drop <= B (default 2)")
    p.add_argument("--exhaustive-trunc", action="store_true", help="search every containing system")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="conelab",
        description="Dimensions, base loci, Cremona reductions and cones for L_{n,d}(m_1..m_{n+3}).",
        epilog="Systems are written 'n=4 d=3 m=2,2,2,2,2,2,2' or as JSON {\"n\":4,\"d\":3,\"m\":[...]}. "
               "Exit codes: 0 ok, 1 usage/parse error, 2 disagreement.",
    )
    ap.add_argument("--version", action="version", version=f"conelab {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("dim", help="vdim, ldim, sldim (and oracle dimension)")
    p.add_argument("system", nargs="+", help="'n=.. d=.. m=..,..' (one or several words) or a JSON object")
    p.add_argument("--oracle", action="store_true", help="also compute the finite-field dimension")
    p.add_argument("--check", action="store_true", help="exit 2 unless predicted_dim == oracle_dim")
    p.add_argument("--json", action="store_true")
    _add_trunc_flags(p)
    _add_oracle_flags(p)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("cones", help="effective / movable cone queries")
    csub = p.add_subparsers(dest="cones_cmd", required=True)
    q = csub.add_parser("check", help="membership of a class (d; m) with violated facets")
    q.add_argument("system", nargs="+", help="'n=.. d=.. m=..,..' (one or several words) or a JSON object")
    q.add_argument("--json", action="store_true")
    q = csub.add_parser("facets", help="list facet inequalities")
    q.add_argument("n", type=int)
    q.add_argument("--kind", choices=["effective", "movable"], default="effective")
    q.add_argument("--json", action="store_true")
    q = csub.add_parser("rays", help="list the degree-one generating classes")
    q.add_argument("n", type=int)
    q.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cones)

    p = sub.add_parser("baselocus", help="join cycles in the base locus with multiplicities")
    p.add_argument("system", nargs="+", help="'n=.. d=.. m=..,..' (one or several words) or a JSON object")
    p.add_argument("--include-points", action="store_true", help="also list the base points (t=0, |I|=1)")
    p.add_argument("--probe", action="store_true", help="measure each multiplicity with the oracle; exit 2 on mismatch")
    p.add_argument("--json", action="store_true")
    _add_oracle_flags(p)
    p.set_defaults(func=cmd_baselocus)

    p = sub.add_parser("cremona", help="Cremona transform or full reduction transcript")
    p.add_argument("system", nargs="+", help="'n=.. d=.. m=..,..' (one or several words) or a JSON object")
    p.add_argument("--reduce", action="store_true", help="iterate until Cremona reduced")
    p.add_argument("--cones", action="store_true", help="with --reduce: also drop points of multiplicity d")
    p.add_argument("--pivot", default=None, help="'auto' (n+1 largest) or comma-separated 1-based indices")
    p.set_defaults(func=cmd_cremona)

    p = sub.add_parser(
        "verify",
        help="sweep a family, comparing predicted_dim and effectivity with the oracle",
        description="CSV columns: " + ", ".join(SWEEP_COLUMNS) + ".",
    )
    p.add_argument("family", help="secant | homog | grid | file")
    p.add_argument("--t-max", type=int, default=2, help="secant: t <= T")
    p.add_argument("--a-max", type=int, default=2, help="secant: a <= A")
    p.add_argument("--n-max", type=int, default=6, help="homog: n <= N")
    p.add_argument("--b-max", type=int, default=2, help="homog: b <= B")
    p.add_argument("--d-max", type=int, default=None, help="homog: also L_{n,d}(n^{n+3}) for d <= D; grid: d <= D")
    p.add_argument("--n", type=int, nargs="+", default=[2], help="grid: ambient dimensions")
    p.add_argument("--m-max", type=int, default=None, help="grid: m_i <= M")
    p.add_argument("--limit", type=int, default=None, help="grid: random subset of this size")
    p.add_argument("--file", default=None, help="file: one system per line, or a JSON list")
    p.add_argument("--csv", default=None, help="write the report to this path")
    p.add_argument("--json", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true", help="print rows even with --csv")
    _add_trunc_flags(p)
    _add_oracle_flags(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(args, "family", None) == "grid" and args.d_max is None:
        args.d_max = 6
    try:
        return args.func(args)
    except (UsageError, InvalidSystemError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
