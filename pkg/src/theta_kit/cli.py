"""Command-line front end: ``theta <verb> ...``.

Every command builds a JSON report; ``--format text`` renders a short view
of the same report.  Exit status: 0 when all checks pass, 1 on a check
failure, 2 on usage or input errors, 3 when a bound would be exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys

from .errors import GradeBoundError, MalformedError, SupportError
from .globular import cells_of, check_cofinal_via_initial, nerve_contractibility
from .presheaf import FinPresheaf, GlobularSet, is_reduced, is_segal, one_cell_per_dim, segal_extend
from .theta import (
    act_out, count_theta_objects, decode_theta, encode_map, encode_morphism_full, encode_theta,
    enum_theta_hom, enum_theta_objects, globe,
)

log = logging.getLogger("theta_kit")

OBJECT_LIMIT = 200_000


class UsageError(Exception):
    pass


class BoundExceeded(Exception):
    pass


# -- input helpers ---------------------------------------------------------------------

def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _parse_inline(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: column {exc.colno}: {exc.msg}") from exc


def _object(args, flag: str = "object"):
    raw = getattr(args, flag)
    if raw is None:
        raise UsageError(f"--{flag} is required")
    try:
        return decode_theta(_parse_inline(raw, f"--{flag}"), args.level)
    except (MalformedError, ValueError, TypeError) as exc:
        raise UsageError(f"--{flag}: {exc}") from exc


def _globular_input(args) -> GlobularSet:
    if args.input is None:
        return one_cell_per_dim(args.level)
    try:
        return GlobularSet.from_json(_load_json(args.input))
    except (MalformedError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.input}: not a globular set: {exc}") from exc


def _presheaf_input(args) -> FinPresheaf:
    if args.input is None:
        raise UsageError("--input is required")
    try:
        return FinPresheaf.from_json(_load_json(args.input))
    except MalformedError as exc:
        raise UsageError(f"{args.input}: {exc}") from exc


def _guard(level: int, max_cells: int):
    estimate = count_theta_objects(level, max_cells)
    if estimate > OBJECT_LIMIT:
        raise BoundExceeded(f"level {level} with {max_cells} cells has {estimate} objects "
                            f"(limit {OBJECT_LIMIT})")
    return estimate


# -- enumerate -------------------------------------------------------------------------

def cmd_enumerate(args) -> tuple[dict, bool]:
    what = args.what
    if what == "objects":
        _guard(args.level, args.max_cells)
        objs = enum_theta_objects(args.level, args.max_cells)
        items = [{"object": encode_theta(o), "cells": o.cells, "repr": repr(o)} for o in objs]
    elif what == "hom":
        src, tgt = _object(args), _object(args, "target")
        items = [encode_map(f) for f in enum_theta_hom(src, tgt)]
    elif what == "cells":
        cat = cells_of(_object(args))
        items = [{"dim": d, "cell": encode_morphism_full(c)} for d, c in zip(cat.dims, cat.cells)]
    else:
        source = globe(args.globe, args.level) if args.globe is not None else _object(args)
        _guard(args.level, args.max_cells)
        items = [encode_morphism_full(a) for a in act_out(source, args.max_cells).all()]
    return {"command": "enumerate", "what": what, "level": args.level,
            "count": len(items), "items": items}, True


# -- check -----------------------------------------------------------------------------

def _active_maps(level: int, bound: int) -> list:
    _guard(level, bound)
    return [a for I in enum_theta_objects(level, bound) for a in act_out(I, bound).all()]


def cmd_check(args) -> tuple[dict, bool]:
    what = args.what
    report: dict = {"command": "check", "what": what}
    if what == "segal":
        F = _presheaf_input(args)
        res = is_segal(F)
        report.update(res.to_json())
        return report, res.ok
    if what == "reduced":
        F = _presheaf_input(args)
        res = is_reduced(F)
        report.update(res.to_json())
        return report, res.ok
    if what == "cofinal":
        certs = [check_cofinal_via_initial(f) for f in _active_maps(args.level, args.max_cells)]
        no_initial = [c for c in certs if not c.ok]
        contractible = all(c.weakly_contractible for c in certs)
        ok = contractible and (not args.require_initial or not no_initial)
        report.update({"level": args.level, "max_cells": args.max_cells, "maps": len(certs),
                       "with_initial_objects": len(certs) - len(no_initial),
                       "without_initial_objects": len(no_initial),
                       "all_commas_contractible": contractible, "ok": ok,
                       "certificates": [c.to_json() for c in certs]})
        return report, ok
    if what == "contractible":
        _guard(args.level, args.max_cells)
        rows = []
        for I in enum_theta_objects(args.level, args.max_cells):
            h = nerve_contractibility(cells_of(I))
            rows.append({"object": encode_theta(I), "betti": list(h.betti),
                         "torsion": [list(t) for t in h.torsion], "contractible": h.contractible})
        ok = all(r["contractible"] for r in rows)
        report.update({"level": args.level, "max_cells": args.max_cells, "ok": ok, "objects": rows})
        return report, ok
    return _check_laws(args, report)


def _check_laws(args, report: dict) -> tuple[dict, bool]:
    from .monad import check_associativity, check_unit_laws, free_globular, free_value

    X = _globular_input(args)
    rng = random.Random(args.seed)
    TX = free_globular(X, args.max_cells)
    TTX = free_globular(TX, args.max_cells)
    rows = []
    for k in range(X.level + 1):
        singles = list(free_value(X, k, args.max_cells).all())
        triples = list(free_value(TTX, k, args.max_cells).all())
        if args.samples and len(triples) > args.samples:
            triples = rng.sample(triples, args.samples)
        units = [check_unit_laws(X, k, e) for e in singles]
        assoc = [check_associativity(X, k, e) for e in triples]
        rows.append({"k": k, "unit_checked": len(units), "unit_ok": all(a and b for a, b in units),
                     "assoc_checked": len(assoc), "assoc_ok": all(assoc)})
    ok = all(r["unit_ok"] and r["assoc_ok"] for r in rows)
    report.update({"globular_set": X.name, "max_cells": args.max_cells, "seed": args.seed,
                   "ok": ok, "rows": rows})
    return report, ok


# -- free, compare, extend ---------------------------------------------------------------

def cmd_free(args) -> tuple[dict, bool]:
    from .monad import free_value, free_value_via_kan, same_value

    X = _globular_input(args)
    ks = range(X.level + 1) if args.k is None else [args.k]
    rows = []
    for k in ks:
        _guard(k, args.max_cells)
        direct = free_value(X, k, args.max_cells)
        row = {"k": k, "counts": {str(g): c for g, c in direct.counts().items()},
               "total": len(direct), "value": direct.to_json()}
        if args.cross_check:
            row["routes_agree"] = same_value(direct, free_value_via_kan(X, k, args.max_cells))
        rows.append(row)
    ok = all(r.get("routes_agree", True) for r in rows)
    return {"command": "free", "globular_set": X.name, "max_cells": args.max_cells, "rows": rows}, ok


def _window(text: str | None):
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--window expects comma-separated integers, got {text!r}") from exc


def cmd_compare(args) -> tuple[dict, bool]:
    from .comparison import comparison_instance, unit_comparison

    if args.roundtrip:
        return _compare_roundtrip(args)
    X = _globular_input(args)
    inst = comparison_instance(X, args.max_cells)
    ks = range(X.level + 1) if args.k is None else [args.k]
    reports = [unit_comparison(inst, k, args.max_cells, window=_window(args.window)) for k in ks]
    ok = all(r.ok for r in reports)
    return {"command": "compare", "globular_set": X.name, "max_cells": args.max_cells,
            "window": args.window, "ok": ok, "reports": [r.to_json() for r in reports]}, ok


def _compare_roundtrip(args) -> tuple[dict, bool]:
    from .comparison import reconstruct_needs, roundtrip_from_product, roundtrip_from_theta, tau_pullback
    from .oracles import corpus, nerve
    from .presheaf import ThetaCategory, representable

    bound = args.max_cells
    need = reconstruct_needs(bound)
    _guard(args.level, need)
    if args.input is not None:
        subjects = [("input", _presheaf_input(args))]
    else:
        subjects = [(P.name, nerve(P, need)) for P in corpus() if P.level == args.level]
        subjects.append((f"hom(-,C{args.level})",
                         representable(ThetaCategory(args.level, need), globe(args.level, args.level))))
    rows = []
    for name, F in subjects:
        there = roundtrip_from_theta(F, bound, need)
        back = roundtrip_from_product(tau_pullback(F, need), bound)
        rows.append({"subject": name, "theta": there.to_json(), "product": back.to_json(),
                     "ok": there.ok and back.ok})
    ok = all(r["ok"] for r in rows)
    return {"command": "compare", "roundtrip": True, "max_cells": bound, "support": need,
            "ok": ok, "rows": rows}, ok


def cmd_extend(args) -> tuple[dict, bool]:
    X = _globular_input(args)
    _guard(X.level, args.max_cells)
    return segal_extend(X, args.max_cells).to_json(), True


# -- rendering and entry point ---------------------------------------------------------

def render_text(report: dict) -> str:
    lines = []
    for key in ("command", "what", "level", "max_cells", "count", "maps", "with_initial_objects",
                "without_initial_objects", "all_commas_contractible", "ok"):
        if key in report:
            lines.append(f"{key}: {report[key]}")
    for row in report.get("rows", []):
        lines.append("  " + ", ".join(f"{k}={v}" for k, v in row.items()
                                      if not isinstance(v, (dict, list))))
    for r in report.get("reports", []):
        grades = " ".join(f"{g}:{v['lhs']}/{v['rhs']}" for g, v in r["grades"].items())
        lines.append(f"  k={r['k']} ok={r['ok']} grades {grades}")
    for item in report.get("items", [])[:50]:
        lines.append(f"  {item.get('repr', json.dumps(item, sort_keys=True))}")
    if "failures" in report:
        for f in report["failures"][:20]:
            lines.append(f"  failure: {json.dumps(f, sort_keys=True)}")
    if not lines:
        lines.append(json.dumps(report, sort_keys=True))
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--level", type=int, default=2)
    common.add_argument("--max-cells", type=int, default=5)
    common.add_argument("--input")
    common.add_argument("--output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="theta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="list objects, maps, cells")
    p.add_argument("what", choices=("objects", "hom", "cells", "act"))
    p.add_argument("--object")
    p.add_argument("--target")
    p.add_argument("--globe", type=int)
    p.set_defaults(run=cmd_enumerate)

    p = sub.add_parser("check", parents=[common], help="run a check and report pass/fail")
    p.add_argument("what", choices=("segal", "reduced", "cofinal", "contractible", "laws"))
    p.add_argument("--require-initial", action="store_true",
                   help="for cofinal: fail unless every comma has an initial object")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("free", parents=[common], help="values of the free monad")
    p.add_argument("--k", type=int)
    p.add_argument("--cross-check", action="store_true")
    p.set_defaults(run=cmd_free)

    p = sub.add_parser("compare", parents=[common], help="unit comparison or roundtrip")
    p.add_argument("--k", type=int)
    p.add_argument("--window")
    p.add_argument("--roundtrip", action="store_true")
    p.set_defaults(run=cmd_compare)

    p = sub.add_parser("extend", parents=[common], help="dump the Segal extension of a globular set")
    p.set_defaults(run=cmd_extend)
    return parser


def _configure_logging():
    level = os.environ.get("THETA_KIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.max_cells < 1 or args.level < 0:
        print("theta: --max-cells must be >= 1 and --level >= 0", file=sys.stderr)
        return 2
    log.info("running %s", args.command)
    try:
        report, ok = args.run(args)
    except UsageError as exc:
        print(f"theta: {exc}", file=sys.stderr)
        return 2
    except (BoundExceeded, GradeBoundError) as exc:
        print(f"theta: bound exceeded: {exc}", file=sys.stderr)
        return 3
    except (MalformedError, SupportError) as exc:
        print(f"theta: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, sort_keys=True, indent=2) + "\n" if args.format == "json" else render_text(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
