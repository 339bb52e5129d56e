"""Command-line interface.

Exit codes: 0 positive verdict, 10 negative verdict, 2 input error,
3 numerical failure.  A packing argument is either a JSON packing file or
``catalog:NAME``.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import random
import sys
from typing import Sequence

from . import __version__
from .catalog import CatalogError, get_packing, list_catalog
from .files import (SCHEMA, FileFormatError, PackingFile, cover_packing, dumps_packing,
                    flex_certificate, load_json, load_packing, parse_sublattice,
                    phase_flex_certificate, stress_certificate, tensegrity_to_dict, verify_report)
from .framework import FrameworkError
from .jamming import JammingError, collectively_jammed, n_min, strictly_jammed
from .numkernel import NumericalError
from .packing import validate
from .pentagon import (PentagonError, critical_real_part, find_shape_for_x,
                       finite_difference_shape_derivative, normalized_flex_determinant,
                       phase_flex_predicate, phases_for_ratio, quadratic, realization_rigidity_check,
                       reference_realization, shape_constant, shape_derivative, squish_direction)
from .spectrum import SpectrumError, rum_scan

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_NUMERICAL = 0, 10, 2, 3


class UsageError(ValueError):
    pass


def _load(source: str, sublattice: str | None = None) -> PackingFile:
    if source.startswith("catalog:"):
        try:
            pf = PackingFile(get_packing(source.split(":", 1)[1]))
        except CatalogError as exc:
            raise FileFormatError(exc.args[0]) from None
    else:
        pf = load_packing(source)
    overlaps = validate(pf.packing)
    if overlaps:
        o = overlaps[0]
        raise FileFormatError(f"disks {o.i} and {o.j} (offset {list(o.offset)}) overlap by {o.depth:.3e}")
    if sublattice:
        if pf.contacts is not None:
            raise UsageError("--sublattice cannot be combined with explicit contacts")
        pf = PackingFile(cover_packing(pf.packing, parse_sublattice(sublattice)))
    return pf


def _report(command: str, t, verdict: dict, certs: list[dict]) -> dict:
    return {"schema": SCHEMA, "command": command, "verdict": verdict,
            "framework": tensegrity_to_dict(t), "certificates": certs}


def _emit(args, doc: dict, lines: list[str]) -> None:
    if getattr(args, "json", False):
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print("\n".join(lines))


def _fmt(values, digits: int = 6) -> str:
    return "[" + ", ".join(f"{v:.{digits}g}" for v in values) + "]"


def cmd_analyze(args) -> int:
    t = _load(args.packing, args.sublattice).tensegrity(args.tol)
    v = collectively_jammed(t)
    verdict = {"collectively_jammed": v.jammed, "vertices": t.n_vertices, "contacts": t.n_contacts,
               "bar_nullity": v.bar.nullity, "reason": v.reason}
    if v.jammed:
        certs = [stress_certificate("stress", v.stress)]
        lines = [f"collectively jammed ({t.n_vertices} vertices, {t.n_contacts} contacts)",
                 f"equilibrium stress: {_fmt(v.stress.per_contact)}"]
    else:
        certs = [flex_certificate("flex", v.flex)]
        lines = [f"not collectively jammed: {v.reason}",
                 f"flex: {_fmt(v.flex.per_vertex.reshape(-1))}"]
    _emit(args, _report("analyze", t, verdict, certs), lines)
    return EXIT_OK if v.jammed else EXIT_NEGATIVE


def cmd_strict(args) -> int:
    t = _load(args.packing, args.sublattice).tensegrity(args.tol)
    s = strictly_jammed(t)
    verdict = {"strictly_jammed": s.strict, "affine_nullity": s.affine.nullity,
               "affine_trivial": s.affine.trivial, "strict_stress_exists": s.stress is not None,
               "reason": s.reason}
    if s.strict:
        certs = [stress_certificate("strict_stress", s.stress)]
        lines = ["strictly jammed", f"strict stress: {_fmt(s.stress.per_contact)}"]
    else:
        certs = [flex_certificate("affine_flex", s.flex)] if s.flex is not None else []
        lines = [f"not strictly jammed: {s.reason}",
                 f"affine nullity {s.affine.nullity} (trivial {s.affine.trivial}); "
                 f"strict stress {'exists' if s.stress is not None else 'absent'}"]
        if s.flex is not None:
            lines.append(f"affine flex A = {_fmt(s.flex.affine.reshape(-1))}")
    _emit(args, _report("strict", t, verdict, certs), lines)
    return EXIT_OK if s.strict else EXIT_NEGATIVE


def cmd_nmin(args) -> int:
    if args.max_index < 1:
        raise UsageError("--max-index must be at least 1")
    t = _load(args.packing).tensegrity(args.tol)
    base = collectively_jammed(t)
    if not base.jammed:
        verdict = {"collectively_jammed": False, "n_min": None, "tested_index_bound": args.max_index}
        _emit(args, _report("nmin", t, verdict, [flex_certificate("flex", base.flex)]),
              ["not collectively jammed; N_min is undefined"])
        return EXIT_NEGATIVE
    res = n_min(t, args.max_index, base=base, threads=args.threads)
    certs = [stress_certificate("stress", base.stress)]
    verdict = {"collectively_jammed": True, "n_min": res.value, "tested_index_bound": args.max_index,
               "display": str(res)}
    lines = [f"N_min = {res}" if res.value is not None else f"N_min {res}"]
    if res.value is not None:
        from .jamming import sublattice_jammed

        sv = sublattice_jammed(t, res.sublattice, base=base)
        cf = sv.flexing[0]
        certs.append(phase_flex_certificate(cf.character, cf.flex, res.sublattice))
        verdict["sublattice"] = [list(c) for c in res.sublattice.columns]
        verdict["character_turns"] = [str(x) for x in res.character.turns]
        lines.append(f"first unjamming sublattice {res.sublattice}, character {res.character}")
    _emit(args, _report("nmin", t, verdict, certs), lines)
    return EXIT_OK


def cmd_rum(args) -> int:
    t = _load(args.packing).tensegrity(args.tol)
    grid = rum_scan(t, args.grid, tol_factor=args.tol_factor, threads=args.threads)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            grid.write_csv(fh)
        flexing = grid.nontrivial_flexing()
        print(f"{len(grid.samples)} samples written to {args.out}; "
              f"{len(flexing)} nontrivial grid points with a phase flex")
    else:
        grid.write_csv(sys.stdout)
    return EXIT_OK


def cmd_pentagon(args) -> int:
    p = reference_realization()
    if args.check_realization:
        x = shape_constant(p)
        rig = realization_rigidity_check(p)
        dx = shape_derivative(p, squish_direction(p))
        fd = finite_difference_shape_derivative(p.alpha)
        q = quadratic(p, -1)
        r1, r2 = q.roots()
        ok = p.closure_residual() <= 1e-12 and rig.rigid and dx != 0
        print(f"closure residual {p.closure_residual():.3e}")
        print(f"shape constant x = {x:.10f}")
        print(f"5x5 realization system: {'rigid' if rig.rigid else 'flexible'} (det {rig.determinant:.6g})")
        print(f"dx/dalpha = {dx:.10g} (finite difference {fd:.10g})")
        print(f"quadratic at mu = -1: A = C = {q.A:.6g}, B = {q.B:.6g}, root product {abs(r1 * r2):.12g}")
        return EXIT_OK if ok else EXIT_NEGATIVE
    if args.x is not None:
        shape = find_shape_for_x(args.x, tuple(args.bracket))
        if shape is None:
            print(f"no symmetric pentagon with x = {args.x} in alpha bracket {args.bracket}")
            return EXIT_NEGATIVE
        print(f"x = {shape_constant(shape):.12g}")
        for name, val in zip(("alpha", "beta", "gamma", "delta", "phi"), shape.as_tuple()):
            print(f"{name} = {val!r}")
        return EXIT_OK
    n = args.scan_phases
    if n < 1:
        raise UsageError("--scan-phases needs a positive count")
    rng = random.Random(args.seed)
    agree = 0
    for k in range(n):
        mu = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        pair = phases_for_ratio(p, mu) if k % 2 == 0 else None
        mu2 = pair[rng.randrange(2)] if pair else cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        by_det = normalized_flex_determinant(p, mu, mu2) <= 1e-8
        agree += by_det == phase_flex_predicate(p, mu, mu2)
    print(f"determinant/formula agreement {agree}/{n}")
    re, on_circle = critical_real_part(p, -1)
    print(f"critical Re(mu') at mu = -1: {re:.10g} ({'on' if on_circle else 'off'} the unit circle)")
    return EXIT_OK if agree == n else EXIT_NEGATIVE


def cmd_verify(args) -> int:
    checks = verify_report(load_json(args.report), args.tol)
    for c in checks:
        print(("ok    " if c.ok else "FAILED ") + c.detail)
    return EXIT_OK if all(c.ok for c in checks) else EXIT_NEGATIVE


def cmd_export(args) -> int:
    pf = _load(f"catalog:{args.name}", args.sublattice)
    text = dumps_packing(pf.packing)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_catalog(args) -> int:
    for name, desc in list_catalog():
        print(f"{name:22s} {desc}")
    return EXIT_OK


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perjam", description="Jamming analysis of periodic ball packings.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def packing_cmd(name: str, help_text: str, cover: bool = False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("packing", help="packing JSON file or catalog:NAME")
        p.add_argument("--tol", type=float, default=None, help="contact detection tolerance")
        if cover:
            p.add_argument("--sublattice", help="analyze the cover for columns 'a,b;c,d'")
        return p

    p = packing_cmd("analyze", "collective jamming verdict with certificate", cover=True)
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.set_defaults(func=cmd_analyze)

    p = packing_cmd("strict", "strict jamming verdict with certificate", cover=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_strict)

    p = packing_cmd("nmin", "smallest unjamming sublattice index up to a bound")
    p.add_argument("--max-index", type=int, required=True)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_nmin)

    p = packing_cmd("rum", "phase-torus scan of the smallest singular value")
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--out", help="CSV path (default: standard output)")
    p.add_argument("--tol-factor", type=float, default=1e-8)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.set_defaults(func=cmd_rum)

    p = sub.add_parser("pentagon", help="analytics of the equilateral pentagon unit")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--x", type=float, help="find a symmetric pentagon with this shape constant")
    g.add_argument("--check-realization", action="store_true")
    g.add_argument("--scan-phases", type=int, metavar="N")
    p.add_argument("--bracket", type=float, nargs=2, default=[-0.1, 0.1], metavar=("LO", "HI"))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_pentagon)

    p = sub.add_parser("verify", help="re-check the certificates of a JSON report")
    p.add_argument("report")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="write a catalog packing as a packing file")
    p.add_argument("name")
    p.add_argument("out", nargs="?", help="output path (default: standard output)")
    p.add_argument("--sublattice", help="export the cover for columns 'a,b;c,d'")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("catalog", help="list built-in packings")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (FileFormatError, FrameworkError, UsageError, SpectrumError, JammingError) as exc:
        print(f"perjam: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PentagonError as exc:
        print(f"perjam: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"perjam: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
