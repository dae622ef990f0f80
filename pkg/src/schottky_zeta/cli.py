"""schottky-zeta command line."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import cycle, groups, moebius, resonances, spectral, surfaces, symbolic

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3
FMT = spectral.FLOAT_FMT

VALIDATION_ERRORS = (
    surfaces.InvalidPsi,
    surfaces.NoSuchSurface,
    surfaces.ValidationFailed,
    surfaces.UnknownGroup,
    surfaces.OutOfRange,
    surfaces.NotClosed,
    surfaces.InvalidTransition,
    groups.UnknownIrrep,
    groups.GroupMismatch,
    symbolic.InvalidSymbol,
    symbolic.TooLarge,
    cycle.OrderTooHigh,
    cycle.NotFree,
    spectral.EmptyAboveK,
)
NUMERICAL_ERRORS = (
    moebius.NotHyperbolic,
    moebius.PoleHit,
    surfaces.NotMonotone,
    resonances.NoRealZero,
    resonances.ContourTooClose,
    cycle.NotConvergent,
    cycle.DegenerateDenominator,
    symbolic.Mismatch,
    ArithmeticError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    surface: str = ""
    group: str = "full"
    order: int = 6
    rect: str = ""
    out: str = ""
    threads: int = 0

    def render(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in fields(self))

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        kw = {}
        types = {f.name: f.type for f in fields(cls)}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in types:
                kw[key] = int(value) if types[key] in (int, "int") else value
        return cls(**kw)


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def parse_rect(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse rectangle {text!r}") from None
    if len(vals) != 4:
        raise UsageError("rectangle needs re0,re1,im0,im1")
    return vals


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _scheme_and_table(args, order=None):
    spec = surfaces.parse_surface(args.surface)
    scheme = surfaces.build_scheme(spec)
    table = cycle.build_orbit_table(scheme, args.group, order if order is not None else args.order)
    return spec, scheme, table


def _threads(args) -> int:
    return args.threads or resonances.default_threads()


# subcommands

def cmd_surface_info(args) -> int:
    spec = surfaces.parse_surface(args.surface)
    scheme = surfaces.build_scheme(spec, validate=False)
    report = surfaces.validate_ifs(scheme)
    info = {
        "surface": spec.render(),
        "n_symbols": scheme.n_symbols,
        "disks": [[d.center, d.radius] for d in scheme.disks],
        "groups": {k: g.name for k, g in sorted(scheme.groups.items())},
        "valid": report.ok,
        "validation": str(report),
    }
    if isinstance(spec, surfaces.SymmetricFunnels):
        info["delta_offset"] = scheme.delta_offset
        info["funnel_length"] = surfaces.funnel_length(spec)
    else:
        info["a"] = surfaces.solve_bowen_series_a(spec.l1, spec.l2, spec.l3)
    if args.json:
        print(json.dumps(info, indent=2))
    else:
        for k, v in info.items():
            if k == "disks":
                for i, (c, r) in enumerate(v, 1):
                    print(f"disk {i}: center {FMT % c} radius {FMT % r}")
            else:
                print(f"{k}: {v}")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_psi_for_length(args) -> int:
    print(FMT % surfaces.psi_for_length(args.nf, args.length))
    return EXIT_OK


def cmd_chartable(args) -> int:
    if args.group == "klein":
        g = groups.klein_four_group()
    elif args.nf:
        g = groups.DihedralZ2Group(args.nf)
    else:
        raise UsageError("chartable needs --nf N or --group klein")
    table = g.character_table
    if args.csv:
        _emit(table.render_csv(), args.out)
    else:
        _emit(table.render_text() + "\n", args.out)
    return EXIT_OK


def cmd_orbits(args) -> int:
    _, scheme, table = _scheme_and_table(args)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["class_id", "n_w", "m_w", "g_conj_class", "length_L", "reduced_word"])
    for k, d in enumerate(table.classes, 1):
        rw = "" if d.reduced_word is None else " ".join(str(x) for x in d.reduced_word)
        wr.writerow([k, d.n_w, d.m_w, d.conj_class, FMT % d.length_L, rw])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_zeta(args) -> int:
    _, _, table = _scheme_and_table(args)
    s = parse_complex(args.s)
    ev = cycle.ZetaEvaluator(table, args.rep, args.order)
    val, der = ev.value_and_derivative(np.array([s]))
    rn = ev.relative_error(np.array([s]))[0] if args.order >= 1 else 0.0
    v, d = complex(np.ravel(val)[0]), complex(np.ravel(der)[0])
    print(f"value {FMT % v.real} {FMT % v.imag}")
    print(f"derivative {FMT % d.real} {FMT % d.imag}")
    print(f"R_n {FMT % rn}")
    return EXIT_OK


def _rep_list(table, reps: str) -> list[str]:
    if reps in ("all", ""):
        return [r.label for r in table.irreps]
    labels = [x.strip() for x in reps.split(",") if x.strip()]
    for lab in labels:
        if lab != "full":
            table.group.irrep(lab)
    return labels


def cmd_resonances(args) -> int:
    _, _, table = _scheme_and_table(args)
    if not args.rect:
        raise UsageError("--rect re0,re1,im0,im1 is required")
    re0, re1, im0, im1 = parse_rect(args.rect)
    region = resonances.default_region(re0, re1, im0, im1, table.max_length)
    region = resonances.SearchRegion(
        re0, re1, im0, im1, args.grid_re or region.grid_re, args.grid_im or region.grid_im
    )
    found, reports = resonances.scan_resonances(
        table, _rep_list(table, args.reps), args.order, region, args.cell_height, _threads(args)
    )
    text = spectral.write_resonances_csv(found)
    _emit(text, args.out)
    if args.json:
        Path(args.json).write_text(json.dumps([
            {"re": r.s.real, "im": r.s.imag, "rep": r.irrep, "order": r.order,
             "residual": r.residual, "trust_mask": int(r.trusted)} for r in found
        ], indent=1))
    if args.svg:
        Path(args.svg).write_text(spectral.scatter_svg(spectral.ResonanceSet(found)))
    bad = [c for c in reports if not c.consistent]
    for c in bad:
        print(
            f"warning: cell Im [{c.region.im_min:g}, {c.region.im_max:g}] rep {c.irrep}: "
            f"{c.found} zeros found, argument count {c.counted}",
            file=sys.stderr,
        )
    return EXIT_NUMERICAL if bad and args.strict else EXIT_OK


def cmd_delta(args) -> int:
    _, _, table = _scheme_and_table(args)
    print(FMT % resonances.critical_exponent(table, args.order))
    return EXIT_OK


def cmd_error_scan(args) -> int:
    _, _, table = _scheme_and_table(args)
    x = np.linspace(args.re_min, args.re_max, args.points)
    ev = cycle.ZetaEvaluator(table, args.rep, args.order)
    r = ev.relative_error(x + 1j * args.im)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x", "R_n"])
    for xk, rk in zip(x, r):
        wr.writerow([FMT % xk, FMT % rk])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_envelope(args) -> int:
    rset = spectral.read_resonances_csv(args.input)
    reps = rset.labels if args.reps in ("all", "") else [x.strip() for x in args.reps.split(",")]
    if args.t_max is None:
        pts = rset.points()
        t_max = float(pts.imag.max()) if pts.size else 0.0
    else:
        t_max = args.t_max
    t = np.arange(args.t_min, t_max + 0.5 * args.t_step, args.t_step)
    h = {rep: spectral.envelope(rset, [rep], args.w, t) for rep in reps}
    _emit(spectral.write_envelope_csv(t, h), args.out)
    if args.svg:
        Path(args.svg).write_text(spectral.scatter_svg(rset))
    return EXIT_OK


def cmd_gap(args) -> int:
    rset = spectral.read_resonances_csv(args.input)
    reps = None if args.reps in ("all", "") else [x.strip() for x in args.reps.split(",")]
    delta = args.delta
    if delta is None and args.surface:
        _, _, table = _scheme_and_table(args)
        delta = resonances.critical_exponent(table, args.order)
    print(FMT % spectral.gap(rset, reps, args.K, delta))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(print)
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="schottky-zeta", description="Symmetry-reduced Selberg zeta functions of Schottky surfaces.")
    p.add_argument("--config", help="key = value file; flags win")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def surface_args(sp, order=True):
        sp.add_argument("--surface", default=None, help="sym:NF:PSI or bs:L1,L2,L3")
        sp.add_argument("--group", default=None, help="full | klein | z2 | trivial")
        if order:
            sp.add_argument("--order", type=int, default=None)
        sp.add_argument("--config", default=argparse.SUPPRESS)

    sp = sub.add_parser("surface-info")
    surface_args(sp, order=False)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_surface_info)

    sp = sub.add_parser("psi-for-length")
    sp.add_argument("--nf", type=int, required=True)
    sp.add_argument("--length", type=float, required=True)
    sp.set_defaults(func=cmd_psi_for_length)

    sp = sub.add_parser("chartable")
    sp.add_argument("--nf", type=int, default=None)
    sp.add_argument("--group", default=None)
    sp.add_argument("--csv", action="store_true")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_chartable)

    sp = sub.add_parser("orbits")
    surface_args(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_orbits)

    sp = sub.add_parser("zeta")
    surface_args(sp)
    sp.add_argument("--rep", default="full")
    sp.add_argument("--s", required=True)
    sp.set_defaults(func=cmd_zeta)

    sp = sub.add_parser("resonances")
    surface_args(sp)
    sp.add_argument("--reps", default="all")
    sp.add_argument("--rect", default=None)
    sp.add_argument("--grid-re", type=float, default=None)
    sp.add_argument("--grid-im", type=float, default=None)
    sp.add_argument("--cell-height", type=float, default=10.0)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--json", default=None)
    sp.add_argument("--svg", default=None)
    sp.add_argument("--strict", action="store_true", help="exit 3 when a cell count disagrees")
    sp.set_defaults(func=cmd_resonances)

    sp = sub.add_parser("delta")
    surface_args(sp)
    sp.set_defaults(func=cmd_delta)

    sp = sub.add_parser("error-scan")
    surface_args(sp)
    sp.add_argument("--rep", default="full")
    sp.add_argument("--im", type=float, default=1000.0)
    sp.add_argument("--re-min", type=float, default=-0.3)
    sp.add_argument("--re-max", type=float, default=1.0)
    sp.add_argument("--points", type=int, default=50)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_error_scan)

    sp = sub.add_parser("envelope")
    sp.add_argument("--input", required=True)
    sp.add_argument("--reps", default="all")
    sp.add_argument("--w", type=float, required=True)
    sp.add_argument("--t-min", type=float, default=0.0)
    sp.add_argument("--t-max", type=float, default=None)
    sp.add_argument("--t-step", type=float, default=1.0)
    sp.add_argument("--out", default=None)
    sp.add_argument("--svg", default=None)
    sp.set_defaults(func=cmd_envelope)

    sp = sub.add_parser("gap")
    surface_args(sp)
    sp.add_argument("--input", required=True)
    sp.add_argument("--reps", default="all")
    sp.add_argument("--K", type=float, default=0.0)
    sp.add_argument("--delta", type=float, default=None)
    sp.set_defaults(func=cmd_gap)

    sp = sub.add_parser("selftest")
    sp.set_defaults(func=cmd_selftest)
    return p


CONFIG_KEYS = {"surface", "group", "order", "rect", "out", "threads", "reps", "rep", "s"}


def _apply_config(args, path: str):
    cfg = surfaces.read_config(path)
    spec = surfaces.surface_from_config(cfg)
    if spec is not None and getattr(args, "surface", None) is None and hasattr(args, "surface"):
        args.surface = spec.render()
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if key in CONFIG_KEYS and hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, int(value) if attr in ("order", "threads") else value)


def _fill_defaults(args):
    if hasattr(args, "group") and args.group is None and args.command != "chartable":
        args.group = "full"
    if hasattr(args, "order") and args.order is None:
        args.order = 6
    if hasattr(args, "threads") and args.threads is None:
        args.threads = 0
    needs_surface = args.command in {"surface-info", "orbits", "zeta", "resonances", "delta", "error-scan"}
    if needs_surface and not getattr(args, "surface", None):
        raise UsageError("--surface is required (or give it in --config)")


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("missing subcommand")
        if getattr(args, "config", None):
            _apply_config(args, args.config)
        _fill_defaults(args)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
