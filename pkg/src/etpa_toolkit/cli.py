"""Command-line front end: ``etpa <command> [options]``.

Exit codes: 0 success, 2 input or configuration error, 3 numerical error
(singular rate matrix, unreachable levels).
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import platform
import sys

import numpy as np

from . import __version__
from .biphoton import biphoton_field, pair_energies
from .config import RunConfig
from .errors import ConfigError, DomainError, EtpaError, SingularityError, ValidationError
from .populations import (
    CRSystem, abundance_csv, boltzmann_populations, find_metastables,
    fractional_abundance, scan_abundance, solve_cr_populations,
)
from .quantities import Quantity, convert, parse_quantity
from .rates import build_rate_report, mixed_unit_reproduction
from .transitions import CSV_COLUMNS, candidates_csv, explain_pair, find_candidates

OUTPUTS = ("table", "csv", "json")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _table(header, rows):
    def cell(v):
        if isinstance(v, float):
            return f"{v:.6g}"
        return "" if v is None else str(v)

    cells = [list(header)] + [[cell(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines) + "\n"


def _json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(fmt, header, rows, obj):
    if fmt == "json":
        return _json(obj)
    if fmt == "csv":
        return _csv(header, rows)
    return _table(header, rows)


def _qrows(pairs):
    return [(name, q.magnitude, q.unit) for name, q in pairs]


def _qdict(pairs):
    return {name: {"value": q.magnitude, "unit": q.unit} for name, q in pairs}


# -- commands ------------------------------------------------------------------

def cmd_convert(args, cfg):
    q = parse_quantity(f"{args.value} {args.from_unit}")
    out = convert(q, args.to_unit)
    if args.output == "table":
        return f"{out.magnitude:.10g} {out.unit}\n"
    return _emit(args.output, ("value", "unit"), [(out.magnitude, out.unit)],
                 {"value": out.magnitude, "unit": out.unit})


def cmd_source(args, cfg):
    pump, spdc = cfg.spdc()
    field = biphoton_field(pump, spdc)
    f1, f2 = pair_energies(pump.frequency, Quantity(0.0, "Hz"))
    pairs = [
        ("pump_wavelength", pump.wavelength.to("nm")),
        ("pump_frequency", pump.frequency),
        ("signal_frequency", f1),
        ("idler_frequency", f2),
        ("degenerate_wavelength", field.degenerate_wavelength.to("nm")),
        ("bandwidth", spdc.bandwidth.to("Hz")),
        ("entanglement_time", field.entanglement_time),
        ("entangled_area", field.entangled_area),
        ("pair_rate", field.pair_rate),
        ("pair_flux", field.pair_flux),
        ("sum_frequency_linewidth", field.sum_frequency_linewidth.to("Hz")),
    ]
    if field.crossing_volume is not None:
        pairs.append(("crossing_volume", field.crossing_volume))
    obj = _qdict(pairs)
    obj["polarization"] = field.polarization
    obj["geometry"] = spdc.geometry
    rows = _qrows(pairs) + [("polarization", field.polarization, ""), ("geometry", spdc.geometry, "")]
    return _emit(args.output, ("quantity", "value", "unit"), rows, obj)


def cmd_rates(args, cfg):
    src, geom, species = cfg.laser(), cfg.geometry(), cfg.species()
    field = None
    if cfg.has("spdc"):
        pump, spdc = cfg.spdc()
        field = biphoton_field(pump, spdc)
    report = build_rate_report(src, geom, species, field)
    rows = _qrows(report.quantities())
    rows.append(("peak_to_average", report.peak_to_average, "1"))
    obj = report.to_dict()
    if args.mixed_unit_check:
        check = mixed_unit_reproduction(src, geom, species.sigma_c)
        obj["mixed_unit_check"] = check
        rows += [
            ("mixed_unit_rate", check["mixed_unit_rate_s-1"], "s-1"),
            ("mixed_unit_consistent_rate", check["consistent_rate_s-1"], "s-1"),
            ("mixed_unit_discrepancy_factor", check["discrepancy_factor"], "1"),
        ]
    text = _emit(args.output, ("quantity", "value", "unit"), rows, obj)
    if args.output == "table":
        notes = list(report.notes)
        if args.mixed_unit_check:
            notes.append(obj["mixed_unit_check"]["note"])
        text += "".join(f"note: {n}\n" for n in notes)
    return text


def _te_range(spec):
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ConfigError("--Te-range", f"expected a:b:n, got {spec!r}") from None
    if n < 1 or not (math.isfinite(a) and math.isfinite(b)):
        raise ConfigError("--Te-range", "need n >= 1 and finite bounds")
    return [a] if n == 1 else [float(x) for x in np.linspace(a, b, n)]


def cmd_abundance(args, cfg):
    table = cfg.rate_table()
    if args.te_range:
        te_values = _te_range(args.te_range)
        dists = scan_abundance(table, te_values)
    else:
        dists = [fractional_abundance(table, cfg.te())]
    if args.output == "csv":
        return abundance_csv(dists)
    header = ["Te_eV"] + [f"f{z}" for z in range(table.Z + 1)]
    rows = [[d.te] + [float(f) for f in d.fractions] for d in dists]
    obj = [dict(zip(header, r)) for r in rows]
    return _emit(args.output, header, rows, obj)


def _drivers(cfg, levels, lines):
    metastables = find_metastables(levels, lines)
    raw = cfg.raw("plasma.drivers", "auto")
    if raw == "auto":
        drivers = [levels.ground.id] + metastables
    elif isinstance(raw, list) and all(isinstance(d, str) for d in raw):
        drivers = list(raw)
        if levels.ground.id not in drivers:
            drivers.insert(0, levels.ground.id)
    else:
        raise ConfigError("plasma.drivers", "expected \"auto\" or a list of level ids")
    for d in drivers:
        if d not in levels:
            raise ConfigError("plasma.drivers", f"unknown level {d!r}")
    return drivers, metastables


def _solve(cfg, levels, lines):
    collisions = cfg.collisions(levels)
    te, ne = cfg.te(), cfg.density()
    drivers, metastables = _drivers(cfg, levels, lines)
    given = cfg.raw("plasma.driver_populations", None)
    if given is None:
        pops = boltzmann_populations(levels, te, set(drivers))
    else:
        if not isinstance(given, dict):
            raise ConfigError("plasma.driver_populations", "expected an object of id: number")
        pops = {}
        for k, v in given.items():
            pops[k] = cfg.number(f"plasma.driver_populations[{k}]", value=v)
    try:
        system = CRSystem(levels, lines, collisions, ne, te, drivers)
        result = solve_cr_populations(system, pops)
    except (ValidationError, DomainError) as exc:
        raise ConfigError("plasma", str(exc)) from None
    return result, metastables


def cmd_populations(args, cfg):
    levels = cfg.levels()
    lines = cfg.lines(levels)
    result, metastables = _solve(cfg, levels, lines)
    ms = set(metastables)
    drivers = list(result.drivers)
    header = ["level_id", "configuration", "term", "J", "energy_cm1", "metastable", "role",
              "population"] + [f"from_{d}" for d in drivers]
    rows = []
    objs = []
    for lv in levels:
        is_driver = lv.id in result.driver_populations
        contrib = result.contributions.get(lv.id, {})
        row = [lv.id, lv.configuration, lv.term.render(), _j(lv), lv.energy_cm1,
               "*" if lv.id in ms else "", "driver" if is_driver else "excited",
               result.population(lv.id)]
        row += [None if is_driver else contrib[d] for d in drivers]
        rows.append(row)
        objs.append({
            "level_id": lv.id, "energy_cm1": lv.energy_cm1, "metastable": lv.id in ms,
            "role": "driver" if is_driver else "excited",
            "population": result.population(lv.id),
            "contributions": None if is_driver else contrib,
        })
    obj = {"Te_eV": cfg.te(), "n_e_cm-3": cfg.density(), "drivers": drivers,
           "clamped": list(result.clamped), "levels": objs}
    return _emit(args.output, header, rows, obj)


def _j(lv):
    return f"{lv.twice_j}/2" if lv.twice_j % 2 else str(lv.twice_j // 2)


def cmd_find(args, cfg):
    levels = cfg.levels()
    lines = cfg.lines(levels)
    constraints = cfg.constraints()
    if args.explain:
        lo, up = args.explain
        for lid in (lo, up):
            if lid not in levels:
                raise ConfigError("--explain", f"unknown level {lid!r}")
        reasons = explain_pair(levels, lo, up, constraints)
        obj = {"lower_id": lo, "upper_id": up, "candidate": not reasons, "reasons": reasons}
        if args.output == "json":
            return _json(obj)
        if args.output == "csv":
            return _csv(("lower_id", "upper_id", "candidate", "reasons"),
                        [(lo, up, not reasons, "; ".join(reasons))])
        verdict = "candidate" if not reasons else "excluded: " + "; ".join(reasons)
        return f"{lo} -> {up}: {verdict}\n"
    populations = None
    if cfg.raw("files.collisions", None) is not None and cfg.raw("plasma.Te", None) is not None:
        populations, _ = _solve(cfg, levels, lines)
    found = find_candidates(levels, lines, populations, constraints)
    if args.output == "csv":
        return candidates_csv(found)
    if args.output == "json":
        return _json([c.to_dict() for c in found])
    rows = []
    for c in found:
        d = c.to_dict()
        rows.append([c.lower, c.upper, c.transition_energy, c.pump_wavelength,
                     c.degenerate_photon_wavelength, len(c.intermediates),
                     d["best_fluor_nm"], d["best_branch"], c.score])
    return _table(CSV_COLUMNS, rows)


COMMANDS = {
    "convert": cmd_convert,
    "source": cmd_source,
    "rates": cmd_rates,
    "abundance": cmd_abundance,
    "populations": cmd_populations,
    "find": cmd_find,
}


def _global_options(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON run configuration")
    parser.add_argument("--output", choices=OUTPUTS, default=argparse.SUPPRESS if suppress else "table")
    parser.add_argument("--meta", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="print run metadata to stderr")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=argparse.SUPPRESS if suppress else [],
                        metavar="SECTION.KEY=VALUE", help="override a config value")


def build_parser():
    parser = argparse.ArgumentParser(prog="etpa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)

    p = sub.add_parser("convert", parents=[common], help="convert a value between units")
    p.add_argument("value", type=float)
    p.add_argument("from_unit")
    p.add_argument("to_unit")

    sub.add_parser("source", parents=[common], help="SPDC biphoton source summary")

    p = sub.add_parser("rates", parents=[common], help="classical and entangled TPA rates")
    p.add_argument("--paper-check", dest="mixed_unit_check", action="store_true",
                   help="also print the mixed-unit reproduction of the quoted rates")

    p = sub.add_parser("abundance", parents=[common], help="charge-state fractional abundance")
    p.add_argument("--Te-range", dest="te_range", metavar="A:B:N",
                   help="N temperatures from A to B eV inclusive")

    sub.add_parser("populations", parents=[common], help="collisional-radiative level populations")

    p = sub.add_parser("find", parents=[common], help="search two-photon candidate transitions")
    p.add_argument("--explain", nargs=2, metavar=("LOWER", "UPPER"),
                   help="report which rules exclude the given level pair")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args.overrides or ())
        text = COMMANDS[args.command](args, cfg)
    except SingularityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (EtpaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    if args.meta:
        meta = {
            "tool": "etpa", "version": __version__, "command": args.command,
            "config": args.config, "overrides": list(args.overrides or ()),
            "python": platform.python_version(),
            "utc": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        }
        print(json.dumps(meta, sort_keys=True), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
