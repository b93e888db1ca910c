"""
Command-line front end.

    proximity fit-distances     fit power laws to a distance sample
    proximity simulate-gravity  simulate gravity-model links and fit them
    proximity compute-pei       PEI series and breakpoint test from SSA files
    proximity export-map        per-state share map (CSV + SVG) for one name-year
    proximity fetch             download the SSA archives (the only networked command)

Exit status: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import urllib.request
from importlib import resources

from . import __version__
from .adjacency import load_adjacency
from .babynames import DataError, build_panel, load_totals, parse_national, parse_state
from .choropleth import render_svg, write_shares_csv
from .geodesy import GazetteerError
from .gravity import GravityConfig, SimulationError, fit_window, simulate
from .pei import (COHORT_RULES, PeiError, breakpoint_test, compute_series, format_breakpoint_report,
                  name_share_by_state, write_points_csv, write_yearly_csv)
from .powerlaw import (METHODS, DistanceSample, FitError, PowerLawFit, fit_density, fit_mle, fit_all,
                       force_zeros, read_sample, sample_truncated_zipf, write_sample)

log = logging.getLogger("proximity")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
SSA_BASE = "https://www.ssa.gov/oact/babynames/"
SSA_FILES = {"national": "names.zip", "state": "state/namesbystate.zip"}
_NOT_CONFIG = {"config", "out_dir", "quiet", "func", "command"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# provenance

def digest(path) -> str:
    h = hashlib.sha256()
    if os.path.isdir(path):
        for root, dirs, files in os.walk(path):
            dirs.sort()
            for fn in sorted(files):
                full = os.path.join(root, fn)
                h.update(os.path.relpath(full, path).encode())
                with open(full, "rb") as fh:
                    for chunk in iter(lambda: fh.read(1 << 20), b""):
                        h.update(chunk)
    else:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    return h.hexdigest()


def provenance(args, inputs=()) -> list[str]:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}
    blob = json.dumps(cfg, sort_keys=True, default=str)
    lines = [f"proximity {__version__} {args.command}",
             f"config: {blob}",
             f"config sha256: {hashlib.sha256(blob.encode()).hexdigest()}",
             f"seed: {getattr(args, 'seed', None)}"]
    for p in inputs:
        if p:
            lines.append(f"input {os.path.basename(os.path.normpath(p))} sha256: {digest(p)}")
    return lines


def _out(args, name) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _say(args, text):
    if not args.quiet:
        sys.stdout.write(text)


# fit-distances

def fit_table(fits: list[PowerLawFit]) -> str:
    rows = [f"{'method':<11}{'exponent':>10}{'stderr':>10}{'corr':>9}{'n_used':>8}{'n_zero':>8}  window_km"]
    for f in fits:
        corr = "-" if f.correlation is None else f"{f.correlation:.4f}"
        extra = ""
        if f.method == "rank":
            extra = f"  A={f.A:.6g} B={f.B:.6g}"
            if f.flags:
                extra += " flags=" + ",".join(f.flags)
        elif f.method == "cumulative":
            extra = f"  F = {f.intercept:.6g} + {f.slope:.6g} log r"
        rows.append(f"{f.method:<11}{f.exponent:>10.4f}{f.stderr:>10.4f}{corr:>9}{f.n_used:>8}{f.n_zero:>8}"
                    f"  [{f.r_min:.6g}, {f.r_max:.6g}]{extra}")
    return "\n".join(rows) + "\n"


def _write_series(fit: PowerLawFit, path, header):
    names = {"density": ("r_center_km", "density"), "cumulative": ("r_km", "ecdf"),
             "rank": ("rank", "r_km")}.get(fit.method)
    if names is None or fit.series is None:
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"{names[0]},{names[1]}\n")
        for x, y in zip(*fit.series):
            fh.write(f"{float(x)!r},{float(y)!r}\n")


def cmd_fit_distances(args) -> int:
    if bool(args.input) == bool(args.synthetic):
        raise UsageError("give exactly one of --input or --synthetic")
    if args.input:
        sample = read_sample(args.input)
        inputs = [args.input]
    else:
        seed = 0 if args.seed is None else args.seed
        sample = sample_truncated_zipf(args.n, args.rmin, args.rmax, seed)
        if args.zero_fraction:
            sample = force_zeros(sample, args.zero_fraction, seed + 1)
        inputs = []
    methods = args.method or list(METHODS)
    fits = fit_all(sample, methods, bins=args.bins, r_min=args.mle_rmin, r_max=args.mle_rmax)
    header = provenance(args, inputs)
    report = "\n".join(f"# {h}" for h in header) + "\n"
    report += f"sample: {sample.label} n={sample.n} zeros={sample.n_zero} ({sample.zero_fraction:.1%})\n"
    report += fit_table(fits)
    with open(_out(args, "fit_report.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report)
    for f in fits:
        _write_series(f, _out(args, f"fit_{f.method}_series.csv"), header)
    _say(args, report)
    return EXIT_OK


# simulate-gravity

def bundled_config(name: str) -> str:
    """Path of CONFIG, falling back to a config shipped with the package (e.g. torus-5000.json)."""
    if os.path.exists(name):
        return name
    packaged = resources.files("proximity") / "data" / os.path.basename(name)
    if packaged.is_file():
        return str(packaged)
    raise FileNotFoundError(f"no config file {name!r} and no bundled config of that name")


def cmd_simulate_gravity(args) -> int:
    path = bundled_config(args.config_file)
    config = GravityConfig.from_json(path)
    if args.seed is not None:
        config = GravityConfig.from_dict({**config.to_dict(), "seed": args.seed})
    links = simulate(config)
    header = provenance(args, [path]) + [f"gravity config: {json.dumps(config.to_dict(), sort_keys=True)}"]
    write_sample(links.distances, _out(args, "link_distances.txt"), header)
    lines = [f"# {h}" for h in header]
    lines.append(f"links: {links.realized_count}")
    if links.realized_count == 0:
        with open(_out(args, "gravity_report.txt"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        print("0 links: nothing to fit (G = 0 or no pair above r_floor)", file=sys.stderr)
        return EXIT_DATA
    lo, hi = fit_window(config)
    inside = DistanceSample(links.distance[(links.distance > lo) & (links.distance <= hi)], label="window")
    fits = [fit_mle(links.distances, lo, hi)]
    try:
        fits.append(fit_density(inside))
    except FitError as exc:
        log.warning("density fit skipped: %s", exc)
    lines.append(f"fit window: ({lo:.6g}, {hi:.6g}] km, links inside: {inside.n}")
    report = "\n".join(lines) + "\n" + fit_table(fits)
    with open(_out(args, "gravity_report.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report)
    _say(args, report)
    return EXIT_OK


# compute-pei / export-map

def _load_panel(args, window):
    lo, hi = window
    records = parse_state(args.state_data, years=(lo, hi)).records
    if getattr(args, "national_data", None):
        records += [r for r in parse_national(args.national_data).records if lo <= r.year <= hi]
    totals = load_totals(args.totals) if args.totals else None
    top_n = args.top_n if args.top_n and args.top_n > 0 else None
    return build_panel(records, (lo, hi), top_n=top_n, totals=totals)


def cmd_compute_pei(args) -> int:
    lo, hi = args.window
    if lo >= hi:
        raise UsageError("--window needs FIRST < LAST")
    if args.cohort == "after" and args.cohort_year is None:
        raise UsageError("--cohort after needs --cohort-year")
    if args.count_source == "national" and not args.national_data:
        raise UsageError("--count-source national needs --national-data")
    start = args.lookback_start if args.lookback_start is not None else lo
    panel = _load_panel(args, (min(start, lo), hi))
    graph = load_adjacency(args.adjacency, include_corner_pairs=args.corner_pairs)
    series = compute_series(panel, graph, (lo, hi), rule=args.cohort, after_year=args.cohort_year,
                            count_source=args.count_source)
    if not series.points:
        rule = f"{args.cohort} ({COHORT_RULES[args.cohort]})"
        print(f"no eligible names with a defined PEI in {lo}-{hi} under cohort rule {rule}", file=sys.stderr)
        return EXIT_DATA
    header = provenance(args, [args.state_data, args.national_data, args.totals, args.adjacency])
    header += [f"cohort rule: {series.rule} - {series.rule_detail}",
               f"state totals: {series.totals_policy}",
               f"name count source: {series.count_source}",
               f"top-n per state: {panel.top_n}"]
    write_points_csv(series, _out(args, "pei_points.csv"), header)
    write_yearly_csv(series, _out(args, "pei_yearly.csv"), header)
    units = ("medians", "points") if args.t_unit == "both" else (args.t_unit,)
    results = []
    for u in units:
        try:
            results.append(breakpoint_test(series, args.breakpoint, unit=u))
        except PeiError as exc:
            log.warning("breakpoint test on %s skipped: %s", u, exc)
    report = format_breakpoint_report(series, results, header)
    with open(_out(args, "breakpoint_report.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report)
    _say(args, report)
    return EXIT_OK


def cmd_export_map(args) -> int:
    panel = _load_panel(args, (args.year, args.year))
    shares = name_share_by_state(args.name, args.sex, args.year, panel)
    header = provenance(args, [args.state_data, args.totals])
    header.append(f"state totals: {panel.totals_policy}")
    warning = None
    if not any(shares.values()):
        warning = f"warning: {args.name} ({args.sex}) is not listed in any state in {args.year}"
        log.warning(warning)
    stem = f"map_{args.name.lower()}_{args.sex}_{args.year}"
    write_shares_csv(shares, _out(args, stem + ".csv"), header)
    svg = render_svg(shares, f"{args.name.title()} ({args.sex}), {args.year}: share of state births",
                     header, warning)
    with open(_out(args, stem + ".svg"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    _say(args, "".join(f"{s},{v:.6g}\n" for s, v in shares.items() if v))
    return EXIT_OK


def cmd_fetch(args) -> int:
    which = ("national", "state") if args.what == "both" else (args.what,)
    os.makedirs(args.out_dir, exist_ok=True)
    for w in which:
        url = args.url_base.rstrip("/") + "/" + SSA_FILES[w]
        dest = _out(args, os.path.basename(SSA_FILES[w]))
        try:
            with urllib.request.urlopen(url, timeout=args.timeout) as resp, open(dest, "wb") as fh:
                fh.write(resp.read())
        except OSError as exc:
            print(f"download of {url} failed: {exc}", file=sys.stderr)
            return EXIT_DATA
        _say(args, f"{dest} sha256: {digest(dest)}\n")
    return EXIT_OK


# parser

def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # accepted before or after the subcommand; the subcommand copy must not
    # overwrite a value given before it with its own default
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = _Parser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--config", default=dflt(None), help="JSON file of option defaults; command-line values win")
    g.add_argument("--seed", type=int, default=dflt(None))
    g.add_argument("--out-dir", default=dflt("out"))
    g.add_argument("--quiet", action="store_true", default=dflt(False))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    p = _Parser(prog="proximity", description="Distance-decay and name-diffusion analyses.",
                parents=[_global_flags(suppress=False)])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fit-distances", parents=[common], help="fit power laws to link distances")
    f.add_argument("--input", help="distance file, one value per line")
    f.add_argument("--synthetic", choices=["zipf"])
    f.add_argument("--n", type=int, default=1297)
    f.add_argument("--rmin", type=float, default=1.0)
    f.add_argument("--rmax", type=float, default=5000.0)
    f.add_argument("--zero-fraction", type=float, default=0.0)
    f.add_argument("--method", action="append", choices=METHODS)
    f.add_argument("--bins", type=int, default=20)
    f.add_argument("--mle-rmin", type=float)
    f.add_argument("--mle-rmax", type=float)
    f.set_defaults(func=cmd_fit_distances)

    s = sub.add_parser("simulate-gravity", parents=[common], help="gravity-model link simulation")
    s.add_argument("config_file", metavar="CONFIG", help="JSON config path or the name of a bundled one")
    s.set_defaults(func=cmd_simulate_gravity)

    def data_args(sp):
        sp.add_argument("--state-data", required=True, help="directory or zip of per-state files")
        sp.add_argument("--totals", help="CSV state,year,births overriding the totals proxy")
        sp.add_argument("--top-n", type=int, default=100, help="names kept per state-sex-year (0 = all)")

    c = sub.add_parser("compute-pei", parents=[common], help="PEI series and breakpoint test")
    data_args(c)
    c.add_argument("--national-data", help="directory or zip of yobYYYY.txt files")
    c.add_argument("--window", type=int, nargs=2, default=[1970, 2005], metavar=("FIRST", "LAST"))
    c.add_argument("--lookback-start", type=int, help="load state files from this year to date first listings")
    c.add_argument("--breakpoint", type=int, default=1995)
    c.add_argument("--cohort", choices=sorted(COHORT_RULES), default="new")
    c.add_argument("--cohort-year", type=int)
    c.add_argument("--count-source", choices=["state", "national"], default="state")
    c.add_argument("--adjacency", help="override file of ST1,ST2 border pairs")
    c.add_argument("--corner-pairs", action="store_true", help="treat AZ-CO and NM-UT as bordering")
    c.add_argument("--t-unit", choices=["medians", "points", "both"], default="both")
    c.set_defaults(func=cmd_compute_pei)

    m = sub.add_parser("export-map", parents=[common], help="per-state share map for one name-year")
    data_args(m)
    m.add_argument("--name", required=True)
    m.add_argument("--sex", choices=["F", "M"], required=True)
    m.add_argument("--year", type=int, required=True)
    m.set_defaults(func=cmd_export_map)

    d = sub.add_parser("fetch", parents=[common], help="download the SSA archives")
    d.add_argument("--what", choices=["national", "state", "both"], default="both")
    d.add_argument("--url-base", default=SSA_BASE)
    d.add_argument("--timeout", type=float, default=60.0)
    d.set_defaults(func=cmd_fetch)
    return p


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                overlay = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read --config {args.config}: {exc}")
        if not isinstance(overlay, dict):
            parser.error("--config must hold a JSON object")
        overlay = {k.replace("-", "_"): v for k, v in overlay.items()}
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(overlay) - known
        if unknown:
            parser.error(f"unknown keys in --config: {sorted(unknown)}")
        sub.set_defaults(**overlay)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"proximity {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FitError, DataError, PeiError, SimulationError, GazetteerError, FileNotFoundError) as exc:
        print(f"proximity {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
