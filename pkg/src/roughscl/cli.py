"""Command-line front end: ``roughscl <sample|compress|solve|distance|convergence>``.

Exit codes: 0 success, 2 invalid input, 3 math-domain failure (ORM undefined,
CFL violation, ...), 4 I/O error.
"""

import argparse
import json
import logging
import math
import os
import sys

from . import __version__
from .distance import brute_force_distance, build_cost_grid, dp_distance
from .experiments import INITIAL_DATA, brownian_convergence, initial_data, orm_gap
from .io import InputFormatError, read_path, write_json, write_path, write_solution
from .orm import OrmUndefinedError, orm
from .paths import PathError, RegularityBounds, sample_brownian, total_variation
from .solver import FLUXES, CFLError, estimate_bounds, get_flux, oleinik_report, solve_path

logger = logging.getLogger("roughscl")

EXIT_OK, EXIT_INVALID, EXIT_MATH, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


def _extended(text):
    """Parse a bound: a nonnegative float or ``inf``."""
    value = float(text)
    if math.isnan(value) or value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number or inf, got {text!r}")
    return value


def _default_seed():
    raw = os.environ.get("ROUGHSCL_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"ROUGHSCL_SEED must be an integer, got {raw!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="roughscl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file whose keys override command-line flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a Brownian path")
    p.add_argument("--segments", type=int, default=100)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", "--out", required=True, help="path CSV to write")
    p.add_argument("--meta", help="metadata JSON (default: OUTPUT.json)")

    p = sub.add_parser("compress", help="ORM compression of a path")
    p.add_argument("--path", required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--m-plus", type=_extended, default=math.inf)
    p.add_argument("--m-minus", type=_extended, default=math.inf)
    p.add_argument("--output", "--out", help="compressed path CSV")
    p.add_argument("--summary", help="summary JSON (default: stdout)")

    p = sub.add_parser("solve", help="solve along a path and check the Oleinik bounds")
    p.add_argument("--path", required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--flux", choices=sorted(FLUXES), default="burgers")
    p.add_argument("--initial", choices=sorted(INITIAL_DATA), default="tanh")
    p.add_argument("--x-left", type=float, default=-10.0)
    p.add_argument("--x-right", type=float, default=10.0)
    p.add_argument("--n-cells", type=int, default=800)
    p.add_argument("--cfl", type=float, default=0.45)
    p.add_argument("--m-plus", type=_extended, help="default: estimated from the initial data")
    p.add_argument("--m-minus", type=_extended, help="default: estimated from the initial data")
    p.add_argument("--c-slack", type=float, default=2.0)
    p.add_argument("--compare-orm", action="store_true", help="also solve along the ORM path")
    p.add_argument("--output", "--out", help="solution CSV")
    p.add_argument("--report", help="report JSON (default: stdout)")

    p = sub.add_parser("distance", help="class distance between two paths")
    p.add_argument("--path1", required=True)
    p.add_argument("--path2", required=True)
    p.add_argument("--tau", type=float)
    for i in (1, 2):
        p.add_argument(f"--m-plus{i}", type=_extended, default=math.inf)
        p.add_argument(f"--m-minus{i}", type=_extended, default=math.inf)
    p.add_argument("--no-refine", action="store_true", help="use the bare ORM grid")
    p.add_argument("--oracle", action="store_true", help="cross-check against exhaustive search")
    p.add_argument("--max-cells", type=int, default=36)
    p.add_argument("--output", "--out", help="report JSON (default: stdout)")

    p = sub.add_parser("convergence", help="error against a Brownian target under path refinement")
    p.add_argument("--flux", choices=sorted(FLUXES), default="burgers")
    p.add_argument("--initial", choices=sorted(INITIAL_DATA), default="box")
    p.add_argument("--x-left", type=float, default=-10.0)
    p.add_argument("--x-right", type=float, default=10.0)
    p.add_argument("--n-cells", type=int, default=1600)
    p.add_argument("--cfl", type=float, default=0.45)
    p.add_argument("--target-segments", type=int, default=1024)
    p.add_argument("--levels", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64, 128, 256, 512])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", "--out", help="rate table CSV")
    p.add_argument("--summary", help="summary JSON (default: stdout)")
    return parser


POSITIVE = ("segments", "horizon", "scale", "tau", "n_cells", "cfl", "c_slack", "target_segments", "jobs", "max_cells")


def apply_config(args, parser):
    """Overlay ``--config`` keys (dashes or underscores) on parsed flags."""
    if not args.config:
        return args
    with open(args.config, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in cfg.items():
        name = key.replace("-", "_")
        if name in ("command", "config"):
            continue
        if not hasattr(args, name):
            raise ConfigError(f"unknown config key {key!r} for command {args.command!r}")
        if isinstance(value, str) and value in ("inf", "Infinity"):
            value = math.inf
        setattr(args, name, value)
    return args


def validate(args):
    for name in POSITIVE:
        value = getattr(args, name, None)
        if value is not None and not value > 0:
            raise ConfigError(f"{name.replace('_', '-')} must be positive")
    if getattr(args, "cfl", None) is not None and args.cfl > 1:
        raise ConfigError("cfl must not exceed 1")
    if getattr(args, "levels", None) is not None and any(k <= 0 for k in args.levels):
        raise ConfigError("levels must be positive")
    if hasattr(args, "seed") and args.seed is None:
        args.seed = _default_seed()
    if getattr(args, "x_left", None) is not None and not args.x_right > args.x_left:
        raise ConfigError("x-right must exceed x-left")


def _echo(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    return {"config": cfg, "version": __version__}


def _emit(target, payload):
    text = write_json(target, payload)
    if target is None or target == "-":
        sys.stdout.write(text)


def cmd_sample(args):
    path = sample_brownian(args.horizon, args.segments, args.seed, args.scale)
    write_path(args.output, path)
    meta = dict(_echo(args), seed=args.seed, scale=args.scale, n_segments=args.segments, generator="PCG64")
    write_json(args.meta or args.output + ".json", meta)
    return EXIT_OK


def _tau(args, path):
    return path.horizon if args.tau is None else args.tau


def cmd_compress(args):
    z = read_path(args.path)
    tau = _tau(args, z)
    res = orm(z, tau, RegularityBounds(m_minus=args.m_minus, m_plus=args.m_plus))
    if args.output:
        write_path(args.output, res.compressed)
    tv_full = total_variation(res.path)
    tv_orm = total_variation(res.compressed)
    summary = dict(
        _echo(args),
        n_steps=res.n_steps,
        taus=res.taus,
        t_plus=res.t_plus,
        t_minus=res.t_minus,
        tv_original=tv_full,
        tv_compressed=tv_orm,
        tv_ratio=tv_orm / tv_full if tv_full > 0 else 1.0,
        compression_factor=(res.path.times.size - 1) / res.n_steps,
    )
    _emit(args.summary, summary)
    return EXIT_OK


def cmd_solve(args):
    z = read_path(args.path)
    tau = _tau(args, z)
    flux = get_flux(args.flux)
    u0 = initial_data(args.initial, args.x_left, args.x_right, args.n_cells)
    est = estimate_bounds(u0, flux)
    bounds = RegularityBounds(
        m_minus=est.m_minus if args.m_minus is None else args.m_minus,
        m_plus=est.m_plus if args.m_plus is None else args.m_plus,
    )
    u = solve_path(u0, z, tau, flux, args.cfl)
    if args.output:
        write_solution(args.output, u)
    rep = oleinik_report(u, z, tau, bounds, flux, args.c_slack)
    payload = dict(
        _echo(args),
        bounds={"m_minus": bounds.m_minus, "m_plus": bounds.m_plus},
        oleinik={
            "lower_bound": rep.lower_bound,
            "upper_bound": rep.upper_bound,
            "slack": rep.slack,
            "max_violation_lower": rep.max_violation_lower,
            "max_violation_upper": rep.max_violation_upper,
            "n_violations": rep.n_violations,
            "quantiles": rep.quantile_violations,
        },
        mass=u.mass(),
        range=[float(u.cell_averages.min()), float(u.cell_averages.max())],
    )
    if args.compare_orm:
        g = orm_gap(u0, z, tau, flux, args.cfl, bounds)
        payload["orm"] = {"n_steps": g.n_steps, "l1_gap": g.gap, "relative_gap": g.relative_gap}
    _emit(args.report, payload)
    return EXIT_OK


def cmd_distance(args):
    z1, z2 = read_path(args.path1), read_path(args.path2)
    b1 = RegularityBounds(m_minus=args.m_minus1, m_plus=args.m_plus1)
    b2 = RegularityBounds(m_minus=args.m_minus2, m_plus=args.m_plus2)
    refine = not args.no_refine
    rep = dp_distance(z1, z2, b1, b2, args.tau, refine=refine)
    payload = dict(_echo(args), **rep.as_dict())
    if args.oracle:
        grid = build_cost_grid(z1, z2, b1, b2, args.tau, refine=refine)
        bf = brute_force_distance(grid, args.max_cells)
        payload["oracle"] = {"value": bf, "agrees": abs(bf - rep.value) <= 1e-12}
    _emit(args.output, payload)
    if args.oracle and not payload["oracle"]["agrees"]:
        logger.error("dynamic programming and exhaustive search disagree")
        return EXIT_MATH
    return EXIT_OK


def cmd_convergence(args):
    flux = get_flux(args.flux)
    u0 = initial_data(args.initial, args.x_left, args.x_right, args.n_cells)
    rows, exponent = brownian_convergence(
        u0, args.target_segments, args.levels, flux, args.seed, args.scale, cfl=args.cfl, jobs=args.jobs
    )
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("segments,sup_distance,l1_error\n")
            for r in rows:
                fh.write(f"{r['segments']},{r['sup_distance']!r},{r['l1_error']!r}\n")
    _emit(args.summary, dict(_echo(args), rows=rows, exponent=exponent))
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "compress": cmd_compress,
    "solve": cmd_solve,
    "distance": cmd_distance,
    "convergence": cmd_convergence,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        apply_config(args, parser)
        validate(args)
        return COMMANDS[args.command](args)
    except (OrmUndefinedError, CFLError, ArithmeticError) as exc:
        logger.error("%s", exc)
        return EXIT_MATH
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except (ConfigError, InputFormatError, PathError, ValueError, TypeError) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
