"""
Command-line surface
Subcommands: bounds, analyze, minima, rescale, search, units, verify.
Reports go to stdout; logs go to stderr.
"""

import argparse
import logging
import sys
from typing import IO, Optional, Sequence

import mpmath
import pandas as pd

import construct
import hlattice
import minima
import profiles
import verification
from bounds import BoundTable, ball_volume
from config import OUTPUT_FORMATS, RunConfig, configure_precision, fmt, load_config, to_mpf
from errors import ConfigError, HurwitzError
from quat import format_rational, sorted_units

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_EXHAUSTED = 3


class UsageError(Exception):
    """Invalid combination of arguments"""


def _emit_pairs(pairs: Sequence[tuple[str, str]], config: RunConfig, out: IO[str]) -> None:
    frame = pd.DataFrame(list(pairs), columns=['field', 'value'])
    if config.output_format == 'csv':
        out.write(frame.to_csv(index=False, lineterminator='\n'))
    else:
        width = max(len(k) for k, _ in pairs)
        for key, value in pairs:
            out.write(f"{key.ljust(width)}  {value}\n")


def _emit_frame(frame: pd.DataFrame, config: RunConfig, out: IO[str]) -> None:
    if config.output_format == 'csv':
        out.write(frame.to_csv(index=False, lineterminator='\n'))
    else:
        out.write(frame.to_string(index=False) + "\n")


def _emit_report(document: dict, out: IO[str]) -> None:
    construct.dump_report(document, out)


# ---- commands ----

def cmd_bounds(args, config: RunConfig, out: IO[str]) -> int:
    if args.m_min < 2 or args.m_max < args.m_min:
        raise UsageError(f"need 2 <= m-min <= m-max, got {args.m_min}..{args.m_max}")
    table = BoundTable(args.m_min, args.m_max)
    out.write(table.to_csv() if config.output_format == 'csv' else table.to_text())
    return EXIT_OK


def cmd_analyze(args, config: RunConfig, out: IO[str]) -> int:
    lattice = hlattice.load(args.lattice)
    report = minima.quaternionic_minima(lattice, config.capacity)
    det = hlattice.determinant(lattice)
    pairs = [
        ('m', str(lattice.m)),
        ('determinant', format_rational(det) if lattice.is_exact else fmt(det)),
        ('minima', " ".join(fmt(x) for x in report.minima)),
        ('minimal_vectors', str(report.minimal_count)),
        ('divisible_by_24', str(report.orbit_count_ok()).lower()),
        ('density', fmt(hlattice.density(lattice, report.shortest))),
        ('minima_product', fmt(report.product())),
    ]
    _emit_pairs(pairs, config, out)
    return EXIT_OK


def cmd_minima(args, config: RunConfig, out: IO[str]) -> int:
    lattice = hlattice.load(args.lattice)
    report = minima.quaternionic_minima(lattice, config.capacity)
    rows = []
    for i, (value, witness) in enumerate(zip(report.minima, report.witnesses), start=1):
        rows.append({
            'i': i,
            'minimum': fmt(value),
            'norm_sq': format_rational(witness.norm_sq),
            'z_coordinates': " ".join(str(z) for z in witness.z_coords),
            'witness': " ".join(str(q) for q in witness.ambient),
        })
    _emit_frame(pd.DataFrame(rows), config, out)
    out.write(f"minimal vectors: {report.minimal_count} "
              f"({'divisible' if report.orbit_count_ok() else 'NOT divisible'} by 24)\n")
    return EXIT_OK


def cmd_rescale(args, config: RunConfig, out: IO[str]) -> int:
    lattice = hlattice.load(args.lattice)
    rescaling = construct.rescale(lattice, config.capacity)
    result = rescaling.lattice
    pairs = [
        ('source_minima', " ".join(fmt(x) for x in rescaling.source_minima.minima)),
        ('minima_product', fmt(rescaling.minima_product)),
        ('determinant', fmt(hlattice.determinant(result))),
        ('shortest_norm', fmt(rescaling.expected_norm)),
    ]
    if args.output:
        hlattice.save(result, args.output)
        pairs.append(('lattice_file', args.output))
    _emit_pairs(pairs, config, out)
    return EXIT_OK


def _save_witness(lattice: hlattice.HurwitzLattice, path: Optional[str], success: bool) -> Optional[str]:
    if not path or not success:
        return None
    hlattice.save(lattice, path)
    return path


def _search_hlawka(args, config: RunConfig, out: IO[str]) -> int:
    m = args.m
    if args.ball_radius is not None and args.integral is not None:
        raise UsageError("give either --ball-radius or --integral, not both")
    if args.ball_radius is not None:
        radius = to_mpf(args.ball_radius)
    else:
        volume = to_mpf(args.integral if args.integral is not None else 20)
        radius = (volume / ball_volume(4 * m)) ** (mpmath.mpf(1) / (4 * m))
    f = profiles.BallIndicator(radius, m)
    alpha = args.alpha if args.alpha is not None else construct.default_alpha(f, capacity=config.capacity)
    report = construct.hlawka_search(construct.normalized_base(m, alpha), alpha, f, config.samples,
                                     config.seed, primitive_only=args.primitive, workers=config.workers,
                                     capacity=config.capacity)
    success = bool(report.below_target)
    path = _save_witness(report.lattice, args.output, success)
    _emit_report(report.to_document(path), out)
    out.write(report.audit_line() + "\n")
    return EXIT_OK if success else EXIT_EXHAUSTED


def _search_minima_product(args, config: RunConfig, out: IO[str]) -> int:
    report = construct.minima_product_search(args.m, r=args.r, margin=args.margin, samples=config.samples,
                                             seed=config.seed, alpha=args.alpha, workers=config.workers,
                                             capacity=config.capacity)
    path = _save_witness(report.search.lattice, args.output, report.success)
    _emit_report(report.to_document(path), out)
    return EXIT_OK if report.success else EXIT_EXHAUSTED


def _search_convex_body(args, config: RunConfig, out: IO[str]) -> int:
    body = profiles.BODIES[args.body](args.radius, args.m)
    report = construct.convex_body_search(body, samples=config.samples, seed=config.seed,
                                          epsilon=args.epsilon, alpha=args.alpha,
                                          workers=config.workers, capacity=config.capacity)
    path = _save_witness(report.search.lattice, args.output, report.success)
    _emit_report(report.to_document(path), out)
    return EXIT_OK if report.success else EXIT_EXHAUSTED


def _search_density(args, config: RunConfig, out: IO[str]) -> int:
    report = construct.packing_density_search(args.m, margin=args.margin, samples=config.samples,
                                              seed=config.seed, alpha=args.alpha, workers=config.workers,
                                              capacity=config.capacity)
    success = report.density is not None
    lattice = report.rescaling.lattice if success else None
    path = _save_witness(lattice, args.output, success)
    _emit_report(report.to_document(path), out)
    return EXIT_OK if success else EXIT_EXHAUSTED


SEARCHES = {
    'hlawka': _search_hlawka,
    'minima-product': _search_minima_product,
    'convex-body': _search_convex_body,
    'density': _search_density,
}


def cmd_search(args, config: RunConfig, out: IO[str]) -> int:
    if args.m < 2:
        raise UsageError(f"searches need m >= 2, got {args.m}")
    return SEARCHES[args.kind](args, config, out)


def cmd_units(args, config: RunConfig, out: IO[str]) -> int:
    rows = []
    for u in sorted_units():
        a, b, c, d = u.to_strings()
        rows.append({'a': a, 'b': b, 'c': c, 'd': d, 'norm': u.norm()})
    _emit_frame(pd.DataFrame(rows), config, out)
    return EXIT_OK


def cmd_verify(args, config: RunConfig, out: IO[str]) -> int:
    results = verification.run_suite(args.suite)
    for result in results:
        status = 'PASS' if result.passed else 'FAIL'
        out.write(f"{status}  {result.suite}.{result.name}  {result.detail}\n")
    failed = sum(1 for r in results if not r.passed)
    out.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_FAILURE


# ---- parser ----

def _global_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--prec', type=int, default=argparse.SUPPRESS,
                        help="extended precision in bits (env HURWITZ_PREC, default 128)")
    common.add_argument('--seed', type=int, default=argparse.SUPPRESS,
                        help="master seed (env HURWITZ_SEED, default 0)")
    common.add_argument('--samples', type=int, default=argparse.SUPPRESS,
                        help="Monte Carlo samples (env HURWITZ_SAMPLES, default 1000)")
    common.add_argument('--format', choices=OUTPUT_FORMATS, default=argparse.SUPPRESS,
                        help="table or csv (env HURWITZ_FORMAT)")
    common.add_argument('--capacity', type=int, default=argparse.SUPPRESS,
                        help="enumeration cap (env HURWITZ_CAPACITY, default 10^7)")
    common.add_argument('--workers', type=int, default=argparse.SUPPRESS,
                        help="worker processes for searches (env HURWITZ_WORKERS, default 1)")
    common.add_argument('--log-level', default=argparse.SUPPRESS,
                        help="logging level (env HURWITZ_LOG_LEVEL, default INFO)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(prog='hurwitz', parents=[common],
                                     description="Hurwitz lattice toolkit")
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('bounds', parents=[common], help="packing bound table")
    p.add_argument('--m-min', type=int, default=2)
    p.add_argument('--m-max', type=int, default=16)
    p.set_defaults(handler=cmd_bounds)

    for name, handler, text in (('analyze', cmd_analyze, "determinant, minima and density of a lattice"),
                                ('minima', cmd_minima, "quaternionic successive minima with witnesses")):
        p = commands.add_parser(name, parents=[common], help=text)
        p.add_argument('lattice', help="lattice document (JSON)")
        p.set_defaults(handler=handler)

    p = commands.add_parser('rescale', parents=[common], help="rescale a determinant-one lattice by its minima")
    p.add_argument('lattice')
    p.add_argument('--output', help="write the rescaled lattice here")
    p.set_defaults(handler=cmd_rescale)

    p = commands.add_parser('search', parents=[common], help="seeded lattice searches")
    kinds = p.add_subparsers(dest='kind', required=True)
    for kind in SEARCHES:
        k = kinds.add_parser(kind, parents=[common])
        k.add_argument('--m', type=int, default=2)
        k.add_argument('--alpha', help="lift height as a rational (default: halving rule)")
        k.add_argument('--output', help="write the witness lattice here on success")
        if kind == 'hlawka':
            k.add_argument('--ball-radius', type=float)
            k.add_argument('--integral', type=float, help="ball volume (default 20)")
            k.add_argument('--primitive', action='store_true', help="sum over primitive vectors only")
        if kind in ('minima-product', 'density'):
            k.add_argument('--margin', type=float, default=0.95, help="r as a fraction of the threshold radius")
        if kind == 'minima-product':
            k.add_argument('--r', type=float)
        if kind == 'convex-body':
            k.add_argument('--body', choices=sorted(profiles.BODIES), default='ball')
            k.add_argument('--radius', type=float, default=1.0, help="radius before dilation")
            k.add_argument('--epsilon', type=float, default=1.0)
    p.set_defaults(handler=cmd_search)

    p = commands.add_parser('units', parents=[common], help="the 24 Hurwitz units")
    p.set_defaults(handler=cmd_units)

    p = commands.add_parser('verify', parents=[common], help="run the self-check suites")
    p.add_argument('--suite', choices=verification.SUITES + ('all',), default='all')
    p.set_defaults(handler=cmd_verify)
    return parser


def _resolve_config(args, base: Optional[RunConfig]) -> RunConfig:
    config = base if base is not None else load_config()
    return config.with_overrides(
        seed=getattr(args, 'seed', None),
        samples=getattr(args, 'samples', None),
        precision_bits=getattr(args, 'prec', None),
        output_format=getattr(args, 'format', None),
        capacity=getattr(args, 'capacity', None),
        workers=getattr(args, 'workers', None),
        log_level=getattr(args, 'log_level', None),
    )


def main(argv: Optional[Sequence[str]] = None, config: Optional[RunConfig] = None,
         out: Optional[IO[str]] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        config = _resolve_config(args, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.getLogger().setLevel(config.log_level.upper())
    configure_precision(config.precision_bits)

    try:
        return args.handler(args, config, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HurwitzError, ValueError, OverflowError, OSError) as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
