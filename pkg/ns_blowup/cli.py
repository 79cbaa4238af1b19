"""Command-line interface for NS Blowup."""

import argparse
import logging
import math
import sys
from pathlib import Path

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from ns_blowup import __version__
from ns_blowup.analysis.littlewood_paley import BesovIndex, CRITICAL_INDEX, build_filter_bank
from ns_blowup.analysis.spectral import Grid
from ns_blowup.config import DEFAULT_BOX_LENGTH, ConfigError, load_config
from ns_blowup.experiment import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, run_simulation
from ns_blowup.logger import setup_logging
from ns_blowup.monitor import scaling_invariance_check
from ns_blowup.presets import PRESET_NAMES, make_preset
from ns_blowup.progress import SolveProgress
from ns_blowup.storage.field_file import FieldFormatError, read_field, write_field
from ns_blowup.storage.series_csv import write_table
from ns_blowup.verification import CSV_HEADER, DETAIL_HEADERS, SUITE_NAMES, run_verification

console = Console(stderr=True)
logger = logging.getLogger('ns_blowup.cli')


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with EXIT_CONFIG.

    Exit status 2 is reserved for numerical failure.
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_besov_pair(text):
    """'s,p' -> BesovIndex; p may be 'inf'."""
    try:
        s, p = text.split(',')
        return BesovIndex(float(s), math.inf if p.strip().lower() in ('inf', 'infinity') else float(p))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected 's,p' with p >= 1 or 'inf', got {text!r} ({e})")


def _suite_name(text):
    if text not in SUITE_NAMES + ('all',):
        raise argparse.ArgumentTypeError(
            f"unknown suite {text!r} (choose from {', '.join(SUITE_NAMES)}, all)")
    return text


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser():
    parser = _ArgumentParser(
        prog='ns_blowup',
        description="Spectral analysis of Navier-Stokes blowup criteria on the periodic 3-torus",
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    parser.add_argument('--log-file', help="also write a DEBUG log to this file")
    sub = parser.add_subparsers(dest='command', metavar='COMMAND', parser_class=_ArgumentParser)
    sub.required = True

    analyze = sub.add_parser('analyze', help="per-block Littlewood-Paley norms of a field file")
    analyze.add_argument('field', type=Path, help="field file (.bnsf)")
    analyze.add_argument('--besov', type=parse_besov_pair, action='append', metavar='S,P',
                         help="Besov index (repeatable; default -1,inf)")
    analyze.add_argument('--out', type=Path, help="block CSV path (default stdout)")

    simulate = sub.add_parser('simulate', help="solve from a configuration file and record diagnostics")
    simulate.add_argument('config', type=Path, help="INI configuration")
    simulate.add_argument('--output', type=Path, help="trajectory directory (overrides run.output)")
    simulate.add_argument('--no-progress', action='store_true', help="disable the progress bar")

    verify = sub.add_parser('verify', help="run verification suites")
    verify.add_argument('suite', type=_suite_name, help=f"{', '.join(SUITE_NAMES)} or all")
    verify.add_argument('--n', type=_positive_int, default=32, help="base grid size (default 32)")
    verify.add_argument('--samples', type=_positive_int, default=20, help="random samples per check")
    verify.add_argument('--seed', type=int, default=0)
    verify.add_argument('--out', type=Path, help="check CSV path (default stdout)")
    verify.add_argument('--details', type=Path, metavar='DIR',
                        help="write per-suite measurement tables (paraproduct.csv, heat.csv) here")

    scale = sub.add_parser('scale-check', help="B^{-1,inf} norm before and after a dyadic dilation")
    scale.add_argument('field', type=Path)
    scale.add_argument('--m', type=int, required=True, help="dilation x -> 2^m x")

    make = sub.add_parser('make-field', help="write a named initial condition as a field file")
    make.add_argument('preset', help=f"one of {', '.join(PRESET_NAMES)}, e.g. 'single-mode(4)'")
    make.add_argument('out', type=Path)
    make.add_argument('--n', type=int, required=True)
    make.add_argument('--box-length', type=float, default=DEFAULT_BOX_LENGTH)
    make.add_argument('--amplitude', type=float, default=1.0)
    make.add_argument('--seed', type=int, default=0)
    return parser


def _emit_table(path, header, rows):
    """CSV to a file, or to stdout when path is None."""
    if path is None:
        write_table(sys.stdout, header, rows)
        sys.stdout.flush()
    else:
        write_table(path, header, rows)
        console.print(f"[green]✓[/green] Wrote {path}")


def _column_name(idx, first):
    if first:
        return 'weighted_norm'
    p = 'inf' if math.isinf(idx.p) else format(idx.p, 'g')
    return f"weighted_norm_s{format(idx.s, 'g')}_p{p}"


def cmd_analyze(args):
    field = read_field(args.field)
    indices = args.besov or [CRITICAL_INDEX]
    bank = build_filter_bank(field.grid)
    per_index = [bank.block_norms(field, idx) for idx in indices]

    header = ['block'] + [_column_name(idx, i == 0) for i, idx in enumerate(indices)]
    rows = [[k] + [float(norms[k]) for norms in per_index] for k in range(bank.j_max + 1)]
    _emit_table(args.out, header, rows)

    table = Table(title=f"{args.field.name}  (n={field.grid.n}, components={field.components})")
    table.add_column("Space", style="cyan")
    table.add_column("Norm", style="yellow", justify="right")
    table.add_column("Peak block", justify="right")
    for idx, norms in zip(indices, per_index):
        table.add_row(str(idx), f"{float(norms.max()):.10g}", str(int(norms.argmax())))
    console.print(table)
    return EXIT_OK


def cmd_simulate(args):
    config = load_config(args.config)
    console.print(Panel(
        f"[green]Condition:[/green] {config.condition}\n"
        f"[green]Grid:[/green] n={config.n}, L={config.box_length:g}\n"
        f"[green]Time:[/green] T={config.T:g}, dt={config.dt:g}",
        title="[bold cyan]Simulation[/bold cyan]",
        border_style="cyan",
    ))

    progress = SolveProgress(config.T, console=console)
    if args.no_progress:
        result = run_simulation(config, output=args.output)
    else:
        with progress:
            result = run_simulation(config, output=args.output, progress=progress)
    progress.display_summary(result.stats, result.trajectory)

    style = "green" if result.exit_code == EXIT_OK else "red"
    console.print(Panel(
        f"[{style}]Output:[/{style}] {result.output}\n"
        f"[{style}]Criterion distance:[/{style}] {result.criterion:.10g}\n"
        f"[{style}]BV witnesses (eps={config.bv_epsilon:g}):[/{style}] {result.bv_witnesses}",
        title=f"[bold {style}]{result.trajectory.status.value}[/bold {style}]",
        border_style=style,
    ))
    return result.exit_code


def _display_checks(results):
    table = Table(title="Verification")
    table.add_column("Suite", style="cyan")
    table.add_column("Check")
    table.add_column("Observed", justify="right")
    table.add_column("Threshold", justify="right")
    table.add_column("Result", justify="center")
    for r in results:
        mark = "[green]pass[/green]" if r.passed else "[bold red]FAIL[/bold red]"
        table.add_row(r.suite, r.check, f"{r.observed:.4e}", r.threshold, mark)
    console.print(table)


def cmd_verify(args):
    details = {} if args.details else None
    with console.status("Verifying...") as status:
        results = run_verification(
            args.suite, n=args.n, samples=args.samples, seed=args.seed,
            on_suite=lambda name: status.update(f"Verifying [bold]{name}[/bold]..."),
            details=details,
        )
    _emit_table(args.out, CSV_HEADER, [r.as_row() for r in results])
    if details is not None:
        args.details.mkdir(parents=True, exist_ok=True)
        for suite, rows in details.items():
            _emit_table(args.details / f"{suite}.csv", DETAIL_HEADERS[suite], rows)
    _display_checks(results)

    failed = sum(1 for r in results if not r.passed)
    if failed:
        console.print(f"[bold red]✗ {failed} of {len(results)} checks failed[/bold red]")
        return EXIT_NUMERICAL
    console.print(f"[bold green]✓ All {len(results)} checks passed[/bold green]")
    return EXIT_OK


def cmd_scale_check(args):
    if args.m < 0:
        raise UsageError(f"--m must be nonnegative, got {args.m}")
    field = read_field(args.field)
    before, after = scaling_invariance_check(field, args.m)
    native = build_filter_bank(field.grid).besov_norm(field, CRITICAL_INDEX)
    gap = abs(before - after)
    _emit_table(None, ['m', 'native', 'before', 'after', 'gap'], [[args.m, native, before, after, gap]])
    console.print(
        f"[cyan]B^(-1,inf):[/cyan] native grid {native:.12g}; "
        f"on the dilation's sample points before {before:.12g}, after {after:.12g}, gap {gap:.3e}"
    )
    return EXIT_OK


def cmd_make_field(args):
    try:
        grid = Grid(args.n, args.box_length)
        field = make_preset(args.preset, grid, args.amplitude, args.seed)
    except ValueError as e:
        raise UsageError(str(e))
    write_field(args.out, field)
    console.print(f"[green]✓[/green] Wrote {args.preset} on n={grid.n} to {args.out}")
    return EXIT_OK


COMMANDS = {
    'analyze': cmd_analyze,
    'simulate': cmd_simulate,
    'verify': cmd_verify,
    'scale-check': cmd_scale_check,
    'make-field': cmd_make_field,
}


def run_cli(argv=None):
    """Parse arguments, run one subcommand and return its exit code.

    Exit codes: 0 success, 1 configuration/input error, 2 numerical failure.
    """
    args = build_parser().parse_args(argv)
    setup_logging(logging.DEBUG if args.verbose else logging.INFO, args.log_file)
    try:
        return COMMANDS[args.command](args)
    except FieldFormatError as e:
        console.print(f"[bold red]❌ Malformed field file:[/bold red] {e}")
    except ConfigError as e:
        console.print(f"[bold red]❌ Configuration error:[/bold red] {e}")
    except (UsageError, ValueError) as e:
        console.print(f"[bold red]❌ Invalid input:[/bold red] {e}")
    except OSError as e:
        console.print(f"[bold red]❌ I/O error:[/bold red] {e}")
    return EXIT_CONFIG
