#!/usr/bin/env python3
"""
holoretina CLI
--------------
Design, simulate and fabricate geometric-phase metasurface holograms for
near-eye retinal projection.

Pipelines live in holoretina/cli/commands/; this module parses arguments,
configures logging and maps failures to exit codes (2 input, 3 numerical).
"""

import argparse
import logging
import sys
import traceback

from rich.markup import escape
from rich.table import Table

from holoretina.cli.commands.base import add_standard_flags, get_console, on_off, print_custom_header, print_version
from holoretina.cli.commands.pattern import PATTERNS
from holoretina.core.design import MODES
from holoretina.core.eye import PLANES
from holoretina.errors import InputError, NumericalError

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

console = get_console()
logger = logging.getLogger("holoretina.cli")

USAGE = {
    "design": ("design [PATTERN]", "Assemble the full-aperture phase map (PGM + sidecar)"),
    "simulate": ("simulate PHASE MASK", "Retina or conjugate-plane image and metrics report"),
    "grating": ("grating", "Sweep nanobeam gratings for the half-waveplate condition"),
    "layout": ("layout PHASE", "Place oriented nanobeams and export json/csv/svg"),
    "pattern": ("pattern NAME", "Write a built-in display pattern (F, bar, all, random)"),
    "init": ("init", "Write a commented default holoretina.conf"),
}


def print_help(invoked_as: str) -> None:
    console.print("\n[bold cyan]┌─ COMMANDS[/bold cyan]")
    cmd_table = Table(show_header=False, box=None, padding=(0, 2, 0, 0))
    cmd_table.add_column(style="bold green", width=22)
    cmd_table.add_column(style="white")
    for usage, text in USAGE.values():
        cmd_table.add_row(usage, text)
    cmd_table.add_row("version", "Display version info")
    console.print(cmd_table)

    console.print("\n[bold cyan]┌─ OPTIONS[/bold cyan]")
    opt_table = Table(show_header=False, box=None, padding=(0, 2, 0, 0))
    opt_table.add_column(style="yellow", width=26)
    opt_table.add_column(style="dim white")
    opt_table.add_row("--config PATH", "key = value configuration (default: built-in defaults)")
    opt_table.add_row("--out DIR", "Output directory (default: out)")
    opt_table.add_row("--seed U64", "Random seed (GS initial phase, random masks)")
    opt_table.add_row("--analyzer on|off", "simulate: remove the unconverted zeroth order")
    opt_table.add_row("--mode per_cell|full_gs", "design: hologram synthesis mode")
    opt_table.add_row("--plane retina|conjugate", "simulate: observation plane")
    opt_table.add_row("--verbose / --debug", "Log at INFO / DEBUG")
    opt_table.add_row("-v, --version", "Display version information")
    console.print(opt_table)
    console.print(f"\n   Use [cyan bold]{invoked_as} <command> --help[/cyan bold] for command usage.\n")


def print_command_help(invoked_as: str, command: str) -> None:
    usage, text = USAGE[command]
    console.print(f"\n[bold green]USAGE:[/bold green] [bold white]{invoked_as} {usage}[/bold white] [options]")
    console.print(text)


def build_parser(invoked_as: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=invoked_as, add_help=False)
    parser.add_argument("-h", "--help", action="store_true")
    parser.add_argument("-v", "--version", action="store_true")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--debug", action="store_true")
    subparsers = parser.add_subparsers(dest="command")

    # DESIGN
    design_parser = subparsers.add_parser("design", add_help=False)
    add_standard_flags(design_parser)
    design_parser.add_argument("pattern", nargs="?", default=None)
    design_parser.add_argument("--mode", choices=MODES, default=None)

    # SIMULATE
    simulate_parser = subparsers.add_parser("simulate", add_help=False)
    add_standard_flags(simulate_parser)
    simulate_parser.add_argument("phase", nargs="?")
    simulate_parser.add_argument("mask", nargs="?")
    simulate_parser.add_argument("--analyzer", type=on_off, default=None, metavar="on|off")
    simulate_parser.add_argument("--plane", choices=PLANES, default=None)

    # GRATING
    grating_parser = subparsers.add_parser("grating", add_help=False)
    add_standard_flags(grating_parser)

    # LAYOUT
    layout_parser = subparsers.add_parser("layout", add_help=False)
    add_standard_flags(layout_parser)
    layout_parser.add_argument("phase", nargs="?")

    # PATTERN
    pattern_parser = subparsers.add_parser("pattern", add_help=False)
    add_standard_flags(pattern_parser, out_default=".")
    pattern_parser.add_argument("name", nargs="?", choices=PATTERNS)
    pattern_parser.add_argument("--column", type=int, default=0)
    pattern_parser.add_argument("--width", type=int, default=1)
    pattern_parser.add_argument("--count", type=int, default=10)

    # INIT
    init_parser = subparsers.add_parser("init", add_help=False)
    init_parser.add_argument("--out", metavar="DIR", default=".")
    init_parser.add_argument("--force", action="store_true")
    init_parser.add_argument("-h", "--help", action="store_true")

    subparsers.add_parser("version", add_help=False)
    return parser


REQUIRED = {"simulate": ("phase", "mask"), "layout": ("phase",), "pattern": ("name",)}


def dispatch(args, invoked_as: str) -> int:
    for name in REQUIRED.get(args.command, ()):
        if getattr(args, name) is None:
            console.print(f"[bold red]Error:[/bold red] missing argument <{name}>")
            print_command_help(invoked_as, args.command)
            return EXIT_INPUT

    if args.command == "init":
        from holoretina.cli.commands.config import handle_init_command

        return handle_init_command(args, console)
    if args.command == "pattern":
        from holoretina.cli.commands.pattern import handle_pattern_command

        return handle_pattern_command(args, console)
    if args.command == "design":
        from holoretina.cli.commands.design import handle_design_command

        return handle_design_command(args, console)
    if args.command == "simulate":
        from holoretina.cli.commands.simulate import handle_simulate_command

        return handle_simulate_command(args, console)
    if args.command == "grating":
        from holoretina.cli.commands.grating import handle_grating_command

        return handle_grating_command(args, console)
    from holoretina.cli.commands.layout import handle_layout_command

    return handle_layout_command(args, console)


def main():
    """
    Primary orchestration logic for the CLI.
    """
    invoked_as = "holoretina"

    # 0. Setup Logging (Default: WARNING, --verbose: INFO, --debug: DEBUG)
    # argv is checked directly because argparse has not run yet
    log_level = logging.WARNING
    if "--verbose" in sys.argv:
        log_level = logging.INFO
    if "--debug" in sys.argv:
        log_level = logging.DEBUG
    logging.basicConfig(level=log_level, format="%(message)s")
    logging.getLogger("holoretina").setLevel(log_level)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)

    # 1. Parse Args
    parser = build_parser(invoked_as)
    args, unknown = parser.parse_known_args()
    if unknown:
        console.print(f"[red]Error: Unrecognized arguments: {escape(str(unknown))}[/red]")
        print_help(invoked_as)
        sys.exit(EXIT_INPUT)

    if args.version or args.command == "version":
        print_version(invoked_as)
        sys.exit(EXIT_OK)

    # 2. Help
    if args.help or not args.command:
        if args.command in USAGE:
            print_command_help(invoked_as, args.command)
        else:
            print_custom_header(invoked_as)
            print_help(invoked_as)
        sys.exit(EXIT_OK)

    # 3. Dispatch
    try:
        code = dispatch(args, invoked_as)
    except InputError as e:
        console.print(f"[bold red]Error:[/bold red] {escape(str(e))}")
        logger.debug(traceback.format_exc())
        sys.exit(EXIT_INPUT)
    except NumericalError as e:
        console.print(f"[bold red]Error:[/bold red] {escape(str(e))}")
        logger.debug(traceback.format_exc())
        sys.exit(EXIT_NUMERICAL)
    except Exception as e:
        console.print(f"[bold red]Fatal Error:[/bold red] {escape(str(e))}")
        logger.error(traceback.format_exc())
        sys.exit(EXIT_FATAL)
    sys.exit(code)


if __name__ == "__main__":
    main()
