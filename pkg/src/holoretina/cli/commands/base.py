"""
Shared CLI helpers: console, headers, standard flags, config resolution and
output directory handling.
"""

import argparse
import logging
from pathlib import Path
from typing import Optional

from rich.console import Console

from holoretina import __version__
from holoretina.core.config import RunConfig, load_config, write_resolved_config

logger = logging.getLogger("holoretina.cli")

_console: Optional[Console] = None


def get_console() -> Console:
    global _console
    if _console is None:
        _console = Console(highlight=False)
    return _console


def print_custom_header(invoked_as: str = "holoretina") -> None:
    console = get_console()
    console.print(f"[bold cyan]{invoked_as}[/bold cyan] [dim]v{__version__}[/dim]")
    console.print("[dim]Geometric-phase metasurface holograms for near-eye retinal projection[/dim]")


def print_version(invoked_as: str = "holoretina") -> None:
    get_console().print(f"{invoked_as} {__version__}")


def add_standard_flags(parser: argparse.ArgumentParser, out_default: str = "out") -> None:
    """--config, --out, --seed and the help/log flags shared by every pipeline."""
    parser.add_argument("--config", metavar="PATH", default=None, help="key = value configuration file")
    parser.add_argument("--out", metavar="DIR", default=out_default, help="Output directory")
    parser.add_argument("--seed", metavar="U64", type=int, default=None, help="Override the random seed")
    parser.add_argument("-h", "--help", action="store_true")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--debug", action="store_true")


def on_off(value: str) -> bool:
    low = value.lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on|off, got {value!r}")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file (or defaults) with CLI overrides applied."""
    config = load_config(args.config)
    return config.with_overrides(
        seed=getattr(args, "seed", None),
        analyzer=getattr(args, "analyzer", None),
        mode=getattr(args, "mode", None),
        plane=getattr(args, "plane", None),
    )


def prepare_output(args: argparse.Namespace, config: RunConfig, command: str) -> Path:
    """Create the output directory and echo the resolved configuration into it."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_resolved_config(config, out, command)
    logger.info("output directory: %s", out)
    return out


def write_report(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path
