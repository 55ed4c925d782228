"""
holoretina init: write a commented default configuration.
"""

from pathlib import Path

from rich.markup import escape

from holoretina.core.config import DEFAULT_CONFIG_NAME, default_config_text


def handle_init_command(args, console) -> int:
    target = Path(getattr(args, "out", None) or ".") / DEFAULT_CONFIG_NAME
    if target.exists() and not getattr(args, "force", False):
        console.print(f"[yellow]{escape(str(target))} already exists[/yellow]; use --force to overwrite.")
        return 1
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(default_config_text(), encoding="utf-8")
    console.print(f"[green]Created[/green] {escape(str(target))}")
    return 0
