"""
Utility Functions for Magnus Walks
==================================

Console, logging, errors, settings and output writers shared by every module.
"""

import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel

console = Console(stderr=True)

LOGGER_NAME = "magnus_walks"
SCHEMA_PREFIX = "magnus-walks"
SCHEMA_VERSION = "v1"


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class MagnusError(Exception):
    """Base error; `exit_code` is what the CLI returns when it escapes."""

    exit_code = 1


class WordParseError(MagnusError, ValueError):
    exit_code = 2

    def __init__(self, message: str, text: str = "", position: Optional[int] = None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} (at position {position} in {text!r})"
        super().__init__(message)


class RankMismatchError(MagnusError, ValueError):
    exit_code = 2


class GroupSpecError(MagnusError, ValueError):
    exit_code = 2


class GroupError(MagnusError):
    pass


class MeasureError(MagnusError):
    pass


class MembershipError(MagnusError):
    pass


class CandidateError(MagnusError):
    pass


class ProfileError(MagnusError):
    pass


class BudgetExceeded(MagnusError):
    """A size budget ran out; `partial` holds whatever was computed before."""

    exit_code = 3

    def __init__(self, detail: str, partial: Any = None):
        self.detail = detail
        self.partial = partial
        super().__init__(detail)


# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Install a RichHandler on the package logger (idempotent)
    """
    level = level or os.environ.get("MAGNUS_WALKS_LOG_LEVEL", "WARNING")
    logger = logging.getLogger(LOGGER_NAME)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(console=console, show_path=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    logger.setLevel(level.upper())
    logger.propagate = False
    return logger


def get_logger(name: str) -> logging.Logger:
    if not name.startswith(LOGGER_NAME):
        name = f"{LOGGER_NAME}.{name.rsplit('.', 1)[-1]}"
    return logging.getLogger(name)


# ---------------------------------------------------------------------------
# Settings
# ---------------------------------------------------------------------------

def _env_number(name: str, default, cast):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = cast(raw)
    except ValueError:
        raise GroupSpecError(f"{name} must be a number, got {raw!r}")
    if value <= 0:
        raise GroupSpecError(f"{name} must be positive, got {raw!r}")
    return value


@dataclass
class Settings:
    """Runtime knobs, read from MAGNUS_WALKS_* environment variables."""

    threads: int = 1
    ball_budget: int = 200_000
    support_budget: int = 2_000_000
    mass_floor: float = 1e-15
    block_size: int = 10_000
    dirichlet_budget: int = 250_000

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            threads=_env_number("MAGNUS_WALKS_THREADS", os.cpu_count() or 1, int),
            ball_budget=_env_number("MAGNUS_WALKS_BALL_BUDGET", 200_000, int),
            support_budget=_env_number("MAGNUS_WALKS_SUPPORT_BUDGET", 2_000_000, int),
            mass_floor=_env_number("MAGNUS_WALKS_MASS_FLOOR", 1e-15, float),
            block_size=_env_number("MAGNUS_WALKS_BLOCK_SIZE", 10_000, int),
            dirichlet_budget=_env_number("MAGNUS_WALKS_DIRICHLET_BUDGET", 250_000, int),
        )


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def format_number(value: Any) -> str:
    """Rationals as p/q, floats in shortest round-trip form."""
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def schema_name(command: str) -> str:
    return f"{SCHEMA_PREFIX}/{command}/{SCHEMA_VERSION}"


def dumps_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(value: Any):
    if isinstance(value, Fraction):
        return format_number(value)
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    if hasattr(value, "item"):  # numpy scalars
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def emit(text: str, output: Optional[Path] = None):
    """
    Write data output to a file or to stdout (never through the rich console)
    """
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Validation and messages
# ---------------------------------------------------------------------------

def parse_int_list(text: str, what: str = "value") -> List[int]:
    try:
        return [int(part) for part in text.replace(" ", "").split(",") if part != ""]
    except ValueError:
        raise GroupSpecError(f"invalid {what} list: {text!r}")


def validate_moduli(moduli: Sequence[int]) -> Tuple[bool, str]:
    """
    Check that every modulus is at least 2
    """
    for i, m in enumerate(moduli, 1):
        if m < 2:
            return False, f"modulus {i} is {m}, must be >= 2"
    return True, "moduli valid"


def show_error_message(error: str, title: str = "Error"):
    console.print(Panel(f"[bold red]Error:[/bold red] {error}",
                        title=title, border_style="red"))


def show_success_message(text: str, title: str = "Done"):
    console.print(Panel(f"[bold green]✓[/bold green] {text}",
                        title=title, border_style="green"))
