"""Run logging: rich console on stderr, DEBUG log file, end-of-run summary."""

import logging
import sys
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.logging import RichHandler
from rich.progress import (
    BarColumn,
    Progress,
    ProgressColumn,
    SpinnerColumn,
    TaskProgressColumn,
    TextColumn,
)
from rich.table import Table
from rich.theme import Theme

THEME = Theme({
    "info": "blue",
    "warning": "yellow",
    "error": "red bold",
    "success": "green bold",
    "metric": "cyan",
})

LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}

FILE_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def _resolve_level(verbose: bool, level: Optional[str]) -> int:
    if verbose:
        return logging.DEBUG
    return LEVELS.get((level or "INFO").upper(), logging.INFO)


class RunLogger:
    """
    Logger for one command invocation.

    The console goes to stderr so that the JSON record on stdout stays
    machine-readable; the log file always receives DEBUG.
    """

    def __init__(
        self,
        log_file: Optional[Path] = None,
        verbose: bool = False,
        quiet: bool = False,
        level: Optional[str] = None,
    ) -> None:
        """
        Args:
            log_file: Path to log file. If None, creates timestamped file in /tmp
            verbose: Shorthand for level="DEBUG"
            quiet: Suppress console output (still logs to file)
            level: Console level name, one of DEBUG, INFO, WARNING, ERROR
        """
        self.console = Console(theme=THEME, stderr=True, quiet=quiet)
        self.log_file = Path(log_file) if log_file else self._default_log_file()
        self.verbose = verbose
        self.quiet = quiet
        self.level = _resolve_level(verbose, level)

        self.sections_run: List[str] = []
        self.artifacts: List[Path] = []
        self.metrics: List[Tuple[str, Any]] = []
        self.errors: List[str] = []

        self.logger = self._build_logger()

    @staticmethod
    def _default_log_file() -> Path:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        return Path(f"/tmp/thermo_homogenization_{timestamp}.log")

    def _build_logger(self) -> logging.Logger:
        logger = logging.getLogger("thermo_homogenization")
        logger.setLevel(logging.DEBUG)
        logger.propagate = False
        for handler in list(logger.handlers):
            handler.close()
            logger.removeHandler(handler)

        try:
            self.log_file.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(self.log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
            logger.addHandler(file_handler)
        except OSError as e:
            print(f"Warning: Could not create log file {self.log_file}: {e}", file=sys.stderr)

        if not self.quiet:
            console_handler = RichHandler(
                console=self.console, show_time=False, show_path=False, markup=True
            )
            console_handler.setLevel(self.level)
            logger.addHandler(console_handler)
        return logger

    # =========================================================================
    # Messages
    # =========================================================================

    def info(self, message: str, emoji: str = "ℹ️") -> None:
        self.logger.info(f"{emoji}  {message}")

    def success(self, message: str, emoji: str = "✅") -> None:
        self.console.print(f"[success]{emoji}  {message}[/success]")
        self.logger.debug(f"SUCCESS: {message}")

    def warning(self, message: str, emoji: str = "⚠️") -> None:
        self.logger.warning(f"{emoji}  {message}")

    def error(self, message: str, emoji: str = "❌") -> None:
        """Log an error and keep it for the summary."""
        self.logger.error(f"{emoji}  {message}")
        self.errors.append(message)

    def debug(self, message: str) -> None:
        self.logger.debug(message)

    def section(self, title: str) -> None:
        """Rule on the console, one line in the file."""
        self.console.rule(f"[bold blue]{title}[/bold blue]")
        self.logger.debug(f"SECTION: {title}")
        self.sections_run.append(title)

    # =========================================================================
    # Summary tracking
    # =========================================================================

    def track_artifact(self, path: Path) -> None:
        """Record a written file; repeated paths are listed once."""
        path = Path(path)
        if path not in self.artifacts:
            self.artifacts.append(path)
            self.logger.debug(f"ARTIFACT {path}")

    def track_metric(self, name: str, value: Any) -> None:
        self.metrics.append((name, value))
        self.logger.debug(f"METRIC {name} = {value}")

    # =========================================================================
    # Progress
    # =========================================================================

    @contextmanager
    def _progress(self, columns: Sequence[ProgressColumn], description: str,
                  total: Optional[int]) -> Iterator[Optional[Progress]]:
        if self.quiet:
            yield None
            return
        with Progress(*columns, console=self.console, transient=True) as progress:
            progress.add_task(description, total=total)
            yield progress

    @contextmanager
    def progress_spinner(self, message: str) -> Iterator[None]:
        """
        Spinner for a single long operation.

        Usage:
            with logger.progress_spinner("Solving cell problems..."):
                effective_coeffs(...)
        """
        columns = (SpinnerColumn(), TextColumn("[progress.description]{task.description}"))
        with self._progress(columns, message, None):
            yield

    @contextmanager
    def progress_bar(self, description: str, total: int) -> Iterator[Optional[Progress]]:
        """
        Progress bar over a known number of items.

        Usage:
            with logger.progress_bar("Table nodes", len(grid)) as progress:
                for h in grid:
                    solve(h)
                    if progress is not None:
                        progress.advance(progress.task_ids[0])

        Yields:
            Rich Progress object, or None in quiet mode
        """
        columns = (
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
        )
        with self._progress(columns, description, total) as progress:
            yield progress

    def status(self, message: str) -> Any:
        """Console status line (silent in quiet mode)."""
        return self.console.status(message)

    # =========================================================================
    # Summary
    # =========================================================================

    def show_summary(self) -> None:
        """Metrics, written files and errors of the run."""
        if self.quiet or not any([self.sections_run, self.artifacts, self.metrics, self.errors]):
            return

        self.console.print()
        self.console.rule("[bold blue]📊 RUN SUMMARY[/bold blue]")

        if self.metrics:
            table = Table(show_header=True, header_style="bold")
            table.add_column("metric")
            table.add_column("value", justify="right", style="metric")
            for name, value in self.metrics:
                table.add_row(name, f"{value:.6g}" if isinstance(value, float) else str(value))
            self.console.print(table)

        if self.artifacts:
            files = Table(show_header=True, header_style="bold")
            files.add_column("📄 file")
            files.add_column("bytes", justify="right")
            for path in self.artifacts:
                size = path.stat().st_size if path.exists() else None
                files.add_row(str(path), "-" if size is None else str(size))
            self.console.print(files)

        if self.errors:
            self.console.print("[error]❌ Errors Encountered:[/error]")
            for error in self.errors:
                self.console.print(f"   • {error}")
        else:
            self.console.print("[green]✅ No errors encountered[/green]")

        self.console.rule()
        self.console.print(f"📄 Full log saved to: [cyan]{self.log_file}[/cyan]")


# Global logger instance (initialized in CLI)
_logger: Optional[RunLogger] = None


def setup_logger(
    log_file: Optional[Path] = None,
    verbose: bool = False,
    quiet: bool = False,
    level: Optional[str] = None,
) -> RunLogger:
    """Initialize global logger instance."""
    global _logger
    _logger = RunLogger(log_file=log_file, verbose=verbose, quiet=quiet, level=level)
    return _logger


def get_logger() -> RunLogger:
    """Get global logger instance."""
    if _logger is None:
        raise RuntimeError("Logger not initialized. Call setup_logger() first.")
    return _logger


def optional_logger() -> Optional[RunLogger]:
    """The global logger, or None when the package is used as a library."""
    return _logger


def log_debug(message: str) -> None:
    if _logger is not None:
        _logger.debug(message)


def log_warning(message: str) -> None:
    if _logger is not None:
        _logger.warning(message)


def log_increment(label: str, increments: Sequence[float]) -> None:
    """
    DEBUG line for the latest iterate of a fixed-point loop.

    Warns when the increment grew over the previous iterate.
    """
    if not increments:
        return
    log_debug(f"{label}: iteration {len(increments)} increment {increments[-1]:.3e}")
    if len(increments) > 1 and increments[-1] > increments[-2]:
        log_warning(f"{label}: increment grew {increments[-2]:.3e} -> {increments[-1]:.3e}")


def summarize(details: Dict[str, Any]) -> str:
    """Render a small dict as ``k=v`` pairs for one-line log messages."""
    return ", ".join(
        f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}" for k, v in details.items()
    )
