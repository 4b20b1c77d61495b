"""Base command abstraction for the CLI subcommands."""

import argparse
import json
import sys
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Optional

from thermo_homogenization.config import Config
from thermo_homogenization.errors import ValidationError
from thermo_homogenization.fem import LinearSolver
from thermo_homogenization.geometry import Shape
from thermo_homogenization.logger import RunLogger, get_logger
from thermo_homogenization.outputs import jsonable, write_json
from thermo_homogenization.tables import CoefficientTable, load_table


class BaseCommand(ABC):
    """Abstract base class for all subcommands.

    All commands must implement:
    - name: Subcommand path as typed on the command line (e.g. 'table build')
    - description: Human-readable description
    - run(): Execute the command and return success status

    Commands optionally implement:
    - add_arguments(): Subcommand-specific flags
    """

    def __init__(self, config: Config, args: argparse.Namespace) -> None:
        """
        Initialize command.

        Args:
            config: Configuration instance (profile and overrides applied)
            args: Parsed command-line arguments
        """
        self.config = config
        self.args = args
        self._logger: Optional[RunLogger] = None
        self._shape: Optional[Shape] = None
        self._shape_loaded = False

    @property
    def logger(self) -> RunLogger:
        """Get logger instance (lazy initialization)."""
        if self._logger is None:
            self._logger = get_logger()
        return self._logger

    @property
    @abstractmethod
    def name(self) -> str:
        """Subcommand path (e.g., 'macro run')."""

    @property
    @abstractmethod
    def description(self) -> str:
        """Human-readable command description."""

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        """Register subcommand flags (none by default)."""

    # =========================================================================
    # Shared helpers
    # =========================================================================

    @property
    def shape(self) -> Optional[Shape]:
        """Reference inclusion from the configuration, built once."""
        if not self._shape_loaded:
            self._shape = self.config.shape()
            self._shape_loaded = True
        return self._shape

    @property
    def solver(self) -> LinearSolver:
        return self.config.solver()

    @property
    def out_dir(self) -> Path:
        """``--out`` when given, else ``outputs.dir`` from the configuration."""
        out = getattr(self.args, "out", None)
        return Path(out) if out is not None else self.config.output_dir

    def load_table(self, path: Optional[Path] = None) -> CoefficientTable:
        """Load the coefficient table from ``path``, ``--table`` or ``table.path``.

        Raises:
            ValidationError: If no table is configured
            TableError: If the table does not match the configured shape and params
        """
        path = path or getattr(self.args, "table", None) or self.config.table_path
        if path is None:
            raise ValidationError("No coefficient table given (use --table or set table.path)")
        table = load_table(Path(path))
        table.check_compatible(self.shape, self.config.params())
        self.logger.info(f"Loaded table {path} ({len(table.grid)} nodes)")
        return table

    def emit(self, data: Any, filename: Optional[str] = None) -> None:
        """Print a JSON record on stdout; also write it to the output directory when named."""
        if filename is not None and getattr(self.args, "out", None) is not None:
            path = write_json(self.out_dir / filename, data)
            self.logger.track_artifact(path)
        sys.stdout.write(json.dumps(jsonable(data), indent=2, sort_keys=True) + "\n")

    @abstractmethod
    def run(self) -> bool:
        """
        Execute the command.

        Returns:
            True if successful, False otherwise

        Raises:
            HomogenizationError: Validation and numerical failures (mapped to exit codes by the CLI)
        """
