"""Run artifacts: atomic JSON/CSV writers, streaming series and the run manifest."""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.logger import optional_logger
from thermo_homogenization.utils import calculate_sha256, verify_sha256

MANIFEST_NAME = "outputs.json"

# Column orders are part of the file format (see README).
SERIES_COLUMNS = (
    "t", "theta_min", "theta_max", "theta_mean",
    "h_min", "h_max", "h_mean", "u_max", "picard_iters",
)
FIELD_COLUMNS = ("node", "x", "y", "theta", "h", "ux", "uy")
MICRO_SERIES_COLUMNS = ("t", "theta_max", "v_max")
MICRO_FIELD_COLUMNS = ("node", "x", "y", "theta")
MICRO_CELL_COLUMNS = ("cell", "kx", "ky", "theta_avg", "v", "h")
MICRO_DISPLACEMENT_COLUMNS = ("node", "ux", "uy")


def _plain(value: Any) -> Any:
    """numpy scalars to Python numbers so CSV/JSON text is stable."""
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


def jsonable(data: Any) -> Any:
    """Nested numpy and Path values as plain JSON types."""
    if isinstance(data, dict):
        return {str(k): jsonable(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [jsonable(v) for v in data]
    if isinstance(data, np.ndarray):
        return jsonable(data.tolist())
    if isinstance(data, Path):
        return str(data)
    return _plain(data)


def write_json(path: Path, data: Any) -> Path:
    """Write JSON atomically (temp file, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_suffix(path.suffix + ".tmp")
    try:
        with temp_file.open("w") as f:
            json.dump(jsonable(data), f, indent=2, sort_keys=True)
            f.write("\n")
        temp_file.replace(path)
    except OSError as e:
        raise RuntimeError(f"Failed to write {path}: {e}") from e
    return path


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a whole CSV file atomically; the header is written even without rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_suffix(path.suffix + ".tmp")
    try:
        with temp_file.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_plain(v) for v in row])
        temp_file.replace(path)
    except OSError as e:
        raise RuntimeError(f"Failed to write {path}: {e}") from e
    return path


def read_csv(path: Path) -> Dict[str, np.ndarray]:
    """Read a numeric CSV written by this module into columns."""
    with Path(path).open("r", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


class SeriesWriter:
    """CSV time series written row by row.

    The header goes out on open and every row is flushed, so a run that
    aborts leaves each completed row on disk.
    """

    def __init__(self, path: Path, columns: Sequence[str]) -> None:
        self.path = Path(path)
        self.columns = tuple(columns)
        self.rows = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = self.path.open("w", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(self.columns)
        self._file.flush()

    def write(self, values: Dict[str, Any]) -> None:
        missing = [c for c in self.columns if c not in values]
        if missing:
            raise KeyError(f"Series row lacks columns: {', '.join(missing)}")
        self._writer.writerow([_plain(values[c]) for c in self.columns])
        self._file.flush()
        self.rows += 1

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()

    def __enter__(self) -> "SeriesWriter":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


class OutputManager:
    """Owns one run directory and its ``outputs.json`` manifest.

    Provides:
    - Registration of written files (with sha256 for determinism checks)
    - Output index entries (index, time, files)
    - Status and error recording; the manifest is rewritten atomically on
      every change so an aborted run keeps a consistent record
    """

    def __init__(
        self, directory: Path, kind: str, metadata: Optional[Dict[str, Any]] = None
    ) -> None:
        """
        Initialize the run directory.

        Args:
            directory: Run output directory (created if missing)
            kind: Run kind recorded in the manifest (macro, micro, table, ...)
            metadata: Extra manifest fields (config echo, level, ...)
        """
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._manifest: Dict[str, Any] = {
            "kind": kind,
            "status": "running",
            "metadata": dict(metadata or {}),
            "outputs": [],
            "files": {},
        }
        self._save()

    @property
    def manifest_path(self) -> Path:
        return self.directory / MANIFEST_NAME

    def path(self, name: str) -> Path:
        return self.directory / name

    def _save(self) -> None:
        write_json(self.manifest_path, self._manifest)

    def register(self, path: Path) -> Path:
        """Record a finished file with its checksum."""
        path = Path(path)
        self._manifest["files"][path.name] = calculate_sha256(path)
        logger = optional_logger()
        if logger is not None:
            logger.track_artifact(path)
        self._save()
        return path

    def record_output(self, index: int, t: float, files: Sequence[Path]) -> None:
        for path in files:
            self._manifest["files"][Path(path).name] = calculate_sha256(Path(path))
        self._manifest["outputs"].append(
            {"index": int(index), "t": float(t), "files": [Path(p).name for p in files]}
        )
        self._save()

    def finalize(
        self, status: str = "completed", error: Optional[Dict[str, Any]] = None, **extra: Any
    ) -> Path:
        """Close the manifest; checksums are refreshed for streamed files."""
        for name in list(self._manifest["files"]):
            path = self.path(name)
            if path.exists():
                self._manifest["files"][name] = calculate_sha256(path)
        self._manifest["status"] = status
        if error is not None:
            self._manifest["error"] = error
        self._manifest.update(extra)
        self._save()
        return self.manifest_path

    @property
    def outputs(self) -> List[Dict[str, Any]]:
        return list(self._manifest["outputs"])


def load_manifest(directory: Path) -> Dict[str, Any]:
    """Read ``outputs.json`` from a run directory.

    Raises:
        ValidationError: If the directory has no manifest
    """
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        raise ValidationError(f"No {MANIFEST_NAME} in {directory}", {"directory": str(directory)})
    with path.open("r") as f:
        return json.load(f)


def verified_path(directory: Path, manifest: Dict[str, Any], name: str) -> Path:
    """Path of a run file whose content still matches the manifest checksum.

    Raises:
        ValidationError: If the file is missing, unlisted or was modified after the run
    """
    path = Path(directory) / name
    expected = manifest.get("files", {}).get(name)
    if expected is None:
        raise ValidationError(f"{name} is not listed in {MANIFEST_NAME}", {"file": name})
    try:
        matches = verify_sha256(path, expected)
    except FileNotFoundError as e:
        raise ValidationError(f"{name} is missing from {directory}", {"file": name}) from e
    if not matches:
        raise ValidationError(
            f"{name} does not match its checksum in {MANIFEST_NAME}",
            {"file": name, "sha256": expected},
        )
    return path
