"""Precomputed effective coefficients on a grid of heights."""

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from thermo_homogenization.cellhomog import (
    COMPONENTS,
    CellProblem,
    EffectiveCoefficients,
    effective_from_problem,
)
from thermo_homogenization.cellhomog.effective import VOIGT_UPPER
from thermo_homogenization.errors import (
    AdmissibilityError,
    HomogenizationError,
    TableError,
    ValidationError,
)
from thermo_homogenization.fem import LinearSolver
from thermo_homogenization.geometry import Shape, shape_descriptor
from thermo_homogenization.logger import log_debug
from thermo_homogenization.params import VOIGT_PAIRS, PhysicalParams
from thermo_homogenization.utils import data_fingerprint

FORMAT_VERSION = 1
MODES = ("linear", "monotone-cubic")
DEFAULT_NODES = 17
# Random queries per grid interval in the SPD check.
SPD_SAMPLES = 100

# Only these parameters enter phi, phi_Gamma, K*, C* and H*.
FINGERPRINT_FIELDS = ("K", "lame_lambda", "lame_mu", "sigma0")


def params_fingerprint(params: PhysicalParams) -> str:
    data = params.to_dict()
    return data_fingerprint({key: data[key] for key in FINGERPRINT_FIELDS})


def default_grid(
    shape: Optional[Shape], n: int = DEFAULT_NODES, bound: Optional[float] = None
) -> np.ndarray:
    """n uniform heights over [-a*/10, a*/10], or [-bound, bound] if given."""
    if bound is None:
        if shape is None:
            raise ValidationError(
                "A cell without inclusion has no band; give the grid bound explicitly"
            )
        bound = shape.max_height
    if n < 2:
        raise ValidationError(f"A table needs at least 2 nodes, got {n}")
    return np.linspace(-bound, bound, n)


@dataclass(eq=False)
class CoefficientTable:
    """Effective coefficients sampled at strictly increasing heights.

    Scalars are interpolated componentwise; K* and C* are rebuilt from
    their upper triangles, so interpolated matrices are exactly symmetric.
    """

    shape: Dict[str, Any]
    params_fingerprint: str
    mesh_resolution: float
    grid: np.ndarray
    nodes: List[EffectiveCoefficients]
    mode: str = "monotone-cubic"
    params: Optional[Dict[str, Any]] = None
    format_version: int = FORMAT_VERSION
    _values: Optional[np.ndarray] = field(init=False, repr=False, default=None)
    _interpolant: Optional[PchipInterpolator] = field(init=False, repr=False, default=None)

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=float)
        if self.mode not in MODES:
            raise ValidationError(
                f"Unknown interpolation mode: {self.mode}. Available modes: {', '.join(MODES)}"
            )
        if self.grid.ndim != 1 or len(self.grid) < 2:
            raise TableError("Table grid needs at least 2 heights")
        if not np.all(np.diff(self.grid) > 0):
            raise TableError("Table grid must be strictly increasing", {"grid": self.grid})
        if len(self.nodes) != len(self.grid):
            raise TableError(f"{len(self.nodes)} nodes for {len(self.grid)} grid heights")
        self._values = np.array([node.to_vector() for node in self.nodes])
        if self.mode == "monotone-cubic":
            self._interpolant = PchipInterpolator(
                self.grid, self._values, axis=0, extrapolate=False
            )

    # =========================================================================
    # Queries
    # =========================================================================

    @property
    def h_min(self) -> float:
        return float(self.grid[0])

    @property
    def h_max(self) -> float:
        return float(self.grid[-1])

    def check_range(self, h: Any, what: str = "height") -> np.ndarray:
        """Return h as an array; raise AdmissibilityError if any value is off the grid."""
        h = np.asarray(h, dtype=float)
        bad = ~((h >= self.h_min) & (h <= self.h_max))
        if bad.any():
            flat = int(np.flatnonzero(bad.ravel())[0])
            value = float(h.ravel()[flat])
            raise AdmissibilityError(
                f"{what} {value:.6g} outside table range [{self.h_min:.6g}, {self.h_max:.6g}]",
                {"h": value, "index": flat, "range": [self.h_min, self.h_max]},
            )
        return h

    def values(self, h: Any) -> np.ndarray:
        """Component vectors (..., len(COMPONENTS)) at heights h; exact at grid nodes."""
        h = self.check_range(h)
        flat = h.ravel()
        if self._interpolant is not None:
            out = self._interpolant(flat)
        else:
            out = np.column_stack([np.interp(flat, self.grid, column) for column in self._values.T])
        idx = np.searchsorted(self.grid, flat)
        idx = np.minimum(idx, len(self.grid) - 1)
        at_node = self.grid[idx] == flat
        out[at_node] = self._values[idx[at_node]]
        return out.reshape(h.shape + (len(COMPONENTS),))

    def interpolate(self, h: float) -> EffectiveCoefficients:
        """EffectiveCoefficients at one height (no extrapolation).

        Raises:
            AdmissibilityError: If h is outside the grid
        """
        h = float(h)
        return EffectiveCoefficients.from_vector(h, self.values(h), self.mesh_resolution)

    def fields(self, h: Any) -> Dict[str, np.ndarray]:
        """Vectorized lookup: phi, phi_gamma, K (..., 2, 2), C (..., 2, 2, 2, 2) and H (..., 2)."""
        v = self.values(h)
        K = np.stack(
            [np.stack([v[..., 2], v[..., 3]], -1), np.stack([v[..., 3], v[..., 4]], -1)], -2
        )
        V = np.empty(v.shape[:-1] + (3, 3))
        for index, (a, b) in enumerate(VOIGT_UPPER):
            V[..., a, b] = V[..., b, a] = v[..., 5 + index]
        C = np.zeros(v.shape[:-1] + (2, 2, 2, 2))
        for a, (i, j) in enumerate(VOIGT_PAIRS):
            for b, (k, l) in enumerate(VOIGT_PAIRS):
                for p, q in {(i, j), (j, i)}:
                    for r, s in {(k, l), (l, k)}:
                        C[..., p, q, r, s] = V[..., a, b]
        return {"phi": v[..., 0], "phi_gamma": v[..., 1], "K": K, "C": C, "H": v[..., 11:13]}

    def porosity_derivative(self, h: Any) -> np.ndarray:
        """d phi / dh of the porosity interpolant."""
        h = self.check_range(h)
        if self._interpolant is not None:
            return self._interpolant.derivative()(h)[..., 0]
        idx = np.clip(np.searchsorted(self.grid, h, side="right") - 1, 0, len(self.grid) - 2)
        phi = self._values[:, 0]
        return (phi[idx + 1] - phi[idx]) / (self.grid[idx + 1] - self.grid[idx])

    # =========================================================================
    # Validation
    # =========================================================================

    def validate(self, seed: int = 0) -> None:
        """Check every node and SPD of interpolated K* between nodes.

        Raises:
            TableError: On the first violated invariant
        """
        for node in self.nodes:
            problems = node.violations()
            if problems:
                raise TableError(
                    f"Table node h={node.h:.6g} is invalid: {'; '.join(problems)}",
                    {"h": node.h, "violations": problems},
                )
        rng = np.random.default_rng(seed)
        lo, hi = self.grid[:-1], self.grid[1:]
        queries = (lo[:, None] + (hi - lo)[:, None] * rng.random((len(lo), SPD_SAMPLES))).ravel()
        K = self.fields(queries)["K"]
        smallest = np.linalg.eigvalsh(K)[:, 0]
        if smallest.min() <= 0.0:
            worst = int(np.argmin(smallest))
            raise TableError(
                f"Interpolated K* is not positive definite at h={queries[worst]:.6g}",
                {"h": float(queries[worst]), "eigenvalue": float(smallest[worst])},
            )

    def check_compatible(self, shape: Optional[Shape], params: PhysicalParams) -> None:
        """Refuse reuse with another inclusion or other material data.

        Raises:
            TableError: If the shape descriptor or the parameter fingerprint differs
        """
        if data_fingerprint(shape_descriptor(shape)) != data_fingerprint(self.shape):
            raise TableError(
                "Table was built for a different inclusion",
                {"table_shape": self.shape, "shape": shape_descriptor(shape)},
            )
        expected = params_fingerprint(params)
        if expected != self.params_fingerprint:
            raise TableError(
                "Table was built for different material parameters",
                {"table": self.params_fingerprint, "params": expected},
            )

    # =========================================================================
    # Serialization
    # =========================================================================

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": self.format_version,
            "shape": self.shape,
            "params_fingerprint": self.params_fingerprint,
            "params": self.params,
            "mesh_resolution": self.mesh_resolution,
            "interpolation": self.mode,
            "grid": self.grid.tolist(),
            "nodes": [node.to_dict() for node in self.nodes],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CoefficientTable":
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise TableError(
                f"Unsupported table format_version {version!r} (expected {FORMAT_VERSION})",
                {"format_version": version},
            )
        try:
            return cls(
                shape=dict(data["shape"]),
                params_fingerprint=str(data["params_fingerprint"]),
                mesh_resolution=float(data["mesh_resolution"]),
                grid=np.asarray(data["grid"], dtype=float),
                nodes=[EffectiveCoefficients.from_dict(node) for node in data["nodes"]],
                mode=str(data.get("interpolation", "monotone-cubic")),
                params=data.get("params"),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise TableError(f"Malformed coefficient table: {e}") from e

    def __repr__(self) -> str:
        return (
            f"CoefficientTable(shape={self.shape.get('kind')}, nodes={len(self.grid)}, "
            f"range=[{self.h_min:.4g}, {self.h_max:.4g}], mode={self.mode})"
        )


# =============================================================================
# Build, save, load
# =============================================================================


def build_table(
    shape: Optional[Shape],
    params: PhysicalParams,
    grid: Optional[Sequence[float]] = None,
    mesh_resolution: float = 0.05,
    mode: str = "monotone-cubic",
    threads: int = 1,
    solver: Optional[LinearSolver] = None,
    on_node: Optional[Callable[[float], None]] = None,
    seed: int = 0,
) -> CoefficientTable:
    """
    Evaluate the effective coefficients at every grid height.

    Args:
        shape: Inclusion (None for the cell without inclusion)
        params: Material data
        grid: Strictly increasing heights (default: 17 nodes over the band)
        mesh_resolution: Target mesh size of the reference cell mesh
        mode: Interpolation mode, linear or monotone-cubic
        threads: Worker threads; nodes share the reference mesh read-only
        solver: Linear solver for the cell problems
        on_node: Called with each finished height (progress reporting)
        seed: Seed of the random heights sampled by the validation

    Returns:
        Validated CoefficientTable

    Raises:
        AdmissibilityError: If a grid height leaves the band
        NumericalError: If a node fails; the message names the height
    """
    grid = default_grid(shape) if grid is None else np.asarray(grid, dtype=float)
    if shape is not None:
        for h in grid:
            shape.check_height(float(h), what="table height")
    problem = CellProblem(shape, params, target_h=mesh_resolution, solver=solver)
    lock = threading.Lock()

    def _node(h: float) -> EffectiveCoefficients:
        try:
            result = effective_from_problem(problem, h)
        except HomogenizationError as e:
            details = dict(e.details, h=h)
            raise type(e)(f"Table node h={h:.6g} failed: {e.message}", details) from e
        log_debug(f"table node h={h:.6g}: phi={result.phi:.6f} K11={result.K[0, 0]:.6f}")
        if on_node is not None:
            with lock:
                on_node(h)
        return result

    heights = [float(h) for h in grid]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            nodes = list(pool.map(_node, heights))
    else:
        nodes = [_node(h) for h in heights]

    table = CoefficientTable(
        shape=shape_descriptor(shape),
        params_fingerprint=params_fingerprint(params),
        mesh_resolution=mesh_resolution,
        grid=grid,
        nodes=nodes,
        mode=mode,
        params=params.to_dict(),
    )
    table.validate(seed=seed)
    return table


def interpolate(table: CoefficientTable, h: float) -> EffectiveCoefficients:
    return table.interpolate(h)


def save_table(table: CoefficientTable, path: Path) -> Path:
    """Write the table as JSON (temp file, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_suffix(path.suffix + ".tmp")
    with temp_file.open("w") as f:
        json.dump(table.to_dict(), f, indent=1, allow_nan=False)
    temp_file.replace(path)
    return path


def load_table(path: Path, validate: bool = True) -> CoefficientTable:
    """
    Read and validate a table.

    Raises:
        TableError: On unreadable JSON, format mismatch or invalid nodes
    """
    path = Path(path)
    try:
        with path.open("r") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ValidationError(f"Table file not found: {path}") from e
    except (json.JSONDecodeError, OSError) as e:
        raise TableError(f"Cannot read table {path}: {e}") from e
    if not isinstance(data, dict):
        raise TableError(f"Table {path} is not a JSON object")
    try:
        table = CoefficientTable.from_dict(data)
    except ValidationError as e:
        raise TableError(f"Malformed coefficient table {path}: {e.message}") from e
    if validate:
        table.validate()
    return table
