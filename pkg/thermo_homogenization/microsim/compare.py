"""Cell-wise comparison of an eps-resolved run with a homogenized run."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.fem import Assembler, Mesh, generate_macro_mesh
from thermo_homogenization.geometry import CellIndexing
from thermo_homogenization.logger import log_debug
from thermo_homogenization.macrosolver import MacroRun
from thermo_homogenization.microsim.heat import cell_means
from thermo_homogenization.microsim.state import MicroState
from thermo_homogenization.outputs import load_manifest, read_csv, verified_path, write_json

ERRORS_NAME = "errors.json"

# Output times are matched after rounding to this many digits.
TIME_DIGITS = 9
CELL_GAUSS_POINTS = 3

MicroSource = Union[MicroState, Path, str]
MacroSource = Union[MacroRun, Path, str]


@dataclass
class CellFrame:
    """Per-cell micro data at one output time."""

    t: float
    theta: np.ndarray
    h: np.ndarray


@dataclass
class FieldFrame:
    """Nodal macro fields at one output time."""

    t: float
    mesh: Mesh
    theta: np.ndarray
    h: np.ndarray


@dataclass
class ErrorReport:
    """Discrete L2(Omega) errors of the cell-averaged micro run against the macro run."""

    level: int
    eps: float
    times: List[float] = field(default_factory=list)
    theta_l2: List[float] = field(default_factory=list)
    h_l2: List[float] = field(default_factory=list)

    @property
    def theta_final(self) -> float:
        return self.theta_l2[-1] if self.theta_l2 else 0.0

    @property
    def h_final(self) -> float:
        return self.h_l2[-1] if self.h_l2 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "eps": self.eps,
            "times": list(self.times),
            "theta_l2": list(self.theta_l2),
            "h_l2": list(self.h_l2),
            "theta_l2_final": self.theta_final,
            "h_l2_final": self.h_final,
        }


def _key(t: float) -> float:
    return round(float(t), TIME_DIGITS)


# =============================================================================
# Frames from runs or run directories
# =============================================================================


def _micro_frames(micro: MicroSource) -> Tuple[int, Dict[float, CellFrame]]:
    if isinstance(micro, MicroState):
        asm = Assembler(micro.eps_mesh.mesh)
        frames = {
            _key(t): CellFrame(
                float(t), cell_means(micro.theta[m], micro.eps_mesh, asm), micro.h[m]
            )
            for m, t in enumerate(micro.t)
        }
        return micro.level, frames

    directory = Path(micro)
    manifest = load_manifest(directory)
    if manifest.get("kind") != "micro":
        raise ValidationError(
            f"{directory} is not a micro run directory", {"kind": manifest.get("kind")}
        )
    frames = {}
    for entry in manifest["outputs"]:
        name = next(f for f in entry["files"] if f.startswith("micro_cells_"))
        cells = read_csv(verified_path(directory, manifest, name))
        order = np.argsort(cells["cell"])
        t = float(entry["t"])
        frames[_key(t)] = CellFrame(t, cells["theta_avg"][order], cells["h"][order])
    return int(manifest["metadata"]["level"]), frames


def _macro_frames(macro: MacroSource) -> Dict[float, FieldFrame]:
    if isinstance(macro, MacroRun):
        return {_key(s.t): FieldFrame(float(s.t), s.mesh, s.theta, s.h) for s in macro.states}

    directory = Path(macro)
    manifest = load_manifest(directory)
    if manifest.get("kind") != "macro":
        raise ValidationError(
            f"{directory} is not a macro run directory", {"kind": manifest.get("kind")}
        )
    meta = manifest["metadata"]
    mesh = generate_macro_mesh(int(meta["nx"]), int(meta["ny"]))
    frames = {}
    for entry in manifest["outputs"]:
        fields = read_csv(verified_path(directory, manifest, entry["files"][0]))
        if len(fields["node"]) != mesh.n_nodes:
            raise ValidationError(
                f"{entry['files'][0]} has {len(fields['node'])} nodes, "
                f"the macro mesh {mesh.n_nodes}",
                {"file": entry["files"][0]},
            )
        order = np.argsort(fields["node"])
        t = float(entry["t"])
        frames[_key(t)] = FieldFrame(t, mesh, fields["theta"][order], fields["h"][order])
    return frames


def _shared_times(micro: Dict[float, Any], macro: Dict[float, Any]) -> List[float]:
    a, b = set(micro), set(macro)
    if not (a <= b or b <= a) or max(a) != max(b):
        raise ValidationError(
            "Micro and macro output times do not match",
            {"micro": sorted(a), "macro": sorted(b)},
        )
    return sorted(a & b)


# =============================================================================
# Cell averages of the macro fields
# =============================================================================


def cell_samples(
    indexing: CellIndexing, n: int = CELL_GAUSS_POINTS
) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss points (n_cells, n^2, 2) and weights (n^2,) summing to 1 per cell."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    local = 0.5 * (nodes + 1.0)
    X, Y = np.meshgrid(local, local, indexing="ij")
    W = np.outer(weights, weights).ravel() / 4.0
    offsets = np.column_stack([X.ravel(), Y.ravel()])
    points = indexing.eps * (indexing.indices()[:, None, :] + offsets[None])
    return points, W


def macro_cell_values(frame: FieldFrame, indexing: CellIndexing) -> Tuple[np.ndarray, np.ndarray]:
    """Macro theta at the cell centers and macro h averaged over each cell."""
    theta = frame.mesh.evaluate(frame.theta, indexing.cell_centers())
    points, weights = cell_samples(indexing)
    h = frame.mesh.evaluate(frame.h, points.reshape(-1, 2)).reshape(points.shape[:2]) @ weights
    return theta, h


def compare_micro_macro(
    micro: MicroSource,
    macro: MacroSource,
    output: Optional[Path] = None,
) -> ErrorReport:
    """
    L2(Omega) errors between cell data of a micro run and the macro fields.

    At every shared output time the pore mean of theta_r in each eps-cell is
    compared with macro theta at the cell center, and the cell height with
    macro h averaged over the cell; both errors are
    sqrt(sum_k eps^2 (micro_k - macro_k)^2).

    Args:
        micro: MicroState or micro run directory
        macro: MacroRun or macro run directory
        output: Directory for ``errors.json``

    Returns:
        ErrorReport with one entry per shared time

    Raises:
        ValidationError: If the output times of the runs are incompatible
    """
    level, micro_frames = _micro_frames(micro)
    macro_frames = _macro_frames(macro)
    indexing = CellIndexing(level)
    report = ErrorReport(level=level, eps=indexing.eps)
    for key in _shared_times(micro_frames, macro_frames):
        cells = micro_frames[key]
        theta, h = macro_cell_values(macro_frames[key], indexing)
        report.times.append(cells.t)
        report.theta_l2.append(float(indexing.eps * np.linalg.norm(cells.theta - theta)))
        report.h_l2.append(float(indexing.eps * np.linalg.norm(cells.h - h)))
        log_debug(
            f"compare t={cells.t:.6g}: "
            f"theta L2={report.theta_l2[-1]:.4e} h L2={report.h_l2[-1]:.4e}"
        )
    if output is not None:
        write_json(Path(output) / ERRORS_NAME, report.to_dict())
    return report
