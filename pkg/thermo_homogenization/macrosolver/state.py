"""Macroscopic run configuration and nodal state."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.fem import Mesh
from thermo_homogenization.params import PhysicalParams


@dataclass
class MacroConfig:
    """Settings of one homogenized run.

    Attributes:
        nx, ny: Macro mesh squares per side
        dt: Time step
        t_end: Final time, a whole number of steps
        picard_tol: Sup-norm tolerance of the theta/h Picard loop
        picard_max_iter: Picard iteration cap per step
        table: Path of the coefficient table (None when passed in directly)
        params: Material data and sources
        output_every: Output cadence in steps
        output_dir: Run directory (None disables file output)
        lumped: Lumped mass for the time derivative and reaction terms
    """

    nx: int = 8
    ny: int = 8
    dt: float = 1e-3
    t_end: float = 0.05
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    table: Optional[Path] = None
    params: PhysicalParams = field(default_factory=PhysicalParams)
    output_every: int = 1
    output_dir: Optional[Path] = None
    lumped: bool = False

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValidationError(f"Time step must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValidationError(f"Final time must be non-negative, got {self.t_end}")
        if not self.picard_tol > 0:
            raise ValidationError(f"Picard tolerance must be positive, got {self.picard_tol}")
        if self.picard_max_iter < 1:
            raise ValidationError(
                f"Picard needs at least one iteration, got {self.picard_max_iter}"
            )
        if self.output_every < 1:
            raise ValidationError(f"Output cadence must be at least 1, got {self.output_every}")
        if self.nx < 1 or self.ny < 1:
            raise ValidationError(f"Macro mesh needs nx, ny >= 1, got ({self.nx}, {self.ny})")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(steps, 1.0):
            raise ValidationError(
                f"t_end={self.t_end} is not a whole number of steps dt={self.dt}",
                {"t_end": self.t_end, "dt": self.dt},
            )
        if self.table is not None:
            self.table = Path(self.table)
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def output_steps(self) -> List[int]:
        """Steps with field output: 0, every ``output_every``-th step and the last."""
        steps = list(range(0, self.n_steps + 1, self.output_every))
        if steps[-1] != self.n_steps:
            steps.append(self.n_steps)
        return steps


@dataclass
class MacroState:
    """Nodal fields on the macro mesh at time t.

    ``u`` is only refreshed at output times; between outputs it holds the
    last computed displacement.
    """

    mesh: Mesh
    t: float
    theta: np.ndarray
    h: np.ndarray
    u: np.ndarray
    step: int = 0
    picard_iterations: int = 0
    increments: List[float] = field(default_factory=list)

    @classmethod
    def initial(cls, mesh: Mesh, params: PhysicalParams) -> "MacroState":
        """theta = theta0 at the nodes, h = 0, u = 0."""
        theta = np.broadcast_to(params.theta0(mesh.nodes), (mesh.n_nodes,)).astype(float)
        return cls(
            mesh=mesh,
            t=0.0,
            theta=theta,
            h=np.zeros(mesh.n_nodes),
            u=np.zeros((mesh.n_nodes, 2)),
        )

    @property
    def velocity(self) -> np.ndarray:
        """Normal interface velocity; equal to theta in the homogenized limit."""
        return self.theta

    def series_row(self, node_weights: np.ndarray) -> Dict[str, Any]:
        """One ``series.csv`` row; means are integral means over the unit square."""
        total = float(node_weights.sum())
        magnitude = np.linalg.norm(self.u, axis=1)
        return {
            "t": self.t,
            "theta_min": float(self.theta.min()),
            "theta_max": float(self.theta.max()),
            "theta_mean": float(node_weights @ self.theta) / total,
            "h_min": float(self.h.min()),
            "h_max": float(self.h.max()),
            "h_mean": float(node_weights @ self.h) / total,
            "u_max": float(magnitude.max()) if len(magnitude) else 0.0,
            "picard_iters": self.picard_iterations,
        }

    def field_rows(self) -> List[List[Any]]:
        """Rows of ``fields_XXXX.csv``: node, x, y, theta, h, ux, uy."""
        return [
            [i, x, y, th, hh, ux, uy]
            for i, ((x, y), th, hh, (ux, uy)) in enumerate(
                zip(self.mesh.nodes, self.theta, self.h, self.u)
            )
        ]
