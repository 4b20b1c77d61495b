"""Micro run configuration and converged state."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.microsim.eps_mesh import EpsMesh
from thermo_homogenization.microsim.heat import StepDiagnostics
from thermo_homogenization.params import PhysicalParams

COUPLINGS = ("interval", "step")


@dataclass
class MicroConfig:
    """Settings of one eps-resolved run.

    Attributes:
        level: Refinement level n, eps = 2^-n
        dt: Time step (shared with the macro run for comparisons)
        t_end: Final time, a whole number of steps
        tol: Sup-norm tolerance on the velocity increments
        max_iter: Fixed-point iteration cap
        coupling: ``interval`` iterates whole velocity trajectories,
            ``step`` resolves the velocity within each step
        mesh_resolution: Target size of the reference cell mesh
        params: Material data and sources
        threads: Workers for the per-cell coefficients
        output_every: Output cadence in steps
        output_dir: Run directory (None disables file output)
    """

    level: int = 1
    dt: float = 1e-3
    t_end: float = 0.02
    tol: float = 1e-8
    max_iter: int = 30
    coupling: str = "interval"
    mesh_resolution: float = 0.1
    params: PhysicalParams = field(default_factory=PhysicalParams)
    threads: int = 1
    output_every: int = 1
    output_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValidationError(f"Level must be non-negative, got {self.level}")
        if not self.dt > 0:
            raise ValidationError(f"Time step must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValidationError(f"Final time must be non-negative, got {self.t_end}")
        if not self.tol > 0:
            raise ValidationError(f"Fixed-point tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValidationError(f"Fixed point needs at least one iteration, got {self.max_iter}")
        if self.coupling not in COUPLINGS:
            raise ValidationError(
                f"Unknown coupling: {self.coupling}. Available: {', '.join(COUPLINGS)}"
            )
        if self.output_every < 1:
            raise ValidationError(f"Output cadence must be at least 1, got {self.output_every}")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(steps, 1.0):
            raise ValidationError(
                f"t_end={self.t_end} is not a whole number of steps dt={self.dt}",
                {"t_end": self.t_end, "dt": self.dt},
            )
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)

    @property
    def eps(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def output_steps(self) -> List[int]:
        steps = list(range(0, self.n_steps + 1, self.output_every))
        if steps[-1] != self.n_steps:
            steps.append(self.n_steps)
        return steps


@dataclass
class MicroState:
    """Converged (or last) iterate of the eps-resolved problem.

    Attributes:
        eps_mesh: Reference mesh of Omega_eps
        t: (N+1,) time levels
        theta: (N+1, nv) theta_r at every time level
        v: (N, n_cells) cell velocity on each step interval
        h: (N+1, n_cells) cell heights with h[0] = 0
        increments: Sup-norm velocity increment of each fixed-point iteration
        step_increments: Per-step increment histories (step coupling only)
        diagnostics: Geometry checks of the final sweep
    """

    eps_mesh: EpsMesh
    t: np.ndarray
    theta: np.ndarray
    v: np.ndarray
    h: np.ndarray
    increments: List[float] = field(default_factory=list)
    step_increments: List[List[float]] = field(default_factory=list)
    diagnostics: List[StepDiagnostics] = field(default_factory=list)
    converged: bool = False

    @property
    def level(self) -> int:
        return self.eps_mesh.level

    @property
    def eps(self) -> float:
        return self.eps_mesh.eps

    @property
    def n_steps(self) -> int:
        return len(self.t) - 1

    @property
    def iterations(self) -> int:
        return len(self.increments)

    @property
    def M_star(self) -> float:
        """Largest cell velocity over the run."""
        return float(np.abs(self.v).max()) if self.v.size else 0.0

    @property
    def max_compatibility(self) -> float:
        return max((d.compatibility for d in self.diagnostics), default=0.0)

    def step_index(self, t: float) -> int:
        """Index of the time level t."""
        index = int(np.argmin(np.abs(self.t - t)))
        if not np.isclose(self.t[index], t, rtol=0.0, atol=1e-12):
            raise ValidationError(f"No micro time level at t={t}", {"t": t})
        return index

    def contraction(self) -> Dict[str, Any]:
        """Record written to ``contraction.json``."""
        ratios = [b / a for a, b in zip(self.increments, self.increments[1:]) if a > 0]
        return {
            "level": self.level,
            "eps": self.eps,
            "converged": self.converged,
            "iterations": self.iterations,
            "increments": list(self.increments),
            "ratios": ratios,
            "step_increments": [list(s) for s in self.step_increments],
            "M_star": self.M_star,
            "max_compatibility": self.max_compatibility,
        }
