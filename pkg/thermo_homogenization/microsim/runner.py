"""eps-resolved run: mesh, fixed point, optional elasticity and run directory."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from thermo_homogenization.errors import AdmissibilityError, ConvergenceError
from thermo_homogenization.fem import Assembler, LinearSolver, Mesh
from thermo_homogenization.geometry import Shape
from thermo_homogenization.logger import optional_logger
from thermo_homogenization.microsim.elasticity import micro_elasticity_post
from thermo_homogenization.microsim.eps_mesh import build_eps_mesh
from thermo_homogenization.microsim.fixed_point import fixed_point_solve, time_horizon
from thermo_homogenization.microsim.heat import MicroHeatSolver, cell_average_velocities, cell_means
from thermo_homogenization.microsim.state import MicroConfig, MicroState
from thermo_homogenization.outputs import (
    MICRO_CELL_COLUMNS,
    MICRO_DISPLACEMENT_COLUMNS,
    MICRO_FIELD_COLUMNS,
    MICRO_SERIES_COLUMNS,
    OutputManager,
    SeriesWriter,
    write_csv,
    write_json,
)

CONTRACTION_NAME = "contraction.json"


@dataclass
class MicroRun:
    """Result of :func:`run_micro`."""

    config: MicroConfig
    state: MicroState
    displacements: Dict[int, np.ndarray] = field(default_factory=dict)
    output_dir: Optional[Path] = None

    @property
    def success(self) -> bool:
        return self.state.converged


def micro_series_columns(n_cells: int) -> List[str]:
    """``micro_series.csv`` header: t, theta_max, v_max, v_0.., h_0.."""
    return (
        list(MICRO_SERIES_COLUMNS)
        + [f"v_{k}" for k in range(n_cells)]
        + [f"h_{k}" for k in range(n_cells)]
    )


def write_micro_outputs(
    state: MicroState,
    config: MicroConfig,
    displacements: Optional[Dict[int, np.ndarray]] = None,
) -> Path:
    """Write series, field, cell and contraction files of a finished run.

    The velocity reported at a time level is the interface average of
    theta_r there, so v at t = 0 is the average of theta0.
    """
    eps_mesh = state.eps_mesh
    asm = Assembler(eps_mesh.mesh)
    manager = OutputManager(
        config.output_dir,
        "micro",
        {
            "level": state.level,
            "eps": state.eps,
            "dt": config.dt,
            "t_end": config.t_end,
            "coupling": config.coupling,
            "tol": config.tol,
        },
    )
    velocities = np.array([cell_average_velocities(theta, eps_mesh, asm) for theta in state.theta])
    columns = micro_series_columns(eps_mesh.n_cells)
    with SeriesWriter(manager.path("micro_series.csv"), columns) as series:
        for m, t in enumerate(state.t):
            row: Dict[str, Any] = {
                "t": float(t),
                "theta_max": float(np.abs(state.theta[m]).max()),
                "v_max": float(np.abs(velocities[m]).max()) if eps_mesh.n_cells else 0.0,
            }
            row.update({f"v_{k}": velocities[m, k] for k in range(eps_mesh.n_cells)})
            row.update({f"h_{k}": state.h[m, k] for k in range(eps_mesh.n_cells)})
            series.write(row)
    manager.register(series.path)

    nodes = eps_mesh.mesh.nodes
    for index, m in enumerate(config.output_steps()):
        fields = write_csv(
            manager.path(f"micro_fields_{index:04d}.csv"),
            MICRO_FIELD_COLUMNS,
            ([i, x, y, th] for i, ((x, y), th) in enumerate(zip(nodes, state.theta[m]))),
        )
        theta_avg = cell_means(state.theta[m], eps_mesh, asm)
        cells = write_csv(
            manager.path(f"micro_cells_{index:04d}.csv"),
            MICRO_CELL_COLUMNS,
            (
                [k, kx, ky, theta_avg[k], velocities[m, k], state.h[m, k]]
                for k, (kx, ky) in enumerate(eps_mesh.cells)
            ),
        )
        files = [fields, cells]
        if displacements and m in displacements:
            files.append(
                write_csv(
                    manager.path(f"micro_displacement_{index:04d}.csv"),
                    MICRO_DISPLACEMENT_COLUMNS,
                    ([i, ux, uy] for i, (ux, uy) in enumerate(displacements[m])),
                )
            )
        manager.record_output(index, float(state.t[m]), files)

    manager.register(write_json(manager.path(CONTRACTION_NAME), state.contraction()))
    manager.finalize("completed")
    return manager.directory


def run_micro(
    config: MicroConfig,
    shape: Optional[Shape],
    cell_mesh: Optional[Mesh] = None,
    elasticity: bool = False,
    solver: Optional[LinearSolver] = None,
) -> MicroRun:
    """
    Tile Omega_eps, solve the fixed point and write the run directory.

    Args:
        config: Run configuration
        shape: Inclusion of the reference cell
        cell_mesh: Reference cell mesh (generated at ``config.mesh_resolution`` when omitted)
        elasticity: Solve for u_r at every output step
        solver: Linear solver for heat and elasticity

    Returns:
        MicroRun with the converged state

    Raises:
        AdmissibilityError: If heights leave the band or T exceeds the horizon
        ConvergenceError: If the fixed point does not converge
    """
    logger = optional_logger()
    eps_mesh = build_eps_mesh(shape, config.level, cell_mesh, target_h=config.mesh_resolution)
    try:
        state = fixed_point_solve(
            eps_mesh,
            shape,
            config.params,
            config.dt,
            config.t_end,
            tol=config.tol,
            max_iter=config.max_iter,
            coupling=config.coupling,
            solver=solver,
            threads=config.threads,
        )
    except (AdmissibilityError, ConvergenceError) as e:
        if logger is not None:
            logger.error(e.message)
        if config.output_dir is not None:
            manager = OutputManager(
                config.output_dir, "micro", {"level": config.level, "eps": config.eps}
            )
            record = {"converged": False, "error": e.to_dict()}
            manager.register(write_json(manager.path(CONTRACTION_NAME), record))
            manager.finalize("aborted", e.to_dict())
        raise

    run = MicroRun(config=config, state=state)
    if elasticity:
        heat = MicroHeatSolver(
            eps_mesh, shape, config.params, solver=solver, threads=config.threads
        )
        for m in config.output_steps():
            run.displacements[m] = micro_elasticity_post(
                state, shape, config.params, float(state.t[m]), solver=solver, heat=heat
            )
    if config.output_dir is not None:
        run.output_dir = write_micro_outputs(state, config, run.displacements)
    if logger is not None:
        logger.track_metric("fixed-point iterations", state.iterations)
        logger.track_metric("M*", f"{state.M_star:.4e}")
        logger.track_metric("horizon T_M", f"{time_horizon(shape, state.M_star):.4e}")
        logger.track_metric("max compatibility residual", f"{state.max_compatibility:.2e}")
    return run
