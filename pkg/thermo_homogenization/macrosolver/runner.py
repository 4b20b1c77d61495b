"""Time loop of the homogenized system with Picard coupling of theta and h."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from thermo_homogenization.errors import AdmissibilityError, ConvergenceError, ValidationError
from thermo_homogenization.fem import Assembler, LinearSolver, Mesh, generate_macro_mesh
from thermo_homogenization.logger import log_debug, log_increment, log_warning, optional_logger
from thermo_homogenization.macrosolver.state import MacroConfig, MacroState
from thermo_homogenization.macrosolver.steps import solve_elasticity, step_heat, update_height
from thermo_homogenization.outputs import (
    FIELD_COLUMNS,
    SERIES_COLUMNS,
    OutputManager,
    SeriesWriter,
    write_csv,
)
from thermo_homogenization.tables import CoefficientTable, load_table


@dataclass
class MacroRun:
    """Result of :func:`run_macro`.

    Attributes:
        states: Snapshots at the output steps
        series: One ``series.csv`` row per step, step 0 included
        picard_history: Increment sequence of every accepted step
        output_dir: Run directory, if files were written
    """

    config: MacroConfig
    states: List[MacroState] = field(default_factory=list)
    series: List[Dict[str, Any]] = field(default_factory=list)
    picard_history: List[List[float]] = field(default_factory=list)
    picard_threshold: float = float("inf")
    output_dir: Optional[Path] = None

    @property
    def final(self) -> MacroState:
        return self.states[-1]

    @property
    def success(self) -> bool:
        return bool(self.states) and self.states[-1].step == self.config.n_steps


def picard_threshold(table: CoefficientTable, theta_scale: float) -> float:
    """Time step below which the theta -> h -> theta map is expected to contract.

    One Picard sweep changes h by dt * dtheta, which moves phi by at most
    max(phi_gamma) * dt * dtheta relative to phi >= min(phi).
    """
    phi_min = min(node.phi for node in table.nodes)
    slope = max(node.phi_gamma for node in table.nodes)
    if theta_scale <= 0.0 or slope <= 0.0:
        return float("inf")
    return phi_min / (slope * theta_scale)


def check_heights(table: CoefficientTable, mesh: Mesh, h: np.ndarray, t: float) -> None:
    """Abort when any nodal height leaves the table range.

    Raises:
        AdmissibilityError: Details name the first offending node, its position and the time
    """
    try:
        table.check_range(h)
    except AdmissibilityError as e:
        node = e.details["index"]
        raise AdmissibilityError(
            f"Height left the admissible band at node {node} at t={t:.6g} (h={e.details['h']:.6g})",
            {
                "node": node,
                "x": mesh.nodes[node].tolist(),
                "t": t,
                "h": e.details["h"],
                "range": e.details["range"],
            },
        ) from e


class _MacroOutputs:
    """series.csv, fields_XXXX.csv and the manifest of one run directory."""

    def __init__(self, directory: Path, config: MacroConfig) -> None:
        self.manager = OutputManager(
            directory,
            "macro",
            {"dt": config.dt, "t_end": config.t_end, "nx": config.nx, "ny": config.ny},
        )
        self.series = SeriesWriter(self.manager.path("series.csv"), SERIES_COLUMNS)
        self.index = 0

    def row(self, values: Dict[str, Any]) -> None:
        self.series.write(values)

    def fields(self, state: MacroState) -> None:
        name = f"fields_{self.index:04d}.csv"
        path = write_csv(self.manager.path(name), FIELD_COLUMNS, state.field_rows())
        self.manager.record_output(self.index, state.t, [path])
        self.index += 1

    def close(self, status: str, error: Optional[Dict[str, Any]] = None) -> None:
        self.series.close()
        self.manager.register(self.series.path)
        self.manager.finalize(status, error)


def run_macro(
    config: MacroConfig,
    table: Optional[CoefficientTable] = None,
    solver: Optional[LinearSolver] = None,
) -> MacroRun:
    """
    Integrate the homogenized system from theta0 to t_end.

    Every step iterates h = h_n + dt * theta, theta = step_heat(h) until the
    sup-norm increment of theta is at most ``picard_tol``. Elasticity is
    solved at output steps only.

    Args:
        config: Run configuration
        table: Coefficient table (loaded from ``config.table`` when omitted)
        solver: Linear solver for heat and elasticity

    Returns:
        MacroRun with output snapshots and the series

    Raises:
        AdmissibilityError: If h leaves the table range; completed outputs are kept
        ConvergenceError: If a Picard loop does not converge
    """
    if table is None:
        if config.table is None:
            raise ValidationError("No coefficient table given")
        table = load_table(config.table)
    params = config.params
    solver = solver or LinearSolver()
    mesh = generate_macro_mesh(config.nx, config.ny)
    asm = Assembler(mesh)
    weights = asm.load(1.0)
    dt = config.dt

    state = MacroState.initial(mesh, params)
    check_heights(table, mesh, state.h, 0.0)
    phi_min = min(node.phi for node in table.nodes)
    theta_scale = max(
        float(np.abs(state.theta).max()),
        float(np.abs(params.g(mesh.nodes)).max()) * config.t_end / (params.heat_capacity * phi_min),
    )
    run = MacroRun(config=config, picard_threshold=picard_threshold(table, theta_scale))
    log_debug(
        f"macro: {config.n_steps} steps, "
        f"Picard contraction expected for dt < {run.picard_threshold:.3e}"
    )
    if dt >= run.picard_threshold:
        log_warning(f"dt={dt:g} exceeds the Picard contraction estimate {run.picard_threshold:.3e}")

    outputs = _MacroOutputs(config.output_dir, config) if config.output_dir is not None else None
    output_steps = set(config.output_steps())
    logger = optional_logger()

    def _record(current: MacroState) -> None:
        if current.step in output_steps:
            current.u = solve_elasticity(current, table, params, asm, solver)
            run.states.append(current)
            if outputs is not None:
                outputs.fields(current)
        row = current.series_row(weights)
        run.series.append(row)
        if outputs is not None:
            outputs.row(row)

    try:
        _record(state)
        for step in range(1, config.n_steps + 1):
            t = step * dt
            theta_prev = state.theta
            increments: List[float] = []
            for _ in range(config.picard_max_iter):
                h_iter = update_height(state.h, theta_prev, dt)
                check_heights(table, mesh, h_iter, t)
                theta_iter = step_heat(state, table, params, dt, h_iter, asm, solver, config.lumped)
                increments.append(float(np.abs(theta_iter - theta_prev).max()))
                log_increment(f"Picard t={t:.6g}", increments)
                theta_prev = theta_iter
                if increments[-1] <= config.picard_tol:
                    break
            else:
                raise ConvergenceError(
                    f"Picard iteration did not converge at t={t:.6g} "
                    f"in {config.picard_max_iter} iterations",
                    {"t": t, "step": step, "increments": increments},
                )
            h_new = update_height(state.h, theta_prev, dt)
            check_heights(table, mesh, h_new, t)
            log_debug(
                f"macro step {step}: t={t:.6g} picard={len(increments)} "
                f"increment={increments[-1]:.3e}"
            )
            run.picard_history.append(increments)
            state = MacroState(
                mesh=mesh,
                t=t,
                theta=theta_prev,
                h=h_new,
                u=state.u,
                step=step,
                picard_iterations=len(increments),
                increments=increments,
            )
            _record(state)
    except (AdmissibilityError, ConvergenceError) as e:
        if logger is not None:
            logger.error(e.message)
        if outputs is not None:
            outputs.close("aborted", e.to_dict())
        raise

    if outputs is not None:
        outputs.close("completed")
        run.output_dir = outputs.manager.directory
    if logger is not None:
        logger.track_metric("macro steps", config.n_steps)
        iterations = max((len(h) for h in run.picard_history), default=0)
        logger.track_metric("max Picard iterations", iterations)
    return run
