"""Fixed-point iteration velocity -> temperature -> velocity of the eps-resolved problem."""

from typing import Callable, List, Optional

import numpy as np

from thermo_homogenization.errors import AdmissibilityError, ConvergenceError, ValidationError
from thermo_homogenization.fem import LinearSolver
from thermo_homogenization.geometry import Shape
from thermo_homogenization.logger import log_debug, log_increment
from thermo_homogenization.microsim.eps_mesh import EpsMesh
from thermo_homogenization.microsim.heat import (
    MicroHeatSolver,
    StepDiagnostics,
    cell_average_velocities,
)
from thermo_homogenization.microsim.state import COUPLINGS, MicroState
from thermo_homogenization.params import PhysicalParams


def time_horizon(shape: Optional[Shape], velocity_bound: float) -> float:
    """T_M = a*/(10 M); unbounded without an inclusion or without motion."""
    if shape is None or velocity_bound <= 0.0:
        return float("inf")
    return shape.a_star / (10.0 * velocity_bound)


def check_horizon(shape: Optional[Shape], velocity_bound: float, T: float, iteration: int) -> None:
    """
    Reject a final time beyond the horizon of the current velocity bound.

    Raises:
        AdmissibilityError: If T > a*/(10 M)
    """
    horizon = time_horizon(shape, velocity_bound)
    if T > horizon * (1.0 + 1e-12):
        raise AdmissibilityError(
            f"Final time {T:g} exceeds the admissibility horizon {horizon:.6g} "
            f"(max velocity {velocity_bound:.6g})",
            {"T": T, "T_M": horizon, "M": velocity_bound, "iteration": iteration},
        )


def _interval_iteration(
    heat: MicroHeatSolver,
    shape: Optional[Shape],
    dt: float,
    T: float,
    tol: float,
    max_iter: int,
    on_iteration: Optional[Callable[[int, float], None]],
) -> MicroState:
    eps_mesh = heat.eps_mesh
    n_steps = int(round(T / dt))
    v = np.zeros((n_steps, eps_mesh.n_cells))
    increments: List[float] = []
    for iteration in range(1, max_iter + 1):
        try:
            result = heat.solve(v, dt)
        except AdmissibilityError as e:
            e.details["iteration"] = iteration
            raise
        v_new = np.array(
            [cell_average_velocities(theta, eps_mesh, heat.assembler) for theta in result.theta[1:]]
        ).reshape(n_steps, eps_mesh.n_cells)
        increments.append(float(np.abs(v_new - v).max()) if v.size else 0.0)
        log_increment("fixed point", increments)
        if on_iteration is not None:
            on_iteration(iteration, increments[-1])
        check_horizon(shape, float(np.abs(v_new).max()) if v_new.size else 0.0, T, iteration)
        if increments[-1] <= tol:
            return MicroState(
                eps_mesh=eps_mesh,
                t=result.t,
                theta=result.theta,
                v=v,
                h=result.h,
                increments=increments,
                diagnostics=result.diagnostics,
                converged=True,
            )
        v = v_new
    raise ConvergenceError(
        f"Fixed-point iteration did not converge in {max_iter} iterations "
        f"(last increment {increments[-1]:.3e})",
        {"increments": increments, "tol": tol},
    )


def _step_iteration(
    heat: MicroHeatSolver,
    shape: Optional[Shape],
    dt: float,
    T: float,
    tol: float,
    max_iter: int,
) -> MicroState:
    eps_mesh = heat.eps_mesh
    n_steps = int(round(T / dt))
    theta = heat.initial_theta()
    h = np.zeros(eps_mesh.n_cells)
    c_r = heat.capacity(h)
    v_m = np.zeros(eps_mesh.n_cells)

    thetas, heights, velocities = [theta], [h], []
    diagnostics: List[StepDiagnostics] = []
    histories: List[List[float]] = []
    for m in range(n_steps):
        t = (m + 1) * dt
        history: List[float] = []
        for _ in range(max_iter):
            h_new = h + dt * v_m
            theta_new, c_new, info = heat.step(theta, c_r, h_new, v_m, dt, t)
            v_next = cell_average_velocities(theta_new, eps_mesh, heat.assembler)
            history.append(float(np.abs(v_next - v_m).max()) if v_m.size else 0.0)
            log_increment(f"step {m + 1}", history)
            v_max = float(np.abs(v_next).max()) if v_next.size else 0.0
            check_horizon(shape, v_max, T, len(history))
            if history[-1] <= tol:
                break
            v_m = v_next
        else:
            raise ConvergenceError(
                f"Velocity iteration did not converge at t={t:.6g} in {max_iter} iterations",
                {"t": t, "step": m + 1, "increments": history, "tol": tol},
            )
        theta, h, c_r = theta_new, h_new, c_new
        thetas.append(theta)
        heights.append(h)
        velocities.append(v_m)
        diagnostics.append(info)
        histories.append(history)

    depth = max((len(s) for s in histories), default=1)
    profile = [max((s[i] for s in histories if len(s) > i), default=0.0) for i in range(depth)]
    return MicroState(
        eps_mesh=eps_mesh,
        t=np.arange(n_steps + 1) * dt,
        theta=np.array(thetas),
        v=np.array(velocities).reshape(n_steps, eps_mesh.n_cells),
        h=np.array(heights),
        increments=profile,
        step_increments=histories,
        diagnostics=diagnostics,
        converged=True,
    )


def fixed_point_solve(
    eps_mesh: EpsMesh,
    shape: Optional[Shape],
    params: PhysicalParams,
    dt: float,
    T: float,
    tol: float = 1e-8,
    max_iter: int = 30,
    coupling: str = "interval",
    solver: Optional[LinearSolver] = None,
    threads: int = 1,
    on_iteration: Optional[Callable[[int, float], None]] = None,
) -> MicroState:
    """
    Solve the eps-resolved moving-boundary problem on [0, T].

    In ``interval`` coupling every iteration solves the heat equation over
    the whole interval for the previous velocity trajectory (starting from
    v = 0) and replaces the velocities by the interface averages of the new
    temperature, until the sup-norm change is at most ``tol``. ``step``
    coupling runs the same iteration inside every time step.

    Args:
        eps_mesh: Reference mesh of Omega_eps
        shape: Inclusion of the reference cell
        params: Material data and sources
        dt: Time step
        T: Final time, a whole number of steps
        tol: Velocity increment tolerance
        max_iter: Iteration cap (per step in step coupling)
        coupling: interval or step
        solver: Linear solver for the heat steps
        threads: Workers for the per-cell coefficients
        on_iteration: Called with (iteration, increment) in interval coupling

    Returns:
        MicroState of the converged iterate

    Raises:
        AdmissibilityError: If heights leave the band or T exceeds the horizon
        ConvergenceError: If the iteration cap is reached; details carry the increments
    """
    if coupling not in COUPLINGS:
        raise ValidationError(f"Unknown coupling: {coupling}. Available: {', '.join(COUPLINGS)}")
    if not dt > 0 or T < 0:
        raise ValidationError(f"Need dt > 0 and T >= 0, got dt={dt}, T={T}")
    heat = MicroHeatSolver(eps_mesh, shape, params, solver=solver, threads=threads)
    if coupling == "step":
        state = _step_iteration(heat, shape, dt, T, tol, max_iter)
    else:
        state = _interval_iteration(heat, shape, dt, T, tol, max_iter, on_iteration)
    log_debug(
        f"micro level {eps_mesh.level}: {state.iterations} iterations, M*={state.M_star:.4e}, "
        f"horizon={time_horizon(shape, state.M_star):.4e}"
    )
    return state
