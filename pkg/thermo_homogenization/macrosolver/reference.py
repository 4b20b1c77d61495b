"""Spatially uniform reduction of the homogenized system.

For uniform data theta and h stay uniform, and the system reduces to

    (c phi(h) theta)' = -L phi_Gamma(h) theta + phi(h) g,    h' = theta.

The state is integrated in the conserved variable E = c phi(h) theta.
"""

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from thermo_homogenization.errors import ConvergenceError, ValidationError
from thermo_homogenization.params import PhysicalParams
from thermo_homogenization.tables import CoefficientTable


@dataclass
class UniformTrajectory:
    """Sampled solution of the uniform reduction."""

    t: np.ndarray
    theta: np.ndarray
    h: np.ndarray

    def at(self, t: float) -> Tuple[float, float]:
        """(theta, h) at a sample time."""
        index = int(np.argmin(np.abs(self.t - t)))
        if not np.isclose(self.t[index], t, rtol=0.0, atol=1e-12):
            raise ValidationError(f"No sample at t={t}")
        return float(self.theta[index]), float(self.h[index])


def _uniform_data(params: PhysicalParams) -> Tuple[float, float]:
    if not (params.theta0.is_constant and params.g.is_constant):
        raise ValidationError("The uniform reduction needs constant theta0 and g")
    return params.theta0.coeffs[0], params.g.coeffs[0]


def _coefficients(table: CoefficientTable) -> Callable[[float], Tuple[float, float]]:
    def lookup(h: float) -> Tuple[float, float]:
        node = table.interpolate(h)
        return node.phi, node.phi_gamma

    return lookup


def uniform_rk4(
    table: CoefficientTable,
    params: PhysicalParams,
    dt: float,
    t_end: float,
    substeps: int = 100,
) -> UniformTrajectory:
    """
    Classical RK4 on (E, h) with step dt / substeps, sampled every dt.

    Args:
        table: Coefficient table shared with the macro run
        params: Uniform data (constant theta0 and g)
        dt: Sampling interval (the macro time step)
        t_end: Final time
        substeps: RK4 steps per sampling interval

    Raises:
        AdmissibilityError: If h leaves the table range
    """
    theta0, g = _uniform_data(params)
    lookup = _coefficients(table)
    c = params.heat_capacity
    L = params.latent_heat

    def rhs(y: np.ndarray) -> np.ndarray:
        energy, h = y
        phi, phi_gamma = lookup(h)
        theta = energy / (c * phi)
        return np.array([-L * phi_gamma * theta + phi * g, theta])

    n = int(round(t_end / dt))
    tau = dt / substeps
    phi0, _ = lookup(0.0)
    y = np.array([c * phi0 * theta0, 0.0])
    thetas, heights = [theta0], [0.0]
    for _ in range(n):
        for _ in range(substeps):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * tau * k1)
            k3 = rhs(y + 0.5 * tau * k2)
            k4 = rhs(y + tau * k3)
            y = y + tau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        phi, _ = lookup(y[1])
        thetas.append(y[0] / (c * phi))
        heights.append(y[1])
    return UniformTrajectory(np.arange(n + 1) * dt, np.array(thetas), np.array(heights))


def uniform_euler(
    table: CoefficientTable,
    params: PhysicalParams,
    dt: float,
    t_end: float,
    tol: float = 1e-13,
    max_iter: int = 50,
) -> UniformTrajectory:
    """Implicit Euler of the uniform reduction, the scheme the macro solver uses.

    Each step solves c phi(h) theta + dt L phi_Gamma(h) theta = c phi(h_n) theta_n
    + dt phi(h) g with h = h_n + dt theta by the same Picard iteration.
    """
    theta0, g = _uniform_data(params)
    lookup = _coefficients(table)
    c = params.heat_capacity
    L = params.latent_heat
    n = int(round(t_end / dt))
    theta, h = theta0, 0.0
    thetas, heights = [theta], [h]
    for step in range(n):
        phi_old, _ = lookup(h)
        previous = theta
        for _ in range(max_iter):
            phi, phi_gamma = lookup(h + dt * previous)
            update = (c * phi_old * theta + dt * phi * g) / (c * phi + dt * L * phi_gamma)
            converged = abs(update - previous) <= tol
            previous = update
            if converged:
                break
        else:
            raise ConvergenceError(f"Uniform Picard iteration did not converge in step {step + 1}")
        theta, h = previous, h + dt * previous
        thetas.append(theta)
        heights.append(h)
    return UniformTrajectory(np.arange(n + 1) * dt, np.array(thetas), np.array(heights))
