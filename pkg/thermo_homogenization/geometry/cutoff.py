"""C² cutoff function used to localize the Hanzawa transform to the tubular band.

The profile satisfies |chi'| <= 3 * PLATEAU_SLOPE / a* = 3.75 / a* <= 4 / a*.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Union

import numpy as np

from thermo_homogenization.errors import ValidationError

ArrayLike = Union[float, np.ndarray]

# Fraction of each transition spent in a smoothstep ramp of the derivative profile.
RAMP_FRACTION = 0.2
PLATEAU_SLOPE = 1.0 / (1.0 - RAMP_FRACTION)


def _unit_profile(u: np.ndarray) -> np.ndarray:
    """Monotone C² profile psi on [0, 1] with psi(0)=0, psi(1)=1 and flat ends."""
    tau, G = RAMP_FRACTION, PLATEAU_SLOPE
    u = np.clip(u, 0.0, 1.0)
    out = np.empty_like(u)

    low = u <= tau
    t = u[low] / tau
    out[low] = G * tau * (t**3 - 0.5 * t**4)

    high = u >= 1.0 - tau
    t = (1.0 - u[high]) / tau
    out[high] = 1.0 - G * tau * (t**3 - 0.5 * t**4)

    mid = ~(low | high)
    out[mid] = 0.5 * G * tau + G * (u[mid] - tau)
    return out


def _unit_profile_d1(u: np.ndarray) -> np.ndarray:
    tau, G = RAMP_FRACTION, PLATEAU_SLOPE
    out = np.zeros_like(u)
    inside = (u > 0.0) & (u < 1.0)
    t = np.where(u <= tau, u / tau, np.where(u >= 1.0 - tau, (1.0 - u) / tau, 1.0))
    out[inside] = G * (3.0 * t[inside] ** 2 - 2.0 * t[inside] ** 3)
    return out


def _unit_profile_d2(u: np.ndarray) -> np.ndarray:
    tau, G = RAMP_FRACTION, PLATEAU_SLOPE
    out = np.zeros_like(u)
    low = (u > 0.0) & (u <= tau)
    t = u[low] / tau
    out[low] = G / tau * (6.0 * t - 6.0 * t * t)
    high = (u >= 1.0 - tau) & (u < 1.0)
    t = (1.0 - u[high]) / tau
    out[high] = -G / tau * (6.0 * t - 6.0 * t * t)
    return out


@dataclass(frozen=True)
class Cutoff:
    """Cutoff chi with chi = 1 on [-a1/3, a2/3] and chi = 0 outside (-2a1/3, 2a2/3).

    Each transition is the unit profile psi stretched over a third of the
    corresponding tubular radius, so |chi'| <= 3 * PLATEAU_SLOPE / a <= 4 / a*.
    """

    a1: float
    a2: float

    def __post_init__(self) -> None:
        if not (self.a1 > 0 and self.a2 > 0):
            raise ValidationError(f"Cutoff radii must be positive (a1={self.a1}, a2={self.a2})")

    @property
    def a_star(self) -> float:
        return min(self.a1, self.a2)

    @property
    def max_slope(self) -> float:
        """Largest value of |chi'| over the real line."""
        return 3.0 * PLATEAU_SLOPE / self.a_star

    def _split(self, r: np.ndarray) -> tuple:
        inner = (r > -2.0 * self.a1 / 3.0) & (r < -self.a1 / 3.0)
        outer = (r > self.a2 / 3.0) & (r < 2.0 * self.a2 / 3.0)
        u_in = (r + 2.0 * self.a1 / 3.0) / (self.a1 / 3.0)
        u_out = (2.0 * self.a2 / 3.0 - r) / (self.a2 / 3.0)
        return inner, outer, u_in, u_out

    def value(self, r: ArrayLike) -> np.ndarray:
        """chi(r)."""
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).ravel()
        inner, outer, u_in, u_out = self._split(flat)
        out = np.zeros_like(flat)
        out[(flat >= -self.a1 / 3.0) & (flat <= self.a2 / 3.0)] = 1.0
        out[inner] = _unit_profile(u_in[inner])
        out[outer] = _unit_profile(u_out[outer])
        return out.reshape(r.shape)

    def derivative(self, r: ArrayLike) -> np.ndarray:
        """chi'(r)."""
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).ravel()
        inner, outer, u_in, u_out = self._split(flat)
        out = np.zeros_like(flat)
        out[inner] = 3.0 / self.a1 * _unit_profile_d1(u_in[inner])
        out[outer] = -3.0 / self.a2 * _unit_profile_d1(u_out[outer])
        return out.reshape(r.shape)

    def second_derivative(self, r: ArrayLike) -> np.ndarray:
        """chi''(r)."""
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).ravel()
        inner, outer, u_in, u_out = self._split(flat)
        out = np.zeros_like(flat)
        out[inner] = 9.0 / self.a1**2 * _unit_profile_d2(u_in[inner])
        out[outer] = 9.0 / self.a2**2 * _unit_profile_d2(u_out[outer])
        return out.reshape(r.shape)

    def __call__(self, r: ArrayLike) -> np.ndarray:
        return self.value(r)

    @property
    def breakpoints(self) -> List[float]:
        """Ordered knots of the piecewise polynomial."""
        tau = RAMP_FRACTION
        a1, a2 = self.a1 / 3.0, self.a2 / 3.0
        inner = [-2 * a1, -2 * a1 + tau * a1, -a1 - tau * a1, -a1]
        outer = [a2, a2 + tau * a2, 2 * a2 - tau * a2, 2 * a2]
        return inner + outer

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a1": self.a1,
            "a2": self.a2,
            "ramp_fraction": RAMP_FRACTION,
            "breakpoints": self.breakpoints,
        }
