"""Physical parameters and polynomial source descriptors."""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from thermo_homogenization.errors import ValidationError

# Coefficient order of a total-degree-2 polynomial in (x, y).
MONOMIALS = ("1", "x", "y", "x^2", "xy", "y^2")


@dataclass(frozen=True)
class Polynomial:
    """Polynomial of total degree at most 2 in (x, y)."""

    coeffs: tuple = (0.0,)

    def __post_init__(self) -> None:
        if len(self.coeffs) > len(MONOMIALS):
            raise ValidationError(
                f"Polynomial takes at most {len(MONOMIALS)} coefficients {MONOMIALS}, "
                f"got {len(self.coeffs)}"
            )
        padded = tuple(float(c) for c in self.coeffs) + (0.0,) * (6 - len(self.coeffs))
        object.__setattr__(self, "coeffs", padded)

    @classmethod
    def parse(cls, value: Union[float, int, Sequence[float], "Polynomial"]) -> "Polynomial":
        """Accept a scalar constant or a coefficient list."""
        if isinstance(value, Polynomial):
            return value
        if isinstance(value, (int, float)):
            return cls((float(value),))
        if isinstance(value, str) or callable(value):
            raise ValidationError(f"Invalid polynomial descriptor: {value!r}")
        try:
            return cls(tuple(float(c) for c in value))
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Invalid polynomial descriptor: {value!r}") from e

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not any(self.coeffs[1:])

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at points of shape (..., 2); a single point gives shape (1,)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[..., 0], pts[..., 1]
        c = self.coeffs
        return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y

    def to_list(self) -> List[float]:
        return list(self.coeffs)


def _vector_polynomial(value: Any) -> tuple:
    if value is None:
        return (Polynomial(), Polynomial())
    if isinstance(value, (int, float, str)) or callable(value):
        raise ValidationError("Vector source f needs two components")
    parts = list(value)
    if len(parts) != 2:
        raise ValidationError(f"Vector source f needs two components, got {len(parts)}")
    return tuple(Polynomial.parse(p) for p in parts)


@dataclass(frozen=True, eq=False)
class PhysicalParams:
    """Material data of the thermo-elastic matrix and the interface.

    ``K`` is always stored as an SPD 2x2 matrix; a scalar conductivity ``k`` is
    expanded to ``k * Id``.
    """

    rho: float = 1.0
    c: float = 1.0
    alpha: float = 1.0
    K: np.ndarray = field(default_factory=lambda: np.eye(2))
    lame_lambda: float = 1.0
    lame_mu: float = 1.0
    sigma0: float = 1.0
    latent_heat: float = 1.0
    f: tuple = field(default_factory=lambda: (Polynomial(), Polynomial()))
    g: Polynomial = field(default_factory=Polynomial)
    theta0: Polynomial = field(default_factory=Polynomial)

    def __post_init__(self) -> None:
        K = np.asarray(self.K, dtype=float)
        if K.ndim == 0:
            K = float(K) * np.eye(2)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "f", _vector_polynomial(self.f))
        object.__setattr__(self, "g", Polynomial.parse(self.g))
        object.__setattr__(self, "theta0", Polynomial.parse(self.theta0))
        self.validate()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PhysicalParams":
        """Build from a configuration ``params`` block."""
        data = dict(data)
        if "k" in data and "K" in data and data["K"] is not None:
            raise ValidationError("Give either scalar 'k' or matrix 'K', not both")
        K = data.pop("K", None)
        k = data.pop("k", None)
        if K is None:
            K = 1.0 if k is None else k
        known = {"rho", "c", "alpha", "lame_lambda", "lame_mu", "sigma0", "latent_heat"}
        kwargs: Dict[str, Any] = {}
        for key in known:
            if key in data and data[key] is not None:
                kwargs[key] = float(data[key])
        return cls(
            K=np.asarray(K, dtype=float),
            f=_vector_polynomial(data.get("f")),
            g=Polynomial.parse(data.get("g", 0.0)),
            theta0=Polynomial.parse(data.get("theta0", 0.0)),
            **kwargs,
        )

    def validate(self) -> None:
        """Raise ValidationError unless the data is physically admissible."""
        for name in ("rho", "c", "alpha", "sigma0"):
            if not getattr(self, name) > 0:
                raise ValidationError(
                    f"Parameter {name} must be positive, got {getattr(self, name)}"
                )
        if self.latent_heat < 0:
            raise ValidationError(f"Latent heat must be non-negative, got {self.latent_heat}")
        if self.K.shape != (2, 2):
            raise ValidationError(f"Conductivity must be scalar or 2x2, got shape {self.K.shape}")
        if not np.allclose(self.K, self.K.T, rtol=0.0, atol=1e-14):
            raise ValidationError("Conductivity matrix must be symmetric")
        if np.linalg.eigvalsh(self.K).min() <= 0:
            raise ValidationError("Conductivity matrix must be positive definite")
        if not self.lame_mu > 0 or not self.lame_lambda + self.lame_mu > 0:
            raise ValidationError(
                f"Lame parameters must satisfy mu > 0 and lambda + mu > 0 "
                f"(lambda={self.lame_lambda}, mu={self.lame_mu})"
            )

    @property
    def heat_capacity(self) -> float:
        """Volumetric heat capacity rho * c."""
        return self.rho * self.c

    @property
    def conductivity_max(self) -> float:
        return float(np.linalg.eigvalsh(self.K).max())

    def stiffness_tensor(self) -> np.ndarray:
        """Isotropic 2D elasticity tensor C_ijkl = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk)."""
        return isotropic_tensor(self.lame_lambda, self.lame_mu)

    def with_updates(self, **changes: Any) -> "PhysicalParams":
        """Copy with some fields replaced (e.g. ``sigma0=2.0``)."""
        values = {
            "rho": self.rho, "c": self.c, "alpha": self.alpha, "K": self.K,
            "lame_lambda": self.lame_lambda, "lame_mu": self.lame_mu,
            "sigma0": self.sigma0, "latent_heat": self.latent_heat,
            "f": self.f, "g": self.g, "theta0": self.theta0,
        }
        values.update(changes)
        return PhysicalParams(**values)

    def to_dict(self) -> Dict[str, Any]:
        """Canonical JSON-ready representation (used for fingerprints)."""
        return {
            "rho": self.rho,
            "c": self.c,
            "alpha": self.alpha,
            "K": self.K.tolist(),
            "lame_lambda": self.lame_lambda,
            "lame_mu": self.lame_mu,
            "sigma0": self.sigma0,
            "latent_heat": self.latent_heat,
            "f": [self.f[0].to_list(), self.f[1].to_list()],
            "g": self.g.to_list(),
            "theta0": self.theta0.to_list(),
        }

    def __repr__(self) -> str:
        return f"PhysicalParams({json.dumps(self.to_dict())})"


def isotropic_tensor(lam: float, mu: float, dim: int = 2) -> np.ndarray:
    """Return the isotropic 4th-order tensor with Lame parameters (lam, mu)."""
    eye = np.eye(dim)
    return (
        lam * np.einsum("ij,kl->ijkl", eye, eye)
        + mu * (np.einsum("ik,jl->ijkl", eye, eye) + np.einsum("il,jk->ijkl", eye, eye))
    )


# Voigt order (11, 22, 12); shear entries use the engineering convention gamma_12 = 2 e_12.
VOIGT_PAIRS = ((0, 0), (1, 1), (0, 1))


def tensor_to_voigt(C: np.ndarray) -> np.ndarray:
    """Map a 2x2x2x2 tensor to its 3x3 Voigt matrix."""
    out = np.empty((3, 3))
    for a, (i, j) in enumerate(VOIGT_PAIRS):
        for b, (k, l) in enumerate(VOIGT_PAIRS):
            out[a, b] = C[i, j, k, l]
    return out


def voigt_to_tensor(V: np.ndarray) -> np.ndarray:
    """Inverse of :func:`tensor_to_voigt` for tensors with minor symmetries."""
    C = np.zeros((2, 2, 2, 2))
    for a, (i, j) in enumerate(VOIGT_PAIRS):
        for b, (k, l) in enumerate(VOIGT_PAIRS):
            for p, q in {(i, j), (j, i)}:
                for r, s in {(k, l), (l, k)}:
                    C[p, q, r, s] = V[a, b]
    return C
