"""Cell indexing of the macroscopic domain by eps-cells."""

from dataclasses import dataclass
from typing import Any, Tuple

import numpy as np

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.geometry.base import _squeeze, as_points


@dataclass(frozen=True)
class CellIndexing:
    """Tiling of Omega = (0, 1)^d by 2^level cells per side, eps = 2^-level.

    Cells are numbered with the first index running fastest:
    ``flat = k_x + m * k_y`` with ``m = 2^level``.
    """

    level: int
    dim: int = 2

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValidationError(f"Level must be non-negative, got {self.level}")
        if self.dim not in (2, 3):
            raise ValidationError(f"Dimension must be 2 or 3, got {self.dim}")

    @property
    def eps(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def cells_per_side(self) -> int:
        return 2**self.level

    @property
    def n_cells(self) -> int:
        return self.cells_per_side**self.dim

    def indices(self) -> np.ndarray:
        """All k in I_eps as an (n_cells, dim) integer array in flat order."""
        m = self.cells_per_side
        grids = np.meshgrid(*([np.arange(m)] * self.dim), indexing="ij")
        return np.column_stack([g.ravel(order="F") for g in grids])

    def flat_index(self, k: Any) -> Any:
        k_arr = np.atleast_2d(np.asarray(k, dtype=int))
        weights = self.cells_per_side ** np.arange(self.dim)
        flat = k_arr @ weights
        return int(flat[0]) if np.ndim(k) == 1 else flat

    def decompose(self, x: Any) -> Tuple[Any, Any]:
        """
        Split x into its cell index [x] and local coordinate {x}.

        Args:
            x: Point(s) in the closed macro domain

        Returns:
            Tuple (k, y_hat) with x = eps * (k + y_hat). On the closed upper faces
            of Omega the last cell is used, so y_hat can equal 1 there.
        """
        pts, single = as_points(x, self.dim)
        scaled = pts / self.eps
        k = np.clip(np.floor(scaled).astype(int), 0, self.cells_per_side - 1)
        y_hat = scaled - k
        return _squeeze(k, single), _squeeze(y_hat, single)

    def compose(self, k: Any, y_hat: Any) -> Any:
        return self.eps * (np.asarray(k, dtype=float) + np.asarray(y_hat, dtype=float))

    def cell_centers(self) -> np.ndarray:
        return self.eps * (self.indices() + 0.5)
