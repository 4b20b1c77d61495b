"""Quadrature rules on triangles and edges."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TriangleRule:
    """Barycentric points (nq, 3) and weights (nq,) summing to one."""

    name: str
    barycentric: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def n_points(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class EdgeRule:
    """Points in [0, 1] along an edge and weights summing to one."""

    name: str
    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def n_points(self) -> int:
        return len(self.weights)

    @property
    def shape_values(self) -> np.ndarray:
        """(nq, 2) values of the two endpoint hat functions."""
        return np.column_stack([1.0 - self.points, self.points])


def _permutations(a: float, b: float) -> np.ndarray:
    return np.array([[a, b, b], [b, a, b], [b, b, a]])


TRIANGLE_3 = TriangleRule(
    name="gauss3",
    barycentric=_permutations(2.0 / 3.0, 1.0 / 6.0),
    weights=np.full(3, 1.0 / 3.0),
    degree=2,
)

# Degree-5 rule used for error norms.
TRIANGLE_7 = TriangleRule(
    name="gauss7",
    barycentric=np.vstack([
        [[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
        _permutations(0.059715871789770, 0.470142064105115),
        _permutations(0.797426985353087, 0.101286507323456),
    ]),
    weights=np.concatenate([
        [0.225],
        np.full(3, 0.132394152788506),
        np.full(3, 0.125939180544827),
    ]),
    degree=5,
)

EDGE_2 = EdgeRule(
    name="gauss2",
    points=np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)]),
    weights=np.array([0.5, 0.5]),
    degree=3,
)


def triangle_points(
    nodes: np.ndarray, triangles: np.ndarray, rule: TriangleRule = TRIANGLE_3
) -> np.ndarray:
    """Physical quadrature points, shape (nt, nq, 2)."""
    corners = nodes[triangles]
    return np.einsum("qa,tai->tqi", rule.barycentric, corners)


def edge_points(nodes: np.ndarray, edges: np.ndarray, rule: EdgeRule = EDGE_2) -> np.ndarray:
    """Physical quadrature points on edges, shape (ne, nq, 2)."""
    ends = nodes[edges]
    return np.einsum("qa,eai->eqi", rule.shape_values, ends)
