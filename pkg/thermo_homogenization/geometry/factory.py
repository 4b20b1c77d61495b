"""Shape construction from configuration descriptors."""

from typing import Any, Dict, Optional

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.geometry.ball import Ball
from thermo_homogenization.geometry.base import Shape
from thermo_homogenization.geometry.superellipse import Superellipse

BALL_KINDS = ("circle", "sphere", "ball")
SHAPE_KINDS = BALL_KINDS + ("superellipse", "superellipsoid", "none")


def create_shape(descriptor: Dict[str, Any]) -> Optional[Shape]:
    """
    Create a shape from a ``shape`` configuration block.

    Args:
        descriptor: Dict with ``kind`` and the kind-specific fields
            (``center``, ``radius`` or ``semi_axes``/``exponent``, optional ``a1``/``a2``)

    Returns:
        Shape instance, or None for kind ``none`` (cell without inclusion)

    Raises:
        ValidationError: If the kind is unknown or the fields are invalid
    """
    kind = str(descriptor.get("kind", "circle")).lower()
    a1 = descriptor.get("a1")
    a2 = descriptor.get("a2")

    if kind == "none":
        return None

    center = descriptor.get("center")
    if kind in BALL_KINDS:
        if center is None:
            center = (0.5, 0.5, 0.5) if kind == "sphere" else (0.5, 0.5)
        return Ball(center=center, radius=descriptor.get("radius", 0.25), a1=a1, a2=a2)

    if kind in ("superellipse", "superellipsoid"):
        if center is None:
            center = (0.5, 0.5, 0.5) if kind == "superellipsoid" else (0.5, 0.5)
        semi_axes = descriptor.get("semi_axes") or [0.25] * len(center)
        return Superellipse(
            center=center,
            semi_axes=semi_axes,
            exponent=descriptor.get("exponent", 4.0),
            a1=a1,
            a2=a2,
        )

    raise ValidationError(
        f"Unknown shape kind: {kind}. Available kinds: {', '.join(SHAPE_KINDS)}"
    )


def shape_descriptor(shape: Optional[Shape]) -> Dict[str, Any]:
    """Inverse of :func:`create_shape` (``{"kind": "none"}`` for no inclusion)."""
    return {"kind": "none"} if shape is None else shape.to_dict()
