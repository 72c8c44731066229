"""Magnetostatic fields and field Jacobians of circular current loops and loop arrays."""
from .elliptic import EllipticDomainError, elliptic_KE
from .coils import (
    CoilSpec,
    FieldSample,
    SingularityError,
    array_field,
    field_grid,
    field_jacobian,
    field_only,
    filament_distance,
    loop_field,
    on_axis_field,
    on_axis_gradient,
    pack_coils,
)
from . import backend

__all__ = [
    "EllipticDomainError", "elliptic_KE", "CoilSpec", "FieldSample", "SingularityError",
    "array_field", "field_grid", "field_jacobian", "field_only", "filament_distance",
    "loop_field", "on_axis_field", "on_axis_gradient", "pack_coils", "backend",
]
