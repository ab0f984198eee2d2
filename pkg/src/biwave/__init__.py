"""Pseudospectral simulation of fourth-order wave maps into embedded manifolds."""

from .errors import (
    BiwaveError,
    Degenerate,
    DiscreteBlowup,
    GridMismatch,
    NonFinite,
    OffManifold,
    ParseError,
    TubeExceeded,
    ValidationError,
)
from .geometry import ProjectorJet, Sphere, TorusOfRevolution, make_manifold
from .grid import Grid, GridField

__version__ = "0.1.0"

__all__ = [
    "BiwaveError",
    "Degenerate",
    "DiscreteBlowup",
    "Grid",
    "GridField",
    "GridMismatch",
    "NonFinite",
    "OffManifold",
    "ParseError",
    "ProjectorJet",
    "Sphere",
    "TorusOfRevolution",
    "TubeExceeded",
    "ValidationError",
    "make_manifold",
    "__version__",
]
