"""Meshes and boundary conditions.

1-D meshes are lists of element edges (non-uniform spacing allowed); 2-D
meshes are tensor products of two 1-D meshes. Boundary conditions fill ghost
element data: two ghost layers are enough for every scheme in the package.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class Mesh1D:
    edges: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        if self.edges.ndim != 1 or self.edges.size < 2:
            raise ValueError("need at least one element")
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        self.dx = np.diff(self.edges)
        self.n = self.dx.size
        self.periodic = False  # set by the boundary pair at solver setup

    @classmethod
    def uniform(cls, a: float, b: float, n: int) -> "Mesh1D":
        return cls(np.linspace(a, b, n + 1))

    def node_coords(self, nodes):
        """Physical solution point coordinates, shape (n, len(nodes))."""
        return self.edges[:-1, None] + np.asarray(nodes) * self.dx[:, None]


@dataclass
class Mesh2D:
    x: Mesh1D
    y: Mesh1D

    @classmethod
    def uniform(cls, extents, nx: int, ny: int) -> "Mesh2D":
        (xa, xb), (ya, yb) = extents
        return cls(Mesh1D.uniform(xa, xb, nx), Mesh1D.uniform(ya, yb, ny))

    @property
    def shape(self):
        return (self.x.n, self.y.n)


class BoundaryCondition:
    """Fills one side's ghost elements from interior data.

    ghost_values receives the outermost interior element arrays ordered from
    the boundary inward with the boundary-normal node axis LAST (the solver
    transposes as needed), shaped (nvar, layers, ..., ns), plus ghost node
    coordinates with the same layout, the time, the equation system, and the
    physical normal axis. It returns ghost data ordered from the boundary
    outward in the same layout.
    """

    kind = "abstract"

    def ghost_values(self, interior, coords, t, eq, axis):
        raise NotImplementedError


class Periodic(BoundaryCondition):
    kind = "periodic"

    def ghost_values(self, interior, coords, t, eq, axis):  # pragma: no cover
        raise RuntimeError("periodic ghosts are wrapped by the solver")


class Transmissive(BoundaryCondition):
    """Zero-gradient outflow: even reflection of the outermost elements."""

    kind = "transmissive"

    def ghost_values(self, interior, coords, t, eq, axis):
        return _mirror(interior)


class ReflectingWall(BoundaryCondition):
    """Solid wall: mirror the state and negate the normal velocity."""

    kind = "reflecting"

    def ghost_values(self, interior, coords, t, eq, axis):
        ghost = _mirror(interior)
        if eq.nconstraints > 0:  # Euler-type layout: momentum at 1 + axis
            ghost[1 + axis] = -ghost[1 + axis]
        return ghost


class Dirichlet(BoundaryCondition):
    """Prescribed primitive state as a function of the coordinates and t."""

    kind = "dirichlet"

    def __init__(self, state_fn: Callable):
        self.state_fn = state_fn

    def ghost_values(self, interior, coords, t, eq, axis):
        w = self.state_fn(*coords, t)
        return eq.prim_to_cons(np.asarray(w))


def _mirror(interior):
    """Even reflection across the boundary face.

    With layers ordered boundary-inward on input and boundary-outward on
    output, reflecting maps layer k to ghost layer k with only the normal
    node axis (last) reversed.
    """
    return np.flip(interior, axis=-1).copy()


@dataclass
class BoundarySet1D:
    left: BoundaryCondition
    right: BoundaryCondition

    def __post_init__(self):
        if (self.left.kind == "periodic") != (self.right.kind == "periodic"):
            raise ValueError("periodic boundaries must be paired")

    @property
    def periodic(self):
        return self.left.kind == "periodic"


@dataclass
class BoundarySet2D:
    left: BoundaryCondition
    right: BoundaryCondition
    bottom: BoundaryCondition
    top: BoundaryCondition

    def __post_init__(self):
        if (self.left.kind == "periodic") != (self.right.kind == "periodic"):
            raise ValueError("periodic x boundaries must be paired")
        if (self.bottom.kind == "periodic") != (self.top.kind == "periodic"):
            raise ValueError("periodic y boundaries must be paired")

    @property
    def periodic_x(self):
        return self.left.kind == "periodic"

    @property
    def periodic_y(self):
        return self.bottom.kind == "periodic"
