#!/usr/bin/env python3
# grid.py
"""
Radial grid and solution state shared by the model, solver and post-processing modules
"""

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import ParameterRangeError

BOUNDARY_KINDS = ("dirichlet", "neumann")


def sphere_area(d: int) -> float:
    """Surface measure |S_{d-1}| of the unit sphere in R^d (2 for d=1)"""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class RadialGrid:
    """Cell-centered radial grid r_j = (j+1/2)dr, j = 0..n_nodes-1"""

    d: int
    dr: float
    n_nodes: int
    boundary: str = "dirichlet"

    def __post_init__(self):
        if self.d < 1:
            raise ParameterRangeError(f"dimension must be >= 1, got {self.d}")
        if not self.dr > 0:
            raise ParameterRangeError(f"grid spacing must be positive, got {self.dr}")
        if self.n_nodes < 1:
            raise ParameterRangeError(f"grid needs at least one node, got {self.n_nodes}")
        if self.boundary not in BOUNDARY_KINDS:
            raise ParameterRangeError(f"unknown boundary '{self.boundary}'")

    @classmethod
    def covering(cls, d: int, dr: float, support_radius: float, t_max: float,
                 boundary: str = "dirichlet") -> "RadialGrid":
        """Grid whose radius keeps the outer boundary causally inert up to t_max"""
        n_nodes = int(math.ceil((support_radius + t_max) / dr)) + 2
        return cls(d=d, dr=dr, n_nodes=n_nodes, boundary=boundary)

    def refined(self, factor: int = 2) -> "RadialGrid":
        """Same domain with spacing divided by factor"""
        return replace(self, dr=self.dr / factor, n_nodes=self.n_nodes * factor)

    @property
    def radius(self) -> float:
        return self.n_nodes * self.dr

    @cached_property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n_nodes) + 0.5) * self.dr

    @cached_property
    def outer_faces(self) -> np.ndarray:
        return (np.arange(self.n_nodes) + 1.0) * self.dr

    @cached_property
    def face_areas(self) -> np.ndarray:
        """|S_{d-1}| r^{d-1} at the outer face of every cell"""
        return sphere_area(self.d) * self.outer_faces ** (self.d - 1)

    @cached_property
    def volumes(self) -> np.ndarray:
        """Exact shell volumes of the cells, the quadrature weights of every norm"""
        outer = self.outer_faces ** self.d
        inner = (self.outer_faces - self.dr) ** self.d
        return sphere_area(self.d) * (outer - inner) / self.d

    def ghost(self, values: np.ndarray) -> float:
        """Value beyond r = R implied by the boundary condition"""
        if self.boundary == "neumann":
            return float(values[-1])
        return 0.0


@dataclass(frozen=True)
class State:
    """Sampled displacement u and velocity w = u_t at time t"""

    t: float
    u: np.ndarray
    w: np.ndarray = field(repr=False)

    @classmethod
    def zeros(cls, grid: RadialGrid, t: float = 0.0) -> "State":
        return cls(t=t, u=np.zeros(grid.n_nodes), w=np.zeros(grid.n_nodes))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.w)))

    def sup(self) -> float:
        return float(np.max(np.abs(self.u))) if self.u.size else 0.0
