"""Uniform cell-centered 2-D grids, scalar fields, and snapshot files."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "ScalarField", "GridState", "write_snapshot", "read_snapshot"]


@dataclass(frozen=True)
class Grid:
    """Uniform rectangle (x0, x1) x (y0, y1) split into nx-by-ny cells.

    Field values live at cell centers; the zero-flux boundary condition is
    realized by mirror ghost cells.
    """

    nx: int
    ny: int
    bounds: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0)

    def __post_init__(self):
        x0, x1, y0, y1 = self.bounds
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"cell counts must be >= 3, got {self.nx}x{self.ny}")
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"degenerate bounds {self.bounds}")

    @property
    def hx(self) -> float:
        x0, x1, _, _ = self.bounds
        return (x1 - x0) / self.nx

    @property
    def hy(self) -> float:
        _, _, y0, y1 = self.bounds
        return (y1 - y0) / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def centers(self):
        """Meshgrid (X, Y) of cell-center coordinates, shape (nx, ny)."""
        x0, _, y0, _ = self.bounds
        x = x0 + (np.arange(self.nx) + 0.5) * self.hx
        y = y0 + (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y, indexing="ij")


@dataclass
class ScalarField:
    """Scalar samples over a grid, stored as a C-ordered (nx, ny) array."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(f"field shape {v.shape} does not match grid "
                             f"{(self.grid.nx, self.grid.ny)}")
        self.values = v

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full((grid.nx, grid.ny), float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        X, Y = grid.centers()
        return cls(grid, np.asarray(fn(X, Y), dtype=np.float64))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())

    def integral(self) -> float:
        """Discrete integral over the domain (cell sum times cell area)."""
        return float(self.values.sum() * self.grid.cell_area)


@dataclass
class GridState:
    """Simulation state: time plus the three fields on a shared grid."""

    t: float
    T: ScalarField
    N: ScalarField
    Phi: ScalarField

    def __post_init__(self):
        g = self.T.grid
        if self.N.grid != g or self.Phi.grid != g:
            raise ValueError("T, N and Phi must share one grid")

    @property
    def grid(self) -> Grid:
        return self.T.grid

    def copy(self) -> "GridState":
        return GridState(self.t, self.T.copy(), self.N.copy(), self.Phi.copy())


def write_snapshot(path, f: ScalarField, t: float) -> None:
    """Write one field: header `nx ny x0 x1 y0 y1 t`, then nx*ny row-major
    values, one per line."""
    g = f.grid
    x0, x1, y0, y1 = g.bounds
    with open(path, "w") as fh:
        fh.write(f"{g.nx} {g.ny} {x0!r} {x1!r} {y0!r} {y1!r} {float(t)!r}\n")
        for v in f.values.ravel(order="C"):
            fh.write(f"{float(v)!r}\n")


def read_snapshot(path) -> tuple[ScalarField, float]:
    with open(path) as fh:
        header = fh.readline().split()
        nx, ny = int(header[0]), int(header[1])
        x0, x1, y0, y1 = (float(s) for s in header[2:6])
        t = float(header[6])
        values = np.loadtxt(fh).reshape(nx, ny)
    return ScalarField(Grid(nx, ny, (x0, x1, y0, y1)), values), t
