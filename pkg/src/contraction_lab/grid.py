"""Uniform 1-D grid, trapezoid quadrature, and finite-difference stencils."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "GridField",
    "integrate",
    "integrate_values",
    "ddx_central",
    "ddx_upwind",
    "ddx_upwind_biased",
    "d2dx2",
]


@dataclass(frozen=True)
class Grid:
    """Uniform node-based grid: nodes xi_min + i*dx, i = 0..num_cells."""

    xi_min: float
    xi_max: float
    num_cells: int

    def __post_init__(self):
        if not self.xi_min < self.xi_max:
            raise ValueError("need xi_min < xi_max")
        if self.num_cells < 4:
            raise ValueError("need at least 4 cells")

    @property
    def dx(self) -> float:
        return (self.xi_max - self.xi_min) / self.num_cells

    @property
    def num_nodes(self) -> int:
        return self.num_cells + 1

    def nodes(self) -> np.ndarray:
        return np.linspace(self.xi_min, self.xi_max, self.num_cells + 1)


@dataclass
class GridField:
    """Real values sampled at the nodes of a Grid; immutable by convention."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.num_nodes,):
            raise ValueError(
                f"expected {self.grid.num_nodes} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        self.values = vals

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "GridField":
        return cls(grid, np.asarray(fn(grid.nodes()), dtype=float))

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(self.grid, values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["xi", "value"])
            for x, v in zip(self.grid.nodes(), self.values):
                writer.writerow([f"{x:.17g}", f"{v:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "GridField":
        xs, vs = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:2] != ["xi", "value"]:
                raise ValueError(f"unexpected CSV header {header!r}")
            for row in reader:
                xs.append(float(row[0]))
                vs.append(float(row[1]))
        xs = np.asarray(xs)
        dxs = np.diff(xs)
        if not np.allclose(dxs, dxs[0], rtol=1e-10, atol=0.0):
            raise ValueError("CSV nodes are not uniformly spaced")
        grid = Grid(xi_min=xs[0], xi_max=xs[-1], num_cells=len(xs) - 1)
        return cls(grid, np.asarray(vs))


def integrate_values(values: np.ndarray, dx: float) -> float:
    """Composite trapezoid rule on raw node values."""
    return float(np.trapezoid(values, dx=dx))


def integrate(f: GridField) -> float:
    """Composite trapezoid rule over the field's grid."""
    return integrate_values(f.values, f.grid.dx)


def _ddx_central(v: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dx)
    return out


def ddx_central(f: GridField) -> GridField:
    """Second-order central derivative; second-order one-sided at boundaries."""
    return f.with_values(_ddx_central(f.values, f.grid.dx))


def _ddx_upwind(v: np.ndarray, speed: np.ndarray, dx: float) -> np.ndarray:
    backward = np.empty_like(v)
    backward[1:] = (v[1:] - v[:-1]) / dx
    backward[0] = (v[1] - v[0]) / dx
    forward = np.empty_like(v)
    forward[:-1] = (v[1:] - v[:-1]) / dx
    forward[-1] = (v[-1] - v[-2]) / dx
    return np.where(np.asarray(speed) > 0.0, backward, forward)


def ddx_upwind(f: GridField, speed: GridField) -> GridField:
    """First-order derivative biased against the local advection speed.

    For a term c * df/dxi with c = speed: backward difference where
    speed > 0, forward difference otherwise.
    """
    return f.with_values(_ddx_upwind(f.values, speed.values, f.grid.dx))


def _ddx_upwind_biased(v: np.ndarray, speed: np.ndarray, dx: float) -> np.ndarray:
    central = np.empty_like(v)
    central[1:-1] = (v[2:] - v[:-2]) / (2.0 * dx)
    central[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx)
    central[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dx)
    backward = central.copy()
    backward[2:] = (3.0 * v[2:] - 4.0 * v[1:-1] + v[:-2]) / (2.0 * dx)
    forward = central.copy()
    forward[:-2] = (-3.0 * v[:-2] + 4.0 * v[1:-1] - v[2:]) / (2.0 * dx)
    return np.where(np.asarray(speed) > 0.0, backward, forward)


def ddx_upwind_biased(f: GridField, speed: GridField) -> GridField:
    """Second-order upwind-biased derivative (three-point one-sided stencils).

    Dissipative for the advection it is biased against; falls back to the
    central stencil at nodes where the one-sided stencil does not fit.
    """
    return f.with_values(_ddx_upwind_biased(f.values, speed.values, f.grid.dx))


def _d2dx2(v: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (dx * dx)
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (dx * dx)
    out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (dx * dx)
    return out


def d2dx2(f: GridField) -> GridField:
    """Second-order Laplacian; second-order one-sided at boundary nodes."""
    return f.with_values(_d2dx2(f.values, f.grid.dx))
