"""Nonlinear Poincare-type functional on the unit interval.

R_delta(W) = -(1/delta) (int W^2 + 2 int W)^2 + (1+delta) int W^2
             + (2/3) int W^3 + delta int |W|^3
             - (1-delta) int y(1-y) |W'|^2

is nonpositive for every W with int W^2 <= M once delta is below a
threshold delta*(M) > 0.  The threshold is not constructive, so this
module samples test functions and scans for the empirical one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grid import GridField
from .wave import DomainError, WaveParams, profile_n, xi_of_y

__all__ = [
    "PoincareSample",
    "ScanResult",
    "R_poincare",
    "sample_W",
    "scan_delta_star",
    "W_from_state",
    "DEFAULT_Y_CELLS",
    "SAMPLE_FAMILIES",
]

DEFAULT_Y_CELLS = 4096
SAMPLE_FAMILIES = ("fourier", "polynomial", "bump")


def _y_nodes(n_cells: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n_cells + 1)


def _moments(w: np.ndarray) -> tuple[float, float, float, float, float]:
    """(int W^2, int W, int W^3, int |W|^3, int y(1-y)|W'|^2) by trapezoid."""
    m = len(w) - 1
    dy = 1.0 / m
    y = _y_nodes(m)
    dw = np.empty_like(w)
    dw[1:-1] = (w[2:] - w[:-2]) / (2.0 * dy)
    dw[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dy)
    dw[-1] = (3.0 * w[-1] - 4.0 * w[-2] + w[-3]) / (2.0 * dy)
    weight = y * (1.0 - y)  # vanishes at the endpoints, so endpoint dw is never weighted
    i2 = float(np.trapezoid(w * w, dx=dy))
    i1 = float(np.trapezoid(w, dx=dy))
    i3 = float(np.trapezoid(w**3, dx=dy))
    iabs3 = float(np.trapezoid(np.abs(w) ** 3, dx=dy))
    ih1 = float(np.trapezoid(weight * dw * dw, dx=dy))
    return i2, i1, i3, iabs3, ih1


def _r_from_moments(m: tuple[float, float, float, float, float], delta: float) -> float:
    i2, i1, i3, iabs3, ih1 = m
    return (
        -(i2 + 2.0 * i1) ** 2 / delta
        + (1.0 + delta) * i2
        + (2.0 / 3.0) * i3
        + delta * iabs3
        - (1.0 - delta) * ih1
    )


def R_poincare(W: np.ndarray, delta: float) -> float:
    """Evaluate the functional for W sampled on a uniform grid over [0, 1]."""
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    w = np.asarray(W, dtype=float)
    if w.ndim != 1 or len(w) < 5:
        raise ValueError("W must be a 1-D sample with at least 5 nodes")
    return _r_from_moments(_moments(w), delta)


@dataclass
class PoincareSample:
    """A test function with its norm data and functional value."""

    W: np.ndarray = field(repr=False)
    delta: float
    M: float
    l2_sq: float
    weighted_h1: float
    R_delta: float
    family: str = "custom"
    seed: int | None = None


def _raw_sample(rng: np.random.Generator, family: str, y: np.ndarray) -> np.ndarray:
    if family == "fourier":
        w = np.zeros_like(y)
        for k in range(1, 9):
            w += rng.normal() / k * np.sin(np.pi * k * y) + rng.normal() / k * np.cos(
                np.pi * k * y
            )
        return w
    if family == "polynomial":
        degree = int(rng.integers(2, 7))
        coeffs = rng.normal(size=degree + 1)
        return np.polynomial.polynomial.polyval(y, coeffs)
    if family == "bump":
        width = rng.uniform(0.05, 0.12)
        center = rng.uniform(0.45, 0.55)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return sign * np.exp(-((y - center) ** 2) / (2.0 * width**2))
    raise ValueError(f"unknown family {family!r}")


def sample_W(
    seed: int,
    M: float,
    family: str = "fourier",
    n_cells: int = DEFAULT_Y_CELLS,
    delta: float = 1e-3,
) -> PoincareSample:
    """Seeded random test function rescaled so that int W^2 lies in [M/2, M]."""
    if not M > 0.0:
        raise DomainError("M must be positive")
    rng = np.random.default_rng(seed)
    y = _y_nodes(n_cells)
    w = _raw_sample(rng, family, y)
    i2_raw = float(np.trapezoid(w * w, dx=1.0 / n_cells))
    target = rng.uniform(0.5 * M, M)
    w = w * np.sqrt(target / i2_raw)
    moms = _moments(w)
    return PoincareSample(
        W=w,
        delta=delta,
        M=M,
        l2_sq=moms[0],
        weighted_h1=moms[4],
        R_delta=_r_from_moments(moms, delta),
        family=family,
        seed=seed,
    )


@dataclass
class ScanResult:
    """Empirical threshold scan over a delta grid."""

    M: float
    delta_grid: list
    pass_counts: list
    delta_star_empirical: float
    worst_sample_seed: int | None
    worst_value: float
    n_samples: int
    tol: float

    def to_json_dict(self) -> dict:
        return {
            "M": self.M,
            "delta_grid": list(map(float, self.delta_grid)),
            "pass_counts": list(map(int, self.pass_counts)),
            "delta_star_empirical": self.delta_star_empirical,
            "worst_sample_seed": self.worst_sample_seed,
            "worst_value": self.worst_value,
            "n_samples": self.n_samples,
            "tol": self.tol,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def scan_delta_star(
    M: float,
    n_samples: int,
    delta_grid,
    seed: int = 0,
    families=SAMPLE_FAMILIES,
    n_cells: int = DEFAULT_Y_CELLS,
    tol: float = 1e-10,
    max_workers: int = 1,
) -> ScanResult:
    """Largest grid delta for which every sample satisfies R_delta(W) <= tol.

    A lower bound on the true threshold; the functional is monotone
    increasing in delta, so the passing deltas form an initial segment of
    the grid.
    """
    deltas = sorted(float(d) for d in delta_grid)
    if not deltas:
        raise ValueError("delta_grid must be non-empty")

    def _one(i: int):
        fam = families[i % len(families)]
        s = sample_W(seed + i, M, family=fam, n_cells=n_cells)
        return seed + i, _moments(s.W)

    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            sampled = list(pool.map(_one, range(n_samples)))
    else:
        sampled = [_one(i) for i in range(n_samples)]

    pass_counts = []
    delta_star = 0.0
    worst_seed = None
    worst_value = -np.inf
    all_passed_so_far = True
    for d in deltas:
        count = 0
        for s_seed, moms in sampled:
            r = _r_from_moments(moms, d)
            if r <= tol:
                count += 1
            elif r > worst_value:
                worst_value = r
                worst_seed = s_seed
        pass_counts.append(count)
        if count == n_samples and all_passed_so_far:
            delta_star = d
        else:
            all_passed_so_far = False
    return ScanResult(
        M=M,
        delta_grid=deltas,
        pass_counts=pass_counts,
        delta_star_empirical=delta_star,
        worst_sample_seed=worst_seed,
        worst_value=float(worst_value) if np.isfinite(worst_value) else 0.0,
        n_samples=n_samples,
        tol=tol,
    )


def W_from_state(
    params: WaveParams,
    n: GridField,
    n_cells: int = DEFAULT_Y_CELLS,
    delta: float = 1e-3,
) -> PoincareSample:
    """Push a density field onto [0, 1]: W(y) = (lam n_-/eps)(n(xi(y))/n~(xi(y)) - 1).

    The nodewise ratio w = n/n~ - 1 is interpolated linearly in xi; y values
    whose preimage falls outside the grid are clamped to the nearest
    boundary node.
    """
    y = _y_nodes(n_cells)
    xi = np.empty_like(y)
    xi[1:-1] = np.asarray(xi_of_y(params, y[1:-1]))
    xi[0] = -np.inf
    xi[-1] = np.inf
    xi = np.clip(xi, n.grid.xi_min, n.grid.xi_max)
    w_nodes = n.values / np.asarray(profile_n(params, n.grid.nodes())) - 1.0
    w = (params.lam * params.n_minus / params.eps) * np.interp(xi, n.grid.nodes(), w_nodes)
    moms = _moments(w)
    return PoincareSample(
        W=w,
        delta=delta,
        M=moms[0],
        l2_sq=moms[0],
        weighted_h1=moms[4],
        R_delta=_r_from_moments(moms, delta),
        family="from_state",
    )
