"""Quadrature-exact identity checks on randomly perturbed states.

The maximized split and the tube decompositions are algebraic rearrangements
of the same nodewise integrands, so on any grid the identities

    I_bad - I_good = B_delta - G_delta          (any delta > 0)
    Y  = Y_g + Y_b + Y_l + Y_s
    B  = B1 + B2_in + B2_out + B3
    G  = G1_in + G1_out + G2 + D

hold to rounding.  This module samples large rough states and measures the
worst relative error of each identity.
"""

from __future__ import annotations

import os

import numpy as np

from .functionals import (
    B_delta,
    G_delta,
    I_bad,
    I_good,
    State,
    Y,
    decompositions,
)
from .grid import Grid, GridField
from .wave import WaveParams, profile_n, profile_q

__all__ = ["random_state", "check_identities", "max_workers_from_env"]

ENV_THREADS = "A_CONTRACTION_LAB_THREADS"


def max_workers_from_env(default: int = 1) -> int:
    raw = os.environ.get(ENV_THREADS)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return max(1, value)


def random_state(params: WaveParams, grid: Grid, seed: int) -> State:
    """Large smooth random perturbation of the wave, positive by construction.

    The density factor is exp of a random trigonometric sum, so n/n~ sweeps
    well past any tube threshold in (0, 1/2) for most seeds.
    """
    rng = np.random.default_rng(seed)
    xi = grid.nodes()
    span = grid.xi_max - grid.xi_min
    g = np.zeros_like(xi)
    h = np.zeros_like(xi)
    for k in range(1, 7):
        g += rng.normal() / k * np.sin(2.0 * np.pi * k * (xi - grid.xi_min) / span + rng.uniform(0, 2 * np.pi))
        h += rng.normal() / k * np.sin(2.0 * np.pi * k * (xi - grid.xi_min) / span + rng.uniform(0, 2 * np.pi))
    g *= rng.uniform(0.05, 1.0) / max(np.max(np.abs(g)), 1e-12)
    h *= rng.uniform(0.05, 1.5) / max(np.max(np.abs(h)), 1e-12)
    n = np.asarray(profile_n(params, xi)) * np.exp(g)
    q = np.asarray(profile_q(params, xi)) + h
    return State(n=GridField(grid, n), q=GridField(grid, q))


def _rel_err(lhs: float, rhs: float, scale: float) -> float:
    return abs(lhs - rhs) / max(scale, 1e-30)


def _check_one(params: WaveParams, grid: Grid, seed: int, deltas) -> dict:
    state = random_state(params, grid, seed)
    ibad = I_bad(params, state)
    igood = I_good(params, state)
    y = Y(params, state)
    errors = {"max_split": 0.0, "sum_Y": 0.0, "sum_B": 0.0, "sum_G": 0.0}
    for d in deltas:
        b = B_delta(params, state, d)
        g = G_delta(params, state, d)
        scale = max(abs(ibad), igood, abs(b), g, 1.0)
        errors["max_split"] = max(errors["max_split"], _rel_err(ibad - igood, b - g, scale))
        y_parts, b_parts, g_parts = decompositions(params, state, min(d, 0.4999))
        errors["sum_Y"] = max(errors["sum_Y"], _rel_err(y, sum(y_parts), max(abs(y), 1.0)))
        errors["sum_B"] = max(errors["sum_B"], _rel_err(b, sum(b_parts), max(abs(b), 1.0)))
        errors["sum_G"] = max(errors["sum_G"], _rel_err(g, sum(g_parts), max(abs(g), 1.0)))
    return errors


def check_identities(
    params: WaveParams,
    grid: Grid,
    n_states: int = 100,
    deltas=(0.05, 0.25, 0.49),
    seed: int = 0,
    tol: float = 1e-10,
    max_workers: int = 1,
) -> dict:
    """Worst relative error of every identity over n_states random states."""
    seeds = [seed + i for i in range(n_states)]

    def _one(s):
        return _check_one(params, grid, s, deltas)

    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_state = list(pool.map(_one, seeds))
    else:
        per_state = [_one(s) for s in seeds]

    names = {
        "max_split": "I_bad - I_good == B_delta - G_delta",
        "sum_Y": "Y == Y_g + Y_b + Y_l + Y_s",
        "sum_B": "B == B1 + B2_in + B2_out + B3",
        "sum_G": "G == G1_in + G1_out + G2 + D",
    }
    identities = []
    for key, label in names.items():
        worst = max(errs[key] for errs in per_state)
        identities.append({"name": label, "max_rel_err": worst, "passed": bool(worst <= tol)})
    return {
        "n_states": n_states,
        "seed": seed,
        "num_cells": grid.num_cells,
        "deltas": list(map(float, deltas)),
        "tol": tol,
        "identities": identities,
        "all_passed": bool(all(e["passed"] for e in identities)),
    }
