"""Scalar functionals of a state relative to the traveling wave.

Relative entropies, the entropy-evolution pieces Y / I_bad / I_good, their
maximized split B_delta / G_delta, the dissipation D, the wave-strength
expansion functionals, the tube truncation, and the decompositions of Y, B,
and G over the tube {|n/n~ - 1| <= delta_1} and its complement.

All reference objects (n~, q~, a and derivatives) are evaluated in closed
form at arbitrary points, optionally translated by a shift; only solution
fields are ever differenced.  Every integral is the same composite
trapezoid rule, so the algebraic identities between these functionals hold
at machine precision on any grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import Grid, GridField, _ddx_central, integrate_values
from .wave import (
    DomainError,
    WaveParams,
    profile_n,
    profile_n_prime,
    profile_n_second,
    profile_q,
    weight_a,
    weight_a_prime,
    weight_a_second,
)

__all__ = [
    "State",
    "FunctionalReport",
    "ReferenceArrays",
    "reference_arrays",
    "pi_rel",
    "eta_rel",
    "phi_of_n",
    "Y",
    "I_bad",
    "I_good",
    "B_delta",
    "G_delta",
    "D",
    "eta_weighted",
    "eta_unweighted",
    "truncate",
    "ExpansionFunctionals",
    "expansion_functionals",
    "YParts",
    "BParts",
    "GParts",
    "decompositions",
    "R_main",
    "R_eps_delta",
    "evaluate_report",
    "y_and_ibad",
    "REPORT_COLUMNS",
]


@dataclass
class State:
    """Solution pair U = (n, q) on one grid; n strictly positive."""

    n: GridField
    q: GridField

    def __post_init__(self):
        if self.n.grid != self.q.grid:
            raise ValueError("n and q must share one grid")
        if np.any(self.n.values <= 0.0):
            raise DomainError("density must be strictly positive at every node")

    @property
    def grid(self) -> Grid:
        return self.n.grid


@dataclass(frozen=True)
class ReferenceArrays:
    """Analytic wave/weight arrays on the grid nodes, translated by a shift."""

    xi: np.ndarray
    ntil: np.ndarray
    ntil_prime: np.ndarray
    ntil_second: np.ndarray
    qtil: np.ndarray
    a: np.ndarray
    a_prime: np.ndarray
    a_second: np.ndarray


def reference_arrays(params: WaveParams, grid: Grid, shift: float = 0.0) -> ReferenceArrays:
    """Evaluate all reference objects at the grid nodes minus the shift.

    Functionals of the shifted state U^X use references translated by X;
    translating the analytic objects is exact and never interpolates U.
    """
    xi = grid.nodes() - shift
    return ReferenceArrays(
        xi=xi,
        ntil=np.asarray(profile_n(params, xi)),
        ntil_prime=np.asarray(profile_n_prime(params, xi)),
        ntil_second=np.asarray(profile_n_second(params, xi)),
        qtil=np.asarray(profile_q(params, xi)),
        a=np.asarray(weight_a(params, xi)),
        a_prime=np.asarray(weight_a_prime(params, xi)),
        a_second=np.asarray(weight_a_second(params, xi)),
    )


def pi_rel(n1, n2):
    """Relative density entropy Pi(n1 | n2) = n1 log(n1/n2) - (n1 - n2).

    Nonnegative, zero iff n1 == n2.  Works elementwise on arrays.  The raw
    expression can round one ulp below zero near coincidence, so it is
    clamped.
    """
    n1a = np.asarray(n1, dtype=float)
    n2a = np.asarray(n2, dtype=float)
    if np.any(n1a <= 0.0) or np.any(n2a <= 0.0):
        raise DomainError("pi_rel requires positive densities")
    out = np.maximum(n1a * np.log(n1a / n2a) - (n1a - n2a), 0.0)
    return float(out) if out.ndim == 0 else out


def eta_rel(u1, u2):
    """Relative entropy |q1 - q2|^2 / 2 + Pi(n1 | n2) for states (n, q)."""
    n1, q1 = u1
    n2, q2 = u2
    dq = np.asarray(q1, dtype=float) - np.asarray(q2, dtype=float)
    out = 0.5 * dq * dq + pi_rel(n1, n2)
    return float(out) if np.ndim(out) == 0 else out


def phi_of_n(params: WaveParams, xi, n):
    """phi(n) = (1/sigma) (Pi(n|n~) + (1 + (eps/lam) a/n~)(n - n~)) at xi."""
    ntil = np.asarray(profile_n(params, xi))
    a = np.asarray(weight_a(params, xi))
    n_arr = np.asarray(n, dtype=float)
    ratio = params.eps / params.lam
    out = (pi_rel(n_arr, ntil) + (1.0 + ratio * a / ntil) * (n_arr - ntil)) / params.sigma
    return float(out) if out.ndim == 0 else out


class _Core(NamedTuple):
    """Shared nodewise arrays entering every functional."""

    refs: ReferenceArrays
    dx: float
    n: np.ndarray
    q: np.ndarray
    u: np.ndarray        # q - q~
    pi: np.ndarray       # Pi(n | n~)
    logratio: np.ndarray  # log(n / n~)
    dlog: np.ndarray     # d/dxi log(n/n~), analytic reference part
    phi: np.ndarray
    eta: np.ndarray


def _core(params: WaveParams, state: State, shift: float) -> _Core:
    refs = reference_arrays(params, state.grid, shift)
    n = state.n.values
    q = state.q.values
    u = q - refs.qtil
    pi = np.maximum(n * np.log(n / refs.ntil) - (n - refs.ntil), 0.0)
    logratio = np.log(n / refs.ntil)
    # difference only the solution part; n~'/n~ analytic avoids cancellation
    dlog = _ddx_central(np.log(n), state.grid.dx) - refs.ntil_prime / refs.ntil
    ratio = params.eps / params.lam
    phi = (pi + (1.0 + ratio * refs.a / refs.ntil) * (n - refs.ntil)) / params.sigma
    eta = 0.5 * u * u + pi
    return _Core(refs, state.grid.dx, n, q, u, pi, logratio, dlog, phi, eta)


def _Y_value(params: WaveParams, c: _Core) -> float:
    ratio = params.eps / params.lam
    integ = -c.refs.a_prime * c.eta - ratio * c.refs.a * c.refs.a_prime * (
        (c.n - c.refs.ntil) / c.refs.ntil - c.u / params.sigma
    )
    return integrate_values(integ, c.dx)


def _I_bad_value(params: WaveParams, c: _Core) -> float:
    r = c.refs
    coupling = r.a_prime * c.pi + (r.a_prime - r.a * r.ntil_prime / r.ntil) * (c.n - r.ntil)
    t1 = integrate_values(-coupling * c.u, c.dx)
    t2 = integrate_values(-r.a_prime * r.qtil * c.pi, c.dx)
    t3 = integrate_values(
        (r.a * r.ntil_prime / r.ntil - r.a_prime) * c.n * c.logratio * c.dlog, c.dx
    )
    t4 = integrate_values(r.a * (r.ntil_second / r.ntil) * c.pi, c.dx)
    return t1 + t2 + t3 + t4


def _I_good_parts(params: WaveParams, c: _Core) -> tuple[float, float, float]:
    r = c.refs
    g_q = params.sigma * integrate_values(0.5 * r.a_prime * c.u * c.u, c.dx)
    g_pi = params.sigma * integrate_values(r.a_prime * c.pi, c.dx)
    g_d = integrate_values(r.a * c.n * c.dlog * c.dlog, c.dx)
    return g_q, g_pi, g_d


class _Split(NamedTuple):
    """B/G pieces for a fixed tube threshold delta."""

    B1: float
    B2_in: float
    B2_out: float
    B3: float
    G1_in: float
    G1_out: float
    G2: float
    D: float
    Y_g: float
    Y_b: float
    Y_l: float
    Y_s: float


def _split(params: WaveParams, c: _Core, delta: float) -> _Split:
    r = c.refs
    ratio = params.eps / params.lam
    inside = (np.abs(c.n / r.ntil - 1.0) <= delta).astype(float)  # ties go inside
    outside = 1.0 - inside
    coeff = 1.0 + ratio * r.a / r.ntil

    b1 = integrate_values(-r.a_prime * r.qtil * c.pi, c.dx) + integrate_values(
        -ratio * r.a_second * (r.a / r.ntil) * c.pi, c.dx
    )
    b2_in = 0.5 * params.sigma * integrate_values(r.a_prime * c.phi * c.phi * inside, c.dx)
    b2_out = integrate_values(
        -r.a_prime * (c.pi + coeff * (c.n - r.ntil)) * c.u * outside, c.dx
    )
    b3 = integrate_values(-r.a_prime * coeff * c.n * c.logratio * c.dlog, c.dx)

    g1_in = 0.5 * params.sigma * integrate_values(
        r.a_prime * (c.u + c.phi) ** 2 * inside, c.dx
    )
    g1_out = 0.5 * params.sigma * integrate_values(r.a_prime * c.u * c.u * outside, c.dx)
    g2 = params.sigma * integrate_values(r.a_prime * c.pi, c.dx)
    d = integrate_values(r.a * c.n * c.dlog * c.dlog, c.dx)

    y_g = integrate_values(
        (-r.a_prime * (0.5 * c.phi * c.phi + c.pi)
         - ratio * r.a * r.a_prime * ((c.n - r.ntil) / r.ntil + c.phi / params.sigma))
        * inside,
        c.dx,
    )
    y_b = integrate_values(
        (-0.5 * r.a_prime * (c.u + c.phi) ** 2 + r.a_prime * c.phi * (c.u + c.phi))
        * inside,
        c.dx,
    )
    y_l = (ratio / params.sigma) * integrate_values(
        r.a * r.a_prime * (c.u + c.phi) * inside, c.dx
    )
    y_s = integrate_values(
        (-r.a_prime * c.eta
         - ratio * r.a * r.a_prime * ((c.n - r.ntil) / r.ntil - c.u / params.sigma))
        * outside,
        c.dx,
    )
    return _Split(b1, b2_in, b2_out, b3, g1_in, g1_out, g2, d, y_g, y_b, y_l, y_s)


def Y(params: WaveParams, state: State, shift: float = 0.0) -> float:
    """Shift-sensitivity functional Y(U) in its explicit rewritten form."""
    return _Y_value(params, _core(params, state, shift))


def I_bad(params: WaveParams, state: State, shift: float = 0.0) -> float:
    """Sign-indefinite terms of the entropy-evolution identity."""
    return _I_bad_value(params, _core(params, state, shift))


def I_good(params: WaveParams, state: State, shift: float = 0.0) -> float:
    """Sum of the three nonnegative dissipative terms."""
    return sum(_I_good_parts(params, _core(params, state, shift)))


def B_delta(params: WaveParams, state: State, delta: float, shift: float = 0.0) -> float:
    """Maximized bad part at tube threshold delta."""
    if not delta > 0.0:
        raise DomainError("delta must be positive")
    s = _split(params, _core(params, state, shift), delta)
    return s.B1 + s.B2_in + s.B2_out + s.B3


def G_delta(params: WaveParams, state: State, delta: float, shift: float = 0.0) -> float:
    """Maximized good part at tube threshold delta; nonnegative."""
    if not delta > 0.0:
        raise DomainError("delta must be positive")
    s = _split(params, _core(params, state, shift), delta)
    return s.G1_in + s.G1_out + s.G2 + s.D


def D(params: WaveParams, state: State, shift: float = 0.0) -> float:
    """Weighted Fisher-type dissipation int a n |d/dxi log(n/n~)|^2."""
    c = _core(params, state, shift)
    return integrate_values(c.refs.a * c.n * c.dlog * c.dlog, c.dx)


def eta_weighted(params: WaveParams, state: State, shift: float = 0.0) -> float:
    """Weighted relative entropy int a eta(U^X | U~) via translated references."""
    c = _core(params, state, shift)
    return integrate_values(c.refs.a * c.eta, c.dx)


def eta_unweighted(params: WaveParams, state: State, shift: float = 0.0) -> float:
    """Plain relative entropy int eta(U^X | U~)."""
    c = _core(params, state, shift)
    return integrate_values(c.eta, c.dx)


def truncate(params: WaveParams, n: GridField, theta: float, shift: float = 0.0) -> GridField:
    """Clamp n into the tube |n/n~ - 1| <= theta around the (shifted) wave."""
    if not 0.0 < theta < 0.5:
        raise DomainError("theta must lie in (0, 1/2)")
    refs = reference_arrays(params, n.grid, shift)
    w = n.values / refs.ntil - 1.0
    out = np.where(w > theta, (1.0 + theta) * refs.ntil, n.values)
    out = np.where(w < -theta, (1.0 - theta) * refs.ntil, out)
    return n.with_values(out)


class ExpansionFunctionals(NamedTuple):
    """The density-only functionals of the wave-strength expansion."""

    Y_g: float
    I1: float
    I2: float
    G2: float
    D: float


def expansion_functionals(
    params: WaveParams, n: GridField, shift: float = 0.0
) -> ExpansionFunctionals:
    """Evaluate (Y_g, I1, I2, G2, D) for a density field over the whole line."""
    refs = reference_arrays(params, n.grid, shift)
    dx = n.grid.dx
    nv = n.values
    if np.any(nv <= 0.0):
        raise DomainError("density must be positive")
    ratio = params.eps / params.lam
    pi = np.maximum(nv * np.log(nv / refs.ntil) - (nv - refs.ntil), 0.0)
    phi = (pi + (1.0 + ratio * refs.a / refs.ntil) * (nv - refs.ntil)) / params.sigma
    dlog = _ddx_central(np.log(nv), dx) - refs.ntil_prime / refs.ntil

    y_g = integrate_values(
        -refs.a_prime * (0.5 * phi * phi + pi)
        - ratio * refs.a * refs.a_prime * ((nv - refs.ntil) / refs.ntil + phi / params.sigma),
        dx,
    )
    i1 = integrate_values(-refs.a_prime * refs.qtil * pi, dx) + integrate_values(
        -ratio * refs.a_second * (refs.a / refs.ntil) * pi, dx
    )
    i2 = 0.5 * params.sigma * integrate_values(refs.a_prime * phi * phi, dx)
    g2 = params.sigma * integrate_values(refs.a_prime * pi, dx)
    d = integrate_values(refs.a * nv * dlog * dlog, dx)
    return ExpansionFunctionals(y_g, i1, i2, g2, d)


class YParts(NamedTuple):
    Y_g: float
    Y_b: float
    Y_l: float
    Y_s: float


class BParts(NamedTuple):
    B1: float
    B2_in: float
    B2_out: float
    B3: float


class GParts(NamedTuple):
    G1_in: float
    G1_out: float
    G2: float
    D: float


def decompositions(
    params: WaveParams, state: State, delta1: float, shift: float = 0.0
) -> tuple[YParts, BParts, GParts]:
    """Split Y, B, G over the tube {|n/n~ - 1| <= delta1} and its complement."""
    if not 0.0 < delta1 < 0.5:
        raise DomainError("delta1 must lie in (0, 1/2)")
    s = _split(params, _core(params, state, shift), delta1)
    return (
        YParts(s.Y_g, s.Y_b, s.Y_l, s.Y_s),
        BParts(s.B1, s.B2_in, s.B2_out, s.B3),
        GParts(s.G1_in, s.G1_out, s.G2, s.D),
    )


def R_main(
    params: WaveParams,
    state: State,
    delta0: float,
    delta1: float,
    shift: float = 0.0,
) -> float:
    """Sign functional -(1/eps^4) Y^2 + B + delta0 (eps/lam) |B| - G + delta0 D.

    Negative whenever the contraction machinery has margin; monitored, not
    assumed.
    """
    if not (0.0 < delta0 < 0.5 and 0.0 < delta1 < 0.5):
        raise DomainError("delta0 and delta1 must lie in (0, 1/2)")
    c = _core(params, state, shift)
    s = _split(params, c, delta1)
    y = _Y_value(params, c)
    b = s.B1 + s.B2_in + s.B2_out + s.B3
    g = s.G1_in + s.G1_out + s.G2 + s.D
    return (
        -(y * y) / params.eps**4
        + b
        + delta0 * (params.eps / params.lam) * abs(b)
        - g
        + delta0 * s.D
    )


def R_eps_delta(params: WaveParams, n: GridField, delta: float, shift: float = 0.0) -> float:
    """Density-only sign functional of the near-wave expansion."""
    if not delta > 0.0:
        raise DomainError("delta must be positive")
    f = expansion_functionals(params, n, shift)
    ratio = params.eps / params.lam
    return (
        -(f.Y_g**2) / (params.eps * delta)
        + (f.I1 + f.I2)
        + delta * ratio * (abs(f.I1) + abs(f.I2))
        - (1.0 - delta * ratio) * f.G2
        - (1.0 - delta) * f.D
    )


REPORT_COLUMNS = (
    "eta_weighted",
    "Y",
    "I_bad",
    "I_good",
    "B_delta",
    "G_delta",
    "D",
    "Y_g",
    "Y_b",
    "Y_l",
    "Y_s",
    "B1",
    "B2_in",
    "B2_out",
    "B3",
    "G1_in",
    "G1_out",
    "G2",
    "G_D",
    "R_main",
    "delta_used",
)


@dataclass(frozen=True)
class FunctionalReport:
    """All functional values at one time, with consistency baked in."""

    eta_weighted: float
    Y: float
    I_bad: float
    I_good: float
    B_delta: float
    G_delta: float
    D: float
    Y_parts: YParts
    B_parts: BParts
    G_parts: GParts
    R_main: float
    delta_used: float

    def __post_init__(self):
        if self.I_good < 0 or self.G_delta < -1e-15 or self.D < 0:
            raise ValueError("good terms must be nonnegative")
        for total, parts in (
            (self.Y, self.Y_parts),
            (self.B_delta, self.B_parts),
            (self.G_delta, self.G_parts),
        ):
            gap = abs(total - sum(parts))
            if gap > 1e-10 * max(1.0, abs(total)):
                raise ValueError(f"decomposition does not reproduce total: gap={gap:.3e}")

    def to_row(self) -> list[float]:
        return [
            self.eta_weighted,
            self.Y,
            self.I_bad,
            self.I_good,
            self.B_delta,
            self.G_delta,
            self.D,
            *self.Y_parts,
            *self.B_parts,
            *self.G_parts,
            self.R_main,
            self.delta_used,
        ]

    def to_json_dict(self) -> dict:
        return dict(zip(REPORT_COLUMNS, self.to_row()))


def evaluate_report(
    params: WaveParams,
    state: State,
    delta0: float = 0.01,
    delta1: float = 0.25,
    shift: float = 0.0,
) -> FunctionalReport:
    """Compute every functional once, sharing all intermediate arrays."""
    c = _core(params, state, shift)
    s = _split(params, c, delta1)
    y = _Y_value(params, c)
    ibad = _I_bad_value(params, c)
    igood = sum(_I_good_parts(params, c))
    b = s.B1 + s.B2_in + s.B2_out + s.B3
    g = s.G1_in + s.G1_out + s.G2 + s.D
    r = -(y * y) / params.eps**4 + b + delta0 * (params.eps / params.lam) * abs(b) - g + delta0 * s.D
    return FunctionalReport(
        eta_weighted=integrate_values(c.refs.a * c.eta, c.dx),
        Y=y,
        I_bad=ibad,
        I_good=igood,
        B_delta=b,
        G_delta=g,
        D=s.D,
        Y_parts=YParts(s.Y_g, s.Y_b, s.Y_l, s.Y_s),
        B_parts=BParts(s.B1, s.B2_in, s.B2_out, s.B3),
        G_parts=GParts(s.G1_in, s.G1_out, s.G2, s.D),
        R_main=r,
        delta_used=delta1,
    )


def y_and_ibad(params: WaveParams, state: State, shift: float = 0.0) -> tuple[float, float]:
    """Just Y and I_bad: the shift ODE right-hand side inputs."""
    c = _core(params, state, shift)
    return _Y_value(params, c), _I_bad_value(params, c)
