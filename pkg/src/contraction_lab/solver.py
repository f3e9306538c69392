"""Moving-frame time integration of the hyperbolic-parabolic system.

The frame travels with the shock, so the reference wave is stationary and
only the shift X translates analytic objects.  One step is a two-stage
explicit update of the first-order terms (second-order upwind-biased
advection, central coupling) followed by an implicit backward-Euler
diffusion solve; boundary nodes stay pinned to the analytic wave.

By default the discrete residual of the sampled wave is subtracted from
the right-hand side, which makes the sampled wave a bit-exact fixed point
of the scheme: a zero perturbation stays identically zero, shift included.
Disable `well_balanced` to measure the raw truncation drift instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import solve_banded

from .functionals import (
    REPORT_COLUMNS,
    State,
    evaluate_report,
    eta_unweighted,
    eta_weighted,
    reference_arrays,
)
from .grid import Grid, GridField, _ddx_central, _ddx_upwind_biased
from .shift import ShiftState, advance, phi_eps, phi_regime
from .wave import WaveParams, characteristic_speeds

__all__ = [
    "StabilityError",
    "PerturbationSpec",
    "SolverConfig",
    "RunResult",
    "initial_state",
    "step",
    "run",
    "reconstruct_concentration",
]

# The perturbation must be below this floor outside the inner 80% of the domain.
INNER_FRACTION = 0.8
DECAY_FLOOR = 1e-10


class StabilityError(RuntimeError):
    """Blow-up, NaN, or loss of positivity during time integration."""

    def __init__(self, message: str, t: float | None = None, node: int | None = None):
        super().__init__(message)
        self.t = t
        self.node = node


@dataclass(frozen=True)
class PerturbationSpec:
    """Initial perturbation added on top of the sampled wave."""

    kind: str = "gaussian_bump"
    amplitude_n: float = 0.0
    amplitude_q: float = 0.0
    width: float = 1.0
    center: float = 0.0
    seed: int = 0
    path: Optional[str] = None  # for kind == "custom_file"

    def __post_init__(self):
        if self.kind not in ("gaussian_bump", "random_fourier", "shifted_wave", "custom_file"):
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if self.width <= 0.0:
            raise ValueError("width must be positive")


@dataclass(frozen=True)
class SolverConfig:
    """Everything one run needs; dt follows from the CFL number unless pinned."""

    params: WaveParams
    grid: Grid
    t_end: float
    perturbation: PerturbationSpec
    cfl: float = 0.4
    diffusion_mode: str = "implicit"
    dt: Optional[float] = None
    report_stride: int = 1
    shift_substeps: int = 4
    delta0: float = 0.01
    delta1: float = 0.25
    well_balanced: bool = True
    keep_states: bool = False
    violation_tol: float = 1e-7

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError("cfl must lie in (0, 1]")
        if self.diffusion_mode not in ("implicit", "explicit"):
            raise ValueError("diffusion_mode must be 'implicit' or 'explicit'")
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        if self.report_stride < 1 or self.shift_substeps < 1:
            raise ValueError("strides must be >= 1")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be positive when given")
        if not (self.grid.xi_min < 0.0 < self.grid.xi_max):
            raise ValueError("grid must bracket the wave center xi = 0")


def _perturbation_arrays(spec: PerturbationSpec, grid: Grid, params: WaveParams):
    xi = grid.nodes()
    if spec.kind == "gaussian_bump":
        bump = np.exp(-((xi - spec.center) ** 2) / (2.0 * spec.width**2))
        return spec.amplitude_n * bump, spec.amplitude_q * bump

    if spec.kind == "random_fourier":
        rng = np.random.default_rng(spec.seed)
        envelope = np.exp(-((xi - spec.center) ** 2) / (2.0 * spec.width**2))
        dn = np.zeros_like(xi)
        dq = np.zeros_like(xi)
        for k in range(1, 6):
            wavelen = spec.width / k
            dn += rng.normal() / k * np.sin(2.0 * np.pi * xi / wavelen + rng.uniform(0, 2 * np.pi))
            dq += rng.normal() / k * np.sin(2.0 * np.pi * xi / wavelen + rng.uniform(0, 2 * np.pi))

        def _norm(v):
            m = np.max(np.abs(v))
            return v / m if m > 0 else v

        return spec.amplitude_n * _norm(dn) * envelope, spec.amplitude_q * _norm(dq) * envelope

    if spec.kind == "shifted_wave":
        from .wave import profile_n, profile_q

        dn = np.asarray(profile_n(params, xi - spec.center)) - np.asarray(profile_n(params, xi))
        dq = np.asarray(profile_q(params, xi - spec.center)) - np.asarray(profile_q(params, xi))
        return dn, dq

    # custom_file: CSV columns xi, dn, dq interpolated onto the grid
    data = np.genfromtxt(spec.path, delimiter=",", names=True)
    dn = np.interp(xi, data["xi"], data["dn"], left=0.0, right=0.0)
    dq = np.interp(xi, data["xi"], data["dq"], left=0.0, right=0.0)
    return dn, dq


def initial_state(params: WaveParams, grid: Grid, spec: PerturbationSpec) -> State:
    """Sampled wave plus perturbation, validated for positivity and decay."""
    refs = reference_arrays(params, grid)
    dn, dq = _perturbation_arrays(spec, grid, params)
    n0 = refs.ntil + dn
    q0 = refs.qtil + dq
    if np.any(n0 <= 0.0):
        node = int(np.argmin(n0))
        raise ValueError(f"perturbation drives density non-positive at node {node}")
    if spec.kind != "shifted_wave":
        xi = grid.nodes()
        half = 0.5 * (grid.xi_max - grid.xi_min)
        mid = 0.5 * (grid.xi_max + grid.xi_min)
        outer = np.abs(xi - mid) > INNER_FRACTION * half
        worst = max(np.max(np.abs(dn[outer]), initial=0.0), np.max(np.abs(dq[outer]), initial=0.0))
        if worst > DECAY_FLOOR:
            raise ValueError(
                f"perturbation does not decay below {DECAY_FLOOR:g} outside the "
                f"inner {INNER_FRACTION:.0%} of the domain (max {worst:.3e})"
            )
    return State(n=GridField(grid, n0), q=GridField(grid, q0))


class _Stepper:
    """Precomputed machinery for repeated steps on one grid."""

    def __init__(self, params: WaveParams, grid: Grid, diffusion_mode: str, well_balanced: bool):
        self.params = params
        self.grid = grid
        self.dx = grid.dx
        self.diffusion_mode = diffusion_mode
        self.well_balanced = well_balanced
        self.refs = reference_arrays(params, grid)
        self.speed = np.full(grid.num_nodes, -params.sigma)  # frame advection velocity
        if well_balanced:
            # hyperbolic and diffusive residuals of the sampled wave
            self.residual_n, self.residual_q = self._hyperbolic(self.refs.ntil, self.refs.qtil)
            self.wave_diffusion = params.nu * self._laplacian(self.refs.ntil)
        else:
            self.residual_n = np.zeros(grid.num_nodes)
            self.residual_q = np.zeros(grid.num_nodes)
            self.wave_diffusion = np.zeros(grid.num_nodes)
        self._banded_cache: dict[float, np.ndarray] = {}

    def _laplacian(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (self.dx * self.dx)
        return out

    def _hyperbolic(self, n: np.ndarray, q: np.ndarray):
        """First-order terms: sigma-advection upwinded, coupling central."""
        sig = self.params.sigma
        rn = sig * _ddx_upwind_biased(n, self.speed, self.dx) + _ddx_central(n * q, self.dx)
        rq = sig * _ddx_upwind_biased(q, self.speed, self.dx) + _ddx_central(n, self.dx)
        return rn, rq

    def _explicit_rhs(self, n: np.ndarray, q: np.ndarray):
        rn, rq = self._hyperbolic(n, q)
        rn -= self.residual_n
        rq -= self.residual_q
        if self.diffusion_mode == "explicit":
            rn += self.params.nu * self._laplacian(n) - self.wave_diffusion
        rn[0] = rn[-1] = 0.0
        rq[0] = rq[-1] = 0.0
        return rn, rq

    def _banded(self, dt: float) -> np.ndarray:
        ab = self._banded_cache.get(dt)
        if ab is None:
            m = self.grid.num_nodes
            r = self.params.nu * dt / (self.dx * self.dx)
            ab = np.zeros((3, m))
            ab[0, 2:] = -r
            ab[1, :] = 1.0 + 2.0 * r
            ab[2, :-2] = -r
            # Dirichlet rows at both ends
            ab[1, 0] = ab[1, -1] = 1.0
            ab[0, 1] = 0.0
            ab[2, -2] = 0.0
            self._banded_cache[dt] = ab
        return ab

    def step(self, n: np.ndarray, q: np.ndarray, dt: float):
        # two-stage (Heun) update of the explicit terms
        rn1, rq1 = self._explicit_rhs(n, q)
        rn2, rq2 = self._explicit_rhs(n + dt * rn1, q + dt * rq1)
        n_star = n + 0.5 * dt * (rn1 + rn2)
        q_new = q + 0.5 * dt * (rq1 + rq2)

        if self.diffusion_mode == "implicit":
            if self.well_balanced:
                # delta form around the sampled wave: exact fixed point
                rhs = n_star - self.refs.ntil
                rhs[0] = rhs[-1] = 0.0
                delta = solve_banded((1, 1), self._banded(dt), rhs)
                n_new = self.refs.ntil + delta
            else:
                rhs = n_star.copy()
                rhs[0] = self.refs.ntil[0]
                rhs[-1] = self.refs.ntil[-1]
                n_new = solve_banded((1, 1), self._banded(dt), rhs)
        else:
            n_new = n_star

        n_new[0] = self.refs.ntil[0]
        n_new[-1] = self.refs.ntil[-1]
        q_new[0] = self.refs.qtil[0]
        q_new[-1] = self.refs.qtil[-1]
        return n_new, q_new

    def stable_dt(self, state: State, cfl: float) -> float:
        lo, hi = characteristic_speeds(state.n.values, state.q.values, self.params.sigma)
        max_speed = max(np.max(np.abs(lo)), np.max(np.abs(hi)), 1e-12)
        dt = cfl * self.dx / max_speed
        if self.diffusion_mode == "explicit":
            dt = min(dt, cfl * self.dx * self.dx / (2.0 * self.params.nu))
        return dt


def step(
    state: State,
    dt: float,
    params: WaveParams,
    diffusion_mode: str = "implicit",
    well_balanced: bool = False,
) -> State:
    """One IMEX step; convenience wrapper building the machinery each call."""
    stepper = _Stepper(params, state.grid, diffusion_mode, well_balanced)
    n_new, q_new = stepper.step(state.n.values.copy(), state.q.values.copy(), dt)
    _check_state(n_new, q_new)
    return State(n=GridField(state.grid, n_new), q=GridField(state.grid, q_new))


def _check_state(n: np.ndarray, q: np.ndarray, t: float | None = None):
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(q))):
        bad = int(np.argmax(~np.isfinite(n) | ~np.isfinite(q)))
        raise StabilityError("non-finite value in state", t=t, node=bad)
    if np.any(n <= 0.0):
        bad = int(np.argmin(n))
        raise StabilityError(f"density lost positivity (min {n[bad]:.3e})", t=t, node=bad)


@dataclass
class RunResult:
    """Per-step diagnostics, stride reports, and final state of one run."""

    config: SolverConfig
    dt: float
    times: np.ndarray
    monitor: dict  # per-step column -> array (regime is a list of str)
    reports: list  # (t, FunctionalReport) every report_stride steps
    report_rows: list  # full CSV rows matching csv_header()
    initial_state: State
    final_state: State
    final_shift: ShiftState
    states: Optional[list] = None
    e0: float = 0.0
    eta0_unweighted: float = 0.0

    def csv_header(self) -> list[str]:
        return [
            "t",
            "X",
            "X_dot",
            "regime",
            "lab_shift",
            *REPORT_COLUMNS,
            "eta_unweighted",
            "violation",
            "balance_residual",
        ]

    def verdict(self) -> dict:
        m = self.monitor
        tol = self.config.violation_tol
        e = np.asarray(m["eta_weighted"])
        d = np.asarray(m["D"])
        t = np.asarray(self.times)
        grid_t = np.concatenate([[0.0], t])
        grid_d = np.concatenate([[m["D0"]], d]) if "D0" in m else np.concatenate([[d[0]], d])
        cum_d = cumulative_trapezoid(grid_d, grid_t)  # int_0^t D along the run
        dissipation_excess = float(
            np.max(e + self.config.delta0 * cum_d - self.e0, initial=0.0)
        )
        violations = np.asarray(m["violation"])
        eta_unw = np.asarray(m["eta_unweighted"])
        y_vals = np.asarray(m["Y"])
        r_vals = np.asarray(m["R_main"])
        monitored = np.abs(y_vals) <= self.config.params.eps**2
        r_monitored = r_vals[monitored]
        xdot_ok = np.all(
            np.abs(np.asarray(m["X_dot"]))
            <= np.asarray(m["xdot_bound"]) * (1.0 + 1e-12)
        )
        if self.eta0_unweighted > 0.0:
            max_eta_ratio = float(np.max(eta_unw, initial=0.0) / self.eta0_unweighted)
        else:
            max_eta_ratio = 0.0
        return {
            "contraction_held": bool(np.all(violations <= tol)),
            "max_violation": float(np.max(violations, initial=0.0)),
            "dissipation_inequality_held": bool(dissipation_excess <= tol),
            "dissipation_excess": dissipation_excess,
            "factor4_held": bool(np.all(eta_unw <= 4.0 * self.eta0_unweighted + tol)),
            "max_eta_ratio": max_eta_ratio,
            "Rmain_sign_profile": {
                "steps_monitored": int(np.sum(monitored)),
                "steps_positive": int(np.sum(r_monitored > 0.0)),
                "max_R_main": float(np.max(r_monitored)) if r_monitored.size else None,
            },
            "shift_bound_held": bool(xdot_ok),
            "final_X": float(m["X"][-1]) if len(m["X"]) else 0.0,
            "violation_tol": tol,
            "steps": int(len(t)),
            "dt": self.dt,
        }


def run(config: SolverConfig) -> RunResult:
    """Integrate PDE and shift ODE in lockstep, monitoring every step."""
    params = config.params
    stepper = _Stepper(params, config.grid, config.diffusion_mode, config.well_balanced)
    state = initial_state(params, config.grid, config.perturbation)

    dt = config.dt if config.dt is not None else stepper.stable_dt(state, config.cfl)
    n_steps = max(1, int(np.ceil(config.t_end / dt - 1e-12)))
    dt = config.t_end / n_steps

    shift_state = ShiftState()
    rep0 = evaluate_report(params, state, config.delta0, config.delta1, shift=0.0)
    eta0_unw = eta_unweighted(params, state, shift=0.0)

    columns = (
        "t", "X", "X_dot", "regime", "lab_shift", "eta_weighted", "Y", "I_bad",
        "I_good", "B_delta", "G_delta", "D", "R_main", "eta_unweighted",
        "violation", "balance_residual", "xdot_bound",
    )
    monitor: dict[str, list] = {k: [] for k in columns}
    reports: list = []
    report_rows: list = []
    states = [] if config.keep_states else None

    n = state.n.values.copy()
    q = state.q.values.copy()
    e_prev = rep0.eta_weighted
    t = 0.0

    for k in range(n_steps):
        current = State(n=GridField(config.grid, n), q=GridField(config.grid, q))
        rep = evaluate_report(params, current, config.delta0, config.delta1, shift=shift_state.X)
        xdot_now = phi_eps(rep.Y, params.eps) * (2.0 * abs(rep.I_bad) + 1.0)
        regime = phi_regime(rep.Y, params.eps)
        bound = (2.0 * abs(rep.I_bad) + 1.0) / params.eps**2

        new_shift = advance(shift_state, current, dt, params, substeps=config.shift_substeps)
        n, q = stepper.step(n, q, dt)
        _check_state(n, q, t=t + dt)
        new_state = State(n=GridField(config.grid, n), q=GridField(config.grid, q))

        e_new = eta_weighted(params, new_state, shift=new_shift.X)
        eta_unw = eta_unweighted(params, new_state, shift=new_shift.X)
        xdot_eff = (new_shift.X - shift_state.X) / dt
        residual = (e_new - e_prev) / dt - (xdot_eff * rep.Y + rep.I_bad - rep.I_good)
        violation = max(e_new - e_prev, 0.0)
        t = (k + 1) * dt

        monitor["t"].append(t)
        monitor["X"].append(new_shift.X)
        monitor["X_dot"].append(xdot_now)
        monitor["regime"].append(regime)
        monitor["lab_shift"].append(params.sigma * t - new_shift.X)
        monitor["eta_weighted"].append(e_new)
        monitor["Y"].append(rep.Y)
        monitor["I_bad"].append(rep.I_bad)
        monitor["I_good"].append(rep.I_good)
        monitor["B_delta"].append(rep.B_delta)
        monitor["G_delta"].append(rep.G_delta)
        monitor["D"].append(rep.D)
        monitor["R_main"].append(rep.R_main)
        monitor["eta_unweighted"].append(eta_unw)
        monitor["violation"].append(violation)
        monitor["balance_residual"].append(residual)
        monitor["xdot_bound"].append(bound)

        if (k + 1) % config.report_stride == 0 or k == n_steps - 1:
            step_report = evaluate_report(
                params, new_state, config.delta0, config.delta1, shift=new_shift.X
            )
            reports.append((t, step_report))
            report_rows.append(
                [t, new_shift.X, xdot_now, regime, params.sigma * t - new_shift.X]
                + step_report.to_row()
                + [eta_unw, violation, residual]
            )
            if states is not None:
                states.append((t, new_state))

        shift_state = new_shift
        e_prev = e_new

    out = {k: (np.asarray(v) if k != "regime" else list(v)) for k, v in monitor.items()}
    out["D0"] = rep0.D
    return RunResult(
        config=config,
        dt=dt,
        times=np.asarray(monitor["t"]),
        monitor=out,
        reports=reports,
        report_rows=report_rows,
        initial_state=state,
        final_state=State(n=GridField(config.grid, n), q=GridField(config.grid, q)),
        final_shift=shift_state,
        states=states,
        e0=rep0.eta_weighted,
        eta0_unweighted=eta0_unw,
    )


def reconstruct_concentration(q: GridField, c_ref: float) -> GridField:
    """Undo the log-gradient transform: c(xi) = c_ref exp(-int_{xi_min}^xi q).

    c_ref anchors the multiplicative constant at the left boundary.
    """
    if not c_ref > 0.0:
        raise ValueError("c_ref must be positive")
    antideriv = cumulative_trapezoid(q.values, dx=q.grid.dx, initial=0.0)
    return q.with_values(c_ref * np.exp(-antideriv))
