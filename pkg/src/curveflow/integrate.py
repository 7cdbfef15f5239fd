"""Adaptive integration of the length dynamics, events and outcomes.

The length ODE dL/dt = L - 2*pi*H is solved with an embedded
Dormand-Prince 5(4) pair; each accepted step carries the standard
quartic dense-output interpolant, which event location bisects to a
time tolerance of 1e-10. At every sampled instant the full curve state
is reconstituted from the propagated initial deviation.

Termination events are threshold crossings (min radius of curvature,
length blow-up / vanish, area vanish); the analytic maximal existence
time is replaced by the first crossing of the configured thresholds,
with the thresholds recorded in the controls. Outcomes classify how a
finished trajectory behaved: convergence to a circle (with its limit
center), a curvature singularity, or one of the degenerate length/area
scenarios.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import heat
from .flows import (
    FlowState,
    HDomainError,
    NonlocalTerm,
    area_along_flow,
    flow_state,
    length_rate,
)
from .support import (
    CONVEXITY_EPS,
    TWO_PI,
    ConvexityError,
    SupportSpectrum,
    curve_length,
    default_validation_grid,
    radius_extrema,
    theta_grid,
    validate_convexity,
)

EVENT_HORIZON = "reached-horizon"
EVENT_SINGULARITY = "singularity"
EVENT_LENGTH_BLOWUP = "length-blowup"
EVENT_LENGTH_VANISH = "length-vanish"
EVENT_AREA_VANISH = "area-vanish"
EVENT_H_DOMAIN_EXIT = "h-domain-exit"
EVENT_STEP_COLLAPSE = "step-collapse"

# Event location: bisection width on time.
EVENT_TIME_TOL = 1e-10
# Internal cap on the step size so threshold crossings are scanned at
# least this finely even when the controller wants huge steps.
MAX_STEP = 0.25
MIN_STEP = 1e-14


@dataclass(frozen=True)
class IntegratorControls:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    t_max: float = 50.0
    length_blowup: float = 1e12
    length_vanish: float = 1e-12
    area_vanish: float = 1e-12
    singularity_eps: float = 1e-9
    sample_interval: float = 0.05

    def __post_init__(self):
        for name in (
            "rel_tol",
            "abs_tol",
            "t_max",
            "length_blowup",
            "length_vanish",
            "area_vanish",
            "singularity_eps",
            "sample_interval",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.rel_tol >= 1.0:
            raise ValueError("rel_tol must be below 1")


@dataclass(frozen=True)
class TerminationEvent:
    kind: str
    t: float
    theta: float | None = None


@dataclass(frozen=True)
class ConvergesToCircle:
    center: tuple[float, float]
    limit_length: float


@dataclass(frozen=True)
class CurvatureSingularity:
    t_star: float
    theta_star: float


@dataclass(frozen=True)
class LengthBlowupRescaledCircle:
    t_max: float


@dataclass(frozen=True)
class LengthVanishesSingularityForced:
    t_max: float


@dataclass(frozen=True)
class AreaVanishesCurvatureBlowup:
    t_max: float
    limit_length: float


@dataclass(frozen=True)
class Undetermined:
    diagnostic: str


Outcome = Union[
    ConvergesToCircle,
    CurvatureSingularity,
    LengthBlowupRescaledCircle,
    LengthVanishesSingularityForced,
    AreaVanishesCurvatureBlowup,
    Undetermined,
]


@dataclass(frozen=True)
class Trajectory:
    states: tuple[FlowState, ...]
    event: TerminationEvent
    outcome: Outcome

    def __post_init__(self):
        if not self.states:
            raise ValueError("trajectory needs at least one state")
        ts = [s.t for s in self.states]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("trajectory states must be strictly increasing in time")
        if self.event.t < ts[-1] - 1e-12:
            raise ValueError("event time precedes the last recorded state")
        object.__setattr__(self, "states", tuple(self.states))


# Dormand-Prince 5(4) tableau; order-5 propagated solution, FSAL.
_C = (0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0)
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
_D1, _D3, _D4, _D5, _D6, _D7 = (
    -12715105075.0 / 11282082432.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
)


@dataclass(frozen=True)
class _DenseSegment:
    """Quartic interpolant of one accepted step on [t0, t0 + h]."""

    t0: float
    h: float
    r1: float
    r2: float
    r3: float
    r4: float
    r5: float

    def __call__(self, t: float) -> float:
        s = (t - self.t0) / self.h
        return self.r1 + s * (self.r2 + (1.0 - s) * (self.r3 + s * (self.r4 + (1.0 - s) * self.r5)))


def _dopri_step(f, t, y, h, k1):
    k2 = f(t + _C[0] * h, y + h * (_A21 * k1))
    k3 = f(t + _C[1] * h, y + h * (_A31 * k1 + _A32 * k2))
    k4 = f(t + _C[2] * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
    k5 = f(t + _C[3] * h, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
    k6 = f(t + h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
    y5 = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
    k7 = f(t + h, y5)
    err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
    dense = _DenseSegment(
        t0=t,
        h=h,
        r1=y,
        r2=y5 - y,
        r3=h * k1 - (y5 - y),
        r4=(y5 - y) - h * k7 - (h * k1 - (y5 - y)),
        r5=h * (_D1 * k1 + _D3 * k3 + _D4 * k4 + _D5 * k5 + _D6 * k6 + _D7 * k7),
    )
    return y5, err, k7, dense


class _RhoGrid:
    """Grid values of the radius-of-curvature deviation through time.

    rho(theta, t) = L(t)/(2*pi) + sum (1-n^2) d_n(t) * harmonics, where
    d_n(t) are the propagated deviation coefficients. The harmonic
    matrices are weighted once; each time query is a matrix-vector
    product against the mode decay factors.
    """

    def __init__(self, spec0: SupportSpectrum, grid_size: int | None = None):
        dev0 = heat.deviation_of(spec0)
        if grid_size is None:
            grid_size = default_validation_grid(dev0.truncation)
        n = np.arange(1, dev0.truncation + 1, dtype=float)
        self.decay = 1.0 - n**2
        self.thetas = theta_grid(grid_size)
        ang = np.outer(self.thetas, n)
        self._cos = np.cos(ang) * self.decay
        self._sin = np.sin(ang) * self.decay
        self._a0 = dev0.cos_coeffs
        self._b0 = dev0.sin_coeffs

    def deviation(self, t: float) -> np.ndarray:
        factors = np.exp(self.decay * t)
        return self._cos @ (self._a0 * factors) + self._sin @ (self._b0 * factors)

    def min_deviation(self, t: float) -> float:
        return float(np.min(self.deviation(t)))

    def argmin_theta(self, t: float) -> float:
        vals = self.deviation(t)
        return float(self.thetas[int(np.argmin(vals))] % TWO_PI)


_EVENT_PRIORITY = (
    EVENT_SINGULARITY,
    EVENT_AREA_VANISH,
    EVENT_LENGTH_VANISH,
    EVENT_LENGTH_BLOWUP,
)


class _Problem:
    def __init__(self, spec0: SupportSpectrum, term: NonlocalTerm, controls: IntegratorControls):
        self.spec0 = spec0
        self.term = term
        self.controls = controls
        self.rho_grid = _RhoGrid(spec0)

    def state(self, t: float, length: float) -> FlowState:
        return flow_state(self.spec0, t, length)

    def rhs(self, t: float, length: float) -> float:
        # H lives on (0, inf) x (0, inf); trial stages poking L <= 0 are
        # domain exits, which the step controller treats as rejections.
        if length <= 0.0:
            raise HDomainError(f"nonpositive length {length:.3e}")
        return length_rate(self.term, self.state(t, length))

    def event_values(self, t: float, length: float) -> dict[str, float]:
        # No FlowState here: event bisection may probe lengths at or
        # below the vanish threshold where states are unconstructible.
        c = self.controls
        return {
            EVENT_SINGULARITY: length / TWO_PI
            + self.rho_grid.min_deviation(t)
            - c.singularity_eps,
            EVENT_AREA_VANISH: area_along_flow(self.spec0, length, t) - c.area_vanish,
            EVENT_LENGTH_VANISH: length - c.length_vanish,
            EVENT_LENGTH_BLOWUP: c.length_blowup - length,
        }


def _bisect_event(g: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    """Shrink [lo, hi] with g(lo) > 0 >= g(hi) to EVENT_TIME_TOL width."""
    while hi - lo > EVENT_TIME_TOL:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _limit_center(spec0: SupportSpectrum) -> tuple[float, float]:
    # First-harmonic coefficients; invariant under the propagation.
    return float(spec0.cos_coeffs[0]), float(spec0.sin_coeffs[0])


def _classify(states: tuple[FlowState, ...], event: TerminationEvent) -> Outcome:
    spec0 = states[0].spectrum
    if event.kind == EVENT_HORIZON:
        return ConvergesToCircle(center=_limit_center(spec0), limit_length=states[-1].L)
    if event.kind == EVENT_SINGULARITY:
        return CurvatureSingularity(t_star=event.t, theta_star=event.theta)
    if event.kind == EVENT_LENGTH_BLOWUP:
        return LengthBlowupRescaledCircle(t_max=event.t)
    if event.kind == EVENT_LENGTH_VANISH:
        return LengthVanishesSingularityForced(t_max=event.t)
    if event.kind == EVENT_AREA_VANISH:
        return AreaVanishesCurvatureBlowup(t_max=event.t, limit_length=states[-1].L)
    if event.kind == EVENT_H_DOMAIN_EXIT:
        return Undetermined(diagnostic=f"H left its domain near t={event.t:.6g}")
    if event.kind == EVENT_STEP_COLLAPSE:
        return Undetermined(diagnostic=f"step size collapsed near t={event.t:.6g}")
    raise ValueError(f"unknown event kind {event.kind!r}")


def classify(traj: Trajectory) -> Outcome:
    """Recompute the outcome of a finished trajectory from its event."""
    return _classify(traj.states, traj.event)


def integrate(
    spec0: SupportSpectrum,
    term: NonlocalTerm,
    controls: IntegratorControls | None = None,
) -> Trajectory:
    """Run the flow from the given initial spectrum until an event.

    The initial spectrum must pass convexity validation. Sampled states
    land on multiples of ``sample_interval`` plus the final event time.
    """
    if controls is None:
        controls = IntegratorControls()
    rho0 = validate_convexity(spec0)
    if rho0 <= CONVEXITY_EPS:
        raise ConvexityError(
            f"initial curve fails convexity validation: min radius {rho0:.3e}"
        )

    problem = _Problem(spec0, term, controls)
    t = 0.0
    length = curve_length(spec0)
    states = [problem.state(t, length)]

    def finish(event: TerminationEvent) -> Trajectory:
        return Trajectory(states=tuple(states), event=event, outcome=_classify(tuple(states), event))

    g0 = problem.event_values(t, length)
    immediate = [k for k in _EVENT_PRIORITY if g0[k] <= 0.0]
    if immediate:
        kind = immediate[0]
        theta = problem.rho_grid.argmin_theta(0.0) if kind == EVENT_SINGULARITY else None
        return finish(TerminationEvent(kind=kind, t=0.0, theta=theta))

    k1 = problem.rhs(t, length)
    h = min(1e-3, controls.t_max)
    sample_idx = 1

    while t < controls.t_max - 1e-13:
        h = min(h, MAX_STEP, controls.t_max - t)
        domain_fail = False
        try:
            y5, err, k7, dense = _dopri_step(problem.rhs, t, length, h, k1)
        except HDomainError:
            domain_fail = True
            y5 = err = k7 = dense = None
        if domain_fail or not np.isfinite(y5):
            h *= 0.25
            if h < MIN_STEP:
                kind = EVENT_H_DOMAIN_EXIT if domain_fail else EVENT_STEP_COLLAPSE
                return finish(TerminationEvent(kind=kind, t=t))
            continue
        scale = controls.abs_tol + controls.rel_tol * max(abs(length), abs(y5))
        err_norm = abs(err) / scale
        if not err_norm <= 1.0:  # rejects NaN estimates too
            h = max(h * max(0.2, 0.9 * err_norm**-0.2), MIN_STEP * 0.5)
            if h < MIN_STEP:
                return finish(TerminationEvent(kind=EVENT_STEP_COLLAPSE, t=t))
            continue

        t1 = t + h
        if controls.t_max - t1 < 1e-13:
            t1 = controls.t_max

        # Check points: sample times inside the step, then the endpoint.
        check_points: list[tuple[float, bool]] = []
        while True:
            s = sample_idx * controls.sample_interval
            if s > t1 - 1e-12:
                break
            check_points.append((s, True))
            sample_idx += 1
        endpoint_is_sample = abs(sample_idx * controls.sample_interval - t1) <= 1e-12
        if endpoint_is_sample:
            sample_idx += 1
        check_points.append((t1, endpoint_is_sample))

        prev_t = t
        event_hit = None
        for tc, is_sample in check_points:
            lc = y5 if tc == t1 else dense(tc)
            g_now = problem.event_values(tc, lc)
            fired = [k for k in _EVENT_PRIORITY if g_now[k] <= 0.0]
            if fired:
                located = []
                for kind in fired:
                    g_fn = lambda tau, kind=kind: problem.event_values(tau, dense(tau))[kind]
                    lo, hi = _bisect_event(g_fn, prev_t, tc)
                    located.append((hi, _EVENT_PRIORITY.index(kind), kind, lo))
                located.sort()
                t_event, _, kind, t_before = located[0]
                if t_before > states[-1].t + 1e-12:
                    states.append(problem.state(t_before, dense(t_before)))
                theta = (
                    problem.rho_grid.argmin_theta(t_event)
                    if kind == EVENT_SINGULARITY
                    else None
                )
                event_hit = TerminationEvent(kind=kind, t=t_event, theta=theta)
                break
            if is_sample:
                states.append(problem.state(tc, lc))
            prev_t = tc
        if event_hit is not None:
            return finish(event_hit)

        t, length, k1 = t1, y5, k7
        if err_norm == 0.0:
            h *= 5.0
        else:
            h *= min(5.0, max(0.2, 0.9 * err_norm**-0.2))

    if states[-1].t < controls.t_max - 1e-12:
        states.append(problem.state(controls.t_max, length))
    return finish(TerminationEvent(kind=EVENT_HORIZON, t=controls.t_max))


def detect_singularity(
    spec0: SupportSpectrum,
    length_path: Callable[[float], float],
    horizon: float,
    *,
    singularity_eps: float = 1e-9,
    grid_size: int | None = None,
    time_samples: int = 4096,
) -> tuple[float, float] | None:
    """First time the grid-min radius of curvature drops to the threshold.

    ``length_path`` supplies L(t) on [0, horizon] (for example a solved
    or closed-form length). The scan uses ``time_samples`` uniform times
    refined by bisection; returns (t*, theta*) or None.
    """
    rho_grid = _RhoGrid(spec0, grid_size)

    def g(tau: float) -> float:
        return length_path(tau) / TWO_PI + rho_grid.min_deviation(tau) - singularity_eps

    ts = np.linspace(0.0, horizon, time_samples + 1)
    if g(0.0) <= 0.0:
        return 0.0, rho_grid.argmin_theta(0.0)
    for i in range(1, len(ts)):
        if g(float(ts[i])) <= 0.0:
            _, hi = _bisect_event(g, float(ts[i - 1]), float(ts[i]))
            return hi, rho_grid.argmin_theta(hi)
    return None


def rescaled_support(state: FlowState) -> SupportSpectrum:
    """Spectrum of the curve rescaled to length 2*pi; the mean becomes 1."""
    if state.L <= 0.0:
        raise ValueError("rescaling requires positive length")
    factor = TWO_PI / state.L
    return SupportSpectrum(
        mean=state.spectrum.mean * factor,
        cos_coeffs=state.spectrum.cos_coeffs * factor,
        sin_coeffs=state.spectrum.sin_coeffs * factor,
    )


def _json_num(x: float):
    return float(x) if np.isfinite(x) else None


def state_record(state: FlowState) -> dict:
    """Scalar record of one state, used for JSONL export and the CLI."""
    ipd = state.L**2 - 4.0 * np.pi * state.A
    ipr = state.L**2 / (4.0 * np.pi * state.A) if state.A > 0 else float("inf")
    rho_min, rho_max = radius_extrema(state.spectrum)
    k_min = 1.0 / rho_max if rho_max > 0.0 else float("nan")
    k_max = 1.0 / rho_min if rho_min > 0.0 else float("nan")
    return {
        "t": state.t,
        "L": state.L,
        "A": state.A,
        "ipd": ipd,
        "ipr": _json_num(ipr),
        "k_min": _json_num(k_min),
        "k_max": _json_num(k_max),
    }


def outcome_record(outcome: Outcome) -> dict:
    if isinstance(outcome, ConvergesToCircle):
        return {
            "kind": "converges-to-circle",
            "center": list(outcome.center),
            "limit_length": outcome.limit_length,
        }
    if isinstance(outcome, CurvatureSingularity):
        return {
            "kind": "curvature-singularity",
            "t_star": outcome.t_star,
            "theta_star": outcome.theta_star,
        }
    if isinstance(outcome, LengthBlowupRescaledCircle):
        return {"kind": "length-blowup-rescaled-circle", "t_max": outcome.t_max}
    if isinstance(outcome, LengthVanishesSingularityForced):
        return {"kind": "length-vanishes-singularity-forced", "t_max": outcome.t_max}
    if isinstance(outcome, AreaVanishesCurvatureBlowup):
        return {
            "kind": "area-vanishes-curvature-blowup",
            "t_max": outcome.t_max,
            "limit_length": outcome.limit_length,
        }
    if isinstance(outcome, Undetermined):
        return {"kind": "undetermined", "diagnostic": outcome.diagnostic}
    raise TypeError(f"not an outcome: {outcome!r}")


def describe_outcome(outcome: Outcome) -> str:
    if isinstance(outcome, ConvergesToCircle):
        cx, cy = outcome.center
        return (
            f"ConvergesToCircle center=({cx:.6g}, {cy:.6g}) "
            f"limit_L={outcome.limit_length:.6g}"
        )
    if isinstance(outcome, CurvatureSingularity):
        return f"CurvatureSingularity t*={outcome.t_star:.6g} theta*={outcome.theta_star:.6g}"
    if isinstance(outcome, LengthBlowupRescaledCircle):
        return f"LengthBlowupRescaledCircle T_max={outcome.t_max:.6g}"
    if isinstance(outcome, LengthVanishesSingularityForced):
        return f"LengthVanishesSingularityForced T_max={outcome.t_max:.6g}"
    if isinstance(outcome, AreaVanishesCurvatureBlowup):
        return (
            f"AreaVanishesCurvatureBlowup T_max={outcome.t_max:.6g} "
            f"limit_L={outcome.limit_length:.6g}"
        )
    if isinstance(outcome, Undetermined):
        return f"Undetermined ({outcome.diagnostic})"
    raise TypeError(f"not an outcome: {outcome!r}")


def trajectory_lines(traj: Trajectory) -> list[str]:
    """JSONL lines: one scalar record per state plus a trailing summary."""
    lines = [json.dumps(state_record(s)) for s in traj.states]
    summary = {
        "event": {"kind": traj.event.kind, "t": traj.event.t, "theta": traj.event.theta},
        "outcome": outcome_record(traj.outcome),
    }
    lines.append(json.dumps(summary))
    return lines


def write_trajectory_jsonl(traj: Trajectory, path) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(trajectory_lines(traj)) + "\n")
