"""Qualitative diagnostics of GDA trajectories.

Periods and recurrence returns, running time averages, fixed-point
linearisation, the bump-activation construction of stable non-Nash fixed
points, and the energy audit of discrete GDA.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .activation import ScalarField
from .conservation import ENDPOINT_GUARD, energy_of_states
from .dynamics import HiddenSystem2x2, dgda
from .game import game_from_equilibrium
from .linalg import jacobi_eigenvalues


class NotAFixedPointError(ValueError):
    pass


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class ReturnEvent:
    t_return: float
    distance: float
    raw_distance: Optional[float] = None


@dataclass(frozen=True)
class Period:
    period: float
    distance: float


@dataclass(frozen=True)
class FixedPointReport:
    location: np.ndarray
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    classification: str
    is_nash_consistent: bool
    mode: str = "continuous"
    alpha: Optional[float] = None

    @property
    def stable(self):
        return self.classification == "stable"


def time_average(times, values):
    """Running averages ``(1/t) int_0^t values dt`` (trapezoid rule) and the final one.

    ``values`` has shape ``(n, ...)``; the running average at ``t = 0`` is the
    first sample.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = np.diff(times).reshape((-1,) + (1,) * (values.ndim - 1))
    increments = 0.5 * dt * (values[1:] + values[:-1])
    cumulative = np.concatenate([np.zeros((1,) + values.shape[1:]), np.cumsum(increments, axis=0)])
    elapsed = (times - times[0]).reshape((-1,) + (1,) * (values.ndim - 1))
    with np.errstate(invalid="ignore", divide="ignore"):
        running = np.where(elapsed > 0, cumulative / np.where(elapsed > 0, elapsed, 1.0), values[0])
    return running, running[-1]


def window_average(times, values, t_end):
    """Average of ``values`` over ``[times[0], t_end]`` from a cubic-spline fit."""
    spline = CubicSpline(times, values, axis=0)
    return spline.integrate(times[0], t_end) / (t_end - times[0])


def _refine_minimum(times, states, ref, m):
    n = len(times)
    lo, hi = max(0, m - 3), min(n, m + 4)
    if hi - lo < 4:
        return float(times[m]), float(np.linalg.norm(states[m] - ref))
    spline = CubicSpline(times[lo:hi], states[lo:hi], axis=0)
    deriv = spline.derivative()

    def slope(t):
        return float(np.dot(spline(t) - ref, deriv(t)))

    a, b = times[max(lo, m - 1)], times[min(hi - 1, m + 1)]
    sa, sb = slope(a), slope(b)
    if sa < 0 < sb:
        for _ in range(80):
            c = 0.5 * (a + b)
            if slope(c) < 0:
                a = c
            else:
                b = c
        t_star = 0.5 * (a + b)
    else:
        t_star = float(times[m])
    return float(t_star), float(np.linalg.norm(spline(t_star) - ref))


def _distances(states, ref):
    states = np.asarray(states, dtype=float)
    return np.linalg.norm(states.reshape(len(states), -1) - np.ravel(ref), axis=1)


def detect_period(times, states, eps):
    """First return of a trajectory to the ``eps``-ball around its initial state.

    The trajectory must first leave the ``2 eps``-ball; the return time is
    refined to the minimum of the distance using a local cubic spline.
    Returns ``None`` for stationary trajectories or when no return happens
    within the horizon.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float).reshape(len(times), -1)
    ref = states[0]
    d = _distances(states, ref)
    left = np.nonzero(d > 2 * eps)[0]
    if left.size == 0:
        return None
    # a sampled minimum can sit up to about one sample spacing above the true one
    spacing = np.linalg.norm(np.diff(states, axis=0), axis=1)
    for m in range(left[0] + 1, len(d) - 1):
        if d[m] <= d[m - 1] and d[m] <= d[m + 1] and d[m] <= 2 * eps + max(spacing[m - 1], spacing[m]):
            t_star, dist = _refine_minimum(times, states, ref, m)
            if dist <= eps:
                return Period(t_star, dist)
    return None


def state_at(times, states, t):
    """Cubic-spline interpolation of the trajectory at time ``t``."""
    return CubicSpline(times, np.asarray(states, dtype=float), axis=0)(t)


def recurrence_stats(times, states, eps, warmup=0.0, raw_states=None):
    """Returns to the initial state after ``warmup``.

    Every local minimum of the distance to ``states[0]`` that is at most
    ``eps`` counts, provided the distance rose above ``2 eps`` since the
    previous counted return.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    times = np.asarray(times, dtype=float)
    d = _distances(states, np.asarray(states)[0])
    raw = None if raw_states is None else _distances(raw_states, np.asarray(raw_states)[0])
    events = []
    armed = False
    for m in range(1, len(d) - 1):
        if d[m] > 2 * eps:
            armed = True
        if times[m] <= warmup or not armed:
            continue
        if d[m] <= eps and d[m] <= d[m - 1] and d[m] <= d[m + 1]:
            events.append(ReturnEvent(float(times[m]), float(d[m]), None if raw is None else float(raw[m])))
            armed = False
    return events


def numerical_jacobian(field, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    n = x.size
    shifts = np.eye(n) * h
    return ((field(x[None, :] + shifts) - field(x[None, :] - shifts)) / (2 * h)).T


def _classify(eigs, mode, tol=1e-9):
    if mode == "discrete":
        mod = np.abs(eigs)
        if np.all(mod < 1 - tol):
            return "stable"
        if np.all(mod > 1 + tol):
            return "unstable"
        if np.all(np.abs(mod - 1) <= tol):
            return "center-like"
        return "saddle"
    re = np.real(eigs)
    if np.all(re < -tol):
        return "stable"
    if np.all(re > tol):
        return "unstable"
    if np.all(np.abs(re) <= tol):
        return "center-like"
    return "saddle"


def fixed_point_report(sys, x, mode="continuous", alpha=None, residual_tol=1e-8):
    """Linearisation of ``sys`` at the fixed point ``x``.

    At a 2x2 fixed point where both activations are stationary the Jacobian is
    block diagonal, ``-v (g - q) hess f`` and ``v (f - p) hess g``, and its
    eigenvalues come from Jacobi rotations.  Elsewhere a central-difference
    Jacobian is used.  ``mode="discrete"`` reports ``I + alpha J`` instead.
    """
    x = np.asarray(x, dtype=float)
    residual = float(np.linalg.norm(sys.field(x)))
    if residual > residual_tol:
        raise NotAFixedPointError(f"field residual {residual:.3e} exceeds {residual_tol:g}")
    if mode not in ("continuous", "discrete"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "discrete" and not (alpha is not None and alpha > 0):
        raise ValueError("discrete mode needs a positive learning rate alpha")

    fv, gv = sys.activations(x)
    if isinstance(sys, HiddenSystem2x2):
        th, ph = x[0:1], x[1:2]
        stationary = (np.linalg.norm(sys.f.grad(th)) <= residual_tol
                      and np.linalg.norm(sys.g.grad(ph)) <= residual_tol)
        nash = abs(float(fv[0]) - sys.p) <= 1e-8 and abs(float(gv[0]) - sys.q) <= 1e-8
    else:
        stationary = False
        nash = bool(np.all(np.abs(fv - sys.p) <= 1e-8) and np.all(np.abs(gv - sys.q) <= 1e-8))

    if stationary:
        v = sys.v
        top = -v * (float(gv[0]) - sys.q) * sys.f.hess(th)
        bottom = v * (float(fv[0]) - sys.p) * sys.g.hess(ph)
        jac = np.zeros((2, 2))
        jac[:1, :1] = top
        jac[1:, 1:] = bottom
        eigs = jacobi_eigenvalues(jac).astype(complex)
    else:
        jac = numerical_jacobian(sys.field, x)
        eigs = np.linalg.eigvals(jac)

    if mode == "discrete":
        jac = np.eye(len(x)) + alpha * jac
        eigs = 1.0 + alpha * eigs
    eigs = np.real_if_close(eigs)
    return FixedPointReport(x, jac, eigs, _classify(eigs, mode), nash, mode, alpha)


@dataclass(frozen=True)
class SpuriousSetup:
    system: HiddenSystem2x2
    fixed_point: np.ndarray
    seed: np.ndarray


def build_spurious_system(p, q, v_sign=1, margin=0.1, curvature=0.5, v_magnitude=4.0,
                          perturbation=0.05, margin_f=None, margin_g=None):
    """2x2 system whose bump activations create a stable fixed point away from ``(p, q)``.

    For ``v > 0`` the min player gets a local minimum of value ``p - margin``
    and the max player one of value ``q + margin`` (reversed for ``v < 0``);
    both at parameter 0 with curvature ``2 * curvature``.
    """
    if not (0 < p < 1 and 0 < q < 1):
        raise ConstructionError("p and q must lie in (0, 1)")
    if v_sign == 0:
        raise ConstructionError("v_sign must be nonzero")
    mf = margin if margin_f is None else margin_f
    mg = margin if margin_g is None else margin_g
    sign = 1.0 if v_sign > 0 else -1.0
    A = p - sign * mf
    C = q + sign * mg
    if not (0 < A < 1 and 0 < C < 1):
        raise ConstructionError(
            f"infeasible margins: local minima values f*={A:.3g}, g*={C:.3g} must lie in (0, 1); "
            f"reduce the margins (p={p}, q={q})"
        )
    e = np.exp(1.0)
    B = min(curvature, (1.0 - A) * e)
    D = min(curvature, (1.0 - C) * e)
    system = HiddenSystem2x2(ScalarField.make_bump(A, B), ScalarField.make_bump(C, D),
                             game_from_equilibrium(p, q, sign * v_magnitude))
    fixed = np.zeros(2)
    report = fixed_point_report(system, fixed)
    if not report.stable:
        raise ConstructionError(f"constructed fixed point is {report.classification}, not stable")
    return SpuriousSetup(system, fixed, fixed + perturbation)


def disk_perturbations(rng, n, radius, dim=2):
    """``n`` points uniform in the ``dim``-ball of the given radius."""
    out = np.empty((n, dim))
    for k in range(n):
        while True:
            z = np.array([2.0 * rng.uniform() - 1.0 for _ in range(dim)])
            if np.dot(z, z) <= 1.0:
                break
        out[k] = radius * z
    return out


@dataclass(frozen=True)
class EnergyAudit:
    H: np.ndarray
    min_diff: float
    steps_done: int
    truncated: bool
    report: str


def discrete_energy_audit(sys, ctx, x0, alpha, steps):
    """Run discrete GDA from ``x0`` and track the continuous-time energy.

    The audit stops early (``truncated=True``) if an iterate comes within the
    quadrature guard of an attainable-range endpoint.
    """
    fields = tuple(sys.f_fields) + tuple(sys.g_fields)
    if any(f.family != "sigmoid" for f in fields):
        raise ValueError("the discrete energy audit needs sigmoid activations")
    xs = dgda(sys, np.asarray(x0, dtype=float), alpha, steps)
    fv, gv = sys.activations(xs)
    vals = np.concatenate([fv, gv], axis=-1)
    ok = np.ones(len(xs), dtype=bool)
    for k, (m, _) in enumerate(ctx.coords):
        lo, hi = m.range
        ok &= (vals[:, k] > lo + ENDPOINT_GUARD) & (vals[:, k] < hi - ENDPOINT_GUARD)
    bad = np.nonzero(~ok)[0]
    n_ok = len(xs) if bad.size == 0 else int(bad[0])
    if n_ok == 0:
        raise ValueError("initial state lies outside the quadrature-safe region")
    H = np.asarray(energy_of_states(ctx, sys, xs[:n_ok]), dtype=float)
    diffs = np.diff(H)
    min_diff = float(diffs.min()) if diffs.size else 0.0
    truncated = n_ok < len(xs)
    report = (f"truncated at step {n_ok}: iterate left the quadrature-safe region" if truncated
              else f"completed {steps} steps")
    return EnergyAudit(H, min_diff, n_ok - 1, truncated, report)
