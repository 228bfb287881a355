"""Inverse of an activation along its gradient-ascent orbit.

Under gradient-descent-ascent each player's parameters stay on the
gradient-ascent orbit of its own activation through the initial point, and
the activation value is strictly monotone along that orbit.  A
:class:`ReparamMap` stores that orbit and maps an attainable value ``v`` back
to the unique parameter vector realising it.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

STATIONARY_TOL = 1e-12
RANGE_SHRINK = 1e-9
KNOT_SPACING = 1e-3


class IntegrationBlowupError(ArithmeticError):
    def __init__(self, message, last_time):
        super().__init__(message)
        self.last_time = last_time


class RangeError(ValueError):
    pass


@dataclass(frozen=True)
class FlowPath:
    """Two-sided gradient-flow path, ordered from the descent end to the ascent end."""

    times: np.ndarray
    thetas: np.ndarray
    values: np.ndarray


def _rk4_direction(field, theta0, sign, t_span, step, bound):
    ts, xs = [0.0], [theta0.copy()]
    x = theta0.copy()
    t = 0.0

    def rhs(y):
        return sign * field.grad(y)

    while t < t_span - 1e-15:
        g = field.grad(x)
        if np.linalg.norm(g) < STATIONARY_TOL or np.max(np.abs(x)) > bound:
            break
        h = min(step, t_span - t)
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x_new = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x_new)):
            raise IntegrationBlowupError(f"gradient flow blew up after t={t:g}", t)
        x, t = x_new, t + h
        ts.append(sign * t)
        xs.append(x.copy())
    return np.array(ts), np.array(xs)


def gradient_flow(field, theta0, t_span, step, bound=50.0):
    """Integrate ``dtheta/dt = +grad f`` forward and ``-grad f`` backward from ``theta0``.

    Each direction uses fixed-step RK4 and stops early once the gradient norm
    drops below 1e-12 or a coordinate leaves ``[-bound, bound]``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    tf, xf = _rk4_direction(field, theta0, +1.0, t_span, step, bound)
    tb, xb = _rk4_direction(field, theta0, -1.0, t_span, step, bound)
    times = np.concatenate([tb[::-1], tf[1:]])
    thetas = np.concatenate([xb[::-1], xf[1:]])
    return FlowPath(times, thetas, field.value(thetas))


def _tabulate(field, theta0, bound, max_time=1e4):
    """Adaptive RK4 path with adjacent values no more than KNOT_SPACING apart."""
    sides = []
    for sign in (-1.0, 1.0):
        x = theta0.copy()
        xs = [x.copy()]
        t = 0.0
        while t < max_time:
            g = field.grad(x)
            gn = float(np.linalg.norm(g))
            if gn < STATIONARY_TOL or np.max(np.abs(x)) > bound:
                break
            # df/dt = |g|^2, so this keeps each knot gap below the spacing target;
            # the curvature cap keeps RK4 well inside its stability region
            curv = float(np.max(np.abs(field.hess(x))))
            h = min(0.5 * KNOT_SPACING / gn**2, 0.02 / gn, 0.5 / max(curv, 1e-300))
            if gn**2 * h < 1e-16:
                break
            k1 = sign * g
            k2 = sign * field.grad(x + 0.5 * h * k1)
            k3 = sign * field.grad(x + 0.5 * h * k2)
            k4 = sign * field.grad(x + h * k3)
            x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
            xs.append(x.copy())
        sides.append(np.array(xs))
    thetas = np.concatenate([sides[0][::-1], sides[1][1:]])
    return thetas


@dataclass(frozen=True)
class ReparamMap:
    """Inverse of ``field`` along the ascent orbit through ``theta0``.

    ``range`` is the open interval of attainable values (``lo == hi`` when
    ``theta0`` is stationary).  Bijective families use the analytic inverse;
    others invert a tabulated orbit by monotone cubic interpolation followed
    by safeguarded Newton polishing.
    """

    field: object
    theta0: np.ndarray
    range: tuple
    analytic_inverse: bool
    table_values: Optional[np.ndarray] = None
    table_thetas: Optional[np.ndarray] = None

    @property
    def is_singleton(self):
        return self.range[0] == self.range[1]

    def contains(self, v, shrink=RANGE_SHRINK):
        lo, hi = self.range
        v = np.asarray(v, dtype=float)
        return (v > lo + shrink) & (v < hi - shrink)

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if self.is_singleton:
            if not np.all(v == self.range[0]):
                raise RangeError(f"value outside singleton range {self.range[0]!r}")
            return v
        lo, hi = self.range
        if np.any(v <= lo) or np.any(v >= hi):
            raise RangeError(f"value outside attainable range ({lo:.12g}, {hi:.12g})")
        return v

    def X(self, v):
        """Parameter vector(s) realising value(s) ``v``; shape ``v.shape + (dim,)``."""
        v = self._check(v)
        if self.is_singleton:
            return np.broadcast_to(self.theta0, v.shape + self.theta0.shape).copy()
        if self.analytic_inverse:
            return self.field.inverse(v)[..., None]
        return self._table_inverse(v)

    def grad_sq(self, v):
        """``|grad f(X(v))|^2``."""
        v = self._check(v)
        if self.analytic_inverse:
            return self.field.grad_sq_of_value(v)
        g = self.field.grad(self.X(v))
        return np.sum(g * g, axis=-1)

    def _table_inverse(self, v):
        vals, thetas = self.table_values, self.table_thetas
        flat = np.atleast_1d(v).ravel()
        guess = np.column_stack([PchipInterpolator(vals, thetas[:, k])(flat) for k in range(thetas.shape[1])])
        if thetas.shape[1] == 1:
            idx = np.clip(np.searchsorted(vals, flat) - 1, 0, len(vals) - 2)
            a = thetas[idx, 0].copy()
            b = thetas[idx + 1, 0].copy()
            lo_b, hi_b = np.minimum(a, b), np.maximum(a, b)
            x = np.clip(guess[:, 0], lo_b, hi_b)
            f = self.field._value
            df = self.field._deriv
            for _ in range(60):
                r = f(x) - flat
                # keep the bracket consistent with the sign of the residual
                incr = np.sign(df(0.5 * (lo_b + hi_b)))
                below = (r * incr) < 0
                lo_b = np.where(below, x, lo_b)
                hi_b = np.where(below, hi_b, x)
                d = df(x)
                with np.errstate(divide="ignore", invalid="ignore"):
                    xn = x - r / d
                bad = ~np.isfinite(xn) | (xn <= lo_b) | (xn >= hi_b)
                xn = np.where(bad, 0.5 * (lo_b + hi_b), xn)
                if np.all(np.abs(xn - x) <= 1e-15 * (1 + np.abs(x))):
                    x = xn
                    break
                x = xn
            guess = x[:, None]
        return guess.reshape(np.shape(v) + (thetas.shape[1],))


def build_reparam(field, theta0, bound=50.0):
    """Construct the :class:`ReparamMap` of ``field`` through ``theta0``."""
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    if np.linalg.norm(field.grad(theta0)) < STATIONARY_TOL:
        v0 = float(field.value(theta0))
        return ReparamMap(field, theta0, (v0, v0), False)
    if field.bijective:
        lo, hi = field.value_range
        return ReparamMap(field, theta0, (lo, hi), True)
    thetas = _tabulate(field, theta0, bound)
    vals = field.value(thetas)
    keep = np.concatenate([[True], vals[1:] > np.maximum.accumulate(vals)[:-1]])
    vals, thetas = vals[keep], thetas[keep]
    return ReparamMap(field, theta0, (float(vals[0]), float(vals[-1])), False, vals, thetas)


def _coordinate_problem(m, target, name, sym):
    if np.linalg.norm(m.field.grad(m.theta0)) <= STATIONARY_TOL:
        return f"unsafe: {name} initialization is a stationary point"
    if not m.contains(target):
        lo, hi = m.range
        return f"unsafe: {sym} outside {name}-range ({lo:.6g}, {hi:.6g})"
    return None


def is_safe(fmap, gmap, p, q):
    """Safety of an initialization: ``(ok, reason)``.

    Both initial parameters must be non-stationary and the equilibrium values
    ``p``, ``q`` must lie strictly inside the attainable ranges (shrunk by
    1e-9 so that supremum values are never certified).
    """
    return is_safe_multi([fmap], [gmap], [p], [q], single=True)


def is_safe_multi(fmaps, gmaps, p, q, single=False):
    checks = [(m, t, "f", "p", i) for i, (m, t) in enumerate(zip(fmaps, p))]
    checks += [(m, t, "g", "q", j) for j, (m, t) in enumerate(zip(gmaps, q))]
    for m, target, name, sym, k in checks:
        if not single:
            name, sym = f"{name}_{k + 1}", f"{sym}_{k + 1}"
        problem = _coordinate_problem(m, target, name, sym)
        if problem:
            return False, problem
    return True, "safe"
