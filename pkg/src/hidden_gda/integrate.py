"""ODE integrators used for every continuous-time experiment.

``integrate`` advances ``dx/dt = field(x)`` where ``x`` may carry leading
batch axes (one row per initial condition); all rows share the time grid.
Two methods are available: classical fixed-step RK4 and the adaptive
Dormand-Prince 5(4) pair with its free 4th-order dense output, so that
samples land exactly on the requested cadence without shortening steps.
"""

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np


class IntegrationError(ArithmeticError):
    """Numerical failure.  ``partial`` holds the samples taken so far."""

    def __init__(self, message, last_time, partial=None):
        super().__init__(message)
        self.last_time = last_time
        self.partial = partial


class BlowupError(IntegrationError):
    pass


class StiffnessError(IntegrationError):
    pass


@dataclass(frozen=True)
class RK4:
    step: float = 1e-3

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"rk4 step must be positive, got {self.step}")


@dataclass(frozen=True)
class RK45:
    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = np.inf
    min_step: float = 1e-12

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rk45 tolerances must be positive")


@dataclass
class Trajectory:
    """Time-stamped states (``states[k]`` has the shape of ``x0``) plus observables."""

    times: np.ndarray
    states: np.ndarray
    observables: dict = dc_field(default_factory=dict)
    truncated: bool = False
    note: str = ""

    def __len__(self):
        return len(self.times)

    def select(self, index):
        """Trajectory of one batch row (states of shape ``(n, batch, d)``)."""
        obs = {k: v[:, index] if np.ndim(v) > 1 else v for k, v in self.observables.items()}
        return Trajectory(self.times, self.states[:, index], obs, self.truncated, self.note)


# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4
# dense-output polynomial coefficients: y(t + s h) = y + h * sum_i k_i * (P[i] @ [s, s^2, s^3, s^4])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


def rk4_step(field, x, h):
    k1 = field(x)
    k2 = field(x + 0.5 * h * k1)
    k3 = field(x + 0.5 * h * k2)
    k4 = field(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _partial(times, states):
    return Trajectory(np.array(times), np.array(states), truncated=True)


def _integrate_rk4(field, x0, T, method, sample_every):
    h = method.step
    n_steps = int(np.ceil(T / h - 1e-9))
    stride = 1 if sample_every is None else max(1, int(round(sample_every / h)))
    x = x0.copy()
    times, states = [0.0], [x.copy()]
    for k in range(1, n_steps + 1):
        t_prev = (k - 1) * h
        step = min(h, T - t_prev)
        x_new = rk4_step(field, x, step)
        if not np.all(np.isfinite(x_new)):
            raise BlowupError(f"state became non-finite after t={t_prev:g}", t_prev, _partial(times, states))
        x = x_new
        if k % stride == 0 or k == n_steps:
            times.append(min(k * h, T))
            states.append(x.copy())
    return Trajectory(np.array(times), np.array(states))


def _initial_step(field, x0, f0, rtol, atol):
    # huge fields overflow these norms; the resulting inf/nan steps are then
    # rejected by the main loop, which reports the failure
    with np.errstate(over="ignore", invalid="ignore"):
        scale = atol + rtol * np.abs(x0)
        d0 = np.sqrt(np.mean((x0 / scale) ** 2))
        d1 = np.sqrt(np.mean((f0 / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        f1 = field(x0 + h0 * f0)
        d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _integrate_rk45(field, x0, T, method, sample_every):
    rtol, atol = method.rtol, method.atol
    x = x0.copy()
    t = 0.0
    fx = field(x)
    h = min(_initial_step(field, x, fx, rtol, atol), method.max_step, T)
    times, states = [0.0], [x.copy()]
    next_sample = sample_every if sample_every is not None else None
    K = np.empty((7,) + x.shape)
    while t < T:
        h = min(h, T - t)
        if h < method.min_step and T - t > method.min_step:
            raise StiffnessError(f"step size fell below {method.min_step:g} at t={t:g}", t, _partial(times, states))
        K[0] = fx
        for i in range(1, 7):
            K[i] = field(x + h * np.tensordot(_A[i], K[:i], axes=1))
        x_new = x + h * np.tensordot(_B5[:6], K[:6], axes=1)
        K[6] = field(x_new)
        err = h * np.tensordot(_E, K, axes=1)
        scale = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
        err_norm = float(np.max(np.abs(err) / scale))
        if not np.isfinite(err_norm) or not np.all(np.isfinite(x_new)):
            if h <= method.min_step:
                raise BlowupError(f"state became non-finite after t={t:g}", t, _partial(times, states))
            h *= 0.25
            continue
        if err_norm > 1.0:
            h *= max(0.2, 0.9 * err_norm ** -0.2)
            continue
        t_new = t + h
        if sample_every is None:
            times.append(t_new)
            states.append(x_new.copy())
        else:
            while next_sample <= t_new + 1e-12 * max(1.0, t_new) and next_sample <= T + 1e-12:
                s = (next_sample - t) / h
                if s >= 1.0 - 1e-14:
                    xs = x_new
                else:
                    poly = np.array([s, s * s, s**3, s**4])
                    xs = x + h * np.tensordot(_P @ poly, K, axes=1)
                times.append(next_sample)
                states.append(np.array(xs, copy=True))
                next_sample = (len(times)) * sample_every
        x, fx, t = x_new, K[6].copy(), t_new
        factor = 5.0 if err_norm == 0 else min(5.0, 0.9 * err_norm ** -0.2)
        h = min(h * factor, method.max_step)
    if sample_every is not None and times[-1] < T - 1e-9 * max(1.0, T):
        times.append(T)
        states.append(x.copy())
    return Trajectory(np.array(times), np.array(states))


def integrate(field, x0, T, method=None, sample_every=None):
    """Integrate ``dx/dt = field(x)`` from ``x0`` over ``[0, T]``.

    ``method`` is an :class:`RK4` or :class:`RK45` instance (default RK4 with
    step 1e-3).  ``sample_every`` sets the output cadence; ``None`` records
    every step.
    """
    if not T > 0:
        raise ValueError("horizon T must be positive")
    if sample_every is not None and not sample_every > 0:
        raise ValueError("sample_every must be positive")
    method = RK4() if method is None else method
    x0 = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise BlowupError("initial state is not finite", 0.0)
    if isinstance(method, RK4):
        return _integrate_rk4(field, x0, T, method, sample_every)
    if isinstance(method, RK45):
        return _integrate_rk45(field, x0, T, method, sample_every)
    raise TypeError(f"unknown integration method {method!r}")
