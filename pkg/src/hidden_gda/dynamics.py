"""Gradient-descent-ascent on hidden bilinear games.

Two problem classes are supported.

``HiddenSystem2x2``
    Each player controls one activation, ``F = (f, 1 - f)`` and
    ``G = (g, 1 - g)``.  The state is ``x = (theta, phi)`` and the continuous
    flow is ``theta' = -v f'(theta) (g - q)``, ``phi' = v g'(phi) (f - p)``.

``HiddenSystemMulti``
    Strategy ``i`` of the min player has activation ``f_i(theta_i)`` and
    strategy ``j`` of the max player ``g_j(phi_j)``; the simplex constraints
    are handled by multipliers.  The state is
    ``x = (theta_1..theta_N, phi_1..phi_M, lambda, mu)``.

States may carry leading batch axes; every field function works row-wise.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .game import BilinearGame, solve_interior_equilibrium
from .integrate import Trajectory
from .reparam import RangeError


def _values(fields, x):
    """Stack ``fields[k](x[..., k])``; identical fields are evaluated in one call."""
    first = fields[0]
    if all(f == first for f in fields[1:]):
        return first._value(x)
    return np.stack([f._value(x[..., k]) for k, f in enumerate(fields)], axis=-1)


def _derivs(fields, x):
    first = fields[0]
    if all(f == first for f in fields[1:]):
        return first._deriv(x)
    return np.stack([f._deriv(x[..., k]) for k, f in enumerate(fields)], axis=-1)


@dataclass(frozen=True)
class HiddenSystem2x2:
    f: object
    g: object
    game: BilinearGame

    def __post_init__(self):
        if self.game.U.shape != (2, 2):
            raise ValueError(f"HiddenSystem2x2 needs a 2x2 game, got {self.game.U.shape}")
        eq = solve_interior_equilibrium(self.game)
        object.__setattr__(self, "eq", eq)
        object.__setattr__(self, "_vpq", (float(eq.v), float(eq.p[0]), float(eq.q[0])))

    N = 2
    M = 2
    size = 2
    has_multipliers = False

    @property
    def v(self):
        return self.eq.v

    @property
    def p(self):
        return float(self.eq.p[0])

    @property
    def q(self):
        return float(self.eq.q[0])

    @property
    def f_fields(self):
        return (self.f,)

    @property
    def g_fields(self):
        return (self.g,)

    def pack(self, theta, phi, lam=None, mu=None):
        return np.stack(np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float)), axis=-1)

    def unpack(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., 0:1], x[..., 1:2], None, None

    def activations(self, x):
        """``(f, g)`` values, each of shape ``batch + (1,)``."""
        x = np.asarray(x, dtype=float)
        return self.f._value(x[..., 0:1]), self.g._value(x[..., 1:2])

    def field(self, x):
        return field_2x2(self, x)

    def observables(self, states):
        fv, gv = self.activations(states)
        F = np.concatenate([fv, 1.0 - fv], axis=-1)
        G = np.concatenate([gv, 1.0 - gv], axis=-1)
        nan = np.full(fv.shape[:-1], np.nan)
        return {
            "f": F,
            "g": G,
            "lambda": nan,
            "mu": nan,
            "payoff": np.einsum("...i,ij,...j->...", F, self.game.U, G),
        }


@dataclass(frozen=True)
class HiddenSystemMulti:
    fs: tuple
    gs: tuple
    game: BilinearGame

    def __post_init__(self):
        object.__setattr__(self, "fs", tuple(self.fs))
        object.__setattr__(self, "gs", tuple(self.gs))
        if len(self.fs) != self.game.N or len(self.gs) != self.game.M:
            raise ValueError(
                f"need {self.game.N} f-fields and {self.game.M} g-fields, got {len(self.fs)} and {len(self.gs)}"
            )
        object.__setattr__(self, "eq", solve_interior_equilibrium(self.game))

    has_multipliers = True

    @property
    def N(self):
        return self.game.N

    @property
    def M(self):
        return self.game.M

    @property
    def size(self):
        return self.N + self.M + 2

    @property
    def p(self):
        return self.eq.p

    @property
    def q(self):
        return self.eq.q

    @property
    def f_fields(self):
        return self.fs

    @property
    def g_fields(self):
        return self.gs

    def pack(self, theta, phi, lam=0.0, mu=0.0):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        batch = np.broadcast_shapes(theta.shape[:-1], phi.shape[:-1], np.shape(lam), np.shape(mu))
        return np.concatenate([
            np.broadcast_to(theta, batch + (self.N,)),
            np.broadcast_to(phi, batch + (self.M,)),
            np.broadcast_to(lam, batch)[..., None],
            np.broadcast_to(mu, batch)[..., None],
        ], axis=-1)

    def unpack(self, x):
        x = np.asarray(x, dtype=float)
        N, M = self.N, self.M
        return x[..., :N], x[..., N:N + M], x[..., N + M], x[..., N + M + 1]

    def activations(self, x):
        theta, phi, _, _ = self.unpack(x)
        return _values(self.fs, theta), _values(self.gs, phi)

    def field(self, x):
        return field_multi(self, x)

    def observables(self, states):
        fv, gv = self.activations(states)
        _, _, lam, mu = self.unpack(states)
        return {
            "f": fv,
            "g": gv,
            "lambda": lam,
            "mu": mu,
            "payoff": np.einsum("...i,ij,...j->...", fv, self.game.U, gv),
        }


def field_2x2(sys, x):
    """``(-v f'(theta) (g - q), v g'(phi) (f - p))``."""
    x = np.asarray(x, dtype=float)
    th, ph = x[..., 0], x[..., 1]
    f, g = sys.f, sys.g
    v, p, q = sys._vpq
    out = np.empty(x.shape)
    out[..., 0] = -v * f._deriv(th) * (g._value(ph) - q)
    out[..., 1] = v * g._deriv(ph) * (f._value(th) - p)
    return out


def field_multi(sys, x):
    """Constrained multi-strategy flow with multiplier dynamics.

    ``theta_i' = -f_i'(theta_i) (sum_j u_ij g_j + lambda)``,
    ``phi_j' = g_j'(phi_j) (sum_i u_ij f_i + mu)``,
    ``lambda' = sum_i f_i - 1``, ``mu' = -(sum_j g_j - 1)``.
    """
    theta, phi, lam, mu = sys.unpack(x)
    U = sys.game.U
    fv, gv = _values(sys.fs, theta), _values(sys.gs, phi)
    dth = -_derivs(sys.fs, theta) * (gv @ U.T + lam[..., None])
    dph = _derivs(sys.gs, phi) * (fv @ U + mu[..., None])
    dlam = fv.sum(axis=-1) - 1.0
    dmu = -(gv.sum(axis=-1) - 1.0)
    return np.concatenate([dth, dph, dlam[..., None], dmu[..., None]], axis=-1)


def field_planar(sys, fmap, gmap, fg):
    """Reduced flow on activation values ``(f, g)``.

    ``f' = -v |grad f(X_f(f))|^2 (g - q)``, ``g' = v |grad g(X_g(g))|^2 (f - p)``;
    raises :class:`RangeError` outside the attainable ranges.
    """
    fg = np.asarray(fg, dtype=float)
    f, g = fg[..., 0], fg[..., 1]
    wf = fmap.grad_sq(f)
    wg = gmap.grad_sq(g)
    v = sys.eq.v
    return np.stack([-v * wf * (g - sys.q), v * wg * (f - sys.p)], axis=-1)


def functional_field_multi(sys, fmaps, gmaps, y):
    """Reduced multi-strategy flow on ``(f_1..f_N, g_1..g_M, lambda, mu)``."""
    y = np.asarray(y, dtype=float)
    N, M, U = sys.N, sys.M, sys.game.U
    fv, gv = y[..., :N], y[..., N:N + M]
    lam, mu = y[..., N + M], y[..., N + M + 1]
    wf = np.stack([m.grad_sq(fv[..., i]) for i, m in enumerate(fmaps)], axis=-1)
    wg = np.stack([m.grad_sq(gv[..., j]) for j, m in enumerate(gmaps)], axis=-1)
    df = -wf * (gv @ U.T + lam[..., None])
    dg = wg * (fv @ U + mu[..., None])
    return np.concatenate([df, dg, (fv.sum(-1) - 1.0)[..., None], (-(gv.sum(-1) - 1.0))[..., None]], axis=-1)


def dgda_step(sys, x, alpha):
    """One simultaneous discrete GDA update: an explicit Euler step of the flow."""
    if not alpha > 0:
        raise ValueError("learning rate must be positive")
    x = np.asarray(x, dtype=float)
    return x + alpha * sys.field(x)


def dgda(sys, x0, alpha, steps):
    """Iterates ``x_0..x_steps`` of discrete GDA (``x0`` may be batched)."""
    out = np.empty((steps + 1,) + np.shape(x0))
    out[0] = x0
    x = np.asarray(x0, dtype=float)
    for k in range(1, steps + 1):
        x = dgda_step(sys, x, alpha)
        out[k] = x
    return out


def attach_observables(sys, traj, energy=None):
    """Fill ``traj.observables`` from the states; ``energy`` maps states to H."""
    traj.observables.update(sys.observables(traj.states))
    if energy is not None:
        traj.observables["H"] = energy(traj.states)
    return traj


def csv_header(sys):
    return (["t"] + [f"f_{i + 1}" for i in range(sys.N)] + [f"g_{j + 1}" for j in range(sys.M)]
            + ["lambda", "mu", "H", "payoff"])


def write_trajectory_csv(path, sys, traj):
    """Write one (unbatched) trajectory as ``t, f_1..f_N, g_1..g_M, lambda, mu, H, payoff``."""
    obs = traj.observables
    n = len(traj.times)
    H = obs.get("H", np.full(n, np.nan))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_header(sys))
        for k in range(n):
            row = [traj.times[k], *obs["f"][k], *obs["g"][k], obs["lambda"][k], obs["mu"][k], H[k], obs["payoff"][k]]
            w.writerow([_fmt(val) for val in row])


def _fmt(x):
    return format(float(x), ".17g")

