"""Conserved energy of continuous GDA and the volume-preserving coordinates.

For each strategy coordinate with equilibrium value ``p`` and reparam map
``X`` the energy has a term::

    int_p^f (z - p) / |grad f(X(z))|^2 dz

and the multi-strategy energy adds ``(lambda - lambda*)^2 / 2 + (mu - mu*)^2 / 2``.
The volume coordinate of the same strategy drops the ``(z - p)`` weight::

    a = int_p^f 1 / |grad f(X(z))|^2 dz

In ``(a, b, lambda, mu)`` coordinates no component of the flow depends on its
own coordinate, so the transformed field is divergence free.
"""

from dataclasses import dataclass

import numpy as np

from .game import kkt_multipliers  # noqa: F401  (re-exported)
from .quadrature import adaptive_simpson, cumulative_integrals
from .reparam import RangeError, build_reparam, is_safe_multi

ENDPOINT_GUARD = 1e-6
# above this many values per coordinate, integrals share one sorted sweep
CUMULATIVE_THRESHOLD = 256


class UnsafeContextError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyContext:
    """Reparam maps, equilibrium values and quadrature settings for H.

    ``fmaps[i]``/``gmaps[j]`` belong to the strategy coordinates in the same
    order as ``p``/``q``.  For a 2x2 system there is one coordinate per player
    and the multiplier terms are absent (``multipliers=False``).
    """

    fmaps: tuple
    gmaps: tuple
    p: np.ndarray
    q: np.ndarray
    lambda_star: float = 0.0
    mu_star: float = 0.0
    multipliers: bool = True
    tol: float = 1e-10
    closed_form: bool = True

    def __post_init__(self):
        object.__setattr__(self, "p", np.atleast_1d(np.asarray(self.p, dtype=float)))
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, dtype=float)))
        ok, reason = is_safe_multi(self.fmaps, self.gmaps, self.p, self.q)
        if not ok:
            raise UnsafeContextError(reason)

    @classmethod
    def for_system(cls, sys, x0, tol=1e-10, closed_form=True):
        """Context for ``sys`` with reparam maps through the (unbatched) state ``x0``."""
        theta, phi, _, _ = sys.unpack(x0)
        fmaps = tuple(build_reparam(f, [theta[i]]) for i, f in enumerate(sys.f_fields))
        gmaps = tuple(build_reparam(g, [phi[j]]) for j, g in enumerate(sys.g_fields))
        if sys.has_multipliers:
            return cls(fmaps, gmaps, sys.p, sys.q, sys.eq.lambda_star, sys.eq.mu_star, True, tol, closed_form)
        return cls(fmaps, gmaps, [sys.p], [sys.q], 0.0, 0.0, False, tol, closed_form)

    @property
    def coords(self):
        """``(map, equilibrium value)`` for every strategy coordinate, f's first."""
        return list(zip(self.fmaps, self.p)) + list(zip(self.gmaps, self.q))

    def weight(self, m):
        """``z -> |grad f(X(z))|^2`` for map ``m``."""
        if self.closed_form and m.analytic_inverse:
            return m.field.grad_sq_of_value
        return m.grad_sq


def _guard(m, vals):
    lo, hi = m.range
    vals = np.asarray(vals, dtype=float)
    if np.any(vals <= lo + ENDPOINT_GUARD) or np.any(vals >= hi - ENDPOINT_GUARD):
        raise RangeError(
            f"value within {ENDPOINT_GUARD:g} of the attainable range ({lo:.6g}, {hi:.6g}); the energy diverges there"
        )
    return vals


def _coordinate_integrals(ctx, values, weighted):
    """Per-coordinate integrals, shape ``values.shape``."""
    values = np.asarray(values, dtype=float)
    out = np.empty(values.shape)
    for k, (m, c) in enumerate(ctx.coords):
        vals = _guard(m, values[..., k])
        w = ctx.weight(m)
        if weighted:
            integrand = lambda z, w=w, c=c: (z - c) / w(z)  # noqa: E731
        else:
            integrand = lambda z, w=w: 1.0 / w(z)  # noqa: E731
        if vals.size > CUMULATIVE_THRESHOLD:
            out[..., k] = cumulative_integrals(integrand, c, vals, tol=ctx.tol)
        else:
            out[..., k] = adaptive_simpson(integrand, c, vals, tol=ctx.tol)
    return out


def energy_terms(ctx, fvals, gvals):
    """Sum of the strategy-coordinate energy terms (batched over leading axes)."""
    vals = np.concatenate([np.atleast_1d(fvals), np.atleast_1d(gvals)], axis=-1)
    return _coordinate_integrals(ctx, vals, weighted=True).sum(axis=-1)


def energy_2x2(ctx, f, g):
    """``H(f, g)`` of a 2x2 system; ``f``, ``g`` are the first-strategy probabilities."""
    f = np.asarray(f, dtype=float)[..., None]
    g = np.asarray(g, dtype=float)[..., None]
    H = energy_terms(ctx, f, g)
    return float(H) if np.ndim(H) == 0 else H


def energy_multi(ctx, fvals, gvals, lam, mu):
    H = (energy_terms(ctx, fvals, gvals)
         + 0.5 * (np.asarray(lam) - ctx.lambda_star) ** 2
         + 0.5 * (np.asarray(mu) - ctx.mu_star) ** 2)
    return float(H) if np.ndim(H) == 0 else H


def energy_of_states(ctx, sys, states):
    """H evaluated on parameter-space states of ``sys`` (any batch shape)."""
    fv, gv = sys.activations(states)
    if sys.has_multipliers:
        _, _, lam, mu = sys.unpack(states)
        return energy_multi(ctx, fv, gv, lam, mu)
    return energy_terms(ctx, fv, gv)


def volume_coordinates(ctx, fvals, gvals, lam=None, mu=None):
    """Map activation values to ``(a, b, lambda, mu)``; lambda and mu pass through."""
    fvals = np.atleast_1d(np.asarray(fvals, dtype=float))
    gvals = np.atleast_1d(np.asarray(gvals, dtype=float))
    n = fvals.shape[-1]
    ab = _coordinate_integrals(ctx, np.concatenate([fvals, gvals], axis=-1), weighted=False)
    return ab[..., :n], ab[..., n:], lam, mu


def inverse_volume_coordinates(ctx, a, b, tol=1e-13, max_iter=100):
    """Invert :func:`volume_coordinates` for the strategy coordinates.

    Safeguarded Newton on ``A(f) - a`` with ``dA/df = 1 / |grad f(X(f))|^2``,
    bracketed between the equilibrium value and the range end.
    """
    target = np.concatenate([np.atleast_1d(a), np.atleast_1d(b)], axis=-1).astype(float)
    out = np.empty(target.shape)
    for k, (m, c) in enumerate(ctx.coords):
        lo_r, hi_r = m.range
        w = ctx.weight(m)
        tgt = target[..., k]
        lo = np.where(tgt >= 0, c, lo_r + ENDPOINT_GUARD)
        hi = np.where(tgt >= 0, hi_r - ENDPOINT_GUARD, c)
        x = np.full(tgt.shape, float(c))
        for _ in range(max_iter):
            F = adaptive_simpson(lambda z: 1.0 / w(z), c, x, tol=ctx.tol * 1e-2) - tgt
            lo = np.where(F < 0, x, lo)
            hi = np.where(F > 0, x, hi)
            xn = x - F * w(x)
            bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
            xn = np.where(bad, 0.5 * (lo + hi), xn)
            if np.all(np.abs(xn - x) <= tol):
                x = xn
                break
            x = xn
        else:
            raise RangeError("volume coordinate lies outside the attainable range")
        out[..., k] = x
    n = len(ctx.fmaps)
    return out[..., :n], out[..., n:]


def transformed_field(ctx, game):
    """Flow in volume coordinates ``y = (a_1..a_N, b_1..b_M, lambda, mu)``.

    ``a_i' = -(sum_j u_ij g_j + lambda)``, ``b_j' = sum_i u_ij f_i + mu``,
    ``lambda' = sum f - 1``, ``mu' = -(sum g - 1)``, with ``f = A^-1(a)`` and
    ``g = B^-1(b)``.
    """
    U = game.U
    N, M = U.shape

    def Y(y):
        y = np.asarray(y, dtype=float)
        fv, gv = inverse_volume_coordinates(ctx, y[..., :N], y[..., N:N + M])
        lam, mu = y[..., N + M], y[..., N + M + 1]
        da = -(gv @ U.T + lam[..., None])
        db = fv @ U + mu[..., None]
        return np.concatenate([da, db, (fv.sum(-1) - 1.0)[..., None], (-(gv.sum(-1) - 1.0))[..., None]], axis=-1)

    return Y


def divergence_check(field, x, h=1e-4):
    """Central-difference divergence ``sum_k (Y_k(x + h e_k) - Y_k(x - h e_k)) / 2h``."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    shifts = np.eye(n) * h
    plus = field(x[None, :] + shifts)
    minus = field(x[None, :] - shifts)
    return float(np.sum(np.diag(plus) - np.diag(minus)) / (2 * h))
