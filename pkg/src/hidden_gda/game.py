"""Bilinear zero-sum payoff matrices and their fully mixed equilibria.

The row player (parameters ``theta``) minimises ``x^T U y`` and the column
player (parameters ``phi``) maximises it.  A fully mixed equilibrium ``(p, q)``
makes every column indifferent against ``p`` and every row indifferent
against ``q``; the common values define the Lagrange multipliers::

    sum_i u_ij p_i + mu*     = 0   for every column j
    sum_j u_ij q_j + lambda* = 0   for every row i
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import SingularMatrixError, solve

KKT_TOL = 1e-10
LSTSQ_TOL = 1e-8


class GameError(ValueError):
    """Base class for payoff-matrix and equilibrium failures."""


class ShapeError(GameError):
    pass


class NoInteriorEquilibriumError(GameError):
    pass


class NotFullyMixedError(GameError):
    pass


class NotAnEquilibriumError(GameError):
    pass


@dataclass(frozen=True)
class BilinearGame:
    U: np.ndarray

    def __post_init__(self):
        U = np.array(self.U, dtype=float)
        if U.ndim != 2:
            raise ShapeError(f"payoff matrix must be 2-d, got {U.ndim}-d")
        if U.shape[0] < 2 or U.shape[1] < 2:
            raise ShapeError(f"need at least 2 strategies per player, got shape {U.shape}")
        if not np.all(np.isfinite(U)):
            raise GameError("payoff matrix has non-finite entries")
        U.setflags(write=False)
        object.__setattr__(self, "U", U)

    @property
    def N(self):
        return self.U.shape[0]

    @property
    def M(self):
        return self.U.shape[1]

    @property
    def v(self):
        """``u00 - u01 - u10 + u11`` for a 2x2 game."""
        if self.U.shape != (2, 2):
            raise ShapeError("v is only defined for 2x2 games")
        (u00, u01), (u10, u11) = self.U
        return float(u00 - u01 - u10 + u11)

    def scaled(self, c):
        return BilinearGame(c * self.U)


@dataclass(frozen=True)
class InteriorEquilibrium:
    p: np.ndarray
    q: np.ndarray
    lambda_star: float
    mu_star: float
    v: Optional[float] = None

    @property
    def value(self):
        """Value of the game, ``p^T U q`` (equal to ``-lambda*`` and ``-mu*``)."""
        return -self.lambda_star


def game_from_equilibrium(p, q, v):
    """A 2x2 game with interior equilibrium ``(p, q)`` and cross term ``v``.

    Uses ``u11 = 0``, ``u01 = -q v``, ``u10 = -p v``, ``u00 = v (1 - p - q)``.
    """
    if v == 0:
        raise NoInteriorEquilibriumError("v must be nonzero")
    return BilinearGame([[v * (1.0 - p - q), -q * v], [-p * v, 0.0]])


def payoff(game, x, y):
    """Bilinear payoff ``x^T U y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != game.N or y.shape[-1] != game.M:
        raise ShapeError(
            f"payoff expects vectors of length {game.N} and {game.M}, "
            f"got {x.shape[-1]} and {y.shape[-1]}"
        )
    return np.einsum("...i,ij,...j->...", x, game.U, y)


def kkt_multipliers(game, p, q, tol=KKT_TOL):
    """Return ``(lambda*, mu*)`` for the fully mixed equilibrium ``(p, q)``.

    Every row of ``U q`` and every column of ``p^T U`` must agree within
    ``tol``; otherwise ``(p, q)`` is not an equilibrium.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    rows = game.U @ q
    cols = p @ game.U
    if np.ptp(rows) > tol:
        raise NotAnEquilibriumError(f"row payoffs against q disagree: {rows}")
    if np.ptp(cols) > tol:
        raise NotAnEquilibriumError(f"column payoffs against p disagree: {cols}")
    return -float(rows.mean()), -float(cols.mean())


def _bordered_solve(A):
    # unknowns (w_1..w_k, m): A^T-like rows give sum_i a_ji w_i + m = 0, plus sum w = 1
    k_eq, k_var = A.shape
    system = np.zeros((k_eq + 1, k_var + 1))
    system[:k_eq, :k_var] = A
    system[:k_eq, k_var] = 1.0
    system[k_eq, :k_var] = 1.0
    rhs = np.zeros(k_eq + 1)
    rhs[k_eq] = 1.0
    if k_eq == k_var:
        try:
            sol = solve(system, rhs)
        except SingularMatrixError as exc:
            raise NoInteriorEquilibriumError(f"degenerate payoff matrix: {exc}") from None
    else:
        sol, *_ = np.linalg.lstsq(system, rhs, rcond=None)
        residual = float(np.linalg.norm(system @ sol - rhs))
        if residual > LSTSQ_TOL:
            raise NoInteriorEquilibriumError(
                f"no consistent fully mixed solution (least-squares residual {residual:.3e})"
            )
    return sol[:k_var], float(sol[k_var])


def _check_interior(name, w):
    if np.any(w <= 0.0) or np.any(w >= 1.0):
        raise NotFullyMixedError(f"{name} = {w} is not fully mixed")


def solve_interior_equilibrium(game):
    """Fully mixed equilibrium of ``game`` with its KKT multipliers.

    2x2 games use the closed forms ``p = -(u10 - u11)/v`` and
    ``q = -(u01 - u11)/v``; larger games solve the two bordered indifference
    systems.  Raises if no interior equilibrium exists.
    """
    U = game.U
    if U.shape == (2, 2):
        v = game.v
        if v == 0.0:
            raise NoInteriorEquilibriumError("v = u00 - u01 - u10 + u11 is zero")
        (u00, u01), (u10, u11) = U
        p0 = -(u10 - u11) / v
        q0 = -(u01 - u11) / v
        p = np.array([p0, 1.0 - p0])
        q = np.array([q0, 1.0 - q0])
        _check_interior("p", p)
        _check_interior("q", q)
        lam, mu = kkt_multipliers(game, p, q)
        return InteriorEquilibrium(p, q, lam, mu, v)

    p, mu = _bordered_solve(U.T)
    q, lam = _bordered_solve(U)
    _check_interior("p", p)
    _check_interior("q", q)
    # re-derive from the indifference rows as a residual check
    tol = KKT_TOL if U.shape[0] == U.shape[1] else LSTSQ_TOL
    lam_chk, mu_chk = kkt_multipliers(game, p, q, tol=tol)
    if abs(lam_chk - lam) > tol or abs(mu_chk - mu) > tol:
        raise NotAnEquilibriumError("bordered solution violates the KKT rows")
    return InteriorEquilibrium(p, q, lam, mu, None)
