"""Smooth player activations ``f: R^dim -> [0, 1]`` with exact derivatives.

Three families are provided, all one-dimensional:

* ``sigmoid``: ``s(x) = 1 / (1 + exp(-x))``
* ``affine_sigmoid(a, b)``: ``a + b s(x)``
* ``bump(A, B)``: ``A + B x^2 exp(-x^2)``, a strict local minimum at 0

Arrays passed to :meth:`ScalarField.value` and friends carry the parameter
vector in the last axis; any leading axes are treated as a batch.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logit as _logit

FAMILIES = ("sigmoid", "affine_sigmoid", "bump")


class DomainError(ValueError):
    pass


def sigmoid(x):
    """Logistic function; ``expit`` never overflows for large ``|x|``."""
    return expit(np.asarray(x, dtype=float))


def logit(v):
    return _logit(np.asarray(v, dtype=float))


@dataclass(frozen=True)
class ScalarField:
    family: str
    params: dict = field(default_factory=dict)
    dim: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.dim != 1:
            raise ValueError(f"{self.family} fields are one-dimensional (dim=1), got dim={self.dim}")
        params = {k: float(v) for k, v in self.params.items()}
        expected = {"sigmoid": set(), "affine_sigmoid": {"a", "b"}, "bump": {"A", "B"}}[self.family]
        if set(params) != expected:
            raise ValueError(f"{self.family} takes parameters {sorted(expected)}, got {sorted(params)}")
        if self.family == "affine_sigmoid":
            a, b = params["a"], params["b"]
            if b == 0:
                raise ValueError("affine_sigmoid needs b != 0")
            if min(a, a + b) < 0 or max(a, a + b) > 1:
                raise ValueError(f"affine_sigmoid range ({a}, {a + b}) leaves [0, 1]")
        elif self.family == "bump":
            A, B = params["A"], params["B"]
            if not 0 < A < 1:
                raise ValueError(f"bump floor A={A} must lie in (0, 1)")
            if B <= 0:
                raise ValueError(f"bump scale B={B} must be positive")
            if A + B * np.exp(-1.0) > 1 + 1e-15:
                raise ValueError(f"bump(A={A}, B={B}) exceeds 1 at its peak")
        object.__setattr__(self, "params", params)

    # constructors

    @classmethod
    def make_sigmoid(cls):
        return cls("sigmoid")

    @classmethod
    def make_affine_sigmoid(cls, a, b):
        return cls("affine_sigmoid", {"a": a, "b": b})

    @classmethod
    def make_bump(cls, A, B):
        return cls("bump", {"A": A, "B": B})

    @property
    def bijective(self):
        return self.family in ("sigmoid", "affine_sigmoid")

    @property
    def value_range(self):
        """Closed interval containing every value of the field."""
        if self.family == "sigmoid":
            return (0.0, 1.0)
        if self.family == "affine_sigmoid":
            a, b = self.params["a"], self.params["b"]
            return (min(a, a + b), max(a, a + b))
        A, B = self.params["A"], self.params["B"]
        return (A, A + B * np.exp(-1.0))

    def __str__(self):
        if not self.params:
            return self.family
        args = " ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family} {args}"

    # scalar-coordinate kernels; x is the single coordinate, any shape

    def _value(self, x):
        if self.family == "sigmoid":
            return sigmoid(x)
        if self.family == "affine_sigmoid":
            return self.params["a"] + self.params["b"] * sigmoid(x)
        x2 = x * x
        return self.params["A"] + self.params["B"] * x2 * np.exp(-x2)

    def _deriv(self, x):
        if self.family == "bump":
            x2 = x * x
            return (2.0 * self.params["B"]) * x * (1.0 - x2) * np.exp(-x2)
        s = sigmoid(x)
        d = s * (1.0 - s)
        return d if self.family == "sigmoid" else self.params["b"] * d

    def _deriv2(self, x):
        if self.family == "bump":
            x2 = x * x
            return self.params["B"] * (2 - 10 * x2 + 4 * x2 * x2) * np.exp(-x2)
        s = sigmoid(x)
        d2 = s * (1.0 - s) * (1.0 - 2.0 * s)
        return d2 if self.family == "sigmoid" else self.params["b"] * d2

    def inverse(self, v):
        """Analytic inverse for the bijective families."""
        if self.family == "sigmoid":
            return logit(v)
        if self.family == "affine_sigmoid":
            return logit((np.asarray(v, dtype=float) - self.params["a"]) / self.params["b"])
        raise TypeError("bump fields have no global inverse")

    def grad_sq_of_value(self, v):
        """``|grad f|^2`` expressed through the value ``v = f(x)`` (bijective only)."""
        v = np.asarray(v, dtype=float)
        if self.family == "sigmoid":
            return (v * (1.0 - v)) ** 2
        if self.family == "affine_sigmoid":
            a, b = self.params["a"], self.params["b"]
            s = (v - a) / b
            return (b * s * (1.0 - s)) ** 2
        raise TypeError("bump fields are not parametrised by their value")

    # public array API (last axis = parameter vector)

    def _coord(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim == 0 or theta.shape[-1] != self.dim:
            raise DomainError(f"expected parameter vectors of length {self.dim}, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise DomainError("non-finite parameter")
        return theta[..., 0]

    def value(self, theta):
        return self._value(self._coord(theta))

    def grad(self, theta):
        return self._deriv(self._coord(theta))[..., None]

    def hess(self, theta):
        return self._deriv2(self._coord(theta))[..., None, None]


def evaluate(field, theta):
    return field.value(theta)


def grad(field, theta):
    return field.grad(theta)


def hess(field, theta):
    return field.hess(theta)


def grad_check(field, theta, h=1e-5):
    """Max over components of ``|analytic - central difference| / (1 + |analytic|)``."""
    theta = np.asarray(theta, dtype=float)
    analytic = field.grad(theta)
    worst = 0.0
    for k in range(field.dim):
        e = np.zeros(field.dim)
        e[k] = h
        fd = (field.value(theta + e) - field.value(theta - e)) / (2 * h)
        err = np.abs(analytic[..., k] - fd) / (1.0 + np.abs(analytic[..., k]))
        worst = max(worst, float(np.max(err)))
    return worst


def parse_field(text):
    """Parse ``"affine_sigmoid a=0.8 b=0.2"`` style field descriptions."""
    tokens = text.split()
    if not tokens:
        raise ValueError("empty field description")
    params = {}
    for tok in tokens[1:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise ValueError(f"malformed parameter {tok!r} (expected key=value)")
        try:
            params[key] = float(val)
        except ValueError:
            raise ValueError(f"parameter {key} is not a number: {val!r}") from None
    return ScalarField(tokens[0], params)
