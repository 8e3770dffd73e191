"""Catalog of entropy generators f (convex, lsc, f(1) = 0), their derivatives,
and valid interval Lipschitz constants.

All generators satisfy f(1) = 0 exactly. Kinds whose derivative is singular at
zero are evaluated with a small domain clamp ``epsilon_clamp``; TV keeps its
kink at t = 1 with the midpoint subgradient 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

_LOG2 = float(np.log(2.0))


class EntropyKind(Enum):
    TV = "tv"
    KL = "kl"
    REVERSE_KL = "reverse_kl"
    JS = "js"
    SQ_HELLINGER = "hellinger2"
    CHI_SQ = "chi2"
    TRIANGULAR = "triangular"
    JEFFREYS = "jeffreys"

    @classmethod
    def from_name(cls, name: str) -> "EntropyKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown entropy kind {name!r}; expected one of: {valid}") from None


#: generators whose derivative is unbounded as t -> 0+ (need the clamp there)
DERIVATIVE_SINGULAR = frozenset(
    {EntropyKind.KL, EntropyKind.REVERSE_KL, EntropyKind.JS, EntropyKind.SQ_HELLINGER, EntropyKind.JEFFREYS}
)
#: generators with f(0+) = +inf; an exactly-empty bin makes the divergence infinite
INFINITE_AT_ZERO = frozenset({EntropyKind.REVERSE_KL, EntropyKind.JEFFREYS})
#: generators without a classical derivative everywhere (transport refuses these)
NON_DIFFERENTIABLE = frozenset({EntropyKind.TV})
#: strictly convex generators (value 0 iff the pmf is uniform)
STRICTLY_CONVEX = frozenset(
    {EntropyKind.KL, EntropyKind.REVERSE_KL, EntropyKind.JS, EntropyKind.SQ_HELLINGER,
     EntropyKind.CHI_SQ, EntropyKind.TRIANGULAR, EntropyKind.JEFFREYS}
)


@dataclass(frozen=True)
class EntropySpec:
    """An entropy generator plus its zero-domain clamp."""

    kind: EntropyKind
    epsilon_clamp: float = 1e-12

    def __post_init__(self):
        if self.epsilon_clamp <= 0:
            raise ValueError("epsilon_clamp must be positive")

    @classmethod
    def from_name(cls, name: str, epsilon_clamp: float = 1e-12) -> "EntropySpec":
        return cls(EntropyKind.from_name(name), epsilon_clamp)


def eval_f(spec: EntropySpec, t) -> np.ndarray | float:
    """Evaluate the generator f at t >= 0 (elementwise).

    KL uses the continuous extension f(0) = 0; ReverseKL and Jeffreys are
    evaluated with t clamped below at epsilon_clamp (their true limit at 0 is
    +inf; the divergence layer handles exact-zero bins separately).
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("entropy generators are defined on t >= 0")
    eps = 1e-300  # guards log(0) inside masked branches only
    kind = spec.kind
    if kind is EntropyKind.TV:
        out = np.abs(t - 1.0)
    elif kind is EntropyKind.KL:
        tc = np.maximum(t, eps)
        out = np.where(t > 0, tc * np.log(tc), 0.0)
    elif kind is EntropyKind.REVERSE_KL:
        out = -np.log(np.maximum(t, spec.epsilon_clamp))
    elif kind is EntropyKind.JS:
        tc = np.maximum(t, eps)
        first = np.where(t > 0, tc * (np.log(2.0 * tc) - np.log1p(tc)), 0.0)
        out = 0.5 * (first + (_LOG2 - np.log1p(t)))
    elif kind is EntropyKind.SQ_HELLINGER:
        out = 0.5 * (np.sqrt(t) - 1.0) ** 2
    elif kind is EntropyKind.CHI_SQ:
        out = 0.5 * (t - 1.0) ** 2
    elif kind is EntropyKind.TRIANGULAR:
        out = (t - 1.0) ** 2 / (t + 1.0)
    elif kind is EntropyKind.JEFFREYS:
        out = (t - 1.0) * np.log(np.maximum(t, spec.epsilon_clamp))
    else:  # pragma: no cover
        raise AssertionError(kind)
    return out if out.ndim else float(out)


def derivative(spec: EntropySpec, t) -> np.ndarray | float:
    """f'(t) for t > 0; singular kinds are evaluated at max(t, epsilon_clamp).

    TV returns the midpoint subgradient 0 at the kink t = 1.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("derivative requires t >= 0")
    kind = spec.kind
    tc = np.maximum(t, spec.epsilon_clamp)
    if kind is EntropyKind.TV:
        out = np.sign(t - 1.0)
    elif kind is EntropyKind.KL:
        out = np.log(tc) + 1.0
    elif kind is EntropyKind.REVERSE_KL:
        out = -1.0 / tc
    elif kind is EntropyKind.JS:
        out = 0.5 * (np.log(2.0 * tc) - np.log1p(tc))
    elif kind is EntropyKind.SQ_HELLINGER:
        out = 0.5 * (1.0 - 1.0 / np.sqrt(tc))
    elif kind is EntropyKind.CHI_SQ:
        out = t - 1.0
    elif kind is EntropyKind.TRIANGULAR:
        out = (t - 1.0) * (t + 3.0) / (t + 1.0) ** 2
    elif kind is EntropyKind.JEFFREYS:
        out = np.log(tc) + 1.0 - 1.0 / tc
    else:  # pragma: no cover
        raise AssertionError(kind)
    return out if out.ndim else float(out)


def lipschitz_bound(spec: EntropySpec, interval_hi: float) -> float:
    """A valid Lipschitz constant of f on [lo, interval_hi].

    lo = epsilon_clamp for derivative-singular kinds, else 0. Since every
    generator is convex, f' is monotone and sup |f'| sits at an endpoint.
    """
    if interval_hi <= 0:
        raise ValueError("interval_hi must be positive")
    kind = spec.kind
    if kind is EntropyKind.TV:
        return 1.0
    lo = spec.epsilon_clamp if kind in DERIVATIVE_SINGULAR else 0.0
    return float(max(abs(derivative(spec, lo)), abs(derivative(spec, interval_hi))))
