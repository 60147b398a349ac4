"""Two-point counterexample: a difference test and a ratio test that agree
algebraically but differ arbitrarily in significance.

A variable ``x`` takes two values with probabilities ``p1`` and ``p2 = 1 - p1``.
On them ``J1 = A_i`` and ``J2 = B_i = (1 + eps_i) A_i``, giving

* ``J = J1 - J2 = -eps_i A_i``  (the test ``J >= 0``)
* ``T = J2 / J1 = 1 + eps_i``    (the test ``T <= 1``)

Both tests are violated for every draw.  Their significance ratios
``R_J = -mu_J / sigma_J`` and ``R_T = (mu_T - 1) / sigma_T`` can be pushed
apart: ``T`` ignores the scale ``A_i`` that ``J`` depends on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError, ValidationError


@dataclass(frozen=True)
class TwoPointModel:
    p1: float
    a1: float
    a2: float
    eps1: float
    eps2: float

    def __post_init__(self):
        if not 0.0 < self.p1 < 1.0:
            raise ValidationError(f"p1 must lie in (0, 1), got {self.p1}")
        for name in ("a1", "a2", "eps1", "eps2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive, got {value}")

    @property
    def p2(self) -> float:
        return 1.0 - self.p1

    def scaled(self, c: float) -> TwoPointModel:
        """Same model with both J1 values multiplied by ``c``."""
        return TwoPointModel(self.p1, self.a1 * c, self.a2 * c, self.eps1, self.eps2)


@dataclass(frozen=True)
class NoneqReport:
    mu_j: float
    sigma_j: float
    mu_t: float
    sigma_t: float
    r_j: float | None
    r_t: float | None
    degenerate: bool = False


def moment_values(m: TwoPointModel) -> tuple[float, float, float, float]:
    """Closed-form ``(mu_J, sigma_J, mu_T, sigma_T)``; never raises."""
    p1, p2 = m.p1, m.p2
    root = math.sqrt(p1 * p2)
    mu_j = -(m.eps1 * m.a1 * p1 + m.eps2 * m.a2 * p2)
    sigma_j = root * abs(m.eps1 * m.a1 - m.eps2 * m.a2)
    mu_t = 1.0 + m.eps1 * p1 + m.eps2 * p2
    sigma_t = root * abs(m.eps1 - m.eps2)
    return mu_j, sigma_j, mu_t, sigma_t


def moments(m: TwoPointModel) -> NoneqReport:
    """Exact moments and significance ratios.

    Raises DegenerateError when either standard deviation is zero
    (``eps1*a1 == eps2*a2`` for J, ``eps1 == eps2`` for T); the error's
    ``moments`` attribute still carries the four moment values.
    """
    mu_j, sigma_j, mu_t, sigma_t = moment_values(m)
    bad = [name for name, s in (("R_J", sigma_j), ("R_T", sigma_t)) if s == 0]
    if bad:
        err = DegenerateError(f"{' and '.join(bad)} undefined: zero standard deviation")
        err.moments = (mu_j, sigma_j, mu_t, sigma_t)
        raise err
    return NoneqReport(mu_j, sigma_j, mu_t, sigma_t, -mu_j / sigma_j, (mu_t - 1.0) / sigma_t)


def ratio_significance(p1: float, lam: float) -> float:
    """``R_T`` in closed form when ``eps1 = lam * eps2`` with ``lam > 1``."""
    p2 = 1.0 - p1
    return math.sqrt(p1 / p2) + 1.0 / (math.sqrt(p1 * p2) * (lam - 1.0))


def linear_significance(delta: float, k: float) -> float:
    """``R_J`` for a model from :func:`construct`, where ``a*lam - 1 = 1/(k*delta)``."""
    p1 = delta * delta
    p2 = 1.0 - p1
    return math.sqrt(p1 / p2) + k * delta / math.sqrt(p1 * p2)


def scale_ratio(delta: float, lam: float, k: float) -> float:
    """The ratio ``a = A1/A2 = 1/lam + 1/(k*delta*lam)``."""
    return 1.0 / lam + 1.0 / (k * delta * lam)


def construct(delta: float, lam: float, k: float, a2: float = 1.0, eps2: float = 1.0) -> TwoPointModel:
    """Build a model whose linear test has ``R_J ~ k`` while ``R_T`` stays small.

    ``p1 = delta**2``, ``eps1 = lam*eps2`` and ``A1 = a*A2``.  ``R_T`` is small
    when ``delta << 1`` and ``lam >> 1/delta``.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if not lam > 1.0:
        raise DomainError(f"lambda must exceed 1, got {lam}")
    if not k > 0:
        raise DomainError(f"k must be positive, got {k}")
    a = scale_ratio(delta, lam, k)
    return TwoPointModel(p1=delta * delta, a1=a * a2, a2=a2, eps1=lam * eps2, eps2=eps2)


def _std(values: np.ndarray) -> float:
    if values.size and np.all(values == values[0]):
        return 0.0
    return float(np.std(values, ddof=1))


def empirical_check(m: TwoPointModel, n_samples: int, seed: int) -> NoneqReport:
    """Monte Carlo estimates of the report fields from ``n_samples`` draws.

    If every draw lands on the same point the sample is flagged degenerate
    and both ratios are left as None; a ratio is also None when its sample
    standard deviation is exactly zero.
    """
    if n_samples < 2:
        raise DomainError("empirical_check needs at least 2 samples")
    rng = np.random.default_rng(seed)
    first = rng.random(n_samples) < m.p1
    j = np.where(first, -m.eps1 * m.a1, -m.eps2 * m.a2)
    t = np.where(first, 1.0 + m.eps1, 1.0 + m.eps2)

    mu_j, sigma_j = float(j.mean()), _std(j)
    mu_t, sigma_t = float(t.mean()), _std(t)
    degenerate = bool(first.all() or not first.any())
    r_j = None if degenerate or sigma_j == 0 else -mu_j / sigma_j
    r_t = None if degenerate or sigma_t == 0 else (mu_t - 1.0) / sigma_t
    return NoneqReport(mu_j, sigma_j, mu_t, sigma_t, r_j, r_t, degenerate)


def demo_row(delta: float, lam: float, k: float) -> dict[str, float]:
    """One row of the (delta, lambda, k, a, R_J, R_T) table."""
    rep = moments(construct(delta, lam, k))
    return {"delta": delta, "lambda": lam, "k": k, "a": scale_ratio(delta, lam, k), "r_j": rep.r_j, "r_t": rep.r_t}
