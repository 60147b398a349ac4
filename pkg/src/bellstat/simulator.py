"""Synthetic Eberhard experiments: quantum source model, local strategies,
multinomial block simulation, and the (r, angles) optimizer.

Source model: the polarization state ``(|HH> + r|VV>) / sqrt(1 + r**2)``
analysed by a polarizing beam splitter on each side.  At analyzer angle
``theta`` the ordinary port projects onto ``cos(theta)|H> + sin(theta)|V>``
and the extraordinary port onto the orthogonal state.  Each photon is then
detected with its arm efficiency (otherwise outcome ``u``), and an
undetected slot may still click from background with probability ``bg``,
split evenly between the ``o`` and ``e`` detectors.

The background treatment is a stand-in: a per-trial click probability with
no rate units.

Outcome arrays are indexed ``[x_A, y_B]`` with the order ``o, e, u``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from .counts import PAIR_KEYS, BlockRecord, ExperimentSeries, SettingPairCounts
from .errors import ValidationError
from .inequalities import JValue

OUTCOMES = ("o", "e", "u")
O, E, U = 0, 1, 2

# Optimal two-detector operating point at unit efficiency, in degrees.
CANONICAL_ANGLES_DEG = (0.0, 45.0, 22.5, -22.5)

BACKGROUND_NOTE = "background model is a stand-in: a unitless per-slot click probability split evenly over o and e"


def _pair_key(pair) -> str:
    key = pair if isinstance(pair, str) else "".join(pair)
    if key not in PAIR_KEYS:
        raise ValidationError(f"unknown setting pair {pair!r}")
    return key


@dataclass(frozen=True)
class SourceModel:
    r: float
    angles: tuple[float, float, float, float]
    eta_a: float = 1.0
    eta_b: float = 1.0
    bg: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if len(self.angles) != 4 or not all(math.isfinite(a) for a in self.angles):
            raise ValidationError("angles must be four finite reals (a1, a2, b1, b2)")
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValidationError(f"r must be non-negative, got {self.r}")
        for name in ("eta_a", "eta_b"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {value}")
        if not 0.0 <= self.bg < 1.0:
            raise ValidationError(f"bg must lie in [0, 1), got {self.bg}")

    @classmethod
    def from_degrees(cls, r: float, angles_deg: Sequence[float], eta: float = 1.0, bg: float = 0.0) -> SourceModel:
        return cls(r, tuple(math.radians(a) for a in angles_deg), eta, eta, bg)

    def setting_angles(self, pair) -> tuple[float, float]:
        key = _pair_key(pair)
        a1, a2, b1, b2 = self.angles
        return (a1 if key[1] == "1" else a2), (b1 if key[3] == "1" else b2)


@dataclass(frozen=True)
class SimConfig:
    pairs_per_block: int
    l: int
    seed: int

    def __post_init__(self):
        if self.pairs_per_block <= 0:
            raise ValidationError("pairs_per_block must be positive")
        if self.l < 1:
            raise ValidationError("block count must be at least 1")
        if self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")


def _channel(eta, bg):
    """Per-side outcome transition (detection loss, then background), shape (..., 3, 3)."""
    eta = np.asarray(eta, dtype=float)
    bg = np.asarray(bg, dtype=float)
    eta, bg = np.broadcast_arrays(eta, bg)
    loss = np.zeros(eta.shape + (3, 3))
    loss[..., O, O] = eta
    loss[..., E, E] = eta
    loss[..., O, U] = 1 - eta
    loss[..., E, U] = 1 - eta
    loss[..., U, U] = 1.0
    noise = np.zeros(eta.shape + (3, 3))
    noise[..., O, O] = 1.0
    noise[..., E, E] = 1.0
    noise[..., U, O] = bg / 2
    noise[..., U, E] = bg / 2
    noise[..., U, U] = 1 - bg
    return loss @ noise


def _ideal_joint(r, alpha, beta):
    """Lossless o/e joint distribution, shape (..., 3, 3) with empty u row/column."""
    r, alpha, beta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, alpha, beta)))
    ca, sa, cb, sb = np.cos(alpha), np.sin(alpha), np.cos(beta), np.sin(beta)
    # A-side port vectors (H, V components): o = (ca, sa), e = (-sa, ca)
    ports_a = ((ca, sa), (-sa, ca))
    ports_b = ((cb, sb), (-sb, cb))
    norm = 1.0 + r * r
    q = np.zeros(r.shape + (3, 3))
    for i, (ah, av) in enumerate(ports_a):
        for j, (bh, bv) in enumerate(ports_b):
            q[..., i, j] = (ah * bh + r * av * bv) ** 2 / norm
    return q


def _joint(r, alpha, beta, eta_a, eta_b, bg):
    q = _ideal_joint(r, alpha, beta)
    ta = _channel(eta_a, bg)
    tb = _channel(eta_b, bg)
    return np.swapaxes(ta, -1, -2) @ q @ tb


def outcome_probs(src: SourceModel, pair) -> np.ndarray:
    """Nine joint outcome probabilities for one setting pair, shape (3, 3)."""
    alpha, beta = src.setting_angles(pair)
    return _joint(src.r, alpha, beta, src.eta_a, src.eta_b, src.bg)


def singles_weights(singles_rule: str = "crossed") -> dict[str, tuple[float, float]]:
    """How much each run's A and B singles contribute to ``j_single``."""
    if singles_rule == "crossed":
        return {"a1b1": (0, 0), "a1b2": (1, 0), "a2b1": (0, 1), "a2b2": (0, 0)}
    if singles_rule == "first":
        return {"a1b1": (1, 1), "a1b2": (0, 0), "a2b1": (0, 0), "a2b2": (0, 0)}
    if singles_rule == "average":
        return {"a1b1": (0.5, 0.5), "a1b2": (0.5, 0), "a2b1": (0, 0.5), "a2b2": (0, 0)}
    raise ValidationError(f"unknown singles rule {singles_rule!r}")


def j_cell_weights(singles_rule: str = "crossed") -> dict[str, np.ndarray]:
    """Per-run 3x3 weights ``w`` such that block ``J = sum_runs sum(w * counts)``."""
    pair_sign = {"a1b1": 1, "a1b2": 1, "a2b1": 1, "a2b2": -1}
    out = {}
    for key, (wa, wb) in singles_weights(singles_rule).items():
        w = np.zeros((3, 3))
        w[O, :] += wa
        w[:, O] += wb
        w[O, O] -= pair_sign[key]
        out[key] = w
    return out


def _expected_j_batch(r, a1, a2, b1, b2, eta_a, eta_b, bg):
    weights = j_cell_weights("crossed")
    settings = {"a1b1": (a1, b1), "a1b2": (a1, b2), "a2b1": (a2, b1), "a2b2": (a2, b2)}
    total = 0.0
    for key, (alpha, beta) in settings.items():
        p = _joint(r, alpha, beta, eta_a, eta_b, bg)
        total = total + np.einsum("...ij,ij->...", p, weights[key])
    return total


def expected_j(src: SourceModel) -> float:
    """Expected J per emitted pair (negative means a quantum violation)."""
    a1, a2, b1, b2 = src.angles
    return float(_expected_j_batch(src.r, a1, a2, b1, b2, src.eta_a, src.eta_b, src.bg))


def j_block_moments(src: SourceModel, pairs_per_block: int, singles_rule: str = "crossed") -> tuple[float, float]:
    """Exact mean and variance of one block's J under multinomial sampling."""
    mean = 0.0
    var = 0.0
    for key, w in j_cell_weights(singles_rule).items():
        p = outcome_probs(src, key)
        m1 = float(np.sum(w * p))
        m2 = float(np.sum(w * w * p))
        mean += pairs_per_block * m1
        var += pairs_per_block * (m2 - m1 * m1)
    return mean, var


def analytic_sigma_count(src: SourceModel, cfg: SimConfig, singles_rule: str = "crossed") -> float:
    """Expected ``|mean J| / SE`` for a simulated series, using the true block std."""
    mean, var = j_block_moments(src, cfg.pairs_per_block, singles_rule)
    return abs(mean) / math.sqrt(var / cfg.l)


def _run_from_counts(key: str, cells: np.ndarray) -> SettingPairCounts:
    c = [int(v) for v in cells.reshape(3, 3).ravel()]
    oo, oe, ou, eo, ee, eu, uo, ue, uu = c
    return SettingPairCounts(
        key[:2],
        key[2:],
        n_oo=oo,
        s_a=oo + oe + ou,
        s_b=oo + eo + uo,
        n_oe=oe,
        n_eo=eo,
        n_ee=ee,
        n_ou=ou,
        n_uo=uo,
        n_ue=ue,
        n_eu=eu,
        n_uu=uu,
    )


def simulate_block(src: SourceModel, pairs: int, block_id: int, rng: np.random.Generator) -> BlockRecord:
    runs = []
    for key in PAIR_KEYS:
        p = np.clip(outcome_probs(src, key).ravel(), 0.0, None)
        runs.append(_run_from_counts(key, rng.multinomial(pairs, p / p.sum())))
    return BlockRecord(block_id, tuple(runs))


def simulate(src: SourceModel, cfg: SimConfig) -> ExperimentSeries:
    """Draw ``cfg.l`` blocks of multinomial counts.

    Block ``i`` uses the ``i``-th child of ``SeedSequence(cfg.seed)``, so
    blocks can be generated in any order with identical results.
    """
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.l)
    blocks = [
        simulate_block(src, cfg.pairs_per_block, i, np.random.default_rng(child))
        for i, child in enumerate(children)
    ]
    return ExperimentSeries(tuple(blocks))


# -- deterministic local strategies ---------------------------------------


@dataclass(frozen=True)
class LhvStrategy:
    """Fixed outcomes: ``a_map = (outcome at a1, outcome at a2)``, same for B."""

    a_map: tuple[str, str]
    b_map: tuple[str, str]

    def __post_init__(self):
        for outcome in self.a_map + self.b_map:
            if outcome not in OUTCOMES:
                raise ValidationError(f"outcome must be one of {OUTCOMES}, got {outcome!r}")
        if len(self.a_map) != 2 or len(self.b_map) != 2:
            raise ValidationError("each side maps exactly two settings")

    def outcomes(self, pair) -> tuple[str, str]:
        key = _pair_key(pair)
        return self.a_map[int(key[1]) - 1], self.b_map[int(key[3]) - 1]


def lhv_strategies() -> list[LhvStrategy]:
    """All 81 deterministic strategies."""
    return [
        LhvStrategy((x1, x2), (y1, y2))
        for x1, x2, y1, y2 in itertools.product(OUTCOMES, repeat=4)
    ]


def strategy_j(s: LhvStrategy) -> JValue:
    """Per-pair J of a deterministic strategy (two-detector form)."""
    def oo(key):
        return int(s.outcomes(key) == ("o", "o"))

    j_pair = oo("a1b1") + oo("a1b2") + oo("a2b1") - oo("a2b2")
    j_single = int(s.a_map[0] == "o") + int(s.b_map[0] == "o")
    return JValue.from_parts(j_pair, j_single)


def strategy_j_four(s: LhvStrategy) -> int:
    """Per-pair J of a deterministic strategy in the four-detector form."""
    x12, y12 = s.outcomes("a1b2")
    x21, y21 = s.outcomes("a2b1")
    return (
        int(x12 == "o" and y12 in ("e", "u"))
        + int(y21 == "o" and x21 in ("e", "u"))
        + int(s.outcomes("a2b2") == ("o", "o"))
        - int(s.outcomes("a1b1") == ("o", "o"))
    )


def lhv_extremal_j() -> tuple[float, LhvStrategy]:
    """Minimum per-pair J over all deterministic strategies, with a witness."""
    best = min(lhv_strategies(), key=lambda s: strategy_j(s).j)
    return strategy_j(best).j, best


# -- optimizer ------------------------------------------------------------


@dataclass(frozen=True)
class OptimizationResult:
    eta: float
    bg: float
    r: float
    angles: tuple[float, float, float, float]
    j_min: float
    evaluations: int

    @property
    def angles_deg(self) -> list[float]:
        return [math.degrees(a) for a in self.angles]

    def source(self) -> SourceModel:
        return SourceModel(self.r, self.angles, self.eta, self.eta, self.bg)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eta": self.eta,
            "bg": self.bg,
            "r": self.r,
            "angles_deg": self.angles_deg,
            "j_min": self.j_min,
            "evaluations": self.evaluations,
        }


def _wrap_angle(theta: float) -> float:
    """Map to [-pi/2, pi/2); analyzer angles are defined modulo pi."""
    return (theta + math.pi / 2) % math.pi - math.pi / 2


def _canonical(x: np.ndarray) -> tuple[float, tuple[float, ...]]:
    """Fold a parameter vector to r in [0, 1] with wrapped angles.

    The state with ratio r at angles theta equals the state with 1/r at
    angles theta + 90 degrees.
    """
    r = abs(float(x[0]))
    angles = [float(a) for a in x[1:]]
    if r > 1.0:
        r = 1.0 / r
        angles = [a + math.pi / 2 for a in angles]
    return r, tuple(_wrap_angle(a) for a in angles)


GRID_ANGLE_STEP_DEG = 15.0
GRID_R = tuple(round(0.1 * i, 1) for i in range(1, 11))


def optimize_eberhard(
    eta: float,
    bg: float = 0.0,
    *,
    n_seeds: int = 5,
    max_evaluations: int = 10_000,
    xtol: float = 1e-9,
) -> OptimizationResult:
    """Minimize expected J over (r, a1, a2, b1, b2) at fixed efficiency and background.

    A coarse grid (15 degree angles, r = 0.1 .. 1.0) picks ``n_seeds``
    starting points; each is refined by Nelder-Mead until the simplex
    shrinks below ``xtol`` or ``max_evaluations`` is spent.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"eta must lie in [0, 1], got {eta}")
    if not 0.0 <= bg < 1.0:
        raise ValidationError(f"bg must lie in [0, 1), got {bg}")

    grid_angles = np.radians(np.arange(0.0, 180.0, GRID_ANGLE_STEP_DEG))
    mesh = np.meshgrid(np.asarray(GRID_R), grid_angles, grid_angles, grid_angles, grid_angles, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    values = _expected_j_batch(*points.T, eta, eta, bg)
    evaluations = len(points)
    order = np.argsort(values, kind="stable")

    seeds: list[np.ndarray] = []
    seen: set[tuple] = set()
    for idx in order:
        key = tuple(np.round(points[idx], 9))
        if key not in seen:
            seen.add(key)
            seeds.append(points[idx])
        if len(seeds) == n_seeds:
            break

    def objective(x):
        return float(_expected_j_batch(abs(x[0]), x[1], x[2], x[3], x[4], eta, eta, bg))

    best_x = seeds[0]
    best_f = float(values[order[0]])
    steps = np.array([0.05] + [math.radians(5.0)] * 4)
    for x0 in seeds:
        simplex = np.vstack([x0] + [x0 + np.eye(5)[i] * steps[i] for i in range(5)])
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": xtol / 2,
                "fatol": 1e-16,
                "maxfev": max_evaluations,
            },
        )
        evaluations += int(res.nfev)
        if res.fun < best_f:
            best_f, best_x = float(res.fun), res.x

    r, angles = _canonical(np.asarray(best_x))
    j_min = float(_expected_j_batch(r, *angles, eta, eta, bg))
    return OptimizationResult(float(eta), float(bg), r, angles, j_min, evaluations)
