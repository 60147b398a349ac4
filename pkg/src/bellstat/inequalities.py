"""Eberhard and Clauser-Horne statistics on count records.

Two-detector Eberhard form, per block::

    j_pair   = n_oo(a1b1) + n_oo(a1b2) + n_oo(a2b1) - n_oo(a2b2)
    j_single = S_A(a1) + S_B(b1)
    j        = j_single - j_pair          (local realism: j >= 0)

The ratio form divides instead of subtracting::

    t = j_pair / j_single                 (local realism: t <= 1)

The probability, probability-ratio, rate-ratio and count-ratio versions of
the CH inequality differ from ``t`` only by a common positive factor in
numerator and denominator, so one ratio function serves all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from .counts import PAIR_KEYS, BlockRecord, ExperimentSeries
from .errors import CapabilityError, NormalizationError, UndefinedRatioError, ValidationError

SINGLES_RULES = ("crossed", "first", "average")
"""Which run supplies S_A(a1) and S_B(b1).

``crossed`` (default)
    S_A from the (a1, b2) run and S_B from the (a2, b1) run.  These are the
    runs whose e/u cells enter the four-detector inequality, which makes the
    two-detector reduction an exact identity.
``first``
    Both singles from the (a1, b1) run.
``average``
    S_A averaged over (a1, b1) and (a1, b2); S_B over (a1, b1) and (a2, b1).
"""

DRIFT_NOTE = (
    "drift normalization assumes intensity ratios between runs sharing a "
    "setting equal the ratio of the shared side's singles; the (a2,b2) run "
    "uses the geometric mean of its two paths to the reference"
)


@dataclass(frozen=True)
class JValue:
    j_pair: float
    j_single: float
    j: float

    def __post_init__(self):
        if self.j != self.j_single - self.j_pair:
            raise ValidationError("j must equal j_single - j_pair")

    @classmethod
    def from_parts(cls, j_pair: float, j_single: float) -> JValue:
        j_pair, j_single = float(j_pair), float(j_single)
        return cls(j_pair, j_single, j_single - j_pair)


@dataclass(frozen=True)
class TValue:
    numerator: float
    denominator: float
    t: float

    def __post_init__(self):
        if not self.denominator > 0:
            raise UndefinedRatioError(f"ratio denominator must be positive, got {self.denominator}")
        if self.t != self.numerator / self.denominator:
            raise ValidationError("t must equal numerator / denominator")

    @classmethod
    def from_parts(cls, numerator: float, denominator: float) -> TValue:
        numerator, denominator = float(numerator), float(denominator)
        if not denominator > 0:
            raise UndefinedRatioError(
                "ratio statistic undefined: S_A(a1) + S_B(b1) is zero"
            )
        return cls(numerator, denominator, numerator / denominator)


@dataclass(frozen=True)
class ProbabilityQuad:
    """Coincidence probabilities p(ai, bj) and single probabilities pA(a1), pB(b1)."""

    p11: float
    p12: float
    p21: float
    p22: float
    pA: float
    pB: float

    def __post_init__(self):
        for name in ("p11", "p12", "p21", "p22", "pA", "pB"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {value!r}")
        if self.p11 > min(self.pA, self.pB):
            raise ValidationError("p11 cannot exceed either single probability")


@dataclass(frozen=True)
class FourDetectorJ:
    """Eberhard's four-detector J and the two-detector value it reduces to."""

    j: float
    reduced: JValue


@dataclass(frozen=True)
class EquivalenceReport:
    j: JValue
    t: TValue | None
    consistent: bool


def singles(rec: BlockRecord, rule: str = "crossed") -> tuple[float, float]:
    """Return (S_A(a1), S_B(b1)) under the chosen selection rule."""
    if rule == "crossed":
        return rec["a1b2"].s_a, rec["a2b1"].s_b
    if rule == "first":
        return rec["a1b1"].s_a, rec["a1b1"].s_b
    if rule == "average":
        return (
            (rec["a1b1"].s_a + rec["a1b2"].s_a) / 2,
            (rec["a1b1"].s_b + rec["a2b1"].s_b) / 2,
        )
    raise ValidationError(f"unknown singles rule {rule!r}; choose from {SINGLES_RULES}")


def _pair_sum(rec: BlockRecord):
    return rec["a1b1"].n_oo + rec["a1b2"].n_oo + rec["a2b1"].n_oo - rec["a2b2"].n_oo


def eberhard_j(rec: BlockRecord, singles_rule: str = "crossed") -> JValue:
    s_a, s_b = singles(rec, singles_rule)
    return JValue.from_parts(_pair_sum(rec), s_a + s_b)


def eberhard_j_four(rec: BlockRecord) -> FourDetectorJ:
    """Eberhard's original inequality over the o/e/u outcome cells.

    ``J = n_oe(a1b2) + n_ou(a1b2) + n_eo(a2b1) + n_uo(a2b1) + n_oo(a2b2) - n_oo(a1b1)``
    """
    r12, r21 = rec["a1b2"], rec["a2b1"]
    needed = {"a1b2": ("n_oe", "n_ou"), "a2b1": ("n_eo", "n_uo")}
    for key, names in needed.items():
        run = rec[key]
        absent = [n for n in names if getattr(run, n) is None]
        if absent:
            raise CapabilityError(
                f"four-detector J needs {', '.join(absent)} in the {key} run"
            )
    j = r12.n_oe + r12.n_ou + r21.n_eo + r21.n_uo + rec["a2b2"].n_oo - rec["a1b1"].n_oo
    return FourDetectorJ(float(j), eberhard_j(rec, "crossed"))


def ch_probability_margin(q: ProbabilityQuad) -> float:
    """``(p11 + p12 + p21 - p22) - (pA + pB)``; local realism requires <= 0."""
    return (q.p11 + q.p12 + q.p21 - q.p22) - (q.pA + q.pB)


def probability_quad(rec: BlockRecord, n_pairs: float, singles_rule: str = "crossed") -> ProbabilityQuad:
    """Divide a record's counts by the number of emitted pairs."""
    if not n_pairs > 0:
        raise ValidationError("number of emitted pairs must be positive")
    s_a, s_b = singles(rec, singles_rule)
    return ProbabilityQuad(
        rec["a1b1"].n_oo / n_pairs,
        rec["a1b2"].n_oo / n_pairs,
        rec["a2b1"].n_oo / n_pairs,
        rec["a2b2"].n_oo / n_pairs,
        s_a / n_pairs,
        s_b / n_pairs,
    )


def ratio_T(rec: BlockRecord, singles_rule: str = "crossed") -> TValue:
    s_a, s_b = singles(rec, singles_rule)
    return TValue.from_parts(_pair_sum(rec), s_a + s_b)


def equivalence_check(rec: BlockRecord, singles_rule: str = "crossed") -> EquivalenceReport:
    """Evaluate both forms and confirm they agree on the direction of violation."""
    j = eberhard_j(rec, singles_rule)
    if j.j_single > 0:
        t = ratio_T(rec, singles_rule)
        consistent = (j.j >= 0) == (t.t <= 1)
    else:
        t = None
        consistent = True
    return EquivalenceReport(j, t, consistent)


def relative_intensities(rec: BlockRecord) -> dict[str, float]:
    """Estimated pair-emission intensity of each run relative to (a1, b1).

    Runs sharing the b1 setting are compared through B-side singles, runs
    sharing a1 through A-side singles.  (a2, b2) shares a setting with both
    (a2, b1) and (a1, b2); the two resulting estimates are combined by their
    geometric mean.
    """
    for key in PAIR_KEYS:
        run = rec[key]
        for side in ("s_a", "s_b"):
            if not getattr(run, side) > 0:
                raise NormalizationError(
                    f"block {rec.block_id}, run {key}: {side} is zero, cannot estimate intensity"
                )
    r11, r12, r21, r22 = (rec[k] for k in PAIR_KEYS)
    rel21 = r21.s_b / r11.s_b
    rel12 = r12.s_a / r11.s_a
    via21 = rel21 * r22.s_a / r21.s_a
    via12 = rel12 * r22.s_b / r12.s_b
    return {"a1b1": 1.0, "a1b2": rel12, "a2b1": rel21, "a2b2": math.sqrt(via21 * via12)}


def drift_normalize(series: ExperimentSeries, reference: str = "a1b1") -> ExperimentSeries:
    """Rescale every run of every block to the emission intensity of ``reference``."""
    if reference not in PAIR_KEYS:
        raise ValidationError(f"reference must be one of {PAIR_KEYS}, got {reference!r}")
    blocks = []
    for block in series.blocks:
        rel = relative_intensities(block)
        factors = {key: rel[reference] / rel[key] for key in PAIR_KEYS}
        blocks.append(block.scaled(factors))
    return ExperimentSeries(tuple(blocks), normalized=True)


def inequality_report(rec: BlockRecord, singles_rule: str = "crossed", normalized: bool = False) -> dict[str, Any]:
    """JSON-ready summary of J and T for one record; T fields are None if undefined."""
    j = eberhard_j(rec, singles_rule)
    out: dict[str, Any] = {"j_pair": j.j_pair, "j_single": j.j_single, "j": j.j}
    if j.j_single > 0:
        t = ratio_T(rec, singles_rule)
        out.update(t_numerator=t.numerator, t_denominator=t.denominator, t=t.t)
    else:
        out.update(t_numerator=j.j_pair, t_denominator=j.j_single, t=None)
    out["normalized"] = normalized
    return out
