"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a single PASS/FAIL line through the ``criterion`` fixture.
The Vienna per-block data is not public, so criteria 1 to 3 start from the
published summary statistics (mean and standard error over 30 blocks).
"""

import json
import math
import time

import numpy as np
import pytest

from bellstat.cli import EXIT_OK, main
from bellstat.counts import PAIR_KEYS, BlockRecord, SettingPairCounts
from bellstat.inequalities import eberhard_j_four, equivalence_check
from bellstat.nonequivalence import construct, demo_row, empirical_check, moments
from bellstat.significance import BlockStatistics, chebyshev_interval, sigma_violation
from bellstat.simulator import (
    SimConfig,
    SourceModel,
    analytic_sigma_count,
    expected_j,
    lhv_strategies,
    optimize_eberhard,
    strategy_j,
)

LEVEL = 0.9995
VIENNA_J = BlockStatistics.from_summary(-4224.0, 61.23, 30)
VIENNA_T = BlockStatistics.from_summary(1.0394, 0.0006, 30)
GAP = (math.sqrt(2) - 1) / 2


def within(value, target, tol):
    return abs(value - target) <= tol


def test_criterion_1_chebyshev_j(criterion):
    iv = chebyshev_interval(VIENNA_J, LEVEL)
    ok = within(iv.c, 2738, 1) and within(iv.lo, -6962, 1) and within(iv.hi, -1486, 1)
    assert criterion(1, ok, f"c={iv.c:.2f} interval=[{iv.lo:.2f}, {iv.hi:.2f}]")


def test_criterion_2_chebyshev_t(criterion):
    iv = chebyshev_interval(VIENNA_T, LEVEL)
    ok = within(iv.c, 0.027, 1e-3) and within(iv.lo, 1.0124, 1e-3) and within(iv.hi, 1.0664, 1e-3)
    assert criterion(2, ok, f"c={iv.c:.5f} interval=[{iv.lo:.5f}, {iv.hi:.5f}]")


def test_criterion_3_sigma_counts(criterion):
    sj = sigma_violation(VIENNA_J, 0.0, "below")
    st = sigma_violation(VIENNA_T, 1.0, "above")
    ok = within(sj, 68.99, 0.1) and within(st, 65.7, 0.1) and sj > 60 and st > 60
    assert criterion(3, ok, f"sigma_J={sj:.3f} sigma_T={st:.3f}")


def test_criterion_4_appendix_instance(criterion):
    start = time.perf_counter()
    row = demo_row(0.1, 102, 69)
    m = construct(0.1, 102, 69)
    exact = moments(m)
    emp = empirical_check(m, 1_000_000, seed=2024)
    pairs = {
        "mu_j": (emp.mu_j, exact.mu_j),
        "sigma_j": (emp.sigma_j, exact.sigma_j),
        "mu_t": (emp.mu_t, exact.mu_t),
        "sigma_t": (emp.sigma_t, exact.sigma_t),
        "r_j": (emp.r_j, exact.r_j),
        "r_t": (emp.r_t, exact.r_t),
    }
    worst = max(abs(e / x - 1) for e, x in pairs.values())
    elapsed = time.perf_counter() - start
    ok = (
        within(row["a"], 0.0112, 1e-4)
        and row["r_t"] <= 0.201
        and abs(row["r_j"] / 69.45 - 1) <= 0.02
        and worst <= 0.05
        and elapsed < 5
    )
    assert criterion(
        4, ok,
        f"a={row['a']:.6f} R_T={row['r_t']:.6f} R_J={row['r_j']:.3f} "
        f"max MC rel err={worst:.4f} ({elapsed:.1f}s)",
    )


def fuzzed_records(rng, n):
    """Random consistent count records carrying all o/e/u cells.

    A tenth of the records are rescaled to floats, and one in a thousand is
    built to sit exactly on the boundary j = 0.
    """
    cells = rng.integers(0, rng.integers(1, 10**6, size=(n, 1, 1)), size=(n, 4, 6))
    scales = np.where(rng.random(n) < 0.1, rng.uniform(0.01, 100, n), 1.0)
    for i in range(n):
        runs = []
        for k, key in enumerate(PAIR_KEYS):
            oo, oe, eo, ee, ou, uo = (int(v) for v in cells[i, k])
            runs.append(SettingPairCounts(
                key[:2], key[2:], n_oo=oo, s_a=oo + oe + ou, s_b=oo + eo + uo,
                n_oe=oe, n_eo=eo, n_ee=ee, n_ou=ou, n_uo=uo,
            ))
        rec = BlockRecord(i, tuple(runs))
        if i % 1000 == 0:
            # pin n_oo(a1b1) so that j_pair equals j_single exactly
            r11, r12, r21 = rec["a1b1"], rec["a1b2"], rec["a2b1"]
            oo = r12.n_oe + r12.n_ou + r21.n_eo + r21.n_uo + rec["a2b2"].n_oo
            pinned = SettingPairCounts(
                "a1", "b1", n_oo=oo, s_a=oo + r11.n_oe + r11.n_ou, s_b=oo + r11.n_eo + r11.n_uo,
                n_oe=r11.n_oe, n_eo=r11.n_eo, n_ee=r11.n_ee, n_ou=r11.n_ou, n_uo=r11.n_uo,
            )
            rec = BlockRecord(i, (pinned, r12, r21, rec["a2b2"]))
        if scales[i] != 1.0:
            rec = rec.scaled({key: float(scales[i]) for key in PAIR_KEYS})
        yield rec


def test_criterion_5_equivalence_suite(criterion):
    start = time.perf_counter()
    n = 100_000
    bad_direction = bad_identity = bad_four = checked_four = boundary = undefined = 0
    for rec in fuzzed_records(np.random.default_rng(5), n):
        eq = equivalence_check(rec)
        j = eq.j
        if j.j == 0:
            boundary += 1
        if eq.t is None:
            undefined += 1
            continue
        if (j.j >= 0) != (eq.t.t <= 1):
            bad_direction += 1
        if abs(j.j - j.j_single * (1 - eq.t.t)) > 1e-9 * max(abs(j.j), j.j_single):
            bad_identity += 1
        if isinstance(rec["a1b1"].n_oo, int):
            checked_four += 1
            four = eberhard_j_four(rec)
            bad_four += four.j != four.reduced.j
    elapsed = time.perf_counter() - start
    ok = bad_direction == 0 and bad_identity == 0 and bad_four == 0 and checked_four > 0 and elapsed < 10
    assert criterion(
        5, ok,
        f"{n} records: direction mismatches={bad_direction} identity failures={bad_identity} "
        f"four-detector mismatches={bad_four}/{checked_four} boundary={boundary} undefined T={undefined} "
        f"({elapsed:.1f}s)",
    )


def test_criterion_6_lhv_bound(criterion):
    strategies = lhv_strategies()
    values = [strategy_j(s).j for s in strategies]
    ok = len(strategies) == 81 and min(values) == 0
    assert criterion(6, ok, f"{len(strategies)} strategies, min J={min(values)}")


@pytest.mark.slow
def test_criterion_7_quantum_operating_point(criterion):
    start = time.perf_counter()
    j = expected_j(SourceModel.from_degrees(1.0, (0, 45, 22.5, -22.5)))
    best = optimize_eberhard(1.0, 0.0)
    elapsed = time.perf_counter() - start
    ok = within(j, -GAP, 1e-9) and within(best.j_min, -GAP, 1e-4) and elapsed < 30
    assert criterion(
        7, ok,
        f"expected_j={j:.12f} target={-GAP:.12f} optimizer j_min={best.j_min:.10f} ({elapsed:.1f}s)",
    )


@pytest.mark.slow
def test_criterion_8_efficiency_threshold(criterion):
    start = time.perf_counter()
    at_070 = optimize_eberhard(0.70, 0.0)
    at_060 = optimize_eberhard(0.60, 0.0)
    at_075 = optimize_eberhard(0.75, 0.0)
    elapsed = time.perf_counter() - start
    ok = at_070.j_min < -1e-4 and at_060.j_min >= -1e-6 and at_075.r < 0.99 and elapsed < 300
    assert criterion(
        8, ok,
        f"j_min(0.70)={at_070.j_min:.3e} j_min(0.60)={at_060.j_min:.3e} "
        f"r*(0.75)={at_075.r:.4f} ({elapsed:.1f}s)",
    )


@pytest.mark.slow
def test_criterion_9_end_to_end(criterion, capsys, tmp_path):
    start = time.perf_counter()
    eta, blocks, seed = 0.9, 30, 20240
    best = optimize_eberhard(eta, 0.0)
    src = SourceModel(best.r, best.angles, eta, eta, 0.0)
    # sigma-count grows like sqrt(pairs); size the blocks for about 60
    per_pair = analytic_sigma_count(src, SimConfig(1, blocks, 0))
    pairs = math.ceil((60 / per_pair) ** 2)
    expected = analytic_sigma_count(src, SimConfig(pairs, blocks, 0))

    csv_path = tmp_path / "sim.csv"
    code_sim = main(["simulate", "--optimal", "--eta", str(eta), "--pairs", str(pairs),
                     "--blocks", str(blocks), "--seed", str(seed), "-o", str(csv_path)])
    capsys.readouterr()
    code = main(["analyze", str(csv_path), "--json", "--level", str(LEVEL)])
    report = json.loads(capsys.readouterr().out)
    j = report["j"]
    observed = j["sigma_violation"]
    iv = j["chebyshev"]
    elapsed = time.perf_counter() - start
    ok = (
        code_sim == EXIT_OK
        and code == EXIT_OK
        and expected > 50
        and iv["hi"] < 0
        and abs(observed / expected - 1) <= 0.3
        and elapsed < 60
    )
    assert criterion(
        9, ok,
        f"pairs/block={pairs} expected sigma={expected:.1f} observed sigma={observed:.1f} "
        f"interval=[{iv['lo']:.0f}, {iv['hi']:.0f}] ({elapsed:.1f}s)",
    )
