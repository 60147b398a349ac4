from __future__ import annotations

import pytest

from bellstat.counts import PAIR_KEYS, BlockRecord, ExperimentSeries, SettingPairCounts


def make_block(n_oo, s_a, s_b, block_id=0, **cells):
    """Block from per-run tuples ordered (a1b1, a1b2, a2b1, a2b2).

    ``cells`` may hold extra per-run tuples such as ``n_oe=(...)``.
    """
    if not isinstance(s_a, (tuple, list)):
        s_a = (s_a,) * 4
    if not isinstance(s_b, (tuple, list)):
        s_b = (s_b,) * 4
    runs = []
    for i, key in enumerate(PAIR_KEYS):
        extra = {name: values[i] for name, values in cells.items()}
        runs.append(SettingPairCounts(key[:2], key[2:], n_oo=n_oo[i], s_a=s_a[i], s_b=s_b[i], **extra))
    return BlockRecord(block_id, tuple(runs))


def vienna_like_j_series(mean=-4224, deviations=None):
    """30 blocks whose J values have the given integer mean and chosen spread.

    Default deviations (14 pairs of +-329 and one pair of +-340) give a
    standard error of 61.232 around J = -4224.
    """
    if deviations is None:
        deviations = [329, -329] * 14 + [340, -340]
    blocks = []
    n_oo = (7000, 7000, 7000, 1000)  # j_pair = 20000
    for i, d in enumerate(deviations):
        j_single = 20000 + mean + d
        s_a = j_single // 2
        s_b = j_single - s_a
        blocks.append(
            make_block(n_oo, s_a=(7000, s_a, 7000, 7000), s_b=(7000, 7000, s_b, 7000), block_id=i)
        )
    return ExperimentSeries(tuple(blocks))


@pytest.fixture
def example_block():
    # n_oo = (10, 3, 3, 1); S_A(a1) from a1b2 = 8, S_B(b1) from a2b1 = 8
    return make_block((10, 3, 3, 1), s_a=(10, 8, 3, 1), s_b=(10, 3, 8, 1))


_CRITERIA_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion.

    Lines are printed immediately and repeated in the terminal summary, so
    they survive pytest's output capture.
    """
    log = request.config.stash.setdefault(_CRITERIA_KEY, [])

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        log.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
