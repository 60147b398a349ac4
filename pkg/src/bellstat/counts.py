"""Count data model: setting pairs, blocks, series, and the CSV format.

A run is one (alpha_i, beta_j) setting pair measured for one block of time.
Each run carries its coincidence counts and the o-channel singles on both
sides.  Four-detector data adds the e/u outcome cells.

CSV layout (header required, ``#`` lines ignored)::

    block_id,a_setting,b_setting,n_oo,n_oe,n_eo,n_ee,n_ou,n_uo,s_a,s_b

``n_oe .. n_uo`` may be blank.  Trailing columns ``n_ue,n_eu,n_uu`` and
``duration_s`` are accepted when present.

Singles recorded only once per setting (rather than per run) are stored by
repeating the value in every run that uses that setting; the
``average`` singles rule in :mod:`bellstat.inequalities` then reads them
back unchanged.
"""

from __future__ import annotations

import csv
import io
import math
import re
import warnings
from dataclasses import dataclass, field, fields, replace
from typing import IO, Iterable, Union

from .errors import ConsistencyError, ParseError, StructuralError, ValidationError

Count = Union[int, float]

A_SETTINGS = ("a1", "a2")
B_SETTINGS = ("b1", "b2")
PAIRS = (("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2"))
PAIR_KEYS = tuple(a + b for a, b in PAIRS)

FOUR_DETECTOR_FIELDS = ("n_oe", "n_eo", "n_ee", "n_ou", "n_uo")
EXTRA_OUTCOME_FIELDS = ("n_ue", "n_eu", "n_uu")
COUNT_FIELDS = ("n_oo",) + FOUR_DETECTOR_FIELDS + EXTRA_OUTCOME_FIELDS + ("s_a", "s_b")

CSV_COLUMNS = ("block_id", "a_setting", "b_setting", "n_oo") + FOUR_DETECTOR_FIELDS + ("s_a", "s_b")
OPTIONAL_COLUMNS = EXTRA_OUTCOME_FIELDS + ("duration_s",)

AGGREGATE_ID = -1

_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class SettingLabel:
    side: str
    index: int
    angle: float | None = None

    def __post_init__(self):
        if self.side not in ("A", "B"):
            raise ValidationError(f"side must be 'A' or 'B', got {self.side!r}")
        if self.index not in (1, 2):
            raise ValidationError(f"setting index must be 1 or 2, got {self.index!r}")
        if self.angle is not None and not math.isfinite(self.angle):
            raise ValidationError(f"setting angle must be finite, got {self.angle!r}")

    @property
    def name(self) -> str:
        return ("a" if self.side == "A" else "b") + str(self.index)

    @classmethod
    def parse(cls, name: str, angle: float | None = None) -> SettingLabel:
        if name in A_SETTINGS:
            return cls("A", int(name[1]), angle)
        if name in B_SETTINGS:
            return cls("B", int(name[1]), angle)
        raise ValidationError(f"unknown setting {name!r}")


def _check_count(name: str, value) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    if value < 0:
        raise ValidationError(f"{name} must be non-negative, got {value!r}")


def _same_total(total: Count, parts: Iterable[Count]) -> bool:
    parts = list(parts)
    if isinstance(total, int) and all(isinstance(p, int) for p in parts):
        return total == sum(parts)
    return math.isclose(total, math.fsum(parts), rel_tol=1e-12, abs_tol=1e-9)


@dataclass(frozen=True)
class SettingPairCounts:
    """Counts recorded for one setting pair in one block.

    Counts are integers for raw data and floats after drift normalization.
    """

    a_setting: str
    b_setting: str
    n_oo: Count
    s_a: Count
    s_b: Count
    n_oe: Count | None = None
    n_eo: Count | None = None
    n_ee: Count | None = None
    n_ou: Count | None = None
    n_uo: Count | None = None
    n_ue: Count | None = None
    n_eu: Count | None = None
    n_uu: Count | None = None
    duration: float | None = None

    def __post_init__(self):
        if self.a_setting not in A_SETTINGS:
            raise ValidationError(f"a_setting must be one of {A_SETTINGS}, got {self.a_setting!r}")
        if self.b_setting not in B_SETTINGS:
            raise ValidationError(f"b_setting must be one of {B_SETTINGS}, got {self.b_setting!r}")
        for name in COUNT_FIELDS:
            value = getattr(self, name)
            if value is not None:
                _check_count(name, value)
        if self.duration is not None and not (math.isfinite(self.duration) and self.duration > 0):
            raise ValidationError(f"duration must be positive, got {self.duration!r}")

        if self.s_a < self.n_oo:
            raise ConsistencyError(f"{self.key}: s_a={self.s_a} is smaller than n_oo={self.n_oo}")
        if self.s_b < self.n_oo:
            raise ConsistencyError(f"{self.key}: s_b={self.s_b} is smaller than n_oo={self.n_oo}")
        if self.n_oe is not None and self.n_ou is not None:
            if not _same_total(self.s_a, (self.n_oo, self.n_oe, self.n_ou)):
                raise ConsistencyError(
                    f"{self.key}: s_a={self.s_a} != n_oo+n_oe+n_ou="
                    f"{self.n_oo}+{self.n_oe}+{self.n_ou}"
                )
        if self.n_eo is not None and self.n_uo is not None:
            if not _same_total(self.s_b, (self.n_oo, self.n_eo, self.n_uo)):
                raise ConsistencyError(
                    f"{self.key}: s_b={self.s_b} != n_oo+n_eo+n_uo="
                    f"{self.n_oo}+{self.n_eo}+{self.n_uo}"
                )

    @property
    def key(self) -> str:
        return self.a_setting + self.b_setting

    @property
    def pair(self) -> tuple[SettingLabel, SettingLabel]:
        return SettingLabel.parse(self.a_setting), SettingLabel.parse(self.b_setting)

    @property
    def has_four_detector(self) -> bool:
        return all(getattr(self, name) is not None for name in FOUR_DETECTOR_FIELDS)

    def scaled(self, factor: float) -> SettingPairCounts:
        """Multiply every count (not the duration) by ``factor``."""
        changes = {
            name: float(getattr(self, name)) * factor
            for name in COUNT_FIELDS
            if getattr(self, name) is not None
        }
        return replace(self, **changes)


@dataclass(frozen=True)
class BlockRecord:
    """The four runs of one time block, stored in canonical pair order."""

    block_id: int
    runs: tuple[SettingPairCounts, ...]

    def __post_init__(self):
        runs = tuple(self.runs)
        keys = [r.key for r in runs]
        if len(runs) != 4 or set(keys) != set(PAIR_KEYS):
            missing = sorted(set(PAIR_KEYS) - set(keys))
            dupes = sorted({k for k in keys if keys.count(k) > 1})
            detail = []
            if missing:
                detail.append(f"missing {', '.join(missing)}")
            if dupes:
                detail.append(f"duplicated {', '.join(dupes)}")
            raise StructuralError(
                f"block {self.block_id}: needs exactly one run per setting pair ({'; '.join(detail)})"
            )
        ordered = tuple(sorted(runs, key=lambda r: PAIR_KEYS.index(r.key)))
        object.__setattr__(self, "runs", ordered)

    def run(self, a_setting: str, b_setting: str | None = None) -> SettingPairCounts:
        """Look up a run by ``("a1", "b2")`` or by the key ``"a1b2"``."""
        key = a_setting if b_setting is None else a_setting + b_setting
        try:
            return self.runs[PAIR_KEYS.index(key)]
        except ValueError:
            raise KeyError(key) from None

    def __getitem__(self, key: str) -> SettingPairCounts:
        return self.run(key)

    @property
    def has_four_detector(self) -> bool:
        return all(r.has_four_detector for r in self.runs)

    def scaled(self, factors: dict[str, float]) -> BlockRecord:
        return BlockRecord(self.block_id, tuple(r.scaled(factors[r.key]) for r in self.runs))


@dataclass(frozen=True)
class ExperimentSeries:
    blocks: tuple[BlockRecord, ...]
    normalized: bool = field(default=False, compare=False)

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise StructuralError("a series needs at least one block")
        ids = [b.block_id for b in blocks]
        if len(set(ids)) != len(ids):
            raise StructuralError("block ids must be unique")
        object.__setattr__(self, "blocks", blocks)

    @property
    def l(self) -> int:
        return len(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


def _parse_number(text: str, column: str, line: int) -> Count:
    text = text.strip()
    try:
        value: Count = int(text) if _INT_RE.match(text) else float(text)
    except ValueError:
        raise ParseError(f"column {column}: not a number: {text!r}", line) from None
    if isinstance(value, float) and not math.isfinite(value):
        raise ParseError(f"column {column}: not a finite number: {text!r}", line)
    return value


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, raw


def parse_series(stream: IO[str] | str) -> ExperimentSeries:
    """Read and validate a series from CSV text or a text stream."""
    text = stream if isinstance(stream, str) else stream.read()
    if text.startswith("\ufeff"):
        text = text[1:]
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty input: header row required")

    rows = list(csv.reader([raw for _, raw in lines]))
    header_line = lines[0][0]
    header = [h.strip() for h in rows[0]]
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"header is missing columns: {', '.join(missing)}", header_line)
    unknown = [c for c in header if c not in CSV_COLUMNS + OPTIONAL_COLUMNS]
    if unknown:
        raise ParseError(f"unknown columns: {', '.join(unknown)}", header_line)
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header", header_line)

    grouped: dict[int, list[tuple[int, SettingPairCounts]]] = {}
    durations: list[float] = []
    for (lineno, _), row in zip(lines[1:], rows[1:]):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", lineno)
        cells = dict(zip(header, (c.strip() for c in row)))

        block_id = _parse_number(cells["block_id"], "block_id", lineno)
        if not isinstance(block_id, int):
            raise ParseError(f"block_id must be an integer, got {cells['block_id']!r}", lineno)
        kwargs: dict = {"a_setting": cells["a_setting"], "b_setting": cells["b_setting"]}
        for name in COUNT_FIELDS:
            raw = cells.get(name, "")
            if raw == "":
                if name in ("n_oo", "s_a", "s_b"):
                    raise ParseError(f"column {name} is required", lineno)
                continue
            kwargs[name] = _parse_number(raw, name, lineno)
        if cells.get("duration_s", ""):
            kwargs["duration"] = float(_parse_number(cells["duration_s"], "duration_s", lineno))
            durations.append(kwargs["duration"])
        try:
            run = SettingPairCounts(**kwargs)
        except ValidationError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
        grouped.setdefault(block_id, []).append((lineno, run))

    if not grouped:
        raise StructuralError("no data rows after header")

    blocks = []
    for block_id, entries in grouped.items():
        try:
            blocks.append(BlockRecord(block_id, tuple(run for _, run in entries)))
        except StructuralError as exc:
            raise StructuralError(f"line {entries[0][0]}: {exc}") from None

    if durations and max(durations) != min(durations):
        warnings.warn(
            f"block durations are not constant (min {min(durations)}, max {max(durations)})",
            stacklevel=2,
        )
    return ExperimentSeries(tuple(blocks))


def read_series(path: str) -> ExperimentSeries:
    """Parse a series from a file path; ``-`` reads stdin."""
    if path == "-":
        import sys

        return parse_series(sys.stdin)
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_series(fh)


def _format_count(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def serialize_series(series: ExperimentSeries, stream: IO[str] | None = None) -> str:
    """Write ``series`` as CSV; returns the text (also written to ``stream`` if given)."""
    runs = [run for block in series.blocks for run in block.runs]
    extras = [c for c in EXTRA_OUTCOME_FIELDS if any(getattr(r, c) is not None for r in runs)]
    with_duration = any(r.duration is not None for r in runs)
    header = list(CSV_COLUMNS) + extras + (["duration_s"] if with_duration else [])

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for block in series.blocks:
        for run in block.runs:
            row = [str(block.block_id), run.a_setting, run.b_setting]
            for name in header[3:]:
                if name == "duration_s":
                    row.append(_format_count(run.duration))
                else:
                    row.append(_format_count(getattr(run, name)))
            writer.writerow(row)
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def _sum(values: list[Count]) -> Count:
    if all(isinstance(v, int) for v in values):
        return sum(values)
    return math.fsum(values)


def aggregate(series: ExperimentSeries) -> BlockRecord:
    """Pool all blocks into one record by summing counts per setting pair.

    An optional cell is kept only when every block provides it.  Float sums
    use ``math.fsum`` so the result does not depend on block order.
    """
    if len(series.blocks) == 1:
        return replace(series.blocks[0], block_id=AGGREGATE_ID)
    runs = []
    for key in PAIR_KEYS:
        members = [block[key] for block in series.blocks]
        summed = {}
        for f in fields(SettingPairCounts):
            if f.name in ("a_setting", "b_setting"):
                continue
            values = [getattr(m, f.name) for m in members]
            summed[f.name] = None if any(v is None for v in values) else _sum(values)
        runs.append(SettingPairCounts(key[:2], key[2:], **summed))
    return BlockRecord(AGGREGATE_ID, tuple(runs))
