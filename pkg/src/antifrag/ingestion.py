"""Loaders for per-agent market histories, index series, and top-performer lists.

Agent files are CSV with header ``date,open,volume`` plus an optional
``market_cap`` column (cryptocurrencies only). Index files are CSV with header
``date,level``. Top-performer files are JSON objects mapping a year to a list
of agent ids. All dates are ISO ``YYYY-MM-DD``.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import IngestionError

logger = logging.getLogger(__name__)

STOCK = "stock"
CRYPTO = "crypto"
MARKET_KINDS = (STOCK, CRYPTO)

INDEX_IDS = ("VIX", "NASDAQ", "DJI", "SPX")


@dataclass(frozen=True)
class RawObservation:
    """One trading record as it appears in an input file."""

    date: dt.date
    open: float
    volume: float
    market_cap: float | None = None


@dataclass(frozen=True)
class AgentSeries:
    """Full or sliced history for one stock or cryptocurrency."""

    agent_id: str
    market_kind: str
    observations: tuple[RawObservation, ...]

    def __post_init__(self):
        if self.market_kind not in MARKET_KINDS:
            raise IngestionError(
                f"agent {self.agent_id}: unknown market kind {self.market_kind!r}"
            )
        if not self.observations:
            raise IngestionError(f"agent {self.agent_id}: no observations")
        prev = None
        for obs in self.observations:
            if prev is not None and obs.date <= prev:
                raise IngestionError(
                    f"agent {self.agent_id}: dates not strictly increasing at {obs.date}"
                )
            prev = obs.date
            if obs.open < 0 or obs.volume < 0:
                raise IngestionError(
                    f"agent {self.agent_id}: negative value at {obs.date}"
                )
            if obs.market_cap is not None and obs.market_cap < 0:
                raise IngestionError(
                    f"agent {self.agent_id}: negative market_cap at {obs.date}"
                )
            if self.market_kind == STOCK and obs.market_cap is not None:
                raise IngestionError(
                    f"agent {self.agent_id}: market_cap not allowed for stocks"
                )

    @property
    def first_date(self) -> dt.date:
        return self.observations[0].date

    @property
    def last_date(self) -> dt.date:
        return self.observations[-1].date


@dataclass(frozen=True)
class IndexSeries:
    """A market index, ordered date -> level."""

    index_id: str
    values: tuple[tuple[dt.date, float], ...]

    def __post_init__(self):
        if self.index_id not in INDEX_IDS:
            raise IngestionError(f"unknown index id {self.index_id!r}")
        if not self.values:
            raise IngestionError(f"index {self.index_id}: no observations")
        prev = None
        for day, level in self.values:
            if prev is not None and day <= prev:
                raise IngestionError(
                    f"index {self.index_id}: dates not strictly increasing at {day}"
                )
            prev = day
            if level < 0:
                raise IngestionError(f"index {self.index_id}: negative level at {day}")


@dataclass(frozen=True)
class TopPerformerList:
    """Agents singled out as the best performers of one year."""

    year: int
    agent_ids: frozenset[str]
    source_label: str

    def __post_init__(self):
        if not self.agent_ids:
            raise IngestionError(f"empty top-performer list for year {self.year}")


@dataclass(frozen=True)
class AnalysisWindow:
    """A closed date interval the pipeline analyzes as one unit."""

    start: dt.date
    end: dt.date
    label: str

    def __post_init__(self):
        if self.start > self.end:
            raise IngestionError(
                f"window {self.label}: start {self.start} after end {self.end}"
            )

    def contains(self, day: dt.date) -> bool:
        return self.start <= day <= self.end

    @classmethod
    def calendar_year(cls, year: int) -> "AnalysisWindow":
        return cls(dt.date(year, 1, 1), dt.date(year, 12, 31), str(year))


def _parse_date(text: str, path: Path, line: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise IngestionError(f"{path}: line {line}: bad date {text!r}") from None


def _parse_real(text: str, path: Path, line: int, field: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise IngestionError(
            f"{path}: line {line}: bad {field} value {text!r}"
        ) from None
    if value != value or value in (float("inf"), float("-inf")):
        raise IngestionError(f"{path}: line {line}: non-finite {field} value")
    if value < 0:
        raise IngestionError(f"{path}: line {line}: negative {field} value {text!r}")
    return value


def load_agent_series(path: Path, market_kind: str) -> AgentSeries:
    """Read one agent CSV. The agent id is the file's stem.

    Rows may arrive in any order; they are sorted by date. Duplicate dates,
    malformed fields, and a market_cap column in a stock file are errors.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestionError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header == ["date", "open", "volume"]:
        has_cap = False
    elif header == ["date", "open", "volume", "market_cap"]:
        if market_kind == STOCK:
            raise IngestionError(f"{path}: market_cap not allowed for stocks")
        has_cap = True
    else:
        raise IngestionError(f"{path}: bad header {header!r}")
    if len(rows) == 1:
        raise IngestionError(f"{path}: no data rows")

    observations = []
    seen: dict[dt.date, int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise IngestionError(
                f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        day = _parse_date(row[0], path, lineno)
        if day in seen:
            raise IngestionError(
                f"{path}: line {lineno}: duplicate date {day} (first at line {seen[day]})"
            )
        seen[day] = lineno
        open_ = _parse_real(row[1], path, lineno, "open")
        volume = _parse_real(row[2], path, lineno, "volume")
        cap = None
        if has_cap and row[3].strip() != "":
            cap = _parse_real(row[3], path, lineno, "market_cap")
        observations.append(RawObservation(day, open_, volume, cap))

    observations.sort(key=lambda o: o.date)
    return AgentSeries(path.stem, market_kind, tuple(observations))


def load_index_series(path: Path, index_id: str) -> IndexSeries:
    """Read one index CSV. Dates must already be strictly increasing."""
    path = Path(path)
    if index_id not in INDEX_IDS:
        raise IngestionError(f"{path}: unknown index id {index_id!r}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestionError(f"{path}: empty file")
    if [h.strip() for h in rows[0]] != ["date", "level"]:
        raise IngestionError(f"{path}: bad header {rows[0]!r}")
    if len(rows) == 1:
        raise IngestionError(f"index {index_id}: no observations")

    values = []
    prev = None
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise IngestionError(
                f"{path}: line {lineno}: expected 2 fields, got {len(row)}"
            )
        day = _parse_date(row[0], path, lineno)
        if prev is not None and day <= prev:
            raise IngestionError(f"{path}: line {lineno}: out-of-order date {day}")
        prev = day
        level = _parse_real(row[1], path, lineno, "level")
        values.append((day, level))
    return IndexSeries(index_id, tuple(values))


def load_top_performers(path: Path) -> list[TopPerformerList]:
    """Read a top-performer JSON file, one list per year, sorted by year.

    A year listed more than once has its id lists unioned.
    """
    path = Path(path)

    def merge_pairs(pairs):
        merged: dict[str, list] = {}
        for key, value in pairs:
            if key in merged:
                if not isinstance(value, list) or not isinstance(merged[key], list):
                    raise IngestionError(f"{path}: year {key}: expected a list of ids")
                merged[key] = merged[key] + value
            else:
                merged[key] = value
        return merged

    with open(path) as fh:
        try:
            data = json.load(fh, object_pairs_hook=merge_pairs)
        except json.JSONDecodeError as exc:
            raise IngestionError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise IngestionError(f"{path}: expected an object mapping year to id list")

    lists = []
    for key, ids in data.items():
        try:
            year = int(key)
        except ValueError:
            raise IngestionError(f"{path}: bad year key {key!r}") from None
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise IngestionError(f"{path}: year {key}: expected a list of ids")
        if not ids:
            raise IngestionError(f"{path}: empty top-performer list for year {year}")
        lists.append(TopPerformerList(year, frozenset(ids), path.name))
    lists.sort(key=lambda t: t.year)
    return lists


def slice_window(series: AgentSeries, window: AnalysisWindow) -> AgentSeries | None:
    """Restrict a series to the window; None when fewer than 2 rows remain."""
    inside = tuple(o for o in series.observations if window.contains(o.date))
    if len(inside) < 2:
        return None
    return AgentSeries(series.agent_id, series.market_kind, inside)


def agent_csv_text(series: AgentSeries) -> str:
    """Canonical CSV serialization; load_agent_series inverts it exactly."""
    has_cap = any(o.market_cap is not None for o in series.observations)
    header = "date,open,volume,market_cap" if has_cap else "date,open,volume"
    lines = [header]
    for o in series.observations:
        row = f"{o.date.isoformat()},{o.open!r},{o.volume!r}"
        if has_cap:
            row += "," if o.market_cap is None else f",{o.market_cap!r}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def write_agent_csv(series: AgentSeries, path: Path) -> None:
    Path(path).write_text(agent_csv_text(series))
