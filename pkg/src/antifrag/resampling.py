"""Time-scale resampling and per-agent min-max normalization.

Scale codes: 0 = daily, 1 = weekly (ISO-8601 weeks), 2 = monthly (calendar
months). Every period is identified by its canonical first calendar day (the
date itself, the week's Monday, the month's first), which makes periods
comparable across agents regardless of which days each one actually traded.

Within a period, ``open`` and ``market_cap`` come from the period's first
observation and ``volume`` is summed. A series is only usable at a scale if
it spans at least two periods. Gaps are never filled: each series is treated
as its own observation sequence.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import ComputeError
from .ingestion import (
    CRYPTO,
    AgentSeries,
    AnalysisWindow,
    IndexSeries,
    RawObservation,
)

PRICE = "price"
VOLUME = "volume"
MARKET_CAP = "market_cap"
INDEX = "index"


class TimeScale(IntEnum):
    DAILY = 0
    WEEKLY = 1
    MONTHLY = 2


def period_start(day: dt.date, scale: TimeScale) -> dt.date:
    """Map a date to the canonical first day of its period."""
    if scale == TimeScale.DAILY:
        return day
    if scale == TimeScale.WEEKLY:
        return day - dt.timedelta(days=day.weekday())
    if scale == TimeScale.MONTHLY:
        return day.replace(day=1)
    raise ValueError(f"unknown time scale {scale!r}")


def resample(series: AgentSeries, scale: TimeScale) -> AgentSeries | None:
    """Collapse a window-sliced series to one observation per period.

    The resampled observation carries the period's canonical start date, the
    first open, the summed volume, and the first observation's market cap
    (absent if that observation had none). Returns None when fewer than two
    periods remain.
    """
    grouped: dict[dt.date, list[RawObservation]] = {}
    for obs in series.observations:
        grouped.setdefault(period_start(obs.date, scale), []).append(obs)
    if len(grouped) < 2:
        return None
    resampled = []
    for start in sorted(grouped):
        bucket = grouped[start]
        resampled.append(
            RawObservation(
                date=start,
                open=bucket[0].open,
                volume=float(np.sum([o.volume for o in bucket])),
                market_cap=bucket[0].market_cap,
            )
        )
    return AgentSeries(series.agent_id, series.market_kind, tuple(resampled))


def minmax_normalize(values) -> np.ndarray:
    """Rescale a sequence into [0, 1]; a zero-range sequence becomes all 0.5."""
    arr = np.asarray(values, dtype=float)
    lo = arr.min()
    hi = arr.max()
    if hi == lo:
        return np.full(arr.shape, 0.5)
    return (arr - lo) / (hi - lo)


@dataclass(frozen=True)
class NormalizedSeries:
    """One agent channel (or one index) on the resampled period grid.

    ``raw`` holds the resampled input values and ``values`` their min-max
    normalization over the analysis window; both align with ``periods``.
    """

    agent_id: str
    scale: TimeScale
    channel: str
    periods: tuple[dt.date, ...]
    raw: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.periods)


@dataclass(frozen=True)
class NormalizedPanel:
    """All alive agents and indexes of one window at one scale."""

    market_kind: str
    window: AnalysisWindow
    scale: TimeScale
    period_axis: tuple[dt.date, ...]
    agents: dict[str, dict[str, NormalizedSeries]]
    indexes: dict[str, NormalizedSeries]


def _normalized(agent_id, scale, channel, periods, raw) -> NormalizedSeries:
    raw = np.asarray(raw, dtype=float)
    return NormalizedSeries(
        agent_id, scale, channel, tuple(periods), raw, minmax_normalize(raw)
    )


def _resample_index(index: IndexSeries, window: AnalysisWindow, scale: TimeScale):
    levels: dict[dt.date, float] = {}
    for day, level in index.values:
        if window.contains(day):
            levels.setdefault(period_start(day, scale), level)
    periods = sorted(levels)
    return periods, [levels[p] for p in periods]


def build_panel(
    agents: list[AgentSeries],
    indexes: list[IndexSeries],
    window: AnalysisWindow,
    scale: TimeScale,
) -> NormalizedPanel:
    """Resample and normalize every alive agent and index over one window.

    ``agents`` must already be sliced to the window. Agents that resample to
    fewer than two periods are dropped; if none survive the panel is empty
    and that is an error. The period axis is the sorted union of the
    surviving agents' periods.
    """
    panel_agents: dict[str, dict[str, NormalizedSeries]] = {}
    axis: set[dt.date] = set()
    market_kind = agents[0].market_kind if agents else CRYPTO
    for series in sorted(agents, key=lambda s: s.agent_id):
        resampled = resample(series, scale)
        if resampled is None:
            continue
        obs = resampled.observations
        periods = tuple(o.date for o in obs)
        axis.update(periods)
        channels = {
            PRICE: _normalized(
                series.agent_id, scale, PRICE, periods, [o.open for o in obs]
            ),
            VOLUME: _normalized(
                series.agent_id, scale, VOLUME, periods, [o.volume for o in obs]
            ),
        }
        cap_pairs = [(o.date, o.market_cap) for o in obs if o.market_cap is not None]
        if cap_pairs:
            channels[MARKET_CAP] = _normalized(
                series.agent_id,
                scale,
                MARKET_CAP,
                [p for p, _ in cap_pairs],
                [c for _, c in cap_pairs],
            )
        panel_agents[series.agent_id] = channels

    if not panel_agents:
        raise ComputeError(
            f"empty panel: no agent alive in window {window.label} at scale {int(scale)}"
        )

    panel_indexes = {}
    for index in indexes:
        periods, levels = _resample_index(index, window, scale)
        if not periods:
            continue
        panel_indexes[index.index_id] = _normalized(
            index.index_id, scale, INDEX, periods, levels
        )

    return NormalizedPanel(
        market_kind=market_kind,
        window=window,
        scale=scale,
        period_axis=tuple(sorted(axis)),
        agents=panel_agents,
        indexes=panel_indexes,
    )
