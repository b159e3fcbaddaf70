"""Satisfaction, perturbation, and antifragility series.

An agent's satisfaction at a period is the signed change of its normalized
price since its previous observed period. A perturbation series is a
system-wide, period-indexed magnitude in [0, 1]; each variant below builds it
from a different channel. Antifragility multiplies the two wherever both are
defined: an agent whose satisfaction tends to rise with system perturbation
scores positive (antifragile), one that suffers under perturbation scores
negative (fragile).

Per-agent contributions to a system mean exist only at periods where the
underlying inputs exist; the mean at a period divides by the number of agents
actually contributing there. All means use compensated summation over inputs
ordered by agent id and period, so results do not depend on scheduling.

Measure ids by market kind:
    stock:  afp (price), afv (price+volume), afx (VIX level), af3m (three
            reference indexes)
    crypto: afp (raw price, system series normalized afterwards), afv
            (volume), afn (lagged own satisfaction magnitude), afm
            (market cap)
"""

from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ComputeError
from .ingestion import CRYPTO, STOCK, AnalysisWindow
from .resampling import (
    MARKET_CAP,
    PRICE,
    VOLUME,
    NormalizedPanel,
    NormalizedSeries,
    TimeScale,
    minmax_normalize,
)

logger = logging.getLogger(__name__)

STOCK_MEASURES = ("af3m", "afp", "afv", "afx")
CRYPTO_MEASURES = ("afm", "afn", "afp", "afv")
MEASURES_BY_KIND = {STOCK: STOCK_MEASURES, CRYPTO: CRYPTO_MEASURES}


@dataclass(frozen=True)
class SatisfactionSeries:
    """Signed normalized-price changes of one agent, always within [-1, 1]."""

    agent_id: str
    scale: TimeScale
    periods: tuple[dt.date, ...]
    values: np.ndarray


@dataclass(frozen=True)
class PerturbationSeries:
    """System-wide perturbation magnitudes, one value per defined period."""

    measure: str
    scale: TimeScale
    periods: tuple[dt.date, ...]
    values: np.ndarray


@dataclass(frozen=True)
class AntifragilityResult:
    """Antifragility of one agent under one measure at one scale."""

    agent_id: str
    measure: str
    scale: TimeScale
    periods: tuple[dt.date, ...]
    instants: np.ndarray
    global_a: float
    n_used: int


def satisfaction(prices: NormalizedSeries) -> SatisfactionSeries:
    """Difference each normalized price against the previous observed one."""
    if len(prices) < 2:
        raise ComputeError(f"agent {prices.agent_id}: need at least 2 periods")
    return SatisfactionSeries(
        agent_id=prices.agent_id,
        scale=prices.scale,
        periods=prices.periods[1:],
        values=np.diff(prices.values),
    )


def _system_mean(contributions) -> tuple[tuple[dt.date, ...], np.ndarray]:
    """Average per-agent (periods, values) contributions period by period.

    ``contributions`` must be ordered by agent id; within each period the
    divisor is the count of agents contributing there.
    """
    bucket: dict[dt.date, list[float]] = {}
    for periods, values in contributions:
        for p, v in zip(periods, values.tolist()):
            bucket.setdefault(p, []).append(v)
    periods = tuple(sorted(bucket))
    means = np.array([math.fsum(bucket[p]) / len(bucket[p]) for p in periods])
    return periods, means


def _abs_diff(series: NormalizedSeries, normalized=True):
    values = series.values if normalized else series.raw
    return series.periods[1:], np.abs(np.diff(values))


def _agents_sorted(panel: NormalizedPanel):
    return [panel.agents[aid] for aid in sorted(panel.agents)]


def _require_nonempty(measure: str, periods) -> None:
    if len(periods) == 0:
        raise ComputeError(f"{measure}: no agent defined at any period")


def perturb_price(panel: NormalizedPanel) -> PerturbationSeries:
    """Price-based perturbation (afp).

    Stocks: mean of per-agent absolute normalized-price changes. Crypto: same
    on raw prices, with the resulting system series min-max normalized
    afterwards.
    """
    if panel.market_kind == STOCK:
        contribs = [_abs_diff(ch[PRICE]) for ch in _agents_sorted(panel)]
        periods, means = _system_mean(contribs)
        _require_nonempty("afp", periods)
        values = np.clip(means, 0.0, 1.0)
    else:
        contribs = [_abs_diff(ch[PRICE], normalized=False) for ch in _agents_sorted(panel)]
        periods, means = _system_mean(contribs)
        _require_nonempty("afp", periods)
        values = minmax_normalize(means)
    return PerturbationSeries("afp", panel.scale, periods, values)


def perturb_volume_stock(
    satisfactions: dict[str, SatisfactionSeries], panel: NormalizedPanel
) -> PerturbationSeries:
    """Stock volume perturbation: |satisfaction + volume change| / 2."""
    contribs = []
    for aid in sorted(panel.agents):
        s = satisfactions[aid]
        periods, dv = _signed_diff(panel.agents[aid][VOLUME])
        # price and volume share the agent's period grid, so s aligns with dv
        contribs.append((periods, np.abs(s.values + dv) / 2.0))
    periods, means = _system_mean(contribs)
    _require_nonempty("afv", periods)
    return PerturbationSeries("afv", panel.scale, periods, means)


def _signed_diff(series: NormalizedSeries):
    return series.periods[1:], np.diff(series.values)


def perturb_volume_crypto(panel: NormalizedPanel) -> PerturbationSeries:
    """Crypto volume perturbation: absolute normalized-volume changes."""
    contribs = [_abs_diff(ch[VOLUME]) for ch in _agents_sorted(panel)]
    periods, means = _system_mean(contribs)
    _require_nonempty("afv", periods)
    return PerturbationSeries("afv", panel.scale, periods, means)


def perturb_marketcap(panel: NormalizedPanel) -> PerturbationSeries:
    """Market-cap perturbation: absolute normalized-cap changes.

    Agents lacking a cap at a period contribute nothing there; caps observed
    either side of a gap are differenced against each other.
    """
    contribs = []
    for aid in sorted(panel.agents):
        cap = panel.agents[aid].get(MARKET_CAP)
        if cap is not None and len(cap) >= 2:
            contribs.append(_abs_diff(cap))
    periods, means = _system_mean(contribs)
    _require_nonempty("afm", periods)
    return PerturbationSeries("afm", panel.scale, periods, means)


def perturb_normalized_price(
    satisfactions: dict[str, SatisfactionSeries], panel: NormalizedPanel
) -> PerturbationSeries:
    """Lagged-satisfaction perturbation (afn): |S| one observed period later."""
    contribs = []
    for aid in sorted(panel.agents):
        s = satisfactions[aid]
        if len(s.periods) >= 2:
            contribs.append((s.periods[1:], np.abs(s.values[:-1])))
    periods, means = _system_mean(contribs)
    _require_nonempty("afn", periods)
    return PerturbationSeries("afn", panel.scale, periods, means)


def perturb_vix(panel: NormalizedPanel) -> PerturbationSeries:
    """VIX perturbation (afx): the normalized level itself, not a change."""
    vix = panel.indexes.get("VIX")
    if vix is None or len(vix) == 0:
        raise ComputeError("afx: no VIX data inside the window")
    return PerturbationSeries("afx", panel.scale, vix.periods, vix.values.copy())


def perturb_three_indexes(panel: NormalizedPanel) -> PerturbationSeries:
    """Three-index perturbation (af3m): mean absolute normalized change of
    NASDAQ, DJI, and SPX; periods missing from any of the three are excluded."""
    parts = []
    for iid in ("NASDAQ", "DJI", "SPX"):
        index = panel.indexes.get(iid)
        if index is None or len(index) < 2:
            raise ComputeError(f"af3m: insufficient {iid} data inside the window")
        periods, diffs = _abs_diff(index)
        parts.append(dict(zip(periods, diffs.tolist())))
    common = sorted(set(parts[0]) & set(parts[1]) & set(parts[2]))
    if not common:
        raise ComputeError("af3m: indexes share no differenced period")
    values = np.array([math.fsum([p[t] for p in parts]) / 3.0 for t in common])
    return PerturbationSeries("af3m", panel.scale, tuple(common), values)


def antifragility(
    s: SatisfactionSeries, p: PerturbationSeries
) -> AntifragilityResult | None:
    """Combine one agent's satisfaction with a system perturbation series.

    The product is taken at every period where both are defined; the global
    value is the plain mean of those instants. Returns None (the agent is
    excluded for this measure) when no period overlaps.
    """
    pmap = dict(zip(p.periods, p.values.tolist()))
    periods = []
    instants = []
    for t, sv in zip(s.periods, s.values.tolist()):
        pv = pmap.get(t)
        if pv is not None:
            periods.append(t)
            instants.append(sv * pv)
    if not periods:
        logger.info(
            "agent %s excluded for %s at scale %d: no overlapping periods",
            s.agent_id, p.measure, int(p.scale),
        )
        return None
    return AntifragilityResult(
        agent_id=s.agent_id,
        measure=p.measure,
        scale=p.scale,
        periods=tuple(periods),
        instants=np.array(instants),
        global_a=math.fsum(instants) / len(instants),
        n_used=len(instants),
    )


@dataclass(frozen=True)
class WindowScaleResults:
    """Everything one (window, scale) case produced."""

    window: AnalysisWindow
    scale: TimeScale
    alive_agents: tuple[str, ...]
    satisfactions: dict[str, SatisfactionSeries]
    perturbations: dict[str, PerturbationSeries]
    results: dict[str, dict[str, AntifragilityResult]]


def compute_measures(panel: NormalizedPanel, measures) -> WindowScaleResults:
    """Run the requested measures over one panel and bound-check everything."""
    for m in measures:
        if m not in MEASURES_BY_KIND[panel.market_kind]:
            raise ComputeError(f"measure {m} invalid for {panel.market_kind}")

    satisfactions = {
        aid: satisfaction(panel.agents[aid][PRICE]) for aid in sorted(panel.agents)
    }

    perturbations: dict[str, PerturbationSeries] = {}
    for m in sorted(measures):
        if m == "afp":
            perturbations[m] = perturb_price(panel)
        elif m == "afv" and panel.market_kind == STOCK:
            perturbations[m] = perturb_volume_stock(satisfactions, panel)
        elif m == "afv":
            perturbations[m] = perturb_volume_crypto(panel)
        elif m == "afm":
            perturbations[m] = perturb_marketcap(panel)
        elif m == "afn":
            perturbations[m] = perturb_normalized_price(satisfactions, panel)
        elif m == "afx":
            perturbations[m] = perturb_vix(panel)
        elif m == "af3m":
            perturbations[m] = perturb_three_indexes(panel)

    results: dict[str, dict[str, AntifragilityResult]] = {}
    for m, pser in perturbations.items():
        per_measure = {}
        for aid in sorted(satisfactions):
            result = antifragility(satisfactions[aid], pser)
            if result is not None:
                per_measure[aid] = result
        results[m] = per_measure

    out = WindowScaleResults(
        window=panel.window,
        scale=panel.scale,
        alive_agents=tuple(sorted(panel.agents)),
        satisfactions=satisfactions,
        perturbations=perturbations,
        results=results,
    )
    check_bounds(out)
    return out


def check_bounds(ws: WindowScaleResults) -> None:
    """Assert the range invariants every run must satisfy."""
    for aid, s in ws.satisfactions.items():
        if len(s.values) and (s.values.min() < -1.0 or s.values.max() > 1.0):
            raise ComputeError(f"satisfaction out of [-1, 1] for agent {aid}")
    for m, p in ws.perturbations.items():
        if len(p.values) and (p.values.min() < 0.0 or p.values.max() > 1.0):
            raise ComputeError(f"perturbation {m} out of [0, 1]")
    for m, per_measure in ws.results.items():
        for aid, r in per_measure.items():
            peak = np.abs(r.instants).max()
            if peak > 1.0:
                raise ComputeError(f"instant antifragility out of [-1, 1]: {m}/{aid}")
            if abs(r.global_a) > peak:
                raise ComputeError(f"global antifragility exceeds instants: {m}/{aid}")
            if r.n_used != len(r.instants) or r.n_used < 1:
                raise ComputeError(f"inconsistent n_used: {m}/{aid}")
