"""Acceptance suite: one test per release criterion.

Each test prints a single ``acceptance: <criterion>: PASS`` (or FAIL) line so
the verdicts can be grepped out of a run.  The two real-dataset checks are
skipped unless ANTIFRAG_STOCKS_CONFIG / ANTIFRAG_CRYPTO_CONFIG point at run
configs for datasets with the published top-performer lists.
"""

import json
import os
import random
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

import antifrag.fixture as fixture
from antifrag import pipeline
from antifrag.analysis import distribution, pearson, quantile_bin_summary, top_comparison
from antifrag.config import load_config
from antifrag.ingestion import CRYPTO, STOCK
from antifrag.measures import MEASURES_BY_KIND
from antifrag.resampling import PRICE

from conftest import (
    assert_engine_matches_oracle,
    day,
    engine_case,
    plain_to_agents,
    plain_to_indexes,
    random_market,
    series_to_rows,
    window_over,
)


@contextmanager
def verdict(name):
    try:
        yield
    except BaseException:
        print(f"acceptance: {name}: FAIL")
        raise
    print(f"acceptance: {name}: PASS")


def run_all_measures(plain_agents, plain_indexes, kind, scale):
    agents = plain_to_agents(plain_agents, kind)
    indexes = plain_to_indexes(plain_indexes)
    window = window_over(plain_agents)
    return engine_case(agents, indexes, window, scale, MEASURES_BY_KIND[kind])


def test_bounds_hold_on_a_thousand_random_agents():
    with verdict("bounds on 1000 random agents, 250 daily periods, <30s"):
        started = time.monotonic()
        rng = np.random.default_rng(101)
        violations = 0
        for kind in (STOCK, CRYPTO):
            plain_agents, plain_indexes = random_market(rng, kind, 500, 250)
            _, ws = run_all_measures(plain_agents, plain_indexes, kind, 0)
            for s in ws.satisfactions.values():
                violations += int(np.any(s.values < -1.0) or np.any(s.values > 1.0))
            for p in ws.perturbations.values():
                violations += int(np.any(p.values < 0.0) or np.any(p.values > 1.0))
            for per_agent in ws.results.values():
                for r in per_agent.values():
                    violations += int(np.any(np.abs(r.instants) > 1.0))
                    violations += int(abs(r.global_a) > np.abs(r.instants).max())
        elapsed = time.monotonic() - started
        assert violations == 0
        assert elapsed < 30.0, f"bounds suite took {elapsed:.1f}s"


def test_constant_price_agent_is_exactly_robust():
    with verdict("constant raw price gives a global value of exactly 0"):
        rng = np.random.default_rng(7)
        for kind in (STOCK, CRYPTO):
            plain_agents, plain_indexes = random_market(rng, kind, 6, 130)
            cap = 5e8 if kind == CRYPTO else None
            plain_agents["CONST"] = [
                (day(i), 77.0, 100.0 + (i * 13) % 29, cap) for i in range(0, 400, 2)
            ]
            for scale in (0, 1, 2):
                window = window_over(plain_agents)
                agents = plain_to_agents(plain_agents, kind)
                indexes = plain_to_indexes(plain_indexes)
                _, ws = engine_case(
                    agents, indexes, window, scale, MEASURES_BY_KIND[kind]
                )
                assert np.all(ws.satisfactions["CONST"].values == 0.0)
                for measure, per_agent in ws.results.items():
                    result = per_agent["CONST"]
                    assert result.global_a == 0.0, (kind, scale, measure)
                    assert np.all(result.instants == 0.0)


def test_engine_matches_bruteforce_reference():
    with verdict("engine equals brute-force reference on fixture + 20 random panels"):
        for maker, index_maker, kind in (
            (fixture.stock_agents, fixture.stock_indexes, STOCK),
            (fixture.crypto_agents, lambda: [], CRYPTO),
        ):
            plain_agents = {s.agent_id: series_to_rows(s) for s in maker()}
            plain_indexes = {i.index_id: list(i.values) for i in index_maker()}
            for scale in (0, 1, 2):
                assert_engine_matches_oracle(
                    plain_agents, plain_indexes, kind, scale, fixture.WINDOW,
                    MEASURES_BY_KIND[kind], tol=1e-9,
                )

        rng = np.random.default_rng(2024)
        for i in range(20):
            kind = STOCK if i % 2 == 0 else CRYPTO
            scale = i % 3
            n_agents = int(rng.integers(3, 101))
            # monthly panels need enough span for every measure to be defined
            n_days = int(rng.integers(80, 100)) if scale == 2 else int(rng.integers(14, 61))
            plain_agents, plain_indexes = random_market(rng, kind, n_agents, n_days)
            window = window_over(plain_agents)
            assert_engine_matches_oracle(
                plain_agents, plain_indexes, kind, scale, window,
                MEASURES_BY_KIND[kind], tol=1e-9,
            )


def read_all(out_dir: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in out_dir.iterdir() if p.is_file()}


def test_outputs_are_byte_identical_across_workers_and_file_order(tmp_path):
    with verdict("byte-identical outputs for workers {1,4,8} and shuffled inputs"):
        fixture.write_fixture_tree(tmp_path)
        for market in ("stocks", "crypto"):
            config, errors, _ = load_config(tmp_path / market / "config.cfg")
            assert not errors, errors
            baseline = None
            for workers in (1, 4, 8):
                config.worker_count = workers
                config.output_dir = tmp_path / market / f"out_w{workers}"
                pipeline.run(config)
                got = read_all(config.output_dir)
                if baseline is None:
                    baseline = got
                assert got == baseline, f"worker count {workers} changed bytes"

            # rewrite the same agent files in shuffled order, in place
            agents_dir = tmp_path / market / "agents"
            files = {p: p.read_bytes() for p in agents_dir.iterdir()}
            order = list(files)
            random.Random(5).shuffle(order)
            for p in order:
                p.unlink()
            for p in order:
                p.write_bytes(files[p])
            config.worker_count = 1
            config.output_dir = tmp_path / market / "out_shuffled"
            pipeline.run(config)
            assert read_all(config.output_dir) == baseline


def test_analysis_identities():
    with verdict("correlation/bin/distribution/comparison identities"):
        xs = np.linspace(-3.0, 7.0, 97).tolist()
        assert pearson(xs, [3 * x + 2 for x in xs]) == pytest.approx(1.0, abs=1e-12)
        assert pearson(xs, [-2 * x + 5 for x in xs]) == pytest.approx(-1.0, abs=1e-12)

        rng = np.random.default_rng(55)
        for size in (1, 2, 7, 100, 1000):
            values = rng.normal(size=size)
            dist = distribution(values, n_bins=50)
            integral = float(np.sum(dist.densities * np.diff(dist.edges)))
            assert integral == pytest.approx(1.0, abs=1e-9)

        for n in range(5, 74):
            entries = [(f"a{i:03d}", float(rng.normal()), float(i)) for i in range(n)]
            counts = [b.count for b in quantile_bin_summary(entries, "A", "x")]
            assert sum(counts) == n
            assert max(counts) - min(counts) <= 1

        ids = [f"a{i}" for i in range(30)]
        cases = {
            ("2014", m, s): {aid: float(rng.normal()) for aid in ids}
            for m in ("afp", "afv", "afm", "afn")
            for s in (0, 1, 2)
        }
        stats = top_comparison(cases, {"2014": frozenset(ids)})
        assert stats.cases_top_greater == 0
        assert stats.fraction_top_greater == 0.0
        assert stats.sum_diff_when_greater == 0.0
        assert stats.sum_diff_otherwise == 0.0
        assert stats.ratio is None


def test_price_rescaling_changes_nothing():
    with verdict("multiplying one agent's prices by 1000 changes no result"):
        rng = np.random.default_rng(77)
        plain_agents, plain_indexes = random_market(rng, STOCK, 20, 60)
        scaled = {
            aid: [
                (d, 1000.0 * op, vol, cap) if aid == "A0005" else (d, op, vol, cap)
                for d, op, vol, cap in rows
            ]
            for aid, rows in plain_agents.items()
        }
        for scale in (0, 1):
            panel_a, ws_a = run_all_measures(plain_agents, plain_indexes, STOCK, scale)
            panel_b, ws_b = run_all_measures(scaled, plain_indexes, STOCK, scale)

            norm_a = panel_a.agents["A0005"][PRICE].values
            norm_b = panel_b.agents["A0005"][PRICE].values
            assert norm_b == pytest.approx(norm_a, abs=1e-12)

            sat_a = ws_a.satisfactions["A0005"].values
            sat_b = ws_b.satisfactions["A0005"].values
            assert sat_b == pytest.approx(sat_a, abs=1e-12)
            assert np.abs(np.diff(norm_b)) == pytest.approx(
                np.abs(np.diff(norm_a)), abs=1e-12
            )

            for measure in MEASURES_BY_KIND[STOCK]:
                p_a = ws_a.perturbations[measure]
                p_b = ws_b.perturbations[measure]
                assert p_b.periods == p_a.periods
                assert p_b.values == pytest.approx(p_a.values, abs=1e-12)
                for aid, res_a in ws_a.results[measure].items():
                    res_b = ws_b.results[measure][aid]
                    assert res_b.n_used == res_a.n_used
                    assert res_b.global_a == pytest.approx(res_a.global_a, abs=1e-12)


def load_real_config(env_var: str):
    path = os.environ.get(env_var)
    if not path:
        pytest.skip(f"set {env_var} to run against a real dataset")
    config, errors, _ = load_config(Path(path))
    assert not errors, errors
    return config


def test_real_stock_dataset_reproduces_comparison_stats():
    config = load_real_config("ANTIFRAG_STOCKS_CONFIG")
    with verdict("real stock data: fraction 0.56 +/- 0.02, ratio 2 +/- 25%"):
        outputs = pipeline.execute(config)
        stats = json.loads(outputs["comparison.json"])
        assert abs(stats["fraction_top_greater"] - 0.56) <= 0.02
        assert stats["ratio"] == pytest.approx(2.0, rel=0.25)


def test_real_crypto_dataset_reproduces_comparison_stats():
    config = load_real_config("ANTIFRAG_CRYPTO_CONFIG")
    with verdict("real crypto data: fraction 0.58 +/- 0.02"):
        outputs = pipeline.execute(config)
        stats = json.loads(outputs["comparison.json"])
        assert abs(stats["fraction_top_greater"] - 0.58) <= 0.02
