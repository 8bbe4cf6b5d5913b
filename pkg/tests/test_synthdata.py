import json

import numpy as np
import pytest

from altereval.catalog import cosine_similarity, load_catalog
from altereval.judgments import load_qrels
from altereval.synthdata import (
    benchmark_workspace,
    neighborhood_judgments,
    planted_benchmark,
    synthetic_catalog,
    system_results,
)


class TestSyntheticCatalog:
    def test_shape_and_norms(self):
        catalog = synthetic_catalog(50, 8, seed=1)
        assert len(catalog) == 50 and catalog.dim == 8
        for item in catalog.ids():
            assert np.linalg.norm(catalog.embedding(item)) == pytest.approx(1.0)

    def test_seed_determinism(self):
        a = synthetic_catalog(20, 4, seed=3)
        b = synthetic_catalog(20, 4, seed=3)
        for item in a.ids():
            assert np.array_equal(a.embedding(item), b.embedding(item))


class TestNeighborhoodJudgments:
    def test_alternatives_come_from_neighbourhood(self):
        catalog = synthetic_catalog(60, 6, seed=2)
        judged = neighborhood_judgments(catalog, 10, seed=2, neighborhood=5)
        assert len(judged.entries) == 10
        from altereval.catalog import nearest_neighbors

        for target, cands in judged.entries.items():
            neighbours = {item for item, _ in nearest_neighbors(catalog, target, 5)}
            assert set(cands) <= neighbours


class TestPlantedBenchmark:
    def test_counts_and_closeness(self):
        catalog, judged = planted_benchmark(400, 16, 30, seed=5, mean_alternatives=3.5)
        assert len(catalog) == 400
        assert len(judged.entries) == 30
        counts = [len(c) for c in judged.entries.values()]
        assert 2.5 <= sum(counts) / len(counts) <= 4.5
        for target, cands in judged.entries.items():
            for alt in cands:
                cos = cosine_similarity(catalog.embedding(alt), catalog.embedding(target))
                assert cos > 0.85

    def test_alternative_sets_are_disjoint(self):
        _, judged = planted_benchmark(400, 8, 40, seed=9)
        seen = set()
        for target, cands in judged.entries.items():
            assert target not in cands
            assert not (set(cands) & seen)
            seen |= set(cands)
            assert target not in seen


class TestWorkspace:
    def test_written_files_load(self, tmp_path):
        paths = benchmark_workspace(tmp_path, seed=3, n_items=80, dim=4, n_targets=8)
        catalog = load_catalog(paths["catalog"])
        judged = load_qrels(paths["qrels"])
        assert len(catalog) == 80
        assert len(judged.entries) == 8
        config = json.loads((tmp_path / "config.json").read_text())
        assert config["master_seed"] == 3
        assert len(config["pool_systems"]) == 2

    def test_system_results_contract(self):
        catalog = synthetic_catalog(40, 4, seed=4)
        rows = system_results(catalog, catalog.ids()[:5], "sysA", seed=4, depth=10)
        assert len(rows) == 5
        for row in rows:
            assert len(row["ranking"]) == 10
            assert len(row["scores"]) == 10
            assert sorted(row["scores"], reverse=True) == row["scores"]
