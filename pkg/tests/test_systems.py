import json

import numpy as np
import pytest

from altereval.catalog import Catalog
from altereval.errors import InputError, ParseError
from altereval.simulate import Critique, satisfied_critique
from altereval.systems import (
    GreedyVectorSystem,
    QueryState,
    RandomSystem,
    ReplaySystem,
    greedy_vector_rank,
    parse_sut_spec,
    random_rank,
)

from conftest import random_catalog


class TestGreedyVectorRank:
    def test_query_update_hand_value(self, tiny_catalog):
        state = QueryState(query=np.array([1.0, 0.0]), learning_rate=1.0)
        critique = Critique(direction=np.array([0.0, 1.0]))
        _, new_state = greedy_vector_rank(state, critique, tiny_catalog, 10)
        assert new_state.query == pytest.approx([0.7071, 0.7071], abs=1e-4)

    def test_satisfied_sentinel_keeps_ranking(self, tiny_catalog):
        state = QueryState(query=np.array([1.0, 0.0]))
        before, state = greedy_vector_rank(state, satisfied_critique(2), tiny_catalog, 10)
        after, _ = greedy_vector_rank(state, satisfied_critique(2), tiny_catalog, 10)
        assert before == after

    def test_truncates_to_catalog_size(self, tiny_catalog):
        state = QueryState(query=np.array([1.0, 0.0]))
        ranking, _ = greedy_vector_rank(state, satisfied_critique(2), tiny_catalog, 100)
        assert len(ranking) == len(tiny_catalog)
        assert len(set(ranking)) == len(ranking)

    def test_ranking_sorted_by_cosine_with_id_ties(self):
        catalog = Catalog(
            dim=2,
            items={"a": [2.0, 0.0], "b": [1.0, 0.0], "c": [0.0, 1.0]},
        )
        state = QueryState(query=np.array([1.0, 0.0]))
        ranking, _ = greedy_vector_rank(state, satisfied_critique(2), catalog, 3)
        # a and b have identical cosine to the query: ascending id wins.
        assert ranking == ["a", "b", "c"]

    def test_moves_toward_target_direction(self):
        rng = np.random.default_rng(0)
        catalog = random_catalog(rng, 50, 8)
        target = catalog.ids()[7]
        state = QueryState(query=-catalog.embedding(target), learning_rate=1.0)
        ranking = None
        for _ in range(6):
            direction = catalog.embedding(target) - state.query
            direction /= np.linalg.norm(direction)
            ranking, state = greedy_vector_rank(state, Critique(direction=direction), catalog, 10)
        assert ranking[0] == target


class TestRandomRank:
    def test_deterministic_given_stream(self, tiny_catalog):
        a = random_rank(tiny_catalog, 3, np.random.default_rng(5))
        b = random_rank(tiny_catalog, 3, np.random.default_rng(5))
        assert a == b

    def test_full_permutation(self, tiny_catalog):
        got = random_rank(tiny_catalog, len(tiny_catalog), np.random.default_rng(1))
        assert sorted(got) == tiny_catalog.ids()

    def test_rank1_frequencies_uniform(self):
        rng = np.random.default_rng(2)
        catalog = random_catalog(rng, 10, 3)
        counts = {item: 0 for item in catalog.ids()}
        trials = 10_000
        for _ in range(trials):
            counts[random_rank(catalog, 1, rng)[0]] += 1
        expected = trials / len(catalog)
        sigma = (trials * (1 / 10) * (9 / 10)) ** 0.5
        for item, count in counts.items():
            assert abs(count - expected) <= 3 * sigma, item


class TestSystemObjects:
    def test_greedy_start_is_deterministic_per_stream(self, tiny_catalog):
        sut = GreedyVectorSystem(k=4, eta=0.5)
        r1, s1 = sut.start(tiny_catalog, np.random.default_rng(3))
        r2, s2 = sut.start(tiny_catalog, np.random.default_rng(3))
        assert r1 == r2
        assert np.array_equal(s1.query, s2.query)

    def test_random_system_changes_each_turn(self, tiny_catalog):
        sut = RandomSystem(k=4)
        ranking, state = sut.start(tiny_catalog, np.random.default_rng(8))
        seen = {tuple(ranking)}
        for _ in range(5):
            ranking, state = sut.rank(state, satisfied_critique(2), tiny_catalog)
            seen.add(tuple(ranking))
        assert len(seen) > 1

    def test_query_state_normalises(self):
        state = QueryState(query=np.array([3.0, 4.0]), learning_rate=0.1)
        assert np.linalg.norm(state.query) == pytest.approx(1.0)

    def test_query_state_validation(self):
        with pytest.raises(InputError):
            QueryState(query=np.array([0.0, 0.0]))
        with pytest.raises(InputError):
            QueryState(query=np.array([1.0, 0.0]), learning_rate=0.0)


class TestReplaySystem:
    def write_log(self, tmp_path, target, rankings):
        path = tmp_path / f"{target}.jsonl"
        with open(path, "w") as fh:
            for turn, ranking in enumerate(rankings, start=1):
                fh.write(json.dumps({"turn": turn, "ranking": ranking}) + "\n")
        return path

    def test_replays_turn_by_turn(self, tmp_path, tiny_catalog):
        self.write_log(tmp_path, "t", [["a", "b"], ["b", "t"], ["t", "a"]])
        sut = ReplaySystem(tmp_path, k=10).bind("t")
        ranking, state = sut.start(tiny_catalog, None)
        assert ranking == ["a", "b"]
        ranking, state = sut.rank(state, satisfied_critique(2), tiny_catalog)
        assert ranking == ["b", "t"]
        ranking, state = sut.rank(state, satisfied_critique(2), tiny_catalog)
        assert ranking == ["t", "a"]
        with pytest.raises(InputError):
            sut.rank(state, satisfied_critique(2), tiny_catalog)

    def test_non_contiguous_turns_rejected(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text('{"turn": 2, "ranking": ["a"]}\n')
        with pytest.raises(ParseError):
            ReplaySystem(tmp_path).bind("t")

    def test_missing_log(self, tmp_path):
        with pytest.raises(InputError):
            ReplaySystem(tmp_path).bind("zz")


class TestParseSutSpec:
    def test_greedy_defaults(self):
        sut = parse_sut_spec("greedy:eta=0.5", k=7)
        assert isinstance(sut, GreedyVectorSystem)
        assert sut.eta == 0.5 and sut.k == 7

    def test_random(self):
        assert isinstance(parse_sut_spec("random"), RandomSystem)

    def test_replay(self, tmp_path):
        sut = parse_sut_spec(f"replay:dir={tmp_path}")
        assert isinstance(sut, ReplaySystem)

    @pytest.mark.parametrize("bad", ["nope", "greedy:eta=x", "random:k=3", "replay", "greedy:zz=1"])
    def test_bad_specs(self, bad):
        with pytest.raises(InputError):
            parse_sut_spec(bad)
