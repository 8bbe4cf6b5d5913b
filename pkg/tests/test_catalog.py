import numpy as np
import pytest

from altereval.catalog import (
    Catalog,
    cosine_similarity,
    load_catalog,
    nearest_neighbors,
    save_catalog,
)
from altereval.errors import DegenerateInputError, InputError, NotFoundError, ParseError

from conftest import random_catalog
from oracles import nn_scan_oracle


class TestCosineSimilarity:
    def test_identical_vectors(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_hand_value(self):
        got = cosine_similarity(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        assert got == pytest.approx(0.7071, abs=1e-4)

    def test_symmetric(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = rng.normal(size=5)
            b = rng.normal(size=5)
            assert cosine_similarity(a, b) == pytest.approx(cosine_similarity(b, a), abs=1e-12)

    def test_self_similarity_is_one(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a = rng.normal(size=7)
            assert cosine_similarity(a, a) == pytest.approx(1.0, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            cosine_similarity(np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0]))

    def test_zero_vector(self):
        with pytest.raises(DegenerateInputError):
            cosine_similarity(np.zeros(2), np.array([1.0, 0.0]))


class TestNearestNeighbors:
    def test_symmetric_ties_ascending_id(self):
        catalog = Catalog(
            dim=3,
            items={
                "x": np.array([1.0, 0.0, 0.0]),
                "y": np.array([0.0, 1.0, 0.0]),
                "z": np.array([0.0, 0.0, 1.0]),
            },
        )
        got = nearest_neighbors(catalog, "x", 2)
        assert [item for item, _ in got] == ["y", "z"]
        assert all(score == pytest.approx(0.0, abs=1e-12) for _, score in got)

    def test_brute_force_pair(self):
        catalog = Catalog(
            dim=2,
            items={"q": np.array([1.0, 0.0]), "a": np.array([0.9, 0.1]), "b": np.array([0.0, 1.0])},
        )
        got = nearest_neighbors(catalog, "q", 1)
        assert got[0][0] == "a"

    def test_k_larger_than_catalog(self, tiny_catalog):
        got = nearest_neighbors(tiny_catalog, "a", 100)
        assert len(got) == len(tiny_catalog) - 1

    def test_unknown_query(self, tiny_catalog):
        with pytest.raises(NotFoundError):
            nearest_neighbors(tiny_catalog, "nope", 1)

    def test_bad_k(self, tiny_catalog):
        with pytest.raises(InputError):
            nearest_neighbors(tiny_catalog, "a", 0)

    def test_matches_exhaustive_scan_oracle(self):
        rng = np.random.default_rng(11)
        for trial in range(20):
            n = int(rng.integers(3, 50))
            catalog = random_catalog(rng, n, 4, category=f"r{trial}")
            raw = {item: list(vec) for item, vec in catalog.items.items()}
            query = catalog.ids()[int(rng.integers(0, n))]
            k = int(rng.integers(1, n + 3))
            got = [item for item, _ in nearest_neighbors(catalog, query, k)]
            assert got == nn_scan_oracle(raw, query, k)

    def test_insertion_order_invariance(self):
        rng = np.random.default_rng(12)
        vectors = {f"i{i}": rng.normal(size=3) for i in range(10)}
        forward = Catalog(dim=3, items=dict(vectors))
        backward = Catalog(dim=3, items=dict(reversed(list(vectors.items()))))
        assert nearest_neighbors(forward, "i0", 5) == nearest_neighbors(backward, "i0", 5)


class TestCatalogInvariants:
    def test_orders_items_ascending(self):
        catalog = Catalog(dim=1, items={"b": [2.0], "a": [1.0]})
        assert catalog.ids() == ["a", "b"]

    def test_rejects_empty(self):
        with pytest.raises(InputError):
            Catalog(dim=1, items={})

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(InputError):
            Catalog(dim=2, items={"a": [1.0]})

    def test_rejects_zero_vector(self):
        with pytest.raises(DegenerateInputError):
            Catalog(dim=2, items={"a": [0.0, 0.0]})

    def test_rejects_whitespace_id(self):
        with pytest.raises(InputError):
            Catalog(dim=1, items={"a b": [1.0]})


class TestLoadCatalog:
    def write(self, tmp_path, text):
        path = tmp_path / "catalog.tsv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_well_formed(self, tmp_path):
        path = self.write(
            tmp_path,
            "#dim 4\na\t1 0 0 0\nb\t0 1 0 0\nc\t0.5 0.5 0 0\n",
        )
        catalog = load_catalog(path)
        assert catalog.dim == 4
        assert len(catalog) == 3

    def test_wrong_value_count_names_line(self, tmp_path):
        path = self.write(tmp_path, "#dim 4\na\t1 0 0\n")
        with pytest.raises(ParseError) as err:
            load_catalog(path)
        assert err.value.line == 2

    def test_duplicate_id(self, tmp_path):
        path = self.write(tmp_path, "#dim 2\na\t1 0\na\t0 1\n")
        with pytest.raises(ParseError) as err:
            load_catalog(path)
        assert err.value.line == 3

    def test_missing_header(self, tmp_path):
        path = self.write(tmp_path, "a\t1 0\n")
        with pytest.raises(ParseError):
            load_catalog(path)

    def test_bad_float(self, tmp_path):
        path = self.write(tmp_path, "#dim 2\na\t1 zz\n")
        with pytest.raises(ParseError):
            load_catalog(path)

    def test_zero_vector_rejected_at_load(self, tmp_path):
        path = self.write(tmp_path, "#dim 2\na\t0 0\n")
        with pytest.raises(ParseError):
            load_catalog(path)

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        catalog = random_catalog(rng, 12, 3)
        path = tmp_path / "round.tsv"
        save_catalog(catalog, path)
        loaded = load_catalog(path, category=catalog.category)
        assert loaded.ids() == catalog.ids()
        for item in catalog.ids():
            assert np.array_equal(loaded.embedding(item), catalog.embedding(item))
