import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from altereval.catalog import Catalog
from altereval.judgments import JudgmentSet


@pytest.fixture
def tiny_catalog():
    return Catalog(
        dim=2,
        items={
            "a": np.array([1.0, 0.0]),
            "b": np.array([0.0, 1.0]),
            "c": np.array([1.0, 1.0]),
            "t": np.array([0.9, 0.1]),
        },
        category="tiny",
    )


@pytest.fixture
def tiny_judgments():
    return JudgmentSet(category="tiny", entries={"t": {"a": 1, "b": 0, "c": 1}})


def random_catalog(rng: np.random.Generator, n: int, dim: int, category: str = "random") -> Catalog:
    vectors = rng.normal(size=(n, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return Catalog(
        dim=dim,
        items={f"i{idx:03d}": vectors[idx] for idx in range(n)},
        category=category,
    )
