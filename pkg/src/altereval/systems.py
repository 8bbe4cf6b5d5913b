"""Systems under test: the per-turn ranking contract and reference rankers.

Real conversational recommenders plug in behind `SystemUnderTest`; the
shipped implementations are a greedy query-vector tracker, a uniform random
baseline, and an offline replay reader for third-party ranking logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import Catalog, ItemId
from .errors import InputError, ParseError
from .simulate import Critique


@dataclass
class QueryState:
    """Unit query vector plus the step size used to fold critiques in."""

    query: np.ndarray
    learning_rate: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.learning_rate <= 1.0):
            raise InputError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        q = np.asarray(self.query, dtype=np.float64)
        norm = np.linalg.norm(q)
        if norm == 0.0 or not np.all(np.isfinite(q)):
            raise InputError("query must be a finite non-zero vector")
        self.query = q / norm


def _rank_by_query(query: np.ndarray, catalog: Catalog, k: int) -> list[ItemId]:
    matrix, norms = catalog.matrix()
    scores = matrix @ query / norms
    order = np.argsort(-scores, kind="stable")  # ids ascending on ties
    ids = catalog.ids()
    return [ids[i] for i in order[: min(k, len(ids))]]


def greedy_vector_rank(
    state: QueryState, critique: Critique, catalog: Catalog, k: int
) -> tuple[list[ItemId], QueryState]:
    """Fold the critique direction into the query, re-rank the whole catalog.

    A satisfied sentinel leaves the query (and hence the ranking) unchanged.
    """
    if k < 1:
        raise InputError(f"K must be >= 1, got {k}")
    if critique.satisfied:
        new_state = state
    else:
        updated = state.query + state.learning_rate * np.asarray(critique.direction, dtype=np.float64)
        norm = np.linalg.norm(updated)
        if norm == 0.0:
            updated = state.query  # critique exactly cancels the query; keep it
            norm = 1.0
        new_state = QueryState(query=updated / norm, learning_rate=state.learning_rate)
    return _rank_by_query(new_state.query, catalog, k), new_state


def random_rank(catalog: Catalog, k: int, rng: np.random.Generator) -> list[ItemId]:
    """Uniform shuffle of the catalog truncated to K."""
    if k < 1:
        raise InputError(f"K must be >= 1, got {k}")
    ids = catalog.ids()
    perm = rng.permutation(len(ids))
    return [ids[i] for i in perm[: min(k, len(ids))]]


class SystemUnderTest:
    """Per-dialog ranking contract.

    `start` produces the turn-1 ranking and opaque state from the dialog's
    substream; `rank` consumes a critique and returns the next ranking. All
    implementations must be deterministic given state + critique and safe to
    run from parallel dialogs.
    """

    spec: str = ""

    def start(self, catalog: Catalog, rng: np.random.Generator):
        raise NotImplementedError

    def rank(self, state, critique: Critique, catalog: Catalog):
        raise NotImplementedError


class GreedyVectorSystem(SystemUnderTest):
    def __init__(self, k: int = 100, eta: float = 1.0):
        self.k = k
        self.eta = eta
        self.spec = f"greedy:eta={eta}"

    def start(self, catalog, rng):
        direction = rng.normal(size=catalog.dim)
        norm = np.linalg.norm(direction)
        while norm == 0.0:
            direction = rng.normal(size=catalog.dim)
            norm = np.linalg.norm(direction)
        state = QueryState(query=direction / norm, learning_rate=self.eta)
        return _rank_by_query(state.query, catalog, self.k), state

    def rank(self, state, critique, catalog):
        return greedy_vector_rank(state, critique, catalog, self.k)


class RandomSystem(SystemUnderTest):
    """Noise-floor baseline: a fresh uniform shuffle every turn."""

    spec = "random"

    def __init__(self, k: int = 100):
        self.k = k

    def start(self, catalog, rng):
        return random_rank(catalog, self.k, rng), rng

    def rank(self, state, critique, catalog):
        return random_rank(catalog, self.k, state), state


class ReplaySystem(SystemUnderTest):
    """Offline replay of a third-party system's per-turn ranking log.

    Each dialog reads `<dir>/<target>.jsonl`, one JSON object per turn:
    `{"turn": t, "ranking": [item_id, ...]}` with turns 1..T contiguous.
    """

    def __init__(self, directory, k: int = 100):
        self.directory = Path(directory)
        self.k = k
        self.spec = f"replay:dir={self.directory}"

    def load_dialog(self, target: ItemId) -> list[list[ItemId]]:
        path = self.directory / f"{target}.jsonl"
        if not path.exists():
            raise InputError(f"no replay log for target {target!r} at {path}")
        rankings: list[list[ItemId]] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    doc = json.loads(line)
                    turn = int(doc["turn"])
                    ranking = [str(item) for item in doc["ranking"]]
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ParseError(f"bad replay record: {exc}", path, lineno) from None
                if turn != len(rankings) + 1:
                    raise ParseError(f"expected turn {len(rankings) + 1}, got {turn}", path, lineno)
                if not ranking:
                    raise ParseError("empty ranking", path, lineno)
                rankings.append(ranking[: self.k])
        if not rankings:
            raise ParseError("replay log has no turns", path, 1)
        return rankings

    def bind(self, target: ItemId) -> "SystemUnderTest":
        """Per-dialog view over one target's log (replay needs the target)."""
        rankings = self.load_dialog(target)

        class _Bound(SystemUnderTest):
            spec = self.spec

            def start(self_inner, catalog, rng):
                return rankings[0], 1

            def rank(self_inner, state, critique, catalog):
                if state >= len(rankings):
                    raise InputError(f"replay log for {target!r} ends at turn {len(rankings)}")
                return rankings[state], state + 1

        return _Bound()

    def start(self, catalog, rng):
        raise InputError("replay systems must be bound to a target first")

    def rank(self, state, critique, catalog):
        raise InputError("replay systems must be bound to a target first")


def parse_sut_spec(spec: str, k: int = 100) -> SystemUnderTest:
    """Parse `greedy:eta=<x>`, `random`, or `replay:dir=<path>`."""
    name, _, rest = spec.partition(":")
    if name == "random":
        if rest:
            raise InputError(f"random takes no parameters, got {spec!r}")
        return RandomSystem(k=k)
    params: dict[str, str] = {}
    if rest:
        for part in rest.split(","):
            key, sep, value = part.partition("=")
            if not sep or not key or not value:
                raise InputError(f"bad system spec parameter {part!r} in {spec!r}")
            params[key.strip()] = value.strip()
    if name == "greedy":
        try:
            eta = float(params.pop("eta", "1.0"))
        except ValueError:
            raise InputError(f"bad eta in system spec {spec!r}") from None
        if params:
            raise InputError(f"unknown parameters {sorted(params)} in system spec {spec!r}")
        return GreedyVectorSystem(k=k, eta=eta)
    if name == "replay":
        directory = params.pop("dir", None)
        if directory is None or params:
            raise InputError(f"replay spec must be replay:dir=<path>, got {spec!r}")
        return ReplaySystem(directory, k=k)
    raise InputError(f"unknown system spec: {spec!r}")
