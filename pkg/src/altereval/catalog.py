"""Item catalog: id -> embedding table plus brute-force similarity primitives.

The catalog is the geometric substrate everything else ranks against. It is
immutable after load and iterates in ascending id order, which is the
canonical tie-breaking order used throughout the workbench.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, InputError, NotFoundError, ParseError

ItemId = str


@dataclass
class Catalog:
    """Fixed-dimension embedding table over unique item ids.

    Items are re-ordered to ascending id on construction; embeddings are
    validated (finite, correct dimension, non-zero) and frozen.
    """

    dim: int
    items: dict[ItemId, np.ndarray]
    category: str = "default"
    # (matrix, norms) pair cached as one attribute: parallel dialogs may race
    # to fill it, and a single reference assignment keeps readers consistent.
    _cache: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if int(self.dim) < 1:
            raise InputError(f"catalog dimension must be positive, got {self.dim}")
        if not self.items:
            raise InputError("catalog must contain at least one item")
        self.dim = int(self.dim)
        ordered: dict[ItemId, np.ndarray] = {}
        for item_id in sorted(self.items):
            if not item_id or item_id.split() != [item_id]:
                raise InputError(f"item id must be non-empty without whitespace: {item_id!r}")
            vec = np.asarray(self.items[item_id], dtype=np.float64)
            if vec.shape != (self.dim,):
                raise InputError(
                    f"embedding for {item_id!r} has dimension {vec.shape}, expected ({self.dim},)"
                )
            if not np.all(np.isfinite(vec)):
                raise InputError(f"embedding for {item_id!r} contains non-finite values")
            if not np.any(vec):
                raise DegenerateInputError(f"embedding for {item_id!r} is the zero vector")
            vec.setflags(write=False)
            ordered[item_id] = vec
        self.items = ordered

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, item_id: object) -> bool:
        return item_id in self.items

    def ids(self) -> list[ItemId]:
        return list(self.items)

    def embedding(self, item_id: ItemId) -> np.ndarray:
        try:
            return self.items[item_id]
        except KeyError:
            raise NotFoundError(f"unknown item id: {item_id!r}") from None

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked embeddings (ascending id order) and their L2 norms."""
        cached = self._cache
        if cached is None:
            stacked = np.vstack(list(self.items.values()))
            cached = (stacked, np.linalg.norm(stacked, axis=1))
            self._cache = cached
        return cached


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two equal-dimension non-zero vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine similarity is undefined for the zero vector")
    return float(np.dot(a, b) / (na * nb))


def nearest_neighbors(catalog: Catalog, query: ItemId, k: int) -> list[tuple[ItemId, float]]:
    """Top-k catalog items by cosine similarity to `query`, excluding the query.

    Ties break by ascending item id; the result has min(k, len(catalog) - 1)
    entries.
    """
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    q = catalog.embedding(query)
    matrix, norms = catalog.matrix()
    scores = matrix @ q / (norms * np.linalg.norm(q))
    order = np.argsort(-scores, kind="stable")  # base order is ascending id
    ids = catalog.ids()
    out: list[tuple[ItemId, float]] = []
    for idx in order:
        item_id = ids[idx]
        if item_id == query:
            continue
        out.append((item_id, float(scores[idx])))
        if len(out) == k:
            break
    return out


def load_catalog(path, category: str | None = None) -> Catalog:
    """Parse an embedding file (see README: `#dim D` header, tab-separated rows)."""
    path = Path(path)
    items: dict[ItemId, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if dim is None:
                parts = line.split()
                if len(parts) != 2 or parts[0] != "#dim":
                    raise ParseError("expected header '#dim D'", path, lineno)
                try:
                    dim = int(parts[1])
                except ValueError:
                    raise ParseError(f"dimension is not an integer: {parts[1]!r}", path, lineno) from None
                if dim < 1:
                    raise ParseError(f"dimension must be positive, got {dim}", path, lineno)
                continue
            item_id, sep, rest = line.partition("\t")
            if not sep:
                raise ParseError("expected 'item_id<TAB>values'", path, lineno)
            if not item_id or item_id.split() != [item_id]:
                raise ParseError(f"bad item id: {item_id!r}", path, lineno)
            if item_id in items:
                raise ParseError(f"duplicate item id: {item_id!r}", path, lineno)
            fields = rest.split()
            if len(fields) != dim:
                raise ParseError(f"expected {dim} values, got {len(fields)}", path, lineno)
            try:
                vec = np.array([float(f) for f in fields], dtype=np.float64)
            except ValueError:
                raise ParseError("embedding values must be decimal floats", path, lineno) from None
            if not np.all(np.isfinite(vec)):
                raise ParseError("embedding values must be finite", path, lineno)
            if not np.any(vec):
                raise ParseError("zero embedding vectors are not allowed", path, lineno)
            items[item_id] = vec
    if dim is None:
        raise ParseError("file is empty, expected '#dim D' header", path, 1)
    if not items:
        raise ParseError("catalog has no items", path, 1)
    return Catalog(dim=dim, items=items, category=category or path.stem)


def save_catalog(catalog: Catalog, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#dim {catalog.dim}\n")
        for item_id, vec in catalog.items.items():
            fh.write(item_id + "\t" + " ".join(repr(float(x)) for x in vec) + "\n")
