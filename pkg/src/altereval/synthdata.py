"""Synthetic catalogs, judgments, and system outputs for desk-scale runs.

Run `python -m altereval.synthdata <dir>` to write a ready-to-use demo
workspace (catalog, qrels, per-system ranking inputs, config).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .catalog import Catalog, ItemId, nearest_neighbors, save_catalog
from .judgments import JudgmentSet, save_qrels
from .rng import substream

DEFAULT_POOL_SIZE = 14


def synthetic_catalog(n_items: int, dim: int, seed: int, category: str = "synthetic") -> Catalog:
    """Catalog of uniformly random unit vectors with zero-padded ids."""
    rng = substream(seed, f"catalog/{category}")
    vectors = rng.normal(size=(n_items, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    width = max(4, len(str(n_items - 1)))
    items = {f"item{idx:0{width}d}": vectors[idx] for idx in range(n_items)}
    return Catalog(dim=dim, items=items, category=category)


def neighborhood_judgments(
    catalog: Catalog,
    n_targets: int,
    seed: int,
    mean_alternatives: float = 3.5,
    neighborhood: int = 10,
) -> JudgmentSet:
    """Judged alternatives sampled from each target's nearest neighbours.

    Per-target alternative counts follow a Poisson with the requested mean
    (clamped to the neighbourhood size); non-selected neighbours are kept as
    explicit zero-relevance judgments, mirroring a judged pool.
    """
    rng = substream(seed, "judgments")
    ids = catalog.ids()
    if n_targets > len(ids):
        raise ValueError(f"cannot pick {n_targets} targets from {len(ids)} items")
    target_idx = rng.choice(len(ids), size=n_targets, replace=False)
    entries: dict[ItemId, dict[ItemId, int]] = {}
    for idx in sorted(target_idx):
        target = ids[idx]
        neighbours = [item for item, _ in nearest_neighbors(catalog, target, neighborhood)]
        k = int(min(rng.poisson(mean_alternatives), len(neighbours)))
        chosen = set(rng.choice(len(neighbours), size=k, replace=False)) if k else set()
        entries[target] = {item: int(pos in chosen) for pos, item in enumerate(neighbours)}
    return JudgmentSet(category=catalog.category, entries=entries)


def planted_benchmark(
    n_items: int,
    dim: int,
    n_targets: int,
    seed: int,
    mean_alternatives: float = 3.5,
    cluster_sigma: float = 0.06,
) -> tuple[Catalog, JudgmentSet]:
    """Catalog whose judged alternatives are near-duplicates of their targets.

    Alternative embeddings are planted inside each target's neighbourhood
    (cosine to the target around 0.95 at the default sigma for dim 16), so a
    ranker closing in on a target keeps surfacing acceptable substitutes.
    This is the regime where single-target evaluation under-reports success.
    """
    rng = substream(seed, "planted-benchmark")
    vectors = rng.normal(size=(n_items, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    width = max(4, len(str(n_items - 1)))
    ids = [f"item{idx:0{width}d}" for idx in range(n_items)]

    order = rng.permutation(n_items)
    target_idx = sorted(order[:n_targets])
    free = list(order[n_targets:])

    entries: dict[ItemId, dict[ItemId, int]] = {}
    cursor = 0
    for t_idx in target_idx:
        k = int(min(rng.poisson(mean_alternatives), 8))
        alts = {}
        for _ in range(k):
            if cursor >= len(free):
                break
            a_idx = free[cursor]
            cursor += 1
            planted = vectors[t_idx] + cluster_sigma * rng.normal(size=dim)
            vectors[a_idx] = planted / np.linalg.norm(planted)
            alts[ids[a_idx]] = 1
        entries[ids[t_idx]] = alts
    catalog = Catalog(
        dim=dim,
        items={ids[idx]: vectors[idx] for idx in range(n_items)},
        category="planted",
    )
    return catalog, JudgmentSet(category="planted", entries=entries)


def system_results(
    catalog: Catalog,
    targets: list[ItemId],
    system: str,
    seed: int,
    depth: int = 100,
    query_noise: float = 0.6,
) -> list[dict]:
    """Plausible final-turn rankings with scores for one pooling system.

    Each target is ranked by cosine to a noisy per-system probe of its own
    embedding, so rankings differ across systems but stay target-centred.
    """
    rows = []
    matrix, norms = catalog.matrix()
    ids = catalog.ids()
    for target in targets:
        rng = substream(seed, f"results/{system}/{target}")
        probe = catalog.embedding(target) + rng.normal(0.0, query_noise, size=catalog.dim)
        probe_norm = np.linalg.norm(probe)
        if probe_norm == 0.0:
            probe = catalog.embedding(target)
            probe_norm = np.linalg.norm(probe)
        scores = matrix @ (probe / probe_norm) / norms
        order = np.argsort(-scores, kind="stable")[:depth]
        rows.append(
            {
                "target_id": target,
                "ranking": [ids[i] for i in order],
                "scores": [float(scores[i]) for i in order],
            }
        )
    return rows


def write_system_results(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def benchmark_workspace(
    out_dir,
    seed: int = 7,
    n_items: int = 1000,
    dim: int = 16,
    n_targets: int = 50,
    systems: tuple[str, ...] = ("sysA", "sysB"),
) -> dict:
    """Write a complete demo workspace (planted alternatives) and return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    catalog, judgments = planted_benchmark(n_items, dim, n_targets, seed)
    catalog_path = out_dir / "catalog.tsv"
    qrels_path = out_dir / "qrels.txt"
    save_catalog(catalog, catalog_path)
    save_qrels(judgments, qrels_path)
    system_paths = {}
    for system in systems:
        rows = system_results(catalog, catalog.ids(), system, seed)
        path = out_dir / f"results_{system}.jsonl"
        write_system_results(rows, path)
        system_paths[system] = str(path)
    config = {
        "catalog": str(catalog_path),
        "qrels": str(qrels_path),
        "out_dir": str(out_dir / "out"),
        "master_seed": seed,
        "sut_spec": "greedy:eta=1.0",
        "noise_sigma": 0.1,
        "n_sample": min(n_targets, len(judgments.entries)),
        "pool_systems": [{"name": name, "results": path} for name, path in system_paths.items()],
    }
    config_path = out_dir / "config.json"
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {
        "catalog": str(catalog_path),
        "qrels": str(qrels_path),
        "config": str(config_path),
        "systems": system_paths,
    }


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) not in (1, 2):
        print("usage: python -m altereval.synthdata <out_dir> [seed]", file=sys.stderr)
        return 2
    seed = int(argv[1]) if len(argv) == 2 else 7
    paths = benchmark_workspace(argv[0], seed=seed)
    print(json.dumps(paths, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
