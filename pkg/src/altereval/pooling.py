"""Sample-size estimation, difficulty-stratified sampling, and candidate pooling.

The pooling pipeline decides how many targets to judge (power analysis over a
correlation effect size), which targets (stratified by a score-based
difficulty predictor), and which candidates each judge sees (nearest
neighbours plus top-retrieved results from several systems, deduplicated).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import norm

from .catalog import ItemId
from .errors import DegenerateInputError, InputError, ParseError, PoolExhaustionError

NEAREST_NEIGHBOR = "nearest_neighbor"
RETRIEVED = "retrieved"


@dataclass(frozen=True)
class PowerSpec:
    """Inputs of the correlation sample-size calculation."""

    rho: float
    alpha: float = 0.05
    power: float = 0.90

    def __post_init__(self):
        if not (0.0 < abs(self.rho) < 1.0):
            raise InputError(f"rho must lie in (-1, 1) excluding 0, got {self.rho}")
        if not (0.0 < self.alpha < 1.0):
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (0.0 < self.power < 1.0):
            raise InputError(f"power must lie in (0, 1), got {self.power}")


@dataclass(frozen=True)
class PoolCandidate:
    item: ItemId
    source_system: str
    source_kind: str  # NEAREST_NEIGHBOR or RETRIEVED
    source_rank: int

    def __post_init__(self):
        if self.source_rank < 1:
            raise InputError(f"source_rank must be >= 1, got {self.source_rank}")
        if self.source_kind not in (NEAREST_NEIGHBOR, RETRIEVED):
            raise InputError(f"unknown source kind: {self.source_kind!r}")


@dataclass
class Pool:
    """The judging candidates assembled for one target."""

    target: ItemId
    candidates: list[PoolCandidate]

    def __post_init__(self):
        items = [c.item for c in self.candidates]
        if len(set(items)) != len(items):
            raise InputError(f"pool for {self.target!r} contains duplicate candidates")
        if self.target in items:
            raise InputError(f"pool for {self.target!r} contains the target itself")

    def item_ids(self) -> list[ItemId]:
        return [c.item for c in self.candidates]


def correlation_to_cohens_d(r: float) -> float:
    """Convert a correlation effect size to Cohen's d: 2r / sqrt(1 - r^2)."""
    if not abs(r) < 1.0:
        raise InputError(f"|r| must be < 1, got {r}")
    return 2.0 * r / math.sqrt(1.0 - r * r)


def required_sample_size(spec: PowerSpec) -> int:
    """Sample size for a two-sided correlation test via the Fisher-z approximation.

    n = round(((z_{1-alpha/2} + z_power) / atanh(|rho|))^2 + 3), rounded half-up.
    """
    z_alpha = float(norm.ppf(1.0 - spec.alpha / 2.0))
    z_power = float(norm.ppf(spec.power))
    value = ((z_alpha + z_power) / math.atanh(abs(spec.rho))) ** 2 + 3.0
    return int(math.floor(value + 0.5))


def cohen_d_to_probability(d: float) -> float:
    """Common-language effect size: Phi(d / sqrt(2))."""
    if not math.isfinite(d):
        raise InputError(f"d must be finite, got {d}")
    return float(norm.cdf(d / math.sqrt(2.0)))


def difficulty_score(final_turn_scores) -> float:
    """Score-based difficulty predictor: population std / |mean| of the scores.

    Higher means a more discriminative (easier) ranking.
    """
    scores = np.asarray(list(final_turn_scores), dtype=np.float64)
    if scores.size < 2:
        raise InputError(f"need at least 2 scores, got {scores.size}")
    if not np.all(np.isfinite(scores)):
        raise InputError("scores must be finite")
    mean = scores.mean()
    if abs(mean) < 1e-300:
        raise DegenerateInputError("difficulty is undefined when the mean score is zero")
    return float(scores.std() / abs(mean))


def stratified_sample(
    targets: list[tuple[ItemId, float]],
    n: int,
    strata: int,
    seed: int,
) -> list[ItemId]:
    """Draw n targets across equal-width difficulty rank bands, without replacement.

    Targets are sorted by (score, id), split into `strata` contiguous bands,
    and each band contributes floor(n/strata) or ceil(n/strata) uniform draws.
    Deterministic given the seed.
    """
    if strata < 1:
        raise InputError(f"strata must be >= 1, got {strata}")
    if n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    if n > len(targets):
        raise InputError(f"cannot sample {n} from {len(targets)} targets")
    ordered = [item for item, _ in sorted(targets, key=lambda t: (t[1], t[0]))]
    rng = np.random.default_rng(seed)

    size, extra = divmod(len(ordered), strata)
    quota, quota_extra = divmod(n, strata)
    bands: list[list[ItemId]] = []
    start = 0
    for b in range(strata):
        width = size + (1 if b < extra else 0)
        bands.append(ordered[start : start + width])
        start += width

    selected: list[ItemId] = []
    leftovers: list[ItemId] = []
    for b, band in enumerate(bands):
        want = quota + (1 if b < quota_extra else 0)
        perm = rng.permutation(len(band))
        take = min(want, len(band))
        selected.extend(band[i] for i in perm[:take])
        leftovers.extend(band[i] for i in perm[take:])
    deficit = n - len(selected)
    if deficit > 0:
        perm = rng.permutation(len(leftovers))
        selected.extend(leftovers[i] for i in perm[:deficit])
    return selected


def build_pool(
    target: ItemId,
    per_system_nn: dict[str, list[ItemId]],
    per_system_results: dict[str, list[ItemId]],
    nn_quota: int,
    retrieved_quota: int,
) -> Pool:
    """Assemble the judging pool for one target from ranked source lists.

    Takes the top `nn_quota` of each system's nearest-neighbour list and the
    top `retrieved_quota` of each system's result list. Items already pooled
    (or equal to the target) are replaced by the next lower-ranked item from
    the same list, so the pool always holds exactly the sum of the quotas.
    """
    if nn_quota < 0 or retrieved_quota < 0:
        raise InputError("quotas must be non-negative")
    taken: set[ItemId] = set()
    candidates: list[PoolCandidate] = []
    sources = [(NEAREST_NEIGHBOR, per_system_nn, nn_quota), (RETRIEVED, per_system_results, retrieved_quota)]
    for kind, per_system, quota in sources:
        for system, ranked in per_system.items():
            filled = 0
            for rank, item in enumerate(ranked, start=1):
                if filled == quota:
                    break
                if item == target or item in taken:
                    continue
                taken.add(item)
                candidates.append(PoolCandidate(item, system, kind, rank))
                filled += 1
            if filled < quota:
                raise PoolExhaustionError(
                    f"{kind} list of system {system!r} exhausted for target {target!r}: "
                    f"needed {quota}, filled {filled}"
                )
    return Pool(target=target, candidates=candidates)


def write_pools(pools: list[Pool], path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pool in pools:
            doc = {
                "target_id": pool.target,
                "candidates": [
                    {
                        "item_id": c.item,
                        "source_system": c.source_system,
                        "source_kind": c.source_kind,
                        "source_rank": c.source_rank,
                    }
                    for c in pool.candidates
                ],
            }
            fh.write(json.dumps(doc, sort_keys=True) + "\n")


def read_pools(path) -> list[Pool]:
    path = Path(path)
    pools = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                pools.append(
                    Pool(
                        target=str(doc["target_id"]),
                        candidates=[
                            PoolCandidate(
                                item=str(c["item_id"]),
                                source_system=str(c["source_system"]),
                                source_kind=str(c["source_kind"]),
                                source_rank=int(c["source_rank"]),
                            )
                            for c in doc["candidates"]
                        ],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"bad pool record: {exc}", path, lineno) from None
    return pools
