"""Alternative relevance judgments (qrels), annotations, and agreement stats.

A JudgmentSet maps each assessed target to the binary relevance of its pooled
candidates. It drives both the switching behaviour of the meta simulators and
the relevant-set construction used by the metrics.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import ItemId
from .errors import InputError, ParseError, UndefinedResultError

# Justification ("attention check") policy, mirrored by the judging UI.
MIN_JUSTIFICATION_TOKENS = 5
MIN_JUSTIFICATION_CHARS = 20


@dataclass
class JudgmentSet:
    """Per-target binary relevance of judged alternative candidates.

    A target may appear with only zero-relevance candidates: it was assessed
    but no alternative was accepted.
    """

    category: str = "default"
    entries: dict[ItemId, dict[ItemId, int]] = field(default_factory=dict)

    def targets(self) -> list[ItemId]:
        return sorted(self.entries)

    def relevant(self, target: ItemId) -> set[ItemId]:
        return {c for c, rel in self.entries.get(target, {}).items() if rel == 1}


@dataclass
class DatasetStats:
    n_target: int
    n_assessed: int
    n_relevant: int
    avg_relevant: float
    n_annotations_per_target: int


@dataclass
class AnnotationRecord:
    """One worker's judgment of one target's pooled candidates."""

    worker_id: str
    target_id: ItemId
    selected: tuple[ItemId, ...]
    justification: str
    duration_ms: int
    timestamp: str

    def __post_init__(self):
        self.selected = tuple(sorted(set(self.selected)))
        if self.duration_ms < 0:
            raise InputError("duration_ms must be non-negative")

    def to_json(self) -> dict:
        return {
            "worker_id": self.worker_id,
            "target_id": self.target_id,
            "selected": list(self.selected),
            "justification": self.justification,
            "duration_ms": self.duration_ms,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "AnnotationRecord":
        return cls(
            worker_id=str(doc["worker_id"]),
            target_id=str(doc["target_id"]),
            selected=tuple(str(s) for s in doc.get("selected", [])),
            justification=str(doc.get("justification", "")),
            duration_ms=int(doc.get("duration_ms", 0)),
            timestamp=str(doc.get("timestamp", "")),
        )


def justification_passes(text: str) -> bool:
    """Attention-check policy: at least 5 tokens and 20 characters."""
    stripped = text.strip()
    return len(stripped) >= MIN_JUSTIFICATION_CHARS and len(stripped.split()) >= MIN_JUSTIFICATION_TOKENS


def load_qrels(path, category: str | None = None) -> JudgmentSet:
    """Parse a 4-column qrels file: `target_id 0 candidate_id rel`."""
    path = Path(path)
    entries: dict[ItemId, dict[ItemId, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 4:
                raise ParseError(f"expected 4 columns, got {len(fields)}", path, lineno)
            target, _, candidate, rel = fields
            if rel not in ("0", "1"):
                raise ParseError(f"relevance label must be 0 or 1, got {rel!r}", path, lineno)
            per_target = entries.setdefault(target, {})
            if candidate in per_target:
                raise ParseError(f"duplicate judgment ({target!r}, {candidate!r})", path, lineno)
            per_target[candidate] = int(rel)
    return JudgmentSet(category=category or path.stem, entries=entries)


def save_qrels(judgments: JudgmentSet, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for target in sorted(judgments.entries):
            for candidate in sorted(judgments.entries[target]):
                fh.write(f"{target} 0 {candidate} {judgments.entries[target][candidate]}\n")


def relevant_set(judgments: JudgmentSet, target: ItemId, include_alternatives: bool) -> set[ItemId]:
    """Items that count as success for `target`.

    Without alternatives this is {target}; with alternatives it also includes
    every candidate judged relevant for the target. Unknown targets yield
    {target}, so single-target evaluation works without any judgments.
    """
    out = {target}
    if include_alternatives:
        out |= judgments.relevant(target)
    return out


def cohens_kappa(a, b) -> float:
    """Chance-corrected agreement between two equal-length label sequences."""
    a = list(a)
    b = list(b)
    if not a or len(a) != len(b):
        raise InputError("label sequences must have equal non-zero length")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    counts_a = Counter(a)
    counts_b = Counter(b)
    p_e = sum(counts_a[label] * counts_b.get(label, 0) for label in counts_a) / (n * n)
    if p_e >= 1.0 - 1e-12:
        raise UndefinedResultError("both raters are constant with the same label; kappa undefined")
    return (p_o - p_e) / (1.0 - p_e)


def dataset_stats(judgments: JudgmentSet, n_target_catalog: int, pool_size: int) -> DatasetStats:
    """Judgment-collection statistics for one category."""
    if pool_size < 1:
        raise InputError(f"pool_size must be >= 1, got {pool_size}")
    n_assessed = len(judgments.entries)
    if n_target_catalog < n_assessed:
        raise InputError(
            f"catalog target count {n_target_catalog} is below assessed count {n_assessed}"
        )
    rel_counts = [sum(1 for r in cands.values() if r == 1) for cands in judgments.entries.values()]
    n_relevant = sum(1 for c in rel_counts if c > 0)
    avg_relevant = sum(rel_counts) / n_assessed if n_assessed else 0.0
    return DatasetStats(
        n_target=n_target_catalog,
        n_assessed=n_assessed,
        n_relevant=n_relevant,
        avg_relevant=avg_relevant,
        n_annotations_per_target=pool_size,
    )


def qrels_from_annotations(
    records: list[AnnotationRecord],
    pool_candidates: dict[ItemId, list[ItemId]],
    min_votes: int = 1,
    category: str = "default",
) -> JudgmentSet:
    """Consolidate raw annotations into one binary judgment set.

    A candidate is relevant iff it was selected by at least `min_votes`
    annotators AND by a strict majority of the annotators who judged its
    target. Targets with no annotations stay unassessed.
    """
    if min_votes < 1:
        raise InputError(f"min_votes must be >= 1, got {min_votes}")
    by_target: dict[ItemId, list[AnnotationRecord]] = {}
    for rec in records:
        if rec.target_id not in pool_candidates:
            raise InputError(f"annotation for unpooled target {rec.target_id!r}")
        by_target.setdefault(rec.target_id, []).append(rec)
    entries: dict[ItemId, dict[ItemId, int]] = {}
    for target, recs in by_target.items():
        total = len(recs)
        votes = Counter(c for rec in recs for c in rec.selected)
        entries[target] = {
            cand: int(votes[cand] >= min_votes and 2 * votes[cand] > total)
            for cand in pool_candidates[target]
        }
    return JudgmentSet(category=category, entries=entries)


def read_annotations(path) -> list[AnnotationRecord]:
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                records.append(AnnotationRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ParseError(f"bad annotation record: {exc}", path, lineno) from None
    return records


def append_annotation(record: AnnotationRecord, path) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")
        fh.flush()
