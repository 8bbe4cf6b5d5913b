"""Turn-based dialog loop, ranking metrics, aggregation, and improvement rows.

Success means the top-ranked item is in the relevant set (the target alone,
or target plus judged alternatives). Once a dialog succeeds, all later turns
are pinned to 1 so per-turn means reflect "satisfied by turn t".
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .catalog import Catalog, ItemId
from .errors import InputError, NotFoundError, ParseError, UndefinedResultError
from .judgments import JudgmentSet, relevant_set
from .rng import substream
from .simulate import SIMBASE, UserSession
from .systems import SystemUnderTest

REPORT_HEADER = ["simulator", "sut", "turn", "sr1", "ndcg10", "mrr10", "n_targets"]


class TurnMetrics(NamedTuple):
    sr1: float
    ndcg10: float
    mrr10: float


@dataclass
class TurnRecord:
    turn: int
    ranking: list[ItemId]
    current_target: ItemId
    switch_event: tuple[int, ItemId, ItemId] | None = None
    satisfied: bool = False


@dataclass
class Transcript:
    """Everything needed to re-score one dialog without re-running it."""

    run_id: str
    target_id: ItemId
    simulator_spec: str
    turns: list[TurnRecord]
    seed: int

    def __post_init__(self):
        for i, rec in enumerate(self.turns, start=1):
            if rec.turn != i:
                raise InputError(f"transcript turns must be contiguous from 1, got {rec.turn} at {i}")
        satisfied = [rec.turn for rec in self.turns if rec.satisfied]
        if satisfied and (len(satisfied) > 1 or satisfied[0] != self.turns[-1].turn):
            raise InputError("only the final turn of a transcript may be satisfied")

    @property
    def success_turn(self) -> int | None:
        if self.turns and self.turns[-1].satisfied:
            return self.turns[-1].turn
        return None


@dataclass
class MetricRow:
    turn: int
    sr1: float
    ndcg10: float
    mrr10: float


@dataclass
class RunReport:
    """Per-turn metric means over all dialog targets of one run."""

    simulator_spec: str
    sut_spec: str
    per_turn: list[MetricRow]
    n_targets: int
    include_alternatives: bool

    def row(self, turn: int) -> MetricRow:
        for row in self.per_turn:
            if row.turn == turn:
                return row
        raise NotFoundError(f"report has no turn {turn}")

    @property
    def final_turn(self) -> int:
        return self.per_turn[-1].turn


def turn_metrics(ranking: list[ItemId], relevant: set[ItemId], cutoff: int = 10) -> TurnMetrics:
    """SR@1, NDCG@cutoff (binary gains), and MRR@cutoff for one ranking."""
    if not ranking:
        raise InputError("ranking must be non-empty")
    if not relevant:
        raise InputError("relevant set must be non-empty")
    if len(set(ranking)) != len(ranking):
        raise InputError("ranking contains duplicate items")
    if cutoff < 1:
        raise InputError(f"cutoff must be >= 1, got {cutoff}")
    sr1 = 1.0 if ranking[0] in relevant else 0.0
    mrr = 0.0
    dcg = 0.0
    for rank, item in enumerate(ranking[:cutoff], start=1):
        if item in relevant:
            if mrr == 0.0:
                mrr = 1.0 / rank
            dcg += 1.0 / math.log2(rank + 1)
    idcg = sum(1.0 / math.log2(rank + 1) for rank in range(1, min(len(relevant), cutoff) + 1))
    return TurnMetrics(sr1=sr1, ndcg10=dcg / idcg, mrr10=mrr)


def run_dialog(
    sut: SystemUnderTest,
    session: UserSession,
    judgments: JudgmentSet,
    catalog: Catalog,
    target: ItemId,
    *,
    max_turns: int = 10,
    include_alternatives: bool = False,
    run_id: str = "",
    seed: int = 0,
    sut_rng: np.random.Generator | None = None,
) -> Transcript:
    """Drive one dialog: rank, check success at rank 1, critique, repeat.

    Stops early (marking the final turn satisfied) when the top-ranked item
    enters the relevant set, else after `max_turns`.
    """
    if target not in catalog:
        raise NotFoundError(f"unknown target id: {target!r}")
    if max_turns < 1:
        raise InputError(f"max_turns must be >= 1, got {max_turns}")
    if sut_rng is None:
        sut_rng = substream(seed, f"sut/{target}")
    success_set = relevant_set(judgments, target, include_alternatives)
    turns: list[TurnRecord] = []
    critique = None
    ranking, state = sut.start(catalog, sut_rng)
    for turn in range(1, max_turns + 1):
        if turn > 1:
            ranking, state = sut.rank(state, critique, catalog)
        if not ranking:
            raise InputError(f"system returned an empty ranking at turn {turn}")
        if ranking[0] in success_set:
            turns.append(
                TurnRecord(turn, list(ranking), session.current_target, None, satisfied=True)
            )
            break
        critique = session.critique(turn, ranking[0])
        turns.append(
            TurnRecord(turn, list(ranking), session.current_target, session.event_at(turn), False)
        )
    return Transcript(
        run_id=run_id,
        target_id=target,
        simulator_spec=session.spec,
        turns=turns,
        seed=seed,
    )


def aggregate(
    transcripts: list[Transcript],
    judgments: JudgmentSet,
    include_alternatives: bool,
    cutoff: int = 10,
    max_turns: int = 10,
    sut_spec: str = "",
) -> RunReport:
    """Per-turn unweighted means over targets, with post-success pinning to 1."""
    if not transcripts:
        raise InputError("cannot aggregate zero transcripts")
    specs = {t.simulator_spec for t in transcripts}
    if len(specs) != 1:
        raise InputError(f"transcripts mix simulator specs: {sorted(specs)}")
    sums = np.zeros((max_turns, 3))
    for transcript in transcripts:
        success_turn = transcript.success_turn
        if success_turn is None and len(transcript.turns) < max_turns:
            raise InputError(
                f"unsatisfied transcript for {transcript.target_id!r} has "
                f"{len(transcript.turns)} turns, expected {max_turns}"
            )
        relevant = relevant_set(judgments, transcript.target_id, include_alternatives)
        for turn in range(1, max_turns + 1):
            if success_turn is not None and turn >= success_turn:
                metrics = TurnMetrics(1.0, 1.0, 1.0)
            else:
                metrics = turn_metrics(transcript.turns[turn - 1].ranking, relevant, cutoff)
            sums[turn - 1] += metrics
    means = sums / len(transcripts)
    per_turn = [
        MetricRow(turn=t + 1, sr1=float(means[t, 0]), ndcg10=float(means[t, 1]), mrr10=float(means[t, 2]))
        for t in range(max_turns)
    ]
    return RunReport(
        simulator_spec=next(iter(specs)),
        sut_spec=sut_spec,
        per_turn=per_turn,
        n_targets=len(transcripts),
        include_alternatives=include_alternatives,
    )


def improvement(base: RunReport, metas: list[RunReport], metric: str, turn: int) -> float:
    """Percent change of the best meta-simulator report over the base report."""
    if metric not in ("ndcg10", "mrr10"):
        raise InputError(f"improvement is defined for ndcg10/mrr10, got {metric!r}")
    if base.simulator_spec != SIMBASE:
        raise InputError(f"base report must be {SIMBASE!r}, got {base.simulator_spec!r}")
    if not metas:
        raise InputError("need at least one meta-simulator report")
    for report in metas:
        if report.sut_spec != base.sut_spec or report.n_targets != base.n_targets:
            raise InputError(
                f"report {report.simulator_spec!r} does not match the base run "
                f"(sut={report.sut_spec!r}, n={report.n_targets})"
            )
    base_value = getattr(base.row(turn), metric)
    if base_value == 0.0:
        raise UndefinedResultError(f"base {metric} at turn {turn} is zero; improvement undefined")
    best = max(getattr(report.row(turn), metric) for report in metas)
    return 100.0 * (best - base_value) / base_value


# ---------------------------------------------------------------------------
# File formats: transcripts as JSONL, reports as CSV.

def transcript_to_json(transcript: Transcript) -> dict:
    return {
        "run_id": transcript.run_id,
        "target_id": transcript.target_id,
        "simulator_spec": transcript.simulator_spec,
        "seed": transcript.seed,
        "turns": [
            {
                "turn": rec.turn,
                "ranking": list(rec.ranking),
                "current_target": rec.current_target,
                "switch_event": list(rec.switch_event) if rec.switch_event else None,
                "satisfied": rec.satisfied,
            }
            for rec in transcript.turns
        ],
    }


def transcript_from_json(doc: dict) -> Transcript:
    return Transcript(
        run_id=str(doc["run_id"]),
        target_id=str(doc["target_id"]),
        simulator_spec=str(doc["simulator_spec"]),
        seed=int(doc["seed"]),
        turns=[
            TurnRecord(
                turn=int(rec["turn"]),
                ranking=[str(item) for item in rec["ranking"]],
                current_target=str(rec["current_target"]),
                switch_event=tuple(rec["switch_event"]) if rec.get("switch_event") else None,
                satisfied=bool(rec["satisfied"]),
            )
            for rec in doc["turns"]
        ],
    )


def write_transcripts(transcripts: list[Transcript], path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for transcript in transcripts:
            fh.write(json.dumps(transcript_to_json(transcript), sort_keys=True) + "\n")


def read_transcripts(path) -> list[Transcript]:
    path = Path(path)
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                out.append(transcript_from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad transcript record: {exc}", path, lineno) from None
    return out


def write_report(report: RunReport, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for row in report.per_turn:
            writer.writerow(
                [
                    report.simulator_spec,
                    report.sut_spec,
                    row.turn,
                    repr(row.sr1),
                    repr(row.ndcg10),
                    repr(row.mrr10),
                    report.n_targets,
                ]
            )


def read_report(path) -> RunReport:
    path = Path(path)
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != REPORT_HEADER:
            raise ParseError(f"bad report header: {header}", path, 1)
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != len(REPORT_HEADER):
                raise ParseError(f"expected {len(REPORT_HEADER)} columns", path, lineno)
            rows.append(fields)
    if not rows:
        raise ParseError("report has no rows", path, 1)
    simulator = rows[0][0]
    sut = rows[0][1]
    n_targets = int(rows[0][6])
    per_turn = [
        MetricRow(turn=int(r[2]), sr1=float(r[3]), ndcg10=float(r[4]), mrr10=float(r[5])) for r in rows
    ]
    return RunReport(
        simulator_spec=simulator,
        sut_spec=sut,
        per_turn=per_turn,
        n_targets=n_targets,
        include_alternatives=simulator != SIMBASE,
    )
