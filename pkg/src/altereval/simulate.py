"""Simulated users: a synthetic critiquer plus the two switching wrappers.

The base critiquer stands in for a learned feedback model: it emits the
(noisy, normalised) direction from the shown item towards the user's target.
The two wrappers let a simulated user abandon the original target for a
judged alternative, either unconditionally once patience runs out
(`metasimtol`) or probabilistically after a perceived loss (`metasimprob`).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .catalog import Catalog, ItemId, cosine_similarity
from .errors import InputError
from .judgments import JudgmentSet, relevant_set
from .rng import substream_seed

SIMBASE = "simbase"


@dataclass(frozen=True)
class Critique:
    """One turn of user feedback: a unit direction in embedding space.

    A satisfied critique carries the all-zero sentinel direction and signals
    that the shown item already matches the user's target.
    """

    direction: np.ndarray
    satisfied: bool = False
    text: str | None = None


def satisfied_critique(dim: int) -> Critique:
    return Critique(direction=np.zeros(dim), satisfied=True, text="satisfied")


def _render_direction(direction: np.ndarray) -> str:
    """Short human-readable tag of the two dominant feedback components."""
    order = np.argsort(-np.abs(direction), kind="stable")[:2]
    parts = [f"{'+' if direction[i] >= 0 else '-'}e{i}" for i in order]
    return " ".join(parts)


class BaseSimulator(ABC):
    """Single-target critiquing user: deterministic given (turn, top1, target)."""

    @abstractmethod
    def critique(self, turn: int, top1: ItemId, target: ItemId) -> Critique:
        raise NotImplementedError


class SyntheticCritiquer(BaseSimulator):
    """Desk-scale stand-in for a learned feedback model.

    Noise is drawn from a fresh stream keyed on (seed, turn, top1, target),
    so repeated calls with the same arguments return identical critiques
    regardless of call order.
    """

    def __init__(self, catalog: Catalog, noise_sigma: float = 0.0, seed: int = 0):
        if noise_sigma < 0:
            raise InputError(f"noise_sigma must be >= 0, got {noise_sigma}")
        self.catalog = catalog
        self.noise_sigma = noise_sigma
        self.seed = seed

    def critique(self, turn: int, top1: ItemId, target: ItemId) -> Critique:
        rng = np.random.default_rng(substream_seed(self.seed, f"critique/{turn}/{top1}/{target}"))
        return synthetic_critique(self.catalog, turn, top1, target, self.noise_sigma, rng)


def synthetic_critique(
    catalog: Catalog,
    turn: int,
    top1: ItemId,
    target: ItemId,
    noise_sigma: float,
    rng: np.random.Generator,
) -> Critique:
    """Noisy normalised direction from the shown item towards the target.

    Returns the satisfied sentinel when the shown item is the target (or is
    geometrically indistinguishable from it).
    """
    if top1 == target:
        return satisfied_critique(catalog.dim)
    diff = catalog.embedding(target) - catalog.embedding(top1)
    if noise_sigma > 0:
        diff = diff + rng.normal(0.0, noise_sigma, size=catalog.dim)
    norm = np.linalg.norm(diff)
    if norm == 0.0:
        return satisfied_critique(catalog.dim)
    direction = diff / norm
    return Critique(direction=direction, satisfied=False, text=_render_direction(direction))


def select_alternative(
    judgments: JudgmentSet, catalog: Catalog, target: ItemId, top1: ItemId
) -> ItemId:
    """Judged alternative (or the target itself) most similar to the shown item.

    The candidate set always contains the original target, so the result is
    never empty; ties break by ascending item id.
    """
    top1_emb = catalog.embedding(top1)
    best_id: ItemId | None = None
    best_score = -np.inf
    for candidate in sorted(relevant_set(judgments, target, include_alternatives=True)):
        score = cosine_similarity(catalog.embedding(candidate), top1_emb)
        if score > best_score:
            best_id = candidate
            best_score = score
    assert best_id is not None
    return best_id


@dataclass
class SimulatorState:
    """Mutable per-dialog state of a switching simulated user."""

    user_id: str
    original_target: ItemId
    current_target: ItemId
    tolerance: int
    p_switch: float = 0.0
    prev_top1: ItemId | None = None
    switch_events: list[tuple[int, ItemId, ItemId]] = field(default_factory=list)
    rng: np.random.Generator | None = None
    max_switches: int | None = None
    # Diagnostic counters: loss turns that evaluated the switch guard, and
    # re-selections actually performed (even when the argmax is unchanged).
    eligible_turns: int = 0
    reselections: int = 0

    def __post_init__(self):
        if self.tolerance < 0:
            raise InputError(f"tolerance must be >= 0, got {self.tolerance}")
        if not (0.0 <= self.p_switch <= 1.0):
            raise InputError(f"p_switch must lie in [0, 1], got {self.p_switch}")


def _switching_allowed(state: SimulatorState) -> bool:
    return state.max_switches is None or len(state.switch_events) < state.max_switches


def _reselect(state, judgments, catalog, turn, top1) -> None:
    new_target = select_alternative(judgments, catalog, state.original_target, top1)
    state.reselections += 1
    if new_target != state.current_target:
        state.switch_events.append((turn, state.current_target, new_target))
        state.current_target = new_target


def tolerance_critique(
    state: SimulatorState,
    base: BaseSimulator,
    judgments: JudgmentSet,
    catalog: Catalog,
    turn: int,
    top1: ItemId,
) -> tuple[Critique, SimulatorState]:
    """Fixed-patience switching: past the tolerance turn, re-target every turn.

    The current target is re-selected as the judged alternative nearest to
    the shown item; the base critiquer is then asked about the (possibly new)
    target.
    """
    if turn < 1:
        raise InputError(f"turn must be >= 1, got {turn}")
    if turn > state.tolerance and _switching_allowed(state):
        _reselect(state, judgments, catalog, turn, top1)
    return base.critique(turn, top1, state.current_target), state


def gain_loss_critique(
    state: SimulatorState,
    base: BaseSimulator,
    judgments: JudgmentSet,
    catalog: Catalog,
    turn: int,
    top1: ItemId,
) -> tuple[Critique, SimulatorState]:
    """Loss-triggered probabilistic switching.

    Past tolerance, the user compares the shown item to the previous turn's:
    when the similarity to the current target dropped (a perceived loss),
    they re-target with probability p_switch. One uniform draw is consumed
    per loss turn; gain turns consume no randomness. The previous shown item
    is tracked on every call.
    """
    if turn < 1:
        raise InputError(f"turn must be >= 1, got {turn}")
    if turn > state.tolerance and state.prev_top1 is not None and _switching_allowed(state):
        cur = catalog.embedding(state.current_target)
        delta = cosine_similarity(catalog.embedding(top1), cur) - cosine_similarity(
            catalog.embedding(state.prev_top1), cur
        )
        if delta < 0:
            state.eligible_turns += 1
            if state.rng is None:
                raise InputError("gain-loss simulator needs an RNG stream on its state")
            if state.rng.random() < state.p_switch:
                _reselect(state, judgments, catalog, turn, top1)
    state.prev_top1 = top1
    return base.critique(turn, top1, state.current_target), state


class UserSession:
    """One simulated user bound to one dialog; produced by `make_session`."""

    def __init__(self, spec: str, base: BaseSimulator, target: ItemId):
        self.spec = spec
        self.base = base
        self.target = target

    @property
    def current_target(self) -> ItemId:
        return self.target

    @property
    def switch_events(self) -> list[tuple[int, ItemId, ItemId]]:
        return []

    def event_at(self, turn: int):
        for event in self.switch_events:
            if event[0] == turn:
                return event
        return None

    def critique(self, turn: int, top1: ItemId) -> Critique:
        return self.base.critique(turn, top1, self.target)


class _SwitchingSession(UserSession):
    def __init__(self, spec, base, judgments, catalog, state: SimulatorState):
        super().__init__(spec, base, state.original_target)
        self.judgments = judgments
        self.catalog = catalog
        self.state = state

    @property
    def current_target(self) -> ItemId:
        return self.state.current_target

    @property
    def switch_events(self):
        return self.state.switch_events


class ToleranceSession(_SwitchingSession):
    def critique(self, turn: int, top1: ItemId) -> Critique:
        critique, _ = tolerance_critique(self.state, self.base, self.judgments, self.catalog, turn, top1)
        return critique


class GainLossSession(_SwitchingSession):
    def critique(self, turn: int, top1: ItemId) -> Critique:
        critique, _ = gain_loss_critique(self.state, self.base, self.judgments, self.catalog, turn, top1)
        return critique


def parse_simulator_spec(spec: str) -> dict:
    """Parse `simbase`, `metasimtol:tol=<k>`, or `metasimprob:tol=<k>,p=<x>`."""
    name, _, rest = spec.partition(":")
    params: dict[str, str] = {}
    if rest:
        for part in rest.split(","):
            key, sep, value = part.partition("=")
            if not sep or not key or not value:
                raise InputError(f"bad simulator spec parameter {part!r} in {spec!r}")
            params[key.strip()] = value.strip()
    if name == SIMBASE:
        if params:
            raise InputError(f"simbase takes no parameters, got {spec!r}")
        return {"kind": SIMBASE}
    if name not in ("metasimtol", "metasimprob"):
        raise InputError(f"unknown simulator spec: {spec!r}")
    try:
        out: dict = {"kind": name, "tolerance": int(params.pop("tol"))}
        if name == "metasimprob":
            out["p_switch"] = float(params.pop("p"))
    except KeyError as exc:
        raise InputError(f"simulator spec {spec!r} is missing parameter {exc.args[0]!r}") from None
    except ValueError:
        raise InputError(f"bad numeric value in simulator spec {spec!r}") from None
    if params:
        raise InputError(f"unknown parameters {sorted(params)} in simulator spec {spec!r}")
    return out


def uses_alternatives(spec: str) -> bool:
    return parse_simulator_spec(spec)["kind"] != SIMBASE


def make_session(
    spec: str,
    base: BaseSimulator,
    judgments: JudgmentSet,
    catalog: Catalog,
    target: ItemId,
    user_id: str = "user",
    rng: np.random.Generator | None = None,
    max_switches: int | None = None,
) -> UserSession:
    """Instantiate the per-dialog session a simulator spec string describes."""
    parsed = parse_simulator_spec(spec)
    if parsed["kind"] == SIMBASE:
        return UserSession(spec, base, target)
    state = SimulatorState(
        user_id=user_id,
        original_target=target,
        current_target=target,
        tolerance=parsed["tolerance"],
        p_switch=parsed.get("p_switch", 0.0),
        rng=rng,
        max_switches=max_switches,
    )
    if parsed["kind"] == "metasimtol":
        return ToleranceSession(spec, base, judgments, catalog, state)
    return GainLossSession(spec, base, judgments, catalog, state)
