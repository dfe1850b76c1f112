"""Labeled transition systems: behaviors, paths, and the graph queries built on them.

A behavior is a finite set of named states with one initial state, a finite
label set, a labeled transition relation, and an optional set of declared
final states. A path is an alternating state/label sequence; a single state
is a valid degenerate path.
"""

import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

from .report import Finding, ModelValidationError

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class UnknownStateError(ValueError):
    """An operation was asked about a state the behavior does not have."""

    def __init__(self, state: str):
        super().__init__(f"unknown state: {state}")
        self.state = state


def is_valid_name(name: str) -> bool:
    """True for identifiers: letters, digits, underscore; no leading digit."""
    return bool(_NAME_RE.match(name))


@dataclass(frozen=True, order=True)
class Transition:
    source: str
    label: str
    target: str

    def __str__(self) -> str:
        return f"{self.source} -{self.label}-> {self.target}"


@dataclass(frozen=True)
class Behavior:
    """An immutable labeled transition system."""

    states: frozenset[str]
    initial: str
    labels: frozenset[str]
    transitions: tuple[Transition, ...]
    finals: frozenset[str] = frozenset()

    @cached_property
    def transition_set(self) -> frozenset[Transition]:
        return frozenset(self.transitions)

    @cached_property
    def successor_map(self) -> dict[str, tuple[tuple[str, str], ...]]:
        """Per state, the outgoing (label, target) pairs in sorted order."""
        out: dict[str, list[tuple[str, str]]] = {s: [] for s in self.states}
        for t in self.transitions:
            out[t.source].append((t.label, t.target))
        return {s: tuple(sorted(pairs)) for s, pairs in out.items()}


@dataclass(frozen=True)
class Path:
    """An alternating state/label sequence; length-1 paths carry zero labels."""

    states: tuple[str, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.states) < 1:
            raise ValueError("a path needs at least one state")
        if len(self.labels) != len(self.states) - 1:
            raise ValueError("a path over n states carries exactly n-1 labels")

    @property
    def first(self) -> str:
        return self.states[0]

    @property
    def last(self) -> str:
        return self.states[-1]

    def triples(self) -> Iterator[Transition]:
        for i, label in enumerate(self.labels):
            yield Transition(self.states[i], label, self.states[i + 1])

    def __str__(self) -> str:
        parts = [self.states[0]]
        for label, state in zip(self.labels, self.states[1:]):
            parts.append(f"-{label}-> {state}")
        return " ".join(parts)


def _as_transition(t) -> Transition:
    if isinstance(t, Transition):
        return t
    source, label, target = t
    return Transition(source, label, target)


def behavior_diagnostics(states, initial, labels, transitions, finals=()) -> list[Finding]:
    """Validate the raw pieces of a behavior and list every problem found."""
    states = list(states)
    labels = list(labels)
    finals = list(finals)
    transitions = [_as_transition(t) for t in transitions]
    findings: list[Finding] = []

    if not states:
        findings.append(
            Finding("error", "empty-state-set", "<behavior>", "behavior declares no states")
        )
        return findings

    state_set = set(states)
    label_set = set(labels)

    for name in sorted(state_set | label_set):
        if not is_valid_name(name):
            findings.append(
                Finding("error", "invalid-identifier", name,
                        "identifiers are letters, digits and underscore, not starting with a digit")
            )

    if initial not in state_set:
        findings.append(
            Finding("error", "bad-initial", str(initial), "initial state is not a declared state")
        )
    for name in sorted(set(finals) - state_set):
        findings.append(
            Finding("error", "unknown-state", name, "final state is not a declared state")
        )

    seen: set[Transition] = set()
    for t in transitions:
        if t.source not in state_set:
            findings.append(
                Finding("error", "unknown-state", t.source, f"transition {t} leaves an unknown state")
            )
        if t.target not in state_set:
            findings.append(
                Finding("error", "unknown-state", t.target, f"transition {t} enters an unknown state")
            )
        if t.label not in label_set:
            findings.append(
                Finding("error", "unknown-label", t.label, f"transition {t} uses an undeclared label")
            )
        if t in seen:
            findings.append(
                Finding("error", "duplicate-transition", str(t), "transition appears more than once")
            )
        seen.add(t)
    return findings


def build_behavior(states, initial, labels, transitions, finals=()) -> Behavior:
    """Construct a validated Behavior; raises ModelValidationError listing every defect."""
    diags = behavior_diagnostics(states, initial, labels, transitions, finals)
    if diags:
        raise ModelValidationError(diags)
    return Behavior(
        states=frozenset(states),
        initial=initial,
        labels=frozenset(labels),
        transitions=tuple(sorted(_as_transition(t) for t in transitions)),
        finals=frozenset(finals),
    )


def is_valid_path(behavior: Behavior, path: Path) -> bool:
    """True iff every state/label belongs to the behavior and every triple is a transition."""
    if any(s not in behavior.states for s in path.states):
        return False
    if any(l not in behavior.labels for l in path.labels):
        return False
    return all(t in behavior.transition_set for t in path.triples())


def successors(behavior: Behavior, state: str) -> set[tuple[str, str]]:
    """The (label, target) pairs leaving `state`."""
    if state not in behavior.states:
        raise UnknownStateError(state)
    return set(behavior.successor_map[state])


def enumerate_simple_paths(behavior: Behavior, source: str, target: str) -> list[Path]:
    """All paths from source to target with no repeated state.

    Output order is lexicographic by label sequence (ties broken by state
    names), so listings and reports are stable across runs.
    """
    for s in (source, target):
        if s not in behavior.states:
            raise UnknownStateError(s)
    if source == target:
        return [Path((source,))]

    out: list[Path] = []
    states_acc = [source]
    labels_acc: list[str] = []
    visited = {source}

    def walk(state: str) -> None:
        for label, nxt in behavior.successor_map[state]:
            if nxt in visited:
                continue
            states_acc.append(nxt)
            labels_acc.append(label)
            if nxt == target:
                out.append(Path(tuple(states_acc), tuple(labels_acc)))
            else:
                visited.add(nxt)
                walk(nxt)
                visited.discard(nxt)
            states_acc.pop()
            labels_acc.pop()

    walk(source)
    out.sort(key=lambda p: (p.labels, p.states))
    return out


def reachable_states(behavior: Behavior, origin: str | None = None) -> frozenset[str]:
    """Least fixpoint of successor closure from `origin` (the initial state by default)."""
    start = behavior.initial if origin is None else origin
    if start not in behavior.states:
        raise UnknownStateError(start)
    seen = {start}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for _, nxt in behavior.successor_map[state]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)


def find_deadlocks(behavior: Behavior) -> frozenset[str]:
    """Reachable states with no outgoing transition that are not declared final."""
    return frozenset(
        s
        for s in reachable_states(behavior)
        if not behavior.successor_map[s] and s not in behavior.finals
    )
