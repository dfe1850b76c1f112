"""Coupled behavior models: the preventive/control pair, the state-to-paths
mapping between them, the four-approach partition, and the cross-behavior
consistency checks."""

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .lts import Behavior, Path, enumerate_simple_paths, reachable_states
from .report import CheckReport, Finding, ModelValidationError

APPROACH_NAMES = ("Protection", "Detection", "Identification", "Removal")


@dataclass(frozen=True, order=True)
class TransitionAnnotation:
    """Optional event/approach tag carried by one transition; checks ignore these."""

    source: str
    label: str
    target: str
    event: str
    approach: str


@dataclass(frozen=True)
class PreventiveBehavior:
    """The behavior modeling the protection workflow rules."""

    base: Behavior
    events: frozenset[str]
    annotations: tuple[TransitionAnnotation, ...] = ()


@dataclass(frozen=True)
class ControlBehavior:
    """The behavior navigating the execution flow of the approaches."""

    base: Behavior
    events: frozenset[str]
    annotations: tuple[TransitionAnnotation, ...] = ()


def _annotation_diagnostics(base: Behavior, events, annotations) -> list[Finding]:
    findings = []
    triples = {(t.source, t.label, t.target) for t in base.transitions}
    for ann in annotations:
        if (ann.source, ann.label, ann.target) not in triples:
            findings.append(
                Finding("error", "unknown-transition",
                        f"{ann.source} -{ann.label}-> {ann.target}",
                        "annotation does not match any transition")
            )
        if ann.event not in events:
            findings.append(
                Finding("error", "unknown-event", ann.event,
                        "annotation event is not in the declared event set")
            )
        if ann.approach not in APPROACH_NAMES:
            findings.append(
                Finding("error", "unknown-approach-tag", ann.approach,
                        f"annotation approach must be one of {', '.join(APPROACH_NAMES)}")
            )
    return findings


def build_preventive_behavior(base: Behavior, events=None, annotations=()) -> PreventiveBehavior:
    """Wrap a behavior as the preventive side; events default to the label set."""
    events = frozenset(base.labels if events is None else events)
    annotations = tuple(sorted(annotations))
    diags = _annotation_diagnostics(base, events, annotations)
    if diags:
        raise ModelValidationError(diags)
    return PreventiveBehavior(base, events, annotations)


def build_control_behavior(base: Behavior, events=None, annotations=()) -> ControlBehavior:
    """Wrap a behavior as the control side; events default to the label set."""
    events = frozenset(base.labels if events is None else events)
    annotations = tuple(sorted(annotations))
    diags = _annotation_diagnostics(base, events, annotations)
    if diags:
        raise ModelValidationError(diags)
    return ControlBehavior(base, events, annotations)


@dataclass(frozen=True)
class MappingProcess:
    """Finite map from control states to sets of preventive paths, plus the
    control states explicitly exempted from mapping."""

    entries: tuple[tuple[str, tuple[Path, ...]], ...]
    exempt: frozenset[str] = frozenset()

    @cached_property
    def _by_state(self) -> dict[str, tuple[Path, ...]]:
        return dict(self.entries)

    @cached_property
    def mapped_states(self) -> frozenset[str]:
        return frozenset(self._by_state)

    def paths_for(self, state: str) -> tuple[Path, ...]:
        return self._by_state.get(state, ())


def mapping_process(entries: Mapping[str, Iterable[Path]], exempt=()) -> MappingProcess:
    """Normalize a state -> paths mapping into a canonical MappingProcess."""
    normalized = tuple(
        (state, tuple(sorted(set(paths), key=lambda p: (p.labels, p.states))))
        for state, paths in sorted(entries.items())
    )
    return MappingProcess(entries=normalized, exempt=frozenset(exempt))


@dataclass(frozen=True)
class Approach:
    name: str
    control_states: frozenset[str]
    preventive_states: frozenset[str]


@dataclass(frozen=True)
class ApproachPartition:
    """The four named approaches, each covering states on both sides."""

    approaches: tuple[Approach, ...]

    def get(self, name: str) -> Approach:
        for approach in self.approaches:
            if approach.name == name:
                return approach
        raise KeyError(name)

    def states_by_side(self, side: str) -> dict[str, frozenset[str]]:
        if side not in ("control", "preventive"):
            raise ValueError(f"side must be 'control' or 'preventive', not {side!r}")
        return {
            a.name: (a.control_states if side == "control" else a.preventive_states)
            for a in self.approaches
        }

    def covered(self, side: str) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for members in self.states_by_side(side).values():
            out |= members
        return out


def approach_partition(assignments: Mapping[str, tuple[Iterable[str], Iterable[str]]]) -> ApproachPartition:
    """Build the partition from {name: (control states, preventive states)};
    approaches missing from the mapping are empty."""
    unknown = sorted(set(assignments) - set(APPROACH_NAMES))
    if unknown:
        raise ValueError(f"unknown approach name(s): {', '.join(unknown)}")
    approaches = []
    for name in APPROACH_NAMES:
        control, preventive = assignments.get(name, ((), ()))
        approaches.append(Approach(name, frozenset(control), frozenset(preventive)))
    return ApproachPartition(tuple(approaches))


def approach_membership(approaches, states) -> dict[str, frozenset[str]]:
    """Resolve an approach argument (partition, plain mapping, or None) to
    {approach name: member states drawn from `states`}."""
    states = frozenset(states)
    if approaches is None:
        return {}
    if isinstance(approaches, ApproachPartition):
        return {
            a.name: (a.control_states | a.preventive_states) & states
            for a in approaches.approaches
        }
    return {str(name): frozenset(members) & states for name, members in approaches.items()}


@dataclass(frozen=True)
class CoupledModel:
    name: str
    preventive: PreventiveBehavior
    control: ControlBehavior
    mapping: MappingProcess
    approaches: ApproachPartition


def coupled_diagnostics(preventive: PreventiveBehavior, control: ControlBehavior,
                        mapping: MappingProcess, approaches: ApproachPartition) -> list[Finding]:
    """Name-resolution and partition checks. Whether mapped paths actually walk
    the preventive transition relation is check_mapping's job, so that broken
    models stay constructible and reportable."""
    findings: list[Finding] = []
    control_states = control.base.states
    preventive_states = preventive.base.states

    def wrong_side(name: str, expected: str) -> str:
        other = preventive_states if expected == "control" else control_states
        if name in other:
            flip = "preventive" if expected == "control" else "control"
            return f"names a {flip} state where a {expected} state is required"
        return f"is not a {expected} state"

    for state, paths in mapping.entries:
        if state not in control_states:
            findings.append(
                Finding("error", "cross-behavior-reference", state,
                        f"mapping key {wrong_side(state, 'control')}")
            )
        # Path labels and triple membership are check_mapping's concern, so a
        # model with a broken mapped path stays constructible and reportable.
        for path in paths:
            for s in path.states:
                if s not in preventive_states:
                    findings.append(
                        Finding("error", "cross-behavior-reference", s,
                                f"mapping for {state}: path state {wrong_side(s, 'preventive')}")
                    )

    for state in sorted(mapping.exempt):
        if state not in control_states:
            findings.append(
                Finding("error", "cross-behavior-reference", state,
                        f"exempt state {wrong_side(state, 'control')}")
            )
        if state in mapping.mapped_states:
            findings.append(
                Finding("error", "exempt-conflict", state,
                        "state is both mapped and declared exempt")
            )

    for state in sorted(control_states - mapping.mapped_states - mapping.exempt):
        findings.append(
            Finding("error", "partial-mapping", state,
                    "control state is neither mapped nor declared exempt")
        )

    for side, expected_states in (("control", control_states), ("preventive", preventive_states)):
        owners: dict[str, str] = {}
        for approach in approaches.approaches:
            members = approach.control_states if side == "control" else approach.preventive_states
            for state in sorted(members):
                if state not in expected_states:
                    findings.append(
                        Finding("error", "cross-behavior-reference", state,
                                f"approach {approach.name} ({side} side) {wrong_side(state, side)}")
                    )
                if state in owners:
                    findings.append(
                        Finding("error", "overlapping-approach", state,
                                f"claimed by both {owners[state]} and {approach.name} ({side} side)")
                    )
                else:
                    owners[state] = approach.name
    return findings


def build_coupled_model(preventive: PreventiveBehavior, control: ControlBehavior,
                        mapping: MappingProcess, approaches: ApproachPartition,
                        name: str = "model") -> CoupledModel:
    """Construct a validated CoupledModel; raises ModelValidationError otherwise."""
    diags = coupled_diagnostics(preventive, control, mapping, approaches)
    if diags:
        raise ModelValidationError(diags)
    return CoupledModel(name, preventive, control, mapping, approaches)


def _first_break(preventive: Behavior, path: Path) -> str | None:
    """Describe the first point, walking left to right, where a mapped path
    stops being a preventive path."""
    if path.states[0] not in preventive.states:
        return f"state {path.states[0]} is not a preventive state"
    for t in path.triples():
        if t.target not in preventive.states:
            return f"state {t.target} is not a preventive state"
        if t not in preventive.transition_set:
            return f"missing transition {t}"
    return None


def check_mapping(model: CoupledModel) -> CheckReport:
    """Per control state: mapped path count, exemptions, and any mapped path
    that is not a valid preventive path (with the first broken triple)."""
    findings: list[Finding] = []
    control = model.control.base
    preventive = model.preventive.base

    for state in sorted(control.states):
        if state in model.mapping.exempt:
            findings.append(Finding("info", "exempt-state", state, "declared exempt from mapping"))
            continue
        paths = model.mapping.paths_for(state)
        if not paths:
            findings.append(
                Finding("error", "partial-mapping", state,
                        "control state is neither mapped nor declared exempt")
            )
            continue
        findings.append(
            Finding("info", "mapping-entry", state, f"maps to {len(paths)} preventive path(s)")
        )
        for path in paths:
            broken = _first_break(preventive, path)
            if broken is not None:
                findings.append(
                    Finding("error", "invalid-mapped-path", state,
                            f"path {path} is not a preventive path: {broken}")
                )

    for path in model.mapping.paths_for(control.initial):
        if path.first != preventive.initial:
            findings.append(
                Finding("warning", "initial-mapping-start", control.initial,
                        f"path {path} starts at {path.first}, not the preventive initial "
                        f"{preventive.initial}")
            )

    if not model.mapping.mapped_states and model.mapping.exempt >= control.states:
        findings.append(
            Finding("warning", "fully-exempt-mapping", model.name,
                    "fully exempt mapping: every control state is exempt")
        )
    return CheckReport("mapping", tuple(findings))


def check_approach_alignment(model: CoupledModel) -> CheckReport:
    """Every state on a path mapped from an approach's control state must lie
    in that approach's preventive set."""
    findings: list[Finding] = []
    seen: set[tuple[str, str, str]] = set()
    for approach in model.approaches.approaches:
        for control_state in sorted(approach.control_states):
            for path in model.mapping.paths_for(control_state):
                for state in path.states:
                    if state in approach.preventive_states:
                        continue
                    key = (approach.name, control_state, state)
                    if key in seen:
                        continue
                    seen.add(key)
                    findings.append(
                        Finding("error", "approach-misalignment", control_state,
                                f"mapped path state {state} lies outside the "
                                f"{approach.name} preventive set")
                    )

    for side, behavior in (("control", model.control.base), ("preventive", model.preventive.base)):
        uncovered = sorted(behavior.states - model.approaches.covered(side))
        if uncovered:
            findings.append(
                Finding("info", "uncovered-states", side,
                        f"{len(uncovered)} state(s) in no approach: {', '.join(uncovered)}")
            )
    return CheckReport("approaches", tuple(findings))


def check_synchronization(model: CoupledModel) -> CheckReport:
    """Stitching check for the coupled pair: along every simple control path
    from the control initial state to a control final state, the mapped
    preventive fragments (exempt states skipped, consecutive identical
    fragment sets deduplicated) must chain up, each fragment's first state
    reachable from some previous fragment's last state by zero or more
    preventive transitions. The first gap per control path is reported."""
    findings: list[Finding] = []
    control = model.control.base
    preventive = model.preventive.base

    reach_memo: dict[str, frozenset[str]] = {}

    def reaches(src: str, dst: str) -> bool:
        if src not in reach_memo:
            reach_memo[src] = reachable_states(preventive, src)
        return dst in reach_memo[src]

    finals = sorted(control.finals)
    if not finals:
        findings.append(
            Finding("warning", "no-final-states", "control",
                    "control behavior declares no final states; nothing to stitch")
        )

    seen_gaps: set[tuple] = set()
    checked = 0
    for final in finals:
        for control_path in enumerate_simple_paths(control, control.initial, final):
            checked += 1
            feasible: tuple[Path, ...] | None = None
            previous: tuple[Path, ...] | None = None
            for control_state in control_path.states:
                if control_state in model.mapping.exempt:
                    continue
                fragments = model.mapping.paths_for(control_state)
                if not fragments or fragments == previous:
                    continue
                if feasible is None:
                    feasible = fragments
                else:
                    linked = tuple(
                        g for g in fragments if any(reaches(f.last, g.first) for f in feasible)
                    )
                    if not linked:
                        ends = ", ".join(sorted({f.last for f in feasible}))
                        starts = ", ".join(sorted({g.first for g in fragments}))
                        key = (control_state, ends, starts)
                        if key not in seen_gaps:
                            seen_gaps.add(key)
                            findings.append(
                                Finding("error", "sync-gap", control_state,
                                        f"along control path {control_path}: no preventive walk "
                                        f"from {{{ends}}} to {{{starts}}}")
                            )
                        break
                    feasible = linked
                previous = fragments
    findings.append(
        Finding("info", "control-paths", "control", f"checked {checked} control path(s)")
    )
    return CheckReport("synchronization", tuple(findings))
