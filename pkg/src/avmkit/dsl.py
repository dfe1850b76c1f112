"""Textual format for coupled models and property suites.

A document is a sequence of statements:

    behavior (preventive|control) { initial ID  [final ID+]  [state ID]*  edges* }
    edge:        ID - ID -> ID              (source - label -> target)
    approach NAME { control: ID*  preventive: ID* }
    map ID => pathExpr[, pathExpr]*         (pathExpr: ID [- ID -> ID]*)
    exempt ID
    spec NAME on (control|preventive) [expect (holds|fails)]: <ctl formula to end of line>

Comments run from ``#`` to end of line. Edge endpoints and labels declare
themselves; ``state`` lines are only needed for otherwise unmentioned states.
"""

import bisect
import re
from dataclasses import dataclass, field

from . import ctl
from .coupled import (
    APPROACH_NAMES,
    CoupledModel,
    approach_partition,
    build_control_behavior,
    build_coupled_model,
    build_preventive_behavior,
    mapping_process,
)
from .ctl import CtlFormula, CtlSyntaxError, parse_ctl
from .lts import Path, build_behavior
from .report import Finding, ModelValidationError, SourcePos, sort_findings

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ModelSyntaxError(ValueError):
    """Document text failed to parse; carries the offending position."""

    def __init__(self, message: str, position: SourcePos):
        self.position = position
        super().__init__(f"{message} at {position}")


@dataclass(frozen=True)
class PropertySpec:
    """One named CTL property targeting the control or preventive behavior."""

    name: str
    target: str
    formula: CtlFormula
    expected: str | None = None
    position: SourcePos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ModelDocument:
    coupled: CoupledModel
    properties: tuple[PropertySpec, ...]
    # Subject name -> source position, so reports on the built model can point
    # back into the text. Not part of document identity.
    source_positions: dict[str, SourcePos] = field(
        default_factory=dict, compare=False, repr=False
    )


# -- lexer ---------------------------------------------------------------------


@dataclass(frozen=True)
class _Tok:
    kind: str  # "ident" | "punct" | "eof"
    value: str
    offset: int


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.n = len(text)
        self.cursor = 0
        self.buffer: list[_Tok] = []
        self.line_starts = [0] + [i + 1 for i, ch in enumerate(text) if ch == "\n"]

    def pos_of(self, offset: int) -> SourcePos:
        line_index = bisect.bisect_right(self.line_starts, offset) - 1
        return SourcePos(line_index + 1, offset - self.line_starts[line_index] + 1)

    def _scan(self) -> _Tok:
        text, n = self.text, self.n
        while self.cursor < n:
            ch = text[self.cursor]
            if ch in " \t\r\n":
                self.cursor += 1
                continue
            if ch == "#":
                eol = text.find("\n", self.cursor)
                self.cursor = n if eol == -1 else eol
                continue
            break
        if self.cursor >= n:
            return _Tok("eof", "", n)
        start = self.cursor
        two = text[start:start + 2]
        if two in ("->", "=>"):
            self.cursor += 2
            return _Tok("punct", two, start)
        ch = text[start]
        if ch in "{}:,-":
            self.cursor += 1
            return _Tok("punct", ch, start)
        m = _IDENT_RE.match(text, start)
        if m:
            self.cursor = m.end()
            return _Tok("ident", m.group(), start)
        raise ModelSyntaxError(f"unexpected character {ch!r}", self.pos_of(start))

    def peek(self, ahead: int = 0) -> _Tok:
        while len(self.buffer) <= ahead:
            self.buffer.append(self._scan())
        return self.buffer[ahead]

    def take(self) -> _Tok:
        tok = self.peek()
        if tok.kind != "eof":
            self.buffer.pop(0)
        return tok

    def take_rest_of_line(self) -> tuple[str, SourcePos]:
        """Raw text (comment stripped) from the next token to end of line;
        resynchronizes the token stream past that line."""
        start = self.buffer[0].offset if self.buffer else self.cursor
        eol = self.text.find("\n", start)
        if eol == -1:
            eol = self.n
        hash_at = self.text.find("#", start, eol)
        end = hash_at if hash_at != -1 else eol
        raw = self.text[start:end]
        self.cursor = min(eol + 1, self.n)
        self.buffer.clear()
        return raw, self.pos_of(start)


# -- raw statement collection ----------------------------------------------------


@dataclass
class _RawBehavior:
    kind: str
    pos: SourcePos
    initial: tuple[str, SourcePos] | None = None
    finals: list[tuple[str, SourcePos]] = field(default_factory=list)
    decls: list[tuple[str, SourcePos]] = field(default_factory=list)
    edges: list[tuple[str, str, str, SourcePos]] = field(default_factory=list)


@dataclass
class _RawMap:
    key: str
    pos: SourcePos
    paths: list[tuple[list[tuple[str, SourcePos]], list[tuple[str, SourcePos]]]] = field(
        default_factory=list
    )


@dataclass
class _RawApproach:
    name: str
    pos: SourcePos
    sides: dict[str, list[tuple[str, SourcePos]]] = field(default_factory=dict)


@dataclass
class _RawSpec:
    name: str
    pos: SourcePos
    target: str
    expected: str | None
    formula_text: str
    formula_pos: SourcePos


class _DocParser:
    def __init__(self, text: str):
        self.lx = _Lexer(text)
        self.behaviors: dict[str, _RawBehavior] = {}
        self.maps: list[_RawMap] = []
        self.approaches: list[_RawApproach] = []
        self.exempts: list[tuple[str, SourcePos]] = []
        self.specs: list[_RawSpec] = []
        self.findings: list[Finding] = []

    def fail(self, message: str, tok: _Tok):
        raise ModelSyntaxError(message, self.lx.pos_of(tok.offset))

    def pos(self, tok: _Tok) -> SourcePos:
        return self.lx.pos_of(tok.offset)

    def expect_ident(self, description: str) -> _Tok:
        tok = self.lx.peek()
        if tok.kind != "ident":
            self.fail(f"expected {description}", tok)
        return self.lx.take()

    def expect_punct(self, value: str) -> _Tok:
        tok = self.lx.peek()
        if not (tok.kind == "punct" and tok.value == value):
            self.fail(f"expected '{value}'", tok)
        return self.lx.take()

    def parse(self) -> None:
        while True:
            tok = self.lx.peek()
            if tok.kind == "eof":
                return
            if tok.kind != "ident":
                self.fail("expected 'behavior', 'approach', 'map', 'exempt', or 'spec'", tok)
            if tok.value == "behavior":
                self._behavior()
            elif tok.value == "approach":
                self._approach()
            elif tok.value == "map":
                self._map()
            elif tok.value == "exempt":
                self._exempt()
            elif tok.value == "spec":
                self._spec()
            else:
                self.fail("expected 'behavior', 'approach', 'map', 'exempt', or 'spec'", tok)

    def _behavior(self) -> None:
        head = self.lx.take()
        kind_tok = self.expect_ident("'preventive' or 'control'")
        if kind_tok.value not in ("preventive", "control"):
            self.fail("expected 'preventive' or 'control'", kind_tok)
        self.expect_punct("{")
        raw = _RawBehavior(kind=kind_tok.value, pos=self.pos(head))
        while True:
            tok = self.lx.peek()
            if tok.kind == "punct" and tok.value == "}":
                self.lx.take()
                break
            if tok.kind == "eof":
                self.fail("unclosed behavior block; expected '}'", tok)
            if tok.kind != "ident":
                self.fail("expected a state declaration or an edge", tok)
            after = self.lx.peek(1)
            is_edge_start = after.kind == "punct" and after.value == "-"
            if tok.value in ("initial", "final", "state") and not is_edge_start:
                self.lx.take()
                if tok.value == "initial":
                    name = self.expect_ident("a state name")
                    if raw.initial is not None:
                        self.findings.append(
                            Finding("error", "duplicate-initial", name.value,
                                    "behavior block declares more than one initial state",
                                    self.pos(name))
                        )
                    else:
                        raw.initial = (name.value, self.pos(name))
                elif tok.value == "final":
                    taken = 0
                    while True:
                        candidate = self.lx.peek()
                        if candidate.kind != "ident":
                            break
                        lookahead = self.lx.peek(1)
                        if lookahead.kind == "punct" and lookahead.value == "-":
                            break  # next thing is an edge
                        if candidate.value in ("initial", "final", "state"):
                            break
                        self.lx.take()
                        raw.finals.append((candidate.value, self.pos(candidate)))
                        taken += 1
                    if taken == 0:
                        self.fail("expected at least one state name after 'final'", self.lx.peek())
                else:
                    name = self.expect_ident("a state name")
                    raw.decls.append((name.value, self.pos(name)))
            else:
                src = self.lx.take()
                self.expect_punct("-")
                label = self.expect_ident("a transition label")
                self.expect_punct("->")
                target = self.expect_ident("a target state")
                raw.edges.append((src.value, label.value, target.value, self.pos(src)))
        if raw.kind in self.behaviors:
            self.findings.append(
                Finding("error", "duplicate-behavior", raw.kind,
                        f"more than one {raw.kind} behavior block", raw.pos)
            )
        else:
            self.behaviors[raw.kind] = raw

    def _approach(self) -> None:
        self.lx.take()
        name = self.expect_ident("an approach name")
        raw = _RawApproach(name=name.value, pos=self.pos(name))
        self.expect_punct("{")
        while True:
            tok = self.lx.peek()
            if tok.kind == "punct" and tok.value == "}":
                self.lx.take()
                break
            if tok.kind == "eof":
                self.fail("unclosed approach block; expected '}'", tok)
            after = self.lx.peek(1)
            if (tok.kind == "ident" and tok.value in ("control", "preventive")
                    and after.kind == "punct" and after.value == ":"):
                self.lx.take()
                self.lx.take()
                if tok.value in raw.sides:
                    self.findings.append(
                        Finding("error", "duplicate-approach-section", tok.value,
                                f"approach {raw.name} repeats its '{tok.value}:' section",
                                self.pos(tok))
                    )
                members = raw.sides.setdefault(tok.value, [])
                while True:
                    member = self.lx.peek()
                    if member.kind != "ident":
                        break
                    lookahead = self.lx.peek(1)
                    if (member.value in ("control", "preventive")
                            and lookahead.kind == "punct" and lookahead.value == ":"):
                        break
                    self.lx.take()
                    members.append((member.value, self.pos(member)))
            else:
                self.fail("expected 'control:', 'preventive:', or '}'", tok)
        self.approaches.append(raw)

    def _path_expr(self):
        first = self.expect_ident("a preventive state name")
        states = [(first.value, self.pos(first))]
        labels: list[tuple[str, SourcePos]] = []
        while True:
            tok = self.lx.peek()
            if not (tok.kind == "punct" and tok.value == "-"):
                break
            self.lx.take()
            label = self.expect_ident("a transition label")
            self.expect_punct("->")
            target = self.expect_ident("a target state")
            labels.append((label.value, self.pos(label)))
            states.append((target.value, self.pos(target)))
        return states, labels

    def _map(self) -> None:
        self.lx.take()
        key = self.expect_ident("a control state name")
        self.expect_punct("=>")
        raw = _RawMap(key=key.value, pos=self.pos(key))
        while True:
            raw.paths.append(self._path_expr())
            tok = self.lx.peek()
            if tok.kind == "punct" and tok.value == ",":
                self.lx.take()
                continue
            break
        self.maps.append(raw)

    def _exempt(self) -> None:
        self.lx.take()
        name = self.expect_ident("a control state name")
        self.exempts.append((name.value, self.pos(name)))

    def _spec(self) -> None:
        self.lx.take()
        name = self.expect_ident("a property name")
        on = self.expect_ident("'on'")
        if on.value != "on":
            self.fail("expected 'on'", on)
        target = self.expect_ident("'control' or 'preventive'")
        if target.value not in ("control", "preventive"):
            self.fail("expected 'control' or 'preventive'", target)
        expected = None
        tok = self.lx.peek()
        if tok.kind == "ident" and tok.value == "expect":
            self.lx.take()
            verdict = self.expect_ident("'holds' or 'fails'")
            if verdict.value not in ("holds", "fails"):
                self.fail("expected 'holds' or 'fails'", verdict)
            expected = verdict.value
        self.expect_punct(":")
        formula_text, formula_pos = self.lx.take_rest_of_line()
        self.specs.append(
            _RawSpec(name=name.value, pos=self.pos(name), target=target.value,
                     expected=expected, formula_text=formula_text, formula_pos=formula_pos)
        )


# -- semantic assembly -------------------------------------------------------------


def _assemble_behavior(raw: _RawBehavior, findings: list[Finding]):
    """Returns (Behavior | None, {state: first position})."""
    first_pos: dict[str, SourcePos] = {}

    def note(name: str, pos: SourcePos) -> None:
        first_pos.setdefault(name, pos)

    if raw.initial is not None:
        note(*raw.initial)
    for name, pos in raw.finals:
        note(name, pos)
    for name, pos in raw.decls:
        note(name, pos)
    for source, label, target, pos in raw.edges:
        note(source, pos)
        note(target, pos)

    if not first_pos:
        findings.append(
            Finding("error", "empty-state-set", raw.kind,
                    f"{raw.kind} behavior block declares no states", raw.pos)
        )
        return None, first_pos
    if raw.initial is None:
        findings.append(
            Finding("error", "bad-initial", raw.kind,
                    f"{raw.kind} behavior block declares no initial state", raw.pos)
        )
        return None, first_pos

    transitions = []
    seen: set[tuple[str, str, str]] = set()
    broken = False
    for source, label, target, pos in raw.edges:
        triple = (source, label, target)
        if triple in seen:
            findings.append(
                Finding("error", "duplicate-transition",
                        f"{source} -{label}-> {target}",
                        "transition appears more than once", pos)
            )
            broken = True
            continue
        seen.add(triple)
        transitions.append(triple)
    if broken:
        return None, first_pos

    labels = {label for _, label, _ in transitions}
    try:
        behavior = build_behavior(
            states=set(first_pos),
            initial=raw.initial[0],
            labels=labels,
            transitions=transitions,
            finals={name for name, _ in raw.finals},
        )
    except ModelValidationError as exc:  # safety net; positions fall back to the block
        for f in exc.findings:
            findings.append(Finding(f.severity, f.code, f.subject, f.detail,
                                    first_pos.get(f.subject, raw.pos)))
        return None, first_pos
    return behavior, first_pos


def parse_model(text: str, *, name: str = "model") -> ModelDocument:
    """Parse and fully validate a model document.

    Raises ModelSyntaxError on malformed text and ModelValidationError (with
    positioned findings) on semantic problems.
    """
    parser = _DocParser(text)
    parser.parse()
    findings = list(parser.findings)

    built: dict[str, object] = {}
    positions: dict[str, dict[str, SourcePos]] = {}
    for kind in ("preventive", "control"):
        raw = parser.behaviors.get(kind)
        if raw is None:
            findings.append(
                Finding("error", "missing-behavior", kind,
                        f"document declares no {kind} behavior", SourcePos(1, 1))
            )
            continue
        behavior, first_pos = _assemble_behavior(raw, findings)
        positions[kind] = first_pos
        if behavior is not None:
            built[kind] = behavior

    preventive = built.get("preventive")
    control = built.get("control")

    entries: dict[str, list[Path]] = {}
    exempt: set[str] = set()
    assignments: dict[str, tuple[list[str], list[str]]] = {}

    if preventive is not None and control is not None:

        def wrong_side(state: str, expected_kind: str) -> str:
            other = preventive.states if expected_kind == "control" else control.states
            if state in other:
                flip = "preventive" if expected_kind == "control" else "control"
                return f"names a {flip} state where a {expected_kind} state is required"
            return f"is not a {expected_kind} state"

        for raw_map in parser.maps:
            if raw_map.key not in control.states:
                findings.append(
                    Finding("error", "cross-behavior-reference", raw_map.key,
                            f"mapping key {wrong_side(raw_map.key, 'control')}", raw_map.pos)
                )
                continue
            bucket = entries.setdefault(raw_map.key, [])
            for states, labels in raw_map.paths:
                # Labels and triple membership are deliberately unchecked here;
                # check_mapping reports broken paths on the built model.
                ok = True
                for state, pos in states:
                    if state not in preventive.states:
                        findings.append(
                            Finding("error", "cross-behavior-reference", state,
                                    f"mapping for {raw_map.key}: path state "
                                    f"{wrong_side(state, 'preventive')}", pos)
                        )
                        ok = False
                if ok:
                    bucket.append(Path(tuple(s for s, _ in states),
                                       tuple(l for l, _ in labels)))

        for state, pos in parser.exempts:
            if state not in control.states:
                findings.append(
                    Finding("error", "cross-behavior-reference", state,
                            f"exempt state {wrong_side(state, 'control')}", pos)
                )
            elif state in entries:
                findings.append(
                    Finding("error", "exempt-conflict", state,
                            "state is both mapped and declared exempt", pos)
                )
            else:
                exempt.add(state)

        control_pos = positions.get("control", {})
        for state in sorted(control.states - set(entries) - exempt):
            findings.append(
                Finding("error", "partial-mapping", state,
                        "control state is neither mapped nor declared exempt",
                        control_pos.get(state))
            )

        owners: dict[tuple[str, str], tuple[str, SourcePos]] = {}
        for raw_app in parser.approaches:
            if raw_app.name not in APPROACH_NAMES:
                findings.append(
                    Finding("error", "unknown-approach", raw_app.name,
                            f"approach must be one of {', '.join(APPROACH_NAMES)}",
                            raw_app.pos)
                )
                continue
            if raw_app.name in assignments:
                findings.append(
                    Finding("error", "duplicate-approach", raw_app.name,
                            "approach block appears more than once", raw_app.pos)
                )
                continue
            control_members: list[str] = []
            preventive_members: list[str] = []
            for side, members in raw_app.sides.items():
                expected = control.states if side == "control" else preventive.states
                sink = control_members if side == "control" else preventive_members
                for state, pos in members:
                    if state not in expected:
                        findings.append(
                            Finding("error", "cross-behavior-reference", state,
                                    f"approach {raw_app.name} ({side} side) "
                                    f"{wrong_side(state, side)}", pos)
                        )
                        continue
                    owner = owners.get((side, state))
                    if owner is not None and owner[0] != raw_app.name:
                        findings.append(
                            Finding("error", "overlapping-approach", state,
                                    f"claimed by both {owner[0]} and {raw_app.name} "
                                    f"({side} side)", pos)
                        )
                        continue
                    owners[(side, state)] = (raw_app.name, pos)
                    sink.append(state)
            assignments[raw_app.name] = (control_members, preventive_members)

    properties: list[PropertySpec] = []
    seen_names: dict[str, SourcePos] = {}
    for raw_spec in parser.specs:
        if raw_spec.name in seen_names:
            findings.append(
                Finding("error", "duplicate-property", raw_spec.name,
                        "property name appears more than once", raw_spec.pos)
            )
            continue
        seen_names[raw_spec.name] = raw_spec.pos
        try:
            formula = parse_ctl(raw_spec.formula_text,
                                start_line=raw_spec.formula_pos.line,
                                start_column=raw_spec.formula_pos.column)
        except CtlSyntaxError as exc:
            findings.append(
                Finding("error", "ctl-syntax", raw_spec.name, str(exc),
                        SourcePos(exc.line, exc.column))
            )
            continue
        target_behavior = built.get(raw_spec.target)
        if target_behavior is not None:
            for prop in ctl.atoms(formula):
                if prop.kind == "at" and prop.subject not in target_behavior.states:
                    findings.append(
                        Finding("error", "unknown-atom", str(prop),
                                f"property {raw_spec.name}: no state {prop.subject} in the "
                                f"{raw_spec.target} behavior", raw_spec.pos)
                    )
                elif prop.kind == "in" and prop.subject not in APPROACH_NAMES:
                    findings.append(
                        Finding("error", "unknown-atom", str(prop),
                                f"property {raw_spec.name}: no approach named {prop.subject}",
                                raw_spec.pos)
                    )
        properties.append(
            PropertySpec(name=raw_spec.name, target=raw_spec.target, formula=formula,
                         expected=raw_spec.expected, position=raw_spec.pos)
        )

    if any(f.severity == "error" for f in findings):
        raise ModelValidationError(tuple(sort_findings(findings)))

    coupled = build_coupled_model(
        build_preventive_behavior(preventive),
        build_control_behavior(control),
        mapping_process(entries, exempt),
        approach_partition(assignments),
        name=name,
    )

    source_positions: dict[str, SourcePos] = {}
    for kind in ("preventive", "control"):
        source_positions.update(positions.get(kind, {}))
    for raw_map in parser.maps:  # map statements win over state declarations
        source_positions[raw_map.key] = raw_map.pos
    for state, pos in parser.exempts:
        source_positions[state] = pos
    for spec in parser.specs:
        source_positions[spec.name] = spec.pos

    return ModelDocument(coupled=coupled, properties=tuple(properties),
                         source_positions=source_positions)


# -- rendering -----------------------------------------------------------------------


def _render_path(path: Path) -> str:
    text = path.states[0]
    for label, state in zip(path.labels, path.states[1:]):
        text += f" - {label} -> {state}"
    return text


def render_model(doc: ModelDocument) -> str:
    """Canonical text form: sorted states, transitions, mapping entries, and the
    four approach blocks; parse(render(doc)) is structurally identical to doc."""
    lines: list[str] = []
    for kind in ("preventive", "control"):
        behavior = (doc.coupled.preventive if kind == "preventive" else doc.coupled.control).base
        lines.append(f"behavior {kind} {{")
        lines.append(f"  initial {behavior.initial}")
        if behavior.finals:
            lines.append("  final " + " ".join(sorted(behavior.finals)))
        mentioned = {behavior.initial} | set(behavior.finals)
        for t in behavior.transitions:
            mentioned.add(t.source)
            mentioned.add(t.target)
        for state in sorted(behavior.states - mentioned):
            lines.append(f"  state {state}")
        for t in sorted(behavior.transitions):
            lines.append(f"  {t.source} - {t.label} -> {t.target}")
        lines.append("}")
        lines.append("")

    for approach in doc.coupled.approaches.approaches:
        lines.append(f"approach {approach.name} {{")
        lines.append(("  control: " + " ".join(sorted(approach.control_states))).rstrip())
        lines.append(("  preventive: " + " ".join(sorted(approach.preventive_states))).rstrip())
        lines.append("}")
        lines.append("")

    for state, paths in doc.coupled.mapping.entries:
        lines.append(f"map {state} => " + ", ".join(_render_path(p) for p in paths))
    for state in sorted(doc.coupled.mapping.exempt):
        lines.append(f"exempt {state}")
    if doc.coupled.mapping.entries or doc.coupled.mapping.exempt:
        lines.append("")

    for prop in doc.properties:
        expect = f" expect {prop.expected}" if prop.expected else ""
        lines.append(f"spec {prop.name} on {prop.target}{expect}: {ctl.render(prop.formula)}")

    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"
