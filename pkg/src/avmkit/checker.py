"""Kripke structures and twin CTL engines.

Behaviors convert to Kripke structures by erasing transition labels and
totalizing dead-end states with self-loops. Formulas are then checked two
ways: an explicit-state fixpoint engine over plain sets (the oracle) and a
symbolic engine over BDDs with binary-encoded states; both return the exact
satisfying state set.
"""

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from . import ctl
from .bdd import AND, OR, BddManager, BddRef
from .coupled import APPROACH_NAMES, approach_membership
from .ctl import AtomicProposition, CtlFormula
from .lts import Behavior, Path


class UnknownAtomError(ValueError):
    """A formula atom does not resolve against the structure's vocabulary."""

    def __init__(self, prop: AtomicProposition):
        super().__init__(f"atom does not resolve: {prop}")
        self.prop = prop


@dataclass(frozen=True, eq=False)
class KripkeStructure:
    """Total transition relation over states with atomic-proposition labeling."""

    states: tuple[str, ...]
    initial: str
    relation: frozenset[tuple[str, str]]
    labeling: dict[str, frozenset[AtomicProposition]]
    totalized: frozenset[str] = frozenset()
    edge_labels: dict[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(sorted(self.states)))
        state_set = set(self.states)
        if self.initial not in state_set:
            raise ValueError(f"initial state {self.initial} is not a state")
        for s, t in self.relation:
            if s not in state_set or t not in state_set:
                raise ValueError(f"relation pair ({s}, {t}) leaves the state set")
        sources = {s for s, _ in self.relation}
        missing = state_set - sources
        if missing:
            raise ValueError(f"relation is not total; no successor for: {sorted(missing)}")
        for s in self.states:
            if AtomicProposition("at", s) not in self.labeling.get(s, frozenset()):
                raise ValueError(f"labeling of {s} is missing at({s})")

    @cached_property
    def successors(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {s: [] for s in self.states}
        for s, t in self.relation:
            out[s].append(t)
        return {s: tuple(sorted(ts)) for s, ts in out.items()}


def to_kripke(behavior: Behavior, approaches=None) -> KripkeStructure:
    """Erase labels, totalize dead ends with recorded self-loops, and label
    every state with at(state) plus in(approach) for covered states.

    `approaches` may be an ApproachPartition, a {name: states} mapping, or
    None; membership is restricted to this behavior's states.
    """
    relation: set[tuple[str, str]] = set()
    edge_labels: dict[tuple[str, str], str] = {}
    for t in sorted(behavior.transitions):
        pair = (t.source, t.target)
        relation.add(pair)
        edge_labels.setdefault(pair, t.label)  # smallest label represents the pair

    totalized = frozenset(s for s in behavior.states if not behavior.successor_map[s])
    for s in totalized:
        relation.add((s, s))

    membership = approach_membership(approaches, behavior.states)
    labeling: dict[str, frozenset[AtomicProposition]] = {}
    for s in behavior.states:
        props = {AtomicProposition("at", s)}
        for name, members in membership.items():
            if s in members:
                props.add(AtomicProposition("in", name))
        labeling[s] = frozenset(props)

    return KripkeStructure(
        states=tuple(sorted(behavior.states)),
        initial=behavior.initial,
        relation=frozenset(relation),
        labeling=labeling,
        totalized=totalized,
        edge_labels=edge_labels,
    )


def _validate_atoms(k: KripkeStructure, formula: CtlFormula) -> None:
    state_set = set(k.states)
    for prop in ctl.atoms(formula):
        if prop.kind == "at" and prop.subject not in state_set:
            raise UnknownAtomError(prop)
        if prop.kind == "in" and prop.subject not in APPROACH_NAMES:
            raise UnknownAtomError(prop)


# -- explicit-state engine ----------------------------------------------------


def _preimage(k: KripkeStructure, targets: frozenset[str]) -> frozenset[str]:
    return frozenset(s for s in k.states if any(t in targets for t in k.successors[s]))


def _eu_chain(k: KripkeStructure, holds_f: frozenset[str],
              holds_g: frozenset[str]) -> list[frozenset[str]]:
    """Non-decreasing approximations of E[f U g], last element the fixpoint."""
    chain = [holds_g]
    while True:
        current = chain[-1]
        extended = current | (holds_f & _preimage(k, current))
        if extended == current:
            return chain
        chain.append(extended)


def _eg_chain(k: KripkeStructure, holds_f: frozenset[str]) -> list[frozenset[str]]:
    """Non-increasing approximations of EG f, last element the fixpoint."""
    chain = [holds_f]
    while True:
        current = chain[-1]
        shrunk = current & _preimage(k, current)
        if shrunk == current:
            return chain
        chain.append(shrunk)


def _sat_explicit(k: KripkeStructure, g: CtlFormula) -> frozenset[str]:
    everything = frozenset(k.states)
    if isinstance(g, ctl.Const):
        return everything if g.value else frozenset()
    if isinstance(g, ctl.Atom):
        return frozenset(s for s in k.states if g.prop in k.labeling[s])
    if isinstance(g, ctl.Not):
        return everything - _sat_explicit(k, g.operand)
    if isinstance(g, ctl.And):
        return _sat_explicit(k, g.left) & _sat_explicit(k, g.right)
    if isinstance(g, ctl.Or):
        return _sat_explicit(k, g.left) | _sat_explicit(k, g.right)
    if isinstance(g, ctl.Implies):
        return (everything - _sat_explicit(k, g.left)) | _sat_explicit(k, g.right)
    if isinstance(g, ctl.EX):
        return _preimage(k, _sat_explicit(k, g.operand))
    if isinstance(g, ctl.EU):
        return _eu_chain(k, _sat_explicit(k, g.left), _sat_explicit(k, g.right))[-1]
    if isinstance(g, ctl.EG):
        return _eg_chain(k, _sat_explicit(k, g.operand))[-1]
    raise TypeError(f"not a core formula node: {g!r}")


def check_explicit(k: KripkeStructure, formula: CtlFormula) -> frozenset[str]:
    """States satisfying the formula, by fixpoint iteration on explicit sets."""
    _validate_atoms(k, formula)
    return _sat_explicit(k, ctl.normalize(formula))


# -- symbolic engine -----------------------------------------------------------


class _Symbolic:
    """Per-call BDD context: states in sorted order are binary-encoded over
    interleaved current (even) and next (odd) variables."""

    def __init__(self, k: KripkeStructure):
        self.k = k
        self.states = list(k.states)
        self.index = {s: i for i, s in enumerate(self.states)}
        n = len(self.states)
        self.bits = max(1, (n - 1).bit_length())
        self.mgr = BddManager(2 * self.bits)
        self.next_vars = [2 * b + 1 for b in range(self.bits)]
        self._shift_memo: dict[int, BddRef] = {}

        self.universe = self._set_to_bdd(self.states)
        relation = self.mgr.false
        for s, t in sorted(k.relation):
            pair = self.mgr.apply(AND, self._encode(self.index[s], 0),
                                  self._encode(self.index[t], 1))
            relation = self.mgr.apply(OR, relation, pair)
        self.relation = relation

    def _encode(self, state_index: int, offset: int) -> BddRef:
        ref = self.mgr.true
        for b in range(self.bits):
            var = self.mgr.mk_var(2 * b + offset)
            if not (state_index >> b) & 1:
                var = self.mgr.negate(var)
            ref = self.mgr.apply(AND, ref, var)
        return ref

    def _set_to_bdd(self, states) -> BddRef:
        ref = self.mgr.false
        for s in sorted(states):
            ref = self.mgr.apply(OR, ref, self._encode(self.index[s], 0))
        return ref

    def _to_states(self, ref: BddRef) -> frozenset[str]:
        out = []
        for s in self.states:
            i = self.index[s]
            assignment = {2 * b: bool((i >> b) & 1) for b in range(self.bits)}
            if self.mgr.evaluate(ref, assignment):
                out.append(s)
        return frozenset(out)

    def _shift_to_next(self, ref: BddRef) -> BddRef:
        """Rename current-state variables to their next-state partners.

        Interleaving keeps the order monotone (2b -> 2b+1), so a structural
        rebuild is sound.
        """
        if self.mgr.is_terminal(ref):
            return ref
        cached = self._shift_memo.get(ref.index)
        if cached is not None:
            return cached
        var = self.mgr.node_var(ref)
        shifted = self.mgr.ite(
            self.mgr.mk_var(var + 1),
            self._shift_to_next(self.mgr.node_high(ref)),
            self._shift_to_next(self.mgr.node_low(ref)),
        )
        self._shift_memo[ref.index] = shifted
        return shifted

    def _not(self, ref: BddRef) -> BddRef:
        # Complement within the valid state codes, never the raw BDD space.
        return self.mgr.apply(AND, self.universe, self.mgr.negate(ref))

    def _ex(self, ref: BddRef) -> BddRef:
        step = self.mgr.apply(AND, self.relation, self._shift_to_next(ref))
        return self.mgr.exists(step, self.next_vars)

    def _sat(self, g: CtlFormula) -> BddRef:
        if isinstance(g, ctl.Const):
            return self.universe if g.value else self.mgr.false
        if isinstance(g, ctl.Atom):
            return self._set_to_bdd(
                [s for s in self.states if g.prop in self.k.labeling[s]]
            )
        if isinstance(g, ctl.Not):
            return self._not(self._sat(g.operand))
        if isinstance(g, ctl.And):
            return self.mgr.apply(AND, self._sat(g.left), self._sat(g.right))
        if isinstance(g, ctl.Or):
            return self.mgr.apply(OR, self._sat(g.left), self._sat(g.right))
        if isinstance(g, ctl.Implies):
            return self.mgr.apply(OR, self._not(self._sat(g.left)), self._sat(g.right))
        if isinstance(g, ctl.EX):
            return self._ex(self._sat(g.operand))
        if isinstance(g, ctl.EU):
            holds_f = self._sat(g.left)
            current = self._sat(g.right)
            while True:
                extended = self.mgr.apply(
                    OR, current, self.mgr.apply(AND, holds_f, self._ex(current))
                )
                if extended == current:
                    return current
                current = extended
        if isinstance(g, ctl.EG):
            current = self._sat(g.operand)
            while True:
                shrunk = self.mgr.apply(AND, current, self._ex(current))
                if shrunk == current:
                    return current
                current = shrunk
        raise TypeError(f"not a core formula node: {g!r}")


def check_symbolic(k: KripkeStructure, formula: CtlFormula) -> frozenset[str]:
    """States satisfying the formula, via BDD fixpoints; agrees with check_explicit."""
    _validate_atoms(k, formula)
    context = _Symbolic(k)
    return context._to_states(context._sat(ctl.normalize(formula)))


# -- verdicts and witnesses ------------------------------------------------------


def holds(k: KripkeStructure, formula: CtlFormula, engine: str = "explicit") -> bool:
    """True iff the initial state satisfies the formula."""
    if engine == "explicit":
        return k.initial in check_explicit(k, formula)
    if engine == "symbolic":
        return k.initial in check_symbolic(k, formula)
    raise ValueError(f"engine must be 'explicit' or 'symbolic', not {engine!r}")


def witness_shape(formula: CtlFormula) -> str | None:
    """Which witness this checker can produce: 'reachability' for EF goals,
    'invariant' for AG counterexamples, None otherwise."""
    if isinstance(formula, ctl.EF):
        return "reachability"
    if isinstance(formula, ctl.AG):
        return "invariant"
    return None


def _shortest_path_to(k: KripkeStructure, targets: frozenset[str]) -> Path | None:
    if k.initial in targets:
        return Path((k.initial,))
    parent: dict[str, str] = {k.initial: k.initial}
    queue = deque([k.initial])
    found = None
    while queue and found is None:
        state = queue.popleft()
        for nxt in k.successors[state]:
            if nxt in parent:
                continue
            parent[nxt] = state
            if nxt in targets:
                found = nxt
                break
            queue.append(nxt)
    if found is None:
        return None
    states = [found]
    while states[-1] != k.initial:
        states.append(parent[states[-1]])
    states.reverse()
    labels = tuple(
        k.edge_labels.get((a, b), "step") for a, b in zip(states, states[1:])
    )
    return Path(tuple(states), labels)


def witness(k: KripkeStructure, formula: CtlFormula) -> Path | None:
    """A path from the initial state demonstrating the verdict, when supported.

    For EF g: a shortest path to a g-state (None when unreachable). For AG g:
    a shortest path to a state violating g (None when AG g holds). Other
    shapes return None; see witness_shape.
    """
    if isinstance(formula, ctl.EF):
        return _shortest_path_to(k, check_explicit(k, formula.operand))
    if isinstance(formula, ctl.AG):
        good = check_explicit(k, formula.operand)
        return _shortest_path_to(k, frozenset(k.states) - good)
    return None
