"""Reduced ordered binary decision diagrams with hash-consed nodes.

One BddManager owns one static variable order and interns every node in a
unique table, so two handles in the same manager are equal exactly when they
denote the same boolean function. Managers are arena-style: nodes are never
collected within a run, the whole manager is dropped at once.
"""

AND = "and"
OR = "or"
XOR = "xor"
IMPLIES = "implies"
_OPS = (AND, OR, XOR, IMPLIES)

_FALSE = 0
_TRUE = 1


class BddError(Exception):
    pass


class VarOutOfRangeError(BddError):
    pass


class ManagerMismatchError(BddError):
    pass


class BddRef:
    """Opaque handle to a node inside one manager; equal iff same function."""

    __slots__ = ("manager", "index")

    def __init__(self, manager: "BddManager", index: int):
        self.manager = manager
        self.index = index

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BddRef)
            and other.manager is self.manager
            and other.index == self.index
        )

    def __hash__(self) -> int:
        return hash((id(self.manager), self.index))

    def __repr__(self) -> str:
        return f"BddRef({self.index})"


class BddManager:
    """Unique table, memoized operations, and the two terminal nodes."""

    def __init__(self, var_count: int):
        if var_count < 0:
            raise ValueError("var_count must be non-negative")
        self.var_count = var_count
        # Parallel arrays indexed by node id; ids 0/1 are the terminals,
        # which rank below every decision variable (var == var_count).
        self._var: list[int] = [var_count, var_count]
        self._low: list[int] = [_FALSE, _TRUE]
        self._high: list[int] = [_FALSE, _TRUE]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._cache: dict[tuple, int] = {}
        self.false = BddRef(self, _FALSE)
        self.true = BddRef(self, _TRUE)

    # -- plumbing ---------------------------------------------------------

    def _index(self, ref: BddRef) -> int:
        if not isinstance(ref, BddRef) or ref.manager is not self:
            raise ManagerMismatchError("operand belongs to a different manager")
        return ref.index

    def _ref(self, index: int) -> BddRef:
        if index == _FALSE:
            return self.false
        if index == _TRUE:
            return self.true
        return BddRef(self, index)

    def _check_var(self, var: int) -> None:
        if not 0 <= var < self.var_count:
            raise VarOutOfRangeError(
                f"variable {var} outside 0..{self.var_count - 1}"
            )

    def _mk(self, var: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (var, low, high)
        idx = self._unique.get(key)
        if idx is None:
            idx = len(self._var)
            self._var.append(var)
            self._low.append(low)
            self._high.append(high)
            self._unique[key] = idx
        return idx

    # -- constructors -----------------------------------------------------

    def mk_const(self, value: bool) -> BddRef:
        return self.true if value else self.false

    def mk_var(self, var: int) -> BddRef:
        self._check_var(var)
        return self._ref(self._mk(var, _FALSE, _TRUE))

    # -- boolean operations -----------------------------------------------

    def apply(self, op: str, f: BddRef, g: BddRef) -> BddRef:
        if op not in _OPS:
            raise ValueError(f"unknown operation {op!r}")
        return self._ref(self._apply(op, self._index(f), self._index(g)))

    def _apply(self, op: str, a: int, b: int) -> int:
        if op == AND:
            if a == _FALSE or b == _FALSE:
                return _FALSE
            if a == _TRUE:
                return b
            if b == _TRUE or a == b:
                return a
        elif op == OR:
            if a == _TRUE or b == _TRUE:
                return _TRUE
            if a == _FALSE:
                return b
            if b == _FALSE or a == b:
                return a
        elif op == XOR:
            if a == b:
                return _FALSE
            if a == _FALSE:
                return b
            if b == _FALSE:
                return a
            if a == _TRUE:
                return self._negate(b)
            if b == _TRUE:
                return self._negate(a)
        else:  # IMPLIES
            if a == _FALSE or b == _TRUE or a == b:
                return _TRUE
            if a == _TRUE:
                return b
            if b == _FALSE:
                return self._negate(a)
        if op in (AND, OR, XOR) and a > b:
            a, b = b, a  # commutative: one cache entry per unordered pair
        key = (op, a, b)
        res = self._cache.get(key)
        if res is not None:
            return res
        va, vb = self._var[a], self._var[b]
        v = min(va, vb)
        a0, a1 = (self._low[a], self._high[a]) if va == v else (a, a)
        b0, b1 = (self._low[b], self._high[b]) if vb == v else (b, b)
        res = self._mk(v, self._apply(op, a0, b0), self._apply(op, a1, b1))
        self._cache[key] = res
        return res

    def negate(self, f: BddRef) -> BddRef:
        return self._ref(self._negate(self._index(f)))

    def _negate(self, a: int) -> int:
        if a < 2:
            return 1 - a
        key = ("not", a)
        res = self._cache.get(key)
        if res is None:
            res = self._mk(self._var[a], self._negate(self._low[a]), self._negate(self._high[a]))
            self._cache[key] = res
        return res

    def ite(self, f: BddRef, g: BddRef, h: BddRef) -> BddRef:
        return self._ref(self._ite(self._index(f), self._index(g), self._index(h)))

    def _ite(self, f: int, g: int, h: int) -> int:
        if f == _TRUE:
            return g
        if f == _FALSE:
            return h
        if g == h:
            return g
        if g == _TRUE and h == _FALSE:
            return f
        if g == _FALSE and h == _TRUE:
            return self._negate(f)
        key = ("ite", f, g, h)
        res = self._cache.get(key)
        if res is not None:
            return res
        v = min(self._var[f], self._var[g], self._var[h])
        f0, f1 = (self._low[f], self._high[f]) if self._var[f] == v else (f, f)
        g0, g1 = (self._low[g], self._high[g]) if self._var[g] == v else (g, g)
        h0, h1 = (self._low[h], self._high[h]) if self._var[h] == v else (h, h)
        res = self._mk(v, self._ite(f0, g0, h0), self._ite(f1, g1, h1))
        self._cache[key] = res
        return res

    # -- cofactors and quantification ---------------------------------------

    def restrict(self, f: BddRef, var: int, value: bool) -> BddRef:
        self._check_var(var)
        return self._ref(self._restrict(self._index(f), var, bool(value)))

    def _restrict(self, a: int, var: int, value: bool) -> int:
        if self._var[a] > var:
            return a  # ordering: var cannot occur below here
        key = ("restrict", a, var, value)
        res = self._cache.get(key)
        if res is None:
            if self._var[a] == var:
                res = self._high[a] if value else self._low[a]
            else:
                res = self._mk(
                    self._var[a],
                    self._restrict(self._low[a], var, value),
                    self._restrict(self._high[a], var, value),
                )
            self._cache[key] = res
        return res

    def exists(self, f: BddRef, variables) -> BddRef:
        """Existential quantification: OR of the two cofactors, per variable."""
        idx = self._index(f)
        for var in sorted(set(variables), reverse=True):
            self._check_var(var)
            idx = self._apply(
                OR, self._restrict(idx, var, False), self._restrict(idx, var, True)
            )
        return self._ref(idx)

    # -- model counting and evaluation --------------------------------------

    def sat_count(self, f: BddRef, nvars: int) -> int:
        """Satisfying assignments over variables 0..nvars-1."""
        root = self._index(f)
        if nvars < 0:
            raise VarOutOfRangeError("nvars must be non-negative")

        def level(a: int) -> int:
            return self._var[a] if a >= 2 else nvars

        memo: dict[int, int] = {}

        def count(a: int) -> int:
            if a == _FALSE:
                return 0
            if a == _TRUE:
                return 1
            if self._var[a] >= nvars:
                raise VarOutOfRangeError(
                    f"node variable {self._var[a]} needs nvars >= {self._var[a] + 1}"
                )
            res = memo.get(a)
            if res is None:
                v = self._var[a]
                lo, hi = self._low[a], self._high[a]
                res = count(lo) * 2 ** (level(lo) - v - 1)
                res += count(hi) * 2 ** (level(hi) - v - 1)
                memo[a] = res
            return res

        total = count(root)
        return total * 2 ** level(root)  # free variables above the root double the count

    def pick_one(self, f: BddRef) -> dict[int, bool] | None:
        """A satisfying assignment (variables on one root-to-TRUE walk), or None."""
        idx = self._index(f)
        if idx == _FALSE:
            return None
        assignment: dict[int, bool] = {}
        while idx >= 2:
            if self._low[idx] != _FALSE:
                assignment[self._var[idx]] = False
                idx = self._low[idx]
            else:
                assignment[self._var[idx]] = True
                idx = self._high[idx]
        return assignment

    def evaluate(self, f: BddRef, assignment) -> bool:
        """Evaluate under a var->bool mapping covering every variable on the walk."""
        idx = self._index(f)
        while idx >= 2:
            var = self._var[idx]
            try:
                bit = assignment[var]
            except KeyError:
                raise BddError(f"no value for variable {var}") from None
            idx = self._high[idx] if bit else self._low[idx]
        return idx == _TRUE

    # -- introspection -------------------------------------------------------

    def node_var(self, f: BddRef) -> int:
        return self._var[self._index(f)]

    def node_low(self, f: BddRef) -> BddRef:
        return self._ref(self._low[self._index(f)])

    def node_high(self, f: BddRef) -> BddRef:
        return self._ref(self._high[self._index(f)])

    def is_terminal(self, f: BddRef) -> bool:
        return self._index(f) < 2

    def size(self, f: BddRef) -> int:
        """Decision nodes reachable from f (terminals excluded)."""
        seen: set[int] = set()
        stack = [self._index(f)]
        while stack:
            idx = stack.pop()
            if idx < 2 or idx in seen:
                continue
            seen.add(idx)
            stack.append(self._low[idx])
            stack.append(self._high[idx])
        return len(seen)

    def node_count(self) -> int:
        """Total interned decision nodes in this manager."""
        return len(self._var) - 2

    def check_invariants(self) -> list[str]:
        """Scan the unique table; returns reducedness/ordering violations (empty = sound)."""
        violations: list[str] = []
        seen_ids: set[int] = set()
        for (var, low, high), idx in self._unique.items():
            if idx in seen_ids:
                violations.append(f"node {idx} interned twice")
            seen_ids.add(idx)
            if low == high:
                violations.append(f"node {idx} is redundant: low == high == {low}")
            if not 0 <= var < self.var_count:
                violations.append(f"node {idx} has out-of-range variable {var}")
            if (self._var[idx], self._low[idx], self._high[idx]) != (var, low, high):
                violations.append(f"node {idx} disagrees with its unique-table key")
            for child in (low, high):
                if child >= 2 and self._var[child] <= var:
                    violations.append(
                        f"node {idx} (var {var}) has child with var {self._var[child]}"
                    )
        return violations

    def to_dot(self, f: BddRef, name: str = "bdd") -> str:
        """Debug dump of the nodes reachable from f in DOT syntax."""
        root = self._index(f)
        order: list[int] = []
        seen: set[int] = set()
        stack = [root]
        while stack:
            idx = stack.pop()
            if idx in seen:
                continue
            seen.add(idx)
            order.append(idx)
            if idx >= 2:
                stack.append(self._low[idx])
                stack.append(self._high[idx])
        lines = [f"digraph {name} {{"]
        for idx in sorted(order):
            if idx < 2:
                lines.append(f'  n{idx} [shape=box, label="{idx}"];')
            else:
                lines.append(f'  n{idx} [shape=circle, label="x{self._var[idx]}"];')
        for idx in sorted(order):
            if idx >= 2:
                lines.append(f"  n{idx} -> n{self._low[idx]} [style=dashed];")
                lines.append(f"  n{idx} -> n{self._high[idx]};")
        lines.append("}")
        return "\n".join(lines) + "\n"
