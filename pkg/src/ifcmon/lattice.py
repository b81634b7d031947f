"""Finite security lattices: validation, order queries, join and meet.

A lattice is described by its elements and the Hasse edges of its order.
Validation computes the reflexive-transitive closure, checks that the
order is a partial order, that every pair of elements has a unique least
upper bound and greatest lower bound, and that a unique bottom exists.
Join/meet tables are precomputed; a LatticeSpec is immutable afterwards.
"""

from __future__ import annotations

import itertools
import re


class LatticeError(ValueError):
    pass


class CycleDetected(LatticeError):
    pass


class NoUniqueJoin(LatticeError):
    pass


class NoUniqueMeet(LatticeError):
    pass


class NoBottom(LatticeError):
    pass


class DuplicateElement(LatticeError):
    pass


class UnknownElementInEdge(LatticeError):
    pass


class UnknownElement(LatticeError):
    pass


class UnknownBuiltin(LatticeError):
    pass


ELEMENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_']*\Z")


class LatticeSpec:
    """Validated finite lattice with precomputed join/meet tables."""

    __slots__ = ("elements", "bottom", "_order", "_join", "_meet")

    def __init__(self, elements, hasse_edges):
        elems = list(elements)
        seen = set()
        for e in elems:
            if e in seen:
                raise DuplicateElement(f"duplicate element {e!r}")
            if not ELEMENT_RE.match(e):
                raise LatticeError(f"bad element name {e!r}")
            seen.add(e)
        if not elems:
            raise LatticeError("lattice needs at least one element")
        for a, b in hasse_edges:
            for x in (a, b):
                if x not in seen:
                    raise UnknownElementInEdge(f"edge mentions unknown element {x!r}")

        order = {(e, e) for e in elems}
        order.update(hasse_edges)
        # Warshall closure; element count is tiny.
        for k in elems:
            for a in elems:
                if (a, k) in order:
                    for b in elems:
                        if (k, b) in order:
                            order.add((a, b))
        for a, b in itertools.combinations(elems, 2):
            if (a, b) in order and (b, a) in order:
                raise CycleDetected(f"order cycle through {a!r} and {b!r}")

        self.elements = frozenset(elems)
        self._order = frozenset(order)

        bottoms = [e for e in elems if all((e, b) in order for b in elems)]
        if len(bottoms) != 1:
            raise NoBottom(f"expected one bottom element, found {sorted(bottoms)}")
        self.bottom = bottoms[0]

        join = {}
        meet = {}
        for a, b in itertools.product(elems, repeat=2):
            ub = [c for c in elems if (a, c) in order and (b, c) in order]
            lub = [u for u in ub if all((u, c) in order for c in ub)]
            if len(lub) != 1:
                raise NoUniqueJoin(f"no unique least upper bound for ({a!r}, {b!r})")
            join[a, b] = lub[0]
            lb = [c for c in elems if (c, a) in order and (c, b) in order]
            glb = [l for l in lb if all((c, l) in order for c in lb)]
            if len(glb) != 1:
                raise NoUniqueMeet(f"no unique greatest lower bound for ({a!r}, {b!r})")
            meet[a, b] = glb[0]
        self._join = join
        self._meet = meet

    def _check(self, *names):
        for n in names:
            if n not in self.elements:
                raise UnknownElement(f"unknown lattice element {n!r}")

    def leq(self, a, b):
        self._check(a, b)
        return (a, b) in self._order

    def join(self, a, b):
        self._check(a, b)
        return self._join[a, b]

    def meet(self, a, b):
        self._check(a, b)
        return self._meet[a, b]

    def join_all(self, names):
        out = self.bottom
        for n in names:
            out = self.join(out, n)
        return out

    def __contains__(self, name):
        return name in self.elements

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"LatticeSpec({sorted(self.elements)}, bottom={self.bottom!r})"


def parse_lattice(text):
    """Parse the line-oriented lattice format.

    `elem NAME` declares an element, `leq A B` declares a Hasse edge
    A below B, `#` starts a comment.  Bottom is inferred.
    """
    elements = []
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "elem" and len(parts) == 2:
            elements.append(parts[1])
        elif parts[0] == "leq" and len(parts) == 3:
            edges.append((parts[1], parts[2]))
        else:
            raise LatticeError(f"line {lineno}: cannot parse {raw!r}")
    return LatticeSpec(elements, edges)


_POWERSET_RE = re.compile(r"powerset\((\d+)\)\Z")


def builtin(name):
    """Named lattices: two_point, chain3, fig5, powerset(n) with n <= 8."""
    if name == "two_point":
        return LatticeSpec(["L", "H"], [("L", "H")])
    if name == "chain3":
        return LatticeSpec(["L", "M", "H"], [("L", "M"), ("M", "H")])
    if name == "fig5":
        return LatticeSpec(
            ["L", "L1", "L'", "L2", "M1", "M2", "H"],
            [
                ("L", "L1"),
                ("L", "L'"),
                ("L", "L2"),
                ("L1", "M1"),
                ("L'", "M1"),
                ("L'", "M2"),
                ("L2", "M2"),
                ("M1", "H"),
                ("M2", "H"),
            ],
        )
    m = _POWERSET_RE.match(name)
    if m:
        n = int(m.group(1))
        if not 1 <= n <= 8:
            raise UnknownBuiltin(f"powerset arity must be 1..8, got {n}")
        elems = ["".join(bits) for bits in itertools.product("LH", repeat=n)]
        edges = []
        for e in elems:
            for i, c in enumerate(e):
                if c == "L":
                    edges.append((e, e[:i] + "H" + e[i + 1 :]))
        return LatticeSpec(elems, edges)
    raise UnknownBuiltin(f"unknown builtin lattice {name!r}")
