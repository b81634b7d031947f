"""Shared test utilities: brute-force lattice oracle, random lattice
generation, and per-principal label projection."""

import itertools
import random

from ifcmon.labels import Prod, Pure, Star


def closure(elements, edges):
    """Reflexive-transitive closure of an edge set."""
    order = {(e, e) for e in elements}
    order.update(edges)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(order), repeat=2):
            if b == c and (a, d) not in order:
                order.add((a, d))
                changed = True
    return order


def oracle_lub(elements, order, a, b):
    """Unique least upper bound by exhaustive scan, or None."""
    ubs = [c for c in elements if (a, c) in order and (b, c) in order]
    least = [u for u in ubs if all((u, c) in order for c in ubs)]
    return least[0] if len(least) == 1 else None


def oracle_glb(elements, order, a, b):
    lbs = [c for c in elements if (c, a) in order and (c, b) in order]
    greatest = [g for g in lbs if all((c, g) in order for c in lbs)]
    return greatest[0] if len(greatest) == 1 else None


def oracle_bottom(elements, order):
    bots = [e for e in elements if all((e, b) in order for b in elements)]
    return bots[0] if len(bots) == 1 else None


def random_set_lattice(rng, universe_size=4, seeds=4, max_elems=6):
    """A random family of sets closed under union and intersection.

    Always a genuine lattice ordered by inclusion; returns None when the
    closure grows past max_elems.
    """
    universe = range(universe_size)
    family = {frozenset()}
    for _ in range(seeds):
        family.add(frozenset(x for x in universe if rng.random() < 0.5))
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(list(family), 2):
            for c in (a | b, a & b):
                if c not in family:
                    family.add(c)
                    changed = True
        if len(family) > max_elems:
            return None
    names = {s: "E" + "".join(str(x) for x in sorted(s)) for s in family}
    elements = sorted(names.values())
    order = {(names[a], names[b]) for a in family for b in family if a <= b}
    return elements, order


def hasse_edges(elements, order):
    """Covering pairs of a partial order (transitive reduction)."""
    edges = []
    for a, b in order:
        if a == b:
            continue
        if any(c not in (a, b) and (a, c) in order and (c, b) in order for c in elements):
            continue
        edges.append((a, b))
    return edges


def lattice_text(elements, edges):
    lines = [f"elem {e}" for e in elements]
    lines += [f"leq {a} {b}" for a, b in edges]
    return "\n".join(lines)


def project(label, principal):
    """One principal's view of a product label, as a two-point label."""
    assert isinstance(label, Prod)
    part = label.parts[principal]
    return Star("L") if part == "P" else Pure(part)
