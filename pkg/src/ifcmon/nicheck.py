"""Executable noninterference and trace-lemma checks.

Provides the four store-equivalence definitions (basic, two-point
permissive-upgrade, per-principal product, generalized), an exhaustive /
sampled pair runner for termination-insensitive noninterference, the
confinement and trace-lemma checkers, a transition corpus over the
three-point chain, and a seeded random program generator.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .labels import MixedLabelFamilies, Prod, Pure, Star, format_label
from .lang import Assign, BinOp, Const, If, Not, Seq, Skip, Var, While, variables_of, parse_program
from .monitor import (
    DEFAULT_FUEL,
    LabeledValue,
    MonitorConfig,
    eval_expr,
    exec_program,
)

EQUIV_DEFS = ("basic", "pus2", "pup", "pua")

STRATEGY_DEF = {
    "naive": "basic",
    "nsu": "basic",
    "pus2": "pus2",
    "pup": "pup",
    "pua": "pua",
    "pua_original": "pua",
    "pua_unsound": "pua",
}


class CheckError(ValueError):
    pass


class AdversaryKindMismatch(CheckError):
    pass


class DomainMismatch(CheckError):
    pass


class ExplosionGuard(CheckError):
    pass


# --- value and store equivalence ------------------------------------------


def _require_pure_family(defid, *labels):
    for k in labels:
        if isinstance(k, Prod):
            raise MixedLabelFamilies(f"product label under {defid} equivalence")


def value_equiv(defid, lat, adversary, v1, v2):
    """Adversary-indexed equivalence of two labeled values.

    ``adversary`` is a lattice element for basic/pua, a 0-based principal
    index for pup, and ignored (fixed at the low observer) for pus2.
    """
    k, m = v1.label, v2.label
    n1, n2 = v1.value, v2.value

    if defid == "basic":
        _require_pure_family(defid, k, m)
        if isinstance(k, Star) or isinstance(m, Star):
            raise MixedLabelFamilies("starred label under basic equivalence")
        if k.elem == m.elem and lat.leq(k.elem, adversary) and n1 == n2:
            return True
        return not lat.leq(k.elem, adversary) and not lat.leq(m.elem, adversary)

    if defid == "pus2":
        # two-point lattice; any starred label plays the role of P
        _require_pure_family(defid, k, m)
        if isinstance(k, Star) or isinstance(m, Star):
            return True
        if k.elem != m.elem:
            return False
        return k.elem != lat.bottom or n1 == n2

    if defid == "pup":
        if not isinstance(k, Prod) or not isinstance(m, Prod):
            raise MixedLabelFamilies("pup equivalence needs product labels")
        if not isinstance(adversary, int):
            raise AdversaryKindMismatch("pup adversary is a principal index")
        ka, ma = k.parts[adversary], m.parts[adversary]
        if "P" in (ka, ma):
            return True
        if ka != ma:
            return False
        return ka == "H" or n1 == n2

    if defid == "pua":
        _require_pure_family(defid, k, m)
        if isinstance(k, Star) and isinstance(m, Star):
            return True
        if isinstance(k, Star):
            return not lat.leq(m.elem, adversary) or lat.leq(k.elem, m.elem)
        if isinstance(m, Star):
            return not lat.leq(k.elem, adversary) or lat.leq(m.elem, k.elem)
        if k.elem == m.elem and lat.leq(k.elem, adversary) and n1 == n2:
            return True
        return not lat.leq(k.elem, adversary) and not lat.leq(m.elem, adversary)

    raise CheckError(f"unknown equivalence definition {defid!r}")


def store_equiv(defid, lat, adversary, s1, s2):
    if set(s1) != set(s2):
        raise DomainMismatch("stores bind different variable sets")
    return all(value_equiv(defid, lat, adversary, s1[x], s2[x]) for x in s1)


# --- label universes and pair generation ----------------------------------


def label_universe(defid, lat, principals=None):
    """Initial-store label candidates for a given equivalence definition."""
    pure = [Pure(e) for e in sorted(lat.elements)]
    if defid == "basic":
        return pure
    if defid == "pua":
        return pure + [Star(e) for e in sorted(lat.elements)]
    if defid == "pus2":
        return pure + [Star(lat.bottom)]
    if defid == "pup":
        if not principals:
            raise CheckError("pup label universe needs a principal count")
        return [Prod(p) for p in itertools.product("LHP", repeat=principals)]
    raise CheckError(f"unknown equivalence definition {defid!r}")


def equiv_value_pairs(defid, lat, adversary, labels, values=(0, 1)):
    """All ordered pairs of labeled values over labels x values that are
    equivalent for the adversary, in deterministic order."""
    candidates = [LabeledValue(v, k) for k in labels for v in values]
    return [
        (a, b)
        for a in candidates
        for b in candidates
        if value_equiv(defid, lat, adversary, a, b)
    ]


def gen_equiv_store_pairs(
    lat, defid, adversary, variables, values=(0, 1), labels=None, principals=None, cap=10**6
):
    """Exhaustively enumerate equivalent store pairs over the variables.

    ``labels`` is a label list applied to every variable, or a mapping
    from variable to its label list; defaults to the full universe for
    the definition.  Raises ExplosionGuard beyond ``cap`` pairs.
    """
    variables = sorted(variables)
    per_var = []
    for x in variables:
        if isinstance(labels, dict):
            lab = labels[x]
        else:
            lab = labels if labels is not None else label_universe(defid, lat, principals)
        per_var.append(equiv_value_pairs(defid, lat, adversary, lab, values))
    total = 1
    for pairs in per_var:
        total *= len(pairs)
    if total > cap:
        raise ExplosionGuard(f"{total} store pairs exceed cap {cap}")
    for combo in itertools.product(*per_var):
        s1 = {x: a for x, (a, b) in zip(variables, combo)}
        s2 = {x: b for x, (a, b) in zip(variables, combo)}
        yield s1, s2


def _count_pairs(per_var):
    total = 1
    for pairs in per_var:
        total *= len(pairs)
    return total


# --- TINI pair runner ------------------------------------------------------


@dataclass
class NiReport:
    pairs_tested: int = 0
    completed_pairs: int = 0
    halted_pairs: int = 0
    violations: list = field(default_factory=list)
    sampled: bool = False
    seed: int | None = None

    @property
    def ok(self):
        return not self.violations

    def summary(self):
        mode = f"sampled (seed {self.seed})" if self.sampled else "exhaustive"
        return (
            f"{mode}: {self.pairs_tested} pairs, {self.completed_pairs} completed, "
            f"{self.halted_pairs} halted/exhausted, {len(self.violations)} violations"
        )


def check_tini(
    cfg,
    defid,
    adversary,
    program,
    pairs=None,
    *,
    variables=None,
    values=(0, 1),
    labels=None,
    max_pairs=10**6,
    seed=0,
    fuel=DEFAULT_FUEL,
):
    """Run equivalent store pairs through the program and compare finals.

    Both runs start at the bottom pc.  A violation is recorded when both
    runs complete but the final stores are not equivalent; halted or
    fuel-exhausted runs count toward halted_pairs.  Without an explicit
    pair iterable, pairs come from exhaustive enumeration, falling back
    to seeded sampling past ``max_pairs``.
    """
    report = NiReport()
    if pairs is None:
        if variables is None:
            variables = sorted(variables_of(program))
        else:
            variables = sorted(variables)
        per_var = []
        for x in variables:
            if isinstance(labels, dict):
                lab = labels[x]
            else:
                lab = labels if labels is not None else label_universe(defid, cfg.lat, cfg.principals)
            per_var.append(equiv_value_pairs(defid, cfg.lat, adversary, lab, values))
        total = _count_pairs(per_var)
        if total <= max_pairs:
            pairs = (
                ({x: a for x, (a, b) in zip(variables, combo)}, {x: b for x, (a, b) in zip(variables, combo)})
                for combo in itertools.product(*per_var)
            )
        else:
            report.sampled = True
            report.seed = seed
            rng = random.Random(seed)

            def _sample():
                for _ in range(max_pairs):
                    combo = [rng.choice(pairs_x) for pairs_x in per_var]
                    yield (
                        {x: a for x, (a, b) in zip(variables, combo)},
                        {x: b for x, (a, b) in zip(variables, combo)},
                    )

            pairs = _sample()

    for s1, s2 in pairs:
        report.pairs_tested += 1
        out1 = exec_program(cfg, program, s1, fuel=fuel)
        out2 = exec_program(cfg, program, s2, fuel=fuel)
        if not (out1.completed and out2.completed):
            report.halted_pairs += 1
            continue
        report.completed_pairs += 1
        if not store_equiv(defid, cfg.lat, adversary, out1.store, out2.store):
            bad = sorted(
                x for x in out1.store if not value_equiv(defid, cfg.lat, adversary, out1.store[x], out2.store[x])
            )
            report.violations.append((s1, s2, out1.store, out2.store, bad[0]))
    report.violations.sort(key=lambda v: (v[4], sorted((x, lv.value, format_label(lv.label)) for x, lv in v[0].items())))
    return report


# --- lemma checks ----------------------------------------------------------


def run_with_spans(cfg, program, store, pc=None, fuel=DEFAULT_FUEL):
    """Execute, recording (stmt, pc, store-before, store-after) for every
    completed sub-command."""
    spans = []

    def hook(stmt, pc_in, before, after):
        spans.append((stmt, pc_in, before, after))

    outcome = exec_program(cfg, program, store, pc=pc, fuel=fuel, span_hook=hook)
    return outcome, spans


def check_trace_lemmas(spans, lat):
    """Check star-preservation, its corollaries, and the pc-lemma on every
    completed command span.  Returns a list of violation descriptions."""
    violations = []
    for stmt, pc, before, after in spans:
        if isinstance(pc, Prod):
            continue  # product labels are checked via per-principal projection
        p = pc.elem
        for x in before:
            kb, ka = before[x].label, after[x].label
            where = f"line {stmt.line} var {x}"
            if isinstance(kb, Star) and not lat.leq(p, kb.elem):
                if not (isinstance(ka, Star) and lat.leq(ka.elem, kb.elem)):
                    violations.append(f"star-preservation: {where}: {format_label(kb)} -> {format_label(ka)} under pc {p}")
            if isinstance(kb, Star) and isinstance(ka, Pure):
                if not lat.leq(p, kb.elem):
                    violations.append(f"unstar-needs-pc: {where}: pc {p} not below {kb.elem}")
                if not lat.leq(p, ka.elem):
                    violations.append(f"unstar-pc-bound: {where}: pc {p} not below {ka.elem}")
            if isinstance(ka, Pure) and before[x] != after[x] and not lat.leq(p, ka.elem):
                violations.append(f"pc-lemma: {where}: changed to pure {ka.elem} under pc {p}")
    return violations


def check_confinement(cfg, defid, adversary, program, store, pc, fuel=DEFAULT_FUEL):
    """Runs under a pc invisible to the adversary must leave the store
    equivalent to its initial state (vacuously true on halt)."""
    outcome = exec_program(cfg, program, store, pc=pc, fuel=fuel)
    if not outcome.completed:
        return True
    return store_equiv(defid, cfg.lat, adversary, store, outcome.store)


def check_expr_lemma(cfg, defid, adversary, expr, s1, s2):
    """Equivalent stores must evaluate an expression to equivalent values."""
    if not store_equiv(defid, cfg.lat, adversary, s1, s2):
        raise CheckError("expression lemma needs equivalent stores")
    return value_equiv(defid, cfg.lat, adversary, eval_expr(cfg, s1, expr), eval_expr(cfg, s2, expr))


def find_nontransitivity_witness(lat, adversary, values=(0, 1)):
    """Brute-force a triple a ~ b ~ c with a !~ c under the generalized
    equivalence; None if no witness exists."""
    labels = label_universe("pua", lat)
    candidates = [LabeledValue(v, k) for k in labels for v in values]
    for a, b, c in itertools.product(candidates, repeat=3):
        if (
            value_equiv("pua", lat, adversary, a, b)
            and value_equiv("pua", lat, adversary, b, c)
            and not value_equiv("pua", lat, adversary, a, c)
        ):
            return a, b, c
    return None


# --- random programs -------------------------------------------------------


def gen_random_expr(rng, variables, depth):
    if depth <= 0 or rng.random() < 0.4:
        if rng.random() < 0.7:
            return Var(rng.choice(variables))
        return Const(rng.choice((0, 1)))
    roll = rng.random()
    if roll < 0.15:
        return Not(gen_random_expr(rng, variables, depth - 1))
    op = rng.choice(("+", "-", "=", "<", "and", "or"))
    return BinOp(op, gen_random_expr(rng, variables, depth - 1), gen_random_expr(rng, variables, depth - 1))


def gen_random_program(rng, variables, depth=4, length=4):
    """Depth-bounded assignment-heavy random program; branch and loop
    guards are plain variables so implicit flows are frequent."""
    counter = itertools.count(1)

    def stmt(depth):
        line = next(counter)
        roll = rng.random()
        if depth <= 0 or roll < 0.55:
            return Assign(rng.choice(variables), gen_random_expr(rng, variables, 2), line=line)
        if roll < 0.85:
            guard = Var(rng.choice(variables))
            if rng.random() < 0.3:
                guard = Not(guard)
            els = block(depth - 1) if rng.random() < 0.4 else Skip(line=line)
            return If(guard, block(depth - 1), els, line=line)
        # loop with a guard that the body usually clears
        v = rng.choice(variables)
        body = Seq(stmt(0), Assign(v, Const(0), line=next(counter)), line=line)
        return While(Var(v), body, line=line)

    def block(depth):
        stmts = [stmt(depth) for _ in range(rng.randint(1, max(1, length // 2)))]
        node = stmts[-1]
        for s in reversed(stmts[:-1]):
            node = Seq(s, node, line=s.line)
        return node

    stmts = [stmt(depth) for _ in range(length)]
    node = stmts[-1]
    for s in reversed(stmts[:-1]):
        node = Seq(s, node, line=s.line)
    return node


# --- transition corpus -----------------------------------------------------

# Pair classes of labels a single variable may hold at matching points of
# two equivalent executions (low observer).  "low" means below the
# adversary, "high" incomparable-or-above.
C_PURE_LOW = "pure-low-equal"
C_STAR_PURELOW = "star/pure-low"
C_PURELOW_STAR = "pure-low/star"
C_STAR_STAR = "star/star"
C_PURE_HIGH = "pure-high-pair"
C_STAR_PUREHIGH = "star/pure-high"
C_PUREHIGH_STAR = "pure-high/star"

TRANSITION_CLASSES = (
    C_PURE_LOW,
    C_STAR_PURELOW,
    C_PURELOW_STAR,
    C_STAR_STAR,
    C_PURE_HIGH,
    C_STAR_PUREHIGH,
    C_PUREHIGH_STAR,
)


def classify_pair(lat, adversary, v1, v2):
    """Class of an equivalent labeled-value pair; None if not equivalent."""
    if not value_equiv("pua", lat, adversary, v1, v2):
        return None
    k, m = v1.label, v2.label
    if isinstance(k, Star) and isinstance(m, Star):
        return C_STAR_STAR
    if isinstance(k, Star):
        return C_STAR_PURELOW if lat.leq(m.elem, adversary) else C_STAR_PUREHIGH
    if isinstance(m, Star):
        return C_PURELOW_STAR if lat.leq(k.elem, adversary) else C_PUREHIGH_STAR
    return C_PURE_LOW if lat.leq(k.elem, adversary) else C_PURE_HIGH


_P_GUARDED = "if h { x1 := l }"
_P_GUARDED_BOTH = "if h { x1 := l } else { x1 := l }"
_P_RAISE = "x1 := h"
_P_MIXER_CONST = "x1 := m\nif h { x1 := 4 }\nif m { x1 := lstar }"
_P_LOW_THEN_GUARDED = "x1 := l\nif h { x1 := l }"
_P_LOW = "x1 := l"
_P_MIXER_LOW = "x1 := m\nif h { x1 := l }\nif m { x1 := lstar }"
_P_LOW_THEN_BOTH = "x1 := l\nif h { x1 := l } else { x1 := l }"

TRANSITION_TABLE = {
    C_PURE_LOW: {
        C_STAR_PURELOW: _P_GUARDED,
        C_PURELOW_STAR: _P_GUARDED,
        C_STAR_STAR: _P_GUARDED_BOTH,
        C_PURE_HIGH: _P_RAISE,
        C_STAR_PUREHIGH: _P_MIXER_CONST,
        C_PUREHIGH_STAR: _P_MIXER_CONST,
    },
    C_STAR_PURELOW: {
        C_PURE_LOW: _P_LOW,
        C_PURELOW_STAR: _P_LOW_THEN_GUARDED,
        C_STAR_STAR: _P_GUARDED,
        C_PURE_HIGH: _P_RAISE,
        C_STAR_PUREHIGH: _P_MIXER_LOW,
        C_PUREHIGH_STAR: _P_MIXER_LOW,
    },
    C_PURELOW_STAR: {
        C_PURE_LOW: _P_LOW,
        C_STAR_PURELOW: _P_LOW_THEN_GUARDED,
        C_STAR_STAR: _P_GUARDED,
        C_PURE_HIGH: _P_RAISE,
        C_STAR_PUREHIGH: _P_MIXER_LOW,
        C_PUREHIGH_STAR: _P_MIXER_LOW,
    },
    C_STAR_STAR: {
        C_PURE_LOW: _P_LOW,
        C_STAR_PURELOW: _P_LOW_THEN_GUARDED,
        C_PURELOW_STAR: _P_LOW_THEN_GUARDED,
        C_PURE_HIGH: _P_RAISE,
        C_STAR_PUREHIGH: _P_MIXER_LOW,
        C_PUREHIGH_STAR: _P_MIXER_LOW,
    },
    C_PURE_HIGH: {
        C_PURE_LOW: _P_LOW,
        C_STAR_PURELOW: _P_LOW_THEN_GUARDED,
        C_PURELOW_STAR: _P_LOW_THEN_GUARDED,
        C_STAR_STAR: _P_LOW_THEN_BOTH,
        C_STAR_PUREHIGH: _P_MIXER_LOW,
        C_PUREHIGH_STAR: _P_MIXER_LOW,
    },
    C_STAR_PUREHIGH: {
        C_PURE_LOW: _P_LOW,
        C_STAR_PURELOW: _P_LOW_THEN_GUARDED,
        C_PURELOW_STAR: _P_LOW_THEN_GUARDED,
        C_STAR_STAR: _P_LOW_THEN_BOTH,
        C_PURE_HIGH: _P_RAISE,
        C_PUREHIGH_STAR: _P_MIXER_LOW,
    },
    C_PUREHIGH_STAR: {
        C_PURE_LOW: _P_LOW,
        C_STAR_PURELOW: _P_LOW_THEN_GUARDED,
        C_PURELOW_STAR: _P_LOW_THEN_GUARDED,
        C_STAR_STAR: _P_LOW_THEN_BOTH,
        C_PURE_HIGH: _P_RAISE,
        C_STAR_PUREHIGH: _P_MIXER_LOW,
    },
}

_ROW_X1 = {
    C_PURE_LOW: (LabeledValue(1, Pure("L")), LabeledValue(1, Pure("L"))),
    C_STAR_PURELOW: (LabeledValue(0, Star("L")), LabeledValue(1, Pure("L"))),
    C_PURELOW_STAR: (LabeledValue(1, Pure("L")), LabeledValue(0, Star("L"))),
    C_STAR_STAR: (LabeledValue(0, Star("L")), LabeledValue(1, Star("L"))),
    C_PURE_HIGH: (LabeledValue(1, Pure("M")), LabeledValue(0, Pure("M"))),
    C_STAR_PUREHIGH: (LabeledValue(0, Star("L")), LabeledValue(1, Pure("M"))),
    C_PUREHIGH_STAR: (LabeledValue(1, Pure("M")), LabeledValue(0, Star("L"))),
}


@dataclass
class TransitionResult:
    row: str
    col: str
    program: str
    reached: bool
    equivalent_throughout: bool

    @property
    def ok(self):
        return self.reached and self.equivalent_throughout


def run_transition_corpus(lat, adversary="L"):
    """For every label-pair transition cell, run its program from a store
    pair in the row class over all secret-value assignments and check the
    column class is reached (and every final pair stays equivalent)."""
    cfg = MonitorConfig(lat, "pua")
    results = []
    for row, cells in TRANSITION_TABLE.items():
        for col, source in cells.items():
            program = parse_program(source)
            x1_a, x1_b = _ROW_X1[row]
            reached = False
            equivalent = True
            for h1, h2, m1, m2, ls1, ls2 in itertools.product((0, 1), repeat=6):
                s1 = {
                    "x1": x1_a,
                    "l": LabeledValue(1, Pure("L")),
                    "m": LabeledValue(m1, Pure("M")),
                    "h": LabeledValue(h1, Pure("H")),
                    "lstar": LabeledValue(ls1, Star("L")),
                }
                s2 = {
                    "x1": x1_b,
                    "l": LabeledValue(1, Pure("L")),
                    "m": LabeledValue(m2, Pure("M")),
                    "h": LabeledValue(h2, Pure("H")),
                    "lstar": LabeledValue(ls2, Star("L")),
                }
                assert store_equiv("pua", lat, adversary, s1, s2)
                out1 = exec_program(cfg, program, s1)
                out2 = exec_program(cfg, program, s2)
                if not (out1.completed and out2.completed):
                    continue
                got = classify_pair(lat, adversary, out1.store["x1"], out2.store["x1"])
                if got is None:
                    equivalent = False
                elif got == col:
                    reached = True
            results.append(TransitionResult(row, col, source, reached, equivalent))
    return results
