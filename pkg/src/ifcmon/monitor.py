"""Big-step monitored interpreter with pluggable assignment strategies.

Strategies:

* ``naive``         -- label assignments with pc joined in, no upgrade check
* ``nsu``           -- halt on any label upgrade under an incomparable pc
* ``pus2``          -- permissive-upgrade on a two-point lattice (P = L*)
* ``pup``           -- per-principal product permissive-upgrade
* ``pua``           -- permissive-upgrade generalized to arbitrary lattices
* ``pua_original``  -- pua with the older partial-leak label (pc meet old)
* ``pua_unsound``   -- pua keeping the old pure bound on downgrade; leaks,
  kept only to demonstrate the counterexample

Halting (upgrade violations, branching on partially-leaked data) is a
normal Outcome, not an exception.
"""

from __future__ import annotations

from dataclasses import dataclass

from .labels import (
    Label,
    MixedLabelFamilies,
    Prod,
    Pure,
    Star,
    format_label,
    is_pure,
    label_join,
    parse_label,
    pure_bound,
)
from .lang import Assign, BinOp, Const, If, Not, Seq, Skip, Var, While, wrap64
from .lattice import LatticeSpec

STRATEGIES = ("naive", "nsu", "pus2", "pup", "pua", "pua_original", "pua_unsound")

NSU_VIOLATION = "NsuViolation"
BRANCH_ON_PARTIALLY_LEAKED = "BranchOnPartiallyLeaked"

DEFAULT_FUEL = 100_000


class MonitorError(ValueError):
    pass


class UnboundVariable(MonitorError):
    pass


class StrategyMismatch(MonitorError):
    pass


@dataclass(frozen=True)
class LabeledValue:
    value: int
    label: Label

    def __str__(self):
        return f"{self.value}^{format_label(self.label)}"


@dataclass(frozen=True)
class HaltSignal:
    reason: str


@dataclass(frozen=True)
class AssignApplied:
    line: int
    rule: str
    var: str
    old_label: Label
    new_label: Label
    pc: Label


@dataclass(frozen=True)
class BranchTaken:
    line: int
    guard_label: Label
    pc_inner: Label


@dataclass(frozen=True)
class Halt:
    line: int
    reason: str


COMPLETED = "completed"
HALTED = "halted"
FUEL_EXHAUSTED = "fuel_exhausted"


@dataclass
class Outcome:
    status: str
    store: dict
    trace: list
    reason: str | None = None
    line: int | None = None

    @property
    def completed(self):
        return self.status == COMPLETED


@dataclass(frozen=True)
class MonitorConfig:
    lat: LatticeSpec
    strategy: str
    principals: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise StrategyMismatch(f"unknown strategy {self.strategy!r}")
        if self.strategy == "pus2" and len(self.lat) != 2:
            raise StrategyMismatch("pus2 needs a two-point lattice")
        if self.strategy == "pup":
            if not self.principals or self.principals < 1:
                raise StrategyMismatch("pup needs a principal count >= 1")
        elif self.principals is not None:
            raise StrategyMismatch("principals only apply to pup")

    @property
    def product_mode(self):
        return self.strategy == "pup"

    def bottom_label(self):
        if self.product_mode:
            return Prod(("L",) * self.principals)
        return Pure(self.lat.bottom)

    def check_label(self, k):
        """Reject labels from the wrong family for this strategy."""
        if self.product_mode:
            if not isinstance(k, Prod) or len(k.parts) != self.principals:
                raise MixedLabelFamilies(f"{format_label(k)} not a {self.principals}-principal label")
            return
        if isinstance(k, Prod):
            raise MixedLabelFamilies("product label outside pup mode")
        if k.elem not in self.lat:
            raise MonitorError(f"label element {k.elem!r} not in lattice")
        if isinstance(k, Star) and self.strategy in ("naive", "nsu"):
            raise MixedLabelFamilies(f"{self.strategy} stores carry only pure labels")


# --- expression evaluation -------------------------------------------------


def _truthy(v):
    return v != 0


def _apply_op(op, a, b):
    if op == "+":
        return wrap64(a + b)
    if op == "-":
        return wrap64(a - b)
    if op == "*":
        return wrap64(a * b)
    if op == "=":
        return 1 if a == b else 0
    if op == "<":
        return 1 if a < b else 0
    if op == "and":
        return 1 if _truthy(a) and _truthy(b) else 0
    if op == "or":
        return 1 if _truthy(a) or _truthy(b) else 0
    raise MonitorError(f"unknown operator {op!r}")


def eval_expr(cfg, store, e):
    """Evaluate an expression; the label is the join of the operand labels."""
    if isinstance(e, Const):
        return LabeledValue(wrap64(e.value), cfg.bottom_label())
    if isinstance(e, Var):
        try:
            return store[e.name]
        except KeyError:
            raise UnboundVariable(f"unbound variable {e.name!r}") from None
    if isinstance(e, Not):
        v = eval_expr(cfg, store, e.arg)
        return LabeledValue(0 if _truthy(v.value) else 1, v.label)
    if isinstance(e, BinOp):
        a = eval_expr(cfg, store, e.left)
        b = eval_expr(cfg, store, e.right)
        return LabeledValue(_apply_op(e.op, a.value, b.value), label_join(cfg.lat, a.label, b.label))
    raise MonitorError(f"not an expression: {e!r}")


# --- assignment strategies -------------------------------------------------


def _pup_component(pc_a, l_a, m_a):
    if pc_a == "L":
        return m_a
    if l_a == "H":
        return "P" if m_a == "P" else "H"
    return "P"


def assign_label(cfg, l, pc, m):
    """New label for a variable currently labeled l, assigned rhs label m
    under program counter pc.  Returns a Label or a HaltSignal."""
    lat = cfg.lat
    strategy = cfg.strategy
    if strategy == "pup":
        for k in (l, pc, m):
            cfg.check_label(k)
        return Prod(tuple(_pup_component(p, a, b) for p, a, b in zip(pc.parts, l.parts, m.parts)))

    cfg.check_label(l)
    cfg.check_label(m)
    pc_elem = pure_bound(pc)
    if strategy == "naive":
        return Pure(lat.join(pc_elem, pure_bound(m)))
    if strategy == "nsu":
        if not lat.leq(pc_elem, l.elem):
            return HaltSignal(NSU_VIOLATION)
        return Pure(lat.join(pc_elem, m.elem))

    # permissive-upgrade family (pus2 and the pua variants)
    ax = pure_bound(l)
    if lat.leq(pc_elem, ax):
        return label_join(lat, Pure(pc_elem), m)
    if strategy == "pua_original":
        return Star(lat.meet(pc_elem, ax))
    if strategy == "pua_unsound":
        return Star(ax)
    return Star(lat.meet(lat.join(pc_elem, pure_bound(m)), ax))


_RULE_UPGRADE = {
    "pus2": ("assn-PUS", "assn-PUS"),
    "pua": ("assn-1", "assn-2"),
    "pua_original": ("assn-1", "assn-2-original"),
    "pua_unsound": ("assn-1", "assn-2-unsound"),
}


def _rule_name(cfg, l, pc):
    strategy = cfg.strategy
    if strategy == "naive":
        return "assn-naive"
    if strategy == "nsu":
        return "assn-NSU"
    if strategy == "pup":
        return "assn-PUS'"
    first, second = _RULE_UPGRADE[strategy]
    return first if cfg.lat.leq(pure_bound(pc), pure_bound(l)) else second


# --- branching -------------------------------------------------------------


def branch_guard(cfg, guard_label):
    """Admit a branch guard: pure labels pass through, anything partially
    leaked halts the execution."""
    if isinstance(guard_label, Star):
        return HaltSignal(BRANCH_ON_PARTIALLY_LEAKED)
    if isinstance(guard_label, Prod) and "P" in guard_label.parts:
        return HaltSignal(BRANCH_ON_PARTIALLY_LEAKED)
    return guard_label


# --- execution -------------------------------------------------------------


class _HaltException(Exception):
    def __init__(self, reason, line):
        self.reason = reason
        self.line = line


class _FuelException(Exception):
    def __init__(self, line):
        self.line = line


def exec_program(cfg, stmt, store, pc=None, fuel=DEFAULT_FUEL, span_hook=None):
    """Run a statement under the configured strategy.

    ``store`` maps variable names to LabeledValues and must bind every
    variable of the program.  ``span_hook(stmt, pc, before, after)``,
    when given, is called for every successfully completed sub-command;
    the lemma checkers feed on it.
    """
    if pc is None:
        pc = cfg.bottom_label()
    if not is_pure(pc):
        raise MonitorError("pc must be pure")
    store = dict(store)
    for v in store.values():
        cfg.check_label(v.label)
    trace = []
    fuel_left = [fuel]

    def run(node, pc):
        before = dict(store) if span_hook else None
        if isinstance(node, Skip):
            pass
        elif isinstance(node, Assign):
            if node.name not in store:
                raise UnboundVariable(f"unbound variable {node.name!r}")
            rhs = eval_expr(cfg, store, node.expr)
            old = store[node.name].label
            k = assign_label(cfg, old, pc, rhs.label)
            if isinstance(k, HaltSignal):
                trace.append(Halt(node.line, k.reason))
                raise _HaltException(k.reason, node.line)
            trace.append(AssignApplied(node.line, _rule_name(cfg, store[node.name].label, pc), node.name, old, k, pc))
            store[node.name] = LabeledValue(rhs.value, k)
        elif isinstance(node, Seq):
            run(node.first, pc)
            run(node.second, pc)
        elif isinstance(node, If):
            guard = eval_expr(cfg, store, node.cond)
            inner_pc = enter_branch(node, pc, guard)
            run(node.then if _truthy(guard.value) else node.els, inner_pc)
        elif isinstance(node, While):
            while True:
                guard = eval_expr(cfg, store, node.cond)
                # every guard test is a case analysis, including the one
                # that exits the loop
                inner_pc = enter_branch(node, pc, guard)
                if not _truthy(guard.value):
                    break
                if fuel_left[0] <= 0:
                    raise _FuelException(node.line)
                fuel_left[0] -= 1
                run(node.body, inner_pc)
        else:
            raise MonitorError(f"not a statement: {node!r}")
        if span_hook:
            span_hook(node, pc, before, dict(store))

    def enter_branch(node, pc, guard):
        admitted = branch_guard(cfg, guard.label)
        if isinstance(admitted, HaltSignal):
            trace.append(Halt(node.line, admitted.reason))
            raise _HaltException(admitted.reason, node.line)
        inner_pc = label_join(cfg.lat, pc, admitted)
        assert is_pure(inner_pc)
        trace.append(BranchTaken(node.line, guard.label, inner_pc))
        return inner_pc

    try:
        run(stmt, pc)
    except _HaltException as halt:
        return Outcome(HALTED, store, trace, reason=halt.reason, line=halt.line)
    except _FuelException as out:
        return Outcome(FUEL_EXHAUSTED, store, trace, line=out.line)
    return Outcome(COMPLETED, store, trace)


# --- store and trace text formats -----------------------------------------


def parse_store(text):
    """One binding per line: ``x = <int> @ <label>``; `#` comments."""
    store = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            name, rest = line.split("=", 1)
            value, label = rest.split("@", 1)
            store[name.strip()] = LabeledValue(int(value.strip()), parse_label(label))
        except ValueError as exc:
            raise MonitorError(f"store line {lineno}: cannot parse {raw!r}: {exc}") from None
    return store


def format_store(store):
    return "\n".join(f"{x} = {v.value} @ {format_label(v.label)}" for x, v in sorted(store.items()))


def format_trace_event(ev):
    if isinstance(ev, AssignApplied):
        return "\t".join(
            [str(ev.line), ev.rule, ev.var, format_label(ev.old_label), format_label(ev.new_label), format_label(ev.pc)]
        )
    if isinstance(ev, BranchTaken):
        return "\t".join([str(ev.line), "branch", "-", format_label(ev.guard_label), "-", format_label(ev.pc_inner)])
    if isinstance(ev, Halt):
        return "\t".join([str(ev.line), "halt", "-", ev.reason, "-", "-"])
    raise MonitorError(f"not a trace event: {ev!r}")


def format_trace(trace):
    return "\n".join(format_trace_event(ev) for ev in trace)
