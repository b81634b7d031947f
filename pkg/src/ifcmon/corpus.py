"""Bundled example programs with their stores and expected outcomes.

Fixture layout: ``corpus/<name>.prog``, ``corpus/<name>.store*`` and
``corpus/<name>.expect``.  The expect file starts with ``lattice`` (and
optionally ``principals``) directives followed by one expectation per
line: ``<strategy> <store> completed [var=value@label ...]`` or
``<strategy> <store> halted <reason> <line>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .labels import format_label, parse_label
from .lang import parse_program
from .lattice import builtin
from .monitor import MonitorConfig, exec_program, parse_store


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Expectation:
    strategy: str
    store: str
    status: str  # completed | halted
    reason: str | None = None
    line: int | None = None
    bindings: tuple = ()  # ((var, value, label-text), ...)


@dataclass
class Fixture:
    name: str
    program_text: str
    stores: dict
    lattice_name: str
    principals: int | None = None
    expectations: list = field(default_factory=list)

    @property
    def program(self):
        return parse_program(self.program_text)

    @property
    def lattice(self):
        return builtin(self.lattice_name)

    def config(self, strategy):
        principals = self.principals if strategy == "pup" else None
        return MonitorConfig(self.lattice, strategy, principals)


def _corpus_root():
    return resources.files(__package__) / "corpus"


def list_fixtures():
    names = set()
    for entry in _corpus_root().iterdir():
        if entry.name.endswith(".prog"):
            names.add(entry.name[: -len(".prog")])
    return sorted(names)


def load_fixture(name):
    root = _corpus_root()
    prog = root / f"{name}.prog"
    if not prog.is_file():
        raise CorpusError(f"no corpus fixture named {name!r}")
    fixture = Fixture(name, prog.read_text(), {}, "two_point")
    for entry in root.iterdir():
        if entry.name.startswith(f"{name}.store"):
            fixture.stores[entry.name[len(name) + 1 :]] = entry.read_text()
    expect = root / f"{name}.expect"
    if expect.is_file():
        _parse_expect(fixture, expect.read_text())
    return fixture


def _parse_expect(fixture, text):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "lattice":
            fixture.lattice_name = parts[1]
            continue
        if parts[0] == "principals":
            fixture.principals = int(parts[1])
            continue
        strategy, store, status = parts[0], parts[1], parts[2]
        if status == "completed":
            bindings = []
            for b in parts[3:]:
                var, rest = b.split("=", 1)
                value, label = rest.split("@", 1)
                bindings.append((var, int(value), label))
            fixture.expectations.append(Expectation(strategy, store, status, bindings=tuple(bindings)))
        elif status == "halted":
            fixture.expectations.append(
                Expectation(strategy, store, status, reason=parts[3], line=int(parts[4]))
            )
        else:
            raise CorpusError(f"bad expectation line {raw!r}")


def check_expectation(fixture, exp, fuel=100_000):
    """Run one expectation; returns (ok, message)."""
    cfg = fixture.config(exp.strategy)
    store = parse_store(fixture.stores[exp.store])
    outcome = exec_program(cfg, fixture.program, store, fuel=fuel)
    tag = f"{fixture.name} {exp.strategy} {exp.store}"
    if exp.status == "completed":
        if not outcome.completed:
            return False, f"{tag}: expected completion, got {outcome.status} ({outcome.reason} line {outcome.line})"
        for var, value, label in exp.bindings:
            got = outcome.store[var]
            if got.value != value or format_label(got.label) != format_label(parse_label(label)):
                return False, f"{tag}: expected {var}={value}@{label}, got {got}"
        return True, f"{tag}: completed as expected"
    if outcome.status != "halted":
        return False, f"{tag}: expected halt, got {outcome.status}"
    if outcome.reason != exp.reason or outcome.line != exp.line:
        return False, f"{tag}: expected halt {exp.reason} line {exp.line}, got {outcome.reason} line {outcome.line}"
    return True, f"{tag}: halted as expected ({exp.reason} line {exp.line})"


def replay_fixture(name, fuel=100_000):
    """Run every expectation of a fixture; returns list of (ok, message)."""
    fixture = load_fixture(name)
    if not fixture.expectations:
        raise CorpusError(f"fixture {name!r} has no expectations")
    return [check_expectation(fixture, exp, fuel=fuel) for exp in fixture.expectations]
