"""Command-line front end.

Subcommands:

* ``run``      -- execute a program under a strategy and lattice
* ``compare``  -- run two stores side by side and give an equivalence verdict
* ``check``    -- run a verification suite (tini, lemmas, transitions, lattice-laws)
* ``corpus``   -- list or replay the bundled example programs

Exit codes: 0 success / completed, 1 usage or parse error, 2 execution
halted by the monitor, 3 fuel exhausted, 4 suite found violations.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import nicheck
from .labels import format_label
from .lang import LangError, parse_program, variables_of
from .lattice import LatticeError, builtin, parse_lattice
from .monitor import (
    DEFAULT_FUEL,
    AssignApplied,
    MonitorConfig,
    MonitorError,
    exec_program,
    format_store,
    format_trace,
    parse_store,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_HALTED = 2
EXIT_FUEL = 3
EXIT_VIOLATIONS = 4


class CliError(Exception):
    pass


def load_lattice(spec):
    try:
        return builtin(spec)
    except LatticeError:
        pass
    path = Path(spec)
    if path.is_file():
        return parse_lattice(path.read_text())
    raise CliError(f"--lattice {spec!r} is neither a builtin nor a readable file")


def load_program(spec):
    path = Path(spec)
    if path.is_file():
        return parse_program(path.read_text())
    if spec in corpus_mod.list_fixtures():
        return corpus_mod.load_fixture(spec).program
    raise CliError(f"program {spec!r}: no such file or corpus fixture")


def make_config(args):
    lat = load_lattice(args.lattice)
    principals = args.principals if args.strategy == "pup" else None
    if args.strategy == "pup" and principals is None:
        raise CliError("pup needs --principals")
    if args.strategy == "pua_unsound":
        if not args.allow_unsound:
            raise CliError("pua_unsound is a research mode; pass --allow-unsound to run it")
        print("*** UNSOUND STRATEGY: pua_unsound leaks by design; demo use only ***", file=sys.stderr)
    return MonitorConfig(lat, args.strategy, principals)


def parse_adversary(text, cfg):
    if text is None:
        return None
    if cfg.strategy == "pup":
        try:
            return int(text)
        except ValueError:
            raise CliError("pup adversary is a 0-based principal index") from None
    if text not in cfg.lat:
        raise CliError(f"adversary {text!r} is not a lattice element")
    return text


def _outcome_exit(outcome):
    return {"completed": EXIT_OK, "halted": EXIT_HALTED, "fuel_exhausted": EXIT_FUEL}[outcome.status]


def cmd_run(args):
    cfg = make_config(args)
    program = load_program(args.program)
    if len(args.store) != 1:
        raise CliError("run takes exactly one --store")
    store = parse_store(Path(args.store[0]).read_text())
    outcome = exec_program(cfg, program, store, fuel=args.fuel)
    if args.trace:
        print(format_trace(outcome.trace))
    if outcome.status == "completed":
        print(format_store(outcome.store))
    elif args.format == "tsv":
        print(f"{outcome.status}\t{outcome.reason or '-'}\t{outcome.line}")
    else:
        if outcome.status == "halted":
            print(f"halted: {outcome.reason} at line {outcome.line}")
        else:
            print(f"fuel exhausted at line {outcome.line}")
        print(format_store(outcome.store))
    return _outcome_exit(outcome)


def cmd_compare(args):
    cfg = make_config(args)
    program = load_program(args.program)
    if len(args.store) != 2:
        raise CliError("compare takes two --store files")
    stores = [parse_store(Path(p).read_text()) for p in args.store]
    outcomes = [exec_program(cfg, program, s, fuel=args.fuel) for s in stores]

    events = [[e for e in o.trace if isinstance(e, AssignApplied)] for o in outcomes]
    print(f"{'run 1':<38}| run 2")
    for e1, e2 in itertools.zip_longest(*events):
        c1 = f"line {e1.line}: {e1.var} -> {format_label(e1.new_label)}" if e1 else ""
        c2 = f"line {e2.line}: {e2.var} -> {format_label(e2.new_label)}" if e2 else ""
        print(f"{c1:<38}| {c2}")
    for i, o in enumerate(outcomes, 1):
        if o.status == "halted":
            print(f"run {i}: halted, {o.reason} at line {o.line}")
        elif o.status == "fuel_exhausted":
            print(f"run {i}: fuel exhausted")
        else:
            print(f"run {i}: completed")

    if not all(o.completed for o in outcomes):
        print("verdict: no completed-pair comparison")
        return EXIT_OK
    defid = nicheck.STRATEGY_DEF[cfg.strategy]
    adversary = parse_adversary(args.adversary, cfg)
    if adversary is None:
        adversary = 0 if cfg.strategy == "pup" else cfg.lat.bottom
    equivalent = nicheck.store_equiv(defid, cfg.lat, adversary, outcomes[0].store, outcomes[1].store)
    print(f"verdict: {'equivalent' if equivalent else 'NOT equivalent'} for adversary {adversary}")
    return EXIT_OK if equivalent else EXIT_VIOLATIONS


def _tini_targets(args):
    """(name, cfg, program, per-var labels) for each corpus program the
    selected strategy applies to, or the explicit program/lattice pair."""
    if args.program:
        cfg = make_config(args)
        program = load_program(args.program)
        labels = None
        if args.store:
            store = parse_store(Path(args.store[0]).read_text())
            labels = {x: [v.label] for x, v in store.items()}
        yield args.program, cfg, program, labels
        return
    for name in corpus_mod.list_fixtures():
        fixture = corpus_mod.load_fixture(name)
        strategies = {e.strategy for e in fixture.expectations}
        if args.strategy not in strategies:
            continue
        cfg = fixture.config(args.strategy)
        store_name = sorted(e.store for e in fixture.expectations if e.strategy == args.strategy)[0]
        store = parse_store(fixture.stores[store_name])
        labels = {x: [v.label] for x, v in store.items()}
        yield name, cfg, fixture.program, labels


def cmd_check(args):
    if args.suite == "lattice-laws":
        lat = load_lattice(args.lattice)
        bad = lattice_law_failures(lat)
        for msg in bad:
            print(f"VIOLATION\t{msg}")
        print(f"lattice-laws: {'ok' if not bad else f'{len(bad)} failures'}")
        return EXIT_OK if not bad else EXIT_VIOLATIONS

    if args.suite == "transitions":
        results = nicheck.run_transition_corpus(builtin("chain3"))
        failures = [r for r in results if not r.ok]
        for r in results:
            print(f"{'PASS' if r.ok else 'FAIL'}\t{r.row} -> {r.col}")
        print(f"transitions: {len(results) - len(failures)}/{len(results)} cells pass")
        return EXIT_OK if not failures else EXIT_VIOLATIONS

    if args.suite == "tini":
        any_violation = False
        for name, cfg, program, labels in _tini_targets(args):
            defid = nicheck.STRATEGY_DEF[cfg.strategy]
            if cfg.strategy == "pup":
                adversaries = list(range(cfg.principals))
            elif args.adversary:
                adversaries = [parse_adversary(args.adversary, cfg)]
            else:
                adversaries = sorted(cfg.lat.elements)
            for adversary in adversaries:
                report = nicheck.check_tini(
                    cfg, defid, adversary, program,
                    labels=labels, max_pairs=args.max_pairs, seed=args.seed, fuel=args.fuel,
                )
                print(f"tini {name} {cfg.strategy} adversary={adversary}: {report.summary()}")
                for s1, s2, f1, f2, var in report.violations:
                    any_violation = True
                    print(f"VIOLATION\t{var}\t{hash_store(s1)}\t{hash_store(s2)}")
        return EXIT_VIOLATIONS if any_violation else EXIT_OK

    if args.suite == "lemmas":
        violations = []
        for name, cfg, program, labels in _tini_targets(args):
            store_labels = {x: lab[0] for x, lab in labels.items()} if labels else None
            violations.extend(run_lemma_suite(cfg, program, store_labels, name))
        for msg in violations:
            print(f"VIOLATION\t{msg}")
        print(f"lemmas: {'ok' if not violations else f'{len(violations)} violations'}")
        return EXIT_OK if not violations else EXIT_VIOLATIONS

    raise CliError(f"unknown suite {args.suite!r}")


def hash_store(store):
    import hashlib

    text = format_store(store)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def lattice_law_failures(lat):
    failures = []
    elems = sorted(lat.elements)
    for a in elems:
        for b in elems:
            if lat.join(a, b) != lat.join(b, a):
                failures.append(f"join not commutative at ({a},{b})")
            if lat.meet(a, b) != lat.meet(b, a):
                failures.append(f"meet not commutative at ({a},{b})")
            if lat.join(a, lat.meet(a, b)) != a or lat.meet(a, lat.join(a, b)) != a:
                failures.append(f"absorption fails at ({a},{b})")
            if lat.leq(a, b) != (lat.join(a, b) == b) or lat.leq(a, b) != (lat.meet(a, b) == a):
                failures.append(f"order/join/meet disagree at ({a},{b})")
            for c in elems:
                if lat.join(lat.join(a, b), c) != lat.join(a, lat.join(b, c)):
                    failures.append(f"join not associative at ({a},{b},{c})")
                if lat.meet(lat.meet(a, b), c) != lat.meet(a, lat.meet(b, c)):
                    failures.append(f"meet not associative at ({a},{b},{c})")
        if lat.join(a, a) != a or lat.meet(a, a) != a or not lat.leq(lat.bottom, a):
            failures.append(f"idempotence/bottom fails at {a}")
    return failures


def run_lemma_suite(cfg, program, store_labels, name):
    """Trace lemmas plus confinement on one program with fixed labels."""
    violations = []
    variables = sorted(variables_of(program))
    if store_labels is None:
        store_labels = {x: cfg.bottom_label() for x in variables}
    from .monitor import LabeledValue

    for bits in itertools.product((0, 1), repeat=len(variables)):
        store = {x: LabeledValue(v, store_labels[x]) for x, v in zip(variables, bits)}
        outcome, spans = nicheck.run_with_spans(cfg, program, store)
        if outcome.completed:
            violations.extend(f"{name}: {v}" for v in nicheck.check_trace_lemmas(spans, cfg.lat))
        if cfg.strategy != "pup":
            for pc_elem in cfg.lat.elements:
                for adversary in cfg.lat.elements:
                    if cfg.lat.leq(pc_elem, adversary):
                        continue
                    from .labels import Pure

                    if not nicheck.check_confinement(
                        cfg, nicheck.STRATEGY_DEF[cfg.strategy], adversary, program, store, Pure(pc_elem)
                    ):
                        violations.append(f"{name}: confinement fails pc={pc_elem} adversary={adversary}")
    return violations


def cmd_corpus(args):
    if args.action == "list":
        for name in corpus_mod.list_fixtures():
            fixture = corpus_mod.load_fixture(name)
            expected = ", ".join(
                f"{e.strategy}/{e.store}:{e.status if e.status == 'completed' else f'{e.reason}@{e.line}'}"
                for e in fixture.expectations
            )
            print(f"{name} [{fixture.lattice_name}]  {expected}")
        return EXIT_OK
    # replay
    name = args.name
    if name == "table1":
        name = "listing3"
    results = corpus_mod.replay_fixture(name, fuel=args.fuel)
    ok = True
    for passed, message in results:
        ok &= passed
        print(("PASS " if passed else "FAIL ") + message)
    return EXIT_OK if ok else EXIT_VIOLATIONS


def build_parser():
    parser = argparse.ArgumentParser(prog="ifcmon", description="dynamic information-flow monitor and test harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, store=True):
        p.add_argument("--lattice", default="two_point", help="builtin name or lattice file")
        p.add_argument("--strategy", default="pua", choices=("naive", "nsu", "pus2", "pup", "pua", "pua_original", "pua_unsound"))
        if store:
            p.add_argument("--store", action="append", default=[], help="store file (repeatable for compare)")
        p.add_argument("--adversary", help="lattice element, or principal index for pup")
        p.add_argument("--principals", type=int, help="principal count for pup")
        p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
        p.add_argument("--trace", action="store_true")
        p.add_argument("--format", choices=("human", "tsv"), default="human")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-pairs", type=int, default=10**6)
        p.add_argument("--allow-unsound", action="store_true")

    p_run = sub.add_parser("run", help="run a program")
    p_run.add_argument("program")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run two stores side by side")
    p_cmp.add_argument("program")
    common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_chk = sub.add_parser("check", help="run a verification suite")
    p_chk.add_argument("suite", choices=("tini", "lemmas", "transitions", "lattice-laws"))
    p_chk.add_argument("program", nargs="?", help="program file or fixture name; default: whole corpus")
    common(p_chk)
    p_chk.set_defaults(func=cmd_check)

    p_cor = sub.add_parser("corpus", help="list or replay bundled examples")
    p_cor.add_argument("action", choices=("list", "replay"))
    p_cor.add_argument("name", nargs="?")
    p_cor.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p_cor.set_defaults(func=cmd_corpus)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, LangError, LatticeError, MonitorError, corpus_mod.CorpusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
