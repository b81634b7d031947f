import itertools
import random

import pytest

from ifcmon.corpus import load_fixture
from ifcmon.labels import MixedLabelFamilies, Prod, Pure, Star
from ifcmon.lang import parse_program
from ifcmon.lattice import builtin
from ifcmon.monitor import LabeledValue, MonitorConfig, parse_store
from ifcmon.nicheck import (
    C_PURE_HIGH,
    C_PURE_LOW,
    C_STAR_PUREHIGH,
    C_STAR_STAR,
    AdversaryKindMismatch,
    DomainMismatch,
    ExplosionGuard,
    check_confinement,
    check_expr_lemma,
    check_tini,
    check_trace_lemmas,
    classify_pair,
    find_nontransitivity_witness,
    gen_equiv_store_pairs,
    gen_random_program,
    label_universe,
    run_transition_corpus,
    run_with_spans,
    store_equiv,
    value_equiv,
)

TWO = builtin("two_point")
FIG5 = builtin("fig5")
CHAIN3 = builtin("chain3")


def lv(value, label):
    return LabeledValue(value, label)


# --- equivalence definitions ----------------------------------------------


def test_basic_equiv():
    assert value_equiv("basic", TWO, "L", lv(1, Pure("L")), lv(1, Pure("L")))
    assert not value_equiv("basic", TWO, "L", lv(1, Pure("L")), lv(0, Pure("L")))
    assert value_equiv("basic", TWO, "L", lv(1, Pure("H")), lv(0, Pure("H")))
    assert not value_equiv("basic", TWO, "L", lv(1, Pure("L")), lv(1, Pure("H")))
    # everything is visible to the top adversary
    assert not value_equiv("basic", TWO, "H", lv(1, Pure("H")), lv(0, Pure("H")))
    with pytest.raises(MixedLabelFamilies):
        value_equiv("basic", TWO, "L", lv(1, Star("L")), lv(1, Pure("L")))


def test_basic_equiv_incomparable_labels():
    # both sides invisible to the adversary, even under different labels
    assert value_equiv("basic", FIG5, "L1", lv(1, Pure("L2")), lv(0, Pure("M2")))
    assert not value_equiv("basic", FIG5, "L1", lv(1, Pure("L")), lv(1, Pure("L2")))


def test_pus2_equiv():
    assert value_equiv("pus2", TWO, "L", lv(1, Star("L")), lv(0, Pure("H")))
    assert value_equiv("pus2", TWO, "L", lv(1, Star("L")), lv(0, Pure("L")))
    assert value_equiv("pus2", TWO, "L", lv(1, Pure("H")), lv(0, Pure("H")))
    assert not value_equiv("pus2", TWO, "L", lv(1, Pure("L")), lv(0, Pure("L")))
    assert not value_equiv("pus2", TWO, "L", lv(1, Pure("L")), lv(1, Pure("H")))


def test_pup_equiv():
    assert value_equiv("pup", TWO, 0, lv(1, Prod(("P", "L"))), lv(0, Prod(("L", "L"))))
    assert not value_equiv("pup", TWO, 1, lv(1, Prod(("P", "L"))), lv(0, Prod(("L", "L"))))
    assert value_equiv("pup", TWO, 1, lv(1, Prod(("P", "H"))), lv(0, Prod(("L", "H"))))
    assert value_equiv("pup", TWO, 0, lv(1, Prod(("L", "H"))), lv(1, Prod(("L", "L"))))
    with pytest.raises(AdversaryKindMismatch):
        value_equiv("pup", TWO, "L", lv(1, Prod(("L", "L"))), lv(1, Prod(("L", "L"))))
    with pytest.raises(MixedLabelFamilies):
        value_equiv("pup", TWO, 0, lv(1, Pure("L")), lv(1, Pure("L")))


def test_pua_equiv_star_clauses():
    # a partially-leaked low value is equivalent to a pure low value
    assert value_equiv("pua", TWO, "L", lv(1, Star("L")), lv(0, Pure("L")))
    # ... and to anything above the adversary
    assert value_equiv("pua", FIG5, "L1", lv(1, Star("L")), lv(0, Pure("L2")))
    # star whose bound is not below the pure side's label, pure side visible
    assert not value_equiv("pua", FIG5, "M1", lv(1, Star("M2")), lv(0, Pure("L1")))
    assert value_equiv("pua", FIG5, "M1", lv(1, Star("L1")), lv(0, Pure("M1")))
    # two stars are always equivalent
    assert value_equiv("pua", FIG5, "H", lv(1, Star("H")), lv(0, Star("L")))


def test_pua_restricted_to_pure_is_basic():
    for lat, adversary in ((TWO, "L"), (FIG5, "L1"), (FIG5, "M2")):
        values = [lv(v, Pure(e)) for e in sorted(lat.elements) for v in (0, 1)]
        for a, b in itertools.product(values, repeat=2):
            assert value_equiv("pua", lat, adversary, a, b) == value_equiv("basic", lat, adversary, a, b)


def test_pua_on_two_point_is_pus2():
    labels = [Pure("L"), Pure("H"), Star("L")]
    values = [lv(v, k) for k in labels for v in (0, 1)]
    for a, b in itertools.product(values, repeat=2):
        assert value_equiv("pua", TWO, "L", a, b) == value_equiv("pus2", TWO, "L", a, b)


def test_pua_not_transitive():
    witness = find_nontransitivity_witness(TWO, "L")
    assert witness is not None
    a, b, c = witness
    assert value_equiv("pua", TWO, "L", a, b)
    assert value_equiv("pua", TWO, "L", b, c)
    assert not value_equiv("pua", TWO, "L", a, c)


def test_basic_is_transitive():
    values = [lv(v, Pure(e)) for e in sorted(FIG5.elements) for v in (0, 1)]
    for a, b, c in itertools.product(values, repeat=3):
        if value_equiv("basic", FIG5, "M1", a, b) and value_equiv("basic", FIG5, "M1", b, c):
            assert value_equiv("basic", FIG5, "M1", a, c)


def test_store_equiv_domains():
    s = {"x": lv(1, Pure("L"))}
    with pytest.raises(DomainMismatch):
        store_equiv("basic", TWO, "L", s, {})
    assert store_equiv("basic", TWO, "L", s, {"x": lv(1, Pure("L"))})


# --- universes and pair generation ----------------------------------------


def test_label_universe():
    assert label_universe("basic", TWO) == [Pure("H"), Pure("L")]
    assert label_universe("pua", TWO) == [Pure("H"), Pure("L"), Star("H"), Star("L")]
    assert label_universe("pus2", TWO) == [Pure("H"), Pure("L"), Star("L")]
    assert len(label_universe("pup", TWO, principals=2)) == 9


def test_gen_equiv_store_pairs_single_var_count():
    # independent oracle: enumerate all labeled-value pairs and keep those
    # equal-low-equal-value or both-high
    candidates = [lv(v, Pure(e)) for e in ("H", "L") for v in (0, 1)]

    def oracle(a, b):
        if a.label == b.label == Pure("L"):
            return a.value == b.value
        return a.label == Pure("H") and b.label == Pure("H")

    expected = sum(1 for a in candidates for b in candidates if oracle(a, b))
    assert expected == 6  # 2 low pairs + 4 high pairs
    pairs = list(gen_equiv_store_pairs(TWO, "basic", "L", ["x"]))
    assert len(pairs) == expected
    for s1, s2 in pairs:
        assert oracle(s1["x"], s2["x"])


def test_gen_equiv_store_pairs_explosion_guard():
    with pytest.raises(ExplosionGuard):
        list(gen_equiv_store_pairs(FIG5, "pua", "L", [f"v{i}" for i in range(8)], cap=10**4))


# --- TINI ------------------------------------------------------------------


def _listing1():
    fixture = load_fixture("listing1")
    labels = {"x": [Pure("L")], "y": [Pure("L")], "z": [Pure("H")]}
    return fixture.program, labels


def test_tini_naive_leaks():
    program, labels = _listing1()
    cfg = MonitorConfig(TWO, "naive")
    report = check_tini(cfg, "basic", "L", program, labels=labels)
    assert not report.ok
    # the secret shows in both x and y; x is reported as the first bad var
    assert {v[4] for v in report.violations} == {"x"}
    assert len(report.violations) == 8
    assert report.pairs_tested == 16 and not report.sampled


@pytest.mark.parametrize("strategy", ["nsu", "pus2", "pua", "pua_original"])
def test_tini_sound_strategies_on_listing1(strategy):
    program, labels = _listing1()
    cfg = MonitorConfig(TWO, strategy)
    from ifcmon.nicheck import STRATEGY_DEF

    report = check_tini(cfg, STRATEGY_DEF[strategy], "L", program, labels=labels)
    assert report.ok, report.violations
    assert report.halted_pairs > 0  # the monitor pays with stops, not leaks


def test_tini_unsound_variant_leaks():
    fixture = load_fixture("listing3")
    s1 = parse_store(fixture.stores["store1"])
    s2 = parse_store(fixture.stores["store2"])
    cfg = MonitorConfig(FIG5, "pua_unsound")
    report = check_tini(cfg, "pua", "L1", fixture.program, pairs=[(s1, s2)])
    assert len(report.violations) == 1
    assert report.violations[0][4] == "w"
    # the sound variant stops the leaking run instead
    sound = check_tini(MonitorConfig(FIG5, "pua"), "pua", "L1", fixture.program, pairs=[(s1, s2)])
    assert sound.ok and sound.halted_pairs == 1


def test_tini_sampling_mode():
    program, _ = _listing1()
    cfg = MonitorConfig(TWO, "pua")
    report = check_tini(cfg, "pua", "L", program, max_pairs=50, seed=42)
    assert report.sampled and report.seed == 42
    assert report.pairs_tested == 50
    assert report.ok
    assert "seed 42" in report.summary()


# --- lemma checks ----------------------------------------------------------


def _fuzz_cases(count, seed):
    rng = random.Random(seed)
    variables = ["a", "b", "c"]
    labels = [Pure("L"), Pure("H"), Star("L"), Star("H")]
    for _ in range(count):
        prog = gen_random_program(rng, variables, depth=3, length=3)
        store = {x: lv(rng.choice((0, 1)), rng.choice(labels)) for x in variables}
        yield prog, store


@pytest.mark.parametrize("strategy", ["pus2", "pua", "pua_original"])
def test_trace_lemmas_fuzz(strategy):
    for prog, store in _fuzz_cases(150, seed=11):
        if strategy == "pus2":
            store = {x: lv(v.value, Star("L") if isinstance(v.label, Star) else v.label) for x, v in store.items()}
        cfg = MonitorConfig(TWO, strategy)
        _, spans = run_with_spans(cfg, prog, store, fuel=200)
        assert check_trace_lemmas(spans, TWO) == []


def test_trace_lemmas_on_corpus():
    for name in ("listing1", "listing2", "listing3"):
        fixture = load_fixture(name)
        for store_text in fixture.stores.values():
            for strategy in ("nsu", "pua", "pua_original"):
                cfg = fixture.config(strategy)
                _, spans = run_with_spans(cfg, fixture.program, parse_store(store_text))
                assert check_trace_lemmas(spans, fixture.lattice) == [], (name, strategy)


def test_trace_lemmas_flag_bad_spans():
    # a fabricated span that drops a star under an incomparable pc
    stmt = parse_program("x := 0")
    before = {"x": lv(1, Star("L"))}
    after = {"x": lv(0, Pure("L"))}
    violations = check_trace_lemmas([(stmt, Pure("H"), before, after)], TWO)
    assert violations and any("unstar" in v for v in violations)


def test_confinement_fuzz():
    cfg = MonitorConfig(TWO, "pua")
    for prog, store in _fuzz_cases(150, seed=12):
        assert check_confinement(cfg, "pua", "L", prog, store, Pure("H"), fuel=200)


def test_confinement_nsu():
    cfg = MonitorConfig(FIG5, "nsu")
    rng = random.Random(13)
    labels = [Pure(e) for e in sorted(FIG5.elements)]
    for _ in range(100):
        prog = gen_random_program(rng, ["a", "b"], depth=2, length=3)
        store = {x: lv(rng.choice((0, 1)), rng.choice(labels)) for x in ("a", "b")}
        assert check_confinement(cfg, "basic", "L1", prog, store, Pure("M2"), fuel=200)


def test_expr_lemma_exhaustive():
    cfg = MonitorConfig(TWO, "pua")
    exprs = [parse_program(f"t := {src}").expr for src in ("x + y", "x = y", "not(x)", "x and y")]
    labels = label_universe("pua", TWO)
    values = [lv(v, k) for k in labels for v in (0, 1)]
    for a1, a2 in itertools.product(values, repeat=2):
        if not value_equiv("pua", TWO, "L", a1, a2):
            continue
        for b1, b2 in itertools.product(values, repeat=2):
            if not value_equiv("pua", TWO, "L", b1, b2):
                continue
            s1 = {"x": a1, "y": b1}
            s2 = {"x": a2, "y": b2}
            for e in exprs:
                assert check_expr_lemma(cfg, "pua", "L", e, s1, s2)


def test_expr_lemma_rejects_inequivalent_stores():
    cfg = MonitorConfig(TWO, "pua")
    with pytest.raises(ValueError):
        check_expr_lemma(
            cfg, "pua", "L", parse_program("t := x").expr, {"x": lv(0, Pure("L"))}, {"x": lv(1, Pure("L"))}
        )


# --- transition corpus -----------------------------------------------------


def test_classify_pair():
    assert classify_pair(CHAIN3, "L", lv(1, Pure("L")), lv(1, Pure("L"))) == C_PURE_LOW
    assert classify_pair(CHAIN3, "L", lv(1, Pure("M")), lv(0, Pure("H"))) == C_PURE_HIGH
    assert classify_pair(CHAIN3, "L", lv(0, Star("L")), lv(1, Pure("M"))) == C_STAR_PUREHIGH
    assert classify_pair(CHAIN3, "L", lv(0, Star("M")), lv(1, Star("L"))) == C_STAR_STAR
    assert classify_pair(CHAIN3, "L", lv(0, Pure("L")), lv(1, Pure("L"))) is None


def test_transition_corpus_all_cells():
    results = run_transition_corpus(CHAIN3)
    assert len(results) == 42
    for r in results:
        assert r.equivalent_throughout, (r.row, r.col, r.program)
        assert r.reached, (r.row, r.col, r.program)
