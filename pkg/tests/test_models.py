import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from symrecur.errors import BudgetExceeded, RecurError
from symrecur.intervals import AlphaBetaParams
from symrecur.models import (SFT, Coded, Full, IntervalCoding, SGap, count_words, entropy_estimate,
                             enumerate_language, load_model, model_from_config, model_to_config,
                             sample_word, save_model)
from symrecur.words import Word

W = Word.parse


def all_words(m, n):
    return [bytes(w) for w in product(range(m), repeat=n)]


def factor_oracle(generators, n):
    """All length-n factors of concatenations of generators (brute force)."""
    gmax = max(len(g) for g in generators)
    limit = n + 2 * gmax
    out = set()
    frontier = {b""}
    seen = set()
    while frontier:
        nxt = set()
        for c in frontier:
            for i in range(len(c) - n + 1):
                out.add(c[i:i + n])
            for g in generators:
                d = c + g
                if len(d) <= limit and d not in seen:
                    seen.add(d)
                    nxt.add(d)
        frontier = nxt
    return out


FIXTURES = {
    "golden": SFT(2, [W("11")]),
    "sft3": SFT(3, [Word.parse("02", 3), Word.parse("121", 3)]),
    "sgap12": SGap({1, 2}),
    "sgap_inf": SGap({0}, s_min=3),
    "coded": Coded(2, [W("10"), W("100"), W("1110")]),
    "interval": IntervalCoding(AlphaBetaParams("0.5", "2.5")),
}


def test_admits_examples():
    g = FIXTURES["golden"]
    assert g.admits(W("0101")) and not g.admits(W("0110"))
    s = FIXTURES["sgap12"]
    assert s.admits(W("10101001")) and not s.admits(W("100010"))
    assert s.admits(Word.empty())


def test_enumerate_examples():
    assert enumerate_language(Full(2), 3).count == 8
    assert enumerate_language(FIXTURES["golden"], 4).count == 8
    for model in FIXTURES.values():
        sl = enumerate_language(model, 0)
        assert sl.count == 1 and sl.words == [Word.empty(model.m)]


@pytest.mark.parametrize("forbidden", [["11"], ["11", "00000"], ["010", "0110"], ["1"]])
def test_sft_matches_brute_force_filter(forbidden):
    model = SFT(2, [W(f) for f in forbidden])
    pats = [W(f).symbols for f in forbidden]
    for n in range(0, 15):
        expect = sorted(w for w in all_words(2, n) if not any(p in w for p in pats))
        got = [w.symbols for w in enumerate_language(model, n).words]
        assert got == expect
        assert count_words(model, n) == len(expect)


@pytest.mark.parametrize("S", [{1, 2}, {0, 3}, {2, 5}])
def test_sgap_matches_generator_oracle(S):
    model = SGap(S)
    gens = [b"\x01" + b"\x00" * s for s in S]
    for n in range(1, 11):
        expect = sorted(factor_oracle(gens, n))
        got = [w.symbols for w in enumerate_language(model, n).words]
        assert got == expect, n


def _sgap_rule(w: bytes, ok) -> bool:
    """Interior 0-runs must lie in S; boundary runs need some s in S at least as long."""
    runs = w.split(b"\x01")
    if len(runs) == 1:
        return any(ok(s) for s in range(len(w), len(w) + 50))
    inner = runs[1:-1]
    edge = [runs[0], runs[-1]]
    return all(ok(len(r)) for r in inner) and all(
        any(ok(s) for s in range(len(r), len(r) + 50)) for r in edge)


@pytest.mark.parametrize("S,s_min", [({0}, 3), ((), 2), ({1, 4}, 7)])
def test_sgap_threshold_matches_rule(S, s_min):
    model = SGap(S, s_min=s_min)
    ok = lambda s: s in S or s >= s_min  # noqa: E731
    for n in range(1, 13):
        expect = sorted(w for w in all_words(2, n) if _sgap_rule(w, ok))
        assert [w.symbols for w in enumerate_language(model, n).words] == expect


@pytest.mark.parametrize("S", [{1, 2}, {0, 3}])
def test_sgap_rule_agrees_with_generator_oracle(S):
    # the run-length rule is itself checked against the concatenation oracle
    gens = [b"\x01" + b"\x00" * s for s in S]
    for n in range(1, 10):
        assert sorted(factor_oracle(gens, n)) == sorted(
            w for w in all_words(2, n) if _sgap_rule(w, lambda s: s in S))


def test_coded_matches_factor_oracle():
    gens = [b"\x01\x00", b"\x01\x00\x00", b"\x01\x01\x01\x00"]
    model = FIXTURES["coded"]
    for n in range(1, 11):
        expect = sorted(factor_oracle(gens, n))
        assert [w.symbols for w in enumerate_language(model, n).words] == expect


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_factor_closed_and_extendable(name):
    model = FIXTURES[name]
    for n in range(1, 11 if model.m == 2 else 8):
        for w in enumerate_language(model, n).words:
            s = w.symbols
            # both one-symbol factors suffice by induction
            assert model.admits(Word(s[1:], model.m)) and model.admits(Word(s[:-1], model.m))
            assert any(model.admits(Word(s + bytes((j,)), model.m)) for j in range(model.m))


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_count_matches_enumeration(name):
    model = FIXTURES[name]
    for n in range(0, 9):
        assert count_words(model, n) == enumerate_language(model, n).count


def test_entropy_examples():
    assert entropy_estimate(Full(2), 10).estimate == pytest.approx(math.log(2), abs=1e-15)
    phi = (1 + 5 ** 0.5) / 2
    assert abs(entropy_estimate(FIXTURES["golden"], 20).estimate - math.log(phi)) < 0.05
    # lambda^-2 + lambda^-3 = 1  <=>  lambda^3 - lambda - 1 = 0
    lam = max(r.real for r in np.roots([1, 0, -1, -1]) if abs(r.imag) < 1e-12)
    assert abs(entropy_estimate(FIXTURES["sgap12"], 20).estimate - math.log(lam)) < 0.06


def test_fibonacci_counts():
    fib = [1, 1]
    while len(fib) < 25:
        fib.append(fib[-1] + fib[-2])
    for n in range(0, 20):
        assert count_words(FIXTURES["golden"], n) == fib[n + 1]


@given(st.lists(st.text("01", min_size=1, max_size=4), min_size=1, max_size=3),
       st.text("01", min_size=1, max_size=4))
def test_sft_monotone_in_forbidden_set(forbidden, extra):
    a = SFT(2, [W(f) for f in forbidden])
    b = SFT(2, [W(f) for f in forbidden + [extra]])
    for n in range(0, 9):
        assert count_words(b, n) <= count_words(a, n)


def test_budget_env_override(monkeypatch):
    monkeypatch.setenv("RECUR_BUDGET", "100")
    with pytest.raises(BudgetExceeded):
        enumerate_language(Full(2), 7)
    assert enumerate_language(Full(2), 6).count == 64
    monkeypatch.setenv("RECUR_BUDGET", "lots")
    with pytest.raises(RecurError):
        enumerate_language(Full(2), 3)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_config_roundtrip(name, tmp_path):
    model = FIXTURES[name]
    path = tmp_path / "m.json"
    save_model(model, path)
    assert path.read_text().splitlines()[1].strip().startswith('"schema": "recur-model/1"')
    back = load_model(path)
    assert model_to_config(back) == model_to_config(model)
    for n in range(6):
        assert count_words(back, n) == count_words(model, n)


def test_config_errors(tmp_path):
    with pytest.raises(RecurError):
        model_from_config({"kind": "nope"})
    with pytest.raises(RecurError):
        model_from_config({"kind": "sgap", "m": 3, "S": {"set": [1]}})
    with pytest.raises(RecurError):
        model_from_config({"kind": "sft", "m": 2, "forbidden": [""]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(RecurError):
        load_model(bad)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_sample_word_admissible(name):
    model = FIXTURES[name]
    rng = np.random.Generator(np.random.PCG64(7))
    w = sample_word(model, 200, rng)
    assert len(w) == 200 and model.admits(w)
