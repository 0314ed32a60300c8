import math
from itertools import product

import pytest
from hypothesis import given, strategies as st

from symrecur.errors import AlphabetMismatch, RecurError
from symrecur.words import (INDISTINGUISHABLE, Word, concat, metric_distance, prefix,
                            subword_occurrences, suffix)

W = Word.parse


def words(m=2, max_size=12):
    return st.lists(st.integers(0, m - 1), max_size=max_size).map(lambda s: Word.of(s, m))


def test_concat_examples():
    assert concat(Word.empty(), W("01")) == W("01")
    assert concat(W("01"), W("10")) == W("0110")
    assert concat(Word.empty(), Word.empty()) == Word.empty()


def test_prefix_suffix_examples():
    assert prefix(W("0110"), 2) == W("01")
    assert suffix(W("0110"), 3) == W("110")
    assert prefix(W("0110"), 4) == W("0110")
    with pytest.raises(RecurError):
        prefix(W("01"), 3)
    with pytest.raises(RecurError):
        suffix(W("01"), 0)


def test_occurrences_examples():
    assert subword_occurrences(W("01"), W("0101")) == [1, 3]
    assert subword_occurrences(W("11"), W("0101")) == []
    assert subword_occurrences(W("010"), W("01010")) == [1, 3]


def test_metric_examples():
    assert metric_distance(W("0"), W("1")) == pytest.approx(math.exp(-1))
    assert metric_distance(W("011"), W("010")) == pytest.approx(math.exp(-3))
    assert metric_distance(W("01"), W("01")) is INDISTINGUISHABLE


def test_alphabet_mismatch_rejected():
    with pytest.raises(AlphabetMismatch):
        concat(Word.parse("01", 2), Word.parse("01", 3))
    with pytest.raises(RecurError):
        Word.of([3], 3)


def test_text_format_roundtrip():
    assert Word.empty().format(cli=True) == "eps"
    assert Word.parse("eps") == Word.empty()
    w = Word.of([0, 11, 3], 12)
    assert w.format() == "0,11,3"
    assert Word.parse(w.format(), 12) == w


@given(words(), words(), words())
def test_concat_associative_with_identity(u, v, w):
    assert concat(concat(u, v), w) == concat(u, concat(v, w))
    assert concat(Word.empty(), u) == u == concat(u, Word.empty())
    assert len(concat(u, v)) == len(u) + len(v)


@given(words(max_size=20), st.data())
def test_prefix_suffix_reconstruct(w, data):
    n = data.draw(st.integers(0, len(w)))
    head = prefix(w, n) if n else Word.empty()
    tail = suffix(w, len(w) - n) if len(w) - n else Word.empty()
    assert concat(head, tail) == w


def _naive_occ(v, w):
    return [i + 1 for i in range(len(w) - len(v) + 1)
            if all(w[i + j] == v[j] for j in range(len(v)))]


def test_occurrences_exhaustive_small():
    # every pattern of length <= 3 against every text of length <= 8
    texts = [Word.of(t) for n in range(9) for t in product((0, 1), repeat=n)]
    pats = [Word.of(p) for n in range(1, 4) for p in product((0, 1), repeat=n)]
    for w in texts:
        for v in pats:
            assert subword_occurrences(v, w) == _naive_occ(v, w)


@given(words(max_size=12).filter(len), words(max_size=12))
def test_occurrences_oracle(v, w):
    assert subword_occurrences(v, w) == _naive_occ(v, w)


@given(words(m=3, max_size=10), words(m=3, max_size=10))
def test_metric_properties(x, y):
    d = metric_distance(x, y)
    assert d == metric_distance(y, x) or (d is INDISTINGUISHABLE and metric_distance(y, x) is INDISTINGUISHABLE)
    if d is INDISTINGUISHABLE:
        n = min(len(x), len(y))
        assert x.symbols[:n] == y.symbols[:n]
        return
    i = round(-math.log(d))
    assert x[i - 1] != y[i - 1] and x.symbols[:i - 1] == y.symbols[:i - 1]
    # first disagreement at index i gives e^{-i}, so d <= e^{-n-1} iff the first n symbols agree
    for n in range(0, min(len(x), len(y)) + 1):
        agree = x.symbols[:n] == y.symbols[:n]
        assert (d <= math.exp(-n - 1) * (1 + 1e-12)) == agree
